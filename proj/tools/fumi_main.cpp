// Command-line front end.
//
//   fumi run       -c config.json [--seed S] [--out DIR] [--threads N]
//   fumi gen-scene -c config.json --out DIR [--run R] [--seed S]
//   fumi fuse      -c config.json --scene DIR --out DIR [--run R] [--seed S]
//   fumi metrics   --scene DIR --estimate DIR [--out DIR]
//   fumi info      PATH
//
// Exit codes: 0 on success, 1 on a runtime failure (missing files, solver
// abort), 2 on an invalid config or bad usage.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "fumi/experiment.hpp"

namespace {

using namespace fumi;

// Config plus the command-line overrides that beat it.
struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool has_out = false, has_seed = false, has_threads = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig cfg = load_experiment_config(args.config_path);
    if (args.has_out) cfg.output_dir = args.out_dir;
    if (args.has_seed) cfg.master_seed = args.seed;
    if (args.has_threads) cfg.threads = args.threads;
    return cfg;
}

void print_report_line(const char* label, const FusionReport& f, const UnmixReport& u,
                       int iterations) {
    std::printf("%4s  %9.4f  %8.6f  %8.4f  %8.4f  %10.3e  %9.4f  %9.3f  %9.3f", label,
                f.rsnr_db, f.uiqi, f.sam_deg, f.ergas, f.dd, u.sam_M_deg, u.nmse_M_db,
                u.nmse_A_db);
    if (iterations >= 0)
        std::printf("  %5d\n", iterations);
    else
        std::printf("\n");
}

int cmd_run(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const ExperimentSummary sum = run_experiment(cfg);

    std::printf(" run    RSNR(dB)      UIQI  SAM(deg)     ERGAS          DD  SAM_M(dg)  "
                "NMSE_M(dB) NMSE_A(dB)  iters\n");
    for (std::size_t r = 0; r < sum.runs.size(); ++r) {
        const RunOutcome& o = sum.runs[r];
        print_report_line(std::to_string(r).c_str(), o.fusion, o.unmix, o.result.iterations);
    }
    print_report_line("avg", sum.fusion_avg, sum.unmix_avg, -1);
    if (!cfg.output_dir.empty()) std::printf("artifacts: %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_gen_scene(const CommonArgs& args, int run_index) {
    const ExperimentConfig cfg = load_config(args);
    if (args.out_dir.empty())
        throw std::invalid_argument("gen-scene: --out is required");
    const SceneBundle scene = build_run_scene(cfg, run_index);
    save_scene_bundle(scene, args.out_dir);
    std::printf("scene bundle: %s (%dx%d, %d bands, p=%d, seed=%llu)\n", args.out_dir.c_str(),
                scene.meta.n_rows, scene.meta.n_cols, scene.meta.bands, scene.meta.p,
                static_cast<unsigned long long>(scene.meta.seed));
    return 0;
}

int cmd_fuse(const CommonArgs& args, const std::string& scene_dir, int run_index) {
    const ExperimentConfig cfg = load_config(args);
    if (args.out_dir.empty()) throw std::invalid_argument("fuse: --out is required");
    const SceneBundle scene = load_scene_bundle(scene_dir);
    const FumiResult res = solve_scene(cfg, scene, run_index);

    const std::filesystem::path out(args.out_dir);
    std::filesystem::create_directories(out);
    save_matrix_csv(res.M_hat, (out / "M_hat.csv").string());
    save_cube(SpectralImage(res.A_hat, scene.meta.n_rows, scene.meta.n_cols),
              (out / "A_hat.bin").string());
    save_cube(res.X_hat, (out / "X_hat.bin").string());
    detail::write_trace_csv(res.objective_trace, (out / "trace.csv").string());
    save_json(json{{"iterations", res.iterations}, {"wall_time_s", res.wall_time}},
              (out / "solve.json").string());
    std::printf("fused %s -> %s (%d outer iterations, %.2fs)\n", scene_dir.c_str(),
                args.out_dir.c_str(), res.iterations, res.wall_time);
    return 0;
}

int cmd_metrics(const std::string& scene_dir, const std::string& estimate_dir,
                std::string out_dir) {
    const SceneBundle scene = load_scene_bundle(scene_dir);
    const std::filesystem::path est(estimate_dir);
    const SpectralImage x_hat = load_cube((est / "X_hat.bin").string());
    const SpectralImage a_hat = load_cube((est / "A_hat.bin").string());
    const MatrixXd m_hat = load_matrix_csv((est / "M_hat.csv").string());

    FusionReport fusion = fusion_metrics(x_hat, scene.X, scene.meta.d);
    if (std::filesystem::exists(est / "solve.json"))
        fusion.wall_time_s = load_json((est / "solve.json").string()).value("wall_time_s", 0.0);
    const UnmixReport unmix = unmix_metrics(m_hat, a_hat.data, scene.M, scene.A.data);

    if (out_dir.empty()) out_dir = estimate_dir;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out(out_dir);
    save_json(to_json(fusion), (out / "fusion.json").string());
    save_json(to_json(unmix), (out / "unmix.json").string());
    std::printf("RSNR %.4f dB | UIQI %.6f | SAM %.4f deg | ERGAS %.4f | DD %.3e\n",
                fusion.rsnr_db, fusion.uiqi, fusion.sam_deg, fusion.ergas, fusion.dd);
    std::printf("SAM_M %.4f deg | NMSE_M %.3f dB | NMSE_A %.3f dB\n", unmix.sam_M_deg,
                unmix.nmse_M_db, unmix.nmse_A_db);
    return 0;
}

int cmd_info(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path) && fs::exists(fs::path(path) / "meta.json")) {
        const SceneMeta meta =
            scene_meta_from_json(load_json((fs::path(path) / "meta.json").string()));
        std::printf("scene bundle %s\n", path.c_str());
        std::printf("  grid:      %dx%d (%d pixels)\n", meta.n_rows, meta.n_cols,
                    meta.n_rows * meta.n_cols);
        std::printf("  bands:     %d\n", meta.bands);
        std::printf("  materials: %d\n", meta.p);
        std::printf("  blur:      sigma=%g size=%d, decimation d=%d\n", meta.blur_sigma,
                    meta.blur_size, meta.d);
        std::printf("  response:  %s (%d)\n", meta.response_kind.c_str(), meta.response_param);
        std::printf("  snr:       coarse %g dB, spectral %g dB\n", meta.snr_h_db, meta.snr_m_db);
        std::printf("  seed:      %llu\n", static_cast<unsigned long long>(meta.seed));
        return 0;
    }
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".bin") {
        const SpectralImage cube = load_cube(path);
        std::printf("cube %s: %d bands, %dx%d (%d pixels)\n", path.c_str(), cube.bands(),
                    cube.n_rows, cube.n_cols, cube.pixels());
        return 0;
    }
    if (ext == ".csv") {
        try {
            const SpectralLibrary lib = load_library(path);
            std::printf("library %s: %d materials, %d bands, %.0f-%.0f nm\n", path.c_str(),
                        lib.size(), lib.bands(), lib.wavelengths[0],
                        lib.wavelengths[lib.bands() - 1]);
        } catch (const std::exception&) {
            const MatrixXd m = load_matrix_csv(path);
            std::printf("matrix %s: %lldx%lld\n", path.c_str(),
                        static_cast<long long>(m.rows()), static_cast<long long>(m.cols()));
        }
        return 0;
    }
    if (ext == ".json") {
        const json j = load_json(path);
        if (j.contains("scene") || j.contains("monte_carlo_runs")) {
            const ExperimentConfig cfg = experiment_config_from_json(j);
            std::printf("experiment config %s\n", path.c_str());
            if (!cfg.scene_bundle.empty())
                std::printf("  scene:   bundle %s\n", cfg.scene_bundle.c_str());
            else
                std::printf("  scene:   %dx%d, p=%d, %d-band library of %d\n", cfg.n_rows,
                            cfg.n_cols, cfg.p, cfg.library_bands, cfg.library_size);
            std::printf("  runs:    %d (seed %llu)\n", cfg.monte_carlo_runs,
                        static_cast<unsigned long long>(cfg.master_seed));
            std::printf("  output:  %s\n",
                        cfg.output_dir.empty() ? "(none)" : cfg.output_dir.c_str());
        } else {
            std::printf("json %s: %s\n", path.c_str(), j.dump().substr(0, 200).c_str());
        }
        return 0;
    }
    throw std::invalid_argument("info: cannot interpret " + path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiband image fusion and spectral unmixing"};
    app.require_subcommand(1);

    CommonArgs args;
    int run_index = 0;
    std::string scene_dir, estimate_dir, info_path;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("-c,--config", args.config_path, "experiment config JSON");
        if (need_config) c->required()->check(CLI::ExistingFile);
        auto* o = sub->add_option("-o,--out", args.out_dir, "output directory");
        auto* s = sub->add_option("--seed", args.seed, "master seed override");
        auto* t = sub->add_option("--threads", args.threads, "worker thread override");
        sub->callback([&args, o, s, t]() {
            args.has_out = o->count() > 0;
            args.has_seed = s->count() > 0;
            args.has_threads = t->count() > 0;
        });
    };

    CLI::App* run = app.add_subcommand("run", "run a Monte-Carlo experiment");
    add_common(run, true);

    CLI::App* gen = app.add_subcommand("gen-scene", "synthesize one run's scene bundle");
    add_common(gen, true);
    gen->add_option("--run", run_index, "Monte-Carlo run index")->check(CLI::NonNegativeNumber);

    CLI::App* fuse = app.add_subcommand("fuse", "solve a scene bundle");
    add_common(fuse, true);
    fuse->add_option("--scene", scene_dir, "scene bundle directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    fuse->add_option("--run", run_index, "Monte-Carlo run index")->check(CLI::NonNegativeNumber);

    CLI::App* metrics = app.add_subcommand("metrics", "score estimates against a bundle");
    metrics->add_option("--scene", scene_dir, "scene bundle directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    metrics->add_option("--estimate", estimate_dir, "directory with X_hat/A_hat/M_hat")
        ->required()
        ->check(CLI::ExistingDirectory);
    metrics->add_option("--out", args.out_dir, "report directory (default: estimate dir)");

    CLI::App* info = app.add_subcommand("info", "describe a bundle, cube, library, or config");
    info->add_option("path", info_path, "path to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(args);
        if (app.got_subcommand(gen)) return cmd_gen_scene(args, run_index);
        if (app.got_subcommand(fuse)) return cmd_fuse(args, scene_dir, run_index);
        if (app.got_subcommand(metrics)) return cmd_metrics(scene_dir, estimate_dir, args.out_dir);
        if (app.got_subcommand(info)) return cmd_info(info_path);
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "fumi: invalid config: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "fumi: invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fumi: %s\n", e.what());
        return 1;
    }
    return 2;
}
