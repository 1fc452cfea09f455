#ifndef FUMI_EXPERIMENT_HPP
#define FUMI_EXPERIMENT_HPP

// Monte-Carlo experiment runner.  A JSON config describes the scene (either
// synthesized from a spectral library or an existing bundle on disk), the
// degradation, and the solver settings; run_experiment executes the requested
// number of runs (optionally across threads), scores each against the ground
// truth, and writes per-run and averaged artifacts under output_dir.
//
// Run r draws its scene, noise, and solver seeds from master_seed + r, so
// results depend only on the master seed and run index, never on scheduling.

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fumi/datagen.hpp"
#include "fumi/driver.hpp"
#include "fumi/io.hpp"
#include "fumi/metrics.hpp"

namespace fumi {

struct ExperimentConfig {
    // Scene: a bundle path wins over synthetic parameters if both are given.
    std::string scene_bundle;
    int n_rows = 0, n_cols = 0, p = 0;
    int library_bands = 224, library_size = 12;
    std::string library_csv;  // optional external library; empty = synthetic
    VectorXd dirichlet_alpha; // empty = symmetric alpha 1
    int pure_patch = 0;       // side length of a planted pure patch per material

    // Degradation.
    double blur_sigma = 1.7;
    int blur_size = 7;
    int d = 4;
    std::string response_kind = "landsat";
    int response_param = 7;
    double snr_h_db = 50.0, snr_m_db = 50.0; // <= 0 means noiseless

    FumiConfig fumi; // fumi.p <= 0 inherits the scene's p

    int monte_carlo_runs = 1;
    std::uint64_t master_seed = 0;
    std::string output_dir;
    int threads = 0; // <= 0: decide from FUMI_THREADS or the hardware
};

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("scene")) {
        const json& s = j.at("scene");
        if (s.contains("bundle")) cfg.scene_bundle = s.at("bundle").get<std::string>();
        cfg.n_rows = s.value("n_rows", 0);
        cfg.n_cols = s.value("n_cols", 0);
        cfg.p = s.value("p", 0);
        cfg.library_bands = s.value("library_bands", 224);
        cfg.library_size = s.value("library_size", 12);
        cfg.library_csv = s.value("library_csv", std::string());
        cfg.pure_patch = s.value("pure_patch", 0);
        if (s.contains("dirichlet_alpha")) {
            const auto a = s.at("dirichlet_alpha").get<std::vector<double>>();
            cfg.dirichlet_alpha =
                Eigen::Map<const VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
        }
    }
    if (j.contains("degradation")) {
        const json& d = j.at("degradation");
        cfg.blur_sigma = d.value("blur_sigma", 1.7);
        cfg.blur_size = d.value("blur_size", 7);
        cfg.d = d.value("d", 4);
        cfg.response_kind = d.value("response", std::string("landsat"));
        cfg.response_param = d.value("response_param", 7);
        cfg.snr_h_db = d.value("snr_h_db", 50.0);
        cfg.snr_m_db = d.value("snr_m_db", 50.0);
    }
    if (j.contains("fumi")) {
        const json& f = j.at("fumi");
        const std::string mode = f.value("mode", std::string("unsupervised"));
        if (mode == "supervised")
            cfg.fumi.mode = FusionMode::supervised;
        else if (mode == "unsupervised")
            cfg.fumi.mode = FusionMode::unsupervised;
        else
            throw std::invalid_argument("experiment config: unknown mode '" + mode + "'");
        cfg.fumi.p = f.value("p", 0);
        cfg.fumi.mu = f.value("mu", 0.0);
        cfg.fumi.inner_iters = f.value("inner_iters", 30);
        cfg.fumi.outer_tol = f.value("outer_tol", 1e-4);
        cfg.fumi.max_outer = f.value("max_outer", 100);
        cfg.fumi.use_subspace = f.value("subspace", false);
        cfg.fumi.subspace_rank = f.value("subspace_rank", 0);
        cfg.fumi.random_init = f.value("random_init", false);
    }
    cfg.monte_carlo_runs = j.value("monte_carlo_runs", 1);
    cfg.master_seed = j.value("seed", std::uint64_t{0});
    cfg.output_dir = j.value("output_dir", std::string());
    cfg.threads = j.value("threads", 0);

    if (cfg.monte_carlo_runs < 1)
        throw std::invalid_argument("experiment config: monte_carlo_runs must be >= 1");
    if (cfg.scene_bundle.empty() && (cfg.n_rows <= 0 || cfg.n_cols <= 0 || cfg.p <= 0))
        throw std::invalid_argument(
            "experiment config: need a scene bundle or positive n_rows/n_cols/p");
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(load_json(path));
}

namespace detail {

// Carve an s x s pure square per material into distinct corners (then spiral
// inward for p > 4) so the initializer can find near-pure spectra.
inline void plant_pure_patches(MatrixXd& a, int n_rows, int n_cols, int s) {
    const int p = static_cast<int>(a.rows());
    const int ps = std::min({s, n_rows, n_cols});
    for (int k = 0; k < p; ++k) {
        const int ring = k / 4;
        int r0, c0;
        switch (k % 4) {
            case 0: r0 = ring * ps, c0 = ring * ps; break;
            case 1: r0 = ring * ps, c0 = n_cols - (ring + 1) * ps; break;
            case 2: r0 = n_rows - (ring + 1) * ps, c0 = ring * ps; break;
            default: r0 = n_rows - (ring + 1) * ps, c0 = n_cols - (ring + 1) * ps; break;
        }
        if (r0 < 0 || c0 < 0 || r0 + ps > n_rows || c0 + ps > n_cols)
            throw std::invalid_argument("plant_pure_patches: scene too small for the patches");
        for (int c = c0; c < c0 + ps; ++c)
            for (int r = r0; r < r0 + ps; ++r) {
                a.col(static_cast<Eigen::Index>(c) * n_rows + r).setZero();
                a(k, static_cast<Eigen::Index>(c) * n_rows + r) = 1.0;
            }
    }
}

} // namespace detail

// The ground truth + observations for one Monte-Carlo run.  For a synthetic
// config, run r uses seed master + r for the library picks, the abundance
// field, and (offset to decouple the streams) the noise draw.
inline SceneBundle build_run_scene(const ExperimentConfig& cfg, int run_index) {
    if (!cfg.scene_bundle.empty()) return load_scene_bundle(cfg.scene_bundle);

    const std::uint64_t run_seed = cfg.master_seed + static_cast<std::uint64_t>(run_index);

    SpectralLibrary lib = cfg.library_csv.empty()
                              ? synth_library(cfg.library_bands, cfg.library_size, cfg.master_seed)
                              : load_library(cfg.library_csv);
    SceneSpec spec;
    spec.n_rows = cfg.n_rows;
    spec.n_cols = cfg.n_cols;
    spec.p = cfg.p;
    spec.dirichlet_alpha = cfg.dirichlet_alpha;
    spec.seed = run_seed;
    SceneData sc = sample_scene(spec, lib);
    if (cfg.pure_patch > 0) {
        detail::plant_pure_patches(sc.A, cfg.n_rows, cfg.n_cols, cfg.pure_patch);
        sc.x = mix(sc.M, sc.A, cfg.n_rows, cfg.n_cols);
    }

    SceneBundle b;
    b.meta.bands = lib.bands();
    b.meta.n_rows = cfg.n_rows;
    b.meta.n_cols = cfg.n_cols;
    b.meta.p = cfg.p;
    b.meta.d = cfg.d;
    b.meta.blur_sigma = cfg.blur_sigma;
    b.meta.blur_size = cfg.blur_size;
    b.meta.response_kind = cfg.response_kind;
    b.meta.response_param = cfg.response_param;
    b.meta.snr_h_db = cfg.snr_h_db;
    b.meta.snr_m_db = cfg.snr_m_db;
    b.meta.seed = run_seed;

    // Noise variances come from the clean degraded pair at the target SNR.
    const BlurOperator blur = b.meta.blur_sigma > 0.0
                                  ? make_blur_operator(
                                        gaussian_kernel(b.meta.blur_sigma, b.meta.blur_size),
                                        cfg.n_rows, cfg.n_cols)
                                  : make_blur_operator(delta_kernel(), cfg.n_rows, cfg.n_cols);
    const SpectralResponse resp = build_response(b.meta);
    const SpectralImage yh_clean = downsample(Downsampler(cfg.d), apply_blur(blur, sc.x));
    const SpectralImage ym_clean = apply_spectral_response(resp.weights, sc.x);
    b.meta.var_h = cfg.snr_h_db > 0.0 ? snr_to_variance(yh_clean.data, cfg.snr_h_db)
                                      : VectorXd::Zero(yh_clean.bands());
    b.meta.var_m = cfg.snr_m_db > 0.0 ? snr_to_variance(ym_clean.data, cfg.snr_m_db)
                                      : VectorXd::Zero(ym_clean.bands());

    const Observations obs = degrade(build_model(b.meta), sc.x, run_seed + 0x9E3779B9ULL);
    b.M = std::move(sc.M);
    b.A = SpectralImage(std::move(sc.A), cfg.n_rows, cfg.n_cols);
    b.X = std::move(sc.x);
    b.y_h = obs.y_h;
    b.y_m = obs.y_m;
    return b;
}

struct RunOutcome {
    FusionReport fusion;
    UnmixReport unmix;
    FumiResult result;
};

// Solve one run's scene; the run index only sets the solver seed.
inline FumiResult solve_scene(const ExperimentConfig& cfg, const SceneBundle& scene,
                              int run_index) {
    FumiConfig fc = cfg.fumi;
    if (fc.p <= 0) fc.p = scene.meta.p;
    fc.seed = cfg.master_seed + static_cast<std::uint64_t>(run_index);
    return run_fumi(scene.y_h, scene.y_m, build_model(scene.meta), fc);
}

// Solve one run's scene and score it against the bundle's ground truth.
inline RunOutcome execute_run(const ExperimentConfig& cfg, const SceneBundle& scene,
                              int run_index) {
    RunOutcome out;
    out.result = solve_scene(cfg, scene, run_index);
    out.fusion = fusion_metrics(out.result.X_hat, scene.X, scene.meta.d);
    out.fusion.wall_time_s = out.result.wall_time;
    out.unmix = unmix_metrics(out.result.M_hat, out.result.A_hat, scene.M, scene.A.data);
    return out;
}

namespace detail {

inline void write_trace_csv(const std::vector<Objective>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out.precision(17);
    out << "outer,objective,hs_term,ms_term\n";
    for (std::size_t k = 0; k < trace.size(); ++k)
        out << k + 1 << ',' << trace[k].value << ',' << trace[k].hs_term << ','
            << trace[k].ms_term << '\n';
}

// Per-pixel RMSE across bands, as a spatial map.
inline VectorXd rmse_map(const SpectralImage& est, const SpectralImage& ref) {
    const Eigen::Index n = ref.data.cols();
    VectorXd map(n);
    for (Eigen::Index j = 0; j < n; ++j)
        map[j] = std::sqrt((est.data.col(j) - ref.data.col(j)).squaredNorm() /
                           static_cast<double>(ref.data.rows()));
    return map;
}

inline void write_run_artifacts(const std::filesystem::path& dir, const SceneBundle& scene,
                                const RunOutcome& out) {
    std::filesystem::create_directories(dir);
    save_json(to_json(out.fusion), (dir / "fusion.json").string());
    save_json(to_json(out.unmix), (dir / "unmix.json").string());
    write_trace_csv(out.result.objective_trace, (dir / "trace.csv").string());

    const int nr = scene.X.n_rows, nc = scene.X.n_cols;
    save_pgm(rmse_map(out.result.X_hat, scene.X), nr, nc, (dir / "rmse_map.pgm").string());

    // Abundance maps in reference order: permutation[k] says which reference
    // row estimate row k explains.
    const int p = static_cast<int>(scene.A.bands());
    for (int v = 0; v < p; ++v) {
        save_pgm(scene.A.data.row(v).transpose(), nr, nc,
                 (dir / ("abundance_ref_" + std::to_string(v) + ".pgm")).string());
        int est_row = v;
        for (int k = 0; k < p; ++k)
            if (out.unmix.permutation[static_cast<std::size_t>(k)] == v) est_row = k;
        save_pgm(out.result.A_hat.row(est_row).transpose(), nr, nc,
                 (dir / ("abundance_est_" + std::to_string(v) + ".pgm")).string());
    }

    const Eigen::Index band = scene.X.data.rows() / 2;
    save_pgm(scene.X.data.row(band).transpose(), nr, nc, (dir / "band_ref.pgm").string());
    save_pgm(out.result.X_hat.data.row(band).transpose(), nr, nc,
             (dir / "band_est.pgm").string());
}

} // namespace detail

struct ExperimentSummary {
    std::vector<RunOutcome> runs;
    FusionReport fusion_avg;
    UnmixReport unmix_avg; // permutation left empty; it is per-run
};

inline int resolve_thread_count(int requested, int runs) {
    int t = requested;
    if (t <= 0) {
        if (const char* env = std::getenv("FUMI_THREADS")) t = std::atoi(env);
    }
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    return std::min(t, runs);
}

// Execute all runs (in parallel if allowed), average the reports in run-index
// order, and, when output_dir is set, write run_XXX/ artifacts plus the
// averaged reports and a runs.csv table.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
    const int n_runs = cfg.monte_carlo_runs;
    ExperimentSummary sum;
    sum.runs.resize(static_cast<std::size_t>(n_runs));

    const int n_threads = resolve_thread_count(cfg.threads, n_runs);
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_runs));
    auto worker = [&]() {
        for (int r = next.fetch_add(1); r < n_runs; r = next.fetch_add(1)) {
            try {
                const SceneBundle scene = build_run_scene(cfg, r);
                sum.runs[static_cast<std::size_t>(r)] = execute_run(cfg, scene, r);
                if (!cfg.output_dir.empty())
                    detail::write_run_artifacts(std::filesystem::path(cfg.output_dir) /
                                                    ("run_" + std::to_string(r)),
                                                scene, sum.runs[static_cast<std::size_t>(r)]);
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    // Averages accumulate in run-index order so the result cannot depend on
    // which thread finished first.
    for (const RunOutcome& r : sum.runs) {
        sum.fusion_avg.rsnr_db += r.fusion.rsnr_db;
        sum.fusion_avg.uiqi += r.fusion.uiqi;
        sum.fusion_avg.sam_deg += r.fusion.sam_deg;
        sum.fusion_avg.ergas += r.fusion.ergas;
        sum.fusion_avg.dd += r.fusion.dd;
        sum.fusion_avg.wall_time_s += r.fusion.wall_time_s;
        sum.unmix_avg.sam_M_deg += r.unmix.sam_M_deg;
        sum.unmix_avg.nmse_M_db += r.unmix.nmse_M_db;
        sum.unmix_avg.nmse_A_db += r.unmix.nmse_A_db;
    }
    sum.fusion_avg.rsnr_db /= n_runs;
    sum.fusion_avg.uiqi /= n_runs;
    sum.fusion_avg.sam_deg /= n_runs;
    sum.fusion_avg.ergas /= n_runs;
    sum.fusion_avg.dd /= n_runs;
    sum.fusion_avg.wall_time_s /= n_runs;
    sum.unmix_avg.sam_M_deg /= n_runs;
    sum.unmix_avg.nmse_M_db /= n_runs;
    sum.unmix_avg.nmse_A_db /= n_runs;

    if (!cfg.output_dir.empty()) {
        const std::filesystem::path root(cfg.output_dir);
        std::filesystem::create_directories(root);
        save_json(to_json(sum.fusion_avg), (root / "fusion_avg.json").string());
        save_json(to_json(sum.unmix_avg), (root / "unmix_avg.json").string());

        // One row per run; timing stays out so the table is byte-reproducible.
        std::ofstream csv((root / "runs.csv").string());
        if (!csv) throw std::runtime_error("run_experiment: cannot write runs.csv");
        csv.precision(17);
        csv << "run,rsnr_db,uiqi,sam_deg,ergas,dd,sam_M_deg,nmse_M_db,nmse_A_db,iterations\n";
        for (int r = 0; r < n_runs; ++r) {
            const RunOutcome& o = sum.runs[static_cast<std::size_t>(r)];
            csv << r << ',' << o.fusion.rsnr_db << ',' << o.fusion.uiqi << ','
                << o.fusion.sam_deg << ',' << o.fusion.ergas << ',' << o.fusion.dd << ','
                << o.unmix.sam_M_deg << ',' << o.unmix.nmse_M_db << ',' << o.unmix.nmse_A_db
                << ',' << o.result.iterations << '\n';
        }
        csv << "avg," << sum.fusion_avg.rsnr_db << ',' << sum.fusion_avg.uiqi << ','
            << sum.fusion_avg.sam_deg << ',' << sum.fusion_avg.ergas << ',' << sum.fusion_avg.dd
            << ',' << sum.unmix_avg.sam_M_deg << ',' << sum.unmix_avg.nmse_M_db << ','
            << sum.unmix_avg.nmse_A_db << ",\n";
    }
    return sum;
}

} // namespace fumi

#endif
