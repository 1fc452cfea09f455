#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fumi/experiment.hpp"

using namespace fumi;
namespace fs = std::filesystem;

namespace {

// Scratch directory wiped on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path("/tmp/fumi_cli_" + name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Launch the installed binary; stdout+stderr land in `log`.
int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = std::string(FUMI_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// A small noisy scene the solver finishes in well under a second.
json small_config(const std::string& out_dir) {
    return json{
        {"scene", {{"n_rows", 16}, {"n_cols", 16}, {"p", 3}, {"library_bands", 32},
                   {"library_size", 8}}},
        {"degradation", {{"blur_sigma", 1.0}, {"blur_size", 5}, {"d", 4},
                         {"response", "landsat"}, {"response_param", 4}, {"snr_h_db", 30.0},
                         {"snr_m_db", 30.0}}},
        {"fumi", {{"mode", "unsupervised"}, {"mu", 100.0}, {"inner_iters", 20},
                  {"max_outer", 40}}},
        {"monte_carlo_runs", 1},
        {"seed", 11},
        {"output_dir", out_dir}};
}

json masked(const std::string& path) {
    json j = load_json(path);
    j.erase("wall_time_s");
    return j;
}

} // namespace

TEST_CASE("experiment run emits the full artifact set", "[cli]") {
    TempDir dir("smoke");
    save_json(small_config(dir.file("out")), dir.file("cfg.json"));
    REQUIRE(run_cli("run -c " + dir.file("cfg.json"), dir.file("log.txt")) == 0);

    const fs::path out(dir.file("out"));
    for (const char* name : {"runs.csv", "fusion_avg.json", "unmix_avg.json"})
        REQUIRE(fs::exists(out / name));
    const fs::path run0 = out / "run_0";
    for (const char* name :
         {"fusion.json", "unmix.json", "trace.csv", "rmse_map.pgm", "band_est.pgm",
          "band_ref.pgm", "abundance_est_0.pgm", "abundance_ref_0.pgm", "abundance_est_1.pgm",
          "abundance_ref_1.pgm", "abundance_est_2.pgm", "abundance_ref_2.pgm"})
        REQUIRE(fs::exists(run0 / name));

    const json fusion = load_json((run0 / "fusion.json").string());
    REQUIRE(fusion.size() == 6);
    for (const char* key : {"rsnr_db", "uiqi", "sam_deg", "ergas", "dd", "wall_time_s"})
        REQUIRE(fusion.contains(key));
    const json unmix = load_json((run0 / "unmix.json").string());
    REQUIRE(unmix.size() == 4);
    REQUIRE(unmix.at("permutation").size() == 3);

    // Maps must carry the scene geometry, traces the documented header.
    const PgmImage map = load_pgm((run0 / "rmse_map.pgm").string());
    REQUIRE(map.n_rows == 16);
    REQUIRE(map.n_cols == 16);
    const std::string trace = slurp((run0 / "trace.csv").string());
    REQUIRE(trace.rfind("outer,objective,hs_term,ms_term\n", 0) == 0);
}

TEST_CASE("artifacts are byte-identical across repeats and thread counts", "[cli]") {
    TempDir dir("repeat");
    save_json(small_config(dir.file("out_a")), dir.file("cfg_a.json"));
    save_json(small_config(dir.file("out_b")), dir.file("cfg_b.json"));
    json two = small_config(dir.file("out_a"));
    two["monte_carlo_runs"] = 2;
    save_json(two, dir.file("cfg_a.json"));
    two["output_dir"] = dir.file("out_b");
    save_json(two, dir.file("cfg_b.json"));

    REQUIRE(run_cli("run -c " + dir.file("cfg_a.json") + " --threads 1", dir.file("a.txt")) == 0);
    REQUIRE(run_cli("run -c " + dir.file("cfg_b.json") + " --threads 2", dir.file("b.txt")) == 0);

    const fs::path a(dir.file("out_a")), b(dir.file("out_b"));
    REQUIRE(slurp((a / "runs.csv").string()) == slurp((b / "runs.csv").string()));
    for (int r = 0; r < 2; ++r) {
        const std::string run = "run_" + std::to_string(r);
        REQUIRE(slurp((a / run / "trace.csv").string()) == slurp((b / run / "trace.csv").string()));
        REQUIRE(slurp((a / run / "rmse_map.pgm").string()) ==
                slurp((b / run / "rmse_map.pgm").string()));
        // Timing is the one legitimately non-reproducible field.
        REQUIRE(masked((a / run / "fusion.json").string()) ==
                masked((b / run / "fusion.json").string()));
        REQUIRE(load_json((a / run / "unmix.json").string()) ==
                load_json((b / run / "unmix.json").string()));
    }
    REQUIRE(masked((a / "fusion_avg.json").string()) == masked((b / "fusion_avg.json").string()));
}

TEST_CASE("scene, solve, and score stages compose to the experiment result", "[cli]") {
    TempDir dir("stages");
    save_json(small_config(dir.file("out")), dir.file("cfg.json"));
    REQUIRE(run_cli("run -c " + dir.file("cfg.json"), dir.file("log.txt")) == 0);

    REQUIRE(run_cli("gen-scene -c " + dir.file("cfg.json") + " --run 0 --out " +
                        dir.file("scene"),
                    dir.file("log.txt")) == 0);
    REQUIRE(run_cli("fuse -c " + dir.file("cfg.json") + " --scene " + dir.file("scene") +
                        " --run 0 --out " + dir.file("est"),
                    dir.file("log.txt")) == 0);
    REQUIRE(run_cli("metrics --scene " + dir.file("scene") + " --estimate " + dir.file("est") +
                        " --out " + dir.file("rep"),
                    dir.file("log.txt")) == 0);

    const fs::path run0 = fs::path(dir.file("out")) / "run_0";
    REQUIRE(masked(dir.file("rep") + "/fusion.json") == masked((run0 / "fusion.json").string()));
    REQUIRE(load_json(dir.file("rep") + "/unmix.json") ==
            load_json((run0 / "unmix.json").string()));
    REQUIRE(slurp(dir.file("est") + "/trace.csv") == slurp((run0 / "trace.csv").string()));
}

TEST_CASE("info reports the bundle geometry recorded in its metadata", "[cli]") {
    TempDir dir("info");
    save_json(small_config(dir.file("out")), dir.file("cfg.json"));
    REQUIRE(run_cli("gen-scene -c " + dir.file("cfg.json") + " --out " + dir.file("scene"),
                    dir.file("log.txt")) == 0);
    REQUIRE(run_cli("info " + dir.file("scene"), dir.file("info.txt")) == 0);

    const json meta = load_json(dir.file("scene") + "/meta.json");
    const std::string text = slurp(dir.file("info.txt"));
    const int pixels = meta.at("n_rows").get<int>() * meta.at("n_cols").get<int>();
    REQUIRE(text.find("bands:     " + std::to_string(meta.at("bands").get<int>())) !=
            std::string::npos);
    REQUIRE(text.find("(" + std::to_string(pixels) + " pixels)") != std::string::npos);
}

TEST_CASE("scoring the reference against itself reports zero error", "[cli]") {
    TempDir dir("selfscore");
    save_json(small_config(dir.file("out")), dir.file("cfg.json"));
    REQUIRE(run_cli("gen-scene -c " + dir.file("cfg.json") + " --out " + dir.file("scene"),
                    dir.file("log.txt")) == 0);

    fs::create_directories(dir.file("est"));
    fs::copy_file(dir.file("scene") + "/X.bin", dir.file("est") + "/X_hat.bin");
    fs::copy_file(dir.file("scene") + "/A.bin", dir.file("est") + "/A_hat.bin");
    fs::copy_file(dir.file("scene") + "/M.csv", dir.file("est") + "/M_hat.csv");
    REQUIRE(run_cli("metrics --scene " + dir.file("scene") + " --estimate " + dir.file("est"),
                    dir.file("log.txt")) == 0);

    const json fusion = load_json(dir.file("est") + "/fusion.json");
    REQUIRE(fusion.at("rsnr_db").get<double>() == 300.0);
    REQUIRE(fusion.at("sam_deg").get<double>() == 0.0);
    REQUIRE(fusion.at("dd").get<double>() == 0.0);
    REQUIRE_THAT(fusion.at("uiqi").get<double>(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    const json unmix = load_json(dir.file("est") + "/unmix.json");
    REQUIRE(unmix.at("sam_M_deg").get<double>() == 0.0);
    REQUIRE(unmix.at("nmse_M_db").get<double>() == -300.0);
    REQUIRE(unmix.at("nmse_A_db").get<double>() == -300.0);
}

TEST_CASE("a noiseless supervised run reaches exact recovery in the summary table", "[cli]") {
    TempDir dir("exact");
    const json cfg{
        {"scene", {{"n_rows", 16}, {"n_cols", 16}, {"p", 3}, {"library_bands", 24},
                   {"library_size", 6}, {"pure_patch", 4}}},
        {"degradation", {{"blur_sigma", 0.0}, {"blur_size", 1}, {"d", 1},
                         {"response", "identity"}, {"response_param", 0}, {"snr_h_db", 0.0},
                         {"snr_m_db", 0.0}}},
        {"fumi", {{"mode", "supervised"}, {"mu", 0.0}, {"inner_iters", 30}, {"max_outer", 100}}},
        {"monte_carlo_runs", 1},
        {"seed", 3},
        {"output_dir", dir.file("out")}};
    save_json(cfg, dir.file("cfg.json"));
    REQUIRE(run_cli("run -c " + dir.file("cfg.json"), dir.file("log.txt")) == 0);

    REQUIRE(load_json(dir.file("out") + "/fusion_avg.json").at("rsnr_db").get<double>() >= 120.0);

    // The averaged row of the table must carry the same number.
    const std::string table = slurp(dir.file("out") + "/runs.csv");
    const std::size_t avg = table.rfind("avg,");
    REQUIRE(avg != std::string::npos);
    const std::size_t comma = table.find(',', avg + 4);
    REQUIRE(std::stod(table.substr(avg + 4, comma - avg - 4)) >= 120.0);
}

TEST_CASE("bad configs and usage exit with code 2, runtime failures with 1", "[cli]") {
    TempDir dir("codes");
    std::ofstream(dir.file("nj.json")) << "{not json";
    REQUIRE(run_cli("run -c " + dir.file("nj.json"), dir.file("log.txt")) == 2);

    save_json(json{{"monte_carlo_runs", 0},
                   {"scene", {{"n_rows", 4}, {"n_cols", 4}, {"p", 2}}}},
              dir.file("bad.json"));
    REQUIRE(run_cli("run -c " + dir.file("bad.json"), dir.file("log.txt")) == 2);
    REQUIRE(run_cli("frobnicate", dir.file("log.txt")) == 2);

    // An empty bundle directory is a runtime failure, not a config error.
    fs::create_directories(dir.file("empty"));
    save_json(small_config(dir.file("out")), dir.file("cfg.json"));
    REQUIRE(run_cli("fuse -c " + dir.file("cfg.json") + " --scene " + dir.file("empty") +
                        " --out " + dir.file("est"),
                    dir.file("log.txt")) == 1);
}

TEST_CASE("experiment config parsing, validation, and run averaging", "[experiment]") {
    json j = small_config("");
    j["fumi"]["mode"] = "supervised";
    j["scene"]["dirichlet_alpha"] = {0.5, 1.0, 2.0};
    const ExperimentConfig cfg = experiment_config_from_json(j);
    REQUIRE(cfg.n_rows == 16);
    REQUIRE(cfg.p == 3);
    REQUIRE(cfg.fumi.mode == FusionMode::supervised);
    REQUIRE(cfg.fumi.mu == 100.0);
    REQUIRE(cfg.dirichlet_alpha.size() == 3);
    REQUIRE(cfg.dirichlet_alpha[2] == 2.0);
    REQUIRE(cfg.response_kind == "landsat");

    json bad = small_config("");
    bad["fumi"]["mode"] = "telepathic";
    REQUIRE_THROWS_AS(experiment_config_from_json(bad), std::invalid_argument);
    REQUIRE_THROWS_AS(experiment_config_from_json(json{{"monte_carlo_runs", 1}}),
                      std::invalid_argument);

    // Averages must be the run-index-order mean of the per-run reports.
    json two = small_config("");
    two["monte_carlo_runs"] = 2;
    const ExperimentSummary sum = run_experiment(experiment_config_from_json(two));
    REQUIRE(sum.runs.size() == 2);
    REQUIRE(sum.fusion_avg.rsnr_db ==
            (sum.runs[0].fusion.rsnr_db + sum.runs[1].fusion.rsnr_db) / 2);
    REQUIRE(sum.unmix_avg.nmse_A_db ==
            (sum.runs[0].unmix.nmse_A_db + sum.runs[1].unmix.nmse_A_db) / 2);
}
