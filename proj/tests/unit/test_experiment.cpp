#include "ncpvi/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace ncpvi;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ncpvi_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_config(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.n_coarse = 40;
    cfg.n_fine = 2001;
    cfg.gibbs.n_samples = 6000;
    cfg.gibbs.burn_in = 1000;
    cfg.gibbs.beta = 0.2;
    cfg.mesh_study_meshes = {40, 60};
    cfg.output_dir = out.string();
    return cfg;
}

/// File content with '#' comment lines stripped (the timestamp header is
/// allowed to differ between reruns).
std::string stripped(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::string line, out;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        out += line;
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("config parser applies keys and rejects unknown ones") {
    ExperimentConfig cfg = parse_config_lines({
        "# comment",
        "",
        "n_coarse=64",
        "vi.tol=1e-5",
        "gibbs.beta = 0.25",
        "mesh_study.meshes=100,200",
        "seeds.data=9",
    });
    CHECK(cfg.n_coarse == 64);
    CHECK(cfg.vi.tol == 1e-5);
    CHECK(cfg.gibbs.beta == 0.25);
    CHECK(cfg.mesh_study_meshes == std::vector<int>{100, 200});
    CHECK(cfg.data_seed == 9);

    CHECK_THROWS_AS(parse_config_lines({"vi.tolerance=1e-5"}), ConfigError);
    CHECK_THROWS_AS(parse_config_lines({"n_coarse=abc"}), ConfigError);
    CHECK_THROWS_AS(parse_config_lines({"just a line"}), ConfigError);
    CHECK_THROWS_AS(parse_config_lines({"n_coarse=200", "n_fine=100"}), ConfigError);
    CHECK_THROWS_AS(parse_config_lines({"noise_pct=-0.1"}), ConfigError);
}

TEST_CASE("config hash tracks content") {
    ExperimentConfig a;
    ExperimentConfig b;
    CHECK(config_hash(a) == config_hash(b));
    b.vi.tol = 2e-4;
    CHECK(config_hash(a) != config_hash(b));
    ExperimentConfig c;
    c.output_dir = "elsewhere";  // output location does not alter the computation
    CHECK(config_hash(a) == config_hash(c));
}

TEST_CASE("generate-data writes a well-formed reproducible file") {
    TempDir tmp;
    ExperimentConfig cfg = small_config(tmp.path);
    CHECK(cmd_generate_data(cfg) == 0);

    const fs::path data = tmp.path / "data.csv";
    REQUIRE(fs::exists(data));
    const std::string first = stripped(data);
    CHECK(first.find("tau=") != std::string::npos);
    CHECK(first.find("x_obs,d") != std::string::npos);

    // 20 observation rows.
    auto [obs, vec] = read_data_csv(data.string());
    CHECK(obs.size() == 20);
    CHECK(vec.d.size() == 20);

    // Idempotent up to the timestamp header.
    CHECK(cmd_generate_data(cfg) == 0);
    CHECK(stripped(data) == first);
}

TEST_CASE("run-vi requires data and then emits the result files") {
    TempDir tmp;
    ExperimentConfig cfg = small_config(tmp.path);
    CHECK_THROWS_AS(cmd_run_vi(cfg), ConfigError);

    REQUIRE(cmd_generate_data(cfg) == 0);
    CHECK(cmd_run_vi(cfg) == 0);
    for (const char* name : {"vi_trace.csv", "eigenvalues.csv", "vi_state.csv", "vi_metrics.csv",
                             "u_mean.csv", "credibility_band.csv"}) {
        CHECK(fs::exists(tmp.path / name));
    }

    const std::string trace_once = stripped(tmp.path / "vi_trace.csv");
    CHECK(cmd_run_vi(cfg) == 0);
    CHECK(stripped(tmp.path / "vi_trace.csv") == trace_once);

    // The persisted state reconstructs what was written.
    ViStateFile s = read_vi_state((tmp.path / "vi_state.csv").string());
    CHECK(s.n == cfg.n_coarse);
    CHECK(s.lam_star > 0.0);
    CHECK(s.c_lambda > 0.0);
    // rho is the value used to build C_v (previous iterate); at a converged
    // state it sits within the stop tolerance of the reported factors.
    CHECK(s.rho == doctest::Approx(s.c_lambda + s.lam_star * s.lam_star).epsilon(0.01));
}

TEST_CASE("compare needs both runs and then reports the metric set") {
    TempDir tmp;
    ExperimentConfig cfg = small_config(tmp.path);
    REQUIRE(cmd_generate_data(cfg) == 0);
    REQUIRE(cmd_run_vi(cfg) == 0);
    CHECK_THROWS_AS(cmd_compare(cfg), ConfigError);  // no Gibbs output yet

    REQUIRE(cmd_run_gibbs(cfg) == 0);
    CHECK(fs::exists(tmp.path / "lambda_trace.csv"));
    CHECK(fs::exists(tmp.path / "gibbs_summary.csv"));

    CHECK(cmd_compare(cfg) == 0);
    REQUIRE(fs::exists(tmp.path / "metrics.csv"));
    const std::string metrics = stripped(tmp.path / "metrics.csv");
    for (const char* key : {"kl_lambda_vi_vs_gibbs", "mean_rel_err_vi_vs_gibbs",
                            "cov_matrix_rel_err", "variance_rel_err", "cov_band20_rel_err"}) {
        CHECK(metrics.find(key) != std::string::npos);
    }
    // Offsets beyond the mesh size are dropped (n = 40 here).
    for (int k : {0, 20}) {
        CHECK(fs::exists(tmp.path / ("band_vi_k" + std::to_string(k) + ".csv")));
        CHECK(fs::exists(tmp.path / ("band_gibbs_k" + std::to_string(k) + ".csv")));
    }
    CHECK_FALSE(fs::exists(tmp.path / "band_vi_k50.csv"));
}

TEST_CASE("mesh-study emits one table row per mesh") {
    TempDir tmp;
    ExperimentConfig cfg = small_config(tmp.path);
    REQUIRE(cmd_generate_data(cfg) == 0);
    CHECK(cmd_mesh_study(cfg) == 0);
    const std::string table = stripped(tmp.path / "lambda_table.csv");
    CHECK(table.find("mesh,lambda_mean,lambda_var") != std::string::npos);
    CHECK(table.find("40,") != std::string::npos);
    CHECK(table.find("60,") != std::string::npos);
    CHECK(fs::exists(tmp.path / "vi_trace_n40.csv"));
    CHECK(fs::exists(tmp.path / "vi_trace_n60.csv"));
}
