#include "ncpvi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ncpvi {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::vector<std::string> file_comments(const ExperimentConfig& cfg) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return {"generated=" + iso8601_now(), std::string("config_hash=") + hash};
}

std::ofstream open_output(const std::string& path, const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    return out;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

std::vector<double> default_obs_points() {
    std::vector<double> obs;
    for (int i = 1; i <= 20; ++i) obs.push_back(i / 20.0);
    return obs;
}

void write_kv(std::ofstream& out, const std::string& key, const std::string& value) {
    out << key << "," << value << "\n";
}

void write_field(const std::string& path, const Grid1D& grid, const Eigen::VectorXd& values,
                 const std::vector<std::string>& comments) {
    auto out = open_output(path, comments);
    out << "i,x_i,value\n";
    for (int i = 0; i < values.size(); ++i) {
        out << i << "," << fmt17(grid.nodes()[i]) << "," << fmt17(values[i]) << "\n";
    }
}

DataVector load_data(const ExperimentConfig& cfg, std::vector<double>* obs_out = nullptr) {
    const std::string path = out_path(cfg, "data.csv");
    if (!std::filesystem::exists(path)) {
        throw ConfigError("missing input: " + path + " (run generate-data first)");
    }
    auto [obs, data] = read_data_csv(path);
    if (obs_out != nullptr) *obs_out = obs;
    return data;
}

}  // namespace

double elliptic1d_truth(double x) {
    return 10.0 * (std::cos(4.0 * kPi * x) + 1.0);
}

FieldVector truth_on_grid(const Grid1D& grid) {
    Eigen::VectorXd t(grid.size());
    for (int i = 0; i < grid.size(); ++i) t[i] = elliptic1d_truth(grid.nodes()[i]);
    return FieldVector(grid, std::move(t));
}

void write_vi_state(const std::string& path, const VPosterior& v_post,
                    const LambdaPosterior& lam_post, const std::vector<std::string>& comments) {
    auto out = open_output(path, comments);
    const int n = v_post.v_star.size();
    const Eigen::VectorXd& dr = v_post.cov.dr();
    const PriorOperator& prior = v_post.cov.prior();
    const EigenPairs& eig = v_post.cov.eig();
    write_kv(out, "param,n", std::to_string(n));
    write_kv(out, "param,r", std::to_string(static_cast<int>(dr.size())));
    write_kv(out, "param,lambda_star", fmt17(lam_post.lam_star));
    write_kv(out, "param,c_lambda", fmt17(lam_post.c_lambda));
    write_kv(out, "param,rho", fmt17(v_post.cov.rho()));
    for (int i = 0; i < n; ++i) out << "v_star," << i << "," << fmt17(v_post.v_star.values[i]) << "\n";
    for (int k = 0; k < dr.size(); ++k) out << "d," << k << "," << fmt17(dr[k]) << "\n";
    for (int k = 0; k < eig.rank(); ++k) {
        const Eigen::VectorXd vtil = prior.apply_c0_sqrt(FieldVector(eig.grid, eig.vecs.col(k))).values;
        for (int i = 0; i < n; ++i) out << "vtil," << k << "," << i << "," << fmt17(vtil[i]) << "\n";
    }
}

ViStateFile read_vi_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing input: " + path + " (run run-vi first)");
    ViStateFile s;
    int r = 0;
    std::string line;
    std::vector<std::tuple<int, int, double>> vtil_entries;
    std::vector<std::pair<int, double>> vstar_entries;
    std::vector<std::pair<int, double>> d_entries;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tag;
        std::getline(ss, tag, ',');
        if (tag == "param") {
            std::string key, value;
            std::getline(ss, key, ',');
            std::getline(ss, value);
            if (key == "n") s.n = std::stoi(value);
            else if (key == "r") r = std::stoi(value);
            else if (key == "lambda_star") s.lam_star = std::stod(value);
            else if (key == "c_lambda") s.c_lambda = std::stod(value);
            else if (key == "rho") s.rho = std::stod(value);
            else throw std::runtime_error("read_vi_state: unknown param " + key);
        } else if (tag == "v_star") {
            std::string idx, value;
            std::getline(ss, idx, ',');
            std::getline(ss, value);
            vstar_entries.emplace_back(std::stoi(idx), std::stod(value));
        } else if (tag == "d") {
            std::string idx, value;
            std::getline(ss, idx, ',');
            std::getline(ss, value);
            d_entries.emplace_back(std::stoi(idx), std::stod(value));
        } else if (tag == "vtil") {
            std::string k, idx, value;
            std::getline(ss, k, ',');
            std::getline(ss, idx, ',');
            std::getline(ss, value);
            vtil_entries.emplace_back(std::stoi(k), std::stoi(idx), std::stod(value));
        } else {
            throw std::runtime_error("read_vi_state: unknown row tag " + tag);
        }
    }
    if (s.n <= 0) throw std::runtime_error("read_vi_state: missing dimension");
    s.v_star.setZero(s.n);
    for (auto& [i, v] : vstar_entries) s.v_star[i] = v;
    s.dr.setZero(r);
    for (auto& [k, v] : d_entries) s.dr[k] = v;
    s.vtil.setZero(s.n, r);
    for (auto& [k, i, v] : vtil_entries) s.vtil(i, k) = v;
    return s;
}

void write_gibbs_summary(const std::string& path, const ChainSummary& summary,
                         const std::vector<std::string>& comments) {
    auto out = open_output(path, comments);
    const int n = summary.mean_u.size();
    write_kv(out, "param,n", std::to_string(n));
    write_kv(out, "param,lambda_mean", fmt17(summary.lambda_mean));
    write_kv(out, "param,lambda_var", fmt17(summary.lambda_var));
    write_kv(out, "param,acceptance_rate_v", fmt17(summary.acceptance_rate_v));
    write_kv(out, "param,ess_lambda", fmt17(summary.ess_lambda));
    write_kv(out, "param,kept", std::to_string(summary.kept));
    write_kv(out, "param,budget_exceeded", summary.budget_exceeded ? "1" : "0");
    for (int i = 0; i < n; ++i) out << "mean_u," << i << "," << fmt17(summary.mean_u.values[i]) << "\n";
    for (int i = 0; i < n; ++i) out << "var_u," << i << "," << fmt17(summary.var_u[i]) << "\n";
    if (summary.cov_u.size() > 0) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out << "cov_u," << i << "," << j << "," << fmt17(summary.cov_u(i, j)) << "\n";
    }
    for (std::size_t b = 0; b < summary.band_offsets.size(); ++b) {
        const Eigen::VectorXd& band = summary.cov_bands[b];
        for (int i = 0; i < band.size(); ++i) {
            out << "cov_band," << summary.band_offsets[b] << "," << i << "," << fmt17(band[i])
                << "\n";
        }
    }
}

ChainSummary read_gibbs_summary(const std::string& path, const Grid1D& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("missing input: " + path + " (run run-gibbs first)");
    ChainSummary s;
    int n = 0;
    Eigen::VectorXd mean, var;
    Eigen::MatrixXd cov;
    bool have_cov = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tag;
        std::getline(ss, tag, ',');
        if (tag == "param") {
            std::string key, value;
            std::getline(ss, key, ',');
            std::getline(ss, value);
            if (key == "n") {
                n = std::stoi(value);
                mean.setZero(n);
                var.setZero(n);
            } else if (key == "lambda_mean") s.lambda_mean = std::stod(value);
            else if (key == "lambda_var") s.lambda_var = std::stod(value);
            else if (key == "acceptance_rate_v") s.acceptance_rate_v = std::stod(value);
            else if (key == "ess_lambda") s.ess_lambda = std::stod(value);
            else if (key == "kept") s.kept = std::stol(value);
            else if (key == "budget_exceeded") s.budget_exceeded = value == "1";
            else throw std::runtime_error("read_gibbs_summary: unknown param " + key);
        } else if (tag == "mean_u" || tag == "var_u") {
            std::string idx, value;
            std::getline(ss, idx, ',');
            std::getline(ss, value);
            (tag == "mean_u" ? mean : var)[std::stoi(idx)] = std::stod(value);
        } else if (tag == "cov_u") {
            if (!have_cov) {
                cov.setZero(n, n);
                have_cov = true;
            }
            std::string i, j, value;
            std::getline(ss, i, ',');
            std::getline(ss, j, ',');
            std::getline(ss, value);
            cov(std::stoi(i), std::stoi(j)) = std::stod(value);
        } else if (tag == "cov_band") {
            std::string k, i, value;
            std::getline(ss, k, ',');
            std::getline(ss, i, ',');
            std::getline(ss, value);
            const int offset = std::stoi(k);
            auto it = std::find(s.band_offsets.begin(), s.band_offsets.end(), offset);
            if (it == s.band_offsets.end()) {
                s.band_offsets.push_back(offset);
                s.cov_bands.emplace_back(Eigen::VectorXd::Zero(n - offset));
                it = std::prev(s.band_offsets.end());
            }
            s.cov_bands[it - s.band_offsets.begin()][std::stoi(i)] = std::stod(value);
        } else {
            throw std::runtime_error("read_gibbs_summary: unknown row tag " + tag);
        }
    }
    if (n != grid.size()) throw std::runtime_error("read_gibbs_summary: grid size mismatch");
    s.mean_u = FieldVector(grid, std::move(mean));
    s.var_u = std::move(var);
    if (have_cov) s.cov_u = std::move(cov);
    return s;
}

int cmd_generate_data(const ExperimentConfig& cfg) {
    Grid1D coarse(cfg.n_coarse, Boundary::Neumann);
    ForwardOperator coarse_f(coarse, cfg.alpha_pde, default_obs_points());
    DataVector data = generate_data(elliptic1d_truth, cfg.n_fine, coarse_f, cfg.noise_pct,
                                    cfg.data_seed);
    auto comments = file_comments(cfg);
    comments.push_back("truth=10*(cos(4*pi*x)+1)");
    comments.push_back("data_seed=" + std::to_string(cfg.data_seed));
    write_data_csv(out_path(cfg, "data.csv"), coarse_f, data, comments);
    return 0;
}

int cmd_run_vi(const ExperimentConfig& cfg) {
    std::vector<double> obs;
    DataVector data = load_data(cfg, &obs);
    Grid1D grid(cfg.n_coarse, Boundary::Neumann);
    PriorOperator prior(grid, cfg.alpha_prior, cfg.prior_scale);
    ForwardOperator f(grid, cfg.alpha_pde, obs);
    FieldVector truth = truth_on_grid(grid);

    ViConfig vi_cfg = cfg.vi;
    vi_cfg.eig_seed = cfg.eig_seed;
    ViResult res = run_vi(prior, cfg.lambda_prior, f, data, vi_cfg, &truth);

    const auto comments = file_comments(cfg);
    write_vi_trace_csv(out_path(cfg, "vi_trace.csv"), res.trace, comments);
    write_eigenvalues_csv(out_path(cfg, "eigenvalues.csv"), res.v_post.cov.eig(), comments);
    write_vi_state(out_path(cfg, "vi_state.csv"), res.v_post, res.lam_post, comments);

    UPosteriorMoments moments(res.v_post, res.lam_post);
    write_field(out_path(cfg, "u_mean.csv"), grid, moments.mean().values, comments);
    auto [lower, upper] = credibility_band(moments.mean(), moments.variance(), 0.95);
    {
        auto out = open_output(out_path(cfg, "credibility_band.csv"), comments);
        out << "i,x_i,lower,upper\n";
        for (int i = 0; i < grid.size(); ++i) {
            out << i << "," << fmt17(grid.nodes()[i]) << "," << fmt17(lower.values[i]) << ","
                << fmt17(upper.values[i]) << "\n";
        }
    }
    {
        auto out = open_output(out_path(cfg, "vi_metrics.csv"), comments);
        out << "key,value\n";
        write_kv(out, "lambda_mean", fmt17(res.lam_post.lam_star));
        write_kv(out, "lambda_var", fmt17(res.lam_post.c_lambda));
        write_kv(out, "iterations", std::to_string(res.trace.iterations()));
        write_kv(out, "converged", res.trace.converged ? "1" : "0");
        write_kv(out, "rel_err_final", fmt17(res.trace.rows.back().rel_err));
    }
    return res.trace.converged ? 0 : 3;
}

int cmd_run_gibbs(const ExperimentConfig& cfg) {
    std::vector<double> obs;
    DataVector data = load_data(cfg, &obs);
    Grid1D grid(cfg.n_coarse, Boundary::Neumann);
    PriorOperator prior(grid, cfg.alpha_prior, cfg.prior_scale);
    ForwardOperator f(grid, cfg.alpha_pde, obs);

    GibbsConfig g_cfg = cfg.gibbs;
    g_cfg.rng_seed = cfg.chain_seed;
    const auto comments = file_comments(cfg);
    auto trace = open_output(out_path(cfg, "lambda_trace.csv"), comments);
    trace << "iter,lambda\n";
    ChainSummary summary = run_chain(prior, cfg.lambda_prior, f, data, g_cfg, &trace);
    write_gibbs_summary(out_path(cfg, "gibbs_summary.csv"), summary, comments);
    {
        auto out = open_output(out_path(cfg, "gibbs_metrics.csv"), comments);
        out << "key,value\n";
        write_kv(out, "lambda_mean", fmt17(summary.lambda_mean));
        write_kv(out, "lambda_var", fmt17(summary.lambda_var));
        write_kv(out, "acceptance_rate_v", fmt17(summary.acceptance_rate_v));
        write_kv(out, "ess_lambda", fmt17(summary.ess_lambda));
        write_kv(out, "kept", std::to_string(summary.kept));
        write_kv(out, "budget_exceeded", summary.budget_exceeded ? "1" : "0");
    }
    return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
    Grid1D grid(cfg.n_coarse, Boundary::Neumann);
    ViStateFile vi = read_vi_state(out_path(cfg, "vi_state.csv"));
    ChainSummary gibbs = read_gibbs_summary(out_path(cfg, "gibbs_summary.csv"), grid);
    if (vi.n != grid.size()) throw ConfigError("compare: vi_state mesh differs from n_coarse");
    if (gibbs.cov_u.size() == 0) {
        throw ConfigError("compare: gibbs_summary has no dense covariance (n too large)");
    }

    // VI u-covariance from the persisted low-rank state.
    PriorOperator prior(grid, cfg.alpha_prior, cfg.prior_scale);
    const int n = grid.size();
    const double rho_u = vi.c_lambda + vi.lam_star * vi.lam_star;
    Eigen::MatrixXd prior_cov(n, n);
    const double s2_over_h = cfg.prior_scale * cfg.prior_scale / grid.spacing();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        prior_cov.col(j) = s2_over_h * prior.solve_a(prior.solve_a(e));
        e[j] = 0.0;
    }
    prior_cov = (0.5 * (prior_cov + prior_cov.transpose())).eval();
    Eigen::MatrixXd cov_vi = prior_cov;
    if (vi.dr.size() > 0) cov_vi -= vi.vtil * vi.dr.asDiagonal() * vi.vtil.transpose();
    cov_vi = rho_u * cov_vi + vi.c_lambda * vi.v_star * vi.v_star.transpose();
    Eigen::VectorXd mean_vi = vi.lam_star * vi.v_star;

    std::vector<int> offsets;
    for (int k : {0, 20, 40, 50}) {
        if (k < n) offsets.push_back(k);
    }
    auto bands_vi = covariance_bands(cov_vi, offsets);
    auto bands_gibbs = covariance_bands(gibbs.cov_u, offsets);

    const auto comments = file_comments(cfg);
    for (std::size_t b = 0; b < offsets.size(); ++b) {
        for (const bool is_vi : {true, false}) {
            const std::string name =
                std::string("band_") + (is_vi ? "vi" : "gibbs") + "_k" + std::to_string(offsets[b]) + ".csv";
            auto out = open_output(out_path(cfg, name), comments);
            out << "i,x_i,value\n";
            const Eigen::VectorXd& band = is_vi ? bands_vi[b] : bands_gibbs[b];
            for (int i = 0; i < band.size(); ++i) {
                out << i << "," << fmt17(grid.nodes()[i]) << "," << fmt17(band[i]) << "\n";
            }
        }
    }

    const double kl = kl_gaussian_1d(vi.lam_star, vi.c_lambda, gibbs.lambda_mean, gibbs.lambda_var);
    const double mean_rel =
        relative_error(FieldVector(grid, mean_vi), gibbs.mean_u);
    const double cov_rel = (cov_vi - gibbs.cov_u).squaredNorm() / cov_vi.squaredNorm();

    auto out = open_output(out_path(cfg, "metrics.csv"), comments);
    out << "key,value\n";
    write_kv(out, "kl_lambda_vi_vs_gibbs", fmt17(kl));
    write_kv(out, "mean_rel_err_vi_vs_gibbs", fmt17(mean_rel));
    write_kv(out, "cov_matrix_rel_err", fmt17(cov_rel));
    for (std::size_t b = 0; b < offsets.size(); ++b) {
        const double rel =
            (bands_vi[b] - bands_gibbs[b]).squaredNorm() / bands_gibbs[b].squaredNorm();
        const std::string key = offsets[b] == 0
                                    ? "variance_rel_err"
                                    : "cov_band" + std::to_string(offsets[b]) + "_rel_err";
        write_kv(out, key, fmt17(rel));
    }
    write_kv(out, "lambda_mean_vi", fmt17(vi.lam_star));
    write_kv(out, "lambda_var_vi", fmt17(vi.c_lambda));
    write_kv(out, "lambda_mean_gibbs", fmt17(gibbs.lambda_mean));
    write_kv(out, "lambda_var_gibbs", fmt17(gibbs.lambda_var));
    return 0;
}

int cmd_mesh_study(const ExperimentConfig& cfg) {
    std::vector<double> obs;
    DataVector data = load_data(cfg, &obs);
    ViConfig vi_cfg = cfg.vi;
    vi_cfg.eig_seed = cfg.eig_seed;
    const std::function<double(double)> truth = elliptic1d_truth;
    MeshStudyResult res =
        mesh_independence_study(cfg.mesh_study_meshes, cfg.n_fine, data, obs, cfg.alpha_prior,
                                cfg.alpha_pde, cfg.lambda_prior, vi_cfg, &truth,
                                cfg.prior_scale);

    const auto comments = file_comments(cfg);
    auto out = open_output(out_path(cfg, "lambda_table.csv"), comments);
    out << "mesh,lambda_mean,lambda_var\n";
    for (std::size_t i = 0; i < res.meshes.size(); ++i) {
        out << res.meshes[i] << "," << fmt17(res.lambdas[i].lam_star) << ","
            << fmt17(res.lambdas[i].c_lambda) << "\n";
        write_vi_trace_csv(out_path(cfg, "vi_trace_n" + std::to_string(res.meshes[i]) + ".csv"),
                           res.traces[i], comments);
    }
    return 0;
}

}  // namespace ncpvi
