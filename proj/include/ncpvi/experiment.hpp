#pragma once

#include "ncpvi/config.hpp"
#include "ncpvi/diagnostics.hpp"

namespace ncpvi {

/// The elliptic1d source: u(x) = 10 (cos 4 pi x + 1).
double elliptic1d_truth(double x);

FieldVector truth_on_grid(const Grid1D& grid);

/// Serialized VI posterior state sufficient to rebuild the u-moment
/// accessor: scalars plus v*, d_k and the prior-smoothed eigenvectors.
struct ViStateFile {
    int n = 0;
    double lam_star = 0.0;
    double c_lambda = 0.0;
    double rho = 0.0;
    Eigen::VectorXd v_star;
    Eigen::VectorXd dr;
    Eigen::MatrixXd vtil;
};

void write_vi_state(const std::string& path, const VPosterior& v_post,
                    const LambdaPosterior& lam_post, const std::vector<std::string>& comments);
ViStateFile read_vi_state(const std::string& path);

void write_gibbs_summary(const std::string& path, const ChainSummary& summary,
                         const std::vector<std::string>& comments);
ChainSummary read_gibbs_summary(const std::string& path, const Grid1D& grid);

/// Commands return process exit codes: 0 success, 3 when the VI loop hit
/// max_iter without converging. Configuration and missing-input problems
/// raise ConfigError (exit 1); numerical failures raise other exceptions
/// (exit 2).
int cmd_generate_data(const ExperimentConfig& cfg);
int cmd_run_vi(const ExperimentConfig& cfg);
int cmd_run_gibbs(const ExperimentConfig& cfg);
int cmd_compare(const ExperimentConfig& cfg);
int cmd_mesh_study(const ExperimentConfig& cfg);

}  // namespace ncpvi
