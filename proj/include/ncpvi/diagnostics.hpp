#pragma once

#include "ncpvi/vi.hpp"

namespace ncpvi {

/// ||u_est - u_truth||_M^2 / ||u_truth||_M^2.
double relative_error(const FieldVector& u_est, const FieldVector& u_truth);

/// KL(p || q) between scalar Gaussians given as (mean, variance).
double kl_gaussian_1d(double mean_p, double var_p, double mean_q, double var_q);

/// Two-sided standard normal quantile; z(0.95) = 1.959964.
double normal_quantile_two_sided(double level);

/// Moments of u = lambda * v under the independent product of the two
/// Gaussian factors:
///   E[u] = lam* v*,  Cov(u) = (C_lambda + lam*^2) C_v + C_lambda v* v*^T.
/// Covariance-field values are evaluated on demand from the prior field
/// plus the rank-r correction sum_k d_k vtil_k(x) vtil_k(y).
class UPosteriorMoments {
public:
    UPosteriorMoments(const VPosterior& v_post, const LambdaPosterior& lam_post);

    const FieldVector& mean() const { return mean_; }
    const Grid1D& grid() const { return grid_; }

    double cov(int i, int j) const;
    Eigen::VectorXd variance() const;
    Eigen::MatrixXd dense_cov() const;

private:
    Grid1D grid_;
    FieldVector mean_;
    double rho_u_;      // C_lambda + lam*^2
    double c_lambda_;
    Eigen::VectorXd v_star_;
    Eigen::MatrixXd prior_cov_;  // nodal field covariance of the prior
    Eigen::MatrixXd vtil_;       // C0^{1/2} v_k columns
    Eigen::VectorXd dr_;
};

UPosteriorMoments u_posterior_moments(const VPosterior& v_post, const LambdaPosterior& lam_post);

/// Covariance values {c(x_i, x_{i+k})} for each requested offset k.
std::vector<Eigen::VectorXd> covariance_bands(const UPosteriorMoments& moments,
                                              const std::vector<int>& offsets);
std::vector<Eigen::VectorXd> covariance_bands(const Eigen::MatrixXd& cov,
                                              const std::vector<int>& offsets);

/// Pointwise mean +- z(level) * sqrt(variance).
std::pair<FieldVector, FieldVector> credibility_band(const FieldVector& mean,
                                                     const Eigen::VectorXd& variance, double level);

/// Numerical witness that the centered and non-centered posterior
/// densities differ by exactly N log(lambda): evaluates both unnormalized
/// log densities on random points of a small synthetic problem and returns
/// the maximum deviation of their difference from its value at the first
/// point. Nonpositive lambda draws are skipped.
double cp_ncp_density_check(int n_small, std::uint64_t rng_seed, int n_points = 1000);

struct MeshStudyResult {
    std::vector<int> meshes;
    std::vector<ViTrace> traces;
    std::vector<LambdaPosterior> lambdas;
};

/// Reruns the VI loop over several inversion meshes against one shared
/// data vector.
MeshStudyResult mesh_independence_study(const std::vector<int>& mesh_sizes, int data_mesh_n,
                                        const DataVector& data,
                                        const std::vector<double>& obs_points, double alpha_prior,
                                        double alpha_pde, const LambdaPrior& lam_prior,
                                        const ViConfig& cfg,
                                        const std::function<double(double)>* truth = nullptr,
                                        double prior_scale = 1.0);

}  // namespace ncpvi
