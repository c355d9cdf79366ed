#pragma once

#include "ncpvi/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ncpvi {

/// Observations d = H u + noise with precision tau (Gamma_noise = tau^-1 I).
struct DataVector {
    Eigen::VectorXd d;
    double tau = 1.0;
    double noise_pct = 0.0;
};

/// Forward map u -> (w(x_1), ..., w(x_Nd)) where w solves
///   -alpha w'' + w = u on (0,1),  w(0) = w(1) = 0,
/// discretized on the interior nodes of the parameter grid. Observation is
/// by linear interpolation; points may lie anywhere in (0,1]. The adjoint
/// is taken with respect to the mass-weighted inner product of the
/// parameter grid.
class ForwardOperator {
public:
    ForwardOperator(Grid1D param_grid, double alpha_pde, std::vector<double> obs_points);

    const Grid1D& param_grid() const { return param_grid_; }
    const Grid1D& pde_grid() const { return pde_grid_; }
    double alpha_pde() const { return alpha_pde_; }
    const std::vector<double>& obs_points() const { return obs_points_; }
    int n_obs() const { return static_cast<int>(obs_points_.size()); }
    const Eigen::MatrixXd& obs_matrix() const { return obs_; }

    /// Solution w on the Dirichlet grid; u may live on the parameter grid
    /// (endpoints dropped) or on the Dirichlet grid directly.
    FieldVector solve_pde(const FieldVector& u) const;

    Eigen::VectorXd apply_h(const FieldVector& u) const;

    /// H* y on the parameter grid: <Hu, y> = <u, H*y>_M for all u.
    FieldVector apply_h_adjoint(const Eigen::VectorXd& y) const;

private:
    Eigen::VectorXd restrict_to_pde_grid(const FieldVector& u) const;

    Grid1D param_grid_;
    Grid1D pde_grid_;
    double alpha_pde_;
    std::vector<double> obs_points_;
    SymTridiag system_;
    TridiagFactor factor_;
    Eigen::MatrixXd obs_;  // n_obs x pde_grid size
};

/// 0.5 * tau * ||d - lam * H v||^2.
double potential(const ForwardOperator& f, const FieldVector& v, double lam, const DataVector& data);

/// Synthetic data from an analytic truth on a fine mesh (inverse-crime
/// discipline: fine_n must exceed the inversion grid size). The noise level
/// sets tau^-1 = (noise_pct * max|H u|)^2; noise-free data keeps tau = 1.
DataVector generate_data(const std::function<double(double)>& truth, int fine_n,
                         const ForwardOperator& coarse_f, double noise_pct,
                         std::uint64_t rng_seed);

void write_data_csv(const std::string& path, const ForwardOperator& f, const DataVector& data,
                    const std::vector<std::string>& comments = {});
std::pair<std::vector<double>, DataVector> read_data_csv(const std::string& path);

}  // namespace ncpvi
