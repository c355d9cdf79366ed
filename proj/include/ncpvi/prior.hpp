#pragma once

#include "ncpvi/grid.hpp"

#include <random>

namespace ncpvi {

/// Gaussian prior N(0, C0) on the Neumann grid with
/// C0 = scale^2 * (I - alpha*Laplacian)^-2. The operator square root is
/// exact: C0^{1/2} = scale * (I - alpha*Laplacian)^-1.
class PriorOperator {
public:
    PriorOperator(Grid1D grid, double alpha, double scale = 1.0);

    const Grid1D& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    double scale() const { return scale_; }

    FieldVector apply_c0(const FieldVector& f) const;
    FieldVector apply_c0_sqrt(const FieldVector& f) const;
    FieldVector apply_c0_inv(const FieldVector& f) const;

    /// Draw v = C0^{1/2} M^{-1/2} w with w standard normal, so the nodal
    /// covariance is C0 M^{-1} (the discrete field covariance under the
    /// M-weighted inner product).
    FieldVector sample(std::mt19937_64& rng) const;
    FieldVector sample(std::uint64_t seed) const;

    /// Apply A = I - alpha*Laplacian (no scaling); used by oracles.
    Eigen::VectorXd apply_a(const Eigen::VectorXd& x) const;
    Eigen::VectorXd solve_a(const Eigen::VectorXd& b) const;

private:
    Grid1D grid_;
    double alpha_;
    double scale_;
    SymTridiag a_;
    TridiagFactor a_factor_;
};

/// Scalar Gaussian hyper-prior on lambda.
struct LambdaPrior {
    double mean = 1.0;
    double variance = 1e4;

    LambdaPrior() = default;
    LambdaPrior(double m, double var);
};

FieldVector sample_prior(const PriorOperator& p, std::uint64_t rng_seed);

}  // namespace ncpvi
