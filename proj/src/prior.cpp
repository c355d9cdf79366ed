#include "ncpvi/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace ncpvi {

namespace {

SymTridiag make_a(const Grid1D& grid, double alpha) {
    return SymTridiag::identity(grid.size()).add_scaled(laplacian(grid), alpha);
}

}  // namespace

PriorOperator::PriorOperator(Grid1D grid, double alpha, double scale)
    : grid_(std::move(grid)),
      alpha_(alpha),
      scale_(scale),
      a_(make_a(grid_, alpha)),
      a_factor_(a_) {
    if (alpha <= 0.0) throw std::invalid_argument("PriorOperator: alpha must be positive");
    if (scale <= 0.0) throw std::invalid_argument("PriorOperator: scale must be positive");
    if (grid_.boundary() != Boundary::Neumann) {
        throw std::invalid_argument("PriorOperator: prior lives on a Neumann grid");
    }
}

FieldVector PriorOperator::apply_c0(const FieldVector& f) const {
    require_same_grid(f, grid_, "apply_c0");
    return FieldVector(grid_, scale_ * scale_ * a_factor_.solve(a_factor_.solve(f.values)));
}

FieldVector PriorOperator::apply_c0_sqrt(const FieldVector& f) const {
    require_same_grid(f, grid_, "apply_c0_sqrt");
    return FieldVector(grid_, scale_ * a_factor_.solve(f.values));
}

FieldVector PriorOperator::apply_c0_inv(const FieldVector& f) const {
    require_same_grid(f, grid_, "apply_c0_inv");
    return FieldVector(grid_, a_.apply(a_.apply(f.values)) / (scale_ * scale_));
}

FieldVector PriorOperator::sample(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd w(grid_.size());
    const double m_inv_sqrt = 1.0 / std::sqrt(grid_.spacing());
    for (int i = 0; i < w.size(); ++i) w[i] = m_inv_sqrt * normal(rng);
    return FieldVector(grid_, scale_ * a_factor_.solve(w));
}

FieldVector PriorOperator::sample(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    return sample(rng);
}

Eigen::VectorXd PriorOperator::apply_a(const Eigen::VectorXd& x) const {
    return a_.apply(x);
}

Eigen::VectorXd PriorOperator::solve_a(const Eigen::VectorXd& b) const {
    return a_factor_.solve(b);
}

LambdaPrior::LambdaPrior(double m, double var) : mean(m), variance(var) {
    if (var <= 0.0) throw std::invalid_argument("LambdaPrior: variance must be positive");
}

FieldVector sample_prior(const PriorOperator& p, std::uint64_t rng_seed) {
    return p.sample(rng_seed);
}

}  // namespace ncpvi
