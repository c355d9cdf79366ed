#pragma once

#include "ncpvi/forward.hpp"
#include "ncpvi/prior.hpp"

#include <functional>
#include <string>

namespace ncpvi {

/// Top eigenpairs of a self-adjoint PSD operator in the M-weighted inner
/// product: eigenvalues descending, eigenvectors M-orthonormal columns.
struct EigenPairs {
    Grid1D grid;
    Eigen::VectorXd xis;
    Eigen::MatrixXd vecs;
    bool rank_deficient = false;

    int rank() const { return static_cast<int>(xis.size()); }
};

using Matvec = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Prior-preconditioned data-misfit operator
///   G = C0^{1/2} H* Gamma^{-1} H C0^{1/2}
/// applied to one field: two PDE solves plus two square-root applies.
FieldVector gtilde_matvec(const PriorOperator& prior, const ForwardOperator& f, double tau,
                          const FieldVector& v);

/// Captures prior and forward operator by reference; both must outlive the
/// returned callable.
Matvec make_gtilde_matvec(const PriorOperator& prior, const ForwardOperator& f, double tau);

/// Randomized double-pass eigendecomposition: 2*(r+oversample) operator
/// applies, Rayleigh-Ritz on the sketched basis, M-orthonormal vectors via
/// modified Gram-Schmidt with one reorthogonalization pass. Returns fewer
/// pairs with rank_deficient set when the sketch collapses.
EigenPairs double_pass_eig(const Matvec& matvec, const Grid1D& grid, int r, int oversample,
                           std::uint64_t rng_seed);

/// Sum of xi_i / (rho*xi_i + 1) over the retained pairs.
double trace_lowrank(const EigenPairs& eig, double rho);

/// Posterior covariance C_v ~ C0^{1/2} (I - V D V^dia) C0^{1/2} with
/// D = diag(rho*xi_i / (rho*xi_i + 1)) and V^dia = V^T M.
class LowRankPosteriorCov {
public:
    LowRankPosteriorCov(PriorOperator prior, EigenPairs eig, double rho);

    const PriorOperator& prior() const { return prior_; }
    const EigenPairs& eig() const { return eig_; }
    double rho() const { return rho_; }
    const Eigen::VectorXd& dr() const { return dr_; }

    FieldVector apply(const FieldVector& f) const;

    /// Zero-mean draw with covariance C_v.
    FieldVector sample(std::mt19937_64& rng) const;

private:
    PriorOperator prior_;
    EigenPairs eig_;
    double rho_;
    Eigen::VectorXd dr_;
};

FieldVector smw_apply(const LowRankPosteriorCov& cov, const FieldVector& f);

void write_eigenvalues_csv(const std::string& path, const EigenPairs& eig,
                           const std::vector<std::string>& comments = {});

}  // namespace ncpvi
