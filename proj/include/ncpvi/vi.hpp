#pragma once

#include "ncpvi/lowrank.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ncpvi {

/// Gaussian factor for lambda. The coordinate loop seeds itself with
/// c_lambda = 0 (point mass at lambda0); every update_lambda output has
/// c_lambda > 0.
struct LambdaPosterior {
    double lam_star = 1.0;
    double c_lambda = 0.0;
};

/// Gaussian factor for v with low-rank covariance.
struct VPosterior {
    FieldVector v_star;
    LowRankPosteriorCov cov;
};

struct ViConfig {
    double tol = 1e-4;
    int max_iter = 1500;
    int r_max = 10;
    int oversample = 10;
    std::optional<double> lambda0;  // defaults to the prior mean
    std::uint64_t eig_seed = 0;
};

struct ViTraceRow {
    int iter = 0;
    double lambda = 0.0;
    double c_lambda = 0.0;
    double rel_err = std::numeric_limits<double>::quiet_NaN();
    double step_norm = 0.0;
};

struct ViTrace {
    std::vector<ViTraceRow> rows;
    bool converged = false;

    int iterations() const { return static_cast<int>(rows.size()); }
};

struct ViResult {
    VPosterior v_post;
    LambdaPosterior lam_post;
    ViTrace trace;
};

/// v-factor update at rho = c_lambda + lam_star^2:
///   (rho H* tau H + C0^-1) v* = lam_star * tau * H* d,
/// solved through the low-rank posterior covariance (exact up to the
/// truncated eigen-tail).
VPosterior update_v(const PriorOperator& prior, const ForwardOperator& f, const DataVector& data,
                    const LambdaPosterior& lam_post, const EigenPairs& eig);

/// lambda-factor update:
///   1/C_lambda = Tr(C_v H* Gamma^-1 H) + tau ||H v*||^2 + 1/sigma,
///   lam* = C_lambda (<v*, H* Gamma^-1 d>_M + lambda_bar/sigma).
LambdaPosterior update_lambda(const LambdaPrior& prior_lam, const ForwardOperator& f,
                              const DataVector& data, const VPosterior& v_post);

/// Coordinate-ascent loop alternating the closed-form factor updates from
/// lambda0 = prior mean, c_lambda0 = 0. The eigenpairs of the
/// prior-preconditioned misfit operator are computed once and reused; only
/// rho-dependent quantities change per iteration. Stops when
/// max(step norm of lam*v, relative lambda step) <= tol.
ViResult run_vi(const PriorOperator& prior, const LambdaPrior& lam_prior, const ForwardOperator& f,
                const DataVector& data, const ViConfig& cfg, const FieldVector* truth = nullptr);

void write_vi_trace_csv(const std::string& path, const ViTrace& trace,
                        const std::vector<std::string>& comments = {});

}  // namespace ncpvi
