#include "ncpvi/vi.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ncpvi {

VPosterior update_v(const PriorOperator& prior, const ForwardOperator& f, const DataVector& data,
                    const LambdaPosterior& lam_post, const EigenPairs& eig) {
    const double rho = lam_post.c_lambda + lam_post.lam_star * lam_post.lam_star;
    if (rho <= 0.0) throw std::invalid_argument("update_v: rho = c_lambda + lam*^2 must be positive");
    LowRankPosteriorCov cov(prior, eig, rho);
    FieldVector rhs = f.apply_h_adjoint(data.d);
    rhs.values *= lam_post.lam_star * data.tau;
    FieldVector v_star = cov.apply(rhs);
    return VPosterior{std::move(v_star), std::move(cov)};
}

LambdaPosterior update_lambda(const LambdaPrior& prior_lam, const ForwardOperator& f,
                              const DataVector& data, const VPosterior& v_post) {
    const double trace = trace_lowrank(v_post.cov.eig(), v_post.cov.rho());
    const Eigen::VectorXd hv = f.apply_h(v_post.v_star);
    const double precision = trace + data.tau * hv.squaredNorm() + 1.0 / prior_lam.variance;
    FieldVector hstar_d = f.apply_h_adjoint(data.d);
    const double lin = data.tau * inner_m(v_post.v_star, hstar_d) + prior_lam.mean / prior_lam.variance;
    LambdaPosterior out;
    out.c_lambda = 1.0 / precision;
    out.lam_star = out.c_lambda * lin;
    return out;
}

namespace {

double guarded_relative(double diff, double scale) {
    return scale < 1e-300 ? diff : diff / scale;
}

}  // namespace

ViResult run_vi(const PriorOperator& prior, const LambdaPrior& lam_prior, const ForwardOperator& f,
                const DataVector& data, const ViConfig& cfg, const FieldVector* truth) {
    if (cfg.tol <= 0.0) throw std::invalid_argument("run_vi: tol must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("run_vi: max_iter must be at least 1");
    if (!prior.grid().same_layout(f.param_grid())) {
        throw std::invalid_argument("run_vi: prior and forward operator use different grids");
    }

    const Matvec gtilde = make_gtilde_matvec(prior, f, data.tau);
    const EigenPairs eig =
        double_pass_eig(gtilde, prior.grid(), cfg.r_max, cfg.oversample, cfg.eig_seed);

    LambdaPosterior lam;
    lam.lam_star = cfg.lambda0.value_or(lam_prior.mean);
    lam.c_lambda = 0.0;

    ViTrace trace;
    FieldVector u_prev = zero_field(prior.grid());
    double lam_prev = lam.lam_star;

    std::optional<VPosterior> v_post;
    for (int k = 1; k <= cfg.max_iter; ++k) {
        v_post = update_v(prior, f, data, lam, eig);
        lam = update_lambda(lam_prior, f, data, *v_post);

        FieldVector u_k(prior.grid(), lam.lam_star * v_post->v_star.values);
        const double step_v =
            guarded_relative(norm_m(u_k.grid, u_k.values - u_prev.values), norm_m(u_k));
        const double step_lam =
            guarded_relative(std::abs(lam.lam_star - lam_prev), std::abs(lam_prev));

        ViTraceRow row;
        row.iter = k;
        row.lambda = lam.lam_star;
        row.c_lambda = lam.c_lambda;
        row.step_norm = step_v;
        if (truth != nullptr) {
            const double tn = norm_m(*truth);
            row.rel_err = std::pow(norm_m(u_k.grid, u_k.values - truth->values) / tn, 2);
        }
        trace.rows.push_back(row);

        u_prev = std::move(u_k);
        lam_prev = lam.lam_star;
        if (std::max(step_v, step_lam) <= cfg.tol) {
            trace.converged = true;
            break;
        }
    }

    return ViResult{std::move(*v_post), lam, std::move(trace)};
}

void write_vi_trace_csv(const std::string& path, const ViTrace& trace,
                        const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_vi_trace_csv: cannot open " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "iter,lambda,c_lambda,rel_err,step_norm\n";
    char buf[160];
    for (const auto& r : trace.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.lambda,
                      r.c_lambda, r.rel_err, r.step_norm);
        out << buf;
    }
}

}  // namespace ncpvi
