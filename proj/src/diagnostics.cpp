#include "ncpvi/diagnostics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ncpvi {

double relative_error(const FieldVector& u_est, const FieldVector& u_truth) {
    if (!u_est.grid.same_layout(u_truth.grid)) {
        throw std::invalid_argument("relative_error: fields on different grids");
    }
    const double tn = norm_m(u_truth);
    if (tn == 0.0) throw std::invalid_argument("relative_error: truth has zero norm");
    const double en = norm_m(u_est.grid, u_est.values - u_truth.values);
    return (en * en) / (tn * tn);
}

double kl_gaussian_1d(double mean_p, double var_p, double mean_q, double var_q) {
    if (var_p <= 0.0 || var_q <= 0.0) {
        throw std::invalid_argument("kl_gaussian_1d: variances must be positive");
    }
    const double dm = mean_p - mean_q;
    return std::log(std::sqrt(var_q / var_p)) + (var_p - var_q) / (2.0 * var_q) +
           dm * dm / (2.0 * var_q);
}

double normal_quantile_two_sided(double level) {
    if (level <= 0.0 || level >= 1.0) {
        throw std::invalid_argument("normal_quantile_two_sided: level must be in (0,1)");
    }
    const double target = 0.5 * (1.0 - level);  // upper tail mass
    auto upper_tail = [](double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); };
    double lo = 0.0;
    double hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (upper_tail(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

UPosteriorMoments::UPosteriorMoments(const VPosterior& v_post, const LambdaPosterior& lam_post)
    : grid_(v_post.v_star.grid),
      mean_(grid_, lam_post.lam_star * v_post.v_star.values),
      rho_u_(lam_post.c_lambda + lam_post.lam_star * lam_post.lam_star),
      c_lambda_(lam_post.c_lambda),
      v_star_(v_post.v_star.values) {
    const PriorOperator& prior = v_post.cov.prior();
    const int n = grid_.size();

    // Prior field covariance (C0 M^-1 in nodal coordinates), column by
    // column, symmetrized so the accessor is exactly symmetric.
    prior_cov_.resize(n, n);
    const double s2_over_h = prior.scale() * prior.scale() / grid_.spacing();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        prior_cov_.col(j) = s2_over_h * prior.solve_a(prior.solve_a(e));
        e[j] = 0.0;
    }
    prior_cov_ = (0.5 * (prior_cov_ + prior_cov_.transpose())).eval();

    const EigenPairs& eig = v_post.cov.eig();
    dr_ = v_post.cov.dr();
    vtil_.resize(n, eig.rank());
    for (int k = 0; k < eig.rank(); ++k) {
        vtil_.col(k) = prior.apply_c0_sqrt(FieldVector(grid_, eig.vecs.col(k))).values;
    }
}

double UPosteriorMoments::cov(int i, int j) const {
    // Grouped so that (i,j) and (j,i) evaluate identically in floating point.
    double cv = prior_cov_(i, j);
    for (int k = 0; k < dr_.size(); ++k) cv -= dr_[k] * (vtil_(i, k) * vtil_(j, k));
    return rho_u_ * cv + c_lambda_ * (v_star_[i] * v_star_[j]);
}

Eigen::VectorXd UPosteriorMoments::variance() const {
    const int n = grid_.size();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = cov(i, i);
    return out;
}

Eigen::MatrixXd UPosteriorMoments::dense_cov() const {
    Eigen::MatrixXd cv = prior_cov_;
    if (dr_.size() > 0) cv -= vtil_ * dr_.asDiagonal() * vtil_.transpose();
    return rho_u_ * cv + c_lambda_ * v_star_ * v_star_.transpose();
}

UPosteriorMoments u_posterior_moments(const VPosterior& v_post, const LambdaPosterior& lam_post) {
    return UPosteriorMoments(v_post, lam_post);
}

std::vector<Eigen::VectorXd> covariance_bands(const UPosteriorMoments& moments,
                                              const std::vector<int>& offsets) {
    const int n = moments.grid().size();
    std::vector<Eigen::VectorXd> out;
    for (int k : offsets) {
        if (k < 0 || k >= n) throw std::invalid_argument("covariance_bands: offset out of range");
        Eigen::VectorXd band(n - k);
        for (int i = 0; i + k < n; ++i) band[i] = moments.cov(i, i + k);
        out.push_back(std::move(band));
    }
    return out;
}

std::vector<Eigen::VectorXd> covariance_bands(const Eigen::MatrixXd& cov,
                                              const std::vector<int>& offsets) {
    const int n = static_cast<int>(cov.rows());
    std::vector<Eigen::VectorXd> out;
    for (int k : offsets) {
        if (k < 0 || k >= n) throw std::invalid_argument("covariance_bands: offset out of range");
        Eigen::VectorXd band(n - k);
        for (int i = 0; i + k < n; ++i) band[i] = cov(i, i + k);
        out.push_back(std::move(band));
    }
    return out;
}

std::pair<FieldVector, FieldVector> credibility_band(const FieldVector& mean,
                                                     const Eigen::VectorXd& variance, double level) {
    if (variance.size() != mean.size()) {
        throw std::invalid_argument("credibility_band: size mismatch");
    }
    if ((variance.array() < 0.0).any()) {
        throw std::invalid_argument("credibility_band: negative variance entry");
    }
    const double z = normal_quantile_two_sided(level);
    Eigen::VectorXd half = z * variance.cwiseSqrt();
    return {FieldVector(mean.grid, mean.values - half), FieldVector(mean.grid, mean.values + half)};
}

double cp_ncp_density_check(int n_small, std::uint64_t rng_seed, int n_points) {
    if (n_small < 1 || n_small > 10) {
        throw std::invalid_argument("cp_ncp_density_check: n_small must be in 1..10");
    }
    if (n_points < 2) throw std::invalid_argument("cp_ncp_density_check: need at least 2 points");

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.5, 2.0);

    const int n_obs = n_small + 2;
    Eigen::VectorXd c0_eigs(n_small);
    for (int i = 0; i < n_small; ++i) c0_eigs[i] = unif(rng);
    Eigen::MatrixXd h(n_obs, n_small);
    for (int i = 0; i < n_obs; ++i)
        for (int j = 0; j < n_small; ++j) h(i, j) = normal(rng);
    Eigen::VectorXd d(n_obs);
    for (int i = 0; i < n_obs; ++i) d[i] = normal(rng);
    const double tau = 1.3;
    const double lam_bar = 1.0;
    const double sigma = 4.0;

    auto log_ncp = [&](const Eigen::VectorXd& v, double lam) {
        const double prior_v = -0.5 * (v.cwiseAbs2().cwiseQuotient(c0_eigs)).sum();
        const double dl = lam - lam_bar;
        const double prior_lam = -0.5 * dl * dl / sigma;
        const double phi = -0.5 * tau * (d - lam * (h * v)).squaredNorm();
        return prior_v + prior_lam + phi;
    };
    auto log_cp = [&](const Eigen::VectorXd& u, double lam) {
        const double prior_u =
            -0.5 * (u.cwiseAbs2().cwiseQuotient(c0_eigs)).sum() / (lam * lam) -
            n_small * std::log(lam);
        const double dl = lam - lam_bar;
        const double prior_lam = -0.5 * dl * dl / sigma;
        const double phi = -0.5 * tau * (d - h * u).squaredNorm();
        return prior_u + prior_lam + phi;
    };

    bool have_ref = false;
    double ref = 0.0;
    double max_dev = 0.0;
    int evaluated = 0;
    while (evaluated < n_points) {
        Eigen::VectorXd v(n_small);
        for (int j = 0; j < n_small; ++j) v[j] = normal(rng);
        const double lam = 1.0 + normal(rng);
        if (lam <= 0.0) continue;  // log|lambda| branch; excluded by contract
        const double delta = log_cp(lam * v, lam) - (log_ncp(v, lam) - n_small * std::log(lam));
        if (!have_ref) {
            ref = delta;
            have_ref = true;
        } else {
            max_dev = std::max(max_dev, std::abs(delta - ref));
        }
        ++evaluated;
    }
    return max_dev;
}

MeshStudyResult mesh_independence_study(const std::vector<int>& mesh_sizes, int data_mesh_n,
                                        const DataVector& data,
                                        const std::vector<double>& obs_points, double alpha_prior,
                                        double alpha_pde, const LambdaPrior& lam_prior,
                                        const ViConfig& cfg,
                                        const std::function<double(double)>* truth,
                                        double prior_scale) {
    MeshStudyResult out;
    for (int n : mesh_sizes) {
        if (n >= data_mesh_n) {
            throw std::invalid_argument(
                "mesh_independence_study: inversion meshes must stay coarser than the data mesh");
        }
        Grid1D grid(n, Boundary::Neumann);
        PriorOperator prior(grid, alpha_prior, prior_scale);
        ForwardOperator f(grid, alpha_pde, obs_points);
        FieldVector truth_field;
        const FieldVector* truth_ptr = nullptr;
        if (truth != nullptr) {
            Eigen::VectorXd t(n);
            for (int i = 0; i < n; ++i) t[i] = (*truth)(grid.nodes()[i]);
            truth_field = FieldVector(grid, std::move(t));
            truth_ptr = &truth_field;
        }
        ViResult res = run_vi(prior, lam_prior, f, data, cfg, truth_ptr);
        out.meshes.push_back(n);
        out.traces.push_back(std::move(res.trace));
        out.lambdas.push_back(res.lam_post);
    }
    return out;
}

}  // namespace ncpvi
