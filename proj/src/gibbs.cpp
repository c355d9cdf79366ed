#include "ncpvi/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ncpvi {

GibbsState init_gibbs_state(const PriorOperator& prior, const LambdaPrior& lam_prior,
                            const ForwardOperator& f, std::mt19937_64& rng) {
    GibbsState s;
    s.v = prior.sample(rng);
    s.hv = f.apply_h(s.v);
    s.lam = lam_prior.mean;
    return s;
}

namespace {

double misfit(const DataVector& data, const Eigen::VectorXd& hv, double lam) {
    return 0.5 * data.tau * (data.d - lam * hv).squaredNorm();
}

}  // namespace

GibbsState pcn_v_step(const GibbsState& state, const PriorOperator& prior,
                      const ForwardOperator& f, const DataVector* data, double beta,
                      std::mt19937_64& rng, bool* accepted) {
    if (beta <= 0.0 || beta > 1.0) throw std::invalid_argument("pcn_v_step: beta must be in (0,1]");
    FieldVector zeta = prior.sample(rng);
    const double ar = std::sqrt(1.0 - beta * beta);
    FieldVector v_hat(state.v.grid, ar * state.v.values + beta * zeta.values);
    Eigen::VectorXd hv_hat = f.apply_h(v_hat);

    double log_alpha = 0.0;
    if (data != nullptr) {
        log_alpha = misfit(*data, state.hv, state.lam) - misfit(*data, hv_hat, state.lam);
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const bool accept = std::log(unif(rng)) < log_alpha;
    if (accepted != nullptr) *accepted = accept;
    if (accept) {
        return GibbsState{std::move(v_hat), std::move(hv_hat), state.lam};
    }
    return state;
}

std::pair<double, double> lambda_conditional(const Eigen::VectorXd& hv, const DataVector* data,
                                             const LambdaPrior& lam_prior) {
    double quad = 0.0;  // tau ||Hv||^2
    double lin = 0.0;   // tau <d, Hv>
    if (data != nullptr) {
        quad = data->tau * hv.squaredNorm();
        lin = data->tau * data->d.dot(hv);
    }
    const double var_k = 1.0 / (quad + 1.0 / lam_prior.variance);
    const double mean_k = var_k * (lin + lam_prior.mean / lam_prior.variance);
    return {mean_k, var_k};
}

double lambda_gibbs_step(GibbsState& state, const ForwardOperator& f, const DataVector* data,
                         const LambdaPrior& lam_prior, std::mt19937_64& rng) {
    (void)f;
    const auto [mean_k, var_k] = lambda_conditional(state.hv, data, lam_prior);

    std::normal_distribution<double> normal(0.0, 1.0);
    const double lam_hat = mean_k + std::sqrt(var_k) * normal(rng);

    // Posterior-conditional target against the independence proposal; the
    // two cancel exactly, so this is 1 up to roundoff.
    auto log_target = [&](double lam) {
        double phi = 0.0;
        if (data != nullptr) phi = misfit(*data, state.hv, lam);
        const double dl = lam - lam_prior.mean;
        return -phi - 0.5 * dl * dl / lam_prior.variance;
    };
    auto log_proposal = [&](double lam) {
        const double dl = lam - mean_k;
        return -0.5 * dl * dl / var_k;
    };
    const double log_ratio = (log_target(lam_hat) - log_proposal(lam_hat)) -
                             (log_target(state.lam) - log_proposal(state.lam));
    state.lam = lam_hat;
    return std::exp(log_ratio);
}

namespace {

ChainSummary run_chain_impl(const PriorOperator& prior, const LambdaPrior& lam_prior,
                            const ForwardOperator& f, const DataVector* data,
                            const GibbsConfig& cfg, std::ostream* lambda_trace) {
    if (cfg.beta <= 0.0 || cfg.beta > 1.0) throw std::invalid_argument("run_chain: beta must be in (0,1]");
    if (cfg.burn_in >= cfg.n_samples) throw std::invalid_argument("run_chain: burn_in must be below n_samples");
    if (cfg.thin < 1) throw std::invalid_argument("run_chain: thin must be at least 1");

    const int n = prior.grid().size();
    const bool dense_cov = n <= 200;
    std::mt19937_64 rng(cfg.rng_seed);
    GibbsState state = init_gibbs_state(prior, lam_prior, f, rng);

    Eigen::VectorXd sum_u = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sum_u2 = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd sum_uu;
    std::vector<int> band_offsets;
    std::vector<Eigen::VectorXd> sum_band;
    if (dense_cov) {
        sum_uu = Eigen::MatrixXd::Zero(n, n);
    } else {
        for (int k : {20, 40, 50}) {
            if (k < n) {
                band_offsets.push_back(k);
                sum_band.push_back(Eigen::VectorXd::Zero(n - k));
            }
        }
    }
    std::vector<double> lam_kept;
    double sum_lam = 0.0;
    double sum_lam2 = 0.0;
    long accepted = 0;
    long kept = 0;
    bool budget_exceeded = false;

    const auto t0 = std::chrono::steady_clock::now();
    long completed = 0;
    for (long i = 0; i < cfg.n_samples; ++i, ++completed) {
        bool acc = false;
        state = pcn_v_step(state, prior, f, data, cfg.beta, rng, &acc);
        accepted += acc ? 1 : 0;
        lambda_gibbs_step(state, f, data, lam_prior, rng);

        if (lambda_trace != nullptr) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%ld,%.17g\n", i, state.lam);
            (*lambda_trace) << buf;
        }
        if (i >= cfg.burn_in && (i - cfg.burn_in) % cfg.thin == 0) {
            Eigen::VectorXd u = state.lam * state.v.values;
            sum_u += u;
            sum_u2 += u.cwiseAbs2();
            if (dense_cov) {
                sum_uu.selfadjointView<Eigen::Lower>().rankUpdate(u);
            } else {
                for (std::size_t b = 0; b < band_offsets.size(); ++b) {
                    const int k = band_offsets[b];
                    sum_band[b] += u.head(n - k).cwiseProduct(u.tail(n - k));
                }
            }
            sum_lam += state.lam;
            sum_lam2 += state.lam * state.lam;
            lam_kept.push_back(state.lam);
            ++kept;
        }
        if (cfg.max_seconds > 0.0 && (i & 1023) == 0) {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            if (dt.count() > cfg.max_seconds) {
                budget_exceeded = true;
                ++completed;
                break;
            }
        }
    }

    if (kept < 2) throw std::runtime_error("run_chain: too few retained samples");

    ChainSummary s;
    const double m = static_cast<double>(kept);
    s.mean_u = FieldVector(prior.grid(), sum_u / m);
    s.var_u = sum_u2 / m - s.mean_u.values.cwiseAbs2();
    s.var_u = s.var_u.cwiseMax(0.0);
    if (dense_cov) {
        Eigen::MatrixXd c = sum_uu.selfadjointView<Eigen::Lower>();
        s.cov_u = c / m - s.mean_u.values * s.mean_u.values.transpose();
    } else {
        s.band_offsets = band_offsets;
        for (std::size_t b = 0; b < band_offsets.size(); ++b) {
            const int k = band_offsets[b];
            s.cov_bands.push_back(sum_band[b] / m -
                                  s.mean_u.values.head(n - k).cwiseProduct(
                                      s.mean_u.values.tail(n - k)));
        }
    }
    s.lambda_mean = sum_lam / m;
    s.lambda_var = sum_lam2 / m - s.lambda_mean * s.lambda_mean;
    s.acceptance_rate_v = static_cast<double>(accepted) / static_cast<double>(completed);
    s.ess_lambda = effective_sample_size(lam_kept);
    s.kept = kept;
    s.budget_exceeded = budget_exceeded;
    return s;
}

}  // namespace

ChainSummary run_chain(const PriorOperator& prior, const LambdaPrior& lam_prior,
                       const ForwardOperator& f, const DataVector& data, const GibbsConfig& cfg,
                       std::ostream* lambda_trace) {
    if (data.d.size() != f.n_obs()) throw std::invalid_argument("run_chain: data length mismatch");
    return run_chain_impl(prior, lam_prior, f, &data, cfg, lambda_trace);
}

ChainSummary run_chain_prior_only(const PriorOperator& prior, const LambdaPrior& lam_prior,
                                  const ForwardOperator& f, const GibbsConfig& cfg,
                                  std::ostream* lambda_trace) {
    return run_chain_impl(prior, lam_prior, f, nullptr, cfg, lambda_trace);
}

double effective_sample_size(const std::vector<double>& samples) {
    const long m = static_cast<long>(samples.size());
    if (m < 4) return static_cast<double>(m);
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= static_cast<double>(m);
    if (var <= 0.0) return static_cast<double>(m);

    auto acov = [&](long lag) {
        double s = 0.0;
        for (long i = 0; i + lag < m; ++i) s += (samples[i] - mean) * (samples[i + lag] - mean);
        return s / static_cast<double>(m);
    };

    // Sum autocorrelations over consecutive pairs while the pair sums stay
    // positive (Geyer's initial positive sequence). Lag capped to keep the
    // estimator O(m * max_lag).
    const long max_lag = std::min(m - 2, 4000L);
    double tau_sum = 0.0;
    for (long k = 1; k + 1 <= max_lag; k += 2) {
        const double pair = (acov(k) + acov(k + 1)) / var;
        if (pair <= 0.0) break;
        tau_sum += pair;
    }
    const double ess = static_cast<double>(m) / (1.0 + 2.0 * tau_sum);
    return std::min(ess, static_cast<double>(m));
}

}  // namespace ncpvi
