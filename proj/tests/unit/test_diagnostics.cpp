#include "ncpvi/diagnostics.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace ncpvi;

namespace {

std::vector<double> obs_20() {
    std::vector<double> obs;
    for (int i = 1; i <= 20; ++i) obs.push_back(i / 20.0);
    return obs;
}

FieldVector cosine_field(const Grid1D& g) {
    Eigen::VectorXd v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = 10.0 * (std::cos(4.0 * M_PI * g.nodes()[i]) + 1.0);
    return FieldVector(g, std::move(v));
}

}  // namespace

TEST_CASE("relative_error closed forms") {
    Grid1D g(50, Boundary::Neumann);
    FieldVector t = cosine_field(g);
    CHECK(relative_error(t, t) == 0.0);

    FieldVector twice(g, 2.0 * t.values);
    CHECK(relative_error(twice, t) == doctest::Approx(1.0).epsilon(1e-12));

    // Homogeneous under joint scaling.
    FieldVector est(g, t.values.array().sin().matrix());
    FieldVector est_scaled(g, -3.0 * est.values);
    FieldVector t_scaled(g, -3.0 * t.values);
    CHECK(relative_error(est_scaled, t_scaled) ==
          doctest::Approx(relative_error(est, t)).epsilon(1e-12));

    CHECK_THROWS_AS(relative_error(t, zero_field(g)), std::invalid_argument);
}

TEST_CASE("kl_gaussian_1d closed forms") {
    CHECK(kl_gaussian_1d(2.0, 3.0, 2.0, 3.0) == 0.0);
    CHECK(kl_gaussian_1d(0.0, 1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(kl_gaussian_1d(313.387, 11.861, 312.006, 12.972) - 0.07546) < 1e-4);
    CHECK_THROWS_AS(kl_gaussian_1d(0.0, -1.0, 0.0, 1.0), std::invalid_argument);

    // Nonnegative over a parameter grid, zero only at p == q.
    for (double mp : {-1.0, 0.0, 2.0}) {
        for (double vp : {0.5, 1.0, 4.0}) {
            for (double mq : {-1.0, 0.0, 2.0}) {
                for (double vq : {0.5, 1.0, 4.0}) {
                    const double kl = kl_gaussian_1d(mp, vp, mq, vq);
                    CHECK(kl >= 0.0);
                    if (mp == mq && vp == vq) CHECK(kl == 0.0);
                    if (mp != mq || vp != vq) CHECK(kl > 0.0);
                }
            }
        }
    }
}

TEST_CASE("normal quantile pins z(0.95)") {
    CHECK(std::abs(normal_quantile_two_sided(0.95) - 1.959964) < 1e-6);
    CHECK(std::abs(normal_quantile_two_sided(0.99) - 2.5758293) < 1e-6);
}

TEST_CASE("credibility band closed forms") {
    Grid1D g(10, Boundary::Neumann);
    FieldVector mean(g, Eigen::VectorXd::Zero(10));
    auto [lo_zero, hi_zero] = credibility_band(mean, Eigen::VectorXd::Zero(10), 0.95);
    CHECK(lo_zero.values == mean.values);
    CHECK(hi_zero.values == mean.values);

    auto [lo, hi] = credibility_band(mean, Eigen::VectorXd::Ones(10), 0.95);
    CHECK(lo.values[0] == doctest::Approx(-1.95996).epsilon(1e-5));
    CHECK(hi.values[0] == doctest::Approx(1.95996).epsilon(1e-5));

    CHECK_THROWS_AS(credibility_band(mean, Eigen::VectorXd::Constant(10, -0.1), 0.95),
                    std::invalid_argument);
}

TEST_CASE("u moments against closed forms and the prior limit") {
    Grid1D g(40, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    ForwardOperator f(g, 0.05, obs_20());
    auto truth = [](double x) { return 10.0 * (std::cos(4.0 * M_PI * x) + 1.0); };
    DataVector data = generate_data(truth, 10000, f, 0.05, 7);

    EigenPairs eig = double_pass_eig(make_gtilde_matvec(prior, f, data.tau), g, 10, 10, 3);

    // Cov(u) decomposes as (c_lambda + lam*^2) C_v plus c_lambda v* v*^T:
    // with c_lambda = 0 and lam* = sqrt(rho_u) only the first term remains.
    {
        LambdaPosterior lam_post{250.0, 40.0};
        VPosterior v_post = update_v(prior, f, data, lam_post, eig);
        const double rho_u = lam_post.c_lambda + lam_post.lam_star * lam_post.lam_star;
        UPosteriorMoments full(v_post, lam_post);
        UPosteriorMoments scaled_cv_only(v_post, LambdaPosterior{std::sqrt(rho_u), 0.0});
        for (int i : {1, 9, 25}) {
            for (int j : {4, 9, 33}) {
                const double expected = scaled_cv_only.cov(i, j) +
                                        lam_post.c_lambda * v_post.v_star.values[i] *
                                            v_post.v_star.values[j];
                CHECK(full.cov(i, j) == doctest::Approx(expected).epsilon(1e-12));
                CHECK(full.cov(i, j) == full.cov(j, i));
            }
        }
        CHECK(full.mean().values == (lam_post.lam_star * v_post.v_star.values).eval());
    }

    // Rank-0 posterior with c_lambda = 0 and lam* = 1 is the prior field.
    {
        EigenPairs empty;
        empty.grid = g;
        empty.vecs.resize(g.size(), 0);
        VPosterior v_post{zero_field(g), LowRankPosteriorCov(prior, empty, 1.0)};
        UPosteriorMoments m(v_post, LambdaPosterior{1.0, 0.0});
        Eigen::MatrixXd prior_cov = testing::dense_prior_sample_cov(prior);
        for (int i : {0, 7, 20}) {
            for (int j : {0, 13, 39}) {
                CHECK(std::abs(m.cov(i, j) - prior_cov(i, j)) <= 1e-10 * std::abs(prior_cov(i, j)));
            }
        }
        auto bands = covariance_bands(m, {0, 5});
        auto prior_bands = covariance_bands(prior_cov, {0, 5});
        CHECK((bands[0] - prior_bands[0]).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK((bands[1] - prior_bands[1]).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK(bands[0].minCoeff() >= 0.0);
    }
}

TEST_CASE("u moments match Monte Carlo draws from the factors") {
    Grid1D g(30, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    ForwardOperator f(g, 0.05, obs_20());
    auto truth = [](double x) { return 10.0 * (std::cos(4.0 * M_PI * x) + 1.0); };
    DataVector data = generate_data(truth, 10000, f, 0.05, 7);

    EigenPairs eig = double_pass_eig(make_gtilde_matvec(prior, f, data.tau), g, 10, 10, 3);
    LambdaPosterior lam_post{250.0, 40.0};
    VPosterior v_post = update_v(prior, f, data, lam_post, eig);
    UPosteriorMoments m(v_post, lam_post);

    const int n_draws = 100000;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(30), sum2 = Eigen::VectorXd::Zero(30);
    for (int s = 0; s < n_draws; ++s) {
        const double lam = lam_post.lam_star + std::sqrt(lam_post.c_lambda) * normal(rng);
        Eigen::VectorXd v = v_post.v_star.values + v_post.cov.sample(rng).values;
        Eigen::VectorXd u = lam * v;
        sum += u;
        sum2 += u.cwiseAbs2();
    }
    Eigen::VectorXd mc_mean = sum / n_draws;
    Eigen::VectorXd mc_var = sum2 / n_draws - mc_mean.cwiseAbs2();
    Eigen::VectorXd var = m.variance();
    for (int i : {2, 10, 15, 22, 28}) {
        const double se_mean = std::sqrt(var[i] / n_draws);
        CHECK(std::abs(mc_mean[i] - m.mean().values[i]) < 3.0 * se_mean);
        CHECK(mc_var[i] == doctest::Approx(var[i]).epsilon(0.05));
    }
}

TEST_CASE("cp/ncp density relation is constant across random points") {
    CHECK(cp_ncp_density_check(1, 7, 200) < 1e-12);
    CHECK(cp_ncp_density_check(3, 7, 1000) < 1e-10);
    CHECK(cp_ncp_density_check(5, 11, 1000) < 1e-10);
    CHECK_THROWS_AS(cp_ncp_density_check(11, 7), std::invalid_argument);
}

TEST_CASE("mesh study basics") {
    Grid1D coarse(40, Boundary::Neumann);
    ForwardOperator f(coarse, 0.05, obs_20());
    auto truth_fn = [](double x) { return 10.0 * (std::cos(4.0 * M_PI * x) + 1.0); };
    DataVector data = generate_data(truth_fn, 4001, f, 0.05, 7);
    LambdaPrior lam_prior(1.0, 1e4);
    ViConfig cfg;
    cfg.eig_seed = 5;
    cfg.max_iter = 4000;

    MeshStudyResult res = mesh_independence_study({40}, 4001, data, obs_20(), 0.05, 0.05,
                                                  lam_prior, cfg);
    CHECK(res.meshes.size() == 1);
    CHECK(res.lambdas.size() == 1);
    CHECK(res.traces[0].converged);

    CHECK_THROWS_AS(mesh_independence_study({5000}, 4001, data, obs_20(), 0.05, 0.05, lam_prior,
                                            cfg),
                    std::invalid_argument);
}
