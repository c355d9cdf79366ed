#include "ncpvi/prior.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <random>

using namespace ncpvi;

namespace {

FieldVector random_field(const Grid1D& g, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(g.size());
    for (auto& x : v) x = normal(rng);
    return FieldVector(g, std::move(v));
}

}  // namespace

TEST_CASE("apply_c0 basics") {
    Grid1D g = build_grid(50, Boundary::Neumann);
    PriorOperator prior(g, 0.05);

    CHECK(prior.apply_c0(zero_field(g)).values.isZero());

    // Constants are invariant under (I - alpha*Laplacian)^-2 with Neumann ends.
    FieldVector c(g, Eigen::VectorXd::Constant(50, 2.5));
    CHECK((prior.apply_c0(c).values.array() - 2.5).abs().maxCoeff() < 1e-10);
    CHECK((prior.apply_c0_sqrt(c).values.array() - 2.5).abs().maxCoeff() < 1e-10);
    CHECK((prior.apply_c0_inv(c).values.array() - 2.5).abs().maxCoeff() < 1e-10);
}

TEST_CASE("apply_c0 agrees with the dense inverse-squared oracle") {
    Grid1D g = build_grid(50, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    Eigen::MatrixXd c0 = testing::dense_c0(prior);
    std::mt19937_64 rng(11);
    FieldVector f = random_field(g, rng);
    Eigen::VectorXd expected = c0 * f.values;
    CHECK((prior.apply_c0(f).values - expected).norm() <= 1e-10 * expected.norm());
}

TEST_CASE("square root and inverse identities") {
    Grid1D g = build_grid(64, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        FieldVector f = random_field(g, rng);
        Eigen::VectorXd twice = prior.apply_c0_sqrt(prior.apply_c0_sqrt(f)).values;
        Eigen::VectorXd once = prior.apply_c0(f).values;
        CHECK((twice - once).norm() <= 1e-12 * once.norm());

        Eigen::VectorXd round = prior.apply_c0_inv(prior.apply_c0(f)).values;
        CHECK((round - f.values).norm() <= 1e-10 * f.values.norm());
    }
}

TEST_CASE("prior scale enters as scale^2 in C0") {
    Grid1D g = build_grid(32, Boundary::Neumann);
    PriorOperator base(g, 0.05);
    PriorOperator doubled(g, 0.05, 2.0);
    std::mt19937_64 rng(17);
    FieldVector f = random_field(g, rng);
    CHECK((doubled.apply_c0(f).values - 4.0 * base.apply_c0(f).values).norm() <
          1e-12 * base.apply_c0(f).values.norm());
}

TEST_CASE("C0 is self-adjoint in the M inner product") {
    Grid1D g = build_grid(41, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        FieldVector a = random_field(g, rng);
        FieldVector b = random_field(g, rng);
        const double lhs = inner_m(prior.apply_c0(a), b);
        const double rhs = inner_m(a, prior.apply_c0(b));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("sampling is deterministic per seed") {
    Grid1D g = build_grid(30, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    FieldVector a = sample_prior(prior, 99);
    FieldVector b = sample_prior(prior, 99);
    FieldVector c = sample_prior(prior, 100);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("empirical sample covariance matches the dense oracle") {
    Grid1D g = build_grid(30, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    Eigen::MatrixXd cov = testing::dense_prior_sample_cov(prior);

    const int n_samples = 20000;
    std::mt19937_64 rng(123);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(30);
    Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(30);
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd v = prior.sample(rng).values;
        sum += v;
        sum2 += v.cwiseAbs2();
    }
    Eigen::VectorXd mean = sum / n_samples;
    Eigen::VectorXd var = sum2 / n_samples - mean.cwiseAbs2();

    // Top-5 diagonal entries of the dense covariance.
    std::vector<int> idx(30);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return cov(a, a) > cov(b, b); });
    for (int k = 0; k < 5; ++k) {
        const int i = idx[k];
        CHECK(var[i] == doctest::Approx(cov(i, i)).epsilon(0.05));
    }

    const double max_var = cov.diagonal().maxCoeff();
    CHECK(mean.cwiseAbs().maxCoeff() < 4.0 * std::sqrt(max_var / n_samples));
}

TEST_CASE("discrete C0 spectrum decays like k^-4") {
    Grid1D g = build_grid(50, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(testing::dense_c0(prior));
    Eigen::VectorXd xi = es.eigenvalues().reverse();  // descending
    CHECK(xi[0] > 0.0);
    CHECK(xi[xi.size() - 1] > 0.0);

    // Fit log xi_j against log-mode-number over the top 20 nonconstant modes.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int count = 20;
    for (int j = 1; j <= count; ++j) {
        const double x = std::log(static_cast<double>(j));
        const double y = std::log(xi[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-4.0).epsilon(0.125));  // within +-0.5
}

TEST_CASE("prior rejects mismatched grids") {
    Grid1D g = build_grid(30, Boundary::Neumann);
    Grid1D other = build_grid(31, Boundary::Neumann);
    PriorOperator prior(g, 0.05);
    CHECK_THROWS_AS(prior.apply_c0(zero_field(other)), std::invalid_argument);
    CHECK_THROWS_AS(PriorOperator(build_grid(30, Boundary::Dirichlet), 0.05),
                    std::invalid_argument);
}
