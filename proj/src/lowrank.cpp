#include "ncpvi/lowrank.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace ncpvi {

FieldVector gtilde_matvec(const PriorOperator& prior, const ForwardOperator& f, double tau,
                          const FieldVector& v) {
    FieldVector g = prior.apply_c0_sqrt(v);
    Eigen::VectorXd y = tau * f.apply_h(g);
    return prior.apply_c0_sqrt(f.apply_h_adjoint(y));
}

Matvec make_gtilde_matvec(const PriorOperator& prior, const ForwardOperator& f, double tau) {
    const Grid1D grid = prior.grid();
    return [&prior, &f, tau, grid](const Eigen::VectorXd& x) {
        return gtilde_matvec(prior, f, tau, FieldVector(grid, x)).values;
    };
}

namespace {

/// M-orthonormalize columns in place, dropping numerically dependent ones.
Eigen::MatrixXd m_orthonormalize(const Grid1D& grid, const Eigen::MatrixXd& y) {
    const int n = static_cast<int>(y.rows());
    const int l = static_cast<int>(y.cols());
    double max_norm = 0.0;
    for (int j = 0; j < l; ++j) max_norm = std::max(max_norm, norm_m(grid, y.col(j)));
    const double drop_tol = 1e-12 * max_norm;

    Eigen::MatrixXd q(n, l);
    int kept = 0;
    for (int j = 0; j < l; ++j) {
        Eigen::VectorXd w = y.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < kept; ++k) {
                w -= inner_m(grid, q.col(k), w) * q.col(k);
            }
        }
        const double nrm = norm_m(grid, w);
        if (nrm <= drop_tol) continue;
        q.col(kept) = w / nrm;
        ++kept;
    }
    return q.leftCols(kept);
}

}  // namespace

EigenPairs double_pass_eig(const Matvec& matvec, const Grid1D& grid, int r, int oversample,
                           std::uint64_t rng_seed) {
    const int n = grid.size();
    if (r < 1) throw std::invalid_argument("double_pass_eig: r must be at least 1");
    if (r + oversample > n) throw std::invalid_argument("double_pass_eig: r + oversample exceeds n");
    const int l = r + oversample;

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd omega(n, l);
    for (int j = 0; j < l; ++j)
        for (int i = 0; i < n; ++i) omega(i, j) = normal(rng);

    // First pass: sketch the range.
    Eigen::MatrixXd y(n, l);
    for (int j = 0; j < l; ++j) y.col(j) = matvec(omega.col(j));

    Eigen::MatrixXd q = m_orthonormalize(grid, y);
    const int found = static_cast<int>(q.cols());

    EigenPairs out;
    out.grid = grid;
    if (found == 0) {
        out.xis = Eigen::VectorXd();
        out.vecs = Eigen::MatrixXd(n, 0);
        out.rank_deficient = true;
        return out;
    }

    // Second pass: Rayleigh-Ritz projection T = Q^dia (G Q).
    Eigen::MatrixXd z(n, found);
    for (int j = 0; j < found; ++j) z.col(j) = matvec(q.col(j));
    Eigen::MatrixXd t = grid.spacing() * (q.transpose() * z);
    t = 0.5 * (t + t.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success) throw std::runtime_error("double_pass_eig: projected solve failed");

    const int keep = std::min(r, found);
    out.xis.resize(keep);
    out.vecs.resize(n, keep);
    for (int i = 0; i < keep; ++i) {
        const int src = found - 1 - i;  // ascending -> descending
        out.xis[i] = std::max(es.eigenvalues()[src], 0.0);
        out.vecs.col(i) = q * es.eigenvectors().col(src);
    }
    out.rank_deficient = keep < r;
    return out;
}

double trace_lowrank(const EigenPairs& eig, double rho) {
    if (rho <= 0.0) throw std::invalid_argument("trace_lowrank: rho must be positive");
    double tr = 0.0;
    for (int i = 0; i < eig.rank(); ++i) tr += eig.xis[i] / (rho * eig.xis[i] + 1.0);
    return tr;
}

LowRankPosteriorCov::LowRankPosteriorCov(PriorOperator prior, EigenPairs eig, double rho)
    : prior_(std::move(prior)), eig_(std::move(eig)), rho_(rho) {
    if (rho <= 0.0) throw std::invalid_argument("LowRankPosteriorCov: rho must be positive");
    if (eig_.rank() > 0 && !eig_.grid.same_layout(prior_.grid())) {
        throw std::invalid_argument("LowRankPosteriorCov: eigenpairs on a different grid");
    }
    dr_.resize(eig_.rank());
    for (int i = 0; i < eig_.rank(); ++i) dr_[i] = rho_ * eig_.xis[i] / (rho_ * eig_.xis[i] + 1.0);
}

FieldVector LowRankPosteriorCov::apply(const FieldVector& f) const {
    FieldVector g = prior_.apply_c0_sqrt(f);
    if (eig_.rank() > 0) {
        Eigen::VectorXd c = prior_.grid().spacing() * (eig_.vecs.transpose() * g.values);
        g.values -= eig_.vecs * dr_.cwiseProduct(c);
    }
    return prior_.apply_c0_sqrt(g);
}

FieldVector LowRankPosteriorCov::sample(std::mt19937_64& rng) const {
    const Grid1D& grid = prior_.grid();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd w(grid.size());
    const double m_inv_sqrt = 1.0 / std::sqrt(grid.spacing());
    for (int i = 0; i < w.size(); ++i) w[i] = m_inv_sqrt * normal(rng);
    if (eig_.rank() > 0) {
        Eigen::VectorXd c = grid.spacing() * (eig_.vecs.transpose() * w);
        Eigen::VectorXd s = dr_.unaryExpr([](double d) { return 1.0 - std::sqrt(1.0 - d); });
        w -= eig_.vecs * s.cwiseProduct(c);
    }
    return prior_.apply_c0_sqrt(FieldVector(grid, std::move(w)));
}

FieldVector smw_apply(const LowRankPosteriorCov& cov, const FieldVector& f) {
    return cov.apply(f);
}

void write_eigenvalues_csv(const std::string& path, const EigenPairs& eig,
                           const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_eigenvalues_csv: cannot open " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "k,xi_k\n";
    char buf[40];
    for (int i = 0; i < eig.rank(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", eig.xis[i]);
        out << (i + 1) << "," << buf << "\n";
    }
}

}  // namespace ncpvi
