#include "ncpvi/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace ncpvi {

Grid1D::Grid1D(int n, Boundary bc) : n_(n), bc_(bc) {
    if (n < 3) {
        throw std::invalid_argument("Grid1D: need at least 3 nodes");
    }
    Eigen::VectorXd x(n);
    if (bc == Boundary::Dirichlet) {
        h_ = 1.0 / (n + 1);
        for (int i = 0; i < n; ++i) x[i] = (i + 1) * h_;
    } else {
        h_ = 1.0 / (n - 1);
        for (int i = 0; i < n; ++i) x[i] = i * h_;
    }
    nodes_ = std::make_shared<const Eigen::VectorXd>(std::move(x));
}

FieldVector::FieldVector(Grid1D g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) {
        throw std::invalid_argument("FieldVector: value count does not match grid");
    }
}

FieldVector zero_field(const Grid1D& grid) {
    return FieldVector(grid, Eigen::VectorXd::Zero(grid.size()));
}

SymTridiag::SymTridiag(Eigen::VectorXd diag, Eigen::VectorXd off)
    : diag_(std::move(diag)), off_(std::move(off)) {
    if (off_.size() != diag_.size() - 1) {
        throw std::invalid_argument("SymTridiag: off-diagonal must have n-1 entries");
    }
}

SymTridiag SymTridiag::identity(int n) {
    return SymTridiag(Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n - 1));
}

Eigen::VectorXd SymTridiag::apply(const Eigen::VectorXd& x) const {
    const int n = size();
    if (x.size() != n) throw std::invalid_argument("SymTridiag::apply: size mismatch");
    Eigen::VectorXd y = diag_.cwiseProduct(x);
    y.head(n - 1) += off_.cwiseProduct(x.tail(n - 1));
    y.tail(n - 1) += off_.cwiseProduct(x.head(n - 1));
    return y;
}

Eigen::MatrixXd SymTridiag::dense() const {
    const int n = size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.diagonal() = diag_;
    a.diagonal(1) = off_;
    a.diagonal(-1) = off_;
    return a;
}

SymTridiag SymTridiag::add_scaled(const SymTridiag& other, double c) const {
    if (other.size() != size()) throw std::invalid_argument("SymTridiag::add_scaled: size mismatch");
    return SymTridiag(diag_ + c * other.diag_, off_ + c * other.off_);
}

TridiagFactor::TridiagFactor(const SymTridiag& a) {
    const int n = a.size();
    d_.resize(n);
    l_.resize(n - 1);
    d_[0] = a.diag()[0];
    if (d_[0] <= 0.0) throw std::runtime_error("TridiagFactor: matrix not positive definite");
    for (int i = 1; i < n; ++i) {
        l_[i - 1] = a.off()[i - 1] / d_[i - 1];
        d_[i] = a.diag()[i] - l_[i - 1] * a.off()[i - 1];
        if (d_[i] <= 0.0) throw std::runtime_error("TridiagFactor: matrix not positive definite");
    }
}

Eigen::VectorXd TridiagFactor::solve(const Eigen::VectorXd& b) const {
    const int n = size();
    if (b.size() != n) throw std::invalid_argument("TridiagFactor::solve: size mismatch");
    Eigen::VectorXd x = b;
    for (int i = 1; i < n; ++i) x[i] -= l_[i - 1] * x[i - 1];
    x[n - 1] /= d_[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = x[i] / d_[i] - l_[i] * x[i + 1];
    return x;
}

Grid1D build_grid(int n, Boundary bc) {
    return Grid1D(n, bc);
}

SymTridiag laplacian(const Grid1D& grid) {
    const int n = grid.size();
    const double w = 1.0 / (grid.spacing() * grid.spacing());
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 2.0 * w);
    Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -w);
    if (grid.boundary() == Boundary::Neumann) {
        diag[0] = w;
        diag[n - 1] = w;
    }
    return SymTridiag(std::move(diag), std::move(off));
}

SymTridiag mass_weights(const Grid1D& grid) {
    const int n = grid.size();
    return SymTridiag(Eigen::VectorXd::Constant(n, grid.spacing()), Eigen::VectorXd::Zero(n - 1));
}

double inner_m(const Grid1D& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return grid.spacing() * a.dot(b);
}

double norm_m(const Grid1D& grid, const Eigen::VectorXd& a) {
    return std::sqrt(grid.spacing()) * a.norm();
}

double inner_m(const FieldVector& a, const FieldVector& b) {
    if (!a.grid.same_layout(b.grid)) throw std::invalid_argument("inner_m: grid mismatch");
    return inner_m(a.grid, a.values, b.values);
}

double norm_m(const FieldVector& a) {
    return norm_m(a.grid, a.values);
}

void require_same_grid(const FieldVector& f, const Grid1D& grid, const char* where) {
    if (!f.grid.same_layout(grid)) {
        throw std::invalid_argument(std::string(where) + ": field is on a different grid");
    }
}

}  // namespace ncpvi
