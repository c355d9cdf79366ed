#pragma once

#include <Eigen/Core>
#include <memory>

namespace ncpvi {

enum class Boundary { Dirichlet, Neumann };

/// Uniform 1D grid on (0,1). Dirichlet grids store interior nodes only
/// (boundary values are implicitly zero); Neumann grids include both
/// endpoints. Cheap to copy.
class Grid1D {
public:
    Grid1D() = default;
    Grid1D(int n, Boundary bc);

    int size() const { return n_; }
    double spacing() const { return h_; }
    Boundary boundary() const { return bc_; }
    const Eigen::VectorXd& nodes() const { return *nodes_; }

    bool same_layout(const Grid1D& other) const {
        return n_ == other.n_ && bc_ == other.bc_;
    }

private:
    int n_ = 0;
    double h_ = 0.0;
    Boundary bc_ = Boundary::Neumann;
    std::shared_ptr<const Eigen::VectorXd> nodes_;
};

/// Nodal values of a function on a Grid1D.
struct FieldVector {
    Grid1D grid;
    Eigen::VectorXd values;

    FieldVector() = default;
    FieldVector(Grid1D g, Eigen::VectorXd v);

    int size() const { return static_cast<int>(values.size()); }
};

FieldVector zero_field(const Grid1D& grid);

/// Symmetric tridiagonal matrix. Off-diagonal may be zero (diagonal matrix).
class SymTridiag {
public:
    SymTridiag(Eigen::VectorXd diag, Eigen::VectorXd off);

    static SymTridiag identity(int n);

    int size() const { return static_cast<int>(diag_.size()); }
    const Eigen::VectorXd& diag() const { return diag_; }
    const Eigen::VectorXd& off() const { return off_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;

    /// this + c * other, same size.
    SymTridiag add_scaled(const SymTridiag& other, double c) const;

private:
    Eigen::VectorXd diag_;  // n entries
    Eigen::VectorXd off_;   // n-1 entries
};

/// LDL^T factorization of an SPD tridiagonal matrix; O(n) solves.
class TridiagFactor {
public:
    explicit TridiagFactor(const SymTridiag& a);

    int size() const { return static_cast<int>(d_.size()); }
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
    Eigen::VectorXd d_;  // pivots of D
    Eigen::VectorXd l_;  // subdiagonal of unit L
};

/// n >= 3 interior (Dirichlet) or total (Neumann) nodes.
Grid1D build_grid(int n, Boundary bc);

/// Negative Laplacian with the grid's boundary treatment: SPD 3-point
/// stencil (1/h^2)[-1, 2, -1] for Dirichlet, symmetric PSD variant with
/// [1, -1] boundary rows for Neumann (constants in the null space).
SymTridiag laplacian(const Grid1D& grid);

/// Lumped mass M = h*I defining the discrete L2 inner product.
SymTridiag mass_weights(const Grid1D& grid);

double inner_m(const Grid1D& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double norm_m(const Grid1D& grid, const Eigen::VectorXd& a);
double inner_m(const FieldVector& a, const FieldVector& b);
double norm_m(const FieldVector& a);

void require_same_grid(const FieldVector& f, const Grid1D& grid, const char* where);

}  // namespace ncpvi
