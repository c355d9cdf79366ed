#include "ncpvi/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ncpvi {

namespace {

SymTridiag pde_system(const Grid1D& pde_grid, double alpha) {
    return SymTridiag::identity(pde_grid.size()).add_scaled(laplacian(pde_grid), alpha);
}

const Grid1D& require_min_size(const Grid1D& grid) {
    // The interior Dirichlet grid needs at least 3 nodes of its own.
    if (grid.size() < 5) {
        throw std::invalid_argument("ForwardOperator: parameter grid needs at least 5 nodes");
    }
    return grid;
}

Eigen::MatrixXd build_obs_matrix(const Grid1D& pde_grid, const std::vector<double>& obs) {
    const int nd = pde_grid.size();
    const double h = pde_grid.spacing();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<int>(obs.size()), nd);
    for (int i = 0; i < static_cast<int>(obs.size()); ++i) {
        const double pos = obs[i] / h;
        int j = static_cast<int>(std::floor(pos));
        double t = pos - j;
        // Nodes 0 and nd+1 are the homogeneous boundary; their weights drop.
        if (j >= 1 && j <= nd) b(i, j - 1) += 1.0 - t;
        if (j + 1 >= 1 && j + 1 <= nd) b(i, j) += t;
    }
    return b;
}

}  // namespace

ForwardOperator::ForwardOperator(Grid1D param_grid, double alpha_pde, std::vector<double> obs_points)
    : param_grid_(require_min_size(param_grid)),
      pde_grid_(param_grid_.size() - 2, Boundary::Dirichlet),
      alpha_pde_(alpha_pde),
      obs_points_(std::move(obs_points)),
      system_(pde_system(pde_grid_, alpha_pde)),
      factor_(system_),
      obs_(build_obs_matrix(pde_grid_, obs_points_)) {
    if (param_grid_.boundary() != Boundary::Neumann) {
        throw std::invalid_argument("ForwardOperator: parameter grid must be the Neumann layout");
    }
    if (alpha_pde <= 0.0) throw std::invalid_argument("ForwardOperator: alpha_pde must be positive");
    if (obs_points_.empty()) throw std::invalid_argument("ForwardOperator: no observation points");
    for (std::size_t i = 0; i < obs_points_.size(); ++i) {
        if (obs_points_[i] <= 0.0 || obs_points_[i] > 1.0) {
            throw std::invalid_argument("ForwardOperator: observation points must lie in (0,1]");
        }
        if (i > 0 && obs_points_[i] <= obs_points_[i - 1]) {
            throw std::invalid_argument("ForwardOperator: observation points must be increasing");
        }
    }
}

Eigen::VectorXd ForwardOperator::restrict_to_pde_grid(const FieldVector& u) const {
    if (u.grid.same_layout(pde_grid_)) return u.values;
    if (u.grid.same_layout(param_grid_)) return u.values.segment(1, pde_grid_.size());
    throw std::invalid_argument("ForwardOperator: field is on an unrelated grid");
}

FieldVector ForwardOperator::solve_pde(const FieldVector& u) const {
    return FieldVector(pde_grid_, factor_.solve(restrict_to_pde_grid(u)));
}

Eigen::VectorXd ForwardOperator::apply_h(const FieldVector& u) const {
    return obs_ * factor_.solve(restrict_to_pde_grid(u));
}

FieldVector ForwardOperator::apply_h_adjoint(const Eigen::VectorXd& y) const {
    if (y.size() != n_obs()) throw std::invalid_argument("apply_h_adjoint: length mismatch");
    Eigen::VectorXd interior = factor_.solve(obs_.transpose() * y);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(param_grid_.size());
    out.segment(1, pde_grid_.size()) = interior / param_grid_.spacing();
    return FieldVector(param_grid_, std::move(out));
}

double potential(const ForwardOperator& f, const FieldVector& v, double lam, const DataVector& data) {
    if (data.d.size() != f.n_obs()) throw std::invalid_argument("potential: data length mismatch");
    return 0.5 * data.tau * (data.d - lam * f.apply_h(v)).squaredNorm();
}

DataVector generate_data(const std::function<double(double)>& truth, int fine_n,
                         const ForwardOperator& coarse_f, double noise_pct,
                         std::uint64_t rng_seed) {
    if (fine_n <= coarse_f.param_grid().size()) {
        throw std::invalid_argument(
            "generate_data: fine mesh must be strictly finer than the inversion mesh");
    }
    Grid1D fine_grid(fine_n, Boundary::Neumann);
    ForwardOperator fine_f(fine_grid, coarse_f.alpha_pde(), coarse_f.obs_points());
    Eigen::VectorXd u_true(fine_n);
    for (int i = 0; i < fine_n; ++i) u_true[i] = truth(fine_grid.nodes()[i]);
    Eigen::VectorXd y = fine_f.apply_h(FieldVector(fine_grid, std::move(u_true)));

    DataVector out;
    out.noise_pct = noise_pct;
    if (noise_pct == 0.0) {
        out.d = y;
        out.tau = 1.0;
        return out;
    }
    const double sigma = noise_pct * y.cwiseAbs().maxCoeff();
    out.tau = 1.0 / (sigma * sigma);
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    out.d.resize(y.size());
    for (int i = 0; i < y.size(); ++i) out.d[i] = y[i] + sigma * normal(rng);
    return out;
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void write_data_csv(const std::string& path, const ForwardOperator& f, const DataVector& data,
                    const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_data_csv: cannot open " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    out << "tau=" << fmt17(data.tau) << "\n";
    out << "noise_pct=" << fmt17(data.noise_pct) << "\n";
    out << "x_obs,d\n";
    for (int i = 0; i < data.d.size(); ++i) {
        out << fmt17(f.obs_points()[i]) << "," << fmt17(data.d[i]) << "\n";
    }
}

std::pair<std::vector<double>, DataVector> read_data_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_data_csv: cannot open " + path);
    std::vector<double> obs;
    std::vector<double> vals;
    DataVector data;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("tau=", 0) == 0) {
            data.tau = std::stod(line.substr(4));
            continue;
        }
        if (line.rfind("noise_pct=", 0) == 0) {
            data.noise_pct = std::stod(line.substr(10));
            continue;
        }
        if (line.rfind("x_obs", 0) == 0) {
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("read_data_csv: malformed row: " + line);
        obs.push_back(std::stod(line.substr(0, comma)));
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!header_seen || obs.empty()) throw std::runtime_error("read_data_csv: no observation rows in " + path);
    data.d = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
    return {std::move(obs), std::move(data)};
}

}  // namespace ncpvi
