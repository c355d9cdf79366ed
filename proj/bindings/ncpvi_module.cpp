#include "ncpvi/diagnostics.hpp"
#include "ncpvi/experiment.hpp"
#include "ncpvi/gibbs.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ncpvi;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Non-centered mean-field variational inference for hierarchical "
              "Bayesian linear inverse problems (1D elliptic source benchmark)";

    py::enum_<Boundary>(m, "Boundary")
        .value("Dirichlet", Boundary::Dirichlet)
        .value("Neumann", Boundary::Neumann);

    py::class_<Grid1D>(m, "Grid1D")
        .def(py::init<int, Boundary>(), py::arg("n"), py::arg("boundary"))
        .def_property_readonly("size", &Grid1D::size)
        .def_property_readonly("spacing", &Grid1D::spacing)
        .def_property_readonly("boundary", &Grid1D::boundary)
        .def_property_readonly("nodes", [](const Grid1D& g) { return g.nodes(); })
        .def("__repr__", [](const Grid1D& g) {
            std::ostringstream s;
            s << "Grid1D(n=" << g.size() << ", "
              << (g.boundary() == Boundary::Neumann ? "Neumann" : "Dirichlet") << ")";
            return s.str();
        });

    py::class_<FieldVector>(m, "FieldVector")
        .def(py::init<Grid1D, Eigen::VectorXd>(), py::arg("grid"), py::arg("values"))
        .def_readonly("grid", &FieldVector::grid)
        .def_readonly("values", &FieldVector::values)
        .def("__len__", &FieldVector::size);

    m.def("build_grid", &build_grid, py::arg("n"), py::arg("boundary"));
    m.def("inner_m", py::overload_cast<const FieldVector&, const FieldVector&>(&inner_m));
    m.def("norm_m", py::overload_cast<const FieldVector&>(&norm_m));

    py::class_<PriorOperator>(m, "PriorOperator")
        .def(py::init<Grid1D, double, double>(), py::arg("grid"), py::arg("alpha"),
             py::arg("scale") = 1.0)
        .def_property_readonly("grid", &PriorOperator::grid)
        .def_property_readonly("alpha", &PriorOperator::alpha)
        .def_property_readonly("scale", &PriorOperator::scale)
        .def("apply_c0", &PriorOperator::apply_c0)
        .def("apply_c0_sqrt", &PriorOperator::apply_c0_sqrt)
        .def("apply_c0_inv", &PriorOperator::apply_c0_inv)
        .def("sample", [](const PriorOperator& p, std::uint64_t seed) { return p.sample(seed); },
             py::arg("seed"));

    py::class_<LambdaPrior>(m, "LambdaPrior")
        .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
        .def_readwrite("mean", &LambdaPrior::mean)
        .def_readwrite("variance", &LambdaPrior::variance);

    py::class_<DataVector>(m, "DataVector")
        .def(py::init<>())
        .def_readwrite("d", &DataVector::d)
        .def_readwrite("tau", &DataVector::tau)
        .def_readwrite("noise_pct", &DataVector::noise_pct);

    py::class_<ForwardOperator>(m, "ForwardOperator")
        .def(py::init<Grid1D, double, std::vector<double>>(), py::arg("param_grid"),
             py::arg("alpha_pde"), py::arg("obs_points"))
        .def_property_readonly("param_grid", &ForwardOperator::param_grid)
        .def_property_readonly("obs_points", &ForwardOperator::obs_points)
        .def("solve_pde", &ForwardOperator::solve_pde)
        .def("apply_h", &ForwardOperator::apply_h)
        .def("apply_h_adjoint", &ForwardOperator::apply_h_adjoint);

    m.def("potential", &potential, py::arg("forward"), py::arg("v"), py::arg("lam"),
          py::arg("data"));
    m.def("generate_data", &generate_data, py::arg("truth"), py::arg("fine_n"),
          py::arg("coarse_forward"), py::arg("noise_pct"), py::arg("rng_seed"));
    m.def("elliptic1d_truth", &elliptic1d_truth, py::arg("x"));
    m.def("truth_on_grid", &truth_on_grid, py::arg("grid"));

    py::class_<EigenPairs>(m, "EigenPairs")
        .def_readonly("xis", &EigenPairs::xis)
        .def_readonly("vecs", &EigenPairs::vecs)
        .def_readonly("rank_deficient", &EigenPairs::rank_deficient)
        .def_property_readonly("rank", &EigenPairs::rank);

    m.def("double_pass_eig", &double_pass_eig, py::arg("matvec"), py::arg("grid"), py::arg("r"),
          py::arg("oversample"), py::arg("rng_seed"));
    m.def("make_gtilde_matvec",
          [](const PriorOperator& prior, const ForwardOperator& f, double tau) {
              // Bind by value so the Python-side closure owns its operators.
              const Grid1D grid = prior.grid();
              return Matvec([prior, f, tau, grid](const Eigen::VectorXd& x) {
                  return gtilde_matvec(prior, f, tau, FieldVector(grid, x)).values;
              });
          },
          py::arg("prior"), py::arg("forward"), py::arg("tau"));
    m.def("trace_lowrank", &trace_lowrank, py::arg("eig"), py::arg("rho"));

    py::class_<LowRankPosteriorCov>(m, "LowRankPosteriorCov")
        .def(py::init<PriorOperator, EigenPairs, double>(), py::arg("prior"), py::arg("eig"),
             py::arg("rho"))
        .def_property_readonly("rho", &LowRankPosteriorCov::rho)
        .def_property_readonly("dr", &LowRankPosteriorCov::dr)
        .def("apply", &LowRankPosteriorCov::apply);

    py::class_<LambdaPosterior>(m, "LambdaPosterior")
        .def(py::init<>())
        .def_readwrite("lam_star", &LambdaPosterior::lam_star)
        .def_readwrite("c_lambda", &LambdaPosterior::c_lambda);

    py::class_<VPosterior>(m, "VPosterior")
        .def_readonly("v_star", &VPosterior::v_star)
        .def_property_readonly("cov", [](const VPosterior& p) { return p.cov; });

    py::class_<ViConfig>(m, "ViConfig")
        .def(py::init<>())
        .def_readwrite("tol", &ViConfig::tol)
        .def_readwrite("max_iter", &ViConfig::max_iter)
        .def_readwrite("r_max", &ViConfig::r_max)
        .def_readwrite("oversample", &ViConfig::oversample)
        .def_readwrite("lambda0", &ViConfig::lambda0)
        .def_readwrite("eig_seed", &ViConfig::eig_seed);

    py::class_<ViTraceRow>(m, "ViTraceRow")
        .def_readonly("iter", &ViTraceRow::iter)
        .def_readonly("lam", &ViTraceRow::lambda)
        .def_readonly("c_lambda", &ViTraceRow::c_lambda)
        .def_readonly("rel_err", &ViTraceRow::rel_err)
        .def_readonly("step_norm", &ViTraceRow::step_norm);

    py::class_<ViTrace>(m, "ViTrace")
        .def_readonly("rows", &ViTrace::rows)
        .def_readonly("converged", &ViTrace::converged)
        .def_property_readonly("iterations", &ViTrace::iterations);

    py::class_<ViResult>(m, "ViResult")
        .def_readonly("v_post", &ViResult::v_post)
        .def_readonly("lam_post", &ViResult::lam_post)
        .def_readonly("trace", &ViResult::trace);

    m.def("run_vi",
          [](const PriorOperator& prior, const LambdaPrior& lam_prior, const ForwardOperator& f,
             const DataVector& data, const ViConfig& cfg, std::optional<FieldVector> truth) {
              return run_vi(prior, lam_prior, f, data, cfg, truth ? &*truth : nullptr);
          },
          py::arg("prior"), py::arg("lam_prior"), py::arg("forward"), py::arg("data"),
          py::arg("cfg"), py::arg("truth") = std::nullopt);

    py::class_<GibbsConfig>(m, "GibbsConfig")
        .def(py::init<>())
        .def_readwrite("beta", &GibbsConfig::beta)
        .def_readwrite("n_samples", &GibbsConfig::n_samples)
        .def_readwrite("burn_in", &GibbsConfig::burn_in)
        .def_readwrite("thin", &GibbsConfig::thin)
        .def_readwrite("rng_seed", &GibbsConfig::rng_seed)
        .def_readwrite("max_seconds", &GibbsConfig::max_seconds);

    py::class_<ChainSummary>(m, "ChainSummary")
        .def_readonly("mean_u", &ChainSummary::mean_u)
        .def_readonly("var_u", &ChainSummary::var_u)
        .def_readonly("cov_u", &ChainSummary::cov_u)
        .def_readonly("band_offsets", &ChainSummary::band_offsets)
        .def_readonly("cov_bands", &ChainSummary::cov_bands)
        .def_readonly("lambda_mean", &ChainSummary::lambda_mean)
        .def_readonly("lambda_var", &ChainSummary::lambda_var)
        .def_readonly("acceptance_rate_v", &ChainSummary::acceptance_rate_v)
        .def_readonly("ess_lambda", &ChainSummary::ess_lambda)
        .def_readonly("kept", &ChainSummary::kept)
        .def_readonly("budget_exceeded", &ChainSummary::budget_exceeded);

    m.def("run_chain",
          [](const PriorOperator& prior, const LambdaPrior& lam_prior, const ForwardOperator& f,
             const DataVector& data, const GibbsConfig& cfg) {
              return run_chain(prior, lam_prior, f, data, cfg);
          },
          py::arg("prior"), py::arg("lam_prior"), py::arg("forward"), py::arg("data"),
          py::arg("cfg"));

    py::class_<UPosteriorMoments>(m, "UPosteriorMoments")
        .def_property_readonly("mean", &UPosteriorMoments::mean)
        .def("cov", &UPosteriorMoments::cov, py::arg("i"), py::arg("j"))
        .def("variance", &UPosteriorMoments::variance)
        .def("dense_cov", &UPosteriorMoments::dense_cov);

    m.def("u_posterior_moments", &u_posterior_moments, py::arg("v_post"), py::arg("lam_post"));
    m.def("relative_error", &relative_error, py::arg("u_est"), py::arg("u_truth"));
    m.def("kl_gaussian_1d", &kl_gaussian_1d, py::arg("mean_p"), py::arg("var_p"),
          py::arg("mean_q"), py::arg("var_q"));
    m.def("credibility_band", &credibility_band, py::arg("mean"), py::arg("variance"),
          py::arg("level"));
    m.def("cp_ncp_density_check", &cp_ncp_density_check, py::arg("n_small"), py::arg("rng_seed"),
          py::arg("n_points") = 1000);

    m.attr("__version__") = "0.1.0";
}
