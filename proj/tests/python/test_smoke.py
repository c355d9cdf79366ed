"""Smoke tests for the Python bindings: build a small problem end to end and
check the headline quantities stay sane and deterministic."""

import math

import numpy as np
import pytest

import ncpvi


@pytest.fixture(scope="module")
def problem():
    grid = ncpvi.build_grid(60, ncpvi.Boundary.Neumann)
    # Amplitude matching the shipped experiment defaults.
    prior = ncpvi.PriorOperator(grid, 0.05, 0.055)
    obs = [i / 20.0 for i in range(1, 21)]
    forward = ncpvi.ForwardOperator(grid, 0.05, obs)
    data = ncpvi.generate_data(ncpvi.elliptic1d_truth, 6001, forward, 0.05, 7)
    return grid, prior, forward, data


def test_grid_and_fields():
    grid = ncpvi.build_grid(50, ncpvi.Boundary.Neumann)
    assert grid.size == 50
    assert grid.spacing == pytest.approx(1.0 / 49.0)
    nodes = np.asarray(grid.nodes)
    assert nodes[0] == 0.0 and nodes[-1] == pytest.approx(1.0)

    with pytest.raises(ValueError):
        ncpvi.build_grid(2, ncpvi.Boundary.Dirichlet)


def test_prior_sampling_is_deterministic():
    grid = ncpvi.build_grid(40, ncpvi.Boundary.Neumann)
    prior = ncpvi.PriorOperator(grid, 0.05)
    a = np.asarray(prior.sample(123).values)
    b = np.asarray(prior.sample(123).values)
    c = np.asarray(prior.sample(124).values)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)

    f = ncpvi.FieldVector(grid, np.ones(40))
    roundtrip = np.asarray(prior.apply_c0_inv(prior.apply_c0(f)).values)
    assert np.allclose(roundtrip, 1.0, atol=1e-10)


def test_forward_solves_and_observes(problem):
    grid, prior, forward, data = problem
    u = ncpvi.truth_on_grid(grid)
    y = np.asarray(forward.apply_h(u))
    assert y.shape == (20,)
    assert np.all(np.isfinite(y))
    assert data.tau > 0.0


def test_run_vi_small(problem):
    grid, prior, forward, data = problem
    cfg = ncpvi.ViConfig()
    cfg.eig_seed = 11
    truth = ncpvi.truth_on_grid(grid)
    res = ncpvi.run_vi(prior, ncpvi.LambdaPrior(1.0, 1e4), forward, data, cfg, truth)
    assert res.trace.converged
    assert res.lam_post.lam_star > 0.0
    assert res.trace.rows[-1].rel_err < 0.2

    moments = ncpvi.u_posterior_moments(res.v_post, res.lam_post)
    var = np.asarray(moments.variance())
    assert var.shape == (grid.size,)
    assert np.all(var >= 0.0)

    lower, upper = ncpvi.credibility_band(moments.mean, var, 0.95)
    assert np.all(np.asarray(upper.values) >= np.asarray(lower.values))


def test_run_chain_small(problem):
    grid, prior, forward, data = problem
    cfg = ncpvi.GibbsConfig()
    cfg.n_samples = 4000
    cfg.burn_in = 1000
    cfg.beta = 0.2
    cfg.rng_seed = 5
    summary = ncpvi.run_chain(prior, ncpvi.LambdaPrior(1.0, 1e4), forward, data, cfg)
    assert 0.0 < summary.acceptance_rate_v < 1.0
    assert summary.lambda_var > 0.0
    assert summary.kept == 3000


def test_scalar_diagnostics():
    assert ncpvi.kl_gaussian_1d(1.0, 2.0, 1.0, 2.0) == 0.0
    assert ncpvi.kl_gaussian_1d(313.387, 11.861, 312.006, 12.972) == pytest.approx(
        0.07546, abs=1e-4
    )
    assert ncpvi.cp_ncp_density_check(3, 7) < 1e-10
    assert math.isclose(ncpvi.elliptic1d_truth(0.0), 20.0)
