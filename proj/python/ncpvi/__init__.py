"""Non-centered mean-field variational inference for hierarchical Bayesian
linear inverse problems, with a pCN-within-Gibbs reference sampler.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ncpvi._core import (  # noqa: F401
    Boundary,
    ChainSummary,
    DataVector,
    EigenPairs,
    FieldVector,
    ForwardOperator,
    GibbsConfig,
    Grid1D,
    LambdaPosterior,
    LambdaPrior,
    LowRankPosteriorCov,
    PriorOperator,
    UPosteriorMoments,
    ViConfig,
    ViResult,
    ViTrace,
    ViTraceRow,
    VPosterior,
    __version__,
    build_grid,
    cp_ncp_density_check,
    credibility_band,
    double_pass_eig,
    elliptic1d_truth,
    generate_data,
    inner_m,
    kl_gaussian_1d,
    make_gtilde_matvec,
    norm_m,
    potential,
    relative_error,
    run_chain,
    run_vi,
    trace_lowrank,
    truth_on_grid,
    u_posterior_moments,
)
