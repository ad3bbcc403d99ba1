//! Static descriptions of what each experiment computes and checks.

use crate::config::Experiment;

pub fn describe(experiment: Experiment) -> &'static str {
    match experiment {
        Experiment::CompletePositivity => {
            "complete-positivity\n\
             Solves the scalar equations s + mu (a*s) = 1 and r + mu (a*r) = a by\n\
             product integration for every coupling mu in the config, on the working\n\
             grid and on one refinement of it. Nonnegativity of both solutions for\n\
             all mu >= 0 is the defining property of a completely positive kernel;\n\
             it makes every mode of the operator family a contraction. The check\n\
             certifies min s and min r against a small negativity tolerance on both\n\
             grids. A pass is evidence on those grids, not a proof over all mu and t."
        }
        Experiment::ResolventBuild => {
            "resolvent-build\n\
             Builds the scalar family s_k + lambda_k (a*s_k) = 1, one row per\n\
             eigenvalue of the operator, using product integration with exact panel\n\
             moments of the kernel. Stiff rows (lambda_k times the kernel mass of one\n\
             step exceeding the stiffness target) are solved on an internally refined\n\
             grid and restricted to the working grid. Each row is certified by the\n\
             residual of its own defining equation on the grid it was solved on, and\n\
             the family is exported as a CSV matrix (one row per mode)."
        }
        Experiment::YosidaConvergence => {
            "yosida-convergence\n\
             Replaces the generator A by its bounded regularization A_n with\n\
             eigenvalues n*lambda/(n+lambda) and rebuilds the family for each n in\n\
             run.yosida_n. Reports sup over grid times and modes of the difference\n\
             from the unregularized family, which should decrease to zero as n grows,\n\
             and the empirical growth bound (sup norm of each regularized family,\n\
             expected <= 1 for these diagonal dissipative operators)."
        }
        Experiment::ConvolutionCompare => {
            "convolution-compare\n\
             Computes the stochastic convolution W^S two independent ways on each\n\
             refinement level with coupled noise: (1) the direct left-point sum of\n\
             resolvent rows against Wiener increments, and (2) the reformulated route\n\
             that integrates Y' = c A Y + (Wm + c W) by exponential Euler and sets\n\
             W^S = A Y + W, where c = a(0) and Wm is the kernel-memory term. The\n\
             methods discretize differently, so their sup-norm gap measures joint\n\
             discretization error and must shrink under refinement. Requires finite\n\
             nonzero a(0); kernels with a(0) undefined are rejected."
        }
        Experiment::Identities => {
            "identities\n\
             Checks the defining identity of the convolution, W^S + A (a * W^S) = W,\n\
             discretized by product quadrature, across refinement levels: per mode\n\
             (the weak form, valid for unbounded generators), in the full norm when\n\
             the operator is bounded (e.g. Yosida-regularized), and, when a(0) is\n\
             finite, the centered-difference derivative check of the reformulated\n\
             Cauchy trajectory. All residuals should decrease under refinement."
        }
        Experiment::Regularity => {
            "regularity\n\
             Diagnostics for path and spatial regularity of W^S and of the Cauchy\n\
             trajectory Y: (1) max increment across coupled refinement levels, with\n\
             an empirical modulus exponent that is reported, never asserted; (2) the\n\
             fractional-power norm |(-A)^gamma W^S| at every node, with partial sums\n\
             of q_k lambda_k^(2 gamma) to flag divergence trends; (3) interpolation\n\
             norms of Y: Slobodeckij seminorm, the |x| + |(-A)^gamma x| proxy for the\n\
             interpolation-space norm, and the ratio M-hat of that norm to the\n\
             forcing, which should stabilize under refinement; (4) maximal-regularity\n\
             norms |Y|_W12 + |A Y|_L2, also stable under refinement; (5) per-mode\n\
             skewness z-scores of an ensemble of W^S endpoints (Gaussian check)."
        }
        Experiment::All => {
            "all\n\
             Runs every experiment in sequence with the same config and aggregates\n\
             all checks into one report and summary."
        }
    }
}
