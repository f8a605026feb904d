use super::solver::{SdpProblem, SdpSolution};
use crate::error::{Error, Result};
use crate::signal::{observe, synthesize, AtomSet, SpikePattern};

/// Relative tolerance on `||synthesize(mu) + Z - Y|| / max(1, ||Y||)`.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

/// `||mu||_TV + lambda ||Z||_1`.
pub fn primal_objective(lambda: f64, mu_hat: &AtomSet, z_hat: &SpikePattern) -> f64 {
    mu_hat.tv_norm() + lambda * z_hat.l1_norm()
}

/// Primal cost minus the dual objective `Re <C, Y>`; nonnegative up to the
/// solver tolerance when the primal pair reproduces `Y`.
pub fn duality_gap(problem: &SdpProblem, solution: &SdpSolution, mu_hat: &AtomSet, z_hat: &SpikePattern) -> Result<f64> {
    duality_gap_with_tolerance(problem, solution, mu_hat, z_hat, DEFAULT_FEASIBILITY_TOL)
}

pub fn duality_gap_with_tolerance(
    problem: &SdpProblem,
    solution: &SdpSolution,
    mu_hat: &AtomSet,
    z_hat: &SpikePattern,
    feasibility_tol: f64,
) -> Result<f64> {
    let n = problem.n();
    if z_hat.n() != n {
        return Err(Error::DimensionMismatch(z_hat.n(), n));
    }
    let recon = observe(&synthesize(mu_hat, n)?, z_hat)?;
    let residual = recon
        .as_slice()
        .iter()
        .zip(problem.y.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / problem.y.norm().max(1.0);
    if residual > feasibility_tol {
        return Err(Error::InfeasiblePrimal(residual));
    }
    let dual: f64 = solution
        .c
        .as_slice()
        .iter()
        .zip(problem.y.as_slice())
        .map(|(c, y)| (c.conj() * y).re)
        .sum();
    Ok(primal_objective(problem.lambda, mu_hat, z_hat) - dual)
}
