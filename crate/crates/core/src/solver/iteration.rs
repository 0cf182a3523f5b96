//! Initialization, the splitting step and the stopping test.

use super::{Settings, SolveError, Status, SolverState};
use crate::cones::moreau_split_dual;
use crate::embedding::EmbeddingCache;
use crate::problem::ProblemData;
use crate::scaling::Residuals;

/// Cold start `u = (0, 0, 1)`, `v = (0, 0, 1)`, or a warm start from `(x, y, s)`
/// given in the units of `data`: `u = (x, y, 1)`, `v = (0, s, 0)`.
pub fn initialize_state(
    n: usize,
    m: usize,
    warm: Option<(&[f64], &[f64], &[f64])>,
) -> Result<SolverState, SolveError> {
    let dim = n + m + 1;
    let mut u = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    u[n + m] = 1.0;
    match warm {
        None => v[n + m] = 1.0,
        Some((x, y, s)) => {
            for (name, got, expected) in [("x", x.len(), n), ("y", y.len(), m), ("s", s.len(), m)] {
                if got != expected {
                    return Err(SolveError::WarmStartDimension { vector: name, expected, got });
                }
            }
            u[..n].copy_from_slice(x);
            u[n..n + m].copy_from_slice(y);
            v[n..n + m].copy_from_slice(s);
        }
    }
    Ok(SolverState { u, v, iter: 0 })
}

/// One relaxed splitting step:
///
/// ```text
/// ũ = (I + Q)⁻¹(u + v)
/// ū = α·ũ + (1 − α)·u
/// u⁺ = Π_C(ū − v)
/// v⁺ = v − ū + u⁺
/// ```
///
/// `u⁺` and `v⁺` are read off one Moreau split of `ū − v`, so `v⁺ = Π_{C*}(v − ū)`
/// is orthogonal to `u⁺` blockwise and its first `n` entries are exactly zero.
pub fn iterate_once(
    state: &mut SolverState,
    cache: &mut EmbeddingCache,
    data: &ProblemData,
    alpha: f64,
) -> Result<(), SolveError> {
    let (n, m) = (data.n(), data.m());
    let w: Vec<f64> = state.u.iter().zip(&state.v).map(|(a, b)| a + b).collect();
    let u_tilde = cache.project_affine(data, &w)?;
    let t: Vec<f64> = u_tilde
        .iter()
        .zip(&state.u)
        .zip(&state.v)
        .map(|((ut, u), v)| alpha * ut + (1.0 - alpha) * u - v)
        .collect();

    state.u[..n].copy_from_slice(&t[..n]);
    state.v[..n].fill(0.0);
    let (uy, vy) = (&mut state.u[n..n + m], &mut state.v[n..n + m]);
    moreau_split_dual(&t[n..n + m], uy, vy, &data.cone)?;
    state.u[n + m] = t[n + m].max(0.0);
    state.v[n + m] = (-t[n + m]).max(0.0);
    state.iter += 1;
    Ok(())
}

/// Applies the stopping rules to residuals from
/// [`residuals_original`](crate::scaling::residuals_original).
///
/// Solved wins over the certificates. When both certificates pass in the same
/// check the problem is reported as primal and dual infeasible.
pub fn check_termination(res: &Residuals, settings: &Settings) -> Option<Status> {
    if let Some(o) = &res.optimality {
        if o.pri_norm <= settings.eps_pri * o.pri_scale
            && o.dual_norm <= settings.eps_dual * o.dual_scale
            && o.gap.abs() <= settings.eps_gap * o.gap_scale
        {
            return Some(Status::Solved);
        }
    }
    let infeas = res.infeas_measure <= settings.eps_infeas;
    let unbdd = res.unbdd_measure <= settings.eps_unbdd;
    match (infeas, unbdd) {
        (true, true) => Some(Status::InfeasibleAndUnbounded),
        (true, false) => Some(Status::Infeasible),
        (false, true) => Some(Status::Unbounded),
        (false, false) => None,
    }
}
