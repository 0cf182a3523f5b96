//! The solve driver: settings, iterate state, status classification and
//! extraction of solutions or certificates.

mod iteration;

pub use iteration::{check_termination, initialize_state, iterate_once};

use crate::cones::ConeError;
use crate::embedding::{EmbeddingCache, EmbeddingError, LinsysConfig};
use crate::linalg::{dot, norm2, Ordering};
use crate::problem::{ProblemData, ProblemError};
use crate::scaling::{equilibrate, rescale_vectors, residuals_original, unscale_solution, Residuals, ScalingData};
use std::time::{Duration, Instant};
use thiserror::Error;

/// `u_τ` must exceed this multiple of `‖u‖` for a truncated run to report a point.
const TAU_POSITIVE_REL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("warm start {vector} has length {got}, expected {expected}")]
    WarmStartDimension { vector: &'static str, expected: usize, got: usize },
    #[error("new {vector} has length {got}, expected {expected}")]
    UpdateDimension { vector: &'static str, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinsysMode {
    #[default]
    Direct,
    Indirect,
}

/// A primal-dual guess in the units of the original problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Relaxation parameter, in `(0, 2)`.
    pub alpha: f64,
    pub max_iters: usize,
    pub eps_pri: f64,
    pub eps_dual: f64,
    pub eps_gap: f64,
    pub eps_infeas: f64,
    pub eps_unbdd: f64,
    /// Termination is tested every this many iterations.
    pub check_interval: usize,
    pub linsys_mode: LinsysMode,
    /// Cap on CG steps per iteration (indirect mode).
    pub cg_max: usize,
    /// Fixed CG residual target; `None` selects the decreasing schedule.
    pub cg_tol: Option<f64>,
    pub normalize: bool,
    /// Equilibration sweeps when `normalize` is set.
    pub sweeps: usize,
    pub warm_start: Option<WarmStart>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            alpha: 1.5,
            max_iters: 2500,
            eps_pri: 1e-3,
            eps_dual: 1e-3,
            eps_gap: 1e-3,
            eps_infeas: 1e-3,
            eps_unbdd: 1e-3,
            check_interval: 1,
            linsys_mode: LinsysMode::Direct,
            cg_max: 2,
            cg_tol: None,
            normalize: true,
            sweeps: 10,
            warm_start: None,
        }
    }
}

impl Settings {
    /// Sets all five tolerances.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps_pri = eps;
        self.eps_dual = eps;
        self.eps_gap = eps;
        self.eps_infeas = eps;
        self.eps_unbdd = eps;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(SolveError::InvalidSettings(format!("alpha = {} is outside (0, 2)", self.alpha)));
        }
        let eps = [
            ("eps_pri", self.eps_pri),
            ("eps_dual", self.eps_dual),
            ("eps_gap", self.eps_gap),
            ("eps_infeas", self.eps_infeas),
            ("eps_unbdd", self.eps_unbdd),
        ];
        for (name, v) in eps {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolveError::InvalidSettings(format!("{name} = {v} must be positive")));
            }
        }
        if self.check_interval == 0 {
            return Err(SolveError::InvalidSettings("check_interval must be at least 1".into()));
        }
        if self.linsys_mode == LinsysMode::Indirect && self.cg_max == 0 {
            return Err(SolveError::InvalidSettings("cg_max must be at least 1".into()));
        }
        if let Some(t) = self.cg_tol {
            if !(t > 0.0) {
                return Err(SolveError::InvalidSettings(format!("cg_tol = {t} must be positive")));
            }
        }
        Ok(())
    }

    fn linsys_config(&self) -> LinsysConfig {
        match self.linsys_mode {
            LinsysMode::Direct => LinsysConfig::Direct { ordering: Ordering::Amd },
            LinsysMode::Indirect => LinsysConfig::Indirect { max_iter: self.cg_max, tol: self.cg_tol },
        }
    }
}

/// Embedding iterates `u = (x, y, τ)`, `v = (r, s, κ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solved,
    Infeasible,
    Unbounded,
    InfeasibleAndUnbounded,
    Indeterminate,
    MaxItersReached,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Solved => "solved",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::InfeasibleAndUnbounded => "infeasible_and_unbounded",
            Status::Indeterminate => "indeterminate",
            Status::MaxItersReached => "max_iters_reached",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [
            Status::Solved,
            Status::Infeasible,
            Status::Unbounded,
            Status::InfeasibleAndUnbounded,
            Status::Indeterminate,
            Status::MaxItersReached,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveInfo {
    pub iterations: usize,
    /// Relative residuals at the last check, when `u_τ > 0`.
    pub pri_res: Option<f64>,
    pub dual_res: Option<f64>,
    pub gap: Option<f64>,
    /// `cᵀx` and `−bᵀy` of the reported point.
    pub pobj: Option<f64>,
    pub dobj: Option<f64>,
    /// Stopping quantities at the last check.
    pub residuals: Option<Residuals>,
    pub setup_time: Duration,
    pub solve_time: Duration,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
    /// `ŷ ∈ K*` with `Aᵀŷ ≈ 0`, `bᵀŷ = −1`.
    pub infeasibility_cert: Option<Vec<f64>>,
    /// `x̂` with `−Ax̂ ∈ K` approximately, `cᵀx̂ = −1`.
    pub unboundedness_cert: Option<Vec<f64>>,
    pub info: SolveInfo,
}

impl Solution {
    /// Average of the primal and dual objectives, when a point was reported.
    pub fn objective(&self) -> Option<f64> {
        Some(0.5 * (self.info.pobj? + self.info.dobj?))
    }
}

/// A solver bound to one matrix `A`. The factorization (or the CG setup) and
/// the equilibration of `A` survive across solves, so re-solving after
/// [`Solver::update_vectors`] only costs one extra linear solve.
#[derive(Debug, Clone)]
pub struct Solver {
    original: ProblemData,
    scaled: ProblemData,
    scaling: ScalingData,
    cache: EmbeddingCache,
    settings: Settings,
    setup_time: Duration,
}

impl Solver {
    pub fn new(data: &ProblemData, settings: &Settings) -> Result<Self, SolveError> {
        let start = Instant::now();
        data.validate()?;
        settings.validate()?;
        let (scaled, scaling) = if settings.normalize {
            equilibrate(data, settings.sweeps)
        } else {
            (data.clone(), ScalingData::identity(data.m(), data.n()))
        };
        let cache = EmbeddingCache::new(&scaled, settings.linsys_config())?;
        Ok(Solver {
            original: data.clone(),
            scaled,
            scaling,
            cache,
            settings: settings.clone(),
            setup_time: start.elapsed(),
        })
    }

    /// Time spent in the last setup: [`Solver::new`] or [`Solver::update_vectors`].
    pub fn setup_time(&self) -> Duration {
        self.setup_time
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    /// Replaces settings that do not affect the cached factorization.
    pub fn set_iteration_settings(&mut self, settings: &Settings) -> Result<(), SolveError> {
        settings.validate()?;
        if settings.normalize != self.settings.normalize
            || settings.sweeps != self.settings.sweeps
            || settings.linsys_mode != self.settings.linsys_mode
            || settings.cg_max != self.settings.cg_max
            || settings.cg_tol != self.settings.cg_tol
        {
            return Err(SolveError::InvalidSettings(
                "scaling and linear-system settings are fixed for the lifetime of a Solver".into(),
            ));
        }
        self.settings = settings.clone();
        Ok(())
    }

    pub fn problem(&self) -> &ProblemData {
        &self.original
    }

    /// The equilibrated problem the iteration runs on.
    pub fn scaled_problem(&self) -> &ProblemData {
        &self.scaled
    }

    pub fn scaling(&self) -> &ScalingData {
        &self.scaling
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }

    /// Swaps in new `b` and `c`, keeping `A`, its scaling and its factorization.
    pub fn update_vectors(&mut self, b: &[f64], c: &[f64]) -> Result<(), SolveError> {
        let start = Instant::now();
        let (m, n) = (self.original.m(), self.original.n());
        if b.len() != m {
            return Err(SolveError::UpdateDimension { vector: "b", expected: m, got: b.len() });
        }
        if c.len() != n {
            return Err(SolveError::UpdateDimension { vector: "c", expected: n, got: c.len() });
        }
        let mut original = self.original.clone();
        original.b = b.to_vec();
        original.c = c.to_vec();
        original.validate()?;
        let mut scaled = self.scaled.clone();
        let mut scaling = self.scaling.clone();
        if self.settings.normalize {
            rescale_vectors(&mut scaled, &mut scaling, b, c);
        } else {
            scaled.b = b.to_vec();
            scaled.c = c.to_vec();
        }
        self.cache.refresh(&scaled)?;
        self.original = original;
        self.scaled = scaled;
        self.scaling = scaling;
        self.setup_time = start.elapsed();
        Ok(())
    }

    /// Initial iterate in scaled units. A warm start is given in original units.
    pub fn initial_state(&self, warm: Option<&WarmStart>) -> Result<SolverState, SolveError> {
        let (n, m) = (self.original.n(), self.original.m());
        match warm {
            None => initialize_state(n, m, None),
            Some(w) => {
                for (name, got, expected) in [("x", w.x.len(), n), ("y", w.y.len(), m), ("s", w.s.len(), m)] {
                    if got != expected {
                        return Err(SolveError::WarmStartDimension { vector: name, expected, got });
                    }
                }
                let (x, s, y) = self.scaling.scale_point(&w.x, &w.s, &w.y);
                initialize_state(n, m, Some((&x, &y, &s)))
            }
        }
    }

    pub fn step(&mut self, state: &mut SolverState) -> Result<(), SolveError> {
        iterate_once(state, &mut self.cache, &self.scaled, self.settings.alpha)
    }

    pub fn residuals(&self, state: &SolverState) -> Residuals {
        residuals_original(&state.u, &state.v, &self.scaling, &self.scaled)
    }

    pub fn check_termination(&self, residuals: &Residuals) -> Option<Status> {
        check_termination(residuals, &self.settings)
    }

    /// Runs from the warm start in the settings, if any.
    pub fn solve(&mut self) -> Result<Solution, SolveError> {
        let warm = self.settings.warm_start.clone();
        self.solve_from(warm.as_ref(), |_| {})
    }

    /// Runs from `warm` (cold when `None`), calling `observe` after every
    /// iteration.
    pub fn solve_from<F: FnMut(&SolverState)>(
        &mut self,
        warm: Option<&WarmStart>,
        mut observe: F,
    ) -> Result<Solution, SolveError> {
        let start = Instant::now();
        let cg_before = self.cache.total_cg_iterations();
        let mut state = self.initial_state(warm)?;
        let mut last: Option<Residuals> = None;
        let mut status = None;
        while state.iter < self.settings.max_iters {
            self.step(&mut state)?;
            observe(&state);
            if state.iter % self.settings.check_interval == 0 || state.iter == self.settings.max_iters {
                let res = self.residuals(&state);
                status = self.check_termination(&res);
                last = Some(res);
                if status.is_some() {
                    break;
                }
            }
        }
        let res = last.unwrap_or_else(|| self.residuals(&state));
        let status = status.unwrap_or_else(|| {
            let u_norm = norm2(&state.u);
            let tau = state.u[self.original.n() + self.original.m()];
            if tau > TAU_POSITIVE_REL * u_norm {
                Status::MaxItersReached
            } else {
                Status::Indeterminate
            }
        });
        let mut sol = self.extract(&state, status, &res);
        sol.info.setup_time = self.setup_time;
        sol.info.solve_time = start.elapsed();
        sol.info.cg_iterations = self.cache.total_cg_iterations() - cg_before;
        Ok(sol)
    }

    /// Reads the reported point or certificates off `state`, in original units.
    pub fn extract(&self, state: &SolverState, status: Status, res: &Residuals) -> Solution {
        let (n, m) = (self.original.n(), self.original.m());
        let (ux, uy, tau) = (&state.u[..n], &state.u[n..n + m], state.u[n + m]);
        let vs = &state.v[n..n + m];
        let mut info = SolveInfo { iterations: state.iter, residuals: Some(*res), ..Default::default() };
        let mut sol = Solution {
            status,
            x: None,
            y: None,
            s: None,
            infeasibility_cert: None,
            unboundedness_cert: None,
            info: SolveInfo::default(),
        };
        match status {
            Status::Solved | Status::MaxItersReached => {
                let scale = |v: &[f64]| v.iter().map(|a| a / tau).collect::<Vec<f64>>();
                let (x, s, y) = unscale_solution(&scale(ux), &scale(vs), &scale(uy), &self.scaling);
                if let Some(o) = &res.optimality {
                    info.pri_res = Some(o.pri_rel());
                    info.dual_res = Some(o.dual_rel());
                    info.gap = Some(o.gap_rel());
                }
                info.pobj = Some(dot(&self.original.c, &x));
                info.dobj = Some(-dot(&self.original.b, &y));
                sol.x = Some(x);
                sol.y = Some(y);
                sol.s = Some(s);
            }
            Status::Infeasible | Status::Unbounded | Status::InfeasibleAndUnbounded | Status::Indeterminate => {}
        }
        if matches!(status, Status::Infeasible | Status::InfeasibleAndUnbounded) {
            let (_, _, y) = unscale_solution(&[], &[], uy, &self.scaling);
            let by = dot(&self.original.b, &y);
            sol.infeasibility_cert = Some(y.iter().map(|v| v / -by).collect());
        }
        if matches!(status, Status::Unbounded | Status::InfeasibleAndUnbounded) {
            let (x, _, _) = unscale_solution(ux, &[], &[], &self.scaling);
            let cx = dot(&self.original.c, &x);
            sol.unboundedness_cert = Some(x.iter().map(|v| v / -cx).collect());
        }
        sol.info = info;
        sol
    }
}

/// One-shot solve: equilibrate, set up the linear system, iterate.
pub fn solve(data: &ProblemData, settings: &Settings) -> Result<Solution, SolveError> {
    Solver::new(data, settings)?.solve()
}
