//! The skew matrix of the homogeneous self-dual embedding and the projection
//! onto its graph.
//!
//! With `u = (x, y, τ)` the embedding matrix is
//!
//! ```text
//!       [  0   Aᵀ   c ]
//!   Q = [ −A   0    b ]
//!       [ −cᵀ  −bᵀ  0 ]
//! ```
//!
//! `Q` is never formed. The subspace step needs `(I + Q)⁻¹ w`, which reduces
//! to one solve with `M = [[I, Aᵀ], [−A, I]]` per call once `M⁻¹h`, `h = (c, b)`,
//! is cached: the lower-right `1` is eliminated by a Schur complement and the
//! resulting rank-one update of `M` is inverted with the Sherman–Morrison
//! formula.

use crate::linalg::{
    build_kkt, cg_solve, dot, ldl_factor, norm2, LdlFactorization, LinalgError, Ordering, SparseMatrix,
};
use crate::problem::ProblemData;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cached solve M⁻¹h is inaccurate: residual {residual:e}")]
    InaccurateCache { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// How the reduced system `M·z = w` is solved each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinsysConfig {
    /// Cached sparse `LDLᵀ` factorization.
    Direct { ordering: Ordering },
    /// Warm-started conjugate gradient on `I + AᵀA`.
    Indirect {
        /// Hard cap on CG steps per solve.
        max_iter: usize,
        /// Fixed absolute residual target; when `None` the summable schedule
        /// `1e-3·(1 + ‖rhs‖)/k^1.5` is used for the `k`-th solve.
        tol: Option<f64>,
    },
}

/// Relative residual target for the one-off solve that computes `M⁻¹h`.
const CACHE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
enum Backend {
    Direct { factor: LdlFactorization, rhs: Vec<f64>, work: Vec<f64> },
    Indirect { at: SparseMatrix, warm: Vec<f64>, max_iter: usize, tol: Option<f64>, calls: usize },
}

/// Linear-system state reused by every subspace projection of one problem.
#[derive(Debug, Clone)]
pub struct EmbeddingCache {
    backend: Backend,
    n: usize,
    m: usize,
    /// `M⁻¹h`.
    g: Vec<f64>,
    /// `1 + hᵀM⁻¹h`.
    denom: f64,
    last_cg_iters: usize,
    total_cg_iters: usize,
}

/// `Q·u`, computed blockwise from `A`, `b`, `c`.
pub fn apply_q(data: &ProblemData, u: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
    let (n, m) = (data.n(), data.m());
    if u.len() != n + m + 1 {
        return Err(EmbeddingError::DimensionMismatch { expected: n + m + 1, got: u.len() });
    }
    let mut out = vec![0.0; n + m + 1];
    apply_q_into(data, u, &mut out);
    Ok(out)
}

pub(crate) fn apply_q_into(data: &ProblemData, u: &[f64], out: &mut [f64]) {
    let (n, m) = (data.n(), data.m());
    let (ux, rest) = u.split_at(n);
    let (uy, ut) = rest.split_at(m);
    let tau = ut[0];
    let (ox, rest) = out.split_at_mut(n);
    let (oy, ot) = rest.split_at_mut(m);
    for (o, c) in ox.iter_mut().zip(&data.c) {
        *o = c * tau;
    }
    data.a.mul_t_add(uy, ox);
    for (o, b) in oy.iter_mut().zip(&data.b) {
        *o = b * tau;
    }
    let mut ax = vec![0.0; m];
    data.a.mul_add(ux, &mut ax);
    for (o, v) in oy.iter_mut().zip(&ax) {
        *o -= v;
    }
    ot[0] = -dot(&data.c, ux) - dot(&data.b, uy);
}

impl EmbeddingCache {
    /// Prepares the linear-system backend and caches `M⁻¹h`.
    pub fn new(data: &ProblemData, config: LinsysConfig) -> Result<Self, EmbeddingError> {
        let (n, m) = (data.n(), data.m());
        let backend = match config {
            LinsysConfig::Direct { ordering } => {
                let kkt = build_kkt(&data.a);
                let factor = ldl_factor(&kkt, ordering)?;
                Backend::Direct { factor, rhs: vec![0.0; n + m], work: vec![0.0; n + m] }
            }
            LinsysConfig::Indirect { max_iter, tol } => {
                Backend::Indirect { at: data.a.transpose(), warm: vec![0.0; n], max_iter, tol, calls: 0 }
            }
        };
        let mut cache =
            EmbeddingCache { backend, n, m, g: vec![0.0; n + m], denom: 1.0, last_cg_iters: 0, total_cg_iters: 0 };
        cache.refresh(data)?;
        Ok(cache)
    }

    /// Recomputes `M⁻¹h` after `b` or `c` changed. `A` must be unchanged.
    pub fn refresh(&mut self, data: &ProblemData) -> Result<(), EmbeddingError> {
        let h: Vec<f64> = data.c.iter().chain(&data.b).copied().collect();
        let g = self.solve_reduced(data, &h, true)?;
        if matches!(self.backend, Backend::Direct { .. }) {
            let mut mg = vec![0.0; self.n + self.m];
            apply_m(data, &g, &mut mg);
            let residual = mg.iter().zip(&h).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if residual > 1e-8 * (1.0 + norm2(&h)) {
                return Err(EmbeddingError::InaccurateCache { residual });
            }
        }
        self.denom = 1.0 + dot(&h, &g);
        self.g = g;
        if let Backend::Indirect { warm, calls, .. } = &mut self.backend {
            warm.fill(0.0);
            *calls = 0;
        }
        Ok(())
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn denom(&self) -> f64 {
        self.denom
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.backend, Backend::Direct { .. })
    }

    pub fn factorization(&self) -> Option<&LdlFactorization> {
        match &self.backend {
            Backend::Direct { factor, .. } => Some(factor),
            Backend::Indirect { .. } => None,
        }
    }

    /// CG steps taken by the most recent solve (0 for the direct backend).
    pub fn last_cg_iterations(&self) -> usize {
        self.last_cg_iters
    }

    pub fn total_cg_iterations(&self) -> usize {
        self.total_cg_iters
    }

    /// Solves `M·z = w` for `w` of length `n + m`.
    pub fn solve_kkt(&mut self, data: &ProblemData, w: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
        if w.len() != self.n + self.m {
            return Err(EmbeddingError::DimensionMismatch { expected: self.n + self.m, got: w.len() });
        }
        self.solve_reduced(data, w, false)
    }

    fn solve_reduced(&mut self, data: &ProblemData, w: &[f64], tight: bool) -> Result<Vec<f64>, EmbeddingError> {
        let n = self.n;
        match &mut self.backend {
            Backend::Direct { factor, rhs, work } => {
                // [[I, Aᵀ], [A, −I]]·(z_x, z_y) = (w_x, −w_y) is the same system.
                rhs[..n].copy_from_slice(&w[..n]);
                for (r, v) in rhs[n..].iter_mut().zip(&w[n..]) {
                    *r = -v;
                }
                factor.solve_in_place(rhs, work);
                self.last_cg_iters = 0;
                Ok(rhs.clone())
            }
            Backend::Indirect { at, warm, max_iter, tol, calls } => {
                let a = &data.a;
                let (wx, wy) = w.split_at(n);
                // z_x = (I + AᵀA)⁻¹(w_x − Aᵀw_y), z_y = w_y + A·z_x
                let mut rhs = wx.to_vec();
                let mut atw = vec![0.0; n];
                at.mul_add(wy, &mut atw);
                for (r, v) in rhs.iter_mut().zip(&atw) {
                    *r -= v;
                }
                let mut tmp = vec![0.0; a.nrows()];
                let apply = |x: &[f64], out: &mut [f64]| {
                    tmp.fill(0.0);
                    a.mul_add(x, &mut tmp);
                    out.copy_from_slice(x);
                    at.mul_add(&tmp, out);
                };
                let rhs_norm = norm2(&rhs);
                let result = if tight {
                    let cap = (10 * n).max(1000);
                    cg_solve(apply, &rhs, &vec![0.0; n], CACHE_TOL * (1.0 + rhs_norm), cap)?
                } else {
                    *calls += 1;
                    let target = match *tol {
                        Some(t) => t,
                        None => 1e-3 * (1.0 + rhs_norm) / (*calls as f64).powf(1.5),
                    };
                    let r = cg_solve(apply, &rhs, warm, target, *max_iter)?;
                    warm.copy_from_slice(&r.x);
                    r
                };
                self.last_cg_iters = result.iterations;
                self.total_cg_iters += result.iterations;
                let zx = result.x;
                let mut z = Vec::with_capacity(n + wy.len());
                z.extend_from_slice(&zx);
                z.extend_from_slice(wy);
                a.mul_add(&zx, &mut z[n..]);
                Ok(z)
            }
        }
    }

    /// `(I + Q)⁻¹·w` for `w` of length `n + m + 1`.
    pub fn project_affine(&mut self, data: &ProblemData, w: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
        let dim = self.n + self.m + 1;
        if w.len() != dim {
            return Err(EmbeddingError::DimensionMismatch { expected: dim, got: w.len() });
        }
        let (n, m) = (self.n, self.m);
        let w_tau = w[n + m];
        let mut r = w[..n + m].to_vec();
        for (ri, ci) in r[..n].iter_mut().zip(&data.c) {
            *ri -= w_tau * ci;
        }
        for (ri, bi) in r[n..].iter_mut().zip(&data.b) {
            *ri -= w_tau * bi;
        }
        let p = self.solve_reduced(data, &r, false)?;
        let hp = dot(&data.c, &p[..n]) + dot(&data.b, &p[n..]);
        let f = hp / self.denom;
        let mut out = Vec::with_capacity(dim);
        out.extend(p.iter().zip(&self.g).map(|(pi, gi)| pi - f * gi));
        let tau = w_tau + dot(&data.c, &out[..n]) + dot(&data.b, &out[n..n + m]);
        out.push(tau);
        Ok(out)
    }
}

/// `M·z = (z_x + Aᵀz_y, −A·z_x + z_y)`.
pub(crate) fn apply_m(data: &ProblemData, z: &[f64], out: &mut [f64]) {
    let n = data.n();
    let (zx, zy) = z.split_at(n);
    let (ox, oy) = out.split_at_mut(n);
    ox.copy_from_slice(zx);
    data.a.mul_t_add(zy, ox);
    oy.copy_from_slice(zy);
    let mut az = vec![0.0; data.m()];
    data.a.mul_add(zx, &mut az);
    for (o, v) in oy.iter_mut().zip(&az) {
        *o -= v;
    }
}
