//! Data equilibration and residuals measured in original-problem units.
//!
//! The solver works on `Â = D·A·E`, `b̂ = σ·D·b`, `ĉ = ρ·E·c`. `D` is constant
//! on every second-order and semidefinite block so that `D·K = K`.
//!
//! The sweep rule is a Ruiz-style heuristic: each sweep divides every column by
//! the square root of its norm, then every cone block's rows by the square root
//! of the block's mean row norm. `σ` and `ρ` then bring `b̂` and `ĉ` to the
//! typical size of the scaled columns and rows. None of this is claimed to be
//! optimal; it only needs to be invertible and cone-preserving.

use crate::cones::{BlockKind, ConeSpec};
use crate::linalg::{dot, norm2, SparseMatrix};
use crate::problem::ProblemData;

/// Norms below this are treated as zero and left unscaled.
const NEGLIGIBLE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingData {
    /// Row scaling, length `m`.
    pub d: Vec<f64>,
    /// Column scaling, length `n`.
    pub e: Vec<f64>,
    pub sigma: f64,
    pub rho: f64,
}

impl ScalingData {
    pub fn identity(m: usize, n: usize) -> Self {
        ScalingData { d: vec![1.0; m], e: vec![1.0; n], sigma: 1.0, rho: 1.0 }
    }

    /// Maps an original-space point `(x, s, y)` into scaled space.
    pub fn scale_point(&self, x: &[f64], s: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let xs = x.iter().zip(&self.e).map(|(v, e)| self.sigma * v / e).collect();
        let ss = s.iter().zip(&self.d).map(|(v, d)| self.sigma * v * d).collect();
        let ys = y.iter().zip(&self.d).map(|(v, d)| self.rho * v / d).collect();
        (xs, ss, ys)
    }

    /// Original `‖b‖` from scaled data.
    pub fn original_b_norm(&self, scaled: &ProblemData) -> f64 {
        let v: Vec<f64> = scaled.b.iter().zip(&self.d).map(|(b, d)| b / d).collect();
        norm2(&v) / self.sigma
    }

    /// Original `‖c‖` from scaled data.
    pub fn original_c_norm(&self, scaled: &ProblemData) -> f64 {
        let v: Vec<f64> = scaled.c.iter().zip(&self.e).map(|(c, e)| c / e).collect();
        norm2(&v) / self.rho
    }
}

fn inv_sqrt_or_one(norm: f64) -> f64 {
    if norm > NEGLIGIBLE_NORM {
        1.0 / norm.sqrt()
    } else {
        1.0
    }
}

/// Row norms aggregated per cone block: one entry per zero or nonnegative row,
/// one entry (the mean row norm) per second-order or semidefinite block.
pub fn block_row_norms(a: &SparseMatrix, cone: &ConeSpec) -> Vec<f64> {
    let norms = a.row_norms();
    let mut out = Vec::new();
    for block in cone.blocks() {
        let r = block.range();
        match block.kind {
            BlockKind::Zero | BlockKind::Nonneg => out.extend_from_slice(&norms[r]),
            BlockKind::Soc | BlockKind::Psd(_) => {
                if block.len > 0 {
                    out.push(norms[r].iter().sum::<f64>() / block.len as f64);
                }
            }
        }
    }
    out
}

/// Mean of the non-negligible entries, or 1 when there are none.
fn mean_nonzero(v: &[f64]) -> f64 {
    let nz: Vec<f64> = v.iter().copied().filter(|&x| x > NEGLIGIBLE_NORM).collect();
    if nz.is_empty() {
        1.0
    } else {
        nz.iter().sum::<f64>() / nz.len() as f64
    }
}

/// `σ` with `‖σDb‖ = ` mean column norm of `Â`, `ρ` with `‖ρEc‖ = ` mean
/// block row norm of `Â`; 1 when the vector vanishes.
fn vector_scales(a: &SparseMatrix, cone: &ConeSpec, db: &[f64], ec: &[f64]) -> (f64, f64) {
    let (dbn, ecn) = (norm2(db), norm2(ec));
    let sigma = if dbn > NEGLIGIBLE_NORM { mean_nonzero(&a.col_norms()) / dbn } else { 1.0 };
    let rho = if ecn > NEGLIGIBLE_NORM { mean_nonzero(&block_row_norms(a, cone)) / ecn } else { 1.0 };
    (sigma, rho)
}

/// Computes `D`, `E` by alternating sweeps; `σ`, `ρ` follow from `b`, `c`.
/// Returns the scaled problem and the scaling, leaving `data` untouched.
pub fn equilibrate(data: &ProblemData, sweeps: usize) -> (ProblemData, ScalingData) {
    let (m, n) = (data.m(), data.n());
    let blocks = data.cone.blocks();
    let mut a = data.a.clone();
    let mut d = vec![1.0; m];
    let mut e = vec![1.0; n];
    let ones_m = vec![1.0; m];
    let ones_n = vec![1.0; n];

    let row_factors = |a: &SparseMatrix| -> Vec<f64> {
        let norms = a.row_norms();
        let mut f = vec![1.0; m];
        for block in &blocks {
            let r = block.range();
            match block.kind {
                BlockKind::Zero | BlockKind::Nonneg => {
                    for i in r {
                        f[i] = inv_sqrt_or_one(norms[i]);
                    }
                }
                BlockKind::Soc | BlockKind::Psd(_) => {
                    let mean = norms[r.clone()].iter().sum::<f64>() / block.len as f64;
                    let v = inv_sqrt_or_one(mean);
                    f[r].fill(v);
                }
            }
        }
        f
    };

    for _ in 0..sweeps {
        let ce: Vec<f64> = a.col_norms().into_iter().map(inv_sqrt_or_one).collect();
        a.scale(&ones_m, &ce);
        e.iter_mut().zip(&ce).for_each(|(x, f)| *x *= f);

        let rd = row_factors(&a);
        a.scale(&rd, &ones_n);
        d.iter_mut().zip(&rd).for_each(|(x, f)| *x *= f);
    }

    let db: Vec<f64> = data.b.iter().zip(&d).map(|(b, di)| b * di).collect();
    let ec: Vec<f64> = data.c.iter().zip(&e).map(|(c, ei)| c * ei).collect();
    let (sigma, rho) = vector_scales(&a, &data.cone, &db, &ec);

    let scaled = ProblemData {
        a,
        b: db.iter().map(|v| sigma * v).collect(),
        c: ec.iter().map(|v| rho * v).collect(),
        cone: data.cone.clone(),
    };
    (scaled, ScalingData { d, e, sigma, rho })
}

/// Recomputes `σ`, `ρ` and the scaled `b̂`, `ĉ` for new `b`, `c` while keeping
/// `D`, `E` and `Â`. Used when re-solving with a cached factorization.
pub fn rescale_vectors(scaled: &mut ProblemData, scal: &mut ScalingData, b: &[f64], c: &[f64]) {
    let db: Vec<f64> = b.iter().zip(&scal.d).map(|(b, di)| b * di).collect();
    let ec: Vec<f64> = c.iter().zip(&scal.e).map(|(c, ei)| c * ei).collect();
    (scal.sigma, scal.rho) = vector_scales(&scaled.a, &scaled.cone, &db, &ec);
    scaled.b = db.iter().map(|v| scal.sigma * v).collect();
    scaled.c = ec.iter().map(|v| scal.rho * v).collect();
}

/// `x = E·x̂/σ`, `s = D⁻¹·ŝ/σ`, `y = D·ŷ/ρ`.
pub fn unscale_solution(
    x_hat: &[f64],
    s_hat: &[f64],
    y_hat: &[f64],
    scal: &ScalingData,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = x_hat.iter().zip(&scal.e).map(|(v, e)| e * v / scal.sigma).collect();
    let s = s_hat.iter().zip(&scal.d).map(|(v, d)| v / (d * scal.sigma)).collect();
    let y = y_hat.iter().zip(&scal.d).map(|(v, d)| d * v / scal.rho).collect();
    (x, s, y)
}

/// Residuals of the candidate `(x, s, y) = (u_x, v_s, u_y)/u_τ`, in original
/// units. The `*_scale` fields are the normalizers the tolerances multiply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityResiduals {
    /// `‖Ax + s − b‖`.
    pub pri_norm: f64,
    /// `‖Aᵀy + c‖`.
    pub dual_norm: f64,
    /// `cᵀx + bᵀy`.
    pub gap: f64,
    /// `1 + ‖b‖`.
    pub pri_scale: f64,
    /// `1 + ‖c‖`.
    pub dual_scale: f64,
    /// `1 + |cᵀx| + |bᵀy|`.
    pub gap_scale: f64,
    /// `cᵀx`.
    pub pobj: f64,
    /// `−bᵀy`.
    pub dobj: f64,
}

impl OptimalityResiduals {
    pub fn pri_rel(&self) -> f64 {
        self.pri_norm / self.pri_scale
    }
    pub fn dual_rel(&self) -> f64 {
        self.dual_norm / self.dual_scale
    }
    pub fn gap_rel(&self) -> f64 {
        self.gap.abs() / self.gap_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `None` when `u_τ ≤ 0`.
    pub optimality: Option<OptimalityResiduals>,
    /// `‖Au_x + v_s‖·max(1, ‖c‖)/(−cᵀu_x)`; `+∞` unless `cᵀu_x < 0`.
    pub unbdd_measure: f64,
    /// `‖Aᵀu_y‖·max(1, ‖b‖)/(−bᵀu_y)`; `+∞` unless `bᵀu_y < 0`.
    ///
    /// The floor at 1 means a certificate that passes also satisfies the
    /// unnormalized test `‖Aᵀŷ‖ ≤ ε` with `bᵀŷ = −1` used by `check`.
    pub infeas_measure: f64,
    pub b_norm: f64,
    pub c_norm: f64,
}

/// Evaluates every stopping quantity for the embedding iterate `(u, v)` of the
/// scaled problem, expressed in the units of the original problem.
pub fn residuals_original(u: &[f64], v: &[f64], scal: &ScalingData, scaled: &ProblemData) -> Residuals {
    let (n, m) = (scaled.n(), scaled.m());
    let (ux, uy, tau) = (&u[..n], &u[n..n + m], u[n + m]);
    let vs = &v[n..n + m];
    let (sigma, rho) = (scal.sigma, scal.rho);

    let b_norm = scal.original_b_norm(scaled);
    let c_norm = scal.original_c_norm(scaled);
    let floor = |x: f64| x.max(1.0);

    let mut ax = vec![0.0; m];
    scaled.a.mul_add(ux, &mut ax);
    let mut aty = vec![0.0; n];
    scaled.a.mul_t_add(uy, &mut aty);
    let cx = dot(&scaled.c, ux);
    let by = dot(&scaled.b, uy);

    // D⁻¹(Âu_x + v_s)
    let pri_dir: Vec<f64> = (0..m).map(|i| (ax[i] + vs[i]) / scal.d[i]).collect();
    // E⁻¹Âᵀu_y
    let dual_dir: Vec<f64> = (0..n).map(|j| aty[j] / scal.e[j]).collect();

    let unbdd_measure = if cx < 0.0 {
        norm2(&pri_dir) * rho * floor(c_norm) / (-cx)
    } else {
        f64::INFINITY
    };
    let infeas_measure = if by < 0.0 {
        norm2(&dual_dir) * sigma * floor(b_norm) / (-by)
    } else {
        f64::INFINITY
    };

    let optimality = if tau > 0.0 {
        let p: Vec<f64> = (0..m).map(|i| (ax[i] / tau + vs[i] / tau - scaled.b[i]) / (scal.d[i] * sigma)).collect();
        let d: Vec<f64> = (0..n).map(|j| (aty[j] / tau + scaled.c[j]) / (scal.e[j] * rho)).collect();
        let ctx = cx / tau / (rho * sigma);
        let bty = by / tau / (rho * sigma);
        Some(OptimalityResiduals {
            pri_norm: norm2(&p),
            dual_norm: norm2(&d),
            gap: ctx + bty,
            pri_scale: 1.0 + b_norm,
            dual_scale: 1.0 + c_norm,
            gap_scale: 1.0 + ctx.abs() + bty.abs(),
            pobj: ctx,
            dobj: -bty,
        })
    } else {
        None
    };

    Residuals { optimality, unbdd_measure, infeas_measure, b_norm, c_norm }
}
