//! Seeded generators for lasso, long-only portfolio, robust PCA and planted-status
//! LP instances, each reduced to the standard form `Ax + s = b, s ∈ K`.
//!
//! Randomness comes from xoshiro256** seeded through splitmix64; normal samples
//! use the Box–Muller transform. Output is a pure function of the parameters
//! and seed, but bit-identical output across platforms or crate versions is
//! not promised.

use crate::cones::{packed_len, ConeSpec, PackedSymmetric};
use crate::linalg::SparseMatrix;
use crate::problem::ProblemData;
use nalgebra::{DMatrix, DVector};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid dimensions: {0}")]
    Dimensions(String),
}

/// Uniform and normal samples on top of xoshiro256**.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: Xoshiro256StarStar::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal via Box–Muller; the second sample of each pair is kept.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        // Filled row by row so the stream order does not depend on storage order.
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.normal();
            }
        }
        m
    }

    pub fn normal_vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_iterator(n, (0..n).map(|_| self.normal()))
    }

    /// `k` distinct indices from `0..n`, in increasing order.
    pub fn choose(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k.min(n) {
            let j = i + self.index(n - i);
            idx.swap(i, j);
        }
        let mut out = idx[..k.min(n)].to_vec();
        out.sort_unstable();
        out
    }
}

/// Triplets accumulated row block by row block.
struct Builder {
    trip: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
}

impl Builder {
    fn new() -> Self {
        Builder { trip: Vec::new(), b: Vec::new() }
    }

    /// Starts a new row with right-hand side `rhs`; returns its index.
    fn row(&mut self, rhs: f64) -> usize {
        self.b.push(rhs);
        self.b.len() - 1
    }

    fn entry(&mut self, row: usize, col: usize, v: f64) {
        if v != 0.0 {
            self.trip.push((row, col, v));
        }
    }

    fn finish(self, n: usize, c: Vec<f64>, cone: ConeSpec) -> ProblemData {
        let m = self.b.len();
        let a = SparseMatrix::from_triplets(m, n, &self.trip).expect("generator produced invalid triplets");
        ProblemData::new(a, self.b, c, cone).expect("generator produced inconsistent data")
    }
}

/// A lasso instance `minimize ½‖Fz − g‖² + μ‖z‖₁` in cone form over `(z, t, w)`.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub data: ProblemData,
    /// `q × p`.
    pub f: DMatrix<f64>,
    pub g: DVector<f64>,
    pub mu: f64,
    pub mu_max: f64,
    pub z_true: DVector<f64>,
}

impl LassoInstance {
    /// `½‖Fz − g‖² + μ‖z‖₁`.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let z = DVector::from_column_slice(z);
        0.5 * (&self.f * &z - &self.g).norm_squared() + self.mu * z.lp_norm(1)
    }
}

/// Lasso with `F` `q × p` standard normal, `p/10` nonzeros in the planted `ẑ`,
/// `g = Fẑ + w`, `μ = 0.1‖Fᵀg‖_∞`.
pub fn gen_lasso(p: usize, q: usize, seed: u64) -> Result<LassoInstance, GenError> {
    gen_lasso_with_mu(p, q, seed, None)
}

/// As [`gen_lasso`], optionally overriding `μ`.
pub fn gen_lasso_with_mu(p: usize, q: usize, seed: u64, mu: Option<f64>) -> Result<LassoInstance, GenError> {
    if p < 10 && mu.is_none() {
        return Err(GenError::Dimensions(format!("lasso needs p >= 10, got {p}")));
    }
    if p == 0 || q == 0 {
        return Err(GenError::Dimensions("lasso needs p, q >= 1".into()));
    }
    let mut rng = Sampler::new(seed);
    let f = rng.normal_matrix(q, p);
    let mut z_true = DVector::zeros(p);
    for i in rng.choose(p, (p / 10).max(1)) {
        z_true[i] = rng.normal();
    }
    // Noise variance 0.1.
    let noise = rng.normal_vector(q) * 0.1f64.sqrt();
    let g = &f * &z_true + noise;
    let ftg = f.transpose() * &g;
    let mu_max = ftg.amax();
    let mu = mu.unwrap_or(0.1 * mu_max);
    let data = lasso_cone_form(&f, &g, mu);
    Ok(LassoInstance { data, f, g, mu, mu_max, z_true })
}

/// Variables `(z, t, w)`, `n = 2p + 1`. `−t ≤ z ≤ t` as `2p` nonnegative rows,
/// then `‖Fz − g‖² ≤ w` as the single second-order cone
/// `‖(1 − w, 2(Fz − g))‖ ≤ 1 + w` of dimension `q + 2`. Objective `½w + μ1ᵀt`.
fn lasso_cone_form(f: &DMatrix<f64>, g: &DVector<f64>, mu: f64) -> ProblemData {
    let (q, p) = f.shape();
    let (z, t, w) = (0, p, 2 * p);
    let mut bld = Builder::new();
    for i in 0..p {
        let r = bld.row(0.0);
        bld.entry(r, z + i, 1.0);
        bld.entry(r, t + i, -1.0);
    }
    for i in 0..p {
        let r = bld.row(0.0);
        bld.entry(r, z + i, -1.0);
        bld.entry(r, t + i, -1.0);
    }
    // s₀ = 1 + w, s₁ = 1 − w, s₂.. = 2(Fz − g).
    let r0 = bld.row(1.0);
    bld.entry(r0, w, -1.0);
    let r1 = bld.row(1.0);
    bld.entry(r1, w, 1.0);
    for i in 0..q {
        let r = bld.row(-2.0 * g[i]);
        for j in 0..p {
            bld.entry(r, z + j, -2.0 * f[(i, j)]);
        }
    }
    let mut c = vec![0.0; 2 * p + 1];
    c[t..t + p].fill(mu);
    c[w] = 0.5;
    let cone = ConeSpec { nonneg: 2 * p, soc: vec![q + 2], ..Default::default() };
    bld.finish(2 * p + 1, c, cone)
}

/// Long-only portfolio `maximize μᵀz − γ zᵀ(FFᵀ + D)z` over the simplex, in cone
/// form over `(z, t, s, u, v)` as a minimization of `−μᵀz + γ(t + s)`.
#[derive(Debug, Clone)]
pub struct PortfolioInstance {
    pub data: ProblemData,
    /// Expected returns.
    pub mu: DVector<f64>,
    /// `p × q` factor loadings.
    pub f: DMatrix<f64>,
    /// Diagonal of the idiosyncratic risk.
    pub d: DVector<f64>,
    pub gamma: f64,
}

impl PortfolioInstance {
    /// `−μᵀz + γ(‖Fᵀz‖² + zᵀDz)`, the minimization form's value.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let z = DVector::from_column_slice(z);
        let risk = (self.f.transpose() * &z).norm_squared() + z.component_mul(&z).dot(&self.d);
        -self.mu.dot(&z) + self.gamma * risk
    }
}

pub fn gen_portfolio(p: usize, q: usize, seed: u64) -> Result<PortfolioInstance, GenError> {
    if q == 0 || p <= q {
        return Err(GenError::Dimensions(format!("portfolio needs p > q >= 1, got p={p}, q={q}")));
    }
    let mut rng = Sampler::new(seed);
    let mu = rng.normal_vector(p).map(f64::exp);
    let f = rng.normal_matrix(p, q);
    let d = DVector::from_iterator(p, (0..p).map(|_| rng.uniform_range(0.0, 2.0)));
    let gamma = 10.0;

    let n = p + 4;
    let (z, t, s, u, v) = (0, p, p + 1, p + 2, p + 3);
    let mut bld = Builder::new();
    let r = bld.row(1.0);
    for i in 0..p {
        bld.entry(r, z + i, 1.0);
    }
    for i in 0..p {
        let r = bld.row(0.0);
        bld.entry(r, z + i, -1.0);
    }
    // ‖D^½ z‖ ≤ u
    let r = bld.row(0.0);
    bld.entry(r, u, -1.0);
    for i in 0..p {
        let r = bld.row(0.0);
        bld.entry(r, z + i, -d[i].sqrt());
    }
    // ‖Fᵀz‖ ≤ v
    let r = bld.row(0.0);
    bld.entry(r, v, -1.0);
    for k in 0..q {
        let r = bld.row(0.0);
        for i in 0..p {
            bld.entry(r, z + i, -f[(i, k)]);
        }
    }
    // ‖(1 − t, 2u)‖ ≤ 1 + t and the same for (s, v).
    for (lin, sq) in [(t, u), (s, v)] {
        let r0 = bld.row(1.0);
        bld.entry(r0, lin, -1.0);
        let r1 = bld.row(1.0);
        bld.entry(r1, lin, 1.0);
        let r2 = bld.row(0.0);
        bld.entry(r2, sq, -2.0);
    }
    let mut c = vec![0.0; n];
    for i in 0..p {
        c[z + i] = -mu[i];
    }
    c[t] = gamma;
    c[s] = gamma;
    let cone = ConeSpec { zero: 1, nonneg: p, soc: vec![p + 1, q + 1, 3, 3], psd: vec![] };
    let data = bld.finish(n, c, cone);
    Ok(PortfolioInstance { data, mu, f, d, gamma })
}

/// Robust PCA `minimize ‖L‖_* s.t. ‖vec S‖₁ ≤ μ, L + S = M` as a semidefinite
/// program over `(L, S, t, W₁, W₂)`.
#[derive(Debug, Clone)]
pub struct RpcaInstance {
    pub data: ProblemData,
    pub p: usize,
    pub m: DMatrix<f64>,
    pub l_true: DMatrix<f64>,
    pub s_true: DMatrix<f64>,
    pub mu: f64,
}

impl RpcaInstance {
    /// Column offsets of `L`, `S`, `t`, `W₁`, `W₂` in `x`.
    pub fn offsets(&self) -> RpcaOffsets {
        RpcaOffsets::new(self.p)
    }

    /// `L` read from a primal point, column-major.
    pub fn l_from(&self, x: &[f64]) -> DMatrix<f64> {
        let p = self.p;
        DMatrix::from_column_slice(p, p, &x[..p * p])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RpcaOffsets {
    pub l: usize,
    pub s: usize,
    pub t: usize,
    pub w1: usize,
    pub w2: usize,
    pub n: usize,
}

impl RpcaOffsets {
    fn new(p: usize) -> Self {
        let pp = p * p;
        let tri = packed_len(p);
        RpcaOffsets { l: 0, s: pp, t: 2 * pp, w1: 3 * pp, w2: 3 * pp + tri, n: 3 * pp + 2 * tri }
    }
}

/// `M = L̂ + Ŝ` with `L̂ = UVᵀ` of rank `r` and about 10% of `Ŝ` nonzero;
/// `μ = ‖vec Ŝ‖₁`.
pub fn gen_rpca(p: usize, r: usize, seed: u64) -> Result<RpcaInstance, GenError> {
    gen_rpca_with(p, r, seed, 0.1)
}

/// As [`gen_rpca`] with the corruption density given explicitly; `0.0` gives
/// `Ŝ = 0`.
pub fn gen_rpca_with(p: usize, r: usize, seed: u64, density: f64) -> Result<RpcaInstance, GenError> {
    if r == 0 || p < r {
        return Err(GenError::Dimensions(format!("rpca needs p >= r >= 1, got p={p}, r={r}")));
    }
    let mut rng = Sampler::new(seed);
    let u = rng.normal_matrix(p, r);
    let v = rng.normal_matrix(p, r);
    let l_true = &u * v.transpose();
    let mut s_true = DMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..p {
            if rng.uniform() < density {
                s_true[(i, j)] = rng.normal();
            }
        }
    }
    let m = &l_true + &s_true;
    let mu = s_true.iter().map(|v: &f64| v.abs()).sum::<f64>();
    let data = rpca_cone_form(&m, mu);
    Ok(RpcaInstance { data, p, m, l_true, s_true, mu })
}

fn rpca_cone_form(mdat: &DMatrix<f64>, mu: f64) -> ProblemData {
    let p = mdat.nrows();
    let pp = p * p;
    let off = RpcaOffsets::new(p);
    let mut bld = Builder::new();
    // L + S = M
    for k in 0..pp {
        let r = bld.row(mdat[k]);
        bld.entry(r, off.l + k, 1.0);
        bld.entry(r, off.s + k, 1.0);
    }
    // ±S − t ≤ 0
    for sign in [1.0, -1.0] {
        for k in 0..pp {
            let r = bld.row(0.0);
            bld.entry(r, off.s + k, sign);
            bld.entry(r, off.t + k, -1.0);
        }
    }
    // 1ᵀt ≤ μ
    let r = bld.row(mu);
    for k in 0..pp {
        bld.entry(r, off.t + k, 1.0);
    }
    // svec([[W₁, L], [Lᵀ, W₂]]) ∈ S₊. W₁ and W₂ are themselves packed, so their
    // entries map with coefficient 1; L's off-diagonal entries carry √2.
    let side = 2 * p;
    let base = bld.b.len();
    for _ in 0..packed_len(side) {
        bld.row(0.0);
    }
    for j in 0..side {
        for i in j..side {
            let row = base + PackedSymmetric::index(side, i, j);
            if i < p {
                bld.entry(row, off.w1 + PackedSymmetric::index(p, i, j), -1.0);
            } else if j >= p {
                bld.entry(row, off.w2 + PackedSymmetric::index(p, i - p, j - p), -1.0);
            } else {
                // Lower-left block is Lᵀ: entry (i, j) = L[j, i − p].
                let k = (i - p) * p + j;
                bld.entry(row, off.l + k, -std::f64::consts::SQRT_2);
            }
        }
    }
    let mut c = vec![0.0; off.n];
    for i in 0..p {
        c[off.w1 + PackedSymmetric::index(p, i, i)] = 0.5;
        c[off.w2 + PackedSymmetric::index(p, i, i)] = 0.5;
    }
    let cone = ConeSpec { zero: pp, nonneg: 2 * pp + 1, soc: vec![], psd: vec![side] };
    bld.finish(off.n, c, cone)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpKind {
    Feasible,
    Infeasible,
    Unbounded,
}

impl LpKind {
    pub fn name(self) -> &'static str {
        match self {
            LpKind::Feasible => "lp_feasible",
            LpKind::Infeasible => "lp_infeasible",
            LpKind::Unbounded => "lp_unbounded",
        }
    }
}

/// An LP over the nonnegative orthant with a planted optimum or certificate.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub data: ProblemData,
    pub kind: LpKind,
    /// Feasible kind: a primal-dual optimal triple `(x⋆, s⋆, y⋆)` with `s⋆ᵀy⋆ = 0`.
    pub optimum: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    /// Infeasible kind: `y₀ ≥ 0`, `Aᵀy₀ = 0`, `bᵀy₀ = −1` up to rounding.
    pub farkas_y: Option<Vec<f64>>,
    /// Unbounded kind: `−Ax₀ ≥ 0`, `cᵀx₀ = −1` up to rounding.
    pub ray_x: Option<Vec<f64>>,
}

impl LpInstance {
    pub fn optimal_value(&self) -> Option<f64> {
        let (x, _, _) = self.optimum.as_ref()?;
        Some(self.data.c.iter().zip(x).map(|(a, b)| a * b).sum())
    }
}

pub fn gen_lp_family(kind: LpKind, n: usize, m: usize, seed: u64) -> Result<LpInstance, GenError> {
    if n == 0 || m < n {
        return Err(GenError::Dimensions(format!("lp needs m >= n >= 1, got n={n}, m={m}")));
    }
    let mut rng = Sampler::new(seed);
    let mut a = rng.normal_matrix(m, n);
    let to_data = |a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>| {
        let dense: Vec<f64> = a.as_slice().to_vec();
        let a = SparseMatrix::from_dense(m, n, &dense).expect("dense LP matrix");
        ProblemData::new(a, b.as_slice().to_vec(), c.as_slice().to_vec(), ConeSpec::nonneg(m))
            .expect("LP data is consistent")
    };
    let mut inst = LpInstance { data: to_data(&a, &DVector::zeros(m), &DVector::zeros(n)), kind, optimum: None, farkas_y: None, ray_x: None };
    match kind {
        LpKind::Feasible => {
            let x = rng.normal_vector(n);
            let mut s = DVector::zeros(m);
            let mut y = DVector::zeros(m);
            for i in 0..m {
                if rng.uniform() < 0.5 {
                    s[i] = rng.uniform_range(0.5, 1.5);
                } else {
                    y[i] = rng.uniform_range(0.5, 1.5);
                }
            }
            let b = &a * &x + &s;
            let c = -(a.transpose() * &y);
            inst.data = to_data(&a, &b, &c);
            inst.optimum = Some((x.as_slice().to_vec(), s.as_slice().to_vec(), y.as_slice().to_vec()));
        }
        LpKind::Infeasible => {
            let y0 = DVector::from_iterator(m, (0..m).map(|_| rng.uniform_range(0.5, 1.5)));
            let yy = y0.norm_squared();
            // Remove the y₀ component of every column: Aᵀy₀ = 0.
            let aty = a.transpose() * &y0;
            a -= &y0 * aty.transpose() / yy;
            let c = rng.normal_vector(n);
            let b = rng.normal_vector(m);
            let b = &b - &y0 * ((1.0 + b.dot(&y0)) / yy);
            inst.data = to_data(&a, &b, &c);
            inst.farkas_y = Some(y0.as_slice().to_vec());
        }
        LpKind::Unbounded => {
            let x0 = rng.normal_vector(n);
            let ax = &a * &x0;
            for i in 0..m {
                if ax[i] > 0.0 {
                    for j in 0..n {
                        a[(i, j)] = -a[(i, j)];
                    }
                }
            }
            let xx = x0.norm_squared();
            let c = rng.normal_vector(n);
            let c = &c - &x0 * ((1.0 + c.dot(&x0)) / xx);
            // Strictly feasible: b = A·x_f + s_f with s_f > 0.
            let xf = rng.normal_vector(n);
            let sf = DVector::from_iterator(m, (0..m).map(|_| rng.uniform_range(0.5, 1.5)));
            let b = &a * &xf + sf;
            inst.data = to_data(&a, &b, &c);
            inst.ray_x = Some(x0.as_slice().to_vec());
        }
    }
    Ok(inst)
}

/// A generator family with its dimensions, as accepted by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorParams {
    Lasso { p: usize, q: usize },
    Portfolio { p: usize, q: usize },
    Rpca { p: usize, r: usize },
    Lp { kind: LpKind, n: usize, m: usize },
}

pub fn generate(params: GeneratorParams, seed: u64) -> Result<ProblemData, GenError> {
    Ok(match params {
        GeneratorParams::Lasso { p, q } => gen_lasso(p, q, seed)?.data,
        GeneratorParams::Portfolio { p, q } => gen_portfolio(p, q, seed)?.data,
        GeneratorParams::Rpca { p, r } => gen_rpca(p, r, seed)?.data,
        GeneratorParams::Lp { kind, n, m } => gen_lp_family(kind, n, m, seed)?.data,
    })
}
