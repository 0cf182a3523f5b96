//! Test-only references: dense projections, the five-step iteration with
//! explicit dual sequences, cone membership margins and optimization oracles.
//! Nothing here calls into the solver's projection or linear-algebra code.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use splitcone::cones::{symmetric_eig, BlockKind, ConeSpec};
use splitcone::probgen::{LassoInstance, PortfolioInstance, Sampler};
use splitcone::{ProblemData, SparseMatrix};

pub fn tiny_feasible() -> ProblemData {
    let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]).unwrap();
    ProblemData::new(a, vec![-1.0], vec![1.0], ConeSpec::nonneg(1)).unwrap()
}

pub fn tiny_infeasible() -> ProblemData {
    let a = SparseMatrix::from_triplets(2, 1, &[(0, 0, 1.0), (1, 0, -1.0)]).unwrap();
    ProblemData::new(a, vec![0.0, -1.0], vec![0.0], ConeSpec::nonneg(2)).unwrap()
}

pub fn tiny_unbounded() -> ProblemData {
    let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]).unwrap();
    ProblemData::new(a, vec![0.0], vec![-1.0], ConeSpec::nonneg(1)).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Dense cone projections built on nalgebra.

fn unpack(side: usize, packed: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        for i in j..side {
            let v = if i == j { packed[k] } else { packed[k] / 2f64.sqrt() };
            m[(i, j)] = v;
            m[(j, i)] = v;
            k += 1;
        }
    }
    m
}

fn pack(m: &DMatrix<f64>) -> Vec<f64> {
    let side = m.nrows();
    let mut out = Vec::new();
    for j in 0..side {
        for i in j..side {
            out.push(if i == j { m[(i, j)] } else { m[(i, j)] * 2f64.sqrt() });
        }
    }
    out
}

fn soc_proj(x: &[f64]) -> Vec<f64> {
    let t = x[0];
    let r = norm(&x[1..]);
    if r <= t {
        x.to_vec()
    } else if r <= -t {
        vec![0.0; x.len()]
    } else {
        let a = (t + r) / 2.0;
        let mut out = vec![a];
        out.extend(x[1..].iter().map(|v| a * v / r));
        out
    }
}

fn psd_proj(side: usize, x: &[f64]) -> Vec<f64> {
    let eig = unpack(side, x).symmetric_eigen();
    let lam = eig.eigenvalues.map(|v| v.max(0.0));
    let m = &eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose();
    pack(&m)
}

/// Projection onto `K` (`dual = false`) or `K*` (`dual = true`).
pub fn proj_cone(z: &[f64], cone: &ConeSpec, dual: bool) -> Vec<f64> {
    let mut out = z.to_vec();
    for b in cone.blocks() {
        let r = b.range();
        let seg = &z[r.clone()];
        let p = match b.kind {
            BlockKind::Zero if dual => seg.to_vec(),
            BlockKind::Zero => vec![0.0; seg.len()],
            BlockKind::Nonneg => seg.iter().map(|v| v.max(0.0)).collect(),
            BlockKind::Soc => soc_proj(seg),
            BlockKind::Psd(side) => psd_proj(side, seg),
        };
        out[r].copy_from_slice(&p);
    }
    out
}

/// `Π_C` with `C = Rⁿ × K* × R₊`.
pub fn proj_c(u: &[f64], n: usize, cone: &ConeSpec) -> Vec<f64> {
    let m = cone.total_dim();
    let mut out = u[..n].to_vec();
    out.extend(proj_cone(&u[n..n + m], cone, true));
    out.push(u[n + m].max(0.0));
    out
}

/// `Π_{C*}` with `C* = {0}ⁿ × K × R₊`.
pub fn proj_c_star(v: &[f64], n: usize, cone: &ConeSpec) -> Vec<f64> {
    let m = cone.total_dim();
    let mut out = vec![0.0; n];
    out.extend(proj_cone(&v[n..n + m], cone, false));
    out.push(v[n + m].max(0.0));
    out
}

/// Smallest signed block margin of `z` in `K` or `K*`, each block divided by
/// `1 + ‖block‖`. Nonnegative means inside.
pub fn relative_margin(z: &[f64], cone: &ConeSpec, dual: bool) -> f64 {
    let mut worst = f64::INFINITY;
    for b in cone.blocks() {
        let seg = &z[b.range()];
        if seg.is_empty() {
            continue;
        }
        let margin = match b.kind {
            BlockKind::Zero if dual => continue,
            BlockKind::Zero => -seg.iter().fold(0.0f64, |a, v| a.max(v.abs())),
            BlockKind::Nonneg => seg.iter().copied().fold(f64::INFINITY, f64::min),
            BlockKind::Soc => seg[0] - norm(&seg[1..]),
            BlockKind::Psd(side) => unpack(side, seg).symmetric_eigenvalues().min(),
        };
        worst = worst.min(margin / (1.0 + norm(seg)));
    }
    worst
}

// ---------------------------------------------------------------------------
// Dense embedding matrix and the five-step iteration.

pub fn dense_q(data: &ProblemData) -> DMatrix<f64> {
    let (n, m) = (data.n(), data.m());
    let a = DMatrix::from_column_slice(m, n, &data.a.to_dense());
    let d = n + m + 1;
    let mut q = DMatrix::zeros(d, d);
    for i in 0..m {
        for j in 0..n {
            q[(j, n + i)] = a[(i, j)];
            q[(n + i, j)] = -a[(i, j)];
        }
    }
    for j in 0..n {
        q[(j, n + m)] = data.c[j];
        q[(n + m, j)] = -data.c[j];
    }
    for i in 0..m {
        q[(n + i, n + m)] = data.b[i];
        q[(n + m, n + i)] = -data.b[i];
    }
    q
}

/// Iterates of the five-step scheme with explicit duals `λ` (for `u`) and `μ`
/// (for `v`).
#[derive(Debug, Clone)]
pub struct NaiveState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl NaiveState {
    /// `λ⁰ = v⁰`, `μ⁰ = u⁰`.
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Self {
        NaiveState { lambda: v.clone(), mu: u.clone(), u, v }
    }
}

/// Projection of `(a, b)` onto `{(u, v) : Qu = v}` via `(I + QᵀQ)u = a + Qᵀb`.
pub fn project_graph(q: &DMatrix<f64>, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = q.nrows();
    let lhs = DMatrix::identity(d, d) + q.transpose() * q;
    let rhs = DVector::from_column_slice(a) + q.transpose() * DVector::from_column_slice(b);
    let u = lhs.cholesky().expect("I + QᵀQ is positive definite").solve(&rhs);
    let v = q * &u;
    (u.as_slice().to_vec(), v.as_slice().to_vec())
}

pub fn naive_step(st: &mut NaiveState, q: &DMatrix<f64>, data: &ProblemData) {
    let n = data.n();
    let a: Vec<f64> = st.u.iter().zip(&st.lambda).map(|(x, y)| x + y).collect();
    let b: Vec<f64> = st.v.iter().zip(&st.mu).map(|(x, y)| x + y).collect();
    let (ut, vt) = project_graph(q, &a, &b);
    let u_arg: Vec<f64> = ut.iter().zip(&st.lambda).map(|(x, y)| x - y).collect();
    let v_arg: Vec<f64> = vt.iter().zip(&st.mu).map(|(x, y)| x - y).collect();
    st.u = proj_c(&u_arg, n, &data.cone);
    st.v = proj_c_star(&v_arg, n, &data.cone);
    for i in 0..st.u.len() {
        st.lambda[i] = st.lambda[i] - ut[i] + st.u[i];
        st.mu[i] = st.mu[i] - vt[i] + st.v[i];
    }
}

/// The three-step iteration written densely, with relaxation `alpha`.
pub fn dense_step(u: &[f64], v: &[f64], q: &DMatrix<f64>, data: &ProblemData, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let d = q.nrows();
    let w = DVector::from_iterator(d, u.iter().zip(v).map(|(a, b)| a + b));
    let ut = (DMatrix::identity(d, d) + q).lu().solve(&w).expect("I + Q is invertible");
    let ubar: Vec<f64> = (0..d).map(|i| alpha * ut[i] + (1.0 - alpha) * u[i]).collect();
    let arg: Vec<f64> = (0..d).map(|i| ubar[i] - v[i]).collect();
    let un = proj_c(&arg, data.n(), &data.cone);
    let vn: Vec<f64> = (0..d).map(|i| v[i] - ubar[i] + un[i]).collect();
    (un, vn)
}

// ---------------------------------------------------------------------------
// Random small problems over mixed cones.

/// A random problem with a zero block, a nonnegative block, one or two
/// second-order cones and sometimes a small semidefinite block.
pub fn random_problem(rng: &mut Sampler, max_n: usize) -> ProblemData {
    let n = 1 + rng.index(max_n);
    let zero = rng.index(2);
    let nonneg = 1 + rng.index(3);
    let soc: Vec<usize> = (0..1 + rng.index(2)).map(|_| 2 + rng.index(3)).collect();
    let psd: Vec<usize> = if rng.uniform() < 0.5 { vec![1 + rng.index(2)] } else { vec![] };
    let cone = ConeSpec { zero, nonneg, soc, psd };
    let m = cone.total_dim();
    let mut trip = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.uniform() < 0.6 {
                trip.push((i, j, rng.normal()));
            }
        }
    }
    let a = SparseMatrix::from_triplets(m, n, &trip).unwrap();
    let b = (0..m).map(|_| rng.normal()).collect();
    let c = (0..n).map(|_| rng.normal()).collect();
    ProblemData::new(a, b, c, cone).unwrap()
}

pub fn random_vec(rng: &mut Sampler, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * rng.normal()).collect()
}

// ---------------------------------------------------------------------------
// Oracles.

/// Optimal lasso value by accelerated proximal gradient, stopped when the
/// objective's relative change falls below `1e-10` over a window of steps.
pub fn lasso_oracle(inst: &LassoInstance) -> f64 {
    let f = &inst.f;
    let ftf = f.transpose() * f;
    let lip = ftf.symmetric_eigenvalues().max();
    let ftg = f.transpose() * &inst.g;
    let p = f.ncols();
    let shrink = |v: f64, k: f64| v.signum() * (v.abs() - k).max(0.0);
    let mut z = DVector::zeros(p);
    let mut y = z.clone();
    let mut t = 1.0f64;
    let mut prev = inst.objective(z.as_slice());
    let mut calm = 0;
    for _ in 0..1_000_000 {
        let grad = &ftf * &y - &ftg;
        let step = &y - grad / lip;
        let znew = step.map(|v| shrink(v, inst.mu / lip));
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        // Restart momentum when the objective goes up.
        let obj = inst.objective(znew.as_slice());
        if obj > prev {
            t = 1.0;
            y = z.clone();
            continue;
        }
        y = &znew + (&znew - &z) * ((t - 1.0) / tn);
        z = znew;
        t = tn;
        let rel = (prev - obj).abs() / obj.abs().max(1e-300);
        calm = if rel <= 1e-10 { calm + 1 } else { 0 };
        prev = obj;
        if calm >= 50 {
            break;
        }
    }
    inst.objective(z.as_slice())
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

/// Optimal portfolio value (minimization form) by accelerated projected
/// gradient. Returns the value and the stationarity measure reached.
pub fn portfolio_oracle(inst: &PortfolioInstance) -> (f64, f64) {
    let p = inst.mu.len();
    let sigma = &inst.f * inst.f.transpose() + DMatrix::from_diagonal(&inst.d);
    let h = &sigma * (2.0 * inst.gamma);
    let lip = h.symmetric_eigenvalues().max();
    let grad = |z: &DVector<f64>| &h * z - &inst.mu;
    let mut z = DVector::from_element(p, 1.0 / p as f64);
    let mut y = z.clone();
    let mut t = 1.0f64;
    let mut stat = f64::INFINITY;
    for _ in 0..2_000_000 {
        let znew = project_simplex(&(&y - grad(&y) / lip));
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        if inst.objective(znew.as_slice()) > inst.objective(z.as_slice()) {
            t = 1.0;
            y = z.clone();
            continue;
        }
        y = &znew + (&znew - &z) * ((t - 1.0) / tn);
        z = znew;
        t = tn;
        stat = (&z - project_simplex(&(&z - grad(&z) / lip))).norm();
        if stat <= 1e-12 {
            break;
        }
    }
    (inst.objective(z.as_slice()), stat)
}

/// `‖X‖_*` as half the sum of absolute eigenvalues of `[[0, X], [Xᵀ, 0]]`,
/// computed with the crate's symmetric eigensolver.
pub fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    let (p, q) = x.shape();
    let side = p + q;
    let mut dil = vec![0.0; side * side];
    for i in 0..p {
        for j in 0..q {
            dil[(p + j) * side + i] = x[(i, j)];
            dil[i * side + p + j] = x[(i, j)];
        }
    }
    let eig = symmetric_eig(&dil, side).expect("eigensolver converges");
    0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>()
}
