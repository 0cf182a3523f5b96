//! Independent verification of a solution file against a problem.
//!
//! Only the sparse products are shared with the solver. Cone membership is
//! recomputed here: second-order cones by direct norms and semidefinite blocks
//! through nalgebra's symmetric eigenvalues rather than the solver's Jacobi
//! routine.

use crate::cones::{BlockKind, ConeSpec};
use crate::io::SolutionFile;
use crate::problem::ProblemData;
use crate::solver::Status;
use nalgebra::DMatrix;
use thiserror::Error;

/// Certificates are normalized to `bᵀŷ = −1` or `cᵀx̂ = −1`; this is the slack
/// allowed for rounding in that normalization.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("solution member `{member}` has length {got}, problem needs {expected}")]
    Dimension { member: &'static str, expected: usize, got: usize },
    #[error("solution with status `{status}` is missing `{member}`")]
    Missing { status: String, member: &'static str },
    #[error("unknown status `{0}`")]
    Status(String),
}

/// One named quantity compared against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when `value` must stay at or below `bound`; otherwise at or above.
    pub upper: bool,
}

impl Measurement {
    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.bound
        } else {
            self.value >= self.bound
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub status: Status,
    pub measurements: Vec<Measurement>,
    /// Relative residuals, present for a reported primal-dual point.
    pub pri_res: Option<f64>,
    pub dual_res: Option<f64>,
    pub gap: Option<f64>,
}

impl CheckReport {
    /// All measurements pass and the status carries something to verify.
    pub fn passed(&self) -> bool {
        !self.measurements.is_empty() && self.measurements.iter().all(Measurement::passed)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unpack(side: usize, packed: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        for i in j..side {
            let v = if i == j { packed[k] } else { packed[k] / std::f64::consts::SQRT_2 };
            m[(i, j)] = v;
            m[(j, i)] = v;
            k += 1;
        }
    }
    m
}

/// Smallest eigenvalue of a packed symmetric block.
fn min_eig(side: usize, packed: &[f64]) -> f64 {
    if side == 0 {
        return 0.0;
    }
    unpack(side, packed).symmetric_eigenvalues().min()
}

/// Signed membership margin of each block of `z` in `K` (or `K*` when `dual`),
/// with the block's norm. Nonnegative margin means inside.
fn block_margins(z: &[f64], cone: &ConeSpec, dual: bool) -> Vec<(String, f64, f64)> {
    let mut out = Vec::new();
    for (bi, block) in cone.blocks().into_iter().enumerate() {
        let seg = &z[block.range()];
        let size = norm(seg);
        let (label, margin) = match block.kind {
            BlockKind::Zero if dual => continue,
            BlockKind::Zero => ("zero", -seg.iter().fold(0.0f64, |a, v| a.max(v.abs()))),
            BlockKind::Nonneg => ("nonneg", seg.iter().copied().fold(f64::INFINITY, f64::min)),
            BlockKind::Soc => ("soc", seg.first().copied().unwrap_or(0.0) - norm(seg.get(1..).unwrap_or(&[]))),
            BlockKind::Psd(side) => ("psd", min_eig(side, seg)),
        };
        if seg.is_empty() {
            continue;
        }
        out.push((format!("{label}[{bi}]"), margin, size));
    }
    out
}

/// Euclidean distance from `z` to `K`.
fn distance_to_cone(z: &[f64], cone: &ConeSpec) -> f64 {
    let mut sq = 0.0;
    for block in cone.blocks() {
        let seg = &z[block.range()];
        sq += match block.kind {
            BlockKind::Zero => seg.iter().map(|v| v * v).sum::<f64>(),
            BlockKind::Nonneg => seg.iter().map(|v| v.min(0.0).powi(2)).sum::<f64>(),
            BlockKind::Soc => {
                if seg.is_empty() {
                    0.0
                } else {
                    let t = seg[0];
                    let r = norm(&seg[1..]);
                    if r <= t {
                        0.0
                    } else if r <= -t {
                        t * t + r * r
                    } else {
                        // Nearest point sits on the boundary ray through (r, r).
                        0.5 * (r - t).powi(2)
                    }
                }
            }
            BlockKind::Psd(side) => {
                if side == 0 {
                    0.0
                } else {
                    let ev = unpack(side, seg).symmetric_eigenvalues();
                    ev.iter().map(|v| v.min(0.0).powi(2)).sum::<f64>()
                }
            }
        };
    }
    sq.sqrt()
}

fn need<'a>(v: &'a Option<Vec<f64>>, status: &str, member: &'static str, len: usize) -> Result<&'a [f64], CheckError> {
    let v = v.as_deref().ok_or(CheckError::Missing { status: status.to_string(), member })?;
    if v.len() != len {
        return Err(CheckError::Dimension { member, expected: len, got: v.len() });
    }
    Ok(v)
}

fn membership(out: &mut Vec<Measurement>, tag: &str, z: &[f64], cone: &ConeSpec, dual: bool, eps: f64) {
    for (name, margin, size) in block_margins(z, cone, dual) {
        out.push(Measurement { name: format!("{tag} {name} margin"), value: margin, bound: -eps * (1.0 + size), upper: false });
    }
}

/// Verifies `sol` against `data` at tolerance `eps`.
///
/// * solved: the three relative residuals are at most `eps`, `s ∈ K`, `y ∈ K*`;
/// * infeasible: `‖Aᵀŷ‖ ≤ eps`, `ŷ ∈ K*`, `bᵀŷ = −1`;
/// * unbounded: `dist(−Ax̂, K) ≤ eps`, `cᵀx̂ = −1`.
///
/// Membership passes when each block's signed margin is at least
/// `−eps·(1 + ‖block‖)`. Other statuses yield an empty, failing report.
pub fn check_solution(data: &ProblemData, sol: &SolutionFile, eps: f64) -> Result<CheckReport, CheckError> {
    let status = Status::parse(&sol.status).ok_or_else(|| CheckError::Status(sol.status.clone()))?;
    let (m, n) = (data.m(), data.n());
    let mut ms = Vec::new();
    let mut report = CheckReport { status, measurements: Vec::new(), pri_res: None, dual_res: None, gap: None };

    match status {
        Status::Solved => {
            let x = need(&sol.x, &sol.status, "x", n)?;
            let y = need(&sol.y, &sol.status, "y", m)?;
            let s = need(&sol.s, &sol.status, "s", m)?;
            let ax = data.a.spmv(x).expect("dimensions checked");
            let aty = data.a.spmv_t(y).expect("dimensions checked");
            let p: Vec<f64> = (0..m).map(|i| ax[i] + s[i] - data.b[i]).collect();
            let d: Vec<f64> = (0..n).map(|j| aty[j] + data.c[j]).collect();
            let (cx, by) = (dot(&data.c, x), dot(&data.b, y));
            let pri = norm(&p) / (1.0 + norm(&data.b));
            let dual = norm(&d) / (1.0 + norm(&data.c));
            let gap = (cx + by).abs() / (1.0 + cx.abs() + by.abs());
            report.pri_res = Some(pri);
            report.dual_res = Some(dual);
            report.gap = Some(gap);
            ms.push(Measurement { name: "primal residual".into(), value: pri, bound: eps, upper: true });
            ms.push(Measurement { name: "dual residual".into(), value: dual, bound: eps, upper: true });
            ms.push(Measurement { name: "duality gap".into(), value: gap, bound: eps, upper: true });
            membership(&mut ms, "s in K:", s, &data.cone, false, eps);
            membership(&mut ms, "y in K*:", y, &data.cone, true, eps);
        }
        Status::Infeasible | Status::Unbounded | Status::InfeasibleAndUnbounded => {
            let infeasible = status != Status::Unbounded;
            let unbounded = status != Status::Infeasible;
            if infeasible {
                let y = need(&sol.certificate, &sol.status, "certificate", m)?;
                let aty = data.a.spmv_t(y).expect("dimensions checked");
                ms.push(Measurement { name: "|A'y|".into(), value: norm(&aty), bound: eps, upper: true });
                ms.push(Measurement {
                    name: "|b'y + 1|".into(),
                    value: (dot(&data.b, y) + 1.0).abs(),
                    bound: NORMALIZATION_TOL,
                    upper: true,
                });
                membership(&mut ms, "y in K*:", y, &data.cone, true, eps);
            }
            if unbounded {
                let (cert, member) = if infeasible {
                    (&sol.certificate_x, "certificate_x")
                } else {
                    (&sol.certificate, "certificate")
                };
                let x = need(cert, &sol.status, member, n)?;
                let ax = data.a.spmv(x).expect("dimensions checked");
                let neg: Vec<f64> = ax.iter().map(|v| -v).collect();
                ms.push(Measurement {
                    name: "dist(-Ax, K)".into(),
                    value: distance_to_cone(&neg, &data.cone),
                    bound: eps,
                    upper: true,
                });
                ms.push(Measurement {
                    name: "|c'x + 1|".into(),
                    value: (dot(&data.c, x) + 1.0).abs(),
                    bound: NORMALIZATION_TOL,
                    upper: true,
                });
            }
        }
        Status::Indeterminate | Status::MaxItersReached => {}
    }
    report.measurements = ms;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::InfoFile;
    use crate::linalg::SparseMatrix;

    fn file(status: &str) -> SolutionFile {
        SolutionFile {
            status: status.into(),
            x: None,
            y: None,
            s: None,
            certificate: None,
            certificate_x: None,
            info: InfoFile::default(),
        }
    }

    fn tiny() -> ProblemData {
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]).unwrap();
        ProblemData::new(a, vec![-1.0], vec![1.0], ConeSpec::nonneg(1)).unwrap()
    }

    #[test]
    fn exact_optimum_passes_and_perturbation_fails() {
        let data = tiny();
        let mut sol = file("solved");
        sol.x = Some(vec![1.0]);
        sol.y = Some(vec![1.0]);
        sol.s = Some(vec![0.0]);
        let r = check_solution(&data, &sol, 1e-3).unwrap();
        assert!(r.passed());
        assert_eq!(r.pri_res, Some(0.0));

        sol.x = Some(vec![2.0]);
        let r = check_solution(&data, &sol, 1e-3).unwrap();
        // ‖A·e‖/(1 + ‖b‖) = 1/2.
        assert!((r.pri_res.unwrap() - 0.5).abs() < 1e-15);
        assert!(!r.passed());
    }

    #[test]
    fn farkas_certificate_passes() {
        let a = SparseMatrix::from_triplets(2, 1, &[(0, 0, 1.0), (1, 0, -1.0)]).unwrap();
        let data = ProblemData::new(a, vec![0.0, -1.0], vec![0.0], ConeSpec::nonneg(2)).unwrap();
        let mut sol = file("infeasible");
        sol.certificate = Some(vec![1.0, 1.0]);
        assert!(check_solution(&data, &sol, 1e-3).unwrap().passed());
        sol.certificate = Some(vec![-1.0, 1.0]);
        assert!(!check_solution(&data, &sol, 1e-3).unwrap().passed());
    }

    #[test]
    fn ray_certificate_passes() {
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, -1.0)]).unwrap();
        let data = ProblemData::new(a, vec![0.0], vec![-1.0], ConeSpec::nonneg(1)).unwrap();
        let mut sol = file("unbounded");
        sol.certificate = Some(vec![1.0]);
        assert!(check_solution(&data, &sol, 1e-3).unwrap().passed());
    }

    #[test]
    fn soc_distance_cases() {
        let cone = ConeSpec { soc: vec![3], ..Default::default() };
        assert_eq!(distance_to_cone(&[2.0, 1.0, 1.0], &cone), 0.0);
        assert!((distance_to_cone(&[-5.0, 3.0, 4.0], &cone) - 50f64.sqrt()).abs() < 1e-12);
        assert!((distance_to_cone(&[0.0, 3.0, 4.0], &cone) - 5.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn psd_margin_is_min_eigenvalue() {
        let cone = ConeSpec { psd: vec![2], ..Default::default() };
        // [[1, 2], [2, 1]] has eigenvalues 3 and -1.
        let packed = [1.0, 2.0 * std::f64::consts::SQRT_2, 1.0];
        let m = block_margins(&packed, &cone, false);
        assert!((m[0].1 + 1.0).abs() < 1e-12);
        assert!((distance_to_cone(&packed, &cone) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut sol = file("solved");
        sol.x = Some(vec![1.0, 2.0]);
        sol.y = Some(vec![1.0]);
        sol.s = Some(vec![0.0]);
        assert!(matches!(check_solution(&tiny(), &sol, 1e-3), Err(CheckError::Dimension { member: "x", .. })));
        assert!(!check_solution(&tiny(), &file("indeterminate"), 1e-3).unwrap().passed());
    }
}
