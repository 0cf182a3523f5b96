//! Cone descriptions and Euclidean projections.
//!
//! A [`ConeSpec`] describes the cone `K` as a Cartesian product of blocks laid
//! out in a fixed order: zero cone, nonnegative orthant, second-order cones,
//! then positive semidefinite cones in packed form. The embedding cone used by
//! the solver is `C = R^n × K* × R_+` with dual `C* = {0}^n × K × R_+`.

mod eig;
mod psd;

pub use eig::{symmetric_eig, SymmetricEigen, EIG_MAX_SWEEPS};
pub use psd::{packed_len, PackedSymmetric};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("invalid cone specification: {0}")]
    InvalidSpec(String),
    #[error("symmetric eigensolver did not converge within {sweeps} sweeps")]
    EigNoConvergence { sweeps: usize },
}

/// Ordered description of a product cone.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSpec {
    /// Number of zero-cone coordinates.
    pub zero: usize,
    /// Number of nonnegative-orthant coordinates.
    pub nonneg: usize,
    /// Total dimension of each second-order cone block, `(t, z)` with `t ≥ ‖z‖`.
    pub soc: Vec<usize>,
    /// Side length of each positive semidefinite block.
    pub psd: Vec<usize>,
}

/// The kind of one contiguous block of a [`ConeSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Zero,
    Nonneg,
    Soc,
    /// Carries the matrix side length.
    Psd(usize),
}

/// A contiguous range of coordinates belonging to one cone block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeBlock {
    pub kind: BlockKind,
    pub offset: usize,
    pub len: usize,
}

impl ConeBlock {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

impl ConeSpec {
    pub fn nonneg(dim: usize) -> Self {
        ConeSpec { nonneg: dim, ..Default::default() }
    }

    pub fn total_dim(&self) -> usize {
        self.zero
            + self.nonneg
            + self.soc.iter().sum::<usize>()
            + self.psd.iter().map(|&s| packed_len(s)).sum::<usize>()
    }

    pub fn validate(&self) -> Result<(), ConeError> {
        if let Some(i) = self.soc.iter().position(|&d| d == 0) {
            return Err(ConeError::InvalidSpec(format!("second-order block {i} has dimension 0")));
        }
        if let Some(i) = self.psd.iter().position(|&s| s == 0) {
            return Err(ConeError::InvalidSpec(format!("semidefinite block {i} has side 0")));
        }
        Ok(())
    }

    /// Blocks in coordinate order. Zero and nonnegative parts are reported as
    /// one block each (omitted when empty).
    pub fn blocks(&self) -> Vec<ConeBlock> {
        let mut out = Vec::with_capacity(2 + self.soc.len() + self.psd.len());
        let mut offset = 0;
        if self.zero > 0 {
            out.push(ConeBlock { kind: BlockKind::Zero, offset, len: self.zero });
            offset += self.zero;
        }
        if self.nonneg > 0 {
            out.push(ConeBlock { kind: BlockKind::Nonneg, offset, len: self.nonneg });
            offset += self.nonneg;
        }
        for &d in &self.soc {
            out.push(ConeBlock { kind: BlockKind::Soc, offset, len: d });
            offset += d;
        }
        for &s in &self.psd {
            let len = packed_len(s);
            out.push(ConeBlock { kind: BlockKind::Psd(s), offset, len });
            offset += len;
        }
        out
    }
}

fn check_input(x: &[f64], expected: usize) -> Result<(), ConeError> {
    if x.len() != expected {
        return Err(ConeError::DimensionMismatch { expected, got: x.len() });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(ConeError::NonFinite(i));
    }
    Ok(())
}

/// Euclidean projection onto `K`.
pub fn project_primal_cone(x: &[f64], spec: &ConeSpec) -> Result<Vec<f64>, ConeError> {
    check_input(x, spec.total_dim())?;
    let mut out = x.to_vec();
    project_primal_in_place(&mut out, spec)?;
    Ok(out)
}

/// Euclidean projection onto `K*`. The zero block dualizes to the free cone;
/// every other block is self-dual.
pub fn project_dual_cone(x: &[f64], spec: &ConeSpec) -> Result<Vec<f64>, ConeError> {
    check_input(x, spec.total_dim())?;
    let mut out = x.to_vec();
    project_dual_in_place(&mut out, spec)?;
    Ok(out)
}

/// Euclidean projection onto `C = R^n × K* × R_+`.
pub fn project_embedding_cone(u: &[f64], n: usize, spec: &ConeSpec) -> Result<Vec<f64>, ConeError> {
    let m = spec.total_dim();
    check_input(u, n + m + 1)?;
    let mut out = u.to_vec();
    project_dual_in_place(&mut out[n..n + m], spec)?;
    out[n + m] = out[n + m].max(0.0);
    Ok(out)
}

pub fn project_primal_in_place(x: &mut [f64], spec: &ConeSpec) -> Result<(), ConeError> {
    for block in spec.blocks() {
        let seg = &mut x[block.range()];
        match block.kind {
            BlockKind::Zero => seg.fill(0.0),
            BlockKind::Nonneg => seg.iter_mut().for_each(|v| *v = v.max(0.0)),
            BlockKind::Soc => project_soc_in_place(seg),
            BlockKind::Psd(side) => psd::project_psd_in_place(seg, side)?,
        }
    }
    Ok(())
}

pub fn project_dual_in_place(x: &mut [f64], spec: &ConeSpec) -> Result<(), ConeError> {
    for block in spec.blocks() {
        let seg = &mut x[block.range()];
        match block.kind {
            BlockKind::Zero => {}
            BlockKind::Nonneg => seg.iter_mut().for_each(|v| *v = v.max(0.0)),
            BlockKind::Soc => project_soc_in_place(seg),
            BlockKind::Psd(side) => psd::project_psd_in_place(seg, side)?,
        }
    }
    Ok(())
}

/// Moreau split of `t` with respect to `K*`: writes `Π_{K*}(t)` into `pos` and
/// `Π_K(−t)` into `neg`, so that `t = pos − neg` and `pos ⟂ neg`.
///
/// Both halves come from the same decomposition of each block, which keeps
/// them orthogonal to rounding rather than to the accuracy of a subtraction.
pub fn moreau_split_dual(
    t: &[f64],
    pos: &mut [f64],
    neg: &mut [f64],
    spec: &ConeSpec,
) -> Result<(), ConeError> {
    for block in spec.blocks() {
        let r = block.range();
        let (tb, pb, nb) = (&t[r.clone()], &mut pos[r.clone()], &mut neg[r]);
        match block.kind {
            // K* is free on the zero block; K is {0}.
            BlockKind::Zero => {
                pb.copy_from_slice(tb);
                nb.fill(0.0);
            }
            BlockKind::Nonneg => {
                for ((p, q), &v) in pb.iter_mut().zip(nb.iter_mut()).zip(tb) {
                    *p = v.max(0.0);
                    *q = (-v).max(0.0);
                }
            }
            BlockKind::Soc => soc_split(tb, pb, nb),
            BlockKind::Psd(side) => psd::psd_split(tb, pb, nb, side)?,
        }
    }
    Ok(())
}

/// Projection of `(t, z)` onto the second-order cone `{‖z‖ ≤ t}`.
pub fn project_soc_in_place(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let t = x[0];
    let nz = norm(&x[1..]);
    if nz <= -t {
        x.fill(0.0);
    } else if nz <= t {
        // already inside
    } else {
        let a = (nz + t) / 2.0;
        x[0] = a;
        let f = a / nz;
        x[1..].iter_mut().for_each(|v| *v *= f);
    }
}

fn soc_split(x: &[f64], pos: &mut [f64], neg: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let t = x[0];
    let nz = norm(&x[1..]);
    if nz <= -t {
        pos.fill(0.0);
        neg.iter_mut().zip(x).for_each(|(q, &v)| *q = -v);
    } else if nz <= t {
        pos.copy_from_slice(x);
        neg.fill(0.0);
    } else {
        // x = a(1, ẑ) − b(1, −ẑ) with a = (‖z‖+t)/2, b = (‖z‖−t)/2.
        let a = (nz + t) / 2.0;
        let b = (nz - t) / 2.0;
        pos[0] = a;
        neg[0] = b;
        for i in 1..x.len() {
            let zi = x[i] / nz;
            pos[i] = a * zi;
            neg[i] = -b * zi;
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    // Scaled accumulation avoids overflow for large entries.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}
