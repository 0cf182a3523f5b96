//! Packed storage for symmetric matrices and the PSD cone projection.
//!
//! A symmetric `side × side` matrix is stored as its lower triangle in
//! column-major order with every off-diagonal entry multiplied by `√2`. Under
//! this packing the Euclidean inner product of two vectors equals the trace
//! inner product of the matrices they represent, so the packed PSD cone is
//! self-dual with respect to the ordinary dot product.

use super::eig::symmetric_eig;
use super::ConeError;

/// Number of packed entries for a symmetric matrix of the given side.
pub const fn packed_len(side: usize) -> usize {
    side * (side + 1) / 2
}

#[inline]
fn packed_index(side: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j);
    j * side - j * j.saturating_sub(1) / 2 + (i - j)
}

/// A symmetric matrix in `√2`-scaled packed lower-triangular form.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSymmetric {
    side: usize,
    data: Vec<f64>,
}

impl PackedSymmetric {
    pub fn new(side: usize, data: Vec<f64>) -> Result<Self, ConeError> {
        if data.len() != packed_len(side) {
            return Err(ConeError::DimensionMismatch { expected: packed_len(side), got: data.len() });
        }
        Ok(PackedSymmetric { side, data })
    }

    /// Packs a dense column-major matrix. Only the lower triangle is read.
    pub fn from_dense(side: usize, dense: &[f64]) -> Result<Self, ConeError> {
        if dense.len() != side * side {
            return Err(ConeError::DimensionMismatch { expected: side * side, got: dense.len() });
        }
        let mut data = vec![0.0; packed_len(side)];
        pack_into(side, dense, &mut data);
        Ok(PackedSymmetric { side, data })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Dense column-major matrix with both triangles filled.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.side * self.side];
        unpack_into(self.side, &self.data, &mut m);
        m
    }

    pub fn dot(&self, other: &PackedSymmetric) -> f64 {
        assert_eq!(self.side, other.side, "packed matrices of different sides");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Position of entry `(i, j)` in the packed vector, for either triangle.
    pub fn index(side: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        packed_index(side, i, j)
    }
}

pub(crate) fn unpack_into(side: usize, packed: &[f64], dense: &mut [f64]) {
    let mut k = 0;
    for j in 0..side {
        dense[j + j * side] = packed[k];
        k += 1;
        for i in j + 1..side {
            let v = packed[k] * std::f64::consts::FRAC_1_SQRT_2;
            dense[i + j * side] = v;
            dense[j + i * side] = v;
            k += 1;
        }
    }
}

pub(crate) fn pack_into(side: usize, dense: &[f64], packed: &mut [f64]) {
    let mut k = 0;
    for j in 0..side {
        packed[k] = dense[j + j * side];
        k += 1;
        for i in j + 1..side {
            packed[k] = dense[i + j * side] * std::f64::consts::SQRT_2;
            k += 1;
        }
    }
}

/// Dense copy of a packed block; symmetric by construction.
fn unpack_symmetrized(side: usize, packed: &[f64]) -> Vec<f64> {
    let mut dense = vec![0.0; side * side];
    unpack_into(side, packed, &mut dense);
    dense
}

/// Rebuilds `Σ f(λ_k) v_k v_kᵀ` in packed form, summing only the requested
/// sign of eigenvalues.
fn rebuild(side: usize, vals: &[f64], vecs: &[f64], keep_positive: bool, out: &mut [f64]) {
    let mut dense = vec![0.0; side * side];
    for (k, &lam) in vals.iter().enumerate() {
        let w = if keep_positive { lam.max(0.0) } else { (-lam).max(0.0) };
        if w == 0.0 {
            continue;
        }
        let v = &vecs[k * side..(k + 1) * side];
        for j in 0..side {
            let wj = w * v[j];
            for i in j..side {
                dense[i + j * side] += wj * v[i];
            }
        }
    }
    pack_into(side, &dense, out);
}

pub(crate) fn project_psd_in_place(x: &mut [f64], side: usize) -> Result<(), ConeError> {
    if side == 1 {
        x[0] = x[0].max(0.0);
        return Ok(());
    }
    let dense = unpack_symmetrized(side, x);
    let eig = symmetric_eig(&dense, side)?;
    if eig.values.iter().all(|&l| l >= 0.0) {
        return Ok(());
    }
    rebuild(side, &eig.values, &eig.vectors, true, x);
    Ok(())
}

/// Writes the PSD part of `x` into `pos` and the PSD part of `−x` into `neg`.
pub(crate) fn psd_split(x: &[f64], pos: &mut [f64], neg: &mut [f64], side: usize) -> Result<(), ConeError> {
    if side == 1 {
        pos[0] = x[0].max(0.0);
        neg[0] = (-x[0]).max(0.0);
        return Ok(());
    }
    let dense = unpack_symmetrized(side, x);
    let eig = symmetric_eig(&dense, side)?;
    if eig.values.iter().all(|&l| l >= 0.0) {
        pos.copy_from_slice(x);
        neg.fill(0.0);
    } else if eig.values.iter().all(|&l| l <= 0.0) {
        pos.fill(0.0);
        neg.iter_mut().zip(x).for_each(|(q, &v)| *q = -v);
    } else {
        rebuild(side, &eig.values, &eig.vectors, true, pos);
        rebuild(side, &eig.values, &eig.vectors, false, neg);
    }
    Ok(())
}
