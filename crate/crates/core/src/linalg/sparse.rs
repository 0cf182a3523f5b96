use super::LinalgError;

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSC arrays, checking every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        colptr: Vec<usize>,
        rowidx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        let bad = |msg: String| Err(LinalgError::InvalidMatrix(msg));
        if colptr.len() != ncols + 1 {
            return bad(format!("colptr has length {}, expected {}", colptr.len(), ncols + 1));
        }
        if colptr[0] != 0 {
            return bad("colptr[0] must be 0".into());
        }
        if colptr.windows(2).any(|w| w[0] > w[1]) {
            return bad("colptr must be nondecreasing".into());
        }
        let nnz = colptr[ncols];
        if rowidx.len() != nnz || vals.len() != nnz {
            return bad(format!(
                "colptr[ncols] = {nnz} but rowidx has {} and vals has {} entries",
                rowidx.len(),
                vals.len()
            ));
        }
        for j in 0..ncols {
            let col = &rowidx[colptr[j]..colptr[j + 1]];
            if col.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row indices in column {j} are not strictly increasing"));
            }
            if let Some(&r) = col.last() {
                if r >= nrows {
                    return bad(format!("row index {r} out of range in column {j}"));
                }
            }
        }
        if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
            return bad(format!("non-finite value at position {k}"));
        }
        Ok(SparseMatrix { nrows, ncols, colptr, rowidx, vals })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, colptr: vec![0; ncols + 1], rowidx: vec![], vals: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowidx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Assembles a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        let mut counts = vec![0usize; ncols + 1];
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(LinalgError::InvalidMatrix(format!(
                    "triplet ({i}, {j}) outside a {nrows}x{ncols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(LinalgError::InvalidMatrix(format!("non-finite triplet at ({i}, {j})")));
            }
            counts[j + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            rows[next[j]] = i;
            vals[next[j]] = v;
            next[j] += 1;
        }
        // Sort each column and merge duplicates.
        let mut colptr = vec![0usize; ncols + 1];
        let mut out_rows = Vec::with_capacity(rows.len());
        let mut out_vals = Vec::with_capacity(rows.len());
        let mut order: Vec<usize> = Vec::new();
        for j in 0..ncols {
            let (lo, hi) = (counts[j], counts[j + 1]);
            order.clear();
            order.extend(lo..hi);
            order.sort_by_key(|&k| rows[k]);
            for &k in &order {
                if out_rows.len() > colptr[j] && *out_rows.last().unwrap() == rows[k] {
                    *out_vals.last_mut().unwrap() += vals[k];
                } else {
                    out_rows.push(rows[k]);
                    out_vals.push(vals[k]);
                }
            }
            colptr[j + 1] = out_rows.len();
        }
        Ok(SparseMatrix { nrows, ncols, colptr, rowidx: out_rows, vals: out_vals })
    }

    /// Column-major dense input; exact zeros are dropped.
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[f64]) -> Result<Self, LinalgError> {
        if dense.len() != nrows * ncols {
            return Err(LinalgError::DimensionMismatch { expected: nrows * ncols, got: dense.len() });
        }
        let mut trip = Vec::new();
        for j in 0..ncols {
            for i in 0..nrows {
                let v = dense[i + j * nrows];
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }
    pub fn rowidx(&self) -> &[usize] {
        &self.rowidx
    }
    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.colptr[j]..self.colptr[j + 1];
        (&self.rowidx[r.clone()], &self.vals[r])
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.ncols {
            return Err(LinalgError::DimensionMismatch { expected: self.ncols, got: x.len() });
        }
        let mut y = vec![0.0; self.nrows];
        self.mul_add(x, &mut y);
        Ok(y)
    }

    pub fn spmv_t(&self, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if y.len() != self.nrows {
            return Err(LinalgError::DimensionMismatch { expected: self.nrows, got: y.len() });
        }
        let mut x = vec![0.0; self.ncols];
        self.mul_t_add(y, &mut x);
        Ok(x)
    }

    /// `out += A·x`.
    pub fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for k in self.colptr[j]..self.colptr[j + 1] {
                out[self.rowidx[k]] += self.vals[k] * xj;
            }
        }
    }

    /// `out += Aᵀ·y`.
    pub fn mul_t_add(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.nrows);
        debug_assert_eq!(out.len(), self.ncols);
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.colptr[j]..self.colptr[j + 1] {
                acc += self.vals[k] * y[self.rowidx[k]];
            }
            *o += acc;
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.rowidx {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut rowidx = vec![0; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            for k in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowidx[k];
                rowidx[next[i]] = j;
                vals[next[i]] = self.vals[k];
                next[i] += 1;
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, colptr: counts, rowidx, vals }
    }

    /// Column-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for j in 0..self.ncols {
            for k in self.colptr[j]..self.colptr[j + 1] {
                d[self.rowidx[k] + j * self.nrows] += self.vals[k];
            }
        }
        d
    }

    /// Replaces `A` by `diag(row)·A·diag(col)`.
    pub fn scale(&mut self, row: &[f64], col: &[f64]) {
        for j in 0..self.ncols {
            for k in self.colptr[j]..self.colptr[j + 1] {
                self.vals[k] *= row[self.rowidx[k]] * col[j];
            }
        }
    }

    pub fn col_norms(&self) -> Vec<f64> {
        (0..self.ncols)
            .map(|j| self.col(j).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.nrows];
        for (&i, &v) in self.rowidx.iter().zip(&self.vals) {
            sq[i] += v * v;
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_product() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        assert_eq!(a.spmv(&[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert_eq!(a.spmv_t(&[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
    }

    #[test]
    fn empty_matrix_gives_zero() {
        let a = SparseMatrix::zeros(3, 2);
        assert_eq!(a.spmv(&[1.0, -1.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(a.spmv_t(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 2]);
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = SparseMatrix::from_triplets(3, 1, &[(2, 0, 1.0), (0, 0, 2.0), (2, 0, 0.5)]).unwrap();
        assert_eq!(a.rowidx(), &[0, 2]);
        assert_eq!(a.vals(), &[2.0, 1.5]);
    }

    #[test]
    fn invalid_structure_is_rejected() {
        assert!(SparseMatrix::new(2, 1, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::new(2, 1, vec![0, 1], vec![2], vec![1.0]).is_err());
        assert!(SparseMatrix::new(2, 1, vec![1, 1], vec![], vec![]).is_err());
        assert!(SparseMatrix::new(2, 1, vec![0, 1], vec![0], vec![f64::INFINITY]).is_err());
        assert!(SparseMatrix::new(2, 1, vec![0, 1], vec![0], vec![0.0]).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseMatrix::zeros(3, 2);
        assert!(matches!(a.spmv(&[1.0]), Err(LinalgError::DimensionMismatch { expected: 2, got: 1 })));
        assert!(a.spmv_t(&[1.0]).is_err());
    }

    #[test]
    fn transpose_matches_dense() {
        let a = SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (2, 0, -2.0), (1, 1, 3.0)]).unwrap();
        let t = a.transpose();
        let (d, dt) = (a.to_dense(), t.to_dense());
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(d[i + 3 * j], dt[j + 2 * i]);
            }
        }
    }
}
