//! KKT assembly and a permuted sparse `LDLᵀ` factorization.
//!
//! The factorization follows the classic up-looking scheme: an elimination
//! tree pass computes column counts of `L`, then each row of `L` is obtained
//! by a sparse triangular solve whose pattern is read off the tree.

use super::{LinalgError, SparseMatrix};

/// Fill-reducing ordering applied before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    /// Approximate minimum degree.
    #[default]
    Amd,
}

/// Assembles the symmetric quasi-definite matrix `[[I, Aᵀ], [A, −I]]`, both
/// triangles stored.
pub fn build_kkt(a: &SparseMatrix) -> SparseMatrix {
    let (m, n) = (a.nrows(), a.ncols());
    let at = a.transpose();
    let dim = n + m;
    let mut colptr = Vec::with_capacity(dim + 1);
    let mut rowidx = Vec::with_capacity(dim + 2 * a.nnz());
    let mut vals = Vec::with_capacity(dim + 2 * a.nnz());
    colptr.push(0);
    for j in 0..n {
        rowidx.push(j);
        vals.push(1.0);
        let (rows, v) = a.col(j);
        rowidx.extend(rows.iter().map(|&i| n + i));
        vals.extend_from_slice(v);
        colptr.push(rowidx.len());
    }
    for i in 0..m {
        let (cols, v) = at.col(i);
        rowidx.extend_from_slice(cols);
        vals.extend_from_slice(v);
        rowidx.push(n + i);
        vals.push(-1.0);
        colptr.push(rowidx.len());
    }
    SparseMatrix::new(dim, dim, colptr, rowidx, vals).expect("KKT assembly preserves CSC invariants")
}

/// `P·M·Pᵀ = L·diag(d)·Lᵀ` with `L` unit lower triangular.
#[derive(Debug, Clone)]
pub struct LdlFactorization {
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    /// Strictly lower triangle of `L`; the unit diagonal is implicit.
    l: SparseMatrix,
    d: Vec<f64>,
}

impl LdlFactorization {
    pub fn dim(&self) -> usize {
        self.d.len()
    }
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }
    pub fn l_strict(&self) -> &SparseMatrix {
        &self.l
    }
    pub fn d(&self) -> &[f64] {
        &self.d
    }
    pub fn l_nnz(&self) -> usize {
        self.l.nnz()
    }

    /// Dense column-major `L` including its unit diagonal.
    pub fn l_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = self.l.to_dense();
        for i in 0..n {
            out[i + i * n] = 1.0;
        }
        out
    }

    pub fn solve(&self, w: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if w.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch { expected: self.dim(), got: w.len() });
        }
        let mut out = w.to_vec();
        let mut work = vec![0.0; self.dim()];
        self.solve_in_place(&mut out, &mut work);
        Ok(out)
    }

    /// Overwrites `rhs` with `M⁻¹·rhs`. `work` must have length `dim()`.
    pub fn solve_in_place(&self, rhs: &mut [f64], work: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(rhs.len(), n);
        for k in 0..n {
            work[k] = rhs[self.perm[k]];
        }
        let (lp, li, lx) = (self.l.colptr(), self.l.rowidx(), self.l.vals());
        for j in 0..n {
            let xj = work[j];
            if xj != 0.0 {
                for p in lp[j]..lp[j + 1] {
                    work[li[p]] -= lx[p] * xj;
                }
            }
        }
        for j in 0..n {
            work[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut acc = work[j];
            for p in lp[j]..lp[j + 1] {
                acc -= lx[p] * work[li[p]];
            }
            work[j] = acc;
        }
        for k in 0..n {
            rhs[self.perm[k]] = work[k];
        }
    }
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn ldl_solve(factor: &LdlFactorization, w: &[f64]) -> Result<Vec<f64>, LinalgError> {
    factor.solve(w)
}

fn compute_ordering(m: &SparseMatrix, ordering: Ordering) -> Result<Vec<usize>, LinalgError> {
    let n = m.ncols();
    match ordering {
        Ordering::Natural => Ok((0..n).collect()),
        Ordering::Amd => {
            if n == 0 {
                return Ok(vec![]);
            }
            let control = amd::Control::default();
            match amd::order::<usize>(n, m.colptr(), m.rowidx(), &control) {
                Ok((p, _pinv, _info)) => Ok(p),
                Err(status) => Err(LinalgError::Ordering(format!("{status:?}"))),
            }
        }
    }
}

/// Factors a symmetric matrix (both triangles stored) as `P·M·Pᵀ = L·D·Lᵀ`.
///
/// Quasi-definite input admits this factorization under any symmetric
/// permutation; a zero pivot therefore signals malformed input.
pub fn ldl_factor(m: &SparseMatrix, ordering: Ordering) -> Result<LdlFactorization, LinalgError> {
    let n = m.ncols();
    if m.nrows() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: m.nrows() });
    }
    let perm = compute_ordering(m, ordering)?;
    let mut pinv = vec![0usize; n];
    for (k, &i) in perm.iter().enumerate() {
        pinv[i] = k;
    }

    // Upper triangle of the permuted matrix.
    let mut trip = Vec::with_capacity(m.nnz() / 2 + n);
    for j in 0..n {
        let (rows, vals) = m.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            let (ni, nj) = (pinv[i], pinv[j]);
            if ni <= nj {
                trip.push((ni, nj, v));
            }
        }
    }
    let c = SparseMatrix::from_triplets(n, n, &trip)?;
    let (cp, ci, cx) = (c.colptr(), c.rowidx(), c.vals());

    // Symbolic: elimination tree and column counts.
    const NONE: usize = usize::MAX;
    let mut parent = vec![NONE; n];
    let mut flag = vec![0usize; n];
    let mut lnz = vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for p in cp[k]..cp[k + 1] {
            let mut i = ci[p];
            if i < k {
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    let total = lp[n];

    // Numeric: one row of L per step.
    let mut li = vec![0usize; total];
    let mut lx = vec![0.0; total];
    let mut d = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut pattern = vec![0usize; n];
    lnz.iter_mut().for_each(|c| *c = 0);
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        for p in cp[k]..cp[k + 1] {
            let mut i = ci[p];
            y[i] += cx[p];
            let mut len = 0;
            while flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                pattern[top] = pattern[len];
            }
        }
        d[k] = y[k];
        y[k] = 0.0;
        while top < n {
            let i = pattern[top];
            let yi = y[i];
            y[i] = 0.0;
            let p2 = lp[i] + lnz[i];
            for p in lp[i]..p2 {
                y[li[p]] -= lx[p] * yi;
            }
            let lki = yi / d[i];
            d[k] -= lki * yi;
            li[p2] = k;
            lx[p2] = lki;
            lnz[i] += 1;
            top += 1;
        }
        if d[k] == 0.0 || !d[k].is_finite() {
            return Err(LinalgError::ZeroPivot(k));
        }
    }
    let l = SparseMatrix::new(n, n, lp, li, lx)?;
    Ok(LdlFactorization { perm, l, d })
}
