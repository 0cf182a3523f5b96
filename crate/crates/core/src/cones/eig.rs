//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use super::ConeError;

/// Maximum number of full sweeps before giving up.
pub const EIG_MAX_SWEEPS: usize = 100;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this fraction
/// of the matrix Frobenius norm.
const OFF_DIAG_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, in no particular order.
    pub values: Vec<f64>,
    /// Column-major `side × side` matrix whose column `k` is the unit
    /// eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        let n = self.values.len();
        &self.vectors[k * n..(k + 1) * n]
    }
}

/// Eigendecomposition `M = V·diag(λ)·Vᵀ` of a dense column-major symmetric
/// matrix. The input is symmetrized as `(M + Mᵀ)/2` first.
pub fn symmetric_eig(m: &[f64], side: usize) -> Result<SymmetricEigen, ConeError> {
    let n = side;
    if m.len() != n * n {
        return Err(ConeError::DimensionMismatch { expected: n * n, got: m.len() });
    }
    if let Some(i) = m.iter().position(|v| !v.is_finite()) {
        return Err(ConeError::NonFinite(i));
    }
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            a[i + j * n] = 0.5 * (m[i + j * n] + m[j + i * n]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i + i * n] = 1.0;
    }

    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = OFF_DIAG_REL_TOL * fro;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..j {
                s += 2.0 * a[i + j * n] * a[i + j * n];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > tol {
        if sweeps == EIG_MAX_SWEEPS {
            return Err(ConeError::EigNoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p + q * n];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p + p * n];
                let aqq = a[q + q * n];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r + p * n];
                    let arq = a[r + q * n];
                    let nrp = c * arp - s * arq;
                    let nrq = s * arp + c * arq;
                    a[r + p * n] = nrp;
                    a[p + r * n] = nrp;
                    a[r + q * n] = nrq;
                    a[q + r * n] = nrq;
                }
                a[p + p * n] = app - t * apq;
                a[q + q * n] = aqq + t * apq;
                a[p + q * n] = 0.0;
                a[q + p * n] = 0.0;

                let (vp, vq) = (p * n, q * n);
                for r in 0..n {
                    let x = v[r + vp];
                    let y = v[r + vq];
                    v[r + vp] = c * x - s * y;
                    v[r + vq] = s * x + c * y;
                }
            }
        }
    }

    let values = (0..n).map(|i| a[i + i * n]).collect();
    Ok(SymmetricEigen { values, vectors: v })
}
