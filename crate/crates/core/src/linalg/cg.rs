use super::LinalgError;

#[derive(Debug, Clone)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradient for a symmetric positive definite operator, started
/// from `x0`. Stops once `‖G·x − rhs‖ ≤ tol` or after `max_iter` steps.
pub fn cg_solve<F>(
    mut apply: F,
    rhs: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgResult, LinalgError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = rhs.len();
    if x0.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: x0.len() });
    }
    let mut x = x0.to_vec();
    let mut gp = vec![0.0; n];
    apply(&x, &mut gp);
    let mut r: Vec<f64> = rhs.iter().zip(&gp).map(|(b, g)| b - g).collect();
    let mut rr = dot(&r, &r);
    if !rr.is_finite() {
        return Err(LinalgError::NonFinite("initial residual"));
    }
    let mut p = r.clone();
    let mut iterations = 0;
    while rr.sqrt() > tol && iterations < max_iter {
        apply(&p, &mut gp);
        let pgp = dot(&p, &gp);
        if !pgp.is_finite() {
            return Err(LinalgError::NonFinite("operator application"));
        }
        if pgp <= 0.0 {
            break;
        }
        let alpha = rr / pgp;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * gp[i];
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            return Err(LinalgError::NonFinite("residual"));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        iterations += 1;
    }
    Ok(CgResult { x, iterations, residual_norm: rr.sqrt() })
}
