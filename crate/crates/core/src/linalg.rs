//! Dense absorbing-chain solves.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Solves `(I - Q) X = R` for the absorption matrix of a transient block.
pub fn absorption(q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    if q.ncols() != n || r.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: r.nrows() });
    }
    let a = DMatrix::<f64>::identity(n, n) - q;
    a.lu()
        .solve(r)
        .ok_or_else(|| Error::SingularSolve(format!("transient block of size {n} is singular")))
}

/// Probability of ever reaching a `target` state for a sub-stochastic chain.
///
/// `rows[i]` lists transitions `(j, p)`; mass missing from a row is absorbed
/// (lost). Target states get value 1.
pub fn hitting_probabilities(rows: &[Vec<(usize, f64)>], target: &[bool]) -> Result<Vec<f64>> {
    let n = rows.len();
    if target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target.len() });
    }
    let free: Vec<usize> = (0..n).filter(|&i| !target[i]).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        local[i] = k;
    }
    let m = free.len();
    let mut q = DMatrix::<f64>::zeros(m, m);
    let mut r = DMatrix::<f64>::zeros(m, 1);
    for (k, &i) in free.iter().enumerate() {
        for &(j, p) in &rows[i] {
            if target[j] {
                r[(k, 0)] += p;
            } else {
                q[(k, local[j])] += p;
            }
        }
    }
    let h = absorption(&q, &r)?;
    Ok((0..n).map(|i| if target[i] { 1.0 } else { h[(local[i], 0)] }).collect())
}
