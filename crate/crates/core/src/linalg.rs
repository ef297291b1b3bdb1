//! Dense Hermitian eigensolves for small registers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance on `||H - H^dagger||` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Largest absolute deviation from Hermiticity.
pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and matching unit eigenvectors as columns.
pub fn eigh(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    if !m.is_square() {
        return Err(Error::InvalidParameter(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().map(|a| a.norm()).fold(1.0f64, f64::max);
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian(defect));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    Ok(eigh(m)?.0)
}

/// A degenerate group of eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: usize,
}

/// Groups ascending eigenvalues whose neighbours differ by at most `tol`.
pub fn group_levels(sorted: &[f64], tol: f64) -> Vec<Level> {
    let mut levels: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &e in sorted {
        match levels.last_mut() {
            Some((sum, count)) if e - last <= tol => {
                *sum += e;
                *count += 1;
            }
            _ => levels.push((e, 1)),
        }
        last = e;
    }
    levels
        .into_iter()
        .map(|(sum, count)| Level {
            energy: sum / count as f64,
            multiplicity: count,
        })
        .collect()
}
