//! Extremal eigenvalues of nested Gram sections — the Riesz bounds A_n,
//! B_n — and detection of the spectral-gap structure σ(G) ≈ {0} ∪ [A, B].
//!
//! The headline phenomenon lives here: the smallest eigenvalue of the
//! section sinking through the double-precision floor ε_mach·N·b_n. A
//! value below the floor is flagged, never clamped.

use crate::gram::GramSection;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("eigensolver did not converge within {max_iter} iterations (N = {size})")]
    NoConvergence { size: usize, max_iter: usize },
    #[error("section is empty")]
    Empty,
}

/// Default spectral-gap threshold as a fraction of b_n.
pub const DEFAULT_GAP_THRESHOLD_FACTOR: f64 = 1e-4;

fn max_iterations(n: usize) -> usize {
    10_000 + 200 * n
}

/// All eigenvalues of a Hermitian matrix, ascending, by Householder
/// tridiagonalization plus implicitly shifted QR.
pub fn eigs_hermitian_matrix(m: &DMatrix<Complex64>) -> Result<Vec<f64>, SpectrumError> {
    let n = m.nrows();
    if n == 0 {
        return Err(SpectrumError::Empty);
    }
    let max_iter = max_iterations(n);
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter).ok_or(
        SpectrumError::NoConvergence {
            size: n,
            max_iter,
        },
    )?;
    let mut eigs: Vec<f64> = se.eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Eigenvalues (ascending) and matching eigenvector columns.
pub fn eigs_hermitian_with_vectors(
    m: &DMatrix<Complex64>,
) -> Result<(Vec<f64>, DMatrix<Complex64>), SpectrumError> {
    let n = m.nrows();
    if n == 0 {
        return Err(SpectrumError::Empty);
    }
    let max_iter = max_iterations(n);
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter).ok_or(
        SpectrumError::NoConvergence {
            size: n,
            max_iter,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let eigs: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    Ok((eigs, vectors))
}

/// Eigenvalues of a full Gram section, ascending.
pub fn eigs_hermitian(g: &GramSection) -> Result<Vec<f64>, SpectrumError> {
    eigs_hermitian_matrix(g.matrix())
}

/// Riesz bounds of one finite section: a_n = λ_min, b_n = λ_max of the
/// Gram, with the numerical-zero floor ε_mach·N·b_n.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RieszBounds {
    pub radius: f64,
    pub size: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub floor: f64,
    pub below_floor: bool,
}

impl RieszBounds {
    fn from_eigs(radius: f64, eigs: &[f64]) -> Self {
        let size = eigs.len();
        let a_n = eigs[0];
        let b_n = eigs[size - 1];
        let floor = f64::EPSILON * size as f64 * b_n;
        RieszBounds {
            radius,
            size,
            a_n,
            b_n,
            floor,
            below_floor: a_n < floor,
        }
    }
}

/// Riesz bounds of the nested sub-sections of `gram` at the given ascending
/// radii. Each radius selects a leading principal submatrix; the
/// eigensolves run in parallel and are collected in radius order.
pub fn riesz_sweep(gram: &GramSection, radii: &[f64]) -> Result<Vec<RieszBounds>, SpectrumError> {
    assert!(
        radii.windows(2).all(|w| w[0] <= w[1]),
        "radii must be ascending"
    );
    let results: Result<Vec<RieszBounds>, SpectrumError> = radii
        .par_iter()
        .map(|&r| {
            let (m, sub) = gram.leading_section(r);
            if m == 0 {
                return Err(SpectrumError::Empty);
            }
            let eigs = eigs_hermitian_matrix(&sub)?;
            Ok(RieszBounds::from_eigs(r, &eigs))
        })
        .collect();
    results
}

/// Spectral partition of a sorted eigenvalue list at `threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub eigenvalues: Vec<f64>,
    pub threshold: f64,
    /// Eigenvalues below the threshold (the near-kernel cluster).
    pub cluster_zero: Vec<f64>,
    /// [Â, B̂] of the remaining eigenvalues, when any remain.
    pub band: Option<(f64, f64)>,
    /// True when a nonempty zero cluster is separated from the band by a
    /// full decade: Â ≥ 10·threshold.
    pub gap_found: bool,
}

/// Partitions the spectrum at `gap_threshold`. `gap_found` demands a
/// nonempty sub-threshold cluster and a band starting a decade above the
/// threshold; sections at the critical density have an empty cluster and
/// report no gap.
pub fn detect_gap(eigs: &[f64], gap_threshold: f64) -> GapReport {
    assert!(
        eigs.windows(2).all(|w| w[0] <= w[1]),
        "eigenvalues must be sorted ascending"
    );
    let split = eigs.partition_point(|&e| e < gap_threshold);
    let cluster_zero = eigs[..split].to_vec();
    let band = if split < eigs.len() {
        Some((eigs[split], eigs[eigs.len() - 1]))
    } else {
        None
    };
    let gap_found = !cluster_zero.is_empty()
        && band.is_some_and(|(a_hat, _)| a_hat >= 10.0 * gap_threshold);
    GapReport {
        eigenvalues: eigs.to_vec(),
        threshold: gap_threshold,
        cluster_zero,
        band,
        gap_found,
    }
}
