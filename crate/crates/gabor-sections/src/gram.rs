//! The Gram matrix of a finite Gabor section and its off-diagonal-decay
//! diagnostics.
//!
//! Entries are G_{λμ} = ⟨π(μ)g, π(λ)g⟩ = e^{2πi λ₁·(μ₂-λ₂)} conj(A_g(μ-λ)).
//! The phase factor follows from the commutation T_x M_ξ = e^{-2πi x·ξ} M_ξ T_x
//! and is gated by a direct-quadrature oracle test rather than trusted.

use crate::pointset::PointSet;
use crate::tf::TfPoint;
use crate::weight::WeightSpec;
use crate::window::{WindowError, WindowSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("window: {0}")]
    Window(#[from] WindowError),
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("window dimension {window} does not match point set dimension {points}")]
    DimensionMismatch { window: usize, points: usize },
    #[error("matrix is not Hermitian: defect {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("diagonal entry {value} differs from ‖g‖₂² = {expected}")]
    BadDiagonal { value: f64, expected: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Entries with modulus below this are stored as exact zero; subnormal
/// noise pollutes the eigenvalue routines.
const ENTRY_ZERO_FLOOR: f64 = 1e-300;

/// Hermitian Gram matrix of a finite section, in the canonical point order
/// of its [`PointSet`]. Sub-radius sections are leading principal
/// submatrices.
#[derive(Debug, Clone)]
pub struct GramSection {
    entries: DMatrix<Complex64>,
    pointset: PointSet,
    norm_sq: f64,
}

/// Assembles the Gram matrix of {π(λ)g : λ ∈ ps}. The upper triangle is
/// computed (rows in parallel) and mirrored, so Hermitian symmetry is exact.
pub fn assemble_gram(w: &WindowSpec, ps: &PointSet) -> Result<GramSection, GramError> {
    if ps.is_empty() {
        return Err(GramError::EmptyPointSet);
    }
    if w.dim() != ps.dim() {
        return Err(GramError::DimensionMismatch {
            window: w.dim(),
            points: ps.dim(),
        });
    }
    let n = ps.len();
    let rows: Result<Vec<Vec<Complex64>>, GramError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lam = ps.point(i);
            ((i + 1)..n)
                .map(|j| gram_entry(w, lam, ps.point(j)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(GramError::from)
        })
        .collect();
    let rows = rows?;

    let diag = Complex64::new(w.norm_sq(), 0.0);
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        entries[(i, i)] = diag;
        for (off, &val) in rows[i].iter().enumerate() {
            let j = i + 1 + off;
            entries[(i, j)] = val;
            entries[(j, i)] = val.conj();
        }
    }
    Ok(GramSection {
        entries,
        pointset: ps.clone(),
        norm_sq: w.norm_sq(),
    })
}

fn gram_entry(w: &WindowSpec, lam: &TfPoint, mu: &TfPoint) -> Result<Complex64, WindowError> {
    let offset = mu.sub(lam);
    let amb = w.ambiguity(&offset)?;
    let phase: f64 = lam
        .x
        .iter()
        .zip(mu.xi.iter().zip(&lam.xi))
        .map(|(x, (m2, l2))| x * (m2 - l2))
        .sum();
    let val = Complex64::from_polar(1.0, 2.0 * PI * phase) * amb.conj();
    if val.norm() < ENTRY_ZERO_FLOOR {
        Ok(Complex64::new(0.0, 0.0))
    } else {
        Ok(val)
    }
}

impl GramSection {
    /// Wraps an explicit Hermitian matrix (synthetic sections for tests and
    /// the lemma harness). Requires exact dimensions, Hermitian symmetry to
    /// 1e-12·max|G| and a constant diagonal equal to `norm_sq` to 1e-10.
    pub fn from_parts(
        entries: DMatrix<Complex64>,
        pointset: PointSet,
        norm_sq: f64,
    ) -> Result<Self, GramError> {
        let n = pointset.len();
        assert_eq!(entries.nrows(), n);
        assert_eq!(entries.ncols(), n);
        let scale = entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if defect > 1e-12 * scale.max(1e-300) {
            return Err(GramError::NotHermitian { defect });
        }
        for i in 0..n {
            let d = entries[(i, i)];
            if (d.re - norm_sq).abs() > 1e-10 || d.im.abs() > 1e-12 {
                return Err(GramError::BadDiagonal {
                    value: d.re,
                    expected: norm_sq,
                });
            }
        }
        Ok(Self {
            entries,
            pointset,
            norm_sq,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn pointset(&self) -> &PointSet {
        &self.pointset
    }

    pub fn len(&self) -> usize {
        self.pointset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pointset.is_empty()
    }

    /// ‖g‖₂², the common diagonal entry.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// The leading principal submatrix holding the points with |λ| ≤ r.
    pub fn leading_section(&self, r: f64) -> (usize, DMatrix<Complex64>) {
        let m = self.pointset.prefix_len(r);
        (m, self.entries.view((0, 0), (m, m)).into_owned())
    }

    /// sup |G_{λμ}| v(λ-μ), the C_v^∞ norm of the section. Computed in log
    /// space, so a weight overflow surfaces as +∞ rather than garbage.
    pub fn cv_infty_norm(&self, v: &WeightSpec) -> f64 {
        let n = self.len();
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            for j in 0..n {
                let a = self.entries[(i, j)].norm();
                if a == 0.0 {
                    continue;
                }
                let log_term =
                    a.ln() + v.log_eval_radial(self.pointset.point(j).sub(self.pointset.point(i)).norm());
                if log_term > best {
                    best = log_term;
                }
            }
        }
        if best > crate::weight::OVERFLOW_EXPONENT {
            f64::INFINITY
        } else {
            best.exp()
        }
    }

    /// Bins entries by the integer cube containing λ-μ and keeps the
    /// largest modulus per cube: the convolution-dominating envelope Θ.
    pub fn envelope_extract(&self) -> EnvelopeProfile {
        let n = self.len();
        let mut bins: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                let diff = self.pointset.point(i).sub(self.pointset.point(j));
                let key: Vec<i64> = diff
                    .x
                    .iter()
                    .chain(diff.xi.iter())
                    .map(|&c| c.floor() as i64)
                    .collect();
                let a = self.entries[(i, j)].norm();
                let slot = bins.entry(key).or_insert(0.0);
                if a > *slot {
                    *slot = a;
                }
            }
        }
        let (offsets, values) = bins.into_iter().unzip();
        EnvelopeProfile { offsets, values }
    }

    /// CSV dump: one `row,col,re,im` line per entry.
    pub fn write_matrix_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "row,col,re,im")?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let e = self.entries[(i, j)];
                writeln!(out, "{i},{j},{},{}", e.re, e.im)?;
            }
        }
        Ok(())
    }
}

/// Envelope profile Θ(k) = max |G_{λμ}| over λ-μ ∈ k+[0,1)^{2d}.
#[derive(Debug, Clone)]
pub struct EnvelopeProfile {
    pub offsets: Vec<Vec<i64>>,
    pub values: Vec<f64>,
}

impl EnvelopeProfile {
    /// Θ at the zero offset (the diagonal cube) — equals ‖g‖₂².
    pub fn at_origin(&self) -> Option<f64> {
        self.offsets
            .iter()
            .position(|k| k.iter().all(|&c| c == 0))
            .map(|i| self.values[i])
    }

    /// Σ_k Θ(k) v(k): the amalgam-norm diagnostic of the envelope.
    pub fn weighted_sum(&self, v: &WeightSpec) -> f64 {
        self.offsets
            .iter()
            .zip(&self.values)
            .map(|(k, &theta)| {
                let r = k.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt();
                theta * v.eval_radial(r)
            })
            .sum()
    }

    /// CSV dump: `k_1,..,k_{2d},theta` per populated cube.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let two_d = self.offsets.first().map_or(0, Vec::len);
        let header: Vec<String> = (1..=two_d).map(|i| format!("k_{i}")).collect();
        writeln!(out, "{},theta", header.join(","))?;
        for (k, theta) in self.offsets.iter().zip(&self.values) {
            let coords: Vec<String> = k.iter().map(i64::to_string).collect();
            writeln!(out, "{},{}", coords.join(","), theta)?;
        }
        Ok(())
    }
}
