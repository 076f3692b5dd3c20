//! Window functions and their ambiguity function A_g(z) = ⟨g, π(z)g⟩.
//!
//! Two window kinds are supported: the Gaussian φ(t) = e^{-π|t|²} in any
//! dimension (with a closed-form ambiguity function) and complex windows
//! sampled on a uniform grid in d = 1 (ambiguity by composite trapezoid
//! quadrature with a grid-halving convergence check). The module also
//! estimates the weighted modulation-space and amalgam norms that appear
//! as hypotheses in the decay theorems.

use crate::tf::TfPoint;
use crate::weight::WeightSpec;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("dimension mismatch: window has d = {window}, point has d = {point}")]
    DimensionMismatch { window: usize, point: usize },
    #[error("grid too coarse: halving changed the result by {delta_rel:.3e} (limit 1e-6)")]
    GridTooCoarse { delta_rel: f64 },
    #[error("norm estimate not converged: outer shell contributes {fraction:.3}% (limit {limit}%)")]
    NotConverged { fraction: f64, limit: f64 },
    #[error("estimate grid would need {cells} cells (cap {cap})")]
    GridTooLarge { cells: usize, cap: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Effective half-width of the Gaussian support for quadrature purposes;
/// e^{-π·6.5²} ≈ 1e-58 is far below every tolerance in play.
const GAUSSIAN_SUPPORT: f64 = 6.5;
/// Base quadrature step for Gaussian-kind windows.
const GAUSSIAN_STEP: f64 = 1.0 / 128.0;
/// Absolute floor (relative to ‖g‖₂²) below which the halving check
/// compares absolutely: smaller values sit at the cancellation limit of
/// real-axis double-precision quadrature.
const HALVING_ABS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum WindowKind {
    /// φ(t) = e^{-π|t|²} on ℝ^d.
    Gaussian { dim: usize },
    /// Complex samples on the uniform grid start + k·step, k = 0..len-1.
    Sampled {
        start: f64,
        step: f64,
        samples: Vec<Complex64>,
    },
}

/// A window g together with its normalization convention. With
/// `normalized = true` the window is rescaled to ‖g‖₂ = 1 (exactly for the
/// Gaussian, by trapezoid quadrature for sampled windows); the default
/// keeps the raw samples / raw Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    kind: WindowKind,
    normalized: bool,
    norm_sq: f64,
}

impl WindowSpec {
    pub fn gaussian(dim: usize, normalized: bool) -> Result<Self, WindowError> {
        if dim == 0 {
            return Err(WindowError::InvalidWindow("dimension must be >= 1".into()));
        }
        let norm_sq = if normalized {
            1.0
        } else {
            (2.0_f64).powi(-(dim as i32)).sqrt()
        };
        Ok(Self {
            kind: WindowKind::Gaussian { dim },
            normalized,
            norm_sq,
        })
    }

    pub fn sampled(
        start: f64,
        step: f64,
        mut samples: Vec<Complex64>,
        normalized: bool,
    ) -> Result<Self, WindowError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(WindowError::InvalidWindow(format!(
                "step must be positive, got {step}"
            )));
        }
        if samples.len() < 8 {
            return Err(WindowError::InvalidWindow(format!(
                "need at least 8 samples, got {}",
                samples.len()
            )));
        }
        if !start.is_finite()
            || samples
                .iter()
                .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(WindowError::InvalidWindow("samples must be finite".into()));
        }
        let mut norm_sq = trapezoid_norm_sq(&samples, step);
        if norm_sq <= 0.0 {
            return Err(WindowError::InvalidWindow("window has zero norm".into()));
        }
        if normalized {
            let scale = 1.0 / norm_sq.sqrt();
            for s in &mut samples {
                *s *= scale;
            }
            norm_sq = trapezoid_norm_sq(&samples, step);
            if (norm_sq - 1.0).abs() > 1e-12 {
                return Err(WindowError::InvalidWindow(format!(
                    "normalization failed: ‖g‖₂² = {norm_sq}"
                )));
            }
        }
        Ok(Self {
            kind: WindowKind::Sampled {
                start,
                step,
                samples,
            },
            normalized,
            norm_sq,
        })
    }

    /// A Gaussian sampled on a uniform grid — the reference input for the
    /// quadrature path.
    pub fn sampled_gaussian(
        start: f64,
        step: f64,
        len: usize,
        normalized: bool,
    ) -> Result<Self, WindowError> {
        let samples: Vec<Complex64> = (0..len)
            .map(|k| {
                let t = start + k as f64 * step;
                Complex64::new((-PI * t * t).exp(), 0.0)
            })
            .collect();
        Self::sampled(start, step, samples, normalized)
    }

    /// Reads samples from CSV with header `t,re,im`; the grid must be
    /// uniform to relative 1e-9.
    pub fn from_csv(path: &Path, normalized: bool) -> Result<Self, WindowError> {
        let mut rdr =
            csv::Reader::from_path(path).map_err(|e| WindowError::Csv(e.to_string()))?;
        let headers = rdr
            .headers()
            .map_err(|e| WindowError::Csv(e.to_string()))?
            .clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["t", "re", "im"] {
            return Err(WindowError::Csv(format!(
                "expected header t,re,im, got {cols:?}"
            )));
        }
        let mut ts = Vec::new();
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| WindowError::Csv(e.to_string()))?;
            if rec.len() != 3 {
                return Err(WindowError::Csv(format!("row has {} fields", rec.len())));
            }
            let parse = |i: usize| -> Result<f64, WindowError> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| WindowError::Csv(e.to_string()))
            };
            ts.push(parse(0)?);
            samples.push(Complex64::new(parse(1)?, parse(2)?));
        }
        if ts.len() < 2 {
            return Err(WindowError::Csv("need at least 2 rows".into()));
        }
        let h = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        if h <= 0.0 {
            return Err(WindowError::Csv("t must be increasing".into()));
        }
        for w in ts.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
                return Err(WindowError::Csv(format!(
                    "non-uniform spacing: {} vs step {h}",
                    w[1] - w[0]
                )));
            }
        }
        Self::sampled(ts[0], h, samples, normalized)
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            WindowKind::Gaussian { dim } => *dim,
            WindowKind::Sampled { .. } => 1,
        }
    }

    /// ‖g‖₂² — exactly the diagonal Gram entry.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// A_g(z) = ⟨g, π(z)g⟩ by the best available route: closed form for
    /// Gaussian windows, quadrature for sampled ones.
    pub fn ambiguity(&self, z: &TfPoint) -> Result<Complex64, WindowError> {
        match &self.kind {
            WindowKind::Gaussian { dim } => {
                if z.dim() != *dim {
                    return Err(WindowError::DimensionMismatch {
                        window: *dim,
                        point: z.dim(),
                    });
                }
                let mut a = gaussian_ambiguity(z, *dim);
                if self.normalized {
                    a *= (2.0_f64).powi(*dim as i32).sqrt();
                }
                Ok(a)
            }
            WindowKind::Sampled { .. } => numeric_ambiguity(self, z),
        }
    }
}

fn trapezoid_norm_sq(samples: &[Complex64], step: f64) -> f64 {
    let mut s = 0.0;
    for (k, c) in samples.iter().enumerate() {
        let w = if k == 0 || k == samples.len() - 1 {
            0.5
        } else {
            1.0
        };
        s += w * c.norm_sqr();
    }
    s * step
}

/// Closed-form ambiguity function of the raw Gaussian φ(t) = e^{-π|t|²}:
/// A_φ(z) = 2^{-d/2} e^{-π|z|²/2} e^{-π i x·ξ}.
pub fn gaussian_ambiguity(z: &TfPoint, dim: usize) -> Complex64 {
    debug_assert_eq!(z.dim(), dim);
    let amp = (2.0_f64).powi(-(dim as i32)).sqrt() * (-PI * z.norm_sq() / 2.0).exp();
    let phase = -PI * z.x_dot_xi();
    Complex64::from_polar(amp, phase)
}

/// ⟨g, π(z)g⟩ = ∫ g(t) conj(e^{2πi ξ·t} g(t-x)) dt by composite trapezoid
/// with a grid-halving convergence check. Gaussian windows factor into
/// per-coordinate integrals; sampled windows use their own grid with
/// linear interpolation for the shifted copy.
pub fn numeric_ambiguity(w: &WindowSpec, z: &TfPoint) -> Result<Complex64, WindowError> {
    match &w.kind {
        WindowKind::Gaussian { dim } => {
            if z.dim() != *dim {
                return Err(WindowError::DimensionMismatch {
                    window: *dim,
                    point: z.dim(),
                });
            }
            let mut acc = Complex64::new(1.0, 0.0);
            for j in 0..*dim {
                acc *= gaussian_factor_quadrature(z.x[j], z.xi[j])?;
            }
            if w.normalized {
                acc *= (2.0_f64).powi(*dim as i32).sqrt();
            }
            Ok(acc)
        }
        WindowKind::Sampled {
            start,
            step,
            samples,
        } => {
            if z.dim() != 1 {
                return Err(WindowError::DimensionMismatch {
                    window: 1,
                    point: z.dim(),
                });
            }
            let (x, xi) = (z.x[0], z.xi[0]);
            let end = start + (samples.len() - 1) as f64 * step;
            let lo = start.max(start + x);
            let hi = end.min(end + x);
            if lo >= hi {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let eval = |t: f64| {
                let a = sample_interp(*start, *step, samples, t);
                let b = sample_interp(*start, *step, samples, t - x).conj();
                a * b * Complex64::from_polar(1.0, -2.0 * PI * xi * t)
            };
            halved_trapezoid(&eval, lo, hi, *step, w.norm_sq)
        }
    }
}

/// One coordinate of the Gaussian ambiguity integral,
/// ∫ e^{-πt²} e^{-π(t-x)²} e^{-2πiξt} dt.
fn gaussian_factor_quadrature(x: f64, xi: f64) -> Result<Complex64, WindowError> {
    let lo = (-GAUSSIAN_SUPPORT).max(x - GAUSSIAN_SUPPORT);
    let hi = GAUSSIAN_SUPPORT.min(x + GAUSSIAN_SUPPORT);
    if lo >= hi {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let eval = |t: f64| {
        let amp = (-PI * (t * t + (t - x) * (t - x))).exp();
        Complex64::from_polar(amp, -2.0 * PI * xi * t)
    };
    halved_trapezoid(&eval, lo, hi, GAUSSIAN_STEP, std::f64::consts::FRAC_1_SQRT_2)
}

/// Composite trapezoid at step h, checked against the grid with half the
/// points (step 2h); errors GridTooCoarse when halving the grid moves the
/// value by more than 1e-6 relative (with an absolute floor of 1e-9·scale,
/// the honest resolution of the rule). Thinning instead of subdividing
/// keeps sampled windows on their true samples.
fn halved_trapezoid(
    f: &impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    h: f64,
    scale: f64,
) -> Result<Complex64, WindowError> {
    let coarse = trapezoid_complex(f, lo, hi, 2.0 * h);
    let fine = trapezoid_complex(f, lo, hi, h);
    let denom = fine.norm().max(HALVING_ABS_FLOOR * scale);
    let delta_rel = (fine - coarse).norm() / denom;
    if delta_rel > 1e-6 {
        return Err(WindowError::GridTooCoarse { delta_rel });
    }
    Ok(fine)
}

fn trapezoid_complex(f: &impl Fn(f64) -> Complex64, lo: f64, hi: f64, h: f64) -> Complex64 {
    let n = (((hi - lo) / h).ceil() as usize).max(2);
    let h = (hi - lo) / n as f64;
    let mut acc = (f(lo) + f(hi)) * 0.5;
    for k in 1..n {
        acc += f(lo + k as f64 * h);
    }
    acc * h
}

fn sample_interp(start: f64, step: f64, samples: &[Complex64], t: f64) -> Complex64 {
    let u = (t - start) / step;
    if u < 0.0 || u > (samples.len() - 1) as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let i = (u.floor() as usize).min(samples.len() - 2);
    let frac = u - i as f64;
    samples[i] * (1.0 - frac) + samples[i + 1] * frac
}

/// Short-time Fourier transform of g against the raw Gaussian window,
/// V_φ g(z) = ⟨g, π(z)φ⟩. Gaussian windows reduce to the closed form
/// (g = c·φ gives V_φ g = c·A_φ); sampled windows go through quadrature.
pub fn stft_gaussian_window(g: &WindowSpec, z: &TfPoint) -> Result<Complex64, WindowError> {
    match &g.kind {
        WindowKind::Gaussian { dim } => {
            if z.dim() != *dim {
                return Err(WindowError::DimensionMismatch {
                    window: *dim,
                    point: z.dim(),
                });
            }
            let mut a = gaussian_ambiguity(z, *dim);
            if g.normalized {
                // g = 2^{d/4} φ
                a *= (2.0_f64).powi(*dim as i32).powf(0.25);
            }
            Ok(a)
        }
        WindowKind::Sampled {
            start,
            step,
            samples,
        } => {
            if z.dim() != 1 {
                return Err(WindowError::DimensionMismatch {
                    window: 1,
                    point: z.dim(),
                });
            }
            let (x, xi) = (z.x[0], z.xi[0]);
            let end = start + (samples.len() - 1) as f64 * step;
            let lo = start.max(x - GAUSSIAN_SUPPORT);
            let hi = end.min(x + GAUSSIAN_SUPPORT);
            if lo >= hi {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let eval = |t: f64| {
                let a = sample_interp(*start, *step, samples, t);
                let phi = (-PI * (t - x) * (t - x)).exp();
                a * phi * Complex64::from_polar(1.0, -2.0 * PI * xi * t)
            };
            halved_trapezoid(&eval, lo, hi, *step, g.norm_sq.sqrt())
        }
    }
}

/// A truncated norm estimate together with its outermost-shell share,
/// the convergence indicator.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub last_shell_fraction: f64,
}

const ESTIMATE_CELL_CAP: usize = 20_000_000;

fn grid_scan(
    g: &WindowSpec,
    v: &WeightSpec,
    big_r: f64,
    h: f64,
    mut visit: impl FnMut(f64, f64, bool) -> Result<(), WindowError>,
) -> Result<(), WindowError> {
    let d = g.dim();
    let two_d = 2 * d;
    let m = (big_r / h).ceil() as i64;
    let cells = ((2 * m + 1) as usize).checked_pow(two_d as u32);
    if !cells.is_some_and(|c| c <= ESTIMATE_CELL_CAP) {
        return Err(WindowError::GridTooLarge {
            cells: cells.unwrap_or(usize::MAX),
            cap: ESTIMATE_CELL_CAP,
        });
    }
    let mut k = vec![-m; two_d];
    'outer: loop {
        let coords: Vec<f64> = k.iter().map(|&q| q as f64 * h).collect();
        let r2: f64 = coords.iter().map(|c| c * c).sum();
        let r = r2.sqrt();
        if r <= big_r {
            let z = TfPoint {
                x: coords[..d].to_vec(),
                xi: coords[d..].to_vec(),
            };
            let mag = stft_gaussian_window(g, &z)?.norm();
            visit(mag * v.eval_radial(r), r, r > big_r - 1.0)?;
        }
        for c in 0..two_d {
            k[c] += 1;
            if k[c] <= m {
                continue 'outer;
            }
            k[c] = -m;
        }
        break;
    }
    Ok(())
}

/// Riemann-sum estimate of the M¹_v norm ∫ |V_φ g(z)| v(z) dz over
/// hℤ^{2d} ∩ B_R. Errors NotConverged when the shell R-1 < |z| ≤ R
/// carries more than 1% of the total.
pub fn m1v_norm_estimate(
    g: &WindowSpec,
    v: &WeightSpec,
    big_r: f64,
    h: f64,
) -> Result<NormEstimate, WindowError> {
    assert!(big_r >= 4.0, "R must be >= 4");
    assert!(h <= 0.25, "h must be <= 1/4");
    let cell = h.powi(2 * g.dim() as i32);
    let mut total = 0.0;
    let mut shell = 0.0;
    grid_scan(g, v, big_r, h, |val, _r, on_shell| {
        total += val * cell;
        if on_shell {
            shell += val * cell;
        }
        Ok(())
    })?;
    let fraction = if total > 0.0 { shell / total } else { 0.0 };
    if fraction > 0.01 {
        return Err(WindowError::NotConverged {
            fraction: 100.0 * fraction,
            limit: 1.0,
        });
    }
    Ok(NormEstimate {
        value: total,
        last_shell_fraction: fraction,
    })
}

/// Grid estimate of the M^∞_v norm sup |V_φ g(z)| v(z).
pub fn m_inf_v_norm_estimate(g: &WindowSpec, v: &WeightSpec, big_r: f64, h: f64) -> f64 {
    assert!(big_r >= 4.0, "R must be >= 4");
    assert!(h <= 0.25, "h must be <= 1/4");
    let mut best = 0.0_f64;
    grid_scan(g, v, big_r, h, |val, _r, _s| {
        if val > best {
            best = val;
        }
        Ok(())
    })
    .expect("stft on a validated window cannot fail on the scan grid");
    best
}

/// Amalgam-space estimate Σ_k sup_{z ∈ k+[0,1]^{2d}} |A_g(z)| v(k) over
/// |k|_∞ ≤ K, cube suprema approximated on an 8-per-axis subgrid.
pub fn amalgam_norm_estimate(
    g: &WindowSpec,
    v: &WeightSpec,
    big_k: i64,
) -> Result<NormEstimate, WindowError> {
    assert!(big_k >= 4, "K must be >= 4");
    let d = g.dim();
    let two_d = 2 * d;
    let cubes = ((2 * big_k + 1) as usize).checked_pow(two_d as u32);
    if !cubes.is_some_and(|c| c.saturating_mul(8usize.pow(two_d as u32)) <= ESTIMATE_CELL_CAP) {
        return Err(WindowError::GridTooLarge {
            cells: cubes.unwrap_or(usize::MAX),
            cap: ESTIMATE_CELL_CAP,
        });
    }
    let mut total = 0.0;
    let mut shell = 0.0;
    let mut k = vec![-big_k; two_d];
    'outer: loop {
        let mut sup = 0.0_f64;
        let mut sub = vec![0i64; two_d];
        'cube: loop {
            let coords: Vec<f64> = k
                .iter()
                .zip(&sub)
                .map(|(&kk, &ss)| kk as f64 + (ss as f64 + 0.5) / 8.0)
                .collect();
            let z = TfPoint {
                x: coords[..d].to_vec(),
                xi: coords[d..].to_vec(),
            };
            let a = g.ambiguity(&z)?.norm();
            if a > sup {
                sup = a;
            }
            for c in 0..two_d {
                sub[c] += 1;
                if sub[c] < 8 {
                    continue 'cube;
                }
                sub[c] = 0;
            }
            break;
        }
        let k_norm = k.iter().map(|&q| (q as f64) * (q as f64)).sum::<f64>().sqrt();
        let term = sup * v.eval_radial(k_norm);
        total += term;
        if k.iter().any(|&q| q.abs() == big_k) {
            shell += term;
        }
        for c in 0..two_d {
            k[c] += 1;
            if k[c] <= big_k {
                continue 'outer;
            }
            k[c] = -big_k;
        }
        break;
    }
    let fraction = if total > 0.0 { shell / total } else { 0.0 };
    if fraction > 0.01 {
        return Err(WindowError::NotConverged {
            fraction: 100.0 * fraction,
            limit: 1.0,
        });
    }
    Ok(NormEstimate {
        value: total,
        last_shell_fraction: fraction,
    })
}
