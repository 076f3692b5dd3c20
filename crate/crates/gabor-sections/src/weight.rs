//! Submultiplicative weight families on ℝ^{2d} and the tail bounds they
//! induce on the lower Riesz bound of a finite section.
//!
//! All families are radial and take the value 1 at the origin:
//! constant 1, polynomial (1+|z|)^s, sub-exponential e^{a|z|^b} with
//! 0 < b < 1, and exponential e^{a|z|}. Arithmetic switches to log space
//! once exponents grow, so sub-exponential weights stay usable far beyond
//! the range where naive evaluation overflows.

use crate::pointset::PointSet;
use crate::tf::TfPoint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exponent beyond which `eval` reports +∞ instead of a finite value.
pub const OVERFLOW_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("no enumerated point has norm above {n}")]
    NoTailPoint { n: f64 },
    #[error("tail remainder {remainder} exceeds the enumerated sum {sum}; enlarge the enumeration radius")]
    RemainderDominates { sum: f64, remainder: f64 },
    #[error("convolution grid boundary shell contributes {fraction:.3}% (limit 2%); enlarge R")]
    NotConverged { fraction: f64 },
    #[error("convolution grid would need {cells} cells (cap {cap})")]
    GridTooLarge { cells: usize, cap: usize },
}

/// A radial submultiplicative weight v on ℝ^{2d}, v(0) = 1, v ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Constant,
    /// v(z) = (1+|z|)^s, s ≥ 0.
    Polynomial { s: f64 },
    /// v(z) = e^{a|z|^b}, a > 0, 0 < b < 1.
    SubExponential { a: f64, b: f64 },
    /// v(z) = e^{a|z|}, a > 0. Fails the GRS condition.
    Exponential { a: f64 },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<(), WeightError> {
        match *self {
            WeightSpec::Constant => Ok(()),
            WeightSpec::Polynomial { s } => {
                if s >= 0.0 && s.is_finite() {
                    Ok(())
                } else {
                    Err(WeightError::InvalidParameter(format!(
                        "polynomial exponent s must be >= 0, got {s}"
                    )))
                }
            }
            WeightSpec::SubExponential { a, b } => {
                if !(a > 0.0 && a.is_finite()) {
                    Err(WeightError::InvalidParameter(format!(
                        "sub-exponential rate a must be > 0, got {a}"
                    )))
                } else if !(b > 0.0 && b < 1.0) {
                    Err(WeightError::InvalidParameter(format!(
                        "sub-exponential power b must lie in (0,1), got {b}"
                    )))
                } else {
                    Ok(())
                }
            }
            WeightSpec::Exponential { a } => {
                if a > 0.0 && a.is_finite() {
                    Ok(())
                } else {
                    Err(WeightError::InvalidParameter(format!(
                        "exponential rate a must be > 0, got {a}"
                    )))
                }
            }
        }
    }

    /// ln v(r) for radius r ≥ 0. Always finite, the safe representation.
    pub fn log_eval_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        match *self {
            WeightSpec::Constant => 0.0,
            WeightSpec::Polynomial { s } => s * (1.0 + r).ln(),
            WeightSpec::SubExponential { a, b } => a * r.powf(b),
            WeightSpec::Exponential { a } => a * r,
        }
    }

    /// v(r). Returns +∞ once the exponent passes [`OVERFLOW_EXPONENT`]
    /// rather than a denormal-polluted finite value.
    pub fn eval_radial(&self, r: f64) -> f64 {
        let l = self.log_eval_radial(r);
        if l > OVERFLOW_EXPONENT {
            f64::INFINITY
        } else {
            l.exp()
        }
    }

    pub fn eval(&self, z: &TfPoint) -> f64 {
        self.eval_radial(z.norm())
    }

    /// v(r)^{-2}, computed in log space so it underflows gracefully to 0.
    pub fn inv_sq_radial(&self, r: f64) -> f64 {
        (-2.0 * self.log_eval_radial(r)).exp()
    }
}

/// Outcome of the randomized submultiplicativity check.
#[derive(Debug, Clone, Serialize)]
pub struct SubmultReport {
    pub pass: bool,
    pub trials: usize,
    /// max over trials of v(z1+z2) / (v(z1) v(z2)); ≤ 1 for a
    /// submultiplicative weight (up to 1e-12 roundoff slack).
    pub worst_ratio: f64,
}

/// Samples `trials` random pairs with |z_i| ≤ 10 and verifies
/// v(z1+z2) ≤ v(z1)·v(z2) up to 1e-12 relative slack.
pub fn submultiplicative_check(
    v: &WeightSpec,
    dim: usize,
    trials: usize,
    seed: u64,
) -> SubmultReport {
    assert!(trials >= 100, "need at least 100 trials");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_log = f64::NEG_INFINITY;
    let sample = |rng: &mut ChaCha8Rng| -> TfPoint {
        loop {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
            let xi: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
            let z = TfPoint { x, xi };
            if z.norm() <= 10.0 {
                return z;
            }
        }
    };
    for _ in 0..trials {
        let z1 = sample(&mut rng);
        let z2 = sample(&mut rng);
        let z12 = z1.add(&z2);
        let excess = v.log_eval_radial(z12.norm())
            - v.log_eval_radial(z1.norm())
            - v.log_eval_radial(z2.norm());
        if excess > worst_log {
            worst_log = excess;
        }
    }
    SubmultReport {
        pass: worst_log <= 1e-12,
        trials,
        worst_ratio: worst_log.exp(),
    }
}

/// Outcome of the discrete subconvolutivity probe (v^{-1} * v^{-1} ≤ C v^{-1}).
#[derive(Debug, Clone, Serialize)]
pub struct SubconvReport {
    pub pass: bool,
    /// Largest observed (v^{-1} * v^{-1})(z) · v(z) over the tested z.
    pub constant: f64,
    /// Same constant measured on the half-radius grid; a growing constant
    /// marks a divergent convolution.
    pub constant_half_radius: f64,
    /// Worst boundary-shell share of the convolution at any tested z.
    pub boundary_fraction: f64,
}

const SUBCONV_CELL_CAP: usize = 4_000_000;

/// Estimates sup_z (v^{-1} * v^{-1})(z) v(z) by discrete convolution over
/// the grid hℤ^{2d} ∩ B_R. Divergence (constant still growing when R is
/// doubled from R/2) is a `fail` verdict; a boundary shell above 2% on a
/// non-divergent weight is a `NotConverged` error.
pub fn subconvolutive_check(
    v: &WeightSpec,
    dim: usize,
    h: f64,
    big_r: f64,
) -> Result<SubconvReport, WeightError> {
    assert!(h <= 0.5, "grid step must be <= 1/2");
    assert!(big_r >= 8.0, "radius must be >= 8");
    // probe the same z range at both radii so the divergence comparison
    // sees only the R-dependence of the convolution, not a wider z scan
    let z_max = big_r / 4.0;
    let (c_full, frac_full) = subconv_constant(v, dim, h, big_r, z_max)?;
    let (c_half, _) = subconv_constant(v, dim, h, big_r / 2.0, z_max)?;
    let diverging = c_full > 1.1 * c_half;
    if diverging {
        return Ok(SubconvReport {
            pass: false,
            constant: c_full,
            constant_half_radius: c_half,
            boundary_fraction: frac_full,
        });
    }
    if frac_full > 0.02 {
        return Err(WeightError::NotConverged {
            fraction: 100.0 * frac_full,
        });
    }
    Ok(SubconvReport {
        pass: c_full.is_finite(),
        constant: c_full,
        constant_half_radius: c_half,
        boundary_fraction: frac_full,
    })
}

fn subconv_constant(
    v: &WeightSpec,
    dim: usize,
    h: f64,
    big_r: f64,
    z_max: f64,
) -> Result<(f64, f64), WeightError> {
    let m = (big_r / h).ceil() as i64;
    let side = (2 * m + 1) as usize;
    let two_d = 2 * dim;
    let cells = side.checked_pow(two_d as u32).unwrap_or(usize::MAX);
    if cells > SUBCONV_CELL_CAP {
        return Err(WeightError::GridTooLarge {
            cells,
            cap: SUBCONV_CELL_CAP,
        });
    }

    // enumerate grid points w with |w| <= R once, with v(w)^{-1}
    let mut pts: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    let mut idx = vec![-m; two_d];
    'outer: loop {
        let w: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
        let r = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r <= big_r {
            pts.push((w, (-v.log_eval_radial(r)).exp(), r > big_r - 1.0));
        }
        for c in 0..two_d {
            idx[c] += 1;
            if idx[c] <= m {
                continue 'outer;
            }
            idx[c] = -m;
        }
        break;
    }

    let cell = h.powi(two_d as i32);
    let mut constant: f64 = 0.0;
    let mut worst_frac: f64 = 0.0;
    // v is radial: probing z along the first axis loses no generality
    let mut z_r = 0.0;
    while z_r <= z_max + 1e-9 {
        let mut total = 0.0;
        let mut shell = 0.0;
        for (w, vinv, on_shell) in &pts {
            let mut dsq = (w[0] - z_r) * (w[0] - z_r);
            for c in w.iter().skip(1) {
                dsq += c * c;
            }
            let term = vinv * (-v.log_eval_radial(dsq.sqrt())).exp();
            total += term;
            if *on_shell {
                shell += term;
            }
        }
        let conv = cell * total;
        let ratio = conv * v.eval_radial(z_r);
        if ratio > constant {
            constant = ratio;
        }
        if total > 0.0 {
            worst_frac = worst_frac.max(shell / total);
        }
        z_r += 0.5;
    }
    Ok((constant, worst_frac))
}

/// The sequence v(n·z)^{1/n} for the given n; a GRS weight drives it to 1.
/// Computed as exp(ln v(n|z|)/n), so exponential weights never overflow.
pub fn grs_profile(v: &WeightSpec, z: &TfPoint, n_list: &[u64]) -> Vec<f64> {
    assert!(
        n_list.windows(2).all(|w| w[0] < w[1]) && n_list.first().is_none_or(|&n| n > 0),
        "n_list must be ascending positive"
    );
    let r = z.norm();
    n_list
        .iter()
        .map(|&n| (v.log_eval_radial(n as f64 * r) / n as f64).exp())
        .collect()
}

/// sup_{|λ| > n} v(λ)^{-2} over the lattice tail. Since v is radial and
/// nondecreasing this equals v(r)^{-2} at the smallest enumerated norm
/// exceeding n, and is exact for the full infinite tail.
pub fn bound_sup(v: &WeightSpec, ps: &PointSet, n: f64) -> Result<f64, WeightError> {
    let r_next = ps
        .norms()
        .iter()
        .copied()
        .find(|&r| r > n)
        .ok_or(WeightError::NoTailPoint { n })?;
    Ok(v.inv_sq_radial(r_next))
}

/// Enumerated tail sum plus its integral-comparison remainder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailSumBound {
    /// Σ v(λ)^{-2} over enumerated n < |λ| ≤ R_max.
    pub sum: f64,
    /// Bound on the unenumerated tail |λ| > R_max:
    /// N_rel · ∫_{R_max - 1}^∞ v(r)^{-2} ω_{2d} r^{2d-1} dr.
    pub remainder: f64,
}

impl TailSumBound {
    pub fn total(&self) -> f64 {
        self.sum + self.remainder
    }
}

/// Σ_{|λ|>n} v(λ)^{-2}: explicit sum over the enumerated points plus a
/// remainder for the infinite tail controlled by the relative-separation
/// constant `n_rel`. Errors with `RemainderDominates` when the remainder
/// exceeds the sum (the enumeration radius was too small).
pub fn bound_sum(
    v: &WeightSpec,
    ps: &PointSet,
    n: f64,
    n_rel: usize,
) -> Result<TailSumBound, WeightError> {
    let norms = ps.norms();
    if !norms.iter().any(|&r| r > n) {
        return Err(WeightError::NoTailPoint { n });
    }
    let sum: f64 = norms
        .iter()
        .filter(|&&r| r > n)
        .map(|&r| v.inv_sq_radial(r))
        .sum();
    let remainder = n_rel as f64 * tail_integral(v, ps.dim(), (ps.radius() - 1.0).max(0.0));
    if remainder > sum {
        return Err(WeightError::RemainderDominates { sum, remainder });
    }
    Ok(TailSumBound { sum, remainder })
}

/// ∫_lo^∞ v(r)^{-2} ω_{2d} r^{2d-1} dr by doubling-segment Simpson panels;
/// +∞ when the segment contributions stop decaying (divergent tail).
fn tail_integral(v: &WeightSpec, dim: usize, lo: f64) -> f64 {
    let two_d = 2 * dim;
    // surface area of the unit sphere in R^{2d}: 2 π^d / (d-1)!
    let mut omega = 2.0 * std::f64::consts::PI.powi(dim as i32);
    for k in 1..dim {
        omega /= k as f64;
    }
    let f = |r: f64| omega * r.powi((two_d - 1) as i32) * v.inv_sq_radial(r);

    let mut total = 0.0;
    let mut a = lo.max(1e-6);
    let mut width = 1.0_f64.max(a);
    let mut prev_seg = f64::INFINITY;
    for _ in 0..200 {
        let b = a + width;
        let seg = simpson(&f, a, b, 128);
        total += seg;
        if seg < 1e-14 * total.max(1e-300) {
            return total;
        }
        if seg > prev_seg && a > lo + 100.0 {
            return f64::INFINITY; // contributions growing: divergent
        }
        prev_seg = seg;
        a = b;
        width *= 2.0;
    }
    f64::INFINITY
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::{enumerate_lattice_in_ball, LatticeSpec};
    use approx::assert_relative_eq;

    fn zsq_lattice() -> LatticeSpec {
        LatticeSpec::identity(1)
    }

    #[test]
    fn eval_closed_forms() {
        let p = WeightSpec::Polynomial { s: 2.0 };
        assert_relative_eq!(p.eval_radial(3.0), 16.0, max_relative = 1e-15);
        let se = WeightSpec::SubExponential { a: 1.0, b: 0.5 };
        assert_relative_eq!(se.eval_radial(4.0), (2.0_f64).exp(), max_relative = 1e-15);
        for v in [
            WeightSpec::Constant,
            p,
            se,
            WeightSpec::Exponential { a: 1.0 },
        ] {
            assert_eq!(v.eval(&TfPoint::origin(1)), 1.0);
        }
    }

    #[test]
    fn eval_overflow_is_infinite() {
        let v = WeightSpec::Exponential { a: 1.0 };
        assert_eq!(v.eval_radial(800.0), f64::INFINITY);
        assert!(v.log_eval_radial(800.0).is_finite());
        assert_eq!(v.inv_sq_radial(800.0), 0.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(WeightSpec::Polynomial { s: -1.0 }.validate().is_err());
        assert!(WeightSpec::SubExponential { a: 1.0, b: 1.0 }.validate().is_err());
        assert!(WeightSpec::SubExponential { a: 0.0, b: 0.5 }.validate().is_err());
        assert!(WeightSpec::Exponential { a: -2.0 }.validate().is_err());
        assert!(WeightSpec::Polynomial { s: 2.0 }.validate().is_ok());
    }

    #[test]
    fn submultiplicative_families_pass() {
        for v in [
            WeightSpec::Polynomial { s: 3.0 },
            WeightSpec::SubExponential { a: 1.0, b: 0.5 },
            WeightSpec::Exponential { a: 1.0 },
            WeightSpec::Constant,
        ] {
            let rep = submultiplicative_check(&v, 1, 1000, 42);
            assert!(rep.pass, "{v:?} worst ratio {}", rep.worst_ratio);
        }
    }

    #[test]
    fn grs_closed_forms() {
        let z = TfPoint::new_1d(1.0, 0.0).unwrap();
        let p = grs_profile(&WeightSpec::Polynomial { s: 2.0 }, &z, &[1_000_000]);
        assert_relative_eq!(p[0], 1.0000276314048562, max_relative = 1e-9);
        let se = grs_profile(&WeightSpec::SubExponential { a: 1.0, b: 0.5 }, &z, &[10_000]);
        assert_relative_eq!(se[0], 1.0100501670841681, max_relative = 1e-9);
        let e = grs_profile(&WeightSpec::Exponential { a: 1.0 }, &z, &[10, 100, 1000]);
        for g in e {
            assert_relative_eq!(g, 1.0_f64.exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn grs_profiles_decrease_toward_one() {
        let z = TfPoint::new_1d(0.6, 0.8).unwrap();
        for v in [
            WeightSpec::Polynomial { s: 2.0 },
            WeightSpec::SubExponential { a: 1.0, b: 0.5 },
        ] {
            let prof = grs_profile(&v, &z, &[10, 100, 1000, 10_000, 100_000]);
            assert!(prof.windows(2).all(|w| w[1] < w[0]), "{v:?}: {prof:?}");
            assert!(prof.last().unwrap() - 1.0 < 0.05);
        }
    }

    #[test]
    fn bound_sup_examples() {
        let ps = enumerate_lattice_in_ball(&zsq_lattice(), 12.0, 20_000).unwrap();
        // Z^2, n = 1: next norm is sqrt(2)
        let b = bound_sup(&WeightSpec::Polynomial { s: 1.0 }, &ps, 1.0).unwrap();
        assert_relative_eq!(b, 0.1715728752538099, max_relative = 1e-12);
        // constant weight: always 1
        let c = bound_sup(&WeightSpec::Constant, &ps, 3.0).unwrap();
        assert_eq!(c, 1.0);
        // sub-exponential, n = 3: next norm is sqrt(10)
        let s = bound_sup(&WeightSpec::SubExponential { a: 1.0, b: 0.5 }, &ps, 3.0).unwrap();
        assert_relative_eq!(s, 0.028536856402400614, max_relative = 1e-12);
        // beyond the enumeration radius there is no tail point
        assert!(matches!(
            bound_sup(&WeightSpec::Constant, &ps, 13.0),
            Err(WeightError::NoTailPoint { .. })
        ));
    }

    #[test]
    fn bound_sum_poly_converges() {
        let ps = enumerate_lattice_in_ball(&zsq_lattice(), 40.0, 20_000).unwrap();
        let t = bound_sum(&WeightSpec::Polynomial { s: 3.0 }, &ps, 2.0, 5).unwrap();
        assert!(t.sum > 0.0);
        assert!(t.remainder < 0.01 * t.sum, "remainder {} sum {}", t.remainder, t.sum);
        // brute tail sum agrees with the enumerated part
        let brute: f64 = ps
            .norms()
            .iter()
            .filter(|&&r| r > 2.0)
            .map(|&r| (1.0 + r).powi(-6))
            .sum();
        assert_relative_eq!(t.sum, brute, max_relative = 1e-12);
    }

    #[test]
    fn bound_sum_constant_diverges() {
        let ps = enumerate_lattice_in_ball(&zsq_lattice(), 12.0, 20_000).unwrap();
        assert!(matches!(
            bound_sum(&WeightSpec::Constant, &ps, 2.0, 5),
            Err(WeightError::RemainderDominates { .. })
        ));
    }

    #[test]
    fn bound_sum_subexp_converges() {
        let ps = enumerate_lattice_in_ball(&zsq_lattice(), 20.0, 20_000).unwrap();
        let t = bound_sum(&WeightSpec::SubExponential { a: 1.0, b: 0.5 }, &ps, 2.0, 5).unwrap();
        assert!(t.remainder < t.sum);
    }

    #[test]
    fn bounds_monotone_and_ordered() {
        let ps = enumerate_lattice_in_ball(&zsq_lattice(), 20.0, 20_000).unwrap();
        let v = WeightSpec::SubExponential { a: 1.0, b: 0.5 };
        let mut prev_sup = f64::INFINITY;
        let mut prev_sum = f64::INFINITY;
        for n in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let s = bound_sup(&v, &ps, n).unwrap();
            let t = bound_sum(&v, &ps, n, 5).unwrap();
            assert!(s <= prev_sup);
            assert!(t.total() <= prev_sum);
            // the sup term is one of the summands
            assert!(s <= t.total() + 1e-15);
            prev_sup = s;
            prev_sum = t.total();
        }
    }

    #[test]
    fn subconv_constant_weight_fails() {
        let rep = subconvolutive_check(&WeightSpec::Constant, 1, 0.5, 8.0).unwrap();
        assert!(!rep.pass);
        assert!(rep.constant > rep.constant_half_radius);
    }

    #[test]
    fn subconv_polynomial_passes() {
        let rep = subconvolutive_check(&WeightSpec::Polynomial { s: 4.0 }, 1, 0.25, 10.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.constant.is_finite());
    }

    #[test]
    fn subconv_subexponential_passes() {
        // the e^{-sqrt r} tail converges slowly: R = 40 is the first
        // scale where the truncated convolution stabilizes
        let rep =
            subconvolutive_check(&WeightSpec::SubExponential { a: 1.0, b: 0.5 }, 1, 0.5, 40.0)
                .unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
