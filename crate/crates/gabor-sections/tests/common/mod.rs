//! Shared oracles for the integration suites. Everything here is
//! independent of the library's computational paths: quadrature by
//! adaptive Simpson, point counts by brute-force box enumeration.

use gabor_sections::gram::{assemble_gram, GramSection};
use gabor_sections::pointset::{enumerate_lattice_in_ball, LatticeSpec, PointSet};
use gabor_sections::window::WindowSpec;
use num_complex::Complex64;
use std::f64::consts::PI;

pub const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Adaptive Simpson for complex integrands on a real interval.
pub fn adaptive_simpson(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + fm * 4.0 + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + flm * 4.0 + fm);
    let right = (b - m) / 6.0 * (fm + frm * 4.0 + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn cexp(z: Complex64) -> Complex64 {
    z.exp()
}

/// ⟨π(μ)φ, π(λ)φ⟩ for the raw Gaussian by direct integration,
/// ∫ e^{2πi(μ₂-λ₂)t} e^{-π(t-μ₁)²} e^{-π(t-λ₁)²} dt, evaluated on the
/// contour Im t = ν/2 (ν = μ₂-λ₂). The integrand is entire and decays in
/// every horizontal strip, so the shift is exact by Cauchy's theorem, and
/// it removes the e^{πν²/2} cancellation that caps real-axis quadrature.
pub fn oracle_tf_inner(lam: (f64, f64), mu: (f64, f64)) -> Complex64 {
    let (l1, l2) = lam;
    let (m1, m2) = mu;
    let nu = m2 - l2;
    let shift = Complex64::new(0.0, nu / 2.0);
    let integrand = |s: f64| {
        let t = Complex64::new(s, 0.0) + shift;
        let e1 = -(t - m1) * (t - m1) * PI;
        let e2 = -(t - l1) * (t - l1) * PI;
        let osc = Complex64::new(0.0, 2.0 * PI * nu) * t;
        cexp(e1 + e2 + osc)
    };
    let mid = 0.5 * (l1 + m1);
    // modulus on this contour is e^{-πν²/2} e^{-π(s-μ₁)²-π(s-λ₁)²}
    let scale = (-PI * nu * nu / 2.0).exp() * (-PI * (l1 - m1) * (l1 - m1) / 2.0).exp();
    adaptive_simpson(&integrand, mid - 8.0, mid + 8.0, 1e-13 * scale.max(1e-250))
}

/// A_φ(z) = ⟨φ, π(z)φ⟩ through the same shifted-contour quadrature.
pub fn oracle_gaussian_ambiguity(x: f64, xi: f64) -> Complex64 {
    // ⟨g, π(z)g⟩ = ⟨π(z)g, g⟩* and π(z)g = shift by (x, ξ):
    // direct form ∫ e^{-πt²} e^{-π(t-x)²} e^{-2πiξt} dt
    oracle_tf_inner((x, xi), (0.0, 0.0))
}

/// Same integral on the real axis (no contour shift): converges to the
/// same value wherever the cancellation stays mild; used to validate the
/// shifted oracle.
pub fn oracle_gaussian_ambiguity_real_axis(x: f64, xi: f64) -> Complex64 {
    let integrand = |t: f64| {
        let amp = (-PI * (t * t + (t - x) * (t - x))).exp();
        Complex64::from_polar(amp, -2.0 * PI * xi * t)
    };
    adaptive_simpson(&integrand, x / 2.0 - 8.0, x / 2.0 + 8.0, 1e-15)
}

/// Brute-force count of lattice points A·k inside the closed ball,
/// scanning a box that is generously larger than needed.
pub fn brute_force_ball_count(gen: &[[f64; 2]; 2], radius: f64, kmax: i64) -> usize {
    let mut count = 0;
    for j in -kmax..=kmax {
        for k in -kmax..=kmax {
            let x = gen[0][0] * j as f64 + gen[0][1] * k as f64;
            let y = gen[1][0] * j as f64 + gen[1][1] * k as f64;
            if (x * x + y * y).sqrt() <= radius + 1e-12 {
                count += 1;
            }
        }
    }
    count
}

/// The oversampled density-2 configuration used across the suites:
/// raw Gaussian on (1/√2)ℤ².
pub fn density2_lattice() -> LatticeSpec {
    LatticeSpec::scaled_identity(1, INV_SQRT_2).unwrap()
}

pub fn density2_points(radius: f64) -> PointSet {
    enumerate_lattice_in_ball(&density2_lattice(), radius, 20_000).unwrap()
}

pub fn density2_gram(radius: f64) -> GramSection {
    let w = WindowSpec::gaussian(1, false).unwrap();
    assemble_gram(&w, &density2_points(radius)).unwrap()
}

pub fn critical_gram(radius: f64) -> GramSection {
    let w = WindowSpec::gaussian(1, false).unwrap();
    let ps = enumerate_lattice_in_ball(&LatticeSpec::identity(1), radius, 20_000).unwrap();
    assemble_gram(&w, &ps).unwrap()
}
