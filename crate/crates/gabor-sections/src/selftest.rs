//! Built-in check suite behind `gabor-sections selftest`: closed-form
//! values, enumeration counts, weight laws, eigenvalue identities and the
//! contour projector on solvable synthetics. Everything here runs in a
//! few seconds and needs no configuration.

use crate::gram::assemble_gram;
use crate::kernel::{contour_projection_matrix, ContourSpec};
use crate::pointset::{enumerate_lattice_in_ball, relative_separation, LatticeSpec, PointSet};
use crate::spectrum::{detect_gap, eigs_hermitian, eigs_hermitian_matrix};
use crate::tf::TfPoint;
use crate::weight::{bound_sup, grs_profile, submultiplicative_check, WeightSpec};
use crate::window::{gaussian_ambiguity, numeric_ambiguity, WindowSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(
    results: &mut Vec<CheckResult>,
    name: &'static str,
    run: impl FnOnce() -> Result<String, String>,
) {
    let (pass, detail) = match run() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    results.push(CheckResult { name, pass, detail });
}

fn expect_close(label: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    if (got - want).abs() <= tol * want.abs().max(1.0) {
        Ok(format!("{label}: {got}"))
    } else {
        Err(format!("{label}: got {got}, want {want} (tol {tol})"))
    }
}

const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Runs every check; the CLI exits nonzero if any fails.
pub fn run_selftest() -> Vec<CheckResult> {
    let mut r = Vec::new();

    check(&mut r, "gaussian ambiguity at the origin", || {
        let a = gaussian_ambiguity(&TfPoint::origin(1), 1);
        expect_close("A(0)", a.re, INV_SQRT_2, 1e-14)
    });

    check(&mut r, "gaussian ambiguity at (1,0)", || {
        let a = gaussian_ambiguity(&TfPoint::new_1d(1.0, 0.0).unwrap(), 1);
        expect_close("A((1,0))", a.re, 0.1469930581078104, 1e-12)
    });

    check(&mut r, "gaussian ambiguity phase at (1,1)", || {
        let a = gaussian_ambiguity(&TfPoint::new_1d(1.0, 1.0).unwrap(), 1);
        expect_close("A((1,1))", a.re, -0.030556854645954554, 1e-12)
    });

    check(&mut r, "quadrature matches closed form at (1,0)", || {
        let g = WindowSpec::gaussian(1, false).unwrap();
        let q = numeric_ambiguity(&g, &TfPoint::new_1d(1.0, 0.0).unwrap())
            .map_err(|e| e.to_string())?;
        expect_close("quadrature", q.re, 0.1469930581078104, 1e-6)
    });

    check(&mut r, "lattice ball counts", || {
        let d2 = LatticeSpec::scaled_identity(1, INV_SQRT_2).unwrap();
        let c13 = enumerate_lattice_in_ball(&d2, 2.0_f64.sqrt(), 20_000)
            .map_err(|e| e.to_string())?
            .len();
        let c5 = enumerate_lattice_in_ball(&LatticeSpec::identity(1), 1.0, 20_000)
            .map_err(|e| e.to_string())?
            .len();
        if c13 == 13 && c5 == 5 {
            Ok(format!("counts 13 and 5"))
        } else {
            Err(format!("got {c13} and {c5}, want 13 and 5"))
        }
    });

    check(&mut r, "relative separation of Z^2", || {
        let ps = enumerate_lattice_in_ball(&LatticeSpec::identity(1), 4.0, 20_000)
            .map_err(|e| e.to_string())?;
        let n = relative_separation(&ps);
        if n == 5 {
            Ok("5".into())
        } else {
            Err(format!("got {n}, want 5"))
        }
    });

    check(&mut r, "weight values and GRS profiles", || {
        let p = WeightSpec::Polynomial { s: 2.0 };
        expect_close("(1+3)^2", p.eval_radial(3.0), 16.0, 1e-14)?;
        let z = TfPoint::new_1d(1.0, 0.0).unwrap();
        let g = grs_profile(&p, &z, &[1_000_000]);
        expect_close("poly GRS", g[0], 1.0000276314048562, 1e-9)?;
        let e = grs_profile(&WeightSpec::Exponential { a: 1.0 }, &z, &[7]);
        expect_close("exp GRS", e[0], 1.0_f64.exp(), 1e-12)
    });

    check(&mut r, "submultiplicativity of the three families", || {
        for v in [
            WeightSpec::Polynomial { s: 2.0 },
            WeightSpec::SubExponential { a: 1.0, b: 0.5 },
            WeightSpec::Exponential { a: 1.0 },
        ] {
            let rep = submultiplicative_check(&v, 1, 200, 7);
            if !rep.pass {
                return Err(format!("{v:?} failed with ratio {}", rep.worst_ratio));
            }
        }
        Ok("3 families pass".into())
    });

    check(&mut r, "tail sup bound on Z^2", || {
        let ps = enumerate_lattice_in_ball(&LatticeSpec::identity(1), 6.0, 20_000)
            .map_err(|e| e.to_string())?;
        let b = bound_sup(&WeightSpec::Polynomial { s: 1.0 }, &ps, 1.0)
            .map_err(|e| e.to_string())?;
        expect_close("(1+sqrt2)^-2", b, 0.1715728752538099, 1e-12)
    });

    check(&mut r, "2x2 section eigenvalues", || {
        let ps = PointSet::from_points(
            1,
            vec![
                TfPoint::origin(1),
                TfPoint::new_1d(INV_SQRT_2, 0.0).unwrap(),
            ],
        )
        .map_err(|e| e.to_string())?;
        let g = assemble_gram(&WindowSpec::gaussian(1, false).unwrap(), &ps)
            .map_err(|e| e.to_string())?;
        let eigs = eigs_hermitian(&g).map_err(|e| e.to_string())?;
        expect_close("lambda_min", eigs[0], 0.38470983924171308, 1e-10)?;
        expect_close("lambda_max", eigs[1], 1.029503723131382, 1e-10)
    });

    check(&mut r, "contour projector on diag(0,0,1,2)", || {
        let mut m = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
        for (i, v) in [0.0, 0.0, 1.0, 2.0].iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        let eigs = eigs_hermitian_matrix(&m).map_err(|e| e.to_string())?;
        let gap = detect_gap(&eigs, 1e-6);
        let spec = ContourSpec::with_radius(&gap, 0.5, 32).map_err(|e| e.to_string())?;
        let p = contour_projection_matrix(&m, &spec).map_err(|e| e.to_string())?;
        if p.rank_estimate == 2 && p.idempotency_defect < 1e-9 {
            Ok(format!("trace {}", p.trace))
        } else {
            Err(format!(
                "rank {} defect {}",
                p.rank_estimate, p.idempotency_defect
            ))
        }
    });

    check(&mut r, "gap detection on synthetic spectra", || {
        let found = detect_gap(&[1e-18, 0.4, 0.9], 1e-6);
        let empty = detect_gap(&[0.3, 0.5], 1e-6);
        if found.gap_found && !empty.gap_found {
            Ok("decade rule holds".into())
        } else {
            Err("gap flags wrong".into())
        }
    });

    r
}
