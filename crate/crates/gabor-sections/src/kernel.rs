//! Spectral projection onto the near-kernel of a Gram section via the
//! contour integral P = (2πi)^{-1} ∮ (zI - G)^{-1} dz, extraction of a
//! decaying near-kernel vector, and the inequality chain that links the
//! tail mass of that vector to the collapse of the lower Riesz bound.
//!
//! On a finite section the kernel of G is generically trivial; "kernel"
//! here always means the sub-ρ near-kernel eigenspace, and every output
//! that mentions it says so.

use crate::gram::GramSection;
use crate::pointset::PointSet;
use crate::spectrum::{eigs_hermitian_matrix, GapReport, SpectrumError};
use crate::weight::WeightSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("no spectral gap: the gap report has gap_found = false")]
    GapMissing,
    #[error("contour radius {rho:.3e} is not strictly inside the gap ({lo:.3e}, {hi:.3e})")]
    RhoOutsideGap { rho: f64, lo: f64, hi: f64 },
    #[error("need at least 16 contour nodes, got {nodes}")]
    TooFewNodes { nodes: usize },
    #[error("resolvent solve at node {node} stalled with residual {residual:.3e} (limit {limit:.3e}): an eigenvalue lies on or near the contour")]
    SingularResolvent {
        node: usize,
        residual: f64,
        limit: f64,
    },
    #[error("projection degraded: trace {trace} is {defect:.3e} from an integer (limit 1e-6); move ρ or raise M")]
    TraceNotInteger { trace: f64, defect: f64 },
    #[error("projection degraded: idempotency defect {defect:.3e} exceeds {limit:.3e}")]
    NotIdempotent { defect: f64, limit: f64 },
    #[error("projection has rank 0: nothing below the contour")]
    RankZero,
    #[error("only {found} coefficients above 1e-14; need at least 8 for a decay fit")]
    TooFewPoints { found: usize },
    #[error("spectrum: {0}")]
    Spectrum(#[from] SpectrumError),
}

/// Relative residual demanded of every resolvent solve.
const SOLVE_RESIDUAL_TOL: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 4;

/// Circle |z| = ρ around the origin, discretized by M uniform trapezoid
/// nodes. ρ must sit strictly inside the spectral gap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContourSpec {
    pub rho: f64,
    pub nodes: usize,
}

pub const DEFAULT_CONTOUR_NODES: usize = 64;

impl ContourSpec {
    /// Default contour from a gap report: ρ = Â/2, M = 64. Errors with
    /// `GapMissing` when the report found no decade-separated gap.
    pub fn from_gap(gap: &GapReport) -> Result<Self, KernelError> {
        if !gap.gap_found {
            return Err(KernelError::GapMissing);
        }
        let (a_hat, _) = gap.band.expect("gap_found implies a band");
        Self::with_radius(gap, a_hat / 2.0, DEFAULT_CONTOUR_NODES)
    }

    /// Explicit-ρ construction (the config override path). Validates that
    /// ρ lies strictly between the zero-cluster maximum and the band
    /// minimum of the partition, without requiring the decade flag.
    pub fn with_radius(gap: &GapReport, rho: f64, nodes: usize) -> Result<Self, KernelError> {
        if nodes < 16 {
            return Err(KernelError::TooFewNodes { nodes });
        }
        let lo = gap.cluster_zero.last().copied().unwrap_or(0.0).max(0.0);
        let hi = match gap.band {
            Some((a_hat, _)) => a_hat,
            None => f64::INFINITY,
        };
        if !(rho > lo && rho < hi) {
            return Err(KernelError::RhoOutsideGap { rho, lo, hi });
        }
        Ok(Self { rho, nodes })
    }
}

/// The assembled spectral projector with its quality diagnostics.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    matrix: DMatrix<Complex64>,
    pub rho: f64,
    pub nodes: usize,
    pub trace: f64,
    pub rank_estimate: usize,
    pub idempotency_defect: f64,
    /// ‖G·P‖_F / ‖G‖_F — how well P annihilates G.
    pub residual: f64,
}

impl ProjectionResult {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// Contour projection of a Gram section; see
/// [`contour_projection_matrix`] for the numerics.
pub fn contour_projection(
    g: &GramSection,
    contour: &ContourSpec,
) -> Result<ProjectionResult, KernelError> {
    contour_projection_matrix(g.matrix(), contour)
}

/// P ≈ (1/M) Σ_j z_j (z_j I - G)^{-1} with z_j = ρ e^{2πi j/M}: the
/// trapezoid rule applied to the resolvent contour integral (dz/(2πi)
/// contributes the z_j/M factor). Each resolvent is a dense LU solve with
/// iterative refinement to relative residual 1e-10; the node solves run in
/// parallel and are summed in node order, then the result is symmetrized.
///
/// The trace must land within 1e-6 of an integer and the idempotency
/// defect below 1e-8·N, otherwise the projection is rejected as degraded
/// (an eigenvalue sits too close to the contour for the node count).
pub fn contour_projection_matrix(
    g: &DMatrix<Complex64>,
    contour: &ContourSpec,
) -> Result<ProjectionResult, KernelError> {
    let n = g.nrows();
    let m = contour.nodes;
    let rho = contour.rho;
    let identity = DMatrix::<Complex64>::identity(n, n);
    let rhs_norm = identity.norm();

    let terms: Result<Vec<DMatrix<Complex64>>, KernelError> = (0..m)
        .into_par_iter()
        .map(|j| {
            let z = Complex64::from_polar(rho, 2.0 * PI * j as f64 / m as f64);
            let shifted = &identity * z - g;
            let x = refined_solve(&shifted, &identity, rhs_norm)
                .map_err(|residual| KernelError::SingularResolvent {
                    node: j,
                    residual,
                    limit: SOLVE_RESIDUAL_TOL * rhs_norm,
                })?;
            Ok(x * z)
        })
        .collect();
    let terms = terms?;

    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for t in &terms {
        p += t;
    }
    p /= Complex64::new(m as f64, 0.0);
    let p = (&p + p.adjoint()) * Complex64::new(0.5, 0.0);

    let trace = p.diagonal().iter().map(|c| c.re).sum::<f64>();
    let trace_defect = (trace - trace.round()).abs();
    if trace_defect > 1e-6 {
        return Err(KernelError::TraceNotInteger {
            trace,
            defect: trace_defect,
        });
    }
    let idempotency_defect = (&p * &p - &p).norm();
    let idem_limit = 1e-8 * n as f64;
    if idempotency_defect > idem_limit {
        return Err(KernelError::NotIdempotent {
            defect: idempotency_defect,
            limit: idem_limit,
        });
    }
    let g_norm = g.norm();
    let residual = if g_norm > 0.0 {
        (g * &p).norm() / g_norm
    } else {
        0.0
    };
    Ok(ProjectionResult {
        rank_estimate: trace.round() as usize,
        matrix: p,
        rho,
        nodes: m,
        trace,
        idempotency_defect,
        residual,
    })
}

/// LU solve of `a X = I` with iterative refinement; returns the residual
/// on failure.
fn refined_solve(
    a: &DMatrix<Complex64>,
    identity: &DMatrix<Complex64>,
    rhs_norm: f64,
) -> Result<DMatrix<Complex64>, f64> {
    let lu = a.clone().lu();
    let mut x = lu.solve(identity).ok_or(f64::INFINITY)?;
    let mut residual = (identity - a * &x).norm();
    for _ in 0..REFINEMENT_STEPS {
        if residual <= SOLVE_RESIDUAL_TOL * rhs_norm {
            break;
        }
        let r = identity - a * &x;
        match lu.solve(&r) {
            Some(dx) => {
                x += dx;
                residual = (identity - a * &x).norm();
            }
            None => break,
        }
    }
    if residual > SOLVE_RESIDUAL_TOL * rhs_norm {
        return Err(residual);
    }
    Ok(x)
}

/// The decaying near-kernel representative: the unit column of P with the
/// largest norm, c = P e_{μ*} / ‖P e_{μ*}‖₂.
#[derive(Debug, Clone)]
pub struct KernelVector {
    /// id of μ* in the canonical point order.
    pub index: usize,
    pub coeffs: Vec<Complex64>,
}

pub fn kernel_vector(p: &ProjectionResult, ps: &PointSet) -> Result<KernelVector, KernelError> {
    if p.rank_estimate == 0 {
        return Err(KernelError::RankZero);
    }
    let n = ps.len();
    debug_assert_eq!(p.matrix.nrows(), n);
    let mut best = 0;
    let mut best_norm = -1.0;
    for j in 0..n {
        let nrm = p.matrix.column(j).norm();
        if nrm > best_norm {
            best_norm = nrm;
            best = j;
        }
    }
    let col = p.matrix.column(best);
    let coeffs: Vec<Complex64> = col.iter().map(|c| c / best_norm).collect();
    Ok(KernelVector {
        index: best,
        coeffs,
    })
}

/// Regression report for the decay of a coefficient vector: log|c_λ|
/// against |λ| (exponential-type) and against log(1+|λ|) (polynomial
/// comparison), plus the weighted ℓ¹_v sum.
#[derive(Debug, Clone, Serialize)]
pub struct KernelDecayFit {
    pub exp_slope: f64,
    pub exp_intercept: f64,
    pub exp_r_squared: f64,
    pub poly_slope: f64,
    pub poly_intercept: f64,
    pub poly_r_squared: f64,
    pub points_used: usize,
    /// Σ |c_λ| v(λ) over all entries.
    pub l1v_sum: f64,
}

const DECAY_FIT_FLOOR: f64 = 1e-14;

pub fn decay_fit(
    coeffs: &[Complex64],
    ps: &PointSet,
    v: &WeightSpec,
) -> Result<KernelDecayFit, KernelError> {
    debug_assert_eq!(coeffs.len(), ps.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        let a = c.norm();
        if a > DECAY_FIT_FLOOR {
            xs.push(ps.norms()[i]);
            ys.push(a.ln());
        }
    }
    if xs.len() < 8 {
        return Err(KernelError::TooFewPoints { found: xs.len() });
    }
    let (exp_slope, exp_intercept, exp_r_squared) = least_squares_line(&xs, &ys);
    let logx: Vec<f64> = xs.iter().map(|&r| (1.0 + r).ln()).collect();
    let (poly_slope, poly_intercept, poly_r_squared) = least_squares_line(&logx, &ys);
    let l1v_sum = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm() * v.eval_radial(ps.norms()[i]))
        .sum();
    Ok(KernelDecayFit {
        exp_slope,
        exp_intercept,
        exp_r_squared,
        poly_slope,
        poly_intercept,
        poly_r_squared,
        points_used: xs.len(),
        l1v_sum,
    })
}

pub(crate) fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let e = b - (slope * a + intercept);
            e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r_squared)
}

/// One row of the tail-mass inequality table: does
/// a_n ≤ 2·B̂·Σ_{|λ|>n}|c_λ|² + slack hold on the sub-section of radius n?
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LemmaRow {
    pub radius: f64,
    pub size: usize,
    /// a_n of the sub-section.
    pub lhs: f64,
    /// Σ_{|λ|>n} |c_λ|².
    pub tail_mass: f64,
    /// 4·B̂·‖G c‖₂ — first-order allowance for c being only a near-kernel
    /// vector; zero for an exact kernel vector.
    pub slack: f64,
    pub rhs: f64,
    /// Σ_{|λ|≤n} |c_λ|² ≥ 1/2 (the "sufficiently large n" hypothesis).
    pub mass_ok: bool,
    pub pass: bool,
}

/// Checks the inequality chain radius by radius. `mass_ok = false` rows
/// are reported, not fatal.
pub fn lemma_bound_check(
    coeffs: &[Complex64],
    g_full: &GramSection,
    sub_radii: &[f64],
    b_hat: f64,
) -> Result<Vec<LemmaRow>, KernelError> {
    let n = g_full.len();
    debug_assert_eq!(coeffs.len(), n);
    let ps = g_full.pointset();

    // ‖G c‖₂ once, on the full section
    let cvec = nalgebra::DVector::from_column_slice(coeffs);
    let gc_norm = (g_full.matrix() * &cvec).norm();
    let slack = 4.0 * b_hat * gc_norm;

    let mut rows = Vec::with_capacity(sub_radii.len());
    for &r in sub_radii {
        let m = ps.prefix_len(r);
        let (_, sub) = g_full.leading_section(r);
        let eigs = eigs_hermitian_matrix(&sub)?;
        let lhs = eigs[0];
        let head: f64 = coeffs[..m].iter().map(|c| c.norm_sqr()).sum();
        let tail: f64 = coeffs[m..].iter().map(|c| c.norm_sqr()).sum();
        let rhs = 2.0 * b_hat * tail + slack;
        rows.push(LemmaRow {
            radius: r,
            size: m,
            lhs,
            tail_mass: tail,
            slack,
            rhs,
            mass_ok: head >= 0.5,
            pass: lhs <= rhs,
        });
    }
    Ok(rows)
}

/// sup_{λμ} |((zI-G)^{-1})_{λμ}| v(λ-μ) — a finite-section witness of the
/// inverse-closedness of the off-diagonal-decay classes.
pub fn resolvent_decay_probe(
    g: &GramSection,
    z: Complex64,
    v: &WeightSpec,
) -> Result<f64, KernelError> {
    let n = g.len();
    let identity = DMatrix::<Complex64>::identity(n, n);
    let shifted = &identity * z - g.matrix();
    let x =
        refined_solve(&shifted, &identity, identity.norm()).map_err(|residual| {
            KernelError::SingularResolvent {
                node: 0,
                residual,
                limit: SOLVE_RESIDUAL_TOL * identity.norm(),
            }
        })?;
    let ps = g.pointset();
    let mut best = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let a = x[(i, j)].norm();
            if a == 0.0 {
                continue;
            }
            let val = a * v.eval_radial(ps.point(i).sub(ps.point(j)).norm());
            if val > best {
                best = val;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::{enumerate_lattice_in_ball, LatticeSpec, PointSet};
    use crate::spectrum::detect_gap;
    use crate::tf::TfPoint;
    use approx::assert_relative_eq;

    fn diag_matrix(values: &[f64]) -> DMatrix<Complex64> {
        let n = values.len();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    fn gap_of(m: &DMatrix<Complex64>, threshold: f64) -> GapReport {
        detect_gap(&eigs_hermitian_matrix(m).unwrap(), threshold)
    }

    #[test]
    fn contour_projects_diag_two() {
        let m = diag_matrix(&[0.0, 1.0]);
        let gap = gap_of(&m, 1e-6);
        assert!(gap.gap_found);
        // M = 64: trapezoid truncation (ρ/θ)^M = 2^{-64} ≈ 5.4e-20
        let spec = ContourSpec::with_radius(&gap, 0.5, 64).unwrap();
        let p = contour_projection_matrix(&m, &spec).unwrap();
        assert!((p.matrix()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(p.matrix()[(1, 1)].norm() < 1e-12);
        assert_eq!(p.rank_estimate, 1);
        assert!(p.idempotency_defect < 1e-12);

        // M = 32 leaves the documented geometric truncation 2^{-32}/(1-2^{-32})
        let spec32 = ContourSpec::with_radius(&gap, 0.5, 32).unwrap();
        let p32 = contour_projection_matrix(&m, &spec32).unwrap();
        let err = p32.matrix()[(1, 1)].norm();
        let geo = (0.5_f64).powi(32) / (1.0 - (0.5_f64).powi(32));
        assert_relative_eq!(err, geo, max_relative = 1e-3);
    }

    #[test]
    fn contour_trace_counts_cluster() {
        let m = diag_matrix(&[0.0, 0.0, 1.0, 2.0]);
        let gap = gap_of(&m, 1e-6);
        let spec = ContourSpec::with_radius(&gap, 0.5, 32).unwrap();
        let p = contour_projection_matrix(&m, &spec).unwrap();
        assert_eq!(p.rank_estimate, 2);
        assert!((p.trace - 2.0).abs() < 1e-9);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && i < 2 { 1.0 } else { 0.0 };
                assert!(
                    (p.matrix()[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-9,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn contour_rejects_bad_spec() {
        let m = diag_matrix(&[0.0, 1.0]);
        let gap = gap_of(&m, 1e-6);
        assert!(matches!(
            ContourSpec::with_radius(&gap, 1.5, 32),
            Err(KernelError::RhoOutsideGap { .. })
        ));
        assert!(matches!(
            ContourSpec::with_radius(&gap, 0.5, 8),
            Err(KernelError::TooFewNodes { .. })
        ));
        // gapless report refuses the default constructor
        let no_gap = detect_gap(&[0.3, 0.9], 1e-6);
        assert!(matches!(
            ContourSpec::from_gap(&no_gap),
            Err(KernelError::GapMissing)
        ));
    }

    #[test]
    fn contour_detects_degraded_projection() {
        // an eigenvalue just inside the contour: at M = 32 the trapezoid
        // truncation (0.9)^32 ≈ 3.4e-2 pushes the trace off an integer
        let m = diag_matrix(&[0.0, 0.45, 1.0]);
        let gap = gap_of(&m, 0.46);
        let spec = ContourSpec::with_radius(&gap, 0.5, 32).unwrap();
        assert!(matches!(
            contour_projection_matrix(&m, &spec),
            Err(KernelError::TraceNotInteger { .. })
        ));
    }

    #[test]
    fn kernel_vector_of_exact_projector() {
        let pts: Vec<TfPoint> = (0..2)
            .map(|i| TfPoint::new_1d(i as f64, 0.0).unwrap())
            .collect();
        let ps = PointSet::from_points(1, pts).unwrap();
        let m = diag_matrix(&[0.0, 1.0]);
        let gap = gap_of(&m, 1e-6);
        let spec = ContourSpec::with_radius(&gap, 0.5, 64).unwrap();
        let p = contour_projection_matrix(&m, &spec).unwrap();
        let kv = kernel_vector(&p, &ps).unwrap();
        assert_eq!(kv.index, 0);
        assert!((kv.coeffs[0].norm() - 1.0).abs() < 1e-12);
        assert!(kv.coeffs[1].norm() < 1e-10);
        let norm: f64 = kv.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_zero_is_an_error() {
        let pts: Vec<TfPoint> = (0..2)
            .map(|i| TfPoint::new_1d(i as f64, 0.0).unwrap())
            .collect();
        let ps = PointSet::from_points(1, pts).unwrap();
        let m = diag_matrix(&[1.0, 1.0]);
        let gap = gap_of(&m, 1e-6);
        let spec = ContourSpec::with_radius(&gap, 0.5, 32).unwrap();
        let p = contour_projection_matrix(&m, &spec).unwrap();
        assert_eq!(p.rank_estimate, 0);
        assert!(matches!(
            kernel_vector(&p, &ps),
            Err(KernelError::RankZero)
        ));
    }

    #[test]
    fn decay_fit_synthetic_exponential() {
        // c_λ = e^{-|λ|} on Z² within radius 6: slope -1 exactly
        let lat = LatticeSpec::identity(1);
        let ps = enumerate_lattice_in_ball(&lat, 6.0, 20_000).unwrap();
        let mut coeffs: Vec<Complex64> = ps
            .norms()
            .iter()
            .map(|&r| Complex64::new((-r).exp(), 0.0))
            .collect();
        let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut coeffs {
            *c /= total;
        }
        let fit = decay_fit(&coeffs, &ps, &WeightSpec::Constant).unwrap();
        assert_relative_eq!(fit.exp_slope, -1.0, epsilon = 0.01);
        assert!(fit.exp_r_squared > 0.999);
        assert!(fit.l1v_sum.is_finite());
    }

    #[test]
    fn decay_fit_too_few_points() {
        let ps = PointSet::from_points(
            1,
            (0..10)
                .map(|i| TfPoint::new_1d(i as f64, 0.0).unwrap())
                .collect(),
        )
        .unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 10];
        coeffs[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            decay_fit(&coeffs, &ps, &WeightSpec::Constant),
            Err(KernelError::TooFewPoints { found: 1 })
        ));
    }

    #[test]
    fn lemma_holds_with_zero_slack_on_exact_kernel() {
        // block matrix diag(K, I) with K = [[1,-1],[-1,1]]: kernel (1,1)/√2
        let pts: Vec<TfPoint> = [0.0, 1.0, 3.0, 4.0, 5.0]
            .iter()
            .map(|&x| TfPoint::new_1d(x, 0.0).unwrap())
            .collect();
        let ps = PointSet::from_points(1, pts).unwrap();
        let n = 5;
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m[(0, 1)] = Complex64::new(-1.0, 0.0);
        m[(1, 0)] = Complex64::new(-1.0, 0.0);
        let section = GramSection::from_parts(m, ps, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        coeffs[0] = Complex64::new(s, 0.0);
        coeffs[1] = Complex64::new(s, 0.0);
        let rows = lemma_bound_check(&coeffs, &section, &[2.0], 2.0).unwrap();
        let row = &rows[0];
        assert_eq!(row.size, 2);
        assert_eq!(row.slack, 0.0);
        assert_eq!(row.tail_mass, 0.0);
        assert!(row.mass_ok);
        // lhs = min eig of K = 0, rhs = 0: holds with equality
        assert!(row.lhs.abs() < 1e-15);
        assert!(row.pass);
    }

    #[test]
    fn lemma_mass_condition_flagged() {
        let pts: Vec<TfPoint> = [0.0, 3.0, 4.0]
            .iter()
            .map(|&x| TfPoint::new_1d(x, 0.0).unwrap())
            .collect();
        let ps = PointSet::from_points(1, pts).unwrap();
        let m = DMatrix::<Complex64>::identity(3, 3);
        let section = GramSection::from_parts(m, ps, 1.0).unwrap();
        // all mass beyond radius 1: the head holds none of it
        let coeffs = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let rows = lemma_bound_check(&coeffs, &section, &[1.0], 1.0).unwrap();
        assert!(!rows[0].mass_ok);
    }

    #[test]
    fn resolvent_probe_identity_case() {
        // G = 0: resolvent at z = 1 is the identity, norm v(0)·1 = 1
        let pts: Vec<TfPoint> = (0..3)
            .map(|i| TfPoint::new_1d(i as f64, 0.0).unwrap())
            .collect();
        let ps = PointSet::from_points(1, pts).unwrap();
        let m = DMatrix::from_element(3, 3, Complex64::new(0.0, 0.0));
        let section = GramSection::from_parts(m, ps, 0.0).unwrap();
        let norm = resolvent_decay_probe(
            &section,
            Complex64::new(1.0, 0.0),
            &WeightSpec::Polynomial { s: 2.0 },
        )
        .unwrap();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
    }
}
