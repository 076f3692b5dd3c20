//! Decay-rate fits of the measured A_n, comparison against the weight-tail
//! bounds, and the aggregated JSON report.

use crate::kernel::{least_squares_line, KernelDecayFit, LemmaRow};
use crate::spectrum::{GapReport, RieszBounds};
use crate::weight::TailSumBound;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("need at least 3 above-floor points for a fit, found {found}")]
    TooFewPoints { found: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Decay law fitted to the above-floor (radius, a_n) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DecayModel {
    /// log a vs log n — A_n = O(n^slope).
    PowerLaw,
    /// log a vs n^b with fixed b — A_n = O(e^{slope·n^b}).
    Stretched { b: f64 },
    /// log a vs n² — Gaussian-type decay.
    GaussianType,
}

impl DecayModel {
    fn transform(&self, radius: f64) -> Option<f64> {
        match self {
            DecayModel::PowerLaw => (radius > 0.0).then(|| radius.ln()),
            DecayModel::Stretched { b } => Some(radius.powf(*b)),
            DecayModel::GaussianType => Some(radius * radius),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    #[serde(flatten)]
    pub model: DecayModel,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Smallest radius whose a_n fell below the numerical-zero floor.
    pub floor_radius: Option<f64>,
}

/// Least-squares fit of the chosen model on the above-floor sweep rows.
/// Below-floor rows measure ε_mach, not A_n, and never enter a fit.
pub fn fit_decay(sweep: &[RieszBounds], model: DecayModel) -> Result<DecayFit, ReportError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in sweep.iter().filter(|r| !r.below_floor && r.a_n > 0.0) {
        if let Some(x) = model.transform(row.radius) {
            xs.push(x);
            ys.push(row.a_n.ln());
        }
    }
    if xs.len() < 3 {
        return Err(ReportError::TooFewPoints { found: xs.len() });
    }
    let (slope, intercept, r_squared) = least_squares_line(&xs, &ys);
    Ok(DecayFit {
        model,
        slope,
        intercept,
        r_squared,
        points_used: xs.len(),
        floor_radius: sweep
            .iter()
            .find(|r| r.below_floor)
            .map(|r| r.radius),
    })
}

/// One sweep radius with its Riesz bounds, theoretical tail bounds and
/// measured-to-bound ratios.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub radius: f64,
    pub size: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub floor: f64,
    pub below_floor: bool,
    pub bound_sup: Option<f64>,
    pub bound_sum: Option<f64>,
    pub bound_sum_remainder: Option<f64>,
    pub ratio_sup: Option<f64>,
    pub ratio_sum: Option<f64>,
}

impl SweepRecord {
    pub fn new(
        riesz: &RieszBounds,
        bound_sup: Option<f64>,
        bound_sum: Option<TailSumBound>,
    ) -> Self {
        SweepRecord {
            radius: riesz.radius,
            size: riesz.size,
            a_n: riesz.a_n,
            b_n: riesz.b_n,
            floor: riesz.floor,
            below_floor: riesz.below_floor,
            bound_sup,
            bound_sum: bound_sum.map(|t| t.total()),
            bound_sum_remainder: bound_sum.map(|t| t.remainder),
            ratio_sup: bound_sup.map(|b| riesz.a_n / b),
            ratio_sum: bound_sum.map(|t| riesz.a_n / t.total()),
        }
    }

    /// CSV header matching [`SweepRecord::write_csv_row`].
    pub const CSV_HEADER: &'static str =
        "radius,N,a_n,b_n,floor,below_floor,bound_sup,bound_sum,ratio_sup,ratio_sum";

    pub fn write_csv_row(&self, out: &mut impl Write) -> std::io::Result<()> {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            self.radius,
            self.size,
            self.a_n,
            self.b_n,
            self.floor,
            self.below_floor,
            opt(self.bound_sup),
            opt(self.bound_sum),
            opt(self.ratio_sup),
            opt(self.ratio_sum),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    /// Fewer than 3 above-floor ratios: nothing can be said.
    Insufficient,
}

/// Bounded-C witness over one ratio series: the maximum must be attained
/// in the first third of the above-floor radii and later ratios may not
/// exceed ten times that front maximum. This is a heuristic — no finite
/// run can confirm an asymptotic statement — and is labeled as such in
/// the report.
fn ratio_verdict(ratios: &[f64]) -> Verdict {
    if ratios.len() < 3 {
        return Verdict::Insufficient;
    }
    let k = ratios.len().div_ceil(3);
    let front_max = ratios[..k].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_all = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // first attainment of the maximum decides "attained at small n"
    let argmax = ratios.iter().position(|&r| r == max_all).unwrap_or(0);
    if argmax < k && ratios[k..].iter().all(|&r| r <= 10.0 * front_max) {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundComparison {
    pub rows: Vec<SweepRecord>,
    pub verdict_sup: Verdict,
    pub verdict_sum: Verdict,
    /// Reminder that the verdict is a finite-sample heuristic.
    pub note: &'static str,
}

/// Ratio table a_n / bound over the above-floor rows plus the per-family
/// bounded-C verdicts.
pub fn bound_comparison(rows: Vec<SweepRecord>) -> BoundComparison {
    let sup: Vec<f64> = rows
        .iter()
        .filter(|r| !r.below_floor)
        .filter_map(|r| r.ratio_sup)
        .collect();
    let sum: Vec<f64> = rows
        .iter()
        .filter(|r| !r.below_floor)
        .filter_map(|r| r.ratio_sum)
        .collect();
    BoundComparison {
        rows,
        verdict_sup: ratio_verdict(&sup),
        verdict_sum: ratio_verdict(&sum),
        note: "bounded-C witness is a finite-sample heuristic, not a proof of the asymptotic bound",
    }
}

/// Near-kernel diagnostics block of the report.
#[derive(Debug, Clone, Serialize)]
pub struct KernelDiagnostics {
    pub rho: f64,
    pub nodes: usize,
    pub trace: f64,
    pub rank_estimate: usize,
    pub idempotency_defect: f64,
    pub residual: f64,
    pub mu_star: usize,
    /// The near-kernel here is the sub-ρ eigenspace of the finite section,
    /// not a true kernel; this note travels with every kernel output.
    pub interpretation: &'static str,
    pub lemma: Vec<LemmaRow>,
    pub decay: Option<KernelDecayFit>,
}

pub const KERNEL_INTERPRETATION: &str =
    "finite-section near-kernel: the sub-rho eigenspace; the exact kernel of the infinite Gramian is out of numerical reach";

/// The aggregated run report; serializes to a stable, ordered JSON
/// document.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub config: serde_json::Value,
    pub sweep: Vec<SweepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<GapReport>,
    pub fits: Vec<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDiagnostics>,
    pub notes: Vec<String>,
}

impl ReportDoc {
    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// gnuplot script plotting log a_n and the log bounds against radius;
    /// expects the sweep CSV next to it.
    pub fn plot_script(&self, csv_name: &str) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set logscale y\n");
        s.push_str("set xlabel 'radius n'\n");
        s.push_str("set ylabel 'lower Riesz bound / tail bounds'\n");
        s.push_str("set key left bottom\n");
        s.push_str(&format!(
            "plot '{csv_name}' using 1:3 skip 1 with linespoints title 'a_n', \\\n"
        ));
        s.push_str(&format!(
            "     '{csv_name}' using 1:7 skip 1 with lines title 'sup bound', \\\n"
        ));
        s.push_str(&format!(
            "     '{csv_name}' using 1:8 skip 1 with lines title 'sum bound', \\\n"
        ));
        s.push_str(&format!(
            "     '{csv_name}' using 1:5 skip 1 with lines dashtype 2 title 'floor'\n"
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic_sweep(f: impl Fn(f64) -> f64) -> Vec<RieszBounds> {
        (1..=8)
            .map(|k| {
                let r = k as f64;
                let a = f(r);
                RieszBounds {
                    radius: r,
                    size: (10.0 * r * r) as usize,
                    a_n: a,
                    b_n: 2.0,
                    floor: 1e-18,
                    below_floor: false,
                }
            })
            .collect()
    }

    #[test]
    fn powerlaw_fit_exact() {
        let sweep = synthetic_sweep(|r| r.powi(-4));
        let fit = fit_decay(&sweep, DecayModel::PowerLaw).unwrap();
        assert_relative_eq!(fit.slope, -4.0, epsilon = 1e-9);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(fit.points_used, 8);
        assert!(fit.floor_radius.is_none());
    }

    #[test]
    fn stretched_fit_exact() {
        let sweep = synthetic_sweep(|r| (-2.0 * r.sqrt()).exp());
        let fit = fit_decay(&sweep, DecayModel::Stretched { b: 0.5 }).unwrap();
        assert_relative_eq!(fit.slope, -2.0, epsilon = 1e-9);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_fit_exact() {
        let sweep = synthetic_sweep(|r| (-0.7 * r * r).exp());
        let fit = fit_decay(&sweep, DecayModel::GaussianType).unwrap();
        assert_relative_eq!(fit.slope, -0.7, epsilon = 1e-9);
    }

    #[test]
    fn fits_exclude_below_floor() {
        let mut sweep = synthetic_sweep(|r| r.powi(-2));
        for row in sweep.iter_mut().skip(5) {
            row.below_floor = true;
        }
        let fit = fit_decay(&sweep, DecayModel::PowerLaw).unwrap();
        assert_eq!(fit.points_used, 5);
        assert_eq!(fit.floor_radius, Some(6.0));
    }

    #[test]
    fn too_few_points() {
        let sweep = synthetic_sweep(|_| 1.0);
        assert!(matches!(
            fit_decay(&sweep[..2], DecayModel::PowerLaw),
            Err(ReportError::TooFewPoints { found: 2 })
        ));
    }

    #[test]
    fn fit_scale_invariance() {
        let sweep = synthetic_sweep(|r| r.powi(-3));
        let scaled: Vec<RieszBounds> = sweep
            .iter()
            .map(|r| RieszBounds {
                a_n: 7.5 * r.a_n,
                ..*r
            })
            .collect();
        let f1 = fit_decay(&sweep, DecayModel::PowerLaw).unwrap();
        let f2 = fit_decay(&scaled, DecayModel::PowerLaw).unwrap();
        assert_relative_eq!(f1.slope, f2.slope, epsilon = 1e-12);
        assert_relative_eq!(f1.r_squared, f2.r_squared, epsilon = 1e-12);
        assert!((f2.intercept - f1.intercept - 7.5_f64.ln()).abs() < 1e-9);
    }

    fn records_from_ratios(ratios: &[f64]) -> Vec<SweepRecord> {
        ratios
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                // bound 0.5 per row: a_n = q * bound
                let riesz = RieszBounds {
                    radius: (i + 1) as f64,
                    size: i + 1,
                    a_n: q * 0.5,
                    b_n: 2.0,
                    floor: 1e-18,
                    below_floor: false,
                };
                SweepRecord::new(
                    &riesz,
                    Some(0.5),
                    Some(TailSumBound {
                        sum: 0.5,
                        remainder: 0.0,
                    }),
                )
            })
            .collect()
    }

    #[test]
    fn verdicts() {
        // all ratios equal: consistent (max attained at the front)
        let eq = bound_comparison(records_from_ratios(&[1.0; 6]));
        assert_eq!(eq.verdict_sup, Verdict::Consistent);

        // decreasing ratios: consistent
        let dec = bound_comparison(records_from_ratios(&[1.0, 0.5, 0.2, 0.1, 0.05, 0.01]));
        assert_eq!(dec.verdict_sup, Verdict::Consistent);

        // growing ratios: inconsistent
        let grow = bound_comparison(records_from_ratios(&[1.0, 2.0, 4.0, 8.0, 16.0, 32.0]));
        assert_eq!(grow.verdict_sup, Verdict::Inconsistent);

        // too few rows
        let few = bound_comparison(records_from_ratios(&[1.0, 0.5]));
        assert_eq!(few.verdict_sup, Verdict::Insufficient);
    }

    #[test]
    fn report_roundtrip_bit_exact() {
        let sweep = synthetic_sweep(|r| (-0.3 * r * r).exp());
        let records: Vec<SweepRecord> = sweep
            .iter()
            .map(|r| SweepRecord::new(r, Some(0.123456789012345678), None))
            .collect();
        let doc = ReportDoc {
            config: serde_json::json!({"window": {"kind": "gaussian"}}),
            sweep: records,
            gap: None,
            fits: vec![fit_decay(&sweep, DecayModel::GaussianType).unwrap()],
            bounds: None,
            kernel: None,
            notes: vec!["test".into()],
        };
        let text = doc.to_json().unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        for (i, rec) in doc.sweep.iter().enumerate() {
            let row = &parsed["sweep"][i];
            assert_eq!(row["a_n"].as_f64().unwrap(), rec.a_n);
            assert_eq!(row["b_n"].as_f64().unwrap(), rec.b_n);
            assert_eq!(row["floor"].as_f64().unwrap(), rec.floor);
            assert_eq!(row["ratio_sup"].as_f64().unwrap(), rec.ratio_sup.unwrap());
        }
        assert_eq!(
            parsed["fits"][0]["slope"].as_f64().unwrap(),
            doc.fits[0].slope
        );
    }

    #[test]
    fn csv_row_format() {
        let riesz = RieszBounds {
            radius: 1.5,
            size: 13,
            a_n: 6.25e-4,
            b_n: 1.47,
            floor: 4.2e-15,
            below_floor: false,
        };
        let rec = SweepRecord::new(&riesz, Some(0.08), None);
        let mut out = Vec::new();
        rec.write_csv_row(&mut out).unwrap();
        let line = String::from_utf8(out).unwrap();
        assert!(line.starts_with("1.5,13,0.000625,"));
        assert!(line.contains(",false,"));
        // bound_sum empty
        assert!(line.contains(",,"));
    }

    #[test]
    fn plot_script_mentions_csv() {
        let doc = ReportDoc {
            config: serde_json::Value::Null,
            sweep: vec![],
            gap: None,
            fits: vec![],
            bounds: None,
            kernel: None,
            notes: vec![],
        };
        let script = doc.plot_script("sweep.csv");
        assert!(script.contains("sweep.csv"));
        assert!(script.contains("logscale"));
    }
}
