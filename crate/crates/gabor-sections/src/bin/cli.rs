//! Command-line front end: sweep, gram-dump, kernel, fit, bounds, selftest.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.
//! Every failure prints a single machine-parsable line on stderr:
//! `error: code=<1|2> kind=<Kind> msg="<text>"`.

use clap::{Parser, Subcommand};
use gabor_sections::config::{ConfigError, RunConfig};
use gabor_sections::gram::{assemble_gram, GramError, GramSection};
use gabor_sections::kernel::{
    contour_projection, decay_fit, kernel_vector, lemma_bound_check, ContourSpec, KernelError,
};
use gabor_sections::pointset::{relative_separation, PointSetError};
use gabor_sections::report::{
    bound_comparison, fit_decay, DecayModel, KernelDiagnostics, ReportDoc, SweepRecord,
    KERNEL_INTERPRETATION,
};
use gabor_sections::selftest::run_selftest;
use gabor_sections::spectrum::{
    detect_gap, eigs_hermitian, riesz_sweep, SpectrumError,
    DEFAULT_GAP_THRESHOLD_FACTOR,
};
use gabor_sections::weight::{bound_sum, bound_sup, TailSumBound, WeightError, WeightSpec};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gabor-sections",
    about = "Finite sections of Gabor systems: Riesz-bound sweeps, Gram dumps, near-kernel projections",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mirror CSV outputs into this directory (default: the output dir).
    #[arg(long, global = true)]
    csv_dir: Option<PathBuf>,
    /// Also emit a gnuplot script next to the sweep CSV.
    #[arg(long, global = true)]
    plot: bool,
    /// Seed for the randomized checks in selftest.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: all cores; env GABOR_SECTIONS_THREADS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the effective configuration (defaults filled in) and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Riesz-bound sweep over the configured radii, with tail bounds.
    Sweep,
    /// Dump the full Gram matrix and its envelope profile as CSV.
    GramDump,
    /// Contour projection onto the near-kernel, kernel vector, lemma table.
    Kernel,
    /// Decay-law fits of the sweep.
    Fit,
    /// Tail-bound tables without assembling any Gram matrix.
    Bounds,
    /// Run the built-in check suite.
    Selftest,
}

struct Failure {
    code: u8,
    kind: &'static str,
    msg: String,
}

impl Failure {
    fn config(kind: &'static str, msg: impl Into<String>) -> Self {
        Failure {
            code: 1,
            kind,
            msg: msg.into(),
        }
    }
    fn numerical(kind: &'static str, msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind,
            msg: msg.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::config("ConfigError", e.to_string())
    }
}

impl From<PointSetError> for Failure {
    fn from(e: PointSetError) -> Self {
        match e {
            PointSetError::TooManyPoints { .. } => Failure::config("TooManyPoints", e.to_string()),
            _ => Failure::config("PointSetError", e.to_string()),
        }
    }
}

impl From<GramError> for Failure {
    fn from(e: GramError) -> Self {
        Failure::numerical("GramError", e.to_string())
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::NoConvergence { .. } => {
                Failure::numerical("NoConvergence", e.to_string())
            }
            _ => Failure::numerical("SpectrumError", e.to_string()),
        }
    }
}

impl From<KernelError> for Failure {
    fn from(e: KernelError) -> Self {
        let kind = match e {
            KernelError::GapMissing => "GapMissing",
            KernelError::SingularResolvent { .. } => "SingularResolvent",
            KernelError::RhoOutsideGap { .. } => "RhoOutsideGap",
            KernelError::TraceNotInteger { .. } | KernelError::NotIdempotent { .. } => {
                "ProjectionDegraded"
            }
            KernelError::RankZero => "RankZero",
            KernelError::TooFewPoints { .. } => "TooFewPoints",
            KernelError::TooFewNodes { .. } => "TooFewNodes",
            KernelError::Spectrum(_) => "NoConvergence",
        };
        Failure::numerical(kind, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config("IoFailure", e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: code={} kind={} msg={:?}", f.code, f.kind, f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    gabor_sections::init_thread_pool(cli.workers)
        .map_err(|e| Failure::config("ThreadPool", e.to_string()))?;

    if matches!(cli.command, Command::Selftest) {
        return selftest_cmd();
    }

    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::config("ConfigError", "--config <path> is required"))?;
    let cfg = RunConfig::from_path(config_path)?;

    if cli.print_config {
        let text = toml::to_string_pretty(&cfg)
            .map_err(|e| Failure::config("ConfigError", e.to_string()))?;
        print!("{text}");
        return Ok(());
    }

    match cli.command {
        Command::Sweep => sweep_cmd(cli, &cfg),
        Command::GramDump => gram_dump_cmd(cli, &cfg),
        Command::Kernel => kernel_cmd(cli, &cfg),
        Command::Fit => fit_cmd(cli, &cfg),
        Command::Bounds => bounds_cmd(cli, &cfg),
        Command::Selftest => unreachable!("handled above"),
    }
}

fn out_dirs(cli: &Cli, cfg: &RunConfig) -> Result<(PathBuf, PathBuf), Failure> {
    let out = cfg.output.dir.clone();
    fs::create_dir_all(&out)?;
    let csv = cli.csv_dir.clone().unwrap_or_else(|| out.clone());
    fs::create_dir_all(&csv)?;
    Ok((out, csv))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn assemble_full(cfg: &RunConfig) -> Result<GramSection, Failure> {
    let window = cfg.build_window()?;
    let ps = cfg.build_pointset(cfg.max_radius())?;
    Ok(assemble_gram(&window, &ps)?)
}

/// Tail bounds per radius over a deeper enumeration than the Gram needs.
/// Radii whose bound does not exist (no tail point, divergent remainder)
/// get `None` and a note instead of aborting the sweep.
fn tail_bounds(
    cfg: &RunConfig,
    v: &WeightSpec,
    notes: &mut Vec<String>,
) -> Result<Vec<(Option<f64>, Option<TailSumBound>)>, Failure> {
    let bound_ps = cfg.build_pointset(cfg.bound_radius())?;
    let n_rel = relative_separation(&bound_ps);
    let mut out = Vec::with_capacity(cfg.sweep.radii.len());
    for &r in &cfg.sweep.radii {
        let sup = match bound_sup(v, &bound_ps, r) {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("bound_sup unavailable at radius {r}: {e}"));
                None
            }
        };
        let sum = match bound_sum(v, &bound_ps, r, n_rel) {
            Ok(t) => Some(t),
            Err(WeightError::RemainderDominates { sum, remainder }) => {
                notes.push(format!(
                    "bound_sum diverges at radius {r}: remainder {remainder} exceeds sum {sum}"
                ));
                None
            }
            Err(e) => {
                notes.push(format!("bound_sum unavailable at radius {r}: {e}"));
                None
            }
        };
        out.push((sup, sum));
    }
    Ok(out)
}

fn sweep_records(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<Vec<SweepRecord>, Failure> {
    let gram = assemble_full(cfg)?;
    let rows = riesz_sweep(&gram, &cfg.sweep.radii)?;
    let v = cfg.build_weight()?;
    let bounds = tail_bounds(cfg, &v, notes)?;
    Ok(rows
        .iter()
        .zip(bounds)
        .map(|(r, (sup, sum))| SweepRecord::new(r, sup, sum))
        .collect())
}

fn sweep_cmd(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let (out, csv_dir) = out_dirs(cli, cfg)?;
    let mut notes = Vec::new();
    let records = sweep_records(cfg, &mut notes)?;

    let mut csv = String::from(SweepRecord::CSV_HEADER);
    csv.push('\n');
    for rec in &records {
        let mut buf = Vec::new();
        rec.write_csv_row(&mut buf).map_err(Failure::from)?;
        csv.push_str(&String::from_utf8_lossy(&buf));
    }
    write_file(&csv_dir.join("sweep.csv"), &csv)?;

    let riesz: Vec<gabor_sections::spectrum::RieszBounds> = records
        .iter()
        .map(|r| gabor_sections::spectrum::RieszBounds {
            radius: r.radius,
            size: r.size,
            a_n: r.a_n,
            b_n: r.b_n,
            floor: r.floor,
            below_floor: r.below_floor,
        })
        .collect();
    let mut fits = Vec::new();
    for model in [
        DecayModel::PowerLaw,
        DecayModel::Stretched { b: 0.5 },
        DecayModel::GaussianType,
    ] {
        match fit_decay(&riesz, model) {
            Ok(f) => fits.push(f),
            Err(e) => notes.push(format!("fit unavailable for {model:?}: {e}")),
        }
    }

    let doc = ReportDoc {
        config: serde_json::to_value(cfg).map_err(|e| Failure::config("Json", e.to_string()))?,
        sweep: records.clone(),
        gap: None,
        fits,
        bounds: Some(bound_comparison(records)),
        kernel: None,
        notes,
    };
    write_file(
        &out.join("report.json"),
        &doc.to_json()
            .map_err(|e| Failure::config("IoFailure", e.to_string()))?,
    )?;
    if cli.plot {
        write_file(&csv_dir.join("sweep.gp"), &doc.plot_script("sweep.csv"))?;
    }
    println!(
        "sweep: {} radii, N_max = {}, wrote {}",
        doc.sweep.len(),
        doc.sweep.last().map(|r| r.size).unwrap_or(0),
        out.join("report.json").display()
    );
    Ok(())
}

fn gram_dump_cmd(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let (_, csv_dir) = out_dirs(cli, cfg)?;
    let gram = assemble_full(cfg)?;
    let mut mat = Vec::new();
    gram.write_matrix_csv(&mut mat).map_err(Failure::from)?;
    fs::write(csv_dir.join("gram.csv"), mat)?;
    let mut env = Vec::new();
    gram.envelope_extract()
        .write_csv(&mut env)
        .map_err(Failure::from)?;
    fs::write(csv_dir.join("envelope.csv"), env)?;
    println!(
        "gram-dump: N = {}, wrote {} and {}",
        gram.len(),
        csv_dir.join("gram.csv").display(),
        csv_dir.join("envelope.csv").display()
    );
    Ok(())
}

fn kernel_cmd(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let (out, csv_dir) = out_dirs(cli, cfg)?;
    let gram = assemble_full(cfg)?;
    let eigs = eigs_hermitian(&gram)?;
    let b_n = *eigs.last().expect("nonempty section");
    let threshold = cfg
        .contour
        .gap_threshold
        .unwrap_or(DEFAULT_GAP_THRESHOLD_FACTOR * b_n);
    let gap = detect_gap(&eigs, threshold);

    let contour = match cfg.contour.rho {
        Some(rho) => ContourSpec::with_radius(&gap, rho, cfg.contour.nodes)?,
        None => ContourSpec::from_gap(&gap)?,
    };
    let projection = contour_projection(&gram, &contour)?;
    let kv = kernel_vector(&projection, gram.pointset())?;
    let v = cfg.build_weight()?;
    let decay = match decay_fit(&kv.coeffs, gram.pointset(), &v) {
        Ok(f) => Some(f),
        Err(KernelError::TooFewPoints { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let sub_radii: Vec<f64> = cfg
        .sweep
        .radii
        .iter()
        .copied()
        .filter(|&r| r < cfg.max_radius())
        .collect();
    let lemma = lemma_bound_check(&kv.coeffs, &gram, &sub_radii, b_n)?;

    let diagnostics = KernelDiagnostics {
        rho: projection.rho,
        nodes: projection.nodes,
        trace: projection.trace,
        rank_estimate: projection.rank_estimate,
        idempotency_defect: projection.idempotency_defect,
        residual: projection.residual,
        mu_star: kv.index,
        interpretation: KERNEL_INTERPRETATION,
        lemma: lemma.clone(),
        decay,
    };

    let doc = serde_json::json!({
        "config": serde_json::to_value(cfg).map_err(|e| Failure::config("Json", e.to_string()))?,
        "gap": gap,
        "kernel": diagnostics,
    });
    write_file(
        &out.join("kernel.json"),
        &serde_json::to_string_pretty(&doc).map_err(|e| Failure::config("Json", e.to_string()))?,
    )?;

    let mut vec_csv = String::from("id,x,xi,re,im,abs\n");
    for (i, c) in kv.coeffs.iter().enumerate() {
        let p = gram.pointset().point(i);
        let x: Vec<String> = p.x.iter().map(f64::to_string).collect();
        let xi: Vec<String> = p.xi.iter().map(f64::to_string).collect();
        vec_csv.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            x.join(";"),
            xi.join(";"),
            c.re,
            c.im,
            c.norm()
        ));
    }
    write_file(&csv_dir.join("kernel_vector.csv"), &vec_csv)?;

    let mut lemma_csv = String::from("radius,N,lhs,tail_mass,slack,rhs,mass_ok,pass\n");
    for row in &lemma {
        lemma_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.radius, row.size, row.lhs, row.tail_mass, row.slack, row.rhs, row.mass_ok, row.pass
        ));
    }
    write_file(&csv_dir.join("lemma.csv"), &lemma_csv)?;

    println!(
        "kernel: rank {} at rho = {:.3e}, mu* = {}, wrote {}",
        projection.rank_estimate,
        projection.rho,
        kv.index,
        out.join("kernel.json").display()
    );
    Ok(())
}

fn fit_cmd(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let (out, _) = out_dirs(cli, cfg)?;
    let gram = assemble_full(cfg)?;
    let rows = riesz_sweep(&gram, &cfg.sweep.radii)?;
    let mut fits = Vec::new();
    let mut notes = Vec::new();
    for model in [
        DecayModel::PowerLaw,
        DecayModel::Stretched { b: 0.5 },
        DecayModel::GaussianType,
    ] {
        match fit_decay(&rows, model) {
            Ok(f) => fits.push(f),
            Err(e) => notes.push(format!("{model:?}: {e}")),
        }
    }
    if fits.is_empty() {
        return Err(Failure::numerical(
            "TooFewPoints",
            format!("no model could be fitted: {notes:?}"),
        ));
    }
    let doc = serde_json::json!({
        "config": serde_json::to_value(cfg).map_err(|e| Failure::config("Json", e.to_string()))?,
        "fits": fits,
        "notes": notes,
    });
    write_file(
        &out.join("fits.json"),
        &serde_json::to_string_pretty(&doc).map_err(|e| Failure::config("Json", e.to_string()))?,
    )?;
    println!("fit: {} models, wrote {}", fits.len(), out.join("fits.json").display());
    Ok(())
}

fn bounds_cmd(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let (_, csv_dir) = out_dirs(cli, cfg)?;
    let v = cfg.build_weight()?;
    let mut notes = Vec::new();
    let bounds = tail_bounds(cfg, &v, &mut notes)?;
    let mut csv = String::from("radius,bound_sup,bound_sum,remainder\n");
    for (&r, (sup, sum)) in cfg.sweep.radii.iter().zip(&bounds) {
        let sup_s = sup.map(|b| b.to_string()).unwrap_or_default();
        let (sum_s, rem_s) = match sum {
            Some(t) => (t.total().to_string(), t.remainder.to_string()),
            None => (String::new(), String::new()),
        };
        csv.push_str(&format!("{r},{sup_s},{sum_s},{rem_s}\n"));
    }
    write_file(&csv_dir.join("bounds.csv"), &csv)?;
    for n in &notes {
        println!("note: {n}");
    }
    println!("bounds: wrote {}", csv_dir.join("bounds.csv").display());
    Ok(())
}

fn selftest_cmd() -> Result<(), Failure> {
    let results = run_selftest();
    let mut failed = 0;
    for c in &results {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", c.name, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Failure::numerical(
            "SelftestFailed",
            format!("{failed} of {} checks failed", results.len()),
        ));
    }
    println!("selftest: all {} checks passed", results.len());
    Ok(())
}
