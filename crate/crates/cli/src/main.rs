//! Command-line front end: ingest operator-spec files, run validation,
//! power diagnostics, classification and convergence probes, emit
//! structured reports and CSV series.
//!
//! Exit codes: 0 success, 1 analysis-level failure, 2 input error.

mod examples;
mod report;
mod specfile;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use boplab_core::analysis::{
    sot_probe, sup_en_norm, wot_probe, AdjointAction, ProbeStatus, SupEnDecision,
};
use boplab_core::classify::{
    adjoint_strong_stability, classify_sot, classify_wot, classify_wot_subnormal,
    never_strong_or_uniform, range_closedness, verify_semispectral, ClassifyParams,
};
use boplab_core::error::CoreError;

use report::RunReport;
use specfile::BuiltSpec;

#[derive(Parser)]
#[command(
    name = "boplab",
    version,
    about = "Numerical laboratory for B-operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for report/CSV output (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stdout format when --out is not given.
    #[arg(long, global = true, value_enum, default_value_t = Format::Report)]
    format: Format,
    /// Override the spec file's probe horizon.
    #[arg(long, global = true)]
    horizon: Option<u32>,
    /// Override the spec file's tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Report,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the three defining conditions on basis probes.
    Validate { spec: PathBuf },
    /// Power diagnostics: ||E_n|| series and Gram-identity residuals.
    Power {
        spec: PathBuf,
        #[arg(long, default_value_t = 64)]
        n: u32,
    },
    /// Run the classification rules (all, or one selected by --theorem).
    Classify {
        spec: PathBuf,
        /// One of: wot, sot, never-stable, subnormal, adjoint, range,
        /// semispectral.
        #[arg(long)]
        theorem: Option<String>,
    },
    /// Convergence probes with CSV series.
    Probe {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: ProbeMode,
    },
    /// Write a spec file for a gallery constructor.
    Example {
        name: String,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        multiplicity: u32,
        #[arg(long, default_value_t = (5f64.sqrt() - 1.0) / 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value = "quasi")]
        variant: String,
        #[arg(long, default_value_t = 32)]
        atoms: usize,
        /// Complex parameter as re or re,im.
        #[arg(long, default_value = "0.5", value_parser = parse_complex_flag)]
        z: C64,
        #[arg(long, default_value = "0.5", value_parser = parse_complex_flag)]
        w: C64,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProbeMode {
    Wot,
    Sot,
    AdjointSot,
}

fn parse_complex_flag(s: &str) -> Result<C64, String> {
    let (re, im) = match s.split_once(',') {
        Some((re, im)) => (re, im),
        None => (s, "0"),
    };
    Ok(C64::new(
        re.trim().parse::<f64>().map_err(|e| e.to_string())?,
        im.trim().parse::<f64>().map_err(|e| e.to_string())?,
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Input and parse problems exit 2; analysis problems exit 1.
            if err.downcast_ref::<std::io::Error>().is_some()
                || err.to_string().contains("line ")
                || err.to_string().contains("unknown example")
            {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn load(
    path: &PathBuf,
    cli_horizon: Option<u32>,
    cli_tol: Option<f64>,
) -> Result<(BuiltSpec, Vec<u8>)> {
    let bytes = fs::read(path)?;
    let text =
        String::from_utf8(bytes.clone()).map_err(|_| anyhow!("line 0: spec file is not utf-8"))?;
    let mut built = specfile::parse(&text)?;
    if let Some(h) = cli_horizon {
        built.horizon = h;
    }
    if let Some(t) = cli_tol {
        built.tol = t;
    }
    Ok((built, bytes))
}

/// Validation gate shared by the analysis commands.
fn gate(built: &BuiltSpec, report: &mut RunReport) -> Result<bool> {
    let validation = built
        .operator
        .validate(boplab_core::VALIDATION_HORIZON, 1e-10)?;
    report.push_block(&format!("{validation}"));
    if !validation.passed() {
        report.push("analysis skipped: the triple does not satisfy the defining conditions");
        return Ok(false);
    }
    built.facts.verify(&built.operator, 16, 1e-9)?;
    Ok(true)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let start = Instant::now();
    let out_dir = cli.out.as_deref();
    let csv_only = cli.format == Format::Csv;
    match cli.command {
        Command::Validate { spec } => {
            let (built, bytes) = load(&spec, cli.horizon, cli.tol)?;
            let mut report = RunReport::new("validate", &spec.display().to_string(), &bytes);
            let validation = built.operator.validate(
                cli.horizon.unwrap_or(boplab_core::VALIDATION_HORIZON),
                cli.tol.unwrap_or(boplab_core::ALGEBRA_TOL),
            )?;
            report.push(format!("name {}", built.name));
            report.push_block(&format!("{validation}"));
            let passed = validation.passed();
            report.push(format!("result {}", if passed { "pass" } else { "fail" }));
            report.wall_ms = start.elapsed().as_millis();
            report.emit(out_dir, "validate", csv_only)?;
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Power { spec, n } => {
            if n == 0 {
                return Err(CoreError::InvalidParameter("power index must be >= 1".into()).into());
            }
            let (built, bytes) = load(&spec, cli.horizon, cli.tol)?;
            let mut report = RunReport::new("power", &spec.display().to_string(), &bytes);
            report.push(format!("name {}", built.name));
            report.push(format!("seed {}", built.seed));
            if !gate(&built, &mut report)? {
                report.wall_ms = start.elapsed().as_millis();
                report.emit(out_dir, "power", csv_only)?;
                return Ok(ExitCode::from(1));
            }
            let sup = sup_en_norm(&built.operator, &built.facts, n)?;
            for &(step, value) in &sup.per_n {
                report.record(step, "en_norm", value);
            }
            for step in 1..=n {
                let residual = built.operator.gram_identity(step, 4)?;
                report.record(step, "gram_residual", residual);
            }
            report.push(format!(
                "en-values {}",
                if sup.exact_values {
                    "exact"
                } else {
                    "probe lower bounds"
                }
            ));
            report.push(format!("max-en {}", sup.probed_max));
            match &sup.decision {
                SupEnDecision::Bounded { bound, reason } => {
                    report.push(format!(
                        "sup-en bounded{} ({reason})",
                        bound.map(|b| format!(" by {b}")).unwrap_or_default()
                    ));
                }
                SupEnDecision::Unbounded { reason } => {
                    report.push(format!("sup-en unbounded ({reason})"));
                }
                SupEnDecision::Undecided => report.push("sup-en undecided"),
            }
            report.wall_ms = start.elapsed().as_millis();
            report.emit(out_dir, "power", csv_only)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { spec, theorem } => {
            let (built, bytes) = load(&spec, cli.horizon, cli.tol)?;
            let mut report = RunReport::new("classify", &spec.display().to_string(), &bytes);
            report.push(format!("name {}", built.name));
            report.push(format!("seed {}", built.seed));
            if !gate(&built, &mut report)? {
                report.wall_ms = start.elapsed().as_millis();
                report.emit(out_dir, "classify", csv_only)?;
                return Ok(ExitCode::from(1));
            }
            let params = ClassifyParams {
                horizon: built.horizon,
                tol: built.tol.max(1e-12),
                ..Default::default()
            };
            let which = theorem.as_deref().unwrap_or("all");
            let mut ran = false;
            if matches!(which, "all" | "wot") {
                ran = true;
                let v = classify_wot(&built.operator, &built.facts, &params)?;
                report.push_block(&format!("{v}"));
            }
            if matches!(which, "all" | "sot") {
                ran = true;
                let v = classify_sot(&built.operator, &built.facts, &params)?;
                report.push_block(&format!("{v}"));
            }
            if matches!(which, "all" | "never-stable") {
                ran = true;
                let v = never_strong_or_uniform(&built.operator, &params)?;
                report.push_block(&format!("{v}"));
            }
            if matches!(which, "all" | "subnormal") {
                ran = true;
                match classify_wot_subnormal(&built.operator, &built.facts, &params) {
                    Ok(v) => report.push_block(&format!("{v}")),
                    Err(CoreError::MissingCertificate(msg)) if which == "all" => {
                        report.push(format!(
                            "rule subnormal-wot-power-convergence skipped: {msg}"
                        ));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if matches!(which, "all" | "adjoint") {
                ran = true;
                let v = adjoint_strong_stability(&built.operator, &built.facts, &params)?;
                report.push_block(&format!("{v}"));
            }
            if matches!(which, "all" | "range") {
                ran = true;
                for n in [1u32, 2] {
                    let r = range_closedness(&built.operator, n, &built.facts, 48, params.tol)?;
                    report.push(format!(
                        "rule range-closedness n={n} -> {} (nonzero symbol infimum {:?}, \
                         isometric residual {:.3e}{})",
                        r.conclusion,
                        r.symbol_inf_nonzero,
                        r.isometric_residual,
                        if r.n_independent {
                            ", n-independent"
                        } else {
                            ""
                        }
                    ));
                }
            }
            if matches!(which, "all" | "semispectral") {
                ran = true;
                match verify_semispectral(&built.operator, &built.facts, 48, params.tol) {
                    Ok(r) => {
                        report.push(format!(
                            "rule semispectral-circle-mass -> {} (circle atoms on closure(ran |E|): {:?})",
                            if r.pass { "pass" } else { "fail" },
                            r.circle_atoms_on_h22
                        ));
                        if let Some(note) = &r.inconsistency {
                            report.push(format!("  inconsistency: {note}"));
                        }
                    }
                    Err(CoreError::PremisesUndecided(msg))
                    | Err(CoreError::UnsupportedStructure(msg))
                        if which == "all" =>
                    {
                        report.push(format!("rule semispectral-circle-mass skipped: {msg}"));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if !ran {
                return Err(anyhow!(
                    "unknown theorem {which}; expected wot, sot, never-stable, subnormal, \
                     adjoint, range or semispectral"
                ));
            }
            report.wall_ms = start.elapsed().as_millis();
            report.emit(out_dir, "classify", csv_only)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe { spec, mode } => {
            let (built, bytes) = load(&spec, cli.horizon, cli.tol)?;
            let mut report = RunReport::new("probe", &spec.display().to_string(), &bytes);
            report.push(format!("name {}", built.name));
            report.push(format!("seed {}", built.seed));
            if !gate(&built, &mut report)? {
                report.wall_ms = start.elapsed().as_millis();
                report.emit(out_dir, "probe", csv_only)?;
                return Ok(ExitCode::from(1));
            }
            match mode {
                ProbeMode::Wot => {
                    let verdict = wot_probe(
                        &built.operator,
                        &built.wot_dictionary,
                        built.horizon,
                        built.tol,
                    )?;
                    report.push(format!("status {:?}", verdict.status));
                    for probe in &verdict.probes {
                        for &(n, v) in &probe.series {
                            report.record(n, &format!("{}.re", probe.label), v.re);
                            report.record(n, &format!("{}.im", probe.label), v.im);
                        }
                        describe_probe(&mut report, probe);
                    }
                }
                ProbeMode::Sot | ProbeMode::AdjointSot => {
                    let (verdict, _) = match mode {
                        ProbeMode::Sot => {
                            sot_probe(&built.operator, &built.sot_probes, built.horizon, built.tol)?
                        }
                        _ => sot_probe(
                            &AdjointAction(&built.operator),
                            &built.sot_probes,
                            built.horizon,
                            built.tol,
                        )?,
                    };
                    report.push(format!("status {:?}", verdict.status));
                    for probe in &verdict.probes {
                        for &(n, v) in &probe.series {
                            report.record(n, &format!("{}.norm", probe.label), v.re);
                        }
                        describe_probe(&mut report, probe);
                    }
                }
            }
            report.wall_ms = start.elapsed().as_millis();
            report.emit(out_dir, "probe", csv_only)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Example {
            name,
            m,
            multiplicity,
            theta,
            sigma,
            variant,
            atoms,
            z,
            w,
        } => {
            let params = examples::ExampleParams {
                m,
                multiplicity,
                theta,
                sigma,
                variant,
                atoms,
                z,
                w,
            };
            let text = examples::emit(&name, &params)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{name}.bspec"));
            fs::write(&path, &text)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn describe_probe(report: &mut RunReport, probe: &boplab_core::analysis::ProbeReport) {
    match &probe.status {
        ProbeStatus::Converged { limit } => {
            report.push(format!(
                "{} converged limit ({},{})",
                probe.label, limit.re, limit.im
            ));
        }
        ProbeStatus::NotConverged { witness } => {
            report.push(format!(
                "{} not-converged witness n={} m={} separation {}",
                probe.label, witness.n, witness.m, witness.separation
            ));
        }
        ProbeStatus::Inconclusive => {
            report.push(format!("{} inconclusive", probe.label));
        }
    }
    if probe.clusters.len() > 1 {
        let summary: Vec<String> = probe
            .clusters
            .iter()
            .map(|c| format!("({},{})x{}", c.value.re, c.value.im, c.count))
            .collect();
        report.push(format!("{} clusters {}", probe.label, summary.join(" ")));
    }
}
