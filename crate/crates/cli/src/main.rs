//! `irdof` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 verification failure, 4 conditioning advisory
//! under `--strict`, 1 I/O failure.

mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use irdof::construct::Construction;
use irdof::dof::{breakdown, compare_curves, sweep_cir, sweep_ncir, SweepRow};
use irdof::sim::{
    build_selected, estimate_dof, noise_amplification, predicted_sinr_db, run_trial, Scheme, SimOptions, MIN_TRIALS,
};
use irdof::{Error, SchemeKind};
use serde::Serialize;

use args::{with_config, Cli, Command, ConstructArgs, DofArgs, SimulateArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Advisory(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Advisory(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid input: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Advisory(m) => write!(f, "conditioning advisory (strict): {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::NotApplicable(_) | Error::LengthMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Verification(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn dof_cell(row: &SweepRow) -> String {
    row.dof.map_or_else(|| "N/A".to_string(), |v| v.to_string())
}

fn cmd_dof(a: DofArgs) -> Result<(), CliError> {
    let k = a.k.ok_or_else(|| CliError::Usage("--k is required".into()))?;
    if k < 2 {
        return Err(CliError::Usage("--k must be at least 2".into()));
    }
    let modes = [a.cir, a.ncir, a.compare].iter().filter(|&&m| m).count();
    let (cir, ncir, compare) = match modes {
        0 if a.u.is_some() || a.p.is_some() => (false, true, false),
        0 => (true, false, false),
        1 => (a.cir, a.ncir, a.compare),
        _ => return Err(CliError::Usage("choose one of --cir, --ncir and --compare".into())),
    };
    let stray = |cond: bool, what: &str| if cond { Err(CliError::Usage(format!("{what} does not apply here"))) } else { Ok(()) };
    let all = |r: Option<args::IntRange>, default: Vec<usize>| r.map_or(default, |r| r.0);
    let mut out = csv::Writer::from_writer(sink(a.out.as_ref())?);
    if compare {
        stray(a.w.is_some() || a.q.is_some() || a.u.is_some() || a.p.is_some() || a.improved, "--w/--q/--u/--p/--improved")?;
        let ns = all(a.n, (1..=k * (k - 1)).collect());
        out.write_record(["scheme", "K", "W", "Q", "U", "p", "dof", "antennas"])?;
        for (n, rows) in compare_curves(k, &ns) {
            for r in rows {
                let rec = [r.scheme.clone(), k.to_string(), opt(r.w), opt(r.q), opt(r.u), opt(r.p), dof_cell(&r), n.to_string()];
                out.write_record(&rec)?;
            }
        }
    } else {
        let rows = if cir {
            stray(a.u.is_some() || a.p.is_some() || a.n.is_some(), "--u/--p/--n")?;
            sweep_cir(k, &all(a.w, (1..=k).collect()), &all(a.q, (1..=k).collect()), a.improved)
        } else {
            debug_assert!(ncir);
            stray(a.w.is_some() || a.q.is_some() || a.n.is_some() || a.improved, "--w/--q/--n/--improved")?;
            sweep_ncir(k, &all(a.u, (k / 2 + 1..=k).collect()), &all(a.p, vec![1]))
        };
        out.write_record(["scheme", "K", "W", "Q", "U", "p", "dof"])?;
        for r in rows {
            out.write_record([r.scheme.clone(), k.to_string(), opt(r.w), opt(r.q), opt(r.u), opt(r.p), dof_cell(&r)])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: Option<&PathBuf>) -> Result<(), CliError> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Report for the single-slot scheme, which has no subspaces to verify.
#[derive(Serialize)]
struct SimpleReport {
    params: irdof::SchemeParams,
    streams: usize,
    max_condition: f64,
    ill_conditioned: bool,
    noiseless_residual: f64,
    noise_amplification: irdof::sim::NoiseAmplification,
    predicted_sinr_db_at_40: Vec<f64>,
    breakdown: irdof::dof::DofBreakdown,
    passed: bool,
}

fn advisory(strict: bool, message: String) -> Result<(), CliError> {
    if strict {
        return Err(CliError::Advisory(message));
    }
    eprintln!("advisory: {message}");
    Ok(())
}

fn cmd_construct(a: ConstructArgs) -> Result<(), CliError> {
    let params = a.scheme.params()?;
    let seed = params.seed;
    if params.kind == SchemeKind::Simple {
        let scheme = Scheme::build(&params, seed)?;
        let quiet = run_trial(&scheme, 40.0, 0, seed, SimOptions { noise: false, ..SimOptions::default() })?;
        let partition = irdof::partition::Partition::for_params(&params)?;
        let report = SimpleReport {
            params: params.clone(),
            streams: scheme.total_streams(),
            max_condition: scheme.condition(),
            ill_conditioned: scheme.ill_conditioned(),
            noiseless_residual: quiet.residual,
            noise_amplification: noise_amplification(&scheme),
            predicted_sinr_db_at_40: predicted_sinr_db(&scheme, 40.0),
            breakdown: breakdown(&params, &partition)?,
            passed: quiet.residual <= 1e-12,
        };
        write_json(&report, a.out.as_ref())?;
        if !report.passed {
            return Err(CliError::Verification(format!("noiseless residual {:.3e}", report.noiseless_residual)));
        }
        if report.ill_conditioned {
            advisory(a.scheme.strict, format!("relay system condition {:.3e}", report.max_condition))?;
        }
        return Ok(());
    }
    let c = Construction::build_well_conditioned(&params, seed, 8)?;
    if c.seed != seed {
        eprintln!("note: seed {seed} gave an ill-conditioned relay system; using seed {}", c.seed);
    }
    let report = c.report(a.exact)?;
    write_json(&report, a.out.as_ref())?;
    let v = &report.verification;
    if !v.passed {
        let which = v.exact.as_ref().unwrap_or(&v.float);
        let failing: Vec<String> = which
            .nodes
            .iter()
            .flat_map(|(node, r)| {
                let mut bad: Vec<String> = r.checks.iter().filter(|c| !c.ok).map(|c| format!("{node}: {} in {}", c.signal, c.host)).collect();
                if !r.independent {
                    bad.push(format!("{node}: rank {} of {}", r.stacked_rank, r.stacked_cols));
                }
                bad
            })
            .collect();
        return Err(CliError::Verification(failing.join("; ")));
    }
    if report.ill_conditioned {
        advisory(a.scheme.strict, format!("relay system condition {:.3e}", report.max_slot_condition))?;
    }
    if v.marginal_unresolved {
        advisory(a.scheme.strict, format!("marginal rank decisions not re-checked exactly: {:?}", v.float.marginal))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LogLine<'a> {
    scheme: String,
    #[serde(flatten)]
    trial: &'a irdof::sim::TrialResult,
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let trials = a.trials.unwrap_or(50);
    if trials < MIN_TRIALS {
        return Err(CliError::Usage(format!("--trials {trials}: at least {MIN_TRIALS} are needed")));
    }
    let mut snrs = a.snr.map_or_else(|| vec![40.0, 60.0], |s| s.0);
    snrs.sort_by(|x, y| x.total_cmp(y));
    snrs.dedup();
    if snrs.len() < 2 {
        return Err(CliError::Usage("--snr needs at least two distinct points".into()));
    }
    let params = a.scheme.params()?;
    let seed = params.seed;
    let opts = SimOptions { symbols: a.symbols.unwrap_or(SimOptions::default().symbols), noise: true };
    let scheme = build_selected(&params, seed, a.candidates.unwrap_or(8))?;
    if let Scheme::Aligned(c) = &scheme {
        let v = c.verify(false)?;
        if !v.passed {
            return Err(CliError::Verification("construction did not verify; nothing simulated".into()));
        }
    }
    if scheme.ill_conditioned() {
        advisory(a.scheme.strict, format!("relay system condition {:.3e}", scheme.condition()))?;
    }
    let name = params.kind.to_string();
    let mut log = a.log.as_ref().map(|p| sink(Some(p))).transpose()?;
    let mut means = Vec::with_capacity(snrs.len());
    for &snr in &snrs {
        let mut acc = 0.0;
        for trial in 0..trials as u64 {
            let r = run_trial(&scheme, snr, trial, seed, opts)?;
            acc += r.sum_rate;
            if let Some(w) = log.as_mut() {
                serde_json::to_writer(&mut *w, &LogLine { scheme: name.clone(), trial: &r }).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(w)?;
            }
        }
        means.push(acc / trials as f64);
    }
    if let Some(w) = log.as_mut() {
        w.flush()?;
    }
    let pair = (snrs[0], snrs[snrs.len() - 1]);
    let est = estimate_dof(&scheme, pair, trials, seed, opts)?;
    let mut out = csv::Writer::from_writer(sink(a.out.as_ref())?);
    out.write_record(["scheme", "snr_db", "sum_rate", "dof_hat", "ci"])?;
    for (snr, mean) in snrs.iter().zip(&means) {
        out.write_record([name.clone(), snr.to_string(), mean.to_string(), est.dof_hat.to_string(), est.ci.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.as_ref();
    match cli.command {
        Command::Dof(a) => cmd_dof(with_config(a, config)?),
        Command::Construct(a) => cmd_construct(with_config(a, config)?),
        Command::Simulate(a) => cmd_simulate(with_config(a, config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irdof: {e}");
            ExitCode::from(e.code())
        }
    }
}
