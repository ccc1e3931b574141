//! `chaingate` command-line front end.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::canonical::CanonicalClass;
use crate::hamiltonian::CouplingPair;
use crate::search::{
    coverage_stats, coverage_stats_on, read_database, run_search_with_progress, verify_entry, write_coverage_csv,
    write_database, DbEntry, SearchConfig, SearchError, DEFAULT_CONV_TOL, DEFAULT_DENSITY,
    DEFAULT_MAX_ITERATIONS, DEFAULT_OBJ_THRESHOLD, DEFAULT_RANGE,
};
use crate::synthesis::{build_profile, simulate_profile, ProfileFile, SimulationMode, SynthesisOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "chaingate", version, about = "Gate search and synthesis for an always-on three-qubit Heisenberg chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid search for decoupling points; writes a JSON-Lines gate database.
    Search(SearchArgs),
    /// Coverage statistics of a gate database as CSV.
    Stats(StatsArgs),
    /// Compile a target class into a switching profile.
    Synthesize(SynthesizeArgs),
    /// Replay a database or a profile and check its stored bounds.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 1.0)]
    pub j12: f64,
    #[arg(long, default_value_t = 1.0)]
    pub j23: f64,
    /// Grid half-range L.
    #[arg(long, default_value_t = DEFAULT_RANGE)]
    pub range: f64,
    /// Grid density m (m^4 starts).
    #[arg(long, default_value_t = DEFAULT_DENSITY as u64, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid: u64,
    #[arg(long, default_value_t = DEFAULT_CONV_TOL)]
    pub conv_tol: f64,
    #[arg(long, default_value_t = DEFAULT_OBJ_THRESHOLD)]
    pub obj_threshold: f64,
    /// Radians; a `pi` suffix multiplies by π (e.g. `0.0025pi`).
    #[arg(long, default_value = "0.0025pi", value_parser = parse_angle)]
    pub angle_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Adds `-w τ` to the objective during descent.
    #[arg(long, default_value_t = 0.0)]
    pub tau_penalty: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Suppress progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["target", "gate"])))]
pub struct SynthesizeArgs {
    /// Canonical class as `c1,c2,c3`; entries accept a `pi` suffix.
    #[arg(long, value_parser = parse_target)]
    pub target: Option<[f64; 3]>,
    /// Named gate: cnot, cz, iswap, swap, identity.
    #[arg(long)]
    pub gate: Option<String>,
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Factors closer than this to zero are skipped (default: the database's angle tolerance).
    #[arg(long, value_parser = parse_angle)]
    pub angle_tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["db", "profile"])))]
pub struct VerifyArgs {
    #[arg(long)]
    pub db: Option<PathBuf>,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Expected couplings; checked against the input's header.
    #[arg(long)]
    pub j12: Option<f64>,
    #[arg(long)]
    pub j23: Option<f64>,
    /// Per-factor allowance for profile replay.
    #[arg(long, default_value = "0.0025pi", value_parser = parse_angle)]
    pub angle_tol: f64,
}

/// A number of radians, optionally followed by `pi` (`0.3`, `0.25pi`,
/// `0.25*pi`, `pi`).
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix("pi") {
        Some("") => ("1", PI),
        Some(rest) => (rest.trim().trim_end_matches('*'), PI),
        None => (t, 1.0),
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("invalid angle {s:?}"))?;
    let v = v * scale;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("invalid angle {s:?}"))
    }
}

pub fn parse_target(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated angles, got {s:?}"));
    }
    Ok([parse_angle(parts[0])?, parse_angle(parts[1])?, parse_angle(parts[2])?])
}

pub fn named_gate(name: &str) -> Option<CanonicalClass<f64>> {
    let c = match name.to_ascii_lowercase().as_str() {
        "cnot" | "cx" | "cz" => [0.0, 0.0, FRAC_PI_4],
        "iswap" => [0.0, FRAC_PI_4, FRAC_PI_4],
        "swap" => [FRAC_PI_4, FRAC_PI_4, FRAC_PI_4],
        "identity" | "id" => [0.0, 0.0, 0.0],
        _ => return None,
    };
    Some(CanonicalClass::new(c[0], c[1], c[2]))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("{0}")]
    Verification(String),
    #[error(transparent)]
    Other(Box<dyn std::error::Error + Send + Sync>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Input { .. } => EXIT_IO,
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Other(_) => EXIT_IO,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn load_db(path: &Path) -> Result<Vec<DbEntry>, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_database(BufReader::new(file)).map_err(|e| match e {
        SearchError::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Input {
            path: path.to_path_buf(),
            source: Box::new(other),
        },
    })
}

/// Record of one invocation, written next to its primary output.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub version: &'a str,
    pub duration_seconds: f64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest<C: Serialize>(
    command: &str,
    config: &C,
    started: Instant,
    inputs: &[&Path],
    outputs: &[&Path],
) -> Result<(), CliError> {
    let digests = |paths: &[&Path]| -> Result<BTreeMap<String, String>, CliError> {
        paths
            .iter()
            .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
            .collect()
    };
    let manifest = RunManifest {
        command,
        config,
        version: env!("CARGO_PKG_VERSION"),
        duration_seconds: started.elapsed().as_secs_f64(),
        inputs: digests(inputs)?,
        outputs: digests(outputs)?,
    };
    let primary = outputs.first().expect("every command has an output");
    let path = manifest_path(primary);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| CliError::Other(Box::new(e)))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(&path))
}

fn search_config(args: &SearchArgs) -> Result<SearchConfig, CliError> {
    let couplings = CouplingPair::new(args.j12, args.j23).map_err(|e| CliError::Usage(e.to_string()))?;
    let config = SearchConfig {
        couplings,
        range: args.range,
        density: args.grid as usize,
        conv_tol: args.conv_tol,
        obj_threshold: args.obj_threshold,
        angle_tol: args.angle_tol,
        max_iterations: args.max_iterations,
        workers: args
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        jitter: args.jitter,
        seed: args.seed,
        tau_penalty: args.tau_penalty,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn cmd_search(args: &SearchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let config = search_config(args)?;
    let total = config.density.pow(4);
    let step = (total / 100).max(1);
    let quiet = args.quiet;
    let progress = move |done: usize, total: usize| {
        if !quiet && (done % step == 0 || done == total) {
            eprint!("\rsearch: {done}/{total} starts");
            if done == total {
                eprintln!();
            }
        }
    };
    let records = run_search_with_progress(&config, &progress).map_err(|e| CliError::Other(Box::new(e)))?;
    let mut w = create(&args.out)?;
    write_database(&mut w, &records, &config).map_err(|e| match e {
        SearchError::Io(source) => CliError::Io {
            path: args.out.clone(),
            source,
        },
        other => CliError::Other(Box::new(other)),
    })?;
    drop(w);
    write_manifest("search", &config, started, &[], &[&args.out])?;
    writeln!(
        stdout,
        "records {} starts {} elapsed {:.2}s",
        records.len(),
        total,
        started.elapsed().as_secs_f64()
    )
    .map_err(|e| CliError::Other(Box::new(e)))
}

fn cmd_stats(args: &StatsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let entries = load_db(&args.db)?;
    let records: Vec<_> = entries.into_iter().map(|e| e.record).collect();
    let stats = coverage_stats(&records);
    let folded: Vec<f64> = records.iter().map(|r| r.zz_angle.min(FRAC_PI_2 - r.zz_angle)).collect();
    let folded_stats = coverage_stats_on(&folded, FRAC_PI_4);
    let mut w = create(&args.out)?;
    write_coverage_csv(&mut w, &stats, FRAC_PI_2).map_err(|e| CliError::Other(Box::new(e)))?;
    drop(w);
    write_manifest("stats", args, started, &[&args.db], &[&args.out])?;
    writeln!(
        stdout,
        "count {} max_gap {:.6}pi mean_gap {:.6}pi folded_max_gap {:.6}pi folded_mean_gap {:.6}pi",
        stats.count,
        stats.max_gap / PI,
        stats.mean_gap / PI,
        folded_stats.max_gap / PI,
        folded_stats.mean_gap / PI
    )
    .map_err(|e| CliError::Other(Box::new(e)))
}

fn cmd_synthesize(args: &SynthesizeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let target = match (&args.target, &args.gate) {
        (Some(t), _) => CanonicalClass::new(t[0], t[1], t[2]),
        (None, Some(name)) => named_gate(name).ok_or_else(|| CliError::Usage(format!("unknown gate {name:?}")))?,
        (None, None) => return Err(CliError::Usage("one of --target or --gate is required".into())),
    };
    let entries = load_db(&args.db)?;
    let Some(first) = entries.first() else {
        return Err(CliError::Input {
            path: args.db.clone(),
            source: "gate database is empty; run `chaingate search` with a larger grid".into(),
        });
    };
    let couplings = first.config.couplings;
    let options = SynthesisOptions {
        angle_tol: args.angle_tol.unwrap_or(first.config.angle_tol),
        ..SynthesisOptions::default()
    };
    let records: Vec<_> = entries.iter().map(|e| e.record.clone()).collect();
    let plan = build_profile(&target, &records, &couplings, &options).map_err(|e| CliError::Other(Box::new(e)))?;
    let file = ProfileFile::new(&plan, couplings, target, sha256_file(&args.db)?);
    let mut w = create(&args.out)?;
    serde_json::to_writer_pretty(&mut w, &file).map_err(|e| CliError::Other(Box::new(e)))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(&args.out))?;
    drop(w);
    write_manifest("synthesize", args, started, &[&args.db], &[&args.out])?;
    writeln!(
        stdout,
        "relaxations {} switchings {} predicted_angle_error {:.6e}",
        plan.relaxations, plan.switchings, plan.predicted_angle_error
    )
    .map_err(|e| CliError::Other(Box::new(e)))
}

fn check_couplings(args: &VerifyArgs, found: CouplingPair<f64>) -> Result<CouplingPair<f64>, CliError> {
    let want = CouplingPair {
        j12: args.j12.unwrap_or(found.j12),
        j23: args.j23.unwrap_or(found.j23),
    };
    if want != found {
        return Err(CliError::Verification(format!(
            "coupling mismatch: input has ({}, {}), flags give ({}, {})",
            found.j12, found.j23, want.j12, want.j23
        )));
    }
    Ok(want)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out = |stdout: &mut dyn Write, line: String| writeln!(stdout, "{line}").map_err(|e| CliError::Other(Box::new(e)));
    if let Some(db) = &args.db {
        let entries = load_db(db)?;
        let mut failures = 0;
        for (i, entry) in entries.iter().enumerate() {
            let couplings = check_couplings(args, entry.config.couplings)?;
            let config = SearchConfig {
                couplings,
                ..entry.config.to_config(1)
            };
            let report = verify_entry(entry, &config).map_err(|e| CliError::Other(Box::new(e)))?;
            if !report.passed {
                failures += 1;
            }
            out(
                stdout,
                format!(
                    "record {} {} objective_error {:.3e} leakage {:.3e} class_error {:.3e} conjecture_distance {:.3e}",
                    i + 1,
                    if report.passed { "PASS" } else { "FAIL" },
                    report.objective_error,
                    report.leakage,
                    report.class_error,
                    report.conjecture_distance
                ),
            )?;
        }
        out(stdout, format!("verified {} records, {} failed", entries.len(), failures))?;
        if failures > 0 {
            return Err(CliError::Verification(format!("{failures} records failed verification")));
        }
    }
    if let Some(path) = &args.profile {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let file: ProfileFile = serde_json::from_str(&text).map_err(|e| CliError::Input {
            path: path.clone(),
            source: Box::new(e),
        })?;
        let couplings = check_couplings(args, file.couplings)?;
        let sim = simulate_profile(&file.profile(), &couplings, SimulationMode::Ideal)
            .map_err(|e| CliError::Other(Box::new(e)))?;
        let error = sim.class_error(&file.target);
        let bound = file.predicted_angle_error + 3.0 * args.angle_tol;
        let passed = error <= bound && sim.flagged.is_empty();
        out(
            stdout,
            format!(
                "profile {} class ({:.6}, {:.6}, {:.6}) class_error {:.3e} bound {:.3e} flagged_segments {}",
                if passed { "PASS" } else { "FAIL" },
                sim.class.c1,
                sim.class.c2,
                sim.class.c3,
                error,
                bound,
                sim.flagged.len()
            ),
        )?;
        if !passed {
            return Err(CliError::Verification("profile replay exceeds its bound".into()));
        }
    }
    Ok(())
}

/// Runs one parsed command, writing reports to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Search(a) => cmd_search(a, stdout),
        Command::Stats(a) => cmd_stats(a, stdout),
        Command::Synthesize(a) => cmd_synthesize(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the process exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::DEFAULT_ANGLE_TOL;

    #[test]
    fn angles_and_targets() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!((parse_angle("0.0025pi").unwrap() - DEFAULT_ANGLE_TOL).abs() < 1e-18);
        assert!((parse_angle("0.25*pi").unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert!(parse_angle("abc").is_err());
        assert_eq!(parse_target("0,0,0").unwrap(), [0.0; 3]);
        assert!(parse_target("0,0").is_err());
    }

    #[test]
    fn named_gates() {
        assert_eq!(named_gate("CNOT").unwrap().as_array(), [0.0, 0.0, FRAC_PI_4]);
        assert!(named_gate("toffoli").is_none());
    }

    #[test]
    fn usage_errors() {
        let mut sink = Vec::new();
        assert_eq!(run(["chaingate", "search", "--grid", "1", "--out", "x"], &mut sink), EXIT_USAGE);
        assert_eq!(run(["chaingate", "bogus"], &mut sink), EXIT_USAGE);
        assert_eq!(run(["chaingate", "--version"], &mut sink), EXIT_OK);
        assert_eq!(run(["chaingate", "synthesize", "--db", "x", "--out", "y"], &mut sink), EXIT_USAGE);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("/tmp/db.jsonl")), PathBuf::from("/tmp/db.jsonl.manifest.json"));
    }
}
