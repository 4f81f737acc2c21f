//! Command-line front end: `run`, `compare`, `verify` and `dump-matrix`.
//!
//! Every setting can come from a `key = value` file (`--config`) or a flag
//! of the same name; flags win. Exit codes: 0 success, 1 configuration
//! error, 2 runtime or I/O error, 3 failed verification.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_with, Event, Representation, SimulationConfig, Trajectory, DEFAULT_SNAPSHOTS};
use crate::hamiltonian::{assemble_hamiltonian, PhysicalParams};
use crate::lattice::{Boundary, GridSpec, Method, Site, ORACLE_MAX_SITES};
use crate::output::{self, FileEntry, RunManifest, RunWriter};
use crate::scalar::{to_f64, Real};
use crate::verify::{self, Level, Mutation};

pub const THREADS_ENV: &str = "PHOTON_LATTICE_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "photon-lattice", version, about = "Single-photon transport on a 2D cavity lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one scenario and export heatmaps, marginals and a time series.
    Run(Settings),
    /// Integrate several scenarios with shared parameters and diff them.
    Compare(Settings),
    /// Run the self-check suite.
    Verify(VerifyArgs),
    /// Write the reduced Hamiltonian as real/imaginary CSV matrices.
    DumpMatrix(Settings),
}

/// Flags mirroring the config-file keys. Values stay strings until
/// resolution so that errors can name the offending key.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Lattice extents `WxH`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Escape bookkeeping: `a` or `b`.
    #[arg(long)]
    pub method: Option<String>,
    /// `closed` or `open`.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub hbar: Option<String>,
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub zeta: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    /// Comma-separated snapshot steps.
    #[arg(long)]
    pub snapshots: Option<String>,
    /// `full`, `block` or `pure`.
    #[arg(long)]
    pub repr: Option<String>,
    /// `spectral` or `site`.
    #[arg(long)]
    pub frame: Option<String>,
    /// `true` to drop the uniform ħω phase.
    #[arg(long)]
    pub rotating_frame: Option<String>,
    /// Starting cavity `l,h`; defaults to the centre.
    #[arg(long)]
    pub initial_site: Option<String>,
    /// `f64` or `f32`.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub timeseries_stride: Option<String>,
    /// Scenarios for `compare`, e.g. `closed,open-a,open-b`.
    #[arg(long)]
    pub scenarios: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// `fast` or `full`.
    #[arg(long, default_value = "fast")]
    pub level: String,
    /// Fault to inject, for testing the suite itself.
    #[arg(long, hide = true)]
    pub inject: Option<String>,
}

const KEYS: &[&str] = &[
    "grid",
    "method",
    "boundary",
    "hbar",
    "omega",
    "zeta",
    "gamma",
    "dt",
    "steps",
    "snapshots",
    "repr",
    "frame",
    "rotating-frame",
    "initial-site",
    "precision",
    "timeseries-stride",
    "scenarios",
    "out",
];

fn normalise_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config("config", format!("line {} is not `key = value`", i + 1)))?;
        let key = normalise_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::config(key, "unknown setting"));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

impl Settings {
    /// File entries overlaid with flags.
    pub fn merged(&self) -> Result<BTreeMap<String, String>> {
        let mut map = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| Error::config("config", format!("{}: {e}", p.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("grid", &self.grid),
            ("method", &self.method),
            ("boundary", &self.boundary),
            ("hbar", &self.hbar),
            ("omega", &self.omega),
            ("zeta", &self.zeta),
            ("gamma", &self.gamma),
            ("dt", &self.dt),
            ("steps", &self.steps),
            ("snapshots", &self.snapshots),
            ("repr", &self.repr),
            ("frame", &self.frame),
            ("rotating-frame", &self.rotating_frame),
            ("initial-site", &self.initial_site),
            ("precision", &self.precision),
            ("timeseries-stride", &self.timeseries_stride),
            ("scenarios", &self.scenarios),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
    F32,
}

impl FromStr for Precision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "f64" => Ok(Precision::F64),
            "f32" => Ok(Precision::F32),
            other => Err(Error::config("precision", format!("expected f64 or f32, got `{other}`"))),
        }
    }
}

/// One of the three boundary/method combinations compared in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Closed,
    OpenA,
    OpenB,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Closed => "closed",
            Scenario::OpenA => "open-a",
            Scenario::OpenB => "open-b",
        }
    }

    pub fn apply<T: Real>(self, base: &SimulationConfig<T>) -> SimulationConfig<T> {
        let (method, boundary) = match self {
            Scenario::Closed => (base.method, Boundary::Closed),
            Scenario::OpenA => (Method::A, Boundary::Open),
            Scenario::OpenB => (Method::B, Boundary::Open),
        };
        let mut c = base.clone();
        c.method = method;
        c.boundary = boundary;
        if boundary == Boundary::Open && c.representation == Representation::PureState {
            c.representation = Representation::BlockDensity;
        }
        c
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "closed" => Ok(Scenario::Closed),
            "open-a" => Ok(Scenario::OpenA),
            "open-b" => Ok(Scenario::OpenB),
            other => Err(Error::config("scenarios", format!("expected closed, open-a or open-b, got `{other}`"))),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub config: SimulationConfig<f64>,
    pub precision: Precision,
    pub scenarios: Vec<Scenario>,
    pub out: PathBuf,
}

fn parse_field<V: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<V>>
where
    V::Err: fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(s) => s.trim().parse::<V>().map(Some).map_err(|e| Error::config(key, format!("cannot parse `{s}`: {e}"))),
    }
}

fn parse_enum<V: FromStr<Err = Error>>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<V>> {
    map.get(key).map(|s| s.parse::<V>()).transpose()
}

fn parse_list<V: FromStr>(s: &str, key: &str) -> Result<Vec<V>>
where
    V::Err: fmt::Display,
{
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<V>().map_err(|e| Error::config(key, format!("cannot parse `{}`: {e}", t.trim()))))
        .collect()
}

/// Builds a validated [`Plan`] from merged settings.
pub fn resolve(map: &BTreeMap<String, String>) -> Result<Plan> {
    let grid: GridSpec = match map.get("grid") {
        Some(s) => s.parse()?,
        None => GridSpec::new(31, 31)?,
    };
    let method = parse_enum(map, "method")?.unwrap_or(Method::A);
    let boundary = parse_enum(map, "boundary")?.unwrap_or(Boundary::Closed);
    let mut config = SimulationConfig::<f64>::new(grid, method, boundary);
    let d = PhysicalParams::<f64>::default();
    config.params = PhysicalParams {
        hbar: parse_field(map, "hbar")?.unwrap_or(d.hbar),
        omega: parse_field(map, "omega")?.unwrap_or(d.omega),
        zeta: parse_field(map, "zeta")?.unwrap_or(d.zeta),
        gamma: parse_field(map, "gamma")?.unwrap_or(d.gamma),
        dt: parse_field(map, "dt")?.unwrap_or(d.dt),
    };
    config.total_steps = parse_field(map, "steps")?.unwrap_or(config.total_steps);
    config.snapshot_steps = match map.get("snapshots") {
        Some(s) => {
            let mut v: Vec<usize> = parse_list(s, "snapshots")?;
            v.sort_unstable();
            v.dedup();
            v
        }
        None => DEFAULT_SNAPSHOTS.iter().copied().filter(|&s| s <= config.total_steps).collect(),
    };
    config.representation = parse_enum(map, "repr")?.unwrap_or(config.representation);
    config.frame = parse_enum(map, "frame")?.unwrap_or(config.frame);
    config.rotating_frame = parse_field(map, "rotating-frame")?.unwrap_or(false);
    config.timeseries_stride = parse_field(map, "timeseries-stride")?.unwrap_or(config.timeseries_stride);
    if let Some(s) = map.get("initial-site") {
        let v: Vec<usize> = parse_list(s, "initial-site")?;
        let [l, h] = v[..] else {
            return Err(Error::config("initial-site", "expected `l,h`"));
        };
        config.initial_site = Some(Site::new(l, h));
    }
    config.validate()?;
    let precision = parse_enum(map, "precision")?.unwrap_or(Precision::F64);
    let scenarios = match map.get("scenarios") {
        Some(s) => parse_list::<Scenario>(s, "scenarios")?,
        None => Vec::new(),
    };
    let out = PathBuf::from(map.get("out").map(String::as_str).unwrap_or("out"));
    Ok(Plan { config, precision, scenarios, out })
}

/// Worker cap from `PHOTON_LATTICE_THREADS`, defaulting to the core count.
pub fn thread_cap() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config(THREADS_ENV, format!("expected a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs one configuration into `dir`, streaming files as snapshots arrive.
pub fn execute_run<T: Real>(
    config: &SimulationConfig<T>,
    dir: &Path,
    label: &str,
) -> Result<(Trajectory<T>, RunManifest)> {
    for w in config.params.validate()? {
        log::warn!("{label}: {w}");
    }
    let started = Instant::now();
    let mut writer = RunWriter::create(dir, config)?;
    let trajectory = evolve_with(config, |e| {
        if let Event::Progress { step, total } = e {
            eprintln!("[{label}] step {step}/{total} ({:.1}s)", started.elapsed().as_secs_f64());
        }
        writer.record(&e)
    })?;
    let manifest = writer.finish(config, &trajectory, started.elapsed())?;
    Ok((trajectory, manifest))
}

/// Top-level record for a `compare` output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareManifest {
    pub scenarios: Vec<String>,
    pub engine_version: String,
    pub duration_seconds: f64,
    /// Largest post-initial site probability over all scenarios.
    pub global_max_probability: Option<f64>,
    pub files: Vec<FileEntry>,
}

/// Runs each scenario into `out/<name>/`, then writes `differences.csv`
/// and a top-level manifest.
pub fn execute_compare<T: Real>(
    base: &SimulationConfig<T>,
    scenarios: &[Scenario],
    out: &Path,
    threads: usize,
) -> Result<CompareManifest> {
    let mut seen = scenarios.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() < 2 || seen.len() != scenarios.len() {
        return Err(Error::config("scenarios", "compare needs at least two distinct scenarios"));
    }
    let started = Instant::now();
    let configs: Vec<(Scenario, SimulationConfig<T>)> = scenarios.iter().map(|&s| (s, s.apply(base))).collect();
    for (_, c) in &configs {
        c.validate()?;
    }
    let mut results: Vec<(String, Trajectory<T>)> = Vec::with_capacity(configs.len());
    for chunk in configs.chunks(threads.max(1)) {
        let outcomes: Vec<Result<Trajectory<T>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(s, c)| {
                    let dir = out.join(s.name());
                    scope.spawn(move || execute_run(c, &dir, s.name()).map(|(t, _)| t))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Unsupported("scenario worker panicked".into()))))
                .collect()
        });
        for ((s, _), r) in chunk.iter().zip(outcomes) {
            results.push((s.name().to_string(), r?));
        }
    }
    let diff = output::write_differences(out, &results)?;
    let global_max = results.iter().filter_map(|(_, t)| t.global_max_probability().ok()).map(to_f64).reduce(f64::max);
    let bytes = fs::metadata(&diff).map_err(|e| Error::io(&diff, e))?.len();
    let manifest = CompareManifest {
        scenarios: scenarios.iter().map(|s| s.name().to_string()).collect(),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: started.elapsed().as_secs_f64(),
        global_max_probability: global_max,
        files: vec![FileEntry { name: output::DIFFERENCES.to_string(), bytes, sha256: output::sha256_file(&diff)? }],
    };
    let path = out.join(output::MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::InvalidGrid { .. }
        | Error::InvalidParameter { .. }
        | Error::SiteOutOfRange { .. }
        | Error::OracleScale { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn cmd_run(s: &Settings) -> Result<u8> {
    let plan = resolve(&s.merged()?)?;
    let label = format!("{}-{}", plan.config.boundary, plan.config.method);
    let gmax = match plan.precision {
        Precision::F64 => execute_run(&plan.config, &plan.out, &label)?.1.global_max_probability,
        Precision::F32 => execute_run(&plan.config.cast::<f32>(), &plan.out, &label)?.1.global_max_probability,
    };
    match gmax {
        Some(g) => println!("wrote {} (global max {g:.6})", plan.out.display()),
        None => println!("wrote {}", plan.out.display()),
    }
    Ok(EXIT_OK)
}

fn cmd_compare(s: &Settings) -> Result<u8> {
    let plan = resolve(&s.merged()?)?;
    let threads = thread_cap()?;
    let m = match plan.precision {
        Precision::F64 => execute_compare(&plan.config, &plan.scenarios, &plan.out, threads)?,
        Precision::F32 => execute_compare(&plan.config.cast::<f32>(), &plan.scenarios, &plan.out, threads)?,
    };
    println!("wrote {} ({})", plan.out.display(), m.scenarios.join(", "));
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let level: Level = a.level.parse()?;
    let mutation: Option<Mutation> = a.inject.as_deref().map(str::parse).transpose()?;
    let report = verify::run_with(level, mutation, |c| println!("{c}"));
    if report.passed() {
        println!("verify: all {} checks passed", report.checks.len());
        Ok(EXIT_OK)
    } else {
        println!("verify: failed {}", report.failures().join(", "));
        Ok(EXIT_VERIFY)
    }
}

fn cmd_dump(s: &Settings) -> Result<u8> {
    let plan = resolve(&s.merged()?)?;
    let c = &plan.config;
    if c.grid.site_count() > ORACLE_MAX_SITES {
        return Err(Error::OracleScale { sites: c.grid.site_count(), limit: ORACLE_MAX_SITES });
    }
    let h = assemble_hamiltonian(&c.basis(), &c.params);
    let [re, im] = output::write_matrix_csv(&plan.out, "hamiltonian", &h)?;
    println!("wrote {} and {}", re.display(), im.display());
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run(s) => cmd_run(s),
        Command::Compare(s) => cmd_compare(s),
        Command::Verify(a) => cmd_verify(a),
        Command::DumpMatrix(s) => cmd_dump(s),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_resolve() {
        let p = resolve(&BTreeMap::new()).unwrap();
        assert_eq!(p.config.grid, GridSpec::new(31, 31).unwrap());
        assert_eq!(p.config.snapshot_steps, DEFAULT_SNAPSHOTS.to_vec());
        assert_eq!(p.config.params, PhysicalParams::default());
        assert_eq!(p.precision, Precision::F64);
    }

    #[test]
    fn short_runs_trim_default_snapshots() {
        let p = resolve(&map(&[("steps", "600")])).unwrap();
        assert_eq!(p.config.snapshot_steps, vec![300, 400, 500]);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("grid", "0x5"),
            ("grid", "31"),
            ("method", "c"),
            ("boundary", "periodic"),
            ("dt", "fast"),
            ("repr", "sparse"),
            ("snapshots", "1,x"),
            ("initial-site", "1"),
            ("scenarios", "open-c"),
        ];
        for (k, v) in cases {
            match resolve(&map(&[(k, v)])) {
                Err(Error::Config { field, .. }) => assert_eq!(field, k),
                other => panic!("{k}={v}: {other:?}"),
            }
        }
        assert!(matches!(resolve(&map(&[("gamma", "-1")])), Err(Error::InvalidParameter { name: "gamma", .. })));
    }

    #[test]
    fn config_file_parsing() {
        let m = parse_config_text("# study\ngrid = 9x9\ntimeseries_stride=5 # inline\n\nmethod = b\n").unwrap();
        assert_eq!(m["grid"], "9x9");
        assert_eq!(m["timeseries-stride"], "5");
        assert!(matches!(parse_config_text("colour = red"), Err(Error::Config { field, .. }) if field == "colour"));
        assert!(parse_config_text("grid 9x9").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "grid = 9x9\nmethod = b\n").unwrap();
        let s = Settings { config: Some(path), grid: Some("5x7".into()), ..Settings::default() };
        let p = resolve(&s.merged().unwrap()).unwrap();
        assert_eq!(p.config.grid, GridSpec::new(5, 7).unwrap());
        assert_eq!(p.config.method, Method::B);
    }

    #[test]
    fn scenario_application() {
        let base = SimulationConfig::<f64>::new(GridSpec::new(3, 3).unwrap(), Method::B, Boundary::Closed);
        let a = Scenario::OpenA.apply(&base);
        assert_eq!((a.method, a.boundary), (Method::A, Boundary::Open));
        assert_eq!(Scenario::Closed.apply(&base).boundary, Boundary::Closed);
    }

    #[test]
    fn compare_rejects_single_scenario() {
        let dir = tempfile::tempdir().unwrap();
        let base = SimulationConfig::<f64>::new(GridSpec::new(3, 3).unwrap(), Method::A, Boundary::Closed);
        let e = execute_compare(&base, &[Scenario::OpenA], dir.path(), 1).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        let e = execute_compare(&base, &[Scenario::OpenA, Scenario::OpenA], dir.path(), 1).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
    }

    #[test]
    fn usage_errors_are_config_errors() {
        assert_eq!(main_with(["photon-lattice", "launch"]), EXIT_CONFIG);
        assert_eq!(main_with(["photon-lattice", "run", "--grid", "0x5"]), EXIT_CONFIG);
        assert_eq!(main_with(["photon-lattice", "verify", "--level", "slow"]), EXIT_CONFIG);
    }
}
