//! On-disk artefacts: heatmap, marginal, time-series and difference CSVs
//! plus the JSON run manifest.
//!
//! Numbers are written with `{:.16e}` (17 significant digits) so files
//! round-trip exactly and are byte-identical across repeated runs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dissipation::ChannelRecord;
use crate::error::{Error, Result};
use crate::evolution::{Event, SimulationConfig, Trajectory};
use crate::hamiltonian::HermitianOperator;
use crate::lattice::{BasisDescriptor, Boundary, Method};
use crate::observables::{symmetry_error, SeriesPoint, SiteProbabilityField, Snapshot};
use crate::scalar::{to_f64, Real};

pub const MANIFEST: &str = "manifest.json";
pub const MARGINALS: &str = "marginals.csv";
pub const TIMESERIES: &str = "timeseries.csv";
pub const DIFFERENCES: &str = "differences.csv";

pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn heatmap_file_name(step: usize) -> String {
    format!("heatmap_step{step}.csv")
}

/// `H` rows of `L` comma-separated probabilities, row `h = 0` first, after a
/// `# step=… time=…` header. Values are clamped to `[0, 1]`.
pub fn heatmap_csv<T: Real>(step: usize, time: T, field: &SiteProbabilityField<T>) -> String {
    let mut s = format!("# step={step} time={}\n", fmt_value(to_f64(time)));
    for h in 0..field.height() {
        let row: Vec<String> = field.row(h).iter().map(|&p| fmt_value(to_f64(p).clamp(0.0, 1.0))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn marginals_header(width: usize) -> String {
    let cols: Vec<String> = (0..width).map(|l| format!("l{l}")).collect();
    format!("step,time,{}\n", cols.join(","))
}

pub fn marginals_row<T: Real>(s: &Snapshot<T>) -> String {
    let mut row = vec![s.step.to_string(), fmt_value(to_f64(s.time))];
    row.extend(s.column_marginal.iter().map(|&m| fmt_value(to_f64(m))));
    format!("{}\n", row.join(","))
}

pub const TIMESERIES_HEADER: &str =
    "step,time,trace,in_plane_total,dissipative_probability,max_site_probability,symmetry_error\n";

pub fn timeseries_row<T: Real>(p: &SeriesPoint<T>) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        p.step,
        fmt_value(to_f64(p.time)),
        fmt_value(to_f64(p.trace)),
        fmt_value(to_f64(p.in_plane_total)),
        fmt_value(to_f64(p.dissipative_probability)),
        fmt_value(to_f64(p.max_site_probability)),
        fmt_value(to_f64(p.symmetry_error)),
    )
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Echo of the settings that determine a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub grid: String,
    pub method: Method,
    pub boundary: Boundary,
    pub hbar: f64,
    pub omega: f64,
    pub zeta: f64,
    pub gamma: f64,
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<usize>,
    pub representation: String,
    pub frame: String,
    pub rotating_frame: bool,
    pub timeseries_stride: usize,
    pub initial_site: [usize; 2],
    pub precision: String,
    /// No randomness enters a run.
    pub deterministic: bool,
}

impl ConfigEcho {
    pub fn new<T: Real>(c: &SimulationConfig<T>) -> Self {
        let site = c.initial_site.unwrap_or_else(|| c.grid.center());
        ConfigEcho {
            grid: c.grid.to_string(),
            method: c.method,
            boundary: c.boundary,
            hbar: to_f64(c.params.hbar),
            omega: to_f64(c.params.omega),
            zeta: to_f64(c.params.zeta),
            gamma: to_f64(c.params.gamma),
            dt: to_f64(c.params.dt),
            steps: c.total_steps,
            snapshots: c.snapshot_steps.clone(),
            representation: c.representation.to_string(),
            frame: c.frame.to_string(),
            rotating_frame: c.rotating_frame,
            timeseries_stride: c.timeseries_stride,
            initial_site: [site.l, site.h],
            precision: std::any::type_name::<T>().to_string(),
            deterministic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ConfigEcho,
    pub engine_version: String,
    pub duration_seconds: f64,
    pub global_max_probability: Option<f64>,
    pub basis: BasisDescriptor,
    pub channels: Vec<ChannelRecord>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::config(MANIFEST, e.to_string()))
    }

    /// Names of listed files that are missing or whose checksum differs.
    pub fn verify_files(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| sha256_file(&dir.join(&f.name)).map_or(true, |h| h != f.sha256))
            .map(|f| f.name.clone())
            .collect()
    }
}

/// Streams one run's files into a directory as events arrive.
pub struct RunWriter {
    dir: PathBuf,
    files: Vec<String>,
    marginals: BufWriter<File>,
    timeseries: Option<BufWriter<File>>,
}

impl RunWriter {
    pub fn create<T: Real>(dir: &Path, config: &SimulationConfig<T>) -> Result<Self> {
        create_dir(dir)?;
        let open = |name: &str| -> Result<BufWriter<File>> {
            let p = dir.join(name);
            File::create(&p).map(BufWriter::new).map_err(|e| Error::io(p, e))
        };
        let mut marginals = open(MARGINALS)?;
        let mut files = vec![MARGINALS.to_string()];
        marginals
            .write_all(marginals_header(config.grid.width()).as_bytes())
            .map_err(|e| Error::io(dir.join(MARGINALS), e))?;
        let timeseries = if config.timeseries_stride > 0 {
            let mut w = open(TIMESERIES)?;
            w.write_all(TIMESERIES_HEADER.as_bytes()).map_err(|e| Error::io(dir.join(TIMESERIES), e))?;
            files.push(TIMESERIES.to_string());
            Some(w)
        } else {
            None
        };
        Ok(RunWriter { dir: dir.to_path_buf(), files, marginals, timeseries })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record<T: Real>(&mut self, event: &Event<'_, T>) -> Result<()> {
        match event {
            Event::Snapshot(s) => {
                let name = heatmap_file_name(s.step);
                write_file(&self.dir.join(&name), &heatmap_csv(s.step, s.time, &s.field))?;
                self.files.push(name);
                self.marginals
                    .write_all(marginals_row(s).as_bytes())
                    .map_err(|e| Error::io(self.dir.join(MARGINALS), e))
            }
            Event::Series(p) => match &mut self.timeseries {
                Some(w) => {
                    w.write_all(timeseries_row(p).as_bytes()).map_err(|e| Error::io(self.dir.join(TIMESERIES), e))
                }
                None => Ok(()),
            },
            Event::Progress { .. } => Ok(()),
        }
    }

    /// Flushes the streams and writes `manifest.json`.
    pub fn finish<T: Real>(
        mut self,
        config: &SimulationConfig<T>,
        trajectory: &Trajectory<T>,
        duration: Duration,
    ) -> Result<RunManifest> {
        self.marginals.flush().map_err(|e| Error::io(self.dir.join(MARGINALS), e))?;
        if let Some(w) = &mut self.timeseries {
            w.flush().map_err(|e| Error::io(self.dir.join(TIMESERIES), e))?;
        }
        drop(self.marginals);
        drop(self.timeseries);
        let mut files = Vec::with_capacity(self.files.len());
        self.files.sort();
        for name in &self.files {
            let p = self.dir.join(name);
            let bytes = fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
            files.push(FileEntry { name: name.clone(), bytes, sha256: sha256_file(&p)? });
        }
        let basis = config.basis();
        let params = config.params;
        let manifest = RunManifest {
            config: ConfigEcho::new(config),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: duration.as_secs_f64(),
            global_max_probability: trajectory.global_max_probability().ok().map(to_f64),
            channels: crate::dissipation::JumpChannelSet::build(&basis, &params).records(),
            basis: basis.descriptor(),
            files,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        write_file(&self.dir.join(MANIFEST), &(json + "\n"))?;
        Ok(manifest)
    }
}

/// Per-snapshot comparison across scenarios: the largest site-probability
/// deviation for every pair, then each scenario's dissipative probability
/// and in-plane total. Only steps present in every trajectory are written.
pub fn differences_csv<T: Real>(scenarios: &[(String, Trajectory<T>)]) -> String {
    let mut header = vec!["step".to_string()];
    for (i, (a, _)) in scenarios.iter().enumerate() {
        for (b, _) in &scenarios[i + 1..] {
            header.push(format!("max_dev_{a}_vs_{b}"));
        }
    }
    for (name, _) in scenarios {
        header.push(format!("dissipative_{name}"));
    }
    for (name, _) in scenarios {
        header.push(format!("in_plane_{name}"));
    }
    let mut out = header.join(",") + "\n";
    let Some((_, first)) = scenarios.first() else {
        return out;
    };
    for s0 in &first.snapshots {
        let snaps: Option<Vec<&Snapshot<T>>> = scenarios.iter().map(|(_, t)| t.snapshot_at(s0.step)).collect();
        let Some(snaps) = snaps else { continue };
        let mut row = vec![s0.step.to_string()];
        for i in 0..snaps.len() {
            for j in i + 1..snaps.len() {
                let dev = snaps[i]
                    .field
                    .values()
                    .iter()
                    .zip(snaps[j].field.values())
                    .map(|(&x, &y)| to_f64(x - y).abs())
                    .fold(0.0, f64::max);
                row.push(fmt_value(dev));
            }
        }
        row.extend(snaps.iter().map(|s| fmt_value(to_f64(s.dissipative_probability))));
        row.extend(snaps.iter().map(|s| fmt_value(to_f64(s.in_plane_total))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_differences<T: Real>(dir: &Path, scenarios: &[(String, Trajectory<T>)]) -> Result<PathBuf> {
    create_dir(dir)?;
    let p = dir.join(DIFFERENCES);
    write_file(&p, &differences_csv(scenarios))?;
    Ok(p)
}

/// Writes `<stem>_re.csv` and `<stem>_im.csv` for a small operator.
pub fn write_matrix_csv<T: Real>(dir: &Path, stem: &str, op: &HermitianOperator<T>) -> Result<[PathBuf; 2]> {
    create_dir(dir)?;
    let m = op.matrix();
    let render = |part: &dyn Fn(usize, usize) -> f64| {
        let mut s = String::new();
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| fmt_value(part(i, j))).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    };
    let re = dir.join(format!("{stem}_re.csv"));
    let im = dir.join(format!("{stem}_im.csv"));
    write_file(&re, &render(&|i, j| to_f64(m[(i, j)].re)))?;
    write_file(&im, &render(&|i, j| to_f64(m[(i, j)].im)))?;
    Ok([re, im])
}

/// Largest site-probability symmetry defect over a trajectory's snapshots.
pub fn worst_symmetry_error<T: Real>(t: &Trajectory<T>) -> f64 {
    t.snapshots.iter().map(|s| to_f64(symmetry_error(&s.field))).fold(0.0, f64::max)
}
