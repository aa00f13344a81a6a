//! Subcommand implementations. Each writes its artifacts and a
//! `manifest.json` under the output directory, also on failure.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use wavedsm_core::analysis::{
    closed_form_check, equivalence_check, lemma_check, level_set_symmetric_difference, peak_report, theorem_check,
};
use wavedsm_core::forward::{add_noise, spectrum_from_series, synthesize_timeseries};
use wavedsm_core::imaging::{indicator_grid, normalize};
use wavedsm_core::io::{grid_csv, grid_pgm, read_json, read_timeseries, timeseries_csv, write_json, write_timeseries, DatasetMeta};
use wavedsm_core::scene::{load_scene, GeometryTag, RunConfig};
use wavedsm_core::signals::FrequencyGrid;
use wavedsm_core::{ComplexFrequency, Dim, Error, ImagingConfig, Point, TimeSeries};

use crate::manifest::{config_hash, RunManifest};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SYNTHESIS: i32 = 3;
pub const EXIT_GEOMETRY: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// CSV export limit on `n_receivers · n_steps`.
pub const CSV_SAMPLE_LIMIT: usize = 100_000;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Json(_) => EXIT_CONFIG,
            Error::Synthesis(_) => EXIT_SYNTHESIS,
            Error::Geometry(_) | Error::ContourMismatch { .. } => EXIT_GEOMETRY,
            _ => EXIT_FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_FAILURE, format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Which analysis suite `verify` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Equivalence,
    Lemma,
    ClosedForm,
    Theorem,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Equivalence => "equivalence",
            Check::Lemma => "lemma",
            Check::ClosedForm => "closed-form",
            Check::Theorem => "theorem",
        }
    }
}

/// A parsed configuration with its canonical hash.
pub struct Loaded {
    pub path: PathBuf,
    pub cfg: RunConfig,
    pub hash: String,
    /// The parsed configuration document, echoed into dataset sidecars.
    pub document: serde_json::Value,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_CONFIG, format!("cannot read config {}: {e}", path.display())))?;
    let cfg = load_scene(&text)?;
    let hash = config_hash(&text).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    let document = serde_json::from_str(&text).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    Ok(Loaded { path: path.to_path_buf(), cfg, hash, document })
}

/// Runs `body` with a fresh manifest and writes the manifest whatever the outcome.
fn with_manifest<T>(
    command: &str,
    config: &Path,
    out: &Path,
    body: impl FnOnce(&mut RunManifest) -> CliResult<T>,
) -> CliResult<T> {
    fs::create_dir_all(out)?;
    let mut m = RunManifest::new(command, config);
    let r = body(&mut m);
    match &r {
        Ok(_) => m.status = "complete".into(),
        Err(e) => m.error = Some(e.message.clone()),
    }
    m.write(out)?;
    r
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Relative paths of the datasets written by a simulation.
pub struct Datasets {
    pub clean: String,
    pub noisy: Option<String>,
}

fn dataset_meta(l: &Loaded, ts: &TimeSeries, plan_sigma: f64) -> DatasetMeta {
    let cfg = &l.cfg;
    DatasetMeta {
        dim: cfg.scene.dim,
        dt: ts.grid.dt,
        n_steps: ts.grid.n_steps,
        n_sources: ts.n_sources(),
        n_receivers: ts.n_receivers,
        background_speed: cfg.scene.background_speed,
        provenance: ts.provenance,
        receivers: cfg.setup.receivers.clone(),
        receiver_weights: cfg.setup.receiver_weights.clone(),
        sources: cfg.setup.sources.clone(),
        signal: cfg.signal.kind.name().to_string(),
        synthesis_sigma: plan_sigma,
        config_sha256: Some(l.hash.clone()),
        config: Some(l.document.clone()),
    }
}

fn write_dataset(out: &Path, stem: &str, ts: &TimeSeries, meta: &DatasetMeta, m: &mut RunManifest) -> CliResult<String> {
    let bin = format!("{stem}.tdsm");
    write_timeseries(out.join(&bin), ts)?;
    m.add(out, &bin, "timeseries")?;
    let side = format!("{stem}.meta.json");
    write_json(out.join(&side), meta)?;
    m.add(out, &side, "timeseries-meta")?;
    if ts.n_receivers * ts.grid.n_steps <= CSV_SAMPLE_LIMIT {
        let csv = format!("{stem}.csv");
        fs::write(out.join(&csv), timeseries_csv(ts))?;
        m.add(out, &csv, "timeseries-csv")?;
    }
    Ok(bin)
}

fn simulate_stage(l: &Loaded, out: &Path, seed: Option<u64>, m: &mut RunManifest) -> CliResult<Datasets> {
    let cfg = &l.cfg;
    m.config_sha256 = Some(l.hash.clone());
    if cfg.scene.scatterers.is_empty() {
        eprintln!("warning: scene has no scatterers, writing an all-zero dataset");
    }
    let clean = m.time("synthesize", |_| {
        synthesize_timeseries(&cfg.setup, &cfg.scene, &cfg.signal, &cfg.time, &cfg.synthesis)
    })?;
    let sigma_s = cfg.synthesis.sigma.unwrap_or(0.0);
    let clean_path = m.time("write-datasets", |m| {
        write_dataset(out, "clean", &clean, &dataset_meta(l, &clean, sigma_s), m)
    })?;
    let noisy_path = match cfg.noise {
        Some(noise) => {
            let s = seed.unwrap_or(noise.seed);
            m.seed = Some(s);
            let noisy = m.time("noise", |_| add_noise(&clean, noise.delta, s))?;
            Some(m.time("write-datasets", |m| {
                write_dataset(out, "noisy", &noisy, &dataset_meta(l, &noisy, sigma_s), m)
            })?)
        }
        None => {
            m.seed = seed;
            None
        }
    };
    Ok(Datasets { clean: clean_path, noisy: noisy_path })
}

pub fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> CliResult<Datasets> {
    with_manifest("simulate", config, out, |m| {
        let l = load(config)?;
        simulate_stage(&l, out, seed, m)
    })
}

/// Sidecar path for a `.tdsm` file.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("meta.json")
}

fn same_points(a: &[Point], b: &[Point]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.dist(q) <= 1e-9 * (1.0 + p.norm()))
}

/// Checks a dataset and its sidecar against the configured geometry.
pub fn check_dataset(cfg: &RunConfig, ts: &TimeSeries, meta: &DatasetMeta) -> CliResult<()> {
    let geometry = |msg: String| CliError::new(EXIT_GEOMETRY, format!("geometry mismatch: {msg}"));
    meta.check(ts).map_err(|e| geometry(e.to_string()))?;
    if meta.dim != cfg.scene.dim {
        return Err(geometry(format!("dataset is {}, config is {}", meta.dim, cfg.scene.dim)));
    }
    if !same_points(&meta.receivers, &cfg.setup.receivers) {
        return Err(geometry("receiver positions differ from the config".into()));
    }
    if !same_points(&meta.sources, &cfg.setup.sources) {
        return Err(geometry("source positions differ from the config".into()));
    }
    if ts.grid.n_steps != cfg.time.n_steps || (ts.grid.dt - cfg.time.dt).abs() > 1e-12 * cfg.time.dt {
        return Err(geometry(format!(
            "time grid {}x{} differs from config {}x{}",
            ts.grid.n_steps, ts.grid.dt, cfg.time.n_steps, cfg.time.dt
        )));
    }
    if meta.background_speed != cfg.scene.background_speed {
        return Err(geometry("background speed differs from the config".into()));
    }
    Ok(())
}

#[derive(Serialize)]
pub struct GridSummary {
    pub stem: String,
    pub sigma: f64,
    pub n_sources: usize,
    pub raw_max: f64,
    pub argmax: Point,
    /// Up to ten largest local maxima of the normalized grid.
    pub local_maxima: Vec<(Point, f64)>,
    pub localization_cells: Vec<Option<f64>>,
    pub off_peak_max: f64,
    pub exclusion_radius: f64,
    /// `omega0 L / (2 c0)`.
    pub resolution_ratio: Option<f64>,
    /// Measure of `{value >= 0.5} Δ support` for extended shapes.
    pub symmetric_difference: Option<f64>,
}

fn image_stage(l: &Loaded, data: &Path, out: &Path, m: &mut RunManifest) -> CliResult<Vec<GridSummary>> {
    let cfg = &l.cfg;
    m.config_sha256 = Some(l.hash.clone());
    let ts = read_timeseries(data)?;
    let meta: DatasetMeta = read_json(sidecar_path(data)).map_err(|e| {
        CliError::new(EXIT_GEOMETRY, format!("cannot read sidecar {}: {e}", sidecar_path(data).display()))
    })?;
    check_dataset(cfg, &ts, &meta)?;
    let has_cloud = cfg.shapes.iter().any(|(_, s)| s.is_cloud());
    let mut summaries = Vec::new();
    for &sigma in &cfg.sigma_sweep {
        let icfg = ImagingConfig::new(cfg.scene.dim, cfg.scene.background_speed, sigma, cfg.time.terminal_time())?
            .with_interpolation(cfg.interpolation);
        for &k in &cfg.source_counts {
            let setup = cfg.setup.first_sources(k);
            let sub = ts.first_sources(k);
            let stem = format!("indicator_sigma{}_src{k}", fmt_num(sigma));
            let raw = m.time("image", |_| indicator_grid(&cfg.grid, &sub, &setup, &icfg))?;
            let g = normalize(&raw)?;
            let csv = format!("{stem}.csv");
            fs::write(out.join(&csv), grid_csv(&g))?;
            m.add(out, &csv, "grid-csv")?;
            let pgm = format!("{stem}.pgm");
            fs::write(out.join(&pgm), grid_pgm(&g))?;
            m.add(out, &pgm, "grid-pgm")?;
            let pr = peak_report(&g, &cfg.scene);
            let symmetric_difference = has_cloud.then(|| {
                level_set_symmetric_difference(&g, 0.5, |p| {
                    cfg.shapes.iter().any(|(c, s)| s.contains(&(*p - *c)))
                })
            });
            summaries.push(GridSummary {
                stem,
                sigma,
                n_sources: setup.n_sources(),
                raw_max: raw.max(),
                argmax: g.grid.point(g.argmax()),
                local_maxima: pr.maxima.iter().take(10).copied().collect(),
                localization_cells: if has_cloud { Vec::new() } else { pr.localization_cells },
                off_peak_max: pr.off_peak_max,
                exclusion_radius: pr.exclusion_radius,
                resolution_ratio: cfg
                    .scene
                    .separation()
                    .map(|sep| cfg.signal.omega0 * sep / (2.0 * cfg.scene.background_speed)),
                symmetric_difference,
            });
        }
    }
    write_json(out.join("summary.json"), &summaries)?;
    m.add(out, "summary.json", "summary")?;
    Ok(summaries)
}

pub fn image(config: &Path, data: &Path, out: &Path) -> CliResult<Vec<GridSummary>> {
    with_manifest("image", config, out, |m| {
        let l = load(config)?;
        image_stage(&l, data, out, m)
    })
}

/// Fixed parameters of the standalone analysis suites.
pub const LEMMA_RADII: [f64; 3] = [50.0, 200.0, 500.0];
pub const LEMMA_QUAD_2D: usize = 1024;
pub const LEMMA_QUAD_3D: usize = 64;
pub const CLOSED_FORM_KS: [f64; 3] = [0.0, 0.1, 1.0];
pub const CLOSED_FORM_RADIUS: f64 = 500.0;
pub const CLOSED_FORM_QUAD: usize = 64;
pub const EQUIVALENCE_TOL: f64 = 0.02;

/// Runs one check and returns `(passed, report)`.
pub fn run_check(l: &Loaded, check: Check) -> CliResult<(bool, serde_json::Value)> {
    let cfg = &l.cfg;
    let c0 = cfg.scene.background_speed;
    match check {
        Check::Equivalence => {
            let ts = synthesize_timeseries(&cfg.setup, &cfg.scene, &cfg.signal, &cfg.time, &cfg.synthesis)?;
            let freq = FrequencyGrid::for_series(&cfg.time)?;
            let mut reports = Vec::new();
            for &sigma in &cfg.sigma_sweep {
                let icfg = ImagingConfig::new(cfg.scene.dim, c0, sigma, cfg.time.terminal_time())?
                    .with_interpolation(cfg.interpolation);
                let spec = spectrum_from_series(&ts, sigma, &freq)?;
                reports.push(equivalence_check(&cfg.grid, &ts, &spec, &cfg.setup, &icfg, EQUIVALENCE_TOL)?);
            }
            let pass = reports.iter().all(|r| r.pass);
            Ok((pass, json!({ "check": "equivalence", "pass": pass, "reports": reports })))
        }
        Check::Lemma => {
            let two = lemma_check(Dim::Two, &LEMMA_RADII, LEMMA_QUAD_2D)?;
            let three = lemma_check(Dim::Three, &LEMMA_RADII, LEMMA_QUAD_3D)?;
            let pass = two.pass() && three.pass();
            Ok((
                pass,
                json!({
                    "check": "lemma",
                    "pass": pass,
                    "radii": LEMMA_RADII,
                    "dim2": { "pass": two.pass(), "summary": two },
                    "dim3": { "pass": three.pass(), "summary": three },
                }),
            ))
        }
        Check::ClosedForm => {
            let y = Point::new3(0.12, -0.2, 0.3);
            let omega = ComplexFrequency::new(cfg.signal.omega0, cfg.sigma)?;
            let reports = closed_form_check(&CLOSED_FORM_KS, &y, omega, c0, CLOSED_FORM_RADIUS, CLOSED_FORM_QUAD)?;
            let pass = reports.iter().all(|r| r.rel_error < 1e-2);
            Ok((pass, json!({ "check": "closed-form", "pass": pass, "reports": reports })))
        }
        Check::Theorem => {
            let r = match cfg.setup.geometry {
                GeometryTag::Circle { radius } | GeometryTag::Sphere { radius } | GeometryTag::Arc { radius, .. } => radius,
                GeometryTag::Square { side } => side / 2.0,
                GeometryTag::Custom => 4.2,
            };
            let freq = FrequencyGrid::for_signal(&cfg.signal, cfg.time.terminal_time())?;
            let rep = theorem_check(
                &cfg.scene,
                &cfg.setup.sources[0],
                cfg.setup.n_receivers(),
                [r, 2.0 * r],
                &cfg.signal,
                cfg.sigma,
                &freq,
                cfg.time.terminal_time(),
                &cfg.grid,
            )?;
            Ok((rep.pass, json!({ "check": "theorem", "pass": rep.pass, "report": rep })))
        }
    }
}

fn verify_stage(l: &Loaded, checks: &[Check], out: &Path, m: &mut RunManifest) -> CliResult<()> {
    m.config_sha256 = Some(l.hash.clone());
    let mut failed = Vec::new();
    for &c in checks {
        let (pass, report) = m.time(&format!("verify-{}", c.name()), |_| run_check(l, c))?;
        let rel = format!("verify_{}.json", c.name().replace('-', "_"));
        write_json(out.join(&rel), &report)?;
        m.add(out, &rel, "report")?;
        eprintln!("verify {}: {}", c.name(), if pass { "pass" } else { "FAIL" });
        if !pass {
            failed.push(c.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(EXIT_VERIFY, format!("checks out of tolerance: {}", failed.join(", "))))
    }
}

pub fn verify(config: &Path, checks: &[Check], out: &Path) -> CliResult<()> {
    with_manifest("verify", config, out, |m| {
        let l = load(config)?;
        verify_stage(&l, checks, out, m)
    })
}

/// simulate → image (noisy data when configured) → verify, stopping at the
/// first failing stage.
pub fn pipeline(config: &Path, out: &Path, seed: Option<u64>, checks: &[Check]) -> CliResult<()> {
    with_manifest("pipeline", config, out, |m| {
        let l = load(config)?;
        let data = simulate_stage(&l, out, seed, m)?;
        let input = out.join(data.noisy.as_ref().unwrap_or(&data.clean));
        image_stage(&l, &input, out, m)?;
        verify_stage(&l, checks, out, m)
    })
}
