//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits nonzero on a failing criterion only when `WAVEDSM_ACCEPTANCE_STRICT=1`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use wavedsm_core::analysis::{
    closed_form_check, equivalence_check, lemma_check, level_set_symmetric_difference, peak_report, top_maxima_match,
};
use wavedsm_core::forward::{add_noise, spectrum_from_series, synthesize_timeseries};
use wavedsm_core::imaging::{indicator_grid, normalize};
use wavedsm_core::scene::{load_scene_file, RunConfig};
use wavedsm_core::signals::{forward_laplace, inverse_laplace, FrequencyGrid};
use wavedsm_core::specfun::{
    hankel0_first, mod_bessel_i0_asymptotic, mod_bessel_i0_series, mod_sph_bessel_i0, sph_bessel_j0,
};
use wavedsm_core::*;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> RunConfig {
    load_scene_file(config(name)).expect("shipped config loads")
}

fn imaging_config(cfg: &RunConfig, sigma: f64) -> ImagingConfig {
    ImagingConfig::new(cfg.scene.dim, cfg.scene.background_speed, sigma, cfg.time.terminal_time())
        .unwrap()
        .with_interpolation(cfg.interpolation)
}

fn specfun() -> (bool, String) {
    let mut j0_err: f64 = 0.0;
    for i in 0..=300 {
        let x = i as f64 * 0.1;
        let j = sph_bessel_j0(Complex64::new(0.0, -x));
        let i0 = mod_sph_bessel_i0(x);
        j0_err = j0_err.max((j - i0).norm() / i0);
    }
    let mut i0_err: f64 = 0.0;
    for i in 0..=200 {
        let x = 14.0 + i as f64 * 0.01;
        let a = mod_bessel_i0_series(x);
        i0_err = i0_err.max(((a - mod_bessel_i0_asymptotic(x)) / a).abs());
    }
    let h = 1e-3;
    let f = |t: f64| hankel0_first(Complex64::new(t, 0.0)).unwrap();
    let mut ode: f64 = 0.0;
    for i in 0..=490 {
        let x = 1.0 + i as f64 * 0.1;
        let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
        let r = (fp - f0 * 2.0 + fm) / (h * h) + (fp - fm) / (2.0 * h) / x + f0;
        ode = ode.max(r.norm());
    }
    let h100 = (f(100.0).norm() / (2.0 / (100.0 * PI)).sqrt() - 1.0).abs();
    let pass = j0_err <= 1e-12 && i0_err <= 1e-9 && ode < 1e-5 && h100 < 0.01;
    (pass, format!("j0/i0 {j0_err:.1e}, I0 branches {i0_err:.1e}, ODE residual {ode:.1e}, |H0(100)| off by {h100:.1e}"))
}

fn transforms() -> (bool, String) {
    let spec = SignalSpec::gauss_mod_sine(20.0).unwrap();
    let g = TimeGrid::new(0.02, 300).unwrap();
    let f = g.sample(&spec);
    let freq = FrequencyGrid::for_signal(&spec, g.terminal_time()).unwrap();
    let hat = forward_laplace(&f, &g, 0.0, &freq.xi).unwrap();
    let back = inverse_laplace(&hat, &freq.xi, 0.0, &g).unwrap();
    let num: f64 = f.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = f.iter().map(|a| a * a).sum();
    let rt = (num / den).sqrt();
    let e_t = den * g.dt;
    let e_f: f64 = hat.iter().map(|c| c.norm_sqr()).sum::<f64>() * freq.dxi / (2.0 * PI);
    let pars = ((e_t - e_f) / e_t).abs();
    (rt < 1e-4 && pars < 1e-3, format!("round trip {rt:.1e}, Parseval {pars:.1e}"))
}

fn equivalence() -> (bool, String) {
    let cfg = load("point3_gauss.json");
    let ts = synthesize_timeseries(&cfg.setup, &cfg.scene, &cfg.signal, &cfg.time, &cfg.synthesis).unwrap();
    let freq = FrequencyGrid::for_series(&cfg.time).unwrap();
    let spectrum = spectrum_from_series(&ts, 0.0, &freq).unwrap();
    let rep = equivalence_check(&cfg.grid, &ts, &spectrum, &cfg.setup, &imaging_config(&cfg, 0.0), 0.02).unwrap();
    (
        rep.pass,
        format!("max relative {:.2e} over {} nodes (mean {:.1e}), tolerance 2e-2", rep.max_rel, rep.n_nodes, rep.mean_rel),
    )
}

/// Normalized noisy image of the three-scatterer scene for waveform `spec`.
fn noisy_image(cfg: &RunConfig, spec: &SignalSpec, seed: u64) -> ImagingGrid {
    let ts = synthesize_timeseries(&cfg.setup, &cfg.scene, spec, &cfg.time, &cfg.synthesis).unwrap();
    let ts = add_noise(&ts, 0.1, seed).unwrap();
    normalize(&indicator_grid(&cfg.grid, &ts, &cfg.setup, &imaging_config(cfg, 0.0)).unwrap()).unwrap()
}

fn localized(cfg: &RunConfig, seed: u64) -> (bool, ImagingGrid, String) {
    let targets: Vec<Point> = cfg.scene.scatterers.iter().map(|s| s.center).collect();
    let g = noisy_image(cfg, &SignalSpec::gauss_mod_sine(20.0).unwrap(), seed);
    let (ok, top) = top_maxima_match(&g, &targets, 2.0);
    let cells = peak_report(&g, &cfg.scene).localization_cells;
    let top: Vec<String> = top.iter().map(|(p, v)| format!("({:.2},{:.2})={v:.2}", p.x(), p.y())).collect();
    let cells: Vec<String> = cells.iter().map(|c| c.map_or("-".into(), |c| format!("{c:.2}"))).collect();
    (ok, g, format!("top maxima [{}], nearest-maximum cells [{}]", top.join(" "), cells.join(" ")))
}

fn localization() -> (bool, String) {
    let cfg = load("point3_gauss.json");
    let (ok, g20, detail) = localized(&cfg, 1);
    let g5 = noisy_image(&cfg, &SignalSpec::gauss_mod_sine(5.0).unwrap(), 1);
    let (off20, off5) = (peak_report(&g20, &cfg.scene).off_peak_max, peak_report(&g5, &cfg.scene).off_peak_max);
    let trend = off5 > off20;
    (ok && trend, format!("{detail}; off-peak max {off20:.3} at ω0=20, {off5:.3} at ω0=5"))
}

fn lemma() -> (bool, String) {
    let two = lemma_check(Dim::Two, &[50.0, 200.0, 500.0], 1024).unwrap();
    let three = lemma_check(Dim::Three, &[50.0, 200.0, 500.0], 64).unwrap();
    let fmt = |s: &[f64]| s.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ");
    (
        two.pass() && three.pass(),
        format!(
            "2D worst ratio {:.3}, z=y ratios [{}]; 3D worst ratio {:.3}, z=y ratios [{}]",
            two.worst_ratio,
            fmt(&two.equality_ratios),
            three.worst_ratio,
            fmt(&three.equality_ratios)
        ),
    )
}

fn closed_form() -> (bool, String) {
    let y = Point::new3(0.12, -0.2, 0.3);
    let omega = ComplexFrequency::new(20.0, 0.2).unwrap();
    let mut worst = Vec::new();
    let mut pass = true;
    for c0 in [1.0, 4.0] {
        let reps = closed_form_check(&[0.0, 0.1, 1.0], &y, omega, c0, 500.0, 64).unwrap();
        let e = reps.iter().map(|r| r.rel_error).fold(0.0, f64::max);
        pass &= e < 1e-2;
        worst.push(format!("c0={c0}: {e:.2e}"));
    }
    (pass, format!("worst relative error {}", worst.join(", ")))
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for run in &runs {
        let status = Command::new(env!("CARGO_BIN_EXE_wavedsm"))
            .args(["pipeline", "--config"])
            .arg(config("point3_gauss.json"))
            .arg("--out")
            .arg(run)
            .args(["--seed", "1"])
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return (false, format!("pipeline exited with {status}"));
        }
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(&runs[0]).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if [".tdsm", ".csv", ".pgm"].iter().any(|e| name.ends_with(e)) {
            files.push(name);
        }
    }
    files.sort();
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| std::fs::read(runs[0].join(f)).unwrap() != std::fs::read(runs[1].join(f)).ok().unwrap_or_default())
        .collect();
    (
        differing.is_empty() && !files.is_empty(),
        format!("{} artifacts compared, differing {:?}", files.len(), differing),
    )
}

fn noise_robustness() -> (bool, String) {
    let cfg = load("point3_gauss.json");
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in [1, 2, 3] {
        let (ok, _, detail) = localized(&cfg, seed);
        pass &= ok;
        parts.push(format!("seed {seed} {}: {detail}", if ok { "ok" } else { "miss" }));
    }
    (pass, parts.join("; "))
}

fn multi_source() -> (bool, String) {
    let cfg = load("kite_multisource.json");
    let ts = synthesize_timeseries(&cfg.setup, &cfg.scene, &cfg.signal, &cfg.time, &cfg.synthesis).unwrap();
    let icfg = imaging_config(&cfg, cfg.sigma);
    let mut areas = Vec::new();
    for k in 1..=4 {
        let g = normalize(&indicator_grid(&cfg.grid, &ts.first_sources(k), &cfg.setup.first_sources(k), &icfg).unwrap())
            .unwrap();
        areas.push(level_set_symmetric_difference(&g, 0.5, |p| {
            cfg.shapes.iter().any(|(c, s)| s.contains(&(*p - *c)))
        }));
    }
    let pass = areas.windows(2).all(|w| w[1] < w[0]);
    let fmt: Vec<String> = areas.iter().map(|a| format!("{a:.3}")).collect();
    (pass, format!("symmetric difference for 1..4 sources [{}]", fmt.join(" ")))
}

fn main() {
    let criteria: [(&str, fn() -> (bool, String)); 9] = [
        ("special functions", specfun),
        ("transform round trip", transforms),
        ("time/frequency equivalence", equivalence),
        ("localization", localization),
        ("G-integral bounds", lemma),
        ("j0 closed form", closed_form),
        ("determinism", determinism),
        ("noise robustness", noise_robustness),
        ("multi-source trend", multi_source),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = run();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name} ({:.1} s): {detail}", i + 1, t.elapsed().as_secs_f64());
        if !pass {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {}/9 passed, failing {:?}", 9 - failed.len(), failed);
    if !failed.is_empty() && std::env::var("WAVEDSM_ACCEPTANCE_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
