//! Born-approximation synthesis of receiver traces.
//!
//! For a contour point `ω` the scattered field of source `y_s` at receiver
//! `x_m` is
//!
//! ```text
//! p̂^s(x_m, ω) = Σ_j h_j ω² χ̂(ω) Φ_ω(y_j, y_s) Φ_ω(x_m, y_j)
//! ```
//!
//! Traces are obtained by evaluating this on a symmetric frequency grid and
//! inverting the Fourier–Laplace transform on the recording grid. Only the
//! waveform up to the terminal time can reach a receiver before `T`, so the
//! source signal is rolled off smoothly after `T` before its spectrum is
//! taken; this makes every waveform (including the growing `t² sin 20t`)
//! transformable on the real axis without changing the data on `(0, T]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dim, Point};
use crate::scene::{scatterer_weight, MeasurementSetup, Scene};
use crate::signals::{forward_laplace, signal_spectrum, FrequencyGrid, SignalSpec, TimeGrid};
use crate::specfun::{fundamental_solution_at_distance, ComplexFrequency};

/// Relative imaginary residue above which synthesis is rejected.
pub const MAX_IMAG_RESIDUE: f64 = 1e-6;

/// Whether a dataset has been perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Clean,
    Noisy { delta: f64, seed: u64 },
}

/// Real traces per source, each a receiver-major `n_receivers × n_steps` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub dim: Dim,
    pub grid: TimeGrid,
    pub n_receivers: usize,
    pub data: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl TimeSeries {
    pub fn zeros(dim: Dim, grid: TimeGrid, n_sources: usize, n_receivers: usize) -> Self {
        TimeSeries {
            dim,
            grid,
            n_receivers,
            data: vec![vec![0.0; n_receivers * grid.n_steps]; n_sources],
            provenance: Provenance::Clean,
        }
    }

    /// Builds a series from raw samples, checking shapes and finiteness.
    pub fn from_raw(dim: Dim, grid: TimeGrid, n_receivers: usize, data: Vec<Vec<f64>>) -> Result<Self> {
        for (s, d) in data.iter().enumerate() {
            if d.len() != n_receivers * grid.n_steps {
                return Err(Error::invalid(format!(
                    "source {s}: expected {} samples, got {}",
                    n_receivers * grid.n_steps,
                    d.len()
                )));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("source {s}: non-finite sample")));
            }
        }
        Ok(TimeSeries { dim, grid, n_receivers, data, provenance: Provenance::Clean })
    }

    pub fn n_sources(&self) -> usize {
        self.data.len()
    }

    pub fn trace(&self, source: usize, receiver: usize) -> &[f64] {
        let n = self.grid.n_steps;
        &self.data[source][receiver * n..(receiver + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scaled(&self, alpha: f64) -> TimeSeries {
        let mut out = self.clone();
        out.data.iter_mut().flatten().for_each(|v| *v *= alpha);
        out
    }

    /// A copy holding only the first `k` sources.
    pub fn first_sources(&self, k: usize) -> TimeSeries {
        TimeSeries { data: self.data[..k.min(self.data.len())].to_vec(), ..self.clone() }
    }
}

/// Complex spectra per source, each a receiver-major `n_receivers × n_freq` matrix,
/// on the contour `Im ω = sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub sigma: f64,
    pub freq: FrequencyGrid,
    pub n_receivers: usize,
    pub data: Vec<Vec<Complex64>>,
}

impl Spectrum {
    pub fn n_sources(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, source: usize, receiver: usize) -> &[Complex64] {
        let k = self.freq.len();
        &self.data[source][receiver * k..(receiver + 1) * k]
    }

    pub fn get(&self, source: usize, receiver: usize, k: usize) -> Complex64 {
        self.data[source][receiver * self.freq.len() + k]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Overrides for the synthesis contour and grid. Unset fields take defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Contour damping; default 0.
    pub sigma: Option<f64>,
    /// Half-width of the frequency band; default from the waveform.
    pub band: Option<f64>,
    /// Frequency step; default `2π/(4T)`, refined if the period is too short.
    pub dxi: Option<f64>,
    /// Roll-off length after `T`; default `max(1, T/4)`.
    pub taper: Option<f64>,
}

impl SynthesisOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("synthesis sigma must be nonnegative, got {s}")));
            }
        }
        for (name, v) in [("band", self.band), ("dxi", self.dxi), ("taper", self.taper)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("synthesis {name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Resolved synthesis parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisPlan {
    pub sigma: f64,
    pub freq: FrequencyGrid,
    pub taper: f64,
    pub max_delay: f64,
}

/// Longest source → scatterer → receiver travel time.
pub fn max_travel_time(setup: &MeasurementSetup, scene: &Scene) -> f64 {
    let c0 = scene.background_speed;
    let mut best: f64 = 0.0;
    for s in &scene.scatterers {
        let a = setup.sources.iter().map(|p| p.dist(&s.center)).fold(0.0, f64::max);
        let b = setup.receivers.iter().map(|p| p.dist(&s.center)).fold(0.0, f64::max);
        best = best.max((a + b) / c0);
    }
    best
}

/// Chooses the contour and frequency grid for a synthesis run.
///
/// The discrete inversion is antiperiodic with period `P = 2π/dξ`; the
/// default `dξ = 2π/(4T)` is refined when `P` does not comfortably exceed
/// the support `T + taper + max travel time` of the damped field.
pub fn plan_synthesis(
    setup: &MeasurementSetup,
    scene: &Scene,
    spec: &SignalSpec,
    time: &TimeGrid,
    opts: &SynthesisOptions,
) -> Result<SynthesisPlan> {
    opts.validate()?;
    let t_end = time.terminal_time();
    let sigma = opts.sigma.unwrap_or(0.0);
    let band = opts.band.unwrap_or_else(|| spec.default_band());
    let taper = opts.taper.unwrap_or_else(|| (t_end / 4.0).max(1.0));
    let max_delay = max_travel_time(setup, scene);
    let dxi = match opts.dxi {
        Some(d) => d,
        None => {
            let support = t_end + taper + max_delay;
            let period = (4.0 * t_end).max(1.5 * support);
            2.0 * PI / period
        }
    };
    let freq = FrequencyGrid::symmetric(band, dxi)?;
    Ok(SynthesisPlan { sigma, freq, taper, max_delay })
}

fn kernel(dim: Dim, a: &Point, b: &Point, omega: Complex64, c0: f64, what: &str) -> Result<Complex64> {
    let d = a.dist(b);
    if d == 0.0 {
        return Err(Error::Geometry(format!("{what} coincides with a scatterer center at {:?}", b.0)));
    }
    fundamental_solution_at_distance(dim, d, omega, c0)
}

/// Incident field `χ̂(ω) Φ_ω(x, y_s)` of a monopole at `y_s`.
pub fn incident_spectrum(
    x: &Point,
    y_source: &Point,
    omega: ComplexFrequency,
    chi_hat: Complex64,
    scene: &Scene,
) -> Result<Complex64> {
    if x.dist(y_source) == 0.0 {
        return Err(Error::Geometry("field point coincides with the source".into()));
    }
    if chi_hat == Complex64::new(0.0, 0.0) {
        return Ok(chi_hat);
    }
    Ok(chi_hat * fundamental_solution_at_distance(scene.dim, x.dist(y_source), omega.as_complex(), scene.background_speed)?)
}

/// Born scattered field at one contour point, indexed `[source][receiver]`.
pub fn born_spectrum(
    setup: &MeasurementSetup,
    scene: &Scene,
    chi_hat: Complex64,
    omega: ComplexFrequency,
) -> Result<Vec<Vec<Complex64>>> {
    let w = omega.as_complex();
    let c0 = scene.background_speed;
    let dim = scene.dim;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![vec![zero; setup.n_receivers()]; setup.n_sources()];
    let factor = w * w * chi_hat;
    for s in &scene.scatterers {
        let h = scatterer_weight(s, c0);
        let to_rx: Vec<Complex64> = setup
            .receivers
            .iter()
            .map(|x| kernel(dim, x, &s.center, w, c0, "receiver"))
            .collect::<Result<_>>()?;
        for (src, row) in setup.sources.iter().zip(out.iter_mut()) {
            let inc = factor * kernel(dim, src, &s.center, w, c0, "source")? * h;
            for (acc, g) in row.iter_mut().zip(&to_rx) {
                *acc += inc * g;
            }
        }
    }
    Ok(out)
}

/// Born spectra over a whole frequency grid, in [`Spectrum`] layout.
pub fn born_spectrum_grid(
    setup: &MeasurementSetup,
    scene: &Scene,
    chi_hat: &[Complex64],
    freq: &FrequencyGrid,
    sigma: f64,
) -> Result<Spectrum> {
    if chi_hat.len() != freq.len() {
        return Err(Error::invalid("signal spectrum and frequency grid differ in length"));
    }
    let slices: Vec<Vec<Vec<Complex64>>> = freq
        .xi
        .par_iter()
        .zip(chi_hat.par_iter())
        .map(|(&xi, &c)| born_spectrum(setup, scene, c, ComplexFrequency::new(xi, sigma)?))
        .collect::<Result<_>>()?;
    let (ns, nm, nk) = (setup.n_sources(), setup.n_receivers(), freq.len());
    let mut data = vec![vec![Complex64::new(0.0, 0.0); nm * nk]; ns];
    for (k, slice) in slices.iter().enumerate() {
        for s in 0..ns {
            for m in 0..nm {
                data[s][m * nk + k] = slice[s][m];
            }
        }
    }
    Ok(Spectrum { sigma, freq: freq.clone(), n_receivers: nm, data })
}

/// Table `e^{-i ξ_k t_n}` shared by all rows of one inversion.
struct InversionTable {
    phases: Vec<Complex64>,
    n_freq: usize,
    scale: Vec<f64>,
}

impl InversionTable {
    fn new(freq: &FrequencyGrid, sigma: f64, grid: &TimeGrid) -> Self {
        let nk = freq.len();
        let mut phases = Vec::with_capacity(nk * grid.n_steps);
        for t in grid.times() {
            for &x in &freq.xi {
                let (s, c) = (x * t).sin_cos();
                phases.push(Complex64::new(c, -s));
            }
        }
        let scale = grid.times().map(|t| freq.dxi / (2.0 * PI) * (sigma * t).exp()).collect();
        InversionTable { phases, n_freq: nk, scale }
    }

    fn apply(&self, row: &[Complex64]) -> (Vec<f64>, f64) {
        let mut out = Vec::with_capacity(self.scale.len());
        let mut imag2 = 0.0;
        for (n, sc) in self.scale.iter().enumerate() {
            let ph = &self.phases[n * self.n_freq..(n + 1) * self.n_freq];
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, f) in ph.iter().zip(row) {
                acc += p * f;
            }
            out.push(acc.re * sc);
            imag2 += (acc.im * sc).powi(2);
        }
        (out, imag2)
    }
}

/// Inverts every row of a spectrum onto the recording grid.
///
/// Fails with [`Error::Synthesis`] if the discarded imaginary part exceeds
/// [`MAX_IMAG_RESIDUE`] of the trace norm.
pub fn invert_spectrum(spectrum: &Spectrum, dim: Dim, grid: &TimeGrid) -> Result<TimeSeries> {
    let table = InversionTable::new(&spectrum.freq, spectrum.sigma, grid);
    let nm = spectrum.n_receivers;
    let mut data = Vec::with_capacity(spectrum.n_sources());
    for s in 0..spectrum.n_sources() {
        let rows: Vec<(Vec<f64>, f64)> = (0..nm)
            .into_par_iter()
            .map(|m| table.apply(spectrum.row(s, m)))
            .collect();
        let real2: f64 = rows.iter().flat_map(|r| r.0.iter()).map(|v| v * v).sum();
        let imag2: f64 = rows.iter().map(|r| r.1).sum();
        if imag2.sqrt() > MAX_IMAG_RESIDUE * real2.sqrt() {
            return Err(Error::Synthesis(format!(
                "source {s}: imaginary residue {:.3e} of norm {:.3e}; the frequency band is probably truncated",
                imag2.sqrt(),
                real2.sqrt()
            )));
        }
        data.push(rows.into_iter().flat_map(|r| r.0).collect());
    }
    TimeSeries::from_raw(dim, *grid, nm, data)
}

/// Synthesizes clean Born traces on the recording grid.
pub fn synthesize_timeseries(
    setup: &MeasurementSetup,
    scene: &Scene,
    spec: &SignalSpec,
    time: &TimeGrid,
    opts: &SynthesisOptions,
) -> Result<TimeSeries> {
    let plan = plan_synthesis(setup, scene, spec, time, opts)?;
    synthesize_with_plan(setup, scene, spec, time, &plan)
}

pub fn synthesize_with_plan(
    setup: &MeasurementSetup,
    scene: &Scene,
    spec: &SignalSpec,
    time: &TimeGrid,
    plan: &SynthesisPlan,
) -> Result<TimeSeries> {
    if scene.scatterers.is_empty() {
        return Ok(TimeSeries::zeros(scene.dim, *time, setup.n_sources(), setup.n_receivers()));
    }
    let chi = signal_spectrum(spec, &plan.freq, plan.sigma, time.terminal_time(), plan.taper)?;
    let spectrum = born_spectrum_grid(setup, scene, &chi, &plan.freq, plan.sigma)?;
    if !spectrum.is_finite() {
        return Err(Error::Synthesis("non-finite spectrum value".into()));
    }
    invert_spectrum(&spectrum, scene.dim, time)
}

/// Discrete Fourier–Laplace transform of every trace on `freq` at damping `sigma`.
pub fn spectrum_from_series(ts: &TimeSeries, sigma: f64, freq: &FrequencyGrid) -> Result<Spectrum> {
    let nm = ts.n_receivers;
    let mut data = Vec::with_capacity(ts.n_sources());
    for s in 0..ts.n_sources() {
        let rows: Vec<Vec<Complex64>> = (0..nm)
            .into_par_iter()
            .map(|m| forward_laplace(ts.trace(s, m), &ts.grid, sigma, &freq.xi))
            .collect::<Result<_>>()?;
        data.push(rows.into_iter().flatten().collect());
    }
    Ok(Spectrum { sigma, freq: freq.clone(), n_receivers: nm, data })
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in `[-1, 1)` keyed by `(seed, source, receiver, step)`.
///
/// `u = splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ source) ^ receiver) ^ step)`,
/// then `R = 2 (u >> 11) 2^-53 - 1`.
pub fn noise_uniform(seed: u64, source: u64, receiver: u64, step: u64) -> f64 {
    let u = splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ source) ^ receiver) ^ step);
    ((u >> 11) as f64) * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

/// Multiplies every sample by `1 + δR`.
pub fn add_noise(ts: &TimeSeries, delta: f64, seed: u64) -> Result<TimeSeries> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("noise level must be nonnegative, got {delta}")));
    }
    let n = ts.grid.n_steps;
    let mut out = ts.clone();
    for (s, d) in out.data.iter_mut().enumerate() {
        d.par_chunks_mut(n).enumerate().for_each(|(m, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v *= 1.0 + delta * noise_uniform(seed, s as u64, m as u64, i as u64);
            }
        });
    }
    out.provenance = Provenance::Noisy { delta, seed };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{circle_receivers, PointScatterer};

    fn setup() -> MeasurementSetup {
        MeasurementSetup::new(circle_receivers(12, 4.2).unwrap(), vec![Point::new2(-3.0, 0.0)]).unwrap()
    }

    fn scene(pts: &[(f64, f64, f64)]) -> Scene {
        let s = pts
            .iter()
            .map(|&(x, y, c)| PointScatterer::new(Point::new2(x, y), c, 0.03).unwrap())
            .collect();
        Scene::new(Dim::Two, 4.0, s).unwrap()
    }

    #[test]
    fn empty_scene_gives_zero() {
        let sc = scene(&[]);
        let w = ComplexFrequency::new(10.0, 0.2).unwrap();
        let b = born_spectrum(&setup(), &sc, Complex64::new(1.0, 0.0), w).unwrap();
        assert!(b.iter().flatten().all(|c| c.norm() == 0.0));
        let spec = SignalSpec::gauss_mod_sine(20.0).unwrap();
        let g = TimeGrid::new(0.02, 100).unwrap();
        let ts = synthesize_timeseries(&setup(), &sc, &spec, &g, &SynthesisOptions::default()).unwrap();
        assert_eq!(ts.max_abs(), 0.0);
    }

    #[test]
    fn superposition_over_scatterers() {
        let w = ComplexFrequency::new(13.0, 0.3).unwrap();
        let c = Complex64::new(0.7, -0.2);
        let a = born_spectrum(&setup(), &scene(&[(1.0, 0.0, 30.0)]), c, w).unwrap();
        let b = born_spectrum(&setup(), &scene(&[(-1.0, 1.5, 10.0)]), c, w).unwrap();
        let ab = born_spectrum(&setup(), &scene(&[(1.0, 0.0, 30.0), (-1.0, 1.5, 10.0)]), c, w).unwrap();
        for m in 0..12 {
            let sum = a[0][m] + b[0][m];
            assert!((ab[0][m] - sum).norm() <= 1e-15 * sum.norm());
        }
    }

    #[test]
    fn reciprocity_of_single_scatterer() {
        let sc = scene(&[(0.5, -0.3, 12.0)]);
        let w = ComplexFrequency::new(9.0, 0.1).unwrap();
        let rx = circle_receivers(12, 4.2).unwrap();
        let x0 = rx.points[3];
        let src = Point::new2(-3.0, 0.0);
        let fwd = born_spectrum(&MeasurementSetup::new(rx.clone(), vec![src]).unwrap(), &sc, Complex64::new(1.0, 0.0), w)
            .unwrap()[0][3];
        let mut swapped = rx;
        swapped.points[3] = src;
        let back = born_spectrum(&MeasurementSetup::new(swapped, vec![x0]).unwrap(), &sc, Complex64::new(1.0, 0.0), w)
            .unwrap()[0][3];
        assert!((fwd - back).norm() <= 1e-14 * fwd.norm());
    }

    #[test]
    fn receiver_on_scatterer_is_geometry_error() {
        let sc = scene(&[(4.2, 0.0, 12.0)]);
        let w = ComplexFrequency::new(9.0, 0.0).unwrap();
        assert!(matches!(
            born_spectrum(&setup(), &sc, Complex64::new(1.0, 0.0), w),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn incident_spectrum_bound_and_zero() {
        let sc = scene(&[]);
        let w = ComplexFrequency::new(7.0, 0.2).unwrap();
        let x = Point::new2(1.0, 1.0);
        let y = Point::new2(-3.0, 0.0);
        let chi = Complex64::new(0.3, 0.4);
        let v = incident_spectrum(&x, &y, w, chi, &sc).unwrap();
        let phi = fundamental_solution_at_distance(Dim::Two, x.dist(&y), w.as_complex(), 4.0).unwrap();
        assert!(v.norm() <= chi.norm() * phi.norm() * (1.0 + 1e-15));
        assert_eq!(incident_spectrum(&x, &y, w, Complex64::new(0.0, 0.0), &sc).unwrap().norm(), 0.0);
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let g = TimeGrid::new(0.1, 50).unwrap();
        let data = vec![(0..50 * 3).map(|i| (i as f64 * 0.37).sin() + 2.0).collect()];
        let ts = TimeSeries::from_raw(Dim::Two, g, 3, data).unwrap();
        let a = add_noise(&ts, 0.1, 7).unwrap();
        let b = add_noise(&ts, 0.1, 7).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.data[0].iter().zip(&ts.data[0]) {
            assert!(((x - y) / y).abs() <= 0.1 + 1e-15);
        }
        let c = add_noise(&ts, 0.1, 8).unwrap();
        assert_ne!(a.data, c.data);
        let z = add_noise(&ts, 0.0, 3).unwrap();
        assert_eq!(z.data, ts.data);
        assert_eq!(z.provenance, Provenance::Noisy { delta: 0.0, seed: 3 });
    }

    #[test]
    fn noise_generator_reference_values() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        let r = noise_uniform(1, 0, 0, 0);
        assert!((-1.0..1.0).contains(&r));
        let mean: f64 = (0..10_000).map(|n| noise_uniform(42, 0, 1, n)).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.03);
    }

    #[test]
    fn plan_defaults() {
        let spec = SignalSpec::gauss_mod_sine(20.0).unwrap();
        let g = TimeGrid::new(0.02, 300).unwrap();
        let sc = scene(&[(1.0, 0.0, 30.0)]);
        let p = plan_synthesis(&setup(), &sc, &spec, &g, &SynthesisOptions::default()).unwrap();
        assert!((p.freq.dxi - 2.0 * PI / 24.0).abs() < 1e-15);
        assert_eq!(p.sigma, 0.0);
        assert!(p.freq.band() >= 80.0);
        assert!(p.freq.period() > g.terminal_time() + p.taper + p.max_delay);
    }
}
