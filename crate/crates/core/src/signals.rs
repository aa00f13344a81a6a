//! Causal source waveforms and the discrete Fourier–Laplace transform pair.
//!
//! The forward transform on a [`TimeGrid`] is
//! `f̂(ξ + iσ) = Σ_n w_n e^{i(ξ+iσ) t_n} f(t_n) dt` with `t_n = n dt`,
//! `n = 1..=N`. The implicit sample at `t_0 = 0` is zero for causal data,
//! so the trapezoid weights are `w_n = 1` except `w_N = 1/2`.
//!
//! The inverse evaluates `(1/2π) Σ_k e^{-i(ξ_k+iσ) t} F_k dξ` on a uniform
//! frequency grid that is symmetric about zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Which of the three model waveforms drives the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// `sin(ω0 t) exp(-3(t-2)^2)`.
    GaussModSine,
    /// Sawtooth of angular frequency 20 smoothed by a narrow Gaussian.
    SmoothSawtooth,
    /// `t^2 sin(20 t)`.
    TemperedSine,
}

impl SignalKind {
    pub fn name(&self) -> &'static str {
        match self {
            SignalKind::GaussModSine => "gauss_mod_sine",
            SignalKind::SmoothSawtooth => "smooth_sawtooth",
            SignalKind::TemperedSine => "tempered_sine",
        }
    }
}

/// A fully specified source waveform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub kind: SignalKind,
    /// Center frequency in rad/s. Only read by [`SignalKind::GaussModSine`].
    pub omega0: f64,
    /// Default imaging damping for this waveform.
    pub recommended_sigma: f64,
}

impl SignalSpec {
    pub fn gauss_mod_sine(omega0: f64) -> Result<Self> {
        let s = SignalSpec { kind: SignalKind::GaussModSine, omega0, recommended_sigma: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn smooth_sawtooth() -> Self {
        SignalSpec { kind: SignalKind::SmoothSawtooth, omega0: 20.0, recommended_sigma: 0.2 }
    }

    pub fn tempered_sine() -> Self {
        SignalSpec { kind: SignalKind::TemperedSine, omega0: 20.0, recommended_sigma: 3.0 }
    }

    /// Builds a spec from its kind; `omega0` is required for the Gaussian pulse.
    pub fn from_kind(kind: SignalKind, omega0: Option<f64>) -> Result<Self> {
        match kind {
            SignalKind::GaussModSine => {
                let w = omega0.ok_or_else(|| Error::Config("gauss_mod_sine needs omega0".into()))?;
                Self::gauss_mod_sine(w)
            }
            SignalKind::SmoothSawtooth => Ok(Self::smooth_sawtooth()),
            SignalKind::TemperedSine => Ok(Self::tempered_sine()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == SignalKind::GaussModSine && !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::invalid(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !(self.recommended_sigma >= 0.0) {
            return Err(Error::invalid("recommended sigma must be nonnegative"));
        }
        Ok(())
    }

    /// Half-width `Ξ` of the default frequency band `[-Ξ, Ξ]`.
    pub fn default_band(&self) -> f64 {
        match self.kind {
            SignalKind::GaussModSine => 4.0 * self.omega0,
            SignalKind::SmoothSawtooth | SignalKind::TemperedSine => 120.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_signal(self, t)
    }
}

/// Evaluates the waveform at time `t`. Exactly zero for `t <= 0`.
pub fn eval_signal(spec: &SignalSpec, t: f64) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    match spec.kind {
        SignalKind::GaussModSine => (spec.omega0 * t).sin() * (-3.0 * (t - 2.0).powi(2)).exp(),
        SignalKind::TemperedSine => t * t * (20.0 * t).sin(),
        SignalKind::SmoothSawtooth => smooth_sawtooth(t),
    }
}

const SAWTOOTH_RATE: f64 = 3000.0;
const SAWTOOTH_HALF_WIDTH: f64 = 8.0;
const SAWTOOTH_NODES: usize = 48;

/// Unsmoothed sawtooth `u - floor(u) - 1/2` with `u = (20τ + π)/(2π)`.
pub fn sawtooth(tau: f64) -> f64 {
    let u = (20.0 * tau + PI) / (2.0 * PI);
    u - u.floor() - 0.5
}

/// The Gaussian-smoothed sawtooth for any real `t` (no causal cutoff).
///
/// The kernel `sqrt(3000/π) exp(-3000 (t-τ)^2)` has standard deviation
/// `s_g = 1/sqrt(6000)`; the integral is truncated to `t ± 8 s_g` and split
/// at the sawtooth jumps `τ = (2k-1)π/20`, so each piece is smooth.
pub fn smooth_sawtooth(t: f64) -> f64 {
    thread_local! {
        static RULE: GaussLegendre = GaussLegendre::new(SAWTOOTH_NODES);
    }
    let sg = 1.0 / (2.0 * SAWTOOTH_RATE).sqrt();
    let a = t - SAWTOOTH_HALF_WIDTH * sg;
    let b = t + SAWTOOTH_HALF_WIDTH * sg;
    let norm = (SAWTOOTH_RATE / PI).sqrt();
    let mut cuts = vec![a];
    let period = PI / 10.0;
    // jumps at τ = (k + 1/2) period
    let mut k = ((a / period) - 0.5).ceil();
    loop {
        let tau = (k + 0.5) * period;
        if tau >= b {
            break;
        }
        if tau > a {
            cuts.push(tau);
        }
        k += 1.0;
    }
    cuts.push(b);
    RULE.with(|rule| {
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            // evaluate the sawtooth at the piece midpoint branch to avoid
            // floor() flipping at the endpoints
            let base = sawtooth(mid);
            let slope = 20.0 / (2.0 * PI);
            acc += rule.integrate(lo, hi, |tau| {
                let s = base + slope * (tau - mid);
                s * (-SAWTOOTH_RATE * (t - tau).powi(2)).exp()
            });
        }
        norm * acc
    })
}

/// Uniform recording grid `t_n = n dt`, `n = 1..=n_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("time grid needs at least one step"));
        }
        Ok(TimeGrid { dt, n_steps })
    }

    /// Grid with step `dt` and terminal time as close to `terminal` as the
    /// step allows.
    pub fn from_terminal(terminal: f64, dt: f64) -> Result<Self> {
        if !(terminal > 0.0) {
            return Err(Error::invalid(format!("terminal time must be positive, got {terminal}")));
        }
        let n = (terminal / dt).round();
        if !(n >= 1.0) {
            return Err(Error::invalid("terminal time shorter than one step"));
        }
        Self::new(dt, n as usize)
    }

    pub fn t_start(&self) -> f64 {
        self.dt
    }

    pub fn terminal_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Time of the sample stored at zero-based index `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_steps).map(|i| self.time(i))
    }

    /// Trapezoid weight of the sample at index `i` (without the `dt`).
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i + 1 == self.n_steps {
            0.5
        } else {
            1.0
        }
    }

    pub fn sample(&self, spec: &SignalSpec) -> Vec<f64> {
        self.times().map(|t| eval_signal(spec, t)).collect()
    }
}

/// Uniform midpoint grid `ξ_k = (k + 1/2 - n/2) dξ`, `k = 0..n`, `n` even.
///
/// The grid is symmetric about zero and never contains `ξ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub dxi: f64,
    pub xi: Vec<f64>,
}

impl FrequencyGrid {
    /// Smallest symmetric midpoint grid with step `dxi` covering `[-band, band]`.
    pub fn symmetric(band: f64, dxi: f64) -> Result<Self> {
        if !(band > 0.0 && band.is_finite()) {
            return Err(Error::invalid(format!("frequency band must be positive, got {band}")));
        }
        if !(dxi > 0.0 && dxi.is_finite()) {
            return Err(Error::invalid(format!("frequency step must be positive, got {dxi}")));
        }
        let half = (band / dxi).ceil().max(1.0) as usize;
        let n = 2 * half;
        let xi = (0..n)
            .map(|k| (k as f64 + 0.5 - half as f64) * dxi)
            .collect();
        Ok(FrequencyGrid { dxi, xi })
    }

    /// Default grid for a waveform observed up to `terminal`: band from
    /// [`SignalSpec::default_band`] and `dξ = 2π/(4T)`.
    pub fn for_signal(spec: &SignalSpec, terminal: f64) -> Result<Self> {
        Self::symmetric(spec.default_band(), 2.0 * PI / (4.0 * terminal))
    }

    /// Grid for the transform of a sampled series: the Nyquist band
    /// `[-π/dt, π/dt]` with `dξ = 2π/(4T)`.
    pub fn for_series(grid: &TimeGrid) -> Result<Self> {
        Self::symmetric(PI / grid.dt, 2.0 * PI / (4.0 * grid.terminal_time()))
    }

    /// Wraps an explicit grid after checking it is uniform.
    pub fn from_points(xi: Vec<f64>) -> Result<Self> {
        let dxi = check_uniform(&xi)?;
        Ok(FrequencyGrid { dxi, xi })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Period `2π/dξ` of the discrete inversion.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.dxi
    }

    pub fn band(&self) -> f64 {
        self.xi.last().copied().unwrap_or(0.0) + 0.5 * self.dxi
    }
}

fn check_uniform(xi: &[f64]) -> Result<f64> {
    if xi.len() < 2 {
        return Err(Error::invalid("frequency grid needs at least two points"));
    }
    let dxi = (xi[xi.len() - 1] - xi[0]) / (xi.len() - 1) as f64;
    if !(dxi > 0.0) {
        return Err(Error::invalid("frequency grid must be strictly increasing"));
    }
    for (k, &x) in xi.iter().enumerate() {
        let expect = xi[0] + k as f64 * dxi;
        if (x - expect).abs() > 1e-9 * dxi.max(x.abs()) {
            return Err(Error::invalid(format!("frequency grid is not uniform at index {k}")));
        }
    }
    Ok(dxi)
}

/// Discrete Fourier–Laplace transform of samples on `grid` at `ξ + iσ`
/// for every `ξ` in `xi`. Linear in `series`.
pub fn forward_laplace<S>(series: &[S], grid: &TimeGrid, sigma: f64, xi: &[f64]) -> Result<Vec<Complex64>>
where
    S: Copy + Into<Complex64>,
{
    if series.is_empty() {
        return Err(Error::invalid("cannot transform an empty series"));
    }
    if xi.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    if series.len() != grid.n_steps {
        return Err(Error::invalid(format!(
            "series has {} samples but the grid has {}",
            series.len(),
            grid.n_steps
        )));
    }
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!("damping must be nonnegative, got {sigma}")));
    }
    let damped: Vec<Complex64> = series
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let t = grid.time(i);
            f.into() * (-sigma * t).exp() * (grid.trapezoid_weight(i) * grid.dt)
        })
        .collect();
    Ok(xi
        .iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, g) in damped.iter().enumerate() {
                let (s, c) = (x * grid.time(i)).sin_cos();
                acc += g * Complex64::new(c, s);
            }
            acc
        })
        .collect())
}

/// Inverse transform returning the complex samples, before taking the real part.
pub fn inverse_laplace_complex(
    spectrum: &[Complex64],
    xi: &[f64],
    sigma: f64,
    grid: &TimeGrid,
) -> Result<Vec<Complex64>> {
    if spectrum.len() != xi.len() {
        return Err(Error::invalid(format!(
            "spectrum has {} values but the frequency grid has {}",
            spectrum.len(),
            xi.len()
        )));
    }
    let dxi = check_uniform(xi)?;
    let scale = dxi / (2.0 * PI);
    Ok(grid
        .times()
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, f) in xi.iter().zip(spectrum) {
                let (s, c) = (x * t).sin_cos();
                acc += f * Complex64::new(c, -s);
            }
            acc * (scale * (sigma * t).exp())
        })
        .collect())
}

/// Inverse transform on the recording grid. The spectrum of a real signal
/// is conjugate-symmetric in `ξ`, so only the real part is kept.
pub fn inverse_laplace(spectrum: &[Complex64], xi: &[f64], sigma: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    Ok(inverse_laplace_complex(spectrum, xi, sigma, grid)?
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// Smooth window equal to 1 for `t <= start`, 0 for `t >= start + width`,
/// and infinitely differentiable in between.
pub fn smooth_cutoff(t: f64, start: f64, width: f64) -> f64 {
    if t <= start {
        return 1.0;
    }
    if t >= start + width {
        return 0.0;
    }
    let u = (t - start) / width;
    let a = (-1.0 / (1.0 - u)).exp();
    let b = (-1.0 / u).exp();
    a / (a + b)
}

/// Spectrum `χ̂(ξ + iσ)` of a waveform on a frequency grid.
///
/// Only the part of the waveform on `[0, horizon]` can influence data up to
/// time `horizon`, so the waveform is rolled off smoothly after `horizon`
/// over `taper` seconds before transforming. The transform uses a step
/// fine enough to resolve the band with margin.
pub fn signal_spectrum(
    spec: &SignalSpec,
    freq: &FrequencyGrid,
    sigma: f64,
    horizon: f64,
    taper: f64,
) -> Result<Vec<Complex64>> {
    if !(horizon > 0.0 && taper > 0.0) {
        return Err(Error::invalid("signal horizon and taper must be positive"));
    }
    let end = horizon + taper;
    let fine = PI / (8.0 * freq.band());
    let n = (end / fine).ceil() as usize;
    let grid = TimeGrid::new(end / n as f64, n)?;
    let samples: Vec<f64> = grid
        .times()
        .map(|t| eval_signal(spec, t) * smooth_cutoff(t, horizon, taper))
        .collect();
    forward_laplace(&samples, &grid, sigma, &freq.xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss20() -> SignalSpec {
        SignalSpec::gauss_mod_sine(20.0).unwrap()
    }

    #[test]
    fn gauss_pulse_values() {
        let s = gauss20();
        assert!((eval_signal(&s, 2.0) - 40f64.sin()).abs() < 1e-15);
        assert!((40f64.sin() - 0.745_113_160_479_349).abs() < 1e-12);
        assert_eq!(eval_signal(&s, -1.0), 0.0);
        assert_eq!(eval_signal(&s, 0.0), 0.0);
    }

    #[test]
    fn tempered_zero_crossing() {
        let s = SignalSpec::tempered_sine();
        assert!(eval_signal(&s, PI / 20.0).abs() < 1e-16);
        assert_eq!(eval_signal(&s, -1.0), 0.0);
    }

    #[test]
    fn causality_all_kinds() {
        for s in [gauss20(), SignalSpec::smooth_sawtooth(), SignalSpec::tempered_sine()] {
            for &t in &[0.0, -1e-12, -0.5, -100.0] {
                assert_eq!(eval_signal(&s, t), 0.0);
            }
        }
    }

    #[test]
    fn gauss_requires_positive_frequency() {
        assert!(SignalSpec::gauss_mod_sine(0.0).is_err());
        assert!(SignalSpec::gauss_mod_sine(-3.0).is_err());
        assert!(SignalSpec::from_kind(SignalKind::GaussModSine, None).is_err());
    }

    #[test]
    fn sawtooth_matches_reference_values() {
        // 30-digit adaptive quadrature of the convolution, split at the jumps
        let refs = [
            (0.05, 0.159_154_943_091_895_281_18),
            (0.157, 0.002_207_309_681_774_542_528_8),
            (0.16, -0.080_185_399_857_030_741_243),
            (0.5, -0.395_504_488_171_235_532_01),
            (1.0, 0.183_098_861_837_900_507_03),
            (2.2, 0.002_817_496_043_394_773_830_9),
            (2.9, 0.230_986_699_300_449_408_13),
        ];
        for (t, want) in refs {
            let got = smooth_sawtooth(t);
            assert!((got - want).abs() < 1e-12, "t={t} got={got} want={want}");
        }
    }

    #[test]
    fn sawtooth_is_odd_and_periodic() {
        for &t in &[0.01, 0.1, 0.3] {
            assert!((smooth_sawtooth(-t) + smooth_sawtooth(t)).abs() < 1e-14);
            assert!((smooth_sawtooth(t + PI / 10.0) - smooth_sawtooth(t)).abs() < 1e-12);
        }
        assert!(smooth_sawtooth(0.0).abs() < 1e-15);
    }

    #[test]
    fn time_grid_layout() {
        let g = TimeGrid::new(0.02, 300).unwrap();
        assert_eq!(g.t_start(), 0.02);
        assert!((g.terminal_time() - 6.0).abs() < 1e-12);
        assert_eq!(g.trapezoid_weight(299), 0.5);
        assert_eq!(g.trapezoid_weight(0), 1.0);
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(0.1, 0).is_err());
        assert_eq!(TimeGrid::from_terminal(6.0, 0.02).unwrap().n_steps, 300);
    }

    #[test]
    fn frequency_grid_is_symmetric_midpoint() {
        let f = FrequencyGrid::symmetric(80.0, 2.0 * PI / 24.0).unwrap();
        assert_eq!(f.len() % 2, 0);
        assert_eq!(f.len(), 612);
        for k in 0..f.len() {
            assert!((f.xi[k] + f.xi[f.len() - 1 - k]).abs() < 1e-12);
        }
        assert!(f.xi.iter().all(|&x| x != 0.0));
        assert!(f.band() >= 80.0);
        assert!(FrequencyGrid::from_points(vec![0.0, 1.0, 2.5]).is_err());
    }

    #[test]
    fn zero_series_zero_spectrum() {
        let g = TimeGrid::new(0.1, 20).unwrap();
        let s = forward_laplace(&vec![0.0; 20], &g, 0.3, &[1.0, 2.0]).unwrap();
        assert!(s.iter().all(|c| c.norm() == 0.0));
        assert!(forward_laplace::<f64>(&[], &g, 0.0, &[1.0]).is_err());
        assert!(forward_laplace(&vec![0.0; 20], &g, 0.0, &[]).is_err());
    }

    #[test]
    fn kernel_cancellation() {
        let (sigma, xi0) = (0.4, 7.0);
        let g = TimeGrid::new(0.01, 500).unwrap();
        let f: Vec<Complex64> = g
            .times()
            .map(|t| Complex64::from_polar((sigma * t).exp(), -xi0 * t))
            .collect();
        let s = forward_laplace(&f, &g, sigma, &[xi0]).unwrap();
        let expect = g.dt * (g.n_steps as f64 - 0.5);
        assert!((s[0] - expect).norm() < 1e-10);
    }

    #[test]
    fn damping_factorizations_agree() {
        let g = TimeGrid::new(0.02, 300).unwrap();
        let f = g.sample(&gauss20());
        let sigma = 0.7;
        let damped: Vec<f64> = f.iter().enumerate().map(|(i, v)| v * (-sigma * g.time(i)).exp()).collect();
        let xi = [-15.0, 3.0, 20.0];
        let a = forward_laplace(&f, &g, sigma, &xi).unwrap();
        let b = forward_laplace(&damped, &g, 0.0, &xi).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-14 * y.norm().max(1e-300));
        }
    }

    #[test]
    fn round_trip_gauss_pulse() {
        let g = TimeGrid::new(0.02, 300).unwrap();
        let f = g.sample(&gauss20());
        let freq = FrequencyGrid::for_signal(&gauss20(), g.terminal_time()).unwrap();
        let spec = forward_laplace(&f, &g, 0.0, &freq.xi).unwrap();
        let back = inverse_laplace(&spec, &freq.xi, 0.0, &g).unwrap();
        let num: f64 = f.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = f.iter().map(|a| a * a).sum();
        assert!((num / den).sqrt() < 1e-4, "rel l2 {}", (num / den).sqrt());
        let maxerr = f.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(maxerr < 1e-6);
    }

    #[test]
    fn round_trip_on_damped_contour() {
        let g = TimeGrid::new(0.02, 300).unwrap();
        let f = g.sample(&gauss20());
        let freq = FrequencyGrid::for_signal(&gauss20(), g.terminal_time()).unwrap();
        let spec = forward_laplace(&f, &g, 0.3, &freq.xi).unwrap();
        let back = inverse_laplace(&spec, &freq.xi, 0.3, &g).unwrap();
        let maxerr = f.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(maxerr < 1e-6);
    }

    #[test]
    fn parseval_at_zero_damping() {
        let g = TimeGrid::new(0.02, 300).unwrap();
        let f = g.sample(&gauss20());
        let freq = FrequencyGrid::for_signal(&gauss20(), g.terminal_time()).unwrap();
        let spec = forward_laplace(&f, &g, 0.0, &freq.xi).unwrap();
        let time_energy: f64 = f.iter().map(|v| v * v).sum::<f64>() * g.dt;
        let freq_energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * freq.dxi / (2.0 * PI);
        assert!(((time_energy - freq_energy) / time_energy).abs() < 1e-3);
    }

    #[test]
    fn spectrum_of_real_signal_is_conjugate_symmetric() {
        let g = TimeGrid::new(0.05, 100).unwrap();
        let f = g.sample(&SignalSpec::tempered_sine());
        let s = forward_laplace(&f, &g, 1.0, &[-3.0, 3.0]).unwrap();
        assert!((s[0] - s[1].conj()).norm() < 1e-12 * s[1].norm());
    }

    #[test]
    fn inverse_rejects_bad_grids() {
        let g = TimeGrid::new(0.1, 10).unwrap();
        let s = vec![Complex64::new(0.0, 0.0); 3];
        assert!(inverse_laplace(&s, &[0.0, 1.0, 3.0], 0.0, &g).is_err());
        assert!(inverse_laplace(&s, &[0.0, 1.0], 0.0, &g).is_err());
        let z = inverse_laplace(&s, &[-1.0, 0.0, 1.0], 0.0, &g).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cutoff_window() {
        assert_eq!(smooth_cutoff(0.5, 1.0, 2.0), 1.0);
        assert_eq!(smooth_cutoff(3.5, 1.0, 2.0), 0.0);
        assert!((smooth_cutoff(2.0, 1.0, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tapered_signal_spectrum_matches_plain_transform() {
        // the Gaussian pulse has decayed long before the taper starts
        let s = gauss20();
        let freq = FrequencyGrid::for_signal(&s, 6.0).unwrap();
        let a = signal_spectrum(&s, &freq, 0.0, 6.0, 1.5).unwrap();
        let g = TimeGrid::new(1e-3, 6000).unwrap();
        let b = forward_laplace(&g.sample(&s), &g, 0.0, &freq.xi).unwrap();
        let peak = b.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-5 * peak);
        }
    }
}
