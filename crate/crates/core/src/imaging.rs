//! Time-domain direct sampling indicators and their frequency-domain forms.
//!
//! The discrete single-source indicator at a sampling point `z` is
//!
//! ```text
//! I(z) = dt Σ_{n: t_n ≤ T} ( Σ_m w_m p(x_m, t_n + |x_m - z|/c0) φ(x_m, t_n, z) )²
//! ```
//!
//! with `φ = e^{-σ(t + d/c0)} / sqrt(8π d/c0)` in 2D and
//! `e^{-σ(t + d/c0)} / (4π d)` in 3D. With several sources the per-source
//! values are summed with the source weights.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{Spectrum, TimeSeries};
use crate::geometry::{Dim, Point};
use crate::scene::{MeasurementSetup, SamplingGrid};
use crate::specfun::{fundamental_solution_at_distance, ComplexFrequency};

/// How off-grid shifted samples are reconstructed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Two-point linear interpolation.
    Linear,
    /// Four-point Lagrange interpolation.
    #[default]
    Cubic,
}

/// Parameters of one indicator evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImagingConfig {
    pub sigma: f64,
    /// Upper limit of the outer time sum.
    pub terminal_time: f64,
    pub dim: Dim,
    pub background_speed: f64,
    #[serde(default)]
    pub interpolation: Interpolation,
}

impl ImagingConfig {
    pub fn new(dim: Dim, background_speed: f64, sigma: f64, terminal_time: f64) -> Result<Self> {
        let c = ImagingConfig { sigma, terminal_time, dim, background_speed, interpolation: Interpolation::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        if !(self.terminal_time > 0.0) {
            return Err(Error::invalid(format!("terminal time must be positive, got {}", self.terminal_time)));
        }
        if !(self.background_speed > 0.0) {
            return Err(Error::invalid("background speed must be positive"));
        }
        Ok(())
    }
}

/// Indicator values over a sampling grid, in the grid's row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImagingGrid {
    pub grid: SamplingGrid,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl ImagingGrid {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the largest value; the first one wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// Distance-dependent denominator of the test function.
fn amplitude(dim: Dim, d: f64, c0: f64) -> f64 {
    match dim {
        Dim::Two => (8.0 * PI * d / c0).sqrt(),
        Dim::Three => 4.0 * PI * d,
    }
}

/// The test function `φ_σ(x, t, z)`.
pub fn test_function(dim: Dim, x: &Point, t: f64, z: &Point, sigma: f64, c0: f64) -> Result<f64> {
    let d = x.dist(z);
    if d == 0.0 {
        return Err(Error::domain("test function is singular at a receiver"));
    }
    Ok((-sigma * (t + d / c0)).exp() / amplitude(dim, d, c0))
}

/// Sample `j` of a causal trace on the 1-based grid: zero for `j <= 0`.
#[inline]
fn sample_at(trace: &[f64], j: i64) -> f64 {
    if j <= 0 {
        0.0
    } else {
        trace[(j - 1) as usize]
    }
}

fn cubic_weights(f: f64) -> [f64; 4] {
    [
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ]
}

/// Lagrange interpolation through nodes `base..base+4` at fractional
/// position `pos` (in units of `dt`).
fn lagrange4(trace: &[f64], base: i64, pos: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let xi = (base + i) as f64;
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                let xj = (base + j) as f64;
                w *= (pos - xj) / (xi - xj);
            }
        }
        acc += w * sample_at(trace, base + i);
    }
    acc
}

/// Value of one trace at an arbitrary time `t`.
///
/// The trace holds samples at `t_n = n dt`, `n = 1..=N`, with an implicit
/// zero at `t_0 = 0`. Returns 0 for `t <= 0` and for `t > T = N dt`.
pub fn shifted_sample(trace: &[f64], dt: f64, t: f64, interp: Interpolation) -> f64 {
    let n = trace.len() as i64;
    let pos = t / dt;
    if !(pos > 0.0) || pos > n as f64 * (1.0 + 1e-12) {
        return 0.0;
    }
    let g = pos.floor() as i64;
    let f = pos - g as f64;
    if f == 0.0 {
        return sample_at(trace, g.min(n));
    }
    match interp {
        Interpolation::Linear => (1.0 - f) * sample_at(trace, g) + f * sample_at(trace, g + 1),
        Interpolation::Cubic => {
            if g + 2 <= n {
                let w = cubic_weights(f);
                w[0] * sample_at(trace, g - 1)
                    + w[1] * sample_at(trace, g)
                    + w[2] * sample_at(trace, g + 1)
                    + w[3] * sample_at(trace, g + 2)
            } else {
                lagrange4(trace, (n - 3).max(-2), pos)
            }
        }
    }
}

/// Number of outer time steps kept for terminal time `t_end`.
fn steps_within(ts: &TimeSeries, t_end: f64) -> usize {
    let k = (t_end / ts.grid.dt * (1.0 + 1e-12)).floor();
    (k.max(0.0) as usize).min(ts.grid.n_steps)
}

fn check_shapes(ts: &TimeSeries, setup: &MeasurementSetup) -> Result<()> {
    if ts.n_receivers != setup.n_receivers() {
        return Err(Error::Geometry(format!(
            "dataset has {} receivers but the setup has {}",
            ts.n_receivers,
            setup.n_receivers()
        )));
    }
    if ts.n_sources() != setup.n_sources() {
        return Err(Error::Geometry(format!(
            "dataset has {} sources but the setup has {}",
            ts.n_sources(),
            setup.n_sources()
        )));
    }
    Ok(())
}

/// Per-source indicator values at `z`, before source weighting.
pub fn indicator_point_per_source(
    z: &Point,
    ts: &TimeSeries,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
) -> Result<Vec<f64>> {
    check_shapes(ts, setup)?;
    let c0 = cfg.background_speed;
    let dt = ts.grid.dt;
    let nt = steps_within(ts, cfg.terminal_time);
    let n_all = ts.grid.n_steps as i64;
    // per receiver: integer shift, stencil weights and spatial factor
    let mut taps = Vec::with_capacity(setup.n_receivers());
    for (x, w) in setup.receivers.iter().zip(&setup.receiver_weights) {
        let d = x.dist(z);
        if d == 0.0 {
            return Err(Error::domain(format!("sampling point {:?} coincides with a receiver", z.0)));
        }
        let tau = d / c0;
        let shift = tau / dt;
        let g = shift.floor();
        let f = shift - g;
        let factor = w * (-cfg.sigma * tau).exp() / amplitude(cfg.dim, d, c0);
        taps.push((g as i64, f, tau, factor));
    }
    let damp: Vec<f64> = (1..=nt).map(|n| (-cfg.sigma * n as f64 * dt).exp()).collect();
    let mut out = Vec::with_capacity(ts.n_sources());
    let mut inner = vec![0.0; nt];
    for s in 0..ts.n_sources() {
        inner.iter_mut().for_each(|v| *v = 0.0);
        for (m, &(g, f, tau, factor)) in taps.iter().enumerate() {
            let trace = ts.trace(s, m);
            let wts = match cfg.interpolation {
                Interpolation::Linear => [0.0, 1.0 - f, f, 0.0],
                Interpolation::Cubic => cubic_weights(f),
            };
            for (idx, v) in inner.iter_mut().enumerate() {
                let n = idx as i64 + 1;
                let j = n + g;
                let val = if j + 2 <= n_all && j - 1 >= 1 {
                    let b = (j - 2) as usize;
                    wts[0] * trace[b] + wts[1] * trace[b + 1] + wts[2] * trace[b + 2] + wts[3] * trace[b + 3]
                } else {
                    shifted_sample(trace, dt, n as f64 * dt + tau, cfg.interpolation)
                };
                *v += factor * val;
            }
        }
        let mut acc = 0.0;
        for (v, e) in inner.iter().zip(&damp) {
            let q = v * e;
            acc += q * q;
        }
        out.push(acc * dt);
    }
    Ok(out)
}

/// The (multi-source) time-domain indicator at one sampling point.
pub fn indicator_point(z: &Point, ts: &TimeSeries, setup: &MeasurementSetup, cfg: &ImagingConfig) -> Result<f64> {
    let per = indicator_point_per_source(z, ts, setup, cfg)?;
    Ok(per.iter().zip(&setup.source_weights).map(|(v, w)| v * w).sum())
}

/// [`indicator_point`] over every grid node, in parallel.
pub fn indicator_grid(
    grid: &SamplingGrid,
    ts: &TimeSeries,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
) -> Result<ImagingGrid> {
    cfg.validate()?;
    check_shapes(ts, setup)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|l| indicator_point(&grid.point(l), ts, setup, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImagingGrid { grid: grid.clone(), values, normalized: false })
}

/// Divides by the maximum so the largest value is exactly 1.
pub fn normalize(g: &ImagingGrid) -> Result<ImagingGrid> {
    let max = g.max();
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::NoSignal("indicator grid has no positive value".into()));
    }
    Ok(ImagingGrid {
        grid: g.grid.clone(),
        values: g.values.iter().map(|v| v / max).collect(),
        normalized: true,
    })
}

fn check_contour(spectrum: &Spectrum, cfg: &ImagingConfig) -> Result<()> {
    if (spectrum.sigma - cfg.sigma).abs() > 1e-12 * cfg.sigma.max(1.0) {
        return Err(Error::ContourMismatch { expected: cfg.sigma, found: spectrum.sigma });
    }
    Ok(())
}

/// Per-source frequency-domain indicator values at `z`.
pub fn indicator_freq_per_source(
    z: &Point,
    spectrum: &Spectrum,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
) -> Result<Vec<f64>> {
    check_contour(spectrum, cfg)?;
    if spectrum.n_receivers != setup.n_receivers() || spectrum.n_sources() != setup.n_sources() {
        return Err(Error::Geometry("spectrum shape does not match the measurement setup".into()));
    }
    let c0 = cfg.background_speed;
    let freq = &spectrum.freq;
    let nk = freq.len();
    let xi0 = freq.xi[0];
    let mut out = Vec::with_capacity(spectrum.n_sources());
    let mut inner = vec![Complex64::new(0.0, 0.0); nk];
    for s in 0..spectrum.n_sources() {
        inner.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (m, (x, w)) in setup.receivers.iter().zip(&setup.receiver_weights).enumerate() {
            let d = x.dist(z);
            if d == 0.0 {
                return Err(Error::domain(format!("sampling point {:?} coincides with a receiver", z.0)));
            }
            let tau = d / c0;
            let factor = w / amplitude(cfg.dim, d, c0);
            let (s0, c0p) = (xi0 * tau).sin_cos();
            let mut phase = Complex64::new(c0p, -s0) * factor;
            let (sd, cd) = (freq.dxi * tau).sin_cos();
            let step = Complex64::new(cd, -sd);
            for (v, p) in inner.iter_mut().zip(spectrum.row(s, m)) {
                *v += p * phase;
                phase *= step;
            }
        }
        let acc: f64 = inner.iter().map(|v| v.norm_sqr()).sum();
        out.push(acc * freq.dxi / (2.0 * PI));
    }
    Ok(out)
}

/// Frequency-domain representation of the indicator, from spectra on the
/// contour `Im ω = cfg.sigma`.
pub fn indicator_freq(z: &Point, spectrum: &Spectrum, setup: &MeasurementSetup, cfg: &ImagingConfig) -> Result<f64> {
    let per = indicator_freq_per_source(z, spectrum, setup, cfg)?;
    Ok(per.iter().zip(&setup.source_weights).map(|(v, w)| v * w).sum())
}

/// [`indicator_freq`] over every grid node, in parallel.
pub fn indicator_freq_grid(
    grid: &SamplingGrid,
    spectrum: &Spectrum,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
) -> Result<ImagingGrid> {
    check_contour(spectrum, cfg)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|l| indicator_freq(&grid.point(l), spectrum, setup, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImagingGrid { grid: grid.clone(), values, normalized: false })
}

/// Single-frequency direct sampling indicator
/// `|Σ_m w_m p̂(x_m, ξ) conj(Φ_ξ(x_m, z))|`.
pub fn classic_dsm(
    z: &Point,
    slice: &[Complex64],
    xi: f64,
    setup: &MeasurementSetup,
    dim: Dim,
    c0: f64,
) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::domain("single-frequency indicator needs a nonzero frequency"));
    }
    if slice.len() != setup.n_receivers() {
        return Err(Error::invalid("slice length differs from the receiver count"));
    }
    let w = ComplexFrequency::real(xi)?.as_complex();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((x, wt), p) in setup.receivers.iter().zip(&setup.receiver_weights).zip(slice) {
        let d = x.dist(z);
        if d == 0.0 {
            return Err(Error::domain("sampling point coincides with a receiver"));
        }
        acc += p * fundamental_solution_at_distance(dim, d, w, c0)?.conj() * *wt;
    }
    Ok(acc.norm())
}

/// Multi-frequency aggregate `(1/2π) Σ_k |ξ_k|^{3-d} J(z, ξ_k)² dξ` over the
/// grid frequencies with `lo <= |ξ_k| <= hi`, first source only.
pub fn classic_dsm_multi(
    z: &Point,
    spectrum: &Spectrum,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if spectrum.sigma != 0.0 {
        return Err(Error::ContourMismatch { expected: 0.0, found: spectrum.sigma });
    }
    let power = 3 - cfg.dim.as_usize() as i32;
    let mut acc = 0.0;
    let mut slice = vec![Complex64::new(0.0, 0.0); setup.n_receivers()];
    for (k, &xi) in spectrum.freq.xi.iter().enumerate() {
        if xi.abs() < lo || xi.abs() > hi {
            continue;
        }
        for (m, v) in slice.iter_mut().enumerate() {
            *v = spectrum.get(0, m, k);
        }
        let j = classic_dsm(z, &slice, xi, setup, cfg.dim, cfg.background_speed)?;
        acc += xi.abs().powi(power) * j * j;
    }
    Ok(acc * spectrum.freq.dxi / (2.0 * PI))
}

/// The frequency-domain indicator restricted to `lo <= |ξ_k| <= hi`, first source only.
pub fn indicator_freq_band(
    z: &Point,
    spectrum: &Spectrum,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    check_contour(spectrum, cfg)?;
    let c0 = cfg.background_speed;
    let mut acc = 0.0;
    for (k, &xi) in spectrum.freq.xi.iter().enumerate() {
        if xi.abs() < lo || xi.abs() > hi {
            continue;
        }
        let mut v = Complex64::new(0.0, 0.0);
        for (m, (x, w)) in setup.receivers.iter().zip(&setup.receiver_weights).enumerate() {
            let d = x.dist(z);
            let tau = d / c0;
            let (s, c) = (xi * tau).sin_cos();
            v += spectrum.get(0, m, k) * Complex64::new(c, -s) * (w / amplitude(cfg.dim, d, c0));
        }
        acc += v.norm_sqr();
    }
    Ok(acc * spectrum.freq.dxi / (2.0 * PI))
}
