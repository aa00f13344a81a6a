//! G-integral bounds, the spherical closed form, the `M_j` constants and
//! peak statistics of reconstructed grids.
//!
//! `G^(d)(z; y) = ∫_Γ Φ_ω(x, y) K_d(x, z) ds(x)` on a circle or sphere of
//! radius `r`, with
//! `K_2 = e^{-iξ|x-z|/c0} / sqrt(8π|x-z|/c0)` and
//! `K_3 = e^{-iξ|x-z|/c0} / (4π c0^{-1} |x-z|)`, `ξ = Re ω`.
//!
//! The bounds [`g2_bound`], [`g3_bound`] and [`g3_closed_form`] are the
//! printed leading terms. The `*_leading` functions give the leading terms
//! obtained by carrying out the same asymptotic expansion in full; they
//! differ from the printed ones by a factor 2 (2D) and `c0` (3D), and are
//! reported next to them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{born_spectrum_grid, Spectrum};
use crate::geometry::{Dim, Point};
use crate::imaging::{indicator_freq, indicator_freq_grid, indicator_grid, ImagingConfig, ImagingGrid};
use crate::quadrature::gauss_legendre;
use crate::scene::{circle_receivers, scatterer_weight, sphere_receivers, MeasurementSetup, SamplingGrid, Scene};
use crate::signals::{signal_spectrum, FrequencyGrid, SignalSpec};
use crate::specfun::{
    fundamental_solution_at_distance, mod_bessel_i0, mod_sph_bessel_i0, sph_bessel_j0, ComplexFrequency,
};
use crate::forward::TimeSeries;

/// One G-integral evaluation against its printed bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GIntegralReport {
    pub dim: Dim,
    pub z: Point,
    pub y: Point,
    pub omega: ComplexFrequency,
    pub c0: f64,
    pub radius: f64,
    pub numeric_re: f64,
    pub numeric_im: f64,
    pub numeric_abs: f64,
    pub bound: f64,
    /// `|numeric| / bound`.
    pub ratio: f64,
    /// `|numeric| / leading`, with the fully expanded leading term.
    pub ratio_to_leading: f64,
    pub tolerance: f64,
}

/// Numerical value of `G^(d)(z; y)` on the origin-centered circle/sphere of
/// radius `r`.
///
/// 2D uses the `n_quad`-point rectangular rule in angle; 3D uses
/// `n_quad` Gauss–Legendre nodes in the polar angle times `2 n_quad`
/// uniform nodes in azimuth.
pub fn g_integral_numeric(
    dim: Dim,
    z: &Point,
    y: &Point,
    omega: ComplexFrequency,
    radius: f64,
    n_quad: usize,
    c0: f64,
) -> Result<Complex64> {
    if n_quad < 8 {
        return Err(Error::invalid(format!("need at least 8 quadrature nodes, got {n_quad}")));
    }
    if !(y.norm() < radius && z.norm() < radius) {
        return Err(Error::Geometry("y and z must lie inside the measurement surface".into()));
    }
    let w = omega.as_complex();
    let xi = omega.re;
    let kernel = |x: &Point| -> Result<Complex64> {
        let dy = x.dist(y);
        let dz = x.dist(z);
        let phi = fundamental_solution_at_distance(dim, dy, w, c0)?;
        let (s, c) = (xi * dz / c0).sin_cos();
        let amp = match dim {
            Dim::Two => (8.0 * PI * dz / c0).sqrt(),
            Dim::Three => 4.0 * PI * dz / c0,
        };
        Ok(phi * Complex64::new(c, -s) / amp)
    };
    match dim {
        Dim::Two => {
            let h = 2.0 * PI / n_quad as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n_quad {
                let th = k as f64 * h;
                acc += kernel(&Point::new2(radius * th.cos(), radius * th.sin()))?;
            }
            Ok(acc * (h * radius))
        }
        Dim::Three => {
            let (nodes, weights) = gauss_legendre(n_quad);
            let na = 2 * n_quad;
            let ha = 2.0 * PI / na as f64;
            let rows: Vec<Complex64> = nodes
                .par_iter()
                .zip(weights.par_iter())
                .map(|(&ct, &wt)| {
                    let st = (1.0 - ct * ct).sqrt();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..na {
                        let ph = j as f64 * ha;
                        let x = Point::new3(radius * st * ph.cos(), radius * st * ph.sin(), radius * ct);
                        acc += kernel(&x)?;
                    }
                    Ok(acc * wt)
                })
                .collect::<Result<_>>()?;
            Ok(rows.iter().sum::<Complex64>() * (ha * radius * radius))
        }
    }
}

/// Printed 2D bound `e^{-σr/c0} I0(σ|y|/c0) / (8 sqrt|ω| c0^{-1})`.
pub fn g2_bound(y: &Point, omega: ComplexFrequency, sigma: f64, radius: f64, c0: f64) -> Result<f64> {
    let w = omega.as_complex().norm();
    Ok((-sigma * radius / c0).exp() * mod_bessel_i0(sigma * y.norm() / c0)? / (8.0 * w.sqrt() / c0))
}

/// Printed 3D bound `e^{-σr/c0} i0(σ|y|/c0) / (4π c0^{-2})`.
pub fn g3_bound(y: &Point, sigma: f64, radius: f64, c0: f64) -> f64 {
    (-sigma * radius / c0).exp() * mod_sph_bessel_i0(sigma * y.norm() / c0) * c0 * c0 / (4.0 * PI)
}

/// Printed 3D closed form for `z = (1 + k) y`:
/// `e^{-σr/c0} / (4π c0^{-2}) · j0(ξ|z-y|/c0 - iσ|y|/c0)`.
pub fn g3_closed_form(k: f64, y: &Point, omega: ComplexFrequency, sigma: f64, radius: f64, c0: f64) -> Result<Complex64> {
    if !(k >= 0.0) {
        return Err(Error::invalid("collinear offset k must be nonnegative"));
    }
    let arg = Complex64::new(omega.re * k * y.norm() / c0, -sigma * y.norm() / c0);
    Ok(sph_bessel_j0(arg) * ((-sigma * radius / c0).exp() * c0 * c0 / (4.0 * PI)))
}

/// Fully expanded 2D leading term at `z = y`: `c0 e^{-σr/c0} I0(σ|y|/c0) / (4 sqrt|ω|)`.
pub fn g2_leading(y: &Point, omega: ComplexFrequency, sigma: f64, radius: f64, c0: f64) -> Result<f64> {
    Ok(2.0 * g2_bound(y, omega, sigma, radius, c0)?)
}

/// Fully expanded 3D leading term at `z = y`: `c0 e^{-σr/c0} i0(σ|y|/c0) / (4π)`.
pub fn g3_leading(y: &Point, sigma: f64, radius: f64, c0: f64) -> f64 {
    g3_bound(y, sigma, radius, c0) / c0
}

/// Builds a report for one `(z, y, ω, r, c0)` tuple.
pub fn g_integral_report(
    dim: Dim,
    z: &Point,
    y: &Point,
    omega: ComplexFrequency,
    radius: f64,
    n_quad: usize,
    c0: f64,
) -> Result<GIntegralReport> {
    let g = g_integral_numeric(dim, z, y, omega, radius, n_quad, c0)?;
    let sigma = omega.im;
    let (bound, leading) = match dim {
        Dim::Two => (g2_bound(y, omega, sigma, radius, c0)?, g2_leading(y, omega, sigma, radius, c0)?),
        Dim::Three => (g3_bound(y, sigma, radius, c0), g3_leading(y, sigma, radius, c0)),
    };
    Ok(GIntegralReport {
        dim,
        z: *z,
        y: *y,
        omega,
        c0,
        radius,
        numeric_re: g.re,
        numeric_im: g.im,
        numeric_abs: g.norm(),
        bound,
        ratio: g.norm() / bound,
        ratio_to_leading: g.norm() / leading,
        tolerance: 5.0 / radius,
    })
}

/// The fixed 20-tuple parameter sweep `(z, y, ω, c0)` used by the bound
/// checks. Every fourth tuple has `z = y`; those alternate between
/// `c0 = 1` and `c0 = 4`.
pub fn lemma_parameter_sweep(dim: Dim) -> Vec<(Point, Point, ComplexFrequency, f64)> {
    let xis = [2.0, 5.0, 10.0, 20.0, 7.0];
    let sigmas = [0.0, 0.05, 0.2, 0.1];
    (0..20)
        .map(|i| {
            let a = 0.7 * i as f64;
            let rad = 0.25 + 0.09 * i as f64;
            let y = match dim {
                Dim::Two => Point::new2(rad * a.cos(), rad * a.sin()),
                Dim::Three => Point::new3(rad * a.cos() * 0.8, rad * a.sin() * 0.8, rad * 0.6),
            };
            let z = if i % 4 == 0 {
                y
            } else {
                let off = 0.15 * (1 + i % 5) as f64;
                let b = 1.3 * i as f64;
                match dim {
                    Dim::Two => y + Point::new2(off * b.cos(), off * b.sin()),
                    Dim::Three => y + Point::new3(off * b.cos() * 0.6, off * b.sin() * 0.6, off * 0.8),
                }
            };
            let omega = ComplexFrequency { re: xis[i % 5], im: sigmas[i % 4] };
            let c0 = if (i / 4 + i) % 2 == 0 { 1.0 } else { 4.0 };
            (z, y, omega, c0)
        })
        .collect()
}

/// Outcome of the bound sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub reports: Vec<GIntegralReport>,
    /// Every ratio is at most `1 + 5/r`.
    pub dominance_ok: bool,
    /// Every `z = y` ratio at the largest radius is within 2% of 1.
    pub equality_ok: bool,
    pub worst_ratio: f64,
    pub equality_ratios: Vec<f64>,
}

impl LemmaSummary {
    pub fn pass(&self) -> bool {
        self.dominance_ok && self.equality_ok
    }
}

/// Runs [`lemma_parameter_sweep`] at each radius.
pub fn lemma_check(dim: Dim, radii: &[f64], n_quad: usize) -> Result<LemmaSummary> {
    let mut reports = Vec::new();
    for &r in radii {
        for (z, y, omega, c0) in lemma_parameter_sweep(dim) {
            reports.push(g_integral_report(dim, &z, &y, omega, r, n_quad, c0)?);
        }
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let dominance_ok = reports.iter().all(|r| r.ratio <= 1.0 + r.tolerance);
    let equality_ratios: Vec<f64> = reports
        .iter()
        .filter(|r| r.radius == r_max && r.z == r.y)
        .map(|r| r.ratio)
        .collect();
    let equality_ok = equality_ratios.iter().all(|q| (q - 1.0).abs() <= 0.02);
    let worst_ratio = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(LemmaSummary { reports, dominance_ok, equality_ok, worst_ratio, equality_ratios })
}

/// One collinear closed-form comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub k: f64,
    pub y: Point,
    pub omega: ComplexFrequency,
    pub c0: f64,
    pub radius: f64,
    pub numeric_abs: f64,
    pub closed_abs: f64,
    pub rel_error: f64,
    /// Relative error against the closed form divided by `c0`.
    pub rel_error_rescaled: f64,
}

/// Compares the numeric 3D integral with [`g3_closed_form`] along `z = (1+k) y`.
pub fn closed_form_check(
    ks: &[f64],
    y: &Point,
    omega: ComplexFrequency,
    c0: f64,
    radius: f64,
    n_quad: usize,
) -> Result<Vec<ClosedFormReport>> {
    ks.iter()
        .map(|&k| {
            let z = *y * (1.0 + k);
            let g = g_integral_numeric(Dim::Three, &z, y, omega, radius, n_quad, c0)?;
            let cf = g3_closed_form(k, y, omega, omega.im, radius, c0)?;
            Ok(ClosedFormReport {
                k,
                y: *y,
                omega,
                c0,
                radius,
                numeric_abs: g.norm(),
                closed_abs: cf.norm(),
                rel_error: (g - cf).norm() / cf.norm(),
                rel_error_rescaled: (g - cf / c0).norm() / (cf / c0).norm(),
            })
        })
        .collect()
}

/// Theorem constant `M_j` for scatterer `j` lit by the source at `source`.
///
/// `chi_hat` is the waveform spectrum on the contour `Im ω = sigma` over
/// `freq`. The field at `y_j` is the incident field `χ̂ Φ_ω(y_j, y_s)`.
/// Fails if more than 1% of the integrand lies in the outer tenth of the band.
pub fn theorem_mj(
    scene: &Scene,
    j: usize,
    source: &Point,
    chi_hat: &[Complex64],
    freq: &FrequencyGrid,
    sigma: f64,
) -> Result<f64> {
    let s = scene
        .scatterers
        .get(j)
        .ok_or_else(|| Error::invalid(format!("no scatterer with index {j}")))?;
    if chi_hat.len() != freq.len() {
        return Err(Error::invalid("signal spectrum and frequency grid differ in length"));
    }
    let c0 = scene.background_speed;
    let h = scatterer_weight(s, c0);
    let y = s.center;
    let d = y.dist(source);
    let power = match scene.dim {
        Dim::Two => 3,
        Dim::Three => 4,
    };
    let mut total = 0.0;
    let mut edge = 0.0;
    let band = freq.band();
    for (&xi, chi) in freq.xi.iter().zip(chi_hat) {
        let w = Complex64::new(xi, sigma);
        let p = chi * fundamental_solution_at_distance(scene.dim, d, w, c0)?;
        let v = w.norm().powi(power) * p.norm_sqr();
        total += v;
        if xi.abs() > 0.9 * band {
            edge += v;
        }
    }
    if total > 0.0 && edge > 0.01 * total {
        return Err(Error::invalid(format!(
            "frequency band does not cover the M_j integrand ({:.2}% in the outer tenth)",
            100.0 * edge / total
        )));
    }
    let integral = total * freq.dxi;
    let arg = sigma * y.norm() / c0;
    let pre = match scene.dim {
        Dim::Two => c0 * c0 / (128.0 * PI) * mod_bessel_i0(arg)?.powi(2),
        Dim::Three => c0.powi(4) / (32.0 * PI.powi(3)) * mod_sph_bessel_i0(arg).powi(2),
    };
    Ok(pre * h * h * integral)
}

/// Per-scatterer peak statistics for the two-radius theorem check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremBoundReport {
    pub j: usize,
    pub radius: f64,
    pub m_j: f64,
    pub peak_value: f64,
    pub off_peak_max: f64,
    /// `peak / (e^{-2σr/c0} M_j)`.
    pub peak_over_bound: f64,
    pub separation: Option<f64>,
    pub lowest_band_frequency: f64,
    /// `Re(ω0) L / (2 c0)`.
    pub resolution_ratio: Option<f64>,
}

/// Two-radius comparison of indicator peaks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub sigma: f64,
    pub radii: [f64; 2],
    pub inner: Vec<TheoremBoundReport>,
    pub outer: Vec<TheoremBoundReport>,
    pub predicted_ratio: f64,
    pub observed_ratios: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub peaks_dominate: bool,
    pub pass: bool,
}

/// Evaluates the frequency-path indicator with receivers on circles (or
/// spheres) of radius `r1` and `r2` and compares the per-scatterer peaks with
/// the `e^{-2σΔr/c0}` scaling.
#[allow(clippy::too_many_arguments)]
pub fn theorem_check(
    scene: &Scene,
    source: &Point,
    n_receivers: usize,
    radii: [f64; 2],
    spec: &SignalSpec,
    sigma: f64,
    freq: &FrequencyGrid,
    horizon: f64,
    grid: &SamplingGrid,
) -> Result<TheoremReport> {
    if scene.scatterers.is_empty() {
        return Err(Error::NoSignal("theorem check needs at least one scatterer".into()));
    }
    let c0 = scene.background_speed;
    let chi = signal_spectrum(spec, freq, sigma, horizon, (horizon / 4.0).max(1.0))?;
    let lowest = freq
        .xi
        .iter()
        .zip(&chi)
        .filter(|(_, c)| c.norm() > 1e-3 * chi.iter().map(|c| c.norm()).fold(0.0, f64::max))
        .map(|(x, _)| x.abs())
        .fold(f64::INFINITY, f64::min);
    let sep = scene.separation();
    let ball = ball_radius(scene, grid);
    let cfg = ImagingConfig::new(scene.dim, c0, sigma, horizon)?;
    let mut per_radius = Vec::new();
    for &r in &radii {
        let array = match scene.dim {
            Dim::Two => circle_receivers(n_receivers, r)?,
            Dim::Three => sphere_receivers(n_receivers, r)?,
        };
        let setup = MeasurementSetup::new(array, vec![*source])?;
        let spectrum = born_spectrum_grid(&setup, scene, &chi, freq, sigma)?;
        let img = indicator_freq_grid(grid, &spectrum, &setup, &cfg)?;
        let mut reports = Vec::new();
        for (j, s) in scene.scatterers.iter().enumerate() {
            let m_j = theorem_mj(scene, j, source, &chi, freq, sigma)?;
            let mut peak = indicator_freq(&s.center, &spectrum, &setup, &cfg)?;
            for (l, v) in img.values.iter().enumerate() {
                if grid.point(l).dist(&s.center) < ball {
                    peak = peak.max(*v);
                }
            }
            let off = off_peak_max(&img, scene, ball);
            reports.push(TheoremBoundReport {
                j,
                radius: r,
                m_j,
                peak_value: peak,
                off_peak_max: off,
                peak_over_bound: peak / ((-2.0 * sigma * r / c0).exp() * m_j),
                separation: sep,
                lowest_band_frequency: lowest,
                resolution_ratio: sep.map(|l| lowest * l / (2.0 * c0)),
            });
        }
        per_radius.push(reports);
    }
    let outer = per_radius.pop().unwrap();
    let inner = per_radius.pop().unwrap();
    let predicted = (-2.0 * sigma * (radii[1] - radii[0]) / c0).exp();
    let observed: Vec<f64> = inner.iter().zip(&outer).map(|(a, b)| b.peak_value / a.peak_value).collect();
    let rel: Vec<f64> = observed.iter().map(|o| (o - predicted).abs() / predicted).collect();
    let dominate = inner.iter().chain(&outer).all(|r| r.peak_value >= r.off_peak_max);
    let pass = rel.iter().all(|&e| e <= 0.1) && dominate;
    Ok(TheoremReport {
        sigma,
        radii,
        inner,
        outer,
        predicted_ratio: predicted,
        observed_ratios: observed,
        rel_errors: rel,
        peaks_dominate: dominate,
        pass,
    })
}

/// Radius of the exclusion balls `B(y_j, L/2)`; with one scatterer, a
/// quarter of the shortest box side.
pub fn ball_radius(scene: &Scene, grid: &SamplingGrid) -> f64 {
    match scene.separation() {
        Some(l) => l / 2.0,
        None => {
            let side = (0..grid.dim.as_usize())
                .map(|a| grid.hi.0[a] - grid.lo.0[a])
                .fold(f64::INFINITY, f64::min);
            side / 4.0
        }
    }
}

/// Largest grid value outside every ball `B(y_j, radius)`.
pub fn off_peak_max(g: &ImagingGrid, scene: &Scene, radius: f64) -> f64 {
    let mut best: f64 = 0.0;
    for (l, v) in g.values.iter().enumerate() {
        let p = g.grid.point(l);
        if scene.scatterers.iter().all(|s| p.dist(&s.center) >= radius) {
            best = best.max(*v);
        }
    }
    best
}

/// Indices of grid local maxima, largest value first.
///
/// A node is a local maximum when no neighbor (8 in 2D, 26 in 3D) beats
/// it; on ties the node earlier in row-major order wins.
pub fn local_maxima(g: &ImagingGrid) -> Vec<usize> {
    let grid = &g.grid;
    let n = grid.n_per_axis as i64;
    let d = grid.dim.as_usize();
    let mut out = Vec::new();
    for l in 0..g.values.len() {
        let idx = grid.index(l);
        let v = g.values[l];
        let mut is_max = true;
        'outer: for dz in if d == 3 { -1..=1 } else { 0..=0 } {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let (x, y, z) = (idx[0] as i64 + dx, idx[1] as i64 + dy, idx[2] as i64 + dz);
                    if x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n {
                        continue;
                    }
                    let o = grid.linear([x as usize, y as usize, z as usize]);
                    let w = g.values[o];
                    if w > v || (w == v && o < l) {
                        is_max = false;
                        break 'outer;
                    }
                }
            }
        }
        if is_max {
            out.push(l);
        }
    }
    out.sort_by(|&a, &b| g.values[b].partial_cmp(&g.values[a]).unwrap().then(a.cmp(&b)));
    out
}

/// Localization summary of a reconstruction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeakReport {
    /// Per scatterer: distance in grid cells to the nearest local maximum.
    pub localization_cells: Vec<Option<f64>>,
    /// Per scatterer: the matched local maximum.
    pub matched: Vec<Option<Point>>,
    /// All local maxima, largest first: `(point, value)`.
    pub maxima: Vec<(Point, f64)>,
    pub off_peak_max: f64,
    pub exclusion_radius: f64,
    /// Fewer local maxima than scatterers.
    pub too_few_maxima: bool,
}

/// Finds, for each scatterer, the nearest local maximum and the largest
/// value outside all exclusion balls.
pub fn peak_report(g: &ImagingGrid, scene: &Scene) -> PeakReport {
    let maxima = local_maxima(g);
    let h = g.grid.spacing(0);
    let mut loc = Vec::new();
    let mut matched = Vec::new();
    for s in &scene.scatterers {
        let best = maxima
            .iter()
            .map(|&l| g.grid.point(l))
            .min_by(|a, b| a.dist(&s.center).partial_cmp(&b.dist(&s.center)).unwrap());
        loc.push(best.map(|p| p.dist(&s.center) / h));
        matched.push(best);
    }
    let radius = ball_radius(scene, &g.grid);
    PeakReport {
        localization_cells: loc,
        matched,
        maxima: maxima.iter().map(|&l| (g.grid.point(l), g.values[l])).collect(),
        off_peak_max: off_peak_max(g, scene, radius),
        exclusion_radius: radius,
        too_few_maxima: maxima.len() < scene.scatterers.len(),
    }
}

/// Whether the `k` largest local maxima and the `targets` match one to one
/// within `tol_cells` grid cells.
pub fn top_maxima_match(g: &ImagingGrid, targets: &[Point], tol_cells: f64) -> (bool, Vec<(Point, f64)>) {
    let h = g.grid.spacing(0);
    let top: Vec<(Point, f64)> = local_maxima(g)
        .into_iter()
        .take(targets.len())
        .map(|l| (g.grid.point(l), g.values[l]))
        .collect();
    if top.len() < targets.len() {
        return (false, top);
    }
    let mut used = vec![false; top.len()];
    for t in targets {
        let hit = top
            .iter()
            .enumerate()
            .filter(|(i, (p, _))| !used[*i] && p.dist(t) <= tol_cells * h + 1e-12)
            .min_by(|a, b| a.1 .0.dist(t).partial_cmp(&b.1 .0.dist(t)).unwrap())
            .map(|(i, _)| i);
        match hit {
            Some(i) => used[i] = true,
            None => return (false, top),
        }
    }
    (true, top)
}

/// Area (2D) or volume of `{Ĩ ≥ level} Δ support`, counted in grid cells.
pub fn level_set_symmetric_difference(g: &ImagingGrid, level: f64, inside: impl Fn(&Point) -> bool) -> f64 {
    let cell = g.grid.cell_measure();
    let count = g
        .values
        .iter()
        .enumerate()
        .filter(|(l, v)| (**v >= level) != inside(&g.grid.point(*l)))
        .count();
    count as f64 * cell
}

/// Node-by-node comparison of the time and frequency paths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub n_nodes: usize,
    /// `max |I_t - I_f| / I_f` over nodes with `I_f > 0`.
    pub max_rel: f64,
    pub mean_rel: f64,
    pub worst_point: Point,
    /// `max |Ĩ_t - Ĩ_f|` after normalizing both grids.
    pub max_abs_normalized: f64,
    pub time_max: f64,
    pub freq_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares [`indicator_grid`] on the traces with [`indicator_freq_grid`]
/// on their transform over `freq`.
pub fn equivalence_check(
    grid: &SamplingGrid,
    ts: &TimeSeries,
    spectrum: &Spectrum,
    setup: &MeasurementSetup,
    cfg: &ImagingConfig,
    tolerance: f64,
) -> Result<EquivalenceReport> {
    let a = indicator_grid(grid, ts, setup, cfg)?;
    let b = indicator_freq_grid(grid, spectrum, setup, cfg)?;
    Ok(compare_grids(&a, &b, tolerance))
}

/// Relative node-wise discrepancy of `a` against the reference `b`.
pub fn compare_grids(a: &ImagingGrid, b: &ImagingGrid, tolerance: f64) -> EquivalenceReport {
    let mut max_rel: f64 = 0.0;
    let mut sum = 0.0;
    let mut worst = 0;
    for (l, (x, y)) in a.values.iter().zip(&b.values).enumerate() {
        let rel = if *y > 0.0 {
            (x - y).abs() / y
        } else if *x == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        sum += rel;
        if rel > max_rel {
            max_rel = rel;
            worst = l;
        }
    }
    let (amax, bmax) = (a.max(), b.max());
    let max_abs_normalized = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x / amax - y / bmax).abs())
        .fold(0.0, f64::max);
    EquivalenceReport {
        n_nodes: a.values.len(),
        max_rel,
        mean_rel: sum / a.values.len() as f64,
        worst_point: a.grid.point(worst),
        max_abs_normalized,
        time_max: amax,
        freq_max: bmax,
        tolerance,
        pass: max_rel < tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::PointScatterer;

    #[test]
    fn bound_special_cases() {
        let y = Point::new3(0.3, 0.4, 0.0);
        assert!((g3_bound(&y, 0.0, 123.0, 2.0) - 4.0 / (4.0 * PI)).abs() < 1e-15);
        let v = g3_bound(&Point::new3(1.0, 0.0, 0.0), 0.2, 50.0, 4.0);
        let want = (-2.5f64).exp() * (0.05f64.sinh() / 0.05) / (4.0 * PI / 16.0);
        assert!((v - want).abs() < 1e-15 * want);
        let w = ComplexFrequency::new(3.0, 0.4).unwrap();
        let b = g2_bound(&Point::ORIGIN, w, 0.4, 10.0, 2.0).unwrap();
        let want2 = (-2.0f64).exp() / (8.0 * w.as_complex().norm().sqrt() / 2.0);
        assert!((b - want2).abs() < 1e-15 * want2);
    }

    #[test]
    fn closed_form_at_coincidence_is_i0() {
        let y = Point::new3(0.0, 0.0, 1.5);
        let w = ComplexFrequency::new(6.0, 0.3).unwrap();
        let cf = g3_closed_form(0.0, &y, w, 0.3, 80.0, 2.0).unwrap();
        let b = g3_bound(&y, 0.3, 80.0, 2.0);
        assert!((cf.re - b).abs() < 1e-12 * b && cf.im.abs() < 1e-12 * b);
    }

    #[test]
    fn quadrature_self_convergence() {
        let y = Point::new2(0.4, -0.2);
        let z = Point::new2(0.1, 0.3);
        let w = ComplexFrequency::new(5.0, 0.1).unwrap();
        let a = g_integral_numeric(Dim::Two, &z, &y, w, 20.0, 256, 2.0).unwrap();
        let b = g_integral_numeric(Dim::Two, &z, &y, w, 20.0, 512, 2.0).unwrap();
        assert!((a - b).norm() < 1e-8 * b.norm());
        let y3 = Point::new3(0.2, -0.1, 0.3);
        let z3 = Point::new3(0.0, 0.2, 0.1);
        let a3 = g_integral_numeric(Dim::Three, &z3, &y3, w, 20.0, 32, 2.0).unwrap();
        let b3 = g_integral_numeric(Dim::Three, &z3, &y3, w, 20.0, 64, 2.0).unwrap();
        assert!((a3 - b3).norm() < 1e-8 * b3.norm());
    }

    #[test]
    fn numeric_matches_expanded_leading_terms() {
        // at z = y the integral approaches the fully expanded leading term
        let w = ComplexFrequency::new(10.0, 0.1).unwrap();
        for &c0 in &[1.0, 4.0] {
            let y2 = Point::new2(0.5, 0.3);
            let g2 = g_integral_numeric(Dim::Two, &y2, &y2, w, 500.0, 512, c0).unwrap();
            let l2 = g2_leading(&y2, w, 0.1, 500.0, c0).unwrap();
            assert!((g2.norm() / l2 - 1.0).abs() < 0.01, "2D c0={c0}: {}", g2.norm() / l2);
            let y3 = Point::new3(0.2, 0.3, 0.4);
            let g3 = g_integral_numeric(Dim::Three, &y3, &y3, w, 500.0, 64, c0).unwrap();
            let l3 = g3_leading(&y3, 0.1, 500.0, c0);
            assert!((g3.norm() / l3 - 1.0).abs() < 0.01, "3D c0={c0}: {}", g3.norm() / l3);
        }
    }

    #[test]
    fn decay_laws() {
        let c0 = 1.0;
        let y = Point::new3(0.0, 0.0, 0.5);
        let w = ComplexFrequency::new(20.0, 0.0).unwrap();
        let at_y = g_integral_numeric(Dim::Three, &y, &y, w, 500.0, 64, c0).unwrap().norm();
        // ξ|z - y|/c0 = 40
        let z = y * (1.0 + 4.0);
        let far = g_integral_numeric(Dim::Three, &z, &y, w, 500.0, 64, c0).unwrap().norm();
        assert!(far < at_y / 10.0);

        let y2 = Point::new2(0.0, 0.0);
        let g = |d: f64| {
            g_integral_numeric(Dim::Two, &Point::new2(d, 0.0), &y2, w, 500.0, 1024, c0)
                .unwrap()
                .norm()
        };
        // envelope of |J0| over a decade, sampled near successive crests
        let env = |x: f64| {
            (0..40)
                .map(|i| g((x + i as f64 * 0.02 * x / 8.0) / 20.0))
                .fold(0.0, f64::max)
        };
        let (a, b) = (env(5.0), env(50.0));
        let slope = (b / a).log10();
        assert!((slope + 0.5).abs() < 2f64.log10(), "slope {slope}");
    }

    #[test]
    fn mj_scaling() {
        let mk = |c: f64| {
            Scene::new(Dim::Two, 4.0, vec![PointScatterer::new(Point::new2(-1.0, -1.5), c, 0.0314).unwrap()]).unwrap()
        };
        let spec = SignalSpec::gauss_mod_sine(20.0).unwrap();
        let freq = FrequencyGrid::for_signal(&spec, 6.0).unwrap();
        let chi = signal_spectrum(&spec, &freq, 0.2, 6.0, 1.5).unwrap();
        let src = Point::new2(-3.0, 0.0);
        let a = theorem_mj(&mk(15.0), 0, &src, &chi, &freq, 0.2).unwrap();
        assert!(a > 0.0 && a.is_finite());
        assert_eq!(theorem_mj(&mk(4.0), 0, &src, &chi, &freq, 0.2).unwrap(), 0.0);
        let mut s2 = mk(15.0);
        s2.scatterers[0].measure *= 2.0;
        let b = theorem_mj(&s2, 0, &src, &chi, &freq, 0.2).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn local_maxima_of_spike() {
        let grid = SamplingGrid::cube(Dim::Two, -1.0, 1.0, 5).unwrap();
        let mut values = vec![0.0; 25];
        values[12] = 1.0;
        let g = ImagingGrid { grid, values, normalized: true };
        let scene = Scene::new(Dim::Two, 1.0, vec![PointScatterer::new(Point::ORIGIN, 2.0, 0.1).unwrap()]).unwrap();
        let r = peak_report(&g, &scene);
        assert_eq!(r.localization_cells[0], Some(0.0));
        // the flat zero region produces one tie-broken maximum at index 0
        let m = local_maxima(&g);
        assert_eq!(m[0], 12);
        assert!(m.contains(&0));
        assert!(!m.contains(&1));
    }

    #[test]
    fn symmetric_difference_counts_cells() {
        let grid = SamplingGrid::cube(Dim::Two, 0.0, 3.0, 4).unwrap();
        let values: Vec<f64> = (0..16).map(|l| if l < 8 { 1.0 } else { 0.0 }).collect();
        let g = ImagingGrid { grid, values, normalized: true };
        let a = level_set_symmetric_difference(&g, 0.5, |p| p.y() < 0.5);
        assert_eq!(a, 4.0);
    }
}
