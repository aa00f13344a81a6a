//! Special functions of real and complex argument and the Helmholtz
//! fundamental solutions built from them.
//!
//! `H0^(1)` is evaluated on three branches selected by `|z|`:
//!
//! * `|z| <= 4`: ascending series for `J0` and `Y0`;
//! * `4 < |z| < 25`: the steepest-descent integral
//!   `H0(z) = sqrt(2/(pi z)) e^{i(z - pi/4)} (2/sqrt(pi)) ∫_0^∞ e^{-s^2} (1 + i s^2/(2z))^{-1/2} ds`
//!   integrated with a 64-point Gauss–Legendre rule on `[0, 6.5]`;
//! * `|z| >= 25`: the Hankel asymptotic expansion, summed until the terms
//!   drop below `1e-17`.
//!
//! Arguments with `Re z < 0` are mapped to the right half-plane with
//! `H0(z) = -conj(H0(-conj z))`, which keeps the kernel exactly
//! conjugate-symmetric in the frequency.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dim, Point};
use crate::quadrature::gauss_legendre;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper limit of the `J0`/`Y0` series branch.
pub const HANKEL_SERIES_LIMIT: f64 = 4.0;
/// Lower limit of the asymptotic-expansion branch.
pub const HANKEL_ASYMPTOTIC_LIMIT: f64 = 25.0;
/// Crossover between the `I0` ascending series and its asymptotic expansion.
pub const I0_SERIES_LIMIT: f64 = 15.0;

const INTEGRAL_NODES: usize = 64;
const INTEGRAL_CUTOFF: f64 = 6.5;

/// A point `omega = xi + i sigma` on a Fourier–Laplace contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexFrequency {
    /// Angular frequency `xi` in rad/s.
    pub re: f64,
    /// Damping `sigma` in 1/s.
    pub im: f64,
}

impl ComplexFrequency {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::domain("complex frequency must be finite"));
        }
        if im < 0.0 {
            return Err(Error::domain(format!(
                "contour must lie on or above the real axis, got Im(omega) = {im}"
            )));
        }
        Ok(ComplexFrequency { re, im })
    }

    pub fn real(xi: f64) -> Result<Self> {
        Self::new(xi, 0.0)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Hankel function of the first kind and order zero.
///
/// Accurate to about `1e-13` relative on `1e-3 <= |z| <= 1e4`. Errors at
/// `z = 0` and for `Im z < 0`.
pub fn hankel0_first(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("H0 argument must be finite"));
    }
    if z.im < 0.0 {
        return Err(Error::domain(format!("H0 requires Im z >= 0, got {z}")));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::domain("H0 has a logarithmic singularity at z = 0"));
    }
    if z.re < 0.0 {
        let w = Complex64::new(-z.re, z.im);
        return Ok(-hankel0_right(w).conj());
    }
    Ok(hankel0_right(z))
}

fn hankel0_right(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r <= HANKEL_SERIES_LIMIT {
        hankel0_series(z)
    } else if r < HANKEL_ASYMPTOTIC_LIMIT {
        hankel0_integral(z)
    } else {
        hankel0_asymptotic(z)
    }
}

/// `J0(z) + i Y0(z)` from the ascending series. Loses accuracy for large
/// `|z|` and for large `Im z`; used below [`HANKEL_SERIES_LIMIT`].
pub fn hankel0_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut j0 = term;
    let mut ysum = Complex64::new(0.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        // (-1)^{k+1} H_k q^k / (k!)^2 = -H_k * term
        let yterm = -term * harmonic;
        ysum += yterm;
        if term.norm() < 1e-18 * j0.norm().max(1.0) && yterm.norm() < 1e-18 * ysum.norm().max(1.0) {
            break;
        }
    }
    let log_term = (z * 0.5).ln() + EULER_GAMMA;
    let y0 = (log_term * j0 + ysum) * (2.0 / PI);
    j0 + Complex64::i() * y0
}

fn integral_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(INTEGRAL_NODES);
        let half = 0.5 * INTEGRAL_CUTOFF;
        let nodes = x.iter().map(|&t| half * (t + 1.0)).collect();
        let weights = w.iter().map(|&v| half * v).collect();
        (nodes, weights)
    })
}

/// Steepest-descent integral representation of `H0`, valid for
/// `Re z >= 0`, `Im z >= 0`, `z != 0`. Needs `|z|` of a few units or more
/// for the 64-node rule to resolve the branch point at `s^2 = 2iz`.
pub fn hankel0_integral(z: Complex64) -> Complex64 {
    let (nodes, weights) = integral_rule();
    let inv_2z = Complex64::i() / (z * 2.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&s, &w) in nodes.iter().zip(weights) {
        let u = s * s;
        let g = (Complex64::new(1.0, 0.0) + inv_2z * u).sqrt().inv();
        acc += g * (w * (-u).exp());
    }
    acc *= 2.0 / PI.sqrt();
    hankel_prefactor(z) * acc
}

/// Hankel asymptotic expansion of `H0`, summed to the smallest term or
/// `1e-17`, whichever comes first.
pub fn hankel0_asymptotic(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    let step = -Complex64::i() / (z * 8.0);
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = term * step * (odd * odd / k as f64);
        let mag = next.norm();
        if mag > prev {
            break;
        }
        term = next;
        sum += term;
        prev = mag;
        if mag < 1e-17 {
            break;
        }
    }
    hankel_prefactor(z) * sum
}

fn hankel_prefactor(z: Complex64) -> Complex64 {
    let amp = (Complex64::new(2.0 / PI, 0.0) / z).sqrt();
    let phase = (Complex64::i() * (z - FRAC_PI_4)).exp();
    amp * phase
}

/// Modified Bessel function `I0(x)` for `x >= 0`.
pub fn mod_bessel_i0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("I0 requires x >= 0, got {x}")));
    }
    Ok(if x <= I0_SERIES_LIMIT {
        mod_bessel_i0_series(x)
    } else {
        mod_bessel_i0_asymptotic(x)
    })
}

/// Ascending series `sum (x^2/4)^k / (k!)^2`.
pub fn mod_bessel_i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Large-argument expansion `e^x / sqrt(2 pi x) * sum ((2k-1)!!)^2 / (k! (8x)^k)`.
pub fn mod_bessel_i0_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * x * k as f64);
        if next > prev {
            break;
        }
        term = next;
        sum += term;
        prev = next;
        if term < 1e-18 * sum {
            break;
        }
    }
    x.exp() / (2.0 * PI * x).sqrt() * sum
}

/// Modified spherical Bessel function `i0(x) = sinh(x)/x`.
pub fn mod_sph_bessel_i0(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Spherical Bessel function `j0(z) = sin(z)/z` for complex `z`.
pub fn sph_bessel_j0(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Outgoing fundamental solution of the Helmholtz equation with wave
/// number `omega / c0`: `(i/4) H0(omega |x-y| / c0)` in 2D and
/// `e^{i omega |x-y| / c0} / (4 pi |x-y|)` in 3D.
pub fn fundamental_solution(
    dim: Dim,
    x: &Point,
    y: &Point,
    omega: ComplexFrequency,
    c0: f64,
) -> Result<Complex64> {
    let d = x.dist(y);
    if d == 0.0 {
        return Err(Error::domain("fundamental solution is singular at x = y"));
    }
    fundamental_solution_at_distance(dim, d, omega.as_complex(), c0)
}

/// [`fundamental_solution`] parameterized by the distance `|x - y|`.
pub fn fundamental_solution_at_distance(
    dim: Dim,
    d: f64,
    omega: Complex64,
    c0: f64,
) -> Result<Complex64> {
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::domain(format!("kernel distance must be positive, got {d}")));
    }
    if c0 <= 0.0 {
        return Err(Error::domain(format!("background speed must be positive, got {c0}")));
    }
    let arg = omega * (d / c0);
    match dim {
        Dim::Two => Ok(Complex64::new(0.0, 0.25) * hankel0_first(arg)?),
        Dim::Three => Ok((Complex64::i() * arg).exp() / (4.0 * PI * d)),
    }
}
