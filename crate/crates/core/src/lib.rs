//! Time-domain direct sampling for inverse acoustic scattering.
//!
//! The crate synthesizes scattered-field time series for point-like
//! inhomogeneities with a frequency-domain Born model, evaluates the
//! time-domain direct sampling indicator over a sampling grid, and carries
//! the numerical checks that tie the time-domain indicator to its
//! Fourier–Laplace representation.
//!
//! Module map:
//!
//! * [`specfun`]: Hankel, Bessel and spherical Bessel functions and the
//!   Helmholtz fundamental solutions.
//! * [`signals`]: causal source waveforms and the discrete Fourier–Laplace pair.
//! * [`scene`]: scatterers, measurement geometry, sampling grids and the
//!   JSON run configuration.
//! * [`forward`]: Born synthesis of receiver traces and the noise model.
//! * [`imaging`]: indicator functionals (time and frequency paths).
//! * [`analysis`]: G-integral bounds, closed forms and peak statistics.
//! * [`io`]: binary/CSV/PGM artifact formats.

pub mod analysis;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod io;
pub mod quadrature;
pub mod scene;
pub mod signals;
pub mod specfun;

pub use error::{Error, Result};
pub use forward::{Provenance, Spectrum, TimeSeries};
pub use geometry::{Dim, Point};
pub use imaging::{ImagingConfig, ImagingGrid, Interpolation};
pub use scene::{MeasurementSetup, PointScatterer, SamplingGrid, Scene};
pub use signals::{SignalKind, SignalSpec, TimeGrid};
pub use specfun::ComplexFrequency;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
