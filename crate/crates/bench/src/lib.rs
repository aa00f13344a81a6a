//! Fixtures shared by the benchmarks.

use wavedsm_core::scene::circle_receivers;
use wavedsm_core::{Dim, MeasurementSetup, Point, PointScatterer, Scene};

/// Three point scatterers in a `c0 = 4` background.
pub fn three_scatterers() -> Scene {
    let s = [
        (Point::new2(-1.0, -1.5), 15.0, 0.0314),
        (Point::new2(1.0, 0.0), 30.0, 0.01),
        (Point::new2(-1.0, 1.5), 10.0, 0.0302),
    ];
    Scene::new(Dim::Two, 4.0, s.iter().map(|(c, v, m)| PointScatterer::new(*c, *v, *m).unwrap()).collect()).unwrap()
}

/// 48 receivers on the circle of radius 4.2, one source at `(-3, 0)`.
pub fn circle_setup() -> MeasurementSetup {
    MeasurementSetup::new(circle_receivers(48, 4.2).unwrap(), vec![Point::new2(-3.0, 0.0)]).unwrap()
}
