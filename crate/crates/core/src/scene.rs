//! Scatterers, measurement geometry, sampling grids and the JSON run
//! configuration.
//!
//! Every small scatterer enters the forward model as a weighted point: its
//! center and its exact area or volume. Extended shapes (kite, pear) become
//! clouds of boundary points that share the enclosed area equally.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forward::SynthesisOptions;
use crate::geometry::{Dim, Point};
use crate::imaging::Interpolation;
use crate::signals::{SignalKind, SignalSpec, TimeGrid};

/// Default number of boundary points for extended shapes.
pub const DEFAULT_CLOUD_POINTS: usize = 64;

/// A small inhomogeneity modeled by its center and measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointScatterer {
    pub center: Point,
    /// Sound speed inside the scatterer.
    pub interior_speed: f64,
    /// Area in 2D, volume in 3D.
    pub measure: f64,
    /// Radius of a ball around `center` containing the physical shape.
    #[serde(default)]
    pub extent: f64,
}

impl PointScatterer {
    pub fn new(center: Point, interior_speed: f64, measure: f64) -> Result<Self> {
        Self::with_extent(center, interior_speed, measure, 0.0)
    }

    pub fn with_extent(center: Point, interior_speed: f64, measure: f64, extent: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid("scatterer center must be finite"));
        }
        if !(interior_speed > 0.0 && interior_speed.is_finite()) {
            return Err(Error::invalid(format!("interior speed must be positive, got {interior_speed}")));
        }
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(Error::invalid(format!("scatterer measure must be positive, got {measure}")));
        }
        if !(extent >= 0.0) {
            return Err(Error::invalid("scatterer extent must be nonnegative"));
        }
        Ok(PointScatterer { center, interior_speed, measure, extent })
    }
}

/// Contrast weight `h = (c^-2 - c0^-2) |Ω|`.
pub fn scatterer_weight(s: &PointScatterer, c0: f64) -> f64 {
    (s.interior_speed.powi(-2) - c0.powi(-2)) * s.measure
}

/// Background medium plus scatterers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub dim: Dim,
    pub background_speed: f64,
    pub scatterers: Vec<PointScatterer>,
}

impl Scene {
    pub fn new(dim: Dim, background_speed: f64, scatterers: Vec<PointScatterer>) -> Result<Self> {
        if !(background_speed > 0.0 && background_speed.is_finite()) {
            return Err(Error::invalid(format!("background speed must be positive, got {background_speed}")));
        }
        for (i, s) in scatterers.iter().enumerate() {
            if dim == Dim::Two && s.center.z() != 0.0 {
                return Err(Error::Geometry(format!("scatterer {i} has a z coordinate in a 2D scene")));
            }
            for (j, o) in scatterers.iter().enumerate().skip(i + 1) {
                if s.center.dist(&o.center) == 0.0 {
                    return Err(Error::Geometry(format!("scatterers {i} and {j} share a center")));
                }
            }
        }
        Ok(Scene { dim, background_speed, scatterers })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.scatterers.iter().map(|s| scatterer_weight(s, self.background_speed)).collect()
    }

    /// Minimum distance between scatterer centers, `None` with fewer than two.
    pub fn separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.scatterers.iter().enumerate() {
            for b in &self.scatterers[i + 1..] {
                let d = a.center.dist(&b.center);
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
        best
    }

    /// A copy holding only scatterer `j`.
    pub fn single(&self, j: usize) -> Scene {
        Scene {
            dim: self.dim,
            background_speed: self.background_speed,
            scatterers: vec![self.scatterers[j].clone()],
        }
    }
}

/// Shape of the observation surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryTag {
    Circle { radius: f64 },
    Arc { radius: f64, theta_min: f64, theta_max: f64 },
    Square { side: f64 },
    Sphere { radius: f64 },
    Custom,
}

/// Receiver positions with their quadrature weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverArray {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub tag: GeometryTag,
}

impl ReceiverArray {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `n` receivers at angles `2πk/n` counterclockwise from the positive x axis.
pub fn circle_receivers(n: usize, radius: f64) -> Result<ReceiverArray> {
    if n == 0 {
        return Err(Error::invalid("need at least one receiver"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("circle radius must be positive, got {radius}")));
    }
    let points = (0..n)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            Point::new2(radius * th.cos(), radius * th.sin())
        })
        .collect();
    Ok(ReceiverArray {
        points,
        weights: vec![2.0 * PI * radius / n as f64; n],
        tag: GeometryTag::Circle { radius },
    })
}

/// `n` receivers at `θ_min + kΔθ/n` on an arc of the given radius.
pub fn arc_receivers(n: usize, radius: f64, theta_min: f64, theta_max: f64) -> Result<ReceiverArray> {
    if n == 0 {
        return Err(Error::invalid("need at least one receiver"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("arc radius must be positive, got {radius}")));
    }
    let span = theta_max - theta_min;
    if !(span > 0.0 && span <= 2.0 * PI + 1e-12) {
        return Err(Error::invalid(format!("degenerate aperture ({theta_min}, {theta_max})")));
    }
    let points = (0..n)
        .map(|k| {
            let th = theta_min + span * k as f64 / n as f64;
            Point::new2(radius * th.cos(), radius * th.sin())
        })
        .collect();
    Ok(ReceiverArray {
        points,
        weights: vec![radius * span / n as f64; n],
        tag: GeometryTag::Arc { radius, theta_min, theta_max },
    })
}

/// `n` receivers on the boundary of an origin-centered square, spaced by
/// `4·side/n` in arc length and offset half a spacing from the corner
/// `(-side/2, -side/2)`, walking counterclockwise.
pub fn square_receivers(n: usize, side: f64) -> Result<ReceiverArray> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::invalid(format!("square receiver count must be a positive multiple of 4, got {n}")));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::invalid(format!("square side must be positive, got {side}")));
    }
    let h = 4.0 * side / n as f64;
    let points = (0..n).map(|k| square_perimeter_point(side, (k as f64 + 0.5) * h)).collect();
    Ok(ReceiverArray {
        points,
        weights: vec![h; n],
        tag: GeometryTag::Square { side },
    })
}

/// Point at arc length `s` along the square boundary, counterclockwise from
/// the lower-left corner.
pub fn square_perimeter_point(side: f64, s: f64) -> Point {
    let a = side / 2.0;
    let s = s.rem_euclid(4.0 * side);
    let edge = (s / side).floor() as usize;
    let u = s - edge as f64 * side;
    match edge {
        0 => Point::new2(-a + u, -a),
        1 => Point::new2(a, -a + u),
        2 => Point::new2(a - u, a),
        _ => Point::new2(-a, a - u),
    }
}

/// `n` receivers on a sphere from a Fibonacci lattice, equal weights `4πr²/n`.
pub fn sphere_receivers(n: usize, radius: f64) -> Result<ReceiverArray> {
    if n == 0 {
        return Err(Error::invalid("need at least one receiver"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("sphere radius must be positive, got {radius}")));
    }
    let golden = PI * (3.0 - 5f64.sqrt());
    let points = (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Point::new3(radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z)
        })
        .collect();
    Ok(ReceiverArray {
        points,
        weights: vec![4.0 * PI * radius * radius / n as f64; n],
        tag: GeometryTag::Sphere { radius },
    })
}

/// Default source positions on the square used with extended scatterers:
/// edge midpoints left, right, top, bottom.
pub fn default_square_sources(side: f64) -> Vec<Point> {
    let a = side / 2.0;
    vec![Point::new2(-a, 0.0), Point::new2(a, 0.0), Point::new2(0.0, a), Point::new2(0.0, -a)]
}

/// Receivers plus the transmitters that illuminate the scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetup {
    pub receivers: Vec<Point>,
    pub receiver_weights: Vec<f64>,
    pub sources: Vec<Point>,
    /// Quadrature weight of each source in the multi-source functional.
    pub source_weights: Vec<f64>,
    pub geometry: GeometryTag,
}

impl MeasurementSetup {
    /// Unit source weights.
    pub fn new(array: ReceiverArray, sources: Vec<Point>) -> Result<Self> {
        let w = vec![1.0; sources.len()];
        Self::with_source_weights(array, sources, w)
    }

    pub fn with_source_weights(array: ReceiverArray, sources: Vec<Point>, source_weights: Vec<f64>) -> Result<Self> {
        if array.points.len() != array.weights.len() {
            return Err(Error::invalid("receiver and weight counts differ"));
        }
        if array.points.is_empty() {
            return Err(Error::invalid("need at least one receiver"));
        }
        if array.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::invalid("receiver weights must be positive"));
        }
        if sources.len() != source_weights.len() {
            return Err(Error::invalid("source and source-weight counts differ"));
        }
        if source_weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::invalid("source weights must be positive"));
        }
        if sources.iter().chain(&array.points).any(|p| !p.is_finite()) {
            return Err(Error::invalid("receiver and source coordinates must be finite"));
        }
        Ok(MeasurementSetup {
            receivers: array.points,
            receiver_weights: array.weights,
            sources,
            source_weights,
            geometry: array.tag,
        })
    }

    pub fn n_receivers(&self) -> usize {
        self.receivers.len()
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    /// A copy restricted to the first `k` sources.
    pub fn first_sources(&self, k: usize) -> MeasurementSetup {
        let k = k.min(self.sources.len());
        MeasurementSetup {
            sources: self.sources[..k].to_vec(),
            source_weights: self.source_weights[..k].to_vec(),
            ..self.clone()
        }
    }

    /// Checks every transducer lies strictly outside the scatterer hull
    /// padded by the scatterer extents.
    pub fn validate_against(&self, scene: &Scene) -> Result<()> {
        if scene.scatterers.is_empty() {
            return Ok(());
        }
        let hull = PaddedHull::new(scene);
        for (label, pts) in [("receiver", &self.receivers), ("source", &self.sources)] {
            for (i, p) in pts.iter().enumerate() {
                if hull.contains(p) {
                    return Err(Error::Geometry(format!(
                        "{label} {i} at {:?} lies inside the padded scatterer hull",
                        p.0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Convex hull of scatterer centers grown by the largest extent. In 3D the
/// hull is replaced by the enclosing ball about the centroid.
struct PaddedHull {
    dim: Dim,
    poly: Vec<[f64; 2]>,
    pad: f64,
    centroid: Point,
    ball: f64,
}

impl PaddedHull {
    fn new(scene: &Scene) -> Self {
        let pad = scene.scatterers.iter().map(|s| s.extent).fold(0.0, f64::max);
        let n = scene.scatterers.len() as f64;
        let mut c = Point::ORIGIN;
        for s in &scene.scatterers {
            c = c + s.center * (1.0 / n);
        }
        let ball = scene.scatterers.iter().map(|s| s.center.dist(&c) + s.extent).fold(0.0, f64::max);
        let pts: Vec<[f64; 2]> = scene.scatterers.iter().map(|s| [s.center.x(), s.center.y()]).collect();
        PaddedHull { dim: scene.dim, poly: convex_hull(pts), pad, centroid: c, ball }
    }

    fn contains(&self, p: &Point) -> bool {
        match self.dim {
            Dim::Three => p.dist(&self.centroid) <= self.ball,
            Dim::Two => {
                let q = [p.x(), p.y()];
                point_in_convex(&self.poly, q) || dist_to_polyline(&self.poly, q) <= self.pad
            }
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns the hull counterclockwise.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn point_in_convex(poly: &[[f64; 2]], q: [f64; 2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    (0..poly.len()).all(|i| cross(poly[i], poly[(i + 1) % poly.len()], q) >= 0.0)
}

fn dist_to_polyline(poly: &[[f64; 2]], q: [f64; 2]) -> f64 {
    let seg = |a: [f64; 2], b: [f64; 2]| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
        };
        ((a[0] + t * dx - q[0]).powi(2) + (a[1] + t * dy - q[1]).powi(2)).sqrt()
    };
    match poly.len() {
        0 => f64::INFINITY,
        1 => seg(poly[0], poly[0]),
        n => (0..n).map(|i| seg(poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min),
    }
}

/// Uniform lattice over an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub dim: Dim,
    pub lo: Point,
    pub hi: Point,
    pub n_per_axis: usize,
}

impl SamplingGrid {
    pub fn new(dim: Dim, lo: Point, hi: Point, n_per_axis: usize) -> Result<Self> {
        if n_per_axis < 2 {
            return Err(Error::invalid(format!("sampling grid needs at least 2 nodes per axis, got {n_per_axis}")));
        }
        for a in 0..dim.as_usize() {
            if !(hi.0[a] > lo.0[a]) {
                return Err(Error::invalid(format!("sampling box is empty along axis {a}")));
            }
        }
        Ok(SamplingGrid { dim, lo, hi, n_per_axis })
    }

    /// Square (cube) box `[a, b]^d`.
    pub fn cube(dim: Dim, a: f64, b: f64, n: usize) -> Result<Self> {
        let lo = Point([a, a, if dim == Dim::Three { a } else { 0.0 }]);
        let hi = Point([b, b, if dim == Dim::Three { b } else { 0.0 }]);
        Self::new(dim, lo, hi, n)
    }

    pub fn len(&self) -> usize {
        self.n_per_axis.pow(self.dim.as_usize() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi.0[axis] - self.lo.0[axis]) / (self.n_per_axis - 1) as f64
    }

    /// Per-axis indices of node `l`; x varies fastest.
    pub fn index(&self, l: usize) -> [usize; 3] {
        let n = self.n_per_axis;
        match self.dim {
            Dim::Two => [l % n, l / n, 0],
            Dim::Three => [l % n, (l / n) % n, l / (n * n)],
        }
    }

    pub fn linear(&self, idx: [usize; 3]) -> usize {
        let n = self.n_per_axis;
        match self.dim {
            Dim::Two => idx[1] * n + idx[0],
            Dim::Three => (idx[2] * n + idx[1]) * n + idx[0],
        }
    }

    pub fn point(&self, l: usize) -> Point {
        let idx = self.index(l);
        let mut c = [0.0; 3];
        for a in 0..self.dim.as_usize() {
            c[a] = self.lo.0[a] + idx[a] as f64 * self.spacing(a);
        }
        Point(c)
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|l| self.point(l)).collect()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim.as_usize()).all(|a| p.0[a] >= self.lo.0[a] && p.0[a] <= self.hi.0[a])
    }

    /// Area (2D) or volume (3D) of one lattice cell.
    pub fn cell_measure(&self) -> f64 {
        (0..self.dim.as_usize()).map(|a| self.spacing(a)).product()
    }
}

/// Scatterer shapes accepted in configuration documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Disk { radius: f64 },
    Square { side: f64 },
    Ellipse { a: f64, b: f64 },
    Ball { radius: f64 },
    Cube { side: f64 },
    Point { measure: f64 },
    Kite {
        #[serde(default = "default_cloud")]
        n_points: usize,
    },
    Pear {
        #[serde(default = "default_cloud")]
        n_points: usize,
    },
}

fn default_cloud() -> usize {
    DEFAULT_CLOUD_POINTS
}

impl Shape {
    fn positive(name: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} must be positive, got {v}")))
        }
    }

    pub fn validate(&self, dim: Dim) -> Result<()> {
        let planar = matches!(
            self,
            Shape::Disk { .. } | Shape::Square { .. } | Shape::Ellipse { .. } | Shape::Kite { .. } | Shape::Pear { .. }
        );
        let solid = matches!(self, Shape::Ball { .. } | Shape::Cube { .. });
        if planar && dim == Dim::Three || solid && dim == Dim::Two {
            return Err(Error::invalid(format!("shape {self:?} does not exist in {dim}")));
        }
        match *self {
            Shape::Disk { radius } | Shape::Ball { radius } => Self::positive("radius", radius),
            Shape::Square { side } | Shape::Cube { side } => Self::positive("side", side),
            Shape::Ellipse { a, b } => Self::positive("semi-axis a", a).and(Self::positive("semi-axis b", b)),
            Shape::Point { measure } => Self::positive("measure", measure),
            Shape::Kite { n_points } | Shape::Pear { n_points } => {
                if n_points < 3 {
                    Err(Error::invalid("boundary clouds need at least 3 points"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Exact area or volume.
    pub fn measure(&self) -> f64 {
        match *self {
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Square { side } => side * side,
            Shape::Ellipse { a, b } => PI * a * b,
            Shape::Ball { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Cube { side } => side.powi(3),
            Shape::Point { measure } => measure,
            Shape::Kite { .. } => 1.5 * PI,
            Shape::Pear { .. } => PI * (1.6 * 1.6 + 0.5 * 0.24 * 0.24),
        }
    }

    /// Radius of a ball about the center containing the shape.
    pub fn extent(&self) -> f64 {
        match *self {
            Shape::Disk { radius } | Shape::Ball { radius } => radius,
            Shape::Square { side } => side / 2f64.sqrt(),
            Shape::Cube { side } => side * 3f64.sqrt() / 2.0,
            Shape::Ellipse { a, b } => a.max(b),
            Shape::Point { .. } => 0.0,
            Shape::Kite { .. } | Shape::Pear { .. } => 0.0,
        }
    }

    pub fn is_cloud(&self) -> bool {
        matches!(self, Shape::Kite { .. } | Shape::Pear { .. })
    }

    /// Boundary curve of the planar shapes, relative to the center.
    pub fn boundary(&self, theta: f64) -> Option<Point> {
        match *self {
            Shape::Kite { .. } => Some(kite_curve(theta)),
            Shape::Pear { .. } => Some(pear_curve(theta)),
            Shape::Disk { radius } => Some(Point::new2(radius * theta.cos(), radius * theta.sin())),
            Shape::Ellipse { a, b } => Some(Point::new2(a * theta.cos(), b * theta.sin())),
            _ => None,
        }
    }

    /// Whether `p` (relative to the shape center) lies inside a planar shape.
    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            Shape::Disk { radius } => p.norm() <= radius,
            Shape::Square { side } => p.x().abs() <= side / 2.0 && p.y().abs() <= side / 2.0,
            Shape::Ellipse { a, b } => (p.x() / a).powi(2) + (p.y() / b).powi(2) <= 1.0,
            Shape::Ball { radius } => p.norm() <= radius,
            Shape::Cube { side } => p.0.iter().all(|c| c.abs() <= side / 2.0),
            Shape::Point { .. } => false,
            Shape::Kite { .. } | Shape::Pear { .. } => {
                let poly: Vec<Point> = (0..1024)
                    .map(|k| self.boundary(2.0 * PI * k as f64 / 1024.0).unwrap())
                    .collect();
                point_in_polygon(&poly, p)
            }
        }
    }

    /// Expands the shape at `center` into weighted point scatterers.
    pub fn to_scatterers(&self, center: Point, speed: f64) -> Result<Vec<PointScatterer>> {
        match *self {
            Shape::Kite { n_points } | Shape::Pear { n_points } => {
                let m = self.measure() / n_points as f64;
                (0..n_points)
                    .map(|k| {
                        let b = self.boundary(2.0 * PI * k as f64 / n_points as f64).unwrap();
                        PointScatterer::new(center + b, speed, m)
                    })
                    .collect()
            }
            _ => Ok(vec![PointScatterer::with_extent(center, speed, self.measure(), self.extent())?]),
        }
    }
}

/// `(cos θ + 0.65 cos 2θ - 0.65, 1.5 sin θ)`.
pub fn kite_curve(theta: f64) -> Point {
    Point::new2(theta.cos() + 0.65 * (2.0 * theta).cos() - 0.65, 1.5 * theta.sin())
}

/// `(1.6 + 0.24 cos 3θ)(cos θ, sin θ)`.
pub fn pear_curve(theta: f64) -> Point {
    let r = 1.6 + 0.24 * (3.0 * theta).cos();
    Point::new2(r * theta.cos(), r * theta.sin())
}

/// Even-odd rule.
pub fn point_in_polygon(poly: &[Point], p: &Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y() > p.y()) != (b.y() > p.y()) {
            let x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if p.x() < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Shoelace area of the `n`-gon inscribed in a closed parametric curve
/// (second-order accurate in `1/n`).
pub fn curve_area(curve: impl Fn(f64) -> Point, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let pts: Vec<Point> = (0..n).map(|k| curve(k as f64 * h)).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        acc += a.x() * b.y() - b.x() * a.y();
    }
    0.5 * acc.abs()
}

/// Noise settings of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
}

/// Everything a run needs, validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scene: Scene,
    /// Shapes as written in the document, one per scatterer entry.
    pub shapes: Vec<(Point, Shape)>,
    pub setup: MeasurementSetup,
    pub grid: SamplingGrid,
    pub signal: SignalSpec,
    pub time: TimeGrid,
    pub sigma: f64,
    /// Imaging dampings to sweep; defaults to `[sigma]`.
    pub sigma_sweep: Vec<f64>,
    /// Source counts to image with; defaults to all sources.
    pub source_counts: Vec<usize>,
    pub interpolation: Interpolation,
    pub synthesis: SynthesisOptions,
    pub noise: Option<NoiseSpec>,
    pub output_dir: Option<String>,
    /// The parsed document, for echoing into reports.
    pub document: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scene: RawScene,
    measurement: RawMeasurement,
    signal: RawSignal,
    imaging: RawImaging,
    #[serde(default)]
    synthesis: Option<RawSynthesis>,
    #[serde(default)]
    noise: Option<NoiseSpec>,
    #[serde(default)]
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    dim: u8,
    c0: f64,
    #[serde(default)]
    scatterers: Vec<RawScatterer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScatterer {
    center: Vec<f64>,
    speed: f64,
    shape: Shape,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasurement {
    geometry_tag: String,
    #[serde(default)]
    params: serde_json::Map<String, Value>,
    n_receivers: usize,
    #[serde(default)]
    sources: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    source_weights: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    kind: SignalKind,
    #[serde(default)]
    omega0: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImaging {
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    sigma_sweep: Option<Vec<f64>>,
    #[serde(rename = "T")]
    terminal: f64,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    n_steps: Option<usize>,
    grid: RawGrid,
    #[serde(default)]
    interpolation: Option<Interpolation>,
    #[serde(default)]
    source_counts: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "box")]
    bounds: Vec<f64>,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSynthesis {
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    band: Option<f64>,
    #[serde(default)]
    dxi: Option<f64>,
    #[serde(default)]
    taper: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: String,
}

fn at(path: impl AsRef<str>, e: Error) -> Error {
    let msg = match e {
        Error::InvalidInput(m) | Error::Geometry(m) | Error::Domain(m) | Error::Config(m) => m,
        other => other.to_string(),
    };
    Error::Config(format!("{}: {msg}", path.as_ref()))
}

fn param(params: &serde_json::Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Config(format!("measurement.params.{key}: missing or not a number")))
}

fn point_for(dim: Dim, c: &[f64], path: &str) -> Result<Point> {
    if c.len() != dim.as_usize() {
        return Err(Error::Config(format!("{path}: expected {} coordinates, got {}", dim.as_usize(), c.len())));
    }
    let p = Point::from_slice(c).map_err(|e| at(path, e))?;
    if !p.is_finite() {
        return Err(Error::Config(format!("{path}: coordinates must be finite")));
    }
    Ok(p)
}

/// Parses and validates a configuration document.
///
/// Syntax and schema errors carry the line and column reported by the JSON
/// parser; invariant violations name the offending key path.
pub fn load_scene(text: &str) -> Result<RunConfig> {
    let document: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("schema: {e}")))?;

    let dim = Dim::try_from(raw.scene.dim).map_err(|e| at("scene.dim", e))?;
    let c0 = raw.scene.c0;
    let mut scatterers = Vec::new();
    let mut shapes = Vec::new();
    for (i, s) in raw.scene.scatterers.iter().enumerate() {
        let path = format!("scene.scatterers[{i}]");
        let center = point_for(dim, &s.center, &format!("{path}.center"))?;
        s.shape.validate(dim).map_err(|e| at(format!("{path}.shape"), e))?;
        let pts = s.shape.to_scatterers(center, s.speed).map_err(|e| at(&path, e))?;
        for p in &pts {
            if scatterer_weight(p, c0) == 0.0 {
                return Err(Error::Config(format!("{path}.speed: equals c0, scatterer would be invisible")));
            }
        }
        scatterers.extend(pts);
        shapes.push((center, s.shape.clone()));
    }
    let scene = Scene::new(dim, c0, scatterers).map_err(|e| at("scene", e))?;

    let m = &raw.measurement;
    let array = match m.geometry_tag.as_str() {
        "circle" => circle_receivers(m.n_receivers, param(&m.params, "radius")?),
        "arc" => arc_receivers(
            m.n_receivers,
            param(&m.params, "radius")?,
            param(&m.params, "theta_min")?,
            param(&m.params, "theta_max")?,
        ),
        "square" => square_receivers(m.n_receivers, param(&m.params, "side")?),
        "sphere" => sphere_receivers(m.n_receivers, param(&m.params, "radius")?),
        other => return Err(Error::Config(format!("measurement.geometry_tag: unknown geometry '{other}'"))),
    }
    .map_err(|e| at("measurement", e))?;
    if dim == Dim::Two && matches!(array.tag, GeometryTag::Sphere { .. }) {
        return Err(Error::Config("measurement.geometry_tag: sphere needs dim 3".into()));
    }
    let sources = match &m.sources {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, c)| point_for(dim, c, &format!("measurement.sources[{i}]")))
            .collect::<Result<Vec<_>>>()?,
        None => match array.tag {
            GeometryTag::Square { side } => default_square_sources(side),
            _ => return Err(Error::Config("measurement.sources: required for this geometry".into())),
        },
    };
    if sources.is_empty() {
        return Err(Error::Config("measurement.sources: need at least one source".into()));
    }
    let sw = m.source_weights.clone().unwrap_or_else(|| vec![1.0; sources.len()]);
    let setup = MeasurementSetup::with_source_weights(array, sources, sw).map_err(|e| at("measurement", e))?;
    setup.validate_against(&scene).map_err(|e| at("measurement", e))?;

    let signal = SignalSpec::from_kind(raw.signal.kind, raw.signal.omega0).map_err(|e| at("signal", e))?;

    let im = &raw.imaging;
    let time = match (im.dt, im.n_steps) {
        (Some(dt), None) => {
            let g = TimeGrid::from_terminal(im.terminal, dt).map_err(|e| at("imaging", e))?;
            if (g.terminal_time() - im.terminal).abs() > 1e-9 * im.terminal {
                return Err(Error::Config(format!("imaging.dt: T = {} is not a multiple of dt = {dt}", im.terminal)));
            }
            g
        }
        (None, Some(n)) => {
            if n == 0 || !(im.terminal > 0.0) {
                return Err(Error::Config("imaging: T and n_steps must be positive".into()));
            }
            TimeGrid::new(im.terminal / n as f64, n).map_err(|e| at("imaging", e))?
        }
        _ => return Err(Error::Config("imaging: give exactly one of dt and n_steps".into())),
    };
    let sigma = im.sigma.unwrap_or(signal.recommended_sigma);
    let sigma_sweep = im.sigma_sweep.clone().unwrap_or_else(|| vec![sigma]);
    for (i, s) in std::iter::once(&sigma).chain(&sigma_sweep).enumerate() {
        if !(*s >= 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("imaging.sigma: entry {i} must be nonnegative, got {s}")));
        }
    }
    if sigma_sweep.is_empty() {
        return Err(Error::Config("imaging.sigma_sweep: must not be empty".into()));
    }
    let source_counts = im.source_counts.clone().unwrap_or_else(|| vec![setup.n_sources()]);
    if source_counts.is_empty() || source_counts.iter().any(|&k| k == 0 || k > setup.n_sources()) {
        return Err(Error::Config(format!(
            "imaging.source_counts: entries must lie in 1..={}",
            setup.n_sources()
        )));
    }

    let b = &im.grid.bounds;
    let d = dim.as_usize();
    let (lo, hi) = if b.len() == 2 {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..d {
            lo[a] = b[0];
            hi[a] = b[1];
        }
        (Point(lo), Point(hi))
    } else if b.len() == 2 * d {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..d {
            lo[a] = b[2 * a];
            hi[a] = b[2 * a + 1];
        }
        (Point(lo), Point(hi))
    } else {
        return Err(Error::Config(format!("imaging.grid.box: expected 2 or {} numbers", 2 * d)));
    };
    let grid = SamplingGrid::new(dim, lo, hi, im.grid.n).map_err(|e| at("imaging.grid", e))?;
    for (i, s) in scene.scatterers.iter().enumerate() {
        if !grid.contains(&s.center) {
            return Err(Error::Config(format!("scene.scatterers: point {i} lies outside the sampling box")));
        }
    }
    let h = (0..d).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    for (i, r) in setup.receivers.iter().enumerate() {
        if grid.contains(r) {
            // a receiver inside the box must not sit on a lattice node
            let near = (0..grid.len()).any(|l| grid.point(l).dist(r) < 1e-9 * h);
            if near {
                return Err(Error::Config(format!("measurement: receiver {i} coincides with a sampling node")));
            }
        }
    }

    let mut synthesis = SynthesisOptions::default();
    if let Some(s) = &raw.synthesis {
        synthesis.sigma = s.sigma;
        synthesis.band = s.band;
        synthesis.dxi = s.dxi;
        synthesis.taper = s.taper;
    }
    synthesis.validate().map_err(|e| at("synthesis", e))?;

    if let Some(n) = &raw.noise {
        if !(n.delta >= 0.0 && n.delta.is_finite()) {
            return Err(Error::Config(format!("noise.delta: must be nonnegative, got {}", n.delta)));
        }
    }

    Ok(RunConfig {
        scene,
        shapes,
        setup,
        grid,
        signal,
        time,
        sigma,
        sigma_sweep,
        source_counts,
        interpolation: im.interpolation.unwrap_or_default(),
        synthesis,
        noise: raw.noise,
        output_dir: raw.output.map(|o| o.directory),
        document,
    })
}

/// Reads and validates a configuration file.
pub fn load_scene_file(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    load_scene(&text)
}
