//! Named geometries: a sampling chart for pointwise checks, integration
//! cells covering the compact manifold, and whatever topological and
//! cohomological data is known.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart_geometry::{Chart, ChartSymmetry, ExprMetric, MetricField, Point};
use crate::cohomology::{
    flat_torus_class, fubini_study_class, hyperbolic_product_class, sphere_product_class, KahlerClassData,
    SurfaceInvariants,
};
use crate::error::GeometryError;
use crate::expr::Expr;
use crate::kahler_maxwell::KahlerChart;
use crate::quadrature::{Axis, Cell, CellMap};

pub trait Geometry: Send + Sync {
    fn name(&self) -> &str;
    fn description(&self) -> String;
    /// Chart used for pointwise sampling.
    fn chart(&self) -> &Chart;
    /// Metric on [`Geometry::chart`].
    fn metric(&self) -> Arc<dyn MetricField>;
    /// Potential description of the metric on the sampling chart, if any.
    fn kahler_chart(&self) -> Option<Arc<KahlerChart>> {
        None
    }
    /// Kähler for the standard orientation of the sampling chart.
    fn is_kahler(&self) -> bool;
    fn constant_scalar(&self) -> bool;
    /// Known `(χ, τ)` of the compact manifold.
    fn topology(&self) -> Option<SurfaceInvariants>;
    /// Cells whose weighted integrals add up to integrals over the manifold.
    fn cells(&self) -> Vec<Cell>;
    fn class_data(&self) -> Option<KahlerClassData> {
        None
    }

    fn samples(&self, per_axis: usize) -> Vec<Point> {
        self.chart().sample_grid(per_axis)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Num(f64),
    Text(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeometryParams(pub BTreeMap<String, ParamValue>);

impl GeometryParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, v: ParamValue) -> Self {
        self.0.insert(key.to_string(), v);
        self
    }

    pub fn num(&self, key: &str, default: f64) -> Result<f64, GeometryError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Num(v)) => Ok(*v),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(ParamValue::Text(_)) => Err(GeometryError::InvalidParameters(format!("{key} must be a number"))),
        }
    }

    pub fn int(&self, key: &str, default: i64) -> Result<i64, GeometryError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) => Ok(*v),
            Some(ParamValue::Num(v)) if v.fract() == 0.0 => Ok(*v as i64),
            Some(_) => Err(GeometryError::InvalidParameters(format!("{key} must be an integer"))),
        }
    }

    pub fn text(&self, key: &str) -> Result<Option<&str>, GeometryError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(ParamValue::Text(s)) => Ok(Some(s)),
            Some(_) => Err(GeometryError::InvalidParameters(format!("{key} must be a string"))),
        }
    }
}

/// Plain-data geometry assembled by the built-in constructors.
pub struct BuiltGeometry {
    pub name: String,
    pub description: String,
    pub chart: Chart,
    pub metric: Arc<dyn MetricField>,
    pub kahler: Option<Arc<KahlerChart>>,
    pub is_kahler: bool,
    pub constant_scalar: bool,
    pub topology: Option<SurfaceInvariants>,
    pub cells: Vec<Cell>,
    pub class: Option<KahlerClassData>,
}

impl Geometry for BuiltGeometry {
    fn name(&self) -> &str {
        &self.name
    }
    fn description(&self) -> String {
        self.description.clone()
    }
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn metric(&self) -> Arc<dyn MetricField> {
        self.metric.clone()
    }
    fn kahler_chart(&self) -> Option<Arc<KahlerChart>> {
        self.kahler.clone()
    }
    fn is_kahler(&self) -> bool {
        self.is_kahler
    }
    fn constant_scalar(&self) -> bool {
        self.constant_scalar
    }
    fn topology(&self) -> Option<SurfaceInvariants> {
        self.topology
    }
    fn cells(&self) -> Vec<Cell> {
        self.cells.clone()
    }
    fn class_data(&self) -> Option<KahlerClassData> {
        self.class.clone()
    }
}

fn class_or_err(r: Result<KahlerClassData, crate::error::CohomologyError>) -> Result<KahlerClassData, GeometryError> {
    r.map_err(|e| GeometryError::InvalidParameters(e.to_string()))
}

fn z_abs_sq(k: usize) -> Expr {
    Expr::abs_sq(k)
}

fn polar_disk_cell(metric: Arc<dyn MetricField>, radius: f64, weight: f64) -> Cell {
    Cell {
        metric,
        axes: [
            Axis::legendre(0.0, radius),
            Axis::periodic(0.0, 2.0 * PI).with_symmetry(ChartSymmetry::Rotation(0)),
            Axis::legendre(0.0, radius),
            Axis::periodic(0.0, 2.0 * PI).with_symmetry(ChartSymmetry::Rotation(1)),
        ],
        map: CellMap::Polar,
        weight,
    }
}

/// Cell in spherical polar coordinates `(θ1, φ1, θ2, φ2)`.
fn spherical_cell(metric: Arc<dyn MetricField>) -> Cell {
    Cell {
        metric,
        axes: [
            Axis::legendre(0.0, PI),
            Axis::periodic(0.0, 2.0 * PI).with_symmetry(ChartSymmetry::Translation(1)),
            Axis::legendre(0.0, PI),
            Axis::periodic(0.0, 2.0 * PI).with_symmetry(ChartSymmetry::Translation(3)),
        ],
        map: CellMap::Identity,
        weight: 1.0,
    }
}

fn torus_cell(metric: Arc<dyn MetricField>, symmetric: [bool; 4]) -> Cell {
    let tau = 2.0 * PI;
    let axis = |i: usize| {
        let a = Axis::periodic(0.0, tau);
        if symmetric[i] {
            a.with_symmetry(ChartSymmetry::Translation(i))
        } else {
            a
        }
    };
    Cell { metric, axes: [axis(0), axis(1), axis(2), axis(3)], map: CellMap::Identity, weight: 1.0 }
}

/// `(ℝ²/2πℤ²)²` with the flat metric.
pub fn flat_torus() -> Result<BuiltGeometry, GeometryError> {
    let chart = Chart::flat_torus();
    let kc = Arc::new(KahlerChart::new(z_abs_sq(0) + z_abs_sq(1), chart.clone()));
    Ok(BuiltGeometry {
        name: "flat_torus".into(),
        description: "flat 4-torus with period 2π on every axis".into(),
        metric: kc.clone(),
        kahler: Some(kc.clone()),
        is_kahler: true,
        constant_scalar: true,
        topology: Some(SurfaceInvariants::new(0, 0)),
        cells: vec![torus_cell(kc, [true; 4])],
        class: Some(class_or_err(flat_torus_class())?),
        chart,
    })
}

/// Polar form of the round product `S²(a) × S²(b)`.
pub fn sphere_product_polar(a: f64, b: f64) -> ExprMetric {
    ExprMetric::diagonal([
        Expr::c(a * a),
        a * a * Expr::coord(0).sin().pow(2),
        Expr::c(b * b),
        b * b * Expr::coord(2).sin().pow(2),
    ])
}

/// Round `S²(a) × S²(b)`: stereographic potential for sampling, polar
/// coordinates for integration.
pub fn sphere_product(a: f64, b: f64) -> Result<BuiltGeometry, GeometryError> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(GeometryError::InvalidParameters(format!("radii must be positive, got ({a}, {b})")));
    }
    let chart = Chart::cube(-1.5, 1.5)?;
    let pot = 4.0 * a * a * (1.0 + z_abs_sq(0)).log() + 4.0 * b * b * (1.0 + z_abs_sq(1)).log();
    let kc = Arc::new(KahlerChart::new(pot, chart.clone()));
    Ok(BuiltGeometry {
        name: "sphere_product".into(),
        description: format!("round S²({a}) × S²({b})"),
        metric: kc.clone(),
        kahler: Some(kc),
        is_kahler: true,
        constant_scalar: true,
        topology: Some(SurfaceInvariants::new(4, 0)),
        cells: vec![spherical_cell(Arc::new(sphere_product_polar(a, b)))],
        class: Some(class_or_err(sphere_product_class(a, b))?),
        chart,
    })
}

/// Radius of the coordinate disk used as the hyperbolic sampling cell.
pub const HYPERBOLIC_CELL_RADIUS: f64 = 0.5;

/// `Σ_g × Σ_g` with curvature −1 on each factor. The metric is homogeneous,
/// so a Poincaré disk of fixed radius stands in for a fundamental domain,
/// weighted by the ratio of the surface area `4π(g−1)` to the disk area.
pub fn hyperbolic_product(genus: i64) -> Result<BuiltGeometry, GeometryError> {
    if genus < 2 {
        return Err(GeometryError::InvalidParameters(format!("genus must be at least 2, got {genus}")));
    }
    let r0 = HYPERBOLIC_CELL_RADIUS;
    let chart = Chart::cube(-r0, r0)?;
    let pot = -4.0 * (1.0 - z_abs_sq(0)).log() - 4.0 * (1.0 - z_abs_sq(1)).log();
    let kc = Arc::new(KahlerChart::new(pot, chart.clone()));
    let surface_area = 4.0 * PI * (genus - 1) as f64;
    let disk_area = 4.0 * PI * r0 * r0 / (1.0 - r0 * r0);
    let w = surface_area / disk_area;
    let chi = (2 - 2 * genus) * (2 - 2 * genus);
    Ok(BuiltGeometry {
        name: "hyperbolic_product".into(),
        description: format!("Σ_{genus} × Σ_{genus} with Gauss curvature −1 on each factor"),
        metric: kc.clone(),
        kahler: Some(kc.clone()),
        is_kahler: true,
        constant_scalar: true,
        topology: Some(SurfaceInvariants::new(chi, 0)),
        cells: vec![polar_disk_cell(kc, r0, w * w)],
        class: Some(class_or_err(hyperbolic_product_class(genus))?),
        chart,
    })
}

/// `ℂℙ²` with the Fubini–Study metric of scalar curvature 24. The unit
/// polydisk in one affine chart is one of three isometric cells.
pub fn fubini_study() -> Result<BuiltGeometry, GeometryError> {
    let chart = Chart::cube(-1.5, 1.5)?;
    let kc = Arc::new(KahlerChart::new((1.0 + z_abs_sq(0) + z_abs_sq(1)).log(), chart.clone()));
    Ok(BuiltGeometry {
        name: "fubini_study".into(),
        description: "complex projective plane, Fubini–Study metric".into(),
        metric: kc.clone(),
        kahler: Some(kc.clone()),
        is_kahler: true,
        constant_scalar: true,
        topology: Some(SurfaceInvariants::new(3, 1)),
        cells: vec![polar_disk_cell(kc, 1.0, 3.0)],
        class: Some(class_or_err(fubini_study_class())?),
        chart,
    })
}

/// `S² × S²` with the first factor replaced by the surface of revolution
/// `dθ² + sin²θ (1 + c sin²θ)² dφ²`. Kähler, non-constant scalar curvature.
pub fn deformed_sphere_product(c: f64) -> Result<BuiltGeometry, GeometryError> {
    if !(c > -0.9 && c < 10.0) {
        return Err(GeometryError::InvalidParameters(format!("deformation must lie in (-0.9, 10), got {c}")));
    }
    let th1 = Expr::coord(0);
    let profile = th1.clone().sin() * (1.0 + c * th1.sin().pow(2));
    let metric =
        Arc::new(ExprMetric::diagonal([Expr::c(1.0), profile.pow(2), Expr::c(1.0), Expr::coord(2).sin().pow(2)]));
    let tau = 2.0 * PI;
    let chart = Chart::new([(0.3, PI - 0.3), (0.0, tau), (0.3, PI - 0.3), (0.0, tau)], [false, true, false, true])?;
    // area of the first factor over 4π
    let area = 1.0 + 2.0 * c / 3.0;
    Ok(BuiltGeometry {
        name: "deformed_sphere_product".into(),
        description: format!("S² × S² with a surface of revolution of deformation {c} as first factor"),
        metric: metric.clone(),
        kahler: None,
        is_kahler: true,
        constant_scalar: c == 0.0,
        topology: Some(SurfaceInvariants::new(4, 0)),
        cells: vec![spherical_cell(metric)],
        class: Some(class_or_err(sphere_product_class(area.sqrt(), 1.0))?),
        chart,
    })
}

/// Flat-torus chart with `g = diag(1, e^{2A sin x1}, e^{−2A sin x1}, 1 + A cos x1)`,
/// a non-Kähler metric used to show the Kähler checks can fail.
pub fn warped_torus(amplitude: f64) -> Result<BuiltGeometry, GeometryError> {
    if !(amplitude.abs() < 0.9) {
        return Err(GeometryError::InvalidParameters(format!("amplitude must lie in (-0.9, 0.9), got {amplitude}")));
    }
    let chart = Chart::flat_torus();
    let x = Expr::coord(0);
    let metric = Arc::new(ExprMetric::diagonal([
        Expr::c(1.0),
        (2.0 * amplitude * x.clone().sin()).exp(),
        (-2.0 * amplitude * x.clone().sin()).exp(),
        1.0 + amplitude * x.cos(),
    ]));
    Ok(BuiltGeometry {
        name: "warped_torus".into(),
        description: format!("warped flat-torus chart with amplitude {amplitude}"),
        metric: metric.clone(),
        kahler: None,
        is_kahler: amplitude == 0.0,
        constant_scalar: amplitude == 0.0,
        topology: Some(SurfaceInvariants::new(0, 0)),
        cells: vec![torus_cell(metric, [false, true, true, true])],
        class: None,
        chart,
    })
}

/// User potential on the cube `[lo, hi]⁴`; integrals run over the box.
pub fn kahler_potential(
    potential: &str,
    lo: f64,
    hi: f64,
    topology: Option<SurfaceInvariants>,
) -> Result<BuiltGeometry, GeometryError> {
    let chart = Chart::cube(lo, hi)?;
    let kc = Arc::new(KahlerChart::parse(potential, chart.clone())?);
    Ok(BuiltGeometry {
        name: "kahler_potential".into(),
        description: format!("potential {} on [{lo}, {hi}]^4", kc.potential()),
        metric: kc.clone(),
        kahler: Some(kc.clone()),
        is_kahler: true,
        constant_scalar: false,
        topology,
        cells: vec![Cell { metric: kc, axes: [Axis::legendre(lo, hi); 4], map: CellMap::Identity, weight: 1.0 }],
        class: None,
        chart,
    })
}

pub type GeometryBuilder = Box<dyn Fn(&GeometryParams) -> Result<Arc<dyn Geometry>, GeometryError> + Send + Sync>;

struct Entry {
    description: &'static str,
    builder: GeometryBuilder,
}

/// Geometries selectable by name.
pub struct GeometryRegistry {
    entries: BTreeMap<String, Entry>,
}

impl GeometryRegistry {
    pub fn empty() -> Self {
        GeometryRegistry { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("flat_torus", "flat T⁴ = (ℝ²/2πℤ²)²", Box::new(|_| Ok(Arc::new(flat_torus()?))));
        r.register(
            "sphere_product",
            "round S²(a) × S²(b); params a, b",
            Box::new(|p| Ok(Arc::new(sphere_product(p.num("a", 1.0)?, p.num("b", 1.0)?)?))),
        );
        r.register(
            "hyperbolic_product",
            "Σ_g × Σ_g with K = −1; param genus",
            Box::new(|p| Ok(Arc::new(hyperbolic_product(p.int("genus", 2)?)?))),
        );
        r.register("fubini_study", "ℂℙ² with s = 24", Box::new(|_| Ok(Arc::new(fubini_study()?))));
        r.register(
            "deformed_sphere_product",
            "non-CSC Kähler S² × S²; param c",
            Box::new(|p| Ok(Arc::new(deformed_sphere_product(p.num("c", 0.3)?)?))),
        );
        r.register(
            "warped_torus",
            "non-Kähler warped torus; param amplitude",
            Box::new(|p| Ok(Arc::new(warped_torus(p.num("amplitude", 0.5)?)?))),
        );
        r.register(
            "kahler_potential",
            "user potential; params potential, lo, hi, optional chi and tau",
            Box::new(|p| {
                let pot = p
                    .text("potential")?
                    .ok_or_else(|| GeometryError::InvalidParameters("potential is required".into()))?;
                let topo = match (p.0.get("chi"), p.0.get("tau")) {
                    (Some(_), Some(_)) => Some(SurfaceInvariants::new(p.int("chi", 0)?, p.int("tau", 0)?)),
                    _ => None,
                };
                Ok(Arc::new(kahler_potential(pot, p.num("lo", -1.0)?, p.num("hi", 1.0)?, topo)?))
            }),
        );
        r
    }

    pub fn register(&mut self, name: &str, description: &'static str, builder: GeometryBuilder) {
        self.entries.insert(name.to_string(), Entry { description, builder });
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, &'static str)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e.description))
    }

    pub fn build(&self, name: &str, params: &GeometryParams) -> Result<Arc<dyn Geometry>, GeometryError> {
        let e =
            self.entries.get(name).ok_or_else(|| GeometryError::Unsupported(format!("unknown geometry '{name}'")))?;
        (e.builder)(params)
    }
}

impl Default for GeometryRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart_geometry::frame_data;
    use crate::form_algebra::{pointwise_norms, Orientation};

    #[test]
    fn registry_builds_every_builtin() {
        let r = GeometryRegistry::with_builtins();
        let p = GeometryParams::new().with("potential", ParamValue::Text("|z1|^2 + |z2|^2".into()));
        for (name, _) in r.names() {
            let g = r.build(name, &p).unwrap();
            assert_eq!(g.name(), name);
            assert!(!g.cells().is_empty());
            let x = g.samples(2)[0];
            frame_data(&*g.metric(), &x).unwrap();
        }
        assert!(r.build("klein_bottle", &p).is_err());
    }

    #[test]
    fn polar_and_stereographic_charts_agree() {
        let g = sphere_product(1.0, 2.0).unwrap();
        let a = frame_data(&*g.metric(), &[0.3, -0.2, 0.5, 0.1]).unwrap();
        let b = frame_data(&*g.cells()[0].metric, &[1.1, 0.0, 2.0, 0.4]).unwrap();
        assert!((a.scalar - 2.5).abs() < 1e-10);
        assert!((b.scalar - 2.5).abs() < 1e-10);
    }

    #[test]
    fn deformed_factor_has_varying_curvature() {
        let g = deformed_sphere_product(0.3).unwrap();
        let s: Vec<f64> = g.samples(3).iter().map(|x| frame_data(&*g.metric(), x).unwrap().scalar).collect();
        let spread = s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 0.1);
    }

    #[test]
    fn warped_torus_is_not_kahler() {
        let g = warped_torus(0.5).unwrap();
        let worst = g
            .samples(3)
            .iter()
            .map(|x| {
                let n = pointwise_norms(&frame_data(&*g.metric(), x).unwrap(), Orientation::Standard);
                (n.w_plus_sq - n.scalar * n.scalar / 24.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-2, "{worst}");
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(sphere_product(0.0, 1.0).is_err());
        assert!(hyperbolic_product(1).is_err());
        assert!(warped_torus(2.0).is_err());
        assert!(GeometryParams::new().with("a", ParamValue::Text("x".into())).num("a", 1.0).is_err());
    }
}
