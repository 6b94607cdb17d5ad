//! Curvature integrals over the built-in geometries and the integral
//! identities they satisfy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chart_geometry::{
    frame_data, scalar_linearization, to_na, volume_linearization, ChartSymmetry, ComponentPerturbation,
    PerturbationBlock, PerturbedMetric, Point, PointFrameData, ProfilePerturbation, SymmetricPerturbation,
};
use crate::cohomology::SurfaceInvariants;
use crate::error::GeometryError;
use crate::expr::Expr;
use crate::form_algebra::{pointwise_norms, Orientation};
use crate::geometry::Geometry;
use crate::jet::DIM;
use crate::quadrature::{self, Cell, QuadratureResult};
use crate::tolerances::CONVERGENCE_FLOOR;

fn metric_invariant(_: &ChartSymmetry) -> bool {
    true
}

/// `∫ f dμ` for a pointwise function of the curvature data.
pub fn integrate(
    geometry: &dyn Geometry,
    f: &(dyn Fn(&PointFrameData) -> f64 + Sync),
    resolution: usize,
) -> Result<QuadratureResult, GeometryError> {
    let density = |cell: &Cell, x: &Point| {
        let fr = frame_data(&*cell.metric, x)?;
        Ok(vec![f(&fr) * fr.vol])
    };
    quadrature::integrate(&geometry.cells(), resolution, 1, &metric_invariant, &density)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub resolution: usize,
    pub nodes: usize,
    pub volume: f64,
    pub total_scalar: f64,
    pub action_s2: f64,
    pub action_ric2: f64,
    pub action_riem2: f64,
    /// `∫(s − √6|W₊|)² dμ`
    pub action_sw: f64,
    pub w_plus_sq: f64,
    pub w_minus_sq: f64,
    pub ricci_traceless_sq: f64,
    /// `∫(s − |s|/2)² dμ`, equal to `action_sw` for Kähler metrics.
    pub sw_kahler_prediction: f64,
    /// Quadrature error estimates by field name.
    pub errors: BTreeMap<String, f64>,
    /// Identity residuals, present when the topology is known.
    pub identity_residuals: BTreeMap<String, f64>,
}

const FIELDS: [&str; 10] = [
    "volume",
    "total_scalar",
    "action_s2",
    "action_ric2",
    "action_riem2",
    "action_sw",
    "w_plus_sq",
    "w_minus_sq",
    "ricci_traceless_sq",
    "sw_kahler_prediction",
];

fn densities(fr: &PointFrameData, orientation: Orientation) -> Vec<f64> {
    let n = pointwise_norms(fr, orientation);
    let s = n.scalar;
    let sw = s - 6f64.sqrt() * n.w_plus_sq.max(0.0).sqrt();
    let kp = s - 0.5 * s.abs();
    [
        1.0,
        s,
        s * s,
        n.ricci_traceless_sq + s * s / 4.0,
        n.riemann_sq,
        sw * sw,
        n.w_plus_sq,
        n.w_minus_sq,
        n.ricci_traceless_sq,
        kp * kp,
    ]
    .into_iter()
    .map(|v| v * fr.vol)
    .collect()
}

pub fn functional_report(geometry: &dyn Geometry, resolution: usize) -> Result<FunctionalReport, GeometryError> {
    let density = |cell: &Cell, x: &Point| Ok(densities(&frame_data(&*cell.metric, x)?, Orientation::Standard));
    let q = quadrature::integrate(&geometry.cells(), resolution, FIELDS.len(), &metric_invariant, &density)?;
    let v = &q.values;
    if !(v[0] > 0.0) {
        return Err(GeometryError::InvalidParameters(format!("non-positive volume {}", v[0])));
    }
    let mut report = FunctionalReport {
        resolution,
        nodes: q.nodes,
        volume: v[0],
        total_scalar: v[1],
        action_s2: v[2],
        action_ric2: v[3],
        action_riem2: v[4],
        action_sw: v[5],
        w_plus_sq: v[6],
        w_minus_sq: v[7],
        ricci_traceless_sq: v[8],
        sw_kahler_prediction: v[9],
        errors: FIELDS.iter().map(|k| k.to_string()).zip(q.errors.iter().copied()).collect(),
        identity_residuals: BTreeMap::new(),
    };
    if let Some(inv) = geometry.topology() {
        report.identity_residuals = identity_residuals(&report, &inv);
    }
    Ok(report)
}

/// `(1/4π²) ∫(s²/24 + 2|W₊|² − |r̊|²/2) dμ`
pub fn gauss_bonnet_value(r: &FunctionalReport) -> f64 {
    (r.action_s2 / 24.0 + 2.0 * r.w_plus_sq - 0.5 * r.ricci_traceless_sq) / (4.0 * PI * PI)
}

/// `|value − (2χ + 3τ)|`.
pub fn gauss_bonnet_residual(r: &FunctionalReport, inv: &SurfaceInvariants) -> f64 {
    (gauss_bonnet_value(r) - inv.c1_sq() as f64).abs()
}

/// Both sides of `∫|r|² = −8π²(2χ+3τ) + 8∫(s²/24 + |W₊|²/2)`.
pub fn ricci_identity_sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64) {
    let rhs = -8.0 * PI * PI * inv.c1_sq() as f64 + 8.0 * (r.action_s2 / 24.0 + 0.5 * r.w_plus_sq);
    (r.action_ric2, rhs)
}

/// `|LHS − RHS| / 8π²`.
pub fn ricci_identity_residual(r: &FunctionalReport, inv: &SurfaceInvariants) -> f64 {
    let (l, rh) = ricci_identity_sides(r, inv);
    (l - rh).abs() / (8.0 * PI * PI)
}

/// Both sides of `∫|𝓡|² = −8π²(χ+3τ) + 2∫(s²/24 + 2|W₊|²)`.
pub fn riemann_identity_sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64) {
    let rhs = -8.0 * PI * PI * (inv.chi + 3 * inv.tau) as f64 + 2.0 * (r.action_s2 / 24.0 + 2.0 * r.w_plus_sq);
    (r.action_riem2, rhs)
}

pub fn riemann_identity_residual(r: &FunctionalReport, inv: &SurfaceInvariants) -> f64 {
    let (l, rh) = riemann_identity_sides(r, inv);
    (l - rh).abs() / (8.0 * PI * PI)
}

/// `(1/12π²) ∫(|W₊|² − |W₋|²) dμ`
pub fn signature_value(r: &FunctionalReport) -> f64 {
    (r.w_plus_sq - r.w_minus_sq) / (12.0 * PI * PI)
}

pub fn signature_residual(r: &FunctionalReport, inv: &SurfaceInvariants) -> f64 {
    (signature_value(r) - inv.tau as f64).abs()
}

pub fn identity_residuals(r: &FunctionalReport, inv: &SurfaceInvariants) -> BTreeMap<String, f64> {
    [
        ("gauss_bonnet", gauss_bonnet_residual(r, inv)),
        ("ricci_identity", ricci_identity_residual(r, inv)),
        ("riemann_identity", riemann_identity_residual(r, inv)),
        ("signature", signature_residual(r, inv)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn topology_or(geometry: &dyn Geometry, given: Option<SurfaceInvariants>) -> Result<SurfaceInvariants, GeometryError> {
    given.or_else(|| geometry.topology()).ok_or_else(|| {
        GeometryError::Unsupported(format!("topology of '{}' is unknown; supply chi and tau", geometry.name()))
    })
}

pub fn gauss_bonnet_check(
    geometry: &dyn Geometry,
    chi: i64,
    tau: i64,
    resolution: usize,
) -> Result<f64, GeometryError> {
    let r = functional_report(geometry, resolution)?;
    Ok(gauss_bonnet_residual(&r, &SurfaceInvariants::new(chi, tau)))
}

pub fn ricci_identity_check(
    geometry: &dyn Geometry,
    chi: i64,
    tau: i64,
    resolution: usize,
) -> Result<f64, GeometryError> {
    let r = functional_report(geometry, resolution)?;
    Ok(ricci_identity_residual(&r, &SurfaceInvariants::new(chi, tau)))
}

pub fn riemann_identity_check(
    geometry: &dyn Geometry,
    chi: i64,
    tau: i64,
    resolution: usize,
) -> Result<f64, GeometryError> {
    let r = functional_report(geometry, resolution)?;
    Ok(riemann_identity_residual(&r, &SurfaceInvariants::new(chi, tau)))
}

pub fn signature_check(geometry: &dyn Geometry, tau: i64, resolution: usize) -> Result<f64, GeometryError> {
    let r = functional_report(geometry, resolution)?;
    Ok((signature_value(&r) - tau as f64).abs())
}

/// Residuals of all four identities at each resolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub residuals: BTreeMap<String, f64>,
}

pub fn convergence_table(
    geometry: &dyn Geometry,
    topology: Option<SurfaceInvariants>,
    resolutions: &[usize],
) -> Result<Vec<ConvergenceRow>, GeometryError> {
    let inv = topology_or(geometry, topology)?;
    resolutions
        .iter()
        .map(|&n| {
            let r = functional_report(geometry, n)?;
            Ok(ConvergenceRow { resolution: n, residuals: identity_residuals(&r, &inv) })
        })
        .collect()
}

/// Each doubling of the resolution reduces the residual fourfold, unless
/// the residual is already below [`CONVERGENCE_FLOOR`].
pub fn is_second_order(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= CONVERGENCE_FLOOR || w[1] <= w[0] / 4.0)
}

/// Column of a convergence table.
pub fn column(table: &[ConvergenceRow], name: &str) -> Vec<f64> {
    table.iter().map(|r| r.residuals.get(name).copied().unwrap_or(f64::NAN)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalabiReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|rhs|, 1)`
    pub relative: f64,
}

/// Compares `∫s² dμ` against `32π² (c₁·[ω])²/[ω]²`.
pub fn calabi_equality_check(report: &FunctionalReport, c1_dot_omega: f64, omega_sq: f64) -> CalabiReport {
    let rhs = 32.0 * PI * PI * c1_dot_omega * c1_dot_omega / omega_sq;
    let lhs = report.action_s2;
    CalabiReport { lhs, rhs, relative: (lhs - rhs).abs() / rhs.abs().max(1.0) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// `|lhs − ∫(s − |s|/2)²| / max(that, 1)`: zero for Kähler metrics.
    pub kahler_identity_relative: f64,
}

/// `∫(s − √6|W₊|)² dμ − rhs`.
pub fn sw_integrand_bound(report: &FunctionalReport, rhs: f64) -> SwReport {
    let p = report.sw_kahler_prediction;
    SwReport {
        lhs: report.action_sw,
        rhs,
        margin: report.action_sw - rhs,
        kahler_identity_relative: (report.action_sw - p).abs() / p.abs().max(1.0),
    }
}

/// Metric variation, written in the coordinates of the integration cell.
#[derive(Clone, Debug)]
pub enum PerturbationSpec {
    /// `h = v · g`, optionally restricted to one factor.
    Profile {
        profile: Expr,
        block: PerturbationBlock,
    },
    Components(Box<[[Expr; DIM]; DIM]>),
}

impl PerturbationSpec {
    pub fn build(&self, cell: &Cell) -> Box<dyn SymmetricPerturbation> {
        match self {
            PerturbationSpec::Profile { profile, block } => {
                Box::new(ProfilePerturbation { profile: profile.clone(), block: *block, base: cell.metric.clone() })
            }
            PerturbationSpec::Components(c) => Box::new(ComponentPerturbation::new((**c).clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifferenceRow {
    pub t: f64,
    pub derivative: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstVariationReport {
    /// `∫(2sṡ + ½s² tr h) dμ`
    pub analytic: f64,
    /// `−2s∫⟨h, r̊⟩ dμ` with `s` the mean scalar curvature; equals
    /// `analytic` when `s` is constant.
    pub traceless_form: f64,
    pub rows: Vec<FiniteDifferenceRow>,
    /// `error(t_i) / error(t_{i+1})` over consecutive halvings of `t`.
    pub richardson: Vec<f64>,
}

impl FirstVariationReport {
    /// Relative error at the row nearest to `t`, or absolute error when the
    /// analytic derivative vanishes.
    pub fn relative_error_at(&self, t: f64) -> Option<f64> {
        let row = self.rows.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))?;
        Some(row.error / self.analytic.abs().max(1.0))
    }
}

/// Central finite differences of `∫s² dμ` along `g + th` against the
/// linearized integrand, over each `t` in `ts`.
pub fn first_variation_check(
    geometry: &dyn Geometry,
    h: &PerturbationSpec,
    ts: &[f64],
    resolution: usize,
) -> Result<FirstVariationReport, GeometryError> {
    let cells = geometry.cells();
    let hs: Vec<Box<dyn SymmetricPerturbation>> = cells.iter().map(|c| h.build(c)).collect();
    let index_of = |cell: &Cell| cells.iter().position(|c| std::ptr::eq(c, cell)).expect("own cell");
    let invariant = |s: &ChartSymmetry| hs.iter().all(|h| h.invariant_under(s));

    let linear = |cell: &Cell, x: &Point| {
        let h = &hs[index_of(cell)];
        let fr = frame_data(&*cell.metric, x)?;
        let sdot = scalar_linearization(&*cell.metric, &**h, x)?;
        let vdot = volume_linearization(&*cell.metric, &**h, x)?;
        let hv = to_na(&h.jet(x)?.value);
        let h_r0 = (fr.g_inv * hv * fr.g_inv).component_mul(&fr.ricci_traceless).sum();
        Ok(vec![
            2.0 * fr.scalar * sdot * fr.vol + fr.scalar * fr.scalar * vdot,
            fr.scalar * fr.vol,
            fr.vol,
            h_r0 * fr.vol,
        ])
    };
    let lin = quadrature::integrate(&cells, resolution, 4, &invariant, &linear)?;
    let analytic = lin.values[0];
    let mean_s = lin.values[1] / lin.values[2];
    let traceless_form = -2.0 * mean_s * lin.values[3];

    let action_at = |t: f64| -> Result<f64, GeometryError> {
        let f = |cell: &Cell, x: &Point| {
            let h = &hs[index_of(cell)];
            let pm = PerturbedMetric { base: &*cell.metric, h: &**h, t };
            let fr = frame_data(&pm, x)?;
            Ok(vec![fr.scalar * fr.scalar * fr.vol])
        };
        Ok(quadrature::integrate(&cells, resolution, 1, &invariant, &f)?.value())
    };
    let rows = ts
        .iter()
        .map(|&t| {
            let d = (action_at(t)? - action_at(-t)?) / (2.0 * t);
            Ok(FiniteDifferenceRow { t, derivative: d, error: (d - analytic).abs() })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;
    let richardson =
        rows.windows(2).filter(|w| (w[0].t / w[1].t - 2.0).abs() < 1e-9).map(|w| w[0].error / w[1].error).collect();
    Ok(FirstVariationReport { analytic, traceless_form, rows, richardson })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{flat_torus, fubini_study, sphere_product};

    #[test]
    fn flat_torus_volume_is_exact() {
        let g = flat_torus().unwrap();
        for n in [1, 4, 64] {
            let q = integrate(&g, &|_| 1.0, n).unwrap();
            assert!((q.value() - (2.0 * PI).powi(4)).abs() < 1e-9 * (2.0 * PI).powi(4));
        }
    }

    #[test]
    fn unit_sphere_product_volume() {
        let g = sphere_product(1.0, 1.0).unwrap();
        let q = integrate(&g, &|_| 1.0, 64).unwrap();
        let want = 16.0 * PI * PI;
        assert!((q.value() - want).abs() < 1e-8 * want);
    }

    #[test]
    fn fubini_study_volume_is_stable() {
        let g = fubini_study().unwrap();
        let a = integrate(&g, &|_| 1.0, 32).unwrap().value();
        let b = integrate(&g, &|_| 1.0, 64).unwrap().value();
        assert!((a - b).abs() < 1e-5 * b);
        assert!((b - PI * PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn unit_sphere_product_identities() {
        let g = sphere_product(1.0, 1.0).unwrap();
        let r = functional_report(&g, 32).unwrap();
        let pi2 = PI * PI;
        assert!((gauss_bonnet_value(&r) - 8.0).abs() < 1e-6);
        let (l, rh) = ricci_identity_sides(&r, &g.topology().unwrap());
        assert!((l - 64.0 * pi2).abs() < 1e-6 * pi2 && (rh - 64.0 * pi2).abs() < 1e-6 * pi2);
        let (l, rh) = riemann_identity_sides(&r, &g.topology().unwrap());
        assert!((l - 32.0 * pi2).abs() < 1e-5 * pi2 && (rh - 32.0 * pi2).abs() < 1e-5 * pi2);
        // s > 0: s − √6|W₊| = s/2
        assert!((r.action_sw - 64.0 * pi2).abs() < 1e-6 * pi2);
        let c = calabi_equality_check(&r, 16.0 * PI, 32.0 * pi2);
        assert!((c.rhs - 256.0 * pi2).abs() < 1e-9 * pi2 && c.relative < 1e-8);
    }
}
