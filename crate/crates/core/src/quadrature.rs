//! Product quadrature over integration cells.
//!
//! A cell is a parameter box with a rule per axis, a map into the chart and
//! a constant weight. Axes carrying a symmetry of the integrand are
//! collapsed to a single node times the axis length.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart_geometry::{ChartSymmetry, MetricField, Point};
use crate::error::GeometryError;
use crate::jet::DIM;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisRule {
    GaussLegendre,
    /// Trapezoid rule on a periodic axis.
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub rule: AxisRule,
    pub lo: f64,
    pub hi: f64,
    /// Isometry of the cell metric moving along this axis.
    pub symmetry: Option<ChartSymmetry>,
}

impl Axis {
    pub fn legendre(lo: f64, hi: f64) -> Self {
        Axis { rule: AxisRule::GaussLegendre, lo, hi, symmetry: None }
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Axis { rule: AxisRule::Periodic, lo, hi, symmetry: None }
    }

    pub fn with_symmetry(mut self, s: ChartSymmetry) -> Self {
        self.symmetry = Some(s);
        self
    }

    fn rule_nodes(&self, n: usize) -> Vec<(f64, f64)> {
        let len = self.hi - self.lo;
        match self.rule {
            AxisRule::Periodic => {
                let h = len / n as f64;
                (0..n).map(|k| (self.lo + k as f64 * h, h)).collect()
            }
            AxisRule::GaussLegendre => {
                gauss_legendre(n).into_iter().map(|(x, w)| (self.lo + 0.5 * (x + 1.0) * len, 0.5 * len * w)).collect()
            }
        }
    }
}

/// How parameters map into chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMap {
    Identity,
    /// `(r1, φ1, r2, φ2) ↦ (r1 cos φ1, r1 sin φ1, r2 cos φ2, r2 sin φ2)`.
    Polar,
}

impl CellMap {
    /// Chart point and Jacobian determinant.
    pub fn apply(&self, u: &Point) -> (Point, f64) {
        match self {
            CellMap::Identity => (*u, 1.0),
            CellMap::Polar => {
                ([u[0] * u[1].cos(), u[0] * u[1].sin(), u[2] * u[3].cos(), u[2] * u[3].sin()], u[0] * u[2])
            }
        }
    }
}

#[derive(Clone)]
pub struct Cell {
    pub metric: Arc<dyn MetricField>,
    pub axes: [Axis; DIM],
    pub map: CellMap,
    /// Multiplies the cell integral, e.g. the number of isometric copies.
    pub weight: f64,
}

impl std::fmt::Debug for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cell").field("axes", &self.axes).field("map", &self.map).field("weight", &self.weight).finish()
    }
}

/// A quadrature node: chart point and total weight (rule × Jacobian × cell).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub point: Point,
    pub weight: f64,
}

impl Cell {
    /// Nodes at `n` per axis; axes whose symmetry passes `invariant` use a
    /// single node.
    pub fn nodes(&self, n: usize, invariant: &dyn Fn(&ChartSymmetry) -> bool) -> Vec<Node> {
        let per_axis: Vec<Vec<(f64, f64)>> = self
            .axes
            .iter()
            .map(|a| match a.symmetry {
                Some(s) if invariant(&s) => {
                    let mid = match a.rule {
                        AxisRule::Periodic => a.lo,
                        AxisRule::GaussLegendre => 0.5 * (a.lo + a.hi),
                    };
                    vec![(mid, a.hi - a.lo)]
                }
                _ => a.rule_nodes(n),
            })
            .collect();
        let mut out = Vec::with_capacity(per_axis.iter().map(Vec::len).product());
        for &(u0, w0) in &per_axis[0] {
            for &(u1, w1) in &per_axis[1] {
                for &(u2, w2) in &per_axis[2] {
                    for &(u3, w3) in &per_axis[3] {
                        let (point, jac) = self.map.apply(&[u0, u1, u2, u3]);
                        out.push(Node { point, weight: w0 * w1 * w2 * w3 * jac * self.weight });
                    }
                }
            }
        }
        out
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

/// Pairwise summation in index order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    /// `|I(n) − I(n/2)|` per component.
    pub errors: Vec<f64>,
    pub resolution: usize,
    pub nodes: usize,
}

impl QuadratureResult {
    pub fn value(&self) -> f64 {
        self.values[0]
    }

    pub fn error(&self) -> f64 {
        self.errors[0]
    }
}

/// Integrand returning `k` coordinate densities at a chart point of a cell.
pub type Density<'a> = dyn Fn(&Cell, &Point) -> Result<Vec<f64>, GeometryError> + Sync + 'a;

fn integrate_once(
    cells: &[Cell],
    n: usize,
    k: usize,
    invariant: &(dyn Fn(&ChartSymmetry) -> bool + Sync),
    f: &Density<'_>,
) -> Result<(Vec<f64>, usize), GeometryError> {
    let mut totals = vec![0.0; k];
    let mut count = 0;
    for cell in cells {
        let nodes = cell.nodes(n, invariant);
        count += nodes.len();
        let vals: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|nd| {
                let v = f(cell, &nd.point)?;
                if v.len() != k || v.iter().any(|x| !x.is_finite()) {
                    return Err(GeometryError::OutOfDomain { point: nd.point });
                }
                Ok(v.into_iter().map(|x| x * nd.weight).collect())
            })
            .collect::<Result<_, _>>()?;
        for (j, t) in totals.iter_mut().enumerate() {
            let col: Vec<f64> = vals.iter().map(|v| v[j]).collect();
            *t += pairwise_sum(&col);
        }
    }
    Ok((totals, count))
}

/// Integrates `k` densities at resolution `n` and estimates the error from
/// a second pass at `n/2`.
pub fn integrate(
    cells: &[Cell],
    n: usize,
    k: usize,
    invariant: &(dyn Fn(&ChartSymmetry) -> bool + Sync),
    f: &Density<'_>,
) -> Result<QuadratureResult, GeometryError> {
    if n == 0 {
        return Err(GeometryError::InvalidParameters("quadrature resolution must be positive".into()));
    }
    let (values, nodes) = integrate_once(cells, n, k, invariant, f)?;
    let errors = if n >= 2 {
        let (coarse, _) = integrate_once(cells, n / 2, k, invariant, f)?;
        values.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).collect()
    } else {
        vec![f64::INFINITY; k]
    };
    Ok(QuadratureResult { values, errors, resolution: n, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart_geometry::ExprMetric;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let r = gauss_legendre(n);
            let w: f64 = r.iter().map(|p| p.1).sum();
            assert!((w - 2.0).abs() < 1e-13, "n = {n}");
            let deg = 2 * n - 1;
            let got: f64 = r.iter().map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn collapse_matches_full_product() {
        let cell = Cell {
            metric: Arc::new(ExprMetric::identity()),
            axes: [
                Axis::legendre(0.0, 1.0),
                Axis::periodic(0.0, 2.0 * std::f64::consts::PI).with_symmetry(ChartSymmetry::Rotation(0)),
                Axis::legendre(0.0, 1.0),
                Axis::periodic(0.0, 2.0 * std::f64::consts::PI).with_symmetry(ChartSymmetry::Rotation(1)),
            ],
            map: CellMap::Polar,
            weight: 1.0,
        };
        // ∫ |z1|² over the unit bidisk = (π/2) · π
        let f = |_: &Cell, x: &Point| Ok(vec![x[0] * x[0] + x[1] * x[1]]);
        let want = 0.5 * std::f64::consts::PI.powi(2);
        let full = integrate(std::slice::from_ref(&cell), 8, 1, &|_| false, &f).unwrap();
        let fast = integrate(&[cell], 8, 1, &|_| true, &f).unwrap();
        assert!((full.value() - want).abs() < 1e-12);
        assert!((fast.value() - want).abs() < 1e-12);
        assert!(fast.nodes < full.nodes);
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }
}
