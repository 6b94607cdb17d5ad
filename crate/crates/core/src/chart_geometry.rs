//! Coordinate charts, metric fields and the Levi-Civita curvature pipeline.
//!
//! Sign conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, with
//! `R_abcd = g(∂_a, R(∂_c, ∂_d) ∂_b)`, so `R_1212 > 0` on a round sphere,
//! and `r_ab = R^c_acb`.

use std::sync::Arc;

use nalgebra::Matrix4;

use crate::error::GeometryError;
use crate::expr::Expr;
use crate::jet::{seed, Jet2, DIM};

pub type Point = [f64; DIM];
pub type Mat4 = [[f64; DIM]; DIM];
pub type Tensor3 = [[[f64; DIM]; DIM]; DIM];
pub type Tensor4 = [[[[f64; DIM]; DIM]; DIM]; DIM];

pub(crate) const ZERO3: Tensor3 = [[[0.0; DIM]; DIM]; DIM];
pub(crate) const ZERO4: Tensor4 = [[[[0.0; DIM]; DIM]; DIM]; DIM];

/// A coordinate box, possibly periodic along some axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    bounds: [(f64, f64); DIM],
    periodic: [bool; DIM],
    pub quadrature_resolution: [usize; DIM],
    /// Step used by finite-difference exterior derivatives.
    pub fd_step: f64,
}

impl Chart {
    pub fn new(bounds: [(f64, f64); DIM], periodic: [bool; DIM]) -> Result<Self, GeometryError> {
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if !(hi - lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
                return Err(GeometryError::InvalidChart(format!("axis {i} has non-positive length [{lo}, {hi}]")));
            }
        }
        Ok(Chart {
            bounds,
            periodic,
            quadrature_resolution: [crate::tolerances::DEFAULT_RESOLUTION; DIM],
            fd_step: 1e-3,
        })
    }

    pub fn cube(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        Chart::new([(lo, hi); DIM], [false; DIM])
    }

    pub fn flat_torus() -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Chart::new([(0.0, tau); DIM], [true; DIM]).expect("valid torus chart")
    }

    pub const fn dimension(&self) -> usize {
        DIM
    }

    pub fn bounds(&self) -> &[(f64, f64); DIM] {
        &self.bounds
    }

    pub fn periodic(&self) -> &[bool; DIM] {
        &self.periodic
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..DIM).all(|i| self.periodic[i] || (x[i] >= self.bounds[i].0 && x[i] <= self.bounds[i].1))
    }

    /// Maps periodic coordinates back into the fundamental box.
    pub fn wrap(&self, x: &Point) -> Point {
        let mut y = *x;
        for i in 0..DIM {
            if self.periodic[i] {
                let (lo, hi) = self.bounds[i];
                let len = hi - lo;
                y[i] = lo + (y[i] - lo).rem_euclid(len);
            }
        }
        y
    }

    /// Tensor-product grid with `n` points per axis, one cell of margin on
    /// non-periodic axes.
    pub fn sample_grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        let axis: Vec<Vec<f64>> = (0..DIM)
            .map(|i| {
                let (lo, hi) = self.bounds[i];
                if self.periodic[i] {
                    let step = (hi - lo) / n as f64;
                    (0..n).map(|k| lo + (k as f64 + 0.5) * step).collect()
                } else {
                    let step = (hi - lo) / (n + 1) as f64;
                    (0..n).map(|k| lo + (k + 1) as f64 * step).collect()
                }
            })
            .collect();
        let mut out = Vec::with_capacity(n.pow(DIM as u32));
        for &a in &axis[0] {
            for &b in &axis[1] {
                for &c in &axis[2] {
                    for &d in &axis[3] {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }
}

/// Value and first two coordinate derivatives of a symmetric 2-tensor field.
/// `d[e][a][b] = ∂_e T_ab`, `dd[e][f][a][b] = ∂_e ∂_f T_ab`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorJet {
    pub value: Mat4,
    pub d: Tensor3,
    pub dd: Tensor4,
}

impl TensorJet {
    pub fn zero() -> Self {
        TensorJet { value: [[0.0; DIM]; DIM], d: ZERO3, dd: ZERO4 }
    }

    pub fn from_jets(m: &[[Jet2<f64>; DIM]; DIM]) -> Self {
        let mut t = TensorJet::zero();
        for a in 0..DIM {
            for b in 0..DIM {
                t.value[a][b] = m[a][b].v;
                for e in 0..DIM {
                    t.d[e][a][b] = m[a][b].g[e];
                    for f in 0..DIM {
                        t.dd[e][f][a][b] = m[a][b].h[e][f];
                    }
                }
            }
        }
        t
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &TensorJet, k: f64) -> TensorJet {
        let mut t = self.clone();
        for a in 0..DIM {
            for b in 0..DIM {
                t.value[a][b] += k * other.value[a][b];
                for e in 0..DIM {
                    t.d[e][a][b] += k * other.d[e][a][b];
                    for f in 0..DIM {
                        t.dd[e][f][a][b] += k * other.dd[e][f][a][b];
                    }
                }
            }
        }
        t
    }

    /// Product with a scalar field given as a jet.
    pub fn times_scalar(&self, u: &Jet2<f64>) -> TensorJet {
        let mut t = TensorJet::zero();
        for a in 0..DIM {
            for b in 0..DIM {
                let v = self.value[a][b];
                t.value[a][b] = u.v * v;
                for e in 0..DIM {
                    t.d[e][a][b] = u.g[e] * v + u.v * self.d[e][a][b];
                    for f in 0..DIM {
                        t.dd[e][f][a][b] = u.h[e][f] * v
                            + u.g[e] * self.d[f][a][b]
                            + u.g[f] * self.d[e][a][b]
                            + u.v * self.dd[e][f][a][b];
                    }
                }
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.value.iter().flatten().all(|v| v.is_finite())
            && self.d.iter().flatten().flatten().all(|v| v.is_finite())
            && self.dd.iter().flatten().flatten().flatten().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    Numeric,
}

/// A smooth Riemannian metric on a chart with access to two derivatives.
pub trait MetricField: Send + Sync {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError>;

    fn value(&self, x: &Point) -> Result<Mat4, GeometryError> {
        Ok(self.jet(x)?.value)
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Analytic
    }
}

impl<M: MetricField + ?Sized> MetricField for Arc<M> {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        (**self).jet(x)
    }
    fn value(&self, x: &Point) -> Result<Mat4, GeometryError> {
        (**self).value(x)
    }
    fn derivative_mode(&self) -> DerivativeMode {
        (**self).derivative_mode()
    }
}

/// Metric whose components are closed-form expressions of the coordinates.
#[derive(Clone, Debug)]
pub struct ExprMetric {
    comps: [[Expr; DIM]; DIM],
}

impl ExprMetric {
    /// Builds from the upper triangle; entries below the diagonal are ignored.
    pub fn new(upper: [[Expr; DIM]; DIM]) -> Self {
        let comps = std::array::from_fn(|a| {
            std::array::from_fn(|b| if a <= b { upper[a][b].clone() } else { upper[b][a].clone() })
        });
        ExprMetric { comps }
    }

    pub fn diagonal(d: [Expr; DIM]) -> Self {
        let mut upper: [[Expr; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::c(0.0)));
        for (i, e) in d.into_iter().enumerate() {
            upper[i][i] = e;
        }
        ExprMetric::new(upper)
    }

    pub fn identity() -> Self {
        ExprMetric::diagonal(std::array::from_fn(|_| Expr::c(1.0)))
    }

    pub fn component(&self, a: usize, b: usize) -> &Expr {
        &self.comps[a][b]
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.comps.iter().flatten().any(|e| e.depends_on(i))
    }
}

impl MetricField for ExprMetric {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        let s = seed(*x);
        let m: [[Jet2<f64>; DIM]; DIM] = std::array::from_fn(|a| {
            std::array::from_fn(|b| if a <= b { self.comps[a][b].eval(&s) } else { Jet2::constant(0.0) })
        });
        let mut m = m;
        for a in 0..DIM {
            for b in 0..a {
                m[a][b] = m[b][a].clone();
            }
        }
        let t = TensorJet::from_jets(&m);
        if !t.is_finite() {
            return Err(GeometryError::OutOfDomain { point: *x });
        }
        Ok(t)
    }

    fn value(&self, x: &Point) -> Result<Mat4, GeometryError> {
        let v: Mat4 = std::array::from_fn(|a| std::array::from_fn(|b| self.comps[a][b].eval(x)));
        if v.iter().flatten().all(|c| c.is_finite()) {
            Ok(v)
        } else {
            Err(GeometryError::OutOfDomain { point: *x })
        }
    }
}

/// Fallback for metrics known only pointwise: fourth-order central
/// differences with a configurable step.
pub struct NumericMetric<F> {
    f: F,
    step: f64,
}

impl<F> NumericMetric<F>
where
    F: Fn(&Point) -> Mat4 + Send + Sync,
{
    pub fn new(f: F, step: f64) -> Self {
        NumericMetric { f, step }
    }

    fn at(&self, x: &Point, shifts: &[(usize, f64)]) -> Mat4 {
        let mut y = *x;
        for &(i, s) in shifts {
            y[i] += s;
        }
        (self.f)(&y)
    }
}

impl<F> MetricField for NumericMetric<F>
where
    F: Fn(&Point) -> Mat4 + Send + Sync,
{
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        let h = self.step;
        let mut t = TensorJet::zero();
        t.value = (self.f)(x);
        for e in 0..DIM {
            let p1 = self.at(x, &[(e, h)]);
            let m1 = self.at(x, &[(e, -h)]);
            let p2 = self.at(x, &[(e, 2.0 * h)]);
            let m2 = self.at(x, &[(e, -2.0 * h)]);
            for a in 0..DIM {
                for b in 0..DIM {
                    t.d[e][a][b] = (-p2[a][b] + 8.0 * p1[a][b] - 8.0 * m1[a][b] + m2[a][b]) / (12.0 * h);
                    t.dd[e][e][a][b] = (-p2[a][b] + 16.0 * p1[a][b] - 30.0 * t.value[a][b] + 16.0 * m1[a][b]
                        - m2[a][b])
                        / (12.0 * h * h);
                }
            }
        }
        let mixed = |e: usize, f: usize, k: f64| -> Mat4 {
            let pp = self.at(x, &[(e, k), (f, k)]);
            let pm = self.at(x, &[(e, k), (f, -k)]);
            let mp = self.at(x, &[(e, -k), (f, k)]);
            let mm = self.at(x, &[(e, -k), (f, -k)]);
            std::array::from_fn(|a| {
                std::array::from_fn(|b| (pp[a][b] - pm[a][b] - mp[a][b] + mm[a][b]) / (4.0 * k * k))
            })
        };
        for e in 0..DIM {
            for f in (e + 1)..DIM {
                let d1 = mixed(e, f, h);
                let d2 = mixed(e, f, 2.0 * h);
                for a in 0..DIM {
                    for b in 0..DIM {
                        let v = (4.0 * d1[a][b] - d2[a][b]) / 3.0;
                        t.dd[e][f][a][b] = v;
                        t.dd[f][e][a][b] = v;
                    }
                }
            }
        }
        if !t.is_finite() {
            return Err(GeometryError::OutOfDomain { point: *x });
        }
        Ok(t)
    }

    fn value(&self, x: &Point) -> Result<Mat4, GeometryError> {
        Ok((self.f)(x))
    }

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::Numeric
    }
}

/// A symmetric 2-tensor field used as a metric variation.
pub trait SymmetricPerturbation: Send + Sync {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError>;

    /// Whether the field is invariant under the given chart symmetry.
    fn invariant_under(&self, _symmetry: &ChartSymmetry) -> bool {
        false
    }
}

/// One-parameter symmetries used to collapse quadrature axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartSymmetry {
    /// Translation along coordinate `i`.
    Translation(usize),
    /// Rotation of the complex coordinate `z_k`.
    Rotation(usize),
}

impl ChartSymmetry {
    pub fn preserves(&self, e: &Expr) -> bool {
        match *self {
            ChartSymmetry::Translation(i) => !e.depends_on(i),
            ChartSymmetry::Rotation(k) => e.rotation_invariant(k),
        }
    }
}

/// Which part of a product metric a profile perturbation scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationBlock {
    Full,
    /// Coordinates `0,1` (first factor) or `2,3` (second factor).
    Factor(usize),
}

/// `h = v · g` restricted to a block, with `v` a closed-form profile.
pub struct ProfilePerturbation {
    pub profile: Expr,
    pub block: PerturbationBlock,
    pub base: Arc<dyn MetricField>,
}

impl SymmetricPerturbation for ProfilePerturbation {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        let mut g = self.base.jet(x)?;
        if let PerturbationBlock::Factor(k) = self.block {
            let keep = |i: usize| i / 2 == k;
            for a in 0..DIM {
                for b in 0..DIM {
                    if !(keep(a) && keep(b)) {
                        g.value[a][b] = 0.0;
                        for e in 0..DIM {
                            g.d[e][a][b] = 0.0;
                            for f in 0..DIM {
                                g.dd[e][f][a][b] = 0.0;
                            }
                        }
                    }
                }
            }
        }
        let v = self.profile.eval(&seed(*x));
        Ok(g.times_scalar(&v))
    }

    fn invariant_under(&self, symmetry: &ChartSymmetry) -> bool {
        symmetry.preserves(&self.profile)
    }
}

/// Perturbation with explicitly given closed-form components.
pub struct ComponentPerturbation {
    comps: ExprMetric,
}

impl ComponentPerturbation {
    pub fn new(upper: [[Expr; DIM]; DIM]) -> Self {
        ComponentPerturbation { comps: ExprMetric::new(upper) }
    }
}

impl SymmetricPerturbation for ComponentPerturbation {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        self.comps.jet(x)
    }

    fn invariant_under(&self, symmetry: &ChartSymmetry) -> bool {
        (0..DIM).all(|a| (a..DIM).all(|b| symmetry.preserves(self.comps.component(a, b))))
    }
}

/// `g + t h`.
pub struct PerturbedMetric<'a> {
    pub base: &'a dyn MetricField,
    pub h: &'a dyn SymmetricPerturbation,
    pub t: f64,
}

impl MetricField for PerturbedMetric<'_> {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        Ok(self.base.jet(x)?.add_scaled(&self.h.jet(x)?, self.t))
    }

    fn derivative_mode(&self) -> DerivativeMode {
        self.base.derivative_mode()
    }
}

/// `u^2 g` for a closed-form positive function `u`.
pub struct ConformalMetric {
    pub base: Arc<dyn MetricField>,
    pub factor: Expr,
}

impl MetricField for ConformalMetric {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        let u = self.factor.eval(&seed(*x));
        Ok(self.base.jet(x)?.times_scalar(&(u.clone() * u)))
    }
}

/// Christoffel symbols and their first derivatives at a point.
pub(crate) struct Connection {
    pub ginv: Mat4,
    /// `gamma[a][b][c] = Γ^a_bc`
    pub gamma: Tensor3,
    /// `dgamma[e][a][b][c] = ∂_e Γ^a_bc`
    pub dgamma: Tensor4,
}

pub(crate) fn to_na(m: &Mat4) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[i][j])
}

pub(crate) fn from_na(m: &Matrix4<f64>) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

pub(crate) fn checked_inverse(g: &Mat4, x: &Point) -> Result<Mat4, GeometryError> {
    if !g.iter().flatten().all(|v| v.is_finite()) {
        return Err(GeometryError::OutOfDomain { point: *x });
    }
    let m = to_na(g);
    let sym = (m - m.transpose()).abs().max();
    let scale = m.abs().max().max(1e-300);
    if sym > 1e-12 * scale {
        return Err(GeometryError::DegenerateMetric { point: *x });
    }
    let chol = m.cholesky().ok_or(GeometryError::DegenerateMetric { point: *x })?;
    Ok(from_na(&chol.inverse()))
}

pub(crate) fn connection(jet: &TensorJet, x: &Point) -> Result<Connection, GeometryError> {
    let ginv = checked_inverse(&jet.value, x)?;
    let dg = &jet.d;
    let ddg = &jet.dd;
    // first kind: low[d][b][c] = Γ_{d,bc}
    let mut low = ZERO3;
    let mut dlow = ZERO4; // dlow[e][d][b][c]
    for d in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                low[d][b][c] = 0.5 * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                for e in 0..DIM {
                    dlow[e][d][b][c] = 0.5 * (ddg[e][b][d][c] + ddg[e][c][d][b] - ddg[e][d][b][c]);
                }
            }
        }
    }
    let mut dginv = ZERO3;
    for e in 0..DIM {
        for a in 0..DIM {
            for b in 0..DIM {
                let mut s = 0.0;
                for p in 0..DIM {
                    for q in 0..DIM {
                        s -= ginv[a][p] * dg[e][p][q] * ginv[q][b];
                    }
                }
                dginv[e][a][b] = s;
            }
        }
    }
    let mut gamma = ZERO3;
    let mut dgamma = ZERO4;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                let mut s = 0.0;
                for d in 0..DIM {
                    s += ginv[a][d] * low[d][b][c];
                }
                gamma[a][b][c] = s;
                for e in 0..DIM {
                    let mut s = 0.0;
                    for d in 0..DIM {
                        s += dginv[e][a][d] * low[d][b][c] + ginv[a][d] * dlow[e][d][b][c];
                    }
                    dgamma[e][a][b][c] = s;
                }
            }
        }
    }
    Ok(Connection { ginv, gamma, dgamma })
}

/// Curvature data at a single point.
#[derive(Clone, Debug)]
pub struct PointFrameData {
    pub point: Point,
    pub g: Matrix4<f64>,
    pub g_inv: Matrix4<f64>,
    /// `gamma[a][b][c] = Γ^a_bc`
    pub gamma: Tensor3,
    /// `riemann[a][b][c][d] = R_abcd`
    pub riemann: Tensor4,
    pub ricci: Matrix4<f64>,
    pub scalar: f64,
    pub ricci_traceless: Matrix4<f64>,
    /// `sqrt(det g)`
    pub vol: f64,
}

impl PointFrameData {
    /// Largest violation of the algebraic Riemann symmetries and the first
    /// Bianchi identity, relative to `max(1, max |R|)`.
    pub fn riemann_symmetry_residual(&self) -> f64 {
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    for d in 0..DIM {
                        let v = r[a][b][c][d];
                        scale = scale.max(v.abs());
                        worst = worst
                            .max((v + r[b][a][c][d]).abs())
                            .max((v + r[a][b][d][c]).abs())
                            .max((v - r[c][d][a][b]).abs())
                            .max((v + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        worst / scale
    }

    /// `g^ab r0_ab`.
    pub fn ricci_trace_residual(&self) -> f64 {
        (self.g_inv.component_mul(&self.ricci_traceless)).sum().abs()
    }

    /// Squared tensor norm `r_ab r^ab`.
    pub fn ricci_norm_sq(&self) -> f64 {
        tensor_norm_sq(&self.g_inv, &self.ricci)
    }
}

/// `T_ab T^ab` for a symmetric (or any) 2-tensor.
pub fn tensor_norm_sq(ginv: &Matrix4<f64>, t: &Matrix4<f64>) -> f64 {
    (ginv * t * ginv).component_mul(t).sum()
}

pub(crate) fn riemann_from_connection(g: &Mat4, conn: &Connection) -> Tensor4 {
    let gm = &conn.gamma;
    let dg = &conn.dgamma;
    // up[a][b][c][d] = R^a_bcd
    let mut up = ZERO4;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut v = dg[c][a][d][b] - dg[d][a][c][b];
                    for e in 0..DIM {
                        v += gm[a][c][e] * gm[e][d][b] - gm[a][d][e] * gm[e][c][b];
                    }
                    up[a][b][c][d] = v;
                }
            }
        }
    }
    let mut low = ZERO4;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut v = 0.0;
                    for e in 0..DIM {
                        v += g[a][e] * up[e][b][c][d];
                    }
                    low[a][b][c][d] = v;
                }
            }
        }
    }
    low
}

/// Full curvature data of `metric` at `x`.
pub fn frame_data(metric: &dyn MetricField, x: &Point) -> Result<PointFrameData, GeometryError> {
    let jet = metric.jet(x)?;
    frame_data_from_jet(&jet, x)
}

pub fn frame_data_from_jet(jet: &TensorJet, x: &Point) -> Result<PointFrameData, GeometryError> {
    let conn = connection(jet, x)?;
    let riemann = riemann_from_connection(&jet.value, &conn);
    let ginv = &conn.ginv;
    let mut ricci = Matrix4::zeros();
    for b in 0..DIM {
        for d in 0..DIM {
            let mut v = 0.0;
            for a in 0..DIM {
                for e in 0..DIM {
                    v += ginv[a][e] * riemann[e][b][a][d];
                }
            }
            ricci[(b, d)] = v;
        }
    }
    // symmetrize away rounding
    let ricci = 0.5 * (ricci + ricci.transpose());
    let g = to_na(&jet.value);
    let g_inv = to_na(ginv);
    let scalar = g_inv.component_mul(&ricci).sum();
    let ricci_traceless = ricci - g * (scalar / 4.0);
    let vol = g.determinant().sqrt();
    if !scalar.is_finite() || !vol.is_finite() {
        return Err(GeometryError::OutOfDomain { point: *x });
    }
    Ok(PointFrameData { point: *x, g, g_inv, gamma: conn.gamma, riemann, ricci, scalar, ricci_traceless, vol })
}

/// Linearized scalar curvature `Δ tr h + ∇^a∇^b h_ab − h^ab r_ab` with the
/// non-negative Laplacian `Δ = −∇^a∇_a`.
pub fn scalar_linearization(
    metric: &dyn MetricField,
    h: &dyn SymmetricPerturbation,
    x: &Point,
) -> Result<f64, GeometryError> {
    let gj = metric.jet(x)?;
    let hj = h.jet(x)?;
    let conn = connection(&gj, x)?;
    let frame = frame_data_from_jet(&gj, x)?;
    Ok(scalar_linearization_parts(&conn, &frame, &hj))
}

pub(crate) fn scalar_linearization_parts(conn: &Connection, frame: &PointFrameData, hj: &TensorJet) -> f64 {
    let gm = &conn.gamma;
    let dgm = &conn.dgamma;
    let hv = &hj.value;
    // t1[d][a][b] = ∇_d h_ab
    let mut t1 = ZERO3;
    for d in 0..DIM {
        for a in 0..DIM {
            for b in 0..DIM {
                let mut v = hj.d[d][a][b];
                for e in 0..DIM {
                    v -= gm[e][d][a] * hv[e][b] + gm[e][d][b] * hv[a][e];
                }
                t1[d][a][b] = v;
            }
        }
    }
    // t2[c][d][a][b] = ∇_c ∇_d h_ab
    let mut t2 = ZERO4;
    for c in 0..DIM {
        for d in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    let mut v = hj.dd[c][d][a][b];
                    for e in 0..DIM {
                        v -= dgm[c][e][d][a] * hv[e][b]
                            + gm[e][d][a] * hj.d[c][e][b]
                            + dgm[c][e][d][b] * hv[a][e]
                            + gm[e][d][b] * hj.d[c][a][e];
                        v -= gm[e][c][d] * t1[e][a][b] + gm[e][c][a] * t1[d][e][b] + gm[e][c][b] * t1[d][a][e];
                    }
                    t2[c][d][a][b] = v;
                }
            }
        }
    }
    let gi = &conn.ginv;
    let mut rough_laplacian_trace = 0.0;
    let mut div_div = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    rough_laplacian_trace += gi[a][b] * gi[c][d] * t2[c][d][a][b];
                    div_div += gi[a][c] * gi[b][d] * t2[c][d][a][b];
                }
            }
        }
    }
    let h_up = frame.g_inv * to_na(hv) * frame.g_inv;
    let h_dot_r = h_up.component_mul(&frame.ricci).sum();
    -rough_laplacian_trace + div_div - h_dot_r
}

/// `½ tr_g(h) √det g`.
pub fn volume_linearization(
    metric: &dyn MetricField,
    h: &dyn SymmetricPerturbation,
    x: &Point,
) -> Result<f64, GeometryError> {
    let g = metric.value(x)?;
    let ginv = checked_inverse(&g, x)?;
    let hv = h.jet(x)?.value;
    let mut tr = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            tr += ginv[a][b] * hv[a][b];
        }
    }
    Ok(0.5 * tr * to_na(&g).determinant().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_sphere_polar(a: f64, b: f64) -> ExprMetric {
        // coordinates (θ1, φ1, θ2, φ2)
        ExprMetric::diagonal([
            Expr::c(a * a),
            a * a * Expr::coord(0).sin().pow(2),
            Expr::c(b * b),
            b * b * Expr::coord(2).sin().pow(2),
        ])
    }

    fn hyperbolic_polar() -> ExprMetric {
        // sinh via exp; coordinates (ρ1, φ1, ρ2, φ2)
        let sinh = |i: usize| 0.5 * (Expr::coord(i).exp() - (-Expr::coord(i)).exp());
        ExprMetric::diagonal([Expr::c(1.0), sinh(0).pow(2), Expr::c(1.0), sinh(2).pow(2)])
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let f = frame_data(&ExprMetric::identity(), &[0.3, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(f.scalar, 0.0);
        assert!(f.riemann.iter().flatten().flatten().flatten().all(|v| *v == 0.0));
        assert!(f.gamma.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_sphere_product_is_einstein_with_scalar_four() {
        let f = frame_data(&round_sphere_polar(1.0, 1.0), &[0.7, 0.2, 1.9, 3.0]).unwrap();
        assert!((f.scalar - 4.0).abs() < 1e-12);
        assert!((f.ricci - f.g).abs().max() < 1e-12);
        assert!(f.ricci_traceless.abs().max() < 1e-12);
        assert!(f.riemann[0][1][0][1] > 0.0);
        assert!(f.riemann_symmetry_residual() < 1e-12);
        // mixed-block components vanish for products
        assert!(f.riemann[0][2][0][2].abs() < 1e-14);
        assert!(f.riemann[1][3][1][3].abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_product_has_scalar_minus_four() {
        let f = frame_data(&hyperbolic_polar(), &[0.8, 0.0, 1.3, 0.0]).unwrap();
        assert!((f.scalar + 4.0).abs() < 1e-11);
        assert!((f.ricci + f.g).abs().max() < 1e-11);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let m = ExprMetric::diagonal([Expr::c(1.0), Expr::c(-1.0), Expr::c(1.0), Expr::c(1.0)]);
        assert!(matches!(frame_data(&m, &[0.0; 4]), Err(GeometryError::DegenerateMetric { .. })));
        let m = ExprMetric::diagonal([Expr::coord(0).log(), Expr::c(1.0), Expr::c(1.0), Expr::c(1.0)]);
        assert!(matches!(frame_data(&m, &[-1.0, 0.0, 0.0, 0.0]), Err(GeometryError::OutOfDomain { .. })));
    }

    #[test]
    fn numeric_metric_matches_analytic_pipeline() {
        let analytic = round_sphere_polar(1.0, 2.0);
        let numeric = NumericMetric::new(
            |x: &Point| {
                let s1 = x[0].sin();
                let s2 = x[2].sin();
                [[1.0, 0.0, 0.0, 0.0], [0.0, s1 * s1, 0.0, 0.0], [0.0, 0.0, 4.0, 0.0], [0.0, 0.0, 0.0, 4.0 * s2 * s2]]
            },
            1e-3,
        );
        let x = [1.1, 0.0, 0.9, 0.0];
        let a = frame_data(&analytic, &x).unwrap();
        let n = frame_data(&numeric, &x).unwrap();
        assert_eq!(numeric.derivative_mode(), DerivativeMode::Numeric);
        assert!((a.scalar - n.scalar).abs() < 1e-7);
        assert!(n.riemann_symmetry_residual() < 1e-6);
    }

    #[test]
    fn chart_rejects_empty_interval_and_wraps() {
        assert!(Chart::new([(0.0, 0.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], [false; 4]).is_err());
        let t = Chart::flat_torus();
        let w = t.wrap(&[-0.1, 7.0, 1.0, 0.0]);
        let tau = 2.0 * std::f64::consts::PI;
        assert!((w[0] - (tau - 0.1)).abs() < 1e-12);
        assert!((w[1] - (7.0 - tau)).abs() < 1e-12);
        assert_eq!(t.sample_grid(3).len(), 81);
        let c = Chart::cube(-1.0, 1.0).unwrap();
        assert!(c.sample_grid(2).iter().all(|p| p.iter().all(|v| v.abs() < 1.0)));
    }

    #[test]
    fn volume_linearization_on_flat_torus() {
        let g: Arc<dyn MetricField> = Arc::new(ExprMetric::identity());
        let h = ProfilePerturbation { profile: Expr::c(2.0), block: PerturbationBlock::Full, base: g.clone() };
        assert!((volume_linearization(&*g, &h, &[0.1, 0.2, 0.3, 0.4]).unwrap() - 4.0).abs() < 1e-15);
        let zero = ComponentPerturbation::new(std::array::from_fn(|_| std::array::from_fn(|_| Expr::c(0.0))));
        assert_eq!(volume_linearization(&*g, &zero, &[0.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn constant_conformal_perturbation_of_flat_metric_is_static() {
        let g: Arc<dyn MetricField> = Arc::new(ExprMetric::identity());
        let h = ProfilePerturbation { profile: Expr::c(0.7), block: PerturbationBlock::Full, base: g.clone() };
        assert!(scalar_linearization(&*g, &h, &[1.0, 2.0, 3.0, 4.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn flat_linearization_is_laplacian_plus_double_divergence() {
        // h = diag(f, 0, 0, 0) with f = cos(x2): tr h = f, Δ tr h = -f'' = cos x2 ... sign: Δ = -∂², so Δf = cos(x2)
        // ∇^a∇^b h_ab = ∂1∂1 f = 0
        let g: Arc<dyn MetricField> = Arc::new(ExprMetric::identity());
        let mut upper: [[Expr; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| Expr::c(0.0)));
        upper[0][0] = Expr::coord(1).cos();
        let h = ComponentPerturbation::new(upper);
        let x = [0.3, 0.4, 0.0, 0.0];
        let v = scalar_linearization(&*g, &h, &x).unwrap();
        assert!((v - 0.4f64.cos()).abs() < 1e-14);
    }
}
