//! Kähler metrics from potentials, their Kähler and Ricci forms, and
//! Einstein–Maxwell residuals of arbitrary (metric, 2-form) pairs.
//!
//! Complex coordinates are `z_k = x_k + i y_k` with chart order
//! `(x1, y1, x2, y2)`; `J ∂x_k = ∂y_k`. A potential `K` gives the Kähler
//! form `ω = (i/2) ∂∂̄K`, so `|z1|^2 + |z2|^2` is the Euclidean metric.

use std::sync::Arc;

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart_geometry::{
    checked_inverse, frame_data, to_na, Chart, MetricField, Point, PointFrameData, Tensor3, TensorJet,
};
use crate::error::GeometryError;
use crate::expr::Expr;
use crate::form_algebra::{
    compose, curvature_blocks, hodge_star, inner, sorted_eigenvalues, traceless, Orientation, PointMetric, TwoForm,
};
use crate::jet::{seed, seed_nested, Jet2, Real, DIM};

/// The constant complex structure: `J(∂_a) = Σ_b J[(b, a)] ∂_b`.
pub fn complex_structure() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    for k in 0..2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// `S(J·, ·)` for a symmetric J-invariant tensor `S`.
pub fn form_from_symmetric(s: &Matrix4<f64>) -> TwoForm {
    TwoForm(complex_structure().transpose() * s)
}

/// Real metric whose Kähler form is `(i/2)∂∂̄K`, from the real Hessian of `K`.
pub fn metric_from_hessian<T: Real>(h: &[[T; DIM]; DIM]) -> [[T; DIM]; DIM] {
    let mut g: [[T; DIM]; DIM] = std::array::from_fn(|_| std::array::from_fn(|_| T::cst(0.0)));
    for j in 0..2 {
        for k in 0..2 {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            let diag = (h[xj][xk].clone() + h[yj][yk].clone()).scale(0.25);
            let off = (h[xj][yk].clone() - h[yj][xk].clone()).scale(0.25);
            g[xj][xk] = diag.clone();
            g[yj][yk] = diag;
            g[yj][xk] = -off.clone();
            g[xj][yk] = off;
        }
    }
    g
}

/// A chart carrying a Kähler potential.
#[derive(Clone, Debug)]
pub struct KahlerChart {
    potential: Expr,
    chart: Chart,
}

impl KahlerChart {
    pub fn new(potential: Expr, chart: Chart) -> Self {
        KahlerChart { potential, chart }
    }

    pub fn parse(potential: &str, chart: Chart) -> Result<Self, GeometryError> {
        Ok(KahlerChart::new(Expr::parse(potential)?, chart))
    }

    pub fn potential(&self) -> &Expr {
        &self.potential
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Max-norm of `g(J·, J·) − g` at `x`.
    pub fn j_invariance_residual(&self, x: &Point) -> Result<f64, GeometryError> {
        let g = to_na(&self.value(x)?);
        let j = complex_structure();
        Ok((j.transpose() * g * j - g).abs().max())
    }
}

impl MetricField for KahlerChart {
    fn jet(&self, x: &Point) -> Result<TensorJet, GeometryError> {
        let k = self.potential.eval(&seed_nested(*x));
        let g = metric_from_hessian::<Jet2<f64>>(&k.h);
        let t = TensorJet::from_jets(&g);
        if !t.is_finite() {
            return Err(GeometryError::OutOfDomain { point: *x });
        }
        Ok(t)
    }

    fn value(&self, x: &Point) -> Result<[[f64; DIM]; DIM], GeometryError> {
        let k = self.potential.eval(&seed(*x));
        let g = metric_from_hessian::<f64>(&k.h);
        if g.iter().flatten().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(GeometryError::OutOfDomain { point: *x })
        }
    }
}

/// `ω = g(J·, ·)`.
pub fn kahler_form(kc: &KahlerChart, x: &Point) -> Result<TwoForm, GeometryError> {
    let g = kc.value(x)?;
    checked_inverse(&g, x)?;
    Ok(form_from_symmetric(&to_na(&g)))
}

/// `ρ = r(J·, ·)` with `r` from the Levi-Civita curvature pipeline.
pub fn ricci_form(kc: &KahlerChart, x: &Point) -> Result<TwoForm, GeometryError> {
    Ok(form_from_symmetric(&frame_data(kc, x)?.ricci))
}

/// `ρ = −i∂∂̄ log det(g_{j k̄})` computed straight from the potential,
/// bypassing Christoffel symbols.
pub fn ricci_form_from_potential(kc: &KahlerChart, x: &Point) -> Result<TwoForm, GeometryError> {
    let jet = kc.jet(x)?;
    let ginv = to_na(&checked_inverse(&jet.value, x)?);
    let dg: [Matrix4<f64>; DIM] = std::array::from_fn(|e| to_na(&jet.d[e]));
    // Hessian of -log det g (real determinant is |det g_{j k̄}|^2 up to a constant)
    let mut hess = [[0.0; DIM]; DIM];
    for e in 0..DIM {
        for f in 0..DIM {
            let ddg = to_na(&jet.dd[e][f]);
            let v = (ginv * ddg).trace() - (ginv * dg[f] * ginv * dg[e]).trace();
            hess[e][f] = -v;
        }
    }
    let m = metric_from_hessian::<f64>(&hess);
    Ok(form_from_symmetric(&to_na(&m)))
}

/// Pointwise consistency of the two Ricci form computations, Kähler-form
/// norm and primitivity of `ρ̊`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahlerPointCheck {
    pub ricci_crosscheck: f64,
    pub omega_norm_sq: f64,
    pub primitivity: f64,
    pub j_invariance: f64,
    pub omega_self_dual: f64,
}

pub fn kahler_point_check(kc: &KahlerChart, x: &Point) -> Result<KahlerPointCheck, GeometryError> {
    let frame = frame_data(kc, x)?;
    let m = PointMetric::from(&frame);
    let omega = form_from_symmetric(&frame.g);
    let rho = form_from_symmetric(&frame.ricci);
    let rho_pot = ricci_form_from_potential(kc, x)?;
    let rho0 = rho - (frame.scalar / 4.0) * omega;
    let star = hodge_star(&omega, &m, Orientation::Standard);
    Ok(KahlerPointCheck {
        ricci_crosscheck: (rho.0 - rho_pot.0).abs().max() / rho.max_abs().max(1.0),
        omega_norm_sq: inner(&omega, &omega, &m),
        primitivity: inner(&rho0, &omega, &m).abs(),
        j_invariance: kc.j_invariance_residual(x)?,
        omega_self_dual: (star.0 - omega.0).abs().max(),
    })
}

/// A 2-form field on a chart.
pub trait MaxwellField: Send + Sync {
    fn value(&self, x: &Point) -> Result<TwoForm, GeometryError>;

    /// `∂_e F_ab` in closed form, if the field knows it.
    fn derivative(&self, _x: &Point) -> Option<Result<[Matrix4<f64>; DIM], GeometryError>> {
        None
    }
}

/// The Kähler form as a field, with analytic first derivatives.
pub struct KahlerFormField(pub Arc<KahlerChart>);

impl MaxwellField for KahlerFormField {
    fn value(&self, x: &Point) -> Result<TwoForm, GeometryError> {
        kahler_form(&self.0, x)
    }

    fn derivative(&self, x: &Point) -> Option<Result<[Matrix4<f64>; DIM], GeometryError>> {
        let jt = complex_structure().transpose();
        Some(self.0.jet(x).map(|jet| std::array::from_fn(|e| jt * to_na(&jet.d[e]))))
    }
}

/// Any pointwise closure; derivatives are taken numerically.
pub struct FnField<F>(pub F);

impl<F> MaxwellField for FnField<F>
where
    F: Fn(&Point) -> Result<TwoForm, GeometryError> + Send + Sync,
{
    fn value(&self, x: &Point) -> Result<TwoForm, GeometryError> {
        (self.0)(x)
    }
}

/// `F = ω + ρ̊/2` on a constant-scalar-curvature Kähler chart.
pub struct CanonicalMaxwell {
    kc: Arc<KahlerChart>,
    pub mean_scalar: f64,
}

impl CanonicalMaxwell {
    /// `(F⁺, F⁻) = (ω, ρ̊/2)` by construction.
    pub fn parts(&self, x: &Point) -> Result<(TwoForm, TwoForm), GeometryError> {
        let frame = frame_data(&*self.kc, x)?;
        Ok(canonical_parts(&frame))
    }

    pub fn chart(&self) -> &Arc<KahlerChart> {
        &self.kc
    }
}

fn canonical_parts(frame: &PointFrameData) -> (TwoForm, TwoForm) {
    let omega = form_from_symmetric(&frame.g);
    let rho = form_from_symmetric(&frame.ricci);
    let rho0 = rho - (frame.scalar / 4.0) * omega;
    (omega, 0.5 * rho0)
}

impl MaxwellField for CanonicalMaxwell {
    fn value(&self, x: &Point) -> Result<TwoForm, GeometryError> {
        let (p, n) = self.parts(x)?;
        Ok(p + n)
    }
}

/// Mean of `s` over the samples and `max |s − mean|`.
pub fn scalar_spread(metric: &dyn MetricField, samples: &[Point]) -> Result<(f64, f64), GeometryError> {
    let s: Vec<f64> = samples.par_iter().map(|x| frame_data(metric, x).map(|f| f.scalar)).collect::<Result<_, _>>()?;
    if s.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let spread = s.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok((mean, spread))
}

/// Builds `F = ω + ρ̊/2` after confirming that `s` is constant over the
/// samples to relative tolerance `tol`.
pub fn canonical_maxwell(kc: Arc<KahlerChart>, samples: &[Point], tol: f64) -> Result<CanonicalMaxwell, GeometryError> {
    let (mean, spread) = scalar_spread(&*kc, samples)?;
    if spread > tol * mean.abs().max(1.0) {
        return Err(GeometryError::NonConstantScalar { spread });
    }
    Ok(CanonicalMaxwell { kc, mean_scalar: mean })
}

/// Max-norm over samples of `(F⁺, F⁻) − (ω, ρ̊/2)` for the canonical field,
/// plus `max |r̊ + 2F⁺∘F⁻|`.
pub fn canonical_split_residual(field: &CanonicalMaxwell, samples: &[Point]) -> Result<(f64, f64), GeometryError> {
    let per: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|x| {
            let frame = frame_data(&**field.chart(), x)?;
            let m = PointMetric::from(&frame);
            let (omega, half_rho0) = canonical_parts(&frame);
            let f = omega + half_rho0;
            let (p, n) = crate::form_algebra::split(&f, &m, Orientation::Standard);
            let split_err = (p.0 - omega.0).abs().max().max((n.0 - half_rho0.0).abs().max());
            let alg = frame.ricci_traceless + 2.0 * compose(&p.0, &n.0, &m);
            Ok((split_err, alg.abs().max()))
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(per.iter().fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
}

/// Maximum pointwise norms of `dF`, `d⋆F` and `[r + F∘F]₀`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmResidual {
    pub d_f: f64,
    pub d_star_f: f64,
    pub einstein: f64,
}

impl EmResidual {
    pub fn max(&self) -> f64 {
        self.d_f.max(self.d_star_f).max(self.einstein)
    }
}

/// Fourth-order central differences of a matrix-valued field, wrapping on
/// periodic axes.
pub fn partials<F>(f: F, chart: &Chart, x: &Point, h: f64) -> Result<[Matrix4<f64>; DIM], GeometryError>
where
    F: Fn(&Point) -> Result<Matrix4<f64>, GeometryError>,
{
    let mut out = [Matrix4::zeros(); DIM];
    for (e, slot) in out.iter_mut().enumerate() {
        let at = |k: f64| {
            let mut y = *x;
            y[e] += k * h;
            f(&chart.wrap(&y))
        };
        *slot = (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h);
    }
    Ok(out)
}

/// `(dF)_abc = ∂_a F_bc + ∂_b F_ca + ∂_c F_ab`.
pub fn exterior_derivative(d: &[Matrix4<f64>; DIM]) -> Tensor3 {
    let mut t = [[[0.0; DIM]; DIM]; DIM];
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                t[a][b][c] = d[a][(b, c)] + d[b][(c, a)] + d[c][(a, b)];
            }
        }
    }
    t
}

/// Norm of a 3-form, `sqrt(T_abc T^abc / 6)`.
pub fn three_form_norm(t: &Tensor3, g_inv: &Matrix4<f64>) -> f64 {
    let mut s = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                let mut up = 0.0;
                for p in 0..DIM {
                    for q in 0..DIM {
                        for r in 0..DIM {
                            up += g_inv[(a, p)] * g_inv[(b, q)] * g_inv[(c, r)] * t[p][q][r];
                        }
                    }
                }
                s += up * t[a][b][c];
            }
        }
    }
    (s / 6.0).max(0.0).sqrt()
}

fn point_metric(metric: &dyn MetricField, x: &Point) -> Result<PointMetric, GeometryError> {
    let g = metric.value(x)?;
    checked_inverse(&g, x)?;
    PointMetric::new(to_na(&g)).map_err(|_| GeometryError::DegenerateMetric { point: *x })
}

fn field_partials(field: &dyn MaxwellField, chart: &Chart, x: &Point) -> Result<[Matrix4<f64>; DIM], GeometryError> {
    match field.derivative(x) {
        Some(d) => d,
        None => partials(|y| field.value(y).map(|f| f.0), chart, x, chart.fd_step),
    }
}

/// `|dF|` at a point.
pub fn d_norm(
    field: &dyn MaxwellField,
    metric: &dyn MetricField,
    chart: &Chart,
    x: &Point,
) -> Result<f64, GeometryError> {
    let m = point_metric(metric, x)?;
    Ok(three_form_norm(&exterior_derivative(&field_partials(field, chart, x)?), &m.g_inv))
}

/// `|d⋆F|` at a point.
pub fn d_star_norm(
    field: &dyn MaxwellField,
    metric: &dyn MetricField,
    chart: &Chart,
    x: &Point,
    orientation: Orientation,
) -> Result<f64, GeometryError> {
    let m = point_metric(metric, x)?;
    let star = |y: &Point| -> Result<Matrix4<f64>, GeometryError> {
        let my = point_metric(metric, y)?;
        Ok(hodge_star(&field.value(y)?, &my, orientation).0)
    };
    let d = partials(star, chart, x, chart.fd_step)?;
    Ok(three_form_norm(&exterior_derivative(&d), &m.g_inv))
}

/// Residuals of `dF = 0`, `d⋆F = 0`, `[r + F∘F]₀ = 0`, maximised over samples.
pub fn em_residual(
    metric: &dyn MetricField,
    field: &dyn MaxwellField,
    chart: &Chart,
    samples: &[Point],
    orientation: Orientation,
) -> Result<EmResidual, GeometryError> {
    let per: Vec<EmResidual> = samples
        .par_iter()
        .map(|x| {
            let frame = frame_data(metric, x)?;
            let m = PointMetric::from(&frame);
            let f = field.value(x)?;
            let t = traceless(&(frame.ricci + compose(&f.0, &f.0, &m)), &m);
            Ok(EmResidual {
                d_f: d_norm(field, metric, chart, x)?,
                d_star_f: d_star_norm(field, metric, chart, x, orientation)?,
                einstein: crate::chart_geometry::tensor_norm_sq(&m.g_inv, &t).max(0.0).sqrt(),
            })
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(per.iter().fold(EmResidual::default(), |a, b| EmResidual {
        d_f: a.d_f.max(b.d_f),
        d_star_f: a.d_star_f.max(b.d_star_f),
        einstein: a.einstein.max(b.einstein),
    }))
}

/// `max | |W₊|² − s²/24 |` over the samples, for any metric.
pub fn kahler_identity_check(
    metric: &dyn MetricField,
    samples: &[Point],
    orientation: Orientation,
) -> Result<f64, GeometryError> {
    let per: Vec<f64> = samples
        .par_iter()
        .map(|x| {
            let b = curvature_blocks(&frame_data(metric, x)?, orientation);
            Ok((b.norms().w_plus_sq - b.scalar * b.scalar / 24.0).abs())
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// `max |spec(W₊) − (s/6, −s/12, −s/12)|` over the samples.
pub fn weyl_eigenvalue_check(metric: &dyn MetricField, samples: &[Point]) -> Result<f64, GeometryError> {
    let per: Vec<f64> = samples
        .par_iter()
        .map(|x| {
            let b = curvature_blocks(&frame_data(metric, x)?, Orientation::Standard);
            let s = b.scalar;
            let mut want = [s / 6.0, -s / 12.0, -s / 12.0];
            want.sort_by(|a, b| b.total_cmp(a));
            let got = sorted_eigenvalues(&b.w_plus);
            Ok((0..3).map(|i| (got[i] - want[i]).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// Max over samples of `|dω|` (numerical exterior derivative) and `|dρ|`.
pub fn closedness_check(kc: &Arc<KahlerChart>, samples: &[Point]) -> Result<(f64, f64), GeometryError> {
    let chart = kc.chart().clone();
    let omega = FnField(|x: &Point| kahler_form(kc, x));
    let rho = FnField(|x: &Point| ricci_form(kc, x));
    let per: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|x| Ok((d_norm(&omega, &**kc, &chart, x)?, d_norm(&rho, &**kc, &chart, x)?)))
        .collect::<Result<_, GeometryError>>()?;
    Ok(per.iter().fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
}

/// Conformal invariance of the star on 2-forms in dimension four, seen
/// through `d⋆F`: returns `(max |⋆̃F − ⋆F|, max |d⋆F|, max |d⋆̃F|)`.
pub fn conformal_star_check(
    base: Arc<dyn MetricField>,
    factor: Expr,
    field: &dyn MaxwellField,
    chart: &Chart,
    samples: &[Point],
) -> Result<(f64, f64, f64), GeometryError> {
    let scaled = crate::chart_geometry::ConformalMetric { base: base.clone(), factor };
    let per: Vec<(f64, f64, f64)> = samples
        .par_iter()
        .map(|x| {
            let f = field.value(x)?;
            let a = hodge_star(&f, &point_metric(&*base, x)?, Orientation::Standard);
            let b = hodge_star(&f, &point_metric(&scaled, x)?, Orientation::Standard);
            Ok((
                (a.0 - b.0).abs().max(),
                d_star_norm(field, &*base, chart, x, Orientation::Standard)?,
                d_star_norm(field, &scaled, chart, x, Orientation::Standard)?,
            ))
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(per.iter().fold((0.0, 0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> Arc<KahlerChart> {
        Arc::new(KahlerChart::parse("|z1|^2 + |z2|^2", Chart::flat_torus()).unwrap())
    }

    fn spheres(a: f64, b: f64) -> Arc<KahlerChart> {
        let k = 4.0 * a * a * (1.0 + Expr::abs_sq(0)).log() + 4.0 * b * b * (1.0 + Expr::abs_sq(1)).log();
        Arc::new(KahlerChart::new(k, Chart::cube(-1.5, 1.5).unwrap()))
    }

    fn fubini_study() -> Arc<KahlerChart> {
        Arc::new(KahlerChart::parse("log(1 + |z1|^2 + |z2|^2)", Chart::cube(-1.5, 1.5).unwrap()).unwrap())
    }

    #[test]
    fn flat_potential_gives_identity_and_standard_form() {
        let kc = flat();
        let x = [0.2, 0.4, 1.0, 3.0];
        assert_eq!(
            kc.value(&x).unwrap(),
            [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
        );
        let w = kahler_form(&kc, &x).unwrap();
        assert_eq!(w, TwoForm::wedge(0, 1) + TwoForm::wedge(2, 3));
        assert_eq!(ricci_form(&kc, &x).unwrap(), TwoForm::zero());
    }

    #[test]
    fn sphere_metric_is_round() {
        let kc = spheres(1.0, 2.0);
        let x = [0.3, -0.2, 0.5, 0.1];
        let f = frame_data(&*kc, &x).unwrap();
        assert!((f.scalar - 2.5).abs() < 1e-11);
        let r1 = 0.3f64 * 0.3 + 0.2 * 0.2;
        assert!((f.g[(0, 0)] - 4.0 / (1.0 + r1).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn fubini_study_is_kahler_einstein_with_scalar_24() {
        let kc = fubini_study();
        let x = [0.3, -0.7, 0.4, 0.2];
        let f = frame_data(&*kc, &x).unwrap();
        assert!((f.scalar - 24.0).abs() < 1e-9);
        let rho = ricci_form(&kc, &x).unwrap();
        let w = kahler_form(&kc, &x).unwrap();
        assert!((rho.0 - 6.0 * w.0).abs().max() < 1e-9);
        let c = kahler_point_check(&kc, &x).unwrap();
        assert!(c.ricci_crosscheck < 1e-10);
        assert!((c.omega_norm_sq - 2.0).abs() < 1e-12);
        assert!(c.j_invariance < 1e-14);
        assert!(c.omega_self_dual < 1e-12);
    }

    #[test]
    fn unequal_spheres_have_primitive_nonzero_rho0() {
        let kc = spheres(1.0, 2.0);
        let x = [0.3, -0.2, 0.5, 0.1];
        let c = kahler_point_check(&kc, &x).unwrap();
        assert!(c.primitivity < 1e-12);
        assert!(c.ricci_crosscheck < 1e-10);
        let samples = kc.chart().sample_grid(2);
        let can = canonical_maxwell(kc.clone(), &samples, 1e-6).unwrap();
        let (_, minus) = can.parts(&x).unwrap();
        assert!(minus.max_abs() > 0.01);
    }

    #[test]
    fn canonical_field_solves_the_equations() {
        let kc = spheres(1.0, 2.0);
        let samples = kc.chart().sample_grid(2);
        let can = canonical_maxwell(kc.clone(), &samples, 1e-6).unwrap();
        let r = em_residual(&*kc, &can, kc.chart(), &samples, Orientation::Standard).unwrap();
        assert!(r.max() < 1e-6, "{r:?}");
        let wrong = KahlerFormField(kc.clone());
        let r = em_residual(&*kc, &wrong, kc.chart(), &samples, Orientation::Standard).unwrap();
        assert!(r.einstein > 0.1);
        assert!(r.d_f < 1e-12 && r.d_star_f < 1e-8);
        let (split, alg) = canonical_split_residual(&can, &samples).unwrap();
        assert!(split < 1e-12 && alg < 1e-10);
    }

    #[test]
    fn non_constant_scalar_is_rejected() {
        let kc = Arc::new(KahlerChart::parse("|z1|^2 + |z2|^2 + 0.1*|z1|^4", Chart::cube(-1.0, 1.0).unwrap()).unwrap());
        let samples = kc.chart().sample_grid(3);
        match canonical_maxwell(kc, &samples, 1e-6) {
            Err(GeometryError::NonConstantScalar { spread }) => assert!(spread > 1e-3),
            other => panic!("expected rejection, got {:?}", other.map(|c| c.mean_scalar)),
        }
    }

    #[test]
    fn kahler_identity_and_weyl_spectrum() {
        for kc in [fubini_study(), spheres(1.0, 3.0)] {
            let samples = kc.chart().sample_grid(2);
            assert!(kahler_identity_check(&*kc, &samples, Orientation::Standard).unwrap() < 1e-8);
            assert!(weyl_eigenvalue_check(&*kc, &samples).unwrap() < 1e-8);
        }
    }

    #[test]
    fn forms_are_closed() {
        let kc = fubini_study();
        let samples = kc.chart().sample_grid(2);
        let (dw, drho) = closedness_check(&kc, &samples).unwrap();
        assert!(dw < 1e-8 && drho < 1e-7, "{dw} {drho}");
    }

    #[test]
    fn conformal_rescaling_keeps_star() {
        let base: Arc<dyn MetricField> = Arc::new(crate::chart_geometry::ExprMetric::identity());
        let chart = Chart::flat_torus();
        let samples = chart.sample_grid(3);
        let u = 2.0 + Expr::coord(0).cos();
        let closed = FnField(|_: &Point| Ok(TwoForm::wedge(0, 1) + TwoForm::wedge(2, 3)));
        let (ds, a, b) = conformal_star_check(base.clone(), u.clone(), &closed, &chart, &samples).unwrap();
        assert!(ds < 1e-12 && a < 1e-10 && b < 1e-10);
        let open = FnField(|x: &Point| Ok(x[0].sin() * TwoForm::wedge(0, 2)));
        let (ds, a, b) = conformal_star_check(base, u, &open, &chart, &samples).unwrap();
        assert!(ds < 1e-12);
        assert!(a > 1e-2 && b > 1e-2);
    }
}
