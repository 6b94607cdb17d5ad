//! Named checks selectable from scenarios.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use emkahler::chart_geometry::PerturbationBlock;
use emkahler::cohomology::{
    bound_rhs, counterexample_gap, fine_family, hitchin_thorpe, parse_rational, q, symbolic_identities, BoundKind,
    BoundValue, IntersectionLattice, RatFnRepr, RationalRepr, SurfaceInvariants, Threshold, Q,
};
use emkahler::expr::Expr;
use emkahler::form_algebra::{
    hodge_star, inner, norm_sq, split, traceless_composition_identity, Orientation, PointMetric, TwoForm,
};
use emkahler::functionals::{
    calabi_equality_check, column, convergence_table, first_variation_check, functional_report, gauss_bonnet_value,
    is_second_order, ricci_identity_sides, riemann_identity_sides, signature_value, sw_integrand_bound,
    FunctionalReport, PerturbationSpec,
};
use emkahler::geometry::Geometry;
use emkahler::kahler_maxwell::{
    canonical_maxwell, closedness_check, em_residual, kahler_identity_check, weyl_eigenvalue_check, KahlerFormField,
    MaxwellField,
};
use emkahler::tolerances::Tolerances;
use emkahler::GeometryError;
use nalgebra::Matrix4;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::CheckError;

/// What the scenario is about.
pub enum Subject {
    None,
    Geometry(Arc<dyn Geometry>),
    Kodaira { lattice: IntersectionLattice<Q>, invariants: SurfaceInvariants },
}

impl Subject {
    pub fn capabilities(&self) -> Capabilities {
        match self {
            Subject::None => Capabilities::default(),
            Subject::Geometry(g) => Capabilities {
                geometry: true,
                potential: g.kahler_chart().is_some(),
                class_data: g.class_data().is_some(),
                lattice: false,
            },
            Subject::Kodaira { .. } => Capabilities { lattice: true, ..Default::default() },
        }
    }

    fn invariants(&self) -> Option<SurfaceInvariants> {
        match self {
            Subject::None => None,
            Subject::Geometry(g) => g.topology(),
            Subject::Kodaira { invariants, .. } => Some(*invariants),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Needs {
    Nothing,
    Geometry,
    /// A Kähler potential on the sampling chart.
    Potential,
    /// Exact class data (`c₁`, `[ω]`).
    ClassData,
    Lattice,
}

impl fmt::Display for Needs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Needs::Nothing => "nothing",
            Needs::Geometry => "a Riemannian geometry",
            Needs::Potential => "a geometry given by a Kähler potential",
            Needs::ClassData => "a geometry with exact class data",
            Needs::Lattice => "a kodaira lattice",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Capabilities {
    pub geometry: bool,
    pub potential: bool,
    pub class_data: bool,
    pub lattice: bool,
}

impl Capabilities {
    pub fn satisfies(&self, n: Needs) -> bool {
        match n {
            Needs::Nothing => true,
            Needs::Geometry => self.geometry,
            Needs::Potential => self.potential,
            Needs::ClassData => self.class_data,
            Needs::Lattice => self.lattice,
        }
    }
}

impl fmt::Display for Capabilities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (on, name) in [
            (self.geometry, "geometry"),
            (self.potential, "potential"),
            (self.class_data, "class data"),
            (self.lattice, "lattice"),
        ] {
            if on {
                parts.push(name);
            }
        }
        if parts.is_empty() {
            f.write_str("nothing")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

pub struct Context {
    pub subject: Subject,
    pub resolution: usize,
    pub samples_per_axis: usize,
    /// Defaults already multiplied by `scale`.
    pub tolerances: Tolerances,
    pub scale: f64,
    reports: RefCell<BTreeMap<usize, FunctionalReport>>,
}

impl Context {
    pub fn new(subject: Subject, resolution: usize, samples_per_axis: usize, scale: f64) -> Self {
        Context {
            subject,
            resolution,
            samples_per_axis,
            tolerances: Tolerances::default().scaled(scale),
            scale,
            reports: RefCell::new(BTreeMap::new()),
        }
    }

    /// Per-check override (also scaled) or the scaled default.
    pub fn tolerance(&self, over: Option<f64>, default: f64) -> f64 {
        over.map(|t| t * self.scale).unwrap_or(default)
    }

    fn geometry(&self) -> Result<&Arc<dyn Geometry>, CheckError> {
        match &self.subject {
            Subject::Geometry(g) => Ok(g),
            _ => Err(CheckError::Params("check needs a geometry".into())),
        }
    }

    /// Functional report at the scenario resolution, computed once.
    fn report(&self) -> Result<FunctionalReport, CheckError> {
        if let Some(r) = self.reports.borrow().get(&self.resolution) {
            return Ok(r.clone());
        }
        let r = functional_report(&**self.geometry()?, self.resolution)?;
        self.reports.borrow_mut().insert(self.resolution, r.clone());
        Ok(r)
    }

    fn invariants(&self, chi: Option<i64>, tau: Option<i64>) -> Result<SurfaceInvariants, CheckError> {
        match (chi, tau, self.subject.invariants()) {
            (Some(c), Some(t), _) => Ok(SurfaceInvariants::new(c, t)),
            (c, t, Some(inv)) => Ok(SurfaceInvariants::new(c.unwrap_or(inv.chi), t.unwrap_or(inv.tau))),
            _ => Err(CheckError::Params("chi and tau are required: the geometry has no known topology".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    /// `(resolution, residual)`
    pub rows: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub tolerance: Option<f64>,
    pub values: Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn new(pass: bool, tolerance: f64, values: Value) -> Self {
        let values = match values {
            Value::Object(m) => m,
            other => Map::from_iter([("value".to_string(), other)]),
        };
        Outcome { pass, tolerance: Some(tolerance), values, tables: Vec::new() }
    }

    fn exact(pass: bool, values: Value) -> Self {
        Outcome { tolerance: None, ..Outcome::new(pass, 0.0, values) }
    }
}

/// Object-safe face of a check; implemented for every [`TypedCheck`].
pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn module(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn needs(&self) -> Needs;
    fn validate(&self, params: &Value) -> Result<(), String>;
    fn run(&self, ctx: &Context, params: &Value, tolerance: Option<f64>) -> Result<Outcome, CheckError>;
}

pub trait TypedCheck: Send + Sync {
    type Params: DeserializeOwned;
    const NAME: &'static str;
    const MODULE: &'static str;
    const SUMMARY: &'static str;
    const NEEDS: Needs;
    fn run_typed(&self, ctx: &Context, p: Self::Params, tolerance: Option<f64>) -> Result<Outcome, CheckError>;
}

fn parse_params<P: DeserializeOwned>(v: &Value) -> Result<P, String> {
    serde_json::from_value(v.clone()).map_err(|e| e.to_string())
}

impl<T: TypedCheck> Check for T {
    fn name(&self) -> &'static str {
        T::NAME
    }
    fn module(&self) -> &'static str {
        T::MODULE
    }
    fn summary(&self) -> &'static str {
        T::SUMMARY
    }
    fn needs(&self) -> Needs {
        T::NEEDS
    }
    fn validate(&self, params: &Value) -> Result<(), String> {
        parse_params::<T::Params>(params).map(|_| ())
    }
    fn run(&self, ctx: &Context, params: &Value, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let p = parse_params::<T::Params>(params).map_err(CheckError::Params)?;
        self.run_typed(ctx, p, tolerance)
    }
}

pub struct CheckRegistry {
    checks: BTreeMap<&'static str, Box<dyn Check>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry { checks: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(AlgebraicIdentities));
        r.register(Box::new(EmResidualCheck));
        r.register(Box::new(KahlerIdentity));
        r.register(Box::new(WeylEigenvalues));
        r.register(Box::new(Closedness));
        r.register(Box::new(IntegralIdentity::<GaussBonnet>::default()));
        r.register(Box::new(IntegralIdentity::<RicciIdentity>::default()));
        r.register(Box::new(IntegralIdentity::<RiemannIdentity>::default()));
        r.register(Box::new(IntegralIdentity::<Signature>::default()));
        r.register(Box::new(Convergence));
        r.register(Box::new(CalabiEquality));
        r.register(Box::new(SwIntegrand));
        r.register(Box::new(Bound));
        r.register(Box::new(FirstVariation));
        r.register(Box::new(CounterexampleGap));
        r.register(Box::new(SymbolicIdentities));
        r.register(Box::new(HitchinThorpe));
        r
    }

    pub fn register(&mut self, c: Box<dyn Check>) {
        self.checks.insert(c.name(), c);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Check> {
        self.checks.get(name).map(|c| &**c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Check> {
        self.checks.values().map(|c| &**c)
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

fn rational(v: &Q) -> Value {
    serde_json::to_value(RationalRepr::from(v)).unwrap_or(Value::Null)
}

fn parse_q(s: &str) -> Result<Q, CheckError> {
    parse_rational(s).ok_or_else(|| CheckError::Params(format!("'{s}' is not a rational number")))
}

/// JSON has no infinities; non-finite values are written as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn nonconstant(e: GeometryError) -> Result<Outcome, CheckError> {
    match e {
        GeometryError::NonConstantScalar { spread } => {
            Ok(Outcome::exact(false, json!({ "refused": "scalar curvature is not constant", "spread": spread })))
        }
        other => Err(other.into()),
    }
}

// ---------------------------------------------------------------------------
// form_algebra

pub struct AlgebraicIdentities;

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraicParams {
    pairs: usize,
    seed: u64,
}

impl Default for AlgebraicParams {
    fn default() -> Self {
        AlgebraicParams { pairs: 10_000, seed: 1 }
    }
}

impl TypedCheck for AlgebraicIdentities {
    type Params = AlgebraicParams;
    const NAME: &'static str = "algebraic_identities";
    const MODULE: &'static str = "form_algebra";
    const SUMMARY: &'static str = "composition identity, star involution and split orthogonality on random (g, F)";
    const NEEDS: Needs = Needs::Nothing;

    fn run_typed(&self, ctx: &Context, p: AlgebraicParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let t = &ctx.tolerances;
        let mut rng = StdRng::seed_from_u64(p.seed);
        let (mut comp, mut inv, mut orth) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..p.pairs {
            let a = Matrix4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let m = PointMetric::new(a * a.transpose() + Matrix4::identity() * 0.5)?;
            let f = TwoForm::from_components(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
            let o = if rng.gen_bool(0.5) { Orientation::Standard } else { Orientation::Reversed };
            comp = comp.max(traceless_composition_identity(&f, &m, o));
            inv = inv.max((hodge_star(&hodge_star(&f, &m, o), &m, o) - f).max_abs() / f.max_abs().max(1.0));
            let (sp, sn) = split(&f, &m, o);
            orth = orth.max(inner(&sp, &sn, &m).abs() / norm_sq(&f, &m).max(1.0));
        }
        let tol = ctx.tolerance(tolerance, t.composition_identity);
        let pass = comp <= tol && inv <= t.star_involution && orth <= t.split_orthogonality;
        Ok(Outcome::new(
            pass,
            tol,
            json!({
                "pairs": p.pairs,
                "composition_identity": comp,
                "star_involution": inv,
                "split_orthogonality": orth,
                "star_involution_tolerance": t.star_involution,
                "split_orthogonality_tolerance": t.split_orthogonality,
            }),
        ))
    }
}

// ---------------------------------------------------------------------------
// kahler_maxwell

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    /// `ω + ρ̊/2`
    #[default]
    Canonical,
    /// `F = ω`
    KahlerForm,
}

pub struct EmResidualCheck;

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmParams {
    field: FieldChoice,
    /// Pass only if the Einstein residual exceeds the wrong-field threshold.
    expect_violation: bool,
}

impl TypedCheck for EmResidualCheck {
    type Params = EmParams;
    const NAME: &'static str = "em_residual";
    const MODULE: &'static str = "kahler_maxwell";
    const SUMMARY: &'static str = "|dF|, |d*F| and |[r + F∘F]₀| over the sample grid";
    const NEEDS: Needs = Needs::Potential;

    fn run_typed(&self, ctx: &Context, p: EmParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let kc = g.kahler_chart().ok_or_else(|| CheckError::Params("geometry has no potential".into()))?;
        let samples = g.samples(ctx.samples_per_axis);
        let field: Box<dyn MaxwellField> = match p.field {
            FieldChoice::KahlerForm => Box::new(KahlerFormField(kc.clone())),
            FieldChoice::Canonical => match canonical_maxwell(kc.clone(), &samples, ctx.tolerances.scalar_constancy) {
                Ok(f) => Box::new(f),
                Err(e) => return nonconstant(e),
            },
        };
        let r = em_residual(&*kc, &*field, kc.chart(), &samples, Orientation::Standard)?;
        let values = json!({
            "d_f": r.d_f,
            "d_star_f": r.d_star_f,
            "einstein": r.einstein,
            "samples": samples.len(),
        });
        if p.expect_violation {
            let min = tolerance.unwrap_or(ctx.tolerances.wrong_field_min);
            Ok(Outcome::new(r.einstein > min, min, values))
        } else {
            let tol = ctx.tolerance(tolerance, ctx.tolerances.em_residual);
            Ok(Outcome::new(r.max() <= tol, tol, values))
        }
    }
}

pub struct KahlerIdentity;

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViolationParams {
    expect_violation: bool,
    min_violation: f64,
}

impl Default for ViolationParams {
    fn default() -> Self {
        ViolationParams { expect_violation: false, min_violation: 1e-2 }
    }
}

impl TypedCheck for KahlerIdentity {
    type Params = ViolationParams;
    const NAME: &'static str = "kahler_identity";
    const MODULE: &'static str = "kahler_maxwell";
    const SUMMARY: &'static str = "max | |W+|² − s²/24 | over the sample grid";
    const NEEDS: Needs = Needs::Geometry;

    fn run_typed(&self, ctx: &Context, p: ViolationParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let r = kahler_identity_check(&*g.metric(), &g.samples(ctx.samples_per_axis), Orientation::Standard)?;
        if p.expect_violation {
            Ok(Outcome::new(r > p.min_violation, p.min_violation, json!({ "residual": r, "expect_violation": true })))
        } else {
            let tol = ctx.tolerance(tolerance, ctx.tolerances.kahler_identity);
            Ok(Outcome::new(r <= tol, tol, json!({ "residual": r })))
        }
    }
}

pub struct WeylEigenvalues;

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

impl TypedCheck for WeylEigenvalues {
    type Params = NoParams;
    const NAME: &'static str = "weyl_eigenvalues";
    const MODULE: &'static str = "kahler_maxwell";
    const SUMMARY: &'static str = "spectrum of W+ equals (s/6, −s/12, −s/12)";
    const NEEDS: Needs = Needs::Geometry;

    fn run_typed(&self, ctx: &Context, _: NoParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let r = weyl_eigenvalue_check(&*g.metric(), &g.samples(ctx.samples_per_axis))?;
        let tol = ctx.tolerance(tolerance, ctx.tolerances.weyl_eigenvalues);
        Ok(Outcome::new(r <= tol, tol, json!({ "residual": r })))
    }
}

pub struct Closedness;

impl TypedCheck for Closedness {
    type Params = NoParams;
    const NAME: &'static str = "closedness";
    const MODULE: &'static str = "kahler_maxwell";
    const SUMMARY: &'static str = "dω = 0 and dρ = 0 by numerical exterior derivative";
    const NEEDS: Needs = Needs::Potential;

    fn run_typed(&self, ctx: &Context, _: NoParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let kc = g.kahler_chart().ok_or_else(|| CheckError::Params("geometry has no potential".into()))?;
        let (d_omega, d_rho) = closedness_check(&kc, &g.samples(ctx.samples_per_axis))?;
        let tol = ctx.tolerance(tolerance, ctx.tolerances.kahler_form_closed);
        let rho_tol = ctx.tolerance(tolerance, ctx.tolerances.ricci_form_closed);
        Ok(Outcome::new(
            d_omega <= tol && d_rho <= rho_tol,
            tol,
            json!({ "d_omega": d_omega, "d_rho": d_rho, "d_rho_tolerance": rho_tol }),
        ))
    }
}

// ---------------------------------------------------------------------------
// functionals

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    chi: Option<i64>,
    tau: Option<i64>,
}

/// One of the four integral identities.
pub trait Identity: Send + Sync + Default {
    const NAME: &'static str;
    const SUMMARY: &'static str;
    /// `(computed, expected, scale)`: residual is `|computed − expected| / scale`.
    fn sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64, f64);
}

#[derive(Default)]
pub struct GaussBonnet;
#[derive(Default)]
pub struct RicciIdentity;
#[derive(Default)]
pub struct RiemannIdentity;
#[derive(Default)]
pub struct Signature;

const EIGHT_PI2: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI;

impl Identity for GaussBonnet {
    const NAME: &'static str = "gauss_bonnet";
    const SUMMARY: &'static str = "(1/4π²)∫(s²/24 + 2|W+|² − |r̊|²/2) = 2χ + 3τ";
    fn sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64, f64) {
        (gauss_bonnet_value(r), inv.c1_sq() as f64, 1.0)
    }
}

impl Identity for RicciIdentity {
    const NAME: &'static str = "ricci_identity";
    const SUMMARY: &'static str = "∫|r|² = −8π²(2χ + 3τ) + 8∫(s²/24 + |W+|²/2)";
    fn sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64, f64) {
        let (l, rhs) = ricci_identity_sides(r, inv);
        (l, rhs, EIGHT_PI2)
    }
}

impl Identity for RiemannIdentity {
    const NAME: &'static str = "riemann_identity";
    const SUMMARY: &'static str = "∫|𝓡|² = −8π²(χ + 3τ) + 2∫(s²/24 + 2|W+|²)";
    fn sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64, f64) {
        let (l, rhs) = riemann_identity_sides(r, inv);
        (l, rhs, EIGHT_PI2)
    }
}

impl Identity for Signature {
    const NAME: &'static str = "signature";
    const SUMMARY: &'static str = "(1/12π²)∫(|W+|² − |W−|²) = τ";
    fn sides(r: &FunctionalReport, inv: &SurfaceInvariants) -> (f64, f64, f64) {
        (signature_value(r), inv.tau as f64, 1.0)
    }
}

#[derive(Default)]
pub struct IntegralIdentity<I>(std::marker::PhantomData<I>);

impl<I: Identity> TypedCheck for IntegralIdentity<I> {
    type Params = TopologyParams;
    const NAME: &'static str = I::NAME;
    const MODULE: &'static str = "functionals";
    const SUMMARY: &'static str = I::SUMMARY;
    const NEEDS: Needs = Needs::Geometry;

    fn run_typed(&self, ctx: &Context, p: TopologyParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let inv = ctx.invariants(p.chi, p.tau)?;
        let r = ctx.report()?;
        let (got, want, scale) = I::sides(&r, &inv);
        let residual = (got - want).abs() / scale;
        let tol = ctx.tolerance(tolerance, ctx.tolerances.integral_identity);
        Ok(Outcome::new(
            residual <= tol,
            tol,
            json!({
                "computed": got,
                "expected": want,
                "residual": residual,
                "chi": inv.chi,
                "tau": inv.tau,
                "resolution": r.resolution,
                "nodes": r.nodes,
            }),
        ))
    }
}

pub struct Convergence;

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceParams {
    resolutions: Vec<usize>,
    chi: Option<i64>,
    tau: Option<i64>,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams { resolutions: vec![8, 16, 32, 64], chi: None, tau: None }
    }
}

impl TypedCheck for Convergence {
    type Params = ConvergenceParams;
    const NAME: &'static str = "convergence";
    const MODULE: &'static str = "functionals";
    const SUMMARY: &'static str =
        "identity residuals under resolution doubling: order ≥ 2 and final residual within tolerance";
    const NEEDS: Needs = Needs::Geometry;

    fn run_typed(&self, ctx: &Context, p: ConvergenceParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        if p.resolutions.len() < 2 || p.resolutions.contains(&0) || p.resolutions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CheckError::Params("resolutions must be at least two increasing positive values".into()));
        }
        let inv = ctx.invariants(p.chi, p.tau)?;
        let table = convergence_table(&**ctx.geometry()?, Some(inv), &p.resolutions)?;
        let tol = ctx.tolerance(tolerance, ctx.tolerances.integral_identity);
        let mut pass = true;
        let mut values = Map::new();
        let mut tables = Vec::new();
        for name in ["gauss_bonnet", "ricci_identity", "riemann_identity", "signature"] {
            let c = column(&table, name);
            let last = c.last().copied().unwrap_or(f64::NAN);
            let order = is_second_order(&c);
            pass &= order && last <= tol;
            values.insert(name.into(), json!({ "final_residual": num(last), "second_order": order }));
            tables.push(Table { name: name.into(), rows: p.resolutions.iter().copied().zip(c).collect() });
        }
        Ok(Outcome { pass, tolerance: Some(tol), values, tables })
    }
}

pub struct CalabiEquality;

impl TypedCheck for CalabiEquality {
    type Params = NoParams;
    const NAME: &'static str = "calabi_equality";
    const MODULE: &'static str = "functionals";
    const SUMMARY: &'static str = "∫s² dμ = 32π²(c₁·[ω])²/[ω]² for constant scalar curvature";
    const NEEDS: Needs = Needs::ClassData;

    fn run_typed(&self, ctx: &Context, _: NoParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let class = g.class_data().ok_or_else(|| CheckError::Params("geometry has no class data".into()))?;
        let r = ctx.report()?;
        let c = calabi_equality_check(&r, class.c1_dot_omega(), class.omega_sq());
        let tol = ctx.tolerance(tolerance, ctx.tolerances.calabi_relative);
        Ok(Outcome::new(
            c.relative <= tol,
            tol,
            json!({
                "lhs": c.lhs,
                "rhs": c.rhs,
                "relative": c.relative,
                "rhs_over_pi2": rational(&(q(32) * class.ratio()?)),
            }),
        ))
    }
}

pub struct SwIntegrand;

impl TypedCheck for SwIntegrand {
    type Params = NoParams;
    const NAME: &'static str = "sw_integrand";
    const MODULE: &'static str = "functionals";
    const SUMMARY: &'static str = "∫(s − √6|W+|)² against 72π²[c₁⁺]² where s ≤ 0, and its Kähler value ∫(s − |s|/2)²";
    const NEEDS: Needs = Needs::ClassData;

    fn run_typed(&self, ctx: &Context, _: NoParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let class = g.class_data().ok_or_else(|| CheckError::Params("geometry has no class data".into()))?;
        let r = ctx.report()?;
        let tol = ctx.tolerance(tolerance, ctx.tolerances.sw_margin);
        // The estimate needs a monopole class, available only when s ≤ 0.
        let applies = r.total_scalar <= 0.0;
        let rhs = if applies {
            bound_rhs(BoundKind::SwIntegral, &class.bound_inputs()?)?.value(BoundKind::SwIntegral)
        } else {
            0.0
        };
        let sw = sw_integrand_bound(&r, rhs);
        let identity_ok = !g.is_kahler() || sw.kahler_identity_relative <= tol;
        let pass = identity_ok && (!applies || sw.margin >= -tol * rhs.abs().max(1.0));
        Ok(Outcome::new(
            pass,
            tol,
            json!({
                "lhs": sw.lhs,
                "rhs": sw.rhs,
                "margin": sw.margin,
                "bound_applies": applies,
                "kahler_identity_relative": sw.kahler_identity_relative,
            }),
        ))
    }
}

pub struct Bound;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    kind: BoundKind,
    /// Exact expected coefficient (of π², π⁰ for sw_projection, π for who3).
    #[serde(default)]
    expects: Option<String>,
    /// Also compare against the integral functional it bounds.
    #[serde(default = "yes")]
    compare: bool,
}

fn yes() -> bool {
    true
}

fn bounded_functional(kind: BoundKind, r: &FunctionalReport) -> Option<f64> {
    match kind {
        BoundKind::Who1 | BoundKind::Calabi1 => Some(r.action_s2),
        BoundKind::Who2 | BoundKind::Calabi2 => Some(r.action_ric2),
        BoundKind::Calabi4 => Some(r.action_riem2),
        BoundKind::SwIntegral => Some(r.action_sw),
        BoundKind::Who3 | BoundKind::SwProjection => None,
    }
}

impl TypedCheck for Bound {
    type Params = BoundParams;
    const NAME: &'static str = "bound";
    const MODULE: &'static str = "cohomology";
    const SUMMARY: &'static str =
        "exact right-hand side of a curvature bound, optionally against the computed functional";
    const NEEDS: Needs = Needs::ClassData;

    fn run_typed(&self, ctx: &Context, p: BoundParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        let g = ctx.geometry()?;
        let class = g.class_data().ok_or_else(|| CheckError::Params("geometry has no class data".into()))?;
        let b = bound_rhs(p.kind, &class.bound_inputs()?)?;
        let rhs = b.value(p.kind);
        let tol = ctx.tolerance(tolerance, ctx.tolerances.calabi_relative);
        let mut values = Map::new();
        let mut pass = true;
        match &b {
            BoundValue::Exact(c) => {
                values.insert("coefficient".into(), rational(c));
                if let Some(e) = &p.expects {
                    let ok = parse_q(e)? == *c;
                    values.insert("matches_expected".into(), json!(ok));
                    pass &= ok;
                }
            }
            BoundValue::Real(c) => {
                values.insert("coefficient".into(), num(*c));
                if let Some(e) = &p.expects {
                    let want: f64 = e.parse().map_err(|_| CheckError::Params(format!("'{e}' is not a number")))?;
                    let ok = (c - want).abs() <= tol * want.abs().max(1.0);
                    values.insert("matches_expected".into(), json!(ok));
                    pass &= ok;
                }
            }
        }
        values.insert("rhs".into(), num(rhs));
        if p.compare {
            if let Some(lhs) = bounded_functional(p.kind, &ctx.report()?) {
                let ok = lhs >= rhs - tol * rhs.abs().max(1.0);
                values.insert("functional".into(), num(lhs));
                values.insert("slack".into(), num(lhs - rhs));
                pass &= ok;
            }
        }
        Ok(Outcome { pass, tolerance: Some(tol), values, tables: Vec::new() })
    }
}

pub struct FirstVariation;

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    #[default]
    Full,
    First,
    Second,
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationParams {
    /// Profile `v` of `h = v·g`, in cell coordinates `c0..c3`.
    profile: String,
    block: Block,
    ts: Vec<f64>,
    at: f64,
    /// Expect a vanishing derivative instead of comparing with finite
    /// differences.
    conformal: bool,
}

impl Default for VariationParams {
    fn default() -> Self {
        VariationParams {
            profile: "cos(c0)".into(),
            block: Block::Full,
            ts: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-4],
            at: 1e-4,
            conformal: false,
        }
    }
}

impl TypedCheck for FirstVariation {
    type Params = VariationParams;
    const NAME: &'static str = "first_variation";
    const MODULE: &'static str = "functionals";
    const SUMMARY: &'static str = "d/dt ∫s² along g + th: analytic linearization against central differences";
    const NEEDS: Needs = Needs::Geometry;

    fn run_typed(&self, ctx: &Context, p: VariationParams, tolerance: Option<f64>) -> Result<Outcome, CheckError> {
        if p.ts.is_empty() || p.ts.iter().any(|t| !(*t > 0.0)) {
            return Err(CheckError::Params("ts must be non-empty and positive".into()));
        }
        let block = match p.block {
            Block::Full => PerturbationBlock::Full,
            Block::First => PerturbationBlock::Factor(0),
            Block::Second => PerturbationBlock::Factor(1),
        };
        let h = PerturbationSpec::Profile { profile: Expr::parse(&p.profile)?, block };
        let fv = first_variation_check(&**ctx.geometry()?, &h, &p.ts, ctx.resolution)?;
        let rows: Vec<Value> =
            fv.rows.iter().map(|r| json!({ "t": r.t, "derivative": r.derivative, "error": r.error })).collect();
        let mut values = json!({
            "analytic": fv.analytic,
            "traceless_form": fv.traceless_form,
            "rows": rows,
            "richardson": fv.richardson,
        });
        if p.conformal {
            let tol = ctx.tolerance(tolerance, ctx.tolerances.conformal_variation);
            let worst = fv.rows.iter().map(|r| r.derivative.abs()).fold(fv.analytic.abs(), f64::max);
            values["max_derivative"] = json!(worst);
            return Ok(Outcome::new(worst <= tol, tol, values));
        }
        let tol = ctx.tolerance(tolerance, ctx.tolerances.first_variation_relative);
        let rel = fv.relative_error_at(p.at).unwrap_or(f64::INFINITY);
        let (lo, hi) = (ctx.tolerances.richardson_low, ctx.tolerances.richardson_high);
        let ratios_ok = fv.richardson.iter().all(|r| *r >= lo && *r <= hi);
        values["relative_error"] = num(rel);
        values["richardson_window"] = json!([lo, hi]);
        Ok(Outcome::new(rel <= tol && ratios_ok, tol, values))
    }
}

// ---------------------------------------------------------------------------
// cohomology

pub struct CounterexampleGap;

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapParams {
    eps: String,
    expects: Option<String>,
    /// Expected `∫s² dμ / π²` at `eps`.
    expects_s2: Option<String>,
    expect_sign: Option<i8>,
}

impl Default for GapParams {
    fn default() -> Self {
        GapParams { eps: "1/100".into(), expects: None, expects_s2: None, expect_sign: None }
    }
}

fn threshold_value(t: &Threshold) -> Value {
    match t {
        Threshold::Infinite => json!("inf"),
        Threshold::Bracket { lo, hi } => json!({ "lo": rational(lo), "hi": rational(hi) }),
    }
}

impl TypedCheck for CounterexampleGap {
    type Params = GapParams;
    const NAME: &'static str = "counterexample_gap";
    const MODULE: &'static str = "cohomology";
    const SUMMARY: &'static str =
        "exact gap of the Riemann-norm estimate on the Kodaira family, with sign certification";
    const NEEDS: Needs = Needs::Lattice;

    fn run_typed(&self, ctx: &Context, p: GapParams, _: Option<f64>) -> Result<Outcome, CheckError> {
        let Subject::Kodaira { lattice, invariants } = &ctx.subject else {
            return Err(CheckError::Params("check needs a kodaira lattice".into()));
        };
        let eps = parse_q(&p.eps)?;
        if eps <= q(0) {
            return Err(CheckError::Params("eps must be positive".into()));
        }
        let gap = counterexample_gap(lattice, invariants)?;
        let at = gap.at(&eps)?;
        let s2 = q(32) * fine_family(lattice, invariants)?.s2_over_32pi2.eval(&eps)?;
        let mut pass = gap.sign.certified;
        if let Some(e) = &p.expects {
            pass &= parse_q(e)? == at;
        }
        if let Some(e) = &p.expects_s2 {
            pass &= parse_q(e)? == s2;
        }
        if let Some(s) = p.expect_sign {
            pass &= s == gap.sign.sign_near_zero;
        }
        Ok(Outcome::exact(
            pass,
            json!({
                "eps": rational(&eps),
                "gap": rational(&at),
                "s2_over_pi2": rational(&s2),
                "gap_function": serde_json::to_value(RatFnRepr::from(&gap.assembled)).unwrap_or(Value::Null),
                "closed_form_agrees": gap.assembled == gap.closed_form,
                "sign_near_zero": gap.sign.sign_near_zero,
                "threshold": threshold_value(&gap.sign.threshold),
                "certified": gap.sign.certified,
            }),
        ))
    }
}

pub struct SymbolicIdentities;

impl TypedCheck for SymbolicIdentities {
    type Params = NoParams;
    const NAME: &'static str = "symbolic_identities";
    const MODULE: &'static str = "cohomology";
    const SUMMARY: &'static str = "identities of the Kodaira family with (p, q, τ, ε) symbolic";
    const NEEDS: Needs = Needs::Nothing;

    fn run_typed(&self, _: &Context, _: NoParams, _: Option<f64>) -> Result<Outcome, CheckError> {
        let ids = symbolic_identities();
        let pass = ids.iter().all(|i| i.holds);
        let values: Map<String, Value> = ids.into_iter().map(|i| (i.name, json!(i.holds))).collect();
        Ok(Outcome::exact(pass, Value::Object(values)))
    }
}

pub struct HitchinThorpe;

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HitchinParams {
    chi: Option<i64>,
    tau: Option<i64>,
    /// Expected `(2χ + 3τ ≥ 0, 2χ − 3τ ≥ 0)`.
    expects: Option<(bool, bool)>,
}

impl TypedCheck for HitchinThorpe {
    type Params = HitchinParams;
    const NAME: &'static str = "hitchin_thorpe";
    const MODULE: &'static str = "cohomology";
    const SUMMARY: &'static str = "Einstein–Maxwell admissibility 2χ ± 3τ ≥ 0 for each orientation";
    const NEEDS: Needs = Needs::Nothing;

    fn run_typed(&self, ctx: &Context, p: HitchinParams, _: Option<f64>) -> Result<Outcome, CheckError> {
        let inv = ctx.invariants(p.chi, p.tau)?;
        let got = hitchin_thorpe(&inv);
        let pass = p.expects.is_none_or(|e| e == got);
        Ok(Outcome::exact(pass, json!({ "chi": inv.chi, "tau": inv.tau, "standard": got.0, "reversed": got.1 })))
    }
}
