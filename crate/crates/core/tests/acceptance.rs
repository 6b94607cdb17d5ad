//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::PI;
use std::process::ExitCode;

use emkahler::chart_geometry::PerturbationBlock;
use emkahler::cohomology::*;
use emkahler::expr::Expr;
use emkahler::form_algebra::{
    hodge_star, inner, norm_sq, split, traceless_composition_identity, Orientation, PointMetric, TwoForm,
};
use emkahler::functionals::*;
use emkahler::geometry::*;
use emkahler::kahler_maxwell::{canonical_maxwell, em_residual, kahler_identity_check, KahlerFormField};
use emkahler::tolerances::{Tolerances, DEFAULT_RESOLUTION, DEFAULT_SAMPLES_PER_AXIS};
use nalgebra::Matrix4;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn csc_kahler() -> Result<Vec<BuiltGeometry>, String> {
    Ok(vec![
        flat_torus().map_err(err)?,
        sphere_product(1.0, 1.0).map_err(err)?,
        sphere_product(1.0, 2.0).map_err(err)?,
        sphere_product(1.0, 3.0).map_err(err)?,
        hyperbolic_product(2).map_err(err)?,
        fubini_study().map_err(err)?,
    ])
}

fn algebraic_identities() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut comp, mut inv, mut orth) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let a = Matrix4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let m = PointMetric::new(a * a.transpose() + Matrix4::identity() * 0.5).map_err(err)?;
        let f = TwoForm::from_components(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let o = if rng.gen_bool(0.5) { Orientation::Standard } else { Orientation::Reversed };
        comp = comp.max(traceless_composition_identity(&f, &m, o));
        let scale = f.max_abs().max(1.0);
        inv = inv.max((hodge_star(&hodge_star(&f, &m, o), &m, o) - f).max_abs() / scale);
        let (p, n) = split(&f, &m, o);
        orth = orth.max(inner(&p, &n, &m).abs() / norm_sq(&f, &m).max(1.0));
    }
    ensure(
        comp <= 1e-11 && inv <= 1e-12 && orth <= 1e-12,
        format!("composition {comp:e}, involution {inv:e}, orthogonality {orth:e}"),
    )?;
    Ok(format!("10000 pairs: composition {comp:.1e}, involution {inv:.1e}, orthogonality {orth:.1e}"))
}

fn einstein_maxwell(tol: &Tolerances) -> Outcome {
    let mut worst = 0.0f64;
    for g in csc_kahler()? {
        let kc = g.kahler_chart().ok_or("missing potential chart")?;
        let samples = g.samples(DEFAULT_SAMPLES_PER_AXIS);
        let field = canonical_maxwell(kc.clone(), &samples, tol.scalar_constancy).map_err(err)?;
        let r = em_residual(&*kc, &field, kc.chart(), &samples, Orientation::Standard).map_err(err)?;
        ensure(r.max() <= tol.em_residual, format!("{}: {r:?}", g.description))?;
        worst = worst.max(r.max());
    }
    let g = sphere_product(1.0, 2.0).map_err(err)?;
    let kc = g.kahler_chart().ok_or("missing potential chart")?;
    let samples = g.samples(DEFAULT_SAMPLES_PER_AXIS);
    let wrong =
        em_residual(&*kc, &KahlerFormField(kc.clone()), kc.chart(), &samples, Orientation::Standard).map_err(err)?;
    ensure(wrong.einstein > tol.wrong_field_min, format!("wrong field not rejected: {wrong:?}"))?;
    Ok(format!("max residual {worst:.1e}; F = ω on S²(1)×S²(2) has |[r+F∘F]₀| = {:.3}", wrong.einstein))
}

fn kahler_identity(tol: &Tolerances) -> Outcome {
    let mut all = csc_kahler()?;
    all.push(deformed_sphere_product(0.3).map_err(err)?);
    let mut worst = 0.0f64;
    for g in &all {
        let r = kahler_identity_check(&*g.metric(), &g.samples(DEFAULT_SAMPLES_PER_AXIS), Orientation::Standard)
            .map_err(err)?;
        ensure(r <= tol.kahler_identity, format!("{}: {r:e}", g.description))?;
        worst = worst.max(r);
    }
    let w = warped_torus(0.5).map_err(err)?;
    let teeth = kahler_identity_check(&*w.metric(), &w.samples(DEFAULT_SAMPLES_PER_AXIS), Orientation::Standard)
        .map_err(err)?;
    ensure(teeth > 1e-2, format!("non-Kähler input passed with {teeth:e}"))?;
    Ok(format!("max ||W+|² − s²/24| = {worst:.1e}; warped torus violates by {teeth:.3}"))
}

fn integral_identities(tol: &Tolerances) -> Outcome {
    let pi2 = PI * PI;
    let s = sphere_product(1.0, 1.0).map_err(err)?;
    let r = functional_report(&s, DEFAULT_RESOLUTION).map_err(err)?;
    let inv = s.topology.ok_or("topology")?;
    let (ric_l, ric_r) = ricci_identity_sides(&r, &inv);
    let (riem_l, riem_r) = riemann_identity_sides(&r, &inv);
    let targets = [
        ("gauss_bonnet", gauss_bonnet_value(&r), 8.0, 1.0),
        ("ricci lhs", ric_l, 64.0 * pi2, 8.0 * pi2),
        ("ricci rhs", ric_r, 64.0 * pi2, 8.0 * pi2),
        ("riemann lhs", riem_l, 32.0 * pi2, 8.0 * pi2),
        ("riemann rhs", riem_r, 32.0 * pi2, 8.0 * pi2),
        ("signature", signature_value(&r), 0.0, 1.0),
    ];
    for (name, got, want, scale) in targets {
        ensure((got - want).abs() / scale <= tol.integral_identity, format!("S²×S² {name}: {got} vs {want}"))?;
    }
    let mut worst = 0.0f64;
    for g in [&s as &dyn Geometry, &hyperbolic_product(2).map_err(err)?] {
        let table = convergence_table(g, None, &[8, 16, 32, DEFAULT_RESOLUTION]).map_err(err)?;
        for name in ["gauss_bonnet", "ricci_identity", "riemann_identity", "signature"] {
            let c = column(&table, name);
            let last = *c.last().unwrap_or(&f64::NAN);
            ensure(last <= tol.integral_identity, format!("{} {name}: {last:e}", g.name()))?;
            ensure(is_second_order(&c), format!("{} {name} not second order: {c:?}", g.name()))?;
            worst = worst.max(last);
        }
    }
    Ok(format!("targets 8, 64π², 32π², 0 reproduced; max residual {worst:.1e}; convergence order ≥ 2"))
}

fn calabi_equality(tol: &Tolerances) -> Outcome {
    let mut worst = 0.0f64;
    let mut s11 = 0.0;
    for g in csc_kahler()? {
        let r = functional_report(&g, DEFAULT_RESOLUTION).map_err(err)?;
        let class = g.class_data().ok_or("class data")?;
        let BoundValue::Exact(k) = bound_rhs(BoundKind::Who1, &class.bound_inputs().map_err(err)?).map_err(err)? else {
            return Err("inexact bound".into());
        };
        let rhs = to_f64(&k) * PI * PI;
        let rel = (r.action_s2 - rhs).abs() / rhs.abs().max(1.0);
        ensure(rel <= tol.calabi_relative, format!("{}: ∫s² = {} vs {rhs}", g.description, r.action_s2))?;
        worst = worst.max(rel);
        if g.description == "round S²(1) × S²(1)" {
            s11 = to_f64(&k);
        }
    }
    ensure(s11 == 256.0, format!("S²(1)×S²(1) bound {s11}π²"))?;
    Ok(format!("max relative gap {worst:.1e}; S²(1)×S²(1) bound = 256π²"))
}

fn first_variation(tol: &Tolerances) -> Outcome {
    let g = sphere_product(1.0, 2.0).map_err(err)?;
    let h = PerturbationSpec::Profile {
        profile: Expr::coord(0).cos() + Expr::coord(2).cos().pow(2),
        block: PerturbationBlock::Factor(0),
    };
    let fv = first_variation_check(&g, &h, &[1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-4], 32).map_err(err)?;
    let rel = fv.relative_error_at(1e-4).ok_or("no rows")?;
    ensure(rel <= tol.first_variation_relative, format!("relative error {rel:e}"))?;
    ensure(
        fv.richardson.len() == 3 && fv.richardson.iter().all(|r| *r >= tol.richardson_low && *r <= tol.richardson_high),
        format!("Richardson ratios {:?}", fv.richardson),
    )?;
    let mut conf = 0.0f64;
    for g in [sphere_product(1.0, 1.0).map_err(err)?, sphere_product(1.0, 2.0).map_err(err)?] {
        let h = PerturbationSpec::Profile { profile: Expr::coord(0).cos(), block: PerturbationBlock::Full };
        let fv = first_variation_check(&g, &h, &[1e-4], 32).map_err(err)?;
        conf = conf.max(fv.analytic.abs()).max(fv.rows[0].derivative.abs());
    }
    ensure(conf <= tol.conformal_variation, format!("conformal derivative {conf:e}"))?;
    Ok(format!("relative error {rel:.1e} at t = 1e-4; ratios {:.3?}; conformal derivative {conf:.1e}", fv.richardson))
}

fn counterexample() -> Outcome {
    let ids = symbolic_identities();
    let sym = ids.iter().find(|i| i.name == "gap assembled = closed form").ok_or("missing identity")?;
    ensure(sym.holds, "symbolic gap identity fails".into())?;
    let (l, inv) = kodaira_lattice(2, 3, 16).map_err(err)?;
    let fam = fine_family(&l, &inv).map_err(err)?;
    let e = frac(1, 100);
    let s2 = q(32) * fam.s2_over_32pi2.eval(&e).map_err(err)?;
    ensure(s2 == frac(186624, 13), format!("∫s² = {s2}π²"))?;
    let gap = counterexample_gap(&l, &inv).map_err(err)?;
    let at = gap.at(&e).map_err(err)?;
    ensure(at == frac(-618, 13), format!("gap = {at}"))?;
    for (p, qg, tau) in [(2, 3, 16), (2, 2, 1), (3, 5, 7), (4, 2, 40)] {
        let (l, inv) = kodaira_lattice(p, qg, tau).map_err(err)?;
        let g = counterexample_gap(&l, &inv).map_err(err)?;
        ensure(g.sign.sign_near_zero == -1 && g.sign.certified, format!("sign not certified for ({p},{qg},{tau})"))?;
    }
    Ok(format!("∫s² = {s2}π², gap = {at}, gap < 0 certified on (0, ε*) with ε* = {}", gap.sign.threshold_f64()))
}

fn cross_checks() -> Outcome {
    let ids = symbolic_identities();
    let wanted = [
        "c1.[w] = -(chi + eps c1^2)",
        "[w]^2 = eps (2 chi + eps c1^2)",
        "c1bar.[w] = -(chi + 3 eps tau)",
        "|c1bar-|^2 - |c1bar+|^2 = 2 chi - 3 tau",
    ];
    for w in wanted {
        let id = ids.iter().find(|i| i.name == w).ok_or(format!("missing {w}"))?;
        ensure(id.holds, format!("{w} fails"))?;
    }
    Ok(format!("{} symbolic identities hold", ids.iter().filter(|i| i.holds).count()))
}

fn hitchin_thorpe_gate() -> Outcome {
    let cases = [((4, 0), (true, true)), ((0, 0), (true, true)), ((8, 16), (true, false))];
    for ((chi, tau), want) in cases {
        let got = hitchin_thorpe(&SurfaceInvariants::new(chi, tau));
        ensure(got == want, format!("({chi},{tau}) gave {got:?}"))?;
    }
    Ok("(4,0) → (true,true); (0,0) → (true,true); (8,16) → (true,false)".into())
}

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let criteria: Vec<Criterion> = vec![
        ("1 algebraic identities", Box::new(algebraic_identities)),
        ("2 Einstein-Maxwell certification", Box::new(|| einstein_maxwell(&tol))),
        ("3 Kahler identity", Box::new(|| kahler_identity(&tol))),
        ("4 integral identities", Box::new(|| integral_identities(&tol))),
        ("5 Calabi equality case", Box::new(|| calabi_equality(&tol))),
        ("6 first variation", Box::new(|| first_variation(&tol))),
        ("7 counterexample reproduction", Box::new(counterexample)),
        ("8 cross-checks", Box::new(cross_checks)),
        ("9 Hitchin-Thorpe gate", Box::new(hitchin_thorpe_gate)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
