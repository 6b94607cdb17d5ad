use std::sync::Arc;

use emkahler::form_algebra::Orientation;
use emkahler::geometry::{
    deformed_sphere_product, flat_torus, fubini_study, hyperbolic_product, sphere_product, warped_torus, Geometry,
};
use emkahler::kahler_maxwell::{
    canonical_maxwell, closedness_check, em_residual, kahler_identity_check, kahler_point_check, KahlerFormField,
};
use emkahler::tolerances::{Tolerances, DEFAULT_SAMPLES_PER_AXIS};

fn csc_kahler() -> Vec<Box<dyn Geometry>> {
    vec![
        Box::new(flat_torus().unwrap()),
        Box::new(sphere_product(1.0, 1.0).unwrap()),
        Box::new(sphere_product(1.0, 2.0).unwrap()),
        Box::new(sphere_product(1.0, 3.0).unwrap()),
        Box::new(hyperbolic_product(2).unwrap()),
        Box::new(fubini_study().unwrap()),
    ]
}

#[test]
fn canonical_field_solves_einstein_maxwell_on_csc_builtins() {
    let tol = Tolerances::default();
    for g in csc_kahler() {
        let kc = g.kahler_chart().unwrap();
        let samples = g.samples(DEFAULT_SAMPLES_PER_AXIS);
        let field = canonical_maxwell(kc.clone(), &samples, tol.scalar_constancy).unwrap();
        let r = em_residual(&*kc, &field, kc.chart(), &samples, Orientation::Standard).unwrap();
        assert!(r.max() <= tol.em_residual, "{}: {r:?}", g.description());
    }
}

#[test]
fn kahler_form_alone_fails_on_unequal_spheres() {
    let g = sphere_product(1.0, 2.0).unwrap();
    let kc = g.kahler_chart().unwrap();
    let samples = g.samples(3);
    let r = em_residual(&*kc, &KahlerFormField(kc.clone()), kc.chart(), &samples, Orientation::Standard).unwrap();
    assert!(r.d_f < 1e-6 && r.d_star_f < 1e-6);
    assert!(r.einstein > Tolerances::default().wrong_field_min, "{r:?}");
}

#[test]
fn non_constant_scalar_curvature_is_refused() {
    let kc = Arc::new(
        emkahler::kahler_maxwell::KahlerChart::parse(
            "|z1|^2 + |z2|^2 + 0.1*|z1|^4",
            emkahler::chart_geometry::Chart::cube(-0.5, 0.5).unwrap(),
        )
        .unwrap(),
    );
    let samples = kc.chart().sample_grid(3);
    assert!(canonical_maxwell(kc, &samples, 1e-6).is_err());
}

#[test]
fn kahler_identity_holds_on_kahler_builtins_and_fails_on_warped_torus() {
    let tol = Tolerances::default();
    let mut all: Vec<Box<dyn Geometry>> = csc_kahler();
    all.push(Box::new(deformed_sphere_product(0.3).unwrap()));
    for g in &all {
        let r = kahler_identity_check(&*g.metric(), &g.samples(4), Orientation::Standard).unwrap();
        assert!(r <= tol.kahler_identity, "{}: {r}", g.name());
    }
    let w = warped_torus(0.5).unwrap();
    let r = kahler_identity_check(&*w.metric(), &w.samples(4), Orientation::Standard).unwrap();
    assert!(r > 1e-2, "{r}");
}

#[test]
fn kahler_and_ricci_forms_are_closed_and_consistent() {
    let tol = Tolerances::default();
    for g in csc_kahler() {
        let kc = g.kahler_chart().unwrap();
        let samples = g.samples(3);
        let (dw, drho) = closedness_check(&kc, &samples).unwrap();
        assert!(dw <= tol.kahler_form_closed && drho <= tol.ricci_form_closed, "{}", g.name());
        for x in &samples {
            let c = kahler_point_check(&kc, x).unwrap();
            assert!(c.ricci_crosscheck <= tol.ricci_form_crosscheck);
            assert!(c.primitivity <= tol.primitivity);
            assert!((c.omega_norm_sq - 2.0).abs() < 1e-10);
        }
    }
}
