use emkahler::form_algebra::{
    hodge_star, inner, norm_sq, split, traceless_composition_identity, Orientation, PointMetric, TwoForm,
};
use nalgebra::Matrix4;
use proptest::prelude::*;

fn spd(a: [f64; 16]) -> PointMetric {
    let a = Matrix4::from_row_slice(&a);
    PointMetric::new(a * a.transpose() + Matrix4::identity() * 0.5).unwrap()
}

fn orientation() -> impl Strategy<Value = Orientation> {
    prop_oneof![Just(Orientation::Standard), Just(Orientation::Reversed)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn traceless_square_is_twice_mixed_composition(
        a in prop::array::uniform16(-1.0f64..1.0),
        c in prop::array::uniform6(-1.0f64..1.0),
        o in orientation(),
    ) {
        let m = spd(a);
        prop_assert!(traceless_composition_identity(&TwoForm::from_components(c), &m, o) <= 1e-11);
    }

    #[test]
    fn star_is_an_involution_and_splits_orthogonally(
        a in prop::array::uniform16(-1.0f64..1.0),
        c in prop::array::uniform6(-1.0f64..1.0),
        o in orientation(),
    ) {
        let m = spd(a);
        let f = TwoForm::from_components(c);
        let scale = f.max_abs().max(1.0);
        let back = hodge_star(&hodge_star(&f, &m, o), &m, o);
        prop_assert!((back - f).max_abs() <= 1e-12 * scale);
        let (p, n) = split(&f, &m, o);
        prop_assert!(inner(&p, &n, &m).abs() <= 1e-12 * norm_sq(&f, &m).max(1.0));
        prop_assert!((hodge_star(&p, &m, o) - p).max_abs() <= 1e-12 * scale);
        prop_assert!((hodge_star(&n, &m, o) + n).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn star_is_an_isometry(
        a in prop::array::uniform16(-1.0f64..1.0),
        c in prop::array::uniform6(-1.0f64..1.0),
    ) {
        let m = spd(a);
        let f = TwoForm::from_components(c);
        let s = hodge_star(&f, &m, Orientation::Standard);
        prop_assert!((norm_sq(&s, &m) - norm_sq(&f, &m)).abs() <= 1e-11 * norm_sq(&f, &m).max(1.0));
    }

    #[test]
    fn reversing_orientation_swaps_the_halves(
        a in prop::array::uniform16(-1.0f64..1.0),
        c in prop::array::uniform6(-1.0f64..1.0),
    ) {
        let m = spd(a);
        let f = TwoForm::from_components(c);
        let (p, n) = split(&f, &m, Orientation::Standard);
        let (p2, n2) = split(&f, &m, Orientation::Reversed);
        prop_assert!((p - n2).max_abs() <= 1e-12 * f.max_abs().max(1.0));
        prop_assert!((n - p2).max_abs() <= 1e-12 * f.max_abs().max(1.0));
    }
}

#[test]
fn euclidean_star_on_basis() {
    let m = PointMetric::euclidean();
    let s = hodge_star(&TwoForm::wedge(0, 1), &m, Orientation::Standard);
    assert_eq!(s, TwoForm::wedge(2, 3));
    let s = hodge_star(&TwoForm::wedge(0, 2), &m, Orientation::Standard);
    assert_eq!(s, TwoForm::wedge(3, 1));
}
