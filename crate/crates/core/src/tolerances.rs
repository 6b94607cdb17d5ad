//! Every tolerance and default resolution in one place.

use serde::{Deserialize, Serialize};

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_SAMPLES_PER_AXIS: usize = 5;

/// Below this a residual counts as converged when judging quadrature order.
pub const CONVERGENCE_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub riemann_symmetry_analytic: f64,
    pub riemann_symmetry_numeric: f64,
    pub ricci_trace: f64,
    pub star_involution: f64,
    pub split_orthogonality: f64,
    pub composition_identity: f64,
    pub block_reassembly: f64,
    pub weyl_eigenvalues: f64,
    pub kahler_identity: f64,
    pub kahler_form_closed: f64,
    pub ricci_form_closed: f64,
    pub ricci_form_crosscheck: f64,
    pub primitivity: f64,
    pub scalar_constancy: f64,
    pub em_residual: f64,
    pub wrong_field_min: f64,
    pub conformal_star: f64,
    pub integral_identity: f64,
    pub integral_identity_fubini_study: f64,
    pub calabi_relative: f64,
    pub sw_margin: f64,
    pub first_variation_relative: f64,
    pub conformal_variation: f64,
    pub richardson_low: f64,
    pub richardson_high: f64,
    pub volume_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            riemann_symmetry_analytic: 1e-9,
            riemann_symmetry_numeric: 1e-6,
            ricci_trace: 1e-10,
            star_involution: 1e-12,
            split_orthogonality: 1e-12,
            composition_identity: 1e-11,
            block_reassembly: 1e-9,
            weyl_eigenvalues: 1e-8,
            kahler_identity: 1e-8,
            kahler_form_closed: 1e-8,
            ricci_form_closed: 1e-7,
            ricci_form_crosscheck: 1e-7,
            primitivity: 1e-9,
            scalar_constancy: 1e-6,
            em_residual: 1e-6,
            wrong_field_min: 0.1,
            conformal_star: 1e-6,
            integral_identity: 1e-4,
            integral_identity_fubini_study: 1e-3,
            calabi_relative: 1e-3,
            sw_margin: 1e-3,
            first_variation_relative: 1e-3,
            conformal_variation: 1e-6,
            richardson_low: 3.5,
            richardson_high: 4.5,
            volume_relative: 1e-8,
        }
    }
}

impl Tolerances {
    /// Multiplies every absolute/relative tolerance by `k`; Richardson
    /// bounds and the wrong-field threshold are acceptance windows and are
    /// left alone.
    pub fn scaled(&self, k: f64) -> Tolerances {
        let mut t = self.clone();
        for v in [
            &mut t.riemann_symmetry_analytic,
            &mut t.riemann_symmetry_numeric,
            &mut t.ricci_trace,
            &mut t.star_involution,
            &mut t.split_orthogonality,
            &mut t.composition_identity,
            &mut t.block_reassembly,
            &mut t.weyl_eigenvalues,
            &mut t.kahler_identity,
            &mut t.kahler_form_closed,
            &mut t.ricci_form_closed,
            &mut t.ricci_form_crosscheck,
            &mut t.primitivity,
            &mut t.scalar_constancy,
            &mut t.em_residual,
            &mut t.conformal_star,
            &mut t.integral_identity,
            &mut t.integral_identity_fubini_study,
            &mut t.calabi_relative,
            &mut t.sw_margin,
            &mut t.first_variation_relative,
            &mut t.conformal_variation,
            &mut t.volume_relative,
        ] {
            *v *= k;
        }
        t
    }
}
