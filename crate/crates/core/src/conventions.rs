//! Norm conventions shared by every curvature check.
//!
//! All integral identities in this crate are evaluated with the constants
//! below and nothing else. Changing any of them changes
//! [`NORM_CONVENTION`], which reports stamp alongside their results.
//!
//! * 2-forms: `<F, G> = FORM_INNER_FACTOR * F_ab G^ab`, so a unit frame
//!   element `e1^e2` has norm 1 and a Kähler form has `|w|^2 = 2`.
//! * Curvature operator: `R(phi)_ab = CURVATURE_OPERATOR_FACTOR * R_abcd phi^cd`;
//!   the round unit sphere acts as the identity on 2-forms.
//! * `|W+|^2`, `|W-|^2`, `|Rm|^2`: squared Frobenius norms of the
//!   corresponding blocks of the curvature operator in orthonormal bases of
//!   the 2-forms.
//! * `|r|^2`, `|r0|^2`: full tensor contractions `r_ab r^ab`.
//! * Trace-free Ricci acts on 2-forms by `RICCI_BLOCK_FACTOR` times
//!   `phi_a^c r0_bc - phi_b^c r0_ac`.

pub const FORM_INNER_FACTOR: f64 = 0.5;
pub const CURVATURE_OPERATOR_FACTOR: f64 = 0.5;
pub const RICCI_BLOCK_FACTOR: f64 = 0.5;

/// Canonical text of the convention set; hashed into report stamps.
pub const NORM_CONVENTION: &str = "form_inner=1/2*F_ab*G^ab;\
curvature_operator=1/2*R_abcd*phi^cd;\
weyl_norm=frobenius(block,orthonormal Lambda+-);\
riemann_norm=frobenius(operator)=1/4*R_abcd*R^abcd;\
ricci_norm=r_ab*r^ab;\
ricci_action=1/2*(phi_a^c*r0_bc-phi_b^c*r0_ac);\
riemann_sign=R_1212>0 on round sphere;ricci=R^c_acb";
