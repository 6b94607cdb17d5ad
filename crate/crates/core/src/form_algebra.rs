//! Pointwise algebra of 2-forms on an oriented Riemannian 4-manifold and the
//! block decomposition of the curvature operator.

use nalgebra::{Matrix3, Matrix4, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::chart_geometry::{tensor_norm_sq, Point, PointFrameData};
use crate::conventions::{CURVATURE_OPERATOR_FACTOR, FORM_INNER_FACTOR, RICCI_BLOCK_FACTOR};
use crate::error::GeometryError;

/// Antisymmetric covariant components `F_ab`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoForm(pub Matrix4<f64>);

impl TwoForm {
    pub fn zero() -> Self {
        TwoForm(Matrix4::zeros())
    }

    /// Antisymmetric part of an arbitrary matrix.
    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        TwoForm(0.5 * (m - m.transpose()))
    }

    /// Six independent components in the order 01, 02, 03, 12, 13, 23.
    pub fn from_components(c: [f64; 6]) -> Self {
        let mut m = Matrix4::zeros();
        for (k, (a, b)) in PAIRS.iter().enumerate() {
            m[(*a, *b)] = c[k];
            m[(*b, *a)] = -c[k];
        }
        TwoForm(m)
    }

    /// `dx^a ∧ dx^b`.
    pub fn wedge(a: usize, b: usize) -> Self {
        let mut m = Matrix4::zeros();
        m[(a, b)] += 1.0;
        m[(b, a)] -= 1.0;
        TwoForm(m)
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        (self.0 + self.0.transpose()).abs().max()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.abs().max()
    }
}

impl std::ops::Add for TwoForm {
    type Output = TwoForm;
    fn add(self, o: TwoForm) -> TwoForm {
        TwoForm(self.0 + o.0)
    }
}

impl std::ops::Sub for TwoForm {
    type Output = TwoForm;
    fn sub(self, o: TwoForm) -> TwoForm {
        TwoForm(self.0 - o.0)
    }
}

impl std::ops::Mul<TwoForm> for f64 {
    type Output = TwoForm;
    fn mul(self, f: TwoForm) -> TwoForm {
        TwoForm(self * f.0)
    }
}

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `dx1 ∧ dy1 ∧ dx2 ∧ dy2 > 0`, the complex orientation.
    #[default]
    Standard,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Reversed => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Standard => Orientation::Reversed,
            Orientation::Reversed => Orientation::Standard,
        }
    }
}

/// Metric data at a point: `g`, `g^-1` and `sqrt(det g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMetric {
    pub g: Matrix4<f64>,
    pub g_inv: Matrix4<f64>,
    pub sqrt_det: f64,
}

impl PointMetric {
    pub fn new(g: Matrix4<f64>) -> Result<Self, GeometryError> {
        let chol = g.cholesky().ok_or(GeometryError::DegenerateMetric { point: [f64::NAN; 4] })?;
        let g_inv = chol.inverse();
        let sqrt_det = chol.l().diagonal().product();
        Ok(PointMetric { g, g_inv, sqrt_det })
    }

    pub fn euclidean() -> Self {
        PointMetric { g: Matrix4::identity(), g_inv: Matrix4::identity(), sqrt_det: 1.0 }
    }

    /// Rows are an orthonormal coframe-adapted frame: `E g E^T = I`, obtained
    /// by Gram–Schmidt on the coordinate vectors, so orientation is kept.
    pub fn orthonormal_frame(&self) -> Matrix4<f64> {
        let l = self.g.cholesky().expect("positive definite").l();
        l.try_inverse().expect("invertible Cholesky factor")
    }
}

impl From<&PointFrameData> for PointMetric {
    fn from(f: &PointFrameData) -> Self {
        PointMetric { g: f.g, g_inv: f.g_inv, sqrt_det: f.vol }
    }
}

fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut inv = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Raises both indices: `F^ab`.
pub fn raise(f: &TwoForm, m: &PointMetric) -> Matrix4<f64> {
    m.g_inv * f.0 * m.g_inv
}

/// `(⋆F)_ab = ½ √det g ε_abcd F^cd`.
pub fn hodge_star(f: &TwoForm, m: &PointMetric, orientation: Orientation) -> TwoForm {
    let up = raise(f, m);
    let k = 0.5 * m.sqrt_det * orientation.sign();
    let mut out = Matrix4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += levi_civita(a, b, c, d) * up[(c, d)];
                }
            }
            out[(a, b)] = k * s;
        }
    }
    TwoForm(out)
}

/// `(F⁺, F⁻)` with `F± = (F ± ⋆F)/2`.
pub fn split(f: &TwoForm, m: &PointMetric, orientation: Orientation) -> (TwoForm, TwoForm) {
    let s = hodge_star(f, m, orientation);
    (0.5 * (*f + s), 0.5 * (*f - s))
}

/// `<F, G> = ½ F_ab G^ab`.
pub fn inner(f: &TwoForm, g: &TwoForm, m: &PointMetric) -> f64 {
    FORM_INNER_FACTOR * raise(f, m).component_mul(&g.0).sum()
}

pub fn norm_sq(f: &TwoForm, m: &PointMetric) -> f64 {
    inner(f, f, m)
}

/// `(F∘G)_ab = F_a^c G_cb`.
pub fn compose(f: &Matrix4<f64>, g: &Matrix4<f64>, m: &PointMetric) -> Matrix4<f64> {
    f * m.g_inv * g
}

pub fn trace_g(t: &Matrix4<f64>, m: &PointMetric) -> f64 {
    m.g_inv.component_mul(t).sum()
}

/// `[T]₀ = T − (tr_g T / 4) g`.
pub fn traceless(t: &Matrix4<f64>, m: &PointMetric) -> Matrix4<f64> {
    t - m.g * (trace_g(t, m) / 4.0)
}

/// Max-norm of `[F∘F]₀ − 2 F⁺∘F⁻`, scaled by `max(1, |F|^2)`.
pub fn traceless_composition_identity(f: &TwoForm, m: &PointMetric, orientation: Orientation) -> f64 {
    let (p, n) = split(f, m, orientation);
    let lhs = traceless(&compose(&f.0, &f.0, m), m);
    let rhs = 2.0 * compose(&p.0, &n.0, m);
    (lhs - rhs).abs().max() / norm_sq(f, m).abs().max(1.0)
}

/// `2 φ_[a^c r_b]c = φ_a^c r_bc − φ_b^c r_ac` for a symmetric `r`. The
/// trace-free Ricci part of the curvature operator is
/// `RICCI_BLOCK_FACTOR` times this.
pub fn ricci_action(r: &Matrix4<f64>, phi: &TwoForm, m: &PointMetric) -> TwoForm {
    let p = phi.0 * m.g_inv * r;
    TwoForm(p - p.transpose())
}

/// Unit self-dual (first three) and anti-self-dual (last three) forms in an
/// orthonormal frame.
pub fn frame_basis() -> [Matrix4<f64>; 6] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = |a: usize, b: usize| TwoForm::wedge(a, b).0;
    [
        h * (e(0, 1) + e(2, 3)),
        h * (e(0, 2) + e(3, 1)),
        h * (e(0, 3) + e(1, 2)),
        h * (e(0, 1) - e(2, 3)),
        h * (e(0, 2) - e(3, 1)),
        h * (e(0, 3) - e(1, 2)),
    ]
}

/// The same basis expressed as coordinate 2-forms: `F = E⁻¹ F̂ E⁻ᵀ`.
pub fn coordinate_basis(m: &PointMetric) -> [TwoForm; 6] {
    let e_inv = m.g * m.orthonormal_frame().transpose();
    frame_basis().map(|b| TwoForm(e_inv * b * e_inv.transpose()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureBlocks {
    pub point: Point,
    pub orientation: Orientation,
    /// Matrix of the curvature operator on `Λ⁺ ⊕ Λ⁻` in unit orthonormal bases.
    pub operator: Matrix6<f64>,
    pub w_plus: Matrix3<f64>,
    pub w_minus: Matrix3<f64>,
    /// Off-diagonal block `Λ⁻ → Λ⁺`.
    pub ricci_block: Matrix3<f64>,
    pub scalar: f64,
    pub ricci_traceless: Matrix4<f64>,
    pub metric: PointMetric,
}

fn frame_riemann(frame: &PointFrameData, e: &Matrix4<f64>) -> [[[[f64; 4]; 4]; 4]; 4] {
    // contract one index at a time
    let r = &frame.riemann;
    let mut t = *r;
    for slot in 0..4 {
        let src = t;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let idx = [i, j, k, l];
                        let mut s = 0.0;
                        for a in 0..4 {
                            let mut src_idx = idx;
                            src_idx[slot] = a;
                            s += e[(idx[slot], a)] * src[src_idx[0]][src_idx[1]][src_idx[2]][src_idx[3]];
                        }
                        t[i][j][k][l] = s;
                    }
                }
            }
        }
    }
    t
}

fn operator_matrix(rhat: &[[[[f64; 4]; 4]; 4]; 4], basis: &[Matrix4<f64>; 6]) -> Matrix6<f64> {
    // <β_α, R β_β> = FORM_INNER_FACTOR * CURVATURE_OPERATOR_FACTOR * Σ β_α,ij R_ijkl β_β,kl
    let k = FORM_INNER_FACTOR * CURVATURE_OPERATOR_FACTOR;
    let mut m = Matrix6::zeros();
    for al in 0..6 {
        for be in 0..6 {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    let x = basis[al][(i, j)];
                    if x == 0.0 {
                        continue;
                    }
                    for kk in 0..4 {
                        for l in 0..4 {
                            s += x * rhat[i][j][kk][l] * basis[be][(kk, l)];
                        }
                    }
                }
            }
            m[(al, be)] = k * s;
        }
    }
    0.5 * (m + m.transpose())
}

/// Decomposes the curvature operator into `W⁺`, `W⁻`, `s` and the trace-free
/// Ricci block.
pub fn curvature_blocks(frame: &PointFrameData, orientation: Orientation) -> CurvatureBlocks {
    let metric = PointMetric::from(frame);
    let e = metric.orthonormal_frame();
    let rhat = frame_riemann(frame, &e);
    let mut op = operator_matrix(&rhat, &frame_basis());
    if orientation == Orientation::Reversed {
        // Λ⁺ and Λ⁻ trade places
        let p = Matrix6::from_fn(|i, j| if j == (i + 3) % 6 { 1.0 } else { 0.0 });
        op = p * op * p.transpose();
    }
    let s12 = frame.scalar / 12.0;
    let w_plus = op.fixed_view::<3, 3>(0, 0).into_owned() - Matrix3::identity() * s12;
    let w_minus = op.fixed_view::<3, 3>(3, 3).into_owned() - Matrix3::identity() * s12;
    let ricci_block = op.fixed_view::<3, 3>(0, 3).into_owned();
    CurvatureBlocks {
        point: frame.point,
        orientation,
        operator: op,
        w_plus,
        w_minus,
        ricci_block,
        scalar: frame.scalar,
        ricci_traceless: frame.ricci_traceless,
        metric,
    }
}

impl CurvatureBlocks {
    /// Matrix of `φ ↦ RICCI_BLOCK_FACTOR · ricci_action(r₀, φ)` in the same
    /// bases as [`CurvatureBlocks::operator`].
    pub fn ricci_operator(&self) -> Matrix6<f64> {
        let mut basis = coordinate_basis(&self.metric);
        if self.orientation == Orientation::Reversed {
            basis.rotate_left(3);
        }
        let mut out = Matrix6::zeros();
        for be in 0..6 {
            let image = ricci_action(&self.ricci_traceless, &basis[be], &self.metric);
            for al in 0..6 {
                out[(al, be)] = RICCI_BLOCK_FACTOR * inner(&basis[al], &image, &self.metric);
            }
        }
        out
    }

    /// Max-norm of the operator minus its reassembly from `W±`, `s` and `r₀`,
    /// relative to `max(1, max |operator|)`.
    pub fn reassembly_residual(&self) -> f64 {
        let mut rebuilt = self.ricci_operator();
        let s12 = self.scalar / 12.0;
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { s12 } else { 0.0 };
                rebuilt[(i, j)] += self.w_plus[(i, j)] + id;
                rebuilt[(i + 3, j + 3)] += self.w_minus[(i, j)] + id;
            }
        }
        (rebuilt - self.operator).abs().max() / self.operator.abs().max().max(1.0)
    }

    /// Eigenvalues of `W⁺` in decreasing order.
    pub fn w_plus_eigenvalues(&self) -> [f64; 3] {
        sorted_eigenvalues(&self.w_plus)
    }

    pub fn w_minus_eigenvalues(&self) -> [f64; 3] {
        sorted_eigenvalues(&self.w_minus)
    }

    pub fn norms(&self) -> PointwiseNorms {
        PointwiseNorms {
            scalar: self.scalar,
            w_plus_sq: self.w_plus.norm_squared(),
            w_minus_sq: self.w_minus.norm_squared(),
            ricci_traceless_sq: tensor_norm_sq(&self.metric.g_inv, &self.ricci_traceless),
            riemann_sq: self.operator.norm_squared(),
            vol: self.metric.sqrt_det,
        }
    }
}

pub fn sorted_eigenvalues(m: &Matrix3<f64>) -> [f64; 3] {
    let sym = 0.5 * (m + m.transpose());
    let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    [v[0], v[1], v[2]]
}

/// Curvature norms at a point, all in the conventions of [`crate::conventions`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseNorms {
    pub scalar: f64,
    pub w_plus_sq: f64,
    pub w_minus_sq: f64,
    pub ricci_traceless_sq: f64,
    pub riemann_sq: f64,
    pub vol: f64,
}

pub fn pointwise_norms(frame: &PointFrameData, orientation: Orientation) -> PointwiseNorms {
    curvature_blocks(frame, orientation).norms()
}
