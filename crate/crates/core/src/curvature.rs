//! Closed-form curvature of the warped metrics on a periodic grid.
//!
//! With `w = g_s` and `w_s = g_ss` (arc-length derivatives, `∂_s = f⁻¹ ∂_x`),
//! the orthonormal frame `e₁ = f⁻¹∂_x, e₂, e₃` diagonalizes the curvature
//! operator and
//!
//! ```text
//! K12 = K13 = -w_s / g        K23 = -(w² - κ) / g²
//! ```
//!
//! Everything else (Ricci, scalar, Einstein and cross curvature) follows
//! algebraically from these two sectional curvatures.

use crate::error::{Error, Result};
use crate::profile::{BundleKind, MetricProfile};

/// Centered periodic difference `(v[i+1] - v[i-1]) / (2 Δx f[i])`.
pub fn s_derivative(profile: &MetricProfile, values: &[f64]) -> Result<Vec<f64>> {
    if values.len() != profile.n() {
        return Err(Error::InputShape {
            expected: profile.n(),
            got: values.len(),
        });
    }
    let mut out = vec![0.0; values.len()];
    s_derivative_into(profile.f(), profile.dx(), values, &mut out);
    Ok(out)
}

/// Unchecked kernel behind [`s_derivative`]; all slices must share a length.
pub(crate) fn s_derivative_into(f: &[f64], dx: f64, values: &[f64], out: &mut [f64]) {
    let n = values.len();
    let inv_2dx = 0.5 / dx;
    for i in 0..n {
        let next = values[(i + 1) % n];
        let prev = values[(i + n - 1) % n];
        out[i] = (next - prev) * inv_2dx / f[i];
    }
}

/// Per-node curvature package in the orthonormal frame.
///
/// Repeated eigenvalues are stored once: `K13 = K12`, `Ric33 = Ric22`,
/// `P33 = P22`, `h33 = h22`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub kind: BundleKind,
    pub w: Vec<f64>,
    pub w_s: Vec<f64>,
    pub k12: Vec<f64>,
    pub k23: Vec<f64>,
    pub ric11: Vec<f64>,
    pub ric22: Vec<f64>,
    pub r: Vec<f64>,
    pub p11: Vec<f64>,
    pub p22: Vec<f64>,
    pub h11: Vec<f64>,
    pub h22: Vec<f64>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Adjugate of a 3×3 matrix, i.e. `det(m) m⁻¹` whenever the inverse exists.
///
/// This is the cross curvature tensor of an Einstein tensor given in an
/// orthonormal frame (`det g = 1`), and stays defined when `m` is singular.
pub fn adjugate3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    // adj[i][j] = cofactor[j][i]
    [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ]
}

/// Evaluate all curvature quantities at every node.
pub fn curvature_field(profile: &MetricProfile, kind: BundleKind) -> Result<CurvatureField> {
    let n = profile.n();
    let kappa = kind.kappa();
    let w = s_derivative(profile, profile.g())?;
    let w_s = s_derivative(profile, &w)?;

    let mut field = CurvatureField {
        kind,
        w,
        w_s,
        k12: vec![0.0; n],
        k23: vec![0.0; n],
        ric11: vec![0.0; n],
        ric22: vec![0.0; n],
        r: vec![0.0; n],
        p11: vec![0.0; n],
        p22: vec![0.0; n],
        h11: vec![0.0; n],
        h22: vec![0.0; n],
    };

    for i in 0..n {
        let g = profile.g()[i];
        let w = field.w[i];
        let w_s = field.w_s[i];
        let fiber = w * w - kappa;

        let k12 = -w_s / g;
        let k23 = -fiber / (g * g);
        field.k12[i] = k12;
        field.k23[i] = k23;
        field.ric11[i] = 2.0 * k12;
        field.ric22[i] = k12 + k23;
        field.r[i] = 4.0 * k12 + 2.0 * k23;

        let p11 = fiber / (g * g);
        let p22 = w_s / g;
        field.p11[i] = p11;
        field.p22[i] = p22;

        let einstein = [[p11, 0.0, 0.0], [0.0, p22, 0.0], [0.0, 0.0, p22]];
        let h = adjugate3(&einstein);
        field.h11[i] = h[0][0];
        field.h22[i] = h[1][1];

        for (quantity, v) in [
            ("w", w),
            ("w_s", w_s),
            ("K12", k12),
            ("K23", k23),
            ("h11", h[0][0]),
            ("h22", h[1][1]),
        ] {
            if !v.is_finite() {
                return Err(Error::NumericOverflow {
                    quantity,
                    node: i,
                    t: profile.t(),
                });
            }
        }
    }
    Ok(field)
}

/// Cross curvature eigenvalues `(h11, h22)` as produced by the Einstein-tensor route.
pub fn cross_curvature(field: &CurvatureField) -> (Vec<f64>, Vec<f64>) {
    (field.h11.clone(), field.h22.clone())
}

/// Cross curvature from sectional curvatures alone: the eigenvalue in a
/// direction is the product of the curvatures of the two frame planes
/// containing it (`h11 = K12 K13`, `h22 = K12 K23`).
pub fn cross_curvature_oracle(field: &CurvatureField) -> (Vec<f64>, Vec<f64>) {
    let h11 = field.k12.iter().map(|k| k * k).collect();
    let h22 = field
        .k12
        .iter()
        .zip(&field.k23)
        .map(|(a, b)| a * b)
        .collect();
    (h11, h22)
}

/// Components in the coordinate basis: `h(∂x,∂x) = f² h11` and
/// `h(∂y,∂y) = g² h22`. For the sphere, `h(∂z,∂z) = cos²y · h(∂y,∂y)`.
pub fn cross_curvature_natural(
    field: &CurvatureField,
    profile: &MetricProfile,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if field.len() != profile.n() {
        return Err(Error::InputShape {
            expected: profile.n(),
            got: field.len(),
        });
    }
    let hxx = field
        .h11
        .iter()
        .zip(profile.f())
        .map(|(h, f)| f * f * h)
        .collect();
    let hyy = field
        .h22
        .iter()
        .zip(profile.g())
        .map(|(h, g)| g * g * h)
        .collect();
    Ok((hxx, hyy))
}
