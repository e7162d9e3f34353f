//! Geometric functionals of a profile and the closed-form rates at which
//! they change under the flow.
//!
//! Integrals are taken against arc length, `∫ φ ds ≈ Σ φ[i] f[i] Δx`, which
//! is the periodic trapezoid rule in `x`.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_field, s_derivative_into};
use crate::error::Result;
use crate::profile::{BundleKind, MetricProfile};

/// One time-stamped row of geometric functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Orbit length `∫ ds`.
    pub l: f64,
    /// Bundle volume `∫ A g² ds`, `A` the fiber area factor.
    pub v: f64,
    pub g_max: f64,
    pub g_min: f64,
    pub sup_gs: f64,
    pub sup_gss: f64,
    /// `∫ g_ss² / g² ds`.
    pub e2: f64,
    pub l2_gss: f64,
    pub l2_gsss: f64,
    pub zero_count: u32,
    pub dl_dt_formula: f64,
    pub dv_dt_formula: Option<f64>,
    pub e2_rate_formula: Option<f64>,
    pub l2_gsss_rate_formula: Option<f64>,
    pub k12_sup: f64,
    pub k23_mean: f64,
    pub k23_spread: f64,
    pub r_mean: f64,
}

impl DiagnosticsRecord {
    /// Arc-length RMS of `g`, `sqrt(V / (A L))`; the limit constant of `g`
    /// when the profile has flattened.
    pub fn g_rms(&self, kind: BundleKind) -> f64 {
        (self.v / (kind.fiber_area_factor() * self.l)).sqrt()
    }
}

/// Arc-length derivatives `g_s … g_ssss` at every node.
#[derive(Clone, Debug)]
pub struct ArcDerivatives {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub g3: Vec<f64>,
    pub g4: Vec<f64>,
}

impl ArcDerivatives {
    pub fn of(profile: &MetricProfile) -> Self {
        let n = profile.n();
        let (f, dx) = (profile.f(), profile.dx());
        let mut d = ArcDerivatives {
            g1: vec![0.0; n],
            g2: vec![0.0; n],
            g3: vec![0.0; n],
            g4: vec![0.0; n],
        };
        s_derivative_into(f, dx, profile.g(), &mut d.g1);
        s_derivative_into(f, dx, &d.g1, &mut d.g2);
        s_derivative_into(f, dx, &d.g2, &mut d.g3);
        s_derivative_into(f, dx, &d.g3, &mut d.g4);
        d
    }
}

/// Closed-form time derivatives of the tracked functionals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFormulas {
    pub dl_dt: f64,
    /// Torus only.
    pub dv_dt: Option<f64>,
    pub e2_rate: f64,
    /// Sphere only.
    pub l2_gsss_rate: Option<f64>,
}

fn integrate(profile: &MetricProfile, integrand: impl Fn(usize) -> f64) -> f64 {
    profile
        .arc_weights()
        .enumerate()
        .map(|(i, w)| integrand(i) * w)
        .sum()
}

/// Number of sign changes around the circle; exact zeros are skipped.
pub fn sign_changes(values: &[f64]) -> u32 {
    let signs: Vec<bool> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    if signs.len() < 2 {
        return 0;
    }
    let mut count = 0;
    for i in 0..signs.len() {
        if signs[i] != signs[(i + 1) % signs.len()] {
            count += 1;
        }
    }
    count
}

pub fn rate_formulas(profile: &MetricProfile, kind: BundleKind) -> RateFormulas {
    rates_from(profile, kind, &ArcDerivatives::of(profile))
}

fn rates_from(profile: &MetricProfile, kind: BundleKind, d: &ArcDerivatives) -> RateFormulas {
    let g = profile.g();
    let (g1, g2, g3, g4) = (&d.g1, &d.g2, &d.g3, &d.g4);
    let dissipation = integrate(profile, |i| (g2[i] / g[i]).powi(2));

    match kind {
        BundleKind::Torus => {
            let dv_dt = integrate(profile, |i| {
                2.0 / 3.0 * g1[i].powi(4) / (g[i] * g[i]) + g2[i] * g2[i]
            });
            let e2_rate = integrate(profile, |i| {
                let (gi, a, b, c) = (g[i], g1[i], g2[i], g3[i]);
                -38.0 / 3.0 * a * a * b.powi(3) / gi.powi(5) - b.powi(4) / (3.0 * gi.powi(4))
                    - 2.0 * a * a * c * c / gi.powi(4)
                    + 12.0 * a.powi(4) * b * b / gi.powi(6)
            });
            RateFormulas {
                dl_dt: dissipation,
                dv_dt: Some(dv_dt),
                e2_rate,
                l2_gsss_rate: None,
            }
        }
        BundleKind::Sphere => {
            let e2_rate = integrate(profile, |i| {
                let (gi, a, b, c) = (g[i], g1[i], g2[i], g3[i]);
                let q = 1.0 - a * a;
                -2.0 / gi.powi(4) * q * c * c
                    + b.powi(4) / (3.0 * gi.powi(4))
                    + (38.0 / 3.0 * a * a - 6.0) * b.powi(3) / gi.powi(5)
                    + 12.0 / gi.powi(6) * a * a * q * b * b
            });
            let l2_gsss_rate = integrate(profile, |i| {
                let (gi, a, b, c, e) = (g[i], g1[i], g2[i], g3[i], g4[i]);
                let a2 = a * a;
                let q = 1.0 - a2;
                -2.0 / gi.powi(2) * q * e * e
                    + 24.0 / gi.powi(4) * a2 * q * c * c
                    - 44.0 / gi.powi(3) * (3.0 / 11.0 - a2) * b * c * c
                    + b * b * c * c / gi.powi(2)
                    + 8.0 / gi.powi(2) * a * b * c * e
                    - 120.0 / gi.powi(6) * a2 * a2 * q * b * b
                    + 248.0 / gi.powi(5) * a2 * (15.0 / 31.0 - a2) * b.powi(3)
                    - 96.0 / gi.powi(4) * (1.0 / 8.0 - a2) * b.powi(4)
                    + 32.0 / gi.powi(3) * a * b.powi(3) * c
            });
            RateFormulas {
                dl_dt: -dissipation,
                dv_dt: None,
                e2_rate,
                l2_gsss_rate: Some(l2_gsss_rate),
            }
        }
    }
}

/// Evaluate every tracked functional of `profile`.
pub fn functionals(profile: &MetricProfile, kind: BundleKind) -> Result<DiagnosticsRecord> {
    let g = profile.g();
    let d = ArcDerivatives::of(profile);
    let rates = rates_from(profile, kind, &d);
    let curv = curvature_field(profile, kind)?;

    let l: f64 = profile.arc_weights().sum();
    let v = kind.fiber_area_factor() * integrate(profile, |i| g[i] * g[i]);
    let sup_abs = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(DiagnosticsRecord {
        t: profile.t(),
        l,
        v,
        g_max: max(g),
        g_min: min(g),
        sup_gs: sup_abs(&d.g1),
        sup_gss: sup_abs(&d.g2),
        e2: integrate(profile, |i| (d.g2[i] / g[i]).powi(2)),
        l2_gss: integrate(profile, |i| d.g2[i] * d.g2[i]),
        l2_gsss: integrate(profile, |i| d.g3[i] * d.g3[i]),
        zero_count: sign_changes(&d.g1),
        dl_dt_formula: rates.dl_dt,
        dv_dt_formula: rates.dv_dt,
        e2_rate_formula: Some(rates.e2_rate),
        l2_gsss_rate_formula: rates.l2_gsss_rate,
        k12_sup: sup_abs(&curv.k12),
        k23_mean: integrate(profile, |i| curv.k23[i]) / l,
        k23_spread: max(&curv.k23) - min(&curv.k23),
        r_mean: integrate(profile, |i| curv.r[i]) / l,
    })
}
