//! Bundle families and the sampled metric profile `f(x)² dx² + g(x)² (fiber)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid the stencils are meaningful on.
pub const MIN_NODES: usize = 8;

/// Which symmetric family the metric belongs to.
///
/// The torus bundle has flat fibers and flows by `+2h`; the sphere bundle has
/// round fibers of curvature `1/g²` and flows by `-2h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleKind {
    Torus,
    Sphere,
}

impl BundleKind {
    /// Curvature constant of the unit fiber.
    pub fn kappa(self) -> f64 {
        match self {
            BundleKind::Torus => 0.0,
            BundleKind::Sphere => 1.0,
        }
    }

    /// Sign in front of the cross curvature tensor in the evolution equation.
    pub fn flow_sign(self) -> f64 {
        match self {
            BundleKind::Torus => 1.0,
            BundleKind::Sphere => -1.0,
        }
    }

    /// Area of the fiber over a point, as a multiple of `g²`.
    pub fn fiber_area_factor(self) -> f64 {
        match self {
            BundleKind::Torus => 1.0,
            BundleKind::Sphere => 4.0 * PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BundleKind::Torus => "torus",
            BundleKind::Sphere => "sphere",
        }
    }
}

impl fmt::Display for BundleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BundleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "torus" => Ok(BundleKind::Torus),
            "sphere" => Ok(BundleKind::Sphere),
            other => Err(format!("unknown bundle kind {other:?} (expected torus or sphere)")),
        }
    }
}

/// Periodic samples of `f` and `g` on a uniform grid of the base circle.
///
/// Node `i` sits at `x = i * period / n`; indices wrap modulo `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricProfile {
    period: f64,
    t: f64,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl MetricProfile {
    pub fn new(period: f64, t: f64, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let profile = MetricProfile { period, t, f, g };
        profile.validate()?;
        Ok(profile)
    }

    /// `f ≡ 1`, `g = base + amplitude * sin(wavenumber * x)` on `[0, period)`.
    pub fn sinusoid(n: usize, period: f64, base: f64, amplitude: f64, wavenumber: f64) -> Result<Self> {
        Self::from_fn(n, period, |_| 1.0, |x| base + amplitude * (wavenumber * x).sin())
    }

    pub fn from_fn(
        n: usize,
        period: f64,
        f: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let dx = period / n as f64;
        let xs = (0..n).map(|i| i as f64 * dx);
        let fs = xs.clone().map(&f).collect();
        let gs = xs.map(&g).collect();
        Self::new(period, 0.0, fs, gs)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f.len();
        if self.g.len() != n {
            return Err(Error::InputShape {
                expected: n,
                got: self.g.len(),
            });
        }
        if n < MIN_NODES {
            return Err(Error::InvalidProfile(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "period must be positive and finite, got {}",
                self.period
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidProfile(format!("non-finite time {}", self.t)));
        }
        for (name, values) in [("f", &self.f), ("g", &self.g)] {
            if let Some((i, v)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v > 0.0))
            {
                return Err(Error::InvalidProfile(format!(
                    "{name}[{i}] = {v} is not a positive finite number"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Coordinate spacing `period / n`.
    pub fn dx(&self) -> f64 {
        self.period / self.n() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Quadrature weights `f[i] Δx` of the arc-length measure `ds = f dx`.
    pub fn arc_weights(&self) -> impl Iterator<Item = f64> + '_ {
        let dx = self.dx();
        self.f.iter().map(move |fi| fi * dx)
    }

    pub fn into_parts(self) -> (f64, f64, Vec<f64>, Vec<f64>) {
        (self.period, self.t, self.f, self.g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_constants() {
        assert_eq!(
            (BundleKind::Torus.kappa(), BundleKind::Torus.flow_sign()),
            (0.0, 1.0)
        );
        assert_eq!(
            (BundleKind::Sphere.kappa(), BundleKind::Sphere.flow_sign()),
            (1.0, -1.0)
        );
        assert_eq!("Sphere".parse::<BundleKind>().unwrap(), BundleKind::Sphere);
        assert!("klein".parse::<BundleKind>().is_err());
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(MetricProfile::new(1.0, 0.0, vec![1.0; 4], vec![1.0; 4]).is_err());
        assert!(MetricProfile::new(0.0, 0.0, vec![1.0; 8], vec![1.0; 8]).is_err());
        assert!(MetricProfile::new(1.0, 0.0, vec![1.0; 8], vec![1.0; 9]).is_err());
        let mut g = vec![1.0; 8];
        g[3] = 0.0;
        assert!(MetricProfile::new(1.0, 0.0, vec![1.0; 8], g).is_err());
        let mut f = vec![1.0; 8];
        f[5] = f64::NAN;
        assert!(MetricProfile::new(1.0, 0.0, f, vec![1.0; 8]).is_err());
    }

    #[test]
    fn sinusoid_nodes() {
        let p = MetricProfile::sinusoid(16, 2.0 * PI, 2.0, 0.1, 1.0).unwrap();
        assert_eq!(p.n(), 16);
        assert!((p.g()[4] - 2.1).abs() < 1e-15);
        assert!(p.f().iter().all(|&v| v == 1.0));
        let total: f64 = p.arc_weights().sum();
        assert!((total - 2.0 * PI).abs() < 1e-14);
    }
}
