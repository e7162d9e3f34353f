//! Explicit time stepping of the reduced system for `(f, g)` in the fixed
//! `x` chart.
//!
//! With `w = g_x / f` and `∂_x w`, both families read
//!
//! ```text
//! f_t = ± (∂_x w)² / (f g²)
//! g_t = ± (w² - κ) ∂_x w / (f g²)       (torus: w² + ε in place of w² - κ)
//! ```
//!
//! (`+` torus, `-` sphere). The arc-length form and the drift of `∂_s` are
//! recovered diagnostically rather than built into the grid.

use crate::curvature::{s_derivative, s_derivative_into};
use crate::diagnostics::{functionals, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::profile::{BundleKind, MetricProfile};

/// Bound on `sup |g_s|` the sphere flow requires at `t = 0`.
pub const SPHERE_SLOPE_BOUND: f64 = 0.25;

/// Maximum number of `dt` halvings after a positivity failure.
pub const MAX_RETRIES: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub kind: BundleKind,
    /// Torus regularization added to the degenerate coefficient `g_s²`.
    pub epsilon: f64,
    /// Fraction of the explicit diffusion limit used per step, in `(0, 1]`.
    pub safety: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub record_every: f64,
    /// Stop at the first record where `g_max - g_min` has shrunk below this
    /// fraction of its initial value.
    pub stop_spread_ratio: Option<f64>,
}

impl FlowConfig {
    pub fn new(kind: BundleKind, t_end: f64) -> Self {
        FlowConfig {
            kind,
            epsilon: 0.0,
            safety: 0.25,
            dt_max: 1.0,
            t_end,
            record_every: 0.01 * t_end,
            stop_spread_ratio: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidProfile(format!("flow config: {what} = {v} out of range")))
        };
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety", self.safety);
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return bad("dt_max", self.dt_max);
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", self.t_end);
        }
        if !(self.record_every > 0.0 && self.record_every.is_finite()) {
            return bad("record_every", self.record_every);
        }
        if let Some(r) = self.stop_spread_ratio {
            if !(r > 0.0 && r < 1.0) {
                return bad("stop_spread_ratio", r);
            }
        }
        Ok(())
    }
}

/// Outcome of [`validate_initial`].
#[derive(Clone, Debug, PartialEq)]
pub struct InitialCheck {
    pub sup_gs: f64,
    /// Torus with constant `g`: every node is a fixed point.
    pub stationary: bool,
}

pub fn validate_initial(profile: &MetricProfile, kind: BundleKind) -> Result<InitialCheck> {
    profile.validate()?;
    let gs = s_derivative(profile, profile.g())?;
    let sup_gs = gs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match kind {
        BundleKind::Sphere if sup_gs > SPHERE_SLOPE_BOUND => Err(Error::SlopeCondition {
            sup_gs,
            bound: SPHERE_SLOPE_BOUND,
        }),
        BundleKind::Sphere => Ok(InitialCheck {
            sup_gs,
            stationary: false,
        }),
        BundleKind::Torus => {
            let g = profile.g();
            let stationary = g.iter().all(|&v| v == g[0]);
            Ok(InitialCheck { sup_gs, stationary })
        }
    }
}

/// Time derivatives `(df/dt, dg/dt)` at every node.
pub fn rhs(profile: &MetricProfile, kind: BundleKind, epsilon: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = profile.n();
    let mut df = vec![0.0; n];
    let mut dg = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    rhs_into(
        profile.f(),
        profile.g(),
        profile.dx(),
        kind,
        epsilon,
        &mut scratch,
        &mut df,
        &mut dg,
    );
    if let Some(i) = (0..n).find(|&i| !(df[i].is_finite() && dg[i].is_finite())) {
        return Err(Error::NumericOverflow {
            quantity: "flow rhs",
            node: i,
            t: profile.t(),
        });
    }
    Ok((df, dg))
}

#[allow(clippy::too_many_arguments)]
fn rhs_into(
    f: &[f64],
    g: &[f64],
    dx: f64,
    kind: BundleKind,
    epsilon: f64,
    w: &mut [f64],
    df: &mut [f64],
    dg: &mut [f64],
) {
    let n = f.len();
    s_derivative_into(f, dx, g, w);
    let inv_2dx = 0.5 / dx;
    for i in 0..n {
        // ∂_x w, not ∂_s w
        let wx = (w[(i + 1) % n] - w[(i + n - 1) % n]) * inv_2dx;
        let denom = f[i] * g[i] * g[i];
        let w2 = w[i] * w[i];
        match kind {
            BundleKind::Torus => {
                df[i] = wx * wx / denom;
                dg[i] = (w2 + epsilon) * wx / denom;
            }
            BundleKind::Sphere => {
                df[i] = -wx * wx / denom;
                dg[i] = -(w2 - 1.0) * wx / denom;
            }
        }
    }
}

/// Largest diffusion coefficient of the principal part over the grid.
pub fn max_diffusion(profile: &MetricProfile, kind: BundleKind, epsilon: f64) -> f64 {
    let mut w = vec![0.0; profile.n()];
    s_derivative_into(profile.f(), profile.dx(), profile.g(), &mut w);
    w.iter()
        .zip(profile.g())
        .map(|(w, g)| match kind {
            BundleKind::Torus => (w * w + epsilon) / (g * g),
            BundleKind::Sphere => ((1.0 - w * w) / (g * g)).max(0.0),
        })
        .fold(0.0, f64::max)
}

/// Explicit step size `min(dt_max, safety Δs² / D_max)`, `Δs` the smallest
/// arc-length spacing.
pub fn stable_dt(profile: &MetricProfile, kind: BundleKind, epsilon: f64, safety: f64, dt_max: f64) -> f64 {
    let d_max = max_diffusion(profile, kind, epsilon);
    if d_max <= 0.0 {
        return dt_max;
    }
    let dx = profile.dx();
    let ds = profile.f().iter().fold(f64::INFINITY, |m, f| m.min(f * dx));
    dt_max.min(safety * ds * ds / d_max)
}

/// One classical RK4 step of the joint state `(f, g)`.
pub fn step(profile: &MetricProfile, kind: BundleKind, epsilon: f64, dt: f64) -> Result<MetricProfile> {
    let fail = |reason: String| Error::StepFailure {
        t_last_good: profile.t(),
        retries: 0,
        reason,
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(fail(format!("invalid step size {dt}")));
    }
    let n = profile.n();
    let dx = profile.dx();
    let (f0, g0) = (profile.f(), profile.g());

    let mut w = vec![0.0; n];
    let mut kf = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut kg = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut fs = vec![0.0; n];
    let mut gs = vec![0.0; n];

    let stage_weights = [0.5, 0.5, 1.0];
    rhs_into(f0, g0, dx, kind, epsilon, &mut w, &mut kf[0], &mut kg[0]);
    for s in 0..3 {
        let c = stage_weights[s] * dt;
        for i in 0..n {
            fs[i] = f0[i] + c * kf[s][i];
            gs[i] = g0[i] + c * kg[s][i];
        }
        rhs_into(&fs, &gs, dx, kind, epsilon, &mut w, &mut kf[s + 1], &mut kg[s + 1]);
    }

    let sixth = dt / 6.0;
    let mut f1 = vec![0.0; n];
    let mut g1 = vec![0.0; n];
    for i in 0..n {
        f1[i] = f0[i] + sixth * (kf[0][i] + 2.0 * kf[1][i] + 2.0 * kf[2][i] + kf[3][i]);
        g1[i] = g0[i] + sixth * (kg[0][i] + 2.0 * kg[1][i] + 2.0 * kg[2][i] + kg[3][i]);
    }
    if let Some(i) = (0..n).find(|&i| !(f1[i].is_finite() && g1[i].is_finite())) {
        return Err(fail(format!("non-finite state at node {i}")));
    }
    if let Some(i) = (0..n).find(|&i| f1[i] <= 0.0 || g1[i] <= 0.0) {
        return Err(fail(format!(
            "positivity lost at node {i} (f = {}, g = {})",
            f1[i], g1[i]
        )));
    }
    MetricProfile::new(profile.period(), profile.t() + dt, f1, g1)
}

/// Receives diagnostics in time order during [`evolve`].
pub trait RecordSink {
    fn record(&mut self, record: &DiagnosticsRecord, profile: &MetricProfile) -> Result<()>;
}

impl RecordSink for Vec<DiagnosticsRecord> {
    fn record(&mut self, record: &DiagnosticsRecord, _profile: &MetricProfile) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

impl<F> RecordSink for F
where
    F: FnMut(&DiagnosticsRecord, &MetricProfile) -> Result<()>,
{
    fn record(&mut self, record: &DiagnosticsRecord, profile: &MetricProfile) -> Result<()> {
        self(record, profile)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub retries: u64,
    pub records: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_final: f64,
    /// Ended by the spread-ratio rule before `t_end`.
    pub stopped_early: bool,
}

/// Index of the first record time `k · every` strictly after `t`.
fn next_record_index(t: f64, every: f64) -> u64 {
    let mut k = (t / every).floor().max(0.0) as u64;
    while (k as f64) * every <= t + 1e-9 * every {
        k += 1;
    }
    k
}

/// Advance `profile` to `config.t_end`, emitting a record at the start, at
/// every multiple of `record_every` and at the end.
///
/// Record times lie on the absolute grid `k · record_every`, so a run
/// restarted from any recorded state repeats the original step sequence.
pub fn evolve(
    profile: &MetricProfile,
    config: &FlowConfig,
    sink: &mut impl RecordSink,
) -> Result<(MetricProfile, RunSummary)> {
    config.validate()?;
    validate_initial(profile, config.kind)?;

    let kind = config.kind;
    let mut current = profile.clone();
    let mut summary = RunSummary {
        dt_min: f64::INFINITY,
        dt_max: 0.0,
        t_final: current.t(),
        ..RunSummary::default()
    };

    let first = functionals(&current, kind)?;
    let initial_spread = first.g_max - first.g_min;
    sink.record(&first, &current)?;
    summary.records += 1;
    if current.t() >= config.t_end {
        return Ok((current, summary));
    }

    let every = config.record_every;
    let mut k = next_record_index(current.t(), every);
    let end_slack = 1e-9 * every;

    loop {
        let mut target = k as f64 * every;
        if target >= config.t_end - end_slack {
            target = config.t_end;
        }
        while current.t() < target {
            let remaining = target - current.t();
            let mut dt = stable_dt(&current, kind, config.epsilon, config.safety, config.dt_max);
            let lands = dt >= remaining;
            if lands {
                dt = remaining;
            }
            let mut retries = 0;
            let next = loop {
                match step(&current, kind, config.epsilon, dt) {
                    Ok(p) => break p,
                    Err(Error::StepFailure { reason, .. }) => {
                        if retries == MAX_RETRIES {
                            return Err(Error::StepFailure {
                                t_last_good: current.t(),
                                retries,
                                reason,
                            });
                        }
                        retries += 1;
                        summary.retries += 1;
                        dt *= 0.5;
                    }
                    Err(e) => return Err(e),
                }
            };
            current = next;
            if lands && retries == 0 {
                current.set_t(target);
            }
            summary.steps += 1;
            summary.dt_min = summary.dt_min.min(dt);
            summary.dt_max = summary.dt_max.max(dt);
        }

        let rec = functionals(&current, kind)?;
        sink.record(&rec, &current)?;
        summary.records += 1;
        summary.t_final = current.t();

        if let Some(ratio) = config.stop_spread_ratio {
            if rec.g_max - rec.g_min < ratio * initial_spread && target < config.t_end {
                summary.stopped_early = true;
                break;
            }
        }
        if target >= config.t_end {
            break;
        }
        k += 1;
    }
    if summary.steps == 0 {
        summary.dt_min = 0.0;
    }
    Ok((current, summary))
}
