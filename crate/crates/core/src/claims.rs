//! Finite-horizon verdicts for the monotonicity and convergence statements
//! about both bundle families.
//!
//! Every check is a pure function of the record stream. Claims made up of
//! several conditions report the binding condition: the one furthest past
//! (or closest to) its own threshold, so `measured ≤ tolerance` holds exactly
//! when every condition holds.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::harness::fmt_f64;
use crate::profile::BundleKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClaimId {
    /// Torus: extrema of `g` are frozen.
    TorusExtrema,
    /// Torus: `sup |g_s|` does not grow.
    TorusSlope,
    /// Torus: `sup |g_ss|` grows at most exponentially.
    TorusCurvatureGrowth,
    /// Torus: orbit length increases at the closed-form rate.
    TorusLength,
    /// Torus: orbit length keeps growing.
    TorusDivergence,
    /// Torus: volume increases and dominates `g_min(0)² L`.
    TorusVolume,
    /// Torus: number of sign changes of `g_s` is preserved.
    TorusZeroCount,
    /// Sphere: `g_max` decreases, `g_min` increases.
    SphereExtrema,
    /// Sphere: `sup |g_s| ≤ 1/4` is preserved.
    SphereSlope,
    /// Sphere: `sup |g_ss|` grows at most exponentially.
    SphereCurvatureGrowth,
    /// Sphere: orbit length decreases.
    SphereLength,
    /// Sphere: `∫ g_ss² ds` decays.
    SphereSecondDerivative,
    /// Sphere: `g` flattens to a constant inside the initial range.
    SphereConvergence,
    /// Sphere: `∫ g_sss² ds` decays.
    SphereThirdDerivative,
    /// Sphere: curvatures approach those of a round cylinder.
    SphereCurvatureLimit,
}

impl ClaimId {
    pub const ALL: [ClaimId; 15] = [
        ClaimId::TorusExtrema,
        ClaimId::TorusSlope,
        ClaimId::TorusCurvatureGrowth,
        ClaimId::TorusLength,
        ClaimId::TorusDivergence,
        ClaimId::TorusVolume,
        ClaimId::TorusZeroCount,
        ClaimId::SphereExtrema,
        ClaimId::SphereSlope,
        ClaimId::SphereCurvatureGrowth,
        ClaimId::SphereLength,
        ClaimId::SphereSecondDerivative,
        ClaimId::SphereConvergence,
        ClaimId::SphereThirdDerivative,
        ClaimId::SphereCurvatureLimit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::TorusExtrema => "T-L2",
            ClaimId::TorusSlope => "T-L3",
            ClaimId::TorusCurvatureGrowth => "T-L4",
            ClaimId::TorusLength => "T-L5",
            ClaimId::TorusDivergence => "T-T6",
            ClaimId::TorusVolume => "T-C7",
            ClaimId::TorusZeroCount => "T-R",
            ClaimId::SphereExtrema => "S-L8",
            ClaimId::SphereSlope => "S-L9",
            ClaimId::SphereCurvatureGrowth => "S-L10",
            ClaimId::SphereLength => "S-L12",
            ClaimId::SphereSecondDerivative => "S-L13",
            ClaimId::SphereConvergence => "S-T14",
            ClaimId::SphereThirdDerivative => "S-L15",
            ClaimId::SphereCurvatureLimit => "S-K",
        }
    }

    pub fn kind(self) -> BundleKind {
        if self.as_str().starts_with('T') {
            BundleKind::Torus
        } else {
            BundleKind::Sphere
        }
    }

    pub fn for_kind(kind: BundleKind) -> impl Iterator<Item = ClaimId> {
        ClaimId::ALL.into_iter().filter(move |c| c.kind() == kind)
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown claim id {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "n/a",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimVerdict {
    pub claim: ClaimId,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    pub note: String,
}

impl ClaimVerdict {
    /// `<claim_id> <pass|fail|n/a> measured=<v> tol=<v> # note`
    pub fn report_line(&self) -> String {
        format!(
            "{} {} measured={} tol={} # {}",
            self.claim,
            self.status.as_str(),
            fmt_f64(self.measured),
            fmt_f64(self.tolerance),
            self.note
        )
    }
}

/// Thresholds for every claim.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaimTolerances {
    /// Coordinate spacing of the grid the records came from.
    pub grid_dx: f64,
    /// Absolute part of the monotonicity slack.
    pub mono_abs: f64,
    /// Multiplier of `Δx²` in the monotonicity slack.
    pub mono_dx2: f64,
    /// Allowed drift of the torus extrema.
    pub extrema: f64,
    /// Cap on the log-slope of `sup |g_ss|`.
    pub growth_cap: f64,
    /// Relative residual allowed in rate identities.
    pub rate_rel: f64,
    /// Absolute floor for rate residuals.
    pub rate_abs: f64,
    /// Decay factor required over the run.
    pub theta: f64,
    /// Required relative growth of the torus orbit length.
    pub delta_l: f64,
    /// Curvature-limit threshold on `K12` and `K23`.
    pub k_limit: f64,
    /// Threshold on `|R_mean - 2 K23_mean|`.
    pub r_limit: f64,
}

impl Default for ClaimTolerances {
    fn default() -> Self {
        ClaimTolerances {
            grid_dx: 2.0 * std::f64::consts::PI / 256.0,
            mono_abs: 1e-8,
            mono_dx2: 1e-2,
            extrema: 1e-4,
            growth_cap: 10.0,
            rate_rel: 1e-3,
            rate_abs: 1e-12,
            theta: 0.1,
            delta_l: 0.005,
            k_limit: 1e-2,
            r_limit: 1e-3,
        }
    }
}

impl ClaimTolerances {
    /// Slack for one step of a monotone series with magnitude `scale`.
    pub fn mono(&self, scale: f64) -> f64 {
        (self.mono_abs + self.mono_dx2 * self.grid_dx * self.grid_dx) * scale
    }
}

/// One condition of a claim: holds iff `value ≤ tol`.
struct Part {
    label: &'static str,
    value: f64,
    tol: f64,
}

fn part(label: &'static str, value: f64, tol: f64) -> Part {
    Part { label, value, tol }
}

fn verdict(claim: ClaimId, parts: Vec<Part>, note: &str) -> ClaimVerdict {
    let excess = |p: &Part| {
        if p.value.is_nan() {
            f64::INFINITY
        } else {
            (p.value - p.tol) / p.tol.abs().max(f64::MIN_POSITIVE)
        }
    };
    let worst = parts
        .iter()
        .max_by(|a, b| excess(a).total_cmp(&excess(b)))
        .expect("claims have at least one condition");
    let pass = parts.iter().all(|p| p.value <= p.tol);
    let note = if parts.len() > 1 {
        format!("{note}; binding: {}", worst.label)
    } else {
        note.to_string()
    };
    ClaimVerdict {
        claim,
        status: if pass { Status::Pass } else { Status::Fail },
        measured: worst.value,
        tolerance: worst.tol,
        note,
    }
}

fn not_applicable(claim: ClaimId, note: &str) -> ClaimVerdict {
    ClaimVerdict {
        claim,
        status: Status::NotApplicable,
        measured: 0.0,
        tolerance: 0.0,
        note: note.to_string(),
    }
}

fn series(records: &[DiagnosticsRecord], get: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<f64> {
    records.iter().map(get).collect()
}

/// Largest single-step increase (0 when the series never increases).
fn max_increase(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn max_decrease(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

fn magnitude(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Second-order derivative at `ts[1]` from three unevenly spaced samples.
pub fn three_point_derivative(ts: [f64; 3], ys: [f64; 3]) -> f64 {
    let h1 = ts[1] - ts[0];
    let h2 = ts[2] - ts[1];
    -h2 / (h1 * (h1 + h2)) * ys[0] + (h2 - h1) / (h1 * h2) * ys[1] + h1 / (h2 * (h1 + h2)) * ys[2]
}

/// Residuals of a rate identity at interior records: the measured time
/// derivative of `value` against `rate`, relative to `max(|rate|, floor)`.
///
/// Records without a rate value, or closer than `1e-12` in time, are skipped.
pub fn rate_residuals(
    records: &[DiagnosticsRecord],
    value: impl Fn(&DiagnosticsRecord) -> f64,
    rate: impl Fn(&DiagnosticsRecord) -> Option<f64>,
    floor: f64,
) -> Vec<(f64, f64)> {
    records
        .windows(3)
        .filter_map(|w| {
            let ts = [w[0].t, w[1].t, w[2].t];
            if ts[1] - ts[0] < 1e-12 || ts[2] - ts[1] < 1e-12 {
                return None;
            }
            let formula = rate(&w[1])?;
            let measured = three_point_derivative(ts, [value(&w[0]), value(&w[1]), value(&w[2])]);
            Some((w[1].t, (measured - formula).abs() / formula.abs().max(floor)))
        })
        .collect()
}

fn worst_residual(residuals: &[(f64, f64)]) -> f64 {
    residuals.iter().map(|r| r.1).fold(0.0, f64::max)
}

/// Log-slope envelope of `sup |g_ss|`; `None` when it vanishes somewhere.
fn log_growth(records: &[DiagnosticsRecord]) -> Option<f64> {
    if records.iter().any(|r| !(r.sup_gss > 0.0)) {
        return None;
    }
    Some(
        records
            .windows(2)
            .filter(|w| w[1].t > w[0].t)
            .map(|w| (w[1].sup_gss.ln() - w[0].sup_gss.ln()) / (w[1].t - w[0].t))
            .fold(f64::NEG_INFINITY, f64::max),
    )
}

fn decay_ratio(first: f64, last: f64) -> Option<f64> {
    (first > 0.0).then(|| last / first)
}

/// Evaluate every claim of `kind` on an ordered record stream.
pub fn evaluate_claims(
    records: &[DiagnosticsRecord],
    kind: BundleKind,
    tol: &ClaimTolerances,
) -> Result<Vec<ClaimVerdict>> {
    if records.len() < 3 {
        return Err(Error::InsufficientData(records.len()));
    }
    if records.windows(2).any(|w| !(w[1].t >= w[0].t)) {
        return Err(Error::Format {
            what: "record stream".into(),
            msg: "records are not ordered in time".into(),
        });
    }
    Ok(ClaimId::for_kind(kind)
        .map(|c| evaluate_one(c, records, tol))
        .collect())
}

fn evaluate_one(claim: ClaimId, records: &[DiagnosticsRecord], tol: &ClaimTolerances) -> ClaimVerdict {
    let first = &records[0];
    let last = &records[records.len() - 1];
    let initial_spread = first.g_max - first.g_min;
    let nonconstant = initial_spread > 1e-12 * first.g_max;
    let l = series(records, |r| r.l);
    let v = series(records, |r| r.v);

    match claim {
        ClaimId::TorusExtrema => {
            if !nonconstant {
                return not_applicable(claim, "initial g is constant; needs g_max(0) > g_min(0)");
            }
            let drift = records
                .iter()
                .map(|r| (r.g_max - first.g_max).abs().max((r.g_min - first.g_min).abs()))
                .fold(0.0, f64::max);
            verdict(
                claim,
                vec![part("extrema drift", drift, tol.extrema)],
                "max drift of g_max and g_min from their initial values",
            )
        }
        ClaimId::TorusSlope => {
            let s = series(records, |r| r.sup_gs);
            verdict(
                claim,
                vec![part("sup|g_s| increase", max_increase(&s), tol.mono(magnitude(&s)))],
                "largest step increase of sup|g_s|",
            )
        }
        ClaimId::TorusCurvatureGrowth | ClaimId::SphereCurvatureGrowth => match log_growth(records) {
            None => not_applicable(claim, "sup|g_ss| vanishes; log-slope undefined"),
            Some(slope) => verdict(
                claim,
                vec![part("log-slope", slope, tol.growth_cap)],
                "max d(log sup|g_ss|)/dt between records, exponential envelope rate",
            ),
        },
        ClaimId::TorusLength => {
            let residual = worst_residual(&rate_residuals(
                records,
                |r| r.l,
                |r| Some(r.dl_dt_formula),
                tol.rate_abs / tol.rate_rel,
            ));
            verdict(
                claim,
                vec![
                    part("L decrease", max_decrease(&l), tol.mono(magnitude(&l))),
                    part("dL/dt residual", residual, tol.rate_rel),
                ],
                "L non-decreasing and dL/dt matches the dissipation integral",
            )
        }
        ClaimId::TorusDivergence => {
            if !nonconstant {
                return not_applicable(claim, "initial g is constant; the flow is stationary");
            }
            let gain = (last.l - first.l) / first.l;
            let t_quarter = first.t + 0.75 * (last.t - first.t);
            let min_rate = records
                .iter()
                .filter(|r| r.t >= t_quarter)
                .map(|r| r.dl_dt_formula)
                .fold(f64::INFINITY, f64::min);
            verdict(
                claim,
                vec![
                    part("negative relative gain of L", -gain, -tol.delta_l),
                    part("negative min dL/dt on last quarter", -min_rate, 0.0),
                ],
                "finite-horizon proxy for L -> infinity",
            )
        }
        ClaimId::TorusVolume => {
            let bound = first.g_min * first.g_min * last.l;
            verdict(
                claim,
                vec![
                    part("V decrease", max_decrease(&v), tol.mono(magnitude(&v))),
                    part("g_min(0)^2 L - V at end", bound - last.v, 1e-12 * last.v),
                ],
                "V non-decreasing and V >= g_min(0)^2 L",
            )
        }
        ClaimId::TorusZeroCount => {
            let change = records
                .iter()
                .map(|r| (r.zero_count as f64 - first.zero_count as f64).abs())
                .fold(0.0, f64::max);
            verdict(
                claim,
                vec![part("zero count change", change, 0.0)],
                &format!("sign changes of g_s, initially {}", first.zero_count),
            )
        }
        ClaimId::SphereExtrema => {
            let gmax = series(records, |r| r.g_max);
            let gmin = series(records, |r| r.g_min);
            verdict(
                claim,
                vec![
                    part("g_max increase", max_increase(&gmax), tol.mono(magnitude(&gmax))),
                    part("g_min decrease", max_decrease(&gmin), tol.mono(magnitude(&gmin))),
                ],
                "g_max non-increasing, g_min non-decreasing",
            )
        }
        ClaimId::SphereSlope => {
            let s = magnitude(&series(records, |r| r.sup_gs));
            verdict(claim, vec![part("sup|g_s|", s, 0.25)], "max over the run of sup|g_s|")
        }
        ClaimId::SphereLength => verdict(
            claim,
            vec![part("L increase", max_increase(&l), tol.mono(magnitude(&l)))],
            "L non-increasing",
        ),
        ClaimId::SphereSecondDerivative => match decay_ratio(first.l2_gss, last.l2_gss) {
            None => not_applicable(claim, "initial g_ss vanishes"),
            Some(r) => verdict(
                claim,
                vec![part("l2_gss ratio", r, tol.theta)],
                "int g_ss^2 ds at end relative to start",
            ),
        },
        ClaimId::SphereThirdDerivative => match decay_ratio(first.l2_gsss, last.l2_gsss) {
            None => not_applicable(claim, "initial g_sss vanishes"),
            Some(r) => verdict(
                claim,
                vec![part("l2_gsss ratio", r, tol.theta)],
                "int g_sss^2 ds at end relative to start",
            ),
        },
        ClaimId::SphereConvergence => {
            if !nonconstant {
                return not_applicable(claim, "initial g is constant");
            }
            let alpha = last.g_rms(BundleKind::Sphere);
            let outside = (first.g_min - alpha).max(alpha - first.g_max);
            verdict(
                claim,
                vec![
                    part(
                        "spread ratio",
                        (last.g_max - last.g_min) / initial_spread,
                        tol.theta,
                    ),
                    part("alpha outside initial range", outside, 0.0),
                ],
                &format!("g flattens to alpha_hat = {alpha} (arc-length rms of g)"),
            )
        }
        ClaimId::SphereCurvatureLimit => {
            let alpha = last.g_rms(BundleKind::Sphere);
            verdict(
                claim,
                vec![
                    part("sup|K12|", last.k12_sup, tol.k_limit),
                    part("K23 spread", last.k23_spread, tol.k_limit),
                    part("|R_mean - 2 K23_mean|", (last.r_mean - 2.0 * last.k23_mean).abs(), tol.r_limit),
                    part(
                        "|K23_mean - 1/alpha_hat^2|",
                        (last.k23_mean - 1.0 / (alpha * alpha)).abs(),
                        tol.k_limit,
                    ),
                ],
                "at end; the limit of K(dy,dz) is read as 1/alpha^2 with alpha the limit of g",
            )
        }
    }
}

/// All applicable verdicts passed.
pub fn all_pass(verdicts: &[ClaimVerdict]) -> bool {
    verdicts.iter().all(|v| v.status != Status::Fail)
}
