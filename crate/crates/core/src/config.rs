//! Line-oriented `key = value` scenario files.
//!
//! ```text
//! # profile A
//! bundle = torus
//! t_end = 2.0
//! grid.n = 256
//! profile.amplitude = 0.1
//! ```
//!
//! `#` starts a comment. Numeric values may use a `pi` suffix (`2pi`).

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::PathBuf;

use crate::claims::ClaimTolerances;
use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::profile::{BundleKind, MetricProfile};

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileFamily {
    /// `f ≡ 1`, `g = base + amplitude * sin(wavenumber * x)`.
    Sinusoid {
        base: f64,
        amplitude: f64,
        wavenumber: u32,
    },
    /// A snapshot-format JSON file supplying the grid, `f` and `g`.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub flow: FlowConfig,
    pub tolerances: ClaimTolerances,
    pub n: usize,
    pub period: f64,
    pub profile: ProfileFamily,
    pub output_dir: PathBuf,
    pub snapshot_every: f64,
}

impl ScenarioConfig {
    pub fn kind(&self) -> BundleKind {
        self.flow.kind
    }

    /// Build the initial profile; file profiles start at `t = 0`.
    pub fn initial_profile(&self) -> Result<MetricProfile> {
        match &self.profile {
            ProfileFamily::Sinusoid {
                base,
                amplitude,
                wavenumber,
            } => MetricProfile::sinusoid(self.n, self.period, *base, *amplitude, *wavenumber as f64),
            ProfileFamily::File { path } => {
                let mut p = crate::harness::read_snapshot(path)?;
                p.set_t(0.0);
                Ok(p)
            }
        }
    }
}

const KEYS: &[&str] = &[
    "bundle",
    "t_end",
    "epsilon",
    "safety",
    "dt_max",
    "record_every",
    "stop.spread_ratio",
    "grid.n",
    "grid.period",
    "profile.family",
    "profile.base",
    "profile.amplitude",
    "profile.wavenumber",
    "profile.path",
    "output.dir",
    "output.snapshot_every",
    "claims.theta",
    "claims.delta_l",
    "claims.extrema",
    "claims.growth_cap",
    "claims.rate_rel",
    "claims.rate_abs",
    "claims.mono_abs",
    "claims.mono_dx2",
    "claims.k_limit",
    "claims.r_limit",
];

fn parse_number(line: usize, key: &str, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    let value = if let Some(coef) = raw.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        if coef.is_empty() {
            Ok(PI)
        } else {
            coef.parse::<f64>().map(|c| c * PI)
        }
    } else {
        raw.parse::<f64>()
    };
    match value {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::config(line, format!("{key}: expected a finite number, got {raw:?}"))),
    }
}

fn parse_count(line: usize, key: &str, raw: &str) -> Result<u64> {
    raw.trim()
        .parse::<u64>()
        .map_err(|_| Error::config(line, format!("{key}: expected a non-negative integer, got {raw:?}")))
}

/// Parse and validate a scenario.
pub fn load_config(text: &str) -> Result<ScenarioConfig> {
    let mut values: Vec<(&str, &str, usize)> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(line_no, format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(line_no, format!("unknown key {key:?}")));
        }
        if !seen.insert(key) {
            return Err(Error::config(line_no, format!("duplicate key {key:?}")));
        }
        values.push((key, value.trim(), line_no));
    }
    let last_line = text.lines().count().max(1);
    let get = |key: &str| values.iter().find(|(k, _, _)| *k == key).map(|(_, v, l)| (*v, *l));
    let number = |key: &str| -> Result<Option<(f64, usize)>> {
        get(key)
            .map(|(v, l)| parse_number(l, key, v).map(|x| (x, l)))
            .transpose()
    };
    let line_of = |key: &str| get(key).map(|(_, l)| l).unwrap_or(last_line);

    let (bundle, bundle_line) =
        get("bundle").ok_or_else(|| Error::config(last_line, "missing required key \"bundle\""))?;
    let kind: BundleKind = bundle.parse().map_err(|e: String| Error::config(bundle_line, e))?;
    let (t_end, t_line) =
        number("t_end")?.ok_or_else(|| Error::config(last_line, "missing required key \"t_end\""))?;
    if t_end <= 0.0 {
        return Err(Error::config(t_line, "t_end must be positive"));
    }

    let mut flow = FlowConfig::new(kind, t_end);
    let positive = |key: &str, default: f64| -> Result<f64> {
        match number(key)? {
            None => Ok(default),
            Some((v, _)) if v > 0.0 => Ok(v),
            Some((v, l)) => Err(Error::config(l, format!("{key} must be positive, got {v}"))),
        }
    };
    if let Some((eps, l)) = number("epsilon")? {
        if eps < 0.0 {
            return Err(Error::config(l, "epsilon must be non-negative"));
        }
        flow.epsilon = eps;
    }
    flow.safety = positive("safety", 0.25)?;
    if flow.safety > 1.0 {
        return Err(Error::config(line_of("safety"), "safety must lie in (0, 1]"));
    }
    flow.dt_max = positive("dt_max", 1.0)?;
    flow.record_every = positive("record_every", 0.01 * t_end)?;
    if let Some((r, l)) = number("stop.spread_ratio")? {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::config(l, "stop.spread_ratio must lie in (0, 1)"));
        }
        flow.stop_spread_ratio = Some(r);
    }

    let n = match get("grid.n") {
        None => 256,
        Some((v, l)) => {
            let n = parse_count(l, "grid.n", v)? as usize;
            if n < crate::profile::MIN_NODES {
                return Err(Error::config(l, format!("grid.n must be at least {}", crate::profile::MIN_NODES)));
            }
            n
        }
    };
    let period = positive("grid.period", 2.0 * PI)?;

    let family = get("profile.family").map(|(v, l)| (v.to_ascii_lowercase(), l));
    let profile = match family.as_ref().map(|(v, l)| (v.as_str(), *l)) {
        None | Some(("sinusoid", _)) => {
            let base = number("profile.base")?.map(|v| v.0).unwrap_or(2.0);
            let amplitude = number("profile.amplitude")?.map(|v| v.0).unwrap_or(0.1);
            let wavenumber = match get("profile.wavenumber") {
                None => 1,
                Some((v, l)) => {
                    let k = parse_count(l, "profile.wavenumber", v)?;
                    if k == 0 || k > u32::MAX as u64 {
                        return Err(Error::config(l, "profile.wavenumber must be a positive integer"));
                    }
                    k as u32
                }
            };
            if amplitude < 0.0 {
                return Err(Error::config(line_of("profile.amplitude"), "profile.amplitude must be non-negative"));
            }
            if !(base > amplitude) {
                return Err(Error::config(
                    line_of("profile.amplitude").max(line_of("profile.base")).min(last_line),
                    format!("profile.base ({base}) must exceed profile.amplitude ({amplitude})"),
                ));
            }
            if get("profile.path").is_some() {
                return Err(Error::config(line_of("profile.path"), "profile.path needs profile.family = file"));
            }
            ProfileFamily::Sinusoid {
                base,
                amplitude,
                wavenumber,
            }
        }
        Some(("file", l)) => {
            let (path, _) = get("profile.path")
                .ok_or_else(|| Error::config(l, "profile.family = file needs profile.path"))?;
            ProfileFamily::File {
                path: PathBuf::from(path),
            }
        }
        Some((other, l)) => {
            return Err(Error::config(l, format!("unknown profile.family {other:?} (sinusoid or file)")))
        }
    };

    let output_dir = get("output.dir").map(|(v, _)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out"));
    let snapshot_every = positive("output.snapshot_every", 0.25 * t_end)?;

    let defaults = ClaimTolerances::default();
    let tolerances = ClaimTolerances {
        grid_dx: period / n as f64,
        mono_abs: positive("claims.mono_abs", defaults.mono_abs)?,
        mono_dx2: positive("claims.mono_dx2", defaults.mono_dx2)?,
        extrema: positive("claims.extrema", defaults.extrema)?,
        growth_cap: positive("claims.growth_cap", defaults.growth_cap)?,
        rate_rel: positive("claims.rate_rel", defaults.rate_rel)?,
        rate_abs: positive("claims.rate_abs", defaults.rate_abs)?,
        theta: positive("claims.theta", defaults.theta)?,
        delta_l: positive("claims.delta_l", defaults.delta_l)?,
        k_limit: positive("claims.k_limit", defaults.k_limit)?,
        r_limit: positive("claims.r_limit", defaults.r_limit)?,
    };

    Ok(ScenarioConfig {
        flow,
        tolerances,
        n,
        period,
        profile,
        output_dir,
        snapshot_every,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = load_config("bundle = torus\nt_end = 2.0\n").unwrap();
        assert_eq!(c.kind(), BundleKind::Torus);
        assert_eq!(c.n, 256);
        assert_eq!(c.period, 2.0 * PI);
        assert_eq!(c.flow.epsilon, 0.0);
        assert_eq!(c.flow.safety, 0.25);
        assert_eq!(c.flow.dt_max, 1.0);
        assert_eq!(c.flow.record_every, 0.02);
        assert_eq!(c.tolerances.theta, 0.1);
        assert_eq!(
            c.profile,
            ProfileFamily::Sinusoid {
                base: 2.0,
                amplitude: 0.1,
                wavenumber: 1
            }
        );
    }

    #[test]
    fn amplitude_must_stay_below_base() {
        let text = "bundle = torus\nt_end = 1\nprofile.base = 2.0\nprofile.amplitude = 2.5\n";
        match load_config(text) {
            Err(Error::Config { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("must exceed"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn steep_sphere_parses_but_fails_validation() {
        let text = "bundle = sphere\nt_end = 1\nprofile.amplitude = 0.3\nprofile.wavenumber = 1\n";
        let c = load_config(text).unwrap();
        let p = c.initial_profile().unwrap();
        assert!(matches!(
            crate::flow::validate_initial(&p, c.kind()),
            Err(Error::SlopeCondition { .. })
        ));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = load_config("# header\nbundle = torus\nt_end = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 4, .. }), "{e}");
        let e = load_config("bundle = torus\n").unwrap_err();
        assert!(e.to_string().contains("t_end"));
        let e = load_config("t_end = 1\n").unwrap_err();
        assert!(e.to_string().contains("bundle"));
        let e = load_config("bundle = klein\nt_end = 1").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        let e = load_config("bundle = torus\nt_end = 1\nsafety = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
        let e = load_config("bundle = torus\nt_end = 1\ngrid.n = 4\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
        let e = load_config("bundle = torus\nt_end = 1\nt_end = 2\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
        let e = load_config("bundle = torus\nt_end = 1\nprofile.wavenumber = 1.5\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }));
    }

    #[test]
    fn pi_suffix_and_comments() {
        let c = load_config("bundle = sphere # round fibers\nt_end = 4\ngrid.period = 2pi\nepsilon = 0.5 # ignored by sphere\n").unwrap();
        assert_eq!(c.period, 2.0 * PI);
        assert_eq!(c.flow.epsilon, 0.5);
        assert_eq!(load_config("bundle = torus\nt_end=1\ngrid.period = pi").unwrap().period, PI);
    }

    #[test]
    fn file_family_needs_path() {
        assert!(load_config("bundle = torus\nt_end = 1\nprofile.family = file\n").is_err());
        let c = load_config("bundle = torus\nt_end = 1\nprofile.family = file\nprofile.path = a.json\n").unwrap();
        assert_eq!(c.profile, ProfileFamily::File { path: "a.json".into() });
    }
}
