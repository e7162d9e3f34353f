//! Scenario orchestration and the on-disk formats: `series.csv`,
//! `snap_<t>.json`, `claims.txt`, `curvature.csv` and `eps_sweep.csv`.
//!
//! All floats are written in shortest round-trip form, so a value read back
//! from any of these files is bit-identical to the one written.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::claims::{all_pass, evaluate_claims, ClaimVerdict};
use crate::config::ScenarioConfig;
use crate::curvature::curvature_field;
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::flow::{evolve, validate_initial, FlowConfig, RecordSink, RunSummary};
use crate::profile::{BundleKind, MetricProfile};

pub const SERIES_FILE: &str = "series.csv";
pub const CLAIMS_FILE: &str = "claims.txt";
pub const CURVATURE_FILE: &str = "curvature.csv";
pub const EPS_SWEEP_FILE: &str = "eps_sweep.csv";

pub const SERIES_HEADER: &str = "t,L,V,g_max,g_min,sup_gs,sup_gss,E2,l2_gss,l2_gsss,zero_count,dL_dt_formula,dV_dt_formula,K12_sup,K23_mean,K23_spread,R_mean";
pub const CURVATURE_HEADER: &str = "i,x,f,g,w,w_s,K12,K23,Ric11,Ric22,R,P11,P22,h11,h22";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, out: &mut impl Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn series_row(r: &DiagnosticsRecord) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    [
        fmt_f64(r.t),
        fmt_f64(r.l),
        fmt_f64(r.v),
        fmt_f64(r.g_max),
        fmt_f64(r.g_min),
        fmt_f64(r.sup_gs),
        fmt_f64(r.sup_gss),
        fmt_f64(r.e2),
        fmt_f64(r.l2_gss),
        fmt_f64(r.l2_gsss),
        r.zero_count.to_string(),
        fmt_f64(r.dl_dt_formula),
        opt(r.dv_dt_formula),
        fmt_f64(r.k12_sup),
        fmt_f64(r.k23_mean),
        fmt_f64(r.k23_spread),
        fmt_f64(r.r_mean),
    ]
    .join(",")
}

/// Parse a `series.csv`. Quantities not stored in the file (the E2 and
/// `∫ g_sss²` rate formulas) come back as `None`.
pub fn parse_series(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let bad = |line: usize, msg: String| Error::Format {
        what: format!("series line {line}"),
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    if header.trim() != SERIES_HEADER {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    lines
        .map(|(idx, line)| {
            let cols: Vec<&str> = line.trim().split(',').collect();
            if cols.len() != 17 {
                return Err(bad(idx + 1, format!("expected 17 columns, got {}", cols.len())));
            }
            let num = |j: usize| {
                cols[j]
                    .parse::<f64>()
                    .map_err(|_| bad(idx + 1, format!("column {j}: bad number {:?}", cols[j])))
            };
            Ok(DiagnosticsRecord {
                t: num(0)?,
                l: num(1)?,
                v: num(2)?,
                g_max: num(3)?,
                g_min: num(4)?,
                sup_gs: num(5)?,
                sup_gss: num(6)?,
                e2: num(7)?,
                l2_gss: num(8)?,
                l2_gsss: num(9)?,
                zero_count: cols[10]
                    .parse()
                    .map_err(|_| bad(idx + 1, format!("bad zero count {:?}", cols[10])))?,
                dl_dt_formula: num(11)?,
                dv_dt_formula: if cols[12].is_empty() { None } else { Some(num(12)?) },
                e2_rate_formula: None,
                l2_gsss_rate_formula: None,
                k12_sup: num(13)?,
                k23_mean: num(14)?,
                k23_spread: num(15)?,
                r_mean: num(16)?,
            })
        })
        .collect()
}

pub fn read_series(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text)
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    n: usize,
    period: f64,
    t: f64,
    f: Vec<f64>,
    g: Vec<f64>,
}

pub fn snapshot_name(t: f64) -> String {
    format!("snap_{}.json", fmt_f64(t))
}

pub fn write_snapshot(dir: &Path, profile: &MetricProfile) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(profile.t()));
    let snap = Snapshot {
        n: profile.n(),
        period: profile.period(),
        t: profile.t(),
        f: profile.f().to_vec(),
        g: profile.g().to_vec(),
    };
    let text = serde_json::to_string_pretty(&snap).map_err(|e| Error::Format {
        what: "snapshot".into(),
        msg: e.to_string(),
    })?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn read_snapshot(path: &Path) -> Result<MetricProfile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let snap: Snapshot = serde_json::from_str(&text).map_err(|e| Error::Format {
        what: format!("snapshot {}", path.display()),
        msg: e.to_string(),
    })?;
    if snap.f.len() != snap.n {
        return Err(Error::InputShape {
            expected: snap.n,
            got: snap.f.len(),
        });
    }
    MetricProfile::new(snap.period, snap.t, snap.f, snap.g)
}

/// Streams records to `series.csv` and drops snapshots on the absolute
/// schedule `j · snapshot_every`.
struct ScenarioSink {
    dir: PathBuf,
    series_path: PathBuf,
    series: BufWriter<File>,
    records: Vec<DiagnosticsRecord>,
    snapshot_every: f64,
    slack: f64,
    next_snapshot: u64,
    last_snapshot_t: Option<f64>,
}

impl ScenarioSink {
    fn new(dir: &Path, snapshot_every: f64, record_every: f64, t0: f64) -> Result<Self> {
        let series_path = dir.join(SERIES_FILE);
        let mut series = create(&series_path)?;
        write_all(&series_path, &mut series, &format!("{SERIES_HEADER}\n"))?;
        let slack = 1e-9 * record_every;
        let mut next_snapshot = (t0 / snapshot_every).floor().max(0.0) as u64;
        while next_snapshot as f64 * snapshot_every <= t0 + slack {
            next_snapshot += 1;
        }
        Ok(ScenarioSink {
            dir: dir.to_path_buf(),
            series_path,
            series,
            records: Vec::new(),
            snapshot_every,
            slack,
            next_snapshot,
            last_snapshot_t: None,
        })
    }

    fn snapshot(&mut self, profile: &MetricProfile) -> Result<()> {
        write_snapshot(&self.dir, profile)?;
        self.last_snapshot_t = Some(profile.t());
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<DiagnosticsRecord>> {
        self.series.flush().map_err(|e| Error::io(&self.series_path, e))?;
        Ok(self.records)
    }
}

impl RecordSink for ScenarioSink {
    fn record(&mut self, record: &DiagnosticsRecord, profile: &MetricProfile) -> Result<()> {
        let row = format!("{}\n", series_row(record));
        write_all(&self.series_path, &mut self.series, &row)?;
        self.records.push(record.clone());
        if profile.t() >= self.next_snapshot as f64 * self.snapshot_every - self.slack {
            self.series.flush().map_err(|e| Error::io(&self.series_path, e))?;
            self.snapshot(profile)?;
            while (self.next_snapshot as f64) * self.snapshot_every <= profile.t() + self.slack {
                self.next_snapshot += 1;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub verdicts: Vec<ClaimVerdict>,
    pub summary: RunSummary,
    pub final_profile: MetricProfile,
    /// Torus run started from constant `g`.
    pub stationary: bool,
}

impl ScenarioOutcome {
    pub fn all_pass(&self) -> bool {
        all_pass(&self.verdicts)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_claims(path: &Path, verdicts: &[ClaimVerdict]) -> Result<()> {
    let mut out = create(path)?;
    for v in verdicts {
        write_all(path, &mut out, &format!("{}\n", v.report_line()))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Run the scenario into `config.output_dir`, optionally resuming from a
/// snapshot (whose state replaces the configured initial profile).
pub fn run_scenario(config: &ScenarioConfig, resume: Option<&Path>) -> Result<ScenarioOutcome> {
    let start = match resume {
        Some(snap) => read_snapshot(snap)?,
        None => config.initial_profile()?,
    };
    let check = validate_initial(&start, config.kind())?;
    let dir = &config.output_dir;
    ensure_dir(dir)?;

    let mut sink = ScenarioSink::new(dir, config.snapshot_every, config.flow.record_every, start.t())?;
    if resume.is_none() {
        sink.snapshot(&start)?;
    }
    let (final_profile, summary) = evolve(&start, &config.flow, &mut sink)?;
    if sink.last_snapshot_t != Some(final_profile.t()) {
        sink.snapshot(&final_profile)?;
    }
    let records = sink.finish()?;

    let mut tolerances = config.tolerances.clone();
    tolerances.grid_dx = start.dx();
    let verdicts = evaluate_claims(&records, config.kind(), &tolerances)?;
    write_claims(&dir.join(CLAIMS_FILE), &verdicts)?;

    Ok(ScenarioOutcome {
        records,
        verdicts,
        summary,
        final_profile,
        stationary: check.stationary,
    })
}

/// One-shot curvature table of the initial profile.
pub fn curvature_dump(config: &ScenarioConfig) -> Result<PathBuf> {
    let profile = config.initial_profile()?;
    let field = curvature_field(&profile, config.kind())?;
    ensure_dir(&config.output_dir)?;
    let path = config.output_dir.join(CURVATURE_FILE);
    let mut out = create(&path)?;
    write_all(&path, &mut out, &format!("{CURVATURE_HEADER}\n"))?;
    for i in 0..profile.n() {
        let cols = [
            profile.x(i),
            profile.f()[i],
            profile.g()[i],
            field.w[i],
            field.w_s[i],
            field.k12[i],
            field.k23[i],
            field.ric11[i],
            field.ric22[i],
            field.r[i],
            field.p11[i],
            field.p22[i],
            field.h11[i],
            field.h22[i],
        ];
        let row: Vec<String> = std::iter::once(i.to_string())
            .chain(cols.iter().map(|v| fmt_f64(*v)))
            .collect();
        write_all(&path, &mut out, &format!("{}\n", row.join(",")))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Run the same torus data at every `epsilon` and at `ε = 0`, reporting the
/// sup-norm distance of the final `g` from the unregularized run.
///
/// Member runs execute on separate threads, each writing its `series.csv`
/// under `eps_<ε>/`; rows come back in the order of `epsilons`.
pub fn epsilon_sweep(config: &ScenarioConfig, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    if config.kind() != BundleKind::Torus {
        return Err(Error::NotApplicable(
            "the epsilon sweep regularizes the torus flow only".into(),
        ));
    }
    if let Some(e) = epsilons.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::NotApplicable(format!("epsilon must be non-negative, got {e}")));
    }
    let start = config.initial_profile()?;
    ensure_dir(&config.output_dir)?;

    let mut members: Vec<f64> = vec![0.0];
    for &e in epsilons {
        if !members.contains(&e) {
            members.push(e);
        }
    }

    let run_member = |eps: f64| -> Result<MetricProfile> {
        let dir = config.output_dir.join(format!("eps_{}", fmt_f64(eps)));
        ensure_dir(&dir)?;
        let flow = FlowConfig {
            epsilon: eps,
            stop_spread_ratio: None,
            ..config.flow.clone()
        };
        let path = dir.join(SERIES_FILE);
        let mut out = create(&path)?;
        write_all(&path, &mut out, &format!("{SERIES_HEADER}\n"))?;
        let mut sink = |r: &DiagnosticsRecord, _: &MetricProfile| {
            write_all(&path, &mut out, &format!("{}\n", series_row(r)))
        };
        let (end, _) = evolve(&start, &flow, &mut sink)?;
        out.flush().map_err(|e| Error::io(&path, e))?;
        Ok(end)
    };

    let finals: Vec<Result<MetricProfile>> = std::thread::scope(|scope| {
        let handles: Vec<_> = members
            .iter()
            .map(|&eps| scope.spawn(move || run_member(eps)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep member panicked"))
            .collect()
    });
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let baseline = &finals[0];

    let rows: Vec<(f64, f64)> = epsilons
        .iter()
        .map(|&e| {
            let idx = members.iter().position(|&m| m == e).expect("member exists");
            (e, sup_distance(finals[idx].g(), baseline.g()))
        })
        .collect();

    let path = config.output_dir.join(EPS_SWEEP_FILE);
    let mut out = create(&path)?;
    write_all(&path, &mut out, "epsilon,sup_gap\n")?;
    for (e, gap) in &rows {
        write_all(&path, &mut out, &format!("{},{}\n", fmt_f64(*e), fmt_f64(*gap)))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// Read a two-column `eps_sweep.csv`.
pub fn read_eps_sweep(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parsed = line
            .split_once(',')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
        match parsed {
            Some(row) => rows.push(row),
            None => {
                return Err(Error::Format {
                    what: format!("eps sweep line {}", idx + 1),
                    msg: format!("{line:?}"),
                })
            }
        }
    }
    Ok(rows)
}
