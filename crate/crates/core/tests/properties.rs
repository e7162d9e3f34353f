use std::f64::consts::TAU;

use proptest::prelude::*;
use xcf_core::claims::{all_pass, ClaimTolerances};
use xcf_core::diagnostics::sign_changes;
use xcf_core::harness::{parse_series, series_row, SERIES_HEADER};
use xcf_core::{
    cross_curvature, cross_curvature_natural, cross_curvature_oracle, curvature_field, evaluate_claims,
    evolve, functionals, rate_formulas, BundleKind, DiagnosticsRecord, FlowConfig, MetricProfile, Status,
};

fn kind() -> impl Strategy<Value = BundleKind> {
    prop_oneof![Just(BundleKind::Torus), Just(BundleKind::Sphere)]
}

/// `(base, [(cos, sin); 3])` for a positive trigonometric polynomial.
fn trig() -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
    (0.5f64..3.0, prop::collection::vec((-0.1f64..0.1, -0.1f64..0.1), 1..=3))
        .prop_map(|(base, c)| (base, c.into_iter().map(|(a, b)| (a * base, b * base)).collect()))
}

fn eval(c: &(f64, Vec<(f64, f64)>), x: f64) -> f64 {
    c.0 + c
        .1
        .iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let k = (k + 1) as f64;
            a * (k * x).cos() + b * (k * x).sin()
        })
        .sum::<f64>()
}

fn profile(n: usize, fc: &(f64, Vec<(f64, f64)>), gc: &(f64, Vec<(f64, f64)>)) -> MetricProfile {
    MetricProfile::from_fn(n, TAU, |x| eval(fc, x), |x| eval(gc, x)).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjugate_matches_sectional_products(fc in trig(), gc in trig(), kind in kind(), n in 16usize..200) {
        let p = profile(n, &fc, &gc);
        let field = curvature_field(&p, kind).unwrap();
        let (h11, h22) = cross_curvature(&field);
        let (o11, o22) = cross_curvature_oracle(&field);
        for i in 0..n {
            prop_assert!(close(h11[i], o11[i], 1e-12), "h11 {} vs {}", h11[i], o11[i]);
            prop_assert!(close(h22[i], o22[i], 1e-12), "h22 {} vs {}", h22[i], o22[i]);
        }
        let (n11, n22) = cross_curvature_natural(&field, &p).unwrap();
        for i in 0..n {
            prop_assert!(close(n11[i], p.f()[i].powi(2) * h11[i], 1e-14));
            prop_assert!(close(n22[i], p.g()[i].powi(2) * h22[i], 1e-14));
        }
    }

    #[test]
    fn scalar_and_einstein_identities(fc in trig(), gc in trig(), kind in kind()) {
        let p = profile(128, &fc, &gc);
        let c = curvature_field(&p, kind).unwrap();
        for i in 0..p.n() {
            let scale = c.k12[i].abs() + c.k23[i].abs() + 1e-300;
            prop_assert!((c.r[i] - (c.ric11[i] + 2.0 * c.ric22[i])).abs() <= 1e-13 * scale);
            prop_assert!((c.p11[i] + c.k23[i]).abs() <= 1e-13 * scale);
            prop_assert!((c.p22[i] + c.k12[i]).abs() <= 1e-13 * scale);
            prop_assert!((c.p11[i] - (c.ric11[i] - 0.5 * c.r[i])).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn reflection_maps_curvature_to_itself(gc in trig(), kind in kind(), n in 16usize..128) {
        let p = MetricProfile::from_fn(n, TAU, |_| 1.0, |x| eval(&gc, x)).unwrap();
        let r = MetricProfile::from_fn(n, TAU, |_| 1.0, |x| eval(&gc, -x)).unwrap();
        let a = curvature_field(&p, kind).unwrap();
        let b = curvature_field(&r, kind).unwrap();
        for i in 0..n {
            let j = (n - i) % n;
            let scale = a.k12[i].abs().max(a.k23[i].abs()).max(1e-12);
            prop_assert!((a.k12[i] - b.k12[j]).abs() <= 1e-10 * scale);
            prop_assert!((a.k23[i] - b.k23[j]).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn sign_changes_on_a_circle_are_even(v in prop::collection::vec(-1.0f64..1.0, 1..200)) {
        prop_assert_eq!(sign_changes(&v) % 2, 0);
    }

    #[test]
    fn length_rate_sign_follows_the_bundle(fc in trig(), gc in trig(), kind in kind()) {
        let p = profile(128, &fc, &gc);
        let rates = rate_formulas(&p, kind);
        prop_assert!(rates.dl_dt * kind.flow_sign() >= 0.0);
        prop_assert_eq!(rates.dv_dt.is_some(), kind == BundleKind::Torus);
        prop_assert_eq!(rates.l2_gsss_rate.is_some(), kind == BundleKind::Sphere);
    }

    #[test]
    fn series_rows_round_trip(fc in trig(), gc in trig(), kind in kind(), t in 0.0f64..100.0) {
        let mut p = profile(64, &fc, &gc);
        p.set_t(t);
        let mut rec = functionals(&p, kind).unwrap();
        rec.e2_rate_formula = None;
        rec.l2_gsss_rate_formula = None;
        let text = format!("{SERIES_HEADER}\n{}\n", series_row(&rec));
        let back = parse_series(&text).unwrap();
        prop_assert_eq!(back, vec![rec]);
    }
}

fn torus_records() -> Vec<DiagnosticsRecord> {
    let p = MetricProfile::sinusoid(64, TAU, 2.0, 0.1, 1.0).unwrap();
    let mut cfg = FlowConfig::new(BundleKind::Torus, 0.5);
    cfg.record_every = 0.05;
    let mut out = Vec::new();
    evolve(&p, &cfg, &mut out).unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loosening_tolerances_never_breaks_a_pass(scale in 1.0f64..100.0) {
        let records = torus_records();
        let strict = ClaimTolerances { grid_dx: TAU / 64.0, delta_l: 1e-4, ..ClaimTolerances::default() };
        let loose = ClaimTolerances {
            mono_abs: strict.mono_abs * scale,
            mono_dx2: strict.mono_dx2 * scale,
            extrema: strict.extrema * scale,
            growth_cap: strict.growth_cap * scale,
            rate_rel: strict.rate_rel * scale,
            delta_l: strict.delta_l / scale,
            ..strict.clone()
        };
        let a = evaluate_claims(&records, BundleKind::Torus, &strict).unwrap();
        let b = evaluate_claims(&records, BundleKind::Torus, &loose).unwrap();
        prop_assert!(all_pass(&a));
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x.claim, y.claim);
            if x.status == Status::Pass {
                prop_assert_eq!(y.status, Status::Pass);
            }
        }
    }
}
