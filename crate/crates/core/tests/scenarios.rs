use oscbath::config::{InitialState, Preset};
use oscbath::entanglement::squeezing_threshold;
use oscbath::scenario::{run, sweep, threshold_find};
use oscbath::{Error, RunConfig, SweepParameter, SweepSpec};

fn fig2(r: f64) -> RunConfig {
    RunConfig {
        initial_state: InitialState::Ghz { r },
        ..Preset::Fig2.runs().remove(0).1
    }
}

#[test]
fn r_sweep_flips_between_1_45_and_1_55() {
    let values: Vec<f64> = (0..=20).map(|k| 1.0 + 0.05 * k as f64).collect();
    let spec = SweepSpec {
        parameter: SweepParameter::R,
        values: values.iter().rev().copied().collect(),
        base: fig2(1.0),
    };
    let rows = sweep(&spec).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), values);
    let entangled: Vec<bool> = rows.iter().map(|r| r.outcome.as_ref().unwrap().entangled()).collect();
    let flips: Vec<usize> = (1..entangled.len()).filter(|&k| entangled[k] != entangled[k - 1]).collect();
    assert_eq!(flips.len(), 1, "{entangled:?}");
    let (lo, hi) = (rows[flips[0] - 1].value, rows[flips[0]].value);
    assert!(lo >= 1.45 - 1e-9 && hi <= 1.55 + 1e-9, "flip between {lo} and {hi}");
    assert!(!entangled[0] && entangled[20]);
}

#[test]
fn threshold_at_lower_temperature() {
    let mut base = fig2(1.0);
    base.bath.temperature = 5.0;
    let r = threshold_find(&base, 0.8, 1.6).unwrap();
    let want = squeezing_threshold(5.0, 1.0);
    assert!((want - 0.5 * (2.0f64 * 4.51665 + 1.0).ln()).abs() < 1e-5);
    assert!((r - want).abs() < 0.01, "r* = {r}, analytic {want}");
}

#[test]
fn threshold_without_sign_change_fails() {
    let base = fig2(1.0);
    assert!(matches!(threshold_find(&base, 1.6, 2.0), Err(Error::NoSignChange { .. })));
}

#[test]
fn fig2_extremes() {
    let strong = run(&fig2(2.0)).unwrap();
    assert!(strong.reports.iter().all(|r| r.min_eta() < 0.0));
    let weak = run(&fig2(1.0)).unwrap();
    let first = weak.reports.iter().position(|r| r.min_eta() >= 0.0);
    assert!(first.is_some_and(|k| k > 0), "r = 1.0 must lose entanglement at finite time");
}

#[test]
fn runs_are_deterministic() {
    let mut c = fig2(1.3);
    c.integration.t_max = 3.0;
    let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
    assert_eq!(a.trajectory.states, b.trajectory.states);
    assert_eq!(a.reports, b.reports);
}
