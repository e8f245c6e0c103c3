//! Whole-run orchestration: single runs, parameter sweeps, threshold bisection and file output.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bath::CoefficientTable;
use crate::config::{sample_stride, OutputKind, RunConfig, SweepParameter, SweepSpec};
use crate::dynamics::{Generator, Trajectory};
use crate::entanglement::{entanglement_report, index_pairs, negativities, to_bare_basis, EntanglementReport};
use crate::error::{Error, Result};
use crate::model::{effective_frequencies, expand_to_phase_space, mode_transform};

/// Late-time window start as a fraction of the horizon.
pub const LATE_FRACTION: f64 = 0.8;
/// Mean min η below this counts as entangled.
pub const ENTANGLED_BELOW: f64 = -1e-10;
/// Horizon in units of 1/γ0 used by sweeps and threshold search.
pub const RELAXATION_HORIZON: f64 = 6.25;
/// Bisection stops once the bracket is narrower than this.
pub const THRESHOLD_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub table: CoefficientTable,
    pub trajectory: Trajectory,
    pub reports: Vec<EntanglementReport>,
}

/// Coefficient table covering [0, t_end] with nodes on every RK4 stage of `config`.
pub fn build_table(config: &RunConfig, t_end: f64) -> Result<CoefficientTable> {
    let freqs = effective_frequencies(&config.system)?;
    CoefficientTable::for_step(
        &config.bath,
        &freqs,
        config.system.mass,
        t_end,
        config.integration.dt,
    )
}

/// Trajectory of `config` from 0 to `t_end` on a prebuilt table.
pub fn trajectory_with_table(config: &RunConfig, table: &CoefficientTable, t_end: f64) -> Result<Trajectory> {
    let freqs = effective_frequencies(&config.system)?;
    let generator = Generator::new(config.system.n_modes, config.system.mass, freqs, table);
    let v0 = config.initial_state.covariance(config.system.n_modes)?;
    let stride = sample_stride(config.integration.dt, config.integration.sample_dt)?;
    generator.evolve(&v0, config.integration.dt, t_end, stride, config.integration.method)
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let table = build_table(config, config.integration.t_max)?;
    run_with_table(config, table)
}

pub fn run_with_table(config: &RunConfig, table: CoefficientTable) -> Result<RunOutput> {
    let trajectory = trajectory_with_table(config, &table, config.integration.t_max)?;
    let reports = (0..trajectory.len())
        .map(|k| entanglement_report(&trajectory.state(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        config: config.clone(),
        table,
        trajectory,
        reports,
    })
}

/// Late-time averages over [0.8·t_end, t_end].
#[derive(Debug, Clone, PartialEq)]
pub struct LateSummary {
    pub mean_min_eta: f64,
    /// Peak-to-peak spread of min η inside the window.
    pub eta_amplitude: f64,
    /// Mean of each η_j.
    pub mean_eta: Vec<f64>,
    pub mean_best_variance: Option<f64>,
}

impl LateSummary {
    pub fn entangled(&self) -> bool {
        self.mean_min_eta < ENTANGLED_BELOW
    }
}

fn in_window(t: f64, t_end: f64) -> bool {
    t >= LATE_FRACTION * t_end - 1e-9
}

pub fn late_summary(reports: &[EntanglementReport]) -> Result<LateSummary> {
    let t_end = reports
        .last()
        .ok_or_else(|| Error::Config("empty trajectory".into()))?
        .time;
    let late: Vec<_> = reports.iter().filter(|r| in_window(r.time, t_end)).collect();
    let n = late.len() as f64;
    let mins: Vec<f64> = late.iter().map(|r| r.min_eta()).collect();
    let lo = mins.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let modes = late[0].eta.len();
    let mean_eta = (0..modes)
        .map(|j| late.iter().map(|r| r.eta[j]).sum::<f64>() / n)
        .collect();
    let mean_best_variance = late
        .iter()
        .map(|r| r.best_variance)
        .sum::<Option<f64>>()
        .map(|s| s / n);
    Ok(LateSummary {
        mean_min_eta: mins.iter().sum::<f64>() / n,
        eta_amplitude: hi - lo,
        mean_eta,
        mean_best_variance,
    })
}

/// Late summary computed from the trajectory, touching only samples inside the window.
pub fn late_summary_of(trajectory: &Trajectory, with_squeezing: bool) -> Result<LateSummary> {
    let t_end = *trajectory.times.last().expect("nonempty trajectory");
    let reports = (0..trajectory.len())
        .filter(|&k| in_window(trajectory.times[k], t_end))
        .map(|k| {
            let v = trajectory.state(k);
            if with_squeezing {
                entanglement_report(&v)
            } else {
                let s = expand_to_phase_space(&mode_transform(v.n_modes())?);
                Ok(EntanglementReport {
                    time: v.time,
                    eta: negativities(&to_bare_basis(&v, &s)?)?,
                    combined_variances: Vec::new(),
                    best_variance: None,
                    params: None,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    late_summary(&reports)
}

/// max(t_max, 6.25/γ0), rounded up to a whole number of samples.
pub fn analysis_horizon(config: &RunConfig) -> f64 {
    let t = config.integration.t_max;
    if config.bath.gamma0 <= 0.0 {
        return t;
    }
    let want = RELAXATION_HORIZON / config.bath.gamma0;
    if want <= t {
        return t;
    }
    let s = config.integration.sample_dt;
    (want / s - 1e-9).ceil() * s
}

fn with_horizon(config: &RunConfig) -> RunConfig {
    let mut c = config.clone();
    c.integration.t_max = analysis_horizon(config);
    c
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<LateSummary, String>,
}

/// One row per value in increasing order; rows run concurrently on the rayon pool.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let values = spec.sorted_values();
    let shared = if spec.parameter.keeps_table() {
        Some(build_table(&spec.base, analysis_horizon(&spec.base))?)
    } else {
        None
    };
    let rows = values
        .par_iter()
        .map(|&value| {
            let outcome = sweep_point(spec.parameter, &spec.base, value, shared.as_ref())
                .map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                log::warn!("sweep {}={value}: {e}", spec.parameter.name());
            }
            SweepRow { value, outcome }
        })
        .collect();
    Ok(rows)
}

fn sweep_point(
    parameter: SweepParameter,
    base: &RunConfig,
    value: f64,
    shared: Option<&CoefficientTable>,
) -> Result<LateSummary> {
    let mut config = parameter.apply(base, value)?;
    // Evaluated per row, since γ0 may be the swept parameter.
    config.integration.t_max = analysis_horizon(&config);
    let owned;
    let table = match shared {
        Some(t) => t,
        None => {
            owned = build_table(&config, config.integration.t_max)?;
            &owned
        }
    };
    let traj = trajectory_with_table(&config, table, config.integration.t_max)?;
    late_summary_of(&traj, config.system.n_modes == 3)
}

pub fn write_sweep_csv<W: std::io::Write>(parameter: SweepParameter, rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([parameter.name(), "late_min_eta", "late_min_combined_variance", "status"])?;
    for row in rows {
        let rec = match &row.outcome {
            Ok(s) => [
                crate::fmt_num(row.value),
                crate::fmt_num(s.mean_min_eta),
                crate::fmt_num(s.mean_best_variance.unwrap_or(f64::NAN)),
                "ok".to_string(),
            ],
            Err(e) => [
                crate::fmt_num(row.value),
                "nan".into(),
                "nan".into(),
                format!("error: {e}"),
            ],
        };
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Squeezing r at which the late-time verdict flips, by bisection on a GHZ base config.
pub fn threshold_find(base: &RunConfig, r_lo: f64, r_hi: f64) -> Result<f64> {
    base.validate()?;
    let base = with_horizon(base);
    let horizon = base.integration.t_max;
    let table = build_table(&base, horizon)?;
    let verdict = |r: f64| -> Result<bool> {
        let c = SweepParameter::R.apply(&base, r)?;
        let traj = trajectory_with_table(&c, &table, horizon)?;
        Ok(late_summary_of(&traj, false)?.entangled())
    };
    let (mut lo, mut hi) = (r_lo.min(r_hi), r_lo.max(r_hi));
    let v_lo = verdict(lo)?;
    if v_lo == verdict(hi)? {
        return Err(Error::NoSignChange { r_lo, r_hi });
    }
    while hi - lo >= THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        log::debug!("threshold bracket [{lo}, {hi}]");
        if verdict(mid)? == v_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Entanglement CSV: t, η_j, the best and each pairwise combined variance, and (r1, r2, φ, θ).
pub fn write_entanglement_csv<W: std::io::Write>(reports: &[EntanglementReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = reports.first().map_or(0, |r| r.eta.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("eta_{j}")));
    header.push("var_min".into());
    header.extend(index_pairs().iter().map(|(i, j)| format!("var_{}_{}", i + 1, j + 1)));
    header.extend(["r1", "r2", "phi", "theta"].map(String::from));
    w.write_record(&header)?;
    let num = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), crate::fmt_num);
    for r in reports {
        let mut row = vec![crate::fmt_num(r.time)];
        row.extend(r.eta.iter().map(|&x| crate::fmt_num(x)));
        row.push(num(r.best_variance));
        for k in 0..index_pairs().len() {
            row.push(num(r.combined_variances.get(k).map(|c| c.1)));
        }
        let p = r.params.as_ref();
        row.push(num(p.map(|p| p.r1)));
        row.push(num(p.map(|p| p.r2)));
        row.push(num(p.map(|p| p.phi)));
        row.push(num(p.map(|p| p.theta)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        Error::Io(format!("{}: {e}", path.display()))
    })?))
}

/// Writes the requested CSVs plus `effective_config.toml` into `dir`.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for kind in &output.config.output.outputs {
        let path = match kind {
            OutputKind::Trajectory => {
                let p = dir.join("trajectory.csv");
                output.trajectory.write_csv(create(&p)?)?;
                p
            }
            OutputKind::Entanglement => {
                let p = dir.join("entanglement.csv");
                write_entanglement_csv(&output.reports, create(&p)?)?;
                p
            }
            OutputKind::Coefficients => {
                let p = dir.join("coefficients.csv");
                output.table.write_csv(create(&p)?)?;
                p
            }
        };
        written.push(path);
    }
    let p = dir.join("effective_config.toml");
    std::fs::write(&p, output.config.to_toml_string()).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    written.push(p);
    Ok(written)
}
