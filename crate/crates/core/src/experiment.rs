// SPDX-License-Identifier: Apache-2.0

//! Distance sweeps, sudden-death detection and convergence audits.

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::evolution::{evolve, Observables, Trajectory};
use crate::model::{coupling_constants, initial_state, BellKind, Mode, SystemConfig};
use crate::{Error, Result, C64};

pub const DEFAULT_ZERO_TOL: f64 = 1e-6;
pub const DEFAULT_MIN_WIDTH: f64 = 0.5;
pub const DEFAULT_D_POINTS: usize = 26;

pub const N_MAX_TOL: f64 = 1e-6;
pub const N_MAX_STEP: usize = 4;
pub const DT_TOL: f64 = 1e-7;
/// Accepted band for the dt/(dt/2) over (dt/2)/(dt/4) deviation ratio.
pub const ORDER_RATIO_BAND: (f64, f64) = (8.0, 32.0);
/// Below this the finest deviation is dominated by rounding and the ratio
/// carries no information about the step-size error.
pub const ORDER_RATIO_FLOOR: f64 = 1e-13;

/// `points` distances spread uniformly over [0, length].
pub fn uniform_grid(length: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| length * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub initial: BellKind,
    pub d_values: Vec<f64>,
    pub modes: Vec<Mode>,
}

impl SweepSpec {
    pub fn new(
        base: SystemConfig,
        initial: BellKind,
        d_values: Vec<f64>,
        modes: Vec<Mode>,
    ) -> Result<Self> {
        let spec = Self {
            base,
            initial,
            d_values,
            modes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_values.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one d value".into(),
            ));
        }
        if self.d_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig(
                "d_values must be strictly increasing".into(),
            ));
        }
        let l = self.base.cavity_length;
        if let Some(d) = self.d_values.iter().find(|&&d| !(0.0..=l).contains(&d)) {
            return Err(Error::InvalidConfig(format!(
                "0 <= d <= L violated by sweep value d = {d} (L = {l})"
            )));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one mode".into()));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].contains(m) {
                return Err(Error::InvalidConfig(format!("mode {m} listed twice")));
            }
        }
        for &mode in &self.modes {
            for &d in &self.d_values {
                self.base.with_mode(mode).with_distance(d).validate()?;
            }
        }
        Ok(())
    }

    /// Work units in output order: mode-major, then d ascending. Modes are
    /// put in canonical order (RWA first) so the listing order in a config
    /// does not change the output.
    pub fn points(&self) -> Vec<(Mode, f64)> {
        Mode::ALL
            .iter()
            .filter(|m| self.modes.contains(m))
            .flat_map(|&m| self.d_values.iter().map(move |&d| (m, d)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub mode: Mode,
    pub d: f64,
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Shared time grid.
    pub fn times(&self) -> &[f64] {
        self.points
            .first()
            .map(|p| p.trajectory.times.as_slice())
            .unwrap_or(&[])
    }

    pub fn for_mode(&self, mode: Mode) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(move |p| p.mode == mode)
    }

    /// Distances and the d × t matrix of `f` for one mode.
    pub fn surface(
        &self,
        mode: Mode,
        f: impl Fn(&Observables) -> f64,
    ) -> (Vec<f64>, Vec<Vec<f64>>) {
        self.for_mode(mode)
            .map(|p| (p.d, p.trajectory.series(&f)))
            .unzip()
    }

    /// Dead intervals of the Wootters concurrence per sweep point, in
    /// output order.
    pub fn dead_intervals(
        &self,
        zero_tol: f64,
        min_width: f64,
    ) -> Vec<(Mode, f64, Vec<DeadInterval>)> {
        self.points
            .iter()
            .map(|p| {
                let c = p.trajectory.series(|o| o.c_wootters);
                (
                    p.mode,
                    p.d,
                    detect_dead_intervals(&p.trajectory.times, &c, zero_tol, min_width),
                )
            })
            .collect()
    }
}

/// Runs every (mode, d) point. `threads = 0` lets rayon pick; the result
/// does not depend on the thread count.
pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<SweepResult> {
    spec.validate()?;
    if (spec.base.cavity_length - 0.5 * spec.base.wavelength).abs() < 1e-15 {
        let g1: Vec<f64> = spec
            .d_values
            .iter()
            .map(|&d| coupling_constants(&spec.base.with_distance(d)).g1)
            .collect();
        assert!(
            g1.windows(2).all(|w| w[1] <= w[0] + 1e-15),
            "g1 must be nonincreasing in d at L = lambda/2"
        );
    }
    let layout = spec.base.layout()?;
    let rho0 = initial_state(spec.initial, &layout);
    let work = spec.points();
    let run = |&(mode, d): &(Mode, f64)| -> Result<SweepPoint> {
        let cfg = spec.base.with_mode(mode).with_distance(d);
        let trajectory = evolve(&rho0, &cfg).map_err(|e| at_point(e, mode, d))?;
        Ok(SweepPoint {
            mode,
            d,
            trajectory,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    // collect keeps input order, so the first error reported is the first
    // failing point in output order.
    let results: Vec<Result<SweepPoint>> = pool.install(|| work.par_iter().map(run).collect());
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { points })
}

fn at_point(e: Error, mode: Mode, d: f64) -> Error {
    let tag = format!("mode {mode}, d = {d}");
    match e {
        Error::Integration { time, reason } => Error::Integration {
            time,
            reason: format!("{tag}: {reason}"),
        },
        Error::InvalidConfig(m) => Error::InvalidConfig(format!("{tag}: {m}")),
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{tag}: {m}")),
        Error::NumericalDomain(m) => Error::NumericalDomain(format!("{tag}: {m}")),
        other => other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeadInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub width: f64,
}

/// Maximal run of samples `start..=end` that are all dead or all alive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub dead: bool,
}

/// Splits the series into maximal dead (C ≤ zero_tol) and alive runs.
pub fn segments(c: &[f64], zero_tol: f64) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (i, &v) in c.iter().enumerate() {
        let dead = v <= zero_tol;
        match out.last_mut() {
            Some(s) if s.dead == dead => s.end = i,
            _ => out.push(Segment {
                start: i,
                end: i,
                dead,
            }),
        }
    }
    out
}

/// Dead runs whose width reaches `min_width`. Width is measured between
/// the first and last dead sample of the run.
pub fn detect_dead_intervals(
    times: &[f64],
    c: &[f64],
    zero_tol: f64,
    min_width: f64,
) -> Vec<DeadInterval> {
    let n = times.len().min(c.len());
    let slack = 1e-9 * min_width.abs().max(1.0);
    segments(&c[..n], zero_tol)
        .into_iter()
        .filter(|s| s.dead)
        .map(|s| DeadInterval {
            t_start: times[s.start],
            t_end: times[s.end],
            width: times[s.end] - times[s.start],
        })
        .filter(|iv| iv.width + slack >= min_width && iv.width > 0.0)
        .collect()
}

/// Frequency (cycles per unit time) of the largest nonzero DFT bin of the
/// mean-removed series on a uniform grid.
pub fn dominant_frequency(times: &[f64], series: &[f64]) -> Option<f64> {
    let n = times.len().min(series.len());
    if n < 4 {
        return None;
    }
    let spacing = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mean = series[..n].iter().sum::<f64>() / n as f64;
    let mut buf: Vec<C64> = series[..n]
        .iter()
        .map(|&v| C64::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (k, peak) = (1..=n / 2)
        .map(|k| (k, buf[k].norm()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    (peak > 0.0).then(|| k as f64 / (n as f64 * spacing))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditParameter {
    NMax,
    Dt,
}

impl AuditParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditParameter::NMax => "n_max",
            AuditParameter::Dt => "dt",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub parameter: AuditParameter,
    /// Refinement sequence: n_max ascending or dt descending.
    pub levels: Vec<f64>,
    /// `deviations[i]` compares `levels[i]` with `levels[i + 1]`, max over
    /// all samples and all observables.
    pub deviations: Vec<f64>,
    pub tolerance: f64,
    /// Same as `deviations` but over the smooth observables only; feeds the
    /// order check.
    pub smooth_deviations: Vec<f64>,
    pub order_ratio: Option<f64>,
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations[0]
    }

    /// The order ratio is meaningful only when the finer comparison sits
    /// above the rounding floor.
    pub fn order_ratio_resolved(&self) -> bool {
        self.smooth_deviations.len() == 2 && self.smooth_deviations[1] >= ORDER_RATIO_FLOOR
    }

    pub fn order_ratio_in_band(&self) -> Option<bool> {
        self.order_ratio
            .map(|r| (ORDER_RATIO_BAND.0..=ORDER_RATIO_BAND.1).contains(&r))
    }
}

fn max_deviation(a: &Trajectory, b: &Trajectory, which: &[usize]) -> Result<f64> {
    if a.len() != b.len()
        || a.times
            .iter()
            .zip(&b.times)
            .any(|(x, y)| (x - y).abs() > 1e-9)
    {
        return Err(Error::InvalidArgument(
            "trajectories sampled on different grids".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for (oa, ob) in a.observables.iter().zip(&b.observables) {
        let (va, vb) = (oa.values(), ob.values());
        for &k in which {
            worst = worst.max((va[k] - vb[k]).abs());
        }
    }
    Ok(worst)
}

const ALL_OBSERVABLES: [usize; 9] = [0, 1, 2, 3, 4, 5, 6, 7, 8];

fn base_run(config: &SystemConfig, initial: BellKind) -> Result<Trajectory> {
    config.validate()?;
    evolve(&initial_state(initial, &config.layout()?), config)
}

/// Truncation audit: `config` against `n_max + 4`.
pub fn audit_n_max(config: &SystemConfig, initial: BellKind) -> Result<ConvergenceReport> {
    audit_n_max_with(config, initial, &base_run(config, initial)?)
}

/// As [`audit_n_max`], reusing `base`, the trajectory of `config` itself.
pub fn audit_n_max_with(
    config: &SystemConfig,
    initial: BellKind,
    base: &Trajectory,
) -> Result<ConvergenceReport> {
    config.validate()?;
    let fine = SystemConfig {
        n_max: config.n_max + N_MAX_STEP,
        ..config.clone()
    };
    let b = evolve(&initial_state(initial, &fine.layout()?), &fine)?;
    let dev = max_deviation(base, &b, &ALL_OBSERVABLES)?;
    Ok(ConvergenceReport {
        parameter: AuditParameter::NMax,
        levels: vec![config.n_max as f64, fine.n_max as f64],
        deviations: vec![dev],
        tolerance: N_MAX_TOL,
        smooth_deviations: vec![max_deviation(base, &b, &Observables::SMOOTH)?],
        order_ratio: None,
        passed: dev <= N_MAX_TOL,
    })
}

/// Step audit: dt, dt/2, dt/4 compared on the coarse sample times.
pub fn audit_dt(config: &SystemConfig, initial: BellKind) -> Result<ConvergenceReport> {
    audit_dt_with(config, initial, &base_run(config, initial)?)
}

/// As [`audit_dt`], reusing `base`, the trajectory of `config` itself.
pub fn audit_dt_with(
    config: &SystemConfig,
    initial: BellKind,
    base: &Trajectory,
) -> Result<ConvergenceReport> {
    config.validate()?;
    let rho0 = initial_state(initial, &config.layout()?);
    let mut finer = Vec::with_capacity(2);
    for k in [2usize, 4] {
        let cfg = SystemConfig {
            dt: config.dt / k as f64,
            sample_every: config.sample_every * k,
            ..config.clone()
        };
        finer.push(evolve(&rho0, &cfg)?);
    }
    let runs = [base, &finer[0], &finer[1]];
    let deviations = vec![
        max_deviation(runs[0], runs[1], &ALL_OBSERVABLES)?,
        max_deviation(runs[1], runs[2], &ALL_OBSERVABLES)?,
    ];
    let smooth_deviations = vec![
        max_deviation(runs[0], runs[1], &Observables::SMOOTH)?,
        max_deviation(runs[1], runs[2], &Observables::SMOOTH)?,
    ];
    let order_ratio =
        (smooth_deviations[1] > 0.0).then(|| smooth_deviations[0] / smooth_deviations[1]);
    let mut report = ConvergenceReport {
        parameter: AuditParameter::Dt,
        levels: vec![config.dt, config.dt / 2.0, config.dt / 4.0],
        deviations,
        tolerance: DT_TOL,
        smooth_deviations,
        order_ratio,
        passed: false,
    };
    let ratio_ok = !report.order_ratio_resolved() || report.order_ratio_in_band() == Some(true);
    report.passed = report.deviations[0] <= DT_TOL && ratio_ok;
    Ok(report)
}

/// Both audits, truncation first. The run at `config` itself is shared.
pub fn convergence_audit(
    config: &SystemConfig,
    initial: BellKind,
) -> Result<(ConvergenceReport, ConvergenceReport)> {
    let base = base_run(config, initial)?;
    Ok((
        audit_n_max_with(config, initial, &base)?,
        audit_dt_with(config, initial, &base)?,
    ))
}
