// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.
//!
//! Run with `cargo test --release --test acceptance`. The non-RWA runs use
//! the default truncation and take a few minutes on one core.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::Matrix4;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cavity_esd::experiment::{
    audit_dt_with, audit_n_max_with, detect_dead_intervals, dominant_frequency, run_sweep,
    uniform_grid, SweepResult, SweepSpec, DEFAULT_MIN_WIDTH, DEFAULT_ZERO_TOL,
};
use cavity_esd::{
    bell_transform, concurrence_bell, concurrence_block, concurrence_wootters, BellKind, Mode,
    Positivity, QubitState, SystemConfig, Trajectory, C64,
};

const SECTOR_TOL: f64 = 1e-10;
const TWO_PHOTON_THRESHOLD: f64 = 1e-3;
const EARLY_WINDOW: f64 = 5.0;
const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;
const ROUTE_TOL: f64 = 1e-12;
const FIXED_POINT_TOL: f64 = 1e-8;
const RANDOM_STATES: usize = 1000;
/// Distance grid for the crossover check, spacing λ/20 on [0, L].
const SWEEP_POINTS: usize = 11;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, title: &str, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!(
            "{} {id}. {title}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn dead(traj: &Trajectory) -> Vec<cavity_esd::DeadInterval> {
    let c = traj.series(|o| o.c_wootters);
    detect_dead_intervals(&traj.times, &c, DEFAULT_ZERO_TOL, DEFAULT_MIN_WIDTH)
}

fn point(sweep: &SweepResult, mode: Mode, d: f64) -> &Trajectory {
    &sweep
        .points
        .iter()
        .find(|p| p.mode == mode && p.d == d)
        .expect("grid point present")
        .trajectory
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn random_populations(rng: &mut StdRng) -> [f64; 4] {
    let w: [f64; 4] = std::array::from_fn(|_| -rng.gen_range(1e-12f64..1.0).ln());
    let s: f64 = w.iter().sum();
    w.map(|x| x / s)
}

/// Populations on the diagonal, one coherence between |↑↓⟩ and |↓↑⟩ and,
/// if `outer` is set, one between |↓↓⟩ and |↑↑⟩; each coherence stays
/// inside its 2×2 positivity bound.
fn random_x_state(rng: &mut StdRng, outer: bool) -> QubitState {
    let p = random_populations(rng);
    let mut m = Matrix4::from_diagonal(&p.map(c).into());
    let inner = rng.gen_range(0.0..1.0) * (p[1] * p[2]).sqrt();
    let z = C64::from_polar(inner, rng.gen_range(0.0..2.0 * PI));
    m[(1, 2)] = z;
    m[(2, 1)] = z.conj();
    if outer {
        let r = rng.gen_range(0.01..1.0) * (p[0] * p[3]).sqrt();
        let w = C64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
        m[(0, 3)] = w;
        m[(3, 0)] = w.conj();
    }
    QubitState::new(m).expect("X-state inside positivity bounds")
}

fn integrity(traj: &Trajectory) -> (f64, f64, Option<f64>) {
    let worst_negative = traj
        .observables
        .iter()
        .filter_map(|o| match o.positivity {
            Positivity::Negative(v) => Some(v),
            Positivity::Certified => None,
        })
        .reduce(f64::min);
    (
        traj.max_trace_error(),
        traj.max_hermiticity_defect(),
        worst_negative,
    )
}

fn main() {
    let started = Instant::now();
    let mut report = Report { failed: 0 };

    let base = SystemConfig::default();
    let l = base.cavity_length;
    let grid = uniform_grid(l, SWEEP_POINTS);

    let rwa_sweep = run_sweep(
        &SweepSpec::new(
            base.with_mode(Mode::Rwa),
            BellKind::S,
            grid.clone(),
            vec![Mode::Rwa],
        )
        .unwrap(),
        0,
    )
    .expect("RWA sweep");
    let full_sweep = run_sweep(
        &SweepSpec::new(
            base.with_mode(Mode::NonRwa),
            BellKind::S,
            grid.clone(),
            vec![Mode::NonRwa],
        )
        .unwrap(),
        0,
    )
    .expect("non-RWA sweep");
    let rwa = point(&rwa_sweep, Mode::Rwa, 0.0);
    let full = point(&full_sweep, Mode::NonRwa, 0.0);

    // 1
    let max44 = rwa.series(|o| o.rho44).into_iter().fold(0.0, f64::max);
    let max14 = rwa.series(|o| o.abs_rho14).into_iter().fold(0.0, f64::max);
    report.line(
        1,
        max44 <= SECTOR_TOL && max14 <= SECTOR_TOL,
        "RWA single-excitation confinement",
        format!("max rho44 = {max44:.3e}, max |rho14| = {max14:.3e} (limit {SECTOR_TOL:e})"),
    );

    // 2
    let first = full
        .times
        .iter()
        .zip(&full.observables)
        .find(|(&t, o)| t <= EARLY_WINDOW && o.rho44 > TWO_PHOTON_THRESHOLD)
        .map(|(&t, _)| t);
    let peak44 = full.series(|o| o.rho44).into_iter().fold(0.0, f64::max);
    report.line(
        2,
        first.is_some(),
        "non-RWA two-photon population",
        match first {
            Some(t) => {
                format!("rho44 > {TWO_PHOTON_THRESHOLD:e} first at t = {t:.3}, peak {peak44:.4}")
            }
            None => format!("rho44 stays <= {TWO_PHOTON_THRESHOLD:e} for t <= {EARLY_WINDOW}"),
        },
    );

    // 3
    let full_dead = dead(full);
    let onset = full_dead.first().map(|iv| iv.t_start);
    report.line(
        3,
        onset.is_some_and(|t| t <= EARLY_WINDOW),
        "non-RWA sudden death",
        match full_dead.first() {
            Some(iv) => format!(
                "{} dead interval(s), first [{:.2}, {:.2}] width {:.2}",
                full_dead.len(),
                iv.t_start,
                iv.t_end,
                iv.width
            ),
            None => "no dead interval".into(),
        },
    );

    // 4
    let rwa_dead = dead(rwa);
    let rwa_any: usize = rwa_sweep
        .points
        .iter()
        .map(|p| dead(&p.trajectory).len())
        .sum();
    report.line(
        4,
        rwa_dead.is_empty() && rwa_any == 0,
        "RWA has no sudden death",
        format!(
            "{} dead interval(s) at d = 0, {rwa_any} over all {} distances",
            rwa_dead.len(),
            rwa_sweep.points.len()
        ),
    );

    // 5
    let esd: Vec<(f64, Option<f64>)> = full_sweep
        .points
        .iter()
        .map(|p| (p.d, dead(&p.trajectory).first().map(|iv| iv.t_start)))
        .collect();
    let with: Vec<f64> = esd.iter().filter(|e| e.1.is_some()).map(|e| e.0).collect();
    let without: Vec<f64> = esd.iter().filter(|e| e.1.is_none()).map(|e| e.0).collect();
    let nonempty = !with.is_empty();
    let small_end = with.iter().all(|&a| without.iter().all(|&b| a < b));
    let largest_clear = esd.iter().rev().take(2).all(|e| e.1.is_none());
    let onsets: Vec<String> = esd
        .iter()
        .map(|(d, t)| match t {
            Some(t) => format!("{d:.2}:{t:.2}"),
            None => format!("{d:.2}:-"),
        })
        .collect();
    report.line(
        5,
        nonempty && small_end && largest_clear,
        "sudden death confined to small distances",
        format!(
            "ESD at {}/{} distances, small-d end only: {small_end}, two largest d clear: {largest_clear}; onset by d [{}]",
            with.len(),
            esd.len(),
            onsets.join(" ")
        ),
    );

    // 6
    let g0 = base.g0;
    let target = g0 / PI;
    let freq = dominant_frequency(&rwa.times, &rwa.series(|o| o.c_wootters));
    report.line(
        6,
        freq.is_some_and(|f| f >= target / 2.0 && f <= 2.0 * target),
        "RWA concurrence oscillation scale",
        format!(
            "dominant frequency {:.4} vs g0/pi = {target:.4} (factor 2 band)",
            freq.unwrap_or(f64::NAN)
        ),
    );

    // 7
    let mut worst_trace: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut worst_neg: Option<f64> = None;
    for p in rwa_sweep.points.iter().chain(&full_sweep.points) {
        let (t, h, n) = integrity(&p.trajectory);
        worst_trace = worst_trace.max(t);
        worst_herm = worst_herm.max(h);
        worst_neg = match (worst_neg, n) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
    let audit_cfg = base.with_mode(Mode::NonRwa);
    let n_audit = audit_n_max_with(&audit_cfg, BellKind::S, full).expect("truncation audit");
    let dt_audit = audit_dt_with(&audit_cfg, BellKind::S, full).expect("step audit");
    let ratio = dt_audit.order_ratio;
    let ratio_ok = dt_audit.order_ratio_in_band() == Some(true);
    let integrity_ok =
        worst_trace <= TRACE_TOL && worst_herm <= HERMITICITY_TOL && worst_neg.is_none();
    let audits_ok = n_audit.max_deviation() <= 1e-6 && dt_audit.max_deviation() <= 1e-7 && ratio_ok;
    report.line(
        7,
        integrity_ok && audits_ok,
        "numerical integrity and convergence",
        format!(
            "trace {worst_trace:.1e}, hermiticity {worst_herm:.1e}, min eigenvalue {}; n_max {}->{} dev {:.2e}; dt dev {:.2e}, order ratio {} (smooth devs {:.2e}, {:.2e})",
            match worst_neg {
                Some(v) => format!("{v:.2e}"),
                None => format!(">= -{POSITIVITY_TOL:e}"),
            },
            n_audit.levels[0],
            n_audit.levels[1],
            n_audit.max_deviation(),
            dt_audit.max_deviation(),
            ratio.map_or("n/a".into(), |r| format!("{r:.2}")),
            dt_audit.smooth_deviations[0],
            dt_audit.smooth_deviations[1],
        ),
    );

    // 8
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst_pair: f64 = 0.0;
    for _ in 0..RANDOM_STATES {
        let q = random_x_state(&mut rng, false);
        let w = concurrence_wootters(&q);
        let b = concurrence_block(&q);
        let bell = concurrence_bell(&bell_transform(&q)).expect("Bell route in domain");
        worst_pair = worst_pair
            .max((w - b).abs())
            .max((w - bell).abs())
            .max((b - bell).abs());
    }
    let mut worst_gap = f64::INFINITY;
    for _ in 0..RANDOM_STATES {
        let q = random_x_state(&mut rng, true);
        worst_gap = worst_gap.min(concurrence_wootters(&q) - concurrence_block(&q));
    }
    report.line(
        8,
        worst_pair <= ROUTE_TOL && worst_gap >= -ROUTE_TOL,
        "concurrence routes agree",
        format!(
            "max pairwise gap {worst_pair:.2e} on {RANDOM_STATES} block states, min (wootters - block) {worst_gap:.2e} on {RANDOM_STATES} X-states"
        ),
    );

    // 9
    let mut fixed_dev: f64 = 0.0;
    for traj in [
        point(&rwa_sweep, Mode::Rwa, l),
        point(&full_sweep, Mode::NonRwa, l),
    ] {
        for o in &traj.observables {
            fixed_dev = fixed_dev.max((o.c_wootters - 1.0).abs());
        }
    }
    report.line(
        9,
        fixed_dev <= FIXED_POINT_TOL,
        "decoupled qubits keep full entanglement",
        format!("max |C - 1| = {fixed_dev:.2e} at d = L in both modes"),
    );

    println!(
        "{} of 9 criteria passed in {:.0} s",
        9 - report.failed,
        started.elapsed().as_secs_f64()
    );
    if report.failed > 0 {
        std::process::exit(1);
    }
}
