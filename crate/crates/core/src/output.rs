// SPDX-License-Identifier: Apache-2.0

//! CSV and manifest writers. Numbers are written in scientific notation
//! with 12 significant digits so that identical results give identical
//! bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::evolution::Trajectory;
use crate::experiment::{ConvergenceReport, DeadInterval, SweepResult};
use crate::model::Mode;
use crate::{Error, Result};

pub const TRAJECTORY_HEADER: &str =
    "t,C_wootters,C_block,rho11,rho22,rho33,rho44,abs_rho23,abs_rho14,n_photon,trace_err";
pub const SURFACE_HEADER: &str = "mode,d,t,C_wootters,C_block,rho44";
pub const ESD_HEADER: &str = "mode,d,t_start,t_end,width";
pub const AUDIT_HEADER: &str =
    "parameter,level,next_level,deviation,smooth_deviation,tolerance,order_ratio,passed";

/// `d.ddddddddddde±XX`.
pub fn sci(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // -0.0 and 0.0 print the same
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.11e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(160 * (traj.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, o) in traj.times.iter().zip(&traj.observables) {
        let row = [
            *t,
            o.c_wootters,
            o.c_block,
            o.rho11,
            o.rho22,
            o.rho33,
            o.rho44,
            o.abs_rho23,
            o.abs_rho14,
            o.n_photon,
            o.trace_err,
        ];
        let cells: Vec<String> = row.iter().map(|&v| sci(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn surface_csv(sweep: &SweepResult) -> String {
    let mut out = String::from(SURFACE_HEADER);
    out.push('\n');
    for p in &sweep.points {
        let d = sci(p.d);
        for (t, o) in p.trajectory.times.iter().zip(&p.trajectory.observables) {
            let _ = writeln!(
                out,
                "{},{d},{},{},{},{}",
                p.mode.as_str(),
                sci(*t),
                sci(o.c_wootters),
                sci(o.c_block),
                sci(o.rho44)
            );
        }
    }
    out
}

pub fn esd_csv(report: &[(Mode, f64, Vec<DeadInterval>)]) -> String {
    let mut out = String::from(ESD_HEADER);
    out.push('\n');
    for (mode, d, intervals) in report {
        for iv in intervals {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                mode.as_str(),
                sci(*d),
                sci(iv.t_start),
                sci(iv.t_end),
                sci(iv.width)
            );
        }
    }
    out
}

pub fn audit_csv(reports: &[&ConvergenceReport]) -> String {
    let mut out = String::from(AUDIT_HEADER);
    out.push('\n');
    for r in reports {
        for (i, dev) in r.deviations.iter().enumerate() {
            // the order ratio belongs to the comparison pair as a whole
            let ratio = match (i, r.order_ratio) {
                (0, Some(q)) => sci(q),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{ratio},{}",
                r.parameter.as_str(),
                sci(r.levels[i]),
                sci(r.levels[i + 1]),
                sci(*dev),
                sci(r.smooth_deviations[i]),
                sci(r.tolerance),
                r.passed
            );
        }
    }
    out
}

/// Human-readable audit summary.
pub fn audit_text(reports: &[&ConvergenceReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{verdict} {} audit (tolerance {:e})",
            r.parameter.as_str(),
            r.tolerance
        );
        for (i, dev) in r.deviations.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {} -> {}: max deviation {dev:.3e}",
                r.levels[i],
                r.levels[i + 1]
            );
        }
        if let Some(q) = r.order_ratio {
            let note = if r.order_ratio_resolved() {
                ""
            } else {
                " (finest deviation at rounding level, not checked)"
            };
            let _ = writeln!(out, "  order ratio {q:.3}{note}");
        }
    }
    out
}

/// Everything needed to rerun a command and get the same files.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# tool: {} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        );
        let _ = writeln!(out, "# command: {}", self.command);
        for p in &self.outputs {
            let _ = writeln!(out, "# output: {}", p.display());
        }
        let _ = writeln!(out, "# config sha256: {}", self.config.digest());
        let _ = writeln!(out, "# the lines below are the resolved configuration");
        out.push_str(&self.config.dump());
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}
