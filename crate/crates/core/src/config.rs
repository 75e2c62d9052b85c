// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` configuration files with `[system]`, `[integration]`
//! and `[sweep]` sections.
//!
//! ```text
//! [system]
//! g0 = 1.0
//! kappa = 0.1   # cavity loss
//! mode = nonrwa
//!
//! [integration]
//! t_end = 20
//! ```
//!
//! Anything not given takes its default. [`RunConfig::dump`] writes every
//! value back out, and the dump parses to the same configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::experiment::{
    uniform_grid, SweepSpec, DEFAULT_D_POINTS, DEFAULT_MIN_WIDTH, DEFAULT_ZERO_TOL,
};
use crate::model::{BellKind, Mode, SystemConfig};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSettings {
    pub d_values: Vec<f64>,
    pub modes: Vec<Mode>,
    pub zero_tol: f64,
    pub min_width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub initial: BellKind,
    /// Present only when the file has a `[sweep]` section.
    pub sweep: Option<SweepSettings>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            initial: BellKind::S,
            sweep: None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    System,
    Integration,
    Sweep,
}

const SYSTEM_KEYS: [&str; 10] = [
    "omega", "omega0", "g0", "kappa", "L", "lambda", "d", "n_max", "mode", "initial",
];
const INTEGRATION_KEYS: [&str; 3] = ["dt", "t_end", "sample_every"];
const SWEEP_KEYS: [&str; 5] = ["d_values", "d_points", "modes", "zero_tol", "min_width"];

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str, what: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| parse_err(line, format!("field '{key}': expected {what}, got '{raw}'")))
}

fn parse_list<T>(
    line: usize,
    key: &str,
    raw: &str,
    item: impl Fn(&str) -> Result<T>,
) -> Result<Vec<T>> {
    let items: Vec<&str> = raw.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(parse_err(
            line,
            format!("field '{key}': empty entry in list '{raw}'"),
        ));
    }
    items.into_iter().map(item).collect()
}

impl RunConfig {
    /// Parses and fills defaults. Does not validate; see [`RunConfig::validate`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<Section> = None;
        let mut seen: Vec<&'static str> = Vec::new();
        let mut sweep_seen = false;
        let (mut d_values, mut d_points) = (None::<Vec<f64>>, None::<(usize, usize)>);
        let mut modes = None;
        let (mut zero_tol, mut min_width) = (DEFAULT_ZERO_TOL, DEFAULT_MIN_WIDTH);

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        parse_err(line, format!("malformed section header '{content}'"))
                    })?
                    .trim();
                section = Some(match name {
                    "system" => Section::System,
                    "integration" => Section::Integration,
                    "sweep" => {
                        sweep_seen = true;
                        Section::Sweep
                    }
                    other => return Err(parse_err(line, format!("unknown section '[{other}]'"))),
                });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                parse_err(line, format!("expected 'key = value', got '{content}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = section else {
                return Err(parse_err(
                    line,
                    format!("field '{key}' appears before any section header"),
                ));
            };
            let allowed: &[&'static str] = match sec {
                Section::System => &SYSTEM_KEYS,
                Section::Integration => &INTEGRATION_KEYS,
                Section::Sweep => &SWEEP_KEYS,
            };
            let Some(&key) = allowed.iter().find(|k| **k == key) else {
                return Err(parse_err(
                    line,
                    format!("unknown field '{key}' in section {sec:?}"),
                ));
            };
            if seen.contains(&key) {
                return Err(parse_err(line, format!("field '{key}' given twice")));
            }
            seen.push(key);
            if value.is_empty() {
                return Err(parse_err(line, format!("field '{key}' has no value")));
            }

            let num = |v: &str| parse_value::<f64>(line, key, v, "a number");
            let s = &mut cfg.system;
            match key {
                "omega" => s.omega = num(value)?,
                "omega0" => s.omega0 = num(value)?,
                "g0" => s.g0 = num(value)?,
                "kappa" => s.kappa = num(value)?,
                "L" => s.cavity_length = num(value)?,
                "lambda" => s.wavelength = num(value)?,
                "d" => s.distance = num(value)?,
                "n_max" => s.n_max = parse_value(line, key, value, "a nonnegative integer")?,
                "mode" => s.mode = parse_value(line, key, value, "rwa or nonrwa")?,
                "initial" => {
                    cfg.initial = parse_value(line, key, value, "one of s, a, alpha, beta")?
                }
                "dt" => s.dt = num(value)?,
                "t_end" => s.t_end = num(value)?,
                "sample_every" => {
                    s.sample_every = parse_value(line, key, value, "a positive integer")?
                }
                "d_values" => d_values = Some(parse_list(line, key, value, num)?),
                "d_points" => {
                    d_points = Some((parse_value(line, key, value, "a positive integer")?, line))
                }
                "modes" => {
                    modes = Some(parse_list(line, key, value, |v| {
                        parse_value(line, key, v, "rwa or nonrwa")
                    })?)
                }
                "zero_tol" => zero_tol = num(value)?,
                "min_width" => min_width = num(value)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        if sweep_seen {
            let d_values = match (d_values, d_points) {
                (Some(_), Some((_, line))) => {
                    return Err(parse_err(
                        line,
                        "give either d_values or d_points, not both".into(),
                    ))
                }
                (Some(v), None) => v,
                (None, Some((n, _))) => uniform_grid(cfg.system.cavity_length, n),
                (None, None) => uniform_grid(cfg.system.cavity_length, DEFAULT_D_POINTS),
            };
            cfg.sweep = Some(SweepSettings {
                d_values,
                modes: modes.unwrap_or_else(|| Mode::ALL.to_vec()),
                zero_tol,
                min_width,
            });
        }
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_err(0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if let Some(sw) = &self.sweep {
            self.sweep_spec()?;
            if !(sw.zero_tol > 0.0) || !sw.zero_tol.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "zero_tol > 0 violated (zero_tol = {})",
                    sw.zero_tol
                )));
            }
            let spacing = self.system.dt * self.system.sample_every as f64;
            if !(sw.min_width > spacing) || !sw.min_width.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "min_width must exceed the sample spacing {spacing} (min_width = {})",
                    sw.min_width
                )));
            }
        }
        Ok(())
    }

    /// The sweep described by the `[sweep]` section.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sw = self.sweep.as_ref().ok_or_else(|| {
            Error::InvalidConfig("no [sweep] section in the configuration".into())
        })?;
        SweepSpec::new(
            self.system.clone(),
            self.initial,
            sw.d_values.clone(),
            sw.modes.clone(),
        )
    }

    /// Every value spelled out with its unit. Parses back to `self`.
    pub fn dump(&self) -> String {
        let s = &self.system;
        let num = |v: f64| format!("{v:?}");
        let mut out = String::from("[system]\n");
        field(
            &mut out,
            "omega",
            num(s.omega),
            "cavity frequency, sets the frequency unit",
        );
        field(
            &mut out,
            "omega0",
            num(s.omega0),
            "qubit transition frequency [omega]",
        );
        field(&mut out, "g0", num(s.g0), "peak coupling [omega]");
        field(
            &mut out,
            "kappa",
            num(s.kappa),
            "cavity damping rate [omega]",
        );
        field(&mut out, "L", num(s.cavity_length), "cavity size [lambda]");
        field(
            &mut out,
            "lambda",
            num(s.wavelength),
            "cavity wavelength, sets the length unit",
        );
        field(
            &mut out,
            "d",
            num(s.distance),
            "inter-qubit distance [lambda]",
        );
        field(
            &mut out,
            "n_max",
            s.n_max.to_string(),
            "Fock truncation [photons]",
        );
        field(&mut out, "mode", s.mode.to_string(), "rwa | nonrwa");
        field(
            &mut out,
            "initial",
            self.initial.to_string(),
            "s | a | alpha | beta",
        );
        out.push_str("\n[integration]\n");
        field(&mut out, "dt", num(s.dt), "RK4 step [1/omega]");
        field(&mut out, "t_end", num(s.t_end), "final time [1/omega]");
        field(
            &mut out,
            "sample_every",
            s.sample_every.to_string(),
            "steps between samples",
        );
        if let Some(sw) = &self.sweep {
            out.push_str("\n[sweep]\n");
            let ds: Vec<String> = sw.d_values.iter().map(|&d| num(d)).collect();
            field(&mut out, "d_values", ds.join(", "), "distances [lambda]");
            let ms: Vec<&str> = sw.modes.iter().map(|m| m.as_str()).collect();
            field(&mut out, "modes", ms.join(", "), "rwa | nonrwa");
            field(
                &mut out,
                "zero_tol",
                num(sw.zero_tol),
                "concurrence counted as zero up to this",
            );
            field(
                &mut out,
                "min_width",
                num(sw.min_width),
                "shortest dead interval reported [1/omega]",
            );
        }
        out
    }

    /// sha256 of [`RunConfig::dump`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.dump().as_bytes()))
    }
}

fn field(out: &mut String, key: &str, value: String, note: &str) {
    let _ = writeln!(out, "{key:<12} = {value:<24} # {note}");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.system.dt, 1e-3);
        assert_eq!(c.system.t_end, 20.0);
        assert_eq!(c.system.n_max, SystemConfig::DEFAULT_N_MAX);
    }

    #[test]
    fn reads_sections_and_comments() {
        let text = "# header\n[system]\ng0 = 0.5  # weaker\nmode = rwa\ninitial = alpha\nd=0.1\n\n[integration]\ndt = 0.002\nt_end = 4\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.system.g0, 0.5);
        assert_eq!(c.system.mode, Mode::Rwa);
        assert_eq!(c.initial, BellKind::Alpha);
        assert_eq!(c.system.distance, 0.1);
        assert_eq!(c.system.dt, 0.002);
        assert!(c.sweep.is_none());
        c.validate().unwrap();
    }

    #[test]
    fn sweep_defaults() {
        let c = RunConfig::parse("[sweep]\n").unwrap();
        let sw = c.sweep.unwrap();
        assert_eq!(sw.d_values.len(), 26);
        assert_eq!(sw.modes, Mode::ALL.to_vec());
        assert_eq!(sw.zero_tol, 1e-6);
        assert_eq!(sw.min_width, 0.5);
    }

    #[test]
    fn diagnostics_name_the_line() {
        assert_eq!(
            line_of(RunConfig::parse("[system]\n\ng0 = fast\n").unwrap_err()),
            3
        );
        assert_eq!(
            line_of(RunConfig::parse("[system]\nbogus = 1\n").unwrap_err()),
            2
        );
        assert_eq!(line_of(RunConfig::parse("g0 = 1\n").unwrap_err()), 1);
        assert_eq!(
            line_of(RunConfig::parse("[system]\ng0 = 1\ng0 = 2\n").unwrap_err()),
            3
        );
        assert_eq!(line_of(RunConfig::parse("[physics]\n").unwrap_err()), 1);
        assert_eq!(
            line_of(RunConfig::parse("[system]\nmode = jc\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(RunConfig::parse("[integration]\ndt\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(RunConfig::parse("[integration]\ndt = 0.1\n[system]\ndt = 0.1\n").unwrap_err()),
            4
        );
        assert_eq!(
            line_of(RunConfig::parse("[sweep]\nd_values = 0, 0.1\nd_points = 3\n").unwrap_err()),
            3
        );
        assert_eq!(
            line_of(RunConfig::parse("[sweep]\nd_values = 0,,0.1\n").unwrap_err()),
            2
        );
        let msg = RunConfig::parse("[system]\n\ng0 = fast\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("g0") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn validation_names_the_invariant() {
        let c = RunConfig::parse("[system]\nd = 0.7\n").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("0 <= d <= L"), "{msg}");
        let c = RunConfig::parse("[sweep]\nmin_width = 0.001\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = RunConfig::parse("[sweep]\nd_values = 0.2, 0.1\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn dump_round_trips() {
        let texts = [
            "",
            "[system]\ng0 = 0.3\nkappa = 0.0123456789012345\nd = 0.1\n[sweep]\nd_points = 7\nmodes = nonrwa\n",
            "[system]\nmode = rwa\nn_max = 2\ninitial = beta\n[integration]\ndt = 0.01\nt_end = 3\n",
        ];
        for t in texts {
            let c = RunConfig::parse(t).unwrap();
            let back = RunConfig::parse(&c.dump()).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.digest(), c.digest());
            assert_eq!(back.dump(), c.dump());
        }
    }

    #[test]
    fn digest_tracks_every_value() {
        let base = RunConfig::parse("[sweep]\n").unwrap();
        let variants = [
            "[system]\nomega0 = 0.98\n[sweep]\n",
            "[system]\nn_max = 20\n[sweep]\n",
            "[integration]\nsample_every = 5\n[sweep]\n",
            "[system]\ninitial = a\n[sweep]\n",
            "[sweep]\nzero_tol = 1e-7\n",
            "[sweep]\nmodes = rwa\n",
            "[sweep]\nd_points = 5\n",
        ];
        for v in variants {
            assert_ne!(RunConfig::parse(v).unwrap().digest(), base.digest(), "{v}");
        }
    }

    #[test]
    fn dump_annotates_units() {
        let d = RunConfig::default().dump();
        assert!(d.contains("dt           = 0.001"));
        assert!(d.contains("[1/omega]"));
        assert!(d.contains("[lambda]"));
    }
}
