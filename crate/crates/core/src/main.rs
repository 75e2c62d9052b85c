// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_esd::config::RunConfig;
use cavity_esd::experiment::{convergence_audit, run_sweep};
use cavity_esd::output::{
    audit_csv, audit_text, esd_csv, surface_csv, trajectory_csv, write_file, Manifest,
};
use cavity_esd::{evolve, initial_state, Error, Mode};

#[derive(Parser)]
#[command(
    name = "cavity-esd",
    version,
    about = "Two qubits in a damped cavity: master-equation runs and entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write trajectory.csv.
    Simulate(Common),
    /// Run the [sweep] grid and write surface.csv and esd.csv.
    Sweep(Common),
    /// Truncation and step-size convergence checks; exit 5 on failure.
    Audit(Common),
    /// Print the resolved configuration.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the coupling mode (rwa or nonrwa).
    #[arg(long)]
    mode: Option<Mode>,
    /// Worker threads for sweeps, 0 = one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

enum Failure {
    Lib(Error),
    Io(String),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Lib(Error::Parse { .. }) => 2,
        Failure::Lib(Error::InvalidConfig(_)) => 3,
        Failure::Lib(Error::Integration { .. }) => 4,
        Failure::NotConverged => 5,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    if let Some(mode) = common.mode {
        cfg.system.mode = mode;
        if let Some(sw) = cfg.sweep.as_mut() {
            sw.modes = vec![mode];
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))
}

fn emit(
    dir: &Path,
    command: &str,
    cfg: &RunConfig,
    files: &[(&str, String)],
) -> Result<(), Failure> {
    prepare_out(dir)?;
    let mut outputs = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_file(&path, body)?;
        outputs.push(path);
    }
    let manifest = Manifest {
        command: command.into(),
        outputs,
        config: cfg.clone(),
    };
    write_file(&dir.join("manifest.txt"), &manifest.render())?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(c) => {
            let cfg = load(&c)?;
            print!("{}", cfg.dump());
            println!("# sha256 {}", cfg.digest());
        }
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let rho0 = initial_state(cfg.initial, &cfg.system.layout()?);
            let traj = evolve(&rho0, &cfg.system)?;
            emit(
                &c.out,
                "simulate",
                &cfg,
                &[("trajectory.csv", trajectory_csv(&traj))],
            )?;
            eprintln!(
                "wrote {} samples to {}",
                traj.len(),
                c.out.join("trajectory.csv").display()
            );
            for (t, v) in traj.positivity_violations() {
                eprintln!("warning: eigenvalue {v:e} at t = {t}");
            }
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let spec = cfg.sweep_spec()?;
            let sw = cfg.sweep.as_ref().expect("validated sweep section");
            let result = run_sweep(&spec, c.threads)?;
            let esd = result.dead_intervals(sw.zero_tol, sw.min_width);
            emit(
                &c.out,
                "sweep",
                &cfg,
                &[
                    ("surface.csv", surface_csv(&result)),
                    ("esd.csv", esd_csv(&esd)),
                ],
            )?;
            for (mode, d, iv) in &esd {
                if let Some(first) = iv.first() {
                    eprintln!(
                        "{mode} d = {d}: {} dead interval(s), first at t = {}",
                        iv.len(),
                        first.t_start
                    );
                }
            }
        }
        Command::Audit(c) => {
            let cfg = load(&c)?;
            let (n, dt) = convergence_audit(&cfg.system, cfg.initial)?;
            let reports = [&n, &dt];
            emit(&c.out, "audit", &cfg, &[("audit.csv", audit_csv(&reports))])?;
            print!("{}", audit_text(&reports));
            if !(n.passed && dt.passed) {
                return Err(Failure::NotConverged);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(m) => eprintln!("error: {m}"),
                Failure::NotConverged => eprintln!("error: convergence audit failed"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
