use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use ap_kinetic::analysis::{speed_oracle, SlopeGrid};
use ap_kinetic::hj_limit::hamiltonian_table;
use ap_kinetic::{Boundary, Branch, Equilibrium, EquilibriumSpec, Grid};
use ap_kinetic_cli::config::{parse_config, parse_override};
use ap_kinetic_cli::experiments::{run_config, run_experiment, EXPERIMENTS};
use ap_kinetic_cli::output::num;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ap-kinetic", version, about = "Kinetic reaction-transport solvers in Hopf-Cole variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver from a configuration file.
    Run {
        config: PathBuf,
        /// Override a configuration key, e.g. `--set eps=1e-2`.
        #[arg(long = "set", value_parser = parse_override)]
        overrides: Vec<(String, String)>,
    },
    /// Run a named experiment.
    Experiment {
        /// Experiment name; `--list` prints the available names.
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        #[arg(long = "set", value_parser = parse_override)]
        overrides: Vec<(String, String)>,
        #[arg(long)]
        list: bool,
    },
    /// Tabulate the limit Hamiltonian H(p) as CSV on stdout.
    HamiltonianTable {
        #[arg(long, allow_hyphen_values = true)]
        p_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        p_max: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        velocity: VelocityArgs,
    },
    /// Minimal front speed c* = inf_p (H(p) + r) / p and its slope.
    SpeedOracle {
        #[command(flatten)]
        velocity: VelocityArgs,
        #[arg(long, default_value_t = 1e-2)]
        p_min: f64,
        #[arg(long, default_value_t = 1e2)]
        p_max: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EquilibriumArg {
    Uniform,
    Singular,
}

#[derive(clap::Args)]
struct VelocityArgs {
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    v_max: f64,
    #[arg(long, default_value_t = 1.25e-2)]
    dv: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    equilibrium: EquilibriumArg,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

impl VelocityArgs {
    fn equilibrium(&self) -> Result<Equilibrium<f64>> {
        // Only the velocity grid matters here.
        let grid = Grid::from_steps(1.0, 1.0, self.v_max, self.dv, 0.0, 1.0, Boundary::Periodic)?;
        let spec = match self.equilibrium {
            EquilibriumArg::Uniform => EquilibriumSpec::Uniform,
            EquilibriumArg::Singular => EquilibriumSpec::SingularParabolic,
        };
        Ok(Equilibrium::build(&spec, &grid)?)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, overrides } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = parse_config(&text)
                .with_context(|| format!("in {}", config.display()))?
                .with_overrides(&overrides)?;
            let out = run_config(&cfg)?;
            println!("wrote {}", out.dir.display());
        }
        Command::Experiment { list: true, .. } => {
            for name in EXPERIMENTS {
                println!("{name}");
            }
        }
        Command::Experiment { name, overrides, .. } => {
            let name = name.expect("clap requires a name without --list");
            let out = run_experiment(&name, &overrides)?;
            println!("wrote {}", out.dir.display());
        }
        Command::HamiltonianTable { p_min, p_max, n, velocity } => {
            let eq = velocity.equilibrium()?;
            let table = hamiltonian_table(p_min, p_max, n, velocity.r, &eq, velocity.tol)?;
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(["p", "H", "singular_branch"])?;
            for h in table {
                let branch = if h.branch == Branch::SingularBoundary { "1" } else { "0" };
                w.write_record([num(h.p), num(h.value), branch.to_string()])?;
            }
            w.flush()?;
        }
        Command::SpeedOracle { velocity, p_min, p_max, n } => {
            let eq = velocity.equilibrium()?;
            let oracle = speed_oracle(velocity.r, &eq, SlopeGrid { p_min, p_max, n }, velocity.tol)?;
            println!("c_star = {}", num(oracle.c_star));
            println!("p_star = {}", num(oracle.p_star));
        }
    }
    Ok(())
}
