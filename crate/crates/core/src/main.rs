use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hwqaoa::experiment::{run_experiment, run_method, ExperimentConfig, Method};
use hwqaoa::hwo::{build_sparse_pool, verify_connectivity, MAX_ENUMERATION_QUBITS};
use hwqaoa::oracle::{brute_force, GATE_MODEL};
use hwqaoa::problem::{emit_instance, generate_portfolio_instance, generate_twojet_instance, parse_instance};
use hwqaoa::vqa::OptConfig;
use hwqaoa::{ProblemInstance, Result};

#[derive(Parser)]
#[command(name = "hwqaoa", version, about = "Hamming weight operator QAOA toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Portfolio,
    Twojet,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Penalty,
    Hwo,
    Ahwo,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        weight_max: u64,
        #[arg(long, default_value_t = 3)]
        energy_levels: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the sparse operator pool of an instance as JSON.
    Pool {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Optimize one ansatz on one instance.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 17)]
        grid_points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive ground truth of an instance.
    Brute {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run a batch sweep described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ProblemInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Gen {
            kind,
            n,
            seed,
            weight_max,
            energy_levels,
            out,
        } => {
            let inst = match kind {
                KindArg::Portfolio => generate_portfolio_instance(n, seed, weight_max)?,
                KindArg::Twojet => generate_twojet_instance(n, seed, energy_levels)?,
            };
            let text = emit_instance(&inst);
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Pool { instance } => {
            let inst = load(&instance)?;
            let pool = build_sparse_pool(inst.omega(), inst.budget())?;
            let connectivity = if inst.n() <= MAX_ENUMERATION_QUBITS {
                Some(verify_connectivity(pool.ops(), inst.omega(), inst.budget(), inst.n())?)
            } else {
                None
            };
            let report = json!({
                "pool": pool,
                "connectivity": connectivity,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Run {
            instance,
            method,
            lambda,
            layers,
            seed,
            max_iters,
            tol,
            grid_points,
            out,
        } => {
            let inst = load(&instance)?;
            let defaults = OptConfig::default();
            let opt = OptConfig {
                seed,
                max_iters: max_iters.unwrap_or(defaults.max_iters),
                convergence_tol: tol.unwrap_or(defaults.convergence_tol),
                ..defaults
            };
            let method = match method {
                MethodArg::Penalty => Method::Penalty { lambda },
                MethodArg::Hwo => Method::Hwo,
                MethodArg::Ahwo => Method::Ahwo,
            };
            let result = run_method(&inst, method, layers, &opt, grid_points)?;
            fs::create_dir_all(&out)?;
            let doc = json!({
                "method": method.name(),
                "lambda": method.lambda(),
                "layers": layers,
                "gate_model": GATE_MODEL,
                "result": result,
            });
            fs::write(out.join("run.json"), serde_json::to_string_pretty(&doc)?)?;
            fs::write(out.join("trace.csv"), result.trace_csv())?;
            println!(
                "energy {:.10} hs {:.10} iterations {} gates {}",
                result.final_eval.energy,
                result.final_eval.hs_expect,
                result.iteration_count,
                result.gate_count.total
            );
        }
        Command::Brute { instance } => {
            let oracle = brute_force(&load(&instance)?)?;
            println!("{}", serde_json::to_string_pretty(&oracle)?);
        }
        Command::Experiment { config, workers, out } => {
            let mut cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(config)?)?;
            if let Some(dir) = out {
                cfg.output_dir = Some(dir);
            }
            let report = run_experiment(&cfg, workers)?;
            for f in &report.failures {
                eprintln!("failed {}: {}", f.run, f.error);
            }
            print!("{}", hwqaoa::oracle::summary_csv(&report.summary));
            return Ok(report.all_completed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
