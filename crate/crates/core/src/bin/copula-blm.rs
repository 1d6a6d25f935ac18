use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use copula_blm::copula::sample;
use copula_blm::dependence::{pseudo_observations, Direction};
use copula_blm::estimators::{estimate, Method, Status};
use copula_blm::harness::{
    render_report, render_study, run_bias_rmse_experiment, run_contamination_study, table_protocol,
    ExperimentConfig, ReportFormat, Scale, TableProtocol,
};
use copula_blm::io::{read_pairs_csv, write_pairs_csv};
use copula_blm::{CopulaModel, Error, Family};

const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "copula-blm",
    version,
    about = "Copula L-moment estimation and Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from a copula and write it as CSV.
    Simulate {
        #[arg(long)]
        family: Family,
        /// Comma-separated parameters (empty for the product copula).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate copula parameters from a two-column CSV file.
    Estimate {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value = "blm")]
        method: Method,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "12")]
        direction: Direction,
    },
    /// Run a bias/RMSE experiment described by a key = value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
    },
    /// Run the simulation protocol of table 3 to 9.
    Tables {
        #[arg(long)]
        table: u8,
        #[arg(long, default_value = "desk")]
        scale: Scale,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Numeric(_) | Error::Bracketing(_) | Error::Quadrature(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_CONFIG,
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> copula_blm::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> copula_blm::Result<u8> {
    match cli.command {
        Command::Simulate {
            family,
            params,
            n,
            seed,
            out,
        } => {
            let model = CopulaModel::new(family, &params)?;
            let pairs = sample(&model, n, seed)?;
            write_pairs_csv(&out, &pairs)?;
            Ok(0)
        }
        Command::Estimate {
            family,
            method,
            data,
            direction,
        } => {
            let ps = pseudo_observations(&read_pairs_csv(&data)?)?;
            let r = estimate(&ps, family, method, direction)?;
            let values: Vec<String> = r.estimate.iter().map(|x| format!("{x:.6}")).collect();
            println!("family: {}", r.family);
            println!("method: {}", r.method);
            println!("n: {}", ps.n());
            println!("estimate: {}", values.join(","));
            println!("status: {:?}", r.status);
            if let Some(res) = r.residual {
                println!("residual: {res:.3e}");
            }
            if let Some(obj) = r.objective_value {
                println!("objective: {obj:.6e}");
            }
            println!("iterations: {}", r.iterations);
            println!("seconds: {:.4}", r.wall_time);
            Ok(if r.status == Status::NotConverged {
                EXIT_NOT_CONVERGED
            } else {
                0
            })
        }
        Command::Experiment {
            config,
            out,
            format,
        } => {
            let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&config)?)?;
            let report = run_bias_rmse_experiment(&cfg)?;
            emit(&render_report(&report, format), out.as_ref())?;
            Ok(0)
        }
        Command::Tables {
            table,
            scale,
            seed,
            out,
            format,
        } => {
            let text = match table_protocol(table, scale, seed)? {
                TableProtocol::Comparison(cfg) => {
                    render_report(&run_bias_rmse_experiment(&cfg)?, format)
                }
                TableProtocol::Contamination(cfg, levels) => {
                    render_study(&run_contamination_study(&cfg, &levels)?, format)
                }
            };
            emit(&text, out.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
