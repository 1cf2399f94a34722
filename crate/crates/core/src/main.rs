use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use unruh_gauss::cli::{
    self, figure2_csv, format_float, render_csv, render_svg, sweep_csv, verify_grid, SweepSpec,
    COV_TOL, EN_TOL,
};
use unruh_gauss::fock::DEFAULT_CUTOFF;
use unruh_gauss::{Error, Partition, ScenarioParams};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Entanglement of a two-mode squeezed vacuum seen by an inertial and a
/// uniformly accelerated observer.
#[derive(Parser)]
#[command(name = "unruh-gauss", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate all three bipartitions at one (s, r) point.
    Point {
        /// Initial squeezing.
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        /// Acceleration parameter.
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        /// Print rows in the sweep CSV format instead of a table.
        #[arg(long)]
        csv: bool,
    },
    /// Sweep r for several s values and write a CSV file.
    Sweep {
        /// Comma-separated s values.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        s: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        r_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        r_max: f64,
        #[arg(long, allow_negative_numbers = true)]
        r_step: f64,
        /// Subset of A-I,A-II,I-II (default: all three).
        #[arg(long, value_delimiter = ',', value_parser = parse_partition)]
        partitions: Vec<Partition>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the Gaussian results against the truncated Fock-space oracle.
    Verify {
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        s_max: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        r_max: f64,
        /// Fock levels per mode.
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// Write the built-in E_N(A|I) versus r curves.
    Figure2 {
        #[arg(long)]
        out: PathBuf,
        /// Also render a simple SVG plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn parse_partition(s: &str) -> Result<Partition, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Io(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Point { s, r, csv } => {
            let params = ScenarioParams::new(s, r)?;
            let (rows, global) = cli::evaluate_point(&params, &Partition::all_pairs())?;
            if csv {
                let comments = vec![
                    cli::CONVENTIONS.to_string(),
                    format!("global purity = {}", format_float(global)),
                ];
                print!("{}", render_csv(&comments, &rows));
            } else {
                println!("s = {s}, r = {r}  (hbar = 1, vacuum variance 1/2, natural log)");
                println!(
                    "{:<10} {:>24} {:>24} {:>10} {:>24}",
                    "partition", "lambda_min", "e_n", "separable", "purity"
                );
                for row in &rows {
                    println!(
                        "{:<10} {:>24} {:>24} {:>10} {:>24}",
                        row.partition.to_string(),
                        format_float(row.lambda_min),
                        format_float(row.e_n),
                        row.separable,
                        format_float(row.purity_marginal)
                    );
                }
                println!("global purity: {}", format_float(global));
            }
        }
        Command::Sweep {
            s,
            r_min,
            r_max,
            r_step,
            partitions,
            out,
        } => {
            let spec = SweepSpec::new(s, r_min, r_max, r_step, partitions)?;
            write_file(&out, &sweep_csv(&spec)?)?;
        }
        Command::Verify {
            s_max,
            r_max,
            cutoff,
        } => {
            let report = verify_grid(s_max, r_max, cutoff)?;
            println!("cutoff d = {}", report.cutoff);
            println!(
                "{:>8} {:>8} {:>14} {:>14}  status",
                "s", "r", "max |dV|", "max |dE_N|"
            );
            for p in &report.points {
                println!(
                    "{:>8} {:>8} {:>14.3e} {:>14.3e}  {}",
                    p.s,
                    p.r,
                    p.max_cov_dev,
                    p.max_en_dev,
                    if p.passed() { "ok" } else { "FAIL" }
                );
            }
            if let Some(w) = report.worst_failure() {
                return Err(Failure::Verify(format!(
                    "verification failed at s = {}, r = {}: covariance entry ({}) off by {:e} \
                     (tol {COV_TOL:e}), E_N on {} off by {:e} (tol {EN_TOL:e})",
                    w.s, w.r, w.worst_entry, w.max_cov_dev, w.worst_partition, w.max_en_dev
                )));
            }
            println!("all points within tolerance (covariance {COV_TOL:e}, E_N {EN_TOL:e})");
        }
        Command::Figure2 { out, svg } => {
            let (csv, rows) = figure2_csv()?;
            write_file(&out, &csv)?;
            if let Some(path) = svg {
                write_file(&path, &render_svg(&rows))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
    }
}
