use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use dfock::commands::{self, DemodRequest, TeleportRequest};
use dfock::figures::{self, FigureId, FigureParams};
use dfock::table::{self, write_csv};
use dfock::{cutoff_floor, exit_code, CUTOFF_ENV};
use dfock_core::demod::{AmBranch, Strategy};
use dfock_core::protocol::DEFAULT_M_MAX;
use dfock_core::C64;

/// Hybrid discrete/continuous-variable teleportation simulator.
#[derive(Parser)]
#[command(name = "dfock", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of raw displaced-number-state coefficients `c_ln(alpha)`.
    MatrixElements {
        #[arg(long)]
        alpha: f64,
        /// Imaginary part of alpha.
        #[arg(long, default_value_t = 0.0)]
        alpha_im: f64,
        #[arg(long, default_value_t = 10)]
        lmax: usize,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curve data for one figure panel as `a1,curve,value`.
    Figure {
        /// Panel: 2a-2d, 3a-3d, 4a, 4b, 5a or 5b.
        id: FigureId,
        /// Replaces the panel's alpha (a single curve for 4x and 5x).
        #[arg(long)]
        alpha: Option<f64>,
        /// Channel amplitude for the even-difference panel.
        #[arg(long, default_value_t = figures::DEFAULT_FIGURE_BETA)]
        beta: f64,
        #[arg(long, default_value_t = figures::DEFAULT_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Outcome table of one teleportation run.
    Teleport {
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        a0: f64,
        #[arg(long)]
        a1: f64,
        /// Phase of a1 in radians.
        #[arg(long, default_value_t = 0.0)]
        a1_phase: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        /// Transmittance of a real splitter; adds a finite_fidelity column.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        m_max: usize,
        /// Truncation floor (overrides DFOCK_DEFAULT_CUTOFF).
        #[arg(long)]
        cutoff: Option<usize>,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Demodulated success probabilities as `alpha,a1,value,formula_id`.
    Demod {
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long, value_enum)]
        branch: BranchArg,
        /// One or more alphas, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = figures::DEFAULT_POINTS)]
        points: usize,
        /// Also credit the m = 2 outcome.
        #[arg(long)]
        higher_order: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy of the dual rail in the channel state, in bits.
    ChannelEntropy {
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.4,0.8,1.2,1.6,2.0")]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Truncation floor (overrides DFOCK_DEFAULT_CUTOFF).
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Coherent,
    Swap,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    K,
    N,
}

fn run(cli: Cli) -> Result<()> {
    let env = std::env::var(CUTOFF_ENV).ok();
    match cli.command {
        Command::MatrixElements { alpha, alpha_im, lmax, nmax, out } => {
            let rows = commands::matrix_elements(C64::new(alpha, alpha_im), lmax, nmax);
            write_csv(out.as_deref(), &table::MATRIX_HEADER, &table::matrix_rows(&rows))
        }
        Command::Figure { id, alpha, beta, points, out } => {
            let pts = figures::figure_points(id, &FigureParams { alpha, beta, points })?;
            write_csv(out.as_deref(), &table::CURVE_HEADER, &table::curve_rows(&pts))
        }
        Command::Teleport { k, n, a0, a1, a1_phase, alpha, beta, t, m_max, cutoff, out } => {
            let req = TeleportRequest {
                k,
                n,
                a0: C64::new(a0, 0.0),
                a1: C64::from_polar(a1, a1_phase),
                alpha,
                beta,
                t,
                floor: cutoff_floor(cutoff, env.as_deref())?,
                m_max,
            };
            let rep = commands::teleport(&req)?;
            if let Some(w) = &rep.warning {
                eprintln!("{w}");
            }
            print!("{}", rep.text);
            match out {
                Some(path) => write_csv(Some(&path), &rep.header, &rep.rows),
                None => Ok(()),
            }
        }
        Command::Demod { strategy, branch, alpha, points, higher_order, out } => {
            let req = DemodRequest {
                strategy: match strategy {
                    StrategyArg::Coherent => Strategy::Coherent,
                    StrategyArg::Swap => Strategy::Swap,
                },
                branch: match branch {
                    BranchArg::K => AmBranch::K,
                    BranchArg::N => AmBranch::N,
                },
                alphas: &alpha,
                points,
                higher_order,
            };
            write_csv(out.as_deref(), &commands::DEMOD_HEADER, &commands::demod_rows(&req)?)
        }
        Command::ChannelEntropy { beta, phi, cutoff, out } => {
            let rows = commands::channel_entropy(&beta, phi, cutoff_floor(cutoff, env.as_deref())?)?;
            write_csv(out.as_deref(), &commands::ENTROPY_HEADER, &rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
