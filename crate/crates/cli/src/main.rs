//! `superres`: regenerates Fisher-information tables for two-source
//! interferometric resolution and runs the verification suite.

mod commands;
mod config;
mod error;
mod table;
mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{FileConfig, IntegrationOverrides, RangeSpec, SceneOverrides};
use crate::error::CliError;
use crate::table::Table;

#[derive(Parser, Debug)]
#[command(name = "superres", version, about = "Fisher-information limits for resolving thermal point sources with interferometer arrays")]
pub struct Cli {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for Monte-Carlo sampling
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Default, Clone)]
pub struct RangeArgs {
    /// First scan value
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    /// Last scan value
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    /// Number of scan points (>= 2)
    #[arg(long)]
    points: Option<usize>,
    /// Logarithmic spacing
    #[arg(long)]
    log: bool,
}

impl RangeArgs {
    fn spec(&self) -> RangeSpec {
        RangeSpec {
            start: self.start,
            stop: self.stop,
            points: self.points,
            log: self.log.then_some(true),
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct SceneArgs {
    /// Mean photons per source per telescope, eta * nbar
    #[arg(long)]
    strength: Option<f64>,
    /// Phase gradient k B / s0 of the reduced-unit scene
    #[arg(long)]
    u0: Option<f64>,
    /// Centroid position
    #[arg(long, allow_hyphen_values = true)]
    theta1: Option<f64>,
}

impl SceneArgs {
    fn overrides(&self) -> SceneOverrides {
        SceneOverrides {
            strength: self.strength,
            u0: self.u0,
            theta1: self.theta1,
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct QuadArgs {
    /// Amplitude cutoff b (default: from the source strength)
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    radial_nodes: Option<usize>,
    #[arg(long)]
    phase_nodes: Option<usize>,
    /// Finite-difference step in phase units
    #[arg(long)]
    fd_step: Option<f64>,
    /// Relative probability floor for Fisher sums
    #[arg(long)]
    prob_floor: Option<f64>,
    /// Skip the doubled-node convergence check
    #[arg(long)]
    no_convergence_check: bool,
}

impl QuadArgs {
    fn overrides(&self) -> IntegrationOverrides {
        IntegrationOverrides {
            cutoff: self.cutoff,
            radial_nodes: self.radial_nodes,
            phase_nodes: self.phase_nodes,
            fd_step: self.fd_step,
            prob_floor: self.prob_floor,
            no_convergence_check: self.no_convergence_check,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Separation and centroid QFI against phase difference
    QfiScan {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Comma-separated source strengths
        #[arg(long, value_delimiter = ',')]
        strengths: Option<Vec<f64>>,
    },
    /// Photon-count probabilities P(m, n) against phase difference
    PmnScan {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Misalignment c; when given, probabilities come from quadrature
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
    },
    /// Fisher information of the aligned measurement resolving m <= M, n <= N
    TruncatedFi {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Comma-separated window sizes (M = N)
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
        /// What happens to outcomes outside the window
        #[arg(long, value_enum)]
        ignored: Option<Ignored>,
    },
    /// Fisher information against the amplitude cutoff b
    CutoffScan {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Phase difference u0 * theta2
        #[arg(long)]
        dphi: Option<f64>,
    },
    /// Fisher information under centroid misalignment
    MisalignmentScan {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Quantity to sweep
        #[arg(long, value_enum)]
        axis: Option<Axis>,
        /// Fixed misalignment for a separation sweep
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Fixed phase difference for a misalignment sweep
        #[arg(long)]
        dphi: Option<f64>,
    },
    /// Optimal against fixed-delay photon counting at physical separations
    CompareConventional {
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        strength: Option<f64>,
        /// Wavelength in metres
        #[arg(long)]
        wavelength: Option<f64>,
        /// Baseline in metres
        #[arg(long)]
        baseline: Option<f64>,
        /// Mean phase (phi1 + phi2) / 2
        #[arg(long, allow_hyphen_values = true)]
        centroid_phase: Option<f64>,
        /// Comma-separated angular separations in arcseconds (overrides the range)
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        /// Comma-separated beam-splitter delays for the settings (default: the
        /// misalignments 2 pi / 3 and -pi / 3)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        delays: Option<Vec<f64>>,
    },
    /// Weak-source closed forms, or their agreement with the general results
    WeakLimit {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum)]
        table: Option<WeakTable>,
        /// Comma-separated measurement deviations
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Option<Vec<f64>>,
        /// Comma-separated strengths for the consistency table
        #[arg(long, value_delimiter = ',')]
        strengths: Option<Vec<f64>>,
    },
    /// Dirty beam of a square (u, v) coverage
    DirtyBeam {
        /// Grid points per axis
        #[arg(long)]
        grid: Option<usize>,
        /// Grid spacing in u and v
        #[arg(long)]
        spacing: Option<f64>,
        /// Half-width d of the sampled square
        #[arg(long)]
        half_width: Option<f64>,
        /// Also write the beam as a PGM image
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// QFI of source coordinates for several sources and detectors
    MultiQfi {
        /// Comma-separated selectors such as x0,x1,y0
        #[arg(long)]
        params: Option<String>,
        /// Also report centroid/separation information (two sources)
        #[arg(long)]
        centroid_separation: bool,
    },
    /// Monte-Carlo photon counts
    Sample {
        #[command(flatten)]
        scene: SceneArgs,
        /// Phase difference u0 * theta2
        #[arg(long)]
        dphi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        /// One row per sample instead of a histogram
        #[arg(long)]
        raw: bool,
    },
    /// Consistency and oracle checks across all modules
    Verify {
        /// Monte-Carlo samples per oracle check
        #[arg(long)]
        samples: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Ignored {
    Discard,
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Separation,
    Misalignment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeakTable {
    Formulas,
    Consistency,
}

fn write_table(table: &Table, format: Format, out: Option<&PathBuf>) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => table.write_json(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(verify::DEFAULT_SEED);
    let format = cli.format.unwrap_or_default();
    let (table, outcome) = commands::dispatch(&cli.command, &file, seed)?;
    write_table(&table, format, cli.out.as_ref())?;
    outcome
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("superres: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
