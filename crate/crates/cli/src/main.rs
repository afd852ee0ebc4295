use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod svg;

/// Entanglement decay statistics under local noisy channels.
#[derive(Debug, Parser)]
#[command(name = "entdecay", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Worker threads for Monte Carlo jobs.
    #[arg(long, global = true, env = "ENTDECAY_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Use 10⁶ samples instead of 10⁵ when --n is not given.
    #[arg(long, global = true)]
    pub full: bool,
    /// Output file (stdout when omitted).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write an SVG chart next to --out.
    #[arg(long, global = true)]
    pub plot: bool,
}

impl GlobalOpts {
    pub fn sample_count(&self, n: Option<usize>) -> usize {
        n.unwrap_or(if self.full { 1_000_000 } else { 100_000 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Haar,
    Hs,
    Bures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Both,
    First,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw random states and print their concurrence and purity.
    Sample(SampleArgs),
    /// Follow one pure state through a q-grid.
    Evolve(EvolveArgs),
    /// Analytic and empirical densities side by side.
    #[command(subcommand)]
    Density(DensityCommand),
    /// Mean, spread and separable fraction of the evolved concurrence.
    Stats(StatsArgs),
    /// Tabulate a time profile q(t).
    Profile(ProfileArgs),
    /// Sudden death and birth times of a state under a time profile.
    Events(EventsArgs),
    /// Reproduce one of the reference figures as CSV and SVG.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum, default_value_t = MeasureArg::Haar)]
    pub measure: MeasureArg,
    /// Sample count (default 10⁵, or 10⁶ with --full).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Four amplitudes ψ00,ψ01,ψ10,ψ11 (complex as 0.5+0.1i); normalised.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub psi: Vec<String>,
    #[arg(long)]
    pub kind: String,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    pub side: SideArg,
    /// Explicit q values; overrides --points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    /// Points of the uniform q-grid on [0, 1].
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Debug, Subcommand)]
pub enum DensityCommand {
    /// ESD-time density p(q_S).
    Esd(DensityEsdArgs),
    /// Concurrence density p(C; q).
    Conc(DensityConcArgs),
}

#[derive(Debug, Args)]
pub struct DensityEsdArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    pub side: SideArg,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 200)]
    pub bins: usize,
    /// Bisection tolerance of the numeric ESD search (mixed states).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DensityConcArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    pub side: SideArg,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileName {
    Markov,
    Nonautonomous,
    Pseudomode,
    Ohmic,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Single,
    Squared,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileSpec {
    /// Profile family.
    #[arg(long = "kind", value_enum)]
    pub name: ProfileName,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_env: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 4.0)]
    pub gamma0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.5)]
    pub coupling: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Single)]
    pub kernel: KernelArg,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub spec: ProfileSpec,
}

#[derive(Debug, Args)]
pub struct EventsArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub psi: Vec<String>,
    /// Channel kind (D, AD, PD).
    #[arg(long)]
    pub channel: String,
    #[command(flatten)]
    pub spec: ProfileSpec,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure number, 1 to 5.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
    pub number: u8,
    /// Directory for figN.csv and figN.svg.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub n: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code.clamp(0, 255) as u8);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entdecay: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
