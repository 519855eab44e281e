//! `globaldrive`: design pulses, compile circuits, simulate and verify
//! schedules, sample shots, draw layouts and time the engines.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use globaldrive::compiler::CompileMode;
use globaldrive::designer::{DEFAULT_SEED, DEFAULT_STARTS, DESIGN_TOLERANCE};
use globaldrive::engine::EngineChoice;
use globaldrive::lattice::DEFAULT_SUPERATOM_SIZE;
use globaldrive::verify::{DECODE_TOLERANCE, VERIFY_TOLERANCE};
use globaldrive::Mode;

#[derive(Parser, Debug)]
#[command(name = "globaldrive", version, about)]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design and certify the composite pulses, updating the design cache.
    DesignPulses(DesignPulsesArgs),
    /// Compile a circuit JSON file into an arrangement and a pulse schedule.
    Compile(CompileArgs),
    /// Run a schedule and dump the final state.
    Simulate(RunArgs),
    /// Run a schedule and compare with the reference simulation.
    Verify(VerifyArgs),
    /// Run a schedule and sample computational-basis shots.
    Sample(RunArgs),
    /// Draw an arrangement as SVG.
    EmitLayout(EmitLayoutArgs),
    /// Time the engines against wire length.
    Bench(bench::BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DesignArgs {
    /// Design cache file.
    #[arg(long, env = "GLOBALDRIVE_CACHE")]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SUPERATOM_SIZE)]
    pub superatom_size: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub design_seed: u64,
    /// Random starts per pulse budget.
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    pub starts: usize,
    /// Residual below which a design is accepted.
    #[arg(long, default_value_t = DESIGN_TOLERANCE)]
    pub design_tolerance: f64,
}

#[derive(Args, Debug)]
pub struct DesignPulsesArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Re-optimize even when the cache already holds a solution.
    #[arg(long)]
    pub force: bool,
    /// Residual bound for the replayed certificates.
    #[arg(long, default_value_t = globaldrive::designer::CERTIFICATE_TOLERANCE)]
    pub certificate_tolerance: f64,
    /// Certificate report (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Dependent,
    Universal,
}

impl From<ModeArg> for CompileMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dependent => CompileMode::Dependent,
            ModeArg::Universal => CompileMode::Universal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EngineArg {
    Auto,
    Dense,
    Factorized,
    Blockwise,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Auto => EngineChoice::Auto,
            EngineArg::Dense => EngineChoice::Dense,
            EngineArg::Factorized => EngineChoice::Factorized,
            EngineArg::Blockwise => EngineChoice::Blockwise,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RepresentationArg {
    /// Superatoms as enhanced two-level units.
    Unit,
    /// Superatoms as explicit atom cliques.
    Physical,
}

impl From<RepresentationArg> for Mode {
    fn from(r: RepresentationArg) -> Self {
        match r {
            RepresentationArg::Unit => Mode::Unit,
            RepresentationArg::Physical => Mode::Physical,
        }
    }
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// Circuit JSON file.
    pub circuit: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Dependent)]
    pub mode: ModeArg,
    /// Directory receiving arrangement.json and schedule.json.
    #[arg(long, short, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub design: DesignArgs,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub arrangement: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
    #[arg(long, value_enum, default_value_t = RepresentationArg::Unit)]
    pub representation: RepresentationArg,
    /// Shots to sample; 0 dumps the state only.
    #[arg(long, default_value_t = 0)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest weight outside the code space accepted when decoding.
    #[arg(long, default_value_t = DECODE_TOLERANCE)]
    pub decode_tolerance: f64,
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Accepted infidelity against the reference.
    #[arg(long, default_value_t = VERIFY_TOLERANCE)]
    pub tolerance: f64,
    /// Keep the wall time in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct EmitLayoutArgs {
    /// Arrangement JSON file.
    #[arg(required_unless_present = "universal", conflicts_with = "universal")]
    pub arrangement: Option<PathBuf>,
    /// Draw the universal layout for this many qubits instead.
    #[arg(long)]
    pub universal: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SUPERATOM_SIZE)]
    pub superatom_size: usize,
    /// Draw blockade edges.
    #[arg(long)]
    pub edges: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// A run that completed but did not meet its tolerance.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

/// 1 for failed verification, 2 for anything wrong with the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    use globaldrive::Error as E;
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::DecodeFailure { .. }
            | E::NoSolutionFound { .. }
            | E::CertificateMismatch { .. }
            | E::NonUnitaryChannel { .. }
            | E::NonSymmetricLeakage { .. },
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::DesignPulses(a) => commands::design_pulses(&a),
        Command::Compile(a) => commands::compile(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::EmitLayout(a) => commands::emit_layout(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
