//! `vpe`: delegate polynomial evaluation to an untrusted prover and verify
//! the answer interactively.
//!
//! Exit codes: 0 = success/accept, 1 = reject (the protocol caught a wrong
//! result), 2 = usage or transport error (the run itself broke).

mod commands;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

use vpe_core::field::MERSENNE_61;

#[derive(Parser)]
#[command(name = "vpe", version, about = "Interactive verifiable polynomial evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded uniform-random polynomial file.
    GenPoly(GenPolyArgs),
    /// Build the params and lookup-table files for a polynomial.
    Init(InitArgs),
    /// Serve the prover side over TCP or stdio.
    Prove(ProveArgs),
    /// Run the verifier against a prover service.
    Verify(VerifyArgs),
    /// Monte-Carlo soundness measurement for an adversarial prover.
    Simulate(SimulateArgs),
    /// Field-operation benchmarks across a degree ladder.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenPolyArgs {
    /// Number of coefficients (the term count d).
    #[arg(long)]
    degree: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = MERSENNE_61)]
    modulus: u64,
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct InitArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    eta: u32,
    #[arg(long)]
    ceta: u32,
    #[arg(long)]
    out_table: String,
    #[arg(long)]
    out_params: String,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    params: String,
    /// host:port to listen on (port 0 picks a free one).
    #[arg(long, conflicts_with = "stdio")]
    listen: Option<String>,
    /// Speak the wire grammar on stdin/stdout instead.
    #[arg(long)]
    stdio: bool,
    /// Misbehave: wrong-claim | honest-then-nothing.
    #[arg(long)]
    adversary: Option<String>,
    /// Claim offset for the wrong-claim adversary.
    #[arg(long, default_value_t = 1)]
    delta: u64,
    /// Corruption policy: corrupt-min | random-consistent.
    #[arg(long, default_value = "corrupt-min")]
    policy: String,
    /// Precompute the coefficient tree instead of folding per challenge.
    #[arg(long)]
    precompute: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop after this many sessions (TCP mode only).
    #[arg(long)]
    max_sessions: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    params: String,
    #[arg(long)]
    table: String,
    /// Evaluation point; values at or above the modulus reduce with a warning.
    #[arg(long)]
    x: u64,
    #[arg(long, conflicts_with = "stdio")]
    connect: Option<String>,
    #[arg(long)]
    stdio: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the session transcript.
    #[arg(long)]
    out_transcript: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    eta: u32,
    #[arg(long)]
    ceta: u32,
    #[arg(long)]
    degree: u64,
    /// corrupt-min | random-consistent.
    #[arg(long, default_value = "corrupt-min")]
    strategy: String,
    /// At least 1000, so the reported sigma means something.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    delta: u64,
    #[arg(long, default_value_t = MERSENNE_61)]
    modulus: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated term counts, each a power of eta.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u64>,
    #[arg(long)]
    eta: u32,
    #[arg(long)]
    ceta: u32,
    #[arg(long, default_value_t = MERSENNE_61)]
    modulus: u64,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenPoly(a) => commands::gen_poly(a),
        Command::Init(a) => commands::init(a),
        Command::Prove(a) => commands::prove(a),
        Command::Verify(a) => commands::verify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bench(a) => commands::bench(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
