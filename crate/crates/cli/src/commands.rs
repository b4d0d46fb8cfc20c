use std::fs;
use std::io::Write as _;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use rand_chacha::ChaCha12Rng;
use rand_core::{OsRng, RngCore, SeedableRng};

use vpe_core::count;
use vpe_core::field::PrimeModulus;
use vpe_core::lookup::LookupTable;
use vpe_core::params::ProtocolParams;
use vpe_core::poly::{Polynomial, ZTable};
use vpe_core::protocol::{AdversaryStrategy, CorruptionPolicy, ProtocolRun, ProverSpec, Verdict};
use vpe_core::sim;
use vpe_wire::{
    connect_verifier, run_verifier_session, serve_session, stdio_transport, ProverConfig,
    ProverServer,
};

use crate::{BenchArgs, GenPolyArgs, InitArgs, ProveArgs, SimulateArgs, VerifyArgs};

/// `--seed` wins, then `VPE_SEED`, then OS entropy.
fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var("VPE_SEED") {
        return raw
            .parse()
            .with_context(|| format!("VPE_SEED is not an integer: {raw:?}"));
    }
    Ok(OsRng.next_u64())
}

fn read_poly(path: &str) -> anyhow::Result<Polynomial> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    Polynomial::parse(&text).with_context(|| format!("parsing {path}"))
}

fn read_params(path: &str) -> anyhow::Result<ProtocolParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    ProtocolParams::parse(&text).with_context(|| format!("parsing {path}"))
}

fn read_table(path: &str) -> anyhow::Result<LookupTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    LookupTable::parse(&text).with_context(|| format!("parsing {path}"))
}

fn parse_policy(name: &str) -> anyhow::Result<CorruptionPolicy> {
    match name {
        "corrupt-min" => Ok(CorruptionPolicy::CorruptMin),
        "random-consistent" => Ok(CorruptionPolicy::RandomConsistent),
        other => bail!("unknown policy {other:?} (corrupt-min | random-consistent)"),
    }
}

pub fn gen_poly(args: GenPolyArgs) -> anyhow::Result<ExitCode> {
    if args.degree == 0 {
        bail!("--degree must be at least 1");
    }
    let modulus = PrimeModulus::new(args.modulus)?;
    let seed = resolve_seed(args.seed)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let f = Polynomial::random(args.degree as usize, modulus, &mut rng);
    fs::write(&args.out, f.render()).with_context(|| format!("writing {}", args.out))?;
    println!("wrote {} ({} coefficients, modulus {}, seed {})", args.out, args.degree, modulus, seed);
    Ok(ExitCode::SUCCESS)
}

pub fn init(args: InitArgs) -> anyhow::Result<ExitCode> {
    let f = read_poly(&args.poly)?;
    let params = ProtocolParams::derive(f.modulus(), f.len() as u64, args.eta, args.ceta)?;
    let ztable = ZTable::build(&params);
    let (table, ops) = count::measure(|| LookupTable::build(&f, &params, &ztable));
    let table = table?;
    fs::write(&args.out_params, params.render())
        .with_context(|| format!("writing {}", args.out_params))?;
    fs::write(&args.out_table, table.render())
        .with_context(|| format!("writing {}", args.out_table))?;
    println!("params: {}", args.out_params);
    println!("table: {}", args.out_table);
    println!("lambda: {}", params.lambda());
    println!("init ops: mul={} add={}", ops.mul, ops.add);
    Ok(ExitCode::SUCCESS)
}

fn parse_spec(args: &ProveArgs) -> anyhow::Result<ProverSpec> {
    match args.adversary.as_deref() {
        None => Ok(if args.precompute {
            ProverSpec::HonestWithTree
        } else {
            ProverSpec::Honest
        }),
        Some("wrong-claim") => Ok(ProverSpec::Adversary(AdversaryStrategy::WrongClaim {
            delta: args.delta,
            policy: parse_policy(&args.policy)?,
        })),
        Some("honest-then-nothing") => {
            Ok(ProverSpec::Adversary(AdversaryStrategy::HonestThenNothing))
        }
        Some(other) => bail!("unknown adversary {other:?} (wrong-claim | honest-then-nothing)"),
    }
}

pub fn prove(args: ProveArgs) -> anyhow::Result<ExitCode> {
    let f = read_poly(&args.poly)?;
    let params = read_params(&args.params)?;
    if f.modulus() != params.modulus() || f.len() as u64 != params.d_input() {
        bail!(
            "polynomial ({} coefficients mod {}) does not match params (d={} mod {})",
            f.len(),
            f.modulus(),
            params.d_input(),
            params.modulus()
        );
    }
    let spec = parse_spec(&args)?;
    let seed = resolve_seed(args.seed)?;
    let cfg = ProverConfig { f, params, spec, seed };

    if args.stdio {
        let mut transport = stdio_transport();
        if let Err(e) = serve_session(&mut transport, &cfg) {
            eprintln!("session ended: {e}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let addr = args
        .listen
        .as_deref()
        .context("one of --listen or --stdio is required")?;
    let server = ProverServer::bind(addr, cfg).with_context(|| format!("binding {addr}"))?;
    println!("LISTENING {}", server.local_addr()?);
    std::io::stdout().flush().ok();
    server.serve(args.max_sessions)?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let params = read_params(&args.params)?;
    let table = read_table(&args.table)?;
    if args.x >= params.modulus().value() {
        eprintln!(
            "warning: x = {} is not canonical, reducing to {} (mod {})",
            args.x,
            args.x % params.modulus().value(),
            params.modulus()
        );
    }
    let x = params.modulus().element(args.x);
    let seed = resolve_seed(args.seed)?;

    let run: ProtocolRun = if args.stdio {
        let mut transport = stdio_transport();
        run_verifier_session(&mut transport, &params, &table, x, seed)?
    } else {
        let addr = args
            .connect
            .as_deref()
            .context("one of --connect or --stdio is required")?;
        connect_verifier(addr, &params, &table, x, seed, Some(Duration::from_secs(30)))?
    };

    // In stdio mode stdout belongs to the wire grammar.
    let mut report: Box<dyn std::io::Write> = if args.stdio {
        Box::new(std::io::stderr())
    } else {
        Box::new(std::io::stdout())
    };
    match run.verdict {
        Verdict::Accept => {
            writeln!(report, "verdict: accept")?;
            let claim = run.transcript.claim().expect("accepted runs carry a claim");
            writeln!(report, "value: {claim}")?;
        }
        Verdict::Reject(_) => {
            writeln!(report, "verdict: {}", run.verdict)?;
        }
    }
    if let Some(path) = &args.out_transcript {
        fs::write(path, run.transcript.render()).with_context(|| format!("writing {path}"))?;
        writeln!(report, "transcript: {path}")?;
    }
    Ok(if run.verdict.is_accept() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    if args.trials < 1000 {
        bail!("--trials must be at least 1000 for the sigma estimate to mean anything");
    }
    let modulus = PrimeModulus::new(args.modulus)?;
    let params = ProtocolParams::derive(modulus, args.degree, args.eta, args.ceta)?;
    let policy = parse_policy(&args.strategy)?;
    let seed = resolve_seed(args.seed)?;
    let report = sim::simulate(&params, policy, args.delta, args.trials, seed)?;
    print!("{}", report.render());
    Ok(ExitCode::SUCCESS)
}

pub fn bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let modulus = PrimeModulus::new(args.modulus)?;
    let seed = resolve_seed(args.seed)?;
    let rows = sim::bench_degrees(modulus, &args.degrees, args.eta, args.ceta, seed)?;
    let mut prev: Option<&sim::BenchRow> = None;
    for row in &rows {
        println!("{}", row.render());
        if let Some(p) = prev {
            let ratio = |a: u64, b: u64| {
                if b == 0 {
                    "-".to_string()
                } else {
                    format!("{:.2}", a as f64 / b as f64)
                }
            };
            let init = match (row.init, p.init) {
                (Some(a), Some(b)) => ratio(a.mul, b.mul),
                _ => "-".to_string(),
            };
            println!(
                "ratio d={}/d={}: init={} prover={} verifier={}",
                row.d,
                p.d,
                init,
                ratio(row.prover.mul, p.prover.mul),
                ratio(row.verifier.mul, p.verifier.mul)
            );
        }
        prev = Some(row);
    }
    Ok(ExitCode::SUCCESS)
}
