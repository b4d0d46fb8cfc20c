//! Monte-Carlo soundness measurement and operation-count benchmarking.
//!
//! The simulator pins one polynomial, one evaluation point and one wrong
//! claim, then replays the protocol under fresh verifier coins per trial.
//! It reports the measured per-experiment and amplified acceptance rates
//! next to the analytical bound `1 - (1 - 1/c)^r` and its `m`-th power.
//! The bench harness runs honest sessions across a degree ladder and
//! reports field-operation counts per phase, which is how the complexity
//! accounts are checked without wall clocks.

use crate::count::{self, OpCount};
use crate::field::PrimeModulus;
use crate::lookup::{LookupError, LookupTable, OnDemandTable, TableSource, MAX_TABLE_ENTRIES};
use crate::params::{ParamsError, ProtocolParams};
use crate::poly::{PolyError, Polynomial, ZTable};
use crate::protocol::{
    run_session, AdversaryStrategy, CorruptionPolicy, ProtocolError, ProverSpec,
};
use crate::sample::random_element;

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("simulation needs at least one trial")]
    NoTrials,
    #[error("bench degree {d} is not a power of eta = {eta}")]
    DegreeNotPowerOfEta { d: u64, eta: u32 },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Empirical acceptance rates for one adversary against one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub strategy: String,
    pub trials: u64,
    pub per_experiment_acceptance: f64,
    pub per_experiment_sigma: f64,
    pub full_acceptance: f64,
    pub full_sigma: f64,
    /// `1 - (1 - 1/c)^r`.
    pub analytic_bound: f64,
    /// The analytic bound raised to the amplification count `m`.
    pub amplified_bound: f64,
    pub seed: u64,
}

impl SimulationReport {
    pub fn render(&self) -> String {
        format!(
            "strategy: {}\ntrials: {}\nseed: {}\n\
             per-experiment acceptance: {:.4} (sigma {:.4})\n\
             full-protocol acceptance: {:.4} (sigma {:.4})\n\
             analytic bound (per-experiment): {:.4}\n\
             amplified bound: {:.4}\n",
            self.strategy,
            self.trials,
            self.seed,
            self.per_experiment_acceptance,
            self.per_experiment_sigma,
            self.full_acceptance,
            self.full_sigma,
            self.analytic_bound,
            self.amplified_bound
        )
    }
}

/// Exact per-experiment acceptance of the corrupt-min adversary:
/// one escape node per round, `eta - 1` agreement points out of `c*eta`.
pub fn corrupt_min_per_experiment(params: &ProtocolParams) -> f64 {
    let miss = 1.0 - (params.eta() - 1) as f64 / params.c_eta() as f64;
    1.0 - miss.powi(params.r() as i32)
}

fn binomial_sigma(rate: f64, trials: u64) -> f64 {
    (rate * (1.0 - rate) / trials as f64).sqrt()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Monte-Carlo acceptance measurement: a fixed wrong claim replayed under
/// fresh challenge coins per trial. Per trial one single-experiment pass
/// feeds the per-experiment rate and one full m-experiment pass feeds the
/// amplified rate.
pub fn simulate(
    params: &ProtocolParams,
    policy: CorruptionPolicy,
    delta: u64,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed));
    let f = Polynomial::random(params.d_input() as usize, params.modulus(), &mut rng);
    let x = random_element(&mut rng, params.modulus());
    let ztable = ZTable::build(params);
    let table = LookupTable::build(&f, params, &ztable)?;
    let spec = ProverSpec::Adversary(AdversaryStrategy::WrongClaim { delta, policy });

    let mut single_accepts = 0u64;
    let mut full_accepts = 0u64;
    for t in 0..trials {
        let single_seed = splitmix64(seed ^ splitmix64(2 * t + 1));
        let run = run_session(&f, params, &table, x, spec, single_seed, 1)?;
        single_accepts += run.is_accept() as u64;

        let full_seed = splitmix64(seed ^ splitmix64(2 * t + 2));
        let run = run_session(&f, params, &table, x, spec, full_seed, params.m())?;
        full_accepts += run.is_accept() as u64;
    }

    let per_experiment_acceptance = single_accepts as f64 / trials as f64;
    let full_acceptance = full_accepts as f64 / trials as f64;
    Ok(SimulationReport {
        strategy: policy.name().to_string(),
        trials,
        per_experiment_acceptance,
        per_experiment_sigma: binomial_sigma(per_experiment_acceptance, trials),
        full_acceptance,
        full_sigma: binomial_sigma(full_acceptance, trials),
        analytic_bound: params.per_experiment_bound(),
        amplified_bound: params.amplified_bound(),
        seed,
    })
}

/// Per-phase operation counts for one degree of the bench ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchRow {
    pub d: u64,
    pub r: u32,
    pub m: u64,
    pub lambda: u128,
    /// Table-build cost; `None` when the table exceeded the storage cap
    /// and entries were recomputed on demand instead.
    pub init: Option<OpCount>,
    pub prover: OpCount,
    pub verifier: OpCount,
    pub table_fetch: OpCount,
}

impl BenchRow {
    pub fn render(&self) -> String {
        let (init_mul, init_add) = match self.init {
            Some(ops) => (ops.mul.to_string(), ops.add.to_string()),
            None => ("-".into(), "-".into()),
        };
        format!(
            "d={} r={} m={} lambda={} init_mul={} init_add={} pro_mul={} pro_add={} ver_mul={} ver_add={}",
            self.d,
            self.r,
            self.m,
            self.lambda,
            init_mul,
            init_add,
            self.prover.mul,
            self.prover.add,
            self.verifier.mul,
            self.verifier.add
        )
    }
}

/// Honest end-to-end runs across a degree ladder, counting field ops per
/// phase. Degrees must be powers of `eta` so the rounds land exactly.
pub fn bench_degrees(
    modulus: PrimeModulus,
    degrees: &[u64],
    eta: u32,
    c_eta: u32,
    seed: u64,
) -> Result<Vec<BenchRow>, SimError> {
    let mut rows = Vec::with_capacity(degrees.len());
    for (i, &d) in degrees.iter().enumerate() {
        if !is_power_of(d, eta as u64) {
            return Err(SimError::DegreeNotPowerOfEta { d, eta });
        }
        let params = ProtocolParams::derive(modulus, d, eta, c_eta)?;
        let mut rng = ChaCha12Rng::seed_from_u64(splitmix64(seed ^ i as u64));
        let f = Polynomial::random(d as usize, modulus, &mut rng);
        let x = random_element(&mut rng, modulus);
        let ztable = ZTable::build(&params);

        let (stored, init) = if params.lambda() <= MAX_TABLE_ENTRIES {
            let (table, ops) = count::measure(|| LookupTable::build(&f, &params, &ztable));
            (Some(table?), Some(ops))
        } else {
            (None, None)
        };
        let on_demand;
        let table: &dyn TableSource = match &stored {
            Some(t) => t,
            None => {
                on_demand = OnDemandTable::new(&f, &params, &ztable)?;
                &on_demand
            }
        };

        let run = run_session(&f, &params, table, x, ProverSpec::Honest, seed, params.m())?;
        debug_assert!(run.is_accept());
        rows.push(BenchRow {
            d,
            r: params.r(),
            m: params.m(),
            lambda: params.lambda(),
            init,
            prover: run.ops.prover,
            verifier: run.ops.verifier,
            table_fetch: run.ops.table,
        });
    }
    Ok(rows)
}

fn is_power_of(mut d: u64, base: u64) -> bool {
    if d == 0 {
        return false;
    }
    while d.is_multiple_of(base) {
        d /= base;
    }
    d == 1
}
