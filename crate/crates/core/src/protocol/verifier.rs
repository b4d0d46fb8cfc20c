//! The verifier's per-experiment state machine.

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

use crate::field::FieldElement;
use crate::lookup::TableSource;
use crate::params::ProtocolParams;
use crate::poly::{interpolate_eval, ZTable};
use crate::sample::uniform_below;

use super::ProtocolError;

/// Evaluation-point schedule for one experiment. The univariate protocol
/// folds a single point through `r` rounds; the multivariate extension
/// restarts from the next coordinate every `rounds_per_base` rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    bases: Vec<FieldElement>,
    rounds_per_base: u32,
}

impl Schedule {
    pub fn univariate(x: FieldElement, r: u32) -> Schedule {
        Schedule {
            bases: vec![x],
            rounds_per_base: r.max(1),
        }
    }

    pub fn multivariate(points: Vec<FieldElement>, r: u32) -> Schedule {
        assert!(!points.is_empty(), "schedule needs at least one point");
        Schedule {
            bases: points,
            rounds_per_base: r.max(1),
        }
    }

    pub fn bases(&self) -> &[FieldElement] {
        &self.bases
    }

    pub fn rounds_per_base(&self) -> u32 {
        self.rounds_per_base
    }

    pub fn total_rounds(&self) -> u32 {
        self.rounds_per_base * self.bases.len() as u32
    }

    pub fn first_base(&self) -> FieldElement {
        self.bases[0]
    }

    /// Later coordinates still untouched once `completed` rounds are done.
    pub fn later_bases(&self, completed: u32) -> &[FieldElement] {
        let seg = (completed / self.rounds_per_base) as usize + 1;
        &self.bases[seg.min(self.bases.len())..]
    }

    /// The weight base for the round after `completed` rounds: within a
    /// segment the point is raised to the `eta`-th power, and each segment
    /// starts over from its own coordinate.
    pub fn advance(&self, completed: u32, x_cur: FieldElement, eta: u32) -> FieldElement {
        if completed >= self.total_rounds() {
            x_cur
        } else if completed.is_multiple_of(self.rounds_per_base) {
            self.bases[(completed / self.rounds_per_base) as usize]
        } else {
            x_cur.pow(eta as u64)
        }
    }
}

/// Source of the verifier's public coins. Challenges are drawn per
/// experiment so that experiments are order-independent.
pub trait Coins {
    fn draw(&mut self, experiment: u64, bound: u32) -> u32;
}

/// Deterministic coins: one generator stream per experiment, all derived
/// from a single master seed.
pub struct SeededCoins {
    seed: u64,
    current: Option<(u64, ChaCha12Rng)>,
}

impl SeededCoins {
    pub fn new(seed: u64) -> SeededCoins {
        SeededCoins { seed, current: None }
    }
}

impl Coins for SeededCoins {
    fn draw(&mut self, experiment: u64, bound: u32) -> u32 {
        let fresh = match &self.current {
            Some((e, _)) => *e != experiment,
            None => true,
        };
        if fresh {
            let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
            rng.set_stream(experiment);
            self.current = Some((experiment, rng));
        }
        let (_, rng) = self.current.as_mut().unwrap();
        uniform_below(rng, bound as u64) as u32
    }
}

/// Fixed challenge script, for exhaustive path enumeration in tests.
pub struct ScriptedCoins {
    script: Vec<u32>,
    pos: usize,
}

impl ScriptedCoins {
    pub fn new(script: Vec<u32>) -> ScriptedCoins {
        ScriptedCoins { script, pos: 0 }
    }
}

impl Coins for ScriptedCoins {
    fn draw(&mut self, _experiment: u64, bound: u32) -> u32 {
        let b = self.script[self.pos];
        assert!(b < bound, "scripted challenge {b} out of range");
        self.pos += 1;
        b
    }
}

/// Outcome of one round check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundOutcome {
    Challenge(u32),
    Reject,
}

/// One experiment of the evaluation phase, from the claim down to the
/// table comparison. Per round the verifier does O(eta) field operations
/// and reads exactly `eta` prover values.
pub struct ExperimentVerifier<'a> {
    params: &'a ProtocolParams,
    ztable: &'a ZTable,
    schedule: &'a Schedule,
    reference: FieldElement,
    x_cur: FieldElement,
    completed: u32,
    challenges: Vec<u32>,
}

impl<'a> ExperimentVerifier<'a> {
    pub fn begin(
        params: &'a ProtocolParams,
        ztable: &'a ZTable,
        schedule: &'a Schedule,
        claim: FieldElement,
    ) -> ExperimentVerifier<'a> {
        ExperimentVerifier {
            params,
            ztable,
            schedule,
            reference: claim,
            x_cur: schedule.first_base(),
            completed: 0,
            challenges: Vec::with_capacity(schedule.total_rounds() as usize),
        }
    }

    /// Current reference value `f_hat^{(b_1..b_l)}(x^{(l)})`.
    pub fn reference(&self) -> FieldElement {
        self.reference
    }

    pub fn challenges(&self) -> &[u32] {
        &self.challenges
    }

    pub fn rounds_completed(&self) -> u32 {
        self.completed
    }

    /// Checks `sum_s x^s * values[s]` against the reference; on success
    /// draws the next challenge and re-anchors the reference by
    /// interpolation.
    pub fn check_round(
        &mut self,
        values: &[FieldElement],
        draw: &mut dyn FnMut(u32) -> u32,
    ) -> Result<RoundOutcome, ProtocolError> {
        if self.completed >= self.schedule.total_rounds() {
            return Err(ProtocolError::PastFinalRound);
        }
        let eta = self.params.eta() as usize;
        if values.len() != eta {
            return Err(ProtocolError::WrongValueCount {
                expected: eta,
                got: values.len(),
            });
        }
        let mut weight = self.params.modulus().one();
        let mut sum = values[0];
        for &v in &values[1..] {
            weight = weight * self.x_cur;
            sum = sum + v * weight;
        }
        if sum != self.reference {
            return Ok(RoundOutcome::Reject);
        }
        let b = draw(self.params.c_eta());
        debug_assert!(b < self.params.c_eta());
        self.reference = interpolate_eval(values, b, self.ztable)?;
        self.challenges.push(b);
        self.completed += 1;
        self.x_cur = self.schedule.advance(self.completed, self.x_cur, self.params.eta());
        Ok(RoundOutcome::Challenge(b))
    }

    /// The last check: the surviving constant against the lookup table.
    pub fn finalize(&self, table: &dyn TableSource) -> Result<bool, ProtocolError> {
        if self.completed != self.schedule.total_rounds() {
            return Err(ProtocolError::FinalizeTooEarly {
                completed: self.completed,
                total: self.schedule.total_rounds(),
            });
        }
        if table.digest() != self.params.digest() {
            return Err(ProtocolError::DigestMismatch);
        }
        let entry = table.entry(&self.challenges)?;
        Ok(entry == self.reference)
    }
}
