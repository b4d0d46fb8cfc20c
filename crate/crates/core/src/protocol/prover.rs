//! Prover sessions: the honest prover, the wrong-claim adversary and the
//! prover that goes silent after its claim.

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

use crate::field::FieldElement;
use crate::lookup::CoefficientTree;
use crate::params::ProtocolParams;
use crate::poly::{fold_slice, interpolate_eval, Polynomial, ZTable};
use crate::sample::random_element;

use super::verifier::Schedule;
use super::ProtocolError;

/// One prover's side of a full m-experiment session, driven by the
/// verifier: the claim is fetched once, then per experiment the verifier
/// alternates `round_values` and `accept_challenge` calls.
pub trait ProverSession {
    fn claim(&mut self) -> Result<FieldElement, ProtocolError>;
    fn begin_experiment(&mut self) -> Result<(), ProtocolError>;
    fn round_values(&mut self) -> Result<Vec<FieldElement>, ProtocolError>;
    fn accept_challenge(&mut self, b: u32) -> Result<(), ProtocolError>;
}

impl ProverSession for Box<dyn ProverSession + Send> {
    fn claim(&mut self) -> Result<FieldElement, ProtocolError> {
        (**self).claim()
    }
    fn begin_experiment(&mut self) -> Result<(), ProtocolError> {
        (**self).begin_experiment()
    }
    fn round_values(&mut self) -> Result<Vec<FieldElement>, ProtocolError> {
        (**self).round_values()
    }
    fn accept_challenge(&mut self, b: u32) -> Result<(), ProtocolError> {
        (**self).accept_challenge(b)
    }
}

/// Evaluates a flat coefficient array in which the first axis (fastest
/// varying) sits at `x_first` and each later axis has width `later_width`
/// and its own point. With no later axes this is plain Horner.
pub(crate) fn eval_mixed(
    coeffs: &[FieldElement],
    x_first: FieldElement,
    later_width: usize,
    later: &[FieldElement],
) -> FieldElement {
    match later.split_last() {
        None => horner(coeffs, x_first),
        Some((&x_last, rest)) => {
            let block = coeffs.len() / later_width;
            let mut chunks = coeffs.chunks_exact(block).rev();
            let mut acc = eval_mixed(chunks.next().expect("nonempty"), x_first, later_width, rest);
            for chunk in chunks {
                acc = acc * x_last + eval_mixed(chunk, x_first, later_width, rest);
            }
            acc
        }
    }
}

fn horner(coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    let mut rev = coeffs.iter().rev();
    let mut acc = *rev.next().expect("nonempty");
    for &c in rev {
        acc = acc * x + c;
    }
    acc
}

/// The honest prover. By default it folds its current coefficients at each
/// challenge; with a precomputed [`CoefficientTree`] both the round values
/// and the folds become table reads.
#[derive(Debug)]
pub struct HonestProver {
    eta: u32,
    c_eta: u32,
    ztable: ZTable,
    schedule: Schedule,
    later_width: usize,
    base: Vec<FieldElement>,
    claim: FieldElement,
    tree: Option<CoefficientTree>,
    current: Vec<FieldElement>,
    path: Vec<u32>,
    x_cur: FieldElement,
    completed: u32,
}

impl HonestProver {
    pub fn new(
        f: &Polynomial,
        params: &ProtocolParams,
        schedule: Schedule,
    ) -> Result<HonestProver, ProtocolError> {
        Self::build(f, params, schedule, false)
    }

    /// Precomputes every fold outcome up front, trading
    /// `O(c^r * d * eta / (c-1))` storage for read-only rounds.
    pub fn with_tree(
        f: &Polynomial,
        params: &ProtocolParams,
        schedule: Schedule,
    ) -> Result<HonestProver, ProtocolError> {
        Self::build(f, params, schedule, true)
    }

    fn build(
        f: &Polynomial,
        params: &ProtocolParams,
        schedule: Schedule,
        precompute: bool,
    ) -> Result<HonestProver, ProtocolError> {
        if f.modulus() != params.modulus() {
            return Err(ProtocolError::ParamsMismatch(format!(
                "polynomial modulus {} vs params modulus {}",
                f.modulus(),
                params.modulus()
            )));
        }
        if schedule.total_rounds() != params.r() {
            return Err(ProtocolError::ParamsMismatch(format!(
                "schedule has {} rounds but params require r = {}",
                schedule.total_rounds(),
                params.r()
            )));
        }
        let ztable = ZTable::build(params);
        let padded = f
            .padded_to(params.d_pad() as usize)
            .map_err(|e| ProtocolError::ParamsMismatch(e.to_string()))?;
        let base = padded.coeffs().to_vec();
        let later_width = (params.eta() as usize).pow(schedule.rounds_per_base());
        let claim = eval_mixed(
            &base,
            schedule.first_base(),
            later_width,
            schedule.later_bases(0),
        );
        let tree = if precompute {
            Some(CoefficientTree::build(&padded, params, &ztable)?)
        } else {
            None
        };
        let x_cur = schedule.first_base();
        Ok(HonestProver {
            eta: params.eta(),
            c_eta: params.c_eta(),
            ztable,
            schedule,
            later_width,
            current: base.clone(),
            base,
            claim,
            tree,
            path: Vec::new(),
            x_cur,
            completed: 0,
        })
    }

    pub(crate) fn x_cur(&self) -> FieldElement {
        self.x_cur
    }

    pub(crate) fn ztable(&self) -> &ZTable {
        &self.ztable
    }

    #[cfg(test)]
    pub(crate) fn current_coeffs(&self) -> &[FieldElement] {
        match &self.tree {
            Some(tree) => tree.node(&self.path).expect("path in range"),
            None => &self.current,
        }
    }
}

impl ProverSession for HonestProver {
    fn claim(&mut self) -> Result<FieldElement, ProtocolError> {
        Ok(self.claim)
    }

    fn begin_experiment(&mut self) -> Result<(), ProtocolError> {
        if self.tree.is_none() {
            self.current = self.base.clone();
        }
        self.path.clear();
        self.x_cur = self.schedule.first_base();
        self.completed = 0;
        Ok(())
    }

    /// Stripe `s` of the current polynomial evaluated one power up, for
    /// each `s`; the tree variant reads child nodes instead of striping.
    fn round_values(&mut self) -> Result<Vec<FieldElement>, ProtocolError> {
        if self.completed >= self.schedule.total_rounds() {
            return Err(ProtocolError::PastFinalRound);
        }
        let x_next = self.x_cur.pow(self.eta as u64);
        let later = self.schedule.later_bases(self.completed);
        let eta = self.eta as usize;
        let mut values = Vec::with_capacity(eta);
        match &self.tree {
            Some(tree) => {
                for s in 0..self.eta {
                    self.path.push(s);
                    let stripe = tree.node(&self.path).expect("path in range");
                    self.path.pop();
                    values.push(eval_mixed(stripe, x_next, self.later_width, later));
                }
            }
            None => {
                let mut stripe = Vec::with_capacity(self.current.len() / eta);
                for s in 0..eta {
                    stripe.clear();
                    stripe.extend(self.current[s..].iter().step_by(eta));
                    values.push(eval_mixed(&stripe, x_next, self.later_width, later));
                }
            }
        }
        Ok(values)
    }

    fn accept_challenge(&mut self, b: u32) -> Result<(), ProtocolError> {
        if b >= self.c_eta {
            return Err(ProtocolError::ChallengeOutOfRange { b, c_eta: self.c_eta });
        }
        if self.completed >= self.schedule.total_rounds() {
            return Err(ProtocolError::PastFinalRound);
        }
        if self.tree.is_none() {
            let col = self.ztable.column(b)?;
            self.current = fold_slice(&self.current, col);
        }
        self.path.push(b);
        self.completed += 1;
        self.x_cur = self.schedule.advance(self.completed, self.x_cur, self.eta);
        Ok(())
    }
}

/// Single-value corruption schemes for the wrong-claim adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionPolicy {
    /// Shift only the offset-0 stripe value by the current error. The
    /// implied interpolant then differs from the honest one in exactly one
    /// node, the most agreement points (`eta - 1` of `c*eta`) any lie can
    /// have.
    CorruptMin,
    /// Random values for stripes 1.., with stripe 0 solved to satisfy the
    /// round check.
    RandomConsistent,
}

impl CorruptionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            CorruptionPolicy::CorruptMin => "corrupt-min",
            CorruptionPolicy::RandomConsistent => "random-consistent",
        }
    }
}

/// An adversary that claims `f(x) + delta` and then always answers in a
/// way that satisfies the verifier's linear check, tracking the honest
/// state on the side. Once a challenge lands on an agreement point the
/// error vanishes and it plays honestly to the end.
#[derive(Debug)]
pub struct WrongClaimProver {
    honest: HonestProver,
    delta: FieldElement,
    policy: CorruptionPolicy,
    seed: u64,
    rng: ChaCha12Rng,
    experiment: u64,
    claim: FieldElement,
    claimed_ref: FieldElement,
    last_sent: Vec<FieldElement>,
}

impl WrongClaimProver {
    pub fn new(
        f: &Polynomial,
        params: &ProtocolParams,
        schedule: Schedule,
        delta: u64,
        policy: CorruptionPolicy,
        seed: u64,
    ) -> Result<WrongClaimProver, ProtocolError> {
        let delta = params.modulus().element(delta);
        if delta.is_zero() {
            return Err(ProtocolError::ZeroDelta);
        }
        let mut honest = HonestProver::new(f, params, schedule)?;
        let claim = honest.claim()? + delta;
        Ok(WrongClaimProver {
            honest,
            delta,
            policy,
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
            experiment: 0,
            claim,
            claimed_ref: claim,
            last_sent: Vec::new(),
        })
    }
}

impl ProverSession for WrongClaimProver {
    fn claim(&mut self) -> Result<FieldElement, ProtocolError> {
        Ok(self.claim)
    }

    fn begin_experiment(&mut self) -> Result<(), ProtocolError> {
        self.honest.begin_experiment()?;
        self.claimed_ref = self.claim;
        // Independent draw stream per experiment, so experiment outcomes do
        // not depend on scheduling order.
        self.rng = ChaCha12Rng::seed_from_u64(self.seed);
        self.rng.set_stream(self.experiment);
        self.experiment += 1;
        Ok(())
    }

    fn round_values(&mut self) -> Result<Vec<FieldElement>, ProtocolError> {
        let x = self.honest.x_cur();
        let mut values = self.honest.round_values()?;
        // True check value by the folding identity: sum_s x^s * v_s.
        let one = self.delta.modulus().one();
        let mut weight = one;
        let mut truth = values[0];
        for &v in &values[1..] {
            weight = weight * x;
            truth = truth + v * weight;
        }
        let eps = self.claimed_ref - truth;
        if !eps.is_zero() {
            match self.policy {
                CorruptionPolicy::CorruptMin => {
                    values[0] = values[0] + eps;
                }
                CorruptionPolicy::RandomConsistent => {
                    let modulus = self.delta.modulus();
                    let mut weight = one;
                    let mut acc = modulus.zero();
                    for v in values.iter_mut().skip(1) {
                        *v = random_element(&mut self.rng, modulus);
                        weight = weight * x;
                        acc = acc + *v * weight;
                    }
                    values[0] = self.claimed_ref - acc;
                }
            }
        }
        self.last_sent = values.clone();
        Ok(values)
    }

    fn accept_challenge(&mut self, b: u32) -> Result<(), ProtocolError> {
        // Mirror the verifier's new reference before folding the truth.
        self.claimed_ref = interpolate_eval(&self.last_sent, b, self.honest.ztable())?;
        self.honest.accept_challenge(b)
    }
}

/// Sends an honest claim, then nothing: distinguishes transport failure
/// from rejection in the error taxonomy.
#[derive(Debug)]
pub struct UnresponsiveProver {
    claim: FieldElement,
}

impl UnresponsiveProver {
    pub fn new(
        f: &Polynomial,
        params: &ProtocolParams,
        schedule: Schedule,
    ) -> Result<UnresponsiveProver, ProtocolError> {
        let mut honest = HonestProver::new(f, params, schedule)?;
        Ok(UnresponsiveProver {
            claim: honest.claim()?,
        })
    }
}

impl ProverSession for UnresponsiveProver {
    fn claim(&mut self) -> Result<FieldElement, ProtocolError> {
        Ok(self.claim)
    }

    fn begin_experiment(&mut self) -> Result<(), ProtocolError> {
        Ok(())
    }

    fn round_values(&mut self) -> Result<Vec<FieldElement>, ProtocolError> {
        Err(ProtocolError::ProverUnavailable)
    }

    fn accept_challenge(&mut self, _b: u32) -> Result<(), ProtocolError> {
        Err(ProtocolError::ProverUnavailable)
    }
}
