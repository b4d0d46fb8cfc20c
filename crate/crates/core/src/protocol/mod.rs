//! The interactive evaluation phase.
//!
//! The verifier drives the whole session through a [`ProverEndpoint`]: it
//! fetches the claim, then per experiment alternates round values and
//! challenges, closes each experiment with its interpolated constant and
//! finishes with a verdict. The same driver runs against an in-process
//! prover or a remote one, which is what makes wire transcripts
//! byte-identical to in-process ones.

mod prover;
mod transcript;
mod verifier;

pub use prover::{
    CorruptionPolicy, HonestProver, ProverSession, UnresponsiveProver, WrongClaimProver,
};
pub use transcript::{Record, RejectReason, Transcript, Verdict};
pub use verifier::{
    Coins, ExperimentVerifier, RoundOutcome, Schedule, ScriptedCoins, SeededCoins,
};

use crate::count::{self, OpCount};
use crate::field::FieldElement;
use crate::lookup::{LookupError, TableSource};
use crate::params::ProtocolParams;
use crate::poly::{PolyError, Polynomial, ZTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("lookup table digest does not match the params")]
    DigestMismatch,
    #[error("expected {expected} round values, got {got}")]
    WrongValueCount { expected: usize, got: usize },
    #[error("challenge {b} out of range [0, {c_eta})")]
    ChallengeOutOfRange { b: u32, c_eta: u32 },
    #[error("session is past its final round")]
    PastFinalRound,
    #[error("finalize after {completed} of {total} rounds")]
    FinalizeTooEarly { completed: u32, total: u32 },
    #[error("the prover stopped responding")]
    ProverUnavailable,
    #[error("wrong-claim adversary requires a nonzero offset")]
    ZeroDelta,
    #[error("inputs do not match the params: {0}")]
    ParamsMismatch(String),
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("protocol violation: {0}")]
    Violation(String),
}

/// The verifier's view of a prover, local or remote.
pub trait ProverEndpoint {
    fn fetch_claim(&mut self) -> Result<FieldElement, ProtocolError>;
    fn fetch_round_values(
        &mut self,
        experiment: u64,
        level: u32,
    ) -> Result<Vec<FieldElement>, ProtocolError>;
    fn send_challenge(&mut self, experiment: u64, level: u32, b: u32)
        -> Result<(), ProtocolError>;
    fn send_final(&mut self, experiment: u64, value: FieldElement) -> Result<(), ProtocolError>;
    fn send_verdict(&mut self, verdict: &Verdict) -> Result<(), ProtocolError>;
}

/// Runs a [`ProverSession`] in the same process.
pub struct InProcessEndpoint<P> {
    prover: P,
}

impl<P: ProverSession> InProcessEndpoint<P> {
    pub fn new(prover: P) -> Self {
        InProcessEndpoint { prover }
    }
}

impl<P: ProverSession> ProverEndpoint for InProcessEndpoint<P> {
    fn fetch_claim(&mut self) -> Result<FieldElement, ProtocolError> {
        self.prover.claim()
    }

    fn fetch_round_values(
        &mut self,
        _experiment: u64,
        level: u32,
    ) -> Result<Vec<FieldElement>, ProtocolError> {
        if level == 1 {
            self.prover.begin_experiment()?;
        }
        self.prover.round_values()
    }

    fn send_challenge(
        &mut self,
        _experiment: u64,
        _level: u32,
        b: u32,
    ) -> Result<(), ProtocolError> {
        self.prover.accept_challenge(b)
    }

    fn send_final(&mut self, _experiment: u64, _value: FieldElement) -> Result<(), ProtocolError> {
        Ok(())
    }

    fn send_verdict(&mut self, _verdict: &Verdict) -> Result<(), ProtocolError> {
        Ok(())
    }
}

/// Field operations attributed per party over one run. Table fetches are
/// kept separate so an on-demand table does not inflate the verifier's
/// account.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOps {
    pub prover: OpCount,
    pub verifier: OpCount,
    pub table: OpCount,
}

/// A completed run: the verdict, the full message log and the op accounts.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub verdict: Verdict,
    pub transcript: Transcript,
    pub ops: RunOps,
}

impl ProtocolRun {
    pub fn is_accept(&self) -> bool {
        self.verdict.is_accept()
    }
}

fn metered<T>(bucket: &mut OpCount, f: impl FnOnce() -> T) -> T {
    let before = count::snapshot();
    let out = f();
    *bucket += count::snapshot().since(before);
    out
}

/// The verifier's protocol, generic over where the prover lives.
///
/// Rejection is fail-fast. Transport and consistency failures surface as
/// errors, never as a reject verdict.
pub fn drive_verifier<E: ProverEndpoint + ?Sized>(
    endpoint: &mut E,
    params: &ProtocolParams,
    ztable: &ZTable,
    table: &dyn TableSource,
    schedule: &Schedule,
    coins: &mut dyn Coins,
    experiments: u64,
) -> Result<ProtocolRun, ProtocolError> {
    if table.digest() != params.digest() {
        return Err(ProtocolError::DigestMismatch);
    }
    if schedule.total_rounds() != params.r() {
        return Err(ProtocolError::ParamsMismatch(format!(
            "schedule has {} rounds but params require r = {}",
            schedule.total_rounds(),
            params.r()
        )));
    }
    let mut transcript = Transcript::default();
    let mut ops = RunOps::default();

    let claim = metered(&mut ops.prover, || endpoint.fetch_claim())?;
    transcript.push(Record::Claim(claim));

    let finish = |verdict: Verdict,
                      mut transcript: Transcript,
                      ops: RunOps,
                      endpoint: &mut E|
     -> Result<ProtocolRun, ProtocolError> {
        transcript.push(Record::Verdict(verdict));
        endpoint.send_verdict(&verdict)?;
        Ok(ProtocolRun {
            verdict,
            transcript,
            ops,
        })
    };

    for e in 0..experiments {
        let mut exp = ExperimentVerifier::begin(params, ztable, schedule, claim);
        for level in 1..=schedule.total_rounds() {
            let values =
                metered(&mut ops.prover, || endpoint.fetch_round_values(e, level))?;
            transcript.push(Record::Round {
                experiment: e,
                level,
                values: values.clone(),
            });
            let outcome = metered(&mut ops.verifier, || {
                exp.check_round(&values, &mut |bound| coins.draw(e, bound))
            })?;
            match outcome {
                RoundOutcome::Reject => {
                    let verdict = Verdict::Reject(RejectReason::RoundCheck {
                        experiment: e,
                        level,
                    });
                    return finish(verdict, transcript, ops, endpoint);
                }
                RoundOutcome::Challenge(b) => {
                    transcript.push(Record::Challenge {
                        experiment: e,
                        level,
                        b,
                    });
                    metered(&mut ops.prover, || endpoint.send_challenge(e, level, b))?;
                }
            }
        }
        let value = exp.reference();
        transcript.push(Record::Final {
            experiment: e,
            value,
        });
        endpoint.send_final(e, value)?;
        let entry = metered(&mut ops.table, || table.entry(exp.challenges()))?;
        if entry != value {
            let verdict = Verdict::Reject(RejectReason::FinalCheck { experiment: e });
            return finish(verdict, transcript, ops, endpoint);
        }
    }
    finish(Verdict::Accept, transcript, ops, endpoint)
}

/// Adversarial prover behaviors for soundness experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryStrategy {
    /// Honest claim, then silence.
    HonestThenNothing,
    /// Claim off by `delta`, rounds kept consistent per the policy.
    WrongClaim { delta: u64, policy: CorruptionPolicy },
}

/// Which prover to run a session against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProverSpec {
    Honest,
    /// Honest with the precomputed coefficient tree.
    HonestWithTree,
    Adversary(AdversaryStrategy),
}

/// Adversary draws must not correlate with the verifier's coins even when
/// both derive from one CLI seed.
const ADVERSARY_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn make_prover(
    spec: ProverSpec,
    f: &Polynomial,
    params: &ProtocolParams,
    schedule: Schedule,
    seed: u64,
) -> Result<Box<dyn ProverSession + Send>, ProtocolError> {
    Ok(match spec {
        ProverSpec::Honest => Box::new(HonestProver::new(f, params, schedule)?),
        ProverSpec::HonestWithTree => Box::new(HonestProver::with_tree(f, params, schedule)?),
        ProverSpec::Adversary(AdversaryStrategy::HonestThenNothing) => {
            Box::new(UnresponsiveProver::new(f, params, schedule)?)
        }
        ProverSpec::Adversary(AdversaryStrategy::WrongClaim { delta, policy }) => Box::new(
            WrongClaimProver::new(f, params, schedule, delta, policy, seed ^ ADVERSARY_SEED_MIX)?,
        ),
    })
}

/// In-process session with an explicit experiment count; [`run_protocol`]
/// uses the amplification count from the params.
pub fn run_session(
    f: &Polynomial,
    params: &ProtocolParams,
    table: &dyn TableSource,
    x: FieldElement,
    spec: ProverSpec,
    seed: u64,
    experiments: u64,
) -> Result<ProtocolRun, ProtocolError> {
    if x.modulus() != params.modulus() {
        return Err(ProtocolError::ParamsMismatch(format!(
            "evaluation point modulus {} vs params modulus {}",
            x.modulus(),
            params.modulus()
        )));
    }
    let ztable = ZTable::build(params);
    let schedule = Schedule::univariate(x, params.r());
    // Construction evaluates the claim (and optionally the whole tree),
    // which is prover work.
    let mut construction = OpCount::default();
    let prover = metered(&mut construction, || {
        make_prover(spec, f, params, schedule.clone(), seed)
    })?;
    let mut endpoint = InProcessEndpoint::new(prover);
    let mut coins = SeededCoins::new(seed);
    let mut run = drive_verifier(
        &mut endpoint,
        params,
        &ztable,
        table,
        &schedule,
        &mut coins,
        experiments,
    )?;
    run.ops.prover += construction;
    Ok(run)
}

/// The full protocol: `m` experiments against one shared claim, accept iff
/// every experiment accepts.
pub fn run_protocol(
    f: &Polynomial,
    params: &ProtocolParams,
    table: &dyn TableSource,
    x: FieldElement,
    spec: ProverSpec,
    seed: u64,
) -> Result<ProtocolRun, ProtocolError> {
    run_session(f, params, table, x, spec, seed, params.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeModulus;
    use crate::lookup::{naive_entry, LookupTable};
    use rand_chacha::ChaCha12Rng;
    use rand_core::SeedableRng;

    fn p97() -> PrimeModulus {
        PrimeModulus::new(97).unwrap()
    }

    fn setup(d: u64, eta: u32, c_eta: u32) -> (ProtocolParams, ZTable) {
        let params = ProtocolParams::derive(p97(), d, eta, c_eta).unwrap();
        let zt = ZTable::build(&params);
        (params, zt)
    }

    fn f1234() -> Polynomial {
        Polynomial::from_u64(&[1, 2, 3, 4], p97()).unwrap()
    }

    #[test]
    fn claims_match_direct_evaluation() {
        let (params, _) = setup(4, 2, 4);
        let sched = Schedule::univariate(p97().element(2), 2);
        let mut prover = HonestProver::new(&f1234(), &params, sched.clone()).unwrap();
        assert_eq!(prover.claim().unwrap(), p97().element(49));

        let zero = Polynomial::zero(4, p97()).unwrap();
        let mut prover = HonestProver::new(&zero, &params, sched.clone()).unwrap();
        assert_eq!(prover.claim().unwrap(), p97().element(0));

        let constant = Polynomial::from_u64(&[7], p97()).unwrap();
        let mut prover = HonestProver::new(&constant, &params, sched).unwrap();
        assert_eq!(prover.claim().unwrap(), p97().element(7));
    }

    #[test]
    fn round_values_are_stripe_evaluations() {
        let (params, _) = setup(4, 2, 4);
        let sched = Schedule::univariate(p97().element(2), 2);
        let mut prover = HonestProver::new(&f1234(), &params, sched.clone()).unwrap();
        prover.begin_experiment().unwrap();
        // Stripes (1,3) and (2,4) at x^2 = 4: 1+3*4 = 13, 2+4*4 = 18.
        assert_eq!(
            prover.round_values().unwrap(),
            vec![p97().element(13), p97().element(18)]
        );

        let zero = Polynomial::zero(4, p97()).unwrap();
        let mut prover = HonestProver::new(&zero, &params, sched).unwrap();
        prover.begin_experiment().unwrap();
        assert_eq!(
            prover.round_values().unwrap(),
            vec![p97().element(0), p97().element(0)]
        );
    }

    #[test]
    fn degree_zero_stripes_ignore_the_point() {
        // At the last level the stripes are constants.
        let (params, _) = setup(2, 2, 4);
        let f = Polynomial::from_u64(&[11, 22], p97()).unwrap();
        for x in [0u64, 1, 5, 96] {
            let sched = Schedule::univariate(p97().element(x), 1);
            let mut prover = HonestProver::new(&f, &params, sched).unwrap();
            prover.begin_experiment().unwrap();
            assert_eq!(
                prover.round_values().unwrap(),
                vec![p97().element(11), p97().element(22)]
            );
        }
    }

    #[test]
    fn challenges_fold_the_current_polynomial() {
        let (params, zt) = setup(4, 2, 4);
        let sched = Schedule::univariate(p97().element(2), 2);
        let mut prover = HonestProver::new(&f1234(), &params, sched.clone()).unwrap();
        prover.begin_experiment().unwrap();
        prover.round_values().unwrap();

        // Challenge below eta is a stripe.
        prover.accept_challenge(1).unwrap();
        assert_eq!(
            prover.current_coeffs(),
            f1234().stripe(1, 2).unwrap().coeffs()
        );

        // Challenge 2 folds (1,2,3,4) to (3,5).
        let mut prover = HonestProver::new(&f1234(), &params, sched.clone()).unwrap();
        prover.begin_experiment().unwrap();
        prover.round_values().unwrap();
        prover.accept_challenge(2).unwrap();
        assert_eq!(
            prover.current_coeffs(),
            &[p97().element(3), p97().element(5)]
        );

        // Two challenges leave exactly the naive table entry.
        prover.round_values().unwrap();
        prover.accept_challenge(3).unwrap();
        assert_eq!(
            prover.current_coeffs(),
            &[naive_entry(&f1234(), &params, &zt, &[2, 3]).unwrap()]
        );

        assert_eq!(
            prover.accept_challenge(9).unwrap_err(),
            ProtocolError::ChallengeOutOfRange { b: 9, c_eta: 4 }
        );
    }

    #[test]
    fn tree_prover_is_indistinguishable() {
        let (params, _) = setup(16, 2, 4);
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let f = Polynomial::random(16, p97(), &mut rng);
        let x = p97().element(5);
        let sched = Schedule::univariate(x, params.r());
        let mut plain = HonestProver::new(&f, &params, sched.clone()).unwrap();
        let mut tree = HonestProver::with_tree(&f, &params, sched).unwrap();
        assert_eq!(plain.claim().unwrap(), tree.claim().unwrap());
        plain.begin_experiment().unwrap();
        tree.begin_experiment().unwrap();
        for b in [3u32, 0, 2, 1] {
            assert_eq!(plain.round_values().unwrap(), tree.round_values().unwrap());
            plain.accept_challenge(b).unwrap();
            tree.accept_challenge(b).unwrap();
        }
    }

    #[test]
    fn verifier_accepts_honest_rounds_and_rejects_perturbations() {
        let (params, zt) = setup(4, 2, 4);
        let x = p97().element(2);
        let sched = Schedule::univariate(x, 2);
        let claim = p97().element(49);

        // Honest: 13 + 2*18 = 49.
        let mut v = ExperimentVerifier::begin(&params, &zt, &sched, claim);
        let honest = [p97().element(13), p97().element(18)];
        let outcome = v.check_round(&honest, &mut |_| 2).unwrap();
        assert_eq!(outcome, RoundOutcome::Challenge(2));
        // New reference: interpolation at alpha_2 = 96*13 + 2*18 = 23.
        assert_eq!(v.reference(), p97().element(23));

        // Any single perturbed value breaks the linear check.
        let mut v = ExperimentVerifier::begin(&params, &zt, &sched, claim);
        let bad = [p97().element(14), p97().element(18)];
        assert_eq!(v.check_round(&bad, &mut |_| 0).unwrap(), RoundOutcome::Reject);

        let mut v = ExperimentVerifier::begin(&params, &zt, &sched, claim);
        assert_eq!(
            v.check_round(&honest[..1], &mut |_| 0).unwrap_err(),
            ProtocolError::WrongValueCount { expected: 2, got: 1 }
        );
    }

    #[test]
    fn consistent_but_wrong_values_propagate_the_error() {
        // Claim off by delta, values[0] shifted by delta: the check passes
        // and the new reference differs from the truth by delta * Z_0(b).
        let (params, zt) = setup(4, 2, 4);
        let x = p97().element(2);
        let sched = Schedule::univariate(x, 2);
        let delta = p97().element(10);
        let claim = p97().element(49) + delta;
        for b in 0..4u32 {
            let mut v = ExperimentVerifier::begin(&params, &zt, &sched, claim);
            let shifted = [p97().element(13) + delta, p97().element(18)];
            let outcome = v.check_round(&shifted, &mut |_| b).unwrap();
            assert_eq!(outcome, RoundOutcome::Challenge(b));
            let truth = f1234().fold(b, &zt).unwrap().evaluate(x.pow(2));
            assert_eq!(v.reference() - truth, delta * zt.value(0, b));
            // The error vanishes exactly on the non-zero nodes of H.
            assert_eq!(v.reference() == truth, b == 1);
        }
    }

    #[test]
    fn finalize_checks_the_table() {
        let (params, zt) = setup(4, 2, 4);
        let f = f1234();
        let table = LookupTable::build(&f, &params, &zt).unwrap();
        let x = p97().element(2);
        let run = run_protocol(&f, &params, &table, x, ProverSpec::Honest, 7).unwrap();
        assert!(run.is_accept());

        // A corrupted table makes the honest prover fail the final check.
        let mut bad = table.render();
        let last = bad.trim_end().rfind('\n').unwrap();
        let old_tail: String = bad[last + 1..].trim().into();
        let flipped = if old_tail == "0" { "1" } else { "0" };
        bad.replace_range(last + 1..bad.len() - 1, flipped);
        let bad_table = LookupTable::parse(&bad).unwrap();
        // Script the coins so the run hits the tampered entry (3, 3).
        let ztable = ZTable::build(&params);
        let sched = Schedule::univariate(x, params.r());
        let prover = make_prover(ProverSpec::Honest, &f, &params, sched.clone(), 0).unwrap();
        let mut endpoint = InProcessEndpoint::new(prover);
        let mut coins = ScriptedCoins::new(vec![3, 3]);
        let run = drive_verifier(
            &mut endpoint,
            &params,
            &ztable,
            &bad_table,
            &sched,
            &mut coins,
            1,
        )
        .unwrap();
        assert_eq!(
            run.verdict,
            Verdict::Reject(RejectReason::FinalCheck { experiment: 0 })
        );
    }

    #[test]
    fn finalize_too_early_is_an_error() {
        let (params, zt) = setup(4, 2, 4);
        let table = LookupTable::build(&f1234(), &params, &zt).unwrap();
        let sched = Schedule::univariate(p97().element(2), 2);
        let v = ExperimentVerifier::begin(&params, &zt, &sched, p97().element(49));
        assert_eq!(
            v.finalize(&table).unwrap_err(),
            ProtocolError::FinalizeTooEarly { completed: 0, total: 2 }
        );
    }

    #[test]
    fn digest_mismatch_is_an_error_not_a_reject() {
        let (params, zt) = setup(4, 2, 4);
        let (other, ozt) = setup(4, 2, 3);
        let table = LookupTable::build(&f1234(), &other, &ozt).unwrap();
        let _ = zt; // tables bind to params, not to polynomial contents
        let err =
            run_protocol(&f1234(), &params, &table, p97().element(2), ProverSpec::Honest, 1)
                .unwrap_err();
        assert_eq!(err, ProtocolError::DigestMismatch);
    }

    #[test]
    fn unresponsive_prover_is_a_failure_not_a_reject() {
        let (params, zt) = setup(4, 2, 4);
        let table = LookupTable::build(&f1234(), &params, &zt).unwrap();
        let err = run_protocol(
            &f1234(),
            &params,
            &table,
            p97().element(2),
            ProverSpec::Adversary(AdversaryStrategy::HonestThenNothing),
            1,
        )
        .unwrap_err();
        assert_eq!(err, ProtocolError::ProverUnavailable);
    }

    #[test]
    fn zero_delta_is_rejected_at_construction() {
        let (params, _) = setup(4, 2, 4);
        let sched = Schedule::univariate(p97().element(2), 2);
        let err = WrongClaimProver::new(
            &f1234(),
            &params,
            sched,
            97, // reduces to zero
            CorruptionPolicy::CorruptMin,
            1,
        )
        .unwrap_err();
        assert_eq!(err, ProtocolError::ZeroDelta);
    }
}
