//! The n-variate extension: sequential variable reduction.
//!
//! An n-variate polynomial with per-variable term count `d` is stored
//! densely with the first variable fastest-varying, which makes the
//! univariate embedding `g(x) = f(x, x^d, ..., x^{d^(n-1)})` a pure
//! re-indexing of the same array. The protocol folds variable 1 down to
//! degree zero over `r` rounds (the coefficients staying polynomials in
//! the remaining variables), then moves on to variable 2, for `n*r` rounds
//! in total against a table of size `(c*eta)^(n*r)` built by the same
//! level-by-level recursion.

use crate::field::{FieldElement, PrimeModulus};
use crate::lookup::{LookupError, LookupTable, TableSource};
use crate::params::{parse_decimal, ParamsError, ProtocolParams};
use crate::poly::{PolyError, Polynomial, ZTable};
use crate::protocol::{
    drive_verifier, make_prover, InProcessEndpoint, ProtocolError, ProtocolRun, ProverSpec,
    Schedule, SeededCoins,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MultivarError {
    #[error("point has {got} coordinates, expected {expected}")]
    ArityMismatch { expected: u32, got: usize },
    #[error("expected {expected} coefficients for n={n}, d={d}, got {got}")]
    LengthMismatch { expected: u128, n: u32, d: u64, got: usize },
    #[error("variable and term counts must be positive")]
    ZeroDims,
    #[error("coefficients mix different moduli")]
    MixedModuli,
    #[error("params declare d={params_d}, polynomial has d={poly_d}")]
    WrongParams { params_d: u64, poly_d: u64 },
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("multivariate polynomial parse error: {0}")]
    Parse(String),
}

/// Dense n-variate polynomial, degree below `d` in each variable,
/// coefficient of `x1^i1 * ... * xn^in` at flat index
/// `i1 + i2*d + ... + in*d^(n-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    n: u32,
    d: u64,
    coeffs: Vec<FieldElement>,
}

impl MultiPoly {
    pub fn new(n: u32, d: u64, coeffs: Vec<FieldElement>) -> Result<Self, MultivarError> {
        if n == 0 || d == 0 {
            return Err(MultivarError::ZeroDims);
        }
        let expected = (d as u128).pow(n);
        if coeffs.len() as u128 != expected {
            return Err(MultivarError::LengthMismatch {
                expected,
                n,
                d,
                got: coeffs.len(),
            });
        }
        let first = coeffs[0].modulus();
        if coeffs.iter().any(|c| c.modulus() != first) {
            return Err(MultivarError::MixedModuli);
        }
        Ok(MultiPoly { n, d, coeffs })
    }

    pub fn from_u64(
        n: u32,
        d: u64,
        values: &[u64],
        modulus: PrimeModulus,
    ) -> Result<Self, MultivarError> {
        MultiPoly::new(n, d, values.iter().map(|&v| modulus.element(v)).collect())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.coeffs[0].modulus()
    }

    /// Direct nested-Horner evaluation: the definitional oracle.
    pub fn evaluate(&self, point: &[FieldElement]) -> Result<FieldElement, MultivarError> {
        if point.len() != self.n as usize {
            return Err(MultivarError::ArityMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        Ok(eval_nested(&self.coeffs, self.d as usize, point))
    }

    /// The univariate embedding `g(x) = f(x, x^d, ..., x^{d^(n-1)})`: with
    /// the first variable fastest-varying this is the identity on the
    /// coefficient array.
    pub fn univariate_embed(&self) -> Polynomial {
        Polynomial::new(self.coeffs.clone()).expect("nonempty by construction")
    }

    /// Canonical file rendering.
    pub fn render(&self) -> String {
        let mut out = format!(
            "VPE-MPOLY v1 modulus={} n={} d={}\n",
            self.modulus().value(),
            self.n,
            self.d
        );
        for c in &self.coeffs {
            out.push_str(&c.value().to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, MultivarError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| MultivarError::Parse("empty file".into()))?;
        let mut parts = header.split(' ');
        if parts.next() != Some("VPE-MPOLY") || parts.next() != Some("v1") {
            return Err(MultivarError::Parse(format!("bad header: {header:?}")));
        }
        let mut take = |key: &str| -> Result<u64, MultivarError> {
            let tok = parts
                .next()
                .ok_or_else(|| MultivarError::Parse(format!("missing {key}")))?;
            tok.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .and_then(parse_decimal)
                .ok_or_else(|| MultivarError::Parse(format!("bad {key} field {tok:?}")))
        };
        let modulus = PrimeModulus::new(take("modulus")?).map_err(ParamsError::from)?;
        let n = u32::try_from(take("n")?).map_err(|_| MultivarError::Parse("n too large".into()))?;
        let d = take("d")?;
        if n == 0 || d == 0 {
            return Err(MultivarError::ZeroDims);
        }
        let expected = (d as u128)
            .checked_pow(n)
            .filter(|&e| e <= crate::lookup::MAX_TABLE_ENTRIES)
            .ok_or_else(|| {
                MultivarError::Parse("declared size exceeds the desk-scale cap".into())
            })?;
        let mut coeffs = Vec::with_capacity(expected as usize);
        for line in lines {
            if coeffs.len() as u128 >= expected {
                return Err(MultivarError::Parse("more coefficients than declared".into()));
            }
            let v = parse_decimal(line)
                .ok_or_else(|| MultivarError::Parse(format!("bad coefficient {line:?}")))?;
            coeffs.push(modulus.try_element(v).map_err(ParamsError::from)?);
        }
        MultiPoly::new(n, d, coeffs)
    }
}

fn eval_nested(coeffs: &[FieldElement], d: usize, point: &[FieldElement]) -> FieldElement {
    match point.split_last() {
        None => coeffs[0],
        Some((&x_last, rest)) => {
            let block = coeffs.len() / d;
            let mut chunks = coeffs.chunks_exact(block).rev();
            let mut acc = eval_nested(chunks.next().expect("nonempty"), d, rest);
            for chunk in chunks {
                acc = acc * x_last + eval_nested(chunk, d, rest);
            }
            acc
        }
    }
}

/// Pads every variable up to `eta^r` and flattens, returning the flat
/// polynomial together with the total parameterization covering all `n*r`
/// rounds. The amplification count is derived from the full challenge-path
/// length `n*r`, since an error must survive every round.
pub fn flatten_padded(
    f: &MultiPoly,
    base: &ProtocolParams,
) -> Result<(Polynomial, ProtocolParams), MultivarError> {
    if base.d_input() != f.d() {
        return Err(MultivarError::WrongParams {
            params_d: base.d_input(),
            poly_d: f.d(),
        });
    }
    if base.modulus() != f.modulus() {
        return Err(MultivarError::MixedModuli);
    }
    let w = base.d_pad();
    let total_len = (w as u128).pow(f.n);
    if total_len > crate::lookup::MAX_TABLE_ENTRIES {
        return Err(MultivarError::Lookup(LookupError::TooLarge {
            lambda: total_len,
            max: crate::lookup::MAX_TABLE_ENTRIES,
        }));
    }
    let mut out = vec![f.modulus().zero(); total_len as usize];
    scatter(&f.coeffs, f.d as usize, w as usize, f.n, &mut out);
    let flat = Polynomial::new(out).expect("nonempty");
    let total = ProtocolParams::derive(base.modulus(), total_len as u64, base.eta(), base.c_eta())?;
    debug_assert_eq!(total.r(), f.n * base.r());
    Ok((flat, total))
}

/// Copies a dense block with per-variable width `d` into one with width
/// `w >= d`, zero-padding the tail of every axis.
fn scatter(src: &[FieldElement], d: usize, w: usize, n: u32, dst: &mut [FieldElement]) {
    if n == 1 {
        dst[..d].copy_from_slice(src);
        return;
    }
    let src_block = src.len() / d;
    let dst_block = dst.len() / w;
    for j in 0..d {
        scatter(
            &src[j * src_block..(j + 1) * src_block],
            d,
            w,
            n - 1,
            &mut dst[j * dst_block..(j + 1) * dst_block],
        );
    }
}

/// Builds the `(c*eta)^(n*r)` lookup table for the flattened polynomial.
pub fn mv_build_table(
    f: &MultiPoly,
    base: &ProtocolParams,
) -> Result<(LookupTable, ProtocolParams), MultivarError> {
    let (flat, total) = flatten_padded(f, base)?;
    let ztable = ZTable::build(&total);
    Ok((LookupTable::build(&flat, &total, &ztable)?, total))
}

/// The full multivariate protocol: `n*r` challenge rounds per experiment,
/// variable `j` folded to degree zero before variable `j+1` begins.
pub fn mv_run_protocol(
    f: &MultiPoly,
    base: &ProtocolParams,
    point: &[FieldElement],
    table: &dyn TableSource,
    spec: ProverSpec,
    seed: u64,
) -> Result<ProtocolRun, MultivarError> {
    if point.len() != f.n as usize {
        return Err(MultivarError::ArityMismatch {
            expected: f.n,
            got: point.len(),
        });
    }
    if point.iter().any(|x| x.modulus() != f.modulus()) {
        return Err(MultivarError::MixedModuli);
    }
    let (flat, total) = flatten_padded(f, base)?;
    let ztable = ZTable::build(&total);
    let schedule = Schedule::multivariate(point.to_vec(), base.r());
    let prover = make_prover(spec, &flat, &total, schedule.clone(), seed)?;
    let mut endpoint = InProcessEndpoint::new(prover);
    let mut coins = SeededCoins::new(seed);
    let run = drive_verifier(
        &mut endpoint,
        &total,
        &ztable,
        table,
        &schedule,
        &mut coins,
        total.m(),
    )?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha12Rng;
    use rand_core::SeedableRng;

    use crate::protocol::HonestProver;
    use crate::sample::uniform_below;

    fn p97() -> PrimeModulus {
        PrimeModulus::new(97).unwrap()
    }

    #[test]
    fn evaluate_bilinear_by_hand() {
        // coeffs (a00, a10, a01, a11): f = a00 + a10 x + a01 y + a11 x y.
        let f = MultiPoly::from_u64(2, 2, &[3, 5, 7, 11], p97()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(81);
        for _ in 0..50 {
            let x = p97().element(uniform_below(&mut rng, 97));
            let y = p97().element(uniform_below(&mut rng, 97));
            let expect = p97().element(3)
                + p97().element(5) * x
                + p97().element(7) * y
                + p97().element(11) * x * y;
            assert_eq!(f.evaluate(&[x, y]).unwrap(), expect);
        }

        let zero = MultiPoly::from_u64(2, 2, &[0, 0, 0, 0], p97()).unwrap();
        assert_eq!(
            zero.evaluate(&[p97().element(4), p97().element(9)]).unwrap(),
            p97().zero()
        );

        assert_eq!(
            f.evaluate(&[p97().element(1)]).unwrap_err(),
            MultivarError::ArityMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn embedding_is_the_identity_reindex() {
        let f = MultiPoly::from_u64(2, 2, &[3, 5, 7, 11], p97()).unwrap();
        let g = f.univariate_embed();
        assert_eq!(
            g.coeffs().iter().map(|c| c.value()).collect::<Vec<_>>(),
            [3, 5, 7, 11]
        );

        // x1*x2 with n=2, d=2 lands at index 3, i.e. x^3.
        let m = MultiPoly::from_u64(2, 2, &[0, 0, 0, 1], p97()).unwrap();
        assert_eq!(m.univariate_embed().coeffs()[3], p97().one());

        // n = 1 embeds unchanged.
        let u = MultiPoly::from_u64(1, 4, &[1, 2, 3, 4], p97()).unwrap();
        assert_eq!(
            u.univariate_embed(),
            Polynomial::from_u64(&[1, 2, 3, 4], p97()).unwrap()
        );
    }

    #[test]
    fn embedding_matches_evaluation_on_the_curve() {
        let mut rng = ChaCha12Rng::seed_from_u64(83);
        for n in [2u32, 3] {
            for d in [2u64, 4] {
                for _ in 0..30 {
                    let len = (d as usize).pow(n);
                    let coeffs: Vec<_> = (0..len)
                        .map(|_| p97().element(uniform_below(&mut rng, 97)))
                        .collect();
                    let f = MultiPoly::new(n, d, coeffs).unwrap();
                    let g = f.univariate_embed();
                    let x = p97().element(uniform_below(&mut rng, 97));
                    let point: Vec<_> = (0..n).map(|j| x.pow(d.pow(j))).collect();
                    assert_eq!(g.evaluate(x), f.evaluate(&point).unwrap(), "n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn honest_multivariate_runs_accept() {
        let mut rng = ChaCha12Rng::seed_from_u64(87);
        for (n, d) in [(2u32, 2u64), (2, 4), (3, 2), (2, 3)] {
            let base = ProtocolParams::derive(p97(), d, 2, 4).unwrap();
            let len = (d as usize).pow(n);
            let coeffs: Vec<_> = (0..len)
                .map(|_| p97().element(uniform_below(&mut rng, 97)))
                .collect();
            let f = MultiPoly::new(n, d, coeffs).unwrap();
            let (table, total) = mv_build_table(&f, &base).unwrap();
            let point: Vec<_> = (0..n)
                .map(|_| p97().element(uniform_below(&mut rng, 97)))
                .collect();
            let run = mv_run_protocol(&f, &base, &point, &table, ProverSpec::Honest, 5).unwrap();
            assert!(run.is_accept(), "n={n} d={d}");
            // n*r challenges per experiment.
            for e in 0..total.m() {
                assert_eq!(
                    run.transcript.challenges(e).len() as u32,
                    f.n() * base.r(),
                    "n={n} d={d} experiment {e}"
                );
            }
            // The claim is the multivariate evaluation.
            assert_eq!(run.transcript.claim(), Some(f.evaluate(&point).unwrap()));
        }
    }

    #[test]
    fn flat_claim_equals_multivariate_evaluation_with_padding() {
        // d = 3 pads each variable to 4; the flattened prover must still
        // claim exactly f(point).
        let mut rng = ChaCha12Rng::seed_from_u64(89);
        let base = ProtocolParams::derive(p97(), 3, 2, 4).unwrap();
        let coeffs: Vec<_> = (0..9)
            .map(|_| p97().element(uniform_below(&mut rng, 97)))
            .collect();
        let f = MultiPoly::new(2, 3, coeffs).unwrap();
        let (flat, total) = flatten_padded(&f, &base).unwrap();
        assert_eq!(flat.len(), 16);
        assert_eq!(total.r(), 4);
        let point = vec![p97().element(5), p97().element(8)];
        let schedule = Schedule::multivariate(point.clone(), base.r());
        use crate::protocol::ProverSession as _;
        let mut prover = HonestProver::new(&flat, &total, schedule).unwrap();
        assert_eq!(prover.claim().unwrap(), f.evaluate(&point).unwrap());
    }

    #[test]
    fn multivariate_run_equals_univariate_run_on_the_curve() {
        // With d a power of eta the flattening is the identity, so the
        // multivariate protocol at (x, x^d, x^d^2) and the univariate
        // protocol on the embedding at x must produce identical transcripts
        // under the same seed.
        let mut rng = ChaCha12Rng::seed_from_u64(91);
        for (n, d) in [(2u32, 2u64), (2, 4), (3, 2)] {
            let base = ProtocolParams::derive(p97(), d, 2, 4).unwrap();
            let len = (d as usize).pow(n);
            let coeffs: Vec<_> = (0..len)
                .map(|_| p97().element(uniform_below(&mut rng, 97)))
                .collect();
            let f = MultiPoly::new(n, d, coeffs).unwrap();
            let (table, total) = mv_build_table(&f, &base).unwrap();
            // The multivariate table is entry-for-entry the univariate
            // table of the embedded polynomial.
            let ztable = ZTable::build(&total);
            let uni_table =
                crate::lookup::LookupTable::build(&f.univariate_embed(), &total, &ztable).unwrap();
            assert_eq!(table, uni_table);
            let x = p97().element(1 + uniform_below(&mut rng, 96));
            let point: Vec<_> = (0..n).map(|j| x.pow(d.pow(j))).collect();
            let adversary = ProverSpec::Adversary(crate::protocol::AdversaryStrategy::WrongClaim {
                delta: 2,
                policy: crate::protocol::CorruptionPolicy::CorruptMin,
            });
            for seed in [1u64, 7, 42] {
                for spec in [ProverSpec::Honest, adversary] {
                    let mv = mv_run_protocol(&f, &base, &point, &table, spec, seed).unwrap();
                    let uni = crate::protocol::run_protocol(
                        &f.univariate_embed(),
                        &total,
                        &table,
                        x,
                        spec,
                        seed,
                    )
                    .unwrap();
                    assert_eq!(mv.transcript.render(), uni.transcript.render());
                    assert_eq!(mv.verdict, uni.verdict);
                }
            }
        }
    }

    #[test]
    fn table_size_guard() {
        let base = ProtocolParams::derive(p97(), 16, 2, 4).unwrap();
        let f = MultiPoly::from_u64(2, 16, &vec![1; 256], p97()).unwrap();
        // (c*eta)^(n*r) = 4^8 fits; n = 3 gives 4^12 which does not.
        assert!(mv_build_table(&f, &base).is_ok());
        let big = MultiPoly::from_u64(3, 16, &vec![0; 4096], p97()).unwrap();
        assert!(matches!(
            mv_build_table(&big, &base),
            Err(MultivarError::Lookup(LookupError::TooLarge { .. }))
        ));
    }

    #[test]
    fn render_parse_round_trip() {
        let f = MultiPoly::from_u64(2, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9], p97()).unwrap();
        assert_eq!(MultiPoly::parse(&f.render()).unwrap(), f);
        assert!(MultiPoly::parse("VPE-MPOLY v1 modulus=97 n=0 d=2\n").is_err());
        assert!(MultiPoly::parse("VPE-MPOLY v1 modulus=97 n=2 d=2\n1\n2\n3\n").is_err());
        assert!(MultiPoly::parse("VPE-POLY v1 modulus=97 n=2 d=2\n").is_err());
    }
}
