//! Dense univariate polynomials, the Lagrange weight table and the folding
//! step that both protocol phases are built from.
//!
//! A polynomial of length `n` divisible by `eta` splits into `eta` stripes,
//! stripe `s` holding every `eta`-th coefficient starting at `s`. Folding at
//! challenge `b` recombines the stripes with the Lagrange weights
//! `Z_s(alpha_b)`, shrinking the length by a factor `eta`; for `b < eta` the
//! weights collapse to a Kronecker delta and the fold is exactly stripe `b`.

use rand_core::RngCore;

use crate::field::{FieldElement, FieldError, PrimeModulus};
use crate::params::{parse_decimal, ProtocolParams};
use crate::sample::random_element;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("a polynomial needs at least one coefficient")]
    Empty,
    #[error("coefficients mix different moduli")]
    MixedModuli,
    #[error("length {len} is not divisible by eta = {eta}")]
    LengthNotDivisible { len: usize, eta: u32 },
    #[error("expected {expected} values, got {got}")]
    WrongValueCount { expected: usize, got: usize },
    #[error("cannot pad {len} coefficients down to {target}")]
    PadWouldTruncate { len: usize, target: usize },
    #[error("stripe index {s} out of range [0, {eta})")]
    StripeOutOfRange { s: u32, eta: u32 },
    #[error("challenge index {b} out of range [0, {c_eta})")]
    ChallengeOutOfRange { b: u32, c_eta: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("polynomial parse error: {0}")]
    Parse(String),
}

/// Coefficient vector, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<FieldElement>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<FieldElement>) -> Result<Self, PolyError> {
        let first = *coeffs.first().ok_or(PolyError::Empty)?;
        if coeffs.iter().any(|c| c.modulus() != first.modulus()) {
            return Err(PolyError::MixedModuli);
        }
        Ok(Polynomial { coeffs })
    }

    pub fn from_u64(values: &[u64], modulus: PrimeModulus) -> Result<Self, PolyError> {
        Polynomial::new(values.iter().map(|&v| modulus.element(v)).collect())
    }

    pub fn zero(len: usize, modulus: PrimeModulus) -> Result<Self, PolyError> {
        Polynomial::new(vec![modulus.zero(); len.max(1)])
    }

    /// Uniform random coefficients; deterministic per generator state.
    pub fn random<R: RngCore + ?Sized>(len: usize, modulus: PrimeModulus, rng: &mut R) -> Self {
        Polynomial {
            coeffs: (0..len.max(1)).map(|_| random_element(rng, modulus)).collect(),
        }
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.coeffs[0].modulus()
    }

    /// Horner evaluation: exactly `len - 1` multiplications and additions.
    pub fn evaluate(&self, x: FieldElement) -> FieldElement {
        let mut rev = self.coeffs.iter().rev();
        let mut acc = *rev.next().expect("nonempty");
        for &c in rev {
            acc = acc * x + c;
        }
        acc
    }

    /// Zero-extends to `target` coefficients.
    pub fn padded_to(&self, target: usize) -> Result<Polynomial, PolyError> {
        if self.coeffs.len() > target {
            return Err(PolyError::PadWouldTruncate {
                len: self.coeffs.len(),
                target,
            });
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(target, self.modulus().zero());
        Ok(Polynomial { coeffs })
    }

    /// Every `eta`-th coefficient starting at offset `s`.
    pub fn stripe(&self, s: u32, eta: u32) -> Result<Polynomial, PolyError> {
        if s >= eta {
            return Err(PolyError::StripeOutOfRange { s, eta });
        }
        if !self.coeffs.len().is_multiple_of(eta as usize) {
            return Err(PolyError::LengthNotDivisible {
                len: self.coeffs.len(),
                eta,
            });
        }
        Ok(Polynomial {
            coeffs: self.coeffs[s as usize..]
                .iter()
                .step_by(eta as usize)
                .copied()
                .collect(),
        })
    }

    /// One folding step: output coefficient `i` is
    /// `sum_j coeffs[j + i*eta] * Z_j(alpha_b)`. Exactly `eta`
    /// multiplications per output coefficient.
    pub fn fold(&self, b: u32, ztable: &ZTable) -> Result<Polynomial, PolyError> {
        let eta = ztable.eta();
        if !self.coeffs.len().is_multiple_of(eta as usize) {
            return Err(PolyError::LengthNotDivisible {
                len: self.coeffs.len(),
                eta,
            });
        }
        let col = ztable.column(b)?;
        Ok(Polynomial {
            coeffs: fold_slice(&self.coeffs, col),
        })
    }

    /// Canonical file rendering.
    pub fn render(&self) -> String {
        let mut out = format!(
            "VPE-POLY v1 modulus={} d={}\n",
            self.modulus().value(),
            self.coeffs.len()
        );
        for c in &self.coeffs {
            out.push_str(&c.value().to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, PolyError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| PolyError::Parse("empty file".into()))?;
        let (modulus, d) = parse_poly_header(header, "VPE-POLY")?;
        let modulus = PrimeModulus::new(modulus)?;
        let mut coeffs = Vec::with_capacity(d as usize);
        for (idx, line) in lines.by_ref().enumerate() {
            if idx as u64 >= d {
                return Err(PolyError::Parse("more coefficients than declared".into()));
            }
            let v = parse_decimal(line)
                .ok_or_else(|| PolyError::Parse(format!("bad coefficient {line:?}")))?;
            coeffs.push(modulus.try_element(v)?);
        }
        if (coeffs.len() as u64) < d {
            return Err(PolyError::Parse(format!(
                "declared {d} coefficients, found {}",
                coeffs.len()
            )));
        }
        Polynomial::new(coeffs)
    }
}

/// Parses `<MAGIC> v1 modulus=<dec> d=<dec>` headers.
fn parse_poly_header(header: &str, magic: &str) -> Result<(u64, u64), PolyError> {
    let mut parts = header.split(' ');
    if parts.next() != Some(magic) || parts.next() != Some("v1") {
        return Err(PolyError::Parse(format!("bad header: {header:?}")));
    }
    let mut take = |key: &str| -> Result<u64, PolyError> {
        let tok = parts
            .next()
            .ok_or_else(|| PolyError::Parse(format!("missing {key}")))?;
        tok.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .and_then(parse_decimal)
            .ok_or_else(|| PolyError::Parse(format!("bad {key} field {tok:?}")))
    };
    let modulus = take("modulus")?;
    let d = take("d")?;
    if d == 0 {
        return Err(PolyError::Parse("d must be positive".into()));
    }
    Ok((modulus, d))
}

pub(crate) fn fold_slice(coeffs: &[FieldElement], col: &[FieldElement]) -> Vec<FieldElement> {
    let eta = col.len();
    coeffs
        .chunks_exact(eta)
        .map(|block| {
            let mut acc = block[0] * col[0];
            for j in 1..eta {
                acc = acc + block[j] * col[j];
            }
            acc
        })
        .collect()
}

/// The precomputed Lagrange weights `Z_i(alpha_j)` for `i` in `[0, eta)` and
/// `j` in `[0, ceta)`, stored column-major so folds read one contiguous
/// column per challenge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZTable {
    eta: u32,
    c_eta: u32,
    cols: Vec<Vec<FieldElement>>,
}

impl ZTable {
    /// Direct product formula over the canonical node set.
    pub fn build(params: &ProtocolParams) -> ZTable {
        let eta = params.eta();
        let c_eta = params.c_eta();
        let h = params.h_points();
        let cols = (0..c_eta)
            .map(|j| {
                let alpha_j = params.point(j);
                (0..eta)
                    .map(|i| {
                        let alpha_i = params.point(i);
                        let mut acc = params.modulus().one();
                        for (k, &alpha_k) in h.iter().enumerate() {
                            if k as u32 == i {
                                continue;
                            }
                            let den = (alpha_i - alpha_k).inv().expect("nodes are distinct");
                            acc = acc * (alpha_j - alpha_k) * den;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        ZTable { eta, c_eta, cols }
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }

    pub fn c_eta(&self) -> u32 {
        self.c_eta
    }

    /// `Z_i(alpha_j)`.
    pub fn value(&self, i: u32, j: u32) -> FieldElement {
        self.cols[j as usize][i as usize]
    }

    /// All `eta` weights for challenge `b`.
    pub fn column(&self, b: u32) -> Result<&[FieldElement], PolyError> {
        self.cols
            .get(b as usize)
            .map(|c| c.as_slice())
            .ok_or(PolyError::ChallengeOutOfRange { b, c_eta: self.c_eta })
    }
}

/// Evaluates the degree-`eta-1` interpolant through `(alpha_s, values[s])`
/// at `alpha_b`: the verifier's per-round recombination.
pub fn interpolate_eval(
    values: &[FieldElement],
    b: u32,
    ztable: &ZTable,
) -> Result<FieldElement, PolyError> {
    if values.len() != ztable.eta() as usize {
        return Err(PolyError::WrongValueCount {
            expected: ztable.eta() as usize,
            got: values.len(),
        });
    }
    let col = ztable.column(b)?;
    let mut acc = values[0] * col[0];
    for s in 1..values.len() {
        acc = acc + values[s] * col[s];
    }
    Ok(acc)
}
