//! The public protocol parameterization.
//!
//! A [`ProtocolParams`] fixes everything both parties must agree on before
//! a session: the field, the declared term count `d` of the polynomial, the
//! folding arity `eta`, the challenge-set size `ceta = c * eta`, the round
//! count `r` (smallest with `eta^r >= d`) and the amplification count
//! `m = ceil((c/(c-1))^r)`. The challenge set `L` is fixed to the canonical
//! embedding `{0, 1, ..., ceta-1}`, with the interpolation nodes `H` its
//! first `eta` entries, so a params file fully determines the tables and
//! transcripts derived from it.

use sha2::{Digest as _, Sha256};

use crate::field::{FieldElement, FieldError, PrimeModulus};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParamsError {
    #[error("eta must be at least 2, got {0}")]
    EtaTooSmall(u32),
    #[error("ceta ({c_eta}) must exceed eta ({eta})")]
    CEtaNotAboveEta { eta: u32, c_eta: u32 },
    #[error("ceta ({c_eta}) must be below the modulus ({modulus})")]
    CEtaExceedsModulus { c_eta: u32, modulus: u64 },
    #[error("the polynomial must have at least one term")]
    ZeroTermCount,
    #[error("term count {0} is too small for automatic parameter selection (need >= 4)")]
    DegreeTooSmallForSelector(u64),
    #[error("parameter derivation overflows 64-bit arithmetic")]
    Overflow,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("params parse error: {0}")]
    Parse(String),
    #[error("params file is inconsistent: {0}")]
    Inconsistent(String),
}

/// Complete public parameterization of one protocol instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    modulus: PrimeModulus,
    d_input: u64,
    eta: u32,
    c_eta: u32,
    r: u32,
    m: u64,
    d_pad: u64,
    lambda: u128,
    l: Vec<FieldElement>,
    digest: [u8; 32],
}

impl ProtocolParams {
    /// Derives a full parameter set from the four free choices.
    pub fn derive(
        modulus: PrimeModulus,
        d_input: u64,
        eta: u32,
        c_eta: u32,
    ) -> Result<Self, ParamsError> {
        if eta < 2 {
            return Err(ParamsError::EtaTooSmall(eta));
        }
        if c_eta <= eta {
            return Err(ParamsError::CEtaNotAboveEta { eta, c_eta });
        }
        if c_eta as u64 >= modulus.value() {
            return Err(ParamsError::CEtaExceedsModulus {
                c_eta,
                modulus: modulus.value(),
            });
        }
        if d_input == 0 {
            return Err(ParamsError::ZeroTermCount);
        }

        // Smallest positive r with eta^r >= d_input.
        let mut r = 1u32;
        let mut d_pad = eta as u64;
        while d_pad < d_input {
            d_pad = d_pad.checked_mul(eta as u64).ok_or(ParamsError::Overflow)?;
            r += 1;
        }

        // m = ceil((c/(c-1))^r) computed exactly: c/(c-1) = ceta/(ceta-eta).
        let num = (c_eta as u128).checked_pow(r).ok_or(ParamsError::Overflow)?;
        let den = ((c_eta - eta) as u128)
            .checked_pow(r)
            .ok_or(ParamsError::Overflow)?;
        let m = u64::try_from(num.div_ceil(den)).map_err(|_| ParamsError::Overflow)?;

        let l = (0..c_eta as u64).map(|v| modulus.element(v)).collect();
        let mut params = ProtocolParams {
            modulus,
            d_input,
            eta,
            c_eta,
            r,
            m,
            d_pad,
            lambda: num,
            l,
            digest: [0; 32],
        };
        params.digest = Sha256::digest(params.render().as_bytes()).into();

        // The amplification target (1 - (1 - 1/c)^r)^m < 1/2 holds for every
        // m = ceil((c/(c-1))^r); verify numerically anyway.
        let p = params.per_experiment_bound();
        assert!(
            p.powf(params.m as f64) < 0.5,
            "amplification bound violated: p={p}, m={}",
            params.m
        );
        Ok(params)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// Declared term count of the input polynomial.
    pub fn d_input(&self) -> u64 {
        self.d_input
    }

    /// Padded term count `eta^r`; every coefficient vector in the protocol
    /// has this length before the first fold.
    pub fn d_pad(&self) -> u64 {
        self.d_pad
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }

    pub fn c_eta(&self) -> u32 {
        self.c_eta
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Lookup-table size `(c*eta)^r`.
    pub fn lambda(&self) -> u128 {
        self.lambda
    }

    /// The challenge set `L`, the canonical embedding of `0..ceta`.
    pub fn l_points(&self) -> &[FieldElement] {
        &self.l
    }

    /// The interpolation nodes `H`, the first `eta` entries of `L`.
    pub fn h_points(&self) -> &[FieldElement] {
        &self.l[..self.eta as usize]
    }

    /// The challenge point `alpha_b`.
    pub fn point(&self, b: u32) -> FieldElement {
        self.l[b as usize]
    }

    /// Per-experiment cheating bound `1 - (1 - 1/c)^r`.
    pub fn per_experiment_bound(&self) -> f64 {
        let q = (self.c_eta - self.eta) as f64 / self.c_eta as f64;
        1.0 - q.powi(self.r as i32)
    }

    /// The per-experiment bound raised to the amplification count.
    pub fn amplified_bound(&self) -> f64 {
        self.per_experiment_bound().powf(self.m as f64)
    }

    /// SHA-256 of the canonical params file bytes; tables and wire sessions
    /// bind to it.
    pub fn digest(&self) -> [u8; 32] {
        self.digest
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest)
    }

    /// Canonical file rendering.
    pub fn render(&self) -> String {
        format!(
            "VPE-PARAMS v1\nmodulus={}\nd={}\neta={}\nceta={}\nr={}\nm={}\n",
            self.modulus.value(),
            self.d_input,
            self.eta,
            self.c_eta,
            self.r,
            self.m
        )
    }

    /// Strict parse of the params file format; `r` and `m` are re-derived
    /// and must match the stored values.
    pub fn parse(text: &str) -> Result<Self, ParamsError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| ParamsError::Parse("empty file".into()))?;
        if header != "VPE-PARAMS v1" {
            return Err(ParamsError::Parse(format!("bad header: {header:?}")));
        }
        let mut take = |key: &str| -> Result<u64, ParamsError> {
            let line = lines
                .next()
                .ok_or_else(|| ParamsError::Parse(format!("missing {key} line")))?;
            let value = line
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| ParamsError::Parse(format!("expected {key}=..., got {line:?}")))?;
            parse_decimal(value).ok_or_else(|| ParamsError::Parse(format!("bad {key} value {value:?}")))
        };
        let modulus = take("modulus")?;
        let d = take("d")?;
        let eta = take("eta")?;
        let c_eta = take("ceta")?;
        let r = take("r")?;
        let m = take("m")?;
        if lines.next().is_some() {
            return Err(ParamsError::Parse("trailing content".into()));
        }
        let eta = u32::try_from(eta).map_err(|_| ParamsError::Overflow)?;
        let c_eta = u32::try_from(c_eta).map_err(|_| ParamsError::Overflow)?;
        let params = ProtocolParams::derive(PrimeModulus::new(modulus)?, d, eta, c_eta)?;
        if params.r as u64 != r || params.m != m {
            return Err(ParamsError::Inconsistent(format!(
                "stored r={r}, m={m} but derivation gives r={}, m={}",
                params.r, params.m
            )));
        }
        Ok(params)
    }
}

/// Decimal with no sign and no leading zeros, the one integer syntax used
/// by every file and wire format in this crate.
pub(crate) fn parse_decimal(s: &str) -> Option<u64> {
    if s.is_empty() || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    if !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// The automatic parameter rule: `eta = max(2, round((log2 d)^omega))` and
/// `ceta` the smallest integer above `eta` with `ceta/eta >= c_target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSelector {
    omega: f64,
    c_num: u64,
    c_den: u64,
}

impl ParamSelector {
    pub fn new(omega: f64, c_num: u64, c_den: u64) -> Result<Self, ParamsError> {
        if omega.is_nan() || omega <= 0.0 || c_den == 0 || c_num <= c_den {
            return Err(ParamsError::Parse(format!(
                "selector requires omega > 0 and c_target > 1, got omega={omega}, c={c_num}/{c_den}"
            )));
        }
        Ok(ParamSelector { omega, c_num, c_den })
    }

    pub fn select_eta(&self, d_input: u64) -> Result<(u32, u32), ParamsError> {
        if d_input < 4 {
            return Err(ParamsError::DegreeTooSmallForSelector(d_input));
        }
        let eta = (d_input as f64).log2().powf(self.omega).round();
        let eta = if eta < 2.0 { 2 } else { eta as u64 };
        let eta = u32::try_from(eta).map_err(|_| ParamsError::Overflow)?;
        // Smallest integer strictly above eta with c_eta/eta >= c_target.
        let scaled = (eta as u64)
            .checked_mul(self.c_num)
            .ok_or(ParamsError::Overflow)?;
        let c_eta = scaled.div_ceil(self.c_den).max(eta as u64 + 1);
        let c_eta = u32::try_from(c_eta).map_err(|_| ParamsError::Overflow)?;
        Ok((eta, c_eta))
    }
}
