//! The initialization phase: building, storing and querying the lookup
//! table of all folding outcomes.
//!
//! The table holds one constant per challenge path `(b_1, ..., b_r)`: the
//! coefficient left after folding the padded input polynomial once per path
//! component. Entries are stored flat in lexicographic path order with
//! `b_1` most significant. The builder expands one level at a time and
//! drops the parent level as soon as its children are complete, so peak
//! memory stays within twice the widest level.


use crate::field::{FieldElement, FieldError, PrimeModulus};
use crate::params::{parse_decimal, ProtocolParams};
use crate::poly::{fold_slice, PolyError, Polynomial, ZTable};

/// Stored tables and coefficient trees are desk-scale artifacts; larger
/// parameterizations must query entries on demand instead.
pub const MAX_TABLE_ENTRIES: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("path has {got} components, expected {expected}")]
    PathWrongLength { expected: u32, got: usize },
    #[error("path component {b} out of range [0, {c_eta})")]
    PathOutOfRange { b: u32, c_eta: u32 },
    #[error("table digest does not match the supplied params")]
    DigestMismatch,
    #[error("table would hold {lambda} entries, over the {max} cap")]
    TooLarge { lambda: u128, max: u128 },
    #[error("polynomial does not fit the params: {0}")]
    ParamsMismatch(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("table parse error: {0}")]
    Parse(String),
}

/// Anything the verifier can resolve final-round constants against: a
/// stored [`LookupTable`] or an [`OnDemandTable`] that refolds per query.
pub trait TableSource {
    fn digest(&self) -> [u8; 32];
    fn entry(&self, path: &[u32]) -> Result<FieldElement, LookupError>;
}

/// The precomputed table of all `(c*eta)^r` folding outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    digest: [u8; 32],
    modulus: PrimeModulus,
    d_input: u64,
    eta: u32,
    c_eta: u32,
    r: u32,
    entries: Vec<FieldElement>,
}

/// Peak memory observed while building a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildStats {
    /// Largest number of coefficients alive at once.
    pub peak_live_coeffs: usize,
    /// Size of the widest tree level (the leaves, since c > 1).
    pub widest_level: usize,
}

impl LookupTable {
    pub fn build(
        f: &Polynomial,
        params: &ProtocolParams,
        ztable: &ZTable,
    ) -> Result<LookupTable, LookupError> {
        Ok(Self::build_with_stats(f, params, ztable)?.0)
    }

    /// Level-by-level expansion; parents are dropped once folded.
    pub fn build_with_stats(
        f: &Polynomial,
        params: &ProtocolParams,
        ztable: &ZTable,
    ) -> Result<(LookupTable, BuildStats), LookupError> {
        if params.lambda() > MAX_TABLE_ENTRIES {
            return Err(LookupError::TooLarge {
                lambda: params.lambda(),
                max: MAX_TABLE_ENTRIES,
            });
        }
        let mut prev = padded_coeffs(f, params)?;
        let mut widest = prev.len();
        let mut peak = prev.len();
        let mut width = prev.len();
        for _ in 0..params.r() {
            let next = expand_level(&prev, width, params, ztable);
            peak = peak.max(prev.len() + next.len());
            widest = widest.max(next.len());
            prev = next;
            width /= params.eta() as usize;
        }
        let table = LookupTable {
            digest: params.digest(),
            modulus: params.modulus(),
            d_input: params.d_input(),
            eta: params.eta(),
            c_eta: params.c_eta(),
            r: params.r(),
            entries: prev,
        };
        let stats = BuildStats {
            peak_live_coeffs: peak,
            widest_level: widest,
        };
        Ok((table, stats))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Flat index of a path, `b_1` most significant.
    fn index(&self, path: &[u32]) -> Result<usize, LookupError> {
        if path.len() != self.r as usize {
            return Err(LookupError::PathWrongLength {
                expected: self.r,
                got: path.len(),
            });
        }
        let mut idx = 0usize;
        for &b in path {
            if b >= self.c_eta {
                return Err(LookupError::PathOutOfRange { b, c_eta: self.c_eta });
            }
            idx = idx * self.c_eta as usize + b as usize;
        }
        Ok(idx)
    }

    /// Entry lookup that first re-checks the binding to `params`.
    pub fn entry_checked(
        &self,
        params: &ProtocolParams,
        path: &[u32],
    ) -> Result<FieldElement, LookupError> {
        if self.digest != params.digest() {
            return Err(LookupError::DigestMismatch);
        }
        self.entry(path)
    }

    /// Canonical file rendering.
    pub fn render(&self) -> String {
        let mut out = format!(
            "VPE-TABLE v1 modulus={} d={} eta={} ceta={} r={} digest={}\n",
            self.modulus.value(),
            self.d_input,
            self.eta,
            self.c_eta,
            self.r,
            hex::encode(self.digest)
        );
        for e in &self.entries {
            out.push_str(&e.value().to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<LookupTable, LookupError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| LookupError::Parse("empty file".into()))?;
        let mut parts = header.split(' ');
        if parts.next() != Some("VPE-TABLE") || parts.next() != Some("v1") {
            return Err(LookupError::Parse(format!("bad header: {header:?}")));
        }
        let mut field = |key: &str| -> Result<String, LookupError> {
            let tok = parts
                .next()
                .ok_or_else(|| LookupError::Parse(format!("missing {key}")))?;
            tok.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| LookupError::Parse(format!("bad {key} field {tok:?}")))
        };
        let dec = |s: String, key: &str| {
            parse_decimal(&s).ok_or_else(|| LookupError::Parse(format!("bad {key} value {s:?}")))
        };
        let modulus = dec(field("modulus")?, "modulus")?;
        let d_input = dec(field("d")?, "d")?;
        let eta = dec(field("eta")?, "eta")? as u32;
        let c_eta = dec(field("ceta")?, "ceta")? as u32;
        let r = dec(field("r")?, "r")? as u32;
        let digest_hex = field("digest")?;
        let digest: [u8; 32] = hex::decode(&digest_hex)
            .ok()
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| LookupError::Parse("bad digest".into()))?;
        let modulus = PrimeModulus::new(modulus)?;

        let lambda = (c_eta as u128)
            .checked_pow(r)
            .filter(|&l| l <= MAX_TABLE_ENTRIES)
            .ok_or(LookupError::TooLarge {
                lambda: u128::MAX,
                max: MAX_TABLE_ENTRIES,
            })?;
        let mut entries = Vec::with_capacity(lambda as usize);
        for line in lines {
            if entries.len() as u128 >= lambda {
                return Err(LookupError::Parse("more entries than lambda".into()));
            }
            let v = parse_decimal(line)
                .ok_or_else(|| LookupError::Parse(format!("bad entry {line:?}")))?;
            entries.push(modulus.try_element(v)?);
        }
        if (entries.len() as u128) < lambda {
            return Err(LookupError::Parse(format!(
                "expected {lambda} entries, found {}",
                entries.len()
            )));
        }
        Ok(LookupTable {
            digest,
            modulus,
            d_input,
            eta,
            c_eta,
            r,
            entries,
        })
    }
}

impl TableSource for LookupTable {
    fn digest(&self) -> [u8; 32] {
        self.digest
    }

    fn entry(&self, path: &[u32]) -> Result<FieldElement, LookupError> {
        Ok(self.entries[self.index(path)?])
    }
}

/// Folds `f` along one specific path, the defining computation of a table
/// entry. Used as the independent oracle for [`LookupTable::build`] and as
/// the backing of [`OnDemandTable`].
pub fn naive_entry(
    f: &Polynomial,
    params: &ProtocolParams,
    ztable: &ZTable,
    path: &[u32],
) -> Result<FieldElement, LookupError> {
    if path.len() != params.r() as usize {
        return Err(LookupError::PathWrongLength {
            expected: params.r(),
            got: path.len(),
        });
    }
    let mut cur = f.padded_to(params.d_pad() as usize).map_err(|e| {
        LookupError::ParamsMismatch(format!("cannot pad to eta^r = {}: {e}", params.d_pad()))
    })?;
    for &b in path {
        if b >= params.c_eta() {
            return Err(LookupError::PathOutOfRange { b, c_eta: params.c_eta() });
        }
        cur = cur.fold(b, ztable)?;
    }
    debug_assert_eq!(cur.len(), 1);
    Ok(cur.coeffs()[0])
}

/// A table handle that refolds the polynomial per query instead of storing
/// `(c*eta)^r` entries; used where the stored table would exceed
/// [`MAX_TABLE_ENTRIES`].
pub struct OnDemandTable<'a> {
    f: Polynomial,
    params: &'a ProtocolParams,
    ztable: &'a ZTable,
}

impl<'a> OnDemandTable<'a> {
    pub fn new(
        f: &Polynomial,
        params: &'a ProtocolParams,
        ztable: &'a ZTable,
    ) -> Result<Self, LookupError> {
        let f = padded_poly(f, params)?;
        Ok(OnDemandTable { f, params, ztable })
    }
}

impl TableSource for OnDemandTable<'_> {
    fn digest(&self) -> [u8; 32] {
        self.params.digest()
    }

    fn entry(&self, path: &[u32]) -> Result<FieldElement, LookupError> {
        naive_entry(&self.f, self.params, self.ztable, path)
    }
}

/// All intermediate coefficient vectors, kept per level: the prover-side
/// precomputation. Level `l` maps each path prefix of length `l` to the
/// coefficients of the correspondingly folded polynomial.
#[derive(Debug, Clone)]
pub struct CoefficientTree {
    c_eta: u32,
    d_pad: usize,
    eta: u32,
    levels: Vec<Vec<FieldElement>>,
}

impl CoefficientTree {
    pub fn build(
        f: &Polynomial,
        params: &ProtocolParams,
        ztable: &ZTable,
    ) -> Result<CoefficientTree, LookupError> {
        if params.lambda() > MAX_TABLE_ENTRIES {
            return Err(LookupError::TooLarge {
                lambda: params.lambda(),
                max: MAX_TABLE_ENTRIES,
            });
        }
        let mut levels = vec![padded_coeffs(f, params)?];
        let mut width = params.d_pad() as usize;
        for _ in 0..params.r() {
            let next = expand_level(levels.last().unwrap(), width, params, ztable);
            levels.push(next);
            width /= params.eta() as usize;
        }
        Ok(CoefficientTree {
            c_eta: params.c_eta(),
            d_pad: params.d_pad() as usize,
            eta: params.eta(),
            levels,
        })
    }

    /// Coefficients of the polynomial folded along `path`.
    pub fn node(&self, path: &[u32]) -> Result<&[FieldElement], LookupError> {
        let level = path.len();
        if level >= self.levels.len() {
            return Err(LookupError::PathWrongLength {
                expected: self.levels.len() as u32 - 1,
                got: level,
            });
        }
        let mut idx = 0usize;
        for &b in path {
            if b >= self.c_eta {
                return Err(LookupError::PathOutOfRange { b, c_eta: self.c_eta });
            }
            idx = idx * self.c_eta as usize + b as usize;
        }
        let width = self.d_pad / (self.eta as usize).pow(level as u32);
        Ok(&self.levels[level][idx * width..(idx + 1) * width])
    }

    /// The leaf level in lexicographic path order, i.e. the table entries.
    pub fn leaves(&self) -> &[FieldElement] {
        self.levels.last().unwrap()
    }
}

fn padded_poly(f: &Polynomial, params: &ProtocolParams) -> Result<Polynomial, LookupError> {
    if f.modulus() != params.modulus() {
        return Err(LookupError::ParamsMismatch(format!(
            "polynomial modulus {} vs params modulus {}",
            f.modulus(),
            params.modulus()
        )));
    }
    f.padded_to(params.d_pad() as usize).map_err(|e| {
        LookupError::ParamsMismatch(format!("cannot pad to eta^r = {}: {e}", params.d_pad()))
    })
}

fn padded_coeffs(f: &Polynomial, params: &ProtocolParams) -> Result<Vec<FieldElement>, LookupError> {
    Ok(padded_poly(f, params)?.coeffs().to_vec())
}

/// Folds every branch of one level under every challenge; children land in
/// lexicographic order because the new component is appended least
/// significant.
fn expand_level(
    prev: &[FieldElement],
    width: usize,
    params: &ProtocolParams,
    ztable: &ZTable,
) -> Vec<FieldElement> {
    let c_eta = params.c_eta();
    let eta = params.eta() as usize;
    let mut next = Vec::with_capacity(prev.len() / eta * c_eta as usize);
    for branch in prev.chunks_exact(width) {
        for b in 0..c_eta {
            let col = ztable.column(b).expect("b < c_eta");
            next.extend(fold_slice(branch, col));
        }
    }
    next
}
