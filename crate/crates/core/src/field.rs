//! Prime-field arithmetic with a runtime-configurable modulus.
//!
//! Every value in the protocol is a [`FieldElement`]: a canonical
//! representative in `[0, p)` tagged with its [`PrimeModulus`]. Elements of
//! different fields never mix; the checked operations report
//! [`FieldError::ModulusMismatch`] and the operator impls panic, since a
//! mix-up inside the protocol is a programming error rather than bad input.
//!
//! Elements serialize as plain decimal ASCII integers in every file and
//! wire format of this crate.

use std::fmt;

use crate::count;

/// Largest Mersenne prime below 2^64; the default field for the CLI.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    InvalidModulus(u64),
    #[error("operands belong to different fields ({0} vs {1})")]
    ModulusMismatch(u64, u64),
    #[error("zero has no multiplicative inverse")]
    NotInvertible,
    #[error("{0} is not a canonical representative modulo {1}")]
    NotCanonical(u64, u64),
}

/// An odd prime `p < 2^64`, verified at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    /// Checks primality with the deterministic Miller-Rabin witness set for
    /// 64-bit integers and rejects `2`, so division by nonzero elements and
    /// distinct embeddings `0..ceta` are always available downstream.
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p < 3 || p.is_multiple_of(2) || !is_prime_u64(p) {
            return Err(FieldError::InvalidModulus(p));
        }
        Ok(PrimeModulus(p))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Embeds an arbitrary integer by reduction mod `p`.
    pub fn element(self, v: u64) -> FieldElement {
        FieldElement {
            value: v % self.0,
            modulus: self,
        }
    }

    /// Accepts only canonical representatives, for trust boundaries such as
    /// file and wire parsing.
    pub fn try_element(self, v: u64) -> Result<FieldElement, FieldError> {
        if v < self.0 {
            Ok(FieldElement {
                value: v,
                modulus: self,
            })
        } else {
            Err(FieldError::NotCanonical(v, self.0))
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A canonical representative of the field `Z/pZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

impl FieldElement {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check_same(self, other: FieldElement) -> Result<(), FieldError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(FieldError::ModulusMismatch(
                self.modulus.0,
                other.modulus.0,
            ))
        }
    }

    fn add_raw(self, rhs: FieldElement) -> FieldElement {
        count::record_add();
        let p = self.modulus.0;
        let (sum, carry) = self.value.overflowing_add(rhs.value);
        let value = if carry || sum >= p { sum.wrapping_sub(p) } else { sum };
        FieldElement { value, modulus: self.modulus }
    }

    fn sub_raw(self, rhs: FieldElement) -> FieldElement {
        count::record_add();
        let p = self.modulus.0;
        let value = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + (p - rhs.value)
        };
        FieldElement { value, modulus: self.modulus }
    }

    fn mul_raw(self, rhs: FieldElement) -> FieldElement {
        count::record_mul();
        let p = self.modulus.0 as u128;
        let value = ((self.value as u128 * rhs.value as u128) % p) as u64;
        FieldElement { value, modulus: self.modulus }
    }

    pub fn try_add(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        self.check_same(rhs)?;
        Ok(self.add_raw(rhs))
    }

    pub fn try_sub(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        self.check_same(rhs)?;
        Ok(self.sub_raw(rhs))
    }

    pub fn try_mul(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        self.check_same(rhs)?;
        Ok(self.mul_raw(rhs))
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::NotInvertible);
        }
        let p = self.modulus.0 as i128;
        let (mut r0, mut r1) = (p, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        let value = t0.rem_euclid(p) as u64;
        Ok(FieldElement { value, modulus: self.modulus })
    }

    /// Square-and-multiply exponentiation with the convention `0^0 = 1`,
    /// which keeps the round check `sum_s x^s * v_s` total at `x = 0`.
    pub fn pow(self, mut e: u64) -> FieldElement {
        let mut acc = self.modulus.one();
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_raw(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_raw(base);
            }
        }
        acc
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $raw:ident) => {
        impl std::ops::$trait for FieldElement {
            type Output = FieldElement;
            /// Panics when the operands belong to different fields.
            fn $method(self, rhs: FieldElement) -> FieldElement {
                assert_eq!(
                    self.modulus, rhs.modulus,
                    "field elements from different moduli"
                );
                self.$raw(rhs)
            }
        }
    };
}

field_binop!(Add, add, add_raw);
field_binop!(Sub, sub, sub_raw);
field_binop!(Mul, mul, mul_raw);

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.modulus.zero() - self
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit integers; the witness set
/// 2..=37 is known to be exact below 3.3e24.
fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for w in WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for w in WITNESSES {
        let mut x = pow_mod(w, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
