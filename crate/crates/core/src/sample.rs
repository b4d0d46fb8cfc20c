//! Seed-stable uniform sampling helpers.
//!
//! Rejection sampling over the raw generator output keeps challenge and
//! coefficient draws identical across platforms and library versions, which
//! the golden-transcript tests rely on.

use rand_core::RngCore;

use crate::field::{FieldElement, PrimeModulus};

/// Uniform integer in `[0, n)`. `n` must be nonzero.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, n: u64) -> u64 {
    assert!(n > 0, "empty sampling range");
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % n;
        }
    }
}

/// Uniform field element.
pub fn random_element<R: RngCore + ?Sized>(rng: &mut R, modulus: PrimeModulus) -> FieldElement {
    modulus.element(uniform_below(rng, modulus.value()))
}
