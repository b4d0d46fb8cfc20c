//! Interactive verifiable polynomial evaluation over prime fields.
//!
//! A computationally limited verifier delegates the evaluation of
//! `f(x) = a_0 + a_1 x + ... + a_{d-1} x^{d-1}` to an untrusted prover.
//! During a one-time initialization the verifier folds `f` down every
//! possible challenge path and stores the resulting constants in a lookup
//! table. At evaluation time the prover's claim is checked through `r`
//! rounds of degree reduction: each round shrinks the polynomial by a
//! factor `eta` via Lagrange-weighted recombination of its coefficient
//! stripes, and a random challenge picks which recombination the next
//! round must be consistent with. After the last round the surviving
//! constant is compared against the table. A dishonest claim survives a
//! single pass with probability at most `1 - (1 - 1/c)^r`, and running
//! `m` independent passes drives the overall cheating probability below
//! `1/2` with no assumptions on the prover's computational power.
//!
//! Crate layout mirrors the protocol phases:
//!
//! * [`field`] — prime-field arithmetic with a runtime-configurable modulus
//! * [`params`] — the public parameterization `(d, eta, c*eta, r, m)`
//! * [`poly`] — coefficient vectors, the Lagrange table `Z`, striping and folding
//! * [`lookup`] — initialization: building, storing and querying the table
//! * [`protocol`] — the interactive evaluation phase, honest and adversarial provers
//! * [`multivar`] — the n-variate extension by sequential variable reduction
//! * [`sim`] — Monte-Carlo soundness measurement and operation-count benchmarks
//! * [`count`] — thread-local field-operation counters behind all of the above

pub mod count;
pub mod field;
pub mod lookup;
pub mod multivar;
pub mod params;
pub mod poly;
pub mod protocol;
pub mod sample;
pub mod sim;

pub use field::{FieldElement, FieldError, PrimeModulus};
pub use params::{ParamSelector, ParamsError, ProtocolParams};
pub use poly::{PolyError, Polynomial, ZTable};
