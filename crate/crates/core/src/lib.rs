//! Sybil-resistant distinct-identity proofs for pseudonymous vehicle networks.
//!
//! A vehicle holds a secret *orthonym* `s` (a vector of field elements) and a
//! set of authority-issued pseudonyms. Each pseudonym determines a *quiz
//! equation* `F(x) = 0` whose coefficients are hashed from the pseudonym id
//! and whose signed constant term is fixed so that `F(s) = 0`. To show that
//! two locally observed pseudonyms belong to different vehicles, the owner of
//! one proves in zero knowledge that it knows `s` with
//!
//! ```text
//! F(s) = 0          (it owns its current pseudonym)
//! G_j(s) != 0       (it does not own any observed neighbor pseudonym)
//! ```
//!
//! the *distinct identity criterion*. The conjunction is compiled to a rank-1
//! constraint system and proven with Groth16 over BN254, so the published
//! message is a constant 128-byte proof plus the signed pseudonym bundles.
//!
//! Module map:
//! - [`algebra`]: field arithmetic, orthonyms, coefficient derivation, quiz
//!   equations.
//! - [`circuit`]: the constraint system for the criterion and witness
//!   synthesis.
//! - [`snark`]: keygen / prove / verify plus canonical serialization.
//! - [`authority`]: the issuing authority (signing keys, bundles, key files).
//! - [`vehicle`]: prover/verifier roles and the wire format.
//! - [`sim`]: deterministic multi-vehicle attack scenarios.

pub mod algebra;
pub mod authority;
pub mod circuit;
mod drbg;
pub mod params;
pub mod sim;
pub mod snark;
pub mod vehicle;

pub use algebra::{FieldElement, Orthonym, PseudonymId, QuizEquation};
pub use authority::{LeaPublicKey, LeaState, PseudonymBundle};
pub use circuit::{DicConstraintSystem, DicStatement, WitnessAssignment};
pub use params::CircuitParams;
pub use snark::{Proof, ProvingKey, VerifyingKey};
pub use vehicle::{PodiMessage, VerdictReason, VerdictReport};
