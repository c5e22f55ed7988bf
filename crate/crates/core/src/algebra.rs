//! Field-level algebra of quiz equations.
//!
//! All equation arithmetic lives in the scalar field of BN254: it is the only
//! arithmetic the proving circuit can express, so the "integer" equations are
//! fixed to their mod-r semantics throughout. Coefficient vectors are hashed
//! from pseudonym ids and never transmitted; only the signed constant term
//! travels.

use ark_bn254::Fr;
use ark_ff::{BigInteger, Field, PrimeField, Zero};
use rand::RngCore;
use sha2::{Digest, Sha512};
use thiserror::Error;

use crate::drbg::rng_from_entropy;
use crate::params::CircuitParams;

/// Domain tag for coefficient derivation.
const COEFF_DST: &[u8] = b"zk-podi/coeff/v1";
/// Domain tag for orthonym sampling.
const ORTHONYM_DST: &str = "zk-podi/orthonym/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-canonical field element: value >= modulus")]
    NonCanonicalFieldElement,
    #[error("byte length {0} is not a multiple of 32")]
    BadEncodingLength(usize),
}

/// An element of the BN254 scalar field, always in canonical reduced form.
///
/// Serializes as 32 big-endian bytes; decoding rejects any encoding that is
/// not strictly below the field modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement(Fr);

impl FieldElement {
    pub const BYTES: usize = 32;

    pub fn zero() -> Self {
        Self(Fr::zero())
    }

    pub fn one() -> Self {
        Self(Fr::from(1u64))
    }

    pub fn from_u64(v: u64) -> Self {
        Self(Fr::from(v))
    }

    /// Wide reduction of an arbitrary big-endian byte string mod r. With 64
    /// input bytes the bias is on the order of 2^-258.
    pub fn from_wide_bytes(bytes: &[u8]) -> Self {
        Self(Fr::from_be_bytes_mod_order(bytes))
    }

    /// Canonical 32-byte big-endian encoding.
    pub fn to_bytes(self) -> [u8; 32] {
        let v = self.0.into_bigint().to_bytes_be();
        debug_assert_eq!(v.len(), 32);
        let mut out = [0u8; 32];
        out[32 - v.len()..].copy_from_slice(&v);
        out
    }

    /// Strict decode: rejects values >= r.
    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, AlgebraError> {
        if bytes.as_slice() >= modulus_be_bytes().as_slice() {
            return Err(AlgebraError::NonCanonicalFieldElement);
        }
        Ok(Self(Fr::from_be_bytes_mod_order(bytes)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }

    pub fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }

    pub fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }

    pub fn square(self) -> Self {
        Self(self.0.square())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        self.0.inverse().map(Self)
    }

    /// x^np for np a power of 2, by repeated squaring.
    pub fn pow2k(self, log2_np: u32) -> Self {
        let mut acc = self.0;
        for _ in 0..log2_np {
            acc.square_in_place();
        }
        Self(acc)
    }

    pub fn to_hex(self) -> String {
        hex::encode(self.to_bytes())
    }

    pub(crate) fn fr(self) -> Fr {
        self.0
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Big-endian bytes of the scalar-field modulus, for strict canonicity
/// checks. Lexicographic comparison of equal-length BE strings is numeric
/// comparison.
fn modulus_be_bytes() -> &'static [u8; 32] {
    use std::sync::OnceLock;
    static MODULUS: OnceLock<[u8; 32]> = OnceLock::new();
    MODULUS.get_or_init(|| {
        let v = Fr::MODULUS.to_bytes_be();
        let mut out = [0u8; 32];
        out.copy_from_slice(&v);
        out
    })
}

/// The secret solution vector: the vehicle's permanent hidden identity.
///
/// Never appears in any public artifact; the only sanctioned encoding is the
/// owner-private orthonym file.
#[derive(Clone, PartialEq, Eq)]
pub struct Orthonym {
    elements: Vec<FieldElement>,
}

impl Orthonym {
    pub fn new(elements: Vec<FieldElement>) -> Self {
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[FieldElement] {
        &self.elements
    }

    /// nx * 32 bytes, big-endian per element. Only the private orthonym file
    /// may contain this encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.elements.len() * FieldElement::BYTES);
        for e in &self.elements {
            out.extend_from_slice(&e.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
        if bytes.len() % FieldElement::BYTES != 0 {
            return Err(AlgebraError::BadEncodingLength(bytes.len()));
        }
        let elements = bytes
            .chunks_exact(FieldElement::BYTES)
            .map(|c| FieldElement::from_bytes(c.try_into().expect("chunk is 32 bytes")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { elements })
    }
}

// Redacted: orthonyms must not leak through logs or assertion output.
impl std::fmt::Debug for Orthonym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Orthonym({} elements, redacted)", self.elements.len())
    }
}

/// Opaque 32-byte handle standing in for an issued pseudonym certificate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PseudonymId([u8; 32]);

impl PseudonymId {
    pub const BYTES: usize = 32;

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn try_from_slice(bytes: &[u8]) -> Result<Self, AlgebraError> {
        let arr: [u8; 32] = bytes.try_into().map_err(|_| AlgebraError::DimensionMismatch {
            expected: Self::BYTES,
            got: bytes.len(),
        })?;
        Ok(Self(arr))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn random(rng: &mut impl RngCore) -> Self {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl std::fmt::Debug for PseudonymId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PseudonymId({}..)", &self.to_hex()[..8])
    }
}

impl std::fmt::Display for PseudonymId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// One quiz equation `sum_i coeffs[i] * x_i^np = constant`, the public face
/// of a pseudonym. Coefficients are a pure function of (pseudonym, params),
/// so holders of the id can reproduce them; the constant is fixed at issue
/// time so the owner's orthonym solves the equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuizEquation {
    pub coeffs: Vec<FieldElement>,
    pub constant: FieldElement,
    pub pseudonym: PseudonymId,
}

/// Hashes a pseudonym id to its `nx` nonzero coefficients.
///
/// Coefficient `i` is the wide reduction of `SHA-512(dst || id || i_be16 ||
/// ctr_u8)` where `ctr` starts at 0 and increments until the reduction is
/// nonzero (a zero coefficient would drop an unknown from the equation).
pub fn derive_coefficients(pseudonym: &PseudonymId, params: &CircuitParams) -> Vec<FieldElement> {
    (0..params.nx())
        .map(|i| {
            let mut ctr = 0u8;
            loop {
                let mut hasher = Sha512::new();
                hasher.update(COEFF_DST);
                hasher.update(pseudonym.as_bytes());
                hasher.update(i.to_be_bytes());
                hasher.update([ctr]);
                let coeff = FieldElement::from_wide_bytes(&hasher.finalize());
                if !coeff.is_zero() {
                    return coeff;
                }
                ctr = ctr.checked_add(1).expect("2^256/r zero draws in a row");
            }
        })
        .collect()
}

/// Evaluates `sum_i coeffs[i] * s_i^np` in the field.
pub fn evaluate_form(
    coeffs: &[FieldElement],
    s: &Orthonym,
    np: u16,
) -> Result<FieldElement, AlgebraError> {
    if coeffs.len() != s.len() {
        return Err(AlgebraError::DimensionMismatch {
            expected: coeffs.len(),
            got: s.len(),
        });
    }
    debug_assert!(np >= 2 && np.is_power_of_two());
    let log2_np = np.trailing_zeros();
    let mut acc = FieldElement::zero();
    for (c, x) in coeffs.iter().zip(s.elements()) {
        acc = acc.add(c.mul(x.pow2k(log2_np)));
    }
    Ok(acc)
}

/// Builds the quiz equation for `pseudonym` with `s` as a solution:
/// coefficients are derived from the id, the constant term is the form
/// evaluated at `s`.
pub fn make_quiz_equation(
    pseudonym: &PseudonymId,
    s: &Orthonym,
    params: &CircuitParams,
) -> Result<QuizEquation, AlgebraError> {
    if s.len() != params.nx() as usize {
        return Err(AlgebraError::DimensionMismatch {
            expected: params.nx() as usize,
            got: s.len(),
        });
    }
    let coeffs = derive_coefficients(pseudonym, params);
    let constant = evaluate_form(&coeffs, s, params.np())?;
    Ok(QuizEquation {
        coeffs,
        constant,
        pseudonym: *pseudonym,
    })
}

/// True iff `s` solves the equation.
pub fn check_solution(eq: &QuizEquation, s: &Orthonym, np: u16) -> Result<bool, AlgebraError> {
    Ok(evaluate_form(&eq.coeffs, s, np)? == eq.constant)
}

/// Samples a fresh orthonym of `params.nx()` uniform field elements from the
/// given entropy. Deterministic for a fixed entropy string.
pub fn sample_orthonym(params: &CircuitParams, entropy: &[u8]) -> Orthonym {
    let mut rng = rng_from_entropy(ORTHONYM_DST, entropy);
    let elements = (0..params.nx())
        .map(|_| {
            let mut wide = [0u8; 64];
            rng.fill_bytes(&mut wide);
            FieldElement::from_wide_bytes(&wide)
        })
        .collect();
    Orthonym::new(elements)
}
