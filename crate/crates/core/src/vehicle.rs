//! Prover and verifier roles: turning local observations into published
//! distinctness proofs and judging received ones.
//!
//! A published message carries the prover's own signed bundle, the signed
//! bundles of the k neighbors it proves distinctness from, and one
//! constant-size proof. Everything a verifier needs is re-derivable from
//! those parts plus the authority's public material; generation and
//! verification are pure functions over values, with no authority round
//! trips.

use thiserror::Error;

use crate::algebra::{derive_coefficients, Orthonym, QuizEquation};
use crate::authority::{verify_bundle, LeaPublicKey, LeaPublicMaterial, PseudonymBundle, BUNDLE_BYTES};
use crate::circuit::{synthesize_witness, CircuitError, DicStatement};
use crate::params::CircuitParams;
use crate::snark::{prove, verify, Proof, ProvingKey, SnarkError, VerifyingKey, PROOF_BYTES};

/// Magic prefix of the message wire encoding.
pub const MESSAGE_MAGIC: &[u8; 8] = b"PODIMSG1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VehicleError {
    #[error("neighbor bundle {0} failed signature verification")]
    InvalidNeighborSignature(usize),
    #[error("after dedup and self-exclusion: expected {expected} neighbors, got {got}")]
    NeighborCount { expected: usize, got: usize },
    #[error("malformed message encoding")]
    MalformedMessage,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Snark(#[from] SnarkError),
}

/// Why a message was accepted or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VerdictReason {
    Ok,
    BadOwnSignature,
    BadNeighborSignature(usize),
    BadProof,
    ParamsMismatch,
    MalformedMessage,
}

impl std::fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerdictReason::Ok => write!(f, "OK"),
            VerdictReason::BadOwnSignature => write!(f, "BadOwnSignature"),
            VerdictReason::BadNeighborSignature(j) => write!(f, "BadNeighborSignature({j})"),
            VerdictReason::BadProof => write!(f, "BadProof"),
            VerdictReason::ParamsMismatch => write!(f, "ParamsMismatch"),
            VerdictReason::MalformedMessage => write!(f, "MalformedMessage"),
        }
    }
}

/// Verification outcome; accepted exactly when the reason is OK.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerdictReport {
    accepted: bool,
    reason: VerdictReason,
}

impl VerdictReport {
    pub fn from_reason(reason: VerdictReason) -> Self {
        Self {
            accepted: reason == VerdictReason::Ok,
            reason,
        }
    }

    pub fn accepted(&self) -> bool {
        self.accepted
    }

    pub fn reason(&self) -> VerdictReason {
        self.reason
    }
}

/// One published distinctness claim: own bundle, k neighbor bundles in
/// ascending pseudonym order, and the proof.
///
/// Proof bytes stay raw until verification so that a mutated proof is judged
/// (as BadProof) rather than refused at decode time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PodiMessage {
    params: CircuitParams,
    own: PseudonymBundle,
    neighbors: Vec<PseudonymBundle>,
    proof_bytes: [u8; PROOF_BYTES],
}

impl PodiMessage {
    /// Assembles a message, normalizing the neighbor list: sorted by
    /// pseudonym id, duplicates collapsed, the own pseudonym dropped. The
    /// result must hold exactly `params.k()` neighbors.
    pub fn from_parts(
        params: CircuitParams,
        own: PseudonymBundle,
        neighbors: Vec<PseudonymBundle>,
        proof_bytes: [u8; PROOF_BYTES],
    ) -> Result<Self, VehicleError> {
        let mut neighbors = neighbors;
        neighbors.sort_by(|a, b| a.pseudonym.cmp(&b.pseudonym));
        neighbors.dedup_by(|a, b| a.pseudonym == b.pseudonym);
        neighbors.retain(|n| n.pseudonym != own.pseudonym);
        if neighbors.len() != params.k() as usize {
            return Err(VehicleError::NeighborCount {
                expected: params.k() as usize,
                got: neighbors.len(),
            });
        }
        Ok(Self {
            params,
            own,
            neighbors,
            proof_bytes,
        })
    }

    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn own(&self) -> &PseudonymBundle {
        &self.own
    }

    pub fn neighbors(&self) -> &[PseudonymBundle] {
        &self.neighbors
    }

    pub fn proof_bytes(&self) -> &[u8; PROOF_BYTES] {
        &self.proof_bytes
    }

    /// Encoded message length for a parameter tuple: header, own bundle,
    /// neighbor bundles, proof.
    pub fn encoded_len(params: CircuitParams) -> usize {
        16 + BUNDLE_BYTES * (params.k() as usize + 1) + PROOF_BYTES
    }
}

/// The quiz equation a bundle publicly determines.
pub fn bundle_equation(bundle: &PseudonymBundle, params: &CircuitParams) -> QuizEquation {
    QuizEquation {
        coeffs: derive_coefficients(&bundle.pseudonym, params),
        constant: bundle.constant,
        pseudonym: bundle.pseudonym,
    }
}

/// Produces a distinctness message for the observed neighbor bundles.
///
/// Each neighbor bundle is signature-checked before its equation enters the
/// statement. The neighbor list is normalized (sorted, deduplicated, self
/// excluded) and must then match the proving key's k exactly. Witness
/// synthesis enforces the criterion itself: a second own pseudonym among the
/// neighbors surfaces as [`CircuitError::SybilCollision`] and no proof is
/// emitted.
pub fn generate_podi(
    my_bundle: &PseudonymBundle,
    my_orthonym: &Orthonym,
    neighbor_bundles: &[PseudonymBundle],
    lea_key: &LeaPublicKey,
    proving_key: &ProvingKey,
    entropy: &[u8],
) -> Result<PodiMessage, VehicleError> {
    for (j, bundle) in neighbor_bundles.iter().enumerate() {
        if !verify_bundle(lea_key, bundle) {
            return Err(VehicleError::InvalidNeighborSignature(j));
        }
    }
    let params = proving_key.params();
    // Normalization happens in from_parts; build with a placeholder proof,
    // then fill it from the witness over the normalized order.
    let mut msg = PodiMessage::from_parts(
        params,
        my_bundle.clone(),
        neighbor_bundles.to_vec(),
        [0u8; PROOF_BYTES],
    )?;

    let statement = DicStatement::new(
        params,
        bundle_equation(&msg.own, &params),
        msg.neighbors
            .iter()
            .map(|n| bundle_equation(n, &params))
            .collect(),
    )?;
    let witness = synthesize_witness(&statement, my_orthonym)?;
    let proof = prove(proving_key, &statement.instance_vector(), &witness, entropy)?;
    msg.proof_bytes = proof.to_bytes();
    Ok(msg)
}

/// Judges a received message: bundle signatures first, then the proof
/// against the instance re-derived from the pseudonyms and signed constants.
/// Total: every failure is a reason, never an error.
pub fn verify_podi(
    msg: &PodiMessage,
    lea_key: &LeaPublicKey,
    verifying_key: &VerifyingKey,
) -> VerdictReport {
    let reason = verdict_reason(msg, lea_key, verifying_key);
    VerdictReport::from_reason(reason)
}

fn verdict_reason(
    msg: &PodiMessage,
    lea_key: &LeaPublicKey,
    verifying_key: &VerifyingKey,
) -> VerdictReason {
    if msg.params != verifying_key.params() {
        return VerdictReason::ParamsMismatch;
    }
    if !verify_bundle(lea_key, &msg.own) {
        return VerdictReason::BadOwnSignature;
    }
    for (j, bundle) in msg.neighbors.iter().enumerate() {
        if !verify_bundle(lea_key, bundle) {
            return VerdictReason::BadNeighborSignature(j);
        }
    }
    let statement = match DicStatement::new(
        msg.params,
        bundle_equation(&msg.own, &msg.params),
        msg.neighbors
            .iter()
            .map(|n| bundle_equation(n, &msg.params))
            .collect(),
    ) {
        Ok(st) => st,
        Err(_) => return VerdictReason::MalformedMessage,
    };
    let proof = match Proof::from_bytes(&msg.proof_bytes) {
        Ok(p) => p,
        Err(_) => return VerdictReason::BadProof,
    };
    if verify(verifying_key, &statement.instance_vector(), &proof) {
        VerdictReason::Ok
    } else {
        VerdictReason::BadProof
    }
}

/// Looks up the verifying key for the message's parameters in the published
/// authority material, then judges the message.
pub fn verify_podi_with_material(msg: &PodiMessage, material: &LeaPublicMaterial) -> VerdictReport {
    match material.vk_for(msg.params) {
        Some(vk) => verify_podi(msg, material.public_key(), vk),
        None => VerdictReport::from_reason(VerdictReason::ParamsMismatch),
    }
}

/// Canonical wire encoding: magic, params, own bundle, neighbor count,
/// neighbor bundles in ascending pseudonym order, proof.
pub fn encode_podi(msg: &PodiMessage) -> Vec<u8> {
    let mut out = Vec::with_capacity(PodiMessage::encoded_len(msg.params));
    out.extend_from_slice(MESSAGE_MAGIC);
    out.extend_from_slice(&msg.params.nx().to_be_bytes());
    out.extend_from_slice(&msg.params.np().to_be_bytes());
    out.extend_from_slice(&msg.params.k().to_be_bytes());
    out.extend_from_slice(&msg.own.to_bytes());
    out.extend_from_slice(&(msg.neighbors.len() as u16).to_be_bytes());
    for n in &msg.neighbors {
        out.extend_from_slice(&n.to_bytes());
    }
    out.extend_from_slice(&msg.proof_bytes);
    out
}

/// Strict decode of the wire encoding. Rejects truncation, trailing bytes,
/// bad magic, a neighbor count disagreeing with the parameter k, unsorted or
/// duplicate neighbors, and a neighbor repeating the own pseudonym.
pub fn decode_podi(bytes: &[u8]) -> Result<PodiMessage, VehicleError> {
    const MALFORMED: VehicleError = VehicleError::MalformedMessage;
    if bytes.len() < 16 || &bytes[..8] != MESSAGE_MAGIC {
        return Err(MALFORMED);
    }
    let nx = u16::from_be_bytes([bytes[8], bytes[9]]);
    let np = u16::from_be_bytes([bytes[10], bytes[11]]);
    let k = u16::from_be_bytes([bytes[12], bytes[13]]);
    let params = CircuitParams::new(nx, np, k).map_err(|_| MALFORMED)?;
    if bytes.len() != PodiMessage::encoded_len(params) {
        return Err(MALFORMED);
    }
    let mut rest = &bytes[14..];
    let own = PseudonymBundle::from_bytes(&rest[..BUNDLE_BYTES]).map_err(|_| MALFORMED)?;
    rest = &rest[BUNDLE_BYTES..];
    let count = u16::from_be_bytes([rest[0], rest[1]]);
    rest = &rest[2..];
    if count != params.k() {
        return Err(MALFORMED);
    }
    let mut neighbors = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let bundle = PseudonymBundle::from_bytes(&rest[..BUNDLE_BYTES]).map_err(|_| MALFORMED)?;
        if bundle.pseudonym == own.pseudonym {
            return Err(MALFORMED);
        }
        if neighbors
            .last()
            .is_some_and(|prev: &PseudonymBundle| prev.pseudonym >= bundle.pseudonym)
        {
            return Err(MALFORMED);
        }
        neighbors.push(bundle);
        rest = &rest[BUNDLE_BYTES..];
    }
    let proof_bytes: [u8; PROOF_BYTES] = rest.try_into().map_err(|_| MALFORMED)?;
    Ok(PodiMessage {
        params,
        own,
        neighbors,
        proof_bytes,
    })
}

/// Decode-then-verify; undecodable bytes judge as MalformedMessage.
pub fn verify_podi_bytes(
    bytes: &[u8],
    lea_key: &LeaPublicKey,
    verifying_key: &VerifyingKey,
) -> VerdictReport {
    match decode_podi(bytes) {
        Ok(msg) => verify_podi(&msg, lea_key, verifying_key),
        Err(_) => VerdictReport::from_reason(VerdictReason::MalformedMessage),
    }
}

/// Decode-then-verify against published authority material, picking the
/// verifying key by the message's own parameter header.
pub fn verify_podi_bytes_with_material(
    bytes: &[u8],
    material: &LeaPublicMaterial,
) -> VerdictReport {
    match decode_podi(bytes) {
        Ok(msg) => verify_podi_with_material(&msg, material),
        Err(_) => VerdictReport::from_reason(VerdictReason::MalformedMessage),
    }
}
