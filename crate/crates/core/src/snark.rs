//! Proving backend: keygen/prove/verify over the criterion circuit.
//!
//! Uses Groth16 over BN254, which gives a constant 128-byte compressed proof
//! (two G1 points and one G2 point) regardless of circuit size, at the cost
//! of a circuit-specific trusted setup. Keys are bound to one parameter
//! tuple; a verifying key prepares its pairing material once at construction
//! so repeated verification stays cheap.
//!
//! All randomized operations take caller-supplied entropy and are
//! deterministic for a fixed entropy string.

use ark_bn254::{Bn254, Fr, G1Projective, G2Projective};
use ark_ec::CurveGroup;
use ark_groth16::{prepare_verifying_key, Groth16, PreparedVerifyingKey};
use ark_relations::r1cs::{
    ConstraintSynthesizer, ConstraintSystemRef, LinearCombination, SynthesisError, Variable,
};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use ark_snark::SNARK;
use ark_std::UniformRand;
use thiserror::Error;

use crate::circuit::{build_circuit, DicConstraintSystem, LinComb, Wire, WitnessAssignment};
use crate::drbg::rng_from_entropy;
use crate::params::{CircuitParams, ParamsError};
use crate::FieldElement;

/// Magic prefix of key and proof files.
pub const FILE_MAGIC: &[u8; 7] = b"ZKPODI1";
/// Compressed proof encoding length: G1 + G2 + G1 points.
pub const PROOF_BYTES: usize = 128;

const KEYGEN_DST: &str = "zk-podi/keygen/v1";
const PROVE_DST: &str = "zk-podi/prove/v1";
const GARBAGE_DST: &str = "zk-podi/garbage-proof/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SnarkError {
    #[error("witness does not satisfy the circuit")]
    UnsatisfiedWitness,
    #[error("key is for params {key}, operation supplied {got}")]
    ParamsMismatch { key: CircuitParams, got: CircuitParams },
    #[error("instance length: expected {expected}, got {got}")]
    BadInstanceLength { expected: usize, got: usize },
    #[error("encoded buffer has the wrong length")]
    BadLength,
    #[error("bad file magic")]
    BadMagic,
    #[error("non-canonical or off-curve group encoding")]
    BadPointEncoding,
    #[error("invalid parameters in header: {0}")]
    Params(#[from] ParamsError),
    #[error("proving backend failure: {0}")]
    Backend(String),
}

impl From<SynthesisError> for SnarkError {
    fn from(e: SynthesisError) -> Self {
        SnarkError::Backend(e.to_string())
    }
}

/// Adapts the criterion constraint system to the backend's synthesis
/// interface. Instance and witness values are absent during setup.
struct DicSynthesizer<'a> {
    cs: &'a DicConstraintSystem,
    instance: Option<Vec<Fr>>,
    witness: Option<Vec<Fr>>,
}

impl ConstraintSynthesizer<Fr> for DicSynthesizer<'_> {
    fn generate_constraints(self, cs: ConstraintSystemRef<Fr>) -> Result<(), SynthesisError> {
        let mut inputs = Vec::with_capacity(self.cs.num_instance());
        for i in 0..self.cs.num_instance() {
            let v = self.instance.as_ref().map(|v| v[i]);
            inputs.push(cs.new_input_variable(|| v.ok_or(SynthesisError::AssignmentMissing))?);
        }
        let mut wits = Vec::with_capacity(self.cs.num_witness());
        for i in 0..self.cs.num_witness() {
            let v = self.witness.as_ref().map(|v| v[i]);
            wits.push(cs.new_witness_variable(|| v.ok_or(SynthesisError::AssignmentMissing))?);
        }
        let map = |lc: &LinComb| -> LinearCombination<Fr> {
            LinearCombination(
                lc.terms()
                    .iter()
                    .map(|(coeff, wire)| {
                        let var = match wire {
                            Wire::One => Variable::One,
                            Wire::Instance(i) => inputs[*i],
                            Wire::Witness(i) => wits[*i],
                        };
                        (coeff.fr(), var)
                    })
                    .collect(),
            )
        };
        for c in self.cs.constraints() {
            cs.enforce_constraint(map(&c.a), map(&c.b), map(&c.c))?;
        }
        Ok(())
    }
}

/// Proving key bound to one parameter tuple.
#[derive(Clone)]
pub struct ProvingKey {
    params: CircuitParams,
    pk: ark_groth16::ProvingKey<Bn254>,
}

/// Verifying key bound to one parameter tuple. Holds the prepared pairing
/// material; only the plain key is serialized.
#[derive(Clone)]
pub struct VerifyingKey {
    params: CircuitParams,
    vk: ark_groth16::VerifyingKey<Bn254>,
    pvk: PreparedVerifyingKey<Bn254>,
}

/// A constant-size proof: compressed G1, G2, G1 points.
#[derive(Clone, Debug, PartialEq)]
pub struct Proof(ark_groth16::Proof<Bn254>);

/// Runs the circuit-specific trusted setup for one constraint system.
pub fn keygen(
    cs: &DicConstraintSystem,
    entropy: &[u8],
) -> Result<(ProvingKey, VerifyingKey), SnarkError> {
    let mut rng = rng_from_entropy(KEYGEN_DST, entropy);
    let synth = DicSynthesizer {
        cs,
        instance: None,
        witness: None,
    };
    let (pk, vk) = Groth16::<Bn254>::circuit_specific_setup(synth, &mut rng)?;
    let params = cs.params();
    Ok((
        ProvingKey { params, pk },
        VerifyingKey::from_plain(params, vk),
    ))
}

/// Produces a proof for (instance, witness). The witness is re-checked
/// against the circuit first: an unsatisfying witness is an error, never a
/// garbage proof.
pub fn prove(
    pk: &ProvingKey,
    instance: &[FieldElement],
    witness: &WitnessAssignment,
    entropy: &[u8],
) -> Result<Proof, SnarkError> {
    if witness.params() != pk.params {
        return Err(SnarkError::ParamsMismatch {
            key: pk.params,
            got: witness.params(),
        });
    }
    if instance.len() != pk.params.instance_len() {
        return Err(SnarkError::BadInstanceLength {
            expected: pk.params.instance_len(),
            got: instance.len(),
        });
    }
    let cs = build_circuit(pk.params);
    if !cs.is_satisfied(instance, witness.values()) {
        return Err(SnarkError::UnsatisfiedWitness);
    }
    let synth = DicSynthesizer {
        cs: &cs,
        instance: Some(instance.iter().map(|x| x.fr()).collect()),
        witness: Some(witness.values().iter().map(|x| x.fr()).collect()),
    };
    let mut rng = rng_from_entropy(PROVE_DST, entropy);
    let proof = Groth16::<Bn254>::prove(&pk.pk, synth, &mut rng)?;
    Ok(Proof(proof))
}

/// Checks a proof against an instance. Total: any mismatch, wrong length, or
/// backend failure verifies as false rather than raising.
pub fn verify(vk: &VerifyingKey, instance: &[FieldElement], proof: &Proof) -> bool {
    if instance.len() != vk.params.instance_len() {
        return false;
    }
    let inputs: Vec<Fr> = instance.iter().map(|x| x.fr()).collect();
    Groth16::<Bn254>::verify_with_processed_vk(&vk.pvk, &inputs, &proof.0).unwrap_or(false)
}

impl ProvingKey {
    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = file_header(self.params);
        self.pk
            .serialize_compressed(&mut out)
            .expect("serializing to Vec cannot fail");
        out
    }

    /// Key material is bulky and locally produced, so point validation is
    /// skipped on load; proofs and verifying keys stay fully validated.
    pub fn from_file_bytes(bytes: &[u8]) -> Result<Self, SnarkError> {
        let (params, payload) = parse_file_header(bytes)?;
        let pk = ark_groth16::ProvingKey::deserialize_compressed_unchecked(payload)
            .map_err(|_| SnarkError::BadPointEncoding)?;
        Ok(Self { params, pk })
    }
}

impl VerifyingKey {
    fn from_plain(params: CircuitParams, vk: ark_groth16::VerifyingKey<Bn254>) -> Self {
        let pvk = prepare_verifying_key(&vk);
        Self { params, vk, pvk }
    }

    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = file_header(self.params);
        self.vk
            .serialize_compressed(&mut out)
            .expect("serializing to Vec cannot fail");
        out
    }

    pub fn from_file_bytes(bytes: &[u8]) -> Result<Self, SnarkError> {
        let (params, payload) = parse_file_header(bytes)?;
        let vk = ark_groth16::VerifyingKey::deserialize_compressed(payload)
            .map_err(|_| SnarkError::BadPointEncoding)?;
        Ok(Self::from_plain(params, vk))
    }

    /// Plain compressed key without the file header, for embedding in other
    /// containers.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.vk
            .serialize_compressed(&mut out)
            .expect("serializing to Vec cannot fail");
        out
    }

    pub fn from_bytes(params: CircuitParams, bytes: &[u8]) -> Result<Self, SnarkError> {
        let vk = ark_groth16::VerifyingKey::deserialize_compressed(bytes)
            .map_err(|_| SnarkError::BadPointEncoding)?;
        Ok(Self::from_plain(params, vk))
    }
}

impl Proof {
    /// Compressed 128-byte encoding.
    pub fn to_bytes(&self) -> [u8; PROOF_BYTES] {
        let mut out = Vec::with_capacity(PROOF_BYTES);
        self.0
            .serialize_compressed(&mut out)
            .expect("serializing to Vec cannot fail");
        let mut arr = [0u8; PROOF_BYTES];
        arr.copy_from_slice(&out);
        arr
    }

    /// Strict decode with on-curve and subgroup validation.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnarkError> {
        if bytes.len() != PROOF_BYTES {
            return Err(SnarkError::BadLength);
        }
        let proof = ark_groth16::Proof::deserialize_compressed(bytes)
            .map_err(|_| SnarkError::BadPointEncoding)?;
        Ok(Self(proof))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn to_file_bytes(&self, params: CircuitParams) -> Vec<u8> {
        let mut out = file_header(params);
        out.extend_from_slice(&self.to_bytes());
        out
    }

    pub fn from_file_bytes(bytes: &[u8]) -> Result<(CircuitParams, Self), SnarkError> {
        let (params, payload) = parse_file_header(bytes)?;
        Ok((params, Self::from_bytes(payload)?))
    }
}

/// A structurally valid proof made of random group elements. Decodes and
/// enters the full pairing check but verifies false; models the most
/// expensive garbage a flooding attacker can submit.
pub fn garbage_proof(entropy: &[u8]) -> Proof {
    let mut rng = rng_from_entropy(GARBAGE_DST, entropy);
    Proof(ark_groth16::Proof {
        a: G1Projective::rand(&mut rng).into_affine(),
        b: G2Projective::rand(&mut rng).into_affine(),
        c: G1Projective::rand(&mut rng).into_affine(),
    })
}

fn file_header(params: CircuitParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(FILE_MAGIC.len() + 6);
    out.extend_from_slice(FILE_MAGIC);
    out.extend_from_slice(&params.nx().to_be_bytes());
    out.extend_from_slice(&params.np().to_be_bytes());
    out.extend_from_slice(&params.k().to_be_bytes());
    out
}

fn parse_file_header(bytes: &[u8]) -> Result<(CircuitParams, &[u8]), SnarkError> {
    if bytes.len() < FILE_MAGIC.len() + 6 {
        return Err(SnarkError::BadLength);
    }
    let (magic, rest) = bytes.split_at(FILE_MAGIC.len());
    if magic != FILE_MAGIC {
        return Err(SnarkError::BadMagic);
    }
    let nx = u16::from_be_bytes([rest[0], rest[1]]);
    let np = u16::from_be_bytes([rest[2], rest[3]]);
    let k = u16::from_be_bytes([rest[4], rest[5]]);
    let params = CircuitParams::new(nx, np, k)?;
    Ok((params, &rest[6..]))
}
