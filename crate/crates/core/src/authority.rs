//! The issuing authority: global setup, orthonym provisioning, signed
//! pseudonym bundles, and the published verification material.
//!
//! The authority signs `(P, y)` pairs so verifiers can trust a bundle's
//! constant term without learning anything about the orthonym behind it. The
//! signed payload is the fixed byte layout `"zk-podi/bundle/v1" || P (32B) ||
//! y (32B big-endian)`; the signature scheme is Ed25519.
//!
//! Orthonyms leave the authority exactly once, at provisioning; no operation
//! returns a stored orthonym afterwards.

use std::collections::{BTreeMap, BTreeSet};

use ed25519_dalek::{Signature, Signer, SigningKey};
use rand::{RngCore, SeedableRng};
use thiserror::Error;

use crate::algebra::{
    derive_coefficients, evaluate_form, sample_orthonym, FieldElement, Orthonym, PseudonymId,
};
use crate::circuit::build_circuit;
use crate::drbg::rng_from_entropy;
use crate::params::CircuitParams;
use crate::snark::{keygen, ProvingKey, SnarkError, VerifyingKey};

/// Domain tag prefixed to every signed bundle payload.
pub const BUNDLE_DST: &[u8] = b"zk-podi/bundle/v1";
/// Magic prefix of the published authority material file.
pub const PUBLIC_MAGIC: &[u8; 8] = b"PODILEA1";
/// Magic prefix of the authority secret file.
pub const SECRET_MAGIC: &[u8; 8] = b"PODISEC1";
/// Canonical bundle encoding: P (32) + y (32) + signature (64).
pub const BUNDLE_BYTES: usize = 128;

const INIT_DST: &str = "zk-podi/lea-init/v1";
const ISSUE_DST: &str = "zk-podi/lea-issue/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuthorityError {
    #[error("no circuit parameters registered")]
    EmptyParamsList,
    #[error("registered parameter tuples must share nx; got {0} and {1}")]
    MixedUnknownCount(u16, u16),
    #[error("vehicle handle {0:?} already provisioned")]
    AlreadyProvisioned(String),
    #[error("orthonym length: expected {expected}, got {got}")]
    WrongOrthonymLength { expected: usize, got: usize },
    #[error("pseudonym count must be at least 1")]
    ZeroCount,
    #[error("malformed bundle encoding")]
    MalformedBundle,
    #[error("malformed authority material encoding")]
    MalformedMaterial,
    #[error(transparent)]
    Snark(#[from] SnarkError),
}

/// A signed `(P, y)` pair: the public face of one issued pseudonym.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudonymBundle {
    pub pseudonym: PseudonymId,
    pub constant: FieldElement,
    pub signature: Signature,
}

impl PseudonymBundle {
    /// Fixed 128-byte encoding: P, then y big-endian, then the signature.
    pub fn to_bytes(&self) -> [u8; BUNDLE_BYTES] {
        let mut out = [0u8; BUNDLE_BYTES];
        out[..32].copy_from_slice(self.pseudonym.as_bytes());
        out[32..64].copy_from_slice(&self.constant.to_bytes());
        out[64..].copy_from_slice(&self.signature.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthorityError> {
        if bytes.len() != BUNDLE_BYTES {
            return Err(AuthorityError::MalformedBundle);
        }
        let pseudonym = PseudonymId::try_from_slice(&bytes[..32])
            .map_err(|_| AuthorityError::MalformedBundle)?;
        let constant =
            FieldElement::from_bytes(bytes[32..64].try_into().expect("slice is 32 bytes"))
                .map_err(|_| AuthorityError::MalformedBundle)?;
        let signature = Signature::from_bytes(bytes[64..].try_into().expect("slice is 64 bytes"));
        Ok(Self {
            pseudonym,
            constant,
            signature,
        })
    }

    /// The exact byte string the authority signs.
    pub fn signed_payload(pseudonym: &PseudonymId, constant: &FieldElement) -> Vec<u8> {
        let mut payload = Vec::with_capacity(BUNDLE_DST.len() + 64);
        payload.extend_from_slice(BUNDLE_DST);
        payload.extend_from_slice(pseudonym.as_bytes());
        payload.extend_from_slice(&constant.to_bytes());
        payload
    }
}

/// The authority's signature verification key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaPublicKey(ed25519_dalek::VerifyingKey);

impl LeaPublicKey {
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, AuthorityError> {
        ed25519_dalek::VerifyingKey::from_bytes(bytes)
            .map(Self)
            .map_err(|_| AuthorityError::MalformedMaterial)
    }
}

/// True iff the bundle's signature verifies under the authority key over the
/// canonical payload. Total: malformed input is false, never an error.
pub fn verify_bundle(key: &LeaPublicKey, bundle: &PseudonymBundle) -> bool {
    let payload = PseudonymBundle::signed_payload(&bundle.pseudonym, &bundle.constant);
    key.0.verify_strict(&payload, &bundle.signature).is_ok()
}

/// Everything a vehicle needs from the authority to verify: the signature
/// key plus one verifying key per registered parameter tuple.
#[derive(Clone)]
pub struct LeaPublicMaterial {
    key: LeaPublicKey,
    vks: BTreeMap<CircuitParams, VerifyingKey>,
}

impl LeaPublicMaterial {
    pub fn public_key(&self) -> &LeaPublicKey {
        &self.key
    }

    pub fn vk_for(&self, params: CircuitParams) -> Option<&VerifyingKey> {
        self.vks.get(&params)
    }

    pub fn registered_params(&self) -> Vec<CircuitParams> {
        self.vks.keys().copied().collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(PUBLIC_MAGIC);
        out.extend_from_slice(&self.key.to_bytes());
        out.extend_from_slice(&(self.vks.len() as u16).to_be_bytes());
        for (params, vk) in &self.vks {
            out.extend_from_slice(&params.nx().to_be_bytes());
            out.extend_from_slice(&params.np().to_be_bytes());
            out.extend_from_slice(&params.k().to_be_bytes());
            let vk_bytes = vk.to_bytes();
            out.extend_from_slice(&(vk_bytes.len() as u32).to_be_bytes());
            out.extend_from_slice(&vk_bytes);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuthorityError> {
        let malformed = || AuthorityError::MalformedMaterial;
        if bytes.len() < PUBLIC_MAGIC.len() + 34 || &bytes[..PUBLIC_MAGIC.len()] != PUBLIC_MAGIC {
            return Err(malformed());
        }
        let mut rest = &bytes[PUBLIC_MAGIC.len()..];
        let key = LeaPublicKey::from_bytes(rest[..32].try_into().expect("32 bytes"))?;
        rest = &rest[32..];
        let count = u16::from_be_bytes([rest[0], rest[1]]);
        rest = &rest[2..];
        let mut vks = BTreeMap::new();
        for _ in 0..count {
            if rest.len() < 10 {
                return Err(malformed());
            }
            let nx = u16::from_be_bytes([rest[0], rest[1]]);
            let np = u16::from_be_bytes([rest[2], rest[3]]);
            let k = u16::from_be_bytes([rest[4], rest[5]]);
            let len = u32::from_be_bytes([rest[6], rest[7], rest[8], rest[9]]) as usize;
            rest = &rest[10..];
            if rest.len() < len {
                return Err(malformed());
            }
            let params = CircuitParams::new(nx, np, k).map_err(|_| malformed())?;
            let vk = VerifyingKey::from_bytes(params, &rest[..len])?;
            rest = &rest[len..];
            vks.insert(params, vk);
        }
        if !rest.is_empty() {
            return Err(malformed());
        }
        Ok(Self { key, vks })
    }
}

/// Authority state: signing key, per-params proving/verifying keys, and the
/// issuance books (pseudonym uniqueness, per-handle provisioning).
pub struct LeaState {
    signing_seed: [u8; 32],
    signing: SigningKey,
    nx: u16,
    registry: BTreeMap<CircuitParams, (ProvingKey, VerifyingKey)>,
    issued: BTreeSet<PseudonymId>,
    provisioned: BTreeSet<String>,
    id_stream: rand_chacha::ChaCha20Rng,
}

/// Runs global setup: one signing keypair plus a circuit-specific key pair
/// per parameter tuple. All tuples must share nx, since one orthonym per
/// vehicle must solve equations under every registered tuple. Deterministic
/// for fixed entropy.
pub fn lea_init(params_list: &[CircuitParams], entropy: &[u8]) -> Result<LeaState, AuthorityError> {
    if params_list.is_empty() {
        return Err(AuthorityError::EmptyParamsList);
    }
    let nx = params_list[0].nx();
    if let Some(bad) = params_list.iter().find(|p| p.nx() != nx) {
        return Err(AuthorityError::MixedUnknownCount(nx, bad.nx()));
    }
    let mut master = rng_from_entropy(INIT_DST, entropy);
    let mut signing_seed = [0u8; 32];
    master.fill_bytes(&mut signing_seed);
    let mut id_seed = [0u8; 32];
    master.fill_bytes(&mut id_seed);

    let unique: BTreeSet<CircuitParams> = params_list.iter().copied().collect();
    let mut registry = BTreeMap::new();
    for params in unique {
        let mut keygen_entropy = [0u8; 32];
        master.fill_bytes(&mut keygen_entropy);
        let cs = build_circuit(params);
        let pair = keygen(&cs, &keygen_entropy)?;
        registry.insert(params, pair);
    }

    Ok(LeaState {
        signing_seed,
        signing: SigningKey::from_bytes(&signing_seed),
        nx,
        registry,
        issued: BTreeSet::new(),
        provisioned: BTreeSet::new(),
        id_stream: rand_chacha::ChaCha20Rng::from_seed(id_seed),
    })
}

impl LeaState {
    pub fn public_key(&self) -> LeaPublicKey {
        LeaPublicKey(self.signing.verifying_key())
    }

    pub fn registered_params(&self) -> Vec<CircuitParams> {
        self.registry.keys().copied().collect()
    }

    pub fn proving_key(&self, params: CircuitParams) -> Option<&ProvingKey> {
        self.registry.get(&params).map(|(pk, _)| pk)
    }

    pub fn verifying_key(&self, params: CircuitParams) -> Option<&VerifyingKey> {
        self.registry.get(&params).map(|(_, vk)| vk)
    }

    /// The publishable material: signature key plus all verifying keys.
    pub fn public_material(&self) -> LeaPublicMaterial {
        LeaPublicMaterial {
            key: self.public_key(),
            vks: self
                .registry
                .iter()
                .map(|(p, (_, vk))| (*p, vk.clone()))
                .collect(),
        }
    }

    /// Provisions a fresh orthonym for a vehicle handle. Each handle is
    /// provisioned at most once; the orthonym is returned to the owner and
    /// not retained. Deterministic per (handle, entropy).
    pub fn issue_orthonym(
        &mut self,
        handle: &str,
        entropy: &[u8],
    ) -> Result<Orthonym, AuthorityError> {
        if !self.provisioned.insert(handle.to_string()) {
            return Err(AuthorityError::AlreadyProvisioned(handle.to_string()));
        }
        let shape = self.orthonym_shape();
        let mut seed = Vec::with_capacity(handle.len() + 1 + entropy.len());
        seed.extend_from_slice(handle.as_bytes());
        seed.push(0);
        seed.extend_from_slice(entropy);
        Ok(sample_orthonym(&shape, &seed))
    }

    /// Issues `count` signed bundles whose quiz equations all have `s` as a
    /// solution under `params`. Pseudonym ids are drawn fresh and never
    /// repeat across the lifetime of this state.
    pub fn issue_pseudonyms(
        &mut self,
        s: &Orthonym,
        count: usize,
        params: CircuitParams,
    ) -> Result<Vec<PseudonymBundle>, AuthorityError> {
        if count == 0 {
            return Err(AuthorityError::ZeroCount);
        }
        if s.len() != self.nx as usize {
            return Err(AuthorityError::WrongOrthonymLength {
                expected: self.nx as usize,
                got: s.len(),
            });
        }
        let mut bundles = Vec::with_capacity(count);
        for _ in 0..count {
            let pseudonym = loop {
                let candidate = PseudonymId::random(&mut self.id_stream);
                if self.issued.insert(candidate) {
                    break candidate;
                }
            };
            let coeffs = derive_coefficients(&pseudonym, &params);
            let constant = evaluate_form(&coeffs, s, params.np())
                .expect("coefficient count equals orthonym length");
            let payload = PseudonymBundle::signed_payload(&pseudonym, &constant);
            let signature = self.signing.sign(&payload);
            bundles.push(PseudonymBundle {
                pseudonym,
                constant,
                signature,
            });
        }
        Ok(bundles)
    }

    /// Secret persistence: magic, nx, signing seed. The circuit keys live in
    /// their own files; the issuance books are not persisted (fresh ids are
    /// drawn from new entropy on restore).
    pub fn export_secret(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SECRET_MAGIC.len() + 2 + 32);
        out.extend_from_slice(SECRET_MAGIC);
        out.extend_from_slice(&self.nx.to_be_bytes());
        out.extend_from_slice(&self.signing_seed);
        out
    }

    /// Restores a signing-capable state with an empty key registry, for
    /// issuing bundles in a later process. `entropy` seeds the pseudonym-id
    /// stream.
    pub fn from_secret(bytes: &[u8], entropy: &[u8]) -> Result<Self, AuthorityError> {
        if bytes.len() != SECRET_MAGIC.len() + 34 || &bytes[..SECRET_MAGIC.len()] != SECRET_MAGIC {
            return Err(AuthorityError::MalformedMaterial);
        }
        let rest = &bytes[SECRET_MAGIC.len()..];
        let nx = u16::from_be_bytes([rest[0], rest[1]]);
        if nx < 2 {
            return Err(AuthorityError::MalformedMaterial);
        }
        let signing_seed: [u8; 32] = rest[2..].try_into().expect("32 bytes");
        Ok(LeaState {
            signing_seed,
            signing: SigningKey::from_bytes(&signing_seed),
            nx,
            registry: BTreeMap::new(),
            issued: BTreeSet::new(),
            provisioned: BTreeSet::new(),
            id_stream: rng_from_entropy(ISSUE_DST, entropy),
        })
    }

    /// Number of unknowns every registered tuple shares.
    pub fn nx(&self) -> u16 {
        self.nx
    }

    /// Minimal parameter tuple carrying the orthonym dimension; sampling
    /// only reads nx, so degree and neighbor count are immaterial here.
    fn orthonym_shape(&self) -> CircuitParams {
        CircuitParams::new(self.nx, 2, 1).expect("nx validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_solution;
    use crate::circuit::{synthesize_witness, DicStatement};
    use crate::snark::{prove, verify};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn params(nx: u16, np: u16, k: u16) -> CircuitParams {
        CircuitParams::new(nx, np, k).unwrap()
    }

    fn small_lea() -> LeaState {
        lea_init(&[params(2, 2, 1)], b"test-lea").unwrap()
    }

    #[test]
    fn init_registers_each_tuple_once() {
        let lea = lea_init(
            &[params(2, 2, 1), params(2, 4, 2), params(2, 2, 1)],
            b"dup",
        )
        .unwrap();
        assert_eq!(lea.registered_params().len(), 2);
        assert!(lea.verifying_key(params(2, 4, 2)).is_some());
        assert!(lea.proving_key(params(2, 8, 1)).is_none());
    }

    #[test]
    fn init_validates_params_list() {
        assert!(matches!(
            lea_init(&[], b"e"),
            Err(AuthorityError::EmptyParamsList)
        ));
        assert!(matches!(
            lea_init(&[params(2, 2, 1), params(4, 2, 1)], b"e"),
            Err(AuthorityError::MixedUnknownCount(2, 4))
        ));
    }

    #[test]
    fn init_is_deterministic_per_entropy() {
        let a = lea_init(&[params(2, 2, 1)], b"same").unwrap();
        let b = lea_init(&[params(2, 2, 1)], b"same").unwrap();
        let c = lea_init(&[params(2, 2, 1)], b"other").unwrap();
        assert_eq!(a.public_key(), b.public_key());
        assert_eq!(a.export_secret(), b.export_secret());
        assert_eq!(
            a.public_material().to_bytes(),
            b.public_material().to_bytes()
        );
        assert_ne!(a.public_key(), c.public_key());
    }

    #[test]
    fn registry_keys_prove_and_verify() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car-1", b"e1").unwrap();
        let other = lea.issue_orthonym("car-2", b"e2").unwrap();
        let own = lea.issue_pseudonyms(&s, 1, p).unwrap().remove(0);
        let nb = lea.issue_pseudonyms(&other, 1, p).unwrap().remove(0);

        let own_eq = crate::algebra::QuizEquation {
            coeffs: derive_coefficients(&own.pseudonym, &p),
            constant: own.constant,
            pseudonym: own.pseudonym,
        };
        let nb_eq = crate::algebra::QuizEquation {
            coeffs: derive_coefficients(&nb.pseudonym, &p),
            constant: nb.constant,
            pseudonym: nb.pseudonym,
        };
        let st = DicStatement::new(p, own_eq, vec![nb_eq]).unwrap();
        let w = synthesize_witness(&st, &s).unwrap();
        let instance = st.instance_vector();
        let proof = prove(lea.proving_key(p).unwrap(), &instance, &w, b"pe").unwrap();
        assert!(verify(lea.verifying_key(p).unwrap(), &instance, &proof));
    }

    #[test]
    fn orthonym_provisioning_rules() {
        let mut lea = small_lea();
        let a = lea.issue_orthonym("car-a", b"e").unwrap();
        let b = lea.issue_orthonym("car-b", b"e").unwrap();
        assert_eq!(a.len(), 2);
        assert_ne!(a, b);
        assert_eq!(
            lea.issue_orthonym("car-a", b"again"),
            Err(AuthorityError::AlreadyProvisioned("car-a".into()))
        );
    }

    #[test]
    fn issued_bundles_verify_and_solve() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        let key = lea.public_key();
        for bundle in lea.issue_pseudonyms(&s, 20, p).unwrap() {
            assert!(verify_bundle(&key, &bundle));
            let eq = crate::algebra::QuizEquation {
                coeffs: derive_coefficients(&bundle.pseudonym, &p),
                constant: bundle.constant,
                pseudonym: bundle.pseudonym,
            };
            assert!(check_solution(&eq, &s, p.np()).unwrap());
        }
    }

    #[test]
    fn pseudonym_ids_never_repeat() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        let mut seen = BTreeSet::new();
        for _ in 0..10 {
            for b in lea.issue_pseudonyms(&s, 1000, p).unwrap() {
                assert!(seen.insert(b.pseudonym), "duplicate id {}", b.pseudonym);
            }
        }
        assert_eq!(seen.len(), 10_000);
    }

    #[test]
    fn issuance_validates_inputs() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        assert_eq!(
            lea.issue_pseudonyms(&s, 0, p),
            Err(AuthorityError::ZeroCount)
        );
        let wide = Orthonym::new(vec![FieldElement::one(); 4]);
        assert_eq!(
            lea.issue_pseudonyms(&wide, 1, p),
            Err(AuthorityError::WrongOrthonymLength {
                expected: 2,
                got: 4
            })
        );
    }

    #[test]
    fn bundle_mutations_always_rejected() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        let key = lea.public_key();
        let bundle = lea.issue_pseudonyms(&s, 1, p).unwrap().remove(0);
        let bytes = bundle.to_bytes();

        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let mut rejected = 0;
        for _ in 0..150 {
            let mut mutated = bytes;
            let pos = rng.gen_range(0..mutated.len());
            let bit = rng.gen_range(0..8);
            mutated[pos] ^= 1 << bit;
            let ok = match PseudonymBundle::from_bytes(&mutated) {
                Err(_) => false,
                Ok(b) => verify_bundle(&key, &b),
            };
            if !ok {
                rejected += 1;
            }
        }
        assert_eq!(rejected, 150);
    }

    #[test]
    fn foreign_signatures_always_rejected() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        let key = lea.public_key();
        let honest = lea.issue_pseudonyms(&s, 1, p).unwrap().remove(0);

        let mut rng = ChaCha20Rng::seed_from_u64(78);
        for trial in 0..100 {
            // A forger with its own keypair signs the honest payload.
            let mut seed = [0u8; 32];
            rng.fill_bytes(&mut seed);
            let forger = SigningKey::from_bytes(&seed);
            let payload =
                PseudonymBundle::signed_payload(&honest.pseudonym, &honest.constant);
            let forged = PseudonymBundle {
                pseudonym: honest.pseudonym,
                constant: honest.constant,
                signature: forger.sign(&payload),
            };
            assert!(!verify_bundle(&key, &forged), "trial {trial}");
        }

        // Constant swap under the honest signature.
        let mut swapped = honest.clone();
        swapped.constant = swapped.constant.add(FieldElement::one());
        assert!(!verify_bundle(&key, &swapped));
    }

    #[test]
    fn bundle_codec_round_trip() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        let bundle = lea.issue_pseudonyms(&s, 1, p).unwrap().remove(0);
        assert_eq!(
            PseudonymBundle::from_bytes(&bundle.to_bytes()).unwrap(),
            bundle
        );
        assert_eq!(
            PseudonymBundle::from_bytes(&bundle.to_bytes()[..100]),
            Err(AuthorityError::MalformedBundle)
        );
    }

    #[test]
    fn public_material_round_trip() {
        let lea = lea_init(&[params(2, 2, 1), params(2, 4, 2)], b"pm").unwrap();
        let material = lea.public_material();
        let bytes = material.to_bytes();
        let parsed = LeaPublicMaterial::from_bytes(&bytes).unwrap();
        assert_eq!(parsed.public_key(), material.public_key());
        assert_eq!(parsed.registered_params(), material.registered_params());
        assert_eq!(parsed.to_bytes(), bytes);
        assert!(parsed.vk_for(params(2, 4, 2)).is_some());
        assert!(parsed.vk_for(params(2, 8, 1)).is_none());

        assert!(LeaPublicMaterial::from_bytes(&bytes[..40]).is_err());
        let mut bad = bytes.clone();
        bad[0] ^= 1;
        assert!(LeaPublicMaterial::from_bytes(&bad).is_err());
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(LeaPublicMaterial::from_bytes(&trailing).is_err());
    }

    #[test]
    fn secret_restores_signing_identity() {
        let p = params(2, 2, 1);
        let mut lea = small_lea();
        let s = lea.issue_orthonym("car", b"e").unwrap();
        let secret = lea.export_secret();

        let mut restored = LeaState::from_secret(&secret, b"later").unwrap();
        assert_eq!(restored.public_key(), lea.public_key());
        assert_eq!(restored.nx(), 2);
        let bundle = restored.issue_pseudonyms(&s, 1, p).unwrap().remove(0);
        assert!(verify_bundle(&lea.public_key(), &bundle));

        assert!(LeaState::from_secret(&secret[..20], b"x").is_err());
        let mut bad = secret.clone();
        bad[0] ^= 1;
        assert!(LeaState::from_secret(&bad, b"x").is_err());
    }
}
