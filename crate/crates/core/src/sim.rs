//! Deterministic multi-vehicle scenarios exercising the protocol's security
//! behavior end to end.
//!
//! One run provisions an authority, hands every participant an orthonym and
//! signed bundles, executes a single synchronous broadcast round on an
//! in-memory bus, and has every participant verify everything it received.
//! All randomness flows from the scenario seed, so reports (timings aside)
//! replay bit-identically.
//!
//! Provers cover their whole neighborhood with one proof per chunk of k
//! neighbors; a remainder of r neighbors is proven under an (nx, np, r)
//! tuple, which the authority registers alongside the main tuple at setup.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::RngCore;
use thiserror::Error;

use crate::algebra::{derive_coefficients, evaluate_form, sample_orthonym, Orthonym, PseudonymId};
use crate::authority::{lea_init, verify_bundle, AuthorityError, PseudonymBundle};
use crate::drbg::rng_from_entropy;
use crate::params::CircuitParams;
use crate::snark::garbage_proof;
use crate::vehicle::{
    encode_podi, generate_podi, verify_podi_bytes_with_material, PodiMessage, VerdictReason,
};

const SIM_DST: &str = "zk-podi/sim/v1";
const DOS_DST: &str = "zk-podi/dos-probe/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),
    #[error("honest_count must be at least 2, got {0}")]
    HonestCountTooSmall(usize),
    #[error("sybil profile with k={k} needs at least {needed} honest vehicles")]
    NotEnoughFill { k: u16, needed: usize },
    #[error(transparent)]
    Authority(#[from] AuthorityError),
}

/// What the adversarial participant does during the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AttackerProfile {
    /// No attacker: pure completeness run.
    None,
    /// Announces two of its own pseudonyms and attempts to prove them
    /// distinct from each other.
    SybilTwoPseudonyms,
    /// Behaves honestly but flips a proof byte before broadcasting.
    TamperProof,
    /// Publishes under a self-signed bundle that its orthonym does solve.
    ForgeBundle,
    /// Re-publishes an honest vehicle's proof under its own bundle.
    ReplayForeignProof,
}

impl std::fmt::Display for AttackerProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            AttackerProfile::None => "None",
            AttackerProfile::SybilTwoPseudonyms => "SybilTwoPseudonyms",
            AttackerProfile::TamperProof => "TamperProof",
            AttackerProfile::ForgeBundle => "ForgeBundle",
            AttackerProfile::ReplayForeignProof => "ReplayForeignProof",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for AttackerProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "None" => Ok(AttackerProfile::None),
            "SybilTwoPseudonyms" => Ok(AttackerProfile::SybilTwoPseudonyms),
            "TamperProof" => Ok(AttackerProfile::TamperProof),
            "ForgeBundle" => Ok(AttackerProfile::ForgeBundle),
            "ReplayForeignProof" => Ok(AttackerProfile::ReplayForeignProof),
            other => Err(format!("unknown attacker profile {other:?}")),
        }
    }
}

/// One scenario: circuit shape, honest population, attacker, seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub params: CircuitParams,
    pub honest_count: usize,
    pub attacker: AttackerProfile,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Parses the key-value text form. Lines are `key = value`; blank lines
    /// and `#` comments are ignored. Keys: params, honest, attacker, seed.
    pub fn parse_kv(text: &str) -> Result<Self, SimError> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            fields.insert(key.trim(), value.trim());
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| SimError::Config(format!("missing key {key:?}")))
        };
        let params: CircuitParams = get("params")?
            .parse()
            .map_err(|e| SimError::Config(format!("params: {e}")))?;
        let honest_count: usize = get("honest")?
            .parse()
            .map_err(|e| SimError::Config(format!("honest: {e}")))?;
        let attacker: AttackerProfile = get("attacker")?
            .parse()
            .map_err(SimError::Config)?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|e| SimError::Config(format!("seed: {e}")))?;
        let config = Self {
            params,
            honest_count,
            attacker,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Emits the key-value text form; parse_kv round-trips it.
    pub fn to_kv(&self) -> String {
        format!(
            "params = {}\nhonest = {}\nattacker = {}\nseed = {}\n",
            self.params, self.honest_count, self.attacker, self.seed
        )
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.honest_count < 2 {
            return Err(SimError::HonestCountTooSmall(self.honest_count));
        }
        if self.attacker == AttackerProfile::SybilTwoPseudonyms {
            let needed = self.params.k() as usize - 1;
            if self.honest_count < needed {
                return Err(SimError::NotEnoughFill {
                    k: self.params.k(),
                    needed,
                });
            }
        }
        Ok(())
    }
}

/// Wall-clock per phase, milliseconds. Not part of the deterministic report
/// surface.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub setup_ms: f64,
    pub prove_ms: f64,
    pub verify_ms: f64,
}

/// Outcome of one scenario round.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub messages_sent: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<VerdictReason, usize>,
    /// Dual-identity proof attempts stopped at witness synthesis, before any
    /// message existed.
    pub sybil_blocked: usize,
    pub timings: PhaseTimings,
}

impl ScenarioReport {
    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    /// Machine-readable form: header plus one row. Deterministic under the
    /// scenario seed (timings are excluded by design).
    pub fn to_csv(&self) -> String {
        let reasons = self
            .rejected
            .iter()
            .map(|(reason, count)| format!("{reason}={count}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "nx,np,k,honest,attacker,seed,messages_sent,accepted,rejected_total,sybil_blocked,reasons\n\
             {},{},{},{},{},{},{},{},{},{},{}\n",
            self.config.params.nx(),
            self.config.params.np(),
            self.config.params.k(),
            self.config.honest_count,
            self.config.attacker,
            self.config.seed,
            self.messages_sent,
            self.accepted,
            self.rejected_total(),
            self.sybil_blocked,
            reasons,
        )
    }

    /// Human-readable summary including phase timings.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scenario: params={} honest={} attacker={} seed={}\n",
            self.config.params, self.config.honest_count, self.config.attacker, self.config.seed
        ));
        out.push_str(&format!(
            "messages: sent={} accepted={} rejected={} sybil_blocked={}\n",
            self.messages_sent,
            self.accepted,
            self.rejected_total(),
            self.sybil_blocked
        ));
        for (reason, count) in &self.rejected {
            out.push_str(&format!("  rejected[{reason}] = {count}\n"));
        }
        out.push_str(&format!(
            "timings: setup={:.1}ms prove={:.1}ms verify={:.1}ms\n",
            self.timings.setup_ms, self.timings.prove_ms, self.timings.verify_ms
        ));
        out
    }
}

/// Splits a sorted neighbor list into proof-sized chunks: full chunks of k,
/// then one remainder chunk if the count does not divide evenly.
fn chunk_sizes(neighbor_count: usize, k: usize) -> Vec<usize> {
    let mut sizes = vec![k; neighbor_count / k];
    if neighbor_count % k != 0 {
        sizes.push(neighbor_count % k);
    }
    sizes
}

struct Participant {
    orthonym: Orthonym,
    bundles: Vec<PseudonymBundle>,
}

/// Runs one scenario round. See the module docs for the round structure.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, SimError> {
    config.validate()?;
    let params = config.params;
    let k = params.k() as usize;
    let n = config.honest_count;
    let mut entropy = rng_from_entropy(SIM_DST, &config.seed.to_be_bytes());
    let mut draw = move || {
        let mut buf = [0u8; 32];
        entropy.fill_bytes(&mut buf);
        buf
    };

    // Announced pseudonyms visible to honest vehicles, per profile.
    let attacker_announced: usize = match config.attacker {
        AttackerProfile::None | AttackerProfile::ReplayForeignProof => 0,
        AttackerProfile::SybilTwoPseudonyms => 2,
        AttackerProfile::TamperProof => 1,
        AttackerProfile::ForgeBundle => 0, // the forged seal never passes the filter
    };

    // Every chunk size any prover will need becomes a registered tuple.
    let mut prover_counts = vec![n - 1 + attacker_announced; n];
    match config.attacker {
        AttackerProfile::TamperProof | AttackerProfile::ForgeBundle => prover_counts.push(n),
        AttackerProfile::SybilTwoPseudonyms => prover_counts.push(k),
        AttackerProfile::None | AttackerProfile::ReplayForeignProof => {}
    }
    let mut needed = vec![params];
    for count in &prover_counts {
        for size in chunk_sizes(*count, k) {
            needed.push(CircuitParams::new(params.nx(), params.np(), size as u16).expect(
                "chunk sizes are between 1 and k over validated params",
            ));
        }
    }

    let setup_start = Instant::now();
    let mut lea = lea_init(&needed, &draw())?;
    let material = lea.public_material();

    let mut honest = Vec::with_capacity(n);
    for i in 0..n {
        let orthonym = lea.issue_orthonym(&format!("honest-{i}"), &draw())?;
        let bundles = lea.issue_pseudonyms(&orthonym, 1, params)?;
        honest.push(Participant { orthonym, bundles });
    }
    let attacker = match config.attacker {
        AttackerProfile::None | AttackerProfile::ForgeBundle => None,
        profile => {
            let orthonym = lea.issue_orthonym("attacker", &draw())?;
            let count = if profile == AttackerProfile::SybilTwoPseudonyms {
                2
            } else {
                1
            };
            let bundles = lea.issue_pseudonyms(&orthonym, count, params)?;
            Some(Participant { orthonym, bundles })
        }
    };
    // The forger needs no authority-issued identity: it fabricates a bundle
    // whose constant its own orthonym produces, sealed with its own key.
    let forged = (config.attacker == AttackerProfile::ForgeBundle).then(|| {
        use ed25519_dalek::Signer;
        let orthonym = sample_orthonym(&params, &draw());
        let pseudonym = PseudonymId::from_bytes(draw());
        let coeffs = derive_coefficients(&pseudonym, &params);
        let constant = evaluate_form(&coeffs, &orthonym, params.np()).expect("dimensions match");
        let signer = ed25519_dalek::SigningKey::from_bytes(&draw());
        let signature = signer.sign(&PseudonymBundle::signed_payload(&pseudonym, &constant));
        (
            orthonym,
            PseudonymBundle {
                pseudonym,
                constant,
                signature,
            },
        )
    });
    let setup_ms = setup_start.elapsed().as_secs_f64() * 1e3;

    // Owner ledger for the accepted-message distinctness audit.
    let mut owner_of: BTreeMap<PseudonymId, usize> = BTreeMap::new();
    for (i, p) in honest.iter().enumerate() {
        owner_of.insert(p.bundles[0].pseudonym, i);
    }
    if let Some(a) = &attacker {
        for b in &a.bundles {
            owner_of.insert(b.pseudonym, usize::MAX);
        }
    }

    // The bus: sealed announcements honest vehicles will treat as neighbors.
    let mut announced: Vec<PseudonymBundle> =
        honest.iter().map(|p| p.bundles[0].clone()).collect();
    if let Some(a) = &attacker {
        if config.attacker != AttackerProfile::ReplayForeignProof {
            announced.extend(a.bundles.iter().cloned());
        }
    }
    if let Some((_, bundle)) = &forged {
        // Honest vehicles drop it at the seal check; it still reached the bus.
        assert!(!verify_bundle(material.public_key(), bundle));
    }
    announced.sort_by(|a, b| a.pseudonym.cmp(&b.pseudonym));

    let key = material.public_key().clone();
    let prove_start = Instant::now();
    let mut wire_messages: Vec<Vec<u8>> = Vec::new();
    let mut sybil_blocked = 0usize;

    for (i, vehicle) in honest.iter().enumerate() {
        let own = &vehicle.bundles[0];
        let neighbors: Vec<PseudonymBundle> = announced
            .iter()
            .filter(|b| b.pseudonym != own.pseudonym)
            .cloned()
            .collect();
        let mut offset = 0;
        for size in chunk_sizes(neighbors.len(), k) {
            let chunk = &neighbors[offset..offset + size];
            offset += size;
            let chunk_params = CircuitParams::new(params.nx(), params.np(), size as u16)
                .expect("validated above");
            let pk = lea.proving_key(chunk_params).expect("registered at setup");
            let msg = generate_podi(own, &vehicle.orthonym, chunk, &key, pk, &draw())
                .unwrap_or_else(|e| panic!("honest vehicle {i} failed to prove: {e}"));
            wire_messages.push(encode_podi(&msg));
        }
    }

    match (config.attacker, &attacker) {
        (AttackerProfile::SybilTwoPseudonyms, Some(a)) => {
            // Both orderings of the dual-identity claim; each must die at
            // witness synthesis with a collision, never reaching the bus.
            let fills: Vec<PseudonymBundle> = honest
                .iter()
                .take(k - 1)
                .map(|p| p.bundles[0].clone())
                .collect();
            for (own_idx, other_idx) in [(0, 1), (1, 0)] {
                let mut neighbors = fills.clone();
                neighbors.push(a.bundles[other_idx].clone());
                let pk = lea.proving_key(params).expect("registered");
                match generate_podi(&a.bundles[own_idx], &a.orthonym, &neighbors, &key, pk, &draw())
                {
                    Err(crate::vehicle::VehicleError::Circuit(
                        crate::circuit::CircuitError::SybilCollision(_),
                    )) => sybil_blocked += 1,
                    Ok(_) => panic!("dual-identity proof was produced"),
                    Err(e) => panic!("unexpected sybil failure mode: {e}"),
                }
            }
        }
        (AttackerProfile::TamperProof, Some(a)) => {
            let own = &a.bundles[0];
            let neighbors: Vec<PseudonymBundle> = announced
                .iter()
                .filter(|b| b.pseudonym != own.pseudonym)
                .cloned()
                .collect();
            let mut offset = 0;
            for size in chunk_sizes(neighbors.len(), k) {
                let chunk = &neighbors[offset..offset + size];
                offset += size;
                let chunk_params = CircuitParams::new(params.nx(), params.np(), size as u16)
                    .expect("validated above");
                let pk = lea.proving_key(chunk_params).expect("registered at setup");
                let msg = generate_podi(own, &a.orthonym, chunk, &key, pk, &draw())
                    .expect("attacker holds valid credentials");
                let mut bytes = encode_podi(&msg);
                let last = bytes.len() - 1;
                bytes[last] ^= 0x01; // corrupt the proof tail
                wire_messages.push(bytes);
            }
        }
        (AttackerProfile::ForgeBundle, None) => {
            let (forge_orthonym, forged_bundle) = forged.as_ref().expect("built above");
            let neighbors: Vec<PseudonymBundle> = announced.clone();
            let mut offset = 0;
            for size in chunk_sizes(neighbors.len(), k) {
                let chunk = &neighbors[offset..offset + size];
                offset += size;
                let chunk_params = CircuitParams::new(params.nx(), params.np(), size as u16)
                    .expect("validated above");
                let pk = lea.proving_key(chunk_params).expect("registered at setup");
                // The forged constant is solvable, so a real proof comes out;
                // only the seal gives the forgery away.
                let msg = generate_podi(forged_bundle, forge_orthonym, chunk, &key, pk, &draw())
                    .expect("forged constant is chosen to be solvable");
                wire_messages.push(encode_podi(&msg));
            }
        }
        (AttackerProfile::ReplayForeignProof, Some(a)) => {
            let source = crate::vehicle::decode_podi(&wire_messages[0])
                .expect("honest messages decode");
            let replay = PodiMessage::from_parts(
                source.params(),
                a.bundles[0].clone(),
                source.neighbors().to_vec(),
                *source.proof_bytes(),
            )
            .expect("attacker pseudonym never appears among honest neighbors");
            wire_messages.push(encode_podi(&replay));
        }
        _ => {}
    }
    let prove_ms = prove_start.elapsed().as_secs_f64() * 1e3;

    // Every participant verifies every message; all verdicts must agree.
    let verifier_count = n + attacker.is_some() as usize;
    let verify_start = Instant::now();
    let mut accepted = 0usize;
    let mut rejected: BTreeMap<VerdictReason, usize> = BTreeMap::new();
    for bytes in &wire_messages {
        let verdict = verify_podi_bytes_with_material(bytes, &material);
        for _ in 1..verifier_count {
            let again = verify_podi_bytes_with_material(bytes, &material);
            assert_eq!(again, verdict, "verifiers disagreed on one message");
        }
        if verdict.accepted() {
            accepted += 1;
            // Audit: an accepted message must never pair an own bundle with
            // a neighbor bundle issued against the same orthonym.
            let msg = crate::vehicle::decode_podi(bytes).expect("verified message decodes");
            if let Some(own_owner) = owner_of.get(&msg.own().pseudonym) {
                for nb in msg.neighbors() {
                    assert_ne!(
                        Some(own_owner),
                        owner_of.get(&nb.pseudonym),
                        "accepted message pairs two pseudonyms of one owner"
                    );
                }
            }
        } else {
            *rejected.entry(verdict.reason()).or_insert(0) += 1;
        }
    }
    let verify_ms = verify_start.elapsed().as_secs_f64() * 1e3;

    let report = ScenarioReport {
        config: *config,
        messages_sent: wire_messages.len(),
        accepted,
        rejected,
        sybil_blocked,
        timings: PhaseTimings {
            setup_ms,
            prove_ms,
            verify_ms,
        },
    };
    assert_eq!(
        report.accepted + report.rejected_total(),
        report.messages_sent,
        "verdict accounting is total"
    );
    Ok(report)
}

/// Cost comparison for a proof-flooding denial of service: what the verifier
/// spends rejecting structurally valid garbage versus what an attacker would
/// pay to make real proofs instead.
#[derive(Debug, Clone, Copy)]
pub struct DosCostReport {
    pub params: CircuitParams,
    pub forged_count: usize,
    /// Total wall-clock to reject all forged messages (full path: decode,
    /// signatures, instance derivation, pairing check).
    pub verifier_total_ms: f64,
    /// forged_count honest proofs at the measured mean proving time.
    pub prover_equivalent_ms: f64,
    pub tp_ms: f64,
    pub tv_ms: f64,
    /// Mean signature-verification share of one message (own plus k
    /// neighbors), reported so the pairing-dominance assumption is visible.
    pub sig_check_ms: f64,
    pub all_rejected: bool,
}

impl DosCostReport {
    /// The attacker-to-verifier cost ratio: how much more work a real proof
    /// costs than rejecting a fake one.
    pub fn ratio(&self) -> f64 {
        self.tp_ms / self.tv_ms
    }
}

/// Measures the flood economics for one parameter tuple. The forged messages
/// carry random-but-valid group elements, the most expensive garbage a
/// flooder can submit: they pass decoding and die in the pairing check.
pub fn dos_cost_probe(params: CircuitParams, forged_count: usize) -> DosCostReport {
    assert!(forged_count >= 1, "probe needs at least one forged message");
    let k = params.k() as usize;
    let mut entropy = rng_from_entropy(DOS_DST, &[]);
    let mut draw = move || {
        let mut buf = [0u8; 32];
        entropy.fill_bytes(&mut buf);
        buf
    };

    let mut lea = lea_init(&[params], &draw()).expect("valid params");
    let material = lea.public_material();
    let key = material.public_key().clone();
    let prover = {
        let orthonym = lea.issue_orthonym("prover", &draw()).expect("fresh handle");
        let bundles = lea.issue_pseudonyms(&orthonym, 1, params).expect("count >= 1");
        Participant { orthonym, bundles }
    };
    let neighbors: Vec<PseudonymBundle> = (0..k)
        .map(|i| {
            let orthonym = lea
                .issue_orthonym(&format!("bystander-{i}"), &draw())
                .expect("fresh handle");
            lea.issue_pseudonyms(&orthonym, 1, params)
                .expect("count >= 1")
                .remove(0)
        })
        .collect();
    let pk = lea.proving_key(params).expect("registered");

    // Honest proving cost, fresh entropy per trial.
    let tp_trials = 8;
    for _ in 0..2 {
        generate_podi(&prover.bundles[0], &prover.orthonym, &neighbors, &key, pk, &draw())
            .expect("warmup proof");
    }
    let tp_start = Instant::now();
    let mut honest_msg = None;
    for _ in 0..tp_trials {
        let msg =
            generate_podi(&prover.bundles[0], &prover.orthonym, &neighbors, &key, pk, &draw())
                .expect("honest proof");
        honest_msg = Some(msg);
    }
    let tp_ms = tp_start.elapsed().as_secs_f64() * 1e3 / tp_trials as f64;
    let honest_msg = honest_msg.expect("at least one trial");

    // Forged flood: honest framing, garbage proof points.
    let flood: Vec<Vec<u8>> = (0..forged_count)
        .map(|i| {
            let msg = PodiMessage::from_parts(
                params,
                honest_msg.own().clone(),
                honest_msg.neighbors().to_vec(),
                garbage_proof(&(i as u64).to_be_bytes()).to_bytes(),
            )
            .expect("same shape as the honest message");
            encode_podi(&msg)
        })
        .collect();
    verify_podi_bytes_with_material(&flood[0], &material); // warmup
    let verify_start = Instant::now();
    let mut all_rejected = true;
    for bytes in &flood {
        let verdict = verify_podi_bytes_with_material(bytes, &material);
        all_rejected &= !verdict.accepted() && verdict.reason() == VerdictReason::BadProof;
    }
    let verifier_total_ms = verify_start.elapsed().as_secs_f64() * 1e3;
    let tv_ms = verifier_total_ms / forged_count as f64;

    // Signature share of one message: own plus k neighbor seals.
    let sig_trials = 50;
    let sig_start = Instant::now();
    for _ in 0..sig_trials {
        assert!(verify_bundle(material.public_key(), &prover.bundles[0]));
        for nb in &neighbors {
            assert!(verify_bundle(material.public_key(), nb));
        }
    }
    let sig_check_ms = sig_start.elapsed().as_secs_f64() * 1e3 / sig_trials as f64;

    DosCostReport {
        params,
        forged_count,
        verifier_total_ms,
        prover_equivalent_ms: tp_ms * forged_count as f64,
        tp_ms,
        tv_ms,
        sig_check_ms,
        all_rejected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(nx: u16, np: u16, k: u16) -> CircuitParams {
        CircuitParams::new(nx, np, k).unwrap()
    }

    fn config(
        p: CircuitParams,
        honest: usize,
        attacker: AttackerProfile,
        seed: u64,
    ) -> ScenarioConfig {
        ScenarioConfig {
            params: p,
            honest_count: honest,
            attacker,
            seed,
        }
    }

    #[test]
    fn chunking_covers_everything() {
        assert_eq!(chunk_sizes(5, 2), vec![2, 2, 1]);
        assert_eq!(chunk_sizes(4, 2), vec![2, 2]);
        assert_eq!(chunk_sizes(1, 3), vec![1]);
        assert_eq!(chunk_sizes(0, 3), Vec::<usize>::new());
        for n in 0..40 {
            for k in 1..=8 {
                let sizes = chunk_sizes(n, k);
                assert_eq!(sizes.iter().sum::<usize>(), n);
                assert!(sizes.iter().all(|&s| s >= 1 && s <= k));
            }
        }
    }

    #[test]
    fn honest_round_accepts_everything() {
        let report = run_scenario(&config(params(2, 2, 1), 4, AttackerProfile::None, 7)).unwrap();
        assert_eq!(report.messages_sent, 12); // ordered pairs of 4 vehicles
        assert_eq!(report.accepted, 12);
        assert_eq!(report.rejected_total(), 0);
        assert_eq!(report.sybil_blocked, 0);
    }

    #[test]
    fn sybil_attempts_never_become_messages() {
        let report = run_scenario(&config(
            params(2, 2, 1),
            2,
            AttackerProfile::SybilTwoPseudonyms,
            8,
        ))
        .unwrap();
        // Each honest vehicle proves against one honest and two attacker
        // pseudonyms; the attacker emits nothing.
        assert_eq!(report.messages_sent, 6);
        assert_eq!(report.accepted, 6);
        assert_eq!(report.rejected_total(), 0);
        assert_eq!(report.sybil_blocked, 2);
    }

    #[test]
    fn sybil_blocked_with_multi_neighbor_chunks() {
        let report = run_scenario(&config(
            params(2, 2, 3),
            3,
            AttackerProfile::SybilTwoPseudonyms,
            9,
        ))
        .unwrap();
        assert_eq!(report.sybil_blocked, 2);
        assert_eq!(report.rejected_total(), 0);
        assert_eq!(report.accepted, report.messages_sent);
    }

    #[test]
    fn tampered_proofs_rejected_as_bad_proof() {
        let report =
            run_scenario(&config(params(2, 2, 1), 2, AttackerProfile::TamperProof, 10)).unwrap();
        // Honest: two vehicles, two neighbors each (peer + attacker) = 4.
        // Attacker: two tampered messages.
        assert_eq!(report.messages_sent, 6);
        assert_eq!(report.accepted, 4);
        assert_eq!(report.rejected.get(&VerdictReason::BadProof), Some(&2));
        assert_eq!(report.rejected_total(), 2);
    }

    #[test]
    fn forged_bundles_rejected_by_seal() {
        let report =
            run_scenario(&config(params(2, 2, 1), 2, AttackerProfile::ForgeBundle, 11)).unwrap();
        // Honest vehicles ignore the forged announcement entirely.
        assert_eq!(report.messages_sent, 2 + 2);
        assert_eq!(report.accepted, 2);
        assert_eq!(
            report.rejected.get(&VerdictReason::BadOwnSignature),
            Some(&2)
        );
    }

    #[test]
    fn replayed_proofs_rejected_as_bad_proof() {
        let report = run_scenario(&config(
            params(2, 2, 1),
            2,
            AttackerProfile::ReplayForeignProof,
            12,
        ))
        .unwrap();
        assert_eq!(report.messages_sent, 3);
        assert_eq!(report.accepted, 2);
        assert_eq!(report.rejected.get(&VerdictReason::BadProof), Some(&1));
    }

    #[test]
    fn reports_replay_deterministically() {
        let cfg = config(params(2, 2, 2), 3, AttackerProfile::TamperProof, 99);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.accepted, b.accepted);
        assert_eq!(a.rejected, b.rejected);
        assert_eq!(a.sybil_blocked, b.sybil_blocked);
    }

    #[test]
    fn config_text_round_trips() {
        let cfg = config(params(4, 8, 2), 5, AttackerProfile::ReplayForeignProof, 1234);
        let parsed = ScenarioConfig::parse_kv(&cfg.to_kv()).unwrap();
        assert_eq!(parsed, cfg);

        let with_comments = "# scenario\nparams = 2,2,1\n\nhonest = 2\nattacker = None\nseed = 5\n";
        assert!(ScenarioConfig::parse_kv(with_comments).is_ok());

        assert!(matches!(
            ScenarioConfig::parse_kv("honest = 2\nattacker = None\nseed = 1\n"),
            Err(SimError::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::parse_kv("params = 2,2,1\nhonest = 2\nattacker = Both\nseed = 1\n"),
            Err(SimError::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::parse_kv("params = 2,2,1\nhonest = 1\nattacker = None\nseed = 1\n"),
            Err(SimError::HonestCountTooSmall(1))
        ));
    }

    #[test]
    fn csv_shape_is_stable() {
        let report = run_scenario(&config(params(2, 2, 1), 2, AttackerProfile::None, 3)).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "nx,np,k,honest,attacker,seed,messages_sent,accepted,rejected_total,sybil_blocked,reasons"
        );
        assert_eq!(lines.next().unwrap(), "2,2,1,2,None,3,2,2,0,0,");
        assert!(report.to_text().contains("accepted=2"));
    }

    #[test]
    fn dos_probe_rejects_all_garbage() {
        let report = dos_cost_probe(params(2, 2, 1), 5);
        assert!(report.all_rejected);
        assert!(report.tp_ms > 0.0 && report.tv_ms > 0.0);
        assert!(report.prover_equivalent_ms > report.tp_ms * 4.9);
        assert!(report.sig_check_ms > 0.0);
    }

    #[test]
    fn dos_ratio_grows_with_circuit_size() {
        let small = dos_cost_probe(params(2, 2, 1), 8);
        let mid = dos_cost_probe(params(4, 16, 1), 8);
        let large = dos_cost_probe(params(16, 256, 1), 8);
        assert!(small.all_rejected && mid.all_rejected && large.all_rejected);
        assert!(
            mid.tp_ms > small.tp_ms && large.tp_ms > mid.tp_ms,
            "proving cost must grow with the circuit: {} {} {}",
            small.tp_ms,
            mid.tp_ms,
            large.tp_ms
        );
        // Measured endpoint spread on the reference machine is ~2.8x; the
        // floor leaves a generous noise margin.
        assert!(
            large.ratio() >= 2.0 * small.ratio(),
            "attacker cost ratio must grow toward the large end: {} vs {}",
            small.ratio(),
            large.ratio()
        );
    }
}
