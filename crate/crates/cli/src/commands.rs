//! Subcommand implementations over files on disk.
//!
//! Exit-code contract: 0 success/accept, 1 verification rejection, 2
//! usage or IO failure. Rejections print `reason=<Reason>` on stderr so
//! scripts can branch without parsing prose.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use zk_podi::authority::LeaPublicMaterial;
use zk_podi::sim::{dos_cost_probe, run_scenario, ScenarioConfig};
use zk_podi::snark::ProvingKey;
use zk_podi::vehicle::{decode_podi, generate_podi};
use zk_podi::{CircuitParams, LeaState, Orthonym, PseudonymBundle};

use crate::bench::{emit_csv, human_line, parse_grid, run_sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Entropy stream for one command: seeded deterministically when `--seed`
/// was given, from the OS otherwise.
fn entropy_stream(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => {
            let mut seed_bytes = [0u8; 32];
            rand::thread_rng().fill_bytes(&mut seed_bytes);
            ChaCha20Rng::from_seed(seed_bytes)
        }
    }
}

fn draw(rng: &mut ChaCha20Rng) -> [u8; 32] {
    let mut buf = [0u8; 32];
    rng.fill_bytes(&mut buf);
    buf
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

/// Restricts a secret file to its owner.
fn restrict_to_owner(path: &Path) -> Result<()> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        fs::set_permissions(path, fs::Permissions::from_mode(0o600))
            .with_context(|| format!("chmod 600 {}", path.display()))?;
    }
    Ok(())
}

pub fn proving_key_filename(params: CircuitParams) -> String {
    format!("pk_{}_{}_{}.bin", params.nx(), params.np(), params.k())
}

/// `setup`: provision an authority for the given parameter tuples and write
/// `lea_pub.bin`, `lea.secret`, and one proving-key file per tuple.
pub fn cmd_setup(params_list: &[CircuitParams], seed: Option<u64>, out_dir: &Path) -> Result<i32> {
    let mut rng = entropy_stream(seed);
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let lea = zk_podi::authority::lea_init(params_list, &draw(&mut rng))?;

    let pub_path = out_dir.join("lea_pub.bin");
    write_file(&pub_path, &lea.public_material().to_bytes())?;
    let secret_path = out_dir.join("lea.secret");
    write_file(&secret_path, &lea.export_secret())?;
    restrict_to_owner(&secret_path)?;
    println!("wrote {}", pub_path.display());
    println!("wrote {}", secret_path.display());
    for params in lea.registered_params() {
        let pk = lea.proving_key(params).expect("registered");
        let path = out_dir.join(proving_key_filename(params));
        write_file(&path, &pk.to_file_bytes())?;
        println!("wrote {} ({})", path.display(), params);
    }
    Ok(EXIT_OK)
}

/// `issue`: restore the authority from `lea.secret`, provision one orthonym
/// for `handle`, and write `orthonym.secret` plus `bundle_<i>.bin` files.
pub fn cmd_issue(
    lea_dir: &Path,
    handle: &str,
    count: usize,
    params: CircuitParams,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<i32> {
    let mut rng = entropy_stream(seed);
    let secret = read_file(&lea_dir.join("lea.secret"))?;
    let mut lea = LeaState::from_secret(&secret, &draw(&mut rng))?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let orthonym = lea.issue_orthonym(handle, &draw(&mut rng))?;
    let orthonym_path = out_dir.join("orthonym.secret");
    write_file(&orthonym_path, &orthonym.to_bytes())?;
    restrict_to_owner(&orthonym_path)?;
    println!("wrote {}", orthonym_path.display());

    for (i, bundle) in lea
        .issue_pseudonyms(&orthonym, count, params)?
        .iter()
        .enumerate()
    {
        let path = out_dir.join(format!("bundle_{i}.bin"));
        write_file(&path, &bundle.to_bytes())?;
        println!("wrote {} (pseudonym {})", path.display(), bundle.pseudonym);
    }
    Ok(EXIT_OK)
}

fn load_bundle(path: &Path) -> Result<PseudonymBundle> {
    PseudonymBundle::from_bytes(&read_file(path)?)
        .with_context(|| format!("decoding bundle {}", path.display()))
}

/// `prove`: produce a distinctness message for the given neighbor bundles
/// and write its wire encoding.
pub fn cmd_prove(
    lea_dir: &Path,
    params: CircuitParams,
    own_path: &Path,
    orthonym_path: &Path,
    neighbor_paths: &[PathBuf],
    out: &Path,
    seed: Option<u64>,
) -> Result<i32> {
    if neighbor_paths.len() != params.k() as usize {
        bail!(
            "params {} expect {} neighbors, got {}",
            params,
            params.k(),
            neighbor_paths.len()
        );
    }
    let mut rng = entropy_stream(seed);
    let material = LeaPublicMaterial::from_bytes(&read_file(&lea_dir.join("lea_pub.bin"))?)?;
    let pk = ProvingKey::from_file_bytes(&read_file(&lea_dir.join(proving_key_filename(params)))?)?;
    if pk.params() != params {
        bail!("proving key file is for {}, not {}", pk.params(), params);
    }
    let own = load_bundle(own_path)?;
    let orthonym = Orthonym::from_bytes(&read_file(orthonym_path)?)?;
    let neighbors: Vec<PseudonymBundle> = neighbor_paths
        .iter()
        .map(|p| load_bundle(p))
        .collect::<Result<_>>()?;

    use zk_podi::circuit::CircuitError;
    use zk_podi::vehicle::VehicleError;
    let msg = match generate_podi(
        &own,
        &orthonym,
        &neighbors,
        material.public_key(),
        &pk,
        &draw(&mut rng),
    ) {
        Ok(msg) => msg,
        // Protocol-level refusals are rejections (exit 1), not usage errors.
        Err(VehicleError::InvalidNeighborSignature(j)) => {
            eprintln!("reason=InvalidNeighborSignature({j})");
            return Ok(EXIT_REJECTED);
        }
        Err(VehicleError::Circuit(CircuitError::SybilCollision(j))) => {
            eprintln!("reason=SybilCollision({j})");
            return Ok(EXIT_REJECTED);
        }
        Err(VehicleError::Circuit(CircuitError::OwnEquationMismatch)) => {
            eprintln!("reason=OwnEquationMismatch");
            return Ok(EXIT_REJECTED);
        }
        Err(e) => return Err(e.into()),
    };
    write_file(out, &zk_podi::vehicle::encode_podi(&msg))?;
    println!(
        "wrote {} (params {}, proof 128 bytes)",
        out.display(),
        params
    );
    Ok(EXIT_OK)
}

/// `verify`: judge a message file. Exit 0 on accept; exit 1 on rejection
/// with `reason=<Reason>` on stderr.
pub fn cmd_verify(lea_pub: &Path, message: &Path) -> Result<i32> {
    let material = LeaPublicMaterial::from_bytes(&read_file(lea_pub)?)?;
    let bytes = read_file(message)?;
    let verdict = zk_podi::vehicle::verify_podi_bytes_with_material(&bytes, &material);
    if verdict.accepted() {
        let msg = decode_podi(&bytes).expect("accepted message decodes");
        println!(
            "accepted params={} own={} neighbors={}",
            msg.params(),
            msg.own().pseudonym,
            msg.neighbors().len()
        );
        Ok(EXIT_OK)
    } else {
        eprintln!("reason={}", verdict.reason());
        Ok(EXIT_REJECTED)
    }
}

/// `sim`: run a scenario from a key-value config file. Human report to
/// stdout; deterministic CSV to `--out` when given.
pub fn cmd_sim(config_path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let mut config = ScenarioConfig::parse_kv(&text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let report = run_scenario(&config)?;
    print!("{}", report.to_text());
    if let Some(path) = out {
        write_file(path, report.to_csv().as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

/// `dos-probe`: flood-economics measurement for one tuple.
pub fn cmd_dos_probe(params: CircuitParams, forged: usize) -> Result<i32> {
    if forged < 1 {
        bail!("--forged must be at least 1");
    }
    let report = dos_cost_probe(params, forged);
    if !report.all_rejected {
        bail!("a forged proof was accepted; the backend is broken");
    }
    println!(
        "params={} forged={} verifier_total={:.2}ms prover_equivalent={:.2}ms",
        params, forged, report.verifier_total_ms, report.prover_equivalent_ms
    );
    println!(
        "tp={:.2}ms tv={:.2}ms ratio={:.2} sig_check={:.3}ms",
        report.tp_ms,
        report.tv_ms,
        report.ratio(),
        report.sig_check_ms
    );
    Ok(EXIT_OK)
}

/// `bench`: timing sweep. CSV goes to `--out` (human lines to stdout) or to
/// stdout (human lines to stderr) so either stream stays machine-parseable.
pub fn cmd_bench(
    grid_spec: &str,
    single: Option<CircuitParams>,
    trials: usize,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<i32> {
    if trials < 30 {
        bail!("--trials must be at least 30");
    }
    let grid = match single {
        Some(p) => vec![p],
        None => parse_grid(grid_spec).map_err(anyhow::Error::msg)?,
    };
    let records = run_sweep(&grid, trials, seed.unwrap_or(0));
    let csv = emit_csv(&records);
    match out {
        Some(path) => {
            for r in &records {
                println!("{}", human_line(r));
            }
            write_file(path, csv.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => {
            for r in &records {
                eprintln!("{}", human_line(r));
            }
            print!("{csv}");
        }
    }
    Ok(EXIT_OK)
}
