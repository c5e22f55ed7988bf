use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zk_podi::CircuitParams;
use zk_podi_cli::commands::{self, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "zk-podi",
    version,
    about = "Zero-knowledge proofs of distinct identity over pseudonym bundles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Provision an authority: signature keys plus one proving/verifying key
    /// pair per parameter tuple.
    Setup {
        /// Circuit parameters as nx,np,k; repeat for several tuples.
        #[arg(long = "params", value_name = "NX,NP,K", default_values_t = [default_params()])]
        params: Vec<CircuitParams>,
        /// Deterministic seed; omit for OS randomness.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving lea_pub.bin, lea.secret, and pk files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Issue an orthonym and pseudonym bundles for one vehicle.
    Issue {
        /// Directory holding lea.secret.
        #[arg(long, default_value = ".")]
        lea_dir: PathBuf,
        /// Unique vehicle handle (one orthonym per handle).
        #[arg(long)]
        handle: String,
        /// Number of pseudonym bundles to issue.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_name = "NX,NP,K", default_value_t = default_params())]
        params: CircuitParams,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving orthonym.secret and bundle_<i>.bin.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Prove distinctness from the given neighbor bundles.
    Prove {
        /// Directory holding lea_pub.bin and the proving-key file.
        #[arg(long, default_value = ".")]
        lea_dir: PathBuf,
        #[arg(long, value_name = "NX,NP,K", default_value_t = default_params())]
        params: CircuitParams,
        /// Own bundle file.
        #[arg(long)]
        own: PathBuf,
        /// Own orthonym file.
        #[arg(long)]
        orthonym: PathBuf,
        /// Neighbor bundle file; repeat exactly k times.
        #[arg(long = "neighbor", value_name = "FILE", required = true)]
        neighbors: Vec<PathBuf>,
        /// Output message file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify a message file; exit 0 on accept, 1 on rejection (reason on
    /// stderr).
    Verify {
        /// Authority public material.
        #[arg(long)]
        lea_pub: PathBuf,
        /// Message file to judge.
        #[arg(long)]
        message: PathBuf,
    },
    /// Run a broadcast-round scenario from a key-value config file.
    Sim {
        /// Scenario config (params/honest/attacker/seed keys).
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the machine-readable CSV report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure flood economics: verifier cost to reject garbage proofs vs
    /// prover cost to make real ones.
    DosProbe {
        #[arg(long, value_name = "NX,NP,K", default_value_t = default_params())]
        params: CircuitParams,
        /// Number of forged messages to reject.
        #[arg(long, default_value_t = 50)]
        forged: usize,
    },
    /// Timing sweep over parameter tuples, exported as CSV.
    Bench {
        /// `default` (nx 2..16 x np 2..256, k=1) or `nx,np,k;nx,np,k;...`.
        #[arg(long, default_value = "default")]
        grid: String,
        /// Bench a single tuple instead of a grid.
        #[arg(long, value_name = "NX,NP,K")]
        params: Option<CircuitParams>,
        /// Timed trials per grid point (5 warm-ups excluded); minimum 30.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Fixture seed; timings themselves stay nondeterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; omitted, the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn default_params() -> CircuitParams {
    CircuitParams::new(4, 8, 1).expect("default tuple is valid")
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Setup {
            params,
            seed,
            out_dir,
        } => commands::cmd_setup(&params, seed, &out_dir),
        Command::Issue {
            lea_dir,
            handle,
            count,
            params,
            seed,
            out_dir,
        } => commands::cmd_issue(&lea_dir, &handle, count, params, seed, &out_dir),
        Command::Prove {
            lea_dir,
            params,
            own,
            orthonym,
            neighbors,
            out,
            seed,
        } => commands::cmd_prove(&lea_dir, params, &own, &orthonym, &neighbors, &out, seed),
        Command::Verify { lea_pub, message } => commands::cmd_verify(&lea_pub, &message),
        Command::Sim { config, seed, out } => commands::cmd_sim(&config, seed, out.as_deref()),
        Command::DosProbe { params, forged } => commands::cmd_dos_probe(params, forged),
        Command::Bench {
            grid,
            params,
            trials,
            seed,
            out,
        } => commands::cmd_bench(&grid, params, trials, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
