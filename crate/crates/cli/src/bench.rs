//! Timing sweep over circuit parameter tuples: keygen once per tuple, then
//! repeated prove/verify over fresh statements, reported as mean, standard
//! deviation, and median-of-means.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use zk_podi::algebra::{make_quiz_equation, sample_orthonym};
use zk_podi::circuit::{build_circuit, synthesize_witness};
use zk_podi::snark::{keygen, prove, verify, PROOF_BYTES};
use zk_podi::{CircuitParams, DicStatement, PseudonymId};

pub const CSV_HEADER: &str = "nx,np,k,keygen_ms,tp_ms,tp_sd,tv_ms,tv_sd,proof_bytes,constraints,trials";

/// Measured behavior of one parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub params: CircuitParams,
    pub keygen_ms: f64,
    pub tp_ms: f64,
    pub tp_sd: f64,
    /// Median of ten per-chunk means; robust companion to the plain mean,
    /// reported in human output only (the CSV column set is fixed).
    pub tp_mom: f64,
    pub tv_ms: f64,
    pub tv_sd: f64,
    pub tv_mom: f64,
    pub proof_bytes: usize,
    pub constraints: usize,
    pub trials: usize,
}

/// The standard sweep: nx in {2,4,8,16} crossed with np in {2,...,256}, one
/// neighbor.
pub fn default_grid() -> Vec<CircuitParams> {
    let mut grid = Vec::new();
    for nx in [2u16, 4, 8, 16] {
        for exp in 1..=8u32 {
            grid.push(CircuitParams::new(nx, 1 << exp, 1).expect("grid point is valid"));
        }
    }
    grid
}

/// Parses a `--grid` value: `default`, or semicolon-separated tuples like
/// `2,2,1;4,8,1`.
pub fn parse_grid(spec: &str) -> Result<Vec<CircuitParams>, String> {
    if spec == "default" {
        return Ok(default_grid());
    }
    spec.split(';')
        .map(|point| point.trim().parse::<CircuitParams>())
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Median of the means of ten contiguous chunks.
fn median_of_means(xs: &[f64]) -> f64 {
    let chunks = 10.min(xs.len());
    let size = xs.len() / chunks;
    let mut means: Vec<f64> = (0..chunks)
        .map(|i| {
            let start = i * size;
            let end = if i == chunks - 1 { xs.len() } else { start + size };
            mean(&xs[start..end])
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    let mid = means.len() / 2;
    if means.len() % 2 == 1 {
        means[mid]
    } else {
        (means[mid - 1] + means[mid]) / 2.0
    }
}

struct Fixture {
    instance: Vec<zk_podi::FieldElement>,
    witness: zk_podi::WitnessAssignment,
    entropy: [u8; 32],
}

fn fresh_fixture(params: CircuitParams, rng: &mut ChaCha20Rng) -> Fixture {
    let draw = |rng: &mut ChaCha20Rng| {
        let mut buf = [0u8; 32];
        rng.fill_bytes(&mut buf);
        buf
    };
    let s = sample_orthonym(&params, &draw(rng));
    let own = make_quiz_equation(&PseudonymId::random(rng), &s, &params).expect("shapes match");
    let neighbors = (0..params.k())
        .map(|_| {
            let foreign = sample_orthonym(&params, &draw(rng));
            make_quiz_equation(&PseudonymId::random(rng), &foreign, &params).expect("shapes match")
        })
        .collect();
    let statement = DicStatement::new(params, own, neighbors)
        .expect("random ids collide with negligible probability");
    let witness = synthesize_witness(&statement, &s).expect("honest statement");
    Fixture {
        instance: statement.instance_vector(),
        witness,
        entropy: draw(rng),
    }
}

/// Times one parameter tuple: keygen once, then `trials` prove/verify rounds
/// over fresh statements, after five untimed warm-up rounds.
pub fn bench_point(params: CircuitParams, trials: usize, rng: &mut ChaCha20Rng) -> BenchRecord {
    assert!(trials >= 30, "fewer than 30 trials is noise, not data");
    let cs = build_circuit(params);
    let mut keygen_entropy = [0u8; 32];
    rng.fill_bytes(&mut keygen_entropy);
    let keygen_start = Instant::now();
    let (pk, vk) = keygen(&cs, &keygen_entropy).expect("valid circuit");
    let keygen_ms = keygen_start.elapsed().as_secs_f64() * 1e3;

    for _ in 0..5 {
        let fx = fresh_fixture(params, rng);
        let proof = prove(&pk, &fx.instance, &fx.witness, &fx.entropy).expect("warmup proof");
        assert!(verify(&vk, &fx.instance, &proof), "warmup must verify");
    }

    let mut tp = Vec::with_capacity(trials);
    let mut tv = Vec::with_capacity(trials);
    for _ in 0..trials {
        let fx = fresh_fixture(params, rng);
        let start = Instant::now();
        let proof = prove(&pk, &fx.instance, &fx.witness, &fx.entropy).expect("honest proof");
        tp.push(start.elapsed().as_secs_f64() * 1e3);
        let start = Instant::now();
        let ok = verify(&vk, &fx.instance, &proof);
        tv.push(start.elapsed().as_secs_f64() * 1e3);
        assert!(ok, "honest proof must verify");
    }

    BenchRecord {
        params,
        keygen_ms,
        tp_ms: mean(&tp),
        tp_sd: sample_sd(&tp),
        tp_mom: median_of_means(&tp),
        tv_ms: mean(&tv),
        tv_sd: sample_sd(&tv),
        tv_mom: median_of_means(&tv),
        proof_bytes: PROOF_BYTES,
        constraints: cs.num_constraints(),
        trials,
    }
}

/// One record per grid point, sequentially, fresh statements per trial.
pub fn run_sweep(grid: &[CircuitParams], trials: usize, seed: u64) -> Vec<BenchRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    grid.iter()
        .map(|&params| bench_point(params, trials, &mut rng))
        .collect()
}

/// CSV with the fixed header; decimal points, never locale-dependent.
pub fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{}\n",
            r.params.nx(),
            r.params.np(),
            r.params.k(),
            r.keygen_ms,
            r.tp_ms,
            r.tp_sd,
            r.tv_ms,
            r.tv_sd,
            r.proof_bytes,
            r.constraints,
            r.trials,
        ));
    }
    out
}

/// Parses emit_csv output back into records (timings as written; the
/// median-of-means columns are not in the CSV and come back as the means).
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => return Err(format!("bad header: {other:?}")),
    }
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 11 {
                return Err(format!("expected 11 fields, got {}", fields.len()));
            }
            let int = |i: usize| fields[i].parse::<usize>().map_err(|e| e.to_string());
            let num = |i: usize| fields[i].parse::<f64>().map_err(|e| e.to_string());
            let params = CircuitParams::new(
                int(0)? as u16,
                int(1)? as u16,
                int(2)? as u16,
            )
            .map_err(|e| e.to_string())?;
            Ok(BenchRecord {
                params,
                keygen_ms: num(3)?,
                tp_ms: num(4)?,
                tp_sd: num(5)?,
                tp_mom: num(4)?,
                tv_ms: num(6)?,
                tv_sd: num(7)?,
                tv_mom: num(6)?,
                proof_bytes: int(8)?,
                constraints: int(9)?,
                trials: int(10)?,
            })
        })
        .collect()
}

/// One human-readable line per record, with the median-of-means companions.
pub fn human_line(r: &BenchRecord) -> String {
    format!(
        "{:>3},{:>3},{} keygen {:>8.2}ms  Tp {:>7.2}±{:.2}ms (mom {:.2})  Tv {:>6.2}±{:.2}ms (mom {:.2})  proof {}B  constraints {}",
        r.params.nx(),
        r.params.np(),
        r.params.k(),
        r.keygen_ms,
        r.tp_ms,
        r.tp_sd,
        r.tp_mom,
        r.tv_ms,
        r.tv_sd,
        r.tv_mom,
        r.proof_bytes,
        r.constraints,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_the_full_cross() {
        let grid = default_grid();
        assert_eq!(grid.len(), 32);
        assert!(grid.iter().all(|p| p.k() == 1));
        assert_eq!(grid[0], CircuitParams::new(2, 2, 1).unwrap());
        assert_eq!(grid[31], CircuitParams::new(16, 256, 1).unwrap());
    }

    #[test]
    fn grid_spec_parses() {
        assert_eq!(parse_grid("default").unwrap().len(), 32);
        let custom = parse_grid("2,2,1;4,8,3").unwrap();
        assert_eq!(
            custom,
            vec![
                CircuitParams::new(2, 2, 1).unwrap(),
                CircuitParams::new(4, 8, 3).unwrap()
            ]
        );
        assert!(parse_grid("2,3,1").is_err());
    }

    #[test]
    fn statistics_helpers() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert!((mean(&xs) - 50.5).abs() < 1e-9);
        assert!((median_of_means(&xs) - 50.5).abs() < 1e-9);
        let sd = sample_sd(&xs);
        assert!((sd - 29.011).abs() < 0.01);
        // An outlier moves the mean but barely moves the median-of-means.
        let mut with_outlier = xs.clone();
        with_outlier[0] = 1e6;
        assert!(mean(&with_outlier) > 1000.0);
        assert!(median_of_means(&with_outlier) < 70.0);
    }

    #[test]
    fn empty_record_list_is_header_only() {
        assert_eq!(emit_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trips() {
        let records = run_sweep(&[CircuitParams::new(2, 2, 1).unwrap()], 30, 5);
        let csv = emit_csv(&records);
        let parsed = parse_csv(&csv).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].params, records[0].params);
        assert_eq!(parsed[0].proof_bytes, 128);
        assert_eq!(parsed[0].constraints, 8);
        assert_eq!(parsed[0].trials, 30);
        let reparsed = parse_csv(&emit_csv(&parsed)).unwrap();
        assert_eq!(parsed, reparsed);
    }

    #[test]
    fn bench_point_measures_something() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let r = bench_point(CircuitParams::new(2, 2, 1).unwrap(), 30, &mut rng);
        assert!(r.keygen_ms > 0.0);
        assert!(r.tp_ms > 0.0 && r.tv_ms > 0.0);
        assert_eq!(r.constraints, 8);
        assert_eq!(r.proof_bytes, 128);
    }
}
