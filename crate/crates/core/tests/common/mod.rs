//! Randomized stream cases shared by the integration and acceptance suites.
#![allow(dead_code)]

use hufpar::codebook::{histogram, Codebook, Symbol};
use hufpar::decode_write::WriteStrategy;
use hufpar::quantlite::synth_codes;
use hufpar::stream::LayoutConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CAPACITIES: [usize; 5] = [1, 8, 1024, 3584, 8192];
pub const WORKERS: [usize; 3] = [1, 2, 8];
pub const T_HIGHS: [u32; 3] = [1, 4, 8];

#[derive(Clone, Debug)]
pub struct Case {
    pub seed: u64,
    pub width: u8,
    pub alphabet: usize,
    /// `None` for uniform symbols.
    pub sharpness: Option<f64>,
    pub symbols: Vec<Symbol>,
    pub layout: LayoutConfig,
    pub workers: usize,
    pub capacity: usize,
    pub t_high: u32,
    pub strategy: WriteStrategy,
}

impl Case {
    pub fn codebook(&self) -> Codebook {
        Codebook::from_frequencies(&histogram(&self.symbols, self.alphabet), self.width).unwrap()
    }
}

/// Length drawn log-uniformly from `0..=max_len`.
pub fn log_uniform_len(rng: &mut ChaCha8Rng, max_len: usize) -> usize {
    let x: f64 = rng.random::<f64>() * ((max_len + 1) as f64).ln();
    (x.exp() as usize).saturating_sub(1).min(max_len)
}

/// Midpoint-centred synthetic codes folded into `0..alphabet`.
pub fn folded_codes(n: usize, sharpness: f64, seed: u64, width: u8, alphabet: usize) -> Vec<Symbol> {
    let mid = 1i64 << (width - 1);
    let centre = (alphabet / 2) as i64;
    synth_codes(n, sharpness, seed, width)
        .unwrap()
        .into_iter()
        .map(|c| (c as i64 - mid + centre).clamp(0, alphabet as i64 - 1) as Symbol)
        .collect()
}

pub fn random_layout(rng: &mut ChaCha8Rng) -> LayoutConfig {
    if rng.random_bool(0.3) {
        return LayoutConfig::default();
    }
    let unit_bits = [8, 16, 32][rng.random_range(0..3)];
    LayoutConfig::new(unit_bits, rng.random_range(1..=8), rng.random_range(1..=64)).unwrap()
}

pub fn random_case(seed: u64, max_len: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = if rng.random_bool(0.5) { 8 } else { 16 };
    let max_alphabet = if width == 8 { 256 } else { 4096 };
    let alphabet = rng.random_range(1..=max_alphabet);
    let n = log_uniform_len(&mut rng, max_len);
    let (sharpness, symbols) = if rng.random_bool(0.15) {
        let s = (0..n).map(|_| rng.random_range(0..alphabet) as Symbol).collect();
        (None, s)
    } else {
        let p = rng.random_range(0.02..0.9995);
        (Some(p), folded_codes(n, p, rng.random(), width, alphabet))
    };
    Case {
        seed,
        width,
        alphabet,
        sharpness,
        symbols,
        layout: random_layout(&mut rng),
        workers: WORKERS[rng.random_range(0..WORKERS.len())],
        capacity: CAPACITIES[rng.random_range(0..CAPACITIES.len())],
        t_high: T_HIGHS[rng.random_range(0..T_HIGHS.len())],
        strategy: if rng.random_bool(0.2) { WriteStrategy::Scattered } else { WriteStrategy::Staged },
    }
}

use hufpar::encoder::{encode, oracle_decode};
use hufpar::exec::Executor;
use hufpar::report::{DecodeOptions, Tuning};
use hufpar::tuner::TunerConfig;
use hufpar::{decoder_gap, decoder_sync};

#[derive(Clone, Debug, Default)]
pub struct CaseStats {
    pub sync_points: usize,
    pub mean_rounds: f64,
    pub cr: f64,
}

/// Runs every decoder path on `case` and compares against the oracle.
pub fn check_case(case: &Case) -> Result<CaseStats, String> {
    let ctx = |what: &str, e: hufpar::Error| format!("case {}: {what}: {e}", case.seed);
    let book = case.codebook();
    let stream = encode(&case.symbols, &book, case.layout, true).map_err(|e| ctx("encode", e))?;
    let oracle = oracle_decode(&stream).map_err(|e| ctx("oracle", e))?;
    if oracle.symbols != case.symbols {
        return Err(format!("case {}: oracle differs from input", case.seed));
    }
    let exec = Executor::new(case.workers).unwrap();
    let fixed = DecodeOptions { tuning: Tuning::Fixed(case.capacity), strategy: case.strategy, early_exit: true };
    let tuned = DecodeOptions {
        tuning: Tuning::PerClass(TunerConfig::new(case.t_high).unwrap()),
        strategy: case.strategy,
        early_exit: true,
    };
    let capped = DecodeOptions { early_exit: false, ..fixed.clone() };

    let sync = decoder_sync::decode_with(&stream, &exec, &fixed).map_err(|e| ctx("sync", e))?;
    let sync_tuned = decoder_sync::decode_with(&stream, &exec, &tuned).map_err(|e| ctx("sync tuned", e))?;
    let sync_capped = decoder_sync::decode_with(&stream, &exec, &capped).map_err(|e| ctx("sync capped", e))?;
    let gap = decoder_gap::decode_with(&stream, &exec, &fixed).map_err(|e| ctx("gap", e))?;
    let gap_tuned = decoder_gap::decode_with(&stream, &exec, &tuned).map_err(|e| ctx("gap tuned", e))?;
    for (name, out) in [
        ("sync", &sync.symbols),
        ("sync tuned", &sync_tuned.symbols),
        ("sync capped", &sync_capped.symbols),
        ("gap", &gap.symbols),
        ("gap tuned", &gap_tuned.symbols),
    ] {
        if *out != oracle.symbols {
            return Err(format!("case {}: {name} differs from oracle", case.seed));
        }
    }
    if !sync.state.same_points(&sync_capped.state) {
        return Err(format!("case {}: early-exit state differs from capped state", case.seed));
    }
    if sync.state.entry != gap.state.entry || sync.state.count != oracle.per_subseq_counts {
        return Err(format!("case {}: sync points disagree with gap entries or oracle counts", case.seed));
    }
    let total = stream.total_bits();
    let mut points = 0;
    for (i, (&e, &ok)) in sync.state.entry.iter().zip(&sync.state.synced).enumerate() {
        if !ok {
            return Err(format!("case {}: slot {i} never synchronized", case.seed));
        }
        if !(oracle.is_start(e) || e == total) {
            return Err(format!("case {}: slot {i} entry {e} is not a codeword start", case.seed));
        }
        points += 1;
    }
    let it = &sync.state.iterations;
    let mean_rounds = if it.is_empty() { 0.0 } else { it.iter().map(|&x| x as f64).sum::<f64>() / it.len() as f64 };
    Ok(CaseStats { sync_points: points, mean_rounds, cr: stream.compression_ratio() })
}
