//! Benchmark runs and their CSV report.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::codebook::Symbol;
use crate::decode_write::WriteStrategy;
use crate::encoder::oracle_symbols;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::report::{DecodeOptions, Decoded, PhaseTimings, Tuning};
use crate::stream::EncodedStream;
use crate::{decoder_gap, decoder_sync};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    Sync,
    Gap,
    Oracle,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Sync => "sync",
            DecoderKind::Gap => "gap",
            DecoderKind::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sync" => Ok(DecoderKind::Sync),
            "gap" => Ok(DecoderKind::Gap),
            "oracle" => Ok(DecoderKind::Oracle),
            _ => Err(format!("unknown decoder `{s}` (expected sync, gap or oracle)")),
        }
    }
}

/// One decode run. Throughput is decoded (quantization-code) bytes over
/// total decode time.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub decoder: DecoderKind,
    pub workers: usize,
    pub strategy: WriteStrategy,
    /// `None` when capacities come from the per-class tuner.
    pub capacity: Option<usize>,
    /// Staging capacity per nonempty class, when tuned.
    pub class_capacities: Vec<(u32, usize)>,
    pub t_high: Option<u32>,
    pub cr: f64,
    pub symbols: u64,
    pub decoded_bytes: u64,
    pub timings: PhaseTimings,
    pub inter_rounds: u32,
    pub mean_intra_rounds: f64,
}

impl BenchReport {
    pub fn throughput_gbs(&self) -> f64 {
        let s = self.timings.total.as_secs_f64();
        if s == 0.0 {
            return 0.0;
        }
        self.decoded_bytes as f64 / s / 1e9
    }
}

pub const CSV_HEADER: [&str; 20] = [
    "decoder",
    "workers",
    "strategy",
    "capacity",
    "t_high",
    "class_capacities",
    "cr",
    "symbols",
    "decoded_bytes",
    "intra_sync_s",
    "inter_sync_s",
    "gap_entries_s",
    "count_pass_s",
    "output_index_s",
    "tune_s",
    "decode_write_s",
    "total_s",
    "throughput_gbs",
    "inter_rounds",
    "mean_intra_rounds",
];

fn secs(d: Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

pub fn csv_record(r: &BenchReport) -> Vec<String> {
    let t = &r.timings;
    vec![
        r.decoder.name().into(),
        r.workers.to_string(),
        match r.strategy {
            WriteStrategy::Staged => "staged".into(),
            WriteStrategy::Scattered => "scattered".into(),
        },
        r.capacity.map_or("tuned".into(), |c| c.to_string()),
        r.t_high.map_or(String::new(), |t| t.to_string()),
        r.class_capacities.iter().map(|(c, n)| format!("{c}={n}")).collect::<Vec<_>>().join(";"),
        format!("{:.4}", r.cr),
        r.symbols.to_string(),
        r.decoded_bytes.to_string(),
        secs(t.intra_sync),
        secs(t.inter_sync),
        secs(t.gap_entries),
        secs(t.count_pass),
        secs(t.output_index),
        secs(t.tune),
        secs(t.decode_write),
        secs(t.total),
        format!("{:.6}", r.throughput_gbs()),
        r.inter_rounds.to_string(),
        format!("{:.3}", r.mean_intra_rounds),
    ]
}

pub fn write_csv(out: impl Write, rows: &[BenchReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(csv_record(r)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs one decoder and returns its output with the report.
pub fn run_decoder(
    stream: &EncodedStream,
    decoder: DecoderKind,
    exec: &Executor,
    opts: &DecodeOptions,
) -> Result<(Vec<Symbol>, BenchReport)> {
    let width = stream.codebook().symbol_width() as u64;
    let mut report = BenchReport {
        decoder,
        workers: exec.workers(),
        strategy: opts.strategy,
        capacity: match opts.tuning {
            Tuning::Fixed(c) => Some(c),
            Tuning::PerClass(_) => None,
        },
        class_capacities: Vec::new(),
        t_high: match &opts.tuning {
            Tuning::Fixed(_) => None,
            Tuning::PerClass(cfg) => Some(cfg.t_high),
        },
        cr: stream.compression_ratio(),
        symbols: stream.symbol_count(),
        decoded_bytes: stream.symbol_count() * width / 8,
        timings: PhaseTimings::default(),
        inter_rounds: 0,
        mean_intra_rounds: 0.0,
    };
    let decoded: Decoded = match decoder {
        DecoderKind::Oracle => {
            let t = Instant::now();
            let symbols = oracle_symbols(stream)?;
            report.timings.decode_write = t.elapsed();
            report.timings.total = report.timings.decode_write;
            report.workers = 1;
            report.capacity = None;
            report.t_high = None;
            return Ok((symbols, report));
        }
        DecoderKind::Sync => decoder_sync::decode_with(stream, exec, opts)?,
        DecoderKind::Gap => decoder_gap::decode_with(stream, exec, opts)?,
    };
    report.timings = decoded.timings;
    report.inter_rounds = decoded.stats.inter_rounds;
    let it = &decoded.state.iterations;
    if decoder == DecoderKind::Sync && !it.is_empty() {
        report.mean_intra_rounds = it.iter().map(|&x| x as f64).sum::<f64>() / it.len() as f64;
    }
    if let Some(plan) = &decoded.plan {
        report.class_capacities = (1..=plan.t_high + 1)
            .filter(|&c| plan.class_freq[c as usize - 1] > 0)
            .map(|c| (c, plan.capacity[c as usize - 1]))
            .collect();
    }
    Ok((decoded.symbols, report))
}

pub struct BenchPlan {
    pub decoders: Vec<DecoderKind>,
    pub workers: Vec<usize>,
    /// Fixed capacities to sweep; empty means per-class tuning.
    pub capacities: Vec<usize>,
    pub tuning: Tuning,
    pub strategy: WriteStrategy,
}

/// Runs every decoder over every worker count and capacity, checking each
/// output against `reference`. The oracle runs once.
pub fn run(stream: &EncodedStream, reference: &[Symbol], plan: &BenchPlan) -> Result<Vec<BenchReport>> {
    let mut rows = Vec::new();
    let mut tunings: Vec<Tuning> = plan.capacities.iter().map(|&c| Tuning::Fixed(c)).collect();
    if tunings.is_empty() {
        tunings.push(plan.tuning.clone());
    }
    for &decoder in &plan.decoders {
        if decoder == DecoderKind::Oracle {
            let exec = Executor::new(1)?;
            let (out, report) = run_decoder(stream, decoder, &exec, &DecodeOptions::default())?;
            check(&out, reference, decoder)?;
            rows.push(report);
            continue;
        }
        for &workers in &plan.workers {
            let exec = Executor::new(workers)?;
            for tuning in &tunings {
                let opts = DecodeOptions { tuning: tuning.clone(), strategy: plan.strategy, early_exit: true };
                let (out, report) = run_decoder(stream, decoder, &exec, &opts)?;
                check(&out, reference, decoder)?;
                rows.push(report);
            }
        }
    }
    Ok(rows)
}

fn check(out: &[Symbol], reference: &[Symbol], decoder: DecoderKind) -> Result<()> {
    if out != reference {
        let at = out.iter().zip(reference).position(|(a, b)| a != b).unwrap_or(out.len().min(reference.len()));
        return Err(Error::Mismatch { decoder: decoder.name(), at });
    }
    Ok(())
}
