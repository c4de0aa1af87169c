//! Command-line front end. Exit codes: 0 success, 1 usage, 2 data error.

pub mod bench;
pub mod container;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codebook::{histogram, Codebook, Symbol};
use crate::decode_write::WriteStrategy;
use crate::encoder::{encode, oracle_symbols};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::quantlite::{dequantize, quantize, synth_codes, QuantConfig, QuantResult};
use crate::report::{DecodeOptions, Tuning};
use crate::stream::{EncodedStream, LayoutConfig};
use crate::tuner::TunerConfig;
use bench::{BenchPlan, DecoderKind};

#[derive(Parser, Debug)]
#[command(name = "hufpar", version, about = "Parallel Huffman coding of quantization codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Huffman-encode a file of symbols into a HUF2 container.
    Encode(EncodeArgs),
    /// Decode a HUF2 container back to symbols.
    Decode(DecodeArgs),
    /// Quantize raw little-endian f32 values into codes plus an outlier sidecar.
    Quantize(QuantizeArgs),
    /// Reconstruct f32 values from codes and their outlier sidecar.
    Dequantize(DequantizeArgs),
    /// Time decoders on a container or a synthetic stream; writes CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LayoutArgs {
    /// Bits per unit word (8, 16 or 32).
    #[arg(long, default_value_t = 32)]
    pub unit_bits: u32,
    /// Units per subsequence.
    #[arg(long, default_value_t = 4)]
    pub subseq_units: u32,
    /// Subsequences per sequence.
    #[arg(long, default_value_t = 32)]
    pub seq_subseqs: u32,
}

impl LayoutArgs {
    fn layout(&self) -> Result<LayoutConfig> {
        LayoutConfig::new(self.unit_bits, self.subseq_units, self.seq_subseqs)
    }
}

#[derive(Args, Debug, Clone)]
pub struct TuneArgs {
    /// Number of compression-ratio classes before the overflow class.
    #[arg(long, default_value_t = crate::tuner::DEFAULT_T_HIGH)]
    pub t_high: u32,
    /// Staging capacity override for one class, as CLASS=N.
    #[arg(long = "capacity", value_parser = parse_class_capacity)]
    pub capacities: Vec<(u32, usize)>,
    /// Write strategy for the decode-and-write phase.
    #[arg(long, value_enum, default_value_t = StrategyArg::Staged)]
    pub strategy: StrategyArg,
}

impl TuneArgs {
    fn tuning(&self) -> Result<Tuning> {
        let mut cfg = TunerConfig::new(self.t_high)?;
        for &(class, cap) in &self.capacities {
            cfg = cfg.with_capacity(class, cap);
        }
        cfg.validate()?;
        Ok(Tuning::PerClass(cfg))
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Staged,
    Scattered,
}

impl From<StrategyArg> for WriteStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Staged => WriteStrategy::Staged,
            StrategyArg::Scattered => WriteStrategy::Scattered,
        }
    }
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Bits per input symbol; 16-bit symbols are little-endian.
    #[arg(long, default_value_t = 16, value_parser = parse_width)]
    pub symbol_width: u8,
    /// Store a gap array alongside the payload.
    #[arg(long)]
    pub gap: bool,
    /// JSON object mapping symbols to bit strings, used instead of a built codebook.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value = "sync", value_parser = DecoderKind::parse)]
    pub decoder: DecoderKind,
    #[arg(long, default_value_t = 1, value_parser = parse_workers)]
    pub workers: usize,
    #[command(flatten)]
    pub tune: TuneArgs,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("bound").required(true).args(["eb", "rel_eb"])))]
pub struct QuantizeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Absolute error bound.
    #[arg(long)]
    pub eb: Option<f64>,
    /// Error bound relative to the value range of the input.
    #[arg(long)]
    pub rel_eb: Option<f64>,
    #[arg(long, default_value_t = 16, value_parser = parse_width)]
    pub symbol_width: u8,
    /// Outlier sidecar path (default: OUTPUT.outliers).
    #[arg(long)]
    pub outliers: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DequantizeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Outlier sidecar path (default: INPUT.outliers).
    #[arg(long)]
    pub outliers: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Container to benchmark; omit when using --synth.
    #[arg(required_unless_present = "synth", conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Synthetic stream as SHARPNESS:SIZE, e.g. 0.999:64MiB.
    #[arg(long, value_parser = parse_synth)]
    pub synth: Option<(f64, u64)>,
    #[arg(long, default_value = "sync,gap,oracle", value_delimiter = ',', value_parser = DecoderKind::parse)]
    pub decoders: Vec<DecoderKind>,
    #[arg(long, default_value = "1", value_delimiter = ',', value_parser = parse_workers)]
    pub workers: Vec<usize>,
    /// Sweep a fixed staging capacity over LO:HI:STEP instead of tuning per class.
    #[arg(long, num_args = 0..=1, default_missing_value = "1024:8192:512", value_parser = parse_sweep)]
    pub sweep: Option<Sweep>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Symbol width of synthetic streams.
    #[arg(long, default_value_t = 16, value_parser = parse_width)]
    pub symbol_width: u8,
    #[command(flatten)]
    pub layout: LayoutArgs,
    #[command(flatten)]
    pub tune: TuneArgs,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_width(s: &str) -> std::result::Result<u8, String> {
    match s {
        "8" => Ok(8),
        "16" => Ok(16),
        _ => Err(format!("symbol width must be 8 or 16, got `{s}`")),
    }
}

fn parse_workers(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("worker count must be a positive integer, got `{s}`")),
    }
}

fn parse_class_capacity(s: &str) -> std::result::Result<(u32, usize), String> {
    let (c, n) = s.split_once('=').ok_or_else(|| format!("expected CLASS=N, got `{s}`"))?;
    let class = c.trim().parse::<u32>().map_err(|e| format!("class `{c}`: {e}"))?;
    let cap = n.trim().parse::<usize>().map_err(|e| format!("capacity `{n}`: {e}"))?;
    if class == 0 || cap == 0 {
        return Err(format!("class and capacity must be positive in `{s}`"));
    }
    Ok((class, cap))
}

/// Capacities visited by `--sweep`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sweep(pub Vec<usize>);

fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("expected LO:HI:STEP, got `{s}`"));
    };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if lo == 0 || step == 0 || hi < lo {
        return Err(format!("sweep needs 0 < LO <= HI and STEP > 0, got `{s}`"));
    }
    Ok(Sweep((lo..=hi).step_by(step).collect()))
}

/// Byte size with an optional KiB/MiB/GiB (or KB/MB/GB) suffix.
pub fn parse_size(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let n: u64 = num.parse().map_err(|_| format!("bad size `{s}`"))?;
    let mult = match unit.trim() {
        "" | "B" => 1,
        "KiB" => 1 << 10,
        "MiB" => 1 << 20,
        "GiB" => 1 << 30,
        "KB" => 1_000,
        "MB" => 1_000_000,
        "GB" => 1_000_000_000,
        u => return Err(format!("unknown size unit `{u}`")),
    };
    n.checked_mul(mult).ok_or_else(|| format!("size `{s}` overflows"))
}

fn parse_synth(s: &str) -> std::result::Result<(f64, u64), String> {
    let (p, size) = s.split_once(':').ok_or_else(|| format!("expected SHARPNESS:SIZE, got `{s}`"))?;
    let p: f64 = p.trim().parse().map_err(|e| format!("sharpness `{p}`: {e}"))?;
    if !(p > 0.0 && p < 1.0) {
        return Err(format!("sharpness {p} outside (0, 1)"));
    }
    Ok((p, parse_size(size)?))
}

pub fn read_symbols(bytes: &[u8], width: u8) -> Result<Vec<Symbol>> {
    match width {
        8 => Ok(bytes.iter().map(|&b| b as Symbol).collect()),
        _ => {
            if !bytes.len().is_multiple_of(2) {
                return Err(Error::Container(format!("{} bytes is not a whole number of 16-bit symbols", bytes.len())));
            }
            Ok(bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect())
        }
    }
}

pub fn symbol_bytes(symbols: &[Symbol], width: u8) -> Vec<u8> {
    match width {
        8 => symbols.iter().map(|&s| s as u8).collect(),
        _ => symbols.iter().flat_map(|s| s.to_le_bytes()).collect(),
    }
}

/// Reads `{"A": "00", "66": "10", ...}`. Keys that parse as integers are
/// symbol values; any other single-character key stands for its code point.
pub fn parse_codebook_json(text: &str, width: u8) -> Result<Codebook> {
    let bad = |m: String| Error::InvalidConfig(format!("codebook: {m}"));
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let map = value.as_object().ok_or_else(|| bad("expected a JSON object".into()))?;
    let mut entries = Vec::with_capacity(map.len());
    for (key, code) in map {
        let symbol = match key.parse::<u32>() {
            Ok(n) => n,
            Err(_) => {
                let mut chars = key.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => c as u32,
                    _ => return Err(bad(format!("key `{key}` is neither a number nor one character"))),
                }
            }
        };
        let bits = code.as_str().ok_or_else(|| bad(format!("code for `{key}` is not a string")))?;
        if bits.is_empty() || bits.len() > 32 || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(bad(format!("code `{bits}` for `{key}` is not 1 to 32 binary digits")));
        }
        let code = u32::from_str_radix(bits, 2).map_err(|e| bad(e.to_string()))?;
        entries.push((symbol, code, bits.len() as u8));
    }
    Codebook::from_explicit(&entries, width)
}

/// Canonical codebook over the symbols actually present.
pub fn build_codebook(symbols: &[Symbol], width: u8) -> Result<Codebook> {
    let alphabet = symbols.iter().map(|&s| s as usize + 1).max().unwrap_or(0);
    Codebook::from_frequencies(&histogram(symbols, alphabet), width)
}

fn load(path: &Path) -> Result<EncodedStream> {
    container::from_bytes(&fs::read(path)?)
}

fn outlier_path(explicit: &Option<PathBuf>, base: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut p = base.as_os_str().to_owned();
        p.push(".outliers");
        PathBuf::from(p)
    })
}

/// Sidecar layout: eb f64 | symbol_width u8 | count u64 | (index u64, value f32)*.
pub fn outliers_to_bytes(res: &QuantResult, cfg: &QuantConfig) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + res.outliers.len() * 12);
    out.extend_from_slice(&cfg.error_bound.to_le_bytes());
    out.push(cfg.symbol_width);
    out.extend_from_slice(&(res.outliers.len() as u64).to_le_bytes());
    for &(i, v) in &res.outliers {
        out.extend_from_slice(&i.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn outliers_from_bytes(bytes: &[u8]) -> Result<(QuantConfig, Vec<(u64, f32)>)> {
    if bytes.len() < 17 {
        return Err(Error::Container("outlier sidecar shorter than its header".into()));
    }
    let eb = f64::from_le_bytes(bytes[..8].try_into().unwrap());
    let cfg = QuantConfig::new(eb, bytes[8])?;
    let n = u64::from_le_bytes(bytes[9..17].try_into().unwrap());
    let body = &bytes[17..];
    if n.checked_mul(12) != Some(body.len() as u64) {
        return Err(Error::Container(format!("outlier sidecar declares {n} entries in {} bytes", body.len())));
    }
    let outliers = body
        .chunks_exact(12)
        .map(|c| (u64::from_le_bytes(c[..8].try_into().unwrap()), f32::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    Ok((cfg, outliers))
}

pub fn read_f32s(bytes: &[u8]) -> Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Container(format!("{} bytes is not a whole number of f32 values", bytes.len())));
    }
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
}

fn cmd_encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let layout = a.layout.layout()?;
    let symbols = read_symbols(&fs::read(&a.input)?, a.symbol_width)?;
    let book = match &a.codebook {
        Some(path) => parse_codebook_json(&fs::read_to_string(path)?, a.symbol_width)?,
        None => build_codebook(&symbols, a.symbol_width)?,
    };
    let stream = encode(&symbols, &book, layout, a.gap)?;
    fs::write(&a.output, container::to_bytes(&stream))?;
    writeln!(
        out,
        "symbols={} total_bits={} payload_bytes={} gap_bytes={} cr={:.4}",
        stream.symbol_count(),
        stream.total_bits(),
        stream.payload_bytes(),
        stream.gap().map_or(0, |g| g.len()),
        stream.compression_ratio()
    )?;
    Ok(())
}

fn cmd_decode(a: &DecodeArgs, out: &mut dyn Write) -> Result<()> {
    let stream = load(&a.input)?;
    let exec = Executor::new(a.workers)?;
    let opts = DecodeOptions { tuning: a.tune.tuning()?, strategy: a.tune.strategy.into(), early_exit: true };
    let (symbols, report) = bench::run_decoder(&stream, a.decoder, &exec, &opts)?;
    fs::write(&a.output, symbol_bytes(&symbols, stream.codebook().symbol_width()))?;
    bench::write_csv(out, &[report])
}

fn cmd_quantize(a: &QuantizeArgs, out: &mut dyn Write) -> Result<()> {
    let data = read_f32s(&fs::read(&a.input)?)?;
    let cfg = match (a.eb, a.rel_eb) {
        (Some(eb), _) => QuantConfig::new(eb, a.symbol_width)?,
        (None, Some(rel)) => QuantConfig::relative(&data, rel, a.symbol_width)?,
        (None, None) => unreachable!("clap requires one bound"),
    };
    let res = quantize(&data, &cfg)?;
    fs::write(&a.output, symbol_bytes(&res.codes, cfg.symbol_width))?;
    fs::write(outlier_path(&a.outliers, &a.output), outliers_to_bytes(&res, &cfg))?;
    writeln!(out, "values={} eb={} outliers={}", data.len(), cfg.error_bound, res.outliers.len())?;
    Ok(())
}

fn cmd_dequantize(a: &DequantizeArgs, out: &mut dyn Write) -> Result<()> {
    let (cfg, outliers) = outliers_from_bytes(&fs::read(outlier_path(&a.outliers, &a.input))?)?;
    let codes = read_symbols(&fs::read(&a.input)?, cfg.symbol_width)?;
    if let Some(&(i, _)) = outliers.iter().find(|&&(i, _)| i >= codes.len() as u64) {
        return Err(Error::Container(format!("outlier index {i} beyond {} codes", codes.len())));
    }
    let values = dequantize(&QuantResult { codes, outliers }, &cfg);
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&a.output, bytes)?;
    writeln!(out, "values={} eb={}", values.len(), cfg.error_bound)?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let (stream, reference) = match (&a.input, a.synth) {
        (Some(path), _) => {
            let stream = load(path)?;
            let reference = oracle_symbols(&stream)?;
            (stream, reference)
        }
        (None, Some((sharpness, size))) => {
            let n = (size / (a.symbol_width as u64 / 8)) as usize;
            let codes = synth_codes(n, sharpness, a.seed, a.symbol_width)?;
            let book = build_codebook(&codes, a.symbol_width)?;
            (encode(&codes, &book, a.layout.layout()?, true)?, codes)
        }
        (None, None) => unreachable!("clap requires an input or --synth"),
    };
    let plan = BenchPlan {
        decoders: a.decoders.clone(),
        workers: a.workers.clone(),
        capacities: a.sweep.clone().map(|s| s.0).unwrap_or_default(),
        tuning: a.tune.tuning()?,
        strategy: a.tune.strategy.into(),
    };
    let rows = bench::run(&stream, &reference, &plan)?;
    match &a.out {
        Some(path) => bench::write_csv(fs::File::create(path)?, &rows),
        None => bench::write_csv(out, &rows),
    }
}

/// Flag combinations clap cannot check on its own (layout shape, class
/// numbers against `--t-high`). Failures here are usage errors.
pub fn validate(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Encode(a) => a.layout.layout().map(drop),
        Command::Decode(a) => a.tune.tuning().map(drop),
        Command::Quantize(a) => match a.eb {
            Some(eb) => QuantConfig::new(eb, a.symbol_width).map(drop),
            None => Ok(()),
        },
        Command::Dequantize(_) => Ok(()),
        Command::Bench(a) => {
            a.layout.layout()?;
            a.tune.tuning().map(drop)
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Encode(a) => cmd_encode(a, out),
        Command::Decode(a) => cmd_decode(a, out),
        Command::Quantize(a) => cmd_quantize(a, out),
        Command::Dequantize(a) => cmd_dequantize(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = validate(&cli) {
        eprintln!("error: {e}");
        return 1;
    }
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
