//! Minimal error-bounded quantizer and synthetic quantization-code generator.
//!
//! Prediction is order-1: each value is predicted by the reconstruction of
//! its predecessor, and the residual is quantized into bins of width
//! `2 * error_bound`. Codes are offset by a midpoint so they are unsigned;
//! residuals that do not fit the code range (or would break the bound after
//! rounding) are stored verbatim as outliers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::codebook::Symbol;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantConfig {
    pub error_bound: f64,
    pub symbol_width: u8,
}

impl QuantConfig {
    pub fn new(error_bound: f64, symbol_width: u8) -> Result<Self> {
        if !(error_bound > 0.0 && error_bound.is_finite()) {
            return Err(Error::InvalidConfig(format!("error bound {error_bound} must be positive")));
        }
        if !matches!(symbol_width, 8 | 16) {
            return Err(Error::InvalidConfig(format!("symbol width {symbol_width} not in {{8, 16}}")));
        }
        Ok(QuantConfig { error_bound, symbol_width })
    }

    /// Code for a zero residual.
    pub fn midpoint(&self) -> u32 {
        1 << (self.symbol_width - 1)
    }

    /// Error bound of `rel` times the value range of `data`.
    pub fn relative(data: &[f32], rel: f64, symbol_width: u8) -> Result<Self> {
        let (lo, hi) = value_range(data)?;
        QuantConfig::new(rel * (hi - lo), symbol_width)
    }
}

fn value_range(data: &[f32]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &x) in data.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput { index: i });
        }
        lo = lo.min(x as f64);
        hi = hi.max(x as f64);
    }
    if data.is_empty() {
        return Ok((0.0, 0.0));
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuantResult {
    pub codes: Vec<Symbol>,
    /// `(index, original value)`, indices increasing.
    pub outliers: Vec<(u64, f32)>,
}

#[inline]
fn reconstruct(pred: f32, code: u32, cfg: &QuantConfig) -> f32 {
    let q = code as i64 - cfg.midpoint() as i64;
    (pred as f64 + 2.0 * cfg.error_bound * q as f64) as f32
}

/// Quantizes `data` against order-1 prediction. Reconstructions are computed
/// in `f32`, exactly as [`dequantize`] will, so the bound is checked on the
/// values the caller gets back.
pub fn quantize(data: &[f32], cfg: &QuantConfig) -> Result<QuantResult> {
    let mid = cfg.midpoint() as i64;
    let max_code = (1i64 << cfg.symbol_width) - 1;
    let mut codes = Vec::with_capacity(data.len());
    let mut outliers = Vec::new();
    let mut pred = 0f32;
    for (i, &x) in data.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFiniteInput { index: i });
        }
        let scaled = (x as f64 - pred as f64) / (2.0 * cfg.error_bound);
        // f64::round rounds half away from zero.
        let q = scaled.round();
        let code = q + mid as f64;
        let mut recon = None;
        if code >= 0.0 && code <= max_code as f64 {
            let r = reconstruct(pred, code as u32, cfg);
            if (x as f64 - r as f64).abs() <= cfg.error_bound {
                codes.push(code as Symbol);
                recon = Some(r);
            }
        }
        match recon {
            Some(r) => pred = r,
            None => {
                codes.push(mid as Symbol);
                outliers.push((i as u64, x));
                pred = x;
            }
        }
    }
    Ok(QuantResult { codes, outliers })
}

pub fn dequantize(result: &QuantResult, cfg: &QuantConfig) -> Vec<f32> {
    let mut out = Vec::with_capacity(result.codes.len());
    let mut outliers = result.outliers.iter().peekable();
    let mut pred = 0f32;
    for (i, &code) in result.codes.iter().enumerate() {
        let value = match outliers.peek() {
            Some(&&(idx, v)) if idx == i as u64 => {
                outliers.next();
                v
            }
            _ => reconstruct(pred, code as u32, cfg),
        };
        out.push(value);
        pred = value;
    }
    out
}

/// Midpoint-centred two-sided geometric codes. The magnitude of the deviation
/// is geometric with success probability `sharpness`, so `sharpness` is the
/// probability of the midpoint itself: near 1 the stream is almost constant
/// (high compression ratio), near 0 it spreads widely.
pub fn synth_codes(n: usize, sharpness: f64, seed: u64, symbol_width: u8) -> Result<Vec<Symbol>> {
    if !(sharpness > 0.0 && sharpness < 1.0) {
        return Err(Error::InvalidConfig(format!("sharpness {sharpness} outside (0, 1)")));
    }
    if !matches!(symbol_width, 8 | 16) {
        return Err(Error::InvalidConfig(format!("symbol width {symbol_width} not in {{8, 16}}")));
    }
    let mid = 1i64 << (symbol_width - 1);
    let max = (1i64 << symbol_width) - 1;
    let geo = Geometric::new(sharpness).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let k = geo.sample(&mut rng).min(max as u64) as i64;
            let dev = if k != 0 && rng.random::<bool>() { -k } else { k };
            (mid + dev).clamp(0, max) as Symbol
        })
        .collect())
}

/// Smooth test field: a few superposed sinusoids plus mild noise.
pub fn smooth_field(n: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    (0..n)
        .map(|i| {
            let t = i as f64 / n.max(1) as f64;
            let v = (t * 17.0 + phase).sin() * 3.0 + (t * 131.0).cos() * 0.7 + (t * 977.0 + phase).sin() * 0.05;
            (v + rng.random::<f64>() * 1e-3) as f32
        })
        .collect()
}
