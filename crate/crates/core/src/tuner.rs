//! Staging-capacity tuning by per-sequence compression ratio.
//!
//! Sequences are classified into `t_high + 1` groups: `(0, 1]`, `(1, 2]`, …,
//! `(t_high - 1, t_high]` and an overflow group for everything above
//! `t_high`. Each group is decoded with a staging buffer sized for its ratio,
//! so highly compressible sequences (many symbols per encoded bit) get larger
//! buffers without penalising the rest.

use std::collections::BTreeMap;

use crate::decode_write::{run_groups, OutputIndex, WriteGroup, WriteOutcome, WriteStrategy};
use crate::codebook::Symbol;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::stream::EncodedStream;

/// Symbols of staging per unit of compression ratio.
pub const SYMBOLS_PER_CLASS: usize = 1024;
/// Staging capacity of the overflow class.
pub const OVERFLOW_CAPACITY: usize = 3584;
pub const DEFAULT_T_HIGH: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TunerConfig {
    pub t_high: u32,
    /// Per-class overrides (class numbers start at 1).
    pub capacity_table: BTreeMap<u32, usize>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        TunerConfig { t_high: DEFAULT_T_HIGH, capacity_table: BTreeMap::new() }
    }
}

impl TunerConfig {
    pub fn new(t_high: u32) -> Result<Self> {
        let c = TunerConfig { t_high, ..TunerConfig::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn with_capacity(mut self, class: u32, capacity: usize) -> Self {
        self.capacity_table.insert(class, capacity);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_high == 0 {
            return Err(Error::InvalidConfig("t_high must be at least 1".into()));
        }
        for (&class, &cap) in &self.capacity_table {
            if class == 0 || class > self.t_high + 1 {
                return Err(Error::InvalidConfig(format!("class {class} outside 1..={}", self.t_high + 1)));
            }
            if cap == 0 {
                return Err(Error::InvalidConfig(format!("capacity for class {class} must be positive")));
            }
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.t_high as usize + 1
    }
}

/// Class of a compression ratio: `ceil(ratio)` up to `t_high`, else `t_high + 1`.
pub fn classify(ratio: f64, t_high: u32) -> Result<u32> {
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(Error::NonPositiveRatio(ratio));
    }
    if ratio > t_high as f64 {
        return Ok(t_high + 1);
    }
    Ok((ratio.ceil() as u32).max(1))
}

/// Sequences per class; slot `c - 1` holds class `c`.
pub fn histogram(classes: &[u32], t_high: u32) -> Vec<usize> {
    let mut freq = vec![0usize; t_high as usize + 1];
    for &c in classes {
        freq[c as usize - 1] += 1;
    }
    freq
}

/// Sequence indices stably sorted by class.
pub fn sort_by_class(classes: &[u32]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..classes.len()).collect();
    perm.sort_by_key(|&i| classes[i]);
    perm
}

/// `start[0] = 0`, `start[i] = start[i - 1] + freq[i - 1]`.
pub fn class_starts(class_freq: &[usize]) -> Vec<usize> {
    let mut start = vec![0usize; class_freq.len().max(1)];
    for i in 1..class_freq.len() {
        start[i] = start[i - 1] + class_freq[i - 1];
    }
    start
}

pub fn capacity(class: u32, config: &TunerConfig) -> usize {
    if let Some(&cap) = config.capacity_table.get(&class) {
        return cap;
    }
    if class <= config.t_high {
        class as usize * SYMBOLS_PER_CLASS
    } else {
        OVERFLOW_CAPACITY
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionPlan {
    pub t_high: u32,
    /// Decoded bits over encoded bits, per sequence.
    pub comp_ratio: Vec<f64>,
    pub comp_class: Vec<u32>,
    pub class_freq: Vec<usize>,
    pub permutation: Vec<usize>,
    pub class_start: Vec<usize>,
    /// Staging capacity per class (slot `c - 1` for class `c`).
    pub capacity: Vec<usize>,
}

impl PartitionPlan {
    /// Sequences of class `c`, in original order.
    pub fn members(&self, class: u32) -> &[usize] {
        let i = class as usize - 1;
        &self.permutation[self.class_start[i]..self.class_start[i] + self.class_freq[i]]
    }

    /// One write group per nonempty class.
    pub fn groups(&self) -> Vec<WriteGroup> {
        (1..=self.t_high + 1)
            .filter(|&c| self.class_freq[c as usize - 1] > 0)
            .map(|c| WriteGroup { capacity: self.capacity[c as usize - 1], seqs: self.members(c).to_vec() })
            .collect()
    }

    pub fn nonempty_classes(&self) -> usize {
        self.class_freq.iter().filter(|&&f| f > 0).count()
    }
}

/// Builds the partition plan from per-sequence symbol counts (taken from
/// the synchronization or counting phase).
pub fn plan(stream: &EncodedStream, seq_counts: &[u64], config: &TunerConfig) -> Result<PartitionPlan> {
    config.validate()?;
    let nseq = stream.num_seqs();
    if seq_counts.len() != nseq {
        return Err(Error::InvalidConfig(format!("{} counts for {nseq} sequences", seq_counts.len())));
    }
    let layout = stream.layout();
    let width = stream.codebook().symbol_width() as f64;
    let total = stream.total_bits();
    let comp_ratio: Vec<f64> = (0..nseq)
        .map(|s| {
            let lo = s as u64 * layout.seq_bits();
            let bits = (lo + layout.seq_bits()).min(total) - lo;
            seq_counts[s] as f64 * width / bits as f64
        })
        .collect();
    // A sequence holding no codeword start (possible only with tiny
    // subsequences) has nothing to write; it goes with the smallest class.
    let comp_class = comp_ratio
        .iter()
        .map(|&r| if r == 0.0 { Ok(1) } else { classify(r, config.t_high) })
        .collect::<Result<Vec<u32>>>()?;
    let class_freq = histogram(&comp_class, config.t_high);
    let permutation = sort_by_class(&comp_class);
    let class_start = class_starts(&class_freq);
    let capacity = (1..=config.t_high + 1).map(|c| capacity(c, config)).collect();
    Ok(PartitionPlan {
        t_high: config.t_high,
        comp_ratio,
        comp_class,
        class_freq,
        permutation,
        class_start,
        capacity,
    })
}

/// Write phase with one task group per nonempty class.
pub fn decode_partitioned(
    stream: &EncodedStream,
    entries: &[u64],
    index: &OutputIndex,
    plan: &PartitionPlan,
    strategy: WriteStrategy,
    exec: &Executor,
) -> Result<(Vec<Symbol>, WriteOutcome)> {
    let table = stream.codebook().decode_table();
    run_groups(stream, &table, entries, index, &plan.groups(), strategy, exec)
}
