//! Decoder options and the per-run accounting they produce.

use std::time::Duration;

use crate::codebook::Symbol;
use crate::decode_write::{OutputIndex, WriteStrategy};
use crate::decoder_sync::SyncState;
use crate::tuner::{PartitionPlan, TunerConfig};

/// How staging capacities are chosen for the write phase.
#[derive(Clone, Debug, PartialEq)]
pub enum Tuning {
    /// One capacity (in symbols) for every sequence.
    Fixed(usize),
    /// Capacity chosen per compression-ratio class.
    PerClass(TunerConfig),
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning::PerClass(TunerConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOptions {
    pub tuning: Tuning,
    pub strategy: WriteStrategy,
    /// Stop intra-sequence rounds as soon as every slot is confirmed.
    pub early_exit: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions { tuning: Tuning::default(), strategy: WriteStrategy::Staged, early_exit: true }
    }
}

impl DecodeOptions {
    pub fn fixed(capacity: usize) -> Self {
        DecodeOptions { tuning: Tuning::Fixed(capacity), ..DecodeOptions::default() }
    }
}

/// Wall time per phase. Phases a decoder does not have stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    pub intra_sync: Duration,
    pub inter_sync: Duration,
    pub gap_entries: Duration,
    pub count_pass: Duration,
    pub output_index: Duration,
    pub tune: Duration,
    pub decode_write: Duration,
    pub total: Duration,
}

impl PhaseTimings {
    pub fn phase_sum(&self) -> Duration {
        self.intra_sync
            + self.inter_sync
            + self.gap_entries
            + self.count_pass
            + self.output_index
            + self.tune
            + self.decode_write
    }
}

/// Bits pushed through the codeword decoder per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Speculative and validation decoding (self-synchronization only).
    pub sync_bits: u64,
    /// Index-determination decoding (gap array only).
    pub count_bits: u64,
    pub write_bits: u64,
    pub inter_rounds: u32,
    pub groups_launched: usize,
    pub bypassed_slots: u64,
}

impl DecodeStats {
    pub fn total_bits(&self) -> u64 {
        self.sync_bits + self.count_bits + self.write_bits
    }
}

#[derive(Clone, Debug)]
pub struct Decoded {
    pub symbols: Vec<Symbol>,
    pub state: SyncState,
    pub index: OutputIndex,
    pub plan: Option<PartitionPlan>,
    pub timings: PhaseTimings,
    pub stats: DecodeStats,
}
