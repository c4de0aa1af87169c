//! Self-synchronization decoder.
//!
//! Four phases separated by barriers:
//!
//! 1. Intra-sequence sync: every slot decodes its subsequence speculatively
//!    from the subsequence boundary. In each later round a slot compares the
//!    exit bit its left neighbour produced in the previous round with its own
//!    entry bit. On a mismatch it adopts the neighbour's exit and decodes
//!    again. A round in which every slot matches ends the loop early.
//! 2. Inter-sequence sync: the exit of each sequence's last slot seeds the
//!    next sequence's first slot; sequences whose seed changed redo phase 1.
//! 3. Output index: exclusive prefix sum of the per-slot counts.
//! 4. Decode and write through staging buffers, optionally partitioned by
//!    per-sequence compression ratio.

use std::time::Instant;

use rayon::prelude::*;

use crate::codebook::{DecodeTable, Symbol};
use crate::decode_write::{run_groups, WriteGroup};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::report::{DecodeOptions, DecodeStats, Decoded, PhaseTimings, Tuning};
use crate::stream::{BitSource, EncodedStream};
use crate::tuner;

pub use crate::decode_write::{output_index, OutputIndex};

/// Synchronization points for every subsequence of the stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SyncState {
    /// Validated codeword start where each slot begins decoding.
    pub entry: Vec<u64>,
    /// Bit where decoding from `entry` crossed the end of the subsequence.
    pub exit: Vec<u64>,
    /// Codewords starting inside the subsequence when decoded from `entry`.
    pub count: Vec<u32>,
    pub synced: Vec<bool>,
    /// Rounds used by the last intra-sequence run of each sequence.
    pub iterations: Vec<u32>,
}

impl SyncState {
    /// Equality of the synchronization result, ignoring round counts.
    pub fn same_points(&self, other: &SyncState) -> bool {
        self.entry == other.entry
            && self.exit == other.exit
            && self.count == other.count
            && self.synced == other.synced
    }

    pub fn per_seq_counts(&self, stream: &EncodedStream) -> Vec<u64> {
        (0..stream.num_seqs())
            .map(|s| {
                let r = stream.layout().seq_subseqs(s, stream.total_bits());
                self.count[r].iter().map(|&c| c as u64).sum()
            })
            .collect()
    }
}

/// Result of intra-sequence synchronization for one sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqSync {
    pub entry: Vec<u64>,
    pub exit: Vec<u64>,
    pub count: Vec<u32>,
    pub synced: Vec<bool>,
    pub rounds: u32,
    /// Bits run through the decoder, including repeated decodes.
    pub bits_decoded: u64,
}

/// Phases 1 and 2 for one stream.
pub struct SyncDecoder<'a> {
    stream: &'a EncodedStream,
    table: DecodeTable,
    early_exit: bool,
}

impl<'a> SyncDecoder<'a> {
    pub fn new(stream: &'a EncodedStream) -> Self {
        SyncDecoder { stream, table: stream.codebook().decode_table(), early_exit: true }
    }

    /// With `false`, every sequence runs the full round cap.
    pub fn early_exit(mut self, on: bool) -> Self {
        self.early_exit = on;
        self
    }

    pub fn table(&self) -> &DecodeTable {
        &self.table
    }

    fn slot_end(&self, i: usize) -> u64 {
        self.stream.layout().subseq_boundary(i + 1).min(self.stream.total_bits())
    }

    /// Decodes without writing from `from` until the cursor reaches `end`.
    /// Bit patterns matching no codeword (incomplete codes, misaligned
    /// positions) are stepped over one bit at a time; a slot that started in
    /// the wrong place is corrected by a later round anyway.
    #[inline]
    fn scan(&self, from: u64, end: u64) -> (u64, u32) {
        let mut cursor = from;
        let mut count = 0u32;
        while cursor < end {
            match self.table.lookup(self.stream.peek32(cursor)) {
                Some((_, len)) => {
                    cursor += len as u64;
                    count += 1;
                }
                None => cursor += 1,
            }
        }
        (cursor, count)
    }

    /// Round cap: after round `k` the first `k` slots hold true entries, so
    /// `m` slots are confirmed no later than round `m + 1`.
    pub fn round_cap(&self) -> u32 {
        self.stream.layout().subseqs_per_seq + 1
    }

    /// Phase 1 for sequence `seq`. `seed` overrides the entry of the first
    /// slot (which is otherwise taken to be its boundary).
    pub fn intra_sync(&self, seq: usize, seed: Option<u64>) -> Result<SeqSync> {
        let layout = self.stream.layout();
        let range = layout.seq_subseqs(seq, self.stream.total_bits());
        let m = range.len();
        let ends: Vec<u64> = range.clone().map(|i| self.slot_end(i)).collect();

        let mut entry: Vec<u64> = range.clone().map(|i| layout.subseq_boundary(i)).collect();
        if let (Some(seed), Some(first)) = (seed, entry.first_mut()) {
            *first = seed;
        }
        let mut exit = vec![0u64; m];
        let mut count = vec![0u32; m];
        let mut bits = 0u64;
        for j in 0..m {
            let (x, c) = self.scan(entry[j], ends[j]);
            bits += x.saturating_sub(entry[j]);
            exit[j] = x;
            count[j] = c;
        }
        let mut synced = vec![false; m];
        if m > 0 {
            synced[0] = true;
        }
        let mut rounds = 1u32;
        if m <= 1 {
            return Ok(SeqSync { entry, exit, count, synced, rounds, bits_decoded: bits });
        }

        let cap = self.round_cap();
        let mut converged = false;
        let mut prev_exit = exit.clone();
        while rounds < cap {
            rounds += 1;
            prev_exit.copy_from_slice(&exit);
            let mut all_match = true;
            for j in 1..m {
                if prev_exit[j - 1] == entry[j] {
                    synced[j] = true;
                } else {
                    all_match = false;
                    synced[j] = false;
                    entry[j] = prev_exit[j - 1];
                    let (x, c) = self.scan(entry[j], ends[j]);
                    bits += x.saturating_sub(entry[j]);
                    exit[j] = x;
                    count[j] = c;
                }
            }
            if all_match {
                converged = true;
                if self.early_exit {
                    break;
                }
            }
        }
        if !converged {
            return Err(Error::NoFixpoint { rounds });
        }
        Ok(SeqSync { entry, exit, count, synced, rounds, bits_decoded: bits })
    }

    /// Phase 1 for all sequences in parallel.
    pub fn intra_sync_all(&self, exec: &Executor) -> Result<Vec<SeqSync>> {
        let nseq = self.stream.num_seqs();
        exec.install(|| (0..nseq).into_par_iter().map(|s| self.intra_sync(s, None)).collect())
    }

    /// Phase 2: propagates exits across sequence seams until no sequence's
    /// first entry changes. Returns the merged state, the number of seam
    /// rounds and the bits decoded by re-runs.
    pub fn inter_sync(&self, mut frags: Vec<SeqSync>, exec: &Executor) -> Result<(SyncState, u32, u64)> {
        let nseq = frags.len();
        let cap = nseq.max(1) as u32;
        let mut rounds = 0u32;
        let mut bits = 0u64;
        loop {
            rounds += 1;
            let redo: Vec<(usize, u64)> = (1..nseq)
                .filter_map(|s| {
                    let seed = *frags[s - 1].exit.last()?;
                    (frags[s].entry[0] != seed).then_some((s, seed))
                })
                .collect();
            if redo.is_empty() {
                break;
            }
            if rounds >= cap {
                return Err(Error::NoFixpoint { rounds });
            }
            let fresh: Vec<SeqSync> = exec.install(|| {
                redo.par_iter().map(|&(s, seed)| self.intra_sync(s, Some(seed))).collect::<Result<_>>()
            })?;
            for ((s, _), f) in redo.into_iter().zip(fresh) {
                bits += f.bits_decoded;
                frags[s] = f;
            }
        }

        let n = self.stream.num_subseqs();
        let mut state = SyncState {
            entry: Vec::with_capacity(n),
            exit: Vec::with_capacity(n),
            count: Vec::with_capacity(n),
            synced: Vec::with_capacity(n),
            iterations: Vec::with_capacity(nseq),
        };
        for f in frags {
            state.entry.extend(f.entry);
            state.exit.extend(f.exit);
            state.count.extend(f.count);
            state.synced.extend(f.synced);
            state.iterations.push(f.rounds);
        }
        Ok((state, rounds, bits))
    }

    /// Phases 1 and 2.
    pub fn synchronize(&self, exec: &Executor) -> Result<SyncState> {
        let frags = self.intra_sync_all(exec)?;
        self.inter_sync(frags, exec).map(|(s, _, _)| s)
    }
}

/// Decodes with default options on a single worker.
pub fn decode(stream: &EncodedStream) -> Result<Vec<Symbol>> {
    let exec = Executor::new(1)?;
    decode_with(stream, &exec, &DecodeOptions::default()).map(|d| d.symbols)
}

/// Full self-synchronization decode with per-phase timing.
pub fn decode_with(stream: &EncodedStream, exec: &Executor, opts: &DecodeOptions) -> Result<Decoded> {
    let started = Instant::now();
    let mut timings = PhaseTimings::default();
    let mut stats = DecodeStats::default();
    let decoder = SyncDecoder::new(stream).early_exit(opts.early_exit);

    let t = Instant::now();
    let frags = decoder.intra_sync_all(exec)?;
    stats.sync_bits = frags.iter().map(|f| f.bits_decoded).sum();
    timings.intra_sync = t.elapsed();

    let t = Instant::now();
    let (state, inter_rounds, rerun_bits) = decoder.inter_sync(frags, exec)?;
    stats.sync_bits += rerun_bits;
    stats.inter_rounds = inter_rounds;
    timings.inter_sync = t.elapsed();

    let t = Instant::now();
    let index = output_index(&state.count);
    timings.output_index = t.elapsed();

    let t = Instant::now();
    let (groups, plan) = write_groups(stream, &state.per_seq_counts(stream), &opts.tuning)?;
    timings.tune = t.elapsed();

    let t = Instant::now();
    let (symbols, outcome) =
        run_groups(stream, decoder.table(), &state.entry, &index, &groups, opts.strategy, exec)?;
    stats.write_bits = outcome.bits_decoded;
    stats.groups_launched = outcome.groups_launched;
    stats.bypassed_slots = outcome.bypassed_slots;
    timings.decode_write = t.elapsed();
    timings.total = started.elapsed();

    Ok(Decoded { symbols, state, index, plan, timings, stats })
}

/// Turns the tuning choice into write groups (and the plan, when tuned).
pub(crate) fn write_groups(
    stream: &EncodedStream,
    seq_counts: &[u64],
    tuning: &Tuning,
) -> Result<(Vec<WriteGroup>, Option<tuner::PartitionPlan>)> {
    match tuning {
        Tuning::Fixed(capacity) => {
            Ok((vec![WriteGroup { capacity: *capacity, seqs: (0..stream.num_seqs()).collect() }], None))
        }
        Tuning::PerClass(config) => {
            let plan = tuner::plan(stream, seq_counts, config)?;
            Ok((plan.groups(), Some(plan)))
        }
    }
}
