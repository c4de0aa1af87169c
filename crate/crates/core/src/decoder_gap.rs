//! Gap-array decoder.
//!
//! Entry points come straight from the stored gap array, so there is no
//! speculative decoding at all. A counting pass decodes each slot from its
//! entry to the next slot's entry to learn how many symbols it holds; the
//! shared decode-and-write phase then produces the output.

use std::time::Instant;

use rayon::prelude::*;

use crate::codebook::{DecodeTable, Symbol};
use crate::decode_write::{output_index, run_groups, OutputIndex};
use crate::decoder_sync::{write_groups, SyncState};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::report::{DecodeOptions, DecodeStats, Decoded, PhaseTimings};
use crate::stream::{BitSource, EncodedStream};

/// Slots handled per parallel task in the counting pass.
const COUNT_CHUNK: usize = 256;

/// Entry bits from the gap array; every slot is synced by construction.
/// `exit` is filled with the next slot's entry, `count` is left at zero.
pub fn entries_from_gap(stream: &EncodedStream) -> Result<SyncState> {
    let gap = stream.gap().ok_or(Error::NotPresent)?;
    let n = stream.num_subseqs();
    if gap.len() != n {
        return Err(Error::BadGap { index: gap.len().min(n) });
    }
    let layout = stream.layout();
    let total = stream.total_bits();
    let mut entry = Vec::with_capacity(n);
    for (i, &g) in gap.as_slice().iter().enumerate() {
        let e = layout.subseq_boundary(i) + g as u64;
        if (i == 0 && g != 0) || e > total {
            return Err(Error::BadGap { index: i });
        }
        entry.push(e);
    }
    let mut exit: Vec<u64> = entry.iter().skip(1).copied().collect();
    if n > 0 {
        exit.push(total);
    }
    Ok(SyncState {
        entry,
        exit,
        count: vec![0; n],
        synced: vec![true; n],
        iterations: vec![0; stream.num_seqs()],
    })
}

/// Counts the codewords of one slot. Decoding must land exactly on `stop`.
fn count_slot(stream: &EncodedStream, table: &DecodeTable, index: usize, from: u64, stop: u64) -> Result<u32> {
    let total = stream.total_bits();
    let mut cursor = from;
    let mut count = 0u32;
    while cursor < stop {
        let (_, len) = table.lookup(stream.peek32(cursor)).ok_or(Error::InvalidCode { bit: cursor })?;
        cursor += len as u64;
        count += 1;
    }
    if cursor > total {
        return Err(Error::Truncated { bit: cursor });
    }
    if cursor != stop {
        return Err(Error::BadGap { index: index + 1 });
    }
    Ok(count)
}

/// Fills `state.count` and returns the output index. Slots are independent.
/// Bits decoded equal exactly the payload size.
pub fn count_pass(stream: &EncodedStream, table: &DecodeTable, state: &mut SyncState, exec: &Executor) -> Result<OutputIndex> {
    let entry = &state.entry;
    let exit = &state.exit;
    exec.install(|| {
        state
            .count
            .par_chunks_mut(COUNT_CHUNK)
            .enumerate()
            .try_for_each(|(chunk, counts)| {
                for (k, c) in counts.iter_mut().enumerate() {
                    let i = chunk * COUNT_CHUNK + k;
                    *c = count_slot(stream, table, i, entry[i], exit[i])?;
                }
                Ok::<(), Error>(())
            })
    })?;
    let index = output_index(&state.count);
    if index.total() != stream.symbol_count() {
        return Err(Error::Container(format!(
            "gap array accounts for {} of {} symbols",
            index.total(),
            stream.symbol_count()
        )));
    }
    Ok(index)
}

pub fn decode(stream: &EncodedStream) -> Result<Vec<Symbol>> {
    let exec = Executor::new(1)?;
    decode_with(stream, &exec, &DecodeOptions::default()).map(|d| d.symbols)
}

pub fn decode_with(stream: &EncodedStream, exec: &Executor, opts: &DecodeOptions) -> Result<Decoded> {
    let started = Instant::now();
    let mut timings = PhaseTimings::default();
    let mut stats = DecodeStats::default();
    let table = stream.codebook().decode_table();

    let t = Instant::now();
    let mut state = entries_from_gap(stream)?;
    timings.gap_entries = t.elapsed();

    let t = Instant::now();
    let index = count_pass(stream, &table, &mut state, exec)?;
    stats.count_bits = stream.total_bits() - state.entry.first().copied().unwrap_or(0);
    timings.count_pass = t.elapsed();

    let t = Instant::now();
    let (groups, plan) = write_groups(stream, &state.per_seq_counts(stream), &opts.tuning)?;
    timings.tune = t.elapsed();

    let t = Instant::now();
    let (symbols, outcome) = run_groups(stream, &table, &state.entry, &index, &groups, opts.strategy, exec)?;
    stats.write_bits = outcome.bits_decoded;
    stats.groups_launched = outcome.groups_launched;
    stats.bypassed_slots = outcome.bypassed_slots;
    timings.decode_write = t.elapsed();
    timings.total = started.elapsed();

    Ok(Decoded { symbols, state, index, plan, timings, stats })
}
