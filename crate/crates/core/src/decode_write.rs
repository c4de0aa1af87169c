//! Decode-and-write through a bounded per-sequence staging buffer.
//!
//! Each sequence task knows where every one of its slots starts decoding
//! (entry bit) and where its symbols go (output index). Slots whose whole
//! output range fits in the current staging window decode into the buffer;
//! the buffer prefix is then copied to the destination in one contiguous
//! block and the window slides forward. Shared by both decoders.

use rayon::prelude::*;

use crate::codebook::{DecodeTable, Symbol};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::stream::{BitSource, EncodedStream};

/// Exclusive prefix sum of per-subsequence symbol counts, one entry longer
/// than the number of subsequences. Entry `i` is where subsequence `i` writes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputIndex(pub Vec<u64>);

impl OutputIndex {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Total number of symbols.
    pub fn total(&self) -> u64 {
        *self.0.last().unwrap_or(&0)
    }

    /// Symbols in subsequences `lo..hi`.
    pub fn span(&self, lo: usize, hi: usize) -> u64 {
        self.0[hi] - self.0[lo]
    }
}

pub fn output_index(counts: &[u32]) -> OutputIndex {
    let mut idx = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0u64;
    idx.push(0);
    for &c in counts {
        acc += c as u64;
        idx.push(acc);
    }
    OutputIndex(idx)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WriteStrategy {
    /// Slots decode into a staging buffer that is flushed contiguously.
    #[default]
    Staged,
    /// Every slot writes straight to the destination, all slots of a sequence
    /// advancing one codeword at a time in lockstep. This is the scattered
    /// write pattern the staging buffer exists to avoid.
    Scattered,
}

/// What the write phase did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WriteOutcome {
    pub bits_decoded: u64,
    /// Number of capacity groups that had at least one sequence.
    pub groups_launched: usize,
    /// Slots whose range exceeded the staging capacity and bypassed it.
    pub bypassed_slots: u64,
}

/// A set of sequences decoded with one staging capacity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WriteGroup {
    pub capacity: usize,
    pub seqs: Vec<usize>,
}

/// Decodes exactly `out.len()` codewords starting at `bit`. Returns the end bit.
#[inline]
fn decode_run(stream: &EncodedStream, table: &DecodeTable, bit: u64, out: &mut [Symbol]) -> Result<u64> {
    let total = stream.total_bits();
    let mut cursor = bit;
    for slot in out.iter_mut() {
        if cursor >= total {
            return Err(Error::Truncated { bit: cursor });
        }
        let (sym, len) = table.lookup(stream.peek32(cursor)).ok_or(Error::InvalidCode { bit: cursor })?;
        *slot = sym;
        cursor += len as u64;
    }
    if cursor > total {
        return Err(Error::Truncated { bit: cursor });
    }
    Ok(cursor)
}

#[derive(Default)]
struct SeqStats {
    bits: u64,
    bypassed: u64,
}

/// Algorithm: window `[si, si + n)` over the sequence's output range.
/// Slots fully inside the window decode into staging; the unique slot
/// straddling the window end (`start <= si + n < end`) marks where the flush
/// stops. A slot that starts at `si` and alone exceeds the window writes
/// straight to the destination so the loop always makes progress.
fn write_staged(
    stream: &EncodedStream,
    table: &DecodeTable,
    entries: &[u64],
    index: &[u64],
    dest: &mut [Symbol],
    capacity: usize,
    staging: &mut Vec<Symbol>,
) -> Result<SeqStats> {
    let m = entries.len();
    let base = index[0];
    let ei = index[m];
    let n = capacity as u64;
    staging.resize(capacity, 0);
    let mut stats = SeqStats::default();
    let mut si = base;
    while si < ei {
        let limit = si + n;
        let mut temp_end = ei;
        let mut straddler = None;
        for j in 0..m {
            let (start, end) = (index[j], index[j + 1]);
            if si <= start && end <= limit {
                if end > start {
                    let out = &mut staging[(start - si) as usize..(end - si) as usize];
                    let stop = decode_run(stream, table, entries[j], out)?;
                    stats.bits += stop - entries[j];
                }
            } else if start <= limit && end > limit {
                temp_end = start;
                straddler = Some(j);
            }
        }
        if temp_end == si {
            let j = straddler.expect("window end inside some slot");
            let (start, end) = (index[j], index[j + 1]);
            let out = &mut dest[(start - base) as usize..(end - base) as usize];
            let stop = decode_run(stream, table, entries[j], out)?;
            stats.bits += stop - entries[j];
            stats.bypassed += 1;
            si = end;
            continue;
        }
        let len = (temp_end - si) as usize;
        dest[(si - base) as usize..(temp_end - base) as usize].copy_from_slice(&staging[..len]);
        si = temp_end;
    }
    Ok(stats)
}

fn write_scattered(
    stream: &EncodedStream,
    table: &DecodeTable,
    entries: &[u64],
    index: &[u64],
    dest: &mut [Symbol],
) -> Result<SeqStats> {
    let m = entries.len();
    let base = index[0];
    let total = stream.total_bits();
    let mut cursor: Vec<u64> = entries.to_vec();
    let mut pos: Vec<usize> = index[..m].iter().map(|&i| (i - base) as usize).collect();
    let ends: Vec<usize> = index[1..].iter().map(|&i| (i - base) as usize).collect();
    let mut active: Vec<usize> = (0..m).filter(|&j| pos[j] < ends[j]).collect();
    while !active.is_empty() {
        for &j in &active {
            let c = cursor[j];
            if c >= total {
                return Err(Error::Truncated { bit: c });
            }
            let (sym, len) = table.lookup(stream.peek32(c)).ok_or(Error::InvalidCode { bit: c })?;
            dest[pos[j]] = sym;
            pos[j] += 1;
            cursor[j] = c + len as u64;
        }
        active.retain(|&j| pos[j] < ends[j]);
    }
    let mut stats = SeqStats::default();
    for j in 0..m {
        if cursor[j] > total {
            return Err(Error::Truncated { bit: cursor[j] });
        }
        stats.bits += cursor[j] - entries[j];
    }
    Ok(stats)
}

/// Runs the write phase over `groups`. Every sequence of the stream must
/// appear in exactly one group; sequences write disjoint output ranges, so
/// groups and sequences may run in any order.
pub fn run_groups(
    stream: &EncodedStream,
    table: &DecodeTable,
    entries: &[u64],
    index: &OutputIndex,
    groups: &[WriteGroup],
    strategy: WriteStrategy,
    exec: &Executor,
) -> Result<(Vec<Symbol>, WriteOutcome)> {
    let layout = stream.layout();
    let total_bits = stream.total_bits();
    let nseq = stream.num_seqs();
    if entries.len() != stream.num_subseqs() || index.0.len() != entries.len() + 1 {
        return Err(Error::InvalidConfig(format!(
            "{} entries and {} index slots for {} subsequences",
            entries.len(),
            index.0.len(),
            stream.num_subseqs()
        )));
    }
    let produced = index.total();
    if produced < stream.symbol_count() {
        return Err(Error::Container(format!(
            "synchronization accounts for {produced} of {} symbols",
            stream.symbol_count()
        )));
    }

    let mut output = vec![0 as Symbol; produced as usize];
    let mut slices: Vec<Option<&mut [Symbol]>> = Vec::with_capacity(nseq);
    let mut rest = output.as_mut_slice();
    for s in 0..nseq {
        let r = layout.seq_subseqs(s, total_bits);
        let (head, tail) = rest.split_at_mut(index.span(r.start, r.end) as usize);
        slices.push(Some(head));
        rest = tail;
    }

    let mut jobs: Vec<(usize, usize, &mut [Symbol])> = Vec::with_capacity(nseq);
    let mut groups_launched = 0;
    for g in groups {
        if g.capacity == 0 {
            return Err(Error::InvalidConfig("staging capacity must be at least 1".into()));
        }
        if !g.seqs.is_empty() {
            groups_launched += 1;
        }
        for &s in &g.seqs {
            let slice = slices
                .get_mut(s)
                .and_then(Option::take)
                .ok_or_else(|| Error::InvalidConfig(format!("sequence {s} missing or assigned twice")))?;
            jobs.push((s, g.capacity, slice));
        }
    }
    if jobs.len() != nseq {
        return Err(Error::InvalidConfig(format!("{} of {nseq} sequences assigned", jobs.len())));
    }

    let idx = index.as_slice();
    let stats = exec.install(|| {
        jobs.par_iter_mut()
            .map_init(Vec::new, |staging, (s, cap, dest)| {
                let r = layout.seq_subseqs(*s, total_bits);
                let e = &entries[r.clone()];
                let ix = &idx[r.start..=r.end];
                match strategy {
                    WriteStrategy::Staged => write_staged(stream, table, e, ix, dest, *cap, staging),
                    WriteStrategy::Scattered => write_scattered(stream, table, e, ix, dest),
                }
            })
            .try_reduce(SeqStats::default, |a, b| {
                Ok(SeqStats { bits: a.bits + b.bits, bypassed: a.bypassed + b.bypassed })
            })
    })?;

    output.truncate(stream.symbol_count() as usize);
    Ok((
        output,
        WriteOutcome { bits_decoded: stats.bits, groups_launched, bypassed_slots: stats.bypassed },
    ))
}

/// Decodes every sequence with the same staging capacity.
pub fn decode_write(
    stream: &EncodedStream,
    entries: &[u64],
    index: &OutputIndex,
    capacity: usize,
    strategy: WriteStrategy,
    exec: &Executor,
) -> Result<Vec<Symbol>> {
    let table = stream.codebook().decode_table();
    let group = WriteGroup { capacity, seqs: (0..stream.num_seqs()).collect() };
    run_groups(stream, &table, entries, index, &[group], strategy, exec).map(|(out, _)| out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, as_symbols};

    const S1_ENTRIES: [u64; 4] = [0, 8, 17, 26];

    fn exec() -> Executor {
        Executor::new(2).unwrap()
    }

    #[test]
    fn prefix_sums() {
        assert_eq!(output_index(&[4, 4, 4, 3]).0, vec![0, 4, 8, 12, 15]);
        assert_eq!(output_index(&[]).0, vec![0]);
        assert_eq!(output_index(&[5, 0, 2]).0, vec![0, 5, 5, 7]);
    }

    #[test]
    fn staged_window_trace() {
        // Capacity 8: first window holds slots 0-1, slot 2 straddles; the
        // second window holds slots 2-3.
        let s = fixtures::sample_stream(false);
        let table = s.codebook().decode_table();
        let idx = output_index(&[4, 4, 4, 3]);
        let mut dest = vec![0; 15];
        let mut staging = Vec::new();
        let stats = write_staged(&s, &table, &S1_ENTRIES, idx.as_slice(), &mut dest, 8, &mut staging).unwrap();
        assert_eq!(dest, as_symbols(fixtures::SAMPLE));
        assert_eq!(stats.bypassed, 0);
        assert_eq!(stats.bits, 32);
    }

    #[test]
    fn capacity_never_changes_output() {
        let s = fixtures::sample_stream(false);
        let idx = output_index(&[4, 4, 4, 3]);
        for cap in [1, 2, 3, 4, 7, 8, 9, 15, 16, 100] {
            for strategy in [WriteStrategy::Staged, WriteStrategy::Scattered] {
                let out = decode_write(&s, &S1_ENTRIES, &idx, cap, strategy, &exec()).unwrap();
                assert_eq!(out, as_symbols(fixtures::SAMPLE), "cap {cap} {strategy:?}");
            }
        }
    }

    #[test]
    fn capacity_one_bypasses() {
        let s = fixtures::sample_stream(false);
        let table = s.codebook().decode_table();
        let idx = output_index(&[4, 4, 4, 3]);
        let group = WriteGroup { capacity: 1, seqs: vec![0] };
        let (out, outcome) =
            run_groups(&s, &table, &S1_ENTRIES, &idx, &[group], WriteStrategy::Staged, &exec()).unwrap();
        assert_eq!(out, as_symbols(fixtures::SAMPLE));
        assert_eq!(outcome.bypassed_slots, 4);
        assert_eq!(outcome.groups_launched, 1);
    }

    #[test]
    fn window_end_exactly_on_slot_start() {
        // Slot ranges [0,4) [4,8): with capacity 4 the second slot begins
        // exactly at the window end and must still be written.
        let s = fixtures::sample_stream(false);
        let idx = output_index(&[4, 4, 4, 3]);
        let out = decode_write(&s, &S1_ENTRIES, &idx, 4, WriteStrategy::Staged, &exec()).unwrap();
        assert_eq!(out, as_symbols(fixtures::SAMPLE));
    }

    #[test]
    fn rejects_bad_assignment() {
        let s = fixtures::sample_stream(false);
        let table = s.codebook().decode_table();
        let idx = output_index(&[4, 4, 4, 3]);
        let twice = [WriteGroup { capacity: 4, seqs: vec![0] }, WriteGroup { capacity: 4, seqs: vec![0] }];
        assert!(run_groups(&s, &table, &S1_ENTRIES, &idx, &twice, WriteStrategy::Staged, &exec()).is_err());
        let none = [WriteGroup { capacity: 4, seqs: vec![] }];
        assert!(run_groups(&s, &table, &S1_ENTRIES, &idx, &none, WriteStrategy::Staged, &exec()).is_err());
        let zero = [WriteGroup { capacity: 0, seqs: vec![0] }];
        assert!(run_groups(&s, &table, &S1_ENTRIES, &idx, &zero, WriteStrategy::Staged, &exec()).is_err());
    }

    #[test]
    fn wrong_entry_is_detected() {
        let s = fixtures::sample_stream(false);
        let idx = output_index(&[4, 4, 4, 3]);
        // Entry 27 is mid-codeword; the last slot runs off the end of the payload.
        let res = decode_write(&s, &[0, 8, 17, 27], &idx, 16, WriteStrategy::Staged, &exec());
        assert!(matches!(res, Err(Error::Truncated { .. })));
    }
}
