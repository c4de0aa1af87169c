//! Sequential encoder, gap-array emission and the single-cursor reference decoder.

use crate::codebook::{Codebook, Symbol};
use crate::error::{Error, Result};
use crate::stream::{BitBuf, BitSource, EncodedStream, LayoutConfig};

/// One byte per subsequence: how many bits past the subsequence boundary the
/// first codeword start lies. Entry 0 is always 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GapArray(pub Vec<u8>);

impl GapArray {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }
}

/// Records, for each subsequence boundary, the first codeword start at or
/// after it. Fed with codeword starts in increasing order.
#[derive(Debug)]
pub struct GapTracker {
    subseq_bits: u64,
    next: usize,
    gaps: Vec<u8>,
    overflow: Option<(usize, u64)>,
}

impl GapTracker {
    pub fn new(layout: &LayoutConfig) -> Self {
        GapTracker { subseq_bits: layout.subseq_bits(), next: 0, gaps: Vec::new(), overflow: None }
    }

    #[inline]
    pub fn observe(&mut self, start: u64) {
        while self.next as u64 * self.subseq_bits <= start {
            self.record(start);
        }
    }

    fn record(&mut self, start: u64) {
        let skip = start - self.next as u64 * self.subseq_bits;
        if skip > u8::MAX as u64 && self.overflow.is_none() {
            self.overflow = Some((self.next, skip));
        }
        self.gaps.push(skip as u8);
        self.next += 1;
    }

    /// Closes the array. A boundary inside the final codeword points at
    /// `total_bits`, so its subsequence decodes nothing.
    pub fn finish(mut self, total_bits: u64) -> Result<GapArray> {
        while (self.next as u64 * self.subseq_bits) < total_bits {
            self.record(total_bits);
        }
        match self.overflow {
            Some((index, skip)) => Err(Error::GapOverflow { index, skip }),
            None => Ok(GapArray(self.gaps)),
        }
    }
}

/// Builds the gap array from a sorted set of codeword starts.
pub fn emit_gap(starts: &[u64], total_bits: u64, layout: &LayoutConfig) -> Result<GapArray> {
    let mut tracker = GapTracker::new(layout);
    for &s in starts {
        tracker.observe(s);
    }
    tracker.finish(total_bits)
}

/// Concatenates codewords MSB first. With `with_gap` the gap array is tracked
/// during the same pass.
pub fn encode(
    symbols: &[Symbol],
    codebook: &Codebook,
    layout: LayoutConfig,
    with_gap: bool,
) -> Result<EncodedStream> {
    layout.validate()?;
    // Packed (code << 6 | len) per symbol; 0 = absent.
    let table: Vec<u64> = (0..codebook.alphabet_size())
        .map(|s| match codebook.code(s as Symbol) {
            Some((c, l)) => ((c as u64) << 6) | l as u64,
            None => 0,
        })
        .collect();
    let lookup = |s: Symbol| -> Result<(u32, u32)> {
        match table.get(s as usize) {
            Some(&e) if e != 0 => Ok(((e >> 6) as u32, (e & 63) as u32)),
            _ => Err(Error::UnknownSymbol { symbol: s as u32 }),
        }
    };

    let mut bits = BitBuf::with_capacity(symbols.len() as u64 * 2);
    let gap = if with_gap {
        let mut tracker = GapTracker::new(&layout);
        for &s in symbols {
            let (code, len) = lookup(s)?;
            tracker.observe(bits.len());
            bits.push(code, len);
        }
        Some(tracker.finish(bits.len())?)
    } else {
        for &s in symbols {
            let (code, len) = lookup(s)?;
            bits.push(code, len);
        }
        None
    };
    Ok(EncodedStream::from_bits(layout, bits, symbols.len() as u64, codebook.clone(), gap))
}

/// Ground truth from a single-cursor decode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub symbols: Vec<Symbol>,
    /// Codeword start positions, increasing.
    pub starts: Vec<u64>,
    /// Codewords starting within each subsequence.
    pub per_subseq_counts: Vec<u32>,
}

impl OracleResult {
    pub fn is_start(&self, bit: u64) -> bool {
        self.starts.binary_search(&bit).is_ok()
    }
}

/// Decodes the whole stream from bit 0, recording every codeword start.
pub fn oracle_decode(stream: &EncodedStream) -> Result<OracleResult> {
    let table = stream.codebook().decode_table();
    let n = stream.symbol_count() as usize;
    let subseq_bits = stream.layout().subseq_bits();
    let mut symbols = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(n);
    let mut counts = vec![0u32; stream.num_subseqs()];
    let mut cursor = 0u64;
    for _ in 0..n {
        let (sym, len) = table.decode_one(stream, cursor)?;
        symbols.push(sym);
        starts.push(cursor);
        counts[(cursor / subseq_bits) as usize] += 1;
        cursor += len as u64;
    }
    check_consumed(stream, cursor)?;
    Ok(OracleResult { symbols, starts, per_subseq_counts: counts })
}

/// Symbols only, without the bookkeeping of [`oracle_decode`]. This is the
/// sequential baseline decoder.
pub fn oracle_symbols(stream: &EncodedStream) -> Result<Vec<Symbol>> {
    let table = stream.codebook().decode_table();
    let n = stream.symbol_count() as usize;
    let total = stream.total_bits();
    let mut out = Vec::with_capacity(n);
    let mut cursor = 0u64;
    for _ in 0..n {
        if cursor >= total {
            return Err(Error::Truncated { bit: cursor });
        }
        let (sym, len) = table.lookup(stream.peek32(cursor)).ok_or(Error::InvalidCode { bit: cursor })?;
        out.push(sym);
        cursor += len as u64;
    }
    if cursor > total {
        return Err(Error::Truncated { bit: cursor });
    }
    check_consumed(stream, cursor)?;
    Ok(out)
}

fn check_consumed(stream: &EncodedStream, cursor: u64) -> Result<()> {
    if cursor != stream.total_bits() {
        return Err(Error::Container(format!(
            "{} symbols end at bit {cursor}, payload has {} bits",
            stream.symbol_count(),
            stream.total_bits()
        )));
    }
    Ok(())
}

/// Decodes from an arbitrary, possibly misaligned, bit offset to the end of
/// the payload. A codeword cut off by the end of the payload is dropped.
pub fn mis_sync_decode(stream: &EncodedStream, start_bit: u64) -> Result<Vec<Symbol>> {
    let total = stream.total_bits();
    if start_bit >= total {
        return Err(Error::OutOfRange { bit: start_bit, limit: total });
    }
    let table = stream.codebook().decode_table();
    let mut out = Vec::new();
    let mut cursor = start_bit;
    while cursor < total {
        match table.decode_one(stream, cursor) {
            Ok((sym, len)) => {
                out.push(sym);
                cursor += len as u64;
            }
            Err(Error::Truncated { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Bits decoded from `start_bit` until the cursor lands on a true codeword
/// start (`starts` sorted). `None` if it never does before the payload ends.
pub fn sync_distance(stream: &EncodedStream, start_bit: u64, starts: &[u64]) -> Option<u64> {
    let table = stream.codebook().decode_table();
    let total = stream.total_bits();
    let mut cursor = start_bit;
    while cursor < total {
        if starts.binary_search(&cursor).is_ok() {
            return Some(cursor - start_bit);
        }
        let (_, len) = table.lookup(stream.peek32(cursor))?;
        cursor += len as u64;
    }
    None
}

/// Converts forward skips into offsets of the codeword overlapping each
/// boundary, measured from the boundary (≤ 0; 0 when a codeword starts on it).
pub fn signed_gaps(gap: &GapArray, layout: &LayoutConfig, starts: &[u64]) -> Vec<i64> {
    gap.0
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            if g == 0 {
                return 0;
            }
            let b = layout.subseq_boundary(i);
            let straddler = starts[starts.partition_point(|&s| s < b) - 1];
            straddler as i64 - b as i64
        })
        .collect()
}

/// Inverse of [`signed_gaps`]: the skip is the start following the
/// overlapping codeword.
pub fn forward_gaps(signed: &[i64], layout: &LayoutConfig, starts: &[u64], total_bits: u64) -> GapArray {
    GapArray(
        signed
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                if g == 0 {
                    return 0;
                }
                let b = layout.subseq_boundary(i);
                let straddler = (b as i64 + g) as u64;
                let idx = starts.partition_point(|&s| s <= straddler);
                let next = starts.get(idx).copied().unwrap_or(total_bits);
                (next - b) as u8
            })
            .collect(),
    )
}
