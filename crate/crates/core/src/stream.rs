//! Bit layout of encoded data: units, subsequences, sequences.
//!
//! Bits are consumed MSB first within each unit and units follow array order,
//! so the payload reads as one big-endian bit string whatever the unit width.
//! Internally the payload is kept as 32-bit lanes with two zero guard lanes,
//! which lets any decoder peek 32 bits at any position below `total_bits`
//! without bounds checks.

use crate::codebook::Codebook;
use crate::encoder::GapArray;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayoutConfig {
    pub unit_bits: u32,
    pub units_per_subseq: u32,
    pub subseqs_per_seq: u32,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig { unit_bits: 32, units_per_subseq: 4, subseqs_per_seq: 32 }
    }
}

impl LayoutConfig {
    pub fn new(unit_bits: u32, units_per_subseq: u32, subseqs_per_seq: u32) -> Result<Self> {
        let layout = LayoutConfig { unit_bits, units_per_subseq, subseqs_per_seq };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.unit_bits, 8 | 16 | 32) {
            return Err(Error::InvalidLayout(format!("unit_bits {} not in {{8, 16, 32}}", self.unit_bits)));
        }
        if self.units_per_subseq == 0 || self.subseqs_per_seq == 0 {
            return Err(Error::InvalidLayout("subsequence and sequence sizes must be positive".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn subseq_bits(&self) -> u64 {
        self.unit_bits as u64 * self.units_per_subseq as u64
    }

    #[inline]
    pub fn seq_bits(&self) -> u64 {
        self.subseq_bits() * self.subseqs_per_seq as u64
    }

    /// First bit of subsequence `i`.
    #[inline]
    pub fn subseq_boundary(&self, i: usize) -> u64 {
        i as u64 * self.subseq_bits()
    }

    pub fn num_subseqs(&self, total_bits: u64) -> usize {
        total_bits.div_ceil(self.subseq_bits()) as usize
    }

    pub fn num_seqs(&self, total_bits: u64) -> usize {
        self.num_subseqs(total_bits).div_ceil(self.subseqs_per_seq as usize)
    }

    /// Subsequence index range covered by sequence `s`.
    pub fn seq_subseqs(&self, s: usize, total_bits: u64) -> std::ops::Range<usize> {
        let per = self.subseqs_per_seq as usize;
        let lo = s * per;
        lo..(lo + per).min(self.num_subseqs(total_bits))
    }
}

/// Anything a decoder can peek 32 bits from.
pub trait BitSource {
    /// The 32 bits starting at `bit`, MSB first. Bits past the end read as zero.
    fn peek32(&self, bit: u64) -> u32;
    /// Number of meaningful bits.
    fn bit_len(&self) -> u64;
}

/// Absolute bit index into a stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct BitCursor(pub u64);

/// Growable MSB-first bit string.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitBuf {
    lanes: Vec<u32>,
    len: u64,
}

impl BitBuf {
    pub fn new() -> Self {
        BitBuf::default()
    }

    pub fn with_capacity(bits: u64) -> Self {
        BitBuf { lanes: Vec::with_capacity(bits.div_ceil(32) as usize + 2), len: 0 }
    }

    /// Parses a string of '0'/'1' characters; anything else is ignored.
    pub fn from_bit_str(s: &str) -> Self {
        let mut buf = BitBuf::new();
        for c in s.chars() {
            match c {
                '0' => buf.push(0, 1),
                '1' => buf.push(1, 1),
                _ => {}
            }
        }
        buf
    }

    /// Appends the low `len` bits of `value`, MSB first. `len` ≤ 32.
    #[inline]
    pub fn push(&mut self, value: u32, len: u32) {
        debug_assert!(len <= 32);
        if len == 0 {
            return;
        }
        let value = if len == 32 { value } else { value & ((1u32 << len) - 1) };
        let off = (self.len % 32) as u32;
        if off == 0 {
            self.lanes.push(0);
        }
        let last = self.lanes.len() - 1;
        let free = 32 - off;
        if len <= free {
            self.lanes[last] |= ((value as u64) << (free - len)) as u32;
        } else {
            self.lanes[last] |= value >> (len - free);
            self.lanes.push(((value as u64) << (32 - (len - free))) as u32);
        }
        self.len += len as u64;
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, bit: u64) -> bool {
        self.peek32(bit) >> 31 == 1
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    /// Reads `k` ≤ 32 bits at `bit`, zero past the end.
    pub fn read(&self, bit: u64, k: u32) -> u32 {
        if k == 0 {
            return 0;
        }
        ((self.peek32(bit) as u64) >> (32 - k)) as u32
    }
}

impl BitSource for BitBuf {
    #[inline]
    fn peek32(&self, bit: u64) -> u32 {
        let idx = (bit / 32) as usize;
        let off = bit % 32;
        let hi = self.lanes.get(idx).copied().unwrap_or(0) as u64;
        let lo = self.lanes.get(idx + 1).copied().unwrap_or(0) as u64;
        (((hi << 32) | lo) << off >> 32) as u32
    }

    fn bit_len(&self) -> u64 {
        self.len
    }
}

/// An encoded symbol stream plus everything needed to decode it.
#[derive(Clone, Debug)]
pub struct EncodedStream {
    layout: LayoutConfig,
    /// Payload in 32-bit lanes plus two zero guard lanes.
    lanes: Vec<u32>,
    total_bits: u64,
    symbol_count: u64,
    codebook: Codebook,
    gap: Option<GapArray>,
}

impl EncodedStream {
    pub(crate) fn from_bits(
        layout: LayoutConfig,
        bits: BitBuf,
        symbol_count: u64,
        codebook: Codebook,
        gap: Option<GapArray>,
    ) -> Self {
        let total_bits = bits.len;
        let mut lanes = bits.lanes;
        lanes.resize(total_bits.div_ceil(32) as usize + 2, 0);
        EncodedStream { layout, lanes, total_bits, symbol_count, codebook, gap }
    }

    /// Rebuilds a stream from unit-width words as stored on disk.
    pub fn from_units(
        layout: LayoutConfig,
        units: &[u32],
        total_bits: u64,
        symbol_count: u64,
        codebook: Codebook,
        gap: Option<GapArray>,
    ) -> Result<Self> {
        layout.validate()?;
        let w = layout.unit_bits;
        let expected = total_bits.div_ceil(w as u64);
        if units.len() as u64 != expected {
            return Err(Error::Container(format!(
                "{} units for {total_bits} bits, expected {expected}",
                units.len()
            )));
        }
        let mut bits = BitBuf::with_capacity(expected * w as u64);
        for &u in units {
            if w < 32 && u >> w != 0 {
                return Err(Error::Container(format!("unit value {u:#x} wider than {w} bits")));
            }
            bits.push(u, w);
        }
        // Drop padding bits; anything set there is not part of the payload.
        let mut trimmed = BitBuf::with_capacity(total_bits);
        let mut pos = 0;
        while pos < total_bits {
            let k = (total_bits - pos).min(32) as u32;
            trimmed.push(bits.read(pos, k), k);
            pos += k as u64;
        }
        if let Some(g) = &gap {
            if g.len() != layout.num_subseqs(total_bits) {
                return Err(Error::Container(format!(
                    "gap array has {} entries for {} subsequences",
                    g.len(),
                    layout.num_subseqs(total_bits)
                )));
            }
        }
        Ok(EncodedStream::from_bits(layout, trimmed, symbol_count, codebook, gap))
    }

    pub fn layout(&self) -> &LayoutConfig {
        &self.layout
    }

    pub fn total_bits(&self) -> u64 {
        self.total_bits
    }

    pub fn symbol_count(&self) -> u64 {
        self.symbol_count
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn gap(&self) -> Option<&GapArray> {
        self.gap.as_ref()
    }

    pub fn without_gap(mut self) -> Self {
        self.gap = None;
        self
    }

    /// Same payload and codebook, reinterpreted under a different layout.
    /// Only valid when the unit width is unchanged; the gap array is dropped
    /// because its entries are tied to the old subsequence size.
    pub fn with_layout(&self, layout: LayoutConfig) -> Result<Self> {
        layout.validate()?;
        let mut s = self.clone();
        s.layout = layout;
        s.gap = None;
        Ok(s)
    }

    pub fn num_subseqs(&self) -> usize {
        self.layout.num_subseqs(self.total_bits)
    }

    pub fn num_seqs(&self) -> usize {
        self.layout.num_seqs(self.total_bits)
    }

    /// Number of unit words, the final one zero-padded.
    pub fn unit_count(&self) -> usize {
        self.total_bits.div_ceil(self.layout.unit_bits as u64) as usize
    }

    pub fn padded_bits(&self) -> u64 {
        self.unit_count() as u64 * self.layout.unit_bits as u64
    }

    /// Payload as unit-width words.
    pub fn units(&self) -> Vec<u32> {
        let w = self.layout.unit_bits;
        (0..self.unit_count() as u64)
            .map(|i| {
                let p = self.peek32(i * w as u64);
                if w == 32 {
                    p
                } else {
                    p >> (32 - w)
                }
            })
            .collect()
    }

    /// Encoded size in bytes (payload only, padded to whole units).
    pub fn payload_bytes(&self) -> u64 {
        self.padded_bits() / 8
    }

    /// Original size over encoded payload size.
    pub fn compression_ratio(&self) -> f64 {
        let raw = self.symbol_count as f64 * self.codebook.symbol_width() as f64;
        if self.total_bits == 0 {
            return 1.0;
        }
        raw / self.total_bits as f64
    }

    /// Reads `k` ≤ 32 bits at `cursor`, MSB first. Bits in the padding read as
    /// zero; a cursor past the padded storage is an error.
    pub fn read_bits(&self, cursor: BitCursor, k: u32) -> Result<u32> {
        if k > 32 {
            return Err(Error::InvalidConfig(format!("cannot read {k} bits at once")));
        }
        if cursor.0 > self.padded_bits() {
            return Err(Error::OutOfRange { bit: cursor.0, limit: self.padded_bits() });
        }
        if k == 0 {
            return Ok(0);
        }
        Ok(((self.peek32(cursor.0) as u64) >> (32 - k)) as u32)
    }
}

impl BitSource for EncodedStream {
    #[inline(always)]
    fn peek32(&self, bit: u64) -> u32 {
        let idx = (bit >> 5) as usize;
        if idx + 1 >= self.lanes.len() {
            return self.peek32_tail(bit);
        }
        let pair = ((self.lanes[idx] as u64) << 32) | self.lanes[idx + 1] as u64;
        ((pair << (bit & 31)) >> 32) as u32
    }

    fn bit_len(&self) -> u64 {
        self.total_bits
    }
}

impl EncodedStream {
    #[cold]
    fn peek32_tail(&self, bit: u64) -> u32 {
        let idx = (bit >> 5) as usize;
        let hi = self.lanes.get(idx).copied().unwrap_or(0) as u64;
        (((hi << 32) << (bit & 31)) >> 32) as u32
    }
}

/// First bit of subsequence `i` under `layout`.
pub fn subseq_boundary(layout: &LayoutConfig, i: usize) -> u64 {
    layout.subseq_boundary(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn boundaries() {
        let byte = LayoutConfig::new(8, 1, 4).unwrap();
        assert_eq!(subseq_boundary(&byte, 2), 16);
        let d = LayoutConfig::default();
        assert_eq!(d.subseq_bits(), 128);
        assert_eq!(subseq_boundary(&d, 0), 0);
        assert_eq!(subseq_boundary(&d, 3), 384);
        assert_eq!(d.seq_bits(), 4096);
    }

    #[test]
    fn layout_validation() {
        assert!(LayoutConfig::new(12, 1, 1).is_err());
        assert!(LayoutConfig::new(8, 0, 1).is_err());
        assert!(LayoutConfig::new(8, 1, 0).is_err());
    }

    #[test]
    fn counts_of_subseqs_and_seqs() {
        let l = LayoutConfig::new(8, 1, 2).unwrap();
        assert_eq!(l.num_subseqs(0), 0);
        assert_eq!(l.num_subseqs(17), 3);
        assert_eq!(l.num_seqs(17), 2);
        assert_eq!(l.seq_subseqs(1, 17), 2..3);
    }

    #[test]
    fn read_bits_on_sample_stream() {
        let s1 = fixtures::sample_stream(false);
        assert_eq!(s1.read_bits(BitCursor(0), 2).unwrap(), 0b10);
        assert_eq!(s1.read_bits(BitCursor(5), 0).unwrap(), 0);
        assert_eq!(s1.read_bits(BitCursor(14), 3).unwrap(), 0b010);
        assert_eq!(s1.read_bits(BitCursor(30), 8).unwrap(), 0);
        assert!(matches!(s1.read_bits(BitCursor(33), 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn units_are_unit_width() {
        let s1 = fixtures::sample_stream(false);
        assert_eq!(s1.units(), vec![0x8C, 0xF9, 0x40, 0xE8]);
        let wide = s1.with_layout(LayoutConfig::default()).unwrap();
        assert_eq!(wide.units(), vec![0x8CF9_40E8]);
    }

    #[test]
    fn padding_is_zero_and_stream_rebuilds() {
        let book = fixtures::five_symbol_book();
        let s = encode(b"CBADCBA".map(|b| b as u16).as_slice(), &book, LayoutConfig::new(16, 1, 1).unwrap(), false)
            .unwrap();
        assert_eq!(s.total_bits(), 15);
        assert_eq!(s.units(), vec![0b1110_0001_0111_0000]);
        let again = EncodedStream::from_units(*s.layout(), &s.units(), 15, 7, book, None).unwrap();
        assert_eq!(again.units(), s.units());
        assert!(EncodedStream::from_units(*s.layout(), &[0, 0], 15, 7, s.codebook().clone(), None).is_err());
    }

    proptest! {
        #[test]
        fn push_then_read_is_identity(
            chunks in proptest::collection::vec((any::<u32>(), 0u32..=32), 0..64),
            unit in prop_oneof![Just(8u32), Just(16), Just(32)],
        ) {
            let mut buf = BitBuf::new();
            let mut expect = String::new();
            for &(v, len) in &chunks {
                buf.push(v, len);
                for i in (0..len).rev() {
                    expect.push(if (v >> i) & 1 == 1 { '1' } else { '0' });
                }
            }
            prop_assert_eq!(buf.to_bit_string(), expect.clone());
            let layout = LayoutConfig::new(unit, 1, 1).unwrap();
            let book = crate::codebook::Codebook::canonize(&[1, 1], 8).unwrap();
            let s = EncodedStream::from_bits(layout, buf, 0, book, None);
            let units = s.units();
            let mut rebuilt = BitBuf::new();
            for u in units {
                rebuilt.push(u, unit);
            }
            let got = rebuilt.to_bit_string();
            prop_assert_eq!(&got[..expect.len()], expect.as_str());
            prop_assert!(got[expect.len()..].chars().all(|c| c == '0'));
        }

        #[test]
        fn boundary_step_is_subseq_bits(i in 0usize..100_000, ups in 1u32..8, unit in prop_oneof![Just(8u32), Just(16), Just(32)]) {
            let l = LayoutConfig::new(unit, ups, 4).unwrap();
            prop_assert_eq!(l.subseq_boundary(i + 1) - l.subseq_boundary(i), l.subseq_bits());
        }
    }
}
