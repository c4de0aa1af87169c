//! `HUF2` container: header, codebook, optional gap array, unit words.
//!
//! ```text
//! magic "HUF2" | version u8 | symbol_width u8 | unit_bits u8 | flags u8
//! units_per_subseq u32 | subseqs_per_seq u32 | symbol_count u64 | total_bits u64
//! alphabet_size u32 | lengths [u8; alphabet_size]
//! [flags bit1] codes [u32; alphabet_size]
//! [flags bit0] gap count u64 | gap [u8; count]
//! unit count u64 | units, each unit_bits wide
//! ```
//!
//! All integers little-endian.

use std::io::{Read, Write};

use crate::codebook::{Codebook, CodebookKind};
use crate::encoder::GapArray;
use crate::error::{Error, Result};
use crate::stream::{EncodedStream, LayoutConfig};

pub const MAGIC: &[u8; 4] = b"HUF2";
pub const VERSION: u8 = 1;
pub const FLAG_GAP: u8 = 1;
pub const FLAG_EXPLICIT_CODES: u8 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainerHeader {
    pub version: u8,
    pub symbol_width: u8,
    pub unit_bits: u8,
    pub flags: u8,
    pub units_per_subseq: u32,
    pub subseqs_per_seq: u32,
    pub symbol_count: u64,
    pub total_bits: u64,
    pub alphabet_size: u32,
}

impl ContainerHeader {
    pub fn of(stream: &EncodedStream) -> Self {
        let layout = stream.layout();
        let book = stream.codebook();
        let mut flags = 0;
        if stream.gap().is_some() {
            flags |= FLAG_GAP;
        }
        if book.kind() == CodebookKind::Explicit {
            flags |= FLAG_EXPLICIT_CODES;
        }
        ContainerHeader {
            version: VERSION,
            symbol_width: book.symbol_width(),
            unit_bits: layout.unit_bits as u8,
            flags,
            units_per_subseq: layout.units_per_subseq,
            subseqs_per_seq: layout.subseqs_per_seq,
            symbol_count: stream.symbol_count(),
            total_bits: stream.total_bits(),
            alphabet_size: book.alphabet_size() as u32,
        }
    }

    pub fn layout(&self) -> LayoutConfig {
        LayoutConfig {
            unit_bits: self.unit_bits as u32,
            units_per_subseq: self.units_per_subseq,
            subseqs_per_seq: self.subseqs_per_seq,
        }
    }

    fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&[self.version, self.symbol_width, self.unit_bits, self.flags]);
        out.extend_from_slice(&self.units_per_subseq.to_le_bytes());
        out.extend_from_slice(&self.subseqs_per_seq.to_le_bytes());
        out.extend_from_slice(&self.symbol_count.to_le_bytes());
        out.extend_from_slice(&self.total_bits.to_le_bytes());
        out.extend_from_slice(&self.alphabet_size.to_le_bytes());
    }
}

pub fn to_bytes(stream: &EncodedStream) -> Vec<u8> {
    let header = ContainerHeader::of(stream);
    let book = stream.codebook();
    let mut out = Vec::with_capacity(64 + book.alphabet_size() * 5 + stream.payload_bytes() as usize);
    header.write_to(&mut out);
    out.extend_from_slice(book.lengths());
    if header.flags & FLAG_EXPLICIT_CODES != 0 {
        for &c in book.codes() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    if let Some(gap) = stream.gap() {
        out.extend_from_slice(&(gap.len() as u64).to_le_bytes());
        out.extend_from_slice(gap.as_slice());
    }
    let units = stream.units();
    out.extend_from_slice(&(units.len() as u64).to_le_bytes());
    for u in units {
        match header.unit_bits {
            8 => out.push(u as u8),
            16 => out.extend_from_slice(&(u as u16).to_le_bytes()),
            _ => out.extend_from_slice(&u.to_le_bytes()),
        }
    }
    out
}

pub fn write(w: &mut impl Write, stream: &EncodedStream) -> Result<()> {
    w.write_all(&to_bytes(stream))?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Container(format!("truncated {what} at byte {}", self.pos))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn len(&mut self, what: &str, elem: usize) -> Result<usize> {
        let n = self.u64(what)?;
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(elem as u64) > remaining {
            return Err(Error::Container(format!("{what} count {n} exceeds remaining {remaining} bytes")));
        }
        Ok(n as usize)
    }
}

pub fn read_header(bytes: &[u8]) -> Result<ContainerHeader> {
    let mut r = Reader { buf: bytes, pos: 0 };
    read_header_from(&mut r)
}

fn read_header_from(r: &mut Reader) -> Result<ContainerHeader> {
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Container("bad magic".into()));
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(Error::Container(format!("unsupported version {version}")));
    }
    let symbol_width = r.u8("symbol width")?;
    let unit_bits = r.u8("unit bits")?;
    let flags = r.u8("flags")?;
    if flags & !(FLAG_GAP | FLAG_EXPLICIT_CODES) != 0 {
        return Err(Error::Container(format!("unknown flags {flags:#04x}")));
    }
    Ok(ContainerHeader {
        version,
        symbol_width,
        unit_bits,
        flags,
        units_per_subseq: r.u32("units per subsequence")?,
        subseqs_per_seq: r.u32("subsequences per sequence")?,
        symbol_count: r.u64("symbol count")?,
        total_bits: r.u64("total bits")?,
        alphabet_size: r.u32("alphabet size")?,
    })
}

pub fn from_bytes(bytes: &[u8]) -> Result<EncodedStream> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let h = read_header_from(&mut r)?;
    let layout = h.layout();
    layout.validate()?;
    if !matches!(h.symbol_width, 8 | 16) {
        return Err(Error::Container(format!("symbol width {} not in {{8, 16}}", h.symbol_width)));
    }
    if h.alphabet_size as u64 > 1 << h.symbol_width {
        return Err(Error::Container(format!(
            "alphabet size {} too large for {}-bit symbols",
            h.alphabet_size, h.symbol_width
        )));
    }
    let lengths = r.take(h.alphabet_size as usize, "codebook lengths")?.to_vec();
    let book = if h.flags & FLAG_EXPLICIT_CODES != 0 {
        let mut entries = Vec::new();
        for (s, &len) in lengths.iter().enumerate() {
            let code = r.u32("codebook codes")?;
            if len != 0 {
                entries.push((s as u32, code, len));
            }
        }
        Codebook::from_explicit(&entries, h.symbol_width)?
    } else {
        Codebook::canonize(&lengths, h.symbol_width)?
    };
    let gap = if h.flags & FLAG_GAP != 0 {
        let n = r.len("gap", 1)?;
        Some(GapArray(r.take(n, "gap")?.to_vec()))
    } else {
        None
    };
    let unit_bytes = h.unit_bits as usize / 8;
    let n = r.len("unit", unit_bytes)?;
    let raw = r.take(n * unit_bytes, "units")?;
    let units: Vec<u32> = match unit_bytes {
        1 => raw.iter().map(|&b| b as u32).collect(),
        2 => raw.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]]) as u32).collect(),
        _ => raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect(),
    };
    if r.pos != bytes.len() {
        return Err(Error::Container(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    EncodedStream::from_units(layout, &units, h.total_bits, h.symbol_count, book, gap)
}

pub fn read(r: &mut impl Read) -> Result<EncodedStream> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::histogram;
    use crate::encoder::{encode, oracle_symbols};
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn sample_round_trip_and_payload_bytes() {
        let s = fixtures::sample_stream(true);
        let bytes = to_bytes(&s);
        let tail = &bytes[bytes.len() - 4..];
        assert_eq!(tail, &[0x8C, 0xF9, 0x40, 0xE8]);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(to_bytes(&back), bytes);
        assert_eq!(back.gap(), s.gap());
        assert_eq!(back.codebook(), s.codebook());
        assert_eq!(ContainerHeader::of(&back), read_header(&bytes).unwrap());
    }

    #[test]
    fn empty_stream() {
        let book = Codebook::from_frequencies(&[0; 256], 8).unwrap();
        let s = encode(&[], &book, LayoutConfig::default(), true).unwrap();
        let back = from_bytes(&to_bytes(&s)).unwrap();
        assert_eq!(back.symbol_count(), 0);
        assert_eq!(back.total_bits(), 0);
    }

    #[test]
    fn corruption_rejected() {
        let bytes = to_bytes(&fixtures::sample_stream(false));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(from_bytes(&bad), Err(Error::Container(_))));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(from_bytes(&bad), Err(Error::Container(_))));
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(from_bytes(&long).is_err());
        assert!(from_bytes(&[]).is_err());
    }

    proptest! {
        #[test]
        fn canonical_round_trip(
            syms in proptest::collection::vec(0u16..300, 0..3000),
            unit in prop_oneof![Just(8u32), Just(16), Just(32)],
            ups in 1u32..6,
            sps in 1u32..6,
            gap in any::<bool>(),
        ) {
            let book = Codebook::from_frequencies(&histogram(&syms, 1 << 16), 16).unwrap();
            let layout = LayoutConfig::new(unit, ups, sps).unwrap();
            let s = encode(&syms, &book, layout, gap).unwrap();
            let bytes = to_bytes(&s);
            let back = from_bytes(&bytes).unwrap();
            prop_assert_eq!(ContainerHeader::of(&back), ContainerHeader::of(&s));
            prop_assert_eq!(to_bytes(&back), bytes);
            prop_assert_eq!(oracle_symbols(&back).unwrap(), syms);
        }
    }
}
