//! Huffman code construction and single-codeword decoding.
//!
//! Two flavours of codebook exist. Canonical books are derived purely from
//! per-symbol code lengths and are what the encoder produces in practice.
//! Explicit books carry arbitrary prefix-free codes verbatim, which is only
//! needed to reproduce hand-written example codes bit for bit.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::stream::BitSource;

/// Multi-byte input symbol. Only the low `symbol_width` bits are used.
pub type Symbol = u16;

/// Longest codeword we accept. A codeword never spans more than two 32-bit units.
pub const MAX_CODE_LEN: u32 = 32;

const LUT_BITS: u32 = 12;
const TRIE_LEAF: u32 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodebookKind {
    Canonical,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    symbol_width: u8,
    /// Indexed by symbol value, 0 marks an absent symbol.
    lengths: Vec<u8>,
    codes: Vec<u32>,
    max_len: u8,
    kind: CodebookKind,
}

fn check_width(width: u8) -> Result<()> {
    match width {
        8 | 16 => Ok(()),
        w => Err(Error::InvalidConfig(format!("symbol width {w} not in {{8, 16}}"))),
    }
}

/// Computes optimal (Huffman) code lengths for the given per-symbol counts.
///
/// `freqs[s]` is the count of symbol `s`. The returned vector has the same
/// length, with 0 for symbols that never occur. Ties between equal counts are
/// broken by symbol value for leaves, and by creation order (after all leaves)
/// for merged nodes, so the result does not depend on the platform.
pub fn build_lengths(freqs: &[u64]) -> Result<Vec<u8>> {
    let present: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    let mut lengths = vec![0u8; freqs.len()];
    match present.len() {
        0 => return Err(Error::EmptyInput),
        1 => {
            lengths[present[0]] = 1;
            return Ok(lengths);
        }
        _ => {}
    }

    // Nodes 0..n are leaves (in symbol order), merged nodes follow.
    let n = present.len();
    let mut parent = vec![u32::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = present
        .iter()
        .enumerate()
        .map(|(leaf, &s)| Reverse((freqs[s], leaf as u32)))
        .collect();
    let mut next = n as u32;
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        parent[a as usize] = next;
        parent[b as usize] = next;
        heap.push(Reverse((wa + wb, next)));
        next += 1;
    }

    // Parents always have larger indices, so one reverse sweep yields depths.
    let root = next as usize - 1;
    let mut depth = vec![0u32; 2 * n - 1];
    for node in (0..root).rev() {
        depth[node] = depth[parent[node] as usize] + 1;
    }
    let deepest = depth[..n].iter().copied().max().unwrap_or(0);
    if deepest > MAX_CODE_LEN {
        return Err(Error::LengthOverflow { len: deepest });
    }
    for (leaf, &s) in present.iter().enumerate() {
        lengths[s] = depth[leaf] as u8;
    }
    Ok(lengths)
}

/// Counts symbol occurrences into a table of `alphabet_size` entries.
pub fn histogram(symbols: &[Symbol], alphabet_size: usize) -> Vec<u64> {
    let mut freqs = vec![0u64; alphabet_size];
    for &s in symbols {
        freqs[s as usize] += 1;
    }
    freqs
}

/// Sum of 2^(32-len) over present symbols; a complete code sums to 2^32.
fn kraft_units(lengths: &[u8]) -> u64 {
    lengths
        .iter()
        .filter(|&&l| l > 0)
        .map(|&l| 1u64 << (MAX_CODE_LEN - l as u32))
        .sum()
}

impl Codebook {
    /// Assigns canonical codes: symbols ordered by (length, value) receive
    /// consecutive code values.
    pub fn canonize(lengths: &[u8], symbol_width: u8) -> Result<Codebook> {
        check_width(symbol_width)?;
        if lengths.len() > 1usize << symbol_width {
            return Err(Error::SymbolOutOfRange {
                symbol: lengths.len() as u32 - 1,
                width: symbol_width,
            });
        }
        for (s, &l) in lengths.iter().enumerate() {
            if l as u32 > MAX_CODE_LEN {
                return Err(Error::BadLength { symbol: s as u32, len: l as u32 });
            }
        }
        if kraft_units(lengths) > 1u64 << MAX_CODE_LEN {
            return Err(Error::KraftViolation);
        }

        let max_len = lengths.iter().copied().max().unwrap_or(0);
        let mut per_len = [0u64; MAX_CODE_LEN as usize + 1];
        for &l in lengths.iter().filter(|&&l| l > 0) {
            per_len[l as usize] += 1;
        }
        let mut next_code = [0u64; MAX_CODE_LEN as usize + 1];
        for len in 2..=MAX_CODE_LEN as usize {
            next_code[len] = (next_code[len - 1] + per_len[len - 1]) << 1;
        }
        let mut codes = vec![0u32; lengths.len()];
        for (s, &l) in lengths.iter().enumerate() {
            if l > 0 {
                codes[s] = next_code[l as usize] as u32;
                next_code[l as usize] += 1;
            }
        }
        Ok(Codebook {
            symbol_width,
            lengths: lengths.to_vec(),
            codes,
            max_len,
            kind: CodebookKind::Canonical,
        })
    }

    /// Builds a codebook from frequencies: `build_lengths` followed by `canonize`.
    /// An all-zero histogram yields an empty codebook.
    pub fn from_frequencies(freqs: &[u64], symbol_width: u8) -> Result<Codebook> {
        match build_lengths(freqs) {
            Ok(lengths) => Codebook::canonize(&lengths, symbol_width),
            Err(Error::EmptyInput) => Codebook::canonize(&vec![0; freqs.len()], symbol_width),
            Err(e) => Err(e),
        }
    }

    /// Takes `(symbol, code, length)` triples verbatim, rejecting sets that are
    /// not prefix-free.
    pub fn from_explicit(entries: &[(u32, u32, u8)], symbol_width: u8) -> Result<Codebook> {
        check_width(symbol_width)?;
        let alphabet = entries.iter().map(|e| e.0 as usize + 1).max().unwrap_or(0);
        let mut lengths = vec![0u8; alphabet];
        let mut codes = vec![0u32; alphabet];
        for &(s, code, len) in entries {
            if s >> symbol_width != 0 {
                return Err(Error::SymbolOutOfRange { symbol: s, width: symbol_width });
            }
            if len == 0 || len as u32 > MAX_CODE_LEN {
                return Err(Error::BadLength { symbol: s, len: len as u32 });
            }
            if (len as u32) < 32 && code >> len != 0 {
                return Err(Error::InvalidConfig(format!(
                    "code {code:#b} for symbol {s} wider than {len} bits"
                )));
            }
            if lengths[s as usize] != 0 {
                return Err(Error::InvalidConfig(format!("symbol {s} listed twice")));
            }
            lengths[s as usize] = len;
            codes[s as usize] = code;
        }

        // Left-align every code in 32 bits; after sorting, a prefix relation
        // always shows up between neighbours.
        let mut aligned: Vec<(u32, u8, u32)> = entries
            .iter()
            .map(|&(s, code, len)| (((code as u64) << (32 - len as u32)) as u32, len, s))
            .collect();
        aligned.sort_unstable();
        for pair in aligned.windows(2) {
            let (a_left, a_len, a_sym) = pair[0];
            let (b_left, _, b_sym) = pair[1];
            let shift = 32 - a_len as u32;
            if (a_left as u64) >> shift == (b_left as u64) >> shift {
                return Err(Error::NotPrefixFree { prefix: a_sym, other: b_sym });
            }
        }

        let max_len = lengths.iter().copied().max().unwrap_or(0);
        Ok(Codebook { symbol_width, lengths, codes, max_len, kind: CodebookKind::Explicit })
    }

    pub fn symbol_width(&self) -> u8 {
        self.symbol_width
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn max_len(&self) -> u32 {
        self.max_len as u32
    }

    /// Number of symbol slots (highest present symbol + 1, or the declared table size).
    pub fn alphabet_size(&self) -> usize {
        self.lengths.len()
    }

    /// Per-symbol lengths, 0 for absent symbols.
    pub fn lengths(&self) -> &[u8] {
        &self.lengths
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    /// `(code, length)` of a symbol, `None` when it has no codeword.
    #[inline]
    pub fn code(&self, symbol: Symbol) -> Option<(u32, u32)> {
        match self.lengths.get(symbol as usize) {
            Some(&l) if l > 0 => Some((self.codes[symbol as usize], l as u32)),
            _ => None,
        }
    }

    pub fn num_symbols(&self) -> usize {
        self.lengths.iter().filter(|&&l| l > 0).count()
    }

    /// Kraft sum of the code: exactly 1.0 for a complete code.
    pub fn kraft_sum(&self) -> f64 {
        kraft_units(&self.lengths) as f64 / (1u64 << MAX_CODE_LEN) as f64
    }

    pub fn decode_table(&self) -> DecodeTable {
        DecodeTable::new(self)
    }
}

/// Decode-side form of a [`Codebook`].
///
/// Short codewords resolve through a direct lookup on the next 12 bits. Longer
/// ones fall back to first-code arithmetic (canonical books) or a binary trie
/// (explicit books).
#[derive(Clone, Debug)]
pub struct DecodeTable {
    lut_bits: u32,
    /// `(symbol << 8) | len`, 0 when the prefix needs the slow path.
    lut: Vec<u32>,
    max_len: u32,
    slow: SlowPath,
}

// One table per stream; the canonical arrays stay inline for the slow path.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
enum SlowPath {
    Canonical {
        first_code: [u64; MAX_CODE_LEN as usize + 1],
        count: [u64; MAX_CODE_LEN as usize + 1],
        offset: [u32; MAX_CODE_LEN as usize + 1],
        symbols: Vec<Symbol>,
    },
    /// Children per node; 0 = missing, `TRIE_LEAF | symbol` = leaf.
    Trie(Vec<[u32; 2]>),
}

impl DecodeTable {
    fn new(book: &Codebook) -> DecodeTable {
        let max_len = book.max_len();
        let lut_bits = max_len.clamp(1, LUT_BITS);
        let mut lut = vec![0u32; 1 << lut_bits];
        for (s, &l) in book.lengths.iter().enumerate() {
            let l = l as u32;
            if l == 0 || l > lut_bits {
                continue;
            }
            let base = (book.codes[s] << (lut_bits - l)) as usize;
            let entry = ((s as u32) << 8) | l;
            lut[base..base + (1 << (lut_bits - l))].fill(entry);
        }

        let slow = match book.kind {
            CodebookKind::Canonical => {
                let mut order: Vec<usize> = (0..book.lengths.len())
                    .filter(|&s| book.lengths[s] > 0)
                    .collect();
                order.sort_by_key(|&s| (book.lengths[s], s));
                let mut first_code = [0u64; MAX_CODE_LEN as usize + 1];
                let mut count = [0u64; MAX_CODE_LEN as usize + 1];
                let mut offset = [0u32; MAX_CODE_LEN as usize + 1];
                for (i, &s) in order.iter().enumerate().rev() {
                    let l = book.lengths[s] as usize;
                    first_code[l] = book.codes[s] as u64;
                    offset[l] = i as u32;
                    count[l] += 1;
                }
                SlowPath::Canonical {
                    first_code,
                    count,
                    offset,
                    symbols: order.iter().map(|&s| s as Symbol).collect(),
                }
            }
            CodebookKind::Explicit => {
                let mut nodes = vec![[0u32; 2]];
                for (s, &l) in book.lengths.iter().enumerate() {
                    if l == 0 {
                        continue;
                    }
                    let code = book.codes[s];
                    let mut node = 0usize;
                    for depth in (0..l as u32).rev() {
                        let bit = ((code >> depth) & 1) as usize;
                        if depth == 0 {
                            nodes[node][bit] = TRIE_LEAF | s as u32;
                        } else {
                            if nodes[node][bit] == 0 {
                                nodes.push([0, 0]);
                                nodes[node][bit] = nodes.len() as u32 - 1;
                            }
                            node = nodes[node][bit] as usize;
                        }
                    }
                }
                SlowPath::Trie(nodes)
            }
        };
        DecodeTable { lut_bits, lut, max_len, slow }
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Matches the codeword at the top of `peek` (the next 32 stream bits,
    /// MSB first). Returns the symbol and its length.
    #[inline]
    pub fn lookup(&self, peek: u32) -> Option<(Symbol, u32)> {
        let e = self.lut[(peek >> (32 - self.lut_bits)) as usize];
        if e != 0 {
            return Some(((e >> 8) as Symbol, e & 0xff));
        }
        self.lookup_slow(peek)
    }

    #[cold]
    fn lookup_slow(&self, peek: u32) -> Option<(Symbol, u32)> {
        match &self.slow {
            SlowPath::Canonical { first_code, count, offset, symbols } => {
                for len in 1..=self.max_len {
                    let code = (peek as u64) >> (32 - len);
                    let l = len as usize;
                    if code >= first_code[l] && code - first_code[l] < count[l] {
                        let idx = offset[l] as u64 + code - first_code[l];
                        return Some((symbols[idx as usize], len));
                    }
                }
                None
            }
            SlowPath::Trie(nodes) => {
                let mut node = 0usize;
                for depth in 0..self.max_len {
                    let bit = ((peek >> (31 - depth)) & 1) as usize;
                    let next = nodes[node][bit];
                    if next == 0 {
                        return None;
                    }
                    if next & TRIE_LEAF != 0 {
                        return Some(((next & !TRIE_LEAF) as Symbol, depth + 1));
                    }
                    node = next as usize;
                }
                None
            }
        }
    }

    /// Decodes one codeword at `cursor`. The caller advances by the returned length.
    pub fn decode_one<S: BitSource + ?Sized>(&self, src: &S, cursor: u64) -> Result<(Symbol, u32)> {
        if cursor >= src.bit_len() {
            return Err(Error::Truncated { bit: cursor });
        }
        match self.lookup(src.peek32(cursor)) {
            Some((sym, len)) if cursor + len as u64 <= src.bit_len() => Ok((sym, len)),
            Some(_) => Err(Error::Truncated { bit: cursor }),
            None => Err(Error::InvalidCode { bit: cursor }),
        }
    }
}
