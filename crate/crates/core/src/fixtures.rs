//! Small hand-checkable streams built on the classic five-symbol
//! self-synchronizing code {A:00, B:10, C:11, D:010, E:011}.

use crate::codebook::{Codebook, Symbol};
use crate::encoder::encode;
use crate::stream::{EncodedStream, LayoutConfig};

/// Encodes to the 32 bits `10001100 11111001 01000000 11101000`.
pub const SAMPLE: &[u8] = b"BACACCBDBAAEBBA";
/// Encodes to the 15 bits `111000010111000`.
pub const SHORT_SAMPLE: &[u8] = b"CBADCBA";

pub fn five_symbol_book() -> Codebook {
    Codebook::from_explicit(
        &[
            (b'A' as u32, 0b00, 2),
            (b'B' as u32, 0b10, 2),
            (b'C' as u32, 0b11, 2),
            (b'D' as u32, 0b010, 3),
            (b'E' as u32, 0b011, 3),
        ],
        8,
    )
    .expect("five-symbol book is prefix-free")
}

/// 8-bit units, one unit per subsequence, four subsequences per sequence.
pub fn byte_layout() -> LayoutConfig {
    LayoutConfig { unit_bits: 8, units_per_subseq: 1, subseqs_per_seq: 4 }
}

pub fn as_symbols(bytes: &[u8]) -> Vec<Symbol> {
    bytes.iter().map(|&b| b as Symbol).collect()
}

/// [`SAMPLE`] encoded under [`byte_layout`].
pub fn sample_stream(with_gap: bool) -> EncodedStream {
    encode(&as_symbols(SAMPLE), &five_symbol_book(), byte_layout(), with_gap)
        .expect("sample symbols are in the book")
}
