use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("all symbol counts are zero")]
    EmptyInput,
    #[error("optimal code needs a {len}-bit codeword, cap is 32")]
    LengthOverflow { len: u32 },
    #[error("code lengths violate the Kraft inequality")]
    KraftViolation,
    #[error("code for symbol {prefix} is a prefix of the code for symbol {other}")]
    NotPrefixFree { prefix: u32, other: u32 },
    #[error("codeword length {len} for symbol {symbol} outside 1..=32")]
    BadLength { symbol: u32, len: u32 },
    #[error("symbol {symbol} does not fit in {width} bits")]
    SymbolOutOfRange { symbol: u32, width: u8 },
    #[error("no codeword matches the bits at {bit}")]
    InvalidCode { bit: u64 },
    #[error("stream ends inside a codeword starting at bit {bit}")]
    Truncated { bit: u64 },
    #[error("symbol {symbol} has no codeword")]
    UnknownSymbol { symbol: u32 },
    #[error("bit cursor {bit} beyond padded storage of {limit} bits")]
    OutOfRange { bit: u64, limit: u64 },
    #[error("gap skip {skip} at subsequence {index} does not fit a byte")]
    GapOverflow { index: usize, skip: u64 },
    #[error("synchronization did not reach a fixpoint within {rounds} rounds")]
    NoFixpoint { rounds: u32 },
    #[error("stream has no gap array")]
    NotPresent,
    #[error("gap entry for subsequence {index} is not a codeword boundary")]
    BadGap { index: usize },
    #[error("compression ratio {0} is not positive")]
    NonPositiveRatio(f64),
    #[error("non-finite input value at index {index}")]
    NonFiniteInput { index: usize },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed container: {0}")]
    Container(String),
    #[error("{decoder} output differs from the reference at symbol {at}")]
    Mismatch { decoder: &'static str, at: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}
