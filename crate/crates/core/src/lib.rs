//! Fine-grained parallel Huffman decoding for multi-byte symbol streams.
//!
//! The payload is split into fixed-size subsequences (the work item of one
//! decoding slot) grouped into sequences (the work item of one task). Two
//! decoders find where each slot starts:
//!
//! * [`decoder_sync`] discovers codeword boundaries by self-synchronization,
//!   needing nothing from the encoder.
//! * [`decoder_gap`] reads them from a gap array stored next to the payload.
//!
//! Both finish with the same staged decode-and-write phase
//! ([`decode_write`]), optionally partitioned by per-sequence compression
//! ratio ([`tuner`]). [`encoder::oracle_decode`] is the sequential reference
//! every parallel path is checked against.


pub mod cli;
pub mod codebook;
pub mod decode_write;
pub mod decoder_gap;
pub mod decoder_sync;
pub mod encoder;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod quantlite;
pub mod report;
pub mod stream;
pub mod tuner;

pub use codebook::{Codebook, CodebookKind, DecodeTable, Symbol};
pub use decode_write::{OutputIndex, WriteStrategy};
pub use decoder_sync::SyncState;
pub use encoder::{encode, oracle_decode, GapArray, OracleResult};
pub use error::{Error, Result};
pub use exec::Executor;
pub use report::{DecodeOptions, Decoded, Tuning};
pub use stream::{EncodedStream, LayoutConfig};
pub use tuner::{PartitionPlan, TunerConfig};
