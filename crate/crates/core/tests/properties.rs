mod common;

use common::{check_case, folded_codes, random_case, CAPACITIES};
use hufpar::codebook::{histogram, Codebook};
use hufpar::decode_write::WriteStrategy;
use hufpar::encoder::{encode, oracle_decode};
use hufpar::exec::Executor;
use hufpar::report::DecodeOptions;
use hufpar::stream::LayoutConfig;
use hufpar::{decoder_gap, decoder_sync};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoders_agree_with_oracle(seed in any::<u64>()) {
        if let Err(msg) = check_case(&random_case(seed, 20_000)) {
            prop_assert!(false, "{}", msg);
        }
    }

    #[test]
    fn worker_count_does_not_change_output(seed in any::<u64>(), p in 0.3f64..0.999) {
        let syms = folded_codes(30_000, p, seed, 16, 4096);
        let book = Codebook::from_frequencies(&histogram(&syms, 4096), 16).unwrap();
        let s = encode(&syms, &book, LayoutConfig::default(), true).unwrap();
        let opts = DecodeOptions::default();
        let base = decoder_sync::decode_with(&s, &Executor::new(1).unwrap(), &opts).unwrap();
        for w in [2, 3, 8] {
            let exec = Executor::new(w).unwrap();
            let d = decoder_sync::decode_with(&s, &exec, &opts).unwrap();
            prop_assert!(d.state.same_points(&base.state));
            prop_assert_eq!(&d.symbols, &syms);
            prop_assert_eq!(decoder_gap::decode_with(&s, &exec, &opts).unwrap().symbols, syms.clone());
        }
    }

    #[test]
    fn capacity_does_not_change_output(seed in any::<u64>(), p in 0.05f64..0.999) {
        let syms = folded_codes(20_000, p, seed, 8, 256);
        let book = Codebook::from_frequencies(&histogram(&syms, 256), 8).unwrap();
        let s = encode(&syms, &book, LayoutConfig::new(16, 2, 8).unwrap(), true).unwrap();
        let exec = Executor::new(2).unwrap();
        for cap in CAPACITIES {
            for strategy in [WriteStrategy::Staged, WriteStrategy::Scattered] {
                let opts = DecodeOptions { strategy, ..DecodeOptions::fixed(cap) };
                prop_assert_eq!(&decoder_gap::decode_with(&s, &exec, &opts).unwrap().symbols, &syms);
            }
        }
    }
}

#[test]
fn gap_is_one_byte_per_subsequence() {
    let syms = folded_codes(400_000, 0.6, 4, 16, 4096);
    let book = Codebook::from_frequencies(&histogram(&syms, 4096), 16).unwrap();
    let s = encode(&syms, &book, LayoutConfig::default(), true).unwrap();
    let gap = s.gap().unwrap().len() as f64;
    assert_eq!(gap as usize, s.num_subseqs());
    let ratio = gap / s.payload_bytes() as f64;
    assert!((ratio - 1.0 / 16.0).abs() <= 0.01 / 16.0, "{ratio}");
}

#[test]
fn tiny_subsequences_with_long_codes() {
    // Codes far longer than a subsequence: most slots hold no codeword start.
    let mut freqs = vec![0u64; 40];
    let mut f = 1u64;
    for x in freqs.iter_mut().rev() {
        *x = f;
        f = (f * 3 / 2).max(f + 1);
    }
    let book = Codebook::from_frequencies(&freqs, 8).unwrap();
    assert!(book.max_len() > 16);
    let syms: Vec<u16> = (0..5_000u32).map(|i| ((i * 7919) % 40) as u16).collect();
    let s = encode(&syms, &book, LayoutConfig::new(8, 1, 3).unwrap(), true).unwrap();
    let oracle = oracle_decode(&s).unwrap();
    assert_eq!(oracle.symbols, syms);
    let exec = Executor::new(2).unwrap();
    let d = decoder_sync::decode_with(&s, &exec, &DecodeOptions::fixed(8)).unwrap();
    assert_eq!(d.symbols, syms);
    assert_eq!(decoder_gap::decode_with(&s, &exec, &DecodeOptions::default()).unwrap().symbols, syms);
}
