use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hufpar::cli::container;

fn hufpar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hufpar")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn explicit_codebook_reproduces_sample_bits() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.sym");
    let book = dir.path().join("cb1.json");
    let out = dir.path().join("sample.huf2");
    fs::write(&input, b"BACACCBDBAAEBBA").unwrap();
    fs::write(&book, r#"{"A":"00","B":"10","C":"11","D":"010","E":"011"}"#).unwrap();
    let text = ok(&hufpar(&[
        "encode", "--symbol-width", "8", "--unit-bits", "8", "--subseq-units", "1", "--seq-subseqs", "4",
        "--codebook", p(&book), "--gap", p(&input), p(&out),
    ]));
    assert!(text.contains("total_bits=32"), "{text}");
    let bytes = fs::read(&out).unwrap();
    assert_eq!(&bytes[bytes.len() - 4..], &[0x8C, 0xF9, 0x40, 0xE8]);
    let stream = container::from_bytes(&bytes).unwrap();
    assert_eq!(stream.gap().unwrap().as_slice(), &[0, 0, 1, 2]);

    for decoder in ["sync", "gap", "oracle"] {
        let back = dir.path().join(format!("back.{decoder}"));
        let report = ok(&hufpar(&["decode", "--decoder", decoder, p(&out), p(&back)]));
        assert!(report.starts_with("decoder,workers,"));
        assert_eq!(fs::read(&back).unwrap(), b"BACACCBDBAAEBBA");
    }
}

#[test]
fn round_trip_16_bit_with_options() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("codes.u16");
    let syms = hufpar::quantlite::synth_codes(50_000, 0.8, 7, 16).unwrap();
    let raw: Vec<u8> = syms.iter().flat_map(|s| s.to_le_bytes()).collect();
    fs::write(&input, &raw).unwrap();
    let huf = dir.path().join("codes.huf2");
    ok(&hufpar(&["encode", "--gap", p(&input), p(&huf)]));
    let back = dir.path().join("back");
    ok(&hufpar(&[
        "decode", "--decoder", "gap", "--workers", "4", "--t-high", "4", "--capacity", "2=4096",
        "--capacity", "5=2048", p(&huf), p(&back),
    ]));
    assert_eq!(fs::read(&back).unwrap(), raw);
    ok(&hufpar(&["decode", "--strategy", "scattered", p(&huf), p(&back)]));
    assert_eq!(fs::read(&back).unwrap(), raw);
}

#[test]
fn empty_input_gives_valid_container() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    fs::write(&input, b"").unwrap();
    let huf = dir.path().join("empty.huf2");
    ok(&hufpar(&["encode", "--gap", p(&input), p(&huf)]));
    let stream = container::from_bytes(&fs::read(&huf).unwrap()).unwrap();
    assert_eq!(stream.symbol_count(), 0);
    let back = dir.path().join("back");
    ok(&hufpar(&["decode", p(&huf), p(&back)]));
    assert!(fs::read(&back).unwrap().is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hufpar(&["nonsense"]).status.code(), Some(1));
    assert_eq!(hufpar(&["encode"]).status.code(), Some(1));
    assert_eq!(hufpar(&["bench", "--sweep", "9:1:1", "--synth", "0.5:1KiB"]).status.code(), Some(1));
    assert_eq!(hufpar(&["--version"]).status.code(), Some(0));

    let odd = dir.path().join("odd");
    fs::write(&odd, [1u8, 2, 3]).unwrap();
    let huf = dir.path().join("x.huf2");
    assert_eq!(hufpar(&["encode", p(&odd), p(&huf)]).status.code(), Some(2));

    // Gap decoder on a container without a gap array.
    let input = dir.path().join("in");
    fs::write(&input, [5u8, 6, 5, 5]).unwrap();
    ok(&hufpar(&["encode", "--symbol-width", "8", p(&input), p(&huf)]));
    let out = hufpar(&["decode", "--decoder", "gap", p(&huf), p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no gap array"));

    let mut bytes = fs::read(&huf).unwrap();
    bytes[0] = b'Z';
    fs::write(&huf, bytes).unwrap();
    assert_eq!(hufpar(&["decode", p(&huf), p(&dir.path().join("o"))]).status.code(), Some(2));
}

#[test]
fn quantize_dequantize_files() {
    let dir = tempfile::tempdir().unwrap();
    let field = hufpar::quantlite::smooth_field(20_000, 3);
    let raw: Vec<u8> = field.iter().flat_map(|v| v.to_le_bytes()).collect();
    let input = dir.path().join("field.f32");
    fs::write(&input, raw).unwrap();
    let codes = dir.path().join("field.q");
    let text = ok(&hufpar(&["quantize", "--rel-eb", "1e-3", p(&input), p(&codes)]));
    let (lo, hi) = field.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v as f64), h.max(v as f64)));
    let eb = 1e-3 * (hi - lo);
    assert!(text.contains("eb="), "{text}");
    let back = dir.path().join("back.f32");
    ok(&hufpar(&["dequantize", p(&codes), p(&back)]));
    let got: Vec<f32> =
        fs::read(&back).unwrap().chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(got.len(), field.len());
    assert!(field.iter().zip(&got).all(|(a, b)| (*a as f64 - *b as f64).abs() <= eb));

    let range2 = dir.path().join("range2.f32");
    let vals: Vec<u8> = [-1.0f32, 0.25, 1.0].iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&range2, vals).unwrap();
    let text = ok(&hufpar(&["quantize", "--rel-eb", "1e-3", p(&range2), p(&codes)]));
    assert!(text.contains("eb=0.002"), "{text}");

    let constant = dir.path().join("const.f32");
    fs::write(&constant, [0u8; 40]).unwrap();
    ok(&hufpar(&["quantize", "--eb", "0.01", p(&constant), p(&codes)]));
    let q = fs::read(&codes).unwrap();
    assert!(q.chunks_exact(2).all(|c| u16::from_le_bytes([c[0], c[1]]) == 32768));

    let nan = dir.path().join("nan.f32");
    fs::write(&nan, f32::NAN.to_le_bytes()).unwrap();
    assert_eq!(hufpar(&["quantize", "--eb", "0.1", p(&nan), p(&codes)]).status.code(), Some(2));
    assert_eq!(hufpar(&["quantize", p(&nan), p(&codes)]).status.code(), Some(1));
}

#[test]
fn bench_synthetic_rows_and_sweep() {
    let text = ok(&hufpar(&["bench", "--synth", "0.999:1MiB", "--decoders", "sync,gap,oracle", "--workers", "2"]));
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header = rows.headers().unwrap().clone();
    assert!(header.iter().any(|h| h == "throughput_gbs"));
    let recs: Vec<_> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(recs.len(), 3);
    let decoders: Vec<&str> = recs.iter().map(|r| &r[0]).collect();
    assert_eq!(decoders, ["sync", "gap", "oracle"]);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    ok(&hufpar(&["bench", "--synth", "0.9:256KiB", "--decoders", "gap", "--sweep", "--out", p(&out)]));
    let text = fs::read_to_string(&out).unwrap();
    let caps: Vec<String> = csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap()[3].to_string())
        .collect();
    let expected: Vec<String> = (1024..=8192).step_by(512).map(|c| c.to_string()).collect();
    assert_eq!(caps, expected);
}

#[test]
fn bench_is_deterministic_in_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cols = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("b{i}.csv"));
        ok(&hufpar(&["bench", "--synth", "0.7:128KiB", "--seed", "11", "--decoders", "sync", "--out", p(&out)]));
        let text = fs::read_to_string(&out).unwrap();
        let rec = csv::Reader::from_reader(text.as_bytes()).records().next().unwrap().unwrap();
        // Everything except the timing columns.
        cols.push([&rec[6], &rec[7], &rec[8], &rec[18], &rec[19]].map(str::to_string));
    }
    assert_eq!(cols[0], cols[1]);
}
