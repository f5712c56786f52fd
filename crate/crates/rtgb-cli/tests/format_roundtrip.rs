//! Byte-level contracts of the file formats: bit-exact round-trips, exact
//! container sizes, offset-carrying errors for malformed input, and the
//! raw-tensor import rules.

use std::fs;
use std::path::Path;

use rtgb_cli::formats::{
    import_raw_tensor, load_dataset, load_gbrbm, load_rtgb, load_rules, read_pgm, save_dataset,
    save_gbrbm, save_rtgb, save_rules, write_frames, write_pgm, DimOrder, ElemType,
};
use rtgb_core::data::{Dataset, HiddenState};
use rtgb_core::gbrbm::{GbRbm, SpinConvention};
use rtgb_core::rules::{serialize_rules, Rule, RuleSet};
use rtgb_core::temporal::RtgbParams;

fn awkward(k: usize) -> f64 {
    ((k as f64) + 1.0) / 3.0 + (k as f64).sqrt() * 1e-7
}

fn sample_gbrbm(convention: SpinConvention) -> GbRbm {
    let (nv, nh) = (3, 2);
    let w: Vec<f64> = (0..nv * nh).map(awkward).collect();
    let b: Vec<f64> = (0..nv).map(|k| awkward(k) - 1.0).collect();
    let c: Vec<f64> = (0..nh).map(|k| -awkward(k)).collect();
    let s: Vec<f64> = (0..nv).map(|k| 0.5 + awkward(k)).collect();
    GbRbm::from_parts(nv, nh, convention, w, b, c, s).expect("valid test model")
}

fn sample_rtgb() -> RtgbParams {
    let (nv, nh) = (4, 3);
    let w: Vec<f64> = (0..nv * nh).map(awkward).collect();
    let u: Vec<f64> = (0..nh * nh).map(|k| awkward(k) - 2.0).collect();
    let b: Vec<f64> = (0..nv).map(|k| awkward(k) * 0.1).collect();
    let c: Vec<f64> = (0..nh).map(|k| -awkward(k) * 0.2).collect();
    let s: Vec<f64> = (0..nv).map(|k| 0.3 + awkward(k)).collect();
    RtgbParams::from_parts(nv, nh, w, u, b, c, s).expect("valid test params")
}

fn sample_dataset() -> Dataset {
    let px = 2u32;
    let steps = 3u32;
    let n_seq = 2usize;
    let pixels: Vec<f32> = (0..n_seq * steps as usize * 4)
        .map(|k| (k as f32 * 0.37).fract())
        .collect();
    Dataset::from_pixels(px, steps, pixels).expect("valid test dataset")
}

fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[test]
fn gbrbm_checkpoint_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().expect("tempdir");
    for convention in [SpinConvention::ZeroOne, SpinConvention::PlusMinusOne] {
        let model = sample_gbrbm(convention);
        let path = dir.path().join("model.rbm");
        save_gbrbm(&path, &model).expect("save succeeds");
        let loaded = load_gbrbm(&path).expect("load succeeds");
        assert_eq!(loaded.convention(), convention, "convention survives");
        assert!(bits_eq(&loaded.w, &model.w), "w bits survive the round trip");
        assert!(bits_eq(&loaded.b, &model.b), "b bits survive the round trip");
        assert!(bits_eq(&loaded.c, &model.c), "c bits survive the round trip");
        assert!(bits_eq(&loaded.s, &model.s), "s bits survive the round trip");
        let second = dir.path().join("model2.rbm");
        save_gbrbm(&second, &loaded).expect("second save succeeds");
        assert_eq!(
            fs::read(&path).expect("first file"),
            fs::read(&second).expect("second file"),
            "save-load-save is byte-identical"
        );
    }
}

#[test]
fn rtgb_checkpoint_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().expect("tempdir");
    let params = sample_rtgb();
    let path = dir.path().join("model.rtgb");
    save_rtgb(&path, &params).expect("save succeeds");
    let loaded = load_rtgb(&path).expect("load succeeds");
    assert!(bits_eq(&loaded.w, &params.w), "w bits survive");
    assert!(bits_eq(&loaded.u, &params.u), "u bits survive");
    assert!(bits_eq(&loaded.b, &params.b), "b bits survive");
    assert!(bits_eq(&loaded.c, &params.c), "c bits survive");
    assert!(bits_eq(&loaded.s, &params.s), "s bits survive");
    let second = dir.path().join("model2.rtgb");
    save_rtgb(&second, &loaded).expect("second save succeeds");
    assert_eq!(
        fs::read(&path).expect("first file"),
        fs::read(&second).expect("second file"),
        "save-load-save is byte-identical"
    );
}

#[test]
fn dataset_round_trip_and_exact_size() {
    let dir = tempfile::tempdir().expect("tempdir");
    let data = sample_dataset();
    let path = dir.path().join("d.rbmd");
    save_dataset(&path, &data).expect("save succeeds");
    let bytes = fs::read(&path).expect("file readable");
    let expected_len =
        16 + 4 * data.n_sequences() * data.steps() as usize * data.frame_len();
    assert_eq!(bytes.len(), expected_len, "container size is exactly header + payload");
    let loaded = load_dataset(&path).expect("load succeeds");
    assert_eq!(loaded.frame_px(), data.frame_px(), "frame size survives");
    assert_eq!(loaded.steps(), data.steps(), "step count survives");
    let same_bits = loaded
        .pixels()
        .iter()
        .zip(data.pixels())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    assert!(same_bits, "pixel bits survive the round trip");
    let second = dir.path().join("d2.rbmd");
    save_dataset(&second, &loaded).expect("second save succeeds");
    assert_eq!(bytes, fs::read(&second).expect("second file"), "byte-identical resave");
}

#[test]
fn truncated_dataset_reports_the_failing_offset() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("d.rbmd");
    save_dataset(&path, &sample_dataset()).expect("save succeeds");
    let full = fs::read(&path).expect("file readable");
    let cut = full.len() - 6;
    fs::write(&path, &full[..cut]).expect("truncate");
    let err = load_dataset(&path).expect_err("truncated file must fail");
    assert_eq!(err.offset, cut as u64, "error carries the truncation offset");
    assert!(
        err.message.contains("pixel payload"),
        "error names the field being read, got {:?}",
        err.message
    );
}

#[test]
fn bad_magic_reports_offset_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("d.rbmd");
    fs::write(&path, b"NOPE\x01\x00\x00\x00").expect("write stub");
    let err = load_dataset(&path).expect_err("bad magic must fail");
    assert_eq!(err.offset, 0, "magic mismatch is at offset zero");
    assert!(err.message.contains("magic"), "message mentions the magic");
}

#[test]
fn unknown_convention_byte_reports_its_offset() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("m.rbm");
    save_gbrbm(&path, &sample_gbrbm(SpinConvention::ZeroOne)).expect("save succeeds");
    let mut bytes = fs::read(&path).expect("file readable");
    bytes[12] = 9;
    fs::write(&path, &bytes).expect("corrupt");
    let err = load_gbrbm(&path).expect_err("unknown convention must fail");
    assert_eq!(err.offset, 12, "convention byte sits after magic and two u32 counts");
    assert!(err.message.contains("convention"), "message names the field");
}

#[test]
fn trailing_bytes_are_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("m.rtgb");
    save_rtgb(&path, &sample_rtgb()).expect("save succeeds");
    let mut bytes = fs::read(&path).expect("file readable");
    let clean_len = bytes.len() as u64;
    bytes.push(0);
    fs::write(&path, &bytes).expect("extend");
    let err = load_rtgb(&path).expect_err("trailing bytes must fail");
    assert_eq!(err.offset, clean_len, "error points at the first extra byte");
    assert!(err.message.contains("trailing"), "message says trailing");
}

#[test]
fn unsupported_rtgb_version_is_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("m.rtgb");
    save_rtgb(&path, &sample_rtgb()).expect("save succeeds");
    let mut bytes = fs::read(&path).expect("file readable");
    bytes[4] = 42;
    fs::write(&path, &bytes).expect("corrupt");
    let err = load_rtgb(&path).expect_err("future version must fail");
    assert_eq!(err.offset, 4, "version byte follows the magic");
    assert!(err.message.contains("version 42"), "message names the version");
}

#[test]
fn rules_file_round_trips_byte_identically() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut rs = RuleSet::new(3, vec![0.25, 0.5, 0.75]).expect("valid rule set");
    for (value, head, prob) in [(0b101u64, 0usize, 0.9125), (0b010, 2, 0.0625)] {
        rs.insert(Rule {
            head,
            body: HiddenState::from_value(value, 3),
            prob,
            support: 4,
        })
        .expect("insert succeeds");
    }
    let path = dir.path().join("r.rules");
    save_rules(&path, &rs).expect("save succeeds");
    let loaded = load_rules(&path).expect("load succeeds");
    assert_eq!(
        serialize_rules(&loaded),
        fs::read_to_string(&path).expect("file readable"),
        "parse then serialize reproduces the file"
    );
}

#[test]
fn pgm_round_trip_stays_within_quantization() {
    let dir = tempfile::tempdir().expect("tempdir");
    let px = 4u32;
    let frame: Vec<f64> = (0..16).map(|k| k as f64 / 15.0).collect();
    let path = dir.path().join("f.pgm");
    write_pgm(&path, px, &frame).expect("write succeeds");
    let (w, h, decoded) = read_pgm(&path).expect("read succeeds");
    assert_eq!((w, h), (px, px), "dimensions survive");
    for (k, (&orig, &got)) in frame.iter().zip(&decoded).enumerate() {
        assert!(
            (orig - got as f64).abs() <= 1.0 / 510.0 + 1e-12,
            "pixel {k} moved {orig} -> {got}, beyond 8-bit quantization"
        );
    }
}

#[test]
fn frame_files_are_numbered_from_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let frames: Vec<Vec<f32>> = (0..3).map(|t| vec![t as f32 * 0.3; 4]).collect();
    let paths = write_frames(dir.path(), 2, &frames).expect("write succeeds");
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["frame_0000.pgm", "frame_0001.pgm", "frame_0002.pgm"],
        "files follow the frame_NNNN.pgm pattern"
    );
    for p in &paths {
        assert!(p.exists(), "{} exists", p.display());
    }
}

fn write_tensor(path: &Path, bytes: &[u8]) {
    fs::write(path, bytes).expect("tensor file written");
}

#[test]
fn import_scales_u8_and_reorders_time_major() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("raw.u8");
    // 2 sequences x 2 steps x 1x1 frames, time-major layout:
    // (t0,s0) (t0,s1) (t1,s0) (t1,s1)
    write_tensor(&path, &[0, 51, 255, 102]);
    let data = import_raw_tensor(&path, [2, 2, 1, 1], DimOrder::TimeSeq, ElemType::U8, None)
        .expect("import succeeds");
    assert_eq!(data.n_sequences(), 2, "two sequences");
    let got: Vec<f32> = data.pixels().to_vec();
    let want = [0.0, 1.0, 51.0 / 255.0, 102.0 / 255.0];
    for (k, (&g, &w)) in got.iter().zip(&want).enumerate() {
        assert!((g - w).abs() < 1e-7, "pixel {k}: got {g}, want {w}");
    }
}

#[test]
fn import_clamps_f32_and_binarizes_on_request() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("raw.f32");
    let values = [-0.5f32, 0.25, 0.75, 1.5];
    let mut bytes = Vec::new();
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_tensor(&path, &bytes);
    let plain = import_raw_tensor(&path, [1, 4, 1, 1], DimOrder::SeqTime, ElemType::F32, None)
        .expect("import succeeds");
    assert_eq!(plain.pixels(), &[0.0, 0.25, 0.75, 1.0], "clamped to [0, 1]");
    let binary = import_raw_tensor(
        &path,
        [1, 4, 1, 1],
        DimOrder::SeqTime,
        ElemType::F32,
        Some(0.5),
    )
    .expect("import succeeds");
    assert_eq!(binary.pixels(), &[0.0, 0.0, 1.0, 1.0], "thresholded at 0.5");
}

#[test]
fn import_rejects_truncation_with_byte_counts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("raw.u8");
    write_tensor(&path, &[1, 2, 3]);
    let err = import_raw_tensor(&path, [1, 1, 2, 2], DimOrder::SeqTime, ElemType::U8, None)
        .expect_err("short file must fail");
    assert!(
        err.message.contains('3') && err.message.contains('4'),
        "error names actual (3) and expected (4) byte counts, got {:?}",
        err.message
    );
}

#[test]
fn import_rejects_non_square_frames() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("raw.u8");
    write_tensor(&path, &[0; 6]);
    let err = import_raw_tensor(&path, [1, 1, 2, 3], DimOrder::SeqTime, ElemType::U8, None)
        .expect_err("rectangular frames must fail");
    assert!(err.message.contains("square"), "message says square, got {:?}", err.message);
}
