//! File formats: binary checkpoints and datasets, rule-set text files, PGM
//! frames, learning-curve tables, and raw tensor import.
//!
//! Binary layouts are little-endian throughout.
//!
//! Static model checkpoint: magic `RBM1`, u32 visible count, u32 hidden
//! count, u8 convention (0 zero/one, 1 plus/minus one), then `b`, `c`, `s`,
//! `w` (row-major) as f64.
//!
//! Temporal model checkpoint: magic `RTGB`, u8 version (1), u32 visible
//! count, u32 hidden count, then `b`, `c`, `s`, `w` (row-major), `u`
//! (row-major) as f64.
//!
//! Dataset container: magic `RBMD`, u32 sequence count, u32 steps, u32 frame
//! edge length, then the f32 pixel payload in sequence-major order; the file
//! is exactly `16 + 4 * sequences * steps * px^2` bytes.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rtgb_core::data::Dataset;
use rtgb_core::eval::{curve_csv, encode_pgm};
use rtgb_core::gbrbm::{GbRbm, SpinConvention};
use rtgb_core::math::widen;
use rtgb_core::rules::{parse_rules, serialize_rules, RuleSet};
use rtgb_core::temporal::RtgbParams;

/// A malformed or truncated file, with the byte offset where reading failed.
#[derive(Debug)]
pub struct FormatError {
    pub offset: u64,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for FormatError {}

impl FormatError {
    fn new(offset: u64, message: impl Into<String>) -> Self {
        FormatError { offset, message: message.into() }
    }
}

/// Byte reader that tracks its offset for error reporting.
struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn new(inner: R) -> Self {
        Reader { inner, offset: 0 }
    }

    fn take(&mut self, buf: &mut [u8], what: &str) -> Result<(), FormatError> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(FormatError::new(
                        self.offset + filled as u64,
                        format!("unexpected end of file while reading {what}"),
                    ));
                }
                Ok(n) => filled += n,
                Err(e) => {
                    return Err(FormatError::new(
                        self.offset + filled as u64,
                        format!("read error while reading {what}: {e}"),
                    ));
                }
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<(), FormatError> {
        let at = self.offset;
        let mut got = [0u8; 4];
        self.take(&mut got, "magic")?;
        if &got != expected {
            return Err(FormatError::new(
                at,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(&got),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    fn u8(&mut self, what: &str) -> Result<u8, FormatError> {
        let mut b = [0u8; 1];
        self.take(&mut b, what)?;
        Ok(b[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32, FormatError> {
        let mut b = [0u8; 4];
        self.take(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn f64_vec(&mut self, n: usize, what: &str) -> Result<Vec<f64>, FormatError> {
        let mut out = Vec::with_capacity(n);
        let mut b = [0u8; 8];
        for _ in 0..n {
            self.take(&mut b, what)?;
            out.push(f64::from_le_bytes(b));
        }
        Ok(out)
    }

    fn expect_eof(&mut self, what: &str) -> Result<(), FormatError> {
        let mut b = [0u8; 1];
        match self.inner.read(&mut b) {
            Ok(0) => Ok(()),
            Ok(_) => Err(FormatError::new(
                self.offset,
                format!("trailing bytes after {what}"),
            )),
            Err(e) => Err(FormatError::new(self.offset, format!("read error: {e}"))),
        }
    }
}

fn open(path: &Path) -> Result<Reader<BufReader<File>>, FormatError> {
    let file = File::open(path).map_err(|e| {
        FormatError::new(0, format!("cannot open {}: {e}", path.display()))
    })?;
    Ok(Reader::new(BufReader::new(file)))
}

fn write_f64s(out: &mut impl Write, xs: &[f64]) -> std::io::Result<()> {
    for &x in xs {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Write a static-model checkpoint.
pub fn save_gbrbm(path: &Path, model: &GbRbm) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"RBM1")?;
    out.write_all(&(model.n_visible() as u32).to_le_bytes())?;
    out.write_all(&(model.n_hidden() as u32).to_le_bytes())?;
    let conv = match model.convention() {
        SpinConvention::ZeroOne => 0u8,
        SpinConvention::PlusMinusOne => 1u8,
    };
    out.write_all(&[conv])?;
    write_f64s(&mut out, &model.b)?;
    write_f64s(&mut out, &model.c)?;
    write_f64s(&mut out, &model.s)?;
    write_f64s(&mut out, &model.w)?;
    out.flush()
}

/// Read a static-model checkpoint.
pub fn load_gbrbm(path: &Path) -> Result<GbRbm, FormatError> {
    let mut r = open(path)?;
    r.magic(b"RBM1")?;
    let nv = r.u32("visible count")? as usize;
    let nh = r.u32("hidden count")? as usize;
    let conv_at = r.offset;
    let convention = match r.u8("convention")? {
        0 => SpinConvention::ZeroOne,
        1 => SpinConvention::PlusMinusOne,
        other => {
            return Err(FormatError::new(
                conv_at,
                format!("unknown convention {other}, expected 0 or 1"),
            ));
        }
    };
    let b = r.f64_vec(nv, "visible bias b")?;
    let c = r.f64_vec(nh, "hidden bias c")?;
    let s = r.f64_vec(nv, "visible std s")?;
    let w = r.f64_vec(nv * nh, "weight matrix w")?;
    let at = r.offset;
    r.expect_eof("checkpoint")?;
    GbRbm::from_parts(nv, nh, convention, w, b, c, s)
        .map_err(|e| FormatError::new(at, format!("invalid checkpoint: {e}")))
}

const RTGB_VERSION: u8 = 1;

/// Write a temporal-model checkpoint.
pub fn save_rtgb(path: &Path, params: &RtgbParams) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"RTGB")?;
    out.write_all(&[RTGB_VERSION])?;
    out.write_all(&(params.n_visible() as u32).to_le_bytes())?;
    out.write_all(&(params.n_hidden() as u32).to_le_bytes())?;
    write_f64s(&mut out, &params.b)?;
    write_f64s(&mut out, &params.c)?;
    write_f64s(&mut out, &params.s)?;
    write_f64s(&mut out, &params.w)?;
    write_f64s(&mut out, &params.u)?;
    out.flush()
}

/// Read a temporal-model checkpoint.
pub fn load_rtgb(path: &Path) -> Result<RtgbParams, FormatError> {
    let mut r = open(path)?;
    r.magic(b"RTGB")?;
    let version_at = r.offset;
    let version = r.u8("version")?;
    if version != RTGB_VERSION {
        return Err(FormatError::new(
            version_at,
            format!("unsupported version {version}, expected {RTGB_VERSION}"),
        ));
    }
    let nv = r.u32("visible count")? as usize;
    let nh = r.u32("hidden count")? as usize;
    let b = r.f64_vec(nv, "visible bias b")?;
    let c = r.f64_vec(nh, "hidden bias c")?;
    let s = r.f64_vec(nv, "visible std s")?;
    let w = r.f64_vec(nv * nh, "weight matrix w")?;
    let u = r.f64_vec(nh * nh, "recurrence matrix u")?;
    let at = r.offset;
    r.expect_eof("checkpoint")?;
    RtgbParams::from_parts(nv, nh, w, u, b, c, s)
        .map_err(|e| FormatError::new(at, format!("invalid checkpoint: {e}")))
}

/// Write a dataset container. Empty datasets are rejected.
pub fn save_dataset(path: &Path, data: &Dataset) -> Result<(), FormatError> {
    if data.n_sequences() == 0 || data.steps() == 0 {
        return Err(FormatError::new(0, "refusing to write an empty dataset"));
    }
    let io_err = |e: std::io::Error| {
        FormatError::new(0, format!("cannot write {}: {e}", path.display()))
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    out.write_all(b"RBMD").map_err(io_err)?;
    out.write_all(&(data.n_sequences() as u32).to_le_bytes()).map_err(io_err)?;
    out.write_all(&data.steps().to_le_bytes()).map_err(io_err)?;
    out.write_all(&data.frame_px().to_le_bytes()).map_err(io_err)?;
    for &p in data.pixels() {
        out.write_all(&p.to_le_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Read a dataset container, checking the payload length exactly.
pub fn load_dataset(path: &Path) -> Result<Dataset, FormatError> {
    let mut r = open(path)?;
    r.magic(b"RBMD")?;
    let n_seq = r.u32("sequence count")? as usize;
    let steps = r.u32("step count")?;
    let frame_px = r.u32("frame edge length")?;
    let header_at = r.offset;
    if n_seq == 0 || steps == 0 || frame_px == 0 {
        return Err(FormatError::new(header_at, "empty dataset dimensions"));
    }
    let n_pixels = n_seq * steps as usize * (frame_px as usize).pow(2);
    let mut pixels = Vec::with_capacity(n_pixels);
    let mut b = [0u8; 4];
    for _ in 0..n_pixels {
        r.take(&mut b, "pixel payload")?;
        pixels.push(f32::from_le_bytes(b));
    }
    let at = r.offset;
    r.expect_eof("dataset")?;
    Dataset::from_pixels(frame_px, steps, pixels)
        .map_err(|e| FormatError::new(at, format!("invalid dataset: {e}")))
}

/// Write a rule set in the canonical text format.
pub fn save_rules(path: &Path, rules: &RuleSet) -> std::io::Result<()> {
    fs::write(path, serialize_rules(rules))
}

/// Read a rule set from the canonical text format.
pub fn load_rules(path: &Path) -> anyhow::Result<RuleSet> {
    let text = fs::read_to_string(path)?;
    parse_rules(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Write a learning-curve table.
pub fn save_curve(path: &Path, losses: &[f64]) -> std::io::Result<()> {
    fs::write(path, curve_csv(losses))
}

/// Write one frame per file as `frame_0000.pgm`, `frame_0001.pgm`, ... and
/// return the paths.
pub fn write_frames(
    dir: &Path,
    frame_px: u32,
    frames: &[Vec<f32>],
) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(frames.len());
    for (t, frame) in frames.iter().enumerate() {
        let bytes = encode_pgm(frame_px, &widen(frame))
            .map_err(|e| anyhow::anyhow!("frame {t}: {e}"))?;
        let path = dir.join(format!("frame_{t:04}.pgm"));
        fs::write(&path, bytes)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Write a single PGM image.
pub fn write_pgm(path: &Path, frame_px: u32, pixels: &[f64]) -> anyhow::Result<()> {
    let bytes = encode_pgm(frame_px, pixels).map_err(|e| anyhow::anyhow!("{e}"))?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Read a PGM image back to gray levels in [0, 1]. Accepts only the layout
/// [`write_pgm`] produces: `P5`, one width/height line, max value 255.
pub fn read_pgm(path: &Path) -> Result<(u32, u32, Vec<f32>), FormatError> {
    let bytes = fs::read(path)
        .map_err(|e| FormatError::new(0, format!("cannot open {}: {e}", path.display())))?;
    let header_end = bytes
        .windows(5)
        .position(|w| w == b"255\n\0" || (w[..4] == *b"255\n"))
        .map(|p| p + 4)
        .ok_or_else(|| FormatError::new(0, "missing PGM header terminator"))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| FormatError::new(0, "PGM header is not text"))?;
    let mut lines = header.lines();
    let magic = lines.next().unwrap_or_default();
    if magic != "P5" {
        return Err(FormatError::new(0, format!("bad PGM magic {magic:?}")));
    }
    let dims = lines.next().unwrap_or_default();
    let (w, h) = dims
        .split_once(' ')
        .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
        .ok_or_else(|| FormatError::new(3, format!("bad PGM dimensions {dims:?}")))?;
    let expected = (w as usize) * (h as usize);
    let payload = &bytes[header_end..];
    if payload.len() != expected {
        return Err(FormatError::new(
            header_end as u64,
            format!("PGM payload holds {} bytes, expected {expected}", payload.len()),
        ));
    }
    Ok((w, h, payload.iter().map(|&b| b as f32 / 255.0).collect()))
}

/// Axis order of a raw tensor file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimOrder {
    /// time x sequence x height x width
    TimeSeq,
    /// sequence x time x height x width
    SeqTime,
}

/// Element type of a raw tensor file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemType {
    U8,
    F32,
}

/// Import a headerless tensor of frames. `dims` follow `order`; frames must
/// be square. `u8` elements scale by 1/255; `f32` elements are clamped to
/// [0, 1]. With `binarize`, pixels at or above the threshold become 1 and
/// the rest 0.
pub fn import_raw_tensor(
    path: &Path,
    dims: [u32; 4],
    order: DimOrder,
    elem: ElemType,
    binarize: Option<f64>,
) -> Result<Dataset, FormatError> {
    let (steps, n_seq, height, width) = match order {
        DimOrder::TimeSeq => (dims[0], dims[1], dims[2], dims[3]),
        DimOrder::SeqTime => (dims[1], dims[0], dims[2], dims[3]),
    };
    if height != width {
        return Err(FormatError::new(
            0,
            format!("frames must be square, got {height}x{width}"),
        ));
    }
    if steps == 0 || n_seq == 0 || width == 0 {
        return Err(FormatError::new(0, "all dimensions must be positive"));
    }
    let n_values = steps as usize * n_seq as usize * (width as usize).pow(2);
    let elem_size = match elem {
        ElemType::U8 => 1,
        ElemType::F32 => 4,
    };
    let bytes = fs::read(path)
        .map_err(|e| FormatError::new(0, format!("cannot open {}: {e}", path.display())))?;
    let expected_bytes = n_values * elem_size;
    if bytes.len() != expected_bytes {
        return Err(FormatError::new(
            bytes.len().min(expected_bytes) as u64,
            format!(
                "payload holds {} bytes but the declared dimensions need {expected_bytes}",
                bytes.len()
            ),
        ));
    }
    let values: Vec<f32> = match elem {
        ElemType::U8 => bytes.iter().map(|&b| b as f32 / 255.0).collect(),
        ElemType::F32 => {
            let mut out = Vec::with_capacity(n_values);
            for (k, chunk) in bytes.chunks_exact(4).enumerate() {
                let x = f32::from_le_bytes(chunk.try_into().expect("4-byte chunks"));
                if !x.is_finite() {
                    return Err(FormatError::new(
                        (k * 4) as u64,
                        format!("non-finite pixel value {x}"),
                    ));
                }
                out.push(x.clamp(0.0, 1.0));
            }
            out
        }
    };
    let frame_len = (width as usize).pow(2);
    let mut pixels = vec![0.0f32; n_values];
    match order {
        DimOrder::SeqTime => pixels.copy_from_slice(&values),
        DimOrder::TimeSeq => {
            for t in 0..steps as usize {
                for n in 0..n_seq as usize {
                    let src = (t * n_seq as usize + n) * frame_len;
                    let dst = (n * steps as usize + t) * frame_len;
                    pixels[dst..dst + frame_len].copy_from_slice(&values[src..src + frame_len]);
                }
            }
        }
    }
    if let Some(threshold) = binarize {
        for p in pixels.iter_mut() {
            *p = if *p as f64 >= threshold { 1.0 } else { 0.0 };
        }
    }
    Dataset::from_pixels(width, steps, pixels)
        .map_err(|e| FormatError::new(0, format!("invalid tensor: {e}")))
}
