//! Sequence datasets and binary hidden-state patterns.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::{Error, Result};

/// A set of equally shaped frame sequences, stored sequence-major as `f32`.
///
/// Pixels produced by the simulators and the importer lie in `[0, 1]`
/// (exactly `{0, 1}` after binarization); predicted frames are conditional
/// means and may step slightly outside that range, so the container itself
/// only requires finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    frame_px: u32,
    steps: u32,
    pixels: Vec<f32>,
}

impl Dataset {
    /// An all-zero dataset with `n_sequences` sequences of `steps` square
    /// frames, `frame_px` pixels on a side.
    pub fn zeros(frame_px: u32, steps: u32, n_sequences: usize) -> Self {
        let len = n_sequences * steps as usize * (frame_px as usize * frame_px as usize);
        Dataset {
            frame_px,
            steps,
            pixels: vec![0.0; len],
        }
    }

    /// Wrap a flat sequence-major pixel buffer. The length must be
    /// `n * steps * frame_px^2` for some whole `n >= 1` and every value must
    /// be finite.
    pub fn from_pixels(frame_px: u32, steps: u32, pixels: Vec<f32>) -> Result<Self> {
        let frame_len = frame_px as usize * frame_px as usize;
        let seq_len = steps as usize * frame_len;
        if frame_len == 0 || steps == 0 {
            return Err(Error::InvalidConfig {
                what: "dataset shape",
                detail: alloc::format!("frame_px={frame_px}, steps={steps}"),
            });
        }
        if pixels.is_empty() || pixels.len() % seq_len != 0 {
            return Err(Error::DimMismatch {
                what: "dataset pixel buffer",
                expected: seq_len.max(1),
                got: pixels.len(),
            });
        }
        if let Some(idx) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig {
                what: "dataset pixels",
                detail: alloc::format!("non-finite value at flat index {idx}"),
            });
        }
        Ok(Dataset {
            frame_px,
            steps,
            pixels,
        })
    }

    pub fn frame_px(&self) -> u32 {
        self.frame_px
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Pixels per frame (`frame_px` squared).
    pub fn frame_len(&self) -> usize {
        self.frame_px as usize * self.frame_px as usize
    }

    pub fn n_sequences(&self) -> usize {
        self.pixels.len() / (self.steps as usize * self.frame_len())
    }

    pub fn frame(&self, sequence: usize, t: usize) -> &[f32] {
        let fl = self.frame_len();
        let base = (sequence * self.steps as usize + t) * fl;
        &self.pixels[base..base + fl]
    }

    pub fn frame_mut(&mut self, sequence: usize, t: usize) -> &mut [f32] {
        let fl = self.frame_len();
        let base = (sequence * self.steps as usize + t) * fl;
        &mut self.pixels[base..base + fl]
    }

    pub fn sequence(&self, sequence: usize) -> SeqView<'_> {
        let fl = self.frame_len();
        let sl = self.steps as usize * fl;
        SeqView {
            pixels: &self.pixels[sequence * sl..(sequence + 1) * sl],
            frame_len: fl,
            steps: self.steps as usize,
        }
    }

    /// The flat sequence-major pixel buffer.
    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }
}

/// A borrowed view of one time-ordered sequence of frames.
#[derive(Debug, Clone, Copy)]
pub struct SeqView<'a> {
    pixels: &'a [f32],
    frame_len: usize,
    steps: usize,
}

impl<'a> SeqView<'a> {
    /// View over a flat `steps * frame_len` pixel slice.
    pub fn new(pixels: &'a [f32], frame_len: usize) -> Result<Self> {
        if frame_len == 0 || pixels.is_empty() || pixels.len() % frame_len != 0 {
            return Err(Error::DimMismatch {
                what: "sequence pixel slice",
                expected: frame_len.max(1),
                got: pixels.len(),
            });
        }
        Ok(SeqView {
            pixels,
            frame_len,
            steps: pixels.len() / frame_len,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn frame(&self, t: usize) -> &'a [f32] {
        &self.pixels[t * self.frame_len..(t + 1) * self.frame_len]
    }

    /// The first `n` frames of this sequence.
    pub fn prefix(&self, n: usize) -> SeqView<'a> {
        SeqView {
            pixels: &self.pixels[..n * self.frame_len],
            frame_len: self.frame_len,
            steps: n,
        }
    }
}

/// A fixed-width pattern of binary hidden units; bit `j` is unit `j`.
///
/// Patterns order and hash by their integer value (unit 0 is the least
/// significant bit), which is the tie-breaking order used when several
/// stored rule bodies are equally close to a query state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HiddenState {
    width: usize,
    blocks: Vec<u64>,
}

impl HiddenState {
    pub fn zeros(width: usize) -> Self {
        HiddenState {
            width,
            blocks: vec![0; width.div_ceil(64).max(1)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut st = HiddenState::zeros(bits.len());
        for (j, &on) in bits.iter().enumerate() {
            st.set(j, on);
        }
        st
    }

    /// Interpret the low `width` bits of `value` as a pattern (unit 0 =
    /// least significant bit). Only meaningful for `width <= 64`.
    pub fn from_value(value: u64, width: usize) -> Self {
        let mut st = HiddenState::zeros(width);
        for j in 0..width.min(64) {
            st.set(j, (value >> j) & 1 == 1);
        }
        st
    }

    /// Threshold a real-valued hidden mean vector at `threshold`
    /// (values >= threshold become 1).
    pub fn binarize(means: &[f64], threshold: f64) -> Self {
        let mut st = HiddenState::zeros(means.len());
        for (j, &m) in means.iter().enumerate() {
            st.set(j, m >= threshold);
        }
        st
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, j: usize) -> bool {
        (self.blocks[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, on: bool) {
        if on {
            self.blocks[j / 64] |= 1 << (j % 64);
        } else {
            self.blocks[j / 64] &= !(1 << (j % 64));
        }
    }

    /// The pattern as the integer it orders by, when it fits in 64 bits.
    pub fn value(&self) -> Option<u64> {
        if self.width <= 64 {
            Some(self.blocks[0])
        } else {
            None
        }
    }

    pub fn hamming(&self, other: &HiddenState) -> u32 {
        self.blocks
            .iter()
            .zip(other.blocks.iter())
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// The pattern as a 0.0/1.0 vector.
    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.width)
            .map(|j| if self.get(j) { 1.0 } else { 0.0 })
            .collect()
    }
}

impl PartialOrd for HiddenState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HiddenState {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.width, other.width, "comparing patterns of unequal width");
        for (a, b) in self.blocks.iter().rev().zip(other.blocks.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for HiddenState {
    /// Units in ascending order, e.g. `1110001000` for units 0-2 and 6 set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.width {
            write!(f, "{}", if self.get(j) { '1' } else { '0' })?;
        }
        Ok(())
    }
}
