//! Prediction scoring, feature-map rendering, and PGM encoding.

use alloc::string::String;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::math;
use crate::temporal::RtgbParams;
use crate::{Error, Result};

/// Mean squared prediction error over a horizon window.
#[derive(Debug, Clone)]
pub struct LossReport {
    /// Average of the per-sequence losses.
    pub mean: f64,
    pub per_sequence: Vec<f64>,
    pub prefix_len: usize,
    pub total_len: usize,
}

/// Score predicted frames against the ground truth over the window
/// `prefix_len..total_len`. The per-sequence loss averages over window steps
/// but sums over pixels:
///
/// ```text
/// loss_n = (1 / (total - prefix)) * sum_t sum_i (v_nti - vhat_nti)^2
/// ```
///
/// and the reported mean averages `loss_n` over sequences. The prediction
/// dataset holds either full-length sequences (steps = `total_len`, scored on
/// the window) or bare horizon windows (steps = `total_len - prefix_len`).
pub fn prediction_loss(
    truth: &Dataset,
    pred: &Dataset,
    prefix_len: usize,
    total_len: usize,
) -> Result<LossReport> {
    if truth.n_sequences() == 0 {
        return Err(Error::EmptyInput { what: "truth data" });
    }
    if pred.n_sequences() != truth.n_sequences() {
        return Err(Error::DimMismatch {
            what: "prediction sequence count",
            expected: truth.n_sequences(),
            got: pred.n_sequences(),
        });
    }
    if pred.frame_len() != truth.frame_len() {
        return Err(Error::DimMismatch {
            what: "prediction frame length",
            expected: truth.frame_len(),
            got: pred.frame_len(),
        });
    }
    if prefix_len == 0 || total_len <= prefix_len {
        return Err(Error::InvalidConfig {
            what: "loss window",
            detail: alloc::format!("prefix {prefix_len} must be positive and below total {total_len}"),
        });
    }
    if (truth.steps() as usize) < total_len {
        return Err(Error::DimMismatch {
            what: "truth steps",
            expected: total_len,
            got: truth.steps() as usize,
        });
    }
    let horizon = total_len - prefix_len;
    let pred_steps = pred.steps() as usize;
    let pred_offset = if pred_steps == total_len {
        prefix_len
    } else if pred_steps == horizon {
        0
    } else {
        return Err(Error::DimMismatch {
            what: "prediction steps",
            expected: total_len,
            got: pred_steps,
        });
    };
    let mut per_sequence = Vec::with_capacity(truth.n_sequences());
    for n in 0..truth.n_sequences() {
        let t_seq = truth.sequence(n);
        let p_seq = pred.sequence(n);
        let mut acc = 0.0f64;
        for t in 0..horizon {
            let tf = t_seq.frame(prefix_len + t);
            let pf = p_seq.frame(pred_offset + t);
            for (a, b) in tf.iter().zip(pf.iter()) {
                let d = *a as f64 - *b as f64;
                acc += d * d;
            }
        }
        per_sequence.push(acc / horizon as f64);
    }
    let mean = per_sequence.iter().sum::<f64>() / per_sequence.len() as f64;
    Ok(LossReport {
        mean,
        per_sequence,
        prefix_len,
        total_len,
    })
}

/// The visible pattern a single hidden unit codes for: the binary-mode
/// visible conditional mean with only that unit switched on,
/// `sigmoid(w[i][unit] + b[i])` per pixel.
pub fn feature_map(params: &RtgbParams, unit: usize) -> Result<Vec<f64>> {
    if unit >= params.n_hidden() {
        return Err(Error::DimMismatch {
            what: "hidden unit",
            expected: params.n_hidden(),
            got: unit,
        });
    }
    let nh = params.n_hidden();
    Ok((0..params.n_visible())
        .map(|i| math::sigmoid(params.w[i * nh + unit] + params.b[i]))
        .collect())
}

/// Encode a square frame as a binary PGM (P5) image. Pixels are clamped to
/// [0, 1] and scaled to 0..=255 with round-half-up.
pub fn encode_pgm(frame_px: u32, pixels: &[f64]) -> Result<Vec<u8>> {
    let expected = (frame_px as usize) * (frame_px as usize);
    if frame_px == 0 || pixels.len() != expected {
        return Err(Error::DimMismatch {
            what: "frame pixels",
            expected,
            got: pixels.len(),
        });
    }
    let header = alloc::format!("P5\n{frame_px} {frame_px}\n255\n");
    let mut out = Vec::with_capacity(header.len() + pixels.len());
    out.extend_from_slice(header.as_bytes());
    for &p in pixels {
        let v = math::round(p.clamp(0.0, 1.0) * 255.0);
        out.push(v as u8);
    }
    Ok(out)
}

/// Render the `epoch,loss` learning-curve table. Row 0 is the loss before
/// the first epoch.
pub fn curve_csv(losses: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (epoch, loss) in losses.iter().enumerate() {
        out.push_str(&alloc::format!("{epoch},{loss:.6}\n"));
    }
    out
}
