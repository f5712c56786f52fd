//! The recurrent temporal model.
//!
//! A recurrent matrix `u` carries the previous step's hidden mean vector
//! into the current step's hidden conditional:
//!
//! ```text
//! hhat_t = sigmoid(W' v_t + c + U hhat_{t-1})          (hidden-mean recurrence)
//! P(h_{t,j} = 1 | v_t, hhat_{t-1})
//!        = sigmoid(sum_i w_ij v_{t,i} / s_i^2 + c_j + sum_j' u_jj' hhat_{t-1,j'})
//! v_{t,i} | h_t ~ N(b_i + sum_j w_ij h_{t,j}, s_i^2)   (Continuous mode)
//! P(v_{t,i} = 1 | h_t) = sigmoid(sum_j w_ij h_{t,j} + b_i)   (Binary mode)
//! ```
//!
//! where `W' v_t` scales each visible unit by `1 / s_i^2` in Continuous mode
//! and leaves it unscaled in Binary mode. At `t = 1` the recurrence term
//! vanishes (`hhat_0 = 0`).
//!
//! Training maximizes the per-step conditional likelihood of each frame given
//! the data-driven previous hidden mean, by contrastive divergence: the data
//! statistics use the hidden means themselves, the model statistics come from
//! `K` alternating Gibbs steps started at the data frame with `hhat_{t-1}`
//! clamped. The visible standard deviations receive no gradient.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, HiddenState, SeqView};
use crate::eval;
use crate::exec::Executor;
use crate::math;
use crate::rng::{derive_rng, tag};
use crate::{Error, Result};

/// Largest hidden layer [`RtgbParams::exact_transition_distribution`] accepts.
pub const MAX_EXACT_TRANSITION_HIDDEN: usize = 12;

/// Distribution family of the visible units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VisibleMode {
    /// Gaussian visible units with per-unit standard deviation.
    #[default]
    Continuous,
    /// Bernoulli visible units; `s` is ignored.
    Binary,
}

/// Parameters of the recurrent temporal model. Hidden units are always 0/1.
#[derive(Debug, Clone, PartialEq)]
pub struct RtgbParams {
    n_visible: usize,
    n_hidden: usize,
    /// Coupling `w[i * n_hidden + j]` between visible `i` and hidden `j`.
    pub w: Vec<f64>,
    /// Recurrence `u[j * n_hidden + j']` from previous hidden `j'` to
    /// current hidden `j`.
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl RtgbParams {
    /// Zero weights and biases, unit standard deviations.
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        RtgbParams {
            n_visible,
            n_hidden,
            w: vec![0.0; n_visible * n_hidden],
            u: vec![0.0; n_hidden * n_hidden],
            b: vec![0.0; n_visible],
            c: vec![0.0; n_hidden],
            s: vec![1.0; n_visible],
        }
    }

    /// Gaussian `N(0, scale^2)` entries for `w` and `u`, zero biases,
    /// unit standard deviations.
    pub fn random_init<R: Rng>(n_visible: usize, n_hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut p = RtgbParams::zeros(n_visible, n_hidden);
        for w in p.w.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *w = scale * z;
        }
        for u in p.u.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *u = scale * z;
        }
        p
    }

    /// Build from raw parameter vectors, checking shapes and `s > 0`.
    pub fn from_parts(
        n_visible: usize,
        n_hidden: usize,
        w: Vec<f64>,
        u: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        s: Vec<f64>,
    ) -> Result<Self> {
        check_len("weight matrix w", n_visible * n_hidden, w.len())?;
        check_len("recurrence matrix u", n_hidden * n_hidden, u.len())?;
        check_len("visible bias b", n_visible, b.len())?;
        check_len("hidden bias c", n_hidden, c.len())?;
        check_len("visible std s", n_visible, s.len())?;
        if let Some(i) = s.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidConfig {
                what: "visible std s",
                detail: alloc::format!("s[{i}] = {} must be positive and finite", s[i]),
            });
        }
        Ok(RtgbParams {
            n_visible,
            n_hidden,
            w,
            u,
            b,
            c,
            s,
        })
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|x| x.is_finite())
            && self.u.iter().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
            && self.c.iter().all(|x| x.is_finite())
            && self.s.iter().all(|x| x.is_finite())
    }

    /// Hidden activation `sum_i w_ij v_i * scale_i + c_j + sum_j' u_jj' prev_j'`
    /// where `scale_i` is `1/s_i^2` in Continuous mode and 1 in Binary mode.
    /// `prev = None` means the zero vector (the first time step).
    fn hidden_activation(&self, v: &[f64], prev: Option<&[f64]>, mode: VisibleMode) -> Vec<f64> {
        let mut act = self.c.clone();
        for i in 0..self.n_visible {
            let scaled = match mode {
                VisibleMode::Continuous => v[i] / (self.s[i] * self.s[i]),
                VisibleMode::Binary => v[i],
            };
            if scaled == 0.0 {
                continue;
            }
            let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
            for j in 0..self.n_hidden {
                act[j] += row[j] * scaled;
            }
        }
        if let Some(prev) = prev {
            for j in 0..self.n_hidden {
                let row = &self.u[j * self.n_hidden..(j + 1) * self.n_hidden];
                let mut a = 0.0;
                for (jp, &pj) in prev.iter().enumerate() {
                    a += row[jp] * pj;
                }
                act[j] += a;
            }
        }
        act
    }

    /// One step of the hidden-mean recurrence: the conditional probability of
    /// each hidden unit given the current frame and the previous hidden mean
    /// (`None` at the first step). Outputs lie strictly inside `(0, 1)` for
    /// activations of ordinary magnitude.
    pub fn hidden_mean_step(
        &self,
        v: &[f64],
        prev: Option<&[f64]>,
        mode: VisibleMode,
    ) -> Result<Vec<f64>> {
        check_len("visible vector v", self.n_visible, v.len())?;
        if let Some(prev) = prev {
            check_len("previous hidden mean", self.n_hidden, prev.len())?;
        }
        Ok(self
            .hidden_activation(v, prev, mode)
            .iter()
            .map(|&a| math::sigmoid(a))
            .collect())
    }

    /// `P(h_{t,j} = 1 | v_t, prev)`: identical formula to
    /// [`Self::hidden_mean_step`] with a concrete previous vector (hidden
    /// means during training, binary states during rule extraction).
    pub fn cond_hidden(&self, v: &[f64], prev: &[f64], mode: VisibleMode) -> Result<Vec<f64>> {
        self.hidden_mean_step(v, Some(prev), mode)
    }

    /// Mean of the visible conditional given a hidden vector: the Gaussian
    /// mean `b_i + sum_j w_ij h_j` in Continuous mode, the Bernoulli
    /// probability `sigmoid(sum_j w_ij h_j + b_i)` in Binary mode.
    pub fn cond_visible_mean(&self, h: &[f64], mode: VisibleMode) -> Result<Vec<f64>> {
        check_len("hidden vector h", self.n_hidden, h.len())?;
        let mut mean = self.b.clone();
        for i in 0..self.n_visible {
            let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
            let mut a = 0.0;
            for j in 0..self.n_hidden {
                a += row[j] * h[j];
            }
            mean[i] += a;
        }
        if mode == VisibleMode::Binary {
            for m in mean.iter_mut() {
                *m = math::sigmoid(*m);
            }
        }
        Ok(mean)
    }

    /// Draw `v_t | h_t`: Gaussian around the conditional mean in Continuous
    /// mode, Bernoulli in Binary mode.
    pub fn sample_visible<R: Rng>(
        &self,
        h: &[f64],
        mode: VisibleMode,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let mut v = self.cond_visible_mean(h, mode)?;
        match mode {
            VisibleMode::Continuous => {
                for i in 0..self.n_visible {
                    let z: f64 = rng.sample(StandardNormal);
                    v[i] += self.s[i] * z;
                }
            }
            VisibleMode::Binary => {
                for p in v.iter_mut() {
                    *p = if rng.gen::<f64>() < *p { 1.0 } else { 0.0 };
                }
            }
        }
        Ok(v)
    }

    /// The hidden-mean trajectory of a whole sequence: the recurrence of
    /// [`Self::hidden_mean_step`] driven by the data frames.
    pub fn hidden_mean_trajectory(&self, seq: SeqView<'_>, mode: VisibleMode) -> Result<Vec<Vec<f64>>> {
        check_len("frame length", self.n_visible, seq.frame_len())?;
        let mut means: Vec<Vec<f64>> = Vec::with_capacity(seq.steps());
        for t in 0..seq.steps() {
            let v = math::widen(seq.frame(t));
            let prev = means.last().map(|m| m.as_slice());
            means.push(self.hidden_mean_step(&v, prev, mode)?);
        }
        Ok(means)
    }

    /// Exact distribution of the next hidden state given a binary previous
    /// state, for Continuous visibles: integrates the Gaussian joint
    /// analytically for every one of the `2^|H|` hidden states and
    /// normalizes. Entry `p[x]` is the probability of the pattern whose
    /// bit `j` is unit `j`.
    pub fn exact_transition_distribution(&self, h_prev: &HiddenState) -> Result<Vec<f64>> {
        check_len("previous hidden state", self.n_hidden, h_prev.width())?;
        if self.n_hidden > MAX_EXACT_TRANSITION_HIDDEN {
            return Err(Error::HiddenTooLarge {
                hidden: self.n_hidden,
                limit: MAX_EXACT_TRANSITION_HIDDEN,
            });
        }
        let prev = h_prev.to_f64();
        // Effective hidden bias including the recurrence drive.
        let mut ceff = self.c.clone();
        for j in 0..self.n_hidden {
            let row = &self.u[j * self.n_hidden..(j + 1) * self.n_hidden];
            for (jp, &pj) in prev.iter().enumerate() {
                ceff[j] += row[jp] * pj;
            }
        }
        let n_states = 1usize << self.n_hidden;
        let mut log_w = Vec::with_capacity(n_states);
        for state in 0..n_states as u64 {
            // log of exp(sum_j ceff_j h_j) * prod_i integral of the visible
            // Gaussian: the integral contributes (2 b_i A_i + A_i^2)/(2 s_i^2)
            // with A_i = sum_j w_ij h_j (constants cancel after normalizing).
            let mut lw = 0.0;
            for j in 0..self.n_hidden {
                if (state >> j) & 1 == 1 {
                    lw += ceff[j];
                }
            }
            for i in 0..self.n_visible {
                let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
                let mut a = 0.0;
                for j in 0..self.n_hidden {
                    if (state >> j) & 1 == 1 {
                        a += row[j];
                    }
                }
                let s2 = self.s[i] * self.s[i];
                lw += (2.0 * self.b[i] * a + a * a) / (2.0 * s2);
            }
            log_w.push(lw);
        }
        let norm = math::log_sum_exp(&log_w);
        Ok(log_w.iter().map(|&lw| math::exp(lw - norm)).collect())
    }
}

/// Average gradients of one sequence, ready to be scaled by the learning
/// rate and added to the parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub dw: Vec<f64>,
    pub du: Vec<f64>,
    pub db: Vec<f64>,
    pub dc: Vec<f64>,
}

/// Identifies the random streams of one gradient evaluation; every
/// `(time step, chain)` pair inside derives its own substream.
#[derive(Debug, Clone, Copy)]
pub struct GradStream {
    pub seed: u64,
    pub epoch: u64,
    pub sequence: u64,
}

/// Knobs of one contrastive-divergence evaluation.
#[derive(Debug, Clone, Copy)]
pub struct CdOpts {
    /// Alternating Gibbs steps per time step (the `K` in CD-K).
    pub steps: usize,
    /// Independent model chains averaged per time step.
    pub chains: usize,
    pub mode: VisibleMode,
}

/// Per-time-step model statistics collected from the CD chains.
struct StepModelStats {
    v_mean: Vec<f64>,
    h_mean: Vec<f64>,
    /// `mean_chains(v_i * hhat_j)`, only materialized when `chains > 1`
    /// (with one chain it is the outer product of the two vectors).
    vh_mean: Option<Vec<f64>>,
}

/// Contrastive-divergence gradients of one sequence.
///
/// For every time step `t` the data statistics pair the frame `v_t` with the
/// data-driven hidden mean `hhat_t`; the model statistics run `opts.steps`
/// alternating Gibbs steps from `v_t` with `hhat_{t-1}` clamped and pair the
/// final visible sample with its hidden conditional mean. Entries follow the
/// likelihood gradients: `dw` uses `v_i hhat_j / s_i^2`, `du` uses
/// `hhat_{t-1,j'} hhat_{t,j}`, `db` uses `v_i`, `dc` uses `hhat_j`; all four
/// are averaged over the sequence's time steps. The first step contributes
/// zero to `du` (its previous hidden mean is the zero vector). `s` receives
/// no gradient.
pub fn cd_gradients<E: Executor>(
    params: &RtgbParams,
    seq: SeqView<'_>,
    opts: &CdOpts,
    stream: GradStream,
    exec: &E,
) -> Result<Gradients> {
    let nv = params.n_visible;
    let nh = params.n_hidden;
    check_len("frame length", nv, seq.frame_len())?;
    if seq.steps() == 0 {
        return Err(Error::EmptyInput {
            what: "gradient sequence",
        });
    }
    if opts.steps == 0 || opts.chains == 0 {
        return Err(Error::InvalidConfig {
            what: "contrastive divergence",
            detail: alloc::format!("steps={}, chains={} must be >= 1", opts.steps, opts.chains),
        });
    }
    let means = params.hidden_mean_trajectory(seq, opts.mode)?;
    let steps = seq.steps();

    let zero = vec![0.0; nh];
    let model = exec.map_indexed(steps, |t| {
        let prev = if t == 0 { &zero } else { &means[t - 1] };
        let v_data = math::widen(seq.frame(t));
        let mut v_acc = vec![0.0; nv];
        let mut h_acc = vec![0.0; nh];
        let mut vh_acc = if opts.chains > 1 {
            Some(vec![0.0; nv * nh])
        } else {
            None
        };
        for chain in 0..opts.chains {
            let mut rng = derive_rng(
                stream.seed,
                &[tag::CD, stream.epoch, stream.sequence, t as u64, chain as u64],
            );
            let mut v = v_data.clone();
            let mut h_sample = vec![0.0; nh];
            for _ in 0..opts.steps {
                let ph = params
                    .cond_hidden(&v, prev, opts.mode)
                    .expect("dims checked above");
                for j in 0..nh {
                    h_sample[j] = if rng.gen::<f64>() < ph[j] { 1.0 } else { 0.0 };
                }
                v = params
                    .sample_visible(&h_sample, opts.mode, &mut rng)
                    .expect("dims checked above");
            }
            let h_mean = params
                .cond_hidden(&v, prev, opts.mode)
                .expect("dims checked above");
            for i in 0..nv {
                v_acc[i] += v[i];
            }
            for j in 0..nh {
                h_acc[j] += h_mean[j];
            }
            if let Some(vh) = vh_acc.as_mut() {
                for i in 0..nv {
                    for j in 0..nh {
                        vh[i * nh + j] += v[i] * h_mean[j];
                    }
                }
            }
        }
        let norm = opts.chains as f64;
        for x in v_acc.iter_mut() {
            *x /= norm;
        }
        for x in h_acc.iter_mut() {
            *x /= norm;
        }
        if let Some(vh) = vh_acc.as_mut() {
            for x in vh.iter_mut() {
                *x /= norm;
            }
        }
        StepModelStats {
            v_mean: v_acc,
            h_mean: h_acc,
            vh_mean: vh_acc,
        }
    });

    let mut dw = vec![0.0; nv * nh];
    let mut du = vec![0.0; nh * nh];
    let mut db = vec![0.0; nv];
    let mut dc = vec![0.0; nh];
    for (t, stats) in model.iter().enumerate() {
        let h_data = &means[t];
        let v_data = seq.frame(t);
        for i in 0..nv {
            let s2 = params.s[i] * params.s[i];
            let vd = v_data[i] as f64;
            let row = &mut dw[i * nh..(i + 1) * nh];
            match stats.vh_mean.as_ref() {
                None => {
                    for j in 0..nh {
                        row[j] += (vd * h_data[j] - stats.v_mean[i] * stats.h_mean[j]) / s2;
                    }
                }
                Some(vh) => {
                    for j in 0..nh {
                        row[j] += (vd * h_data[j] - vh[i * nh + j]) / s2;
                    }
                }
            }
            db[i] += vd - stats.v_mean[i];
        }
        for j in 0..nh {
            dc[j] += h_data[j] - stats.h_mean[j];
        }
        if t > 0 {
            let prev = &means[t - 1];
            for j in 0..nh {
                let diff_row = &mut du[j * nh..(j + 1) * nh];
                let delta = h_data[j] - stats.h_mean[j];
                for jp in 0..nh {
                    diff_row[jp] += prev[jp] * delta;
                }
            }
        }
    }
    let norm = steps as f64;
    for x in dw.iter_mut() {
        *x /= norm;
    }
    for x in du.iter_mut() {
        *x /= norm;
    }
    for x in db.iter_mut() {
        *x /= norm;
    }
    for x in dc.iter_mut() {
        *x /= norm;
    }
    Ok(Gradients { dw, du, db, dc })
}

/// Training configuration.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Alternating Gibbs steps per CD evaluation (the `K` in CD-K).
    pub cd_steps: usize,
    /// Independent model chains averaged per time step.
    pub cd_chains: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Frames fed to the model before prediction when evaluating per-epoch
    /// loss (the `T` of the loss protocol).
    pub prefix_len: usize,
    /// Last frame index (exclusive) scored by the loss (the `T'`).
    pub total_len: usize,
    /// Evaluate loss on the trailing 10% of sequences instead of in-sample.
    pub holdout: bool,
    pub mode: VisibleMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            cd_steps: 3,
            cd_chains: 1,
            learning_rate: 1e-3,
            seed: 0,
            prefix_len: 3,
            total_len: 8,
            holdout: false,
            mode: VisibleMode::Continuous,
        }
    }
}

/// Train by per-sequence gradient ascent and return the updated parameters
/// plus the learning curve.
///
/// Sequences are visited in dataset order; after each one the parameters move
/// by `learning_rate` times its average CD gradient. `curve[e]` is the
/// prediction loss after `e` completed epochs (index 0 is the untrained
/// model), measured by rolling every evaluation sequence forward from its
/// `prefix_len`-frame prefix and scoring frames `prefix_len..total_len`.
/// With `holdout` the trailing 10% of sequences (at least one) are reserved
/// for evaluation and excluded from training. Everything derives from
/// `cfg.seed`, so results are identical for any executor.
pub fn train<E: Executor>(
    params: RtgbParams,
    data: &Dataset,
    cfg: &TrainConfig,
    exec: &E,
) -> Result<(RtgbParams, Vec<f64>)> {
    let n = data.n_sequences();
    if n == 0 {
        return Err(Error::EmptyInput { what: "training dataset" });
    }
    check_len("frame length", params.n_visible, data.frame_len())?;
    if cfg.prefix_len == 0
        || cfg.prefix_len >= cfg.total_len
        || cfg.total_len > data.steps() as usize
    {
        return Err(Error::InvalidConfig {
            what: "loss window",
            detail: alloc::format!(
                "need 0 < prefix ({}) < total ({}) <= steps ({})",
                cfg.prefix_len,
                cfg.total_len,
                data.steps()
            ),
        });
    }
    if cfg.cd_steps == 0 || cfg.cd_chains == 0 || cfg.epochs == 0 {
        return Err(Error::InvalidConfig {
            what: "training schedule",
            detail: alloc::format!(
                "epochs={}, cd_steps={}, cd_chains={} must all be >= 1",
                cfg.epochs,
                cfg.cd_steps,
                cfg.cd_chains
            ),
        });
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(Error::InvalidConfig {
            what: "learning rate",
            detail: alloc::format!("{} must be positive and finite", cfg.learning_rate),
        });
    }

    let (train_end, eval_start) = if cfg.holdout {
        let held = (n / 10).max(1);
        if held >= n {
            return Err(Error::InvalidConfig {
                what: "holdout split",
                detail: alloc::format!("{n} sequences cannot spare a holdout"),
            });
        }
        (n - held, n - held)
    } else {
        (n, 0)
    };

    let opts = CdOpts {
        steps: cfg.cd_steps,
        chains: cfg.cd_chains,
        mode: cfg.mode,
    };
    let mut params = params;
    let mut curve = Vec::with_capacity(cfg.epochs + 1);
    curve.push(epoch_loss(&params, data, cfg, eval_start, 0, exec)?);
    for epoch in 1..=cfg.epochs {
        for seq_idx in 0..train_end {
            let grads = cd_gradients(
                &params,
                data.sequence(seq_idx),
                &opts,
                GradStream {
                    seed: cfg.seed,
                    epoch: epoch as u64,
                    sequence: seq_idx as u64,
                },
                exec,
            )?;
            let lr = cfg.learning_rate;
            for (p, g) in params.w.iter_mut().zip(grads.dw.iter()) {
                *p += lr * g;
            }
            for (p, g) in params.u.iter_mut().zip(grads.du.iter()) {
                *p += lr * g;
            }
            for (p, g) in params.b.iter_mut().zip(grads.db.iter()) {
                *p += lr * g;
            }
            for (p, g) in params.c.iter_mut().zip(grads.dc.iter()) {
                *p += lr * g;
            }
            if !params.is_finite() {
                return Err(Error::NonFinite {
                    what: "parameters",
                    epoch,
                    sequence: seq_idx,
                });
            }
        }
        curve.push(epoch_loss(&params, data, cfg, eval_start, epoch, exec)?);
    }
    Ok((params, curve))
}

/// Prediction loss of the current parameters over the evaluation slice
/// `eval_start..` of `data`.
fn epoch_loss<E: Executor>(
    params: &RtgbParams,
    data: &Dataset,
    cfg: &TrainConfig,
    eval_start: usize,
    epoch: usize,
    exec: &E,
) -> Result<f64> {
    let horizon = cfg.total_len - cfg.prefix_len;
    let n_eval = data.n_sequences() - eval_start;
    let frames = exec.map_indexed(n_eval, |k| {
        let seq_idx = eval_start + k;
        let mut rng = derive_rng(cfg.seed, &[tag::EVAL, epoch as u64, seq_idx as u64]);
        predict(
            params,
            data.sequence(seq_idx).prefix(cfg.prefix_len),
            horizon,
            cfg.mode,
            &mut rng,
        )
        .expect("shapes validated at train entry")
    });
    let mut pixels = Vec::with_capacity(n_eval * horizon * data.frame_len());
    for seq_frames in &frames {
        for frame in seq_frames {
            pixels.extend_from_slice(frame);
        }
    }
    let pred = Dataset::from_pixels(data.frame_px(), horizon as u32, pixels)?;
    let mut truth_pixels = Vec::with_capacity(n_eval * data.steps() as usize * data.frame_len());
    for seq_idx in eval_start..data.n_sequences() {
        truth_pixels.extend_from_slice({
            let sl = data.steps() as usize * data.frame_len();
            &data.pixels()[seq_idx * sl..(seq_idx + 1) * sl]
        });
    }
    let truth = Dataset::from_pixels(data.frame_px(), data.steps(), truth_pixels)?;
    let report = eval::prediction_loss(&truth, &pred, cfg.prefix_len, cfg.total_len)?;
    Ok(report.mean)
}

/// Roll the model forward `horizon` frames past a prefix.
///
/// The prefix drives the hidden-mean recurrence; each rollout step samples a
/// binary hidden vector from the conditional given the previously emitted
/// frame and the running hidden mean, emits the visible conditional mean
/// (not a noisy sample), and feeds that mean back for the next step.
pub fn predict<R: Rng>(
    params: &RtgbParams,
    prefix: SeqView<'_>,
    horizon: usize,
    mode: VisibleMode,
    rng: &mut R,
) -> Result<Vec<Vec<f32>>> {
    if prefix.steps() == 0 {
        return Err(Error::EmptyInput {
            what: "prediction prefix",
        });
    }
    let means = params.hidden_mean_trajectory(prefix, mode)?;
    let mut h_mean = means.last().expect("non-empty prefix").clone();
    let mut v_cur = math::widen(prefix.frame(prefix.steps() - 1));
    let nh = params.n_hidden;
    let mut out = Vec::with_capacity(horizon);
    let mut h_sample = vec![0.0; nh];
    for _ in 0..horizon {
        let ph = params.cond_hidden(&v_cur, &h_mean, mode)?;
        for j in 0..nh {
            h_sample[j] = if rng.gen::<f64>() < ph[j] { 1.0 } else { 0.0 };
        }
        let v_next = params.cond_visible_mean(&h_sample, mode)?;
        out.push(v_next.iter().map(|&x| x as f32).collect());
        h_mean = params.hidden_mean_step(&v_next, Some(&h_mean), mode)?;
        v_cur = v_next;
    }
    Ok(out)
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimMismatch {
            what,
            expected,
            got,
        })
    }
}
