//! Acceptance suite. Every check pins its tolerances and prints one
//! greppable `ACCEPTANCE criterion N: PASS` line on success.
//!
//! Coverage: the exact partition-function and likelihood oracles against
//! numeric quadrature; contrastive-divergence gradients against an
//! enumeration oracle and finite differences; Gibbs transition estimates
//! against the exact transition distribution; rule extraction on hand-built
//! saturating dynamics; training, prediction, and rule-based prediction on
//! the desk-scale bouncing-ball world; byte-exact file formats and
//! thread-count invariance of the CLI; and a stored regression fixture.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rtgb_cli::exec::ThreadPoolExec;
use rtgb_cli::formats::{
    load_dataset, load_gbrbm, load_rtgb, load_rules, save_dataset, save_gbrbm, save_rtgb,
    save_rules,
};
use rtgb_core::data::{Dataset, HiddenState, SeqView};
use rtgb_core::eval::encode_pgm;
use rtgb_core::gbrbm::{GbRbm, SpinConvention};
use rtgb_core::math::log_sum_exp;
use rtgb_core::rng::{derive_rng, tag};
use rtgb_core::rules::{
    apply_rules, approximate_transition, enumerate_bodies, extract_rules, rule_predict,
    total_variation, GibbsConfig, Rule, RuleSet,
};
use rtgb_core::sim::{simulate_balls, BallWorldConfig};
use rtgb_core::temporal::{
    cd_gradients, predict, train, CdOpts, GradStream, Gradients, RtgbParams, TrainConfig,
    VisibleMode,
};

fn pool() -> ThreadPoolExec {
    ThreadPoolExec::new(1).expect("single-thread pool must build")
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// The hidden pattern for enumeration index `state` in the model's spin
/// domain (bit j set -> +1, clear -> 0 or -1 by convention).
fn hidden_pattern(state: u64, width: usize, convention: SpinConvention) -> Vec<f64> {
    (0..width)
        .map(|j| {
            if (state >> j) & 1 == 1 {
                1.0
            } else if convention == SpinConvention::ZeroOne {
                0.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// `a_i = sum_j w_ij h_j` for every visible unit.
fn visible_drive(w: &[f64], n_hidden: usize, h: &[f64]) -> Vec<f64> {
    w.chunks(n_hidden)
        .map(|row| row.iter().zip(h).map(|(wij, hj)| wij * hj).sum())
        .collect()
}

// ---------------------------------------------------------------- criterion 1

/// `integral over v of exp(-E(v, h))` for one hidden pattern. The energy is
/// separable across visible units given `h`, so each dimension is a
/// one-dimensional trapezoid sum over a window that contains all the mass.
fn quadrature_state_weight(m: &GbRbm, h: &[f64]) -> f64 {
    let a = visible_drive(&m.w, m.n_hidden(), h);
    let mut log_w = -m.c.iter().zip(h).map(|(cj, hj)| cj * hj).sum::<f64>();
    for i in 0..m.n_visible() {
        let (s, b) = (m.s[i], m.b[i]);
        let center = b - a[i];
        let n = 400usize;
        let lo = center - 12.0 * s;
        let dv = 24.0 * s / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let v = lo + k as f64 * dv;
            let d = v - b;
            let g = (-d * d / (2.0 * s * s) - a[i] * v / (s * s)).exp();
            acc += if k == 0 || k == n { 0.5 * g } else { g };
        }
        log_w += (acc * dv).ln();
    }
    log_w.exp()
}

/// `integral over v of exp(log P(v))` on a tensor grid wide enough to cover
/// every mixture component by eight standard deviations.
fn loglik_normalization(m: &GbRbm) -> f64 {
    let nv = m.n_visible();
    let nh = m.n_hidden();
    let mut lo = vec![f64::INFINITY; nv];
    let mut hi = vec![f64::NEG_INFINITY; nv];
    for state in 0..(1u64 << nh) {
        let h = hidden_pattern(state, nh, m.convention());
        let a = visible_drive(&m.w, nh, &h);
        for i in 0..nv {
            let center = m.b[i] - a[i];
            lo[i] = lo[i].min(center - 8.0 * m.s[i]);
            hi[i] = hi[i].max(center + 8.0 * m.s[i]);
        }
    }
    let pts = match nv {
        2 => 240usize,
        3 => 80,
        _ => 36,
    };
    let dv: Vec<f64> = (0..nv).map(|i| (hi[i] - lo[i]) / pts as f64).collect();
    let mut total = 0.0;
    let mut v = vec![0.0; nv];
    for cell in 0..pts.pow(nv as u32) {
        let mut rem = cell;
        for i in 0..nv {
            v[i] = lo[i] + (rem % pts) as f64 * dv[i] + 0.5 * dv[i];
            rem /= pts;
        }
        total += m
            .exact_visible_loglik(&v)
            .expect("grid point has the model's dimension")
            .exp();
    }
    total * dv.iter().product::<f64>()
}

#[test]
fn criterion_1_partition_and_loglik_match_quadrature() {
    let started = Instant::now();
    let shapes = [
        (2, 2, SpinConvention::ZeroOne),
        (3, 2, SpinConvention::PlusMinusOne),
        (4, 3, SpinConvention::ZeroOne),
        (2, 3, SpinConvention::PlusMinusOne),
        (3, 3, SpinConvention::ZeroOne),
    ];
    let mut worst_z = 0.0f64;
    let mut worst_norm = 0.0f64;
    for (idx, &(nv, nh, convention)) in shapes.iter().enumerate() {
        let mut rng = derive_rng(410 + idx as u64, &[tag::INIT]);
        let w: Vec<f64> = (0..nv * nh).map(|_| uniform(&mut rng, -0.6, 0.6)).collect();
        let b: Vec<f64> = (0..nv).map(|_| uniform(&mut rng, -0.4, 0.4)).collect();
        let c: Vec<f64> = (0..nh).map(|_| uniform(&mut rng, -0.6, 0.6)).collect();
        let s: Vec<f64> = (0..nv).map(|_| uniform(&mut rng, 0.7, 1.3)).collect();
        let m = GbRbm::from_parts(nv, nh, convention, w, b, c, s).expect("valid random model");

        let z_quad: f64 = (0..(1u64 << nh))
            .map(|state| quadrature_state_weight(&m, &hidden_pattern(state, nh, convention)))
            .sum();
        let z_exact = m.exact_log_partition().expect("small model").exp();
        let rel = (z_exact - z_quad).abs() / z_quad;
        assert!(
            rel <= 1e-6,
            "instance {idx} ({nv}x{nh}): partition {z_exact} vs quadrature {z_quad}, relative gap {rel:.3e} exceeds 1e-6"
        );
        worst_z = worst_z.max(rel);

        let norm = loglik_normalization(&m);
        let gap = (norm - 1.0).abs();
        assert!(
            gap <= 1e-4,
            "instance {idx} ({nv}x{nh}): log-likelihood integrates to {norm}, off unity by {gap:.3e} (tolerance 1e-4)"
        );
        worst_norm = worst_norm.max(gap);
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(10),
        "partition checks took {elapsed:?}, budget is 10 s"
    );
    println!(
        "ACCEPTANCE criterion 1: PASS — 5 instances, worst partition gap {worst_z:.2e} (tol 1e-6), worst normalization gap {worst_norm:.2e} (tol 1e-4), {elapsed:?}"
    );
}

// ---------------------------------------------------------------- criterion 2

/// Frames and per-step hidden context captured once, so that perturbing the
/// parameters afterwards does not move the context.
struct FrozenSeq {
    frames: Vec<Vec<f64>>,
    prevs: Vec<Vec<f64>>,
}

fn frozen_context(params: &RtgbParams, seq: SeqView<'_>) -> FrozenSeq {
    let means = params
        .hidden_mean_trajectory(seq, VisibleMode::Continuous)
        .expect("trajectory over the test sequence");
    let mut prevs = vec![vec![0.0; params.n_hidden()]];
    prevs.extend(means[..seq.steps() - 1].iter().cloned());
    let frames = (0..seq.steps())
        .map(|t| seq.frame(t).iter().map(|&x| x as f64).collect())
        .collect();
    FrozenSeq { frames, prevs }
}

fn effective_bias(params: &RtgbParams, prev: &[f64]) -> Vec<f64> {
    let nh = params.n_hidden();
    (0..nh)
        .map(|j| {
            let row = &params.u[j * nh..(j + 1) * nh];
            params.c[j] + row.iter().zip(prev).map(|(uj, pj)| uj * pj).sum::<f64>()
        })
        .collect()
}

/// Average conditional log-likelihood of the frames given the frozen hidden
/// context, up to parameter-independent constants. Requires unit `s`.
fn frozen_loglik(params: &RtgbParams, ctx: &FrozenSeq) -> f64 {
    let nh = params.n_hidden();
    let n_states = 1usize << nh;
    let mut total = 0.0;
    for (v, prev) in ctx.frames.iter().zip(&ctx.prevs) {
        let ceff = effective_bias(params, prev);
        let mut clamped = Vec::with_capacity(n_states);
        let mut free = Vec::with_capacity(n_states);
        for state in 0..n_states as u64 {
            let h = hidden_pattern(state, nh, SpinConvention::ZeroOne);
            let bias: f64 = ceff.iter().zip(&h).map(|(cj, hj)| cj * hj).sum();
            let a = visible_drive(&params.w, nh, &h);
            let va: f64 = v.iter().zip(&a).map(|(vi, ai)| vi * ai).sum();
            let ba_half: f64 = params
                .b
                .iter()
                .zip(&a)
                .map(|(bi, ai)| bi * ai + 0.5 * ai * ai)
                .sum();
            clamped.push(bias + va);
            free.push(bias + ba_half);
        }
        let vb: f64 = v.iter().zip(&params.b).map(|(vi, bi)| vi * bi).sum();
        let b2: f64 = params.b.iter().map(|bi| bi * bi).sum();
        total += log_sum_exp(&clamped) + vb - 0.5 * b2 - log_sum_exp(&free);
    }
    total / ctx.frames.len() as f64
}

/// Exact gradient of [`frozen_loglik`] by enumerating the hidden states.
fn enumerated_gradient(params: &RtgbParams, ctx: &FrozenSeq) -> Gradients {
    let nv = params.n_visible();
    let nh = params.n_hidden();
    let n_states = 1usize << nh;
    let mut g = Gradients {
        dw: vec![0.0; nv * nh],
        du: vec![0.0; nh * nh],
        db: vec![0.0; nv],
        dc: vec![0.0; nh],
    };
    for (v, prev) in ctx.frames.iter().zip(&ctx.prevs) {
        let hd = params
            .cond_hidden(v, prev, VisibleMode::Continuous)
            .expect("data-side hidden conditional");
        let ceff = effective_bias(params, prev);
        let mut log_w = Vec::with_capacity(n_states);
        let mut drives = Vec::with_capacity(n_states);
        for state in 0..n_states as u64 {
            let h = hidden_pattern(state, nh, SpinConvention::ZeroOne);
            let bias: f64 = ceff.iter().zip(&h).map(|(cj, hj)| cj * hj).sum();
            let a = visible_drive(&params.w, nh, &h);
            let ba_half: f64 = params
                .b
                .iter()
                .zip(&a)
                .map(|(bi, ai)| bi * ai + 0.5 * ai * ai)
                .sum();
            log_w.push(bias + ba_half);
            drives.push(a);
        }
        let norm = log_sum_exp(&log_w);
        let p: Vec<f64> = log_w.iter().map(|&lw| (lw - norm).exp()).collect();

        let mut e_h = vec![0.0; nh];
        let mut e_v = params.b.clone();
        let mut e_vh = vec![0.0; nv * nh];
        for state in 0..n_states {
            let ps = p[state];
            let a = &drives[state];
            for j in 0..nh {
                if (state >> j) & 1 == 1 {
                    e_h[j] += ps;
                    for i in 0..nv {
                        e_vh[i * nh + j] += ps * (params.b[i] + a[i]);
                    }
                }
            }
            for i in 0..nv {
                e_v[i] += ps * a[i];
            }
        }
        for i in 0..nv {
            for j in 0..nh {
                g.dw[i * nh + j] += v[i] * hd[j] - e_vh[i * nh + j];
            }
            g.db[i] += v[i] - e_v[i];
        }
        for j in 0..nh {
            g.dc[j] += hd[j] - e_h[j];
            for (jp, &pj) in prev.iter().enumerate() {
                g.du[j * nh + jp] += (hd[j] - e_h[j]) * pj;
            }
        }
    }
    let t = ctx.frames.len() as f64;
    for x in g
        .dw
        .iter_mut()
        .chain(g.du.iter_mut())
        .chain(g.db.iter_mut())
        .chain(g.dc.iter_mut())
    {
        *x /= t;
    }
    g
}

fn flat(g: &Gradients) -> Vec<f64> {
    g.dw.iter()
        .chain(g.du.iter())
        .chain(g.db.iter())
        .chain(g.dc.iter())
        .copied()
        .collect()
}

/// Central finite differences of [`frozen_loglik`] over every coordinate.
fn fd_gradient(params: &RtgbParams, ctx: &FrozenSeq, eps: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let eval = |p: &RtgbParams| frozen_loglik(p, ctx);
    for field in 0..4usize {
        let len = match field {
            0 => params.w.len(),
            1 => params.u.len(),
            2 => params.b.len(),
            _ => params.c.len(),
        };
        for k in 0..len {
            let mut hi = params.clone();
            let mut lo = params.clone();
            match field {
                0 => {
                    hi.w[k] += eps;
                    lo.w[k] -= eps;
                }
                1 => {
                    hi.u[k] += eps;
                    lo.u[k] -= eps;
                }
                2 => {
                    hi.b[k] += eps;
                    lo.b[k] -= eps;
                }
                _ => {
                    hi.c[k] += eps;
                    lo.c[k] -= eps;
                }
            }
            out.push((eval(&hi) - eval(&lo)) / (2.0 * eps));
        }
    }
    out
}

fn mean_relative_gap(approx: &Gradients, oracle: &[f64]) -> f64 {
    let a = flat(approx);
    let total: f64 = a
        .iter()
        .zip(oracle)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1e-3))
        .sum();
    total / oracle.len() as f64
}

/// A 3-visible, 2-hidden instance whose gradient coordinates all sit well
/// away from zero, so that relative agreement is meaningful to measure: one
/// hidden unit is tuned to bright frames and one to dark frames, the
/// recurrence couples them strongly, and the frames alternate between the
/// two extremes.
fn gradient_instance() -> (RtgbParams, Vec<f32>) {
    let mut params = RtgbParams::zeros(3, 2);
    params.w = vec![1.0, -0.9, 0.8, -1.1, 1.2, -0.7];
    params.u = vec![1.2, -0.9, -1.0, 0.8];
    params.b = vec![0.3, -0.2, 0.1];
    params.c = vec![0.2, -0.3];
    let bright = [3.2f32, 3.6, 3.4];
    let dark = [-0.8f32, -1.2, -1.0];
    let mut pixels = Vec::new();
    for t in 0..40 {
        let base = if t % 3 == 2 { dark } else { bright };
        for (i, &x) in base.iter().enumerate() {
            pixels.push(x + 0.1 * ((t + i) % 3) as f32);
        }
    }
    (params, pixels)
}

#[test]
fn criterion_2_cd_gradient_tracks_the_enumeration_oracle() {
    let started = Instant::now();
    let (params, pixels) = gradient_instance();
    let seq = SeqView::new(&pixels, 3).expect("3-wide frames");
    let ctx = frozen_context(&params, seq);

    let oracle = enumerated_gradient(&params, &ctx);
    let oracle_flat = flat(&oracle);
    let fd = fd_gradient(&params, &ctx, 1e-5);
    let mut worst_fd = 0.0f64;
    for (k, (&o, &f)) in oracle_flat.iter().zip(&fd).enumerate() {
        let rel = (o - f).abs() / f.abs().max(1e-8);
        assert!(
            rel <= 1e-4,
            "coordinate {k}: oracle {o:.9} vs finite difference {f:.9}, relative gap {rel:.3e} exceeds 1e-4"
        );
        worst_fd = worst_fd.max(rel);
    }

    let exec = pool();
    let opts = CdOpts {
        steps: 50,
        chains: 200,
        mode: VisibleMode::Continuous,
    };
    let stream = GradStream {
        seed: 1,
        epoch: 0,
        sequence: 0,
    };
    let cd = cd_gradients(&params, seq, &opts, stream, &exec).expect("CD gradient");
    let cd_flat = flat(&cd);
    let mut worst_cd = 0.0f64;
    for (k, (&o, &e)) in oracle_flat.iter().zip(&cd_flat).enumerate() {
        let rel = (e - o).abs() / o.abs().max(1e-3);
        assert!(
            rel <= 0.10,
            "coordinate {k}: CD estimate {e:.6} vs oracle {o:.6}, relative gap {rel:.3} exceeds 10%"
        );
        worst_cd = worst_cd.max(rel);
    }

    let mut err_short = 0.0;
    let mut err_long = 0.0;
    for seed in 0..20u64 {
        let stream = GradStream {
            seed: 100 + seed,
            epoch: 0,
            sequence: 0,
        };
        let short = cd_gradients(
            &params,
            seq,
            &CdOpts {
                steps: 1,
                chains: 200,
                mode: VisibleMode::Continuous,
            },
            stream,
            &exec,
        )
        .expect("one-step CD gradient");
        let long = cd_gradients(&params, seq, &opts, stream, &exec).expect("long CD gradient");
        err_short += mean_relative_gap(&short, &oracle_flat);
        err_long += mean_relative_gap(&long, &oracle_flat);
    }
    err_short /= 20.0;
    err_long /= 20.0;
    assert!(
        err_long < err_short,
        "mean gap over 20 seeds must shrink with more Gibbs steps: 1-step {err_short:.4} vs 50-step {err_long:.4}"
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "gradient checks took {elapsed:?}, budget is 60 s"
    );
    println!(
        "ACCEPTANCE criterion 2: PASS — oracle vs finite differences worst gap {worst_fd:.2e} (tol 1e-4), CD-50 worst gap {:.1}% (tol 10%), mean gap 1-step {err_short:.4} > 50-step {err_long:.4}, {elapsed:?}",
        worst_cd * 100.0
    );
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_3_gibbs_transition_estimates_match_the_exact_distribution() {
    let started = Instant::now();
    let exec = pool();
    let (nv, nh) = (4usize, 6usize);
    let mut worst_tv = 0.0f64;
    for idx in 0..10u64 {
        let mut rng = derive_rng(30 + idx, &[tag::RULES]);
        let mut params = RtgbParams::zeros(nv, nh);
        for x in params.w.iter_mut().chain(params.u.iter_mut()) {
            *x = uniform(&mut rng, -0.8, 0.8);
        }
        for x in params.b.iter_mut().chain(params.c.iter_mut()) {
            *x = uniform(&mut rng, -0.5, 0.5);
        }
        let h_prev = HiddenState::from_value(rng.gen::<u64>() & 0x3f, nh);
        let exact = params
            .exact_transition_distribution(&h_prev)
            .expect("6 hidden units enumerate");
        let cfg = GibbsConfig {
            sweeps: 100,
            chains: 20000,
            seed: idx,
        };
        let est = approximate_transition(&params, &h_prev, &cfg, &exec).expect("Gibbs estimate");
        let tv = total_variation(&est, &exact).expect("distributions share the state space");
        assert!(
            tv <= 0.05,
            "instance {idx}: total variation {tv:.4} between the Gibbs estimate and the exact transition exceeds 0.05"
        );
        worst_tv = worst_tv.max(tv);
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(60),
        "transition checks took {elapsed:?}, budget is 60 s"
    );
    println!(
        "ACCEPTANCE criterion 3: PASS — 10 instances, worst total variation {worst_tv:.4} (tol 0.05), {elapsed:?}"
    );
}

// ---------------------------------------------------------------- criterion 4

/// Three hidden units wired so that each turns on exactly when its
/// predecessor (cyclically) was on, with saturating margins, and each paints
/// its own visible pixel at amplitude 4.
fn cyclic_shift_model() -> RtgbParams {
    let mut p = RtgbParams::zeros(3, 3);
    for j in 0..3 {
        p.w[j * 3 + j] = 4.0;
        p.c[j] = -13.0;
        p.u[j * 3 + (j + 2) % 3] = 10.0;
    }
    p
}

#[test]
fn criterion_4_rules_recover_the_cyclic_shift_and_its_orbit() {
    let started = Instant::now();
    let exec = pool();
    let params = cyclic_shift_model();
    let bodies = enumerate_bodies(3).expect("8 bodies");
    let cfg = GibbsConfig {
        sweeps: 50,
        chains: 2000,
        seed: 3,
    };
    let rules = extract_rules(&params, &bodies, &cfg, &exec).expect("rule extraction");
    for body_value in 0..8u64 {
        let body = HiddenState::from_value(body_value, 3);
        for head in 0..3usize {
            let rule = rules
                .get(&body, head)
                .expect("every body/head pair is stored");
            let predecessor_on = (body_value >> ((head + 2) % 3)) & 1 == 1;
            if predecessor_on {
                assert!(
                    rule.prob >= 0.95,
                    "body {body_value:03b}, head {head}: probability {:.4} should saturate on",
                    rule.prob
                );
            } else {
                assert!(
                    rule.prob <= 0.05,
                    "body {body_value:03b}, head {head}: probability {:.4} should saturate off",
                    rule.prob
                );
            }
        }
    }

    let rounded = rules.rounded();
    let prefix_pixels: Vec<f32> = vec![4.0, 0.0, 0.0];
    let prefix = SeqView::new(&prefix_pixels, 3).expect("one 3-pixel frame");
    let mut rng = derive_rng(4, &[tag::PREDICT]);
    let frames = rule_predict(
        &params,
        &rounded,
        prefix,
        6,
        VisibleMode::Continuous,
        &mut rng,
    )
    .expect("rule rollout");
    let orbit = [
        [0.0f32, 4.0, 0.0],
        [0.0, 0.0, 4.0],
        [4.0, 0.0, 0.0],
        [0.0, 4.0, 0.0],
        [0.0, 0.0, 4.0],
        [4.0, 0.0, 0.0],
    ];
    for (t, expected) in orbit.iter().enumerate() {
        assert_eq!(
            frames[t], expected,
            "rollout frame {t} must follow the period-3 orbit exactly"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(30),
        "rule recovery took {elapsed:?}, budget is 30 s"
    );
    println!(
        "ACCEPTANCE criterion 4: PASS — all 8 bodies saturate correctly and the rollout walks the period-3 orbit, {elapsed:?}"
    );
}

// ------------------------------------------------------- criteria 5 and 6

fn ball_world(n_sequences: usize, seed: u64) -> BallWorldConfig {
    BallWorldConfig {
        n_sequences,
        steps: 40,
        frame_px: 32,
        n_balls: 1,
        radius: 0.2,
        speed: 0.06,
        seed,
    }
}

fn ball_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 5,
        cd_steps: 3,
        cd_chains: 1,
        learning_rate: 0.01,
        seed,
        prefix_len: 39,
        total_len: 40,
        holdout: true,
        mode: VisibleMode::Continuous,
    }
}

fn train_ball_model(
    data: &Dataset,
    hidden: usize,
    seed: u64,
    exec: &ThreadPoolExec,
) -> (RtgbParams, Vec<f64>) {
    let mut rng = derive_rng(seed, &[tag::INIT]);
    let mut params = RtgbParams::random_init(
        (data.frame_px() * data.frame_px()) as usize,
        hidden,
        0.01,
        &mut rng,
    );
    params.s.fill(0.4);
    train(params, data, &ball_train_config(seed), exec).expect("ball-world training")
}

/// Mean-over-steps, sum-over-pixels squared error of predicted frames
/// against the truth window starting at `prefix`.
fn window_loss(truth: SeqView<'_>, frames: &[Vec<f32>], prefix: usize) -> f64 {
    let mut acc = 0.0;
    for (t, frame) in frames.iter().enumerate() {
        let target = truth.frame(prefix + t);
        acc += frame
            .iter()
            .zip(target)
            .map(|(&p, &q)| {
                let d = p as f64 - q as f64;
                d * d
            })
            .sum::<f64>();
    }
    acc / frames.len() as f64
}

#[test]
fn criterion_5_ball_world_training_learns_fast_and_beats_persistence() {
    let started = Instant::now();
    let exec = pool();
    let data = simulate_balls(&ball_world(500, 1), &exec).expect("ball world");

    let mut finals = [[0.0f64; 3]; 2];
    let mut model10 = None;
    for (hi, &hidden) in [10usize, 30].iter().enumerate() {
        for (si, seed) in (1u64..=3).enumerate() {
            let (trained, curve) = train_ball_model(&data, hidden, seed, &exec);
            assert!(
                curve[1] <= 0.5 * curve[0],
                "hidden {hidden}, seed {seed}: epoch-1 loss {:.3} fails to halve the untrained loss {:.3}",
                curve[1],
                curve[0]
            );
            finals[hi][si] = *curve.last().expect("curve has entries");
            if hidden == 10 && seed == 1 {
                model10 = Some(trained);
            }
        }
    }
    let mean10 = finals[0].iter().sum::<f64>() / 3.0;
    let mean30 = finals[1].iter().sum::<f64>() / 3.0;
    assert!(
        mean30 <= mean10,
        "final loss with 30 hidden units ({mean30:.3}) must not exceed 10 hidden units ({mean10:.3}), averaged over 3 seeds"
    );

    let model10 = model10.expect("10-hidden model from the first seed");
    let (prefix, horizon) = (35usize, 5usize);
    let held = 450..500usize;
    let mut wins = 0usize;
    for n in held.clone() {
        let seq = data.sequence(n);
        let mut rng = derive_rng(1, &[tag::PREDICT, n as u64]);
        let frames = predict(
            &model10,
            seq.prefix(prefix),
            horizon,
            VisibleMode::Continuous,
            &mut rng,
        )
        .expect("model rollout");
        let model_loss = window_loss(seq, &frames, prefix);
        let last = seq.frame(prefix - 1).to_vec();
        let persist: Vec<Vec<f32>> = (0..horizon).map(|_| last.clone()).collect();
        let persist_loss = window_loss(seq, &persist, prefix);
        if model_loss < persist_loss {
            wins += 1;
        }
    }
    let total = held.len();
    assert!(
        wins * 100 >= 80 * total,
        "model beats the persistence baseline on only {wins}/{total} held-out sequences, needs 80%"
    );

    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(900),
        "ball-world checks took {elapsed:?}, budget is 15 min"
    );
    println!(
        "ACCEPTANCE criterion 5: PASS — every epoch-1 loss halves, final loss 30 hidden {mean30:.2} <= 10 hidden {mean10:.2}, persistence beaten on {wins}/{total} held-out sequences, {elapsed:?}"
    );
}

#[test]
fn criterion_6_rule_rollouts_stay_within_twice_the_model_loss() {
    let started = Instant::now();
    let exec = pool();
    let data = simulate_balls(&ball_world(500, 1), &exec).expect("ball world");
    let (model, _) = train_ball_model(&data, 10, 1, &exec);

    let bodies = enumerate_bodies(10).expect("1024 bodies");
    let cfg = GibbsConfig {
        sweeps: 30,
        chains: 200,
        seed: 1,
    };
    let rules = extract_rules(&model, &bodies, &cfg, &exec).expect("enumerated rule extraction");

    let fresh = simulate_balls(&ball_world(100, 9), &exec).expect("fresh held-out world");
    let (prefix, horizon) = (35usize, 5usize);
    let mut model_total = 0.0;
    let mut rule_total = 0.0;
    for n in 0..fresh.n_sequences() {
        let seq = fresh.sequence(n);
        let mut rng = derive_rng(1, &[tag::PREDICT, n as u64]);
        let model_frames = predict(
            &model,
            seq.prefix(prefix),
            horizon,
            VisibleMode::Continuous,
            &mut rng,
        )
        .expect("model rollout");
        let mut rng = derive_rng(1, &[tag::PREDICT, n as u64]);
        let rule_frames = rule_predict(
            &model,
            &rules,
            seq.prefix(prefix),
            horizon,
            VisibleMode::Continuous,
            &mut rng,
        )
        .expect("rule rollout");
        model_total += window_loss(seq, &model_frames, prefix);
        rule_total += window_loss(seq, &rule_frames, prefix);
    }
    let model_mean = model_total / fresh.n_sequences() as f64;
    let rule_mean = rule_total / fresh.n_sequences() as f64;
    assert!(
        rule_mean <= 2.0 * model_mean,
        "rule-based loss {rule_mean:.3} exceeds twice the model-based loss {model_mean:.3} over 100 held-out sequences"
    );
    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE criterion 6: PASS — rule-based loss {rule_mean:.2} vs model-based {model_mean:.2} (ratio {:.2}, tol 2.0) over 100 held-out sequences, {elapsed:?}",
        rule_mean / model_mean
    );
}

// ---------------------------------------------------------------- criterion 7

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rtgb"))
}

fn run_cli(args: &[&str]) {
    let output = cli().args(args).output().expect("CLI binary runs");
    assert!(
        output.status.success(),
        "CLI {:?} failed: {}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn criterion_7_round_trips_and_thread_counts_are_byte_exact() {
    let started = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let path = |name: &str| dir.path().join(name);

    let mut rng = derive_rng(7, &[tag::INIT]);
    let m = GbRbm::from_parts(
        3,
        2,
        SpinConvention::ZeroOne,
        (0..6).map(|_| uniform(&mut rng, -1.0, 1.0)).collect(),
        (0..3).map(|_| uniform(&mut rng, -1.0, 1.0)).collect(),
        (0..2).map(|_| uniform(&mut rng, -1.0, 1.0)).collect(),
        (0..3).map(|_| uniform(&mut rng, 0.5, 1.5)).collect(),
    )
    .expect("valid model");
    save_gbrbm(&path("m.rbm"), &m).expect("save");
    let m2 = load_gbrbm(&path("m.rbm")).expect("load");
    save_gbrbm(&path("m2.rbm"), &m2).expect("save again");
    assert_eq!(
        fs::read(path("m.rbm")).unwrap(),
        fs::read(path("m2.rbm")).unwrap(),
        "joint-model checkpoint must survive a load-save cycle byte for byte"
    );

    let mut params = RtgbParams::random_init(4, 3, 0.3, &mut rng);
    params.b[0] = -0.25;
    save_rtgb(&path("p.rtgb"), &params).expect("save");
    let p2 = load_rtgb(&path("p.rtgb")).expect("load");
    save_rtgb(&path("p2.rtgb"), &p2).expect("save again");
    assert_eq!(
        fs::read(path("p.rtgb")).unwrap(),
        fs::read(path("p2.rtgb")).unwrap(),
        "temporal checkpoint must survive a load-save cycle byte for byte"
    );

    let pixels: Vec<f32> = (0..2 * 3 * 4).map(|k| k as f32 / 23.0).collect();
    let dataset = Dataset::from_pixels(2, 3, pixels).expect("dataset");
    save_dataset(&path("d.rbmd"), &dataset).expect("save");
    let d2 = load_dataset(&path("d.rbmd")).expect("load");
    save_dataset(&path("d2.rbmd"), &d2).expect("save again");
    assert_eq!(
        fs::read(path("d.rbmd")).unwrap(),
        fs::read(path("d2.rbmd")).unwrap(),
        "dataset container must survive a load-save cycle byte for byte"
    );

    let mut rules = RuleSet::new(2, vec![0.25, 0.75]).expect("rule set");
    for (head, prob) in [(0usize, 0.125), (1, 0.875)] {
        rules
            .insert(Rule {
                head,
                body: HiddenState::from_value(1, 2),
                prob,
                support: 640,
            })
            .expect("insert rule");
    }
    save_rules(&path("r.rules"), &rules).expect("save");
    let r2 = load_rules(&path("r.rules")).expect("load");
    save_rules(&path("r2.rules"), &r2).expect("save again");
    assert_eq!(
        fs::read(path("r.rules")).unwrap(),
        fs::read(path("r2.rules")).unwrap(),
        "rule file must survive a load-save cycle byte for byte"
    );

    let artifacts = ["d.rbmd", "m.rtgb", "c.csv", "r.rules", "p.rbmd"];
    for threads in ["1", "4"] {
        let sub = dir.path().join(format!("t{threads}"));
        fs::create_dir(&sub).expect("artifact dir");
        let at = |name: &str| sub.join(name).to_str().unwrap().to_owned();
        run_cli(&[
            "--seed", "5", "--threads", threads,
            "generate-balls", "--sequences", "6", "--steps", "10", "--px", "16",
            "--out", &at("d.rbmd"),
        ]);
        run_cli(&[
            "--seed", "5", "--threads", threads,
            "train", "--data", &at("d.rbmd"), "--hidden", "4", "--epochs", "1",
            "--out", &at("m.rtgb"), "--curve", &at("c.csv"),
        ]);
        run_cli(&[
            "--seed", "5", "--threads", threads,
            "extract-rules", "--model", &at("m.rtgb"), "--bodies", "data",
            "--data", &at("d.rbmd"), "--k", "10", "--chains", "50",
            "--out", &at("r.rules"),
        ]);
        run_cli(&[
            "--seed", "5", "--threads", threads,
            "predict", "--model", &at("m.rtgb"), "--data", &at("d.rbmd"),
            "--prefix", "8", "--horizon", "2", "--out", &at("p.rbmd"),
        ]);
    }
    for name in artifacts {
        let one = fs::read(dir.path().join("t1").join(name)).expect("threads-1 artifact");
        let four = fs::read(dir.path().join("t4").join(name)).expect("threads-4 artifact");
        assert_eq!(
            one, four,
            "{name} differs between --threads 1 and --threads 4"
        );
    }
    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE criterion 7: PASS — 4 container round-trips byte-exact, 5 CLI artifacts identical at --threads 1 and 4, {elapsed:?}"
    );
}

// ---------------------------------------------------------------- criterion 8

const FIXTURE_BODY: [bool; 10] = [
    true, true, true, false, false, false, true, false, false, false,
];
const FIXTURE_HEAD: [bool; 10] = [
    false, true, false, true, false, false, true, false, false, false,
];

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Deterministic handcrafted checkpoint: 4x4 visible frame, 10 hidden units.
fn fixture_model() -> RtgbParams {
    let (nv, nh) = (16usize, 10usize);
    let mut p = RtgbParams::zeros(nv, nh);
    for i in 0..nv {
        for j in 0..nh {
            p.w[i * nh + j] = (((i * 7 + j * 13) % 23) as f64 / 22.0 - 0.5) * 0.9;
        }
        p.b[i] = (i % 5) as f64 * 0.06;
    }
    for k in 0..nh * nh {
        p.u[k] = ((k % 17) as f64 / 16.0 - 0.5) * 0.2;
    }
    p
}

fn fixture_rules() -> RuleSet {
    let mut rs = RuleSet::new(10, vec![0.5; 10]).expect("rule set");
    let body = HiddenState::from_bools(&FIXTURE_BODY);
    for (head, &on) in FIXTURE_HEAD.iter().enumerate() {
        rs.insert(Rule {
            head,
            body: body.clone(),
            prob: if on { 1.0 } else { 0.0 },
            support: 1024,
        })
        .expect("insert fixture rule");
    }
    rs
}

/// Writes the stored fixture files. Run once with `--ignored` when the
/// fixture is first created; the committed files are the regression anchor.
#[test]
#[ignore]
fn regenerate_stored_fixture() {
    let dir = fixture_dir();
    fs::create_dir_all(&dir).expect("fixture dir");
    let params = fixture_model();
    save_rtgb(&dir.join("model.rtgb"), &params).expect("write model");
    save_rules(&dir.join("map.rules"), &fixture_rules()).expect("write rules");
    let head = HiddenState::from_bools(&FIXTURE_HEAD);
    let frame = params
        .cond_visible_mean(&head.to_f64(), VisibleMode::Continuous)
        .expect("decode");
    let pgm = encode_pgm(4, &frame).expect("encode");
    fs::write(dir.join("frame.pgm"), pgm).expect("write frame");
}

#[test]
fn criterion_8_stored_rules_and_checkpoint_reproduce_the_frame() {
    let dir = fixture_dir();
    let params = load_rtgb(&dir.join("model.rtgb")).expect("stored checkpoint loads");
    let rules = load_rules(&dir.join("map.rules")).expect("stored rules load");

    let body = HiddenState::from_bools(&FIXTURE_BODY);
    let mut rng = derive_rng(0, &[tag::RULES]);
    let next = apply_rules(&rules, &body, &mut rng).expect("rule application");
    assert_eq!(
        next,
        HiddenState::from_bools(&FIXTURE_HEAD),
        "stored rules must map the fixture state to its recorded successor"
    );

    let frame = params
        .cond_visible_mean(&next.to_f64(), VisibleMode::Continuous)
        .expect("decode through the checkpoint");
    let pgm = encode_pgm(4, &frame).expect("frame encodes");
    let stored = fs::read(dir.join("frame.pgm")).expect("stored frame loads");
    assert_eq!(
        pgm, stored,
        "decoded frame must match the stored image byte for byte"
    );
    println!(
        "ACCEPTANCE criterion 8: PASS — stored rules map the fixture state correctly and the decoded frame is byte-exact"
    );
}
