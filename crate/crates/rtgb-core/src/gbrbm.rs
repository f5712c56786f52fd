//! The static Gaussian-Bernoulli restricted Boltzmann machine.
//!
//! Continuous visible units `v` couple to binary hidden units `h` through the
//! energy
//!
//! ```text
//! E(v, h) = sum_i (v_i - b_i)^2 / (2 s_i^2)
//!         + sum_{i,j} (w_ij / s_i^2) v_i h_j
//!         + sum_j c_j h_j
//! ```
//!
//! with per-visible standard deviations `s_i` (stored as standard deviations
//! and squared at every point of use). The sampling conditionals are the
//! textbook forms: `v_i | h ~ N(b_i + sum_j w_ij h_j, s_i^2)` and
//! `P(h_j = on | v) = sigmoid(sum_i w_ij v_i / s_i^2 + c_j)` for 0/1 hidden
//! units. Note the conditionals correspond to the energy above with `(w, c)`
//! negated; the two stated forms differ by that pure reparameterization, and
//! the exact oracles in this module follow the energy as written.
//!
//! Hidden units are either `{0, 1}` (`ZeroOne`, the default everywhere) or
//! `{-1, +1}` (`PlusMinusOne`), fixed when the model is built.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math;
use crate::{Error, Result};

/// Largest hidden layer the exact enumeration oracles accept (2^20 states).
pub const MAX_EXACT_HIDDEN: usize = 20;

/// Domain of the binary hidden units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinConvention {
    /// Hidden units take values 0 and 1. Default; the only convention used
    /// by the temporal model and the rule extractor.
    ZeroOne,
    /// Hidden units take values -1 and +1.
    PlusMinusOne,
}

impl SpinConvention {
    /// The two values a hidden unit can take, (off, on).
    fn levels(self) -> (f64, f64) {
        match self {
            SpinConvention::ZeroOne => (0.0, 1.0),
            SpinConvention::PlusMinusOne => (-1.0, 1.0),
        }
    }
}

/// A Gaussian-Bernoulli RBM: weights `w` (row-major, visible-major),
/// visible biases `b`, hidden biases `c`, and visible standard deviations `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbRbm {
    n_visible: usize,
    n_hidden: usize,
    convention: SpinConvention,
    /// Coupling `w[i * n_hidden + j]` between visible `i` and hidden `j`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl GbRbm {
    /// Zero weights and biases, unit standard deviations.
    pub fn new(n_visible: usize, n_hidden: usize, convention: SpinConvention) -> Self {
        GbRbm {
            n_visible,
            n_hidden,
            convention,
            w: vec![0.0; n_visible * n_hidden],
            b: vec![0.0; n_visible],
            c: vec![0.0; n_hidden],
            s: vec![1.0; n_visible],
        }
    }

    /// Build from raw parameter vectors, checking shapes and `s > 0`.
    pub fn from_parts(
        n_visible: usize,
        n_hidden: usize,
        convention: SpinConvention,
        w: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        s: Vec<f64>,
    ) -> Result<Self> {
        check_len("weight matrix w", n_visible * n_hidden, w.len())?;
        check_len("visible bias b", n_visible, b.len())?;
        check_len("hidden bias c", n_hidden, c.len())?;
        check_len("visible std s", n_visible, s.len())?;
        if let Some(i) = s.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidConfig {
                what: "visible std s",
                detail: alloc::format!("s[{i}] = {} must be positive and finite", s[i]),
            });
        }
        Ok(GbRbm {
            n_visible,
            n_hidden,
            convention,
            w,
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

    pub fn convention(&self) -> SpinConvention {
        self.convention
    }

    /// The joint energy `E(v, h)`. `h` must hold values from the active
    /// convention's domain.
    pub fn energy(&self, v: &[f64], h: &[f64]) -> Result<f64> {
        check_len("visible vector v", self.n_visible, v.len())?;
        check_len("hidden vector h", self.n_hidden, h.len())?;
        let mut quad = 0.0;
        let mut coupling = 0.0;
        for i in 0..self.n_visible {
            let d = v[i] - self.b[i];
            let s2 = self.s[i] * self.s[i];
            quad += d * d / (2.0 * s2);
            let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
            let mut a = 0.0;
            for j in 0..self.n_hidden {
                a += row[j] * h[j];
            }
            coupling += a * v[i] / s2;
        }
        let mut bias = 0.0;
        for j in 0..self.n_hidden {
            bias += self.c[j] * h[j];
        }
        Ok(quad + coupling + bias)
    }

    /// Mean of the Gaussian visible conditional, `b_i + sum_j w_ij h_j`.
    pub fn visible_mean(&self, h: &[f64]) -> Result<Vec<f64>> {
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
        Ok(mean)
    }

    /// Draw `v | h`, i.e. independent Gaussians with the conditional means
    /// and standard deviations `s_i`.
    pub fn sample_visible<R: Rng>(&self, h: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let mut v = self.visible_mean(h)?;
        for i in 0..self.n_visible {
            let z: f64 = rng.sample(StandardNormal);
            v[i] += self.s[i] * z;
        }
        Ok(v)
    }

    /// `P(h_j = on | v)` for every hidden unit, where "on" is 1 under both
    /// conventions. `ZeroOne` uses `sigmoid(sum_i w_ij v_i / s_i^2 + c_j)`;
    /// `PlusMinusOne` uses `exp(a_j) / (2 cosh a_j)` with
    /// `a_j = c_j + sum_i w_ij v_i`, evaluated in the equivalent stable form
    /// `sigmoid(2 a_j)`.
    pub fn hidden_prob(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("visible vector v", self.n_visible, v.len())?;
        let mut act = self.c.clone();
        match self.convention {
            SpinConvention::ZeroOne => {
                for i in 0..self.n_visible {
                    let scaled = v[i] / (self.s[i] * self.s[i]);
                    let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
                    for j in 0..self.n_hidden {
                        act[j] += row[j] * scaled;
                    }
                }
                Ok(act.iter().map(|&a| math::sigmoid(a)).collect())
            }
            SpinConvention::PlusMinusOne => {
                for i in 0..self.n_visible {
                    let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
                    for j in 0..self.n_hidden {
                        act[j] += row[j] * v[i];
                    }
                }
                Ok(act.iter().map(|&a| math::sigmoid(2.0 * a)).collect())
            }
        }
    }

    /// Draw `h | v` as a vector of convention-domain values.
    pub fn sample_hidden<R: Rng>(&self, v: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let probs = self.hidden_prob(v)?;
        let (off, on) = self.convention.levels();
        Ok(probs
            .iter()
            .map(|&p| if rng.gen::<f64>() < p { on } else { off })
            .collect())
    }

    /// Exact `log Z` by enumerating all hidden states and integrating the
    /// visible Gaussians analytically. The `v`-integral of `exp(-E)` for a
    /// fixed `h` has the closed form
    /// `prod_i sqrt(2 pi) s_i * exp((A_i^2 - 2 b_i A_i) / (2 s_i^2))` with
    /// `A_i = sum_j w_ij h_j`, times `exp(-sum_j c_j h_j)`.
    pub fn exact_log_partition(&self) -> Result<f64> {
        if self.n_hidden > MAX_EXACT_HIDDEN {
            return Err(Error::HiddenTooLarge {
                hidden: self.n_hidden,
                limit: MAX_EXACT_HIDDEN,
            });
        }
        let log_gauss: f64 = self
            .s
            .iter()
            .map(|&si| math::ln(math::sqrt(2.0 * core::f64::consts::PI) * si))
            .sum();
        let mut log_terms = Vec::with_capacity(1usize << self.n_hidden);
        let mut h = vec![0.0; self.n_hidden];
        for state in 0u64..(1u64 << self.n_hidden) {
            self.fill_state(state, &mut h);
            log_terms.push(self.log_state_weight(&h) + log_gauss);
        }
        Ok(math::log_sum_exp(&log_terms))
    }

    /// Exact `log P(v)` under the Boltzmann distribution of [`Self::energy`]:
    /// `log sum_h exp(-E(v, h)) - log Z`.
    pub fn exact_visible_loglik(&self, v: &[f64]) -> Result<f64> {
        check_len("visible vector v", self.n_visible, v.len())?;
        if self.n_hidden > MAX_EXACT_HIDDEN {
            return Err(Error::HiddenTooLarge {
                hidden: self.n_hidden,
                limit: MAX_EXACT_HIDDEN,
            });
        }
        let mut log_terms = Vec::with_capacity(1usize << self.n_hidden);
        let mut h = vec![0.0; self.n_hidden];
        for state in 0u64..(1u64 << self.n_hidden) {
            self.fill_state(state, &mut h);
            log_terms.push(-self.energy(v, &h)?);
        }
        Ok(math::log_sum_exp(&log_terms) - self.exact_log_partition()?)
    }

    /// Write the hidden vector for enumeration index `state` (bit `j` is
    /// unit `j`) into `h`, using the convention's domain values.
    fn fill_state(&self, state: u64, h: &mut [f64]) {
        let (off, on) = self.convention.levels();
        for (j, hj) in h.iter_mut().enumerate() {
            *hj = if (state >> j) & 1 == 1 { on } else { off };
        }
    }

    /// `log` of the `v`-integrated unnormalized weight of hidden state `h`
    /// (without the Gaussian normalization constants).
    fn log_state_weight(&self, h: &[f64]) -> f64 {
        let mut lw = 0.0;
        for i in 0..self.n_visible {
            let row = &self.w[i * self.n_hidden..(i + 1) * self.n_hidden];
            let mut a = 0.0;
            for j in 0..self.n_hidden {
                a += row[j] * h[j];
            }
            let s2 = self.s[i] * self.s[i];
            lw += (a * a - 2.0 * self.b[i] * a) / (2.0 * s2);
        }
        for j in 0..self.n_hidden {
            lw -= self.c[j] * h[j];
        }
        lw
    }
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
