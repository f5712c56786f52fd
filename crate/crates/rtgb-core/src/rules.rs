//! Probabilistic transition rules between binary hidden states.
//!
//! A rule `p :: h(t+1,j) <- L_0 ^ L_1 ^ ... ^ L_{m-1}` says: when the hidden
//! state at time `t` satisfies the full conjunction of literals (one positive
//! or negated literal per hidden unit), unit `j` switches on at `t+1` with
//! probability `p`. Rule probabilities are estimated by alternating Gibbs
//! chains of the temporal model with the previous hidden state clamped:
//! start from a uniformly random hidden vector, alternately sample a visible
//! frame from it and a fresh hidden vector from that frame, and record the
//! hidden vector reached after `k` sweeps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::data::{Dataset, HiddenState, SeqView};
use crate::exec::Executor;
use crate::math;
use crate::rng::{derive_rng, derive_seed, tag};
use crate::temporal::{RtgbParams, VisibleMode};
use crate::{Error, Result};

/// Hidden layers up to this width may enumerate all rule bodies.
pub const MAX_ENUMERATED_WIDTH: usize = 12;

/// One signed literal over a hidden unit at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub unit: usize,
    pub positive: bool,
}

/// One transition rule: a full-conjunction body over all hidden units, a
/// head unit, the estimated switch-on probability, and the number of Gibbs
/// samples behind the estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub head: usize,
    pub body: HiddenState,
    pub prob: f64,
    pub support: u64,
}

impl Rule {
    /// The body as signed literals, one per unit in ascending order.
    pub fn literals(&self) -> Vec<Literal> {
        (0..self.body.width())
            .map(|unit| Literal {
                unit,
                positive: self.body.get(unit),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct HeadEntry {
    prob: f64,
    support: u64,
}

/// A set of transition rules over a fixed hidden width, plus per-unit
/// fallback marginals for states no stored body covers.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    width: usize,
    bodies: BTreeMap<HiddenState, Vec<Option<HeadEntry>>>,
    fallback: Vec<f64>,
}

impl RuleSet {
    /// An empty rule set (fallback marginals only).
    pub fn new(width: usize, fallback: Vec<f64>) -> Result<Self> {
        if fallback.len() != width {
            return Err(Error::DimMismatch {
                what: "fallback marginals",
                expected: width,
                got: fallback.len(),
            });
        }
        if let Some(j) = fallback.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig {
                what: "fallback marginals",
                detail: alloc::format!("probability {} for unit {j} outside [0, 1]", fallback[j]),
            });
        }
        Ok(RuleSet {
            width,
            bodies: BTreeMap::new(),
            fallback,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn fallback(&self) -> &[f64] {
        &self.fallback
    }

    /// Number of rules (body-head pairs).
    pub fn len(&self) -> usize {
        self.bodies
            .values()
            .map(|heads| heads.iter().filter(|e| e.is_some()).count())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    /// Number of distinct bodies.
    pub fn n_bodies(&self) -> usize {
        self.bodies.len()
    }

    /// Add a rule; duplicates of an existing (body, head) pair are rejected.
    pub fn insert(&mut self, rule: Rule) -> Result<()> {
        if rule.body.width() != self.width {
            return Err(Error::DimMismatch {
                what: "rule body width",
                expected: self.width,
                got: rule.body.width(),
            });
        }
        if rule.head >= self.width {
            return Err(Error::InvalidConfig {
                what: "rule head",
                detail: alloc::format!("unit {} outside width {}", rule.head, self.width),
            });
        }
        if !(0.0..=1.0).contains(&rule.prob) {
            return Err(Error::InvalidConfig {
                what: "rule probability",
                detail: alloc::format!("{} outside [0, 1]", rule.prob),
            });
        }
        if rule.support == 0 {
            return Err(Error::InvalidConfig {
                what: "rule support",
                detail: String::from("support must be at least 1"),
            });
        }
        let width = self.width;
        let heads = self
            .bodies
            .entry(rule.body)
            .or_insert_with(|| vec![None; width]);
        if heads[rule.head].is_some() {
            return Err(Error::InvalidConfig {
                what: "rule set",
                detail: alloc::format!("duplicate rule for head {}", rule.head),
            });
        }
        heads[rule.head] = Some(HeadEntry {
            prob: rule.prob,
            support: rule.support,
        });
        Ok(())
    }

    /// Look up the rule for an exact (body, head) pair.
    pub fn get(&self, body: &HiddenState, head: usize) -> Option<Rule> {
        let entry = self.bodies.get(body)?.get(head)?.as_ref()?;
        Some(Rule {
            head,
            body: body.clone(),
            prob: entry.prob,
            support: entry.support,
        })
    }

    /// All rules in canonical order: body patterns ascending by value, heads
    /// ascending within a body.
    pub fn iter(&self) -> impl Iterator<Item = Rule> + '_ {
        self.bodies.iter().flat_map(|(body, heads)| {
            heads.iter().enumerate().filter_map(move |(head, entry)| {
                entry.as_ref().map(|e| Rule {
                    head,
                    body: body.clone(),
                    prob: e.prob,
                    support: e.support,
                })
            })
        })
    }

    /// A copy with every probability (rules and fallback) rounded to 0 or 1,
    /// making [`apply_rules`] a deterministic function.
    pub fn rounded(&self) -> RuleSet {
        let mut out = self.clone();
        for heads in out.bodies.values_mut() {
            for entry in heads.iter_mut().flatten() {
                entry.prob = if entry.prob >= 0.5 { 1.0 } else { 0.0 };
            }
        }
        for p in out.fallback.iter_mut() {
            *p = if *p >= 0.5 { 1.0 } else { 0.0 };
        }
        out
    }

    /// The switch-on probability used for head `j` at state `h`: the exact
    /// body's rule if stored, else the rule of the nearest stored body (by
    /// Hamming distance, ties to the lowest pattern value) that has head `j`,
    /// else the fallback marginal.
    fn head_prob(&self, h: &HiddenState, j: usize) -> f64 {
        if let Some(heads) = self.bodies.get(h) {
            if let Some(entry) = &heads[j] {
                return entry.prob;
            }
        }
        let mut best: Option<(u32, f64)> = None;
        for (body, heads) in self.bodies.iter() {
            if let Some(entry) = &heads[j] {
                let d = h.hamming(body);
                if best.as_ref().is_none_or(|&(bd, _)| d < bd) {
                    best = Some((d, entry.prob));
                }
            }
        }
        best.map(|(_, p)| p).unwrap_or(self.fallback[j])
    }
}

/// Gibbs estimation settings for one transition: `sweeps` alternations per
/// chain (the `k` of the sampler) and the number of independent chains.
#[derive(Debug, Clone, Copy)]
pub struct GibbsConfig {
    pub sweeps: usize,
    pub chains: usize,
    pub seed: u64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            sweeps: 100,
            chains: 20000,
            seed: 0,
        }
    }
}

/// Empirical next-state distribution of one body.
#[derive(Debug, Clone)]
pub struct TransitionEstimate {
    /// Per-unit switch-on frequency.
    pub head_probs: Vec<f64>,
    /// Occurrences of every sampled next state.
    pub counts: BTreeMap<HiddenState, u64>,
    pub chains: u64,
}

/// Estimate the next-hidden-state distribution given a clamped previous
/// state, with Continuous visibles. Every chain starts from a uniformly
/// random hidden vector and runs `sweeps` alternations of sampling a visible
/// frame from the current hidden vector, then a hidden vector from that
/// frame and the clamped previous state.
pub fn approximate_transition<E: Executor>(
    params: &RtgbParams,
    h_prev: &HiddenState,
    cfg: &GibbsConfig,
    exec: &E,
) -> Result<TransitionEstimate> {
    if h_prev.width() != params.n_hidden() {
        return Err(Error::DimMismatch {
            what: "previous hidden state",
            expected: params.n_hidden(),
            got: h_prev.width(),
        });
    }
    if cfg.sweeps == 0 || cfg.chains == 0 {
        return Err(Error::InvalidConfig {
            what: "gibbs settings",
            detail: alloc::format!(
                "sweeps={}, chains={} must be >= 1",
                cfg.sweeps,
                cfg.chains
            ),
        });
    }
    let prev = h_prev.to_f64();
    let nh = params.n_hidden();
    let finals: Vec<HiddenState> = exec.map_indexed(cfg.chains, |chain| {
        let mut rng = derive_rng(cfg.seed, &[tag::RULES, chain as u64]);
        let mut h: Vec<f64> = (0..nh)
            .map(|_| if rng.gen::<f64>() < 0.5 { 1.0 } else { 0.0 })
            .collect();
        for _ in 0..cfg.sweeps {
            let v = params
                .sample_visible(&h, VisibleMode::Continuous, &mut rng)
                .expect("dims fixed by params");
            let ph = params
                .cond_hidden(&v, &prev, VisibleMode::Continuous)
                .expect("dims fixed by params");
            for j in 0..nh {
                h[j] = if rng.gen::<f64>() < ph[j] { 1.0 } else { 0.0 };
            }
        }
        HiddenState::binarize(&h, 0.5)
    });
    let mut counts: BTreeMap<HiddenState, u64> = BTreeMap::new();
    let mut on = vec![0u64; nh];
    for state in &finals {
        for (j, cnt) in on.iter_mut().enumerate() {
            if state.get(j) {
                *cnt += 1;
            }
        }
        *counts.entry(state.clone()).or_insert(0) += 1;
    }
    let n = cfg.chains as f64;
    Ok(TransitionEstimate {
        head_probs: on.iter().map(|&cnt| cnt as f64 / n).collect(),
        counts,
        chains: cfg.chains as u64,
    })
}

/// Total variation distance between an empirical transition estimate and an
/// exact distribution indexed by pattern value.
pub fn total_variation(est: &TransitionEstimate, exact: &[f64]) -> Result<f64> {
    let width = est.head_probs.len();
    if width > 20 || exact.len() != 1usize << width {
        return Err(Error::DimMismatch {
            what: "exact transition table",
            expected: 1usize << width.min(20),
            got: exact.len(),
        });
    }
    let mut emp = vec![0.0; exact.len()];
    for (state, &cnt) in est.counts.iter() {
        let idx = state.value().expect("width <= 20 fits in u64") as usize;
        emp[idx] = cnt as f64 / est.chains as f64;
    }
    let mut tv = 0.0;
    for (e, x) in emp.iter().zip(exact.iter()) {
        tv += math::abs(e - x);
    }
    Ok(tv / 2.0)
}

/// All `2^width` bodies in ascending value order (`width` at most 12).
pub fn enumerate_bodies(width: usize) -> Result<Vec<HiddenState>> {
    if width == 0 || width > MAX_ENUMERATED_WIDTH {
        return Err(Error::HiddenTooLarge {
            hidden: width,
            limit: MAX_ENUMERATED_WIDTH,
        });
    }
    Ok((0..1u64 << width)
        .map(|v| HiddenState::from_value(v, width))
        .collect())
}

/// The distinct binarized hidden states visited by the data's hidden-mean
/// trajectories, in ascending value order.
pub fn bodies_from_data(
    params: &RtgbParams,
    data: &Dataset,
    mode: VisibleMode,
    threshold: f64,
) -> Result<Vec<HiddenState>> {
    let mut seen: BTreeSet<HiddenState> = BTreeSet::new();
    for n in 0..data.n_sequences() {
        let means = params.hidden_mean_trajectory(data.sequence(n), mode)?;
        for m in &means {
            seen.insert(HiddenState::binarize(m, threshold));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Estimate one rule per (body, head) pair over the given bodies
/// (deduplicated and sorted), plus support-weighted fallback marginals.
pub fn extract_rules<E: Executor>(
    params: &RtgbParams,
    bodies: &[HiddenState],
    cfg: &GibbsConfig,
    exec: &E,
) -> Result<RuleSet> {
    let nh = params.n_hidden();
    let unique: Vec<HiddenState> = bodies.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if unique.is_empty() {
        return Err(Error::EmptyInput { what: "rule bodies" });
    }
    if let Some(bad) = unique.iter().find(|b| b.width() != nh) {
        return Err(Error::DimMismatch {
            what: "rule body width",
            expected: nh,
            got: bad.width(),
        });
    }
    let estimates: Vec<Result<TransitionEstimate>> = exec.map_indexed(unique.len(), |idx| {
        let body_cfg = GibbsConfig {
            seed: derive_seed(cfg.seed, &[tag::RULES, idx as u64]),
            ..*cfg
        };
        approximate_transition(params, &unique[idx], &body_cfg, exec)
    });
    let mut fallback = vec![0.0; nh];
    let mut total_support = 0u64;
    let mut rs = RuleSet::new(nh, vec![0.0; nh])?;
    for (body, est) in unique.iter().zip(estimates) {
        let est = est?;
        for (j, &p) in est.head_probs.iter().enumerate() {
            rs.insert(Rule {
                head: j,
                body: body.clone(),
                prob: p,
                support: est.chains,
            })?;
            fallback[j] += p * est.chains as f64;
        }
        total_support += est.chains;
    }
    for p in fallback.iter_mut() {
        *p /= total_support as f64;
    }
    rs.fallback = fallback;
    Ok(rs)
}

/// Sample the next hidden state: each head unit switches on independently
/// with its rule probability (exact body match, else nearest stored body,
/// else fallback marginal). With probabilities in {0, 1} this is a
/// deterministic function.
pub fn apply_rules<R: Rng>(rs: &RuleSet, h: &HiddenState, rng: &mut R) -> Result<HiddenState> {
    if h.width() != rs.width {
        return Err(Error::DimMismatch {
            what: "hidden state width",
            expected: rs.width,
            got: h.width(),
        });
    }
    let mut next = HiddenState::zeros(rs.width);
    for j in 0..rs.width {
        let p = rs.head_prob(h, j);
        next.set(j, rng.gen::<f64>() < p);
    }
    Ok(next)
}

/// Roll the extracted rules forward `horizon` steps past a prefix: encode
/// the prefix with the hidden-mean recurrence, binarize the final mean at
/// 0.5, iterate [`apply_rules`], and decode every state to a frame through
/// the visible conditional mean.
pub fn rule_predict<R: Rng>(
    params: &RtgbParams,
    rs: &RuleSet,
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
    if rs.width != params.n_hidden() {
        return Err(Error::DimMismatch {
            what: "rule set width",
            expected: params.n_hidden(),
            got: rs.width,
        });
    }
    let means = params.hidden_mean_trajectory(prefix, mode)?;
    let mut h = HiddenState::binarize(means.last().expect("non-empty prefix"), 0.5);
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        h = apply_rules(rs, &h, rng)?;
        let frame = params.cond_visible_mean(&h.to_f64(), mode)?;
        out.push(frame.iter().map(|&x| x as f32).collect());
    }
    Ok(out)
}

/// Render a rule set in the canonical text format:
///
/// ```text
/// #rtgb-rules v1 m=10
/// 0.873200 :: h(t+1,3) <- h(t,0) ^ h(t,1) ^ h(t,2) ^ ~h(t,3) ^ ... ^ ~h(t,9)
/// ...
/// #fallback
/// 0.500000 0.500000 ...
/// ```
///
/// Rules appear in canonical order, probabilities with six decimal digits,
/// body literals over every unit in ascending order. Parsing this text
/// reproduces it byte for byte.
pub fn serialize_rules(rs: &RuleSet) -> String {
    let mut out = alloc::format!("#rtgb-rules v1 m={}\n", rs.width);
    for rule in rs.iter() {
        out.push_str(&rule_line(&rule));
        out.push('\n');
    }
    out.push_str("#fallback\n");
    for (j, p) in rs.fallback.iter().enumerate() {
        if j > 0 {
            out.push(' ');
        }
        out.push_str(&alloc::format!("{p:.6}"));
    }
    out.push('\n');
    out
}

/// One rule in the canonical line form, without a trailing newline.
pub fn rule_line(rule: &Rule) -> String {
    let mut out = alloc::format!("{:.6} :: h(t+1,{}) <- ", rule.prob, rule.head);
    for (k, lit) in rule.literals().iter().enumerate() {
        if k > 0 {
            out.push_str(" ^ ");
        }
        if lit.positive {
            out.push_str(&alloc::format!("h(t,{})", lit.unit));
        } else {
            out.push_str(&alloc::format!("~h(t,{})", lit.unit));
        }
    }
    out
}

/// Parse the canonical text format. Support counts are not part of the text
/// format; parsed rules carry support 1.
pub fn parse_rules(text: &str) -> Result<RuleSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::RuleParse {
        line: 1,
        message: String::from("empty rule file"),
    })?;
    let width: usize = header
        .strip_prefix("#rtgb-rules v1 m=")
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| Error::RuleParse {
            line: 1,
            message: alloc::format!("bad header {header:?}, expected \"#rtgb-rules v1 m=<width>\""),
        })?;
    if width == 0 {
        return Err(Error::RuleParse {
            line: 1,
            message: String::from("width must be at least 1"),
        });
    }
    let mut rs = RuleSet::new(width, vec![0.0; width])?;
    let mut saw_fallback = false;
    for (idx, line) in lines.by_ref() {
        let line_no = idx + 1;
        if line == "#fallback" {
            let (fidx, fline) = lines.next().ok_or(Error::RuleParse {
                line: line_no,
                message: String::from("missing fallback probabilities after #fallback"),
            })?;
            rs.fallback = parse_fallback_line(fline, fidx + 1, width)?;
            saw_fallback = true;
            break;
        }
        let rule = parse_rule_line(line, line_no, width)?;
        rs.insert(rule).map_err(|e| Error::RuleParse {
            line: line_no,
            message: alloc::format!("{e}"),
        })?;
    }
    if !saw_fallback {
        return Err(Error::RuleParse {
            line: text.lines().count(),
            message: String::from("missing #fallback section"),
        });
    }
    if let Some((idx, line)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(Error::RuleParse {
            line: idx + 1,
            message: alloc::format!("unexpected trailing content {line:?}"),
        });
    }
    Ok(rs)
}

fn parse_prob(tok: &str, line: usize) -> Result<f64> {
    let p: f64 = tok.parse().map_err(|_| Error::RuleParse {
        line,
        message: alloc::format!("bad probability {tok:?}"),
    })?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::RuleParse {
            line,
            message: alloc::format!("probability {p} outside [0, 1]"),
        });
    }
    Ok(p)
}

fn parse_fallback_line(line: &str, line_no: usize, width: usize) -> Result<Vec<f64>> {
    let probs: Vec<f64> = line
        .split(' ')
        .map(|tok| parse_prob(tok, line_no))
        .collect::<Result<_>>()?;
    if probs.len() != width {
        return Err(Error::RuleParse {
            line: line_no,
            message: alloc::format!("expected {width} fallback probabilities, got {}", probs.len()),
        });
    }
    Ok(probs)
}

fn parse_rule_line(line: &str, line_no: usize, width: usize) -> Result<Rule> {
    let bad = |message: String| Error::RuleParse {
        line: line_no,
        message,
    };
    let (prob_tok, rest) = line
        .split_once(" :: ")
        .ok_or_else(|| bad(alloc::format!("missing \" :: \" in {line:?}")))?;
    let prob = parse_prob(prob_tok, line_no)?;
    let (head_tok, body_tok) = rest
        .split_once(" <- ")
        .ok_or_else(|| bad(alloc::format!("missing \" <- \" in {line:?}")))?;
    let head: usize = head_tok
        .strip_prefix("h(t+1,")
        .and_then(|t| t.strip_suffix(')'))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(alloc::format!("bad head {head_tok:?}")))?;
    if head >= width {
        return Err(bad(alloc::format!("head unit {head} outside width {width}")));
    }
    let mut body = HiddenState::zeros(width);
    let mut expected_unit = 0usize;
    for lit_tok in body_tok.split(" ^ ") {
        let (positive, inner) = match lit_tok.strip_prefix('~') {
            Some(inner) => (false, inner),
            None => (true, lit_tok),
        };
        let unit: usize = inner
            .strip_prefix("h(t,")
            .and_then(|t| t.strip_suffix(')'))
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(alloc::format!("bad literal {lit_tok:?}")))?;
        if unit != expected_unit {
            return Err(bad(alloc::format!(
                "literal for unit {unit} where unit {expected_unit} was expected (bodies are full conjunctions in ascending unit order)"
            )));
        }
        body.set(unit, positive);
        expected_unit += 1;
    }
    if expected_unit != width {
        return Err(bad(alloc::format!(
            "body has {expected_unit} literals, expected {width}"
        )));
    }
    Ok(Rule {
        head,
        body,
        prob,
        support: 1,
    })
}
