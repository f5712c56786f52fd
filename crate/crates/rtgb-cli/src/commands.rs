//! Subcommand argument sets and their run functions.
//!
//! Every run is fully determined by its flag set plus the global seed: work
//! items derive per-index random streams, so artifacts are byte-identical
//! at any `--threads` count. Each command finishes by printing one
//! machine-readable `key=value` summary line on standard output.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};

use rtgb_core::data::{Dataset, HiddenState};
use rtgb_core::eval::{feature_map, prediction_loss};
use rtgb_core::rng::{derive_rng, tag};
use rtgb_core::rules::{
    bodies_from_data, enumerate_bodies, extract_rules, rule_line, rule_predict, GibbsConfig, Rule,
    RuleSet,
};
use rtgb_core::sim::{simulate_balls, simulate_sprites, BallWorldConfig, SpriteWorldConfig};
use rtgb_core::temporal::{predict, train, RtgbParams, TrainConfig, VisibleMode};

use crate::exec::ThreadPoolExec;
use crate::formats::{
    import_raw_tensor, load_dataset, load_rtgb, load_rules, save_curve, save_dataset, save_rtgb,
    save_rules, write_frames, write_pgm, DimOrder, ElemType,
};

/// Global options shared by every subcommand.
pub struct Ctx {
    pub seed: u64,
    pub verbose: bool,
    pub exec: ThreadPoolExec,
}

impl Ctx {
    fn note(&self, line: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", line.as_ref());
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateBallsArgs {
    /// Number of sequences to simulate.
    #[arg(long, default_value_t = 100)]
    pub sequences: usize,
    /// Frames per sequence.
    #[arg(long, default_value_t = 40)]
    pub steps: usize,
    /// Frame edge length in pixels.
    #[arg(long, default_value_t = 32)]
    pub px: u32,
    /// Number of balls per sequence.
    #[arg(long, default_value_t = 1)]
    pub balls: usize,
    /// Ball radius in world units (the frame spans [0, 1]).
    #[arg(long, default_value_t = 0.12)]
    pub radius: f64,
    /// Constant ball speed in world units per step.
    #[arg(long, default_value_t = 0.05)]
    pub speed: f64,
    /// Output dataset path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn generate_balls(args: &GenerateBallsArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let cfg = BallWorldConfig {
        n_sequences: args.sequences,
        steps: args.steps,
        frame_px: args.px,
        n_balls: args.balls,
        radius: args.radius,
        speed: args.speed,
        seed: ctx.seed,
    };
    let data = simulate_balls(&cfg, &ctx.exec)?;
    save_dataset(&args.out, &data)?;
    println!(
        "sequences={} steps={} px={} balls={} out={}",
        data.n_sequences(),
        data.steps(),
        data.frame_px(),
        args.balls,
        args.out.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct GenerateSpritesArgs {
    /// Number of sequences to simulate.
    #[arg(long, default_value_t = 100)]
    pub sequences: usize,
    /// Frames per sequence.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Frame edge length in pixels.
    #[arg(long, default_value_t = 64)]
    pub px: u32,
    /// Number of sprites per sequence.
    #[arg(long, default_value_t = 1)]
    pub sprites: usize,
    /// Digit glyphs (0 through 9) sprites are drawn from.
    #[arg(long, value_delimiter = ',', default_values_t = [0u8, 1, 2, 3, 4, 5, 6, 7, 8, 9])]
    pub glyphs: Vec<u8>,
    /// Constant sprite speed in world units per step.
    #[arg(long, default_value_t = 0.05)]
    pub speed: f64,
    /// Pixel values at or above this become 1 after splatting.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    /// Output dataset path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn generate_sprites(args: &GenerateSpritesArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let cfg = SpriteWorldConfig {
        n_sequences: args.sequences,
        steps: args.steps,
        frame_px: args.px,
        n_sprites: args.sprites,
        glyphs: args.glyphs.clone(),
        speed: args.speed,
        binarize_threshold: args.threshold,
        seed: ctx.seed,
    };
    let data = simulate_sprites(&cfg, &ctx.exec)?;
    save_dataset(&args.out, &data)?;
    println!(
        "sequences={} steps={} px={} sprites={} out={}",
        data.n_sequences(),
        data.steps(),
        data.frame_px(),
        args.sprites,
        args.out.display()
    );
    Ok(())
}

/// Tensor axis order accepted by `import`.
#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum OrderArg {
    /// time x sequence x height x width
    TimeSeq,
    /// sequence x time x height x width
    SeqTime,
}

/// Element type accepted by `import`.
#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ElemArg {
    U8,
    F32,
}

/// Four comma-separated tensor extents in the file's axis order.
#[derive(Debug, Clone, Copy)]
pub struct Dims(pub [u32; 4]);

pub fn parse_dims(text: &str) -> Result<Dims, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected 4 comma-separated extents, got {}", parts.len()));
    }
    let mut dims = [0u32; 4];
    for (slot, part) in dims.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("bad extent {part:?}"))?;
    }
    Ok(Dims(dims))
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    /// Raw tensor file to read.
    #[arg(long)]
    pub input: PathBuf,
    /// Tensor extents in the file's axis order, e.g. 100,20,64,64.
    #[arg(long, value_parser = parse_dims)]
    pub dims: Dims,
    /// Axis order of the tensor file.
    #[arg(long, value_enum, default_value_t = OrderArg::SeqTime)]
    pub order: OrderArg,
    /// Element type of the tensor file.
    #[arg(long, value_enum)]
    pub elem: ElemArg,
    /// Binarization threshold; pixels at or above it become 1.
    #[arg(long)]
    pub binarize: Option<f64>,
    /// Output dataset path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn import(args: &ImportArgs, _ctx: &Ctx) -> anyhow::Result<()> {
    let order = match args.order {
        OrderArg::TimeSeq => DimOrder::TimeSeq,
        OrderArg::SeqTime => DimOrder::SeqTime,
    };
    let elem = match args.elem {
        ElemArg::U8 => ElemType::U8,
        ElemArg::F32 => ElemType::F32,
    };
    let data = import_raw_tensor(&args.input, args.dims.0, order, elem, args.binarize)
        .with_context(|| format!("importing {}", args.input.display()))?;
    save_dataset(&args.out, &data)?;
    println!(
        "sequences={} steps={} px={} out={}",
        data.n_sequences(),
        data.steps(),
        data.frame_px(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training dataset path.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of hidden units.
    #[arg(long)]
    pub hidden: usize,
    /// Alternating Gibbs steps per contrastive-divergence evaluation.
    #[arg(long, default_value_t = 3)]
    pub cd: usize,
    /// Independent model chains averaged per time step.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Training epochs.
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Learning rate.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Frames fed to the model before prediction when scoring per-epoch
    /// loss; defaults to 90% of the sequence length.
    #[arg(long)]
    pub prefix: Option<usize>,
    /// Last frame index (exclusive) scored by the loss; defaults to the
    /// sequence length.
    #[arg(long)]
    pub total: Option<usize>,
    /// Score per-epoch loss on the trailing 10% of sequences instead of
    /// in-sample.
    #[arg(long, default_value_t = false)]
    pub holdout: bool,
    /// Treat visible units as Bernoulli instead of Gaussian.
    #[arg(long, default_value_t = false)]
    pub binary: bool,
    /// Standard deviation of the random weight initialization.
    #[arg(long, default_value_t = 0.01)]
    pub init_scale: f64,
    /// Fixed standard deviation of every visible unit.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Output checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional learning-curve table path.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

fn visible_mode(binary: bool) -> VisibleMode {
    if binary {
        VisibleMode::Binary
    } else {
        VisibleMode::Continuous
    }
}

pub fn run_train(args: &TrainArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let data = load_dataset(&args.data)?;
    let steps = data.steps() as usize;
    let total_len = args.total.unwrap_or(steps);
    let prefix_len = args.prefix.unwrap_or_else(|| (steps * 9 / 10).max(1));
    let cfg = TrainConfig {
        epochs: args.epochs,
        cd_steps: args.cd,
        cd_chains: args.chains,
        learning_rate: args.lr,
        seed: ctx.seed,
        prefix_len,
        total_len,
        holdout: args.holdout,
        mode: visible_mode(args.binary),
    };
    ctx.note(format!(
        "training hidden={} sequences={} prefix={} total={}",
        args.hidden,
        data.n_sequences(),
        prefix_len,
        total_len
    ));
    if !(args.sigma.is_finite() && args.sigma > 0.0) {
        bail!("--sigma must be positive and finite, got {}", args.sigma);
    }
    let mut rng = derive_rng(ctx.seed, &[tag::INIT]);
    let mut params =
        RtgbParams::random_init(data.frame_len(), args.hidden, args.init_scale, &mut rng);
    params.s.fill(args.sigma);
    let (trained, curve) = train(params, &data, &cfg, &ctx.exec)?;
    if ctx.verbose {
        for (epoch, loss) in curve.iter().enumerate() {
            eprintln!("epoch={epoch} loss={loss:.6}");
        }
    }
    save_rtgb(&args.out, &trained)?;
    let final_loss = curve.last().copied().unwrap_or(f64::NAN);
    let mut summary = format!(
        "loss={:.6} epochs={} hidden={} out={}",
        final_loss,
        args.epochs,
        args.hidden,
        args.out.display()
    );
    if let Some(curve_path) = &args.curve {
        save_curve(curve_path, &curve)?;
        summary.push_str(&format!(" curve={}", curve_path.display()));
    }
    println!("{summary}");
    Ok(())
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Model checkpoint path.
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset supplying prediction prefixes.
    #[arg(long)]
    pub data: PathBuf,
    /// Frames of each sequence fed to the model before prediction.
    #[arg(long)]
    pub prefix: usize,
    /// Frames to predict after the prefix.
    #[arg(long)]
    pub horizon: usize,
    /// Treat visible units as Bernoulli instead of Gaussian.
    #[arg(long, default_value_t = false)]
    pub binary: bool,
    /// Optional output dataset of predicted windows (all sequences).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional directory for one sequence's predicted frames as PGM files.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Which sequence's frames to export.
    #[arg(long, default_value_t = 0)]
    pub sequence: usize,
}

/// Predict every sequence's window, one derived random stream per sequence.
fn predict_windows(
    data: &Dataset,
    prefix: usize,
    horizon: usize,
    mut step: impl FnMut(usize) -> anyhow::Result<Vec<Vec<f32>>>,
) -> anyhow::Result<Vec<Vec<Vec<f32>>>> {
    if prefix == 0 || prefix > data.steps() as usize {
        bail!(
            "prefix must be in 1..={} (dataset steps), got {prefix}",
            data.steps()
        );
    }
    if horizon == 0 {
        bail!("horizon must be positive");
    }
    let mut out = Vec::with_capacity(data.n_sequences());
    for n in 0..data.n_sequences() {
        out.push(step(n)?);
    }
    Ok(out)
}

fn write_prediction_outputs(
    windows: &[Vec<Vec<f32>>],
    data: &Dataset,
    horizon: usize,
    out: Option<&Path>,
    frames: Option<&Path>,
    sequence: usize,
) -> anyhow::Result<(String, String)> {
    if out.is_none() && frames.is_none() {
        bail!("nothing to write: pass --out and/or --frames");
    }
    let mut out_note = String::new();
    let mut frames_note = String::new();
    if let Some(path) = out {
        let mut pixels = Vec::with_capacity(windows.len() * horizon * data.frame_len());
        for window in windows {
            for frame in window {
                pixels.extend_from_slice(frame);
            }
        }
        let pred = Dataset::from_pixels(data.frame_px(), horizon as u32, pixels)?;
        save_dataset(path, &pred)?;
        out_note = format!(" out={}", path.display());
    }
    if let Some(dir) = frames {
        let window = windows
            .get(sequence)
            .ok_or_else(|| anyhow!("sequence {sequence} out of range 0..{}", windows.len()))?;
        write_frames(dir, data.frame_px(), window)?;
        frames_note = format!(" frames={}", dir.display());
    }
    Ok((out_note, frames_note))
}

pub fn run_predict(args: &PredictArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let params = load_rtgb(&args.model)?;
    let data = load_dataset(&args.data)?;
    let mode = visible_mode(args.binary);
    let windows = predict_windows(&data, args.prefix, args.horizon, |n| {
        let mut rng = derive_rng(ctx.seed, &[tag::PREDICT, n as u64]);
        let view = data.sequence(n).prefix(args.prefix);
        Ok(predict(&params, view, args.horizon, mode, &mut rng)?)
    })?;
    let (out_note, frames_note) = write_prediction_outputs(
        &windows,
        &data,
        args.horizon,
        args.out.as_deref(),
        args.frames.as_deref(),
        args.sequence,
    )?;
    println!(
        "sequences={} prefix={} horizon={}{}{}",
        windows.len(),
        args.prefix,
        args.horizon,
        out_note,
        frames_note
    );
    Ok(())
}

/// How `extract-rules` chooses its rule bodies.
#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum BodiesArg {
    /// All 2^|H| hidden states.
    Enumerate,
    /// Binarized hidden trajectories of a dataset.
    Data,
}

#[derive(Args, Debug)]
pub struct ExtractRulesArgs {
    /// Model checkpoint path.
    #[arg(long)]
    pub model: PathBuf,
    /// Rule-body source.
    #[arg(long, value_enum, default_value_t = BodiesArg::Enumerate)]
    pub bodies: BodiesArg,
    /// Dataset path; required when --bodies data.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Gibbs sweeps per chain.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Gibbs chains per body.
    #[arg(long, default_value_t = 20000)]
    pub chains: usize,
    /// Hidden-mean binarization threshold for data-derived bodies.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Treat visible units as Bernoulli when encoding data-derived bodies.
    #[arg(long, default_value_t = false)]
    pub binary: bool,
    /// Output rule-file path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_extract_rules(args: &ExtractRulesArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let params = load_rtgb(&args.model)?;
    let bodies = match args.bodies {
        BodiesArg::Enumerate => enumerate_bodies(params.n_hidden())?,
        BodiesArg::Data => {
            let path = args
                .data
                .as_ref()
                .ok_or_else(|| anyhow!("--bodies data requires --data"))?;
            let data = load_dataset(path)?;
            bodies_from_data(&params, &data, visible_mode(args.binary), args.threshold)?
        }
    };
    ctx.note(format!("estimating transitions for {} bodies", bodies.len()));
    let cfg = GibbsConfig {
        sweeps: args.k,
        chains: args.chains,
        seed: ctx.seed,
    };
    let rules = extract_rules(&params, &bodies, &cfg, &ctx.exec)?;
    save_rules(&args.out, &rules)?;
    println!(
        "rules_count={} bodies={} out={}",
        rules.len(),
        rules.n_bodies(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct RulePredictArgs {
    /// Model checkpoint path (decodes hidden states to frames).
    #[arg(long)]
    pub model: PathBuf,
    /// Rule-file path.
    #[arg(long)]
    pub rules: PathBuf,
    /// Dataset supplying prediction prefixes.
    #[arg(long)]
    pub data: PathBuf,
    /// Frames of each sequence fed to the model before prediction.
    #[arg(long)]
    pub prefix: usize,
    /// Frames to predict after the prefix.
    #[arg(long)]
    pub horizon: usize,
    /// Treat visible units as Bernoulli instead of Gaussian.
    #[arg(long, default_value_t = false)]
    pub binary: bool,
    /// Optional output dataset of predicted windows (all sequences).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional directory for one sequence's predicted frames as PGM files.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Which sequence's frames to export.
    #[arg(long, default_value_t = 0)]
    pub sequence: usize,
}

pub fn run_rule_predict(args: &RulePredictArgs, ctx: &Ctx) -> anyhow::Result<()> {
    let params = load_rtgb(&args.model)?;
    let rules = load_rules(&args.rules)?;
    let data = load_dataset(&args.data)?;
    let mode = visible_mode(args.binary);
    let windows = predict_windows(&data, args.prefix, args.horizon, |n| {
        let mut rng = derive_rng(ctx.seed, &[tag::PREDICT, n as u64]);
        let view = data.sequence(n).prefix(args.prefix);
        Ok(rule_predict(&params, &rules, view, args.horizon, mode, &mut rng)?)
    })?;
    let (out_note, frames_note) = write_prediction_outputs(
        &windows,
        &data,
        args.horizon,
        args.out.as_deref(),
        args.frames.as_deref(),
        args.sequence,
    )?;
    println!(
        "sequences={} prefix={} horizon={}{}{}",
        windows.len(),
        args.prefix,
        args.horizon,
        out_note,
        frames_note
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Ground-truth dataset path.
    #[arg(long)]
    pub truth: PathBuf,
    /// Predicted dataset path (full-length or window-only).
    #[arg(long)]
    pub pred: PathBuf,
    /// First predicted frame index.
    #[arg(long)]
    pub prefix: usize,
    /// Last scored frame index (exclusive); defaults to the truth length.
    #[arg(long)]
    pub total: Option<usize>,
}

pub fn run_eval(args: &EvalArgs, _ctx: &Ctx) -> anyhow::Result<()> {
    let truth = load_dataset(&args.truth)?;
    let pred = load_dataset(&args.pred)?;
    let total = args.total.unwrap_or(truth.steps() as usize);
    let report = prediction_loss(&truth, &pred, args.prefix, total)?;
    println!(
        "loss={:.6} sequences={} prefix={} total={}",
        report.mean,
        report.per_sequence.len(),
        args.prefix,
        total
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct FeatureMapsArgs {
    /// Model checkpoint path.
    #[arg(long)]
    pub model: PathBuf,
    /// Render only this hidden unit instead of all of them.
    #[arg(long)]
    pub unit: Option<usize>,
    /// Output directory for unit_<j>.pgm images.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_feature_maps(args: &FeatureMapsArgs, _ctx: &Ctx) -> anyhow::Result<()> {
    let params = load_rtgb(&args.model)?;
    let units: Vec<usize> = match args.unit {
        Some(unit) => vec![unit],
        None => (0..params.n_hidden()).collect(),
    };
    std::fs::create_dir_all(&args.out)?;
    let px = frame_px_of(&params)?;
    for &unit in &units {
        let map = feature_map(&params, unit)?;
        write_pgm(&args.out.join(format!("unit_{unit}.pgm")), px, &map)?;
    }
    println!("units={} out={}", units.len(), args.out.display());
    Ok(())
}

/// Frame edge length implied by a model's visible layer, which must be
/// square to render images.
fn frame_px_of(params: &RtgbParams) -> anyhow::Result<u32> {
    let nv = params.n_visible();
    let px = (nv as f64).sqrt().round() as u32;
    if (px as usize).pow(2) != nv {
        bail!("visible layer holds {nv} units, which is not a square frame");
    }
    Ok(px)
}

#[derive(Args, Debug)]
pub struct RuleFigureArgs {
    /// Model checkpoint path.
    #[arg(long)]
    pub model: PathBuf,
    /// Rule-file path.
    #[arg(long)]
    pub rules: PathBuf,
    /// Rule body as a 0/1 string, unit 0 first; defaults to the
    /// highest-probability rule.
    #[arg(long)]
    pub body: Option<String>,
    /// Head unit; defaults to the highest-probability rule.
    #[arg(long)]
    pub head: Option<usize>,
    /// Output directory for the images and manifest.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_body(text: &str, width: usize) -> anyhow::Result<HiddenState> {
    if text.len() != width {
        bail!("body holds {} literals, the rule set has width {width}", text.len());
    }
    let mut bits = Vec::with_capacity(width);
    for ch in text.chars() {
        match ch {
            '0' => bits.push(false),
            '1' => bits.push(true),
            other => bail!("body characters must be 0 or 1, got {other:?}"),
        }
    }
    Ok(HiddenState::from_bools(&bits))
}

/// Pick the rule to draw: an exact (body, head) lookup when both are given,
/// otherwise the highest-probability rule matching whatever was pinned.
fn select_rule(
    rules: &RuleSet,
    body: Option<&str>,
    head: Option<usize>,
) -> anyhow::Result<Rule> {
    let body = body
        .map(|text| parse_body(text, rules.width()))
        .transpose()?;
    if let (Some(body), Some(head)) = (&body, head) {
        return rules
            .get(body, head)
            .ok_or_else(|| anyhow!("no rule stored for that body and head {head}"));
    }
    let mut best: Option<Rule> = None;
    for rule in rules.iter() {
        if body.as_ref().is_some_and(|b| rule.body != *b) {
            continue;
        }
        if head.is_some_and(|j| rule.head != j) {
            continue;
        }
        if best.as_ref().is_none_or(|b| rule.prob > b.prob) {
            best = Some(rule);
        }
    }
    best.ok_or_else(|| anyhow!("rule set holds no matching rule"))
}

pub fn run_rule_figure(args: &RuleFigureArgs, _ctx: &Ctx) -> anyhow::Result<()> {
    let params = load_rtgb(&args.model)?;
    let rules = load_rules(&args.rules)?;
    if rules.width() != params.n_hidden() {
        bail!(
            "rule set width {} does not match the model's {} hidden units",
            rules.width(),
            params.n_hidden()
        );
    }
    let rule = select_rule(&rules, args.body.as_deref(), args.head)?;
    std::fs::create_dir_all(&args.out)?;
    let px = frame_px_of(&params)?;

    let head_name = format!("head_unit_{}.pgm", rule.head);
    write_pgm(&args.out.join(&head_name), px, &feature_map(&params, rule.head)?)?;
    let mut body_names = Vec::new();
    for lit in rule.literals() {
        if !lit.positive {
            continue;
        }
        let name = format!("body_unit_{}.pgm", lit.unit);
        write_pgm(&args.out.join(&name), px, &feature_map(&params, lit.unit)?)?;
        body_names.push(name);
    }

    let mut manifest = format!("rule: {}\nhead_image: {head_name}\n", rule_line(&rule));
    if body_names.is_empty() {
        manifest.push_str("body_images: none (all body literals are negated)\n");
    } else {
        manifest.push_str(&format!("body_images: {}\n", body_names.join(" ")));
    }
    let manifest_path = args.out.join("manifest.txt");
    std::fs::write(&manifest_path, manifest)?;
    println!(
        "images={} manifest={}",
        1 + body_names.len(),
        manifest_path.display()
    );
    Ok(())
}
