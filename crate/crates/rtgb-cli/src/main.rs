//! Command-line interface for the recurrent temporal Gaussian-Bernoulli
//! model: data generation, raw-tensor import, training, prediction, rule
//! extraction, rule-based prediction, evaluation, and feature-map exports.
//!
//! Global flags: `--seed` (env `RTGB_SEED`), `--threads` (env
//! `RTGB_THREADS`), `--verbose` (env `RTGB_VERBOSE`). Identical flag sets
//! with identical seeds write byte-identical artifacts at any thread count.
//! Exit status is 0 on success, 1 on runtime errors, 2 on flag errors.

use clap::{Parser, Subcommand};

use rtgb_cli::commands::{
    generate_balls, generate_sprites, import, run_eval, run_extract_rules, run_feature_maps,
    run_predict, run_rule_figure, run_rule_predict, run_train, Ctx, EvalArgs, ExtractRulesArgs,
    FeatureMapsArgs, GenerateBallsArgs, GenerateSpritesArgs, ImportArgs, PredictArgs,
    RuleFigureArgs, RulePredictArgs, TrainArgs,
};
use rtgb_cli::exec::ThreadPoolExec;

#[derive(Parser, Debug)]
#[command(name = "rtgb", version, about = "Recurrent temporal Gaussian-Bernoulli model toolkit")]
struct Cli {
    /// Root seed; every random stream in a run derives from it.
    #[arg(long, global = true, env = "RTGB_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for data generation, gradients, and Gibbs chains.
    #[arg(long, global = true, env = "RTGB_THREADS", default_value_t = 1)]
    threads: usize,
    /// Print progress diagnostics to standard error.
    #[arg(long, global = true, env = "RTGB_VERBOSE", default_value_t = false)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate bouncing-ball sequences into a dataset file.
    GenerateBalls(GenerateBallsArgs),
    /// Simulate bouncing digit-sprite sequences into a dataset file.
    GenerateSprites(GenerateSpritesArgs),
    /// Convert a raw headerless tensor file into a dataset file.
    Import(ImportArgs),
    /// Train a model on a dataset and write a checkpoint.
    Train(TrainArgs),
    /// Roll out model predictions from dataset prefixes.
    Predict(PredictArgs),
    /// Estimate hidden-state transition rules from a trained model.
    ExtractRules(ExtractRulesArgs),
    /// Roll out predictions driven by extracted rules.
    RulePredict(RulePredictArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Render per-unit feature maps as PGM images.
    FeatureMaps(FeatureMapsArgs),
    /// Render one rule's head and positive-body feature maps with a manifest.
    RuleFigure(RuleFigureArgs),
}

fn main() {
    let cli = Cli::parse();
    let ctx = match ThreadPoolExec::new(cli.threads) {
        Ok(exec) => Ctx {
            seed: cli.seed,
            verbose: cli.verbose,
            exec,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    };
    let outcome = match &cli.command {
        Command::GenerateBalls(args) => generate_balls(args, &ctx),
        Command::GenerateSprites(args) => generate_sprites(args, &ctx),
        Command::Import(args) => import(args, &ctx),
        Command::Train(args) => run_train(args, &ctx),
        Command::Predict(args) => run_predict(args, &ctx),
        Command::ExtractRules(args) => run_extract_rules(args, &ctx),
        Command::RulePredict(args) => run_rule_predict(args, &ctx),
        Command::Eval(args) => run_eval(args, &ctx),
        Command::FeatureMaps(args) => run_feature_maps(args, &ctx),
        Command::RuleFigure(args) => run_rule_figure(args, &ctx),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
