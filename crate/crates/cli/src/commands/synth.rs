//! `synth`: generate a document corpus with ground-truth counts, or a set of
//! raw + smoothed series straight from decay parameters.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use serde_json::json;

use memdecay_core::corpus::Medium;
use memdecay_core::model::{ShiftedPowerLawParams, NEWS_PARAMS, TWITTER_PARAMS};
use memdecay_core::series::supersmooth_with;
use memdecay_core::synth::{default_shape_classes, generate_corpus, generate_series, SynthSpec};

use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::{input_error, Failure};

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// `corpus` emits docs.jsonl + registry + ground-truth counts;
    /// `series` emits series.csv straight from the decay parameters.
    #[arg(long, default_value = "corpus")]
    pub mode: String,
    #[arg(long, default_value_t = 12)]
    pub n_persons: usize,
    #[arg(long, default_value_t = 64)]
    pub docs_per_day: u64,
    /// Log10-scale noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 30)]
    pub death_spread: u32,
    /// Emit news mention documents with one full name only.
    #[arg(long, default_value_t = false)]
    pub single_mention_news: bool,
    /// Draw per-person curve shapes from the four-class mixture instead of
    /// giving everyone the same curve.
    #[arg(long, default_value_t = false)]
    pub shape_mix: bool,
    /// Decay parameters as `a,b,c`. Series mode defaults to the reference
    /// fits; corpus mode defaults to desk-scale fractions.
    #[arg(long)]
    pub news_params: Option<String>,
    #[arg(long)]
    pub twitter_params: Option<String>,
}

fn parse_params(s: &str) -> anyhow::Result<ShiftedPowerLawParams> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(anyhow!("expected 'a,b,c', got '{s}'"));
    }
    Ok(ShiftedPowerLawParams::new(parts[0], parts[1], parts[2]))
}

pub fn run(args: &SynthArgs, config: &RunConfig) -> Result<(), Failure> {
    let paths = OutPaths::new(&args.out).map_err(input_error)?;
    match args.mode.as_str() {
        "corpus" => corpus_mode(args, config, &paths),
        "series" => series_mode(args, config, &paths),
        other => Err(input_error(anyhow!(
            "unknown synth mode '{other}' (corpus|series)"
        ))),
    }
}

fn corpus_mode(args: &SynthArgs, config: &RunConfig, paths: &OutPaths) -> Result<(), Failure> {
    let defaults = SynthSpec::default();
    let spec = SynthSpec {
        seed: config.seed,
        n_persons: args.n_persons,
        docs_per_day: args.docs_per_day,
        noise_sigma: args.noise,
        news_params: match &args.news_params {
            Some(s) => parse_params(s).map_err(input_error)?,
            None => defaults.news_params,
        },
        twitter_params: match &args.twitter_params {
            Some(s) => parse_params(s).map_err(input_error)?,
            None => defaults.twitter_params,
        },
        death_spread_days: args.death_spread,
        news_single_mention: args.single_mention_news,
        shape_classes: if args.shape_mix {
            default_shape_classes()
        } else {
            Vec::new()
        },
        ..defaults
    };
    let corpus = generate_corpus(&spec).map_err(input_error)?;
    formats::write_documents(&paths.file("docs.jsonl"), &corpus.documents)
        .map_err(input_error)?;
    formats::write_registry(&paths.file("registry.json"), &corpus.registry)
        .map_err(input_error)?;
    formats::write_counts(
        &paths.file("ground_truth_mentions.csv"),
        &paths.file("ground_truth_totals.csv"),
        &corpus.ground_truth,
    )
    .map_err(input_error)?;
    let manifest = json!({
        "stage": "synth",
        "mode": "corpus",
        "spec": spec,
        "window": corpus.window,
        "documents": corpus.documents.len(),
        "persons": corpus.registry.len(),
    });
    formats::write_json(&paths.file("synth_manifest.json"), &manifest).map_err(input_error)?;
    eprintln!(
        "synth: {} documents over {} persons",
        corpus.documents.len(),
        corpus.registry.len()
    );
    Ok(())
}

fn series_mode(args: &SynthArgs, config: &RunConfig, paths: &OutPaths) -> Result<(), Failure> {
    let news = match &args.news_params {
        Some(s) => parse_params(s).map_err(input_error)?,
        None => NEWS_PARAMS,
    };
    let twitter = match &args.twitter_params {
        Some(s) => parse_params(s).map_err(input_error)?,
        None => TWITTER_PARAMS,
    };
    let smoother = config.smoother();
    let mut series = Vec::new();
    for i in 0..args.n_persons.max(1) {
        for (medium, params) in [(Medium::News, &news), (Medium::Twitter, &twitter)] {
            let mut raw = generate_series(params, medium, args.noise, config.seed + i as u64);
            raw.person_id = memdecay_core::corpus::PersonId::new(format!("synth-{i:04}"));
            let smoothed = supersmooth_with(&raw, &smoother);
            series.push(raw);
            series.push(smoothed);
        }
    }
    formats::write_series(&paths.series(), &series).map_err(input_error)?;
    let manifest = json!({
        "stage": "synth",
        "mode": "series",
        "n_persons": args.n_persons.max(1),
        "noise": args.noise,
        "seed": config.seed,
        "news_params": news,
        "twitter_params": twitter,
    });
    formats::write_json(&paths.file("synth_manifest.json"), &manifest).map_err(input_error)?;
    eprintln!("synth: {} series rows", series.len());
    Ok(())
}
