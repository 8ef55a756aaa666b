//! Run configuration: paper-default windows and thresholds, overridable from
//! a plain `key = value` config file and again from command-line flags.
//! Every override lands in the run manifest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use serde::Serialize;

use memdecay_core::corpus::Medium;
use memdecay_core::series::SmootherConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaSelection {
    Both,
    News,
    Twitter,
}

impl MediaSelection {
    pub fn media(self) -> Vec<Medium> {
        match self {
            MediaSelection::Both => vec![Medium::News, Medium::Twitter],
            MediaSelection::News => vec![Medium::News],
            MediaSelection::Twitter => vec![Medium::Twitter],
        }
    }
}

impl std::str::FromStr for MediaSelection {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(MediaSelection::Both),
            "news" => Ok(MediaSelection::News),
            "twitter" => Ok(MediaSelection::Twitter),
            other => bail!("unknown media selection '{other}' (both|news|twitter)"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub media: MediaSelection,
    /// Minimum ambiguity share for alias admission.
    pub ambiguity_threshold: f64,
    /// Corpus window; derived from the document stream when absent.
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    /// Feature windows (inclusive day offsets).
    pub pre_window: (i32, i32),
    pub short_window: (i32, i32),
    pub long_window: (i32, i32),
    /// Model fit range in days after death.
    pub fit_range: (u32, u32),
    pub k_min: usize,
    pub k_max: usize,
    pub kmeans_restarts: usize,
    pub seed: u64,
    pub bootstrap_replicates: usize,
    pub smoother_spans: [f64; 3],
    /// Keys overridden away from the defaults, for the manifest.
    pub overrides: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            media: MediaSelection::Both,
            ambiguity_threshold: 0.9,
            window_start: None,
            window_end: None,
            pre_window: (-360, -30),
            short_window: (0, 29),
            long_window: (30, 360),
            fit_range: (1, 400),
            k_min: 2,
            k_max: 30,
            kmeans_restarts: 50,
            seed: 42,
            bootstrap_replicates: 10_000,
            smoother_spans: [0.05, 0.2, 0.5],
            overrides: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn smoother(&self) -> SmootherConfig {
        SmootherConfig {
            spans: self.smoother_spans,
            ..SmootherConfig::default()
        }
    }

    /// Apply `key = value` lines from a config file.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected 'key = value'", path.display(), lineno + 1);
            };
            self.apply(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Apply one override.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let pair = |value: &str| -> Result<(i32, i32)> {
            let (a, b) = value
                .split_once(',')
                .with_context(|| format!("expected 'lo,hi', got '{value}'"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        };
        match key {
            "media" => self.media = value.parse()?,
            "ambiguity_threshold" => self.ambiguity_threshold = value.parse()?,
            "window_start" => self.window_start = Some(value.parse()?),
            "window_end" => self.window_end = Some(value.parse()?),
            "pre_window" => self.pre_window = pair(value)?,
            "short_window" => self.short_window = pair(value)?,
            "long_window" => self.long_window = pair(value)?,
            "fit_range" => {
                let (a, b) = pair(value)?;
                self.fit_range = (a.try_into()?, b.try_into()?);
            }
            "k_min" => self.k_min = value.parse()?,
            "k_max" => self.k_max = value.parse()?,
            "kmeans_restarts" => self.kmeans_restarts = value.parse()?,
            "seed" => self.seed = value.parse()?,
            "bootstrap_replicates" => self.bootstrap_replicates = value.parse()?,
            "smoother_spans" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<std::result::Result<_, _>>()?;
                if parts.len() != 3 {
                    bail!("smoother_spans needs exactly 3 values");
                }
                self.smoother_spans = [parts[0], parts[1], parts[2]];
            }
            other => bail!("unknown config key '{other}'"),
        }
        self.overrides.push(format!("{key} = {value}"));
        Ok(())
    }
}

/// Flat key-value flags collected from the command line (`--set key=value`).
pub fn apply_overrides(config: &mut RunConfig, sets: &[String]) -> Result<()> {
    for set in sets {
        let Some((key, value)) = set.split_once('=') else {
            bail!("--set expects key=value, got '{set}'");
        };
        config.apply(key.trim(), value.trim())?;
    }
    Ok(())
}

/// Shared output-path map so stages agree on file names.
pub struct OutPaths {
    pub dir: PathBuf,
}

impl OutPaths {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutPaths { dir: dir.to_path_buf() })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn mention_counts(&self) -> PathBuf {
        self.file("mention_counts.csv")
    }

    pub fn total_counts(&self) -> PathBuf {
        self.file("total_counts.csv")
    }

    pub fn series(&self) -> PathBuf {
        self.file("series.csv")
    }

    pub fn features(&self) -> PathBuf {
        self.file("features.csv")
    }

    pub fn fit_report(&self, medium: Medium) -> PathBuf {
        self.file(&format!("fit_report_{medium}.json"))
    }

    pub fn decomposition(&self, medium: Medium) -> PathBuf {
        self.file(&format!("decomposition_{medium}.csv"))
    }

    pub fn fit_plot(&self, medium: Medium) -> PathBuf {
        self.file(&format!("mean_fit_{medium}.svg"))
    }

    pub fn cluster_report(&self, medium: Medium) -> PathBuf {
        self.file(&format!("cluster_report_{medium}.json"))
    }

    pub fn assignments(&self, medium: Medium) -> PathBuf {
        self.file(&format!("assignments_{medium}.csv"))
    }

    pub fn silhouette_plot(&self) -> PathBuf {
        self.file("silhouette_curve.svg")
    }

    pub fn confusion_report(&self) -> PathBuf {
        self.file("confusion_report.json")
    }

    pub fn boost_summary(&self) -> PathBuf {
        self.file("boost_summary.json")
    }
}
