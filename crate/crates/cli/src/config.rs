use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use seqdiff_core::matrix_profile::{DEFAULT_AGGREGATE_CUTOFF, TEAM_WINDOW};
use seqdiff_core::similarity::VectorLength;
use seqdiff_core::vectorize::VectorMode;
use seqdiff_core::Format;

#[derive(Debug, Parser)]
#[command(name = "seqdiff", version, about = "Characterize differences between groups of event sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Per-group counts, length distribution and alphabet.
    Inspect {
        #[command(flatten)]
        #[serde(flatten)]
        shared: Shared,
    },
    /// Silhouette score sweep over window sizes, vector lengths and modes.
    Silhouette {
        #[command(flatten)]
        #[serde(flatten)]
        shared: Shared,
        #[command(flatten)]
        #[serde(flatten)]
        args: SilhouetteArgs,
    },
    /// Matrix profiles, group aggregates and group comparisons.
    Profile {
        #[command(flatten)]
        #[serde(flatten)]
        shared: Shared,
        #[command(flatten)]
        #[serde(flatten)]
        args: ProfileArgs,
    },
    /// Cross-validated k-gram and length-only classifiers.
    Classify {
        #[command(flatten)]
        #[serde(flatten)]
        shared: Shared,
        #[command(flatten)]
        #[serde(flatten)]
        args: ClassifyArgs,
    },
}

impl Command {
    pub fn shared(&self) -> &Shared {
        match self {
            Self::Inspect { shared }
            | Self::Silhouette { shared, .. }
            | Self::Profile { shared, .. }
            | Self::Classify { shared, .. } => shared,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Shared {
    /// Corpus file; repeat to concatenate several files.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "tsv", value_parser = parse_format)]
    pub format: Format,
    /// Replace runs of identical consecutive events with one event.
    #[arg(long)]
    pub collapse: bool,
    /// Drop sequences shorter than this (applied after --collapse).
    #[arg(long)]
    pub min_length: Option<usize>,
    #[arg(long, default_value = "seqdiff-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SilhouetteArgs {
    /// Window sizes, comma separated.
    #[arg(long = "w", value_delimiter = ',', default_values_t = [2, 3, 4, 5])]
    pub windows: Vec<usize>,
    /// Vocabulary sizes, comma separated; `all` keeps every k-gram.
    #[arg(long = "vector-length", value_delimiter = ',', value_parser = parse_length,
          default_values = ["10", "100", "1000"])]
    pub vector_lengths: Vec<VectorLength>,
    #[arg(long = "mode", value_delimiter = ',', value_parser = parse_mode,
          default_values = ["tf_isf", "binary"])]
    pub modes: Vec<VectorMode>,
    /// The two groups to compare; required when the corpus has more than two.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub groups: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long = "w", default_value_t = TEAM_WINDOW)]
    pub window: usize,
    /// Leading positions kept in the per-group aggregate profiles.
    #[arg(long, default_value_t = DEFAULT_AGGREGATE_CUTOFF)]
    pub aggregate_cutoff: usize,
    /// Also export the full distance matrix of this sequence.
    #[arg(long)]
    pub distance_matrix: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long = "w", default_value_t = 3)]
    pub window: usize,
    #[arg(long = "vector-length", default_value = "100", value_parser = parse_length)]
    pub vector_length: VectorLength,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long = "lr", default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: seqdiff_core::Error| e.to_string())
}

fn parse_length(s: &str) -> Result<VectorLength, String> {
    s.parse().map_err(|e: seqdiff_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<VectorMode, String> {
    s.parse().map_err(|e: seqdiff_core::Error| e.to_string())
}
