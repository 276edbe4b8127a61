use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contour_mend::ThresholdMode;

mod commands;
mod config;
mod error;

use config::Overrides;

/// Reconstruct broken contour lines in scanned raster contour maps.
#[derive(Debug, Parser)]
#[command(name = "contour-mend", version)]
pub struct Cli {
    #[command(flatten)]
    pub settings: SettingArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Pipeline settings. Flags override the config file, which overrides the
/// built-in defaults.
#[derive(Debug, Args)]
pub struct SettingArgs {
    /// key = value settings file [default: $CONTOUR_MEND_CONFIG]
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Binarization threshold: `auto` or an intensity 0..=255
    #[arg(long, global = true, value_name = "MODE")]
    pub threshold: Option<ThresholdMode>,
    /// Number of 3x3 median passes
    #[arg(long, global = true, value_name = "N")]
    pub median_passes: Option<usize>,
    /// Side of the square search window for the first matching phase (odd)
    #[arg(long, global = true, value_name = "PX")]
    pub window: Option<usize>,
    /// Longest gap the global matching phase will bridge
    #[arg(long, global = true, value_name = "PX")]
    pub max_gap: Option<f64>,
    /// Pixels traced back from an endpoint to estimate its tangent
    #[arg(long, global = true, value_name = "N")]
    pub tail_k: Option<usize>,
    /// Sampling step along each bridge curve
    #[arg(long, global = true, value_name = "PX")]
    pub sample_step: Option<f64>,
    /// Distance difference under which two candidates count as tied
    #[arg(long, global = true, value_name = "PX")]
    pub tie_epsilon: Option<f64>,
    /// Write every intermediate raster as a numbered PBM
    #[arg(long, global = true)]
    pub dump_stages: bool,
    /// Include each bridge's samples and pixels in the report
    #[arg(long, global = true)]
    pub dump_paths: bool,
    /// Include per-stage wall-clock timings in the report
    #[arg(long, global = true)]
    pub timings: bool,
}

impl SettingArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            threshold: self.threshold,
            median_passes: self.median_passes,
            window: self.window,
            max_gap: self.max_gap,
            tail_k: self.tail_k,
            sample_step: self.sample_step,
            tie_epsilon: self.tie_epsilon,
            dump_stages: self.dump_stages.then_some(true),
            dump_paths: self.dump_paths.then_some(true),
            timings: self.timings.then_some(true),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every stage on a grayscale scan and write the reconstruction
    Pipeline {
        /// Input PGM
        input: PathBuf,
        /// Reconstructed skeleton PBM
        #[arg(short, long)]
        output: PathBuf,
        /// Run report JSON [default: stdout]
        #[arg(long)]
        report: Option<PathBuf>,
        /// Debug overlay PGM
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Directory for stage dumps [default: next to the output]
        #[arg(long)]
        stages_dir: Option<PathBuf>,
        /// Write plain-text (P1/P2) rasters
        #[arg(long)]
        ascii: bool,
    },
    /// Binarize a PGM, optionally followed by the median passes
    Threshold {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Apply the configured median passes after thresholding
        #[arg(long)]
        median: bool,
        #[arg(long)]
        ascii: bool,
    },
    /// Thin a binary PBM to a one-pixel skeleton and remove crossing points
    Thin {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Stop after thinning
        #[arg(long)]
        keep_crossings: bool,
        #[arg(long)]
        ascii: bool,
    },
    /// List the endpoints of a skeleton PBM as JSON
    Endpoints {
        input: PathBuf,
        /// [default: stdout]
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pair endpoints from an `endpoints` JSON list
    Match {
        input: PathBuf,
        /// [default: stdout]
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw the bridges for a `match` result onto a skeleton PBM
    Reconnect {
        skeleton: PathBuf,
        /// Output of the `match` subcommand
        #[arg(long)]
        matches: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Path list JSON [default: stdout]
        #[arg(long)]
        paths: Option<PathBuf>,
        #[arg(long)]
        ascii: bool,
    },
    /// Classify an isolated digit glyph by its zone profile
    Glyph {
        input: PathBuf,
        /// Template rows: a digit followed by nine numbers
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Generate a seeded synthetic corpus with ground truth
    Synth {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Run the pipeline over a corpus manifest and print merged metrics
    Eval {
        /// manifest.jsonl written by `synth`
        manifest: PathBuf,
        /// Per-map results as JSON lines
        #[arg(long)]
        per_map: Option<PathBuf>,
    },
}

/// Corpus shape. Unset values take the library defaults.
#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// First map seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub maps: Option<usize>,
    /// Side of each square map
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub min_contours: Option<usize>,
    #[arg(long)]
    pub max_contours: Option<usize>,
    /// Gaps per map
    #[arg(long)]
    pub gaps: Option<usize>,
    #[arg(long)]
    pub min_gap_len: Option<usize>,
    #[arg(long)]
    pub max_gap_len: Option<usize>,
    /// Fraction of paper pixels flipped to salt or pepper
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub stroke_radius: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("contour-mend: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
