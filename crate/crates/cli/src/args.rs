use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cislunar_core::experiment::Scale;
use cislunar_core::InterferenceModel;

/// Cislunar proximity-link simulator and interference detectors.
#[derive(Debug, Parser)]
#[command(name = "cislunar", version)]
pub struct Cli {
    /// Worker threads for generation and evaluation (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Root for default output directories.
    #[arg(long, global = true, env = "CISLUNAR_OUT", default_value = "runs")]
    pub out_root: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the link budget at one lunar phase, or sweep SNR over phase.
    Linkbudget(LinkbudgetArgs),
    /// Simulate one SINR trace and print it as CSV.
    Simulate(SimulateArgs),
    /// Generate and split a labelled window dataset.
    Generate(GenerateArgs),
    /// Fit a detector on a dataset's training split.
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset's test split.
    Eval(EvalArgs),
    /// Run both scenarios under both interference models with both learners.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Preset name (gateway or llo); defaults to the config file's preset, then gateway.
    #[arg(long)]
    pub scenario: Option<String>,

    /// Flat TOML file overriding scenario fields. Flags win over the file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinkbudgetArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Lunar phase angle in degrees; any value, normalized to [0, 360).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub psi: f64,

    /// Write the mean SNR for every phase instead of the table.
    #[arg(long)]
    pub sweep: bool,

    /// Sweep step in degrees.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,

    /// Sweep CSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InterferenceChoice {
    None,
    Model1,
    Model2,
}

impl InterferenceChoice {
    pub fn model(self) -> Option<InterferenceModel> {
        match self {
            InterferenceChoice::None => None,
            InterferenceChoice::Model1 => Some(InterferenceModel::Model1),
            InterferenceChoice::Model2 => Some(InterferenceModel::Model2),
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[arg(long, default_value_t = 240.0, allow_negative_numbers = true)]
    pub psi: f64,

    #[arg(long, default_value_t = 1000)]
    pub length: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 0)]
    pub stream: u64,

    #[arg(long, value_enum)]
    pub interference: Option<InterferenceChoice>,

    /// Interference power I in dBW.
    #[arg(long, allow_negative_numbers = true)]
    pub int_power_dbw: Option<f64>,

    /// Gate probability p_alpha.
    #[arg(long)]
    pub p_alpha: Option<f64>,

    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<InterferenceModel, String> {
    s.parse().map_err(|e: cislunar_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Interference model of the interfered windows: 1 or 2.
    #[arg(long, value_parser = parse_model, default_value = "1")]
    pub model: InterferenceModel,

    /// Total number of windows (default: desk scale).
    #[arg(long)]
    pub windows: Option<usize>,

    #[arg(long, default_value_t = 1000)]
    pub length: usize,

    /// Gate probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p_alpha: Option<Vec<f64>>,

    /// Interference powers in dBW, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub int_power_dbw: Option<Vec<f64>>,

    /// Lunar phases in degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub psi: Option<Vec<f64>>,

    /// Share of clean windows.
    #[arg(long)]
    pub clean_fraction: Option<f64>,

    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub train_fraction: f64,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Also write dataset.csv.
    #[arg(long)]
    pub csv: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Learner {
    Dtree,
    Cnn,
    Both,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory written by `generate`.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, value_enum, default_value = "both")]
    pub learner: Learner,

    /// Expected window length; checked against the dataset.
    #[arg(long)]
    pub length: Option<usize>,

    #[arg(long, default_value_t = 20)]
    pub epochs: usize,

    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,

    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 25)]
    pub max_depth: usize,

    #[arg(long, default_value_t = 2)]
    pub min_samples_split: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,

    /// `model.json` (decision tree) or `model.bin` (CNN).
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_parser = parse_scale, default_value = "desk")]
    pub scale: Scale,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Shorter windows (256 samples).
    #[arg(long)]
    pub fast: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse().map_err(|e: cislunar_core::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_lists_and_negative_values() {
        let cli = Cli::try_parse_from([
            "cislunar",
            "generate",
            "--model",
            "2",
            "--int-power-dbw",
            "-130,-100",
            "--psi",
            "0,240",
        ])
        .unwrap();
        let Command::Generate(g) = cli.command else { panic!() };
        assert_eq!(g.model, InterferenceModel::Model2);
        assert_eq!(g.int_power_dbw, Some(vec![-130.0, -100.0]));
        assert_eq!(g.psi, Some(vec![0.0, 240.0]));
    }

    #[test]
    fn bad_seed_is_a_usage_error() {
        let err = Cli::try_parse_from(["cislunar", "reproduce", "--seed", "x7"]).unwrap_err();
        assert_eq!(err.kind(), clap::error::ErrorKind::ValueValidation);
    }
}
