//! End-to-end runs: generate, split, standardize, fit both detectors,
//! evaluate, and write every artifact.
//!
//! Layout of one experiment directory:
//!
//! ```text
//! resolved_config.json
//! dataset/        manifest.jsonl, values.f64le, resolved_config.json
//! dtree/          model.json, metrics.json, confusion.csv, breakdown.csv, *.svg
//! cnn/            model.bin, training_log.json, metrics.json, ...
//! ```
//!
//! Nothing written here carries a timestamp, so reruns with the same
//! configuration produce identical bytes.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cnn::{self, Architecture, CnnModel, EpochLog, TrainConfig, TrainingLog};
use crate::dataset::{self, Dataset, GenerationGrid, SampleWindow, DEFAULT_WINDOW_LENGTH};
use crate::dtree::{DecisionTree, DtreeModel, TreeParams};
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport};
use crate::interference::InterferenceModel;
use crate::link_budget::{ScenarioConfig, PRESETS};

pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const DTREE_MODEL_FILE: &str = "model.json";
pub const CNN_MODEL_FILE: &str = "model.bin";
pub const TRAINING_LOG_FILE: &str = "training_log.json";

/// Window length under `--fast`.
pub const FAST_WINDOW_LENGTH: usize = 256;
/// CNN epochs for desk-scale runs. Training accuracy saturates within the
/// first two epochs on every desk dataset.
pub const DESK_EPOCHS: usize = 5;
pub const TRAIN_FRACTION_DESK: f64 = 2.0 / 3.0;
pub const TRAIN_FRACTION_PAPER: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Paper,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::invalid(format!("unknown scale `{s}` (expected desk or paper)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scale: Scale,
    pub seed: u64,
    pub train_fraction: f64,
    pub grid: GenerationGrid,
    pub tree: TreeParams,
    pub cnn: TrainConfig,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioConfig, model: InterferenceModel, scale: Scale, fast: bool, seed: u64) -> Self {
        let length = if fast { FAST_WINDOW_LENGTH } else { DEFAULT_WINDOW_LENGTH };
        let (grid, train_fraction, epochs) = match scale {
            Scale::Desk => (
                GenerationGrid::desk(scenario, model, length),
                TRAIN_FRACTION_DESK,
                DESK_EPOCHS,
            ),
            Scale::Paper => (
                GenerationGrid::paper(scenario, model, length),
                TRAIN_FRACTION_PAPER,
                TrainConfig::default().epochs,
            ),
        };
        Self {
            scale,
            seed,
            train_fraction,
            grid,
            tree: TreeParams::default(),
            cnn: TrainConfig {
                epochs,
                seed,
                ..TrainConfig::default()
            },
        }
    }

    /// Directory name of this experiment inside a reproduce run.
    pub fn slug(&self) -> String {
        format!("{}_{}", self.grid.scenario.name, self.grid.model)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Standardized training rows and class indices.
fn training_rows(ds: &Dataset) -> Result<(Vec<&[f64]>, Vec<usize>)> {
    let train = ds.train()?;
    Ok((
        train.iter().map(|w| w.values.as_slice()).collect(),
        train.iter().map(|w| w.label.class_index()).collect(),
    ))
}

/// Fits a tree on the train split of `ds` (raw values; standardized here).
pub fn fit_dtree(ds: &Dataset, params: TreeParams) -> Result<DtreeModel> {
    let (scaled, st) = dataset::standardize(ds)?;
    let (rows, labels) = training_rows(&scaled)?;
    Ok(DtreeModel::new(DecisionTree::fit(&rows, &labels, params)?, st))
}

/// Trains the detector CNN on the train split of `ds`.
pub fn fit_cnn(ds: &Dataset, config: &TrainConfig, on_epoch: impl FnMut(&EpochLog)) -> Result<(CnnModel, TrainingLog)> {
    let (scaled, st) = dataset::standardize(ds)?;
    let (rows, labels) = training_rows(&scaled)?;
    let (params, log) = cnn::train(Architecture::detector(ds.length()), &rows, &labels, config, on_epoch)?;
    let model = CnnModel {
        params,
        standardizer: st,
        train_config: *config,
    };
    Ok((model, log))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub dtree: EvalReport,
    pub cnn: EvalReport,
    pub training_log: TrainingLog,
    pub tree_depth: usize,
}

/// Runs one (scenario, interference model) experiment. With `out_dir`, all
/// artifacts are written there. `log` receives progress lines.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>, log: &mut dyn FnMut(&str)) -> Result<ExperimentResult> {
    let slug = cfg.slug();
    log(&format!("{slug}: generating {} windows of length {}", cfg.grid.total_windows, cfg.grid.length));
    let ds = dataset::split(&dataset::generate(&cfg.grid, cfg.seed)?, cfg.train_fraction, cfg.seed)?;
    let test = ds.test()?;
    let scenario = ds.manifest.grid.scenario.name.clone();
    let model_name = cfg.grid.model.to_string();

    log(&format!("{slug}: fitting decision tree"));
    let tree = fit_dtree(&ds, cfg.tree)?;
    let tree_eval = eval::evaluate(&tree, &test)?;
    let dtree = EvalReport::new("dtree", &scenario, &model_name, &tree_eval)?;
    log(&format!("{slug}: dtree depth {} accuracy {:.4}", tree.tree.depth(), dtree.accuracy));

    log(&format!("{slug}: training cnn for {} epochs", cfg.cnn.epochs));
    let (cnn_model, training_log) = fit_cnn(&ds, &cfg.cnn, |e| {
        log(&format!(
            "{slug}: epoch {} loss {:.6} accuracy {:.4}",
            e.epoch, e.loss, e.accuracy
        ))
    })?;
    let cnn_eval = eval::evaluate(&cnn_model, &test)?;
    let cnn = EvalReport::new("cnn", &scenario, &model_name, &cnn_eval)?;
    log(&format!("{slug}: cnn accuracy {:.4}", cnn.accuracy));

    if let Some(dir) = out_dir {
        write_artifacts(dir, cfg, &ds, &test, (&tree, &dtree), (&cnn_model, &cnn, &training_log))?;
    }
    Ok(ExperimentResult {
        dtree,
        cnn,
        training_log,
        tree_depth: tree.tree.depth(),
    })
}

fn write_artifacts(
    dir: &Path,
    cfg: &ExperimentConfig,
    ds: &Dataset,
    test: &[&SampleWindow],
    (tree, tree_report): (&DtreeModel, &EvalReport),
    (cnn_model, cnn_report, training_log): (&CnnModel, &EvalReport, &TrainingLog),
) -> Result<()> {
    create_dir(dir)?;
    write_json(&dir.join(RESOLVED_CONFIG_FILE), cfg)?;

    let ds_dir = dir.join("dataset");
    dataset::save(ds, &ds_dir)?;
    write_json(&ds_dir.join(RESOLVED_CONFIG_FILE), cfg)?;

    let scenario = &ds.manifest.grid.scenario;
    let tree_dir = dir.join("dtree");
    eval::emit_report(tree_report, scenario, test, &tree_dir)?;
    tree.save(&tree_dir.join(DTREE_MODEL_FILE))?;
    write_json(&tree_dir.join(RESOLVED_CONFIG_FILE), cfg)?;

    let cnn_dir = dir.join("cnn");
    eval::emit_report(cnn_report, scenario, test, &cnn_dir)?;
    cnn_model.save(&cnn_dir.join(CNN_MODEL_FILE))?;
    write_json(&cnn_dir.join(TRAINING_LOG_FILE), training_log)?;
    write_json(&cnn_dir.join(RESOLVED_CONFIG_FILE), cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub model: String,
    pub learner: String,
    pub accuracy: f64,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("scenario,model,learner,accuracy\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{:.6}\n", r.scenario, r.model, r.learner, r.accuracy));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReproduceConfig {
    scale: Scale,
    fast: bool,
    seed: u64,
    experiments: Vec<ExperimentConfig>,
}

/// The four configurations run by [`reproduce`], in output order.
pub fn reproduce_configs(scale: Scale, fast: bool, seed: u64) -> Result<Vec<ExperimentConfig>> {
    let mut out = Vec::new();
    for name in PRESETS {
        for model in [InterferenceModel::Model1, InterferenceModel::Model2] {
            out.push(ExperimentConfig::new(ScenarioConfig::preset(name)?, model, scale, fast, seed));
        }
    }
    Ok(out)
}

/// Both scenarios × both interference models, each into its own
/// subdirectory of `out_root`, plus `summary.csv` with one accuracy row per
/// (scenario, model, learner).
pub fn reproduce(scale: Scale, fast: bool, seed: u64, out_root: &Path, log: &mut dyn FnMut(&str)) -> Result<Vec<SummaryRow>> {
    let experiments = reproduce_configs(scale, fast, seed)?;
    create_dir(out_root)?;
    write_json(
        &out_root.join(RESOLVED_CONFIG_FILE),
        &ReproduceConfig {
            scale,
            fast,
            seed,
            experiments: experiments.clone(),
        },
    )?;
    let mut rows = Vec::new();
    for cfg in &experiments {
        let result = run_experiment(cfg, Some(&out_root.join(cfg.slug())), log)?;
        for report in [&result.dtree, &result.cnn] {
            rows.push(SummaryRow {
                scenario: report.scenario.clone(),
                model: report.interference_model.clone(),
                learner: report.model.clone(),
                accuracy: report.accuracy,
            });
        }
    }
    let path = out_root.join(SUMMARY_FILE);
    fs::write(&path, summary_csv(&rows)).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(model: InterferenceModel) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ScenarioConfig::gateway(), model, Scale::Desk, true, 3);
        cfg.grid.length = 24;
        cfg.grid.total_windows = 240;
        cfg.grid.powers_dbw = vec![-110.0, -100.0];
        cfg.grid.psis_deg = vec![0.0, 240.0];
        cfg.cnn.epochs = 2;
        cfg
    }

    #[test]
    fn defaults_per_scale() {
        let desk = ExperimentConfig::new(ScenarioConfig::llo(), InterferenceModel::Model2, Scale::Desk, false, 7);
        assert_eq!(desk.grid.length, 1000);
        assert_eq!(desk.grid.total_windows, 4500);
        assert_eq!(desk.cnn.epochs, DESK_EPOCHS);
        assert_eq!(desk.cnn.seed, 7);
        assert_eq!(desk.slug(), "llo_model2");
        let fast = ExperimentConfig::new(ScenarioConfig::llo(), InterferenceModel::Model1, Scale::Desk, true, 7);
        assert_eq!(fast.grid.length, FAST_WINDOW_LENGTH);
        let paper = ExperimentConfig::new(ScenarioConfig::gateway(), InterferenceModel::Model1, Scale::Paper, false, 0);
        assert_eq!(paper.cnn.epochs, 20);
        assert_eq!(paper.grid.total_windows, 93_240);
        assert_eq!("Paper".parse::<Scale>().unwrap(), Scale::Paper);
        assert!("huge".parse::<Scale>().is_err());
    }

    #[test]
    fn reproduce_order() {
        let slugs: Vec<String> = reproduce_configs(Scale::Desk, true, 0).unwrap().iter().map(|c| c.slug()).collect();
        assert_eq!(slugs, ["gateway_model1", "gateway_model2", "llo_model1", "llo_model2"]);
    }

    #[test]
    fn tiny_experiment_writes_identical_artifacts_twice() {
        let cfg = tiny(InterferenceModel::Model1);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut lines = Vec::new();
        let ra = run_experiment(&cfg, Some(a.path()), &mut |l| lines.push(l.to_string())).unwrap();
        let rb = run_experiment(&cfg, Some(b.path()), &mut |_| {}).unwrap();
        assert_eq!(ra, rb);
        assert!(lines.iter().any(|l| l.contains("epoch 2")));
        assert_eq!(ra.training_log.epochs.len(), 2);
        for f in [
            "resolved_config.json",
            "dataset/manifest.jsonl",
            "dataset/values.f64le",
            "dataset/resolved_config.json",
            "dtree/model.json",
            "dtree/metrics.json",
            "dtree/resolved_config.json",
            "cnn/model.bin",
            "cnn/metrics.json",
            "cnn/training_log.json",
            "cnn/confusion.svg",
        ] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
        let saved: ExperimentConfig =
            serde_json::from_str(&fs::read_to_string(a.path().join(RESOLVED_CONFIG_FILE)).unwrap()).unwrap();
        assert_eq!(saved, cfg);
        let tree = DtreeModel::load(&a.path().join("dtree/model.json")).unwrap();
        assert_eq!(tree.tree.depth(), ra.tree_depth);
        CnnModel::load(&a.path().join("cnn/model.bin")).unwrap();
    }

    #[test]
    fn summary_format() {
        let rows = vec![SummaryRow {
            scenario: "llo".into(),
            model: "model2".into(),
            learner: "cnn".into(),
            accuracy: 0.975,
        }];
        assert_eq!(summary_csv(&rows), "scenario,model,learner,accuracy\nllo,model2,cnn,0.975000\n");
    }
}
