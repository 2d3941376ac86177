//! Confusion matrices, derived metrics and report files.
//!
//! The positive class is [`Label::Interfered`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnn::CnnModel;
use crate::dataset::{Label, SampleWindow};
use crate::dtree::DtreeModel;
use crate::error::{Error, Result};
use crate::link_budget::{snr_vs_phase_sweep, ScenarioConfig};
use crate::svg;

pub const METRICS_FILE: &str = "metrics.json";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const BREAKDOWN_FILE: &str = "breakdown.csv";
pub const HEATMAP_FILE: &str = "confusion.svg";
pub const SINR_PLOT_FILE: &str = "sinr_windows.svg";
pub const SNR_PLOT_FILE: &str = "snr_vs_phase.svg";

/// Windows per parallel prediction task.
const EVAL_CHUNK: usize = 64;

/// Something that labels raw (unstandardized) windows.
pub trait Classifier: Sync {
    fn name(&self) -> &'static str;
    fn input_len(&self) -> usize;
    fn predict_labels(&self, windows: &[&[f64]]) -> Result<Vec<Label>>;
}

impl Classifier for DtreeModel {
    fn name(&self) -> &'static str {
        "dtree"
    }

    fn input_len(&self) -> usize {
        self.tree.n_features
    }

    fn predict_labels(&self, windows: &[&[f64]]) -> Result<Vec<Label>> {
        windows.iter().map(|w| self.predict_raw(w)).collect()
    }
}

impl Classifier for CnnModel {
    fn name(&self) -> &'static str {
        "cnn"
    }

    fn input_len(&self) -> usize {
        self.arch().input_len
    }

    fn predict_labels(&self, windows: &[&[f64]]) -> Result<Vec<Label>> {
        self.predict_batch_raw(windows)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual, predicted) {
            (Label::Interfered, Label::Interfered) => self.tp += 1,
            (Label::Clean, Label::Interfered) => self.fp += 1,
            (Label::Interfered, Label::Clean) => self.fn_ += 1,
            (Label::Clean, Label::Clean) => self.tn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut cm = Self::default();
        for (a, p) in pairs {
            cm.record(a, p);
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, other: &Self) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    /// Rows are actual (clean, interfered), columns predicted.
    pub fn rows(&self) -> [[u64; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }

    pub fn metrics(&self) -> Result<Metrics> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Empty("confusion matrix"));
        }
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        Ok(Metrics {
            accuracy: (self.tp + self.tn) as f64 / total as f64,
            precision,
            recall,
            f1,
        })
    }
}

/// `None` marks a ratio whose denominator is zero; it serializes as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Counts for one (I, p_α, ψ) cell. Clean windows have no power or gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCounts {
    pub power_dbw: Option<f64>,
    pub p_alpha: Option<f64>,
    pub psi_deg: f64,
    pub counts: ConfusionMatrix,
}

impl CellCounts {
    fn key(&self) -> (Option<f64>, Option<f64>, f64) {
        (self.power_dbw, self.p_alpha, self.psi_deg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub per_cell: Vec<CellCounts>,
    pub predictions: Vec<Label>,
}

/// Runs `model` over `windows` (in parallel, results in window order).
pub fn evaluate(model: &dyn Classifier, windows: &[&SampleWindow]) -> Result<Evaluation> {
    if windows.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    for w in windows {
        if w.values.len() != model.input_len() {
            return Err(Error::Shape {
                context: "model input length vs window length",
                expected: model.input_len(),
                actual: w.values.len(),
            });
        }
    }
    let chunks: Vec<Vec<Label>> = windows
        .par_chunks(EVAL_CHUNK)
        .map(|chunk| {
            let rows: Vec<&[f64]> = chunk.iter().map(|w| w.values.as_slice()).collect();
            model.predict_labels(&rows)
        })
        .collect::<Result<_>>()?;
    let predictions: Vec<Label> = chunks.into_iter().flatten().collect();

    let mut confusion = ConfusionMatrix::default();
    let mut per_cell: Vec<CellCounts> = Vec::new();
    for (w, &p) in windows.iter().zip(&predictions) {
        confusion.record(w.label, p);
        let key = (w.meta.power_dbw, w.meta.p_alpha, w.meta.psi_deg);
        let idx = match per_cell.iter().position(|c| c.key() == key) {
            Some(i) => i,
            None => {
                per_cell.push(CellCounts {
                    power_dbw: key.0,
                    p_alpha: key.1,
                    psi_deg: key.2,
                    counts: ConfusionMatrix::default(),
                });
                per_cell.len() - 1
            }
        };
        per_cell[idx].counts.record(w.label, p);
    }
    // clean cells first (None sorts low), then by power, gate, phase
    per_cell.sort_by(|a, b| a.key().partial_cmp(&b.key()).expect("finite cell keys"));
    Ok(Evaluation {
        confusion,
        per_cell,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub scenario: String,
    pub interference_model: String,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub counts: ConfusionMatrix,
    pub per_cell: Vec<CellCounts>,
}

impl EvalReport {
    pub fn new(model: &str, scenario: &str, interference_model: &str, eval: &Evaluation) -> Result<Self> {
        let m = eval.confusion.metrics()?;
        Ok(Self {
            model: model.to_string(),
            scenario: scenario.to_string(),
            interference_model: interference_model.to_string(),
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            counts: eval.confusion,
            per_cell: eval.per_cell.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn confusion_csv(&self) -> String {
        let [[tn, fp], [fn_, tp]] = self.counts.rows();
        format!("actual,predicted_clean,predicted_interfered\nclean,{tn},{fp}\ninterfered,{fn_},{tp}\n")
    }

    pub fn breakdown_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut s = String::from("I_dbw,p_alpha,psi_deg,tp,fp,fn,tn\n");
        for c in &self.per_cell {
            let m = &c.counts;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                opt(c.power_dbw),
                opt(c.p_alpha),
                c.psi_deg,
                m.tp,
                m.fp,
                m.fn_,
                m.tn
            );
        }
        s
    }

    pub fn heatmap_svg(&self) -> String {
        let rows = self.counts.rows();
        let title = format!(
            "{} / {} / {}: accuracy {:.2}%",
            self.model,
            self.scenario,
            self.interference_model,
            100.0 * self.accuracy
        );
        svg::heatmap(&title, &["clean", "interfered"], &rows.map(|r| r.to_vec()))
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Phases shown in the SINR window figure.
pub const PLOT_PHASES_DEG: [f64; 3] = [230.0, 240.0, 250.0];

/// SINR traces of one clean and one interfered window at each plotted phase,
/// taken from `windows` in order.
pub fn sinr_windows_svg(title: &str, windows: &[&SampleWindow]) -> String {
    let mut series = Vec::new();
    for psi in PLOT_PHASES_DEG {
        for label in [Label::Clean, Label::Interfered] {
            let Some(w) = windows.iter().find(|w| w.label == label && w.meta.psi_deg == psi) else {
                continue;
            };
            let name = match (w.meta.power_dbw, w.meta.p_alpha) {
                (Some(i), Some(p)) => format!("ψ={psi}° I={i} p={p}"),
                _ => format!("ψ={psi}° clean"),
            };
            series.push(svg::Series {
                name,
                points: w.values.iter().enumerate().map(|(t, &v)| (t as f64, v)).collect(),
            });
        }
    }
    svg::line_plot(title, "sample", "SINR (dB)", &series)
}

/// Mean SNR against lunar phase for each scenario, 1° steps.
pub fn snr_vs_phase_svg(scenarios: &[&ScenarioConfig]) -> Result<String> {
    let series = scenarios
        .iter()
        .map(|cfg| {
            Ok(svg::Series {
                name: cfg.name.clone(),
                points: snr_vs_phase_sweep(cfg, 1.0)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(svg::line_plot("Mean SNR vs lunar phase", "ψ (deg)", "SNR (dB)", &series))
}

/// Writes the metrics, CSV tables and figures for one evaluation into `dir`.
/// `examples` feeds the SINR window plot; the SNR curve uses `scenario`.
pub fn emit_report(report: &EvalReport, scenario: &ScenarioConfig, examples: &[&SampleWindow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, METRICS_FILE, &report.to_json())?;
    write(dir, CONFUSION_FILE, &report.confusion_csv())?;
    write(dir, BREAKDOWN_FILE, &report.breakdown_csv())?;
    write(dir, HEATMAP_FILE, &report.heatmap_svg())?;
    let title = format!("SINR windows, {} / {}", report.scenario, report.interference_model);
    write(dir, SINR_PLOT_FILE, &sinr_windows_svg(&title, examples))?;
    write(dir, SNR_PLOT_FILE, &snr_vs_phase_svg(&[scenario])?)
}
