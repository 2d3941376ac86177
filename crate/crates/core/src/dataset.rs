//! Labeled SINR windows: grid generation, stratified splitting, on-disk
//! format and feature standardization.
//!
//! On disk a dataset is a directory holding `manifest.jsonl` (a header
//! record followed by one metadata record per window) and `values.f64le`
//! (an `N × L` row-major matrix of little-endian `f64`).

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::simulate_window;
use crate::error::{Error, Result};
use crate::interference::{InterferenceModel, InterferenceSpec};
use crate::link_budget::{PhaseAngle, ScenarioConfig};
use crate::rng::{Lane, RngStream};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_WINDOW_LENGTH: usize = 1000;
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const VALUES_FILE: &str = "values.f64le";
pub const CSV_FILE: &str = "dataset.csv";

/// Interference powers swept in every dataset, dBW.
pub const POWER_LEVELS_DBW: [f64; 7] = [-130.0, -125.0, -120.0, -115.0, -110.0, -105.0, -100.0];
/// Gate probabilities of intermittent interference.
pub const GATE_PROBABILITIES: [f64; 2] = [0.5, 0.75];
/// Six evenly spaced phases plus the phases used for the window figures.
pub const PHASE_GRID_DEG: [f64; 8] = [0.0, 60.0, 120.0, 180.0, 230.0, 240.0, 250.0, 300.0];

/// Desk-scale sizes.
pub const DESK_TRAIN_WINDOWS: usize = 3000;
pub const DESK_TEST_WINDOWS: usize = 1500;
/// Full-scale sizes, train:test = 1:5.
pub const PAPER_TRAIN_WINDOWS: usize = 15_540;
pub const PAPER_TEST_WINDOWS: usize = 77_700;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Clean,
    Interfered,
}

impl Label {
    /// Class index used by the learners: clean = 0, interfered = 1.
    pub fn class_index(self) -> usize {
        match self {
            Label::Clean => 0,
            Label::Interfered => 1,
        }
    }

    pub fn from_class_index(index: usize) -> Self {
        if index == 0 {
            Label::Clean
        } else {
            Label::Interfered
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Clean => "clean",
            Label::Interfered => "interfered",
        })
    }
}

/// Generation metadata of a window; together with the scenario in the
/// manifest it is enough to regenerate the values exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub window_id: u64,
    pub scenario: String,
    pub model: Option<InterferenceModel>,
    pub p_alpha: Option<f64>,
    pub power_dbw: Option<f64>,
    pub psi_deg: f64,
    pub seed: u64,
    pub stream_id: u64,
}

impl WindowMeta {
    pub fn interference(&self) -> Result<Option<InterferenceSpec>> {
        match (self.model, self.power_dbw, self.p_alpha) {
            (Some(model), Some(power), Some(p)) => InterferenceSpec::new(model, power, p).map(Some),
            (None, None, None) => Ok(None),
            _ => Err(Error::invalid(format!(
                "window {} has partial interference metadata",
                self.window_id
            ))),
        }
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(self.seed, self.stream_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleWindow {
    pub values: Vec<f64>,
    pub label: Label,
    pub meta: WindowMeta,
}

/// One cell of the generation grid and the number of windows it holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub label: Label,
    pub power_dbw: Option<f64>,
    pub p_alpha: Option<f64>,
    pub psi_deg: f64,
    pub count: usize,
}

impl GridCell {
    fn spec(&self, model: InterferenceModel) -> Option<InterferenceSpec> {
        match (self.power_dbw, self.p_alpha) {
            (Some(power_dbw), Some(p_alpha)) => Some(InterferenceSpec {
                model,
                power_dbw,
                p_alpha,
            }),
            _ => None,
        }
    }
}

/// What to generate for one (scenario, interference model) dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationGrid {
    pub scenario: ScenarioConfig,
    pub model: InterferenceModel,
    pub length: usize,
    pub total_windows: usize,
    /// Fraction of windows generated without interference.
    pub clean_fraction: f64,
    pub p_alphas: Vec<f64>,
    pub powers_dbw: Vec<f64>,
    pub psis_deg: Vec<f64>,
}

impl GenerationGrid {
    pub fn new(scenario: ScenarioConfig, model: InterferenceModel, length: usize, total_windows: usize) -> Self {
        Self {
            scenario,
            model,
            length,
            total_windows,
            clean_fraction: 0.5,
            p_alphas: GATE_PROBABILITIES.to_vec(),
            powers_dbw: POWER_LEVELS_DBW.to_vec(),
            psis_deg: PHASE_GRID_DEG.to_vec(),
        }
    }

    /// 3000 + 1500 windows of length `length`.
    pub fn desk(scenario: ScenarioConfig, model: InterferenceModel, length: usize) -> Self {
        Self::new(scenario, model, length, DESK_TRAIN_WINDOWS + DESK_TEST_WINDOWS)
    }

    /// 15540 + 77700 windows of length `length`.
    pub fn paper(scenario: ScenarioConfig, model: InterferenceModel, length: usize) -> Self {
        Self::new(scenario, model, length, PAPER_TRAIN_WINDOWS + PAPER_TEST_WINDOWS)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.length == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        if self.total_windows == 0 {
            return Err(Error::Empty("generation grid declares no windows"));
        }
        if !(0.0..=1.0).contains(&self.clean_fraction) {
            return Err(Error::invalid(format!(
                "clean fraction must lie in [0, 1], got {}",
                self.clean_fraction
            )));
        }
        if self.psis_deg.is_empty() {
            return Err(Error::Empty("generation grid has no phase angles"));
        }
        if self.clean_fraction < 1.0 && (self.p_alphas.is_empty() || self.powers_dbw.is_empty()) {
            return Err(Error::Empty("generation grid has no interference cells"));
        }
        for &p in &self.p_alphas {
            for &power in &self.powers_dbw {
                InterferenceSpec::new(self.model, power, p)?;
            }
        }
        Ok(())
    }

    /// Cells in generation order: clean cells by phase, then interfered
    /// cells by (power, gate probability, phase). Counts are spread evenly
    /// with the remainder going to the earliest cells.
    pub fn cells(&self) -> Vec<GridCell> {
        let n_clean = (self.total_windows as f64 * self.clean_fraction).round() as usize;
        let n_interfered = self.total_windows - n_clean;

        let clean: Vec<GridCell> = self
            .psis_deg
            .iter()
            .map(|&psi| GridCell {
                label: Label::Clean,
                power_dbw: None,
                p_alpha: None,
                psi_deg: PhaseAngle::new(psi).degrees(),
                count: 0,
            })
            .collect();
        let mut interfered = Vec::new();
        for &power in &self.powers_dbw {
            for &p in &self.p_alphas {
                for &psi in &self.psis_deg {
                    interfered.push(GridCell {
                        label: Label::Interfered,
                        power_dbw: Some(power),
                        p_alpha: Some(p),
                        psi_deg: PhaseAngle::new(psi).degrees(),
                        count: 0,
                    });
                }
            }
        }

        fn spread(cells: &mut [GridCell], total: usize) {
            if cells.is_empty() {
                return;
            }
            let base = total / cells.len();
            let extra = total % cells.len();
            for (i, cell) in cells.iter_mut().enumerate() {
                cell.count = base + usize::from(i < extra);
            }
        }

        let mut clean = clean;
        spread(&mut clean, n_clean);
        spread(&mut interfered, n_interfered);
        clean.into_iter().chain(interfered).filter(|c| c.count > 0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub length: usize,
    pub count: usize,
    pub grid: GenerationGrid,
    pub cells: Vec<GridCell>,
}

/// Window indices of each side of a split, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train_fraction_ppm: u32,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: Manifest,
    pub windows: Vec<SampleWindow>,
    pub split: Option<Split>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn length(&self) -> usize {
        self.manifest.length
    }

    fn split_ref(&self) -> Result<&Split> {
        self.split.as_ref().ok_or(Error::Empty("dataset has no train/test split"))
    }

    pub fn train(&self) -> Result<Vec<&SampleWindow>> {
        Ok(self.split_ref()?.train.iter().map(|&i| &self.windows[i]).collect())
    }

    pub fn test(&self) -> Result<Vec<&SampleWindow>> {
        Ok(self.split_ref()?.test.iter().map(|&i| &self.windows[i]).collect())
    }

    /// Re-simulates window `index` from its metadata.
    pub fn regenerate(&self, index: usize) -> Result<SampleWindow> {
        let w = self
            .windows
            .get(index)
            .ok_or_else(|| Error::invalid(format!("window index {index} out of range")))?;
        let spec = w.meta.interference()?;
        simulate_window(
            &self.manifest.grid.scenario,
            PhaseAngle::new(w.meta.psi_deg),
            spec.as_ref(),
            self.manifest.length,
            w.meta.stream(),
        )
    }

    pub fn count_by_label(&self, label: Label) -> usize {
        self.windows.iter().filter(|w| w.label == label).count()
    }
}

/// Simulates every window of the grid. Window `i` uses stream
/// `(master_seed, i)`, so the result does not depend on thread count.
pub fn generate(grid: &GenerationGrid, master_seed: u64) -> Result<Dataset> {
    grid.validate()?;
    let cells = grid.cells();
    let mut plan = Vec::with_capacity(grid.total_windows);
    for cell in &cells {
        for _ in 0..cell.count {
            plan.push(cell);
        }
    }
    let windows = plan
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            simulate_window(
                &grid.scenario,
                PhaseAngle::new(cell.psi_deg),
                cell.spec(grid.model).as_ref(),
                grid.length,
                RngStream::new(master_seed, i as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        manifest: Manifest {
            format_version: FORMAT_VERSION,
            master_seed,
            length: grid.length,
            count: windows.len(),
            grid: grid.clone(),
            cells,
        },
        windows,
        split: None,
    })
}

/// Stratum of a window: label, interference power, gate probability, phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct StratumKey {
    label: Label,
    power_bits: Option<u64>,
    p_alpha_bits: Option<u64>,
    psi_bits: u64,
}

impl StratumKey {
    fn of(w: &SampleWindow) -> Self {
        Self {
            label: w.label,
            power_bits: w.meta.power_dbw.map(f64::to_bits),
            p_alpha_bits: w.meta.p_alpha.map(f64::to_bits),
            psi_bits: w.meta.psi_deg.to_bits(),
        }
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if let Some(bits) = self.power_bits {
            write!(f, "/I={}dBW", f64::from_bits(bits))?;
        }
        if let Some(bits) = self.p_alpha_bits {
            write!(f, "/p_alpha={}", f64::from_bits(bits))?;
        }
        write!(f, "/psi={}", f64::from_bits(self.psi_bits))
    }
}

/// Stratified train/test split. Each stratum keeps at least one window on
/// each side, and per-stratum train counts are apportioned by largest
/// remainder so the total matches `round(N·fraction)` whenever the
/// one-per-side floor allows it.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<Dataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if ds.is_empty() {
        return Err(Error::Empty("dataset has no windows"));
    }
    let mut strata: BTreeMap<StratumKey, Vec<usize>> = BTreeMap::new();
    for (i, w) in ds.windows.iter().enumerate() {
        strata.entry(StratumKey::of(w)).or_default().push(i);
    }
    if let Some((key, _)) = strata.iter().find(|(_, idx)| idx.len() < 2) {
        return Err(Error::StratumTooSmall(key.to_string()));
    }

    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let quotas: Vec<f64> = sizes.iter().map(|&n| n as f64 * train_fraction).collect();
    let mut take: Vec<usize> = sizes
        .iter()
        .zip(&quotas)
        .map(|(&n, &q)| (q.floor() as usize).clamp(1, n - 1))
        .collect();
    let target = (ds.len() as f64 * train_fraction).round() as usize;

    // Order strata by descending fractional remainder, earliest first on ties.
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut total: usize = take.iter().sum();
    while total < target {
        let before = total;
        for &s in &order {
            if total == target {
                break;
            }
            if take[s] + 1 < sizes[s] {
                take[s] += 1;
                total += 1;
            }
        }
        if total == before {
            break;
        }
    }
    while total > target {
        let before = total;
        for &s in order.iter().rev() {
            if total == target {
                break;
            }
            if take[s] > 1 {
                take[s] -= 1;
                total -= 1;
            }
        }
        if total == before {
            break;
        }
    }

    let mut train = Vec::with_capacity(total);
    let mut test = Vec::with_capacity(ds.len() - total);
    for (s, indices) in strata.values().enumerate() {
        let mut shuffled = indices.clone();
        let mut rng = RngStream::new(seed, s as u64).rng(Lane::Split);
        shuffled.shuffle(&mut rng);
        train.extend_from_slice(&shuffled[..take[s]]);
        test.extend_from_slice(&shuffled[take[s]..]);
    }
    train.sort_unstable();
    test.sort_unstable();

    let mut out = ds.clone();
    out.split = Some(Split {
        train_fraction_ppm: (train_fraction * 1e6).round() as u32,
        seed,
        train,
        test,
    });
    Ok(out)
}

// one header per file, so the size gap is irrelevant
#[allow(clippy::large_enum_variant)]
#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum ManifestRecord {
    Header {
        #[serde(flatten)]
        manifest: Manifest,
        split: Option<Split>,
    },
    Window {
        #[serde(flatten)]
        meta: WindowMeta,
        label: Label,
    },
}

fn write_json_line<T: Serialize>(out: &mut impl Write, value: &T, path: &Path) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(|e| Error::io(path, e.into()))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))
}

/// Writes `manifest.jsonl` and `values.f64le` into `dir` (created if needed).
pub fn save(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let file = File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut out = BufWriter::new(file);
    let header = ManifestRecord::Header {
        manifest: ds.manifest.clone(),
        split: ds.split.clone(),
    };
    write_json_line(&mut out, &header, &manifest_path)?;
    for w in &ds.windows {
        let record = ManifestRecord::Window {
            meta: w.meta.clone(),
            label: w.label,
        };
        write_json_line(&mut out, &record, &manifest_path)?;
    }
    out.flush().map_err(|e| Error::io(&manifest_path, e))?;

    let values_path = dir.join(VALUES_FILE);
    let file = File::create(&values_path).map_err(|e| Error::io(&values_path, e))?;
    let mut out = BufWriter::new(file);
    for w in &ds.windows {
        if w.values.len() != ds.manifest.length {
            return Err(Error::Shape {
                context: "dataset save",
                expected: ds.manifest.length,
                actual: w.values.len(),
            });
        }
        for v in &w.values {
            out.write_all(&v.to_le_bytes()).map_err(|e| Error::io(&values_path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(&values_path, e))
}

pub fn load(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let malformed = |detail: String| Error::Malformed {
        what: "manifest",
        path: manifest_path.clone(),
        detail,
    };
    let file = File::open(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let mut lines = BufReader::new(file).lines();

    let first = lines
        .next()
        .ok_or_else(|| malformed("missing header record".into()))?
        .map_err(|e| Error::io(&manifest_path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&first).map_err(|e| malformed(e.to_string()))?;
    let found = raw
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| malformed("header lacks format_version".into()))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            path: manifest_path.clone(),
            expected: FORMAT_VERSION,
            found: found as u32,
        });
    }
    let (manifest, split) = match serde_json::from_value(raw).map_err(|e| malformed(e.to_string()))? {
        ManifestRecord::Header { manifest, split } => (manifest, split),
        ManifestRecord::Window { .. } => return Err(malformed("first record is not a header".into())),
    };

    let mut metas = Vec::with_capacity(manifest.count);
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(&manifest_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line).map_err(|e| malformed(format!("line {}: {e}", n + 2)))? {
            ManifestRecord::Window { meta, label } => metas.push((meta, label)),
            ManifestRecord::Header { .. } => return Err(malformed(format!("line {}: second header", n + 2))),
        }
    }
    if metas.len() != manifest.count {
        return Err(Error::Inconsistent {
            path: manifest_path,
            detail: format!(
                "header declares {} windows but {} window records follow",
                manifest.count,
                metas.len()
            ),
        });
    }

    let values_path = dir.join(VALUES_FILE);
    let bytes = fs::read(&values_path).map_err(|e| Error::io(&values_path, e))?;
    let row_bytes = manifest.length * 8;
    if row_bytes == 0 || bytes.len() % row_bytes != 0 {
        return Err(Error::TruncatedPayload {
            path: values_path,
            detail: format!(
                "{} bytes is not a whole number of {}-sample rows",
                bytes.len(),
                manifest.length
            ),
        });
    }
    let rows = bytes.len() / row_bytes;
    if rows != manifest.count {
        return Err(Error::Inconsistent {
            path: values_path,
            detail: format!("manifest declares {} windows but payload holds {rows} rows", manifest.count),
        });
    }

    let windows = metas
        .into_iter()
        .zip(bytes.chunks_exact(row_bytes))
        .map(|((meta, label), row)| SampleWindow {
            values: row
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
                .collect(),
            label,
            meta,
        })
        .collect();

    if let Some(s) = &split {
        check_split(s, manifest.count).map_err(|detail| Error::Inconsistent {
            path: manifest_path.clone(),
            detail,
        })?;
    }

    Ok(Dataset {
        manifest,
        windows,
        split,
    })
}

fn check_split(split: &Split, count: usize) -> std::result::Result<(), String> {
    let mut seen = vec![false; count];
    for &i in split.train.iter().chain(&split.test) {
        match seen.get_mut(i) {
            Some(slot) if !*slot => *slot = true,
            Some(_) => return Err(format!("window {i} appears twice in the split")),
            None => return Err(format!("split index {i} out of range")),
        }
    }
    if seen.iter().any(|s| !s) {
        return Err("split does not cover every window".into());
    }
    Ok(())
}

/// CSV export with header
/// `window_id,label,scenario,model,p_alpha,I_dbw,psi_deg,seed,v0..v{L-1}`.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut header = String::from("window_id,label,scenario,model,p_alpha,I_dbw,psi_deg,seed");
    for i in 0..ds.manifest.length {
        header.push_str(&format!(",v{i}"));
    }
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for w in &ds.windows {
        let m = &w.meta;
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            m.window_id,
            w.label,
            m.scenario,
            m.model.map(|m| m.id().to_string()).unwrap_or_else(|| "none".into()),
            opt(m.p_alpha),
            opt(m.power_dbw),
            m.psi_deg,
            m.seed
        );
        for v in &w.values {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Global z-score parameters fitted on the training windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub fn fit<'a>(windows: impl IntoIterator<Item = &'a [f64]> + Clone) -> Result<Self> {
        let mut n = 0usize;
        let mut sum = 0.0;
        for w in windows.clone() {
            n += w.len();
            sum += w.iter().sum::<f64>();
        }
        if n == 0 {
            return Err(Error::Empty("no training values to standardize"));
        }
        let mean = sum / n as f64;
        let mut ss = 0.0;
        for w in windows {
            ss += w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        }
        let std = (ss / n as f64).sqrt();
        if !std.is_finite() || std <= 0.0 {
            return Err(Error::ZeroVariance("training windows"));
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| (v - self.mean) / self.std).collect()
    }

    pub fn invert(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| v * self.std + self.mean).collect()
    }
}

/// Standardizes every window with statistics of the training split.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Standardizer)> {
    let train = ds.train()?;
    if train.is_empty() {
        return Err(Error::Empty("train split is empty"));
    }
    let stats = Standardizer::fit(train.iter().map(|w| w.values.as_slice()))?;
    let mut out = ds.clone();
    for w in &mut out.windows {
        w.values = stats.apply(&w.values);
    }
    Ok((out, stats))
}
