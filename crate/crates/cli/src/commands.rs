use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use cislunar_core::channel::simulate_trace;
use cislunar_core::cnn::{CnnModel, TrainConfig, MODEL_MAGIC};
use cislunar_core::config::ConfigFile;
use cislunar_core::dataset::{self, GenerationGrid, CSV_FILE};
use cislunar_core::dtree::{DtreeModel, TreeParams};
use cislunar_core::eval::{self, Classifier, EvalReport};
use cislunar_core::experiment::{
    self, write_json, CNN_MODEL_FILE, DTREE_MODEL_FILE, RESOLVED_CONFIG_FILE, TRAINING_LOG_FILE,
};
use cislunar_core::link_budget::snr_vs_phase_sweep;
use cislunar_core::{Error, InterferenceSpec, LinkBudget, PhaseAngle, Result, RngStream, ScenarioConfig};

use crate::args::{EvalArgs, GenerateArgs, Learner, LinkbudgetArgs, ReproduceArgs, ScenarioArgs, SimulateArgs, TrainArgs};

pub const RUN_LOG_FILE: &str = "run.log";

/// Timestamped progress log. Timestamps live only here so every other
/// artifact stays byte-reproducible.
struct RunLog {
    file: File,
    path: PathBuf,
}

impl RunLog {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let path = dir.join(RUN_LOG_FILE);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        Ok(Self { file, path })
    }

    fn line(&mut self, msg: &str) {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        eprintln!("{msg}");
        if let Err(e) = writeln!(self.file, "{}.{:03} {msg}", t.as_secs(), t.subsec_millis()) {
            eprintln!("warning: cannot write {}: {e}", self.path.display());
        }
    }
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn out_dir(out: &Option<PathBuf>, root: &Path, name: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| root.join(name))
}

fn resolve_scenario(args: &ScenarioArgs) -> Result<(ScenarioConfig, ConfigFile)> {
    let mut file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(name) = &args.scenario {
        file.preset = Some(name.clone());
    }
    Ok((file.scenario("gateway")?, file))
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

pub fn linkbudget(args: &LinkbudgetArgs) -> Result<()> {
    let (cfg, _) = resolve_scenario(&args.scenario)?;
    if args.sweep {
        let mut csv = String::from("psi_deg,mean_snr_db\n");
        for (psi, snr) in snr_vs_phase_sweep(&cfg, args.step)? {
            csv.push_str(&format!("{psi},{snr:.6}\n"));
        }
        return write_text(args.out.as_deref(), &csv);
    }
    let psi = PhaseAngle::new(args.psi);
    if psi.degrees() != args.psi {
        eprintln!("notice: psi {} deg normalized to {} deg", args.psi, psi.degrees());
    }
    print!("{}", LinkBudget::compute(&cfg, psi)?);
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let (cfg, file) = resolve_scenario(&args.scenario)?;
    let from_file = file.interference_spec()?;
    let model = match args.interference {
        Some(choice) => choice.model(),
        None => from_file.map(|s| s.model),
    };
    let spec = match model {
        None => None,
        Some(model) => {
            let power = args
                .int_power_dbw
                .or(file.int_power_dbw)
                .ok_or_else(|| Error::InvalidParameter("interference needs --int-power-dbw".into()))?;
            let p = args
                .p_alpha
                .or(file.p_alpha)
                .ok_or_else(|| Error::InvalidParameter("interference needs --p-alpha".into()))?;
            Some(InterferenceSpec::new(model, power, p)?)
        }
    };
    let trace = simulate_trace(
        &cfg,
        PhaseAngle::new(args.psi),
        spec.as_ref(),
        args.length,
        RngStream::new(args.seed, args.stream),
    )?;
    let mut csv = String::from("t,fading_power,alpha,interference_w,sinr_db\n");
    for (t, s) in trace.iter().enumerate() {
        csv.push_str(&format!(
            "{t},{},{},{},{}\n",
            s.fading_power, s.alpha, s.interference_w, s.sinr_db
        ));
    }
    write_text(args.out.as_deref(), &csv)
}

#[derive(Serialize)]
struct GenerateConfig<'a> {
    seed: u64,
    train_fraction: f64,
    grid: &'a GenerationGrid,
}

pub fn generate(args: &GenerateArgs, root: &Path) -> Result<()> {
    let (cfg, file) = resolve_scenario(&args.scenario)?;
    let mut grid = match args.windows {
        Some(n) => GenerationGrid::new(cfg, args.model, args.length, n),
        None => GenerationGrid::desk(cfg, args.model, args.length),
    };
    if let Some(v) = &args.p_alpha {
        grid.p_alphas = v.clone();
    }
    if let Some(v) = &args.int_power_dbw {
        grid.powers_dbw = v.clone();
    }
    if let Some(v) = &args.psi {
        grid.psis_deg = v.clone();
    }
    if let Some(f) = args.clean_fraction {
        grid.clean_fraction = f;
    }
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let out = out_dir(&args.out, root, "generate");
    let mut log = RunLog::create(&out)?;
    log.line(&format!(
        "generating {} windows ({} / {}, L = {}) with seed {seed}",
        grid.total_windows, grid.scenario.name, grid.model, grid.length
    ));
    let ds = dataset::split(&dataset::generate(&grid, seed)?, args.train_fraction, seed)?;
    dataset::save(&ds, &out)?;
    if args.csv {
        dataset::write_csv(&ds, &out.join(CSV_FILE))?;
    }
    write_json(
        &out.join(RESOLVED_CONFIG_FILE),
        &GenerateConfig {
            seed,
            train_fraction: args.train_fraction,
            grid: &grid,
        },
    )?;
    log.line(&format!(
        "wrote {} windows ({} train / {} test) to {}",
        ds.len(),
        ds.train()?.len(),
        ds.test()?.len(),
        out.display()
    ));
    Ok(())
}

#[derive(Serialize)]
struct TrainConfigRecord<'a> {
    data: &'a Path,
    learner: &'static str,
    length: usize,
    tree: Option<TreeParams>,
    cnn: Option<TrainConfig>,
}

pub fn train(args: &TrainArgs, root: &Path) -> Result<()> {
    let ds = dataset::load(&args.data)?;
    if let Some(expected) = args.length {
        if expected != ds.length() {
            return Err(Error::Shape {
                context: "requested input length vs dataset window length",
                expected,
                actual: ds.length(),
            });
        }
    }
    let out = out_dir(&args.out, root, "train");
    let mut log = RunLog::create(&out)?;
    let fit_tree = matches!(args.learner, Learner::Dtree | Learner::Both);
    let fit_cnn = matches!(args.learner, Learner::Cnn | Learner::Both);
    let tree_params = TreeParams {
        max_depth: args.max_depth,
        min_samples_split: args.min_samples_split,
    };
    let cnn_config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.lr,
        seed: args.seed,
    };

    if fit_tree {
        log.line("fitting decision tree");
        let model = experiment::fit_dtree(&ds, tree_params)?;
        model.save(&out.join(DTREE_MODEL_FILE))?;
        log.line(&format!(
            "tree depth {} with {} leaves",
            model.tree.depth(),
            model.tree.leaf_count()
        ));
    }
    if fit_cnn {
        log.line(&format!("training cnn for {} epochs", cnn_config.epochs));
        let mut lines = Vec::new();
        let (model, training_log) = experiment::fit_cnn(&ds, &cnn_config, |e| {
            lines.push(format!("epoch {} loss {:.6} accuracy {:.4}", e.epoch, e.loss, e.accuracy));
            eprintln!("{}", lines.last().expect("just pushed"));
        })?;
        for l in &lines {
            log.line(l);
        }
        model.save(&out.join(CNN_MODEL_FILE))?;
        write_json(&out.join(TRAINING_LOG_FILE), &training_log)?;
    }
    write_json(
        &out.join(RESOLVED_CONFIG_FILE),
        &TrainConfigRecord {
            data: &args.data,
            learner: match args.learner {
                Learner::Dtree => "dtree",
                Learner::Cnn => "cnn",
                Learner::Both => "both",
            },
            length: ds.length(),
            tree: fit_tree.then_some(tree_params),
            cnn: fit_cnn.then_some(cnn_config),
        },
    )?;
    log.line(&format!("models written to {}", out.display()));
    Ok(())
}

enum AnyModel {
    Tree(DtreeModel),
    Cnn(Box<CnnModel>),
}

impl AnyModel {
    fn load(path: &Path) -> Result<Self> {
        let head = fs::read(path).map_err(|e| io_err(path, e))?;
        if head.starts_with(&MODEL_MAGIC) {
            Ok(AnyModel::Cnn(Box::new(CnnModel::from_bytes(&head, path)?)))
        } else {
            Ok(AnyModel::Tree(DtreeModel::load(path)?))
        }
    }

    fn classifier(&self) -> &dyn Classifier {
        match self {
            AnyModel::Tree(m) => m,
            AnyModel::Cnn(m) => m.as_ref(),
        }
    }
}

#[derive(Serialize)]
struct EvalConfigRecord<'a> {
    data: &'a Path,
    model: &'a Path,
}

pub fn evaluate(args: &EvalArgs, root: &Path) -> Result<()> {
    let ds = dataset::load(&args.data)?;
    let model = AnyModel::load(&args.model)?;
    let clf = model.classifier();
    let out = out_dir(&args.out, root, "eval");
    let mut log = RunLog::create(&out)?;
    let test = ds.test()?;
    log.line(&format!("evaluating {} on {} test windows", clf.name(), test.len()));
    let result = eval::evaluate(clf, &test)?;
    let grid = &ds.manifest.grid;
    let report = EvalReport::new(clf.name(), &grid.scenario.name, &grid.model.to_string(), &result)?;
    eval::emit_report(&report, &grid.scenario, &test, &out)?;
    write_json(
        &out.join(RESOLVED_CONFIG_FILE),
        &EvalConfigRecord {
            data: &args.data,
            model: &args.model,
        },
    )?;
    let c = report.counts;
    log.line(&format!(
        "accuracy {:.4} (tp {} fp {} fn {} tn {})",
        report.accuracy, c.tp, c.fp, c.fn_, c.tn
    ));
    println!("accuracy,{:.6}", report.accuracy);
    Ok(())
}

pub fn reproduce(args: &ReproduceArgs, root: &Path) -> Result<()> {
    let out = out_dir(&args.out, root, "reproduce");
    let mut log = RunLog::create(&out)?;
    log.line(&format!(
        "reproduce: scale {} seed {}{}",
        args.scale,
        args.seed,
        if args.fast { " (fast)" } else { "" }
    ));
    let rows = experiment::reproduce(args.scale, args.fast, args.seed, &out, &mut |l| log.line(l))?;
    print!("{}", experiment::summary_csv(&rows));
    Ok(())
}
