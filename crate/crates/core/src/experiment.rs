//! Config-driven experiment commands. Each command is a plain function so the
//! `airan` binary stays a thin argument parser and the commands are testable.
//!
//! Configs are strict TOML: unknown keys are rejected. Every block is optional
//! and falls back to defaults, except that `sas-train` only generates a
//! dataset when a `[dataset]` block is present.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::dbn::{evaluate_accuracy, fine_tune, pretrain, DbnClassifier, TrainConfig};
use crate::error::{Error, Result};
use crate::precoder::{ee_sweep, sweep_csv, SweepConfig, SweepWarning};
use crate::rng::RngStream;
use crate::sas::{
    build_dataset, decide_spectrum, detect, read_manifest, write_manifest, DatasetConfig, FrameSet, PolicyTable,
    SignalClass, SpectrumDecision, Split, FEATURE_DIM,
};
use crate::waveform::SampleBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DbnConfig {
    pub layer_sizes: Vec<usize>,
    pub pretrain: TrainConfig,
    pub fine_tune: TrainConfig,
}

impl Default for DbnConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![FEATURE_DIM, 400, 400, 400, 400],
            pretrain: TrainConfig::default(),
            fine_tune: TrainConfig { epochs: 100, ..TrainConfig::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SasConfig {
    /// Where `train.airn`, `test.airn` and `manifest.csv` live; defaults to the output directory.
    pub dataset_dir: Option<PathBuf>,
    /// Model file; defaults to `<output_dir>/model.airn`.
    pub model: Option<PathBuf>,
    pub policy: Option<PathBuf>,
    /// One capture per policy carrier, in policy order.
    pub captures: Vec<PathBuf>,
    pub link_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub ee_sweep: SweepConfig,
    pub dataset: Option<DatasetConfig>,
    pub dbn: DbnConfig,
    pub sas: SasConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            ee_sweep: SweepConfig::default(),
            dataset: None,
            dbn: DbnConfig::default(),
            sas: SasConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().split_whitespace().collect::<Vec<_>>().join(" ")))
    }

    /// Load a config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(p) = self.sas.dataset_dir.as_mut() {
            fix(p);
        }
        if let Some(p) = self.sas.model.as_mut() {
            fix(p);
        }
        if let Some(p) = self.sas.policy.as_mut() {
            fix(p);
        }
        self.sas.captures.iter_mut().for_each(fix);
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.sas.dataset_dir.clone().unwrap_or_else(|| self.output_dir.clone())
    }

    pub fn model_path(&self) -> PathBuf {
        self.sas.model.clone().unwrap_or_else(|| self.output_dir.join("model.airn"))
    }

    fn stream(&self, id: u64) -> RngStream {
        RngStream::new(self.master_seed, id)
    }
}

const DATASET_STREAM: u64 = 1;
const PRETRAIN_STREAM: u64 = 2;
const HEAD_STREAM: u64 = 3;
const FINE_TUNE_STREAM: u64 = 4;

pub const TRAIN_FILE: &str = "train.airn";
pub const TEST_FILE: &str = "test.airn";
pub const MANIFEST_FILE: &str = "manifest.csv";

fn require(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        return Err(Error::Config(format!("{what} not found: {}", path.display())));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: PathBuf,
    pub plot_script: PathBuf,
    pub warnings: Vec<SweepWarning>,
}

/// Run the energy-efficiency sweep; writes `ee_sweep.csv` and `plot_ee_sweep.py`.
pub fn cmd_ee_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let report = ee_sweep(&cfg.ee_sweep, cfg.master_seed)?;
    let csv = cfg.output_dir.join("ee_sweep.csv");
    std::fs::write(&csv, sweep_csv(&report))?;
    let plot_script = cfg.output_dir.join("plot_ee_sweep.py");
    std::fs::write(&plot_script, EE_PLOT)?;
    Ok(SweepOutput { csv, plot_script, warnings: report.warnings })
}

/// Generate the spectrum dataset into the dataset directory.
pub fn cmd_dataset_gen(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dcfg = cfg.dataset.clone().unwrap_or_default();
    let dir = cfg.dataset_dir();
    std::fs::create_dir_all(&dir)?;
    let ds = build_dataset(&dcfg, cfg.stream(DATASET_STREAM))?;
    ds.train.save(&dir.join(TRAIN_FILE))?;
    ds.test.save(&dir.join(TEST_FILE))?;
    write_manifest(BufWriter::new(File::create(dir.join(MANIFEST_FILE))?), &ds.manifest, ds.seed)?;
    info!("dataset: {} train / {} test frames in {}", ds.train.len(), ds.test.len(), dir.display());
    Ok(dir)
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: PathBuf,
    pub log: PathBuf,
    pub recon_errors: Vec<Vec<f64>>,
    pub losses: Vec<f64>,
}

/// Pretrain and fine-tune the DBN on the training split, generating the
/// dataset first when it does not exist yet and a `[dataset]` block is given.
pub fn cmd_sas_train(cfg: &ExperimentConfig) -> Result<TrainOutput> {
    let dir = cfg.dataset_dir();
    let train_path = dir.join(TRAIN_FILE);
    if !train_path.exists() {
        if cfg.dataset.is_none() {
            return Err(Error::Config(format!(
                "dataset {} missing and no [dataset] generation block",
                train_path.display()
            )));
        }
        cmd_dataset_gen(cfg)?;
    }
    let train = FrameSet::load(&train_path)?;
    let sizes = &cfg.dbn.layer_sizes;
    if sizes.first() != Some(&FEATURE_DIM) {
        return Err(Error::Config(format!("dbn.layer_sizes must start with {FEATURE_DIM}")));
    }
    let pre = pretrain(sizes, train.features.view(), &cfg.dbn.pretrain, cfg.stream(PRETRAIN_STREAM))?;
    let model = DbnClassifier::from_pretrained(
        pre.layers,
        SignalClass::ALL.len(),
        &mut cfg.stream(HEAD_STREAM).generator(),
    )?;
    let tuned = fine_tune(
        &model,
        train.features.view(),
        &train.label_indices(),
        &cfg.dbn.fine_tune,
        cfg.stream(FINE_TUNE_STREAM),
    )?;

    std::fs::create_dir_all(&cfg.output_dir)?;
    let model_path = cfg.model_path();
    tuned.model.save(&model_path)?;
    let log = cfg.output_dir.join("training_log.csv");
    let mut w = csv::Writer::from_path(&log)?;
    w.write_record(["phase", "layer", "epoch", "value"])?;
    for (l, errs) in pre.recon_errors.iter().enumerate() {
        for (e, v) in errs.iter().enumerate() {
            w.write_record(["pretrain_recon_error", &l.to_string(), &(e + 1).to_string(), &v.to_string()])?;
        }
    }
    for (e, v) in tuned.losses.iter().enumerate() {
        w.write_record(["fine_tune_loss", "", &(e + 1).to_string(), &v.to_string()])?;
    }
    w.flush()?;
    Ok(TrainOutput { model: model_path, log, recon_errors: pre.recon_errors, losses: tuned.losses })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRow {
    pub snr_db: f64,
    pub class: SignalClass,
    pub recall: f64,
    pub overall_accuracy: f64,
}

/// Per-SNR recall and overall accuracy on a frame set.
pub fn accuracy_table(model: &DbnClassifier, frames: &FrameSet) -> Result<Vec<AccuracyRow>> {
    let mut rows = Vec::new();
    for snr in frames.snr_values() {
        let subset = frames.at_snr(snr);
        let acc = evaluate_accuracy(model, subset.features.view(), &subset.label_indices())?;
        for class in SignalClass::ALL {
            rows.push(AccuracyRow {
                snr_db: snr,
                class,
                recall: acc.per_class[class.index()],
                overall_accuracy: acc.overall,
            });
        }
    }
    Ok(rows)
}

/// Check that `frames` is exactly the held-out split the manifest describes.
pub fn verify_test_split(frames: &FrameSet, manifest: &[crate::sas::ManifestRow]) -> Result<()> {
    let mut expected: BTreeMap<(SignalClass, u64), usize> = BTreeMap::new();
    for row in manifest.iter().filter(|r| r.split == Split::Test) {
        *expected.entry((row.class, (row.snr_db as f32).to_bits() as u64)).or_default() += row.count;
    }
    let mut found: BTreeMap<(SignalClass, u64), usize> = BTreeMap::new();
    for (c, s) in frames.labels.iter().zip(&frames.snr_db) {
        *found.entry((*c, (*s as f32).to_bits() as u64)).or_default() += 1;
    }
    expected.retain(|_, n| *n > 0);
    if expected != found {
        return Err(Error::Format("evaluation frames do not match the manifest's test split".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub csv: PathBuf,
    pub plot_script: PathBuf,
    pub rows: Vec<AccuracyRow>,
}

/// Evaluate the trained model on the held-out split; writes `accuracy.csv`
/// (`snr_db,class,recall,overall_accuracy`) and `plot_accuracy.py`.
pub fn cmd_sas_eval(cfg: &ExperimentConfig) -> Result<EvalOutput> {
    let model_path = cfg.model_path();
    require(&model_path, "model")?;
    let dir = cfg.dataset_dir();
    require(&dir.join(TEST_FILE), "test set")?;
    require(&dir.join(MANIFEST_FILE), "manifest")?;
    let model = DbnClassifier::load(&model_path)?;
    let test = FrameSet::load(&dir.join(TEST_FILE))?;
    verify_test_split(&test, &read_manifest(File::open(dir.join(MANIFEST_FILE))?)?)?;
    let rows = accuracy_table(&model, &test)?;

    std::fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join("accuracy.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["snr_db", "class", "recall", "overall_accuracy"])?;
    for r in &rows {
        w.write_record([r.snr_db.to_string(), r.class.to_string(), r.recall.to_string(), r.overall_accuracy.to_string()])?;
    }
    w.flush()?;
    let plot_script = cfg.output_dir.join("plot_accuracy.py");
    std::fs::write(&plot_script, ACCURACY_PLOT)?;
    Ok(EvalOutput { csv: csv_path, plot_script, rows })
}

#[derive(Debug, Clone)]
pub struct DecideOutput {
    pub occupancy: Vec<SignalClass>,
    pub decision: SpectrumDecision,
}

impl DecideOutput {
    pub fn summary(&self) -> String {
        let occ: Vec<String> = self.occupancy.iter().enumerate().map(|(i, c)| format!("#{i}:{c}")).collect();
        let d = &self.decision;
        if d.access_granted {
            format!(
                "sensed [{}]; granted carrier {} ({} MHz) at MCS {} and {} dBm",
                occ.join(" "),
                d.carrier_index,
                d.bandwidth_hz / 1e6,
                d.mcs_index,
                d.tx_power_dbm
            )
        } else {
            format!("sensed [{}]; access denied", occ.join(" "))
        }
    }
}

/// Online access: classify one capture per carrier, then apply the policy.
pub fn cmd_sas_decide(cfg: &ExperimentConfig) -> Result<DecideOutput> {
    let model_path = cfg.model_path();
    require(&model_path, "model")?;
    let policy_path = cfg.sas.policy.clone().ok_or_else(|| Error::Config("sas.policy is required".into()))?;
    require(&policy_path, "policy table")?;
    let model = DbnClassifier::load(&model_path)?;
    let policy = PolicyTable::load(&policy_path)?;
    if cfg.sas.captures.len() != policy.carriers.len() {
        return Err(Error::Config(format!(
            "sas.captures lists {} files for {} policy carriers",
            cfg.sas.captures.len(),
            policy.carriers.len()
        )));
    }
    let occupancy = cfg
        .sas
        .captures
        .iter()
        .map(|p| {
            require(p, "capture")?;
            Ok(detect(&model, &SampleBuffer::load(p)?)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let decision = decide_spectrum(&occupancy, &policy, cfg.sas.link_snr_db)?;
    Ok(DecideOutput { occupancy, decision })
}

const EE_PLOT: &str = r#"#!/usr/bin/env python3
# Energy efficiency vs number of BS antennas, one pair of curves per user count.
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "ee_sweep.csv")
series = defaultdict(list)
with open(path) as f:
    for row in csv.DictReader(f):
        series[int(row["m_r"])].append(
            (int(row["n_t"]), float(row["ee_zf_mbit_per_j"]), float(row["ee_rnn_mbit_per_j"]))
        )
fig, ax = plt.subplots(figsize=(6, 4))
for m_r, pts in sorted(series.items()):
    pts.sort()
    n_t = [p[0] for p in pts]
    ax.plot(n_t, [p[2] for p in pts], "o-", label=f"RNN, M_r={m_r}")
    ax.plot(n_t, [p[1] for p in pts], "s--", label=f"min-norm ZF, M_r={m_r}")
ax.set_xlabel("BS antennas N_t")
ax.set_ylabel("Energy efficiency (Mbit/J)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(os.path.dirname(path), "ee_sweep.png"), dpi=150)
"#;

const ACCURACY_PLOT: &str = r#"#!/usr/bin/env python3
# Detection recall per class and overall accuracy vs SNR.
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "accuracy.csv")
recall = defaultdict(list)
overall = {}
with open(path) as f:
    for row in csv.DictReader(f):
        snr = float(row["snr_db"])
        recall[row["class"]].append((snr, float(row["recall"])))
        overall[snr] = float(row["overall_accuracy"])
fig, ax = plt.subplots(figsize=(6, 4))
for cls, pts in sorted(recall.items()):
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=cls)
snrs = sorted(overall)
ax.plot(snrs, [overall[s] for s in snrs], "k--", label="overall")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("Detection accuracy")
ax.set_ylim(0, 1.05)
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(os.path.dirname(path), "accuracy.png"), dpi=150)
"#;
