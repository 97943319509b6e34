use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{extract_features, FEATURE_DIM};
use super::signals::{synth_capture, SignalClass, MIN_CAPTURE_SAMPLES};
use crate::error::{Error, Result};
use crate::format::{self, FileKind};
use crate::rng::RngStream;

/// One labeled spectrum observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    pub features: Vec<f64>,
    pub label: SignalClass,
    pub snr_db: f64,
}

/// Frames stored column-wise: features as an `n x 256` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub features: Array2<f64>,
    pub labels: Vec<SignalClass>,
    pub snr_db: Vec<f64>,
}

impl FrameSet {
    pub fn from_frames(frames: &[SpectrumFrame]) -> Result<Self> {
        let mut features = Array2::zeros((frames.len(), FEATURE_DIM));
        for (mut row, f) in features.rows_mut().into_iter().zip(frames) {
            if f.features.len() != FEATURE_DIM {
                return Err(Error::DimensionMismatch(format!("frame has {} features", f.features.len())));
            }
            row.iter_mut().zip(&f.features).for_each(|(d, v)| *d = *v);
        }
        Ok(Self {
            features,
            labels: frames.iter().map(|f| f.label).collect(),
            snr_db: frames.iter().map(|f| f.snr_db).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|c| c.index()).collect()
    }

    /// Subset at one SNR value.
    pub fn at_snr(&self, snr_db: f64) -> FrameSet {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.snr_db[i] == snr_db).collect();
        FrameSet {
            features: self.features.select(Axis(0), &idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            snr_db: idx.iter().map(|&i| self.snr_db[i]).collect(),
        }
    }

    /// Distinct SNR values in ascending order.
    pub fn snr_values(&self) -> Vec<f64> {
        let mut v = self.snr_db.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Kind-3 container: `u32` frame count, `u16` feature dimension, then per
    /// frame the features as `f32`, a `u8` label and an `f32` SNR in dB.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        format::write_header(w, FileKind::Dataset)?;
        format::write_u32(w, self.len() as u32)?;
        format::write_u16(w, FEATURE_DIM as u16)?;
        for ((row, label), snr) in self.features.rows().into_iter().zip(&self.labels).zip(&self.snr_db) {
            for &v in row {
                format::write_f32(w, v as f32)?;
            }
            format::write_u8(w, label.index() as u8)?;
            format::write_f32(w, *snr as f32)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        format::read_header(r, FileKind::Dataset)?;
        let n = format::read_u32(r)? as usize;
        let dim = format::read_u16(r)? as usize;
        if dim != FEATURE_DIM {
            return Err(Error::Format(format!("feature dimension {dim}, expected {FEATURE_DIM}")));
        }
        let mut features = Array2::zeros((n, dim));
        let mut labels = Vec::with_capacity(n);
        let mut snr_db = Vec::with_capacity(n);
        for mut row in features.rows_mut() {
            for v in row.iter_mut() {
                *v = format::read_f32(r)? as f64;
            }
            labels.push(SignalClass::from_index(format::read_u8(r)? as usize)?);
            snr_db.push(format::read_f32(r)? as f64);
        }
        Ok(Self { features, labels, snr_db })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub class: SignalClass,
    pub snr_db: f64,
    pub count: usize,
    pub split: Split,
}

/// Train/test frames plus the per-cell accounting that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: FrameSet,
    pub test: FrameSet,
    pub manifest: Vec<ManifestRow>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub snr_grid_db: Vec<f64>,
    pub frames_per_cell: usize,
    pub capture_samples: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            snr_grid_db: (-4..=4).map(|i| i as f64 * 5.0).collect(),
            frames_per_cell: 200,
            capture_samples: MIN_CAPTURE_SAMPLES,
        }
    }
}

/// Stream of cell `(class, snr index)`.
fn cell_stream(rng: RngStream, class: SignalClass, snr_idx: usize) -> RngStream {
    rng.child(((class.index() as u64) << 16) | snr_idx as u64)
}

/// Frames in the training share of a cell of `n`: 80%, rounded.
pub fn train_count(n: usize) -> usize {
    (4 * n + 2) / 5
}

/// Generate `frames_per_cell` frames for every `(class, snr)` cell and split
/// each cell 80/20 into train and test. Cells generate in parallel on their
/// own streams; the training set is shuffled once so minibatches mix classes.
pub fn build_dataset(cfg: &DatasetConfig, rng: RngStream) -> Result<Dataset> {
    if cfg.snr_grid_db.is_empty() || cfg.frames_per_cell == 0 {
        return Err(Error::InvalidArgument("need a nonempty SNR grid and >= 1 frame per cell".into()));
    }
    let cells: Vec<(SignalClass, usize, f64)> = SignalClass::ALL
        .iter()
        .flat_map(|&c| cfg.snr_grid_db.iter().enumerate().map(move |(i, &s)| (c, i, s)))
        .collect();
    let generated: Vec<Result<(Vec<SpectrumFrame>, Vec<SpectrumFrame>)>> = cells
        .par_iter()
        .map(|&(class, snr_idx, snr_db)| {
            let stream = cell_stream(rng, class, snr_idx);
            let mut frames = (0..cfg.frames_per_cell)
                .map(|f| {
                    let buf = synth_capture(class, snr_db, cfg.capture_samples, stream.child(f as u64))?;
                    Ok(SpectrumFrame { features: extract_features(&buf)?, label: class, snr_db })
                })
                .collect::<Result<Vec<_>>>()?;
            frames.shuffle(&mut stream.child(u32::MAX as u64).generator());
            let test = frames.split_off(train_count(cfg.frames_per_cell));
            Ok((frames, test))
        })
        .collect();

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut manifest = Vec::new();
    for ((class, _, snr_db), r) in cells.iter().zip(generated) {
        let (tr, te) = r?;
        manifest.push(ManifestRow { class: *class, snr_db: *snr_db, count: tr.len(), split: Split::Train });
        manifest.push(ManifestRow { class: *class, snr_db: *snr_db, count: te.len(), split: Split::Test });
        train.extend(tr);
        test.extend(te);
    }
    train.shuffle(&mut rng.child(u32::MAX as u64).generator());
    Ok(Dataset {
        train: FrameSet::from_frames(&train)?,
        test: FrameSet::from_frames(&test)?,
        manifest,
        seed: rng.seed,
    })
}

/// Manifest CSV: a `# master_seed=<seed>` comment line, then
/// `class,snr_db,count,split` rows.
pub fn write_manifest<W: Write>(w: W, manifest: &[ManifestRow], seed: u64) -> Result<()> {
    let mut w = w;
    writeln!(w, "# master_seed={seed}")?;
    let mut csv = csv::Writer::from_writer(w);
    for row in manifest {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_manifest<R: Read>(r: R) -> Result<Vec<ManifestRow>> {
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    csv.deserialize().map(|row| row.map_err(Error::from)).collect()
}
