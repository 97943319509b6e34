//! Spectrum access: synthetic 802.11ac-like and LTE-like captures, Welch
//! spectral features, labeled datasets, DBN-based occupancy detection and the
//! rule-table access decision.

mod dataset;
mod features;
mod policy;
mod signals;

pub use dataset::{
    build_dataset, read_manifest, train_count, write_manifest, Dataset, DatasetConfig, FrameSet, ManifestRow,
    SpectrumFrame, Split,
};
pub use features::{extract_features, hann, welch_psd, FEATURE_DIM};
pub use policy::{decide_spectrum, CarrierRecord, McsThreshold, PolicyTable, SpectrumDecision, MAX_MCS_INDEX};
pub use signals::{
    synth_capture, synth_lte, synth_ofdm, synth_wifi, Numerology, SignalClass, LTE, MIN_CAPTURE_SAMPLES,
    SAMPLE_RATE_HZ, WIFI,
};

use ndarray::Array1;

use crate::dbn::{argmax, DbnClassifier};
use crate::error::Result;
use crate::waveform::SampleBuffer;

/// Classify a capture: features, then a deterministic forward pass.
pub fn detect(model: &DbnClassifier, buf: &SampleBuffer) -> Result<(SignalClass, Array1<f64>)> {
    let features = Array1::from(extract_features(buf)?);
    let probs = model.predict(features.view())?;
    Ok((SignalClass::from_index(argmax(probs.view()))?, probs))
}
