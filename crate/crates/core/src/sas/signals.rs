use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, RngStream};
use crate::waveform::{awgn, ofdm_modulate, random_qpsk, SampleBuffer, SymbolGrid};

/// Capture sample rate shared by both waveform families.
pub const SAMPLE_RATE_HZ: f64 = 40e6;
/// Shortest capture the feature extractor accepts.
pub const MIN_CAPTURE_SAMPLES: usize = 2560;

/// Occupancy label, encoded as `0..=3` on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SignalClass {
    Noise = 0,
    Wifi = 1,
    Lte = 2,
    Both = 3,
}

impl SignalClass {
    pub const ALL: [SignalClass; 4] = [Self::Noise, Self::Wifi, Self::Lte, Self::Both];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL.get(i).copied().ok_or_else(|| Error::Format(format!("unknown class label {i}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Noise => "NOISE",
            Self::Wifi => "WIFI",
            Self::Lte => "LTE",
            Self::Both => "BOTH",
        }
    }
}

impl std::fmt::Display for SignalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// OFDM numerology of a synthetic signal family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerology {
    pub fft_size: usize,
    pub cp_len: usize,
    /// Active subcarriers at `+-1..=half_active`; DC stays empty.
    pub half_active: usize,
}

impl Numerology {
    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn active_bins(&self) -> Vec<usize> {
        (1..=self.half_active)
            .chain(self.fft_size - self.half_active..self.fft_size)
            .collect()
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        SAMPLE_RATE_HZ / self.fft_size as f64
    }
}

/// 802.11ac-like 20 MHz: 312.5 kHz spacing at 2x oversampling, 56 subcarriers.
pub const WIFI: Numerology = Numerology { fft_size: 128, cp_len: 32, half_active: 28 };
/// LTE-like 20 MHz scaled onto the same 40 Msps grid: 156.25 kHz spacing,
/// 116 subcarriers.
pub const LTE: Numerology = Numerology { fft_size: 256, cp_len: 64, half_active: 58 };

/// Unit-average-power QPSK OFDM.
pub fn synth_ofdm<R: Rng + ?Sized>(num: &Numerology, n_symbols: usize, rng: &mut R) -> Result<SampleBuffer> {
    if n_symbols == 0 {
        return Err(Error::InvalidArgument("need at least one OFDM symbol".into()));
    }
    let bins = num.active_bins();
    let scale = (num.fft_size as f64 / bins.len() as f64).sqrt();
    let mut grid = Array2::from_elem((num.fft_size, n_symbols), Complex64::new(0.0, 0.0));
    for j in 0..n_symbols {
        let syms = random_qpsk(rng, bins.len());
        for (&k, s) in bins.iter().zip(syms) {
            grid[(k, j)] = s * scale;
        }
    }
    let grid = SymbolGrid::with_active(grid, bins)?;
    ofdm_modulate(&grid, num.fft_size, num.cp_len, SAMPLE_RATE_HZ)
}

pub fn synth_wifi(n_symbols: usize, rng: RngStream) -> Result<SampleBuffer> {
    synth_ofdm(&WIFI, n_symbols, &mut rng.generator())
}

pub fn synth_lte(n_symbols: usize, rng: RngStream) -> Result<SampleBuffer> {
    synth_ofdm(&LTE, n_symbols, &mut rng.generator())
}

/// `duration` samples of `num`, starting at a random offset into the first symbol.
fn waveform_window(num: &Numerology, duration: usize, rng: RngStream) -> Result<Vec<Complex64>> {
    let mut g = rng.generator();
    let offset = g.random_range(0..num.symbol_len());
    let n_sym = (duration + offset).div_ceil(num.symbol_len());
    let buf = synth_ofdm(num, n_sym, &mut g)?;
    Ok(buf.samples()[offset..offset + duration].to_vec())
}

/// Baseband capture of one occupancy class. Signals have unit power and noise
/// sits `snr_db` below it; in `BOTH` each waveform carries half the signal
/// power (3 dB below). `NOISE` is unit-power noise and ignores `snr_db`.
pub fn synth_capture(class: SignalClass, snr_db: f64, duration: usize, rng: RngStream) -> Result<SampleBuffer> {
    if duration < MIN_CAPTURE_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "capture of {duration} samples is shorter than {MIN_CAPTURE_SAMPLES}"
        )));
    }
    let signal = match class {
        SignalClass::Noise => {
            let mut g = rng.child(2).generator();
            let noise = (0..duration).map(|_| complex_gaussian(&mut g, 1.0)).collect();
            return SampleBuffer::new(noise, SAMPLE_RATE_HZ);
        }
        SignalClass::Wifi => waveform_window(&WIFI, duration, rng.child(0))?,
        SignalClass::Lte => waveform_window(&LTE, duration, rng.child(1))?,
        SignalClass::Both => {
            let w = waveform_window(&WIFI, duration, rng.child(0))?;
            let l = waveform_window(&LTE, duration, rng.child(1))?;
            let a = std::f64::consts::FRAC_1_SQRT_2;
            w.iter().zip(&l).map(|(x, y)| (x + y) * a).collect()
        }
    };
    awgn(&SampleBuffer::new(signal, SAMPLE_RATE_HZ)?, snr_db, rng.child(2))
}
