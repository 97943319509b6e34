use num_complex::Complex64;

use super::signals::MIN_CAPTURE_SAMPLES;
use crate::error::{Error, Result};
use crate::waveform::{Dft, SampleBuffer};

pub const FEATURE_DIM: usize = 256;
const HOP: usize = FEATURE_DIM / 2;

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Welch power spectrum: `FEATURE_DIM`-point Hann segments with 50% overlap,
/// averaged. Bins are in natural FFT order (bin 0 is DC).
pub fn welch_psd(samples: &[Complex64]) -> Result<Vec<f64>> {
    if samples.len() < FEATURE_DIM {
        return Err(Error::InvalidArgument("buffer shorter than one Welch segment".into()));
    }
    let window = hann(FEATURE_DIM);
    let dft = Dft::new(FEATURE_DIM);
    let mut psd = vec![0.0; FEATURE_DIM];
    let mut seg = vec![Complex64::new(0.0, 0.0); FEATURE_DIM];
    let n_seg = (samples.len() - FEATURE_DIM) / HOP + 1;
    for s in 0..n_seg {
        let chunk = &samples[s * HOP..s * HOP + FEATURE_DIM];
        for ((d, x), w) in seg.iter_mut().zip(chunk).zip(&window) {
            *d = x * w;
        }
        dft.forward(&mut seg);
        psd.iter_mut().zip(&seg).for_each(|(p, v)| *p += v.norm_sqr());
    }
    psd.iter_mut().for_each(|p| *p /= n_seg as f64);
    Ok(psd)
}

/// Log-periodogram min-max normalized to `[0, 1]`. A flat spectrum (including
/// an all-zero buffer) maps to all zeros. Bins below `1e-12` of the peak are
/// floored there, so a real gain applied to the buffer cancels exactly up to
/// rounding.
pub fn extract_features(buf: &SampleBuffer) -> Result<Vec<f64>> {
    if buf.len() < MIN_CAPTURE_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "feature extraction needs >= {MIN_CAPTURE_SAMPLES} samples, got {}",
            buf.len()
        )));
    }
    let psd = welch_psd(buf.samples())?;
    let peak = psd.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(vec![0.0; FEATURE_DIM]);
    }
    let floor = peak * 1e-12;
    let db: Vec<f64> = psd.iter().map(|&p| 10.0 * p.max(floor).log10()).collect();
    let lo = db.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return Ok(vec![0.0; FEATURE_DIM]);
    }
    Ok(db.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, RngStream};

    fn buffer(samples: Vec<Complex64>) -> SampleBuffer {
        SampleBuffer::new(samples, 40e6).unwrap()
    }

    fn tone(bin: usize, n: usize) -> SampleBuffer {
        let w = 2.0 * std::f64::consts::PI * bin as f64 / FEATURE_DIM as f64;
        buffer((0..n).map(|t| Complex64::from_polar(1.0, w * t as f64)).collect())
    }

    fn argmax(v: &[f64]) -> usize {
        (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap()
    }

    #[test]
    fn tone_peaks_at_its_bin() {
        let f = extract_features(&tone(40, 2560)).unwrap();
        assert_eq!(f.len(), FEATURE_DIM);
        assert_eq!(argmax(&f), 40);
        assert_eq!(f[40], 1.0);
    }

    #[test]
    fn dc_buffer_peaks_at_zero_and_zero_buffer_is_flat() {
        let f = extract_features(&buffer(vec![Complex64::new(0.7, 0.0); 2560])).unwrap();
        assert_eq!(argmax(&f), 0);
        assert!(f.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        let z = extract_features(&buffer(vec![Complex64::new(0.0, 0.0); 2560])).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn white_noise_features_cluster() {
        let mut g = RngStream::new(9, 0).generator();
        let noise = buffer((0..2560).map(|_| complex_gaussian(&mut g, 1.0)).collect());
        let f = extract_features(&noise).unwrap();
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let var = f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / f.len() as f64;
        assert!(f.iter().all(|v| v.is_finite()));
        // Welch averaging over 19 segments keeps the log spectrum within a few
        // dB; a tone by contrast has one bin at 1 and a floor at 0.
        assert!(var < 0.05, "{var}");
        assert!((0.2..0.8).contains(&mean), "{mean}");
    }

    #[test]
    fn short_buffer_rejected() {
        assert!(extract_features(&tone(1, 2559)).is_err());
    }

    #[test]
    fn welch_of_white_noise_matches_input_power() {
        // Orthonormal DFT and a Hann window of mean square 3/8 give an average
        // bin power of 3/8 times the sample power.
        let mut g = RngStream::new(10, 0).generator();
        let x: Vec<Complex64> = (0..256 * 200).map(|_| complex_gaussian(&mut g, 2.0)).collect();
        let psd = welch_psd(&x).unwrap();
        let mean = psd.iter().sum::<f64>() / psd.len() as f64;
        assert!((mean - 0.75).abs() < 0.02, "{mean}");
    }
}
