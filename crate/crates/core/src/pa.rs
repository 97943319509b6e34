//! Memoryless Rapp power amplifier, class-B consumption model and end-to-end
//! distortion measurement through a precoded multi-antenna link.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::waveform::{awgn, ofdm_demodulate, ofdm_modulate, ChannelGrid, SampleBuffer, SymbolGrid};

/// Amplifier parameters. Amplitudes are volts into a 1 ohm reference, so
/// `|x|^2` is watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaParams {
    /// Small-signal linear gain `G`.
    pub gain: f64,
    /// Output saturation amplitude.
    pub a_sat: f64,
    /// Rapp knee sharpness `p`.
    pub smoothness: f64,
    /// Static consumption per RF chain, watts.
    pub p_static_w: f64,
}

impl PaParams {
    pub fn new(gain: f64, a_sat: f64, smoothness: f64, p_static_w: f64) -> Result<Self> {
        let p = Self { gain, a_sat, smoothness, p_static_w };
        p.validate()?;
        Ok(p)
    }

    /// Place saturation `ibo_db` above the RMS input level:
    /// `a_sat = G * sqrt(mean_input_power) * 10^(ibo_db / 20)`.
    pub fn from_backoff(
        gain: f64,
        smoothness: f64,
        ibo_db: f64,
        mean_input_power: f64,
        p_static_w: f64,
    ) -> Result<Self> {
        let a_sat = gain * mean_input_power.sqrt() * 10f64.powf(ibo_db / 20.0);
        Self::new(gain, a_sat, smoothness, p_static_w)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.gain) || !positive(self.a_sat) || !positive(self.smoothness) {
            return Err(Error::InvalidArgument(format!(
                "PA gain, a_sat and smoothness must be finite and > 0: {self:?}"
            )));
        }
        if !(self.p_static_w >= 0.0 && self.p_static_w.is_finite()) {
            return Err(Error::InvalidArgument("p_static_w must be >= 0".into()));
        }
        Ok(())
    }

    /// Input amplitude at which the linear extrapolation reaches `a_sat`.
    pub fn input_saturation(&self) -> f64 {
        self.a_sat / self.gain
    }
}

/// Rapp AM/AM. Phase passes through unchanged.
pub fn rapp_am_am(x: Complex64, params: &PaParams) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let two_p = 2.0 * params.smoothness;
    let u = params.gain * r / params.a_sat;
    // evaluate on whichever side of the knee keeps the power term <= 1
    let out = if u <= 1.0 {
        params.gain * r / (1.0 + u.powf(two_p)).powf(1.0 / two_p)
    } else {
        params.a_sat / (1.0 + u.powf(-two_p)).powf(1.0 / two_p)
    };
    x * (out / r)
}

pub fn amplify(buf: &SampleBuffer, params: &PaParams) -> SampleBuffer {
    let out = buf.samples().iter().map(|&x| rapp_am_am(x, params)).collect();
    buf.with_samples(out).expect("amplified samples stay finite")
}

/// Energy drawn by the amplifier while transmitting `buf` (PA input), in
/// joules. Instantaneous consumption is `(4/pi) sqrt(P_out P_sat) + P_static`.
pub fn consumed_energy(buf: &SampleBuffer, params: &PaParams) -> f64 {
    let ts = 1.0 / buf.sample_rate_hz();
    let k = 4.0 / std::f64::consts::PI * params.a_sat;
    buf.samples()
        .iter()
        .map(|&x| (k * rapp_am_am(x, params).norm() + params.p_static_w) * ts)
        .sum()
}

/// Error-vector statistics of received user symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub evm_rms: f64,
    /// Linear SINR per user, averaged over every subcarrier and OFDM symbol.
    pub per_user_sinr: Vec<f64>,
}

/// OFDM numerology shared by the transmit chain and the receivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkChain {
    pub cp_len: usize,
    pub sample_rate_hz: f64,
}

/// Modulate each antenna grid and run it through the PA.
pub fn transmit(
    tx: &[SymbolGrid],
    params: &PaParams,
    chain: &LinkChain,
) -> Result<Vec<(SampleBuffer, SampleBuffer)>> {
    tx.iter()
        .map(|g| {
            let input = ofdm_modulate(g, g.n_subcarriers(), chain.cp_len, chain.sample_rate_hz)?;
            let output = amplify(&input, params);
            Ok((input, output))
        })
        .collect()
}

/// Run the whole downlink: per-antenna OFDM modulation, PA, flat channel per
/// subcarrier, receiver noise at `noise_snr_db` and OFDM demodulation. Received
/// symbols are scaled by `1/G` before comparison with `intended`.
///
/// `tx` holds one grid per antenna and `intended` one grid per user, each
/// `N_c x N_sym` with `N_c` equal to the channel's subcarrier count.
pub fn measure_distortion(
    tx: &[SymbolGrid],
    intended: &[SymbolGrid],
    channel: &ChannelGrid,
    params: &PaParams,
    chain: &LinkChain,
    noise_snr_db: f64,
    rng: RngStream,
) -> Result<DistortionReport> {
    let n_c = channel.n_subcarriers();
    if tx.len() != channel.n_antennas() || intended.len() != channel.n_users() {
        return Err(Error::DimensionMismatch(format!(
            "{} antenna grids and {} user grids for a {}x{} channel",
            tx.len(),
            intended.len(),
            channel.n_users(),
            channel.n_antennas()
        )));
    }
    let n_sym = tx.first().map(|g| g.n_symbols()).unwrap_or(0);
    if tx.iter().chain(intended).any(|g| g.n_subcarriers() != n_c || g.n_symbols() != n_sym) {
        return Err(Error::DimensionMismatch(format!("every grid must be {n_c} x {n_sym}")));
    }
    params.validate()?;

    let amplified: Vec<SymbolGrid> = transmit(tx, params, chain)?
        .into_iter()
        .map(|(_, out)| ofdm_demodulate(&out, n_c, chain.cp_len, n_sym))
        .collect::<Result<_>>()?;

    let mut err_total = 0.0;
    let mut sig_total = 0.0;
    let mut per_user_sinr = Vec::with_capacity(channel.n_users());
    for (u, want) in intended.iter().enumerate() {
        let mut rx = Array2::from_elem((n_c, n_sym), Complex64::new(0.0, 0.0));
        for k in 0..n_c {
            let h = channel.matrix(k).row(u);
            for j in 0..n_sym {
                let y: Complex64 = h.iter().zip(&amplified).map(|(a, g)| a * g.symbols()[(k, j)]).sum();
                rx[(k, j)] = y / params.gain;
            }
        }
        let rx_buf = ofdm_modulate(&SymbolGrid::full(rx), n_c, chain.cp_len, chain.sample_rate_hz)?;
        let noisy = awgn(&rx_buf, noise_snr_db, rng.child(u as u64))?;
        let got = ofdm_demodulate(&noisy, n_c, chain.cp_len, n_sym)?;
        let err: f64 = got.symbols().iter().zip(want.symbols()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let sig: f64 = want.energy();
        per_user_sinr.push(sig / err);
        err_total += err;
        sig_total += sig;
    }
    if sig_total == 0.0 {
        return Err(Error::Undefined("intended symbols carry no energy".into()));
    }
    Ok(DistortionReport { evm_rms: (err_total / sig_total).sqrt(), per_user_sinr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::complex_gaussian;
    use approx::assert_abs_diff_eq;

    fn unit() -> PaParams {
        PaParams::new(1.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn rapp_reference_points() {
        assert_eq!(rapp_am_am(Complex64::new(0.0, 0.0), &unit()), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(rapp_am_am(Complex64::new(1.0, 0.0), &unit()).norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-7);
        let sharp = PaParams::new(1.0, 1.0, 100.0, 0.0).unwrap();
        assert_abs_diff_eq!(rapp_am_am(Complex64::new(0.0, 0.5), &sharp).norm(), 0.5, epsilon = 1e-6);
        // far above saturation the large-p model is a limiter, not a collapse
        assert_abs_diff_eq!(rapp_am_am(Complex64::new(5.0, 0.0), &sharp).norm(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn rapp_keeps_phase() {
        let x = Complex64::from_polar(3.0, 1.2);
        assert_abs_diff_eq!(rapp_am_am(x, &unit()).arg(), 1.2, epsilon = 1e-12);
    }

    #[test]
    fn rapp_monotone_and_bounded() {
        for p in [0.5, 1.0, 2.0, 10.0] {
            let pa = PaParams::new(2.0, 1.5, p, 0.0).unwrap();
            let mut prev = 0.0;
            for i in 1..2000 {
                let r = i as f64 * 0.005;
                let out = rapp_am_am(Complex64::new(r, 0.0), &pa).norm();
                assert!(out <= pa.a_sat * (1.0 + 1e-15), "p={p} r={r}");
                // strict until the curve is within rounding of a_sat
                assert!(out > prev || out > pa.a_sat * (1.0 - 1e-12), "p={p} r={r}");
                prev = out;
            }
        }
    }

    #[test]
    fn amplify_linear_region_and_bounds() {
        let pa = PaParams::new(3.0, 2.0, 2.0, 0.0).unwrap();
        let mut g = RngStream::new(4, 0).generator();
        let small: Vec<_> = (0..500)
            .map(|_| {
                let z = complex_gaussian(&mut g, 1.0);
                z / z.norm() * (pa.a_sat / pa.gain / 10.0) * 0.9
            })
            .collect();
        let buf = SampleBuffer::new(small, 10.0).unwrap();
        let out = amplify(&buf, &pa);
        assert_eq!(out.sample_rate_hz(), 10.0);
        for (a, b) in out.samples().iter().zip(buf.samples()) {
            assert!((a - b * pa.gain).norm() <= 1e-3 * (b * pa.gain).norm());
        }
        let big: Vec<_> = (0..500).map(|_| complex_gaussian(&mut g, 25.0)).collect();
        let out = amplify(&SampleBuffer::new(big, 1.0).unwrap(), &pa);
        assert!(out.samples().iter().all(|v| v.norm() <= pa.a_sat * (1.0 + 1e-15)));

        let cm: Vec<_> = (0..50).map(|i| Complex64::from_polar(1.3, i as f64)).collect();
        let out = amplify(&SampleBuffer::new(cm, 1.0).unwrap(), &pa);
        let m0 = out.samples()[0].norm();
        assert!(out.samples().iter().all(|v| (v.norm() - m0).abs() < 1e-12));
    }

    #[test]
    fn energy_reference_cases() {
        let pa = PaParams::new(1.0, 0.8, 2.0, 0.0).unwrap();
        let zero = SampleBuffer::new(vec![Complex64::new(0.0, 0.0); 10], 100.0).unwrap();
        assert_eq!(consumed_energy(&zero, &pa), 0.0);

        // a hard limiter driven far into saturation emits a_sat exactly
        let lim = PaParams::new(1.0, 0.8, 1e4, 0.0).unwrap();
        let n = 40;
        let drive = SampleBuffer::new(vec![Complex64::new(0.0, 50.0); n], 100.0).unwrap();
        let e = consumed_energy(&drive, &lim);
        let ts = 0.01;
        assert_abs_diff_eq!(e, n as f64 * ts * 4.0 / std::f64::consts::PI * 0.64, epsilon = 1e-12);
        let radiated = n as f64 * ts * 0.64;
        assert_abs_diff_eq!(radiated / e, std::f64::consts::PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_monotone_in_output() {
        let pa = PaParams::new(1.0, 1.0, 2.0, 0.1).unwrap();
        let mut prev = 0.0;
        for i in 0..50 {
            let buf = SampleBuffer::new(vec![Complex64::new(i as f64 * 0.1, 0.0); 4], 1.0).unwrap();
            let e = consumed_energy(&buf, &pa);
            assert!(e >= prev && e >= 0.0);
            prev = e;
        }
    }

    #[test]
    fn measure_distortion_rejects_bad_shapes() {
        let ch = crate::waveform::gen_channel(2, 4, 8, RngStream::new(0, 0)).unwrap();
        let g = SymbolGrid::full(Array2::from_elem((8, 1), Complex64::new(0.0, 0.0)));
        let chain = LinkChain { cp_len: 0, sample_rate_hz: 1.0 };
        let r = measure_distortion(&vec![g.clone(); 3], &vec![g.clone(); 2], &ch, &unit(), &chain, 30.0, RngStream::new(0, 1));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
