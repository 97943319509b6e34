//! Complex baseband primitives: QPSK, OFDM, Rayleigh channels, AWGN and PAPR.
//!
//! DFTs use orthonormal scaling in both directions (`1/sqrt(N)`), so energy is
//! preserved exactly between the time and frequency domains.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{self, FileKind};
use crate::linalg::{CMatrix, Cholesky};
use crate::rng::{complex_gaussian, RngStream};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A run of complex baseband samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl SampleBuffer {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("sample buffer must not be empty".into()));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample rate {sample_rate_hz} must be > 0")));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidArgument("sample buffer contains non-finite values".into()));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Same rate, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz)
    }

    /// Write `path` (kind 1 container of f32 I/Q pairs) and the sidecar
    /// `<path>.toml` holding the sample rate.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        format::write_header(&mut w, FileKind::SampleBuffer)?;
        format::write_u64(&mut w, self.samples.len() as u64)?;
        for s in &self.samples {
            format::write_f32(&mut w, s.re as f32)?;
            format::write_f32(&mut w, s.im as f32)?;
        }
        w.flush()?;
        let sidecar = SampleSidecar { sample_rate_hz: self.sample_rate_hz };
        let text = toml::to_string(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(sidecar_path(path), text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        format::read_header(&mut r, FileKind::SampleBuffer)?;
        let n = format::read_u64(&mut r)? as usize;
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let re = format::read_f32(&mut r)? as f64;
            let im = format::read_f32(&mut r)? as f64;
            samples.push(Complex64::new(re, im));
        }
        let text = std::fs::read_to_string(sidecar_path(path))?;
        let sidecar: SampleSidecar =
            toml::from_str(&text).map_err(|e| Error::Format(format!("sidecar: {e}")))?;
        Self::new(samples, sidecar.sample_rate_hz)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSidecar {
    sample_rate_hz: f64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".toml");
    PathBuf::from(s)
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Frequency-domain OFDM symbols: rows are subcarriers, columns OFDM symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    symbols: Array2<Complex64>,
    active_bins: Vec<usize>,
}

impl SymbolGrid {
    /// Grid with every subcarrier active.
    pub fn full(symbols: Array2<Complex64>) -> Self {
        let active_bins = (0..symbols.nrows()).collect();
        Self { symbols, active_bins }
    }

    /// Grid restricted to `active_bins`; all other rows must be exactly zero.
    pub fn with_active(symbols: Array2<Complex64>, active_bins: Vec<usize>) -> Result<Self> {
        let n_c = symbols.nrows();
        let mut sorted = active_bins.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != active_bins.len() || sorted.iter().any(|&k| k >= n_c) {
            return Err(Error::InvalidArgument("active bins must be distinct and < N_c".into()));
        }
        let mut active = vec![false; n_c];
        for &k in &sorted {
            active[k] = true;
        }
        for (k, row) in symbols.rows().into_iter().enumerate() {
            if !active[k] && row.iter().any(|v| *v != ZERO) {
                return Err(Error::InvalidArgument(format!("inactive bin {k} holds nonzero symbols")));
            }
        }
        Ok(Self { symbols, active_bins: sorted })
    }

    pub fn symbols(&self) -> &Array2<Complex64> {
        &self.symbols
    }

    pub fn active_bins(&self) -> &[usize] {
        &self.active_bins
    }

    pub fn n_subcarriers(&self) -> usize {
        self.symbols.nrows()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.ncols()
    }

    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Gray-mapped, unit-average-power QPSK. Bit pairs map to
/// `00 -> (+1+j)`, `01 -> (+1-j)`, `11 -> (-1-j)`, `10 -> (-1+j)`, over `sqrt(2)`.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("QPSK needs an even bit count, got {}", bits.len())));
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            let re = if p[0] == 0 { a } else { -a };
            let im = if p[1] == 0 { a } else { -a };
            Complex64::new(re, im)
        })
        .collect())
}

/// Nearest-point QPSK decisions, two bits per symbol.
pub fn qpsk_demap(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)])
        .collect()
}

/// `n` uniformly random QPSK symbols.
pub fn random_qpsk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let bits = crate::rng::random_bits(rng, 2 * n);
    qpsk_map(&bits).expect("even bit count")
}

/// Cached forward/inverse plans of one size with orthonormal scaling.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
    }
}

fn check_fft_size(fft_size: usize) -> Result<()> {
    if fft_size == 0 || !fft_size.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("fft_size {fft_size} is not a power of two")));
    }
    Ok(())
}

/// OFDM-modulate `grid` (bin `k` of the grid feeds IDFT input `k`) and prepend
/// a cyclic prefix to every symbol.
pub fn ofdm_modulate(
    grid: &SymbolGrid,
    fft_size: usize,
    cp_len: usize,
    sample_rate_hz: f64,
) -> Result<SampleBuffer> {
    check_fft_size(fft_size)?;
    if grid.n_subcarriers() > fft_size {
        return Err(Error::InvalidArgument(format!(
            "grid has {} subcarriers, more than fft_size {fft_size}",
            grid.n_subcarriers()
        )));
    }
    if cp_len > fft_size {
        return Err(Error::InvalidArgument("cp_len exceeds fft_size".into()));
    }
    let dft = Dft::new(fft_size);
    let mut out = Vec::with_capacity(grid.n_symbols() * (fft_size + cp_len));
    let mut scratch = vec![ZERO; fft_size];
    for col in grid.symbols().columns() {
        scratch.iter_mut().for_each(|v| *v = ZERO);
        for (s, v) in scratch.iter_mut().zip(col.iter()) {
            *s = *v;
        }
        dft.inverse(&mut scratch);
        out.extend_from_slice(&scratch[fft_size - cp_len..]);
        out.extend_from_slice(&scratch);
    }
    SampleBuffer::new(out, sample_rate_hz)
}

/// Strip cyclic prefixes and forward-DFT each symbol. All `fft_size` bins are
/// returned as active.
pub fn ofdm_demodulate(
    buf: &SampleBuffer,
    fft_size: usize,
    cp_len: usize,
    n_sym: usize,
) -> Result<SymbolGrid> {
    check_fft_size(fft_size)?;
    let sym_len = fft_size + cp_len;
    if buf.len() != n_sym * sym_len {
        return Err(Error::DimensionMismatch(format!(
            "buffer holds {} samples, expected {n_sym} x {sym_len}",
            buf.len()
        )));
    }
    let dft = Dft::new(fft_size);
    let mut grid = Array2::from_elem((fft_size, n_sym), ZERO);
    let mut scratch = vec![ZERO; fft_size];
    for (j, chunk) in buf.samples().chunks_exact(sym_len).enumerate() {
        scratch.copy_from_slice(&chunk[cp_len..]);
        dft.forward(&mut scratch);
        for (k, v) in scratch.iter().enumerate() {
            grid[(k, j)] = *v;
        }
    }
    Ok(SymbolGrid::full(grid))
}

/// Per-subcarrier flat channel matrices `H_k` (users x antennas).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    matrices: Vec<CMatrix>,
}

impl ChannelGrid {
    /// Wrap explicit matrices. All must share one shape with at least as many
    /// columns (antennas) as rows (users).
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel grid needs at least one subcarrier".into()))?;
        let (m, n) = (first.rows(), first.cols());
        if m == 0 || n < m {
            return Err(Error::InvalidArgument(format!("channel shape {m}x{n} needs N_t >= M_r >= 1")));
        }
        if matrices.iter().any(|h| h.rows() != m || h.cols() != n) {
            return Err(Error::DimensionMismatch("channel matrices differ in shape".into()));
        }
        Ok(Self { matrices })
    }

    pub fn n_users(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn n_antennas(&self) -> usize {
        self.matrices[0].cols()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, k: usize) -> &CMatrix {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }
}

/// Relative pivot tolerance on `H H^H` below which a draw is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
const CHANNEL_RETRIES: usize = 10;

/// I.i.d. Rayleigh flat-fading channel per subcarrier, unit-variance entries.
/// A subcarrier whose draw is numerically rank deficient is redrawn, at most
/// ten times.
pub fn gen_channel(
    m_users: usize,
    n_antennas: usize,
    n_subcarriers: usize,
    rng: RngStream,
) -> Result<ChannelGrid> {
    if m_users == 0 || n_antennas < m_users {
        return Err(Error::InvalidArgument(format!(
            "need n_antennas ({n_antennas}) >= m_users ({m_users}) >= 1"
        )));
    }
    if n_subcarriers == 0 {
        return Err(Error::InvalidArgument("n_subcarriers must be >= 1".into()));
    }
    let mut g = rng.generator();
    let mut matrices = Vec::with_capacity(n_subcarriers);
    for k in 0..n_subcarriers {
        let mut attempt = 0;
        loop {
            let h = CMatrix::from_fn(m_users, n_antennas, |_, _| complex_gaussian(&mut g, 1.0));
            if Cholesky::new(&h.gram(), RANK_TOL).is_some() {
                matrices.push(h);
                break;
            }
            attempt += 1;
            if attempt > CHANNEL_RETRIES {
                return Err(Error::RankDeficient { subcarrier: k });
            }
        }
    }
    ChannelGrid::new(matrices)
}

/// Add complex white Gaussian noise at `snr_db` relative to the measured
/// signal power.
pub fn awgn(buf: &SampleBuffer, snr_db: f64, rng: RngStream) -> Result<SampleBuffer> {
    let variance = buf.mean_power() / 10f64.powf(snr_db / 10.0);
    let mut g = rng.generator();
    let noisy = buf
        .samples()
        .iter()
        .map(|s| s + complex_gaussian(&mut g, variance))
        .collect();
    buf.with_samples(noisy)
}

/// Peak-to-average power ratio in dB.
pub fn papr_db(buf: &SampleBuffer) -> Result<f64> {
    papr_db_of(buf.samples())
}

pub fn papr_db_of(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("PAPR of an empty buffer".into()));
    }
    let peak = samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    let mean = mean_power(samples);
    if mean == 0.0 {
        return Err(Error::Undefined("PAPR of an all-zero buffer".into()));
    }
    Ok(10.0 * (peak / mean).log10())
}
