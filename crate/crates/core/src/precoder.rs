//! Zero-forcing precoding with excess antennas.
//!
//! [`zf_min_norm`] gives the minimum-energy solution of `H_k x_k = s_k` on every
//! subcarrier. [`rnn_precode`] then walks inside the affine ZF solution set to
//! shave time-domain peaks: a recurrent neurodynamic iteration whose linear
//! update is a gradient step on a quartic-hinge peak penalty and whose output
//! stage is the affine projection back onto `{x : H_k x = s_k}`. Multi-user
//! interference stays at zero on every iterate while the peaks that would
//! drive the amplifiers into compression are pulled below a threshold.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::pa::{consumed_energy, measure_distortion, transmit, LinkChain, PaParams};
use crate::rng::RngStream;
use crate::waveform::{self, papr_db_of, ChannelGrid, Dft, SampleBuffer, SymbolGrid, RANK_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-subcarrier precoded transmit vectors and their time-domain footprint.
#[derive(Debug, Clone)]
pub struct PrecodeSolution {
    /// `N_c x N_t`; row `k` is the transmit vector `x_k`.
    pub x_grid: Array2<Complex64>,
    /// One OFDM symbol per antenna (no cyclic prefix, normalized 1 Hz rate).
    pub antenna_waveforms: Vec<SampleBuffer>,
    /// NaN for an antenna that transmits nothing.
    pub papr_per_antenna_db: Vec<f64>,
    /// PAPR over all antennas jointly: array peak over array mean power.
    pub papr_db: f64,
    /// `max_k ||H_k x_k - s_k||_inf`
    pub zf_residual: f64,
    /// Peak penalty of each accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    /// ZF residual of each accepted iterate, aligned with `objective_trace`.
    pub residual_trace: Vec<f64>,
}

impl PrecodeSolution {
    fn from_grid(x_grid: Array2<Complex64>, zf_residual: f64) -> Result<Self> {
        let waves = antenna_time_domain(&x_grid)?;
        let papr_per_antenna_db = waves.iter().map(|w| papr_db_of(w).unwrap_or(f64::NAN)).collect();
        let all: Vec<Complex64> = waves.iter().flatten().copied().collect();
        let papr_db = papr_db_of(&all)?;
        let antenna_waveforms = waves
            .into_iter()
            .map(|w| SampleBuffer::new(w, 1.0))
            .collect::<Result<_>>()?;
        Ok(Self {
            x_grid,
            antenna_waveforms,
            papr_per_antenna_db,
            papr_db,
            zf_residual,
            objective_trace: Vec::new(),
            residual_trace: Vec::new(),
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.x_grid.ncols()
    }

    pub fn iterations(&self) -> usize {
        self.objective_trace.len()
    }

    /// Mean power per sample, averaged over all antennas.
    pub fn mean_antenna_power(&self) -> f64 {
        self.x_grid.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.x_grid.len() as f64
    }

    /// Frequency-domain grid of each antenna (`N_c x 1`).
    pub fn antenna_grids(&self) -> Vec<SymbolGrid> {
        self.x_grid
            .columns()
            .into_iter()
            .map(|c| SymbolGrid::full(c.to_owned().insert_axis(ndarray::Axis(1))))
            .collect()
    }
}

fn antenna_time_domain(x_grid: &Array2<Complex64>) -> Result<Vec<Vec<Complex64>>> {
    let n_c = x_grid.nrows();
    if !n_c.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("{n_c} subcarriers is not a power of two")));
    }
    let dft = Dft::new(n_c);
    Ok(x_grid
        .columns()
        .into_iter()
        .map(|c| {
            let mut w = c.to_vec();
            dft.inverse(&mut w);
            w
        })
        .collect())
}

fn check_symbols(channel: &ChannelGrid, s_grid: &Array2<Complex64>) -> Result<()> {
    if s_grid.dim() != (channel.n_users(), channel.n_subcarriers()) {
        return Err(Error::DimensionMismatch(format!(
            "user symbols are {:?}, channel needs {} x {}",
            s_grid.dim(),
            channel.n_users(),
            channel.n_subcarriers()
        )));
    }
    Ok(())
}

fn inf_norm_residual(h: &CMatrix, x: &[Complex64], s: &[Complex64]) -> f64 {
    h.mul_vec(x).iter().zip(s).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Orthogonal projector onto `{x : H x = s}` for one subcarrier.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    h: CMatrix,
    gram: Cholesky,
}

impl AffineProjector {
    pub fn new(h: &CMatrix) -> Option<Self> {
        Cholesky::new(&h.gram(), RANK_TOL).map(|gram| Self { h: h.clone(), gram })
    }

    /// `H^H (H H^H)^-1 s`
    pub fn min_norm(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.h.adjoint_mul_vec(&self.gram.solve(s))
    }

    /// `x - H^H (H H^H)^-1 (H x - s)`
    pub fn project(&self, x: &[Complex64], s: &[Complex64]) -> Vec<Complex64> {
        let r: Vec<Complex64> = self.h.mul_vec(x).iter().zip(s).map(|(a, b)| a - b).collect();
        let d = self.min_norm(&r);
        x.iter().zip(d).map(|(a, b)| a - b).collect()
    }
}

fn projectors(channel: &ChannelGrid) -> Result<Vec<AffineProjector>> {
    channel
        .matrices()
        .iter()
        .enumerate()
        .map(|(k, h)| AffineProjector::new(h).ok_or(Error::RankDeficient { subcarrier: k }))
        .collect()
}

/// Minimum-norm zero forcing, `x_k = H_k^H (H_k H_k^H)^-1 s_k`.
///
/// `s_grid` is `M_r x N_c`: one row of symbols per user.
pub fn zf_min_norm(channel: &ChannelGrid, s_grid: &Array2<Complex64>) -> Result<PrecodeSolution> {
    check_symbols(channel, s_grid)?;
    let proj = projectors(channel)?;
    let (n_c, n_t) = (channel.n_subcarriers(), channel.n_antennas());
    let mut x_grid = Array2::from_elem((n_c, n_t), ZERO);
    let mut residual = 0.0f64;
    for (k, p) in proj.iter().enumerate() {
        let s = s_grid.column(k).to_vec();
        let x = p.min_norm(&s);
        residual = residual.max(inf_norm_residual(channel.matrix(k), &x, &s));
        x_grid.row_mut(k).iter_mut().zip(x).for_each(|(d, v)| *d = v);
    }
    PrecodeSolution::from_grid(x_grid, residual)
}

/// Project one transmit vector onto the ZF-feasible set of `(h, s)`.
pub fn project_affine_zf(x: &[Complex64], h: &CMatrix, s: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.len() != h.cols() || s.len() != h.rows() {
        return Err(Error::DimensionMismatch("projection operands disagree with H".into()));
    }
    let p = AffineProjector::new(h).ok_or(Error::RankDeficient { subcarrier: 0 })?;
    Ok(p.project(x, s))
}

/// Quartic hinge on instantaneous power, `J = sum max(0, |y|^2 - tau^2)^2`,
/// summed over every antenna and sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPenalty {
    pub tau: f64,
}

impl PeakPenalty {
    /// Penalty of time-domain samples and its gradient with respect to them,
    /// in the `d/dRe + j d/dIm` convention.
    pub fn time_domain(&self, y: &[Complex64]) -> (f64, Vec<Complex64>) {
        let t2 = self.tau * self.tau;
        let mut j = 0.0;
        let grad = y
            .iter()
            .map(|v| {
                let excess = v.norm_sqr() - t2;
                if excess > 0.0 {
                    j += excess * excess;
                    v * (4.0 * excess)
                } else {
                    ZERO
                }
            })
            .collect();
        (j, grad)
    }

    /// Penalty of the antenna waveforms generated by `x_grid` (`N_c x N_t`)
    /// and its gradient with respect to `x_grid`. The orthonormal IDFT is
    /// unitary, so the gradient pulls back through a forward DFT.
    pub fn evaluate(&self, x_grid: &Array2<Complex64>) -> Result<(f64, Array2<Complex64>)> {
        let n_c = x_grid.nrows();
        if !n_c.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("{n_c} subcarriers is not a power of two")));
        }
        let dft = Dft::new(n_c);
        let mut total = 0.0;
        let mut grad = Array2::from_elem(x_grid.dim(), ZERO);
        for (n, col) in x_grid.columns().into_iter().enumerate() {
            let mut y = col.to_vec();
            dft.inverse(&mut y);
            let (j, mut g) = self.time_domain(&y);
            total += j;
            if j > 0.0 {
                dft.forward(&mut g);
                grad.column_mut(n).iter_mut().zip(g).for_each(|(d, v)| *d = v);
            }
        }
        Ok((total, grad))
    }
}

/// Neurodynamic iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RnnConfig {
    /// Dimensionless step; the applied step is `step_size / tau^2`, which
    /// makes the iteration invariant to the overall signal scale.
    pub step_size: f64,
    pub max_iters: usize,
    /// Penalty threshold `tau` relative to the amplifier input saturation level.
    pub clip_threshold_ratio: f64,
    /// Stop once an iteration lowers the objective by less than `tol` times
    /// the initial objective.
    pub tol: f64,
    /// Saturation level above the RMS of the min-norm waveforms, dB.
    pub input_backoff_db: f64,
}

impl Default for RnnConfig {
    fn default() -> Self {
        Self {
            step_size: 0.02,
            max_iters: 500,
            clip_threshold_ratio: 10f64.powf(-1.0 / 20.0),
            tol: 1e-7,
            input_backoff_db: 7.0,
        }
    }
}

impl RnnConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step_size > 0.0
            && self.step_size.is_finite()
            && self.max_iters >= 1
            && self.clip_threshold_ratio > 0.0
            && self.clip_threshold_ratio <= 1.0
            && self.tol > 0.0
            && self.input_backoff_db.is_finite();
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid RNN config {self:?}")));
        }
        Ok(())
    }

    /// Absolute penalty threshold for waveforms of the given RMS amplitude.
    pub fn threshold(&self, rms: f64) -> f64 {
        self.clip_threshold_ratio * rms * 10f64.powf(self.input_backoff_db / 20.0)
    }
}

const MAX_CONSECUTIVE_INCREASES: usize = 5;

/// Peak-minimizing ZF precoding through the recurrent projected-gradient
/// iteration `x <- P(x - mu grad J(x))`, started from the min-norm solution.
pub fn rnn_precode(
    channel: &ChannelGrid,
    s_grid: &Array2<Complex64>,
    cfg: &RnnConfig,
) -> Result<PrecodeSolution> {
    cfg.validate()?;
    if channel.n_antennas() <= channel.n_users() {
        return Err(Error::NoExcessDof { n_antennas: channel.n_antennas(), n_users: channel.n_users() });
    }
    let start = zf_min_norm(channel, s_grid)?;
    let penalty = PeakPenalty { tau: cfg.threshold(start.mean_antenna_power().sqrt()) };
    let proj = projectors(channel)?;
    let symbols: Vec<Vec<Complex64>> = s_grid.columns().into_iter().map(|c| c.to_vec()).collect();

    let project_all = |x: &Array2<Complex64>| -> (Array2<Complex64>, f64) {
        let mut out = x.clone();
        let mut residual = 0.0f64;
        for (k, p) in proj.iter().enumerate() {
            let xk = p.project(&x.row(k).to_vec(), &symbols[k]);
            residual = residual.max(inf_norm_residual(channel.matrix(k), &xk, &symbols[k]));
            out.row_mut(k).iter_mut().zip(xk).for_each(|(d, v)| *d = v);
        }
        (out, residual)
    };

    let mut x = start.x_grid.clone();
    let (mut obj, mut grad) = penalty.evaluate(&x)?;
    let initial = obj;
    let mut objective_trace = vec![obj];
    let mut residual_trace = vec![start.zf_residual];
    let mut step = cfg.step_size / (penalty.tau * penalty.tau);
    let mut increases = 0;
    let mut residual = start.zf_residual;

    for _ in 1..cfg.max_iters {
        if obj == 0.0 {
            break;
        }
        let (candidate, cand_residual) = project_all(&(&x - &grad.mapv(|g| g * step)));
        let (cand_obj, cand_grad) = penalty.evaluate(&candidate)?;
        if cand_obj > obj {
            increases += 1;
            if increases >= MAX_CONSECUTIVE_INCREASES {
                return Err(Error::Divergence(increases));
            }
            step *= 0.5;
            continue;
        }
        increases = 0;
        let decrease = obj - cand_obj;
        x = candidate;
        obj = cand_obj;
        grad = cand_grad;
        residual = cand_residual;
        objective_trace.push(obj);
        residual_trace.push(residual);
        if decrease < cfg.tol * initial {
            break;
        }
    }

    let mut sol = PrecodeSolution::from_grid(x, residual)?;
    if sol.papr_db > start.papr_db + 1e-9 {
        // the penalty went down but the array PAPR did not; keep the start point
        let mut s = start;
        s.objective_trace = vec![initial];
        s.residual_trace = vec![s.zf_residual];
        return Ok(s);
    }
    sol.objective_trace = objective_trace;
    sol.residual_trace = residual_trace;
    Ok(sol)
}

/// Bits over energy, in Mbit/J.
pub fn mbit_per_joule(bits: f64, joules: f64) -> Result<f64> {
    if !(joules > 0.0) {
        return Err(Error::Undefined("energy efficiency with zero consumed energy".into()));
    }
    Ok(bits / joules / 1e6)
}

/// Link numerology and noise used when scoring a precoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeSetup {
    pub chain: LinkChain,
    pub noise_snr_db: f64,
}

/// Shannon bits delivered in one OFDM symbol and the energy the PA array burns
/// sending it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeBreakdown {
    pub bits: f64,
    pub joules: f64,
}

pub fn ee_breakdown(
    solution: &PrecodeSolution,
    s_grid: &Array2<Complex64>,
    channel: &ChannelGrid,
    pa: &PaParams,
    setup: &EeSetup,
    rng: RngStream,
) -> Result<EeBreakdown> {
    check_symbols(channel, s_grid)?;
    let tx = solution.antenna_grids();
    let intended: Vec<SymbolGrid> = s_grid
        .rows()
        .into_iter()
        .map(|r| SymbolGrid::full(r.to_owned().insert_axis(ndarray::Axis(1))))
        .collect();
    let report = measure_distortion(&tx, &intended, channel, pa, &setup.chain, setup.noise_snr_db, rng)?;
    let n_c = channel.n_subcarriers() as f64;
    let bits: f64 = report.per_user_sinr.iter().map(|s| n_c * (1.0 + s).log2()).sum();
    let joules: f64 = transmit(&tx, pa, &setup.chain)?
        .iter()
        .map(|(input, _)| consumed_energy(input, pa))
        .sum();
    Ok(EeBreakdown { bits, joules })
}

/// Energy efficiency in Mbit/J: sum-rate over every user and subcarrier
/// (Shannon rate at the measured per-user SINR) divided by the energy consumed
/// across all amplifiers for the same OFDM symbol.
pub fn energy_efficiency(
    solution: &PrecodeSolution,
    s_grid: &Array2<Complex64>,
    channel: &ChannelGrid,
    pa: &PaParams,
    setup: &EeSetup,
    rng: RngStream,
) -> Result<f64> {
    let b = ee_breakdown(solution, s_grid, channel, pa, setup, rng)?;
    mbit_per_joule(b.bits, b.joules)
}

/// Amplifier settings for a sweep; the saturation level follows the min-norm
/// solution of each trial through the input back-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PaSpec {
    pub gain: f64,
    pub smoothness: f64,
    pub ibo_db: f64,
    pub p_static_w: f64,
}

impl Default for PaSpec {
    fn default() -> Self {
        Self { gain: 1.0, smoothness: 2.0, ibo_db: 7.0, p_static_w: 0.0 }
    }
}

impl PaSpec {
    pub fn params_for(&self, mean_input_power: f64) -> Result<PaParams> {
        PaParams::from_backoff(self.gain, self.smoothness, self.ibo_db, mean_input_power, self.p_static_w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub antennas: Vec<usize>,
    pub users: Vec<usize>,
    pub subcarriers: usize,
    pub trials: usize,
    pub cp_len: usize,
    pub subcarrier_spacing_hz: f64,
    pub noise_snr_db: f64,
    pub pa: PaSpec,
    pub rnn: RnnConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            antennas: vec![8, 16, 32, 64],
            users: vec![2, 4],
            subcarriers: 128,
            trials: 20,
            cp_len: 0,
            subcarrier_spacing_hz: 15e3,
            noise_snr_db: 30.0,
            pa: PaSpec::default(),
            rnn: RnnConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn chain(&self) -> LinkChain {
        LinkChain {
            cp_len: self.cp_len,
            sample_rate_hz: self.subcarriers as f64 * self.subcarrier_spacing_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_t: usize,
    pub m_r: usize,
    pub trials: usize,
    pub ee_zf: f64,
    pub ee_rnn: f64,
    pub papr_zf_db: f64,
    pub papr_rnn_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepWarning {
    pub n_t: usize,
    pub m_r: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<SweepWarning>,
}

/// Outcome of one seeded sweep trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub ee_zf: f64,
    pub ee_rnn: f64,
    pub papr_zf_db: f64,
    pub papr_rnn_db: f64,
}

/// Stream of trial `t` for the `(n_t, m_r)` cell, independent of sweep order.
pub fn trial_stream(seed: u64, n_t: usize, m_r: usize, t: usize) -> RngStream {
    RngStream::new(seed, ((n_t as u64) << 40) | ((m_r as u64) << 20) | t as u64)
}

/// One trial: draw channel and user symbols, precode both ways with the same
/// PA (calibrated to the min-norm waveforms) and the same receiver noise.
pub fn run_trial(n_t: usize, m_r: usize, cfg: &SweepConfig, rng: RngStream) -> Result<TrialResult> {
    let channel = waveform::gen_channel(m_r, n_t, cfg.subcarriers, rng.child(0))?;
    let mut g = rng.child(1).generator();
    let symbols = waveform::random_qpsk(&mut g, m_r * cfg.subcarriers);
    let s_grid = Array2::from_shape_vec((m_r, cfg.subcarriers), symbols)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let zf = zf_min_norm(&channel, &s_grid)?;
    let rnn = rnn_precode(&channel, &s_grid, &cfg.rnn)?;
    let pa = cfg.pa.params_for(zf.mean_antenna_power())?;
    let setup = EeSetup { chain: cfg.chain(), noise_snr_db: cfg.noise_snr_db };
    let noise = rng.child(2);
    Ok(TrialResult {
        ee_zf: energy_efficiency(&zf, &s_grid, &channel, &pa, &setup, noise)?,
        ee_rnn: energy_efficiency(&rnn, &s_grid, &channel, &pa, &setup, noise)?,
        papr_zf_db: zf.papr_db,
        papr_rnn_db: rnn.papr_db,
    })
}

/// Average ZF and RNN precoding over `cfg.trials` seeded trials for every
/// `(N_t, M_r)` pair. Pairs without excess antennas are skipped with a warning.
/// Trials run in parallel; results are reduced in a fixed order, so the report
/// depends only on `cfg` and `seed`.
pub fn ee_sweep(cfg: &SweepConfig, seed: u64) -> Result<SweepReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    cfg.rnn.validate()?;
    let mut report = SweepReport::default();
    let mut pairs = Vec::new();
    for &m_r in &cfg.users {
        for &n_t in &cfg.antennas {
            if n_t <= m_r {
                report.warnings.push(SweepWarning {
                    n_t,
                    m_r,
                    reason: format!("N_t={n_t} leaves no excess degrees of freedom over M_r={m_r}"),
                });
            } else {
                pairs.push((n_t, m_r));
            }
        }
    }
    let cells: Vec<(usize, usize, usize)> = pairs
        .iter()
        .flat_map(|&(n_t, m_r)| (0..cfg.trials).map(move |t| (n_t, m_r, t)))
        .collect();
    let results: Vec<Result<TrialResult>> = cells
        .par_iter()
        .map(|&(n_t, m_r, t)| run_trial(n_t, m_r, cfg, trial_stream(seed, n_t, m_r, t)))
        .collect();

    for (i, &(n_t, m_r)) in pairs.iter().enumerate() {
        let chunk = &results[i * cfg.trials..(i + 1) * cfg.trials];
        if let Some(Err(e)) = chunk.iter().find(|r| r.is_err()) {
            report.warnings.push(SweepWarning { n_t, m_r, reason: e.to_string() });
            continue;
        }
        let n = cfg.trials as f64;
        let mean = |f: fn(&TrialResult) -> f64| {
            chunk.iter().map(|r| f(r.as_ref().expect("checked"))).sum::<f64>() / n
        };
        report.rows.push(SweepRow {
            n_t,
            m_r,
            trials: cfg.trials,
            ee_zf: mean(|r| r.ee_zf),
            ee_rnn: mean(|r| r.ee_rnn),
            papr_zf_db: mean(|r| r.papr_zf_db),
            papr_rnn_db: mean(|r| r.papr_rnn_db),
        });
    }
    Ok(report)
}

pub const SWEEP_CSV_HEADER: &str = "n_t,m_r,trials,ee_zf_mbit_per_j,ee_rnn_mbit_per_j,papr_zf_db,papr_rnn_db";

/// Format with nine significant digits.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-5..=15).contains(&mag) {
        format!("{:.*}", (8 - mag).max(0) as usize, v)
    } else {
        format!("{v:.8e}")
    }
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n_t,
            r.m_r,
            r.trials,
            sig9(r.ee_zf),
            sig9(r.ee_rnn),
            sig9(r.papr_zf_db),
            sig9(r.papr_rnn_db)
        ));
    }
    out
}
