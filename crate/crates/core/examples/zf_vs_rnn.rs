// Minimum-norm zero forcing against the peak-reducing neurodynamic precoder:
// PAPR over seeded problems with M_r = 2 users, N_t = 8 antennas, 64 subcarriers.

use airan::precoder::{rnn_precode, zf_min_norm, RnnConfig};
use airan::rng::RngStream;
use airan::waveform::{gen_channel, random_qpsk};
use ndarray::Array2;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (m_r, n_t, n_c, seeds) = (2, 8, 64, 50);
    let cfg = RnnConfig::default();
    let (mut zf_papr, mut rnn_papr, mut iters, mut power) = (vec![], vec![], vec![], vec![]);
    for seed in 0..seeds {
        let channel = gen_channel(m_r, n_t, n_c, RngStream::new(seed, 0))?;
        let s = Array2::from_shape_vec((m_r, n_c), random_qpsk(&mut RngStream::new(seed, 1).generator(), m_r * n_c))?;
        let zf = zf_min_norm(&channel, &s)?;
        let rnn = rnn_precode(&channel, &s, &cfg)?;
        assert!(rnn.zf_residual < 1e-8);
        zf_papr.push(zf.papr_db);
        rnn_papr.push(rnn.papr_db);
        iters.push(rnn.iterations() as f64);
        power.push(rnn.mean_antenna_power() / zf.mean_antenna_power());
    }
    let reduction: Vec<f64> = zf_papr.iter().zip(&rnn_papr).map(|(a, b)| a - b).collect();
    println!("over {seeds} problems:");
    println!("  median PAPR  ZF {:.2} dB, RNN {:.2} dB", median(zf_papr), median(rnn_papr));
    println!("  median PAPR reduction {:.2} dB", median(reduction));
    println!("  median iterations {:.0}, median transmit power ratio {:.4}", median(iters), median(power));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
