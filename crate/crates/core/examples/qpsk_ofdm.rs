// QPSK over OFDM through AWGN: bit error rate and PAPR of the time signal.

use airan::rng::RngStream;
use airan::waveform::{awgn, ofdm_demodulate, ofdm_modulate, papr_db, qpsk_demap, qpsk_map, SymbolGrid};
use ndarray::Array2;
use rand::Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (fft, cp, n_sym) = (128, 16, 20);
    let mut g = RngStream::new(1, 0).generator();
    let bits: Vec<u8> = (0..2 * fft * n_sym).map(|_| g.random_range(0..2u8)).collect();
    let symbols = qpsk_map(&bits)?;
    // column j holds OFDM symbol j
    let grid = SymbolGrid::full(Array2::from_shape_vec((n_sym, fft), symbols)?.reversed_axes());
    let tx = ofdm_modulate(&grid, fft, cp, 30.72e6)?;
    println!("{} samples, PAPR {:.2} dB", tx.len(), papr_db(&tx)?);

    for snr_db in [0.0, 5.0, 10.0, 20.0] {
        let rx = awgn(&tx, snr_db, RngStream::new(1, 1))?;
        let grid_rx = ofdm_demodulate(&rx, fft, cp, n_sym)?;
        let received: Vec<_> = grid_rx.symbols().t().iter().copied().collect();
        let errors = qpsk_demap(&received).iter().zip(&bits).filter(|(a, b)| a != b).count();
        println!("SNR {snr_db:>4.1} dB: BER {:.2e}", errors as f64 / bits.len() as f64);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
