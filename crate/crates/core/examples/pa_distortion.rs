// Rapp amplifier: AM/AM curve, and EVM of a precoded downlink as the input
// back-off shrinks.

use airan::pa::{measure_distortion, rapp_am_am, LinkChain, PaParams};
use airan::precoder::{zf_min_norm, PaSpec};
use airan::rng::RngStream;
use airan::waveform::{gen_channel, random_qpsk, SymbolGrid};
use ndarray::{Array2, Axis};
use num_complex::Complex64;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let pa = PaParams::new(1.0, 1.0, 2.0, 0.0)?;
    println!("|x|    |out|  (G=1, a_sat=1, p=2)");
    for r in [0.25, 0.5, 1.0, 1.5, 2.0, 4.0] {
        println!("{r:<6} {:.4}", rapp_am_am(Complex64::new(r, 0.0), &pa).norm());
    }

    let (m_r, n_t, n_c) = (2, 16, 128);
    let channel = gen_channel(m_r, n_t, n_c, RngStream::new(5, 0))?;
    let s = Array2::from_shape_vec((m_r, n_c), random_qpsk(&mut RngStream::new(5, 1).generator(), m_r * n_c))?;
    let zf = zf_min_norm(&channel, &s)?;
    let intended: Vec<SymbolGrid> = s.rows().into_iter().map(|r| SymbolGrid::full(r.to_owned().insert_axis(Axis(1)))).collect();
    let chain = LinkChain { cp_len: 0, sample_rate_hz: n_c as f64 * 15e3 };
    println!("\nIBO (dB)  EVM (%)");
    for ibo_db in [12.0, 9.0, 7.0, 5.0, 3.0, 1.0] {
        let params = PaSpec { ibo_db, ..Default::default() }.params_for(zf.mean_antenna_power())?;
        let r = measure_distortion(&zf.antenna_grids(), &intended, &channel, &params, &chain, 200.0, RngStream::new(5, 2))?;
        println!("{ibo_db:<9} {:.3}", 100.0 * r.evm_rms);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
