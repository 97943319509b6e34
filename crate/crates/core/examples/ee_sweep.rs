// Energy efficiency of ZF and neurodynamic precoding as the antenna array
// grows, for four users.

use airan::precoder::{ee_sweep, sweep_csv, SweepConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SweepConfig { antennas: vec![8, 16, 32], users: vec![4], trials: 4, subcarriers: 64, ..Default::default() };
    let report = ee_sweep(&cfg, 0)?;
    println!(" N_t  EE_zf (Mbit/J)  EE_rnn (Mbit/J)  PAPR_zf  PAPR_rnn");
    for r in &report.rows {
        println!(
            "{:>4}  {:>14.2}  {:>15.2}  {:>7.2}  {:>8.2}",
            r.n_t, r.ee_zf, r.ee_rnn, r.papr_zf_db, r.papr_rnn_db
        );
    }
    print!("\n{}", sweep_csv(&report));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
