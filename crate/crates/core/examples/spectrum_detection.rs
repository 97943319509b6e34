// Train a small DBN occupancy detector on synthetic WiFi/LTE captures and
// report accuracy per SNR on the held-out split.

use airan::dbn::{fine_tune, pretrain, DbnClassifier, TrainConfig};
use airan::experiment::accuracy_table;
use airan::rng::RngStream;
use airan::sas::{build_dataset, DatasetConfig, SignalClass};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = DatasetConfig { snr_grid_db: vec![-20.0, -10.0, 0.0, 10.0], frames_per_cell: 40, ..Default::default() };
    let ds = build_dataset(&cfg, RngStream::new(11, 0))?;
    println!("{} training / {} test frames", ds.train.len(), ds.test.len());

    let pre_cfg = TrainConfig { epochs: 5, ..Default::default() };
    let pre = pretrain(&[256, 64], ds.train.features.view(), &pre_cfg, RngStream::new(11, 1))?;
    let model = DbnClassifier::from_pretrained(pre.layers, SignalClass::ALL.len(), &mut RngStream::new(11, 2).generator())?;
    let ft_cfg = TrainConfig { epochs: 40, learning_rate: 0.1, momentum: 0.9, ..Default::default() };
    let tuned = fine_tune(&model, ds.train.features.view(), &ds.train.label_indices(), &ft_cfg, RngStream::new(11, 3))?;

    let rows = accuracy_table(&tuned.model, &ds.test)?;
    println!("SNR (dB)  overall  NOISE  WIFI   LTE    BOTH");
    for chunk in rows.chunks(SignalClass::ALL.len()) {
        let r: Vec<String> = chunk.iter().map(|r| format!("{:.2}", r.recall)).collect();
        println!("{:>8}  {:>7.3}  {}", chunk[0].snr_db, chunk[0].overall_accuracy, r.join("   "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
