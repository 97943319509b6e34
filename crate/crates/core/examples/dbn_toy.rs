// Greedy RBM pretraining then backpropagation fine-tuning on a tiny
// two-class problem.

use airan::dbn::{evaluate_accuracy, fine_tune, pretrain, DbnClassifier, TrainConfig};
use airan::rng::RngStream;
use ndarray::Array2;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // two noisy prototypes over 8 binary-ish inputs
    let protos = [[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]];
    let mut g = RngStream::new(3, 0).generator();
    let n = 64;
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let data = Array2::from_shape_fn((n, 8), |(i, j)| {
        let flip = rand::Rng::random::<f64>(&mut g) < 0.1;
        let v = protos[labels[i]][j];
        if flip { 1.0 - v } else { v }
    });

    let stream = RngStream::new(3, 1);
    let pre_cfg = TrainConfig { epochs: 50, batch_size: 16, ..Default::default() };
    let pre = pretrain(&[8, 6, 4], data.view(), &pre_cfg, stream.child(0))?;
    for (l, errs) in pre.recon_errors.iter().enumerate() {
        println!("layer {l}: reconstruction error {:.3} -> {:.3}", errs[0], errs[errs.len() - 1]);
    }
    let model = DbnClassifier::from_pretrained(pre.layers, 2, &mut stream.child(1).generator())?;
    let ft_cfg = TrainConfig { epochs: 100, batch_size: 16, learning_rate: 0.2, momentum: 0.9, ..Default::default() };
    let tuned = fine_tune(&model, data.view(), &labels, &ft_cfg, stream.child(2))?;
    println!("fine-tune loss {:.3} -> {:.3}", tuned.losses[0], tuned.losses[tuned.losses.len() - 1]);
    let acc = evaluate_accuracy(&tuned.model, data.view(), &labels)?;
    println!("training accuracy {:.3}", acc.overall);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
