use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dense::{add_bias_sigmoid, column_sums, matmul, matmul_nt, matmul_tn};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Bernoulli-Bernoulli restricted Boltzmann machine. Visible and hidden units
/// couple only through `weights`; there are no intra-layer connections.
#[derive(Debug, Clone, PartialEq)]
pub struct Rbm {
    /// `n_visible x n_hidden`
    pub weights: Array2<f64>,
    pub bias_visible: Array1<f64>,
    pub bias_hidden: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// visible -> hidden
    Up,
    /// hidden -> visible
    Down,
}

impl Rbm {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            weights: Array2::zeros((n_visible, n_hidden)),
            bias_visible: Array1::zeros(n_visible),
            bias_hidden: Array1::zeros(n_hidden),
        }
    }

    /// Weights drawn from `N(0, 0.01^2)`, zero biases.
    pub fn random<R: Rng + ?Sized>(n_visible: usize, n_hidden: usize, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, 0.01).expect("valid normal");
        let mut rbm = Self::zeros(n_visible, n_hidden);
        rbm.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
        rbm
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    /// Activation probabilities of one vector: `sigmoid(W^T v + b_h)` going up,
    /// `sigmoid(W h + b_v)` going down.
    pub fn propagate(&self, input: ArrayView1<f64>, direction: Direction) -> Result<Array1<f64>> {
        let batch = input.insert_axis(ndarray::Axis(0));
        let out = match direction {
            Direction::Up => self.up(batch)?,
            Direction::Down => self.down(batch)?,
        };
        Ok(out.row(0).to_owned())
    }

    /// Hidden probabilities for a batch of visible rows.
    pub fn up(&self, v: ArrayView2<f64>) -> Result<Array2<f64>> {
        if v.ncols() != self.n_visible() {
            return Err(Error::DimensionMismatch(format!(
                "visible vectors of length {} for an RBM with {} visible units",
                v.ncols(),
                self.n_visible()
            )));
        }
        let mut h = matmul(v, self.weights.view());
        add_bias_sigmoid(&mut h, self.bias_hidden.view());
        Ok(h)
    }

    /// Visible probabilities for a batch of hidden rows.
    pub fn down(&self, h: ArrayView2<f64>) -> Result<Array2<f64>> {
        if h.ncols() != self.n_hidden() {
            return Err(Error::DimensionMismatch(format!(
                "hidden vectors of length {} for an RBM with {} hidden units",
                h.ncols(),
                self.n_hidden()
            )));
        }
        let mut v = matmul_nt(h, self.weights.view());
        add_bias_sigmoid(&mut v, self.bias_visible.view());
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Use probabilities instead of sampled hidden states (deterministic CD-1).
    pub mean_field: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, momentum: 0.5, epochs: 30, batch_size: 32, mean_field: false }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.momentum)
            && self.epochs >= 1
            && self.batch_size >= 1;
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid training config {self:?}")));
        }
        Ok(())
    }
}

/// Momentum buffers matching one RBM.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmVelocity {
    pub weights: Array2<f64>,
    pub bias_visible: Array1<f64>,
    pub bias_hidden: Array1<f64>,
}

impl RbmVelocity {
    pub fn for_rbm(rbm: &Rbm) -> Self {
        Self {
            weights: Array2::zeros(rbm.weights.dim()),
            bias_visible: Array1::zeros(rbm.n_visible()),
            bias_hidden: Array1::zeros(rbm.n_hidden()),
        }
    }
}

/// One CD-1 step on `batch` (rows are visible vectors in `[0, 1]`). Updates
/// `rbm` and `velocity` in place and returns the mean squared reconstruction
/// error `mean ||v - v'||^2`.
pub fn cd1_update<R: Rng + ?Sized>(
    rbm: &mut Rbm,
    velocity: &mut RbmVelocity,
    batch: ArrayView2<f64>,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<f64> {
    if batch.nrows() == 0 {
        return Err(Error::InvalidArgument("empty CD-1 batch".into()));
    }
    if batch.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("CD-1 batch values must lie in [0, 1]".into()));
    }
    let h_prob = rbm.up(batch)?;
    let h = if cfg.mean_field {
        h_prob.clone()
    } else {
        h_prob.mapv(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
    };
    let v_recon = rbm.down(h.view())?;
    let h_recon = rbm.up(v_recon.view())?;

    let scale = cfg.learning_rate / batch.nrows() as f64;
    let positive = matmul_tn(batch, h_prob.view());
    let negative = matmul_tn(v_recon.view(), h_recon.view());
    let dv = &batch - &v_recon;
    let dh = &h_prob - &h_recon;
    let (dbv, dbh) = (column_sums(dv.view()), column_sums(dh.view()));

    let m = cfg.momentum;
    velocity
        .weights
        .zip_mut_with(&(positive - negative), |vel, g| *vel = m * *vel + scale * g);
    velocity.bias_visible.zip_mut_with(&dbv, |vel, g| *vel = m * *vel + scale * g);
    velocity.bias_hidden.zip_mut_with(&dbh, |vel, g| *vel = m * *vel + scale * g);
    rbm.weights += &velocity.weights;
    rbm.bias_visible += &velocity.bias_visible;
    rbm.bias_hidden += &velocity.bias_hidden;

    let err: f64 = dv.rows().into_iter().map(|r| r.iter().map(|d| d * d).sum::<f64>()).sum();
    Ok(err / batch.nrows() as f64)
}

/// Run `cfg.epochs` passes of CD-1 over `data` in row order, `cfg.batch_size`
/// rows at a time. Returns the mean reconstruction error of each epoch.
pub fn train_rbm<R: Rng + ?Sized>(
    rbm: &mut Rbm,
    data: ArrayView2<f64>,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if data.nrows() == 0 {
        return Err(Error::InvalidArgument("no training data".into()));
    }
    let mut velocity = RbmVelocity::for_rbm(rbm);
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let mut total = 0.0;
        for start in (0..data.nrows()).step_by(cfg.batch_size) {
            let end = (start + cfg.batch_size).min(data.nrows());
            let batch = data.slice(ndarray::s![start..end, ..]);
            total += cd1_update(rbm, &mut velocity, batch, cfg, rng)? * (end - start) as f64;
        }
        history.push(total / data.nrows() as f64);
    }
    Ok(history)
}

/// Greedily trained RBM stack and the per-epoch reconstruction error of each layer.
#[derive(Debug, Clone)]
pub struct Pretrained {
    pub layers: Vec<Rbm>,
    pub recon_errors: Vec<Vec<f64>>,
}

/// Greedy layer-wise pretraining. Layer `l` is initialized and trained with
/// the stream `rng.child(l)`; its input is the previous layer's hidden
/// probabilities (mean field) or sampled hidden states.
pub fn pretrain(
    layer_sizes: &[usize],
    data: ArrayView2<f64>,
    cfg: &TrainConfig,
    rng: RngStream,
) -> Result<Pretrained> {
    if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
        return Err(Error::InvalidArgument(format!("layer sizes {layer_sizes:?} need >= 2 nonzero entries")));
    }
    if data.ncols() != layer_sizes[0] {
        return Err(Error::DimensionMismatch(format!(
            "data has {} features, first layer expects {}",
            data.ncols(),
            layer_sizes[0]
        )));
    }
    let mut input = data.to_owned();
    let mut layers = Vec::new();
    let mut recon_errors = Vec::new();
    for (l, pair) in layer_sizes.windows(2).enumerate() {
        let mut g = rng.child(l as u64).generator();
        let mut rbm = Rbm::random(pair[0], pair[1], &mut g);
        recon_errors.push(train_rbm(&mut rbm, input.view(), cfg, &mut g)?);
        if l + 2 < layer_sizes.len() {
            let probs = rbm.up(input.view())?;
            input = if cfg.mean_field {
                probs
            } else {
                probs.mapv(|p| if g.random::<f64>() < p { 1.0 } else { 0.0 })
            };
        }
        layers.push(rbm);
    }
    Ok(Pretrained { layers, recon_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn zero_rbm_outputs_half() {
        let rbm = Rbm::zeros(4, 3);
        let up = rbm.propagate(array![0.3, 1.0, 0.0, 0.7].view(), Direction::Up).unwrap();
        assert!(up.iter().all(|&p| p == 0.5));
        let down = rbm.propagate(array![1.0, 0.0, 1.0].view(), Direction::Down).unwrap();
        assert!(down.iter().all(|&p| p == 0.5));
        assert!(rbm.propagate(array![1.0].view(), Direction::Up).is_err());
    }

    #[test]
    fn single_weight_sigmoid() {
        let mut rbm = Rbm::zeros(1, 1);
        rbm.weights[(0, 0)] = 1.0;
        let h = rbm.propagate(array![1.0].view(), Direction::Up).unwrap();
        assert_abs_diff_eq!(h[0], 0.7310586, epsilon = 1e-7);
    }

    #[test]
    fn zero_model_zero_batch_mean_field() {
        // v = 0, h_p = 0.5, v' = 0.5, h'_p = 0.5:
        // dW = lr (0 - 0.25), db_v = lr (0 - 0.5), db_h = lr (0.5 - 0.5)
        let mut rbm = Rbm::zeros(3, 2);
        let mut vel = RbmVelocity::for_rbm(&rbm);
        let cfg = TrainConfig { learning_rate: 0.1, momentum: 0.0, mean_field: true, ..Default::default() };
        let batch = Array2::zeros((4, 3));
        let err = cd1_update(&mut rbm, &mut vel, batch.view(), &cfg, &mut RngStream::new(0, 0).generator())
            .unwrap();
        assert!(rbm.weights.iter().all(|&w| (w + 0.025).abs() < 1e-15));
        assert!(rbm.bias_visible.iter().all(|&b| (b + 0.05).abs() < 1e-15));
        assert!(rbm.bias_hidden.iter().all(|&b| b == 0.0));
        assert_abs_diff_eq!(err, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn cd1_rejects_out_of_range() {
        let mut rbm = Rbm::zeros(2, 2);
        let mut vel = RbmVelocity::for_rbm(&rbm);
        let bad = array![[0.5, 1.5]];
        let r = cd1_update(&mut rbm, &mut vel, bad.view(), &TrainConfig::default(), &mut RngStream::new(0, 0).generator());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sampled_cd1_is_seed_deterministic() {
        let data = array![[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]];
        let run = || {
            let mut g = RngStream::new(9, 0).generator();
            let mut rbm = Rbm::random(4, 3, &mut g);
            let mut vel = RbmVelocity::for_rbm(&rbm);
            cd1_update(&mut rbm, &mut vel, data.view(), &TrainConfig::default(), &mut g).unwrap();
            rbm
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn pretrain_checks_dimensions() {
        let data = Array2::zeros((4, 5));
        assert!(matches!(
            pretrain(&[4, 3], data.view(), &TrainConfig::default(), RngStream::new(0, 0)),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
