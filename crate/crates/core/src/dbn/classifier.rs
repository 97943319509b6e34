use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::dense::{add_bias, add_bias_sigmoid, column_sums, matmul, matmul_nt, matmul_tn};
use super::rbm::{Rbm, TrainConfig};
use crate::error::{Error, Result};
use crate::format::{self, FileKind};
use crate::rng::RngStream;

/// Sigmoid feed-forward stack initialized from pretrained RBMs, topped by a
/// softmax classification head.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnClassifier {
    pub layers: Vec<Rbm>,
    /// `n_top x n_classes`
    pub head_weights: Array2<f64>,
    pub head_bias: Array1<f64>,
}

impl DbnClassifier {
    pub fn new(layers: Vec<Rbm>, head_weights: Array2<f64>, head_bias: Array1<f64>) -> Result<Self> {
        let m = Self { layers, head_weights, head_bias };
        m.validate()?;
        Ok(m)
    }

    /// Attach a head with `N(0, 0.01^2)` weights to a pretrained stack.
    pub fn from_pretrained<R: Rng + ?Sized>(layers: Vec<Rbm>, n_classes: usize, rng: &mut R) -> Result<Self> {
        let n_top = layers.last().map(Rbm::n_hidden).ok_or_else(|| {
            Error::InvalidArgument("a DBN needs at least one RBM layer".into())
        })?;
        let normal = Normal::new(0.0, 0.01).expect("valid normal");
        let head = Array2::from_shape_simple_fn((n_top, n_classes), || normal.sample(rng));
        Self::new(layers, head, Array1::zeros(n_classes))
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidArgument("a DBN needs at least one RBM layer".into()));
        }
        for (l, pair) in self.layers.windows(2).enumerate() {
            if pair[0].n_hidden() != pair[1].n_visible() {
                return Err(Error::DimensionMismatch(format!("layer {l} does not chain into layer {}", l + 1)));
            }
        }
        let n_top = self.layers.last().expect("nonempty").n_hidden();
        if self.head_weights.nrows() != n_top || self.head_bias.len() != self.head_weights.ncols() {
            return Err(Error::DimensionMismatch("head does not match the top layer".into()));
        }
        if self.n_classes() < 2 {
            return Err(Error::InvalidArgument("need at least two classes".into()));
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.head_weights.ncols()
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_visible()
    }

    /// `[n_inputs, hidden sizes...]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.n_inputs()).chain(self.layers.iter().map(Rbm::n_hidden)).collect()
    }

    fn check_inputs(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::DimensionMismatch(format!(
                "feature vectors of length {} for a model expecting {}",
                x.ncols(),
                self.n_inputs()
            )));
        }
        Ok(())
    }

    /// Activations of every layer (input first) and the class probabilities.
    fn forward(&self, x: ArrayView2<f64>) -> (Vec<Array2<f64>>, Array2<f64>) {
        let mut acts = vec![x.to_owned()];
        for rbm in &self.layers {
            let mut a = matmul(acts.last().expect("nonempty").view(), rbm.weights.view());
            add_bias_sigmoid(&mut a, rbm.bias_hidden.view());
            acts.push(a);
        }
        let mut logits = matmul(acts.last().expect("nonempty").view(), self.head_weights.view());
        add_bias(&mut logits, self.head_bias.view());
        softmax_rows(&mut logits);
        (acts, logits)
    }

    /// Class probabilities for a batch of feature rows.
    pub fn predict_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_inputs(x)?;
        Ok(self.forward(x).1)
    }

    /// Class probabilities of one feature vector (deterministic, no sampling).
    pub fn predict(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.predict_batch(x.insert_axis(Axis(0)))?.row(0).to_owned())
    }

    pub fn classify_batch(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(self.predict_batch(x)?.rows().into_iter().map(|r| argmax(r)).collect())
    }

    /// Mean cross-entropy over the batch and its gradient for every parameter.
    pub fn loss_and_gradients(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, Gradients)> {
        self.check_inputs(x)?;
        self.check_labels(x, labels)?;
        let (acts, probs) = self.forward(x);
        let n = x.nrows() as f64;
        let loss = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| -probs[(i, c)].max(f64::MIN_POSITIVE).ln())
            .sum::<f64>()
            / n;

        let mut delta = probs;
        for (i, &c) in labels.iter().enumerate() {
            delta[(i, c)] -= 1.0;
        }
        delta.mapv_inplace(|d| d / n);

        let top = acts.last().expect("nonempty");
        let head_weights = matmul_tn(top.view(), delta.view());
        let head_bias = column_sums(delta.view());
        let mut back = matmul_nt(delta.view(), self.head_weights.view());

        let mut layers = Vec::with_capacity(self.layers.len());
        for (l, rbm) in self.layers.iter().enumerate().rev() {
            let out = &acts[l + 1];
            back.zip_mut_with(out, |d, a| *d *= a * (1.0 - a));
            layers.push((matmul_tn(acts[l].view(), back.view()), column_sums(back.view())));
            if l > 0 {
                back = matmul_nt(back.view(), rbm.weights.view());
            }
        }
        layers.reverse();
        Ok((loss, Gradients { layers, head_weights, head_bias }))
    }

    fn check_labels(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<()> {
        if labels.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!("{} labels for {} rows", labels.len(), x.nrows())));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= self.n_classes()) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {} classes",
                self.n_classes()
            )));
        }
        Ok(())
    }

    fn apply(&mut self, velocity: &mut Gradients, grads: &Gradients, cfg: &TrainConfig) {
        let (m, lr) = (cfg.momentum, cfg.learning_rate);
        let step = |vel: &mut f64, g: &f64| *vel = m * *vel - lr * g;
        for ((vw, vb), (gw, gb)) in velocity.layers.iter_mut().zip(&grads.layers) {
            vw.zip_mut_with(gw, step);
            vb.zip_mut_with(gb, step);
        }
        velocity.head_weights.zip_mut_with(&grads.head_weights, step);
        velocity.head_bias.zip_mut_with(&grads.head_bias, step);
        for (rbm, (vw, vb)) in self.layers.iter_mut().zip(&velocity.layers) {
            rbm.weights += vw;
            rbm.bias_hidden += vb;
        }
        self.head_weights += &velocity.head_weights;
        self.head_bias += &velocity.head_bias;
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    /// Layout after the `AIRN` kind-2 header, all little endian:
    /// `u32` RBM layer count `L`, `L + 1` `u32` layer sizes, `u32` class count,
    /// then per layer the row-major `f64` weights (`visible x hidden`), visible
    /// bias and hidden bias, and finally the head weights (`top x classes`,
    /// row-major) and head bias.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        format::write_header(w, FileKind::Model)?;
        format::write_u32(w, self.layers.len() as u32)?;
        for s in self.layer_sizes() {
            format::write_u32(w, s as u32)?;
        }
        format::write_u32(w, self.n_classes() as u32)?;
        let mut put = |a: &mut dyn Iterator<Item = &f64>| -> Result<()> {
            for &v in a {
                format::write_f64(w, v)?;
            }
            Ok(())
        };
        for rbm in &self.layers {
            put(&mut rbm.weights.iter())?;
            put(&mut rbm.bias_visible.iter())?;
            put(&mut rbm.bias_hidden.iter())?;
        }
        put(&mut self.head_weights.iter())?;
        put(&mut self.head_bias.iter())?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        format::read_header(r, FileKind::Model)?;
        let n_layers = format::read_u32(r)? as usize;
        if n_layers == 0 || n_layers > 64 {
            return Err(Error::Format(format!("implausible layer count {n_layers}")));
        }
        let sizes = (0..=n_layers).map(|_| Ok(format::read_u32(r)? as usize)).collect::<Result<Vec<_>>>()?;
        let n_classes = format::read_u32(r)? as usize;
        let mut take = |n: usize| -> Result<Vec<f64>> { (0..n).map(|_| format::read_f64(r)).collect() };
        let shape_err = |e: ndarray::ShapeError| Error::Format(e.to_string());
        let mut layers = Vec::with_capacity(n_layers);
        for pair in sizes.windows(2) {
            let weights = Array2::from_shape_vec((pair[0], pair[1]), take(pair[0] * pair[1])?).map_err(shape_err)?;
            let bias_visible = Array1::from(take(pair[0])?);
            let bias_hidden = Array1::from(take(pair[1])?);
            layers.push(Rbm { weights, bias_visible, bias_hidden });
        }
        let top = sizes[n_layers];
        let head_weights = Array2::from_shape_vec((top, n_classes), take(top * n_classes)?).map_err(shape_err)?;
        let head_bias = Array1::from(take(n_classes)?);
        Self::new(layers, head_weights, head_bias)
    }
}

/// Parameter gradients (or momentum buffers) shaped like a classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// `(weights, hidden bias)` per RBM layer.
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
    pub head_weights: Array2<f64>,
    pub head_bias: Array1<f64>,
}

impl Gradients {
    fn zeros_like(m: &DbnClassifier) -> Self {
        Self {
            layers: m
                .layers
                .iter()
                .map(|r| (Array2::zeros(r.weights.dim()), Array1::zeros(r.n_hidden())))
                .collect(),
            head_weights: Array2::zeros(m.head_weights.dim()),
            head_bias: Array1::zeros(m.n_classes()),
        }
    }
}

fn softmax_rows(x: &mut Array2<f64>) {
    for mut row in x.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

pub fn argmax(row: ArrayView1<f64>) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

#[derive(Debug, Clone)]
pub struct FineTuned {
    pub model: DbnClassifier,
    /// Mean minibatch cross-entropy of each epoch.
    pub losses: Vec<f64>,
}

/// Supervised backpropagation through the whole stack with momentum SGD.
/// Minibatch order is reshuffled every epoch from `rng`.
pub fn fine_tune(
    model: &DbnClassifier,
    data: ArrayView2<f64>,
    labels: &[usize],
    cfg: &TrainConfig,
    rng: RngStream,
) -> Result<FineTuned> {
    cfg.validate()?;
    model.check_inputs(data)?;
    model.check_labels(data, labels)?;
    if data.nrows() == 0 {
        return Err(Error::InvalidArgument("no training data".into()));
    }
    let mut g = rng.generator();
    let mut model = model.clone();
    let mut velocity = Gradients::zeros_like(&model);
    let mut order: Vec<usize> = (0..data.nrows()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut g);
        let mut total = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let x = data.select(Axis(0), idx);
            let y: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = model.loss_and_gradients(x.view(), &y)?;
            model.apply(&mut velocity, &grads, cfg);
            total += loss * idx.len() as f64;
        }
        losses.push(total / data.nrows() as f64);
    }
    Ok(FineTuned { model, losses })
}

/// Overall and per-class (recall) accuracy. A class with no samples reports
/// `NaN` recall.
#[derive(Debug, Clone, PartialEq)]
pub struct Accuracy {
    pub overall: f64,
    pub per_class: Vec<f64>,
    pub class_counts: Vec<usize>,
}

impl Accuracy {
    pub fn from_predictions(predicted: &[usize], truth: &[usize], n_classes: usize) -> Result<Self> {
        if predicted.len() != truth.len() || truth.is_empty() {
            return Err(Error::InvalidArgument("need equally many nonempty predictions and labels".into()));
        }
        let mut hits = vec![0usize; n_classes];
        let mut counts = vec![0usize; n_classes];
        for (&p, &t) in predicted.iter().zip(truth) {
            if t >= n_classes {
                return Err(Error::InvalidArgument(format!("label {t} out of range")));
            }
            counts[t] += 1;
            hits[t] += usize::from(p == t);
        }
        let correct: usize = hits.iter().sum();
        Ok(Self {
            overall: correct as f64 / truth.len() as f64,
            per_class: hits
                .iter()
                .zip(&counts)
                .map(|(&h, &c)| if c == 0 { f64::NAN } else { h as f64 / c as f64 })
                .collect(),
            class_counts: counts,
        })
    }
}

pub fn evaluate_accuracy(model: &DbnClassifier, data: ArrayView2<f64>, labels: &[usize]) -> Result<Accuracy> {
    let predicted = model.classify_batch(data)?;
    Accuracy::from_predictions(&predicted, labels, model.n_classes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tiny(seed: u64) -> DbnClassifier {
        let mut g = RngStream::new(seed, 0).generator();
        let layers = vec![Rbm::random(3, 4, &mut g), Rbm::random(4, 2, &mut g)];
        DbnClassifier::from_pretrained(layers, 3, &mut g).unwrap()
    }

    #[test]
    fn zero_head_is_uniform() {
        let mut m = tiny(0);
        m.head_weights.fill(0.0);
        let p = m.predict(array![0.2, 0.9, 0.4].view()).unwrap();
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn chain_mismatch_rejected() {
        let layers = vec![Rbm::zeros(3, 4), Rbm::zeros(5, 2)];
        assert!(DbnClassifier::new(layers, Array2::zeros((2, 2)), Array1::zeros(2)).is_err());
        assert!(DbnClassifier::new(vec![Rbm::zeros(3, 2)], Array2::zeros((2, 1)), Array1::zeros(1)).is_err());
    }

    #[test]
    fn labels_out_of_range_rejected() {
        let m = tiny(1);
        let x = array![[0.1, 0.2, 0.3]];
        let r = fine_tune(&m, x.view(), &[3], &TrainConfig::default(), RngStream::new(0, 0));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        assert!(m.predict(array![0.1].view()).is_err());
    }

    #[test]
    fn accuracy_of_constant_predictor() {
        let truth: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let acc = Accuracy::from_predictions(&vec![0; 40], &truth, 4).unwrap();
        assert_eq!(acc.overall, 0.25);
        assert_eq!(acc.per_class, vec![1.0, 0.0, 0.0, 0.0]);
        let acc = Accuracy::from_predictions(&[0, 1], &[0, 1], 3).unwrap();
        assert!(acc.per_class[2].is_nan());
    }

    #[test]
    fn model_roundtrip_bitwise() {
        let m = tiny(4);
        let mut bytes = Vec::new();
        m.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], &[b'A', b'I', b'R', b'N', 1, 0, 2, 0]);
        let back = DbnClassifier::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, m);
        let x = array![0.3, 0.6, 0.9];
        let (a, b) = (m.predict(x.view()).unwrap(), back.predict(x.view()).unwrap());
        assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}
