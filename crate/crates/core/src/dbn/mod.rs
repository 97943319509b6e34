//! Deep belief network: Bernoulli RBMs trained with one-step contrastive
//! divergence, stacked greedily, then fine-tuned end to end as a sigmoid
//! classifier with a softmax head.

mod classifier;
mod dense;
mod rbm;

pub use classifier::{argmax, evaluate_accuracy, fine_tune, Accuracy, DbnClassifier, FineTuned, Gradients};
pub use dense::sigmoid;
pub use rbm::{cd1_update, pretrain, train_rbm, Direction, Pretrained, Rbm, RbmVelocity, TrainConfig};
