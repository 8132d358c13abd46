use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{ModelParams, Trace};
use super::optim::{Optimizer, OptimizerKind};
use crate::datasets::LabeledDataset;
use crate::encoding::Encoder;
use crate::error::{Error, Result};

/// Probabilities are clamped to [ε, 1 − ε] before taking logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub steps_per_epoch: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            steps_per_epoch: 30,
            epochs: 48,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    /// Accuracy on the batches seen during the epoch, before each update.
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ModelParams,
    pub history: Vec<EpochRecord>,
    /// Mean loss of the untrained model over the samples of the first
    /// epoch; `None` when no epochs ran.
    pub initial_loss: Option<f64>,
}

pub fn bce_loss(p: f64, label: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(label * p.ln() + (1.0 - label) * (1.0 - p).ln())
}

fn check_data(model: &ModelParams, ds: &LabeledDataset, encoder: &dyn Encoder) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.word_length != encoder.word_length() {
        return Err(Error::LengthMismatch {
            expected: encoder.word_length(),
            actual: ds.word_length,
        });
    }
    if encoder.input_shape() != model.network.input_shape() {
        return Err(Error::Shape {
            layer: 0,
            kind: "input",
            detail: format!(
                "encoder produces {} but the model expects {}",
                encoder.input_shape(),
                model.network.input_shape()
            ),
        });
    }
    Ok(())
}

/// Probability of class 1 for every item, in dataset order.
pub fn predict(model: &ModelParams, ds: &LabeledDataset, encoder: &dyn Encoder) -> Result<Vec<f32>> {
    check_data(model, ds, encoder)?;
    let mut input = vec![0.0f32; encoder.input_shape().len()];
    let mut trace = Trace::default();
    ds.items
        .iter()
        .map(|(word, _)| {
            encoder.encode(word, &mut input)?;
            Ok(model.network.forward(&input, &mut trace)?[0])
        })
        .collect()
}

/// Fraction of items with (p > 0.5) == label; p = 0.5 counts as class 0.
pub fn evaluate(model: &ModelParams, ds: &LabeledDataset, encoder: &dyn Encoder) -> Result<f64> {
    let probs = predict(model, ds, encoder)?;
    let correct = probs
        .iter()
        .zip(&ds.items)
        .filter(|(&p, (_, label))| u8::from(p > 0.5) == *label)
        .count();
    Ok(correct as f64 / ds.len() as f64)
}

pub fn train(
    model: ModelParams,
    train_ds: &LabeledDataset,
    val_ds: &LabeledDataset,
    cfg: &TrainConfig,
    encoder: &dyn Encoder,
) -> Result<TrainOutcome> {
    train_with(model, train_ds, val_ds, cfg, encoder, |_| {})
}

/// Training with a callback after every epoch.
///
/// Batches are drawn from a seeded shuffle of the training set; the shuffle
/// is renewed whenever it runs out, so epochs may straddle reshuffles.
pub fn train_with(
    mut model: ModelParams,
    train_ds: &LabeledDataset,
    val_ds: &LabeledDataset,
    cfg: &TrainConfig,
    encoder: &dyn Encoder,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    if cfg.batch_size == 0 || cfg.steps_per_epoch == 0 {
        return Err(Error::InvalidConfig("batch size and steps per epoch must be positive".into()));
    }
    check_data(&model, train_ds, encoder)?;
    check_data(&model, val_ds, encoder)?;
    if cfg.epochs == 0 {
        return Ok(TrainOutcome {
            model,
            history: Vec::new(),
            initial_loss: None,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_ds.len()).collect();
    order.shuffle(&mut rng);
    let mut cursor = 0usize;
    let mut next_index = |rng: &mut ChaCha8Rng| {
        if cursor == order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        cursor += 1;
        order[cursor - 1]
    };

    let mut input = vec![0.0f32; encoder.input_shape().len()];
    let mut trace = Trace::default();

    // loss of the untrained model on what the first epoch will see
    let mut first_epoch = Vec::with_capacity(cfg.steps_per_epoch * cfg.batch_size);
    let mut schedule: Vec<usize> = Vec::new();
    for _ in 0..cfg.steps_per_epoch * cfg.batch_size {
        first_epoch.push(next_index(&mut rng));
    }
    let mut initial = 0.0;
    for &i in &first_epoch {
        let (word, label) = &train_ds.items[i];
        encoder.encode(word, &mut input)?;
        let p = model.network.forward(&input, &mut trace)?[0];
        initial += bce_loss(p as f64, *label as f64);
    }
    let initial_loss = initial / first_epoch.len() as f64;

    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate, &model.network);
    let mut grads = model.network.zero_grads();
    let scale = 1.0 / cfg.batch_size as f32;
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        schedule.clear();
        if epoch == 1 {
            schedule.extend_from_slice(&first_epoch);
        } else {
            for _ in 0..cfg.steps_per_epoch * cfg.batch_size {
                schedule.push(next_index(&mut rng));
            }
        }
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (step, batch) in schedule.chunks(cfg.batch_size).enumerate() {
            grads.zero();
            let mut batch_loss = 0.0;
            for &i in batch {
                let (word, label) = &train_ds.items[i];
                encoder.encode(word, &mut input)?;
                let p = model.network.forward(&input, &mut trace)?[0];
                batch_loss += bce_loss(p as f64, *label as f64);
                if u8::from(p > 0.5) == *label {
                    correct += 1;
                }
                model.network.bce_backward(&mut trace, *label as f32, scale, &mut grads)?;
            }
            let finite = batch_loss.is_finite() && grads.tensors().all(|g| g.iter().all(|x| x.is_finite()));
            if !finite {
                return Err(Error::Diverged {
                    epoch,
                    step,
                    loss: batch_loss / batch.len() as f64,
                });
            }
            loss_sum += batch_loss;
            optimizer.step(&mut model.network, &grads);
        }
        let seen = schedule.len() as f64;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / seen,
            train_acc: correct as f64 / seen,
            val_acc: evaluate(&model, val_ds, encoder)?,
        };
        on_epoch(&record);
        history.push(record);
    }
    Ok(TrainOutcome {
        model,
        history,
        initial_loss: Some(initial_loss),
    })
}

pub const METRICS_CSV_HEADER: &str = "epoch,train_loss,train_acc,val_acc\n";

/// One CSV row, newline included.
pub fn metrics_csv_row(r: &EpochRecord) -> String {
    format!("{},{:.6},{:.6},{:.6}\n", r.epoch, r.train_loss, r.train_acc, r.val_acc)
}

/// The header followed by one row per record.
pub fn write_metrics_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from(METRICS_CSV_HEADER);
    for r in history {
        s.push_str(&metrics_csv_row(r));
    }
    s
}
