//! Online max-margin training with per-sentence AdaGrad updates.

pub mod adagrad;
pub mod gradcheck;

use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, TagScheme};
use crate::crf::model::{DiscreteParams, Gradients, Mode, ModelParams, NeuralParams};
use crate::embedding::{EmbeddingTable, InputComposer, TableRole, POS_EMB_DIM};
use crate::encoder::{BiLstmGrads, EncodeMode};
use crate::error::{Error, Result};
use crate::evaluator::{corpus_metric, MetricKind};
use crate::features::TemplateSet;
use adagrad::AdaGrad;

pub use gradcheck::{default_instance, gradient_check, ClassReport, GradCheckReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub dropout: f64,
    /// Width of `h_i`; each direction gets half.
    pub word_hidden: usize,
    /// Recorded only; the mean-pooling composer has no character encoder.
    pub char_hidden: usize,
    pub char_emb: usize,
    pub word_emb: usize,
    pub pos_emb: usize,
    pub fine_tune: bool,
    pub eta: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            dropout: 0.25,
            word_hidden: 100,
            char_hidden: 60,
            char_emb: 30,
            word_emb: 50,
            pos_emb: POS_EMB_DIM,
            fine_tune: true,
            eta: 0.01,
            lambda: 1e-8,
            epochs: 30,
            seed: 1,
            shuffle: true,
        }
    }
}

impl HyperParams {
    pub fn hidden_per_direction(&self) -> usize {
        self.word_hidden / 2
    }

    pub fn table_dim(&self, role: TableRole) -> usize {
        match role {
            TableRole::Char | TableRole::Bigram => self.char_emb,
            TableRole::Word => self.word_emb,
            TableRole::PosTag => self.pos_emb,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("hyperparameter {what}")));
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.word_hidden < 2 || !self.word_hidden.is_multiple_of(2) {
            return bad("word_hidden must be a positive even number");
        }
        if self.char_emb == 0 || self.word_emb == 0 || self.pos_emb == 0 {
            return bad("embedding sizes must be positive");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        Ok(())
    }
}

/// Independent random streams derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubSeed {
    Shuffle = 1,
    Dropout = 2,
    Init = 3,
}

pub fn named_rng(seed: u64, stream: SubSeed) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// Fresh model for `mode`: zero discrete weights over the training
/// alphabet, randomly initialized neural parameters, `τ = 0`, `w_τ = 1`.
pub fn init_model(
    mode: Mode,
    templates: TemplateSet,
    train: &[Sentence],
    pretrained: Vec<(TableRole, EmbeddingTable)>,
    hp: &HyperParams,
) -> Result<ModelParams> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training corpus".into()));
    }
    let labels = crate::corpus::LabelAlphabet::from_sentences(train);
    if labels.is_empty() {
        return Err(Error::InvalidArgument("training corpus has no labels".into()));
    }
    let task = templates.task;
    let discrete = if mode.uses_discrete() {
        Some(DiscreteParams::build(templates, labels.len(), train)?)
    } else {
        None
    };
    let neural = if mode.uses_neural() {
        let mut rng = named_rng(hp.seed, SubSeed::Init);
        let table_seed = rand::Rng::random::<u64>(&mut rng);
        let composer = InputComposer::build(task, train, pretrained, |r| hp.table_dim(r), hp.fine_tune, table_seed)?;
        Some(NeuralParams::new(composer, hp.hidden_per_direction(), labels.len(), &mut rng))
    } else {
        None
    };
    ModelParams::new(mode, labels, discrete, neural)
}

/// AdaGrad accumulators shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub weights: Vec<f64>,
    pub edge: Option<Array2<f64>>,
    pub tau_weight: f64,
    pub output: Option<Array2<f64>>,
    pub tau: Option<Array2<f64>>,
    pub encoder: Option<BiLstmGrads>,
    pub embeddings: Vec<Array2<f64>>,
}

impl OptimizerState {
    pub fn new(model: &ModelParams) -> Self {
        let n = model.neural.as_ref();
        Self {
            weights: model.discrete.as_ref().map_or_else(Vec::new, |d| vec![0.0; d.weights.len()]),
            edge: model.discrete.as_ref().map(|d| Array2::zeros(d.edge.dim())),
            tau_weight: 0.0,
            output: n.map(|n| Array2::zeros(n.output.dim())),
            tau: n.map(|n| Array2::zeros(n.tau.dim())),
            encoder: n.map(|n| n.encoder.zero_grads()),
            embeddings: n.map_or_else(Vec::new, |n| {
                n.composer.tables.iter().map(|(_, t)| Array2::zeros(t.matrix.dim())).collect()
            }),
        }
    }
}

fn step_dense(opt: &AdaGrad, p: &mut Array2<f64>, g: &Array2<f64>, acc: &mut Array2<f64>) -> Result<()> {
    opt.step_slice(
        p.as_slice_mut().expect("standard layout"),
        g.as_slice().expect("standard layout"),
        acc.as_slice_mut().expect("standard layout"),
    )
}

fn step_vec(opt: &AdaGrad, p: &mut ndarray::Array1<f64>, g: &ndarray::Array1<f64>, acc: &mut ndarray::Array1<f64>) -> Result<()> {
    opt.step_slice(
        p.as_slice_mut().expect("standard layout"),
        g.as_slice().expect("standard layout"),
        acc.as_slice_mut().expect("standard layout"),
    )
}

/// Sparse parameters (discrete weights, embedding rows) update only the
/// coordinates present in `g`; dense parameters update every call.
pub fn apply_gradients(model: &mut ModelParams, g: &Gradients, state: &mut OptimizerState, opt: &AdaGrad) -> Result<()> {
    if let Some(d) = &mut model.discrete {
        for (&k, &v) in &g.weights {
            opt.step(&mut d.weights[k], v, &mut state.weights[k])?;
        }
        let zero;
        let ge = match &g.edge {
            Some(e) => e,
            None => {
                zero = Array2::zeros(d.edge.dim());
                &zero
            }
        };
        step_dense(opt, &mut d.edge, ge, state.edge.as_mut().expect("edge state"))?;
    }
    if model.mode == Mode::Joint {
        opt.step(&mut model.tau_weight, g.tau_weight, &mut state.tau_weight)?;
    }
    if let Some(n) = &mut model.neural {
        let zeros = |a: &Array2<f64>| Array2::<f64>::zeros(a.dim());
        let go = g.output.clone().unwrap_or_else(|| zeros(&n.output));
        step_dense(opt, &mut n.output, &go, state.output.as_mut().expect("output state"))?;
        let gt = g.tau.clone().unwrap_or_else(|| zeros(&n.tau));
        step_dense(opt, &mut n.tau, &gt, state.tau.as_mut().expect("tau state"))?;
        let ge = g.encoder.clone().unwrap_or_else(|| n.encoder.zero_grads());
        let acc = state.encoder.as_mut().expect("encoder state");
        for (p, (g, a)) in [&mut n.encoder.forward, &mut n.encoder.backward]
            .into_iter()
            .zip([(&ge.forward, &mut acc.forward), (&ge.backward, &mut acc.backward)])
        {
            step_dense(opt, &mut p.w_input, &g.w_input, &mut a.w_input)?;
            step_dense(opt, &mut p.w_hidden, &g.w_hidden, &mut a.w_hidden)?;
            step_vec(opt, &mut p.bias, &g.bias, &mut a.bias)?;
        }
        for ((_, table), (rows, acc)) in n
            .composer
            .tables
            .iter_mut()
            .zip(g.embeddings.iter().zip(state.embeddings.iter_mut()))
        {
            if table.fine_tune && !rows.is_empty() {
                table.apply_sparse_gradient(rows, acc, opt)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub dev_metric: f64,
    pub param_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Index into `epochs` of the selected snapshot.
    pub best_epoch: usize,
    pub wall_clock_secs: f64,
}

impl TrainReport {
    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch]
    }

    /// One JSON record per epoch. Wall-clock time is left out so the
    /// summary is a deterministic function of the run.
    pub fn summary_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&serde_json::to_string(e).expect("epoch record serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn predict(model: &ModelParams, sentences: &[Sentence]) -> Result<Vec<Vec<String>>> {
    sentences.iter().map(|s| model.decode_labels(s)).collect()
}

pub fn evaluate(model: &ModelParams, sentences: &[Sentence], kind: MetricKind, scheme: TagScheme) -> Result<f64> {
    corpus_metric(kind, sentences, &predict(model, sentences)?, scheme)
}

/// Selection criterion applied to the dev set after every epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub metric: MetricKind,
    pub scheme: TagScheme,
}

/// Trains for `hp.epochs` and returns the snapshot with the best dev metric
/// (earliest on ties).
pub fn train(
    mut model: ModelParams,
    train_set: &[Sentence],
    dev_set: &[Sentence],
    hp: &HyperParams,
    selection: Selection,
) -> Result<(ModelParams, TrainReport)> {
    hp.validate()?;
    if train_set.is_empty() || dev_set.is_empty() {
        return Err(Error::InvalidArgument("train and dev corpora must be non-empty".into()));
    }
    let started = Instant::now();
    let prepared = train_set
        .iter()
        .map(|s| Ok((model.prepare(s)?, model.gold_indices(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let dev_prepared = dev_set.iter().map(|s| model.prepare(s)).collect::<Result<Vec<_>>>()?;
    let opt = AdaGrad::new(hp.eta, hp.lambda);
    let mut state = OptimizerState::new(&model);
    let mut shuffle_rng = named_rng(hp.seed, SubSeed::Shuffle);
    let mut dropout_rng = named_rng(hp.seed, SubSeed::Dropout);
    let encode = EncodeMode::Train { dropout: hp.dropout };
    let mut order: Vec<usize> = (0..prepared.len()).collect();
    let mut records = Vec::with_capacity(hp.epochs);
    let mut best: Option<(usize, f64, ModelParams)> = None;

    for epoch in 0..hp.epochs {
        if hp.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let mut total = 0.0;
        for &k in &order {
            let (p, gold) = &prepared[k];
            let (m, g) = model.loss_gradients(p, gold, encode, &mut dropout_rng)?;
            if !m.loss.is_finite() {
                return Err(Error::NonFinite(format!("loss in epoch {epoch}")));
            }
            total += m.loss;
            apply_gradients(&mut model, &g, &mut state, &opt)?;
        }
        let predicted = dev_prepared
            .iter()
            .map(|p| Ok(model.labels.decode(&model.decode_prepared(p)?)))
            .collect::<Result<Vec<_>>>()?;
        let dev_metric = corpus_metric(selection.metric, dev_set, &predicted, selection.scheme)?;
        let record = EpochRecord {
            epoch,
            mean_loss: total / prepared.len() as f64,
            dev_metric,
            param_norm: model.squared_norm().sqrt(),
        };
        log::info!(
            "epoch {epoch}: mean loss {:.6}, dev {} {:.4}, |theta| {:.4}",
            record.mean_loss,
            selection.metric.name(),
            record.dev_metric,
            record.param_norm
        );
        if best.as_ref().is_none_or(|(_, m, _)| dev_metric > *m) {
            best = Some((epoch, dev_metric, model.clone()));
        }
        records.push(record);
    }
    let (best_epoch, _, best_model) = best.expect("at least one epoch");
    let report = TrainReport {
        epochs: records,
        best_epoch,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    log::info!(
        "best epoch {best_epoch} of {}, {:.2}s",
        report.epochs.len(),
        report.wall_clock_secs
    );
    Ok((best_model, report))
}
