//! Model parameters for the three scoring modes and subgradient routing.
//!
//! * discrete: `emission[i][y] = Σ_o w[o·L + y]`, `transition = θ_e`
//! * neural: `emission[i][y] = θ_h[y] · h_i`, `transition = τ`
//! * joint: both emissions summed, `transition = w_τ·τ + θ_e`

use std::collections::BTreeMap;
use std::fmt;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{margin_loss, MarginLoss, ScoreLattice};
use crate::corpus::{LabelAlphabet, Sentence};
use crate::embedding::{InputComposer, TokenRows};
use crate::encoder::{BiLstm, BiLstmGrads, EncodeMode, EncoderOutput};
use crate::error::{Error, Result};
use crate::features::{FeatureAlphabet, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Discrete,
    Neural,
    Joint,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Discrete, Mode::Neural, Mode::Joint];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Discrete => "discrete",
            Mode::Neural => "neural",
            Mode::Joint => "joint",
        }
    }

    pub fn uses_discrete(self) -> bool {
        self != Mode::Neural
    }

    pub fn uses_neural(self) -> bool {
        self != Mode::Discrete
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "discrete" => Ok(Mode::Discrete),
            "neural" => Ok(Mode::Neural),
            "joint" => Ok(Mode::Joint),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteParams {
    pub templates: TemplateSet,
    pub alphabet: FeatureAlphabet,
    /// Indexed by feature id `obs·L + y`.
    pub weights: Vec<f64>,
    /// `(L+1) × L` label-bigram weights; row `L` is the start row.
    pub edge: Array2<f64>,
}

impl DiscreteParams {
    /// Zero weights over a frozen copy of `alphabet`.
    pub fn new(templates: TemplateSet, mut alphabet: FeatureAlphabet) -> Self {
        alphabet.freeze();
        let l = alphabet.n_labels();
        Self {
            weights: vec![0.0; alphabet.len()],
            edge: Array2::zeros((l + 1, l)),
            templates,
            alphabet,
        }
    }

    /// Interns every observation of `sentences`, then freezes.
    pub fn build(templates: TemplateSet, n_labels: usize, sentences: &[Sentence]) -> Result<Self> {
        let mut alphabet = FeatureAlphabet::new(n_labels);
        for s in sentences {
            for i in 0..s.len() {
                for o in templates.observations(s, i)? {
                    alphabet.intern(&o);
                }
            }
        }
        Ok(Self::new(templates, alphabet))
    }

    pub fn n_labels(&self) -> usize {
        self.alphabet.n_labels()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralParams {
    pub composer: InputComposer,
    pub encoder: BiLstm,
    /// `L × 2H`
    pub output: Array2<f64>,
    /// `(L+1) × L`, row `L` is the start row.
    pub tau: Array2<f64>,
}

impl NeuralParams {
    pub fn new<R: Rng>(composer: InputComposer, hidden: usize, n_labels: usize, rng: &mut R) -> Self {
        let encoder = BiLstm::new(composer.dim(), hidden, rng);
        let r = (6.0 / (n_labels + 2 * hidden) as f64).sqrt();
        let output = Array2::from_shape_fn((n_labels, 2 * hidden), |_| rng.random_range(-r..=r));
        Self {
            composer,
            encoder,
            output,
            tau: Array2::zeros((n_labels + 1, n_labels)),
        }
    }

    pub fn n_labels(&self) -> usize {
        self.output.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub mode: Mode,
    pub labels: LabelAlphabet,
    pub discrete: Option<DiscreteParams>,
    pub neural: Option<NeuralParams>,
    /// Weight of the `τ` coordinate of the joint edge vector.
    pub tau_weight: f64,
}

/// Per-sentence inputs that do not depend on parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSentence {
    pub len: usize,
    pub observations: Option<Vec<Vec<u32>>>,
    pub rows: Option<Vec<TokenRows>>,
}

/// A lattice plus whatever is needed to backpropagate through it.
#[derive(Debug, Clone)]
pub struct Forward {
    pub lattice: ScoreLattice,
    pub encoded: Option<EncoderOutput>,
}

/// Subgradient of the loss. The dense parts are `None` when the mode lacks
/// them; sparse maps hold only nonzero coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: BTreeMap<usize, f64>,
    pub edge: Option<Array2<f64>>,
    pub tau_weight: f64,
    pub output: Option<Array2<f64>>,
    pub tau: Option<Array2<f64>>,
    pub encoder: Option<BiLstmGrads>,
    /// One map per composer table, row → gradient.
    pub embeddings: Vec<BTreeMap<usize, Array1<f64>>>,
}

impl Gradients {
    pub fn zeros(model: &ModelParams) -> Self {
        let l = model.labels.len();
        let neural = model.neural.as_ref();
        Self {
            weights: BTreeMap::new(),
            edge: model.discrete.as_ref().map(|_| Array2::zeros((l + 1, l))),
            tau_weight: 0.0,
            output: neural.map(|n| Array2::zeros(n.output.dim())),
            tau: neural.map(|n| Array2::zeros(n.tau.dim())),
            encoder: neural.map(|n| n.encoder.zero_grads()),
            embeddings: neural
                .map(|n| vec![BTreeMap::new(); n.composer.tables.len()])
                .unwrap_or_default(),
        }
    }

    pub fn is_zero(&self) -> bool {
        let dense_zero = |a: &Option<Array2<f64>>| a.as_ref().is_none_or(|a| a.iter().all(|&v| v == 0.0));
        self.weights.values().all(|&v| v == 0.0)
            && dense_zero(&self.edge)
            && self.tau_weight == 0.0
            && dense_zero(&self.output)
            && dense_zero(&self.tau)
            && self.encoder.as_ref().is_none_or(|g| {
                [&g.forward, &g.backward].iter().all(|p| p.squared_norm() == 0.0)
            })
            && self
                .embeddings
                .iter()
                .all(|m| m.values().all(|g| g.iter().all(|&v| v == 0.0)))
    }
}

/// Parameter groups, used for gradient-check reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamClass {
    DiscreteWeights,
    EdgeWeights,
    TauWeight,
    OutputWeights,
    Tau,
    LstmWeights,
    LstmBias,
    Embeddings,
}

impl ParamClass {
    pub fn name(self) -> &'static str {
        match self {
            ParamClass::DiscreteWeights => "discrete_weights",
            ParamClass::EdgeWeights => "theta_e",
            ParamClass::TauWeight => "theta_e_tau",
            ParamClass::OutputWeights => "theta_o_h",
            ParamClass::Tau => "tau",
            ParamClass::LstmWeights => "lstm_gates",
            ParamClass::LstmBias => "lstm_bias",
            ParamClass::Embeddings => "embeddings",
        }
    }
}

fn slice_mut(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("standard layout")
}

fn slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}

impl ModelParams {
    pub fn new(
        mode: Mode,
        mut labels: LabelAlphabet,
        discrete: Option<DiscreteParams>,
        neural: Option<NeuralParams>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty label alphabet".into()));
        }
        labels.freeze();
        let l = labels.len();
        if mode.uses_discrete() != discrete.is_some() || mode.uses_neural() != neural.is_some() {
            return Err(Error::ModeMismatch(format!(
                "{mode} model given discrete={} neural={}",
                discrete.is_some(),
                neural.is_some()
            )));
        }
        if let Some(d) = &discrete {
            if d.n_labels() != l || d.weights.len() != d.alphabet.len() || d.edge.dim() != (l + 1, l) {
                return Err(Error::Dimension("discrete parameters vs label count".into()));
            }
        }
        if let Some(n) = &neural {
            let h2 = n.encoder.output_dim();
            if n.output.dim() != (l, h2)
                || n.tau.dim() != (l + 1, l)
                || n.encoder.token_dim() != n.composer.dim()
            {
                return Err(Error::Dimension("neural parameters vs label count".into()));
            }
        }
        Ok(Self {
            mode,
            labels,
            discrete,
            neural,
            tau_weight: 1.0,
        })
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn prepare(&self, s: &Sentence) -> Result<PreparedSentence> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("empty sentence".into()));
        }
        let observations = match &self.discrete {
            Some(d) => Some(
                (0..s.len())
                    .map(|i| {
                        Ok(d.templates
                            .observations(s, i)?
                            .iter()
                            .filter_map(|o| d.alphabet.observation_id(o))
                            .collect())
                    })
                    .collect::<Result<Vec<Vec<u32>>>>()?,
            ),
            None => None,
        };
        let rows = match &self.neural {
            Some(n) => Some(n.composer.lookup_sentence(s)?),
            None => None,
        };
        Ok(PreparedSentence {
            len: s.len(),
            observations,
            rows,
        })
    }

    pub fn gold_indices(&self, s: &Sentence) -> Result<Vec<usize>> {
        let gold = s
            .gold_labels
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("sentence has no gold labels".into()))?;
        self.labels.encode(gold)
    }

    fn check_prepared(&self, p: &PreparedSentence) -> Result<()> {
        if self.mode.uses_discrete() != p.observations.is_some() || self.mode.uses_neural() != p.rows.is_some() {
            return Err(Error::ModeMismatch(format!(
                "sentence prepared for a different mode than {}",
                self.mode
            )));
        }
        Ok(())
    }

    pub fn forward<R: Rng>(&self, p: &PreparedSentence, encode: EncodeMode, rng: &mut R) -> Result<Forward> {
        self.check_prepared(p)?;
        let l = self.n_labels();
        let mut emission = Array2::<f64>::zeros((p.len, l));
        let mut transition = Array2::<f64>::zeros((l + 1, l));
        if let (Some(d), Some(obs)) = (&self.discrete, &p.observations) {
            for (i, ids) in obs.iter().enumerate() {
                for &o in ids {
                    let base = o as usize * l;
                    for y in 0..l {
                        emission[[i, y]] += d.weights[base + y];
                    }
                }
            }
            transition += &d.edge;
        }
        let mut encoded = None;
        if let (Some(n), Some(rows)) = (&self.neural, &p.rows) {
            let inputs: Vec<Array1<f64>> = rows.iter().map(|r| n.composer.compose_rows(r)).collect();
            let out = n.encoder.encode(&inputs, encode, rng)?;
            for (i, h) in out.h.iter().enumerate() {
                let scores = n.output.dot(h);
                for y in 0..l {
                    emission[[i, y]] += scores[y];
                }
            }
            if self.mode == Mode::Joint {
                transition.scaled_add(self.tau_weight, &n.tau);
            } else {
                transition += &n.tau;
            }
            encoded = Some(out);
        }
        Ok(Forward {
            lattice: ScoreLattice::new(emission, transition)?,
            encoded,
        })
    }

    pub fn build_lattice(&self, s: &Sentence) -> Result<ScoreLattice> {
        let p = self.prepare(s)?;
        Ok(self.forward(&p, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))?.lattice)
    }

    pub fn decode_prepared(&self, p: &PreparedSentence) -> Result<Vec<usize>> {
        let f = self.forward(p, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))?;
        Ok(super::viterbi(&f.lattice).labels)
    }

    pub fn decode(&self, s: &Sentence) -> Result<Vec<usize>> {
        self.decode_prepared(&self.prepare(s)?)
    }

    pub fn decode_labels(&self, s: &Sentence) -> Result<Vec<String>> {
        Ok(self.labels.decode(&self.decode(s)?))
    }

    /// Margin loss and its subgradient `∂score(ŷ) − ∂score(gold)`. The
    /// bundle is zero whenever the loss is zero.
    pub fn loss_gradients<R: Rng>(
        &self,
        p: &PreparedSentence,
        gold: &[usize],
        encode: EncodeMode,
        rng: &mut R,
    ) -> Result<(MarginLoss, Gradients)> {
        let encode = match encode {
            EncodeMode::Infer => EncodeMode::Train { dropout: 0.0 },
            m => m,
        };
        let fwd = self.forward(p, encode, rng)?;
        let m = margin_loss(&fwd.lattice, gold)?;
        let mut g = Gradients::zeros(self);
        if m.loss == 0.0 || m.yhat.labels == gold {
            return Ok((m, g));
        }
        let yhat = &m.yhat.labels;
        let l = self.n_labels();

        let mut d_trans = Array2::<f64>::zeros((l + 1, l));
        let (mut prev_hat, mut prev_gold) = (l, l);
        for (&a, &b) in yhat.iter().zip(gold) {
            d_trans[[prev_hat, a]] += 1.0;
            d_trans[[prev_gold, b]] -= 1.0;
            prev_hat = a;
            prev_gold = b;
        }

        if let (Some(_), Some(obs)) = (&self.discrete, &p.observations) {
            for (i, ids) in obs.iter().enumerate() {
                if yhat[i] == gold[i] {
                    continue;
                }
                for &o in ids {
                    let base = o as usize * l;
                    *g.weights.entry(base + yhat[i]).or_insert(0.0) += 1.0;
                    *g.weights.entry(base + gold[i]).or_insert(0.0) -= 1.0;
                }
            }
            g.weights.retain(|_, v| *v != 0.0);
            g.edge = Some(d_trans.clone());
        }

        if let (Some(n), Some(rows), Some(enc)) = (&self.neural, &p.rows, &fwd.encoded) {
            let mut d_out = Array2::<f64>::zeros(n.output.dim());
            let mut dh = vec![Array1::<f64>::zeros(n.encoder.output_dim()); p.len];
            for i in 0..p.len {
                if yhat[i] == gold[i] {
                    continue;
                }
                let h = &enc.h[i];
                d_out.row_mut(yhat[i]).scaled_add(1.0, h);
                d_out.row_mut(gold[i]).scaled_add(-1.0, h);
                dh[i] = &n.output.row(yhat[i]) - &n.output.row(gold[i]);
            }
            let (enc_grads, d_inputs) = n.encoder.backward(enc, &dh)?;
            let mut emb = vec![BTreeMap::new(); n.composer.tables.len()];
            for (r, dx) in rows.iter().zip(&d_inputs) {
                n.composer.backward_rows(r, dx.view(), &mut emb);
            }
            g.output = Some(d_out);
            if self.mode == Mode::Joint {
                g.tau_weight = (&d_trans * &n.tau).sum();
                g.tau = Some(d_trans * self.tau_weight);
            } else {
                g.tau = Some(d_trans);
            }
            g.encoder = Some(enc_grads);
            g.embeddings = emb;
        }
        Ok((m, g))
    }

    /// Every trainable coordinate, grouped by class, in a fixed order.
    pub fn param_slices_mut(&mut self) -> Vec<(ParamClass, &mut [f64])> {
        let mut out: Vec<(ParamClass, &mut [f64])> = Vec::new();
        let joint = self.mode == Mode::Joint;
        if let Some(d) = &mut self.discrete {
            out.push((ParamClass::DiscreteWeights, &mut d.weights));
            out.push((ParamClass::EdgeWeights, slice_mut(&mut d.edge)));
        }
        if joint {
            out.push((ParamClass::TauWeight, std::slice::from_mut(&mut self.tau_weight)));
        }
        if let Some(n) = &mut self.neural {
            out.push((ParamClass::OutputWeights, slice_mut(&mut n.output)));
            out.push((ParamClass::Tau, slice_mut(&mut n.tau)));
            for p in [&mut n.encoder.forward, &mut n.encoder.backward] {
                out.push((ParamClass::LstmWeights, slice_mut(&mut p.w_input)));
                out.push((ParamClass::LstmWeights, slice_mut(&mut p.w_hidden)));
                out.push((ParamClass::LstmBias, p.bias.as_slice_mut().expect("standard layout")));
            }
            for (_, t) in &mut n.composer.tables {
                if t.fine_tune {
                    out.push((ParamClass::Embeddings, slice_mut(&mut t.matrix)));
                }
            }
        }
        out
    }

    /// Gradients laid out exactly like [`ModelParams::param_slices_mut`].
    pub fn dense_gradients(&self, g: &Gradients) -> Vec<(ParamClass, Vec<f64>)> {
        let mut out = Vec::new();
        if let Some(d) = &self.discrete {
            let mut w = vec![0.0; d.weights.len()];
            for (&k, &v) in &g.weights {
                w[k] = v;
            }
            out.push((ParamClass::DiscreteWeights, w));
            let e = g.edge.clone().unwrap_or_else(|| Array2::zeros(d.edge.dim()));
            out.push((ParamClass::EdgeWeights, slice(&e).to_vec()));
        }
        if self.mode == Mode::Joint {
            out.push((ParamClass::TauWeight, vec![g.tau_weight]));
        }
        if let Some(n) = &self.neural {
            let zero = n.encoder.zero_grads();
            let enc = g.encoder.as_ref().unwrap_or(&zero);
            let or_zero = |a: &Option<Array2<f64>>, like: &Array2<f64>| {
                a.as_ref().map_or_else(|| vec![0.0; like.len()], |a| slice(a).to_vec())
            };
            out.push((ParamClass::OutputWeights, or_zero(&g.output, &n.output)));
            out.push((ParamClass::Tau, or_zero(&g.tau, &n.tau)));
            for p in [&enc.forward, &enc.backward] {
                out.push((ParamClass::LstmWeights, slice(&p.w_input).to_vec()));
                out.push((ParamClass::LstmWeights, slice(&p.w_hidden).to_vec()));
                out.push((ParamClass::LstmBias, p.bias.to_vec()));
            }
            for (t, (_, table)) in n.composer.tables.iter().enumerate() {
                if !table.fine_tune {
                    continue;
                }
                let mut m = Array2::<f64>::zeros(table.matrix.dim());
                if let Some(rows) = g.embeddings.get(t) {
                    for (&r, v) in rows {
                        m.row_mut(r).assign(v);
                    }
                }
                out.push((ParamClass::Embeddings, slice(&m).to_vec()));
            }
        }
        out
    }

    pub fn squared_norm(&mut self) -> f64 {
        self.param_slices_mut()
            .iter()
            .flat_map(|(_, s)| s.iter())
            .map(|v| v * v)
            .sum()
    }

    pub fn is_finite(&mut self) -> bool {
        self.param_slices_mut()
            .iter()
            .all(|(_, s)| s.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::viterbi;
    use crate::embedding::{init_random_table, TableRole};
    use crate::features::{Language, Task};
    use ndarray::array;

    fn seg_sentences() -> Vec<Sentence> {
        vec![
            Sentence::labeled(&["中", "国", "人"], &["B", "E", "S"]).unwrap(),
            Sentence::labeled(&["我", "爱", "你"], &["S", "S", "S"]).unwrap(),
        ]
    }

    fn symbols(sentences: &[Sentence]) -> Vec<String> {
        let mut v: Vec<String> = sentences.iter().flat_map(|s| s.tokens.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    fn bigrams(sentences: &[Sentence]) -> Vec<String> {
        let mut v = Vec::new();
        for s in sentences {
            for i in 0..s.len() {
                let next = s.tokens.get(i + 1).map_or(crate::features::EOS, |t| t.as_str());
                v.push(format!("{}{}", s.tokens[i], next));
            }
        }
        v.sort();
        v.dedup();
        v
    }

    pub(crate) fn seg_model(mode: Mode, seed: u64) -> (ModelParams, Vec<Sentence>) {
        let sents = seg_sentences();
        let labels = LabelAlphabet::from_labels(&["B", "I", "E", "S"]);
        let discrete = mode.uses_discrete().then(|| {
            DiscreteParams::build(TemplateSet::new(Task::Seg, Language::Zh), 4, &sents).unwrap()
        });
        let neural = mode.uses_neural().then(|| {
            let composer = InputComposer::new(
                Task::Seg,
                vec![
                    (TableRole::Char, init_random_table("char", &symbols(&sents), 3, seed).unwrap()),
                    (TableRole::Bigram, init_random_table("bigram", &bigrams(&sents), 2, seed + 1).unwrap()),
                ],
            )
            .unwrap();
            NeuralParams::new(composer, 3, 4, &mut ChaCha8Rng::seed_from_u64(seed))
        });
        (ModelParams::new(mode, labels, discrete, neural).unwrap(), sents)
    }

    #[test]
    fn zero_discrete_weights_give_zero_lattice() {
        let (m, s) = seg_model(Mode::Discrete, 1);
        let lat = m.build_lattice(&s[0]).unwrap();
        assert!(lat.emission().iter().chain(lat.transition()).all(|&v| v == 0.0));
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let (d, _) = seg_model(Mode::Discrete, 1);
        let (n, s) = seg_model(Mode::Neural, 1);
        assert!(matches!(
            ModelParams::new(Mode::Joint, d.labels.clone(), d.discrete.clone(), None),
            Err(Error::ModeMismatch(_))
        ));
        let prepared = d.prepare(&s[0]).unwrap();
        assert!(n.decode_prepared(&prepared).is_err());
    }

    #[test]
    fn neural_emission_is_a_dot_product() {
        let (mut m, s) = seg_model(Mode::Neural, 2);
        let out = {
            let n = m.neural.as_ref().unwrap();
            let p = m.prepare(&s[0]).unwrap();
            let inputs: Vec<_> = p.rows.unwrap().iter().map(|r| n.composer.compose_rows(r)).collect();
            n.encoder.encode(&inputs, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
        };
        let n = m.neural.as_mut().unwrap();
        n.output.fill(0.0);
        n.output.row_mut(1).assign(&array![1.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        let lat = m.build_lattice(&s[0]).unwrap();
        for i in 0..3 {
            let h = &out.h[i];
            assert!((lat.emission()[[i, 1]] - (h[0] + 2.0 * h[5])).abs() < 1e-15);
            assert_eq!(lat.emission()[[i, 0]], 0.0);
        }
    }

    #[test]
    fn joint_with_neural_side_zeroed_matches_discrete() {
        let (mut j, s) = seg_model(Mode::Joint, 3);
        let (mut d, _) = seg_model(Mode::Discrete, 3);
        let mut r = ChaCha8Rng::seed_from_u64(9);
        let dw = d.discrete.as_mut().unwrap();
        dw.weights.iter_mut().for_each(|w| *w = r.random_range(-1.0..1.0));
        dw.edge.mapv_inplace(|_| r.random_range(-1.0..1.0));
        j.discrete = d.discrete.clone();
        j.neural.as_mut().unwrap().output.fill(0.0);
        j.tau_weight = 0.0;
        j.neural.as_mut().unwrap().tau.fill(3.0);
        for sent in &s {
            assert_eq!(j.build_lattice(sent).unwrap(), d.build_lattice(sent).unwrap());
            assert_eq!(j.decode(sent).unwrap(), d.decode(sent).unwrap());
        }
    }

    // Hand count on "中国人" with gold B E S against the pure-cost argmax.
    #[test]
    fn discrete_gradient_is_a_feature_count_difference() {
        let (m, s) = seg_model(Mode::Discrete, 4);
        let p = m.prepare(&s[0]).unwrap();
        let gold = m.gold_indices(&s[0]).unwrap();
        let lat = m.build_lattice(&s[0]).unwrap();
        let (loss, g) = m
            .loss_gradients(&p, &gold, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(loss.loss, 3.0);
        let yhat = viterbi(&lat.cost_augmented(&gold).unwrap()).labels;
        assert_eq!(yhat, vec![1, 0, 0]);
        let d = m.discrete.as_ref().unwrap();
        let obs = p.observations.as_ref().unwrap();
        let mut expected: BTreeMap<usize, f64> = BTreeMap::new();
        for i in 0..3 {
            for &o in &obs[i] {
                *expected.entry(d.alphabet.feature_id(o, yhat[i])).or_default() += 1.0;
                *expected.entry(d.alphabet.feature_id(o, gold[i])).or_default() -= 1.0;
            }
        }
        expected.retain(|_, v| *v != 0.0);
        assert_eq!(g.weights, expected);
        assert!(g.weights.values().all(|v| v.abs() <= 3.0 && v.fract() == 0.0));
        // START→I, I→B, B→B minus START→B, B→E, E→S
        let e = g.edge.unwrap();
        let mut expected_edge = Array2::<f64>::zeros((5, 4));
        expected_edge[[4, 1]] = 1.0;
        expected_edge[[1, 0]] = 1.0;
        expected_edge[[0, 0]] = 1.0;
        expected_edge[[4, 0]] = -1.0;
        expected_edge[[0, 2]] = -1.0;
        expected_edge[[2, 3]] = -1.0;
        assert_eq!(e, expected_edge);
    }

    #[test]
    fn zero_loss_gives_zero_bundle() {
        let (mut m, s) = seg_model(Mode::Joint, 5);
        let gold = m.gold_indices(&s[0]).unwrap();
        let p = m.prepare(&s[0]).unwrap();
        let d = m.discrete.as_mut().unwrap();
        for (i, ids) in p.observations.as_ref().unwrap().iter().enumerate() {
            for &o in ids {
                d.weights[o as usize * 4 + gold[i]] += 10.0;
            }
        }
        let (loss, g) = m
            .loss_gradients(&p, &gold, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(loss.loss, 0.0);
        assert!(g.is_zero());
        assert_eq!(g, Gradients::zeros(&m));
    }

    #[test]
    fn dense_layout_matches_parameter_layout() {
        for mode in Mode::ALL {
            let (mut m, s) = seg_model(mode, 6);
            let p = m.prepare(&s[1]).unwrap();
            let gold = m.gold_indices(&s[1]).unwrap();
            let (_, g) = m
                .loss_gradients(&p, &gold, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))
                .unwrap();
            let dense = m.dense_gradients(&g);
            let params = m.param_slices_mut();
            assert_eq!(dense.len(), params.len());
            for ((c1, g), (c2, p)) in dense.iter().zip(&params) {
                assert_eq!(c1, c2);
                assert_eq!(g.len(), p.len());
            }
        }
    }
}
