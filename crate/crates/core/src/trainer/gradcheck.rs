//! Central-difference verification of `loss_gradients`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{init_model, HyperParams};
use crate::corpus::Sentence;
use crate::crf::model::{Mode, ModelParams, PreparedSentence};
use crate::crf::{brute_force_top2, margin_loss};
use crate::encoder::EncodeMode;
use crate::error::Result;
use crate::features::{Language, Task, TemplateSet};

/// Below this cost-augmented score gap the argmax counts as tied.
pub const TIE_GAP: f64 = 1e-6;
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: &'static str,
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates whose perturbation moved the argmax.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub loss: f64,
    pub argmax_gap: f64,
    /// The cost-augmented argmax is tied, so no coordinate was checked.
    pub non_differentiable: bool,
    pub classes: Vec<ClassReport>,
}

impl GradCheckReport {
    pub fn max_error(&self) -> f64 {
        self.classes.iter().map(|c| c.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        !self.non_differentiable && self.classes.iter().all(|c| c.max_rel_error < tolerance)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn eval(model: &ModelParams, p: &PreparedSentence, gold: &[usize]) -> Result<(f64, Vec<usize>)> {
    let f = model.forward(p, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))?;
    let m = margin_loss(&f.lattice, gold)?;
    Ok((m.loss, m.yhat.labels))
}

/// Compares analytic gradients against `(L(θ+ε) − L(θ−ε)) / 2ε` for every
/// trainable coordinate, without dropout.
pub fn gradient_check(model: &ModelParams, s: &Sentence, eps: f64) -> Result<GradCheckReport> {
    let mut model = model.clone();
    let p = model.prepare(s)?;
    let gold = model.gold_indices(s)?;
    let fwd = model.forward(&p, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))?;
    let (first, second) = brute_force_top2(&fwd.lattice.cost_augmented(&gold)?)?;
    let gap = first - second;
    let (m, g) = model.loss_gradients(&p, &gold, EncodeMode::Infer, &mut ChaCha8Rng::seed_from_u64(0))?;

    let mut classes: Vec<ClassReport> = Vec::new();
    let dense = model.dense_gradients(&g);
    let non_differentiable = gap < TIE_GAP;
    for (class, _) in &dense {
        if !classes.iter().any(|c| c.class == class.name()) {
            classes.push(ClassReport {
                class: class.name(),
                max_rel_error: 0.0,
                checked: 0,
                skipped: 0,
            });
        }
    }
    if non_differentiable {
        return Ok(GradCheckReport {
            loss: m.loss,
            argmax_gap: gap,
            non_differentiable,
            classes,
        });
    }
    for (slot, (class, analytic)) in dense.iter().enumerate() {
        let report = classes
            .iter_mut()
            .find(|c| c.class == class.name())
            .expect("class listed");
        for (k, &a) in analytic.iter().enumerate() {
            let orig = model.param_slices_mut()[slot].1[k];
            model.param_slices_mut()[slot].1[k] = orig + eps;
            let (plus, y_plus) = eval(&model, &p, &gold)?;
            model.param_slices_mut()[slot].1[k] = orig - eps;
            let (minus, y_minus) = eval(&model, &p, &gold)?;
            model.param_slices_mut()[slot].1[k] = orig;
            if y_plus != m.yhat.labels || y_minus != m.yhat.labels {
                report.skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * eps);
            report.max_rel_error = report.max_rel_error.max(relative_error(a, numeric));
            report.checked += 1;
        }
    }
    Ok(GradCheckReport {
        loss: m.loss,
        argmax_gap: gap,
        non_differentiable,
        classes,
    })
}

/// A three-token, three-label POS instance with `H = 4` and every parameter
/// drawn uniformly from `[-0.5, 0.5]`.
pub fn default_instance(mode: Mode, seed: u64) -> Result<(ModelParams, Sentence)> {
    let s = Sentence::labeled(&["the", "dog", "runs"], &["DT", "NN", "VB"])?;
    let hp = HyperParams {
        word_hidden: 8,
        word_emb: 3,
        char_emb: 2,
        seed,
        ..HyperParams::default()
    };
    let mut model = init_model(
        mode,
        TemplateSet::new(Task::Pos, Language::En),
        std::slice::from_ref(&s),
        vec![],
        &hp,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for (_, values) in model.param_slices_mut() {
        for v in values.iter_mut() {
            *v = rng.random_range(-0.5..=0.5);
        }
    }
    if mode == Mode::Joint {
        model.tau_weight = rng.random_range(0.5..=1.5);
    }
    Ok((model, s))
}
