//! Score lattices, exact decoding, and the structured hinge loss.
//!
//! Scores are unnormalized log-potentials. The partition function is only
//! exposed as a diagnostic and as a test oracle.

pub mod model;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

pub use model::{Gradients, Mode, ModelParams, PreparedSentence};

/// Largest `L^n` accepted by the exhaustive oracles.
pub const BRUTE_FORCE_LIMIT: f64 = 1e6;

/// Per-position emission scores and a position-independent transition
/// table whose last row (index `L`) holds start transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLattice {
    emission: Array2<f64>,
    transition: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub labels: Vec<usize>,
    pub score: f64,
}

impl ScoreLattice {
    pub fn new(emission: Array2<f64>, transition: Array2<f64>) -> Result<Self> {
        let (n, l) = emission.dim();
        if n == 0 || l == 0 {
            return Err(Error::Dimension(format!("empty lattice {n}x{l}")));
        }
        if transition.dim() != (l + 1, l) {
            return Err(Error::Dimension(format!(
                "transition {:?} for {l} labels",
                transition.dim()
            )));
        }
        if !emission.iter().chain(&transition).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("lattice score".into()));
        }
        Ok(Self { emission, transition })
    }

    pub fn zeros(n: usize, n_labels: usize) -> Self {
        Self {
            emission: Array2::zeros((n, n_labels)),
            transition: Array2::zeros((n_labels + 1, n_labels)),
        }
    }

    pub fn len(&self) -> usize {
        self.emission.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_labels(&self) -> usize {
        self.emission.ncols()
    }

    pub fn start(&self) -> usize {
        self.n_labels()
    }

    pub fn emission(&self) -> &Array2<f64> {
        &self.emission
    }

    pub fn transition(&self) -> &Array2<f64> {
        &self.transition
    }

    pub fn emission_mut(&mut self) -> &mut Array2<f64> {
        &mut self.emission
    }

    pub fn transition_mut(&mut self) -> &mut Array2<f64> {
        &mut self.transition
    }

    fn check_labels(&self, labels: &[usize]) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "labels/lattice",
                left: labels.len(),
                right: self.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= self.n_labels()) {
            return Err(Error::UnknownLabel(format!("label index {bad}")));
        }
        Ok(())
    }

    /// Copy with `+1` on every emission that disagrees with `gold`.
    pub fn cost_augmented(&self, gold: &[usize]) -> Result<Self> {
        self.check_labels(gold)?;
        let mut out = self.clone();
        for (i, &g) in gold.iter().enumerate() {
            for y in 0..self.n_labels() {
                if y != g {
                    out.emission[[i, y]] += 1.0;
                }
            }
        }
        Ok(out)
    }
}

/// Sum of start, transition, and emission scores along `labels`, in the
/// same association order used by [`viterbi`].
pub fn sequence_score(lattice: &ScoreLattice, labels: &[usize]) -> Result<f64> {
    lattice.check_labels(labels)?;
    Ok(score_unchecked(lattice, labels))
}

fn score_unchecked(lattice: &ScoreLattice, labels: &[usize]) -> f64 {
    let (em, tr) = (&lattice.emission, &lattice.transition);
    let mut prev = lattice.start();
    let mut s = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        s = if i == 0 {
            tr[[prev, y]] + em[[0, y]]
        } else {
            s + tr[[prev, y]] + em[[i, y]]
        };
        prev = y;
    }
    s
}

/// Exact argmax. Ties resolve to the lowest label at every decision.
pub fn viterbi(lattice: &ScoreLattice) -> DecodeResult {
    let (n, l) = (lattice.len(), lattice.n_labels());
    let (em, tr) = (&lattice.emission, &lattice.transition);
    let mut delta: Vec<f64> = (0..l).map(|y| tr[[l, y]] + em[[0, y]]).collect();
    let mut back = vec![vec![0usize; l]; n];
    let mut next = vec![0.0; l];
    for i in 1..n {
        for y in 0..l {
            let mut best = delta[0] + tr[[0, y]];
            let mut arg = 0;
            for (p, &d) in delta.iter().enumerate().skip(1) {
                let v = d + tr[[p, y]];
                if v > best {
                    best = v;
                    arg = p;
                }
            }
            next[y] = best + em[[i, y]];
            back[i][y] = arg;
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut y = 0;
    for (k, &d) in delta.iter().enumerate().skip(1) {
        if d > delta[y] {
            y = k;
        }
    }
    let score = delta[y];
    let mut labels = vec![0; n];
    for i in (0..n).rev() {
        labels[i] = y;
        y = back[i][y];
    }
    DecodeResult { labels, score }
}

/// Argmax of `score(y) + hamming(y, gold)`; the returned score includes the
/// cost term.
pub fn cost_augmented_viterbi(lattice: &ScoreLattice, gold: &[usize]) -> Result<DecodeResult> {
    Ok(viterbi(&lattice.cost_augmented(gold)?))
}

pub fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginLoss {
    pub loss: f64,
    /// Cost-augmented argmax; its `score` includes the hamming term.
    pub yhat: DecodeResult,
    pub gold_score: f64,
}

/// `max_y [score(y) + δ(y, gold)] − score(gold)` together with its argmax.
pub fn margin_loss(lattice: &ScoreLattice, gold: &[usize]) -> Result<MarginLoss> {
    let yhat = cost_augmented_viterbi(lattice, gold)?;
    let gold_score = sequence_score(lattice, gold)?;
    Ok(MarginLoss {
        loss: (yhat.score - gold_score).max(0.0),
        yhat,
        gold_score,
    })
}

fn check_size(lattice: &ScoreLattice) -> Result<()> {
    let size = (lattice.n_labels() as f64).powi(lattice.len() as i32);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(size));
    }
    Ok(())
}

/// Every label sequence, enumerated with the last position most significant
/// so the first maximum found matches the Viterbi tie rule.
fn for_each_sequence(n: usize, l: usize, mut f: impl FnMut(&[usize])) {
    let mut y = vec![0usize; n];
    loop {
        f(&y);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            y[i] += 1;
            if y[i] < l {
                break;
            }
            y[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force_best(lattice: &ScoreLattice) -> Result<DecodeResult> {
    check_size(lattice)?;
    let mut best: Option<DecodeResult> = None;
    for_each_sequence(lattice.len(), lattice.n_labels(), |y| {
        let s = score_unchecked(lattice, y);
        if best.as_ref().is_none_or(|b| s > b.score) {
            best = Some(DecodeResult {
                labels: y.to_vec(),
                score: s,
            });
        }
    });
    Ok(best.expect("non-empty lattice"))
}

/// Best and second-best sequence scores (equal when the argmax is tied).
pub fn brute_force_top2(lattice: &ScoreLattice) -> Result<(f64, f64)> {
    check_size(lattice)?;
    let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for_each_sequence(lattice.len(), lattice.n_labels(), |y| {
        let s = score_unchecked(lattice, y);
        if s > first {
            second = first;
            first = s;
        } else if s > second {
            second = s;
        }
    });
    Ok((first, second))
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn brute_force_log_partition(lattice: &ScoreLattice) -> Result<f64> {
    check_size(lattice)?;
    let mut scores = Vec::new();
    for_each_sequence(lattice.len(), lattice.n_labels(), |y| {
        scores.push(score_unchecked(lattice, y));
    });
    Ok(log_sum_exp(scores.iter().copied()))
}

/// Forward algorithm in log space with a max shift per position.
pub fn forward_log_partition(lattice: &ScoreLattice) -> f64 {
    let (n, l) = (lattice.len(), lattice.n_labels());
    let (em, tr) = (&lattice.emission, &lattice.transition);
    let mut alpha: Vec<f64> = (0..l).map(|y| tr[[l, y]] + em[[0, y]]).collect();
    for i in 1..n {
        alpha = (0..l)
            .map(|y| {
                let col: ArrayView1<'_, f64> = tr.column(y);
                log_sum_exp(alpha.iter().zip(col.iter()).map(|(a, t)| a + t)) + em[[i, y]]
            })
            .collect();
    }
    log_sum_exp(alpha.iter().copied())
}

/// Per-position marginals `p(y_i = y | x)` under the normalized model.
pub fn posteriors(lattice: &ScoreLattice) -> Array2<f64> {
    let (n, l) = (lattice.len(), lattice.n_labels());
    let (em, tr) = (&lattice.emission, &lattice.transition);
    let mut alpha = Array2::<f64>::zeros((n, l));
    let mut beta = Array2::<f64>::zeros((n, l));
    for y in 0..l {
        alpha[[0, y]] = tr[[l, y]] + em[[0, y]];
    }
    for i in 1..n {
        for y in 0..l {
            alpha[[i, y]] = log_sum_exp((0..l).map(|p| alpha[[i - 1, p]] + tr[[p, y]])) + em[[i, y]];
        }
    }
    for i in (0..n - 1).rev() {
        for y in 0..l {
            beta[[i, y]] = log_sum_exp((0..l).map(|q| tr[[y, q]] + em[[i + 1, q]] + beta[[i + 1, q]]));
        }
    }
    let log_z = log_sum_exp(alpha.row(n - 1).iter().copied());
    Array2::from_shape_fn((n, l), |(i, y)| (alpha[[i, y]] + beta[[i, y]] - log_z).exp())
}
