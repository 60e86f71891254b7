//! Corpus and per-sentence metrics.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{position_tags_to_spans, Sentence, TagScheme};
use crate::error::{Error, Result};
use crate::features::Task;

/// Precision, recall and F1 from micro-averaged counts. Empty denominators
/// give 0 and set `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub pred_count: usize,
    pub gold_count: usize,
    pub degenerate: bool,
}

impl Prf {
    pub fn from_counts(tp: usize, pred_count: usize, gold_count: usize) -> Self {
        let precision = if pred_count == 0 { 0.0 } else { tp as f64 / pred_count as f64 };
        let recall = if gold_count == 0 { 0.0 } else { tp as f64 / gold_count as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
            tp,
            pred_count,
            gold_count,
            degenerate: pred_count == 0 || gold_count == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricKind {
    SpanF,
    Accuracy,
}

impl MetricKind {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Pos => MetricKind::Accuracy,
            Task::Seg | Task::Ner => MetricKind::SpanF,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::SpanF => "f1",
            MetricKind::Accuracy => "accuracy",
        }
    }
}

fn gold_of(s: &Sentence) -> Result<&[String]> {
    s.gold_labels
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("gold sentence without labels".into()))
}

fn check_lengths<T>(what: &'static str, a: &[T], b: usize) -> Result<()> {
    if a.len() != b {
        return Err(Error::LengthMismatch {
            what,
            left: a.len(),
            right: b,
        });
    }
    Ok(())
}

/// `(tp, pred, gold)` over exact `(start, end, kind)` span matches.
pub fn span_counts<G: AsRef<str>, P: AsRef<str>>(gold: &[G], pred: &[P], scheme: TagScheme) -> Result<(usize, usize, usize)> {
    check_lengths("gold/predicted tokens", gold, pred.len())?;
    let g = position_tags_to_spans(gold, scheme);
    let p = position_tags_to_spans(pred, scheme);
    let tp = p.iter().filter(|s| g.contains(s)).count();
    Ok((tp, p.len(), g.len()))
}

pub fn eval_spans(gold: &[Sentence], predicted: &[Vec<String>], scheme: TagScheme) -> Result<Prf> {
    check_lengths("gold/predicted sentences", gold, predicted.len())?;
    let (mut tp, mut np, mut ng) = (0, 0, 0);
    for (s, p) in gold.iter().zip(predicted) {
        let (a, b, c) = span_counts(gold_of(s)?, p, scheme)?;
        tp += a;
        np += b;
        ng += c;
    }
    Ok(Prf::from_counts(tp, np, ng))
}

/// `(correct, total)` token counts.
pub fn accuracy_counts<G: AsRef<str>, P: AsRef<str>>(gold: &[G], pred: &[P]) -> Result<(usize, usize)> {
    check_lengths("gold/predicted tokens", gold, pred.len())?;
    let correct = gold.iter().zip(pred).filter(|(g, p)| g.as_ref() == p.as_ref()).count();
    Ok((correct, gold.len()))
}

pub fn eval_accuracy(gold: &[Sentence], predicted: &[Vec<String>]) -> Result<f64> {
    check_lengths("gold/predicted sentences", gold, predicted.len())?;
    let (mut c, mut t) = (0, 0);
    for (s, p) in gold.iter().zip(predicted) {
        let (a, b) = accuracy_counts(gold_of(s)?, p)?;
        c += a;
        t += b;
    }
    Ok(if t == 0 { 0.0 } else { c as f64 / t as f64 })
}

/// Corpus-level metric used for model selection.
pub fn corpus_metric(kind: MetricKind, gold: &[Sentence], predicted: &[Vec<String>], scheme: TagScheme) -> Result<f64> {
    match kind {
        MetricKind::SpanF => Ok(eval_spans(gold, predicted, scheme)?.f1),
        MetricKind::Accuracy => eval_accuracy(gold, predicted),
    }
}

/// Sentence-local metric. A sentence with neither gold nor predicted spans
/// scores 1.
pub fn sentence_metric<G: AsRef<str>, P: AsRef<str>>(kind: MetricKind, gold: &[G], pred: &[P], scheme: TagScheme) -> Result<f64> {
    match kind {
        MetricKind::SpanF => {
            let (tp, np, ng) = span_counts(gold, pred, scheme)?;
            Ok(if np == 0 && ng == 0 {
                1.0
            } else {
                Prf::from_counts(tp, np, ng).f1
            })
        }
        MetricKind::Accuracy => {
            let (c, t) = accuracy_counts(gold, pred)?;
            Ok(if t == 0 { 1.0 } else { c as f64 / t as f64 })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceComparison {
    pub sentence_id: usize,
    pub metric_a: f64,
    pub metric_b: f64,
}

pub fn compare_sentences(
    gold: &[Sentence],
    a: &[Vec<String>],
    b: &[Vec<String>],
    kind: MetricKind,
    scheme: TagScheme,
) -> Result<Vec<SentenceComparison>> {
    check_lengths("gold/model A sentences", gold, a.len())?;
    check_lengths("gold/model B sentences", gold, b.len())?;
    gold.iter()
        .zip(a.iter().zip(b))
        .enumerate()
        .map(|(id, (s, (pa, pb)))| {
            let g = gold_of(s)?;
            Ok(SentenceComparison {
                sentence_id: id,
                metric_a: sentence_metric(kind, g, pa, scheme)?,
                metric_b: sentence_metric(kind, g, pb, scheme)?,
            })
        })
        .collect()
}

/// `sentence_id<TAB>metric_a<TAB>metric_b`, one row per sentence.
pub fn write_comparison<W: Write>(out: &mut W, rows: &[SentenceComparison]) -> std::io::Result<()> {
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.sentence_id, r.metric_a, r.metric_b)?;
    }
    Ok(())
}

pub fn export_comparison(
    gold: &[Sentence],
    a: &[Vec<String>],
    b: &[Vec<String>],
    kind: MetricKind,
    scheme: TagScheme,
    path: impl AsRef<Path>,
) -> Result<Vec<SentenceComparison>> {
    let rows = compare_sentences(gold, a, b, kind, scheme)?;
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    write_comparison(&mut f, &rows)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))?;
    Ok(rows)
}

/// Word-level P/R/F by matching character offset intervals of two
/// segmentations of the same text.
pub fn segmentation_prf<G: AsRef<str>, P: AsRef<str>>(gold: &[Vec<G>], pred: &[Vec<P>]) -> Result<Prf> {
    check_lengths("gold/predicted sentences", gold, pred.len())?;
    let (mut tp, mut np, mut ng) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let go: Vec<(usize, usize)> = offsets_of(g);
        let po: Vec<(usize, usize)> = offsets_of(p);
        if go.last().map(|x| x.1) != po.last().map(|x| x.1) {
            return Err(Error::InvalidArgument("segmentations cover different text lengths".into()));
        }
        let (mut i, mut j) = (0, 0);
        while i < go.len() && j < po.len() {
            match go[i].cmp(&po[j]) {
                std::cmp::Ordering::Equal => {
                    tp += 1;
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        np += po.len();
        ng += go.len();
    }
    Ok(Prf::from_counts(tp, np, ng))
}

fn offsets_of<S: AsRef<str>>(words: &[S]) -> Vec<(usize, usize)> {
    let mut at = 0;
    words
        .iter()
        .map(|w| {
            let start = at;
            at += w.as_ref().chars().count();
            (start, at)
        })
        .collect()
}

/// Corpus-level metric record printed as one JSON line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub task: String,
    pub metric: String,
    pub value: f64,
    pub sentences: usize,
    pub tokens: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prf: Option<Prf>,
}

pub fn metric_record(task: Task, gold: &[Sentence], predicted: &[Vec<String>], scheme: TagScheme) -> Result<MetricRecord> {
    let kind = MetricKind::for_task(task);
    let prf = match kind {
        MetricKind::SpanF => Some(eval_spans(gold, predicted, scheme)?),
        MetricKind::Accuracy => None,
    };
    let value = match prf {
        Some(p) => p.f1,
        None => eval_accuracy(gold, predicted)?,
    };
    Ok(MetricRecord {
        task: task.name().to_string(),
        metric: kind.name().to_string(),
        value,
        sentences: gold.len(),
        tokens: gold.iter().map(Sentence::len).sum(),
        prf,
    })
}

impl MetricRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metric record serializes")
    }
}
