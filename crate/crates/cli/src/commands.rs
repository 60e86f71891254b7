use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context};
use seqlabel::checkpoint::Checkpoint;
use seqlabel::corpus::{
    parse_column_corpus, read_segmented_corpus, sniff_column_count, write_column_corpus, ColumnSpec, Sentence,
};
use seqlabel::embedding::load_text_embeddings;
use seqlabel::evaluator::{compare_sentences, metric_record, write_comparison, MetricKind};
use seqlabel::features::{load_cluster_lexicon, load_radical_lexicon, Lexicons, Task, TemplateSet};
use seqlabel::trainer::{self, default_instance, gradient_check, init_model, Selection};

use crate::config::{Command, CorpusFormat, RunConfig};

pub fn run(command: Command, c: &RunConfig) -> anyhow::Result<ExitCode> {
    match command {
        Command::Train => train(c),
        Command::Predict => predict(c),
        Command::Eval => eval(c),
        Command::Compare => compare(c),
        Command::GradCheck => gradcheck(c),
    }
}

/// Reads a corpus for `task`. With `labels_required == false` a file may
/// omit the label column.
fn read_corpus(path: &Path, task: Task, format: CorpusFormat, labels_required: bool) -> anyhow::Result<Vec<Sentence>> {
    if format == CorpusFormat::Segmented {
        return Ok(read_segmented_corpus(path)?);
    }
    let aux = task == Task::Ner;
    let base = 1 + aux as usize;
    let spec = match sniff_column_count(path)? {
        None => return Ok(Vec::new()),
        Some(w) if w == base + 1 => ColumnSpec { aux, label: true },
        Some(w) if w == base && !labels_required => ColumnSpec { aux, label: false },
        Some(w) => {
            let expected = if labels_required {
                format!("{}", base + 1)
            } else {
                format!("{base} or {}", base + 1)
            };
            bail!("{}: {task} expects {expected} columns, found {w}", path.display())
        }
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_column_corpus(&text, spec, path)?)
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn load_checkpoint(path: &Path, c: &RunConfig) -> anyhow::Result<Checkpoint> {
    let ck = Checkpoint::load(path)?;
    if let Some(task) = c.task {
        if task != ck.task {
            bail!("{} was trained for {}, not {task}", path.display(), ck.task);
        }
    }
    Ok(ck)
}

fn train(c: &RunConfig) -> anyhow::Result<ExitCode> {
    let task = c.task.expect("validated");
    let language = c.language_or_default(task);
    let scheme = c.scheme_or_default(task);
    let train_path = c.train.as_deref().expect("validated");
    let dev_path = c.dev.as_deref().expect("validated");
    let model_out = c.model_out.as_deref().expect("validated");

    let train_set = read_corpus(train_path, task, c.format, true)?;
    let dev_set = read_corpus(dev_path, task, c.format, true)?;
    let mut lexicons = Lexicons::default();
    if let Some(p) = &c.clusters {
        lexicons.clusters = load_cluster_lexicon(p)?;
    }
    if let Some(p) = &c.radicals {
        lexicons.radicals = load_radical_lexicon(p)?;
    }
    let mut templates = TemplateSet::new(task, language).with_lexicons(lexicons);
    if let Some(a) = c.affix_len {
        templates.affix_len = a;
    }
    let mut pretrained = Vec::new();
    for (role, p) in &c.embeddings {
        let mut t = load_text_embeddings(role.name(), p, c.hyper.table_dim(*role))?;
        t.lowercase = c.lowercase_embeddings;
        pretrained.push((*role, t));
    }
    let model = init_model(c.mode, templates, &train_set, pretrained, &c.hyper)?;
    let metric = MetricKind::for_task(task);
    let (best, report) = trainer::train(model, &train_set, &dev_set, &c.hyper, Selection { metric, scheme })?;
    let ck = Checkpoint {
        model: best,
        task,
        language,
        scheme,
        hyper: c.hyper.clone(),
    };
    ck.save(model_out)?;
    let report_path = c
        .report
        .clone()
        .unwrap_or_else(|| model_out.with_extension("report.jsonl"));
    std::fs::write(&report_path, report.summary_lines())
        .with_context(|| format!("writing {}", report_path.display()))?;
    log::info!("training took {:.2}s", report.wall_clock_secs);
    let b = report.best();
    println!(
        "best epoch {} of {}: dev {} {:.6}",
        b.epoch + 1,
        report.epochs.len(),
        metric.name(),
        b.dev_metric
    );
    Ok(ExitCode::SUCCESS)
}

fn predict(c: &RunConfig) -> anyhow::Result<ExitCode> {
    let ck = load_checkpoint(c.model.as_deref().expect("validated"), c)?;
    let input = read_corpus(c.input.as_deref().expect("validated"), ck.task, c.format, false)?;
    let labels = trainer::predict(&ck.model, &input)?;
    let mut out = open_output(c.output.as_deref())?;
    write_column_corpus(&mut out, &input, &labels)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn eval(c: &RunConfig) -> anyhow::Result<ExitCode> {
    let gold_path = c.gold.as_deref().expect("validated");
    let (task, scheme, predicted, gold) = match (&c.pred, &c.model) {
        (Some(pred_path), None) => {
            let task = c.task.expect("validated");
            let gold = read_corpus(gold_path, task, c.format, true)?;
            let pred = read_corpus(pred_path, task, c.format, true)?;
            if pred.len() != gold.len() {
                bail!("gold has {} sentences, predictions have {}", gold.len(), pred.len());
            }
            for (k, (g, p)) in gold.iter().zip(&pred).enumerate() {
                if g.tokens != p.tokens {
                    bail!("sentence {k}: gold and predicted tokens differ");
                }
            }
            let labels = pred.into_iter().map(|s| s.gold_labels.expect("labeled")).collect();
            (task, c.scheme_or_default(task), labels, gold)
        }
        (None, Some(model_path)) => {
            let ck = load_checkpoint(model_path, c)?;
            let gold = read_corpus(gold_path, ck.task, c.format, true)?;
            let labels = trainer::predict(&ck.model, &gold)?;
            (ck.task, c.scheme.unwrap_or(ck.scheme), labels, gold)
        }
        _ => unreachable!("validated"),
    };
    let record = metric_record(task, &gold, &predicted, scheme)?;
    let mut out = open_output(c.output.as_deref())?;
    writeln!(out, "{}", record.to_json())?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn compare(c: &RunConfig) -> anyhow::Result<ExitCode> {
    let a = load_checkpoint(c.model.as_deref().expect("validated"), c)?;
    let b = load_checkpoint(c.model_b.as_deref().expect("validated"), c)?;
    if a.task != b.task {
        bail!("models were trained for different tasks ({} and {})", a.task, b.task);
    }
    let gold = read_corpus(c.gold.as_deref().expect("validated"), a.task, c.format, true)?;
    let pa = trainer::predict(&a.model, &gold)?;
    let pb = trainer::predict(&b.model, &gold)?;
    let scheme = c.scheme.unwrap_or(a.scheme);
    let rows = compare_sentences(&gold, &pa, &pb, MetricKind::for_task(a.task), scheme)?;
    let mut out = open_output(c.output.as_deref())?;
    write_comparison(&mut out, &rows)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Seeds tried before giving up on finding an untied instance.
const GRADCHECK_SEED_BUDGET: u64 = 100;

fn gradcheck(c: &RunConfig) -> anyhow::Result<ExitCode> {
    let start = c.hyper.seed;
    for seed in start..start + GRADCHECK_SEED_BUDGET {
        let (model, s) = default_instance(c.mode, seed)?;
        let report = gradient_check(&model, &s, c.epsilon)?;
        if report.non_differentiable || report.loss == 0.0 {
            log::info!("seed {seed}: tied or zero-loss instance, trying the next seed");
            continue;
        }
        let passed = report.passes(c.tolerance);
        let line = serde_json::json!({
            "mode": c.mode.name(),
            "seed": seed,
            "epsilon": c.epsilon,
            "tolerance": c.tolerance,
            "passed": passed,
            "report": report,
        });
        println!("{line}");
        return Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    bail!("no differentiable instance among seeds {start}..{}", start + GRADCHECK_SEED_BUDGET)
}
