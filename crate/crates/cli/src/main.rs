mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{normalize_key, parse_config_text, Command, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "seqlabel", version, about = "Train and apply CRF sequence labelers")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Train a model and write the best-dev checkpoint
    Train(Overrides),
    /// Label a corpus with a trained model
    Predict(Overrides),
    /// Score predictions against gold labels
    Eval(Overrides),
    /// Per-sentence metrics of two models as TSV
    Compare(Overrides),
    /// Check analytic gradients against central differences
    Gradcheck(Overrides),
}

/// Flags mirror the configuration keys and override the config file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// seg, pos or ner
    #[arg(long)]
    task: Option<String>,
    /// en or zh
    #[arg(long)]
    language: Option<String>,
    /// discrete, neural or joint
    #[arg(long)]
    mode: Option<String>,
    /// bies, bio or bioes
    #[arg(long)]
    scheme: Option<String>,
    /// column or segmented
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    train: Option<String>,
    #[arg(long)]
    dev: Option<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    gold: Option<String>,
    #[arg(long)]
    pred: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    model_b: Option<String>,
    #[arg(long)]
    model_out: Option<String>,
    #[arg(long)]
    report: Option<String>,
    #[arg(long)]
    word_embeddings: Option<String>,
    #[arg(long)]
    char_embeddings: Option<String>,
    #[arg(long)]
    bigram_embeddings: Option<String>,
    #[arg(long)]
    pos_embeddings: Option<String>,
    #[arg(long)]
    lowercase_embeddings: Option<String>,
    #[arg(long)]
    clusters: Option<String>,
    #[arg(long)]
    radicals: Option<String>,
    #[arg(long)]
    affix_len: Option<String>,
    #[arg(long)]
    dropout: Option<String>,
    #[arg(long)]
    word_hidden: Option<String>,
    #[arg(long)]
    char_hidden: Option<String>,
    #[arg(long)]
    char_emb: Option<String>,
    #[arg(long)]
    word_emb: Option<String>,
    #[arg(long)]
    pos_emb: Option<String>,
    #[arg(long)]
    fine_tune: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    shuffle: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("task", &self.task),
            ("language", &self.language),
            ("mode", &self.mode),
            ("scheme", &self.scheme),
            ("format", &self.format),
            ("train", &self.train),
            ("dev", &self.dev),
            ("input", &self.input),
            ("gold", &self.gold),
            ("pred", &self.pred),
            ("output", &self.output),
            ("model", &self.model),
            ("model_b", &self.model_b),
            ("model_out", &self.model_out),
            ("report", &self.report),
            ("word_embeddings", &self.word_embeddings),
            ("char_embeddings", &self.char_embeddings),
            ("bigram_embeddings", &self.bigram_embeddings),
            ("pos_embeddings", &self.pos_embeddings),
            ("lowercase_embeddings", &self.lowercase_embeddings),
            ("clusters", &self.clusters),
            ("radicals", &self.radicals),
            ("affix_len", &self.affix_len),
            ("dropout", &self.dropout),
            ("word_hidden", &self.word_hidden),
            ("char_hidden", &self.char_hidden),
            ("char_emb", &self.char_emb),
            ("word_emb", &self.word_emb),
            ("pos_emb", &self.pos_emb),
            ("fine_tune", &self.fine_tune),
            ("eta", &self.eta),
            ("lambda", &self.lambda),
            ("epochs", &self.epochs),
            ("seed", &self.seed),
            ("shuffle", &self.shuffle),
            ("epsilon", &self.epsilon),
            ("tolerance", &self.tolerance),
        ]
    }

    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut map = BTreeMap::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
            map = parse_config_text(&text, path)?;
        }
        for (k, v) in self.pairs() {
            debug_assert!(config::KEYS.contains(&k));
            if let Some(v) = v {
                map.insert(normalize_key(k), v.clone());
            }
        }
        Ok(RunConfig::from_pairs(&map)?)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, overrides) = match &cli.command {
        Sub::Train(o) => (Command::Train, o),
        Sub::Predict(o) => (Command::Predict, o),
        Sub::Eval(o) => (Command::Eval, o),
        Sub::Compare(o) => (Command::Compare, o),
        Sub::Gradcheck(o) => (Command::GradCheck, o),
    };
    let config = match overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = config.validate(command) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(command, &config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
