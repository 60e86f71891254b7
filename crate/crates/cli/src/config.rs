//! Run configuration: a `key = value` file merged with command-line
//! overrides, then validated against the subcommand being run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use seqlabel::corpus::{sniff_column_count, TagScheme};
use seqlabel::crf::Mode;
use seqlabel::embedding::{task_roles, TableRole};
use seqlabel::features::{Language, Task};
use seqlabel::trainer::HyperParams;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: PathBuf, line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value {value:?} for `{key}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("`{key}` is required for `{command}`")]
    Missing { key: &'static str, command: &'static str },
    #[error("`{key}` file {path} does not exist")]
    NotFound { key: &'static str, path: PathBuf },
    #[error("{0}")]
    Conflict(String),
}

/// Every accepted key. Command-line flags use the same names with `-`
/// in place of `_`.
pub const KEYS: &[&str] = &[
    "task",
    "language",
    "mode",
    "scheme",
    "format",
    "train",
    "dev",
    "input",
    "gold",
    "pred",
    "output",
    "model",
    "model_b",
    "model_out",
    "report",
    "word_embeddings",
    "char_embeddings",
    "bigram_embeddings",
    "pos_embeddings",
    "lowercase_embeddings",
    "clusters",
    "radicals",
    "affix_len",
    "dropout",
    "word_hidden",
    "char_hidden",
    "char_emb",
    "word_emb",
    "pos_emb",
    "fine_tune",
    "eta",
    "lambda",
    "epochs",
    "seed",
    "shuffle",
    "epsilon",
    "tolerance",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    Predict,
    Eval,
    Compare,
    GradCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Predict => "predict",
            Command::Eval => "eval",
            Command::Compare => "compare",
            Command::GradCheck => "gradcheck",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// Tab-separated columns, blank line between sentences.
    Column,
    /// One whitespace-segmented sentence per line (segmentation only).
    Segmented,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub language: Option<Language>,
    pub mode: Mode,
    pub scheme: Option<TagScheme>,
    pub format: CorpusFormat,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub model_b: Option<PathBuf>,
    pub model_out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub embeddings: Vec<(TableRole, PathBuf)>,
    pub lowercase_embeddings: bool,
    pub clusters: Option<PathBuf>,
    pub radicals: Option<PathBuf>,
    pub affix_len: Option<usize>,
    pub hyper: HyperParams,
    pub epsilon: f64,
    pub tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: None,
            language: None,
            mode: Mode::Joint,
            scheme: None,
            format: CorpusFormat::Column,
            train: None,
            dev: None,
            input: None,
            gold: None,
            pred: None,
            output: None,
            model: None,
            model_b: None,
            model_out: None,
            report: None,
            embeddings: Vec::new(),
            lowercase_embeddings: false,
            clusters: None,
            radicals: None,
            affix_len: None,
            hyper: HyperParams::default(),
            epsilon: seqlabel::trainer::gradcheck::DEFAULT_EPSILON,
            tolerance: 1e-4,
        }
    }
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// skipped; later keys win.
pub fn parse_config_text(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            path: origin.to_path_buf(),
            line: lineno + 1,
        })?;
        out.insert(normalize_key(k.trim()), v.trim().to_string());
    }
    Ok(out)
}

pub fn normalize_key(k: &str) -> String {
    k.replace('-', "_")
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_string(),
        value: v.to_string(),
        reason: e.to_string(),
    })
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::Value {
            key: key.to_string(),
            value: v.to_string(),
            reason: "expected true or false".into(),
        }),
    }
}

impl RunConfig {
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        let h = &mut c.hyper;
        for (k, v) in pairs {
            let k = k.as_str();
            let path = || Some(PathBuf::from(v));
            match k {
                "task" => c.task = Some(value(k, v)?),
                "language" => c.language = Some(value(k, v)?),
                "mode" => c.mode = value(k, v)?,
                "scheme" => c.scheme = Some(value(k, v)?),
                "format" => {
                    c.format = match v.as_str() {
                        "column" => CorpusFormat::Column,
                        "segmented" => CorpusFormat::Segmented,
                        _ => {
                            return Err(ConfigError::Value {
                                key: k.into(),
                                value: v.clone(),
                                reason: "expected column or segmented".into(),
                            })
                        }
                    }
                }
                "train" => c.train = path(),
                "dev" => c.dev = path(),
                "input" => c.input = path(),
                "gold" => c.gold = path(),
                "pred" => c.pred = path(),
                "output" => c.output = path(),
                "model" => c.model = path(),
                "model_b" => c.model_b = path(),
                "model_out" => c.model_out = path(),
                "report" => c.report = path(),
                "word_embeddings" | "char_embeddings" | "bigram_embeddings" | "pos_embeddings" => {
                    let role = TableRole::from_name(k.trim_end_matches("_embeddings")).expect("known role");
                    c.embeddings.push((role, PathBuf::from(v)));
                }
                "lowercase_embeddings" => c.lowercase_embeddings = boolean(k, v)?,
                "clusters" => c.clusters = path(),
                "radicals" => c.radicals = path(),
                "affix_len" => c.affix_len = Some(value(k, v)?),
                "dropout" => h.dropout = value(k, v)?,
                "word_hidden" => h.word_hidden = value(k, v)?,
                "char_hidden" => h.char_hidden = value(k, v)?,
                "char_emb" => h.char_emb = value(k, v)?,
                "word_emb" => h.word_emb = value(k, v)?,
                "pos_emb" => h.pos_emb = value(k, v)?,
                "fine_tune" => h.fine_tune = boolean(k, v)?,
                "eta" => h.eta = value(k, v)?,
                "lambda" => h.lambda = value(k, v)?,
                "epochs" => h.epochs = value(k, v)?,
                "seed" => h.seed = value(k, v)?,
                "shuffle" => h.shuffle = boolean(k, v)?,
                "epsilon" => c.epsilon = value(k, v)?,
                "tolerance" => c.tolerance = value(k, v)?,
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        Ok(c)
    }

    pub fn language_or_default(&self, task: Task) -> Language {
        self.language.unwrap_or(match task {
            Task::Seg => Language::Zh,
            Task::Pos | Task::Ner => Language::En,
        })
    }

    pub fn scheme_or_default(&self, task: Task) -> TagScheme {
        self.scheme.unwrap_or(match task {
            Task::Seg => TagScheme::Bies,
            Task::Pos | Task::Ner => TagScheme::Bio,
        })
    }

    /// Checks that everything `command` reads is present and exists.
    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        let name = command.name();
        let need = |key: &'static str, v: &Option<PathBuf>| -> Result<PathBuf, ConfigError> {
            v.clone().ok_or(ConfigError::Missing { key, command: name })
        };
        let exists = |key: &'static str, p: &Path| -> Result<(), ConfigError> {
            if p.exists() {
                Ok(())
            } else {
                Err(ConfigError::NotFound {
                    key,
                    path: p.to_path_buf(),
                })
            }
        };
        match command {
            Command::Train => {
                let task = self.task.ok_or(ConfigError::Missing { key: "task", command: name })?;
                let train = need("train", &self.train)?;
                let dev = need("dev", &self.dev)?;
                need("model_out", &self.model_out)?;
                exists("train", &train)?;
                exists("dev", &dev)?;
                self.hyper
                    .validate()
                    .map_err(|e| ConfigError::Conflict(e.to_string()))?;
                self.check_format(task)?;
                if task == Task::Ner && self.format == CorpusFormat::Column {
                    for (key, p) in [("train", &train), ("dev", &dev)] {
                        if !has_pos_column(p) {
                            return Err(ConfigError::Conflict(format!(
                                "ner needs a POS column: `{key}` file {} must have token, POS and label columns",
                                p.display()
                            )));
                        }
                    }
                }
                for (role, p) in &self.embeddings {
                    if !self.mode.uses_neural() {
                        return Err(ConfigError::Conflict(format!(
                            "{} embeddings given but {} mode has no neural features",
                            role.name(),
                            self.mode
                        )));
                    }
                    if !task_roles(task).contains(role) {
                        return Err(ConfigError::Conflict(format!("{task} does not use {} embeddings", role.name())));
                    }
                    exists(embedding_key(*role), p)?;
                }
                let language = self.language_or_default(task);
                for (key, p, wanted) in [
                    ("clusters", &self.clusters, Language::En),
                    ("radicals", &self.radicals, Language::Zh),
                ] {
                    if let Some(p) = p {
                        if !self.mode.uses_discrete() || task != Task::Ner || language != wanted {
                            return Err(ConfigError::Conflict(format!(
                                "`{key}` is only used by discrete features for {} ner",
                                wanted.name()
                            )));
                        }
                        exists(key, p)?;
                    }
                }
            }
            Command::Predict => {
                exists("model", &need("model", &self.model)?)?;
                exists("input", &need("input", &self.input)?)?;
            }
            Command::Eval => {
                exists("gold", &need("gold", &self.gold)?)?;
                match (&self.pred, &self.model) {
                    (Some(p), None) => {
                        if self.task.is_none() {
                            return Err(ConfigError::Missing { key: "task", command: name });
                        }
                        exists("pred", p)?;
                    }
                    (None, Some(m)) => exists("model", m)?,
                    _ => return Err(ConfigError::Conflict("eval needs exactly one of `pred` or `model`".into())),
                }
            }
            Command::Compare => {
                exists("model", &need("model", &self.model)?)?;
                exists("model_b", &need("model_b", &self.model_b)?)?;
                exists("gold", &need("gold", &self.gold)?)?;
            }
            Command::GradCheck => {
                if !(self.epsilon > 0.0 && self.tolerance > 0.0) {
                    return Err(ConfigError::Conflict("`epsilon` and `tolerance` must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn check_format(&self, task: Task) -> Result<(), ConfigError> {
        if self.format == CorpusFormat::Segmented && task != Task::Seg {
            return Err(ConfigError::Conflict("`format = segmented` only applies to seg".into()));
        }
        Ok(())
    }
}

fn embedding_key(role: TableRole) -> &'static str {
    match role {
        TableRole::Char => "char_embeddings",
        TableRole::Bigram => "bigram_embeddings",
        TableRole::Word => "word_embeddings",
        TableRole::PosTag => "pos_embeddings",
    }
}

fn has_pos_column(p: &Path) -> bool {
    matches!(sniff_column_count(p), Ok(Some(3)))
}
