//! Labeled sequences, label alphabets, the column corpus format and the
//! conversions between tag sequences and spans.
//!
//! The on-disk format is one token per line, tab-separated columns
//! `token[<TAB>aux]<TAB>label`, with a blank line closing each sentence.
//! Segmentation corpora are turned into character/BIES columns on load, so
//! every task goes through the same reader.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A token sequence with optional gold labels and auxiliary tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub gold_labels: Option<Vec<String>>,
    pub aux_tags: Option<Vec<String>>,
}

impl Sentence {
    pub fn new(
        tokens: Vec<String>,
        gold_labels: Option<Vec<String>>,
        aux_tags: Option<Vec<String>>,
    ) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("empty sentence".into()));
        }
        if let Some(labels) = &gold_labels {
            if labels.len() != tokens.len() {
                return Err(Error::LengthMismatch {
                    what: "tokens/labels",
                    left: tokens.len(),
                    right: labels.len(),
                });
            }
        }
        if let Some(aux) = &aux_tags {
            if aux.len() != tokens.len() {
                return Err(Error::LengthMismatch {
                    what: "tokens/aux tags",
                    left: tokens.len(),
                    right: aux.len(),
                });
            }
        }
        Ok(Self {
            tokens,
            gold_labels,
            aux_tags,
        })
    }

    /// Unlabeled sentence from string slices.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        Self::new(
            tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            None,
            None,
        )
    }

    pub fn labeled<S: AsRef<str>, L: AsRef<str>>(tokens: &[S], labels: &[L]) -> Result<Self> {
        Self::new(
            tokens.iter().map(|t| t.as_ref().to_string()).collect(),
            Some(labels.iter().map(|t| t.as_ref().to_string()).collect()),
            None,
        )
    }

    pub fn with_aux<S: AsRef<str>>(mut self, aux: &[S]) -> Result<Self> {
        if aux.len() != self.tokens.len() {
            return Err(Error::LengthMismatch {
                what: "tokens/aux tags",
                left: self.tokens.len(),
                right: aux.len(),
            });
        }
        self.aux_tags = Some(aux.iter().map(|t| t.as_ref().to_string()).collect());
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Ordered set of distinct labels with a dense integer index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelAlphabet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    frozen: bool,
}

impl LabelAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut alphabet = Self::new();
        for label in labels {
            alphabet.insert(label.as_ref()).expect("fresh alphabet is not frozen");
        }
        alphabet
    }

    /// Collects gold labels in order of first appearance.
    pub fn from_sentences<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Self {
        let mut alphabet = Self::new();
        for s in sentences {
            for label in s.gold_labels.iter().flatten() {
                alphabet.insert(label).expect("fresh alphabet is not frozen");
            }
        }
        alphabet
    }

    pub fn insert(&mut self, label: &str) -> Result<usize> {
        if let Some(&i) = self.index.get(label) {
            return Ok(i);
        }
        if self.frozen {
            return Err(Error::UnknownLabel(label.to_string()));
        }
        let i = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        Ok(i)
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn to_index(&self, label: &str) -> Result<usize> {
        self.get(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.to_index(l.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.labels[i].clone()).collect()
    }
}

/// A half-open token range `[start, end)` with a type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanAnnotation {
    pub start: usize,
    pub end: usize,
    pub kind: String,
}

impl SpanAnnotation {
    pub fn new(start: usize, end: usize, kind: impl Into<String>) -> Self {
        Self {
            start,
            end,
            kind: kind.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Kind used for segmentation spans.
pub const WORD_KIND: &str = "WORD";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagScheme {
    /// Untyped `B`/`I`/`E`/`S` word segmentation tags.
    Bies,
    Bio,
    Bioes,
}

impl TagScheme {
    pub fn name(self) -> &'static str {
        match self {
            TagScheme::Bies => "bies",
            TagScheme::Bio => "bio",
            TagScheme::Bioes => "bioes",
        }
    }
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TagScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bies" | "bmes" => Ok(TagScheme::Bies),
            "bio" | "iob2" => Ok(TagScheme::Bio),
            "bioes" | "iobes" => Ok(TagScheme::Bioes),
            other => Err(Error::InvalidArgument(format!("unknown tag scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
    End(&'a str),
    Single(&'a str),
}

// Anything that does not parse as a positional tag counts as outside.
fn parse_tag(tag: &str) -> Position<'_> {
    let (prefix, kind) = match tag.split_once('-') {
        Some((p, k)) if !k.is_empty() => (p, k),
        Some(_) => return Position::Outside,
        None => (tag, WORD_KIND),
    };
    match prefix {
        "B" => Position::Begin(kind),
        "I" | "M" => Position::Inside(kind),
        "E" => Position::End(kind),
        "S" => Position::Single(kind),
        _ => Position::Outside,
    }
}

/// Extracts spans from a tag sequence.
///
/// Total over arbitrary input: a tag that does not continue the open span
/// starts a new one (`I` after `O` acts as `B`, `E` without an opener is a
/// single-token span), and a span still open at the end is closed there.
pub fn position_tags_to_spans<S: AsRef<str>>(labels: &[S], _scheme: TagScheme) -> Vec<SpanAnnotation> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, &str)> = None;

    fn close(open: &mut Option<(usize, &str)>, end: usize, spans: &mut Vec<SpanAnnotation>) {
        if let Some((start, kind)) = open.take() {
            spans.push(SpanAnnotation::new(start, end, kind));
        }
    }

    for (i, tag) in labels.iter().enumerate() {
        match parse_tag(tag.as_ref()) {
            Position::Outside => close(&mut open, i, &mut spans),
            Position::Begin(kind) => {
                close(&mut open, i, &mut spans);
                open = Some((i, kind));
            }
            Position::Inside(kind) => match open {
                Some((_, k)) if k == kind => {}
                _ => {
                    close(&mut open, i, &mut spans);
                    open = Some((i, kind));
                }
            },
            Position::End(kind) => match open {
                Some((start, k)) if k == kind => {
                    spans.push(SpanAnnotation::new(start, i + 1, kind));
                    open = None;
                }
                _ => {
                    close(&mut open, i, &mut spans);
                    spans.push(SpanAnnotation::new(i, i + 1, kind));
                }
            },
            Position::Single(kind) => {
                close(&mut open, i, &mut spans);
                spans.push(SpanAnnotation::new(i, i + 1, kind));
            }
        }
    }
    close(&mut open, labels.len(), &mut spans);
    spans
}

fn validate_spans(n: usize, spans: &[SpanAnnotation]) -> Result<Vec<&SpanAnnotation>> {
    let mut sorted: Vec<&SpanAnnotation> = spans.iter().collect();
    sorted.sort_by_key(|s| (s.start, s.end));
    for s in &sorted {
        if s.start >= s.end || s.end > n {
            return Err(Error::InvalidArgument(format!(
                "span [{}, {}) invalid for length {n}",
                s.start, s.end
            )));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::OverlappingSpans(
                pair[0].start,
                pair[0].end,
                pair[1].start,
                pair[1].end,
            ));
        }
    }
    Ok(sorted)
}

/// Encodes non-overlapping spans as per-position tags.
///
/// Positions outside every span get `O`. Under [`TagScheme::Bies`] the span
/// kind is dropped and every position must be covered.
pub fn spans_to_position_tags(
    n: usize,
    spans: &[SpanAnnotation],
    scheme: TagScheme,
) -> Result<Vec<String>> {
    let sorted = validate_spans(n, spans)?;
    let mut tags = vec!["O".to_string(); n];
    for span in sorted {
        let suffix = match scheme {
            TagScheme::Bies => String::new(),
            _ => format!("-{}", span.kind),
        };
        let single = span.len() == 1;
        for (offset, tag) in tags[span.start..span.end].iter_mut().enumerate() {
            let prefix = match scheme {
                TagScheme::Bio => {
                    if offset == 0 {
                        "B"
                    } else {
                        "I"
                    }
                }
                TagScheme::Bioes | TagScheme::Bies => {
                    if single {
                        "S"
                    } else if offset == 0 {
                        "B"
                    } else if offset + 1 == span.len() {
                        "E"
                    } else {
                        "I"
                    }
                }
            };
            *tag = format!("{prefix}{suffix}");
        }
    }
    if scheme == TagScheme::Bies {
        if let Some(i) = tags.iter().position(|t| t == "O") {
            return Err(Error::InvalidArgument(format!(
                "BIES tags need every position covered by a word; position {i} is not"
            )));
        }
    }
    Ok(tags)
}

/// Splits words into characters tagged with `B`/`I`/`E`/`S`.
pub fn segmentation_to_bies<S: AsRef<str>>(words: &[S]) -> Result<(Vec<String>, Vec<String>)> {
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    for word in words {
        let chars: Vec<char> = word.as_ref().chars().collect();
        if chars.is_empty() {
            return Err(Error::InvalidArgument("empty word".into()));
        }
        let last = chars.len() - 1;
        for (k, c) in chars.iter().enumerate() {
            tokens.push(c.to_string());
            let tag = match (k, last) {
                (_, 0) => "S",
                (0, _) => "B",
                (k, last) if k == last => "E",
                _ => "I",
            };
            labels.push(tag.to_string());
        }
    }
    Ok((tokens, labels))
}

/// Joins characters back into words following their BIES tags.
///
/// Ill-formed sequences are repaired as in [`position_tags_to_spans`]:
/// a dangling `B` closes at the next boundary and an orphan `I` opens a word.
pub fn bies_to_segmentation<S: AsRef<str>, L: AsRef<str>>(
    tokens: &[S],
    labels: &[L],
) -> Result<Vec<String>> {
    if tokens.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "tokens/labels",
            left: tokens.len(),
            right: labels.len(),
        });
    }
    for label in labels {
        let l = label.as_ref();
        if !matches!(l, "B" | "I" | "E" | "S") {
            return Err(Error::InvalidArgument(format!("not a BIES tag: {l:?}")));
        }
    }
    Ok(position_tags_to_spans(labels, TagScheme::Bies)
        .into_iter()
        .map(|span| {
            tokens[span.start..span.end]
                .iter()
                .map(AsRef::as_ref)
                .collect::<String>()
        })
        .collect())
}

/// Which columns a corpus file carries besides the token column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSpec {
    pub aux: bool,
    pub label: bool,
}

impl ColumnSpec {
    pub const TOKEN_LABEL: ColumnSpec = ColumnSpec {
        aux: false,
        label: true,
    };
    pub const TOKEN_AUX_LABEL: ColumnSpec = ColumnSpec {
        aux: true,
        label: true,
    };
    pub const TOKEN: ColumnSpec = ColumnSpec {
        aux: false,
        label: false,
    };
    pub const TOKEN_AUX: ColumnSpec = ColumnSpec {
        aux: true,
        label: false,
    };

    pub fn width(self) -> usize {
        1 + self.aux as usize + self.label as usize
    }
}

/// Reads a column corpus file.
pub fn read_column_corpus(path: impl AsRef<Path>, columns: ColumnSpec) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_column_corpus(&text, columns, path)
}

/// Parses column corpus text; `origin` is only used in error messages.
pub fn parse_column_corpus(
    text: &str,
    columns: ColumnSpec,
    origin: impl AsRef<Path>,
) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut block: Vec<Vec<&str>> = Vec::new();

    let flush = |block: &mut Vec<Vec<&str>>, sentences: &mut Vec<Sentence>| {
        if block.is_empty() {
            return;
        }
        let tokens = block.iter().map(|f| f[0].to_string()).collect();
        let aux = columns
            .aux
            .then(|| block.iter().map(|f| f[1].to_string()).collect());
        let labels = columns
            .label
            .then(|| block.iter().map(|f| f[f.len() - 1].to_string()).collect());
        block.clear();
        sentences.push(Sentence {
            tokens,
            gold_labels: labels,
            aux_tags: aux,
        });
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            flush(&mut block, &mut sentences);
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.width() {
            return Err(Error::Parse {
                path: origin.as_ref().to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "expected {} tab-separated columns, found {}",
                    columns.width(),
                    fields.len()
                ),
            });
        }
        if fields[0].is_empty() {
            return Err(Error::Parse {
                path: origin.as_ref().to_path_buf(),
                line: lineno + 1,
                message: "empty token".into(),
            });
        }
        block.push(fields);
    }
    flush(&mut block, &mut sentences);
    Ok(sentences)
}

/// Number of tab-separated columns on the first non-blank line, if any.
pub fn sniff_column_count(path: impl AsRef<Path>) -> Result<Option<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim_end)
        .find(|l| !l.is_empty())
        .map(|l| l.split('\t').count()))
}

/// Writes sentences in column format with the given labels in the last
/// column. Each sentence, including the last, is followed by a blank line.
pub fn write_column_corpus<W: Write>(
    out: &mut W,
    sentences: &[Sentence],
    labels: &[Vec<String>],
) -> std::io::Result<()> {
    for (s, labels) in sentences.iter().zip(labels) {
        for (i, token) in s.tokens.iter().enumerate() {
            out.write_all(token.as_bytes())?;
            if let Some(aux) = &s.aux_tags {
                write!(out, "\t{}", aux[i])?;
            }
            writeln!(out, "\t{}", labels[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a segmented text file (one sentence per line, words separated by
/// whitespace) into character sentences with BIES gold labels.
pub fn read_segmented_corpus(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut sentences = Vec::new();
    for line in text.lines() {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let (tokens, labels) = segmentation_to_bies(&words)?;
        sentences.push(Sentence::new(tokens, Some(labels), None)?);
    }
    Ok(sentences)
}
