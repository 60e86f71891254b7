//! Discrete feature templates for segmentation, POS tagging and NER, and the
//! alphabet that assigns them dense ids.
//!
//! An instantiated template renders as `T<row><positions>=<values>`. The
//! label is attached as `|<label>` to form the output feature string, so the
//! observation part is shared by every label at a position.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::corpus::{LabelAlphabet, Sentence};
use crate::error::{Error, Result};

pub const BOS: &str = "<S>";
pub const EOS: &str = "</S>";
pub const START_LABEL: &str = "<START>";

/// Chinese POS word-length features share one bucket from this length on.
pub const MAX_LENGTH_BUCKET: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Seg,
    Pos,
    Ner,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Seg => "seg",
            Task::Pos => "pos",
            Task::Ner => "ner",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "seg" | "segmentation" => Ok(Task::Seg),
            "pos" => Ok(Task::Pos),
            "ner" => Ok(Task::Ner),
            other => Err(Error::InvalidArgument(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    En,
    Zh,
}

impl Language {
    pub fn name(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Zh => "zh",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Language::En),
            "zh" | "chinese" => Ok(Language::Zh),
            other => Err(Error::InvalidArgument(format!("unknown language {other:?}"))),
        }
    }
}

/// Character classes used by the segmentation type templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CharType {
    Punct = 0,
    Alpha = 1,
    Date = 2,
    Num = 3,
    Other = 4,
}

const DATE_CHARS: [char; 6] = ['年', '月', '日', '时', '分', '秒'];
const CHINESE_NUMERALS: [char; 14] = [
    '〇', '一', '二', '三', '四', '五', '六', '七', '八', '九', '十', '百', '千', '万',
];

pub fn char_type(c: char) -> CharType {
    if DATE_CHARS.contains(&c) {
        return CharType::Date;
    }
    if c.is_ascii_digit() || ('０'..='９').contains(&c) || CHINESE_NUMERALS.contains(&c) || c == '亿'
    {
        return CharType::Num;
    }
    if c.is_ascii_alphabetic()
        || ('Ａ'..='Ｚ').contains(&c)
        || ('ａ'..='ｚ').contains(&c)
        || (('\u{00C0}'..='\u{024F}').contains(&c) && c != '×' && c != '÷')
    {
        return CharType::Alpha;
    }
    match get_general_category(c) {
        GeneralCategory::ConnectorPunctuation
        | GeneralCategory::DashPunctuation
        | GeneralCategory::OpenPunctuation
        | GeneralCategory::ClosePunctuation
        | GeneralCategory::InitialPunctuation
        | GeneralCategory::FinalPunctuation
        | GeneralCategory::OtherPunctuation => CharType::Punct,
        _ => CharType::Other,
    }
}

/// One of `D`, `L`, `U`, `O` per character.
pub fn word_shape(word: &str) -> String {
    word.chars()
        .map(|c| {
            if c.is_numeric() {
                'D'
            } else if c.is_lowercase() {
                'L'
            } else if c.is_uppercase() {
                'U'
            } else {
                'O'
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectClass {
    Of,
    And,
    For,
    Hyphen,
    Other,
}

impl ConnectClass {
    pub fn name(self) -> &'static str {
        match self {
            ConnectClass::Of => "OF",
            ConnectClass::And => "AND",
            ConnectClass::For => "FOR",
            ConnectClass::Hyphen => "HYPHEN",
            ConnectClass::Other => "OTHER",
        }
    }
}

pub fn connect_class(word: &str) -> ConnectClass {
    if word == "-" {
        return ConnectClass::Hyphen;
    }
    match word.to_lowercase().as_str() {
        "of" => ConnectClass::Of,
        "and" => ConnectClass::And,
        "for" => ConnectClass::For,
        _ => ConnectClass::Other,
    }
}

pub fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

/// Word clusters and character radicals backing the NER templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicons {
    pub clusters: HashMap<String, String>,
    pub radicals: HashMap<char, String>,
}

fn read_pairs(path: &Path) -> Result<Option<Vec<(usize, String, String)>>> {
    if !path.exists() {
        log::warn!("lexicon {} not found; using an empty lexicon", path.display());
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected `key<TAB>value`".into(),
            });
        };
        pairs.push((lineno + 1, key.to_string(), value.to_string()));
    }
    Ok(Some(pairs))
}

/// Loads a `word<TAB>clusterId` file. A missing file yields an empty map.
pub fn load_cluster_lexicon(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    Ok(read_pairs(path.as_ref())?
        .unwrap_or_default()
        .into_iter()
        .map(|(_, k, v)| (k, v))
        .collect())
}

/// Loads a `character<TAB>radical` file. A missing file yields an empty map.
pub fn load_radical_lexicon(path: impl AsRef<Path>) -> Result<HashMap<char, String>> {
    let path = path.as_ref();
    let mut out = HashMap::new();
    for (line, key, value) in read_pairs(path)?.unwrap_or_default() {
        let mut chars = key.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                out.insert(c, value);
            }
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("radical key {key:?} is not a single character"),
                })
            }
        }
    }
    Ok(out)
}

/// The template rows active for one (task, language) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub task: Task,
    pub language: Language,
    /// Longest prefix/suffix emitted by the affix templates.
    pub affix_len: usize,
    pub lexicons: Lexicons,
}

impl TemplateSet {
    pub fn new(task: Task, language: Language) -> Self {
        let affix_len = match (task, language) {
            (Task::Pos, Language::En) => 5,
            (Task::Pos, Language::Zh) => 3,
            (Task::Ner, _) => 4,
            (Task::Seg, _) => 0,
        };
        Self {
            task,
            language,
            affix_len,
            lexicons: Lexicons::default(),
        }
    }

    pub fn with_lexicons(mut self, lexicons: Lexicons) -> Self {
        self.lexicons = lexicons;
        self
    }

    /// Template row numbers active for the task.
    pub fn rows(&self) -> &'static [u8] {
        match (self.task, self.language) {
            (Task::Seg, _) => &[1, 2, 3, 4, 5, 6, 7],
            (Task::Pos, Language::En) => &[1, 2, 3, 4],
            (Task::Pos, Language::Zh) => &[1, 2, 3, 4, 5],
            (Task::Ner, Language::En) => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16],
            // Chinese NER has no row 5.
            (Task::Ner, Language::Zh) => &[1, 2, 3, 4, 6, 7, 8, 9, 10, 11],
        }
    }

    /// Unlabeled template instantiations at position `i`, in template order.
    pub fn observations(&self, s: &Sentence, i: usize) -> Result<Vec<String>> {
        if i >= s.len() {
            return Err(Error::InvalidArgument(format!(
                "position {i} out of range for length {}",
                s.len()
            )));
        }
        let ctx = Context { s, i };
        let mut out = Emitter::default();
        match (self.task, self.language) {
            (Task::Seg, _) => seg_templates(&ctx, &mut out),
            (Task::Pos, lang) => pos_templates(&ctx, self.affix_len, lang, &mut out),
            (Task::Ner, Language::En) => {
                ctx.require_aux()?;
                en_ner_templates(&ctx, self, &mut out)
            }
            (Task::Ner, Language::Zh) => {
                ctx.require_aux()?;
                zh_ner_templates(&ctx, self, &mut out)
            }
        }
        Ok(out.items)
    }

    /// Labeled output feature strings `<observation>|<label>`.
    pub fn output_feature_strings(&self, s: &Sentence, i: usize, label: &str) -> Result<Vec<String>> {
        Ok(self
            .observations(s, i)?
            .into_iter()
            .map(|o| format!("{o}|{label}"))
            .collect())
    }

    /// Sparse output feature vector for label `y` at position `i`. Grows the
    /// alphabet with new observations unless it is frozen.
    pub fn extract_output_features(
        &self,
        alphabet: &mut FeatureAlphabet,
        labels: &LabelAlphabet,
        s: &Sentence,
        i: usize,
        y: &str,
    ) -> Result<SparseFeatureVector> {
        let y = labels.to_index(y)?;
        let n_labels = alphabet.n_labels();
        let ids = self
            .observations(s, i)?
            .iter()
            .filter_map(|o| alphabet.intern(o))
            .map(|o| o as usize * n_labels + y)
            .collect();
        Ok(SparseFeatureVector::from_ids(ids))
    }
}

struct Context<'a> {
    s: &'a Sentence,
    i: usize,
}

impl<'a> Context<'a> {
    fn index(&self, offset: isize) -> Option<usize> {
        let j = self.i as isize + offset;
        (j >= 0 && (j as usize) < self.s.len()).then_some(j as usize)
    }

    fn sentinel(offset: isize) -> &'static str {
        if offset < 0 {
            BOS
        } else {
            EOS
        }
    }

    fn token(&self, offset: isize) -> &'a str {
        match self.index(offset) {
            Some(j) => &self.s.tokens[j],
            None => Self::sentinel(offset),
        }
    }

    /// Applies `f` to an in-range token, or yields the boundary sentinel.
    fn map(&self, offset: isize, f: impl Fn(&'a str) -> String) -> String {
        match self.index(offset) {
            Some(j) => f(&self.s.tokens[j]),
            None => Self::sentinel(offset).to_string(),
        }
    }

    fn pos(&self, offset: isize) -> &'a str {
        match (self.index(offset), &self.s.aux_tags) {
            (Some(j), Some(aux)) => &aux[j],
            _ => Self::sentinel(offset),
        }
    }

    fn require_aux(&self) -> Result<()> {
        if self.s.aux_tags.is_none() {
            return Err(Error::InvalidArgument(
                "NER features need the POS tag column".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Default)]
struct Emitter {
    items: Vec<String>,
    seen: HashSet<String>,
}

impl Emitter {
    fn emit(&mut self, name: String, value: impl fmt::Display) {
        let feature = format!("{name}={value}");
        if self.seen.insert(feature.clone()) {
            self.items.push(feature);
        }
    }
}

fn char_type_digit(token: &str) -> String {
    let c = token.chars().next().expect("tokens are non-empty");
    (char_type(c) as u8).to_string()
}

fn offsets(list: &[isize]) -> String {
    let parts: Vec<String> = list.iter().map(isize::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn seg_templates(ctx: &Context<'_>, out: &mut Emitter) {
    for k in -2..=2 {
        out.emit(format!("T1{}", offsets(&[k])), ctx.token(k));
    }
    for pair in [[-2, -1], [-1, 0], [0, 1], [1, 2], [-1, 1], [0, 2]] {
        let value = format!("{}{}", ctx.token(pair[0]), ctx.token(pair[1]));
        out.emit(format!("T2{}", offsets(&pair)), value);
    }
    for other in [-2, 1] {
        let value = match ctx.index(other) {
            Some(_) => if ctx.token(0) == ctx.token(other) { "1" } else { "0" },
            None => Context::sentinel(other),
        };
        out.emit(format!("T3{}", offsets(&[0, other])), value);
    }
    out.emit(
        "T4[-1,0,1]".to_string(),
        format!("{}{}{}", ctx.token(-1), ctx.token(0), ctx.token(1)),
    );
    out.emit("T5[0]".to_string(), char_type_digit(ctx.token(0)));
    let types = |range: std::ops::RangeInclusive<isize>| -> String {
        range.map(|k| ctx.map(k, char_type_digit)).collect()
    };
    out.emit("T6[-1,0,1]".to_string(), types(-1..=1));
    out.emit("T7[-2,-1,0,1,2]".to_string(), types(-2..=2));
}

fn emit_affixes(
    ctx: &Context<'_>,
    row: u8,
    offset: isize,
    max_len: usize,
    suffix: bool,
    out: &mut Emitter,
) {
    let name = format!("T{row}{}", offsets(&[offset]));
    let Some(j) = ctx.index(offset) else {
        out.emit(name, Context::sentinel(offset));
        return;
    };
    let chars: Vec<char> = ctx.s.tokens[j].chars().collect();
    let (tag, n) = (if suffix { 's' } else { 'p' }, chars.len());
    for len in 1..=max_len.min(n) {
        let affix: String = if suffix {
            chars[n - len..].iter().collect()
        } else {
            chars[..len].iter().collect()
        };
        out.emit(format!("{name}{tag}{len}"), affix);
    }
}

fn pos_templates(ctx: &Context<'_>, affix_len: usize, lang: Language, out: &mut Emitter) {
    for k in -2..=2 {
        out.emit(format!("T1{}", offsets(&[k])), ctx.token(k));
    }
    for pair in [[-1, 0], [0, 1], [-1, 1]] {
        let value = format!("{} {}", ctx.token(pair[0]), ctx.token(pair[1]));
        out.emit(format!("T2{}", offsets(&pair)), value);
    }
    emit_affixes(ctx, 3, 0, affix_len, false, out);
    emit_affixes(ctx, 4, 0, affix_len, true, out);
    if lang == Language::Zh {
        let len = ctx.token(0).chars().count();
        let bucket = if len >= MAX_LENGTH_BUCKET {
            format!("{MAX_LENGTH_BUCKET}+")
        } else {
            len.to_string()
        };
        out.emit("T5[0]".to_string(), bucket);
    }
}

fn capital(ctx: &Context<'_>, k: isize) -> String {
    ctx.map(k, |w| if is_capitalized(w) { "1" } else { "0" }.to_string())
}

fn connect(ctx: &Context<'_>, k: isize) -> String {
    ctx.map(k, |w| connect_class(w).name().to_string())
}

/// `None` on an in-range lexicon miss; sentinels pass through.
fn cluster(ctx: &Context<'_>, t: &TemplateSet, k: isize) -> Option<String> {
    match ctx.index(k) {
        Some(j) => t.lexicons.clusters.get(&ctx.s.tokens[j]).cloned(),
        None => Some(Context::sentinel(k).to_string()),
    }
}

fn pos_rows(ctx: &Context<'_>, first_row: u8, out: &mut Emitter) {
    out.emit(format!("T{first_row}[0]"), ctx.pos(0));
    for k in -1..=0 {
        out.emit(
            format!("T{}{}", first_row + 1, offsets(&[k, k + 1])),
            format!("{} {}", ctx.pos(k), ctx.pos(k + 1)),
        );
    }
    out.emit(
        format!("T{}[-1,0,1]", first_row + 2),
        format!("{} {} {}", ctx.pos(-1), ctx.pos(0), ctx.pos(1)),
    );
    out.emit(
        format!("T{}[0]", first_row + 3),
        format!("{} {}", ctx.pos(0), ctx.token(0)),
    );
}

fn en_ner_templates(ctx: &Context<'_>, t: &TemplateSet, out: &mut Emitter) {
    for k in -1..=1 {
        out.emit(format!("T1{}", offsets(&[k])), ctx.token(k));
    }
    for k in -2..=1 {
        out.emit(
            format!("T2{}", offsets(&[k, k + 1])),
            format!("{} {}", ctx.token(k), ctx.token(k + 1)),
        );
    }
    for k in -1..=1 {
        out.emit(format!("T3{}", offsets(&[k])), ctx.map(k, word_shape));
    }
    for k in -1..=0 {
        out.emit(
            format!("T4{}", offsets(&[k, k + 1])),
            format!("{} {}", ctx.map(k, word_shape), ctx.map(k + 1, word_shape)),
        );
    }
    for k in -1..=1 {
        out.emit(format!("T5{}", offsets(&[k])), capital(ctx, k));
    }
    for i in -1..=1 {
        for j in -1..=1 {
            out.emit(
                format!("T6{}", offsets(&[i, j])),
                format!("{} {}", capital(ctx, i), ctx.token(j)),
            );
        }
    }
    for k in -1..=1 {
        out.emit(format!("T7{}", offsets(&[k])), connect(ctx, k));
    }
    for k in -1..=1 {
        out.emit(
            format!("T8{}", offsets(&[k, 0])),
            format!("{} {}", capital(ctx, k), connect(ctx, 0)),
        );
    }
    for k in -1..=1 {
        if let Some(c) = cluster(ctx, t, k) {
            out.emit(format!("T9{}", offsets(&[k])), c);
        }
    }
    for k in -1..=0 {
        if let (Some(a), Some(b)) = (cluster(ctx, t, k), cluster(ctx, t, k + 1)) {
            out.emit(format!("T10{}", offsets(&[k, k + 1])), format!("{a} {b}"));
        }
    }
    for k in 0..=1 {
        emit_affixes(ctx, 11, k, t.affix_len, false, out);
    }
    for k in -1..=0 {
        emit_affixes(ctx, 12, k, t.affix_len, true, out);
    }
    pos_rows(ctx, 13, out);
}

fn zh_ner_templates(ctx: &Context<'_>, t: &TemplateSet, out: &mut Emitter) {
    pos_rows(ctx, 1, out);
    for k in -1..=1 {
        out.emit(format!("T6{}", offsets(&[k])), ctx.token(k));
    }
    for i in 0..=1 {
        out.emit(
            format!("T7{}", offsets(&[i - 1, i])),
            format!("{} {}", ctx.token(i - 1), ctx.token(i)),
        );
    }
    for k in -1..=0 {
        emit_affixes(ctx, 8, k, t.affix_len, false, out);
    }
    for k in -1..=0 {
        emit_affixes(ctx, 9, k, t.affix_len, true, out);
    }
    for (k, c) in ctx.token(0).chars().take(5).enumerate() {
        if let Some(radical) = t.lexicons.radicals.get(&c) {
            out.emit(format!("T10[0]r{k}"), radical);
        }
    }
    if let Some(c) = cluster(ctx, t, 0) {
        out.emit("T11[0]".to_string(), c);
    }
}

/// Label bigram edge feature string.
pub fn edge_feature_string(labels: &LabelAlphabet, prev: Option<usize>, y: usize) -> String {
    let prev = prev.map_or(START_LABEL, |p| labels.label(p));
    format!("BI={prev}|{}", labels.label(y))
}

/// Number of distinct edge features over `n_labels` labels plus the start.
pub fn edge_feature_count(n_labels: usize) -> usize {
    (n_labels + 1) * n_labels
}

/// Index of the label-bigram edge feature; the start state is row `L`.
pub fn edge_feature_id(n_labels: usize, prev: Option<usize>, y: usize) -> usize {
    prev.unwrap_or(n_labels) * n_labels + y
}

pub fn extract_edge_features(labels: &LabelAlphabet, prev: Option<usize>, y: usize) -> SparseFeatureVector {
    SparseFeatureVector::from_ids(vec![edge_feature_id(labels.len(), prev, y)])
}

/// Binary feature vector stored as strictly increasing ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseFeatureVector {
    ids: Vec<usize>,
}

impl SparseFeatureVector {
    pub fn from_ids(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self { ids }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.ids.iter().map(|&i| weights[i]).sum()
    }
}

/// Exact map from observation strings to ids. Output feature ids combine an
/// observation with a label: `obs * n_labels + label`, dense in
/// `[0, len())`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureAlphabet {
    observations: Vec<String>,
    index: HashMap<String, u32>,
    n_labels: usize,
    frozen: bool,
}

impl FeatureAlphabet {
    pub fn new(n_labels: usize) -> Self {
        Self {
            n_labels,
            ..Self::default()
        }
    }

    pub fn from_observations(n_labels: usize, observations: Vec<String>) -> Self {
        let index = observations
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i as u32))
            .collect();
        Self {
            observations,
            index,
            n_labels,
            frozen: true,
        }
    }

    /// Looks up an observation, adding it first if the alphabet is open.
    pub fn intern(&mut self, observation: &str) -> Option<u32> {
        if let Some(&id) = self.index.get(observation) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.observations.len() as u32;
        self.observations.push(observation.to_string());
        self.index.insert(observation.to_string(), id);
        Some(id)
    }

    pub fn observation_id(&self, observation: &str) -> Option<u32> {
        self.index.get(observation).copied()
    }

    pub fn feature_id(&self, observation: u32, label: usize) -> usize {
        observation as usize * self.n_labels + label
    }

    /// Id of a full output feature string `<observation>|<label>`.
    pub fn get(&self, feature: &str, labels: &LabelAlphabet) -> Option<usize> {
        let (obs, label) = feature.rsplit_once('|')?;
        Some(self.feature_id(self.observation_id(obs)?, labels.get(label)?))
    }

    /// Inverse of [`FeatureAlphabet::get`].
    pub fn feature_string(&self, id: usize, labels: &LabelAlphabet) -> String {
        format!(
            "{}|{}",
            self.observations[id / self.n_labels],
            labels.label(id % self.n_labels)
        )
    }

    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn observation_count(&self) -> usize {
        self.observations.len()
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    /// Number of output features (observations × labels).
    pub fn len(&self) -> usize {
        self.observations.len() * self.n_labels
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Sentence {
        let tokens: Vec<String> = s.chars().map(String::from).collect();
        Sentence::new(tokens, None, None).unwrap()
    }

    #[test]
    fn char_types() {
        assert_eq!(char_type('，'), CharType::Punct);
        assert_eq!(char_type('.'), CharType::Punct);
        assert_eq!(char_type('7'), CharType::Num);
        assert_eq!(char_type('７'), CharType::Num);
        assert_eq!(char_type('三'), CharType::Num);
        assert_eq!(char_type('A'), CharType::Alpha);
        assert_eq!(char_type('ｂ'), CharType::Alpha);
        assert_eq!(char_type('猫'), CharType::Other);
    }

    // Date membership checked against the fixed set, one lookup per char.
    #[test]
    fn date_chars_table_lookup() {
        for c in "年月日时分秒".chars() {
            assert_eq!(char_type(c), CharType::Date);
        }
        for c in "周星期".chars() {
            assert_ne!(char_type(c), CharType::Date);
        }
    }

    #[test]
    fn shapes() {
        assert_eq!(word_shape("EU"), "UU");
        assert_eq!(word_shape("Yang3"), "ULLLD");
        // Character by character: m i d - 1 9 9 0 s
        let oracle: String = "mid-1990s"
            .chars()
            .map(|c| match c {
                '0'..='9' => 'D',
                'a'..='z' => 'L',
                'A'..='Z' => 'U',
                _ => 'O',
            })
            .collect();
        assert_eq!(oracle, "LLLODDDDL");
        assert_eq!(word_shape("mid-1990s"), oracle);
    }

    #[test]
    fn connect_classes() {
        assert_eq!(connect_class("of"), ConnectClass::Of);
        assert_eq!(connect_class("OF"), ConnectClass::Of);
        assert_eq!(connect_class("-"), ConnectClass::Hyphen);
        assert_eq!(connect_class("offer"), ConnectClass::Other);
        assert_eq!(connect_class("And"), ConnectClass::And);
        assert_eq!(connect_class("for"), ConnectClass::For);
    }

    #[test]
    fn seg_unigrams_with_sentinels() {
        let t = TemplateSet::new(Task::Seg, Language::Zh);
        let f = t.output_feature_strings(&chars("中国人"), 1, "E").unwrap();
        for expected in ["T1[-1]=中|E", "T1[0]=国|E", "T1[1]=人|E", "T1[-2]=<S>|E", "T1[2]=</S>|E"] {
            assert!(f.contains(&expected.to_string()), "{expected} missing from {f:?}");
        }
    }

    #[test]
    fn seg_equality_features() {
        let t = TemplateSet::new(Task::Seg, Language::Zh);
        let obs = t.observations(&chars("AAB"), 2).unwrap();
        let eq: Vec<&String> = obs.iter().filter(|o| o.starts_with("T3")).collect();
        assert_eq!(eq, vec!["T3[0,-2]=0", "T3[0,1]=</S>"]);
    }

    #[test]
    fn english_pos_prefixes() {
        let t = TemplateSet::new(Task::Pos, Language::En);
        let obs = t.observations(&Sentence::from_tokens(&["running"]).unwrap(), 0).unwrap();
        let prefixes: Vec<&String> = obs.iter().filter(|o| o.starts_with("T3")).collect();
        assert_eq!(
            prefixes,
            vec!["T3[0]p1=r", "T3[0]p2=ru", "T3[0]p3=run", "T3[0]p4=runn", "T3[0]p5=runni"]
        );
    }

    #[test]
    fn label_factoring() {
        let t = TemplateSet::new(Task::Seg, Language::Zh);
        let s = chars("我爱北京");
        let a = t.output_feature_strings(&s, 2, "B").unwrap();
        let b = t.output_feature_strings(&s, 2, "S").unwrap();
        let strip = |v: &[String]| -> Vec<String> {
            v.iter().map(|f| f.rsplit_once('|').unwrap().0.to_string()).collect()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn alphabet_freeze_and_ids() {
        let labels = LabelAlphabet::from_labels(&["B", "I", "E", "S"]);
        let t = TemplateSet::new(Task::Seg, Language::Zh);
        let mut alphabet = FeatureAlphabet::new(labels.len());
        let s = chars("中国人");
        let v = t.extract_output_features(&mut alphabet, &labels, &s, 1, "E").unwrap();
        assert!(v.ids().windows(2).all(|w| w[0] < w[1]));
        assert!(v.ids().iter().all(|&id| id < alphabet.len()));
        for &id in v.ids() {
            let f = alphabet.feature_string(id, &labels);
            assert_eq!(alphabet.get(&f, &labels), Some(id));
        }
        alphabet.freeze();
        let size = alphabet.len();
        let other = chars("猫狗鱼");
        t.extract_output_features(&mut alphabet, &labels, &other, 1, "S").unwrap();
        assert_eq!(alphabet.len(), size);
        assert!(t
            .extract_output_features(&mut alphabet, &labels, &s, 1, "X")
            .is_err());
    }

    #[test]
    fn edge_features() {
        let labels = LabelAlphabet::from_labels(&["B", "I", "E", "S"]);
        assert_eq!(edge_feature_string(&labels, Some(0), 2), "BI=B|E");
        assert_eq!(edge_feature_string(&labels, None, 3), "BI=<START>|S");
        let mut all = HashSet::new();
        let mut ids = HashSet::new();
        for prev in (0..4).map(Some).chain([None]) {
            for y in 0..4 {
                all.insert(edge_feature_string(&labels, prev, y));
                ids.insert(extract_edge_features(&labels, prev, y).ids()[0]);
            }
        }
        assert_eq!(all.len(), 20);
        assert_eq!(ids.len(), 20);
        assert!(ids.iter().all(|&i| i < edge_feature_count(4)));
    }

    #[test]
    fn ner_needs_pos_column() {
        let t = TemplateSet::new(Task::Ner, Language::En);
        assert!(t.observations(&Sentence::from_tokens(&["EU"]).unwrap(), 0).is_err());
    }

    #[test]
    fn chinese_length_bucket() {
        let t = TemplateSet::new(Task::Pos, Language::Zh);
        let s = Sentence::from_tokens(&["中华人民共和国", "人"]).unwrap();
        let obs0 = t.observations(&s, 0).unwrap();
        assert!(obs0.contains(&"T5[0]=6+".to_string()));
        let obs1 = t.observations(&s, 1).unwrap();
        assert!(obs1.contains(&"T5[0]=1".to_string()));
    }
}
