//! Dense embedding tables and the per-task input composition `e(x_i)`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::features::{Task, EOS};
use crate::trainer::adagrad::AdaGrad;

pub const UNK: &str = "<UNK>";

/// Half-width of the uniform range used for fresh rows.
pub const INIT_RANGE: f64 = 0.01;

/// Default dimension of POS-tag embeddings.
pub const POS_EMB_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub name: String,
    symbols: Vec<String>,
    vocab: HashMap<String, usize>,
    pub matrix: Array2<f64>,
    pub fine_tune: bool,
    /// Lowercase keys before lookup (for lowercased pretrained files).
    pub lowercase: bool,
    unk_row: usize,
}

impl EmbeddingTable {
    /// Builds a table from symbols and rows; `<UNK>` is appended as a zero
    /// row when absent.
    pub fn from_rows(name: &str, symbols: Vec<String>, matrix: Array2<f64>) -> Result<Self> {
        if symbols.len() != matrix.nrows() {
            return Err(Error::LengthMismatch {
                what: "symbols/rows",
                left: symbols.len(),
                right: matrix.nrows(),
            });
        }
        if matrix.ncols() == 0 {
            return Err(Error::Dimension("embedding dimension must be positive".into()));
        }
        let mut symbols = symbols;
        let mut matrix = matrix;
        let mut vocab = HashMap::with_capacity(symbols.len() + 1);
        for (i, s) in symbols.iter().enumerate() {
            vocab.insert(s.clone(), i);
        }
        let unk_row = match vocab.get(UNK) {
            Some(&row) => row,
            None => {
                let row = symbols.len();
                symbols.push(UNK.to_string());
                vocab.insert(UNK.to_string(), row);
                matrix.push_row(Array1::zeros(matrix.ncols()).view())
                    .expect("row width matches");
                row
            }
        };
        Ok(Self {
            name: name.to_string(),
            symbols,
            vocab,
            matrix,
            fine_tune: true,
            lowercase: false,
            unk_row,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn unk_row(&self) -> usize {
        self.unk_row
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.vocab.contains_key(self.key(symbol).as_ref())
    }

    fn key<'a>(&self, symbol: &'a str) -> std::borrow::Cow<'a, str> {
        if self.lowercase {
            symbol.to_lowercase().into()
        } else {
            symbol.into()
        }
    }

    /// Row index for a symbol; unknown symbols map to `<UNK>`.
    pub fn lookup(&self, symbol: &str) -> usize {
        self.vocab
            .get(self.key(symbol).as_ref())
            .copied()
            .unwrap_or(self.unk_row)
    }

    pub fn vector(&self, symbol: &str) -> ArrayView1<'_, f64> {
        self.matrix.row(self.lookup(symbol))
    }

    /// Writes `symbol v1 ... vD` lines, `<UNK>` included.
    pub fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (symbol, row) in self.symbols.iter().zip(self.matrix.rows()) {
            out.write_all(symbol.as_bytes())?;
            for v in row {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_text(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// AdaGrad update of the touched rows only. Gradients for the same row
    /// must already be summed into one entry.
    pub fn apply_sparse_gradient(
        &mut self,
        grads: &BTreeMap<usize, Array1<f64>>,
        accumulator: &mut Array2<f64>,
        optimizer: &AdaGrad,
    ) -> Result<()> {
        if !self.fine_tune {
            return Err(Error::FrozenTable(self.name.clone()));
        }
        if accumulator.dim() != self.matrix.dim() {
            return Err(Error::Dimension(format!(
                "accumulator {:?} for table {:?}",
                accumulator.dim(),
                self.matrix.dim()
            )));
        }
        for (&row, grad) in grads {
            if grad.len() != self.dim() {
                return Err(Error::Dimension(format!(
                    "gradient of width {} for table {} of dim {}",
                    grad.len(),
                    self.name,
                    self.dim()
                )));
            }
            let mut params = self.matrix.row_mut(row);
            let mut acc = accumulator.row_mut(row);
            for ((p, a), &g) in params.iter_mut().zip(acc.iter_mut()).zip(grad) {
                optimizer.step(p, g, a)?;
            }
        }
        Ok(())
    }
}

/// Loads a word2vec-style text file. A leading `count dim` header line is
/// detected and skipped.
pub fn load_text_embeddings(name: &str, path: impl AsRef<Path>, dim_expected: usize) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_text_embeddings(name, &text, dim_expected, path)
}

pub fn parse_text_embeddings(
    name: &str,
    text: &str,
    dim_expected: usize,
    origin: impl AsRef<Path>,
) -> Result<EmbeddingTable> {
    let origin = origin.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut symbols: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut values: Vec<f64> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if lineno == 0
            && fields.len() == 2
            && fields.iter().all(|f| f.parse::<usize>().is_ok())
        {
            continue;
        }
        if fields.len() != dim_expected + 1 {
            return Err(parse_err(
                lineno + 1,
                format!(
                    "expected {dim_expected} values, found {}",
                    fields.len().saturating_sub(1)
                ),
            ));
        }
        let mut row = Vec::with_capacity(dim_expected);
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(lineno + 1, format!("bad number {f:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno + 1, format!("non-finite value {f:?}")));
            }
            row.push(v);
        }
        let symbol = fields[0];
        match index.get(symbol) {
            Some(&r) => {
                log::warn!(
                    "{}:{}: duplicate symbol {symbol:?}, keeping the later vector",
                    origin.display(),
                    lineno + 1
                );
                values[r * dim_expected..(r + 1) * dim_expected].copy_from_slice(&row);
            }
            None => {
                index.insert(symbol.to_string(), symbols.len());
                symbols.push(symbol.to_string());
                values.extend(row);
            }
        }
    }
    if dim_expected == 0 {
        return Err(Error::Dimension("embedding dimension must be positive".into()));
    }
    let matrix = Array2::from_shape_vec((symbols.len(), dim_expected), values)
        .expect("row-major values");
    EmbeddingTable::from_rows(name, symbols, matrix)
}

/// Fresh table with entries uniform in `[-0.01, 0.01]`.
pub fn init_random_table(name: &str, vocab: &[String], dim: usize, seed: u64) -> Result<EmbeddingTable> {
    if dim == 0 {
        return Err(Error::Dimension("embedding dimension must be positive".into()));
    }
    let mut symbols: Vec<String> = Vec::with_capacity(vocab.len() + 1);
    let mut seen = std::collections::HashSet::new();
    for s in vocab {
        if seen.insert(s.as_str()) {
            symbols.push(s.clone());
        }
    }
    if !seen.contains(UNK) {
        symbols.push(UNK.to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = Array2::from_shape_simple_fn((symbols.len(), dim), || {
        rng.random_range(-INIT_RANGE..=INIT_RANGE)
    });
    EmbeddingTable::from_rows(name, symbols, matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableRole {
    Char,
    Bigram,
    Word,
    PosTag,
}

impl TableRole {
    pub fn name(self) -> &'static str {
        match self {
            TableRole::Char => "char",
            TableRole::Bigram => "bigram",
            TableRole::Word => "word",
            TableRole::PosTag => "pos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "char" => Some(TableRole::Char),
            "bigram" => Some(TableRole::Bigram),
            "word" => Some(TableRole::Word),
            "pos" => Some(TableRole::PosTag),
            _ => None,
        }
    }
}

/// Tables a task composes, in concatenation order.
pub fn task_roles(task: Task) -> &'static [TableRole] {
    match task {
        Task::Seg => &[TableRole::Char, TableRole::Bigram],
        Task::Pos => &[TableRole::Word, TableRole::Char],
        Task::Ner => &[TableRole::Word, TableRole::Char, TableRole::PosTag],
    }
}

fn bigram(s: &Sentence, i: usize) -> String {
    let next = s.tokens.get(i + 1).map_or(EOS, String::as_str);
    format!("{}{next}", s.tokens[i])
}

/// Symbols a token contributes to one table; several symbols are averaged.
pub fn role_symbols(role: TableRole, task: Task, s: &Sentence, i: usize) -> Result<Vec<String>> {
    Ok(match (role, task) {
        (TableRole::Char, Task::Seg) => vec![s.tokens[i].clone()],
        (TableRole::Char, _) => s.tokens[i].chars().map(String::from).collect(),
        (TableRole::Bigram, _) => vec![bigram(s, i)],
        (TableRole::Word, _) => vec![s.tokens[i].clone()],
        (TableRole::PosTag, _) => match &s.aux_tags {
            Some(aux) => vec![aux[i].clone()],
            None => {
                return Err(Error::InvalidArgument(
                    "NER input composition needs the POS tag column".into(),
                ))
            }
        },
    })
}

/// Rows, per table, that make up one token's input vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRows {
    pub parts: Vec<Vec<usize>>,
}

/// Concatenates per-table (mean-pooled) embeddings into `e(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputComposer {
    pub task: Task,
    pub tables: Vec<(TableRole, EmbeddingTable)>,
}

impl InputComposer {
    pub fn new(task: Task, tables: Vec<(TableRole, EmbeddingTable)>) -> Result<Self> {
        let roles: Vec<TableRole> = tables.iter().map(|(r, _)| *r).collect();
        if roles != task_roles(task) {
            return Err(Error::InvalidArgument(format!(
                "{task} composes {:?}, got {roles:?}",
                task_roles(task)
            )));
        }
        Ok(Self { task, tables })
    }

    pub fn dim(&self) -> usize {
        self.tables.iter().map(|(_, t)| t.dim()).sum()
    }

    pub fn table(&self, role: TableRole) -> Option<&EmbeddingTable> {
        self.tables.iter().find(|(r, _)| *r == role).map(|(_, t)| t)
    }

    pub fn lookup_token(&self, s: &Sentence, i: usize) -> Result<TokenRows> {
        let parts = self
            .tables
            .iter()
            .map(|(role, table)| {
                Ok(role_symbols(*role, self.task, s, i)?
                    .iter()
                    .map(|sym| table.lookup(sym))
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(TokenRows { parts })
    }

    pub fn lookup_sentence(&self, s: &Sentence) -> Result<Vec<TokenRows>> {
        (0..s.len()).map(|i| self.lookup_token(s, i)).collect()
    }

    pub fn compose_rows(&self, rows: &TokenRows) -> Array1<f64> {
        let mut out = Array1::zeros(self.dim());
        let mut offset = 0;
        for ((_, table), part) in self.tables.iter().zip(&rows.parts) {
            let dim = table.dim();
            let mut slot = out.slice_mut(s![offset..offset + dim]);
            for &r in part {
                slot += &table.matrix.row(r);
            }
            if part.len() > 1 {
                slot /= part.len() as f64;
            }
            offset += dim;
        }
        out
    }

    pub fn compose_input(&self, s: &Sentence, i: usize) -> Result<Array1<f64>> {
        Ok(self.compose_rows(&self.lookup_token(s, i)?))
    }

    /// Routes a gradient on a composed vector back to table rows, summing
    /// into `grads[table][row]`.
    pub fn backward_rows(
        &self,
        rows: &TokenRows,
        grad: ArrayView1<'_, f64>,
        grads: &mut [BTreeMap<usize, Array1<f64>>],
    ) {
        let mut offset = 0;
        for (t, ((_, table), part)) in self.tables.iter().zip(&rows.parts).enumerate() {
            let dim = table.dim();
            let g = grad.slice(s![offset..offset + dim]);
            let scale = 1.0 / part.len() as f64;
            for &r in part {
                let entry = grads[t].entry(r).or_insert_with(|| Array1::zeros(dim));
                entry.scaled_add(scale, &g);
            }
            offset += dim;
        }
    }
}

/// Sorted distinct symbols a corpus contributes to one table.
pub fn role_vocabulary(role: TableRole, task: Task, sentences: &[Sentence]) -> Result<Vec<String>> {
    let mut vocab = std::collections::BTreeSet::new();
    for s in sentences {
        for i in 0..s.len() {
            vocab.extend(role_symbols(role, task, s, i)?);
        }
    }
    Ok(vocab.into_iter().collect())
}

impl InputComposer {
    /// One table per task role: the pretrained table when given, otherwise
    /// a random table over the training vocabulary. Table `k` is seeded
    /// with `seed + k`.
    pub fn build(
        task: Task,
        train: &[Sentence],
        mut pretrained: Vec<(TableRole, EmbeddingTable)>,
        dim: impl Fn(TableRole) -> usize,
        fine_tune: bool,
        seed: u64,
    ) -> Result<Self> {
        let mut tables = Vec::new();
        for (k, &role) in task_roles(task).iter().enumerate() {
            let mut table = match pretrained.iter().position(|(r, _)| *r == role) {
                Some(at) => pretrained.swap_remove(at).1,
                None => {
                    let vocab = role_vocabulary(role, task, train)?;
                    init_random_table(role.name(), &vocab, dim(role), seed.wrapping_add(k as u64))?
                }
            };
            table.fine_tune = fine_tune;
            tables.push((role, table));
        }
        if let Some((role, _)) = pretrained.first() {
            return Err(Error::InvalidArgument(format!(
                "{task} does not use a {} table",
                role.name()
            )));
        }
        Self::new(task, tables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn table(name: &str, rows: &[(&str, &[f64])]) -> EmbeddingTable {
        let dim = rows[0].1.len();
        let symbols = rows.iter().map(|(s, _)| s.to_string()).collect();
        let values = rows.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        EmbeddingTable::from_rows(
            name,
            symbols,
            Array2::from_shape_vec((rows.len(), dim), values).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn load_plain_file() {
        let t = parse_text_embeddings("w", "a 0.1 0.2\nb 0.3 0.4\n", 2, "e.txt").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.vector("a"), array![0.1, 0.2]);
        assert_eq!(t.lookup("zzz"), t.unk_row());
    }

    #[test]
    fn header_is_skipped() {
        let a = parse_text_embeddings("w", "a 0.1 0.2\nb 0.3 0.4\n", 2, "e").unwrap();
        let b = parse_text_embeddings("w", "2 2\na 0.1 0.2\nb 0.3 0.4\n", 2, "e").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_names_line() {
        let err = parse_text_embeddings("w", "a 0.1 0.2\nb 0.3 0.4 0.5\n", 2, "e").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_symbol_last_wins() {
        let t = parse_text_embeddings("w", "a 0.1 0.2\na 0.5 0.6\n", 2, "e").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.vector("a"), array![0.5, 0.6]);
    }

    #[test]
    fn random_init_deterministic_and_bounded() {
        let vocab: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let a = init_random_table("c", &vocab, 30, 7).unwrap();
        let b = init_random_table("c", &vocab, 30, 7).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.dim(), 30);
        assert!(a.matrix.iter().all(|v| v.abs() <= INIT_RANGE));
        let c = init_random_table("c", &vocab, 30, 8).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn save_load_round_trip() {
        let vocab: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let t = init_random_table("c", &vocab, 5, 1).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = parse_text_embeddings("c", std::str::from_utf8(&buf).unwrap(), 5, "m").unwrap();
        assert_eq!(back.matrix, t.matrix);
        assert_eq!(back.symbols(), t.symbols());
        assert_eq!(back.unk_row(), t.unk_row());
    }

    #[test]
    fn seg_composition_with_boundary_bigram() {
        let chars = table("c", &[("中", &[1.0]), ("国", &[2.0])]);
        let bigrams = table("b", &[("中国", &[3.0, 4.0]), ("国</S>", &[5.0, 6.0])]);
        let comp = InputComposer::new(
            Task::Seg,
            vec![(TableRole::Char, chars), (TableRole::Bigram, bigrams)],
        )
        .unwrap();
        let s = Sentence::from_tokens(&["中", "国"]).unwrap();
        assert_eq!(comp.compose_input(&s, 0).unwrap(), array![1.0, 3.0, 4.0]);
        assert_eq!(comp.compose_input(&s, 1).unwrap(), array![2.0, 5.0, 6.0]);
    }

    #[test]
    fn pos_composition_mean_pools_characters() {
        let words = table("w", &[("ab", &[0.5, -0.5])]);
        let chars = table("c", &[("a", &[1.0, 2.0]), ("b", &[3.0, -4.0])]);
        let comp = InputComposer::new(
            Task::Pos,
            vec![(TableRole::Word, words), (TableRole::Char, chars)],
        )
        .unwrap();
        let s = Sentence::from_tokens(&["ab", "q"]).unwrap();
        // (1 + 3) / 2 = 2, (2 - 4) / 2 = -1
        assert_eq!(comp.compose_input(&s, 0).unwrap(), array![0.5, -0.5, 2.0, -1.0]);
        let unk = comp.compose_input(&s, 1).unwrap();
        assert_eq!(unk.len(), 4);
        assert_eq!(unk, array![0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ner_composition_needs_pos_tags() {
        let comp = InputComposer::new(
            Task::Ner,
            vec![
                (TableRole::Word, table("w", &[("EU", &[1.0])])),
                (TableRole::Char, table("c", &[("E", &[1.0])])),
                (TableRole::PosTag, table("p", &[("NNP", &[1.0])])),
            ],
        )
        .unwrap();
        let s = Sentence::from_tokens(&["EU"]).unwrap();
        assert!(comp.compose_input(&s, 0).is_err());
        let s = s.with_aux(&["NNP"]).unwrap();
        assert_eq!(comp.compose_input(&s, 0).unwrap().len(), comp.dim());
    }

    #[test]
    fn wrong_roles_rejected() {
        let t = table("w", &[("a", &[1.0])]);
        assert!(InputComposer::new(Task::Seg, vec![(TableRole::Word, t)]).is_err());
    }

    #[test]
    fn sparse_update_touches_only_given_rows() {
        let mut t = table("w", &[("a", &[1.0, 1.0]), ("b", &[2.0, 2.0])]);
        let mut acc = Array2::zeros(t.matrix.dim());
        let opt = AdaGrad::new(0.1, 0.0);
        let before_b = t.vector("b").to_owned();
        let mut grads = BTreeMap::new();
        grads.insert(t.lookup("a"), array![1.0, -1.0]);
        t.apply_sparse_gradient(&grads, &mut acc, &opt).unwrap();
        assert_eq!(t.vector("b"), before_b);
        assert_ne!(t.vector("a"), array![1.0, 1.0]);
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut t = table("w", &[("a", &[1.0, 1.0])]);
        let mut acc = Array2::zeros(t.matrix.dim());
        let before = t.matrix.clone();
        let mut grads = BTreeMap::new();
        grads.insert(0, array![0.0, 0.0]);
        t.apply_sparse_gradient(&grads, &mut acc, &AdaGrad::new(0.1, 0.0)).unwrap();
        assert_eq!(t.matrix, before);
        assert!(acc.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn frozen_table_rejects_updates() {
        let mut t = table("w", &[("a", &[1.0])]);
        t.fine_tune = false;
        let mut acc = Array2::zeros(t.matrix.dim());
        let grads = BTreeMap::new();
        assert!(matches!(
            t.apply_sparse_gradient(&grads, &mut acc, &AdaGrad::new(0.1, 0.0)),
            Err(Error::FrozenTable(_))
        ));
    }

    // Two contributions to one row, summed by backward_rows, must match a
    // dense update of the whole matrix with the summed gradient.
    #[test]
    fn repeated_rows_sum_before_the_step() {
        let words = table("w", &[("aa", &[0.0]), ("x", &[0.0]), ("y", &[0.0])]);
        let chars = table("c", &[("a", &[0.2, 0.4]), ("x", &[0.1, 0.1]), ("y", &[-0.3, 0.0])]);
        let mut comp = InputComposer::new(
            Task::Pos,
            vec![(TableRole::Word, words), (TableRole::Char, chars)],
        )
        .unwrap();
        let s = Sentence::from_tokens(&["aa"]).unwrap();
        let rows = comp.lookup_token(&s, 0).unwrap();
        let mut grads = vec![BTreeMap::new(), BTreeMap::new()];
        comp.backward_rows(&rows, array![0.0, 0.6, -0.8].view(), &mut grads);
        let char_grads = &grads[1];
        assert_eq!(char_grads.len(), 1);

        let opt = AdaGrad::new(0.05, 0.0);
        let mut dense = comp.tables[1].1.matrix.clone();
        let mut dense_acc = Array2::<f64>::zeros(dense.dim());
        let mut dense_grad = Array2::<f64>::zeros(dense.dim());
        // a appears twice with weight 1/2 each
        dense_grad.row_mut(0).assign(&array![0.6, -0.8]);
        for ((p, a), &g) in dense.iter_mut().zip(dense_acc.iter_mut()).zip(dense_grad.iter()) {
            opt.step(p, g, a).unwrap();
        }
        let mut acc = Array2::zeros(dense.dim());
        comp.tables[1].1.apply_sparse_gradient(char_grads, &mut acc, &opt).unwrap();
        assert_eq!(comp.tables[1].1.matrix, dense);
        assert_eq!(acc, dense_acc);
    }

    #[test]
    fn build_prefers_pretrained_tables() {
        let s = vec![Sentence::labeled(&["ab", "c"], &["X", "Y"]).unwrap()];
        let word = parse_text_embeddings("word", "ab 1 2\n", 2, "w.txt").unwrap();
        let comp = InputComposer::build(Task::Pos, &s, vec![(TableRole::Word, word)], |_| 3, false, 7).unwrap();
        assert_eq!(comp.dim(), 5);
        assert_eq!(comp.tables[0].1.vector("ab").to_vec(), vec![1.0, 2.0]);
        assert_eq!(comp.tables[1].1.symbols(), &["a", "b", "c", UNK]);
        assert!(comp.tables.iter().all(|(_, t)| !t.fine_tune));
        let bigram = init_random_table("bigram", &["x".to_string()], 2, 0).unwrap();
        assert!(InputComposer::build(Task::Pos, &s, vec![(TableRole::Bigram, bigram)], |_| 3, true, 7).is_err());
    }
}
