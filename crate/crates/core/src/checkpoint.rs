//! Binary model container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "SQLBMODL" | u32 version | u32 section count
//! per section: u16 name length | name (UTF-8) | u64 payload length | payload
//! u32 CRC-32 of every preceding byte
//! ```
//!
//! Numeric sections hold `u32 ndim | u64 dims.. | f64 values..`; string
//! lists hold `u64 count | (u32 length | UTF-8)..`. The `meta` section is a
//! JSON object.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::corpus::{LabelAlphabet, TagScheme};
use crate::crf::model::{DiscreteParams, Mode, ModelParams, NeuralParams};
use crate::embedding::{EmbeddingTable, InputComposer, TableRole};
use crate::encoder::{BiLstm, LstmParams};
use crate::error::{Error, Result};
use crate::features::{FeatureAlphabet, Language, Lexicons, Task, TemplateSet};
use crate::trainer::HyperParams;

pub const MAGIC: &[u8; 8] = b"SQLBMODL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelParams,
    pub task: Task,
    pub language: Language,
    pub scheme: TagScheme,
    pub hyper: HyperParams,
}

#[derive(Debug, Serialize, Deserialize)]
struct TableMeta {
    role: String,
    name: String,
    fine_tune: bool,
    lowercase: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    mode: String,
    task: String,
    language: String,
    scheme: String,
    labels: Vec<String>,
    affix_len: Option<usize>,
    tables: Vec<TableMeta>,
    hyper: HyperParams,
}

fn corrupt(msg: impl std::fmt::Display) -> Error {
    Error::Checkpoint(format!("{msg} (format version {FORMAT_VERSION})"))
}

struct Writer {
    sections: Vec<(String, Vec<u8>)>,
}

impl Writer {
    fn add(&mut self, name: &str, payload: Vec<u8>) {
        self.sections.push((name.to_string(), payload));
    }

    fn array(&mut self, name: &str, shape: &[usize], values: impl Iterator<Item = f64>) {
        let mut p = Vec::new();
        p.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            p.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in values {
            p.extend_from_slice(&v.to_le_bytes());
        }
        self.add(name, p);
    }

    fn matrix(&mut self, name: &str, m: &Array2<f64>) {
        self.array(name, &[m.nrows(), m.ncols()], m.iter().copied());
    }

    fn strings<S: AsRef<str>>(&mut self, name: &str, items: &[S]) {
        let mut p = Vec::new();
        p.extend_from_slice(&(items.len() as u64).to_le_bytes());
        for s in items {
            let b = s.as_ref().as_bytes();
            p.extend_from_slice(&(b.len() as u32).to_le_bytes());
            p.extend_from_slice(b);
        }
        self.add(name, p);
    }

    fn finish(self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.sections.len() as u32).to_le_bytes());
        for (name, payload) in &self.sections {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
            out.extend_from_slice(payload);
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.data.len());
        match end {
            Some(end) => {
                let s = &self.data[self.at..end];
                self.at = end;
                Ok(s)
            }
            None => Err(corrupt("truncated data")),
        }
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("length overflow"))
    }

    fn done(&self) -> bool {
        self.at == self.data.len()
    }
}

struct Reader<'a> {
    sections: BTreeMap<String, &'a [u8]>,
}

impl<'a> Reader<'a> {
    fn parse(bytes: &'a [u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 12 || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Checkpoint("not a model checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint format version {version}; this build reads version {FORMAT_VERSION}"
            )));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(corrupt("checksum mismatch, file is corrupted"));
        }
        let mut c = Cursor { data: body, at: 12 };
        let count = c.u32()?;
        let mut sections = BTreeMap::new();
        for _ in 0..count {
            let n = c.u16()? as usize;
            let name = std::str::from_utf8(c.take(n)?).map_err(|_| corrupt("section name is not UTF-8"))?;
            let len = c.len()?;
            if sections.insert(name.to_string(), c.take(len)?).is_some() {
                return Err(corrupt(format!("duplicate section {name:?}")));
            }
        }
        if !c.done() {
            return Err(corrupt("trailing bytes after sections"));
        }
        Ok(Self { sections })
    }

    fn get(&self, name: &str) -> Result<&'a [u8]> {
        self.sections
            .get(name)
            .copied()
            .ok_or_else(|| corrupt(format!("missing section {name:?}")))
    }

    fn array(&self, name: &str) -> Result<ArrayD<f64>> {
        let mut c = Cursor { data: self.get(name)?, at: 0 };
        let ndim = c.u32()? as usize;
        let shape = (0..ndim).map(|_| c.len()).collect::<Result<Vec<_>>>()?;
        let count = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| corrupt("shape overflow"))?;
        let raw = c.take(count.checked_mul(8).ok_or_else(|| corrupt("shape overflow"))?)?;
        if !c.done() {
            return Err(corrupt(format!("section {name:?} has trailing bytes")));
        }
        let values = raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        ArrayD::from_shape_vec(IxDyn(&shape), values).map_err(corrupt)
    }

    fn matrix(&self, name: &str) -> Result<Array2<f64>> {
        self.array(name)?
            .into_dimensionality()
            .map_err(|_| corrupt(format!("section {name:?} is not a matrix")))
    }

    fn vector(&self, name: &str) -> Result<Array1<f64>> {
        self.array(name)?
            .into_dimensionality()
            .map_err(|_| corrupt(format!("section {name:?} is not a vector")))
    }

    fn strings(&self, name: &str) -> Result<Vec<String>> {
        let mut c = Cursor { data: self.get(name)?, at: 0 };
        let n = c.len()?;
        let mut out = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let len = c.u32()? as usize;
            let s = std::str::from_utf8(c.take(len)?).map_err(|_| corrupt(format!("section {name:?} is not UTF-8")))?;
            out.push(s.to_string());
        }
        if !c.done() {
            return Err(corrupt(format!("section {name:?} has trailing bytes")));
        }
        Ok(out)
    }
}

fn parse_meta<T: std::str::FromStr<Err = Error>>(what: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| corrupt(format!("unknown {what} {v:?}")))
}

fn lstm(w: &mut Writer, prefix: &str, p: &LstmParams) {
    w.matrix(&format!("{prefix}.w_input"), &p.w_input);
    w.matrix(&format!("{prefix}.w_hidden"), &p.w_hidden);
    w.array(&format!("{prefix}.bias"), &[p.bias.len()], p.bias.iter().copied());
}

fn read_lstm(r: &Reader<'_>, prefix: &str) -> Result<LstmParams> {
    Ok(LstmParams {
        w_input: r.matrix(&format!("{prefix}.w_input"))?,
        w_hidden: r.matrix(&format!("{prefix}.w_hidden"))?,
        bias: r.vector(&format!("{prefix}.bias"))?,
    })
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.model;
        let tables: Vec<TableMeta> = m.neural.as_ref().map_or_else(Vec::new, |n| {
            n.composer
                .tables
                .iter()
                .map(|(role, t)| TableMeta {
                    role: role.name().to_string(),
                    name: t.name.clone(),
                    fine_tune: t.fine_tune,
                    lowercase: t.lowercase,
                })
                .collect()
        });
        let meta = Meta {
            mode: m.mode.name().to_string(),
            task: self.task.name().to_string(),
            language: self.language.name().to_string(),
            scheme: self.scheme.name().to_string(),
            labels: m.labels.labels().to_vec(),
            affix_len: m.discrete.as_ref().map(|d| d.templates.affix_len),
            tables,
            hyper: self.hyper.clone(),
        };
        let mut w = Writer { sections: Vec::new() };
        w.add("meta", serde_json::to_vec(&meta).expect("meta serializes"));
        w.array("joint.tau_weight", &[1], std::iter::once(m.tau_weight));
        if let Some(d) = &m.discrete {
            w.strings("discrete.observations", d.alphabet.observations());
            w.array("discrete.weights", &[d.weights.len()], d.weights.iter().copied());
            w.matrix("discrete.edge", &d.edge);
            let clusters: BTreeMap<&String, &String> = d.templates.lexicons.clusters.iter().collect();
            let flat: Vec<&String> = clusters.into_iter().flat_map(|(k, v)| [k, v]).collect();
            w.strings("lexicon.clusters", &flat);
            let radicals: BTreeMap<char, &String> = d.templates.lexicons.radicals.iter().map(|(k, v)| (*k, v)).collect();
            let flat: Vec<String> = radicals.into_iter().flat_map(|(k, v)| [k.to_string(), v.clone()]).collect();
            w.strings("lexicon.radicals", &flat);
        }
        if let Some(n) = &m.neural {
            w.matrix("neural.output", &n.output);
            w.matrix("neural.tau", &n.tau);
            lstm(&mut w, "lstm.forward", &n.encoder.forward);
            lstm(&mut w, "lstm.backward", &n.encoder.backward);
            for (k, (_, t)) in n.composer.tables.iter().enumerate() {
                w.strings(&format!("embedding.{k}.symbols"), t.symbols());
                w.matrix(&format!("embedding.{k}.matrix"), &t.matrix);
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let r = Reader::parse(bytes)?;
        let meta: Meta = serde_json::from_slice(r.get("meta")?).map_err(|e| corrupt(format!("meta: {e}")))?;
        let mode: Mode = parse_meta("mode", &meta.mode)?;
        let task: Task = parse_meta("task", &meta.task)?;
        let language: Language = parse_meta("language", &meta.language)?;
        let scheme: TagScheme = parse_meta("scheme", &meta.scheme)?;
        let labels = LabelAlphabet::from_labels(&meta.labels);
        let l = labels.len();

        let discrete = if mode.uses_discrete() {
            let pairs = |name: &str| -> Result<Vec<(String, String)>> {
                let flat = r.strings(name)?;
                if flat.len() % 2 != 0 {
                    return Err(corrupt(format!("section {name:?} has an odd entry count")));
                }
                Ok(flat.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
            };
            let clusters = pairs("lexicon.clusters")?.into_iter().collect();
            let radicals = pairs("lexicon.radicals")?
                .into_iter()
                .map(|(k, v)| {
                    let mut it = k.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => Ok((c, v)),
                        _ => Err(corrupt("radical key is not one character")),
                    }
                })
                .collect::<Result<_>>()?;
            let mut templates = TemplateSet::new(task, language).with_lexicons(Lexicons { clusters, radicals });
            if let Some(a) = meta.affix_len {
                templates.affix_len = a;
            }
            let alphabet = FeatureAlphabet::from_observations(l, r.strings("discrete.observations")?);
            let mut d = DiscreteParams::new(templates, alphabet);
            let weights = r.vector("discrete.weights")?;
            if weights.len() != d.weights.len() {
                return Err(corrupt("discrete weight count does not match the feature alphabet"));
            }
            d.weights = weights.to_vec();
            d.edge = r.matrix("discrete.edge")?;
            Some(d)
        } else {
            None
        };

        let neural = if mode.uses_neural() {
            let mut tables = Vec::new();
            for (k, tm) in meta.tables.iter().enumerate() {
                let role = TableRole::from_name(&tm.role).ok_or_else(|| corrupt(format!("unknown table role {:?}", tm.role)))?;
                let mut t = EmbeddingTable::from_rows(
                    &tm.name,
                    r.strings(&format!("embedding.{k}.symbols"))?,
                    r.matrix(&format!("embedding.{k}.matrix"))?,
                )?;
                t.fine_tune = tm.fine_tune;
                t.lowercase = tm.lowercase;
                tables.push((role, t));
            }
            Some(NeuralParams {
                composer: InputComposer::new(task, tables)?,
                encoder: BiLstm {
                    forward: read_lstm(&r, "lstm.forward")?,
                    backward: read_lstm(&r, "lstm.backward")?,
                },
                output: r.matrix("neural.output")?,
                tau: r.matrix("neural.tau")?,
            })
        } else {
            None
        };
        let mut model = ModelParams::new(mode, labels, discrete, neural).map_err(corrupt)?;
        let tw = r.vector("joint.tau_weight")?;
        model.tau_weight = *tw.first().ok_or_else(|| corrupt("empty tau weight"))?;
        if !model.is_finite() {
            return Err(corrupt("non-finite parameter"));
        }
        Ok(Self {
            model,
            task,
            language,
            scheme,
            hyper: meta.hyper,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::separable_corpus;
    use crate::trainer::init_model;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn checkpoint(mode: Mode) -> (Checkpoint, Vec<crate::corpus::Sentence>) {
        let (train, dev) = separable_corpus(1);
        let hp = HyperParams {
            word_hidden: 6,
            word_emb: 4,
            char_emb: 3,
            ..HyperParams::default()
        };
        let mut model = init_model(mode, TemplateSet::new(Task::Pos, Language::En), &train, vec![], &hp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (_, v) in model.param_slices_mut() {
            v.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        }
        let c = Checkpoint {
            model,
            task: Task::Pos,
            language: Language::En,
            scheme: TagScheme::Bio,
            hyper: hp,
        };
        (c, dev)
    }

    #[test]
    fn round_trip_preserves_decoding() {
        for mode in Mode::ALL {
            let (c, dev) = checkpoint(mode);
            let bytes = c.to_bytes();
            let back = Checkpoint::from_bytes(&bytes).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_bytes(), bytes);
            for s in &dev {
                assert_eq!(back.model.decode(s).unwrap(), c.model.decode(s).unwrap());
            }
        }
    }

    #[test]
    fn corruption_is_detected() {
        let (c, _) = checkpoint(Mode::Joint);
        let mut bytes = c.to_bytes();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        let err = Checkpoint::from_bytes(&bytes).unwrap_err().to_string();
        assert!(err.contains("checksum") && err.contains("version 1"), "{err}");

        let mut bytes = c.to_bytes();
        bytes[8] = 9;
        let err = Checkpoint::from_bytes(&bytes).unwrap_err().to_string();
        assert!(err.contains("version 9"), "{err}");

        assert!(Checkpoint::from_bytes(b"hello").is_err());
        let bytes = c.to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 10]).is_err());
    }
}
