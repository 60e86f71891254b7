//! Generated corpora with known structure, for behavioral checks.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sentence;
use crate::embedding::EmbeddingTable;

const LOWER: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

fn random_word(rng: &mut impl Rng, len: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.random_range(len);
    (0..n).map(|_| LOWER[rng.random_range(0..LOWER.len())] as char).collect()
}

/// Distinct random words, none of them in `taken`.
fn fresh_words(
    rng: &mut impl Rng,
    count: usize,
    len: std::ops::RangeInclusive<usize>,
    taken: &mut std::collections::BTreeSet<String>,
) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let w = random_word(rng, len.clone());
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

pub const SEPARABLE_LABELS: [&str; 4] = ["A", "B", "C", "D"];

/// 50 training and 20 dev sentences over 40 word types. Each word type has
/// one fixed label, so the word-identity template alone separates the data.
pub fn separable_corpus(seed: u64) -> (Vec<Sentence>, Vec<Sentence>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = Default::default();
    let vocab = fresh_words(&mut rng, 40, 3..=6, &mut taken);
    let mut make = |count: usize| -> Vec<Sentence> {
        (0..count)
            .map(|_| {
                let n = rng.random_range(4..=9);
                let ids: Vec<usize> = (0..n).map(|_| rng.random_range(0..vocab.len())).collect();
                let tokens: Vec<&str> = ids.iter().map(|&k| vocab[k].as_str()).collect();
                let labels: Vec<&str> = ids.iter().map(|&k| SEPARABLE_LABELS[k % 4]).collect();
                Sentence::labeled(&tokens, &labels).expect("aligned")
            })
            .collect()
    };
    let train = make(50);
    let dev = make(20);
    (train, dev)
}

/// Entity-recognition data whose label signal is split between the two
/// feature sources.
///
/// * Lexical entities occur in both train and dev and are missing from the
///   pretrained table. PER and LOC forms are anagrams of one letter
///   multiset, so their pooled character vectors coincide and only exact
///   word identity tells the classes apart.
/// * Distributional entities use different surface forms in train and dev.
///   Their pretrained vectors sit near a per-class centroid; their
///   spellings carry no class information.
///
/// Every token is lowercase with POS tag `NN`, and labels are `O`,
/// `B-PER`, `B-LOC`.
#[derive(Debug, Clone)]
pub struct CombinationCorpus {
    pub train: Vec<Sentence>,
    pub dev: Vec<Sentence>,
    pub word_embeddings: EmbeddingTable,
}

#[derive(Debug, Clone, Copy)]
pub struct CombinationSizes {
    pub train_sentences: usize,
    pub dev_sentences: usize,
    pub embedding_dim: usize,
}

impl Default for CombinationSizes {
    fn default() -> Self {
        Self {
            train_sentences: 200,
            dev_sentences: 100,
            embedding_dim: 10,
        }
    }
}

pub fn combination_corpus(seed: u64, sizes: CombinationSizes) -> CombinationCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = std::collections::BTreeSet::new();
    let fillers = fresh_words(&mut rng, 60, 3..=7, &mut taken);

    let letters: Vec<char> = "qzxjvkw".chars().collect();
    let mut anagrams = Vec::new();
    while anagrams.len() < 16 {
        let mut l = letters.clone();
        l.shuffle(&mut rng);
        let w: String = l.into_iter().collect();
        if taken.insert(w.clone()) {
            anagrams.push(w);
        }
    }
    let (lex_per, lex_loc) = anagrams.split_at(8);

    let dist_train = fresh_words(&mut rng, 24, 5..=8, &mut taken);
    let dist_dev = fresh_words(&mut rng, 24, 5..=8, &mut taken);
    let (dist_train_per, dist_train_loc) = dist_train.split_at(12);
    let (dist_dev_per, dist_dev_loc) = dist_dev.split_at(12);

    let dim = sizes.embedding_dim;
    let mut centroid = || -> Vec<f64> { (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let per_c = centroid();
    let loc_c = centroid();
    let mut symbols = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for w in &fillers {
        symbols.push(w.clone());
        rows.extend((0..dim).map(|_| rng.random_range(-1.0..1.0)));
    }
    for (words, c) in [
        (dist_train_per, &per_c),
        (dist_dev_per, &per_c),
        (dist_train_loc, &loc_c),
        (dist_dev_loc, &loc_c),
    ] {
        for w in words {
            symbols.push(w.clone());
            rows.extend(c.iter().map(|v| v + rng.random_range(-0.15..0.15)));
        }
    }
    let matrix = Array2::from_shape_vec((symbols.len(), dim), rows).expect("row-major");
    let word_embeddings = EmbeddingTable::from_rows("word", symbols, matrix).expect("valid table");

    let mut make = |count: usize, dist_per: &[String], dist_loc: &[String]| -> Vec<Sentence> {
        (0..count)
            .map(|_| {
                let n = rng.random_range(5..=10);
                let mut tokens = Vec::with_capacity(n);
                let mut labels = Vec::with_capacity(n);
                for _ in 0..n {
                    if rng.random_bool(0.3) {
                        let per = rng.random_bool(0.5);
                        let pool = match (rng.random_bool(0.5), per) {
                            (true, true) => lex_per,
                            (true, false) => lex_loc,
                            (false, true) => dist_per,
                            (false, false) => dist_loc,
                        };
                        tokens.push(pool[rng.random_range(0..pool.len())].clone());
                        labels.push(if per { "B-PER" } else { "B-LOC" });
                    } else {
                        tokens.push(fillers[rng.random_range(0..fillers.len())].clone());
                        labels.push("O");
                    }
                }
                let aux = vec!["NN"; n];
                Sentence::labeled(&tokens, &labels)
                    .and_then(|s| s.with_aux(&aux))
                    .expect("aligned")
            })
            .collect()
    };
    let train = make(sizes.train_sentences, dist_train_per, dist_train_loc);
    let dev = make(sizes.dev_sentences, dist_dev_per, dist_dev_loc);
    CombinationCorpus {
        train,
        dev,
        word_embeddings,
    }
}
