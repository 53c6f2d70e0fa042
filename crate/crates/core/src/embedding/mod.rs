//! Word vectors and centroid query expansion.

mod cbow;

pub use cbow::{train_cbow, CbowConfig};

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lexicon::{Provenance, ScoredLexicon};

/// Vocabulary with dense vectors of one shared dimension. Word order is the
/// frequency rank: index 0 is the most frequent word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    dimension: usize,
    words: Vec<String>,
    vectors: Vec<f32>,
    index: HashMap<String, usize>,
}

impl EmbeddingSpace {
    /// `words` must be in frequency order; `vectors` is row-major.
    pub fn new(dimension: usize, words: Vec<String>, vectors: Vec<f32>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        if words.is_empty() {
            return Err(Error::invalid("embedding vocabulary is empty"));
        }
        if vectors.len() != words.len() * dimension {
            return Err(Error::invalid(format!(
                "{} values for {} words of dimension {dimension}",
                vectors.len(),
                words.len()
            )));
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value in vector of {:?}",
                words[i / dimension]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate word {w:?}")));
            }
        }
        Ok(EmbeddingSpace {
            dimension,
            words,
            vectors,
            index,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn frequency_rank(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Cosine distance between two words, `None` when either is missing or
    /// has a zero vector.
    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        cosine_distance(&to_f64(self.vector(a)?), &to_f64(self.vector(b)?))
    }

    /// Reads the word2vec text format. The optional first line
    /// `<vocab_size> <dimension>` is recognised when it has exactly two
    /// integer fields.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut words = Vec::new();
        let mut vectors = Vec::new();
        let mut dimension: Option<usize> = None;
        let mut declared: Option<(usize, usize)> = None;
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if lineno == 1 && rest.len() == 1 {
                if let (Ok(n), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                    declared = Some((n, d));
                    dimension = Some(d);
                    continue;
                }
            }
            let ctx = || format!("line {lineno}");
            match dimension {
                None => dimension = Some(rest.len()),
                Some(d) if d != rest.len() => {
                    return Err(Error::parse(
                        ctx(),
                        format!("expected {d} values, found {}", rest.len()),
                    ))
                }
                Some(_) => {}
            }
            for v in rest {
                let x: f32 = v
                    .parse()
                    .map_err(|_| Error::parse(ctx(), format!("bad value {v:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(ctx(), format!("non-finite value {v:?}")));
                }
                vectors.push(x);
            }
            words.push(word.to_string());
        }
        if words.is_empty() {
            return Err(Error::parse("embedding file", "no vectors"));
        }
        if let Some((n, _)) = declared {
            if n != words.len() {
                return Err(Error::parse(
                    "line 1",
                    format!("header declares {n} words, file has {}", words.len()),
                ));
            }
        }
        let dimension = dimension.unwrap_or(0);
        if dimension == 0 {
            return Err(Error::parse("line 1", "vectors have no values"));
        }
        EmbeddingSpace::new(dimension, words, vectors)
    }

    /// Writes the text format with a header line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.words.len(), self.dimension)?;
        for (i, w) in self.words.iter().enumerate() {
            write!(out, "{w}")?;
            for v in self.row(i) {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn to_f64(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

/// `1 - u·v / (|u||v|)`; `None` if either vector has zero norm.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Option<f64> {
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    Some((1.0 - dot / (nu.sqrt() * nv.sqrt())).clamp(0.0, 2.0))
}

/// Slack on the distance threshold so that parallel vectors pass `t = 0`
/// despite rounding.
const DISTANCE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionMode {
    /// Base lexicon plus neighbors.
    Augment,
    /// Neighbors only.
    Replace,
}

impl fmt::Display for ExpansionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpansionMode::Augment => "augment",
            ExpansionMode::Replace => "replace",
        })
    }
}

impl FromStr for ExpansionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "augment" => Ok(ExpansionMode::Augment),
            "replace" => Ok(ExpansionMode::Replace),
            other => Err(Error::invalid(format!("unknown expansion mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionConfig {
    /// Maximum number of neighbors.
    pub max_neighbors: usize,
    /// Largest admissible cosine distance to the centroid, in `[0, 2]`.
    pub max_distance: f64,
    pub mode: ExpansionMode,
    /// Only the `vocab_cap` most frequent words are candidates.
    pub vocab_cap: usize,
}

impl ExpansionConfig {
    /// Monolingual setting: keep the base lexicon and add neighbors.
    pub fn augment() -> Self {
        ExpansionConfig {
            max_neighbors: 500,
            max_distance: 0.4,
            mode: ExpansionMode::Augment,
            vocab_cap: 50_000,
        }
    }

    /// Cross-lingual setting: discard the translated lexicon, keep neighbors.
    pub fn replace() -> Self {
        ExpansionConfig {
            max_neighbors: 1000,
            max_distance: 0.3,
            mode: ExpansionMode::Replace,
            vocab_cap: 50_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_neighbors == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if !(0.0..=2.0).contains(&self.max_distance) {
            return Err(Error::invalid("t must lie in [0, 2]"));
        }
        if self.vocab_cap == 0 {
            return Err(Error::invalid("vocab_cap must be at least 1"));
        }
        Ok(())
    }
}

/// How lexicon vectors are combined into the query vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CentroidKind {
    Sum,
    Mean,
}

/// Query vector of the lexicon words present among the `vocab_cap` most
/// frequent words, or `None` when no word qualifies.
pub fn lexicon_centroid(
    lex: &ScoredLexicon,
    space: &EmbeddingSpace,
    vocab_cap: usize,
    kind: CentroidKind,
) -> Option<Vec<f64>> {
    let mut c = vec![0.0f64; space.dimension()];
    let mut n = 0usize;
    for w in lex.words() {
        match space.frequency_rank(w) {
            Some(rank) if rank < vocab_cap => {
                for (acc, &x) in c.iter_mut().zip(space.row(rank)) {
                    *acc += x as f64;
                }
                n += 1;
            }
            _ => {}
        }
    }
    if n == 0 {
        return None;
    }
    if kind == CentroidKind::Mean {
        c.iter_mut().for_each(|x| *x /= n as f64);
    }
    Some(c)
}

/// Candidates within `max_distance` of `query`, closest first (ties by
/// frequency rank), at most `k` of them. Zero vectors are never candidates.
pub fn nearest_neighbors(
    space: &EmbeddingSpace,
    query: &[f64],
    k: usize,
    max_distance: f64,
    vocab_cap: usize,
) -> Vec<(usize, f64)> {
    let mut hits: Vec<(usize, f64)> = (0..space.len().min(vocab_cap))
        .filter_map(|i| {
            let d = cosine_distance(query, &to_f64(space.row(i)))?;
            (d <= max_distance + DISTANCE_SLACK).then_some((i, d))
        })
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    hits.truncate(k);
    hits
}

/// Grows (or replaces) a lexicon with the nearest neighbors of its summed
/// embedding. Neighbor scores are `1 - distance`.
///
/// In augment mode lexicon words are always retained; those with a vector
/// are rescored by their similarity to the centroid and out-of-vocabulary
/// words keep a score of zero.
pub fn expand_lexicon(
    lex: &ScoredLexicon,
    space: &EmbeddingSpace,
    cfg: &ExpansionConfig,
) -> Result<ScoredLexicon> {
    cfg.validate()?;
    let centroid = lexicon_centroid(lex, space, cfg.vocab_cap, CentroidKind::Sum).ok_or_else(|| {
        Error::NoLexiconWordInVocab {
            frame: lex.frame.clone(),
        }
    })?;
    if centroid.iter().all(|&x| x == 0.0) {
        return Err(Error::NoLexiconWordInVocab {
            frame: lex.frame.clone(),
        });
    }
    let neighbors = nearest_neighbors(space, &centroid, cfg.max_neighbors, cfg.max_distance, cfg.vocab_cap);
    let mut entries: Vec<(String, f64)> = neighbors
        .into_iter()
        .map(|(i, d)| (space.words[i].clone(), 1.0 - d))
        .collect();
    if cfg.mode == ExpansionMode::Augment {
        for w in lex.words() {
            let score = space
                .vector(w)
                .and_then(|v| cosine_distance(&centroid, &to_f64(v)))
                .map_or(0.0, |d| 1.0 - d);
            entries.push((w.to_string(), score));
        }
    }
    Ok(ScoredLexicon::new(lex.frame.clone(), entries, Provenance::Expanded))
}
