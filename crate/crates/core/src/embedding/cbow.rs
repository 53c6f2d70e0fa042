//! Continuous-bag-of-words training with negative sampling.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EmbeddingSpace;
use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CbowConfig {
    pub dimension: usize,
    /// Maximum context radius; the effective radius is drawn per position
    /// from `1..=window`.
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    /// Initial learning rate, decayed linearly over training.
    pub learning_rate: f32,
    pub min_count: usize,
    /// Frequent-word downsampling threshold; 0 disables it.
    pub subsample: f64,
    pub seed: u64,
    /// 1 gives bit-reproducible output. More workers update the shared
    /// weights without locking and are not reproducible.
    pub workers: usize,
}

impl Default for CbowConfig {
    fn default() -> Self {
        CbowConfig {
            dimension: 200,
            window: 5,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            min_count: 5,
            subsample: 1e-3,
            seed: 1,
            workers: 1,
        }
    }
}

const MIN_ALPHA_FRACTION: f32 = 1e-4;
const MAX_EXP: f32 = 6.0;

trait Weights {
    fn get(&self, i: usize) -> f32;
    fn add(&mut self, i: usize, v: f32);
}

impl Weights for Vec<f32> {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        self[i]
    }

    #[inline]
    fn add(&mut self, i: usize, v: f32) {
        self[i] += v;
    }
}

/// Lock-free shared weights. Concurrent updates may be lost, which the
/// training objective tolerates.
struct SharedWeights<'a>(&'a [AtomicU32]);

impl Weights for SharedWeights<'_> {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self.0[i].load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&mut self, i: usize, v: f32) {
        let cur = self.get(i);
        self.0[i].store((cur + v).to_bits(), Ordering::Relaxed);
    }
}

struct Vocab {
    words: Vec<String>,
    counts: Vec<usize>,
}

fn build_vocab(docs: &[Document], min_count: usize) -> Vocab {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for t in &doc.tokens {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocab {
        words: entries.iter().map(|(w, _)| w.to_string()).collect(),
        counts: entries.iter().map(|&(_, c)| c).collect(),
    }
}

/// Unigram distribution raised to the 3/4 power, as a cumulative table.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NegativeTable { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

struct Trainer<'a> {
    cfg: &'a CbowConfig,
    table: &'a NegativeTable,
    keep_prob: &'a [f32],
    total_steps: usize,
    processed: &'a AtomicUsize,
}

impl Trainer<'_> {
    fn alpha(&self) -> f32 {
        let done = self.processed.load(Ordering::Relaxed) as f32;
        let frac = (1.0 - done / (self.total_steps as f32 + 1.0)).max(MIN_ALPHA_FRACTION);
        self.cfg.learning_rate * frac
    }

    fn run<W: Weights, R: Rng>(&self, input: &mut W, output: &mut W, sentences: &[Vec<u32>], rng: &mut R) {
        let dim = self.cfg.dimension;
        let mut hidden = vec![0f32; dim];
        let mut grad = vec![0f32; dim];
        let mut kept: Vec<u32> = Vec::new();
        for sentence in sentences {
            let alpha = self.alpha();
            kept.clear();
            kept.extend(
                sentence
                    .iter()
                    .copied()
                    .filter(|&w| self.keep_prob[w as usize] >= 1.0 || rng.random::<f32>() < self.keep_prob[w as usize]),
            );
            for pos in 0..kept.len() {
                let radius = rng.random_range(1..=self.cfg.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius + 1).min(kept.len());
                let context = || (lo..hi).filter(move |&c| c != pos);
                let n_ctx = context().count();
                if n_ctx == 0 {
                    continue;
                }
                hidden.fill(0.0);
                for c in context() {
                    let base = kept[c] as usize * dim;
                    for (j, h) in hidden.iter_mut().enumerate() {
                        *h += input.get(base + j);
                    }
                }
                let inv = 1.0 / n_ctx as f32;
                hidden.iter_mut().for_each(|h| *h *= inv);
                grad.fill(0.0);

                let word = kept[pos] as usize;
                for d in 0..=self.cfg.negatives {
                    let (target, label) = if d == 0 {
                        (word, 1.0)
                    } else {
                        let t = self.table.sample(rng);
                        if t == word {
                            continue;
                        }
                        (t, 0.0)
                    };
                    let base = target * dim;
                    let mut f = 0f32;
                    for (j, h) in hidden.iter().enumerate() {
                        f += h * output.get(base + j);
                    }
                    let g = if f > MAX_EXP {
                        label - 1.0
                    } else if f < -MAX_EXP {
                        label
                    } else {
                        label - 1.0 / (1.0 + (-f).exp())
                    } * alpha;
                    for j in 0..dim {
                        grad[j] += g * output.get(base + j);
                        output.add(base + j, g * hidden[j]);
                    }
                }
                for c in context() {
                    let base = kept[c] as usize * dim;
                    for (j, g) in grad.iter().enumerate() {
                        input.add(base + j, *g);
                    }
                }
            }
            self.processed.fetch_add(sentence.len(), Ordering::Relaxed);
        }
    }
}

/// Trains CBOW vectors over the documents' token sequences. Words below
/// `min_count` are dropped; vocabulary order is by descending count.
pub fn train_cbow(docs: &[Document], cfg: &CbowConfig) -> Result<EmbeddingSpace> {
    if cfg.dimension < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {}", cfg.dimension)));
    }
    if cfg.window == 0 || cfg.epochs == 0 || cfg.workers == 0 {
        return Err(Error::invalid("window, epochs and workers must be positive"));
    }
    if docs.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    let vocab = build_vocab(docs, cfg.min_count);
    if vocab.words.is_empty() {
        return Err(Error::invalid(format!("no word occurs at least {} times", cfg.min_count)));
    }
    let index: HashMap<&str, u32> = vocab
        .words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();
    let sentences: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let total_words: usize = sentences.iter().map(Vec::len).sum();
    if total_words < cfg.window {
        return Err(Error::invalid(format!(
            "corpus of {total_words} tokens is smaller than the window {}",
            cfg.window
        )));
    }

    let keep_prob: Vec<f32> = vocab
        .counts
        .iter()
        .map(|&c| {
            if cfg.subsample <= 0.0 {
                return 1.0;
            }
            let threshold = cfg.subsample * total_words as f64;
            let f = c as f64;
            (((f / threshold).sqrt() + 1.0) * threshold / f) as f32
        })
        .collect();

    let dim = cfg.dimension;
    let n = vocab.words.len() * dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f32> = (0..n).map(|_| (rng.random::<f32>() - 0.5) / dim as f32).collect();
    let mut output: Vec<f32> = vec![0.0; n];

    let table = NegativeTable::new(&vocab.counts);
    let processed = AtomicUsize::new(0);
    let trainer = Trainer {
        cfg,
        table: &table,
        keep_prob: &keep_prob,
        total_steps: total_words * cfg.epochs,
        processed: &processed,
    };

    if cfg.workers == 1 {
        for _ in 0..cfg.epochs {
            trainer.run(&mut input, &mut output, &sentences, &mut rng);
        }
    } else {
        let shared_in: Vec<AtomicU32> = input.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let shared_out: Vec<AtomicU32> = output.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let chunk = sentences.len().div_ceil(cfg.workers);
        std::thread::scope(|scope| {
            for (w, part) in sentences.chunks(chunk.max(1)).enumerate() {
                let trainer = &trainer;
                let (si, so) = (&shared_in, &shared_out);
                let seed = cfg.seed ^ (w as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let (mut wi, mut wo) = (SharedWeights(si), SharedWeights(so));
                    for _ in 0..trainer.cfg.epochs {
                        trainer.run(&mut wi, &mut wo, part, &mut rng);
                    }
                });
            }
        });
        input = shared_in.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
    }

    EmbeddingSpace::new(dim, vocab.words, input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn docs_from(sentences: &[Vec<&str>]) -> Vec<Document> {
        let date = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        sentences
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Document::new(format!("d{i}"), date, s.iter().map(|w| w.to_string()).collect(), vec![]).unwrap()
            })
            .collect()
    }

    /// "king" and "queen" share their contexts; "carrot" lives elsewhere.
    fn royal_corpus() -> Vec<Document> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let royal = ["crown", "throne", "palace", "reign", "castle", "royal"];
        let garden = ["soil", "garden", "harvest", "salad", "orange", "grow"];
        let mut sentences = Vec::new();
        for i in 0..200 {
            let mut s = Vec::new();
            let (head, ctx): (&str, &[&str]) = match i % 3 {
                0 => ("king", &royal),
                1 => ("queen", &royal),
                _ => ("carrot", &garden),
            };
            for _ in 0..4 {
                s.push(ctx[rng.random_range(0..ctx.len())]);
            }
            s.insert(2, head);
            for _ in 0..4 {
                s.push(ctx[rng.random_range(0..ctx.len())]);
            }
            sentences.push(s);
        }
        docs_from(&sentences)
    }

    fn small_cfg() -> CbowConfig {
        CbowConfig {
            dimension: 20,
            window: 3,
            epochs: 20,
            min_count: 1,
            subsample: 0.0,
            seed: 11,
            ..CbowConfig::default()
        }
    }

    #[test]
    fn shared_contexts_give_close_vectors() {
        let space = train_cbow(&royal_corpus(), &small_cfg()).unwrap();
        let kq = space.distance("king", "queen").unwrap();
        let kc = space.distance("king", "carrot").unwrap();
        assert!(kq < kc, "king-queen {kq} vs king-carrot {kc}");
    }

    #[test]
    fn same_seed_single_worker_is_bit_identical() {
        let docs = royal_corpus();
        let a = train_cbow(&docs, &small_cfg()).unwrap();
        let b = train_cbow(&docs, &small_cfg()).unwrap();
        assert_eq!(a, b);
        let mut other = small_cfg();
        other.seed = 12;
        assert_ne!(a, train_cbow(&docs, &other).unwrap());
    }

    #[test]
    fn multi_worker_trains() {
        let mut cfg = small_cfg();
        cfg.workers = 3;
        let space = train_cbow(&royal_corpus(), &cfg).unwrap();
        assert_eq!(space.dimension(), 20);
        assert!(space.vector("king").is_some());
    }

    #[test]
    fn vocabulary_sorted_by_frequency_with_min_count() {
        let docs = docs_from(&[vec!["a", "b", "a", "c", "a", "b"]]);
        let cfg = CbowConfig {
            dimension: 4,
            window: 2,
            epochs: 1,
            min_count: 2,
            ..CbowConfig::default()
        };
        let space = train_cbow(&docs, &cfg).unwrap();
        assert_eq!(space.words(), ["a", "b"]);
    }

    #[test]
    fn precondition_errors() {
        let docs = royal_corpus();
        let mut cfg = small_cfg();
        cfg.dimension = 0;
        assert!(train_cbow(&docs, &cfg).is_err());
        let tiny = docs_from(&[vec!["a", "b"]]);
        let cfg = CbowConfig {
            min_count: 1,
            ..CbowConfig::default()
        };
        assert!(train_cbow(&tiny, &cfg).is_err());
        assert!(train_cbow(&[], &CbowConfig::default()).is_err());
    }

    #[test]
    fn negative_sampling_prefers_frequent_words() {
        let table = NegativeTable::new(&[1000, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..2000).filter(|_| table.sample(&mut rng) == 0).count();
        assert!(hits > 1900);
    }
}
