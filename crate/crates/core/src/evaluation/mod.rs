//! Lexicon evaluation against annotations, a bag-of-words baseline, and
//! word-intrusion tasks.

mod intruder;
mod logreg;

pub use intruder::{intruder_generate, intruder_score, read_responses, IntruderScore, IntruderSet, Responses};
pub use logreg::{baseline_logreg, LogRegConfig};

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Document-to-fold assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    pub k: usize,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldSplit {
    /// Ids in fold `i`, sorted.
    pub fn fold(&self, i: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|&(_, &f)| f == i)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Random balanced partition of `doc_ids` into `k` folds.
pub fn kfold_split(doc_ids: &[String], k: usize, seed: u64) -> Result<FoldSplit> {
    if k == 0 || k > doc_ids.len() {
        return Err(Error::invalid(format!("cannot split {} documents into {k} folds", doc_ids.len())));
    }
    let mut order: Vec<&String> = doc_ids.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let assignment: BTreeMap<String, usize> = order
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i % k))
        .collect();
    if assignment.len() != doc_ids.len() {
        return Err(Error::invalid("duplicate document ids"));
    }
    Ok(FoldSplit { k, assignment })
}

fn check_same_keys<A, B>(pred: &BTreeMap<String, A>, gold: &BTreeMap<String, B>) -> Result<()> {
    if pred.len() != gold.len() || pred.keys().zip(gold.keys()).any(|(a, b)| a != b) {
        let missing = gold.keys().find(|k| !pred.contains_key(*k));
        let extra = pred.keys().find(|k| !gold.contains_key(*k));
        return Err(Error::MismatchedDocuments(format!(
            "{} predicted vs {} gold (first missing {missing:?}, first extra {extra:?})",
            pred.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::MismatchedDocuments("no documents".into()));
    }
    Ok(())
}

/// Fraction of documents whose predicted primary frame equals the gold one.
pub fn eval_primary_accuracy(predictions: &BTreeMap<String, String>, gold: &BTreeMap<String, String>) -> Result<f64> {
    check_same_keys(predictions, gold)?;
    let hits = predictions.iter().filter(|(id, f)| gold[*id] == **f).count();
    Ok(hits as f64 / gold.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-frame precision, recall and F1 of frame-presence predictions. Every
/// frame seen in either side is scored; undefined ratios are 0.
pub fn eval_all_frames_f1(
    predictions: &BTreeMap<String, BTreeSet<String>>,
    gold: &BTreeMap<String, BTreeSet<String>>,
) -> Result<BTreeMap<String, FrameScores>> {
    check_same_keys(predictions, gold)?;
    let frames: BTreeSet<&String> = predictions.values().chain(gold.values()).flatten().collect();
    let mut out = BTreeMap::new();
    for frame in frames {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (id, pred) in predictions {
            match (pred.contains(frame), gold[id].contains(frame)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        out.insert(
            frame.clone(),
            FrameScores {
                precision,
                recall,
                f1,
                support: tp + fn_,
            },
        );
    }
    Ok(out)
}
