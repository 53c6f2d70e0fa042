//! Document frame assignment and frame–entity association (nPMI).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, OTHER};
use crate::error::{Error, Result};
use crate::lexicon::ScoredLexicon;

pub const DEFAULT_THRESHOLD: usize = 3;

/// What counts toward a frame's threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CountMode {
    /// Every token occurrence of a lexicon word.
    #[default]
    Tokens,
    /// Distinct lexicon words present in the document.
    DistinctWords,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameAssignment {
    pub doc_id: String,
    pub primary: String,
    pub present: BTreeSet<String>,
    pub counts: BTreeMap<String, usize>,
}

/// Precomputed word-to-frames index for assigning many documents.
#[derive(Clone, Debug)]
pub struct FrameAssigner {
    frames: Vec<String>,
    word_frames: HashMap<String, Vec<usize>>,
    threshold: usize,
    mode: CountMode,
}

impl FrameAssigner {
    pub fn new(lexicons: &[ScoredLexicon], threshold: usize, mode: CountMode) -> Result<Self> {
        if lexicons.is_empty() {
            return Err(Error::invalid("no frame lexicons given"));
        }
        let mut frames: Vec<String> = lexicons.iter().map(|l| l.frame.clone()).collect();
        frames.sort();
        frames.dedup();
        let mut word_frames: HashMap<String, Vec<usize>> = HashMap::new();
        for lex in lexicons {
            let f = frames.binary_search(&lex.frame).expect("frame indexed");
            for w in lex.words() {
                let slot = word_frames.entry(w.to_string()).or_default();
                if !slot.contains(&f) {
                    slot.push(f);
                }
            }
        }
        Ok(FrameAssigner {
            frames,
            word_frames,
            threshold,
            mode,
        })
    }

    pub fn frames(&self) -> &[String] {
        &self.frames
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn assign(&self, doc: &Document) -> FrameAssignment {
        let mut counts = vec![0usize; self.frames.len()];
        match self.mode {
            CountMode::Tokens => {
                for tok in &doc.tokens {
                    for &f in self.word_frames.get(tok).map(Vec::as_slice).unwrap_or_default() {
                        counts[f] += 1;
                    }
                }
            }
            CountMode::DistinctWords => {
                let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
                for tok in distinct {
                    for &f in self.word_frames.get(tok).map(Vec::as_slice).unwrap_or_default() {
                        counts[f] += 1;
                    }
                }
            }
        }
        // frames are sorted, so the first maximum is the lexicographic tie-break
        let mut primary: Option<usize> = None;
        for (f, &c) in counts.iter().enumerate() {
            if c >= self.threshold && primary.is_none_or(|p| c > counts[p]) {
                primary = Some(f);
            }
        }
        let present = counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c >= self.threshold)
            .map(|(f, _)| self.frames[f].clone())
            .collect();
        FrameAssignment {
            doc_id: doc.id.clone(),
            primary: primary.map_or_else(|| OTHER.to_string(), |f| self.frames[f].clone()),
            present,
            counts: self.frames.iter().cloned().zip(counts).collect(),
        }
    }

    /// Whether `frame` reaches the threshold in `doc`.
    pub fn frame_present(&self, doc: &Document, frame: &str) -> bool {
        self.assign(doc).present.contains(frame)
    }
}

/// Assigns frames to one document with token counting.
pub fn assign_frames(doc: &Document, lexicons: &[ScoredLexicon], threshold: usize) -> Result<FrameAssignment> {
    Ok(FrameAssigner::new(lexicons, threshold, CountMode::Tokens)?.assign(doc))
}

/// Normalized PMI between two binary document events, in `[-1, 1]`.
///
/// Disjoint events give -1. When both events cover every document the
/// joint probability is 1 and the value is taken as 1 (complete
/// co-occurrence).
pub fn npmi_from_events(x: &[bool], y: &[bool]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid("event vectors differ in length"));
    }
    if x.is_empty() {
        return Err(Error::invalid("no documents"));
    }
    let n = x.len() as f64;
    let nx = x.iter().filter(|&&b| b).count();
    let ny = y.iter().filter(|&&b| b).count();
    let nxy = x.iter().zip(y).filter(|&(&a, &b)| a && b).count();
    if nx == 0 {
        return Err(Error::EmptyEvent { event: "focus".into() });
    }
    if ny == 0 {
        return Err(Error::EmptyEvent { event: "frame".into() });
    }
    if nxy == 0 {
        return Ok(-1.0);
    }
    let (px, py, pxy) = (nx as f64 / n, ny as f64 / n, nxy as f64 / n);
    if nxy == x.len() {
        return Ok(1.0);
    }
    let value = (pxy.ln() - px.ln() - py.ln()) / -pxy.ln();
    Ok(value.clamp(-1.0, 1.0))
}

/// nPMI between a focus predicate (e.g. "mentions the entity twice") and
/// the presence of `frame` over `docs`.
pub fn npmi<F>(docs: &[Document], focus: F, frame: &str, assigner: &FrameAssigner) -> Result<f64>
where
    F: Fn(&Document) -> bool,
{
    let x: Vec<bool> = docs.iter().map(&focus).collect();
    let y: Vec<bool> = docs.iter().map(|d| assigner.frame_present(d, frame)).collect();
    npmi_from_events(&x, &y).map_err(|e| match e {
        Error::EmptyEvent { event } if event == "frame" => Error::EmptyEvent {
            event: format!("frame {frame:?} present"),
        },
        other => other,
    })
}
