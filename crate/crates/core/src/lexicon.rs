//! Frame lexicons: PMI induction from annotated spans, document-frequency
//! filtering and the TSV interchange format.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Lower bound of the document-frequency band (inclusive).
pub const MIN_DOC_FREQ: f64 = 0.005;
/// Upper bound of the document-frequency band (inclusive).
pub const MAX_DOC_FREQ: f64 = 0.98;
pub const DEFAULT_BASE_SIZE: usize = 250;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Base,
    Translated,
    Expanded,
    Final,
    /// Salience-shift lexicon produced by the log-odds comparison.
    Agenda,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Base => "base",
            Provenance::Translated => "translated",
            Provenance::Expanded => "expanded",
            Provenance::Final => "final",
            Provenance::Agenda => "agendalex",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Provenance::Base),
            "translated" => Ok(Provenance::Translated),
            "expanded" => Ok(Provenance::Expanded),
            "final" => Ok(Provenance::Final),
            "agendalex" => Ok(Provenance::Agenda),
            other => Err(Error::parse("lexicon header", format!("unknown provenance {other:?}"))),
        }
    }
}

/// A frame's word list, sorted by descending score with unique words.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredLexicon {
    pub frame: String,
    entries: Vec<(String, f64)>,
    pub provenance: Provenance,
}

impl ScoredLexicon {
    /// Sorts entries by score (descending, then word) and keeps the first
    /// occurrence of duplicated words, i.e. the highest-scored one.
    pub fn new(frame: impl Into<String>, mut entries: Vec<(String, f64)>, provenance: Provenance) -> Self {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut seen = HashSet::new();
        entries.retain(|(w, _)| seen.insert(w.clone()));
        ScoredLexicon {
            frame: frame.into(),
            entries,
            provenance,
        }
    }

    /// Keeps the given order; callers guarantee it is already sorted.
    fn from_sorted(frame: String, entries: Vec<(String, f64)>, provenance: Provenance) -> Self {
        ScoredLexicon {
            frame,
            entries,
            provenance,
        }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(w, _)| w.as_str())
    }

    pub fn word_set(&self) -> HashSet<&str> {
        self.words().collect()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.iter().any(|(w, _)| w == word)
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.entries.iter().find(|(w, _)| w == word).map(|(_, s)| *s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops words outside the document-frequency band, keeping order.
    pub fn filter_doc_frequency(&self, df: &DocFrequencyTable) -> ScoredLexicon {
        let entries = self
            .entries
            .iter()
            .filter(|(w, _)| df.in_band(w))
            .cloned()
            .collect();
        ScoredLexicon::from_sorted(self.frame.clone(), entries, self.provenance)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Writes the TSV format: a `# frame=<label> provenance=<stage>` header
    /// followed by `word<TAB>score` rows with six decimals.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# frame={} provenance={}", self.frame, self.provenance)?;
        for (word, score) in &self.entries {
            writeln!(out, "{word}\t{score:.6}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse("line 1", "missing lexicon header"))?;
        let (frame, provenance) = header
            .strip_prefix("# frame=")
            .and_then(|rest| rest.rsplit_once(" provenance="))
            .ok_or_else(|| Error::parse("line 1", format!("malformed header {header:?}")))?;
        let provenance: Provenance = provenance.trim().parse()?;
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ctx = || format!("line {}", i + 2);
            let (word, score) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(ctx(), "expected word<TAB>score"))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| Error::parse(ctx(), format!("bad score {score:?}")))?;
            entries.push((word.to_string(), score));
        }
        Ok(ScoredLexicon::new(frame, entries, provenance))
    }
}

/// Fraction of documents containing each word.
#[derive(Clone, Debug, Default)]
pub struct DocFrequencyTable {
    fractions: HashMap<String, f64>,
    pub corpus_size: usize,
}

impl DocFrequencyTable {
    pub fn from_documents<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut n = 0usize;
        for doc in docs {
            n += 1;
            let distinct: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
            for w in distinct {
                *counts.entry(w).or_default() += 1;
            }
        }
        let fractions = counts
            .into_iter()
            .map(|(w, c)| (w.to_string(), c as f64 / n as f64))
            .collect();
        DocFrequencyTable {
            fractions,
            corpus_size: n,
        }
    }

    /// Zero for words never seen.
    pub fn fraction(&self, word: &str) -> f64 {
        self.fractions.get(word).copied().unwrap_or(0.0)
    }

    pub fn in_band(&self, word: &str) -> bool {
        let f = self.fraction(word);
        (MIN_DOC_FREQ..=MAX_DOC_FREQ).contains(&f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PmiScore {
    pub word: String,
    /// Natural-log PMI between the word and the frame.
    pub score: f64,
    /// Occurrences of the word inside frame spans.
    pub frame_count: usize,
}

/// PMI of every word occurring inside spans of `frame`.
///
/// A token is inside the frame when at least one span of that frame covers
/// it, so overlapping spans from several annotators do not double-count.
/// Output is sorted by score, then in-frame count, then word.
pub fn pmi_scores(docs: &[Document], frame: &str) -> Result<Vec<PmiScore>> {
    let mut in_frame: HashMap<&str, usize> = HashMap::new();
    let mut overall: HashMap<&str, usize> = HashMap::new();
    let mut frame_total = 0usize;
    let mut total = 0usize;
    for doc in docs {
        let mask = doc.frame_mask(frame);
        for (tok, &inside) in doc.tokens.iter().zip(&mask) {
            *overall.entry(tok).or_default() += 1;
            total += 1;
            if inside {
                *in_frame.entry(tok).or_default() += 1;
                frame_total += 1;
            }
        }
    }
    if frame_total == 0 {
        return Err(Error::EmptyFrame {
            frame: frame.to_string(),
        });
    }
    let mut scores: Vec<PmiScore> = in_frame
        .into_iter()
        .map(|(w, c)| {
            let p_w_given_f = c as f64 / frame_total as f64;
            let p_w = overall[w] as f64 / total as f64;
            PmiScore {
                word: w.to_string(),
                score: (p_w_given_f / p_w).ln(),
                frame_count: c,
            }
        })
        .collect();
    scores.sort_by(rank_pmi);
    Ok(scores)
}

fn rank_pmi(a: &PmiScore, b: &PmiScore) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.frame_count.cmp(&a.frame_count))
        .then_with(|| a.word.cmp(&b.word))
}

/// Top `size` PMI words of a frame after removing words outside the
/// document-frequency band.
pub fn build_base_lexicon(
    frame: &str,
    scores: &[PmiScore],
    df: &DocFrequencyTable,
    size: usize,
) -> Result<ScoredLexicon> {
    let mut kept: Vec<&PmiScore> = scores.iter().filter(|s| df.in_band(&s.word)).collect();
    kept.sort_by(|a, b| rank_pmi(a, b));
    kept.truncate(size);
    if kept.is_empty() {
        return Err(Error::EmptyLexicon {
            frame: frame.to_string(),
            stage: "document-frequency filtering".into(),
        });
    }
    let entries = kept.into_iter().map(|s| (s.word.clone(), s.score)).collect();
    Ok(ScoredLexicon::from_sorted(frame.to_string(), entries, Provenance::Base))
}

/// PMI scoring and base-lexicon selection for one frame.
pub fn induce_base_lexicon(docs: &[Document], frame: &str, size: usize) -> Result<ScoredLexicon> {
    let scores = pmi_scores(docs, frame)?;
    let df = DocFrequencyTable::from_documents(docs);
    build_base_lexicon(frame, &scores, &df, size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FrameSpan;
    use chrono::NaiveDate;

    fn doc(id: &str, words: &[&str], spans: &[(&str, usize, usize)]) -> Document {
        let date = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        let spans = spans
            .iter()
            .map(|&(f, s, e)| FrameSpan {
                frame: f.into(),
                start: s,
                end: e,
                annotator: "1".into(),
            })
            .collect();
        Document::new(id, date, words.iter().map(|w| w.to_string()).collect(), spans).unwrap()
    }

    fn score_of(scores: &[PmiScore], w: &str) -> f64 {
        scores.iter().find(|s| s.word == w).unwrap().score
    }

    #[test]
    fn hand_counted_fixture() {
        // frame tokens a b a c, ten tokens overall, three a's
        let docs = vec![
            doc("1", &["a", "b", "a", "c", "x"], &[("Economic", 0, 4)]),
            doc("2", &["a", "y", "z", "x", "y"], &[]),
        ];
        let s = pmi_scores(&docs, "Economic").unwrap();
        assert!((score_of(&s, "a") - (0.5f64 / 0.3).ln()).abs() < 1e-12);
        assert!((score_of(&s, "a") - 0.5108).abs() < 1e-4);
        assert!(s.iter().all(|p| p.word != "x"));
    }

    #[test]
    fn exclusive_word_in_half_the_tokens_scores_ln2() {
        let docs = vec![doc("1", &["w", "v", "u", "t"], &[("Economic", 0, 2)])];
        let s = pmi_scores(&docs, "Economic").unwrap();
        assert!((score_of(&s, "w") - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn independent_word_scores_zero() {
        let docs = vec![doc("1", &["w", "v", "w", "v"], &[("Economic", 0, 2)])];
        let s = pmi_scores(&docs, "Economic").unwrap();
        assert!(score_of(&s, "w").abs() < 1e-12);
    }

    #[test]
    fn overlapping_spans_count_tokens_once() {
        let docs = vec![doc("1", &["a", "b", "c", "d"], &[("Economic", 0, 2), ("Economic", 1, 3)])];
        let s = pmi_scores(&docs, "Economic").unwrap();
        assert_eq!(s.iter().find(|p| p.word == "b").unwrap().frame_count, 1);
    }

    #[test]
    fn unannotated_frame_is_an_error() {
        let docs = vec![doc("1", &["a"], &[])];
        let err = pmi_scores(&docs, "Morality").unwrap_err();
        assert!(err.to_string().contains("Morality"));
    }

    fn synthetic_scores(n: usize) -> Vec<PmiScore> {
        (0..n)
            .map(|i| PmiScore {
                word: format!("w{i:03}"),
                score: 10.0 - i as f64 * 0.01,
                frame_count: 1,
            })
            .collect()
    }

    fn df_with(words: &[(String, f64)]) -> DocFrequencyTable {
        DocFrequencyTable {
            fractions: words.iter().cloned().collect(),
            corpus_size: 1000,
        }
    }

    #[test]
    fn filter_happens_before_truncation() {
        let scores = synthetic_scores(300);
        let df = df_with(
            &scores
                .iter()
                .enumerate()
                .map(|(i, s)| (s.word.clone(), if i % 7 == 0 && i < 280 { 0.001 } else { 0.1 }))
                .collect::<Vec<_>>(),
        );
        let filtered = scores.iter().filter(|s| !df.in_band(&s.word)).count();
        assert_eq!(filtered, 40);
        let lex = build_base_lexicon("Economic", &scores, &df, 250).unwrap();
        assert_eq!(lex.len(), 250);
        assert!(lex.words().all(|w| df.in_band(w)));
    }

    #[test]
    fn fewer_candidates_than_size_keeps_all() {
        let scores = synthetic_scores(100);
        let df = df_with(&scores.iter().map(|s| (s.word.clone(), 0.5)).collect::<Vec<_>>());
        assert_eq!(build_base_lexicon("Economic", &scores, &df, 250).unwrap().len(), 100);
    }

    #[test]
    fn ubiquitous_word_excluded_regardless_of_score() {
        let scores = synthetic_scores(3);
        let df = df_with(&[
            ("w000".into(), 0.99),
            ("w001".into(), 0.98),
            ("w002".into(), 0.005),
        ]);
        let lex = build_base_lexicon("Economic", &scores, &df, 250).unwrap();
        assert!(!lex.contains("w000"));
        assert!(lex.contains("w001") && lex.contains("w002"));
    }

    #[test]
    fn empty_after_filter_is_an_error() {
        let scores = synthetic_scores(3);
        let df = df_with(&[]);
        assert!(build_base_lexicon("Economic", &scores, &df, 250).is_err());
    }

    #[test]
    fn pmi_ties_break_on_count_then_word() {
        let mut scores = vec![
            PmiScore { word: "b".into(), score: 1.0, frame_count: 2 },
            PmiScore { word: "a".into(), score: 1.0, frame_count: 2 },
            PmiScore { word: "c".into(), score: 1.0, frame_count: 5 },
        ];
        scores.sort_by(rank_pmi);
        let order: Vec<&str> = scores.iter().map(|s| s.word.as_str()).collect();
        assert_eq!(order, ["c", "a", "b"]);
    }

    #[test]
    fn tsv_round_trip_with_spaces_in_frame() {
        let lex = ScoredLexicon::new(
            "Security and Defense",
            vec![("ракета".into(), 1.25), ("army".into(), 2.5)],
            Provenance::Final,
        );
        let mut buf = Vec::new();
        lex.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# frame=Security and Defense provenance=final\narmy\t2.500000\n"));
        let back = ScoredLexicon::read_tsv(buf.as_slice()).unwrap();
        assert_eq!(back, lex);
    }

    #[test]
    fn malformed_tsv_rejected() {
        assert!(ScoredLexicon::read_tsv("frame=x\n".as_bytes()).is_err());
        assert!(ScoredLexicon::read_tsv("# frame=x provenance=base\nword 1.0\n".as_bytes()).is_err());
    }
}
