//! Cross-lingual lexicon projection through a bilingual dictionary and
//! replace-mode expansion in the target embedding space.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use crate::corpus::tokenize;
use crate::embedding::{expand_lexicon, EmbeddingSpace, ExpansionConfig};
use crate::error::{Error, Result};
use crate::lexicon::{DocFrequencyTable, Provenance, ScoredLexicon};

/// Final lexicon sizes outside this range are reported as suspicious.
pub const EXPECTED_SIZE: std::ops::RangeInclusive<usize> = 100..=300;

/// Source word to single-token target words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BilingualDictionary {
    entries: BTreeMap<String, Vec<String>>,
}

impl BilingualDictionary {
    /// Builds a dictionary, lowercasing every word. Multi-token targets are
    /// dropped with a warning and entries left without targets are omitted.
    pub fn new<I, S, T>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<T>)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (source, targets) in entries {
            let source = source.as_ref().trim().to_lowercase();
            if source.is_empty() {
                continue;
            }
            let slot = map.entry(source.clone()).or_default();
            for target in targets {
                let toks = tokenize(target.as_ref());
                match toks.as_slice() {
                    [single] => {
                        if !slot.contains(single) {
                            slot.push(single.clone());
                        }
                    }
                    [] => {}
                    _ => log::warn!("dropping multi-word translation {:?} of {source:?}", target.as_ref()),
                }
            }
        }
        map.retain(|_, v| !v.is_empty());
        BilingualDictionary { entries: map }
    }

    /// Reads `source<TAB>target1,target2,...` lines.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (source, targets) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(format!("line {}", i + 1), "expected source<TAB>targets"))?;
            let targets: Vec<&str> = targets.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
            rows.push((source.to_string(), targets.into_iter().map(String::from).collect::<Vec<_>>()));
        }
        Ok(BilingualDictionary::new(rows))
    }

    pub fn translations(&self, source: &str) -> Option<&[String]> {
        self.entries.get(source).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Replaces each lexicon word by its translations. A target reached from
/// several sources keeps the highest source score.
pub fn translate_lexicon(lex: &ScoredLexicon, dict: &BilingualDictionary) -> Result<ScoredLexicon> {
    if lex.provenance != Provenance::Base {
        return Err(Error::invalid(format!(
            "translation expects a base lexicon, got provenance {}",
            lex.provenance
        )));
    }
    let mut best: HashMap<&str, f64> = HashMap::new();
    for (word, score) in lex.entries() {
        for target in dict.translations(word).unwrap_or_default() {
            best.entry(target)
                .and_modify(|s| *s = s.max(*score))
                .or_insert(*score);
        }
    }
    if best.is_empty() {
        return Err(Error::NoTranslations {
            frame: lex.frame.clone(),
        });
    }
    let entries = best.into_iter().map(|(w, s)| (w.to_string(), s)).collect();
    Ok(ScoredLexicon::new(lex.frame.clone(), entries, Provenance::Translated))
}

/// Keeps only words among the `vocab_cap` most frequent words of `space`.
pub fn restrict_to_vocab(lex: &ScoredLexicon, space: &EmbeddingSpace, vocab_cap: usize) -> Result<ScoredLexicon> {
    let entries: Vec<(String, f64)> = lex
        .entries()
        .iter()
        .filter(|(w, _)| space.frequency_rank(w).is_some_and(|r| r < vocab_cap))
        .cloned()
        .collect();
    if entries.is_empty() {
        return Err(Error::NoLexiconWordInVocab {
            frame: lex.frame.clone(),
        });
    }
    Ok(ScoredLexicon::new(lex.frame.clone(), entries, lex.provenance))
}

/// Intermediate sizes and the final lexicon of a projection run.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub lexicon: ScoredLexicon,
    pub translated: usize,
    pub in_vocab: usize,
    pub expanded: usize,
}

impl Projection {
    pub fn size_in_expected_range(&self) -> bool {
        EXPECTED_SIZE.contains(&self.lexicon.len())
    }
}

/// Translate, restrict to the capped target vocabulary, expand, then apply
/// the document-frequency band of the target corpus.
pub fn project_lexicon(
    base: &ScoredLexicon,
    dict: &BilingualDictionary,
    target_space: &EmbeddingSpace,
    target_df: &DocFrequencyTable,
    cfg: &ExpansionConfig,
) -> Result<Projection> {
    let translated = translate_lexicon(base, dict)?;
    let in_vocab = restrict_to_vocab(&translated, target_space, cfg.vocab_cap)?;
    let expanded = expand_lexicon(&in_vocab, target_space, cfg)?;
    let lexicon = expanded.filter_doc_frequency(target_df).with_provenance(Provenance::Final);
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon {
            frame: base.frame.clone(),
            stage: "target document-frequency filtering".into(),
        });
    }
    let projection = Projection {
        translated: translated.len(),
        in_vocab: in_vocab.len(),
        expanded: expanded.len(),
        lexicon,
    };
    if !projection.size_in_expected_range() {
        log::warn!(
            "projected lexicon for {:?} has {} words, outside {:?}",
            base.frame,
            projection.lexicon.len(),
            EXPECTED_SIZE
        );
    }
    Ok(projection)
}

/// Pairwise overlap between final lexicons: `(frame_a, frame_b, shared,
/// shared / min(|a|, |b|))` for every unordered pair.
pub fn lexicon_overlap(lexicons: &[ScoredLexicon]) -> Vec<(String, String, usize, f64)> {
    let mut out = Vec::new();
    for (i, a) in lexicons.iter().enumerate() {
        let set = a.word_set();
        for b in &lexicons[i + 1..] {
            let shared = b.words().filter(|w| set.contains(w)).count();
            let denom = a.len().min(b.len()).max(1);
            out.push((a.frame.clone(), b.frame.clone(), shared, shared as f64 / denom as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(entries: &[(&str, f64)]) -> ScoredLexicon {
        ScoredLexicon::new(
            "Economic",
            entries.iter().map(|&(w, s)| (w.to_string(), s)).collect(),
            Provenance::Base,
        )
    }

    #[test]
    fn single_mapping() {
        let dict = BilingualDictionary::new([("tax", vec!["налог"])]);
        let out = translate_lexicon(&base(&[("tax", 1.2)]), &dict).unwrap();
        assert_eq!(out.entries(), [("налог".to_string(), 1.2)]);
        assert_eq!(out.provenance, Provenance::Translated);
    }

    #[test]
    fn merged_targets_keep_max_score() {
        let dict = BilingualDictionary::new([("tax", vec!["налог"]), ("levy", vec!["налог"])]);
        let out = translate_lexicon(&base(&[("tax", 1.2), ("levy", 0.8)]), &dict).unwrap();
        assert_eq!(out.entries(), [("налог".to_string(), 1.2)]);
    }

    #[test]
    fn uncovered_words_dropped() {
        let dict = BilingualDictionary::new([("tax", vec!["налог"])]);
        let out = translate_lexicon(&base(&[("tax", 1.0), ("filibuster", 2.0)]), &dict).unwrap();
        assert_eq!(out.len(), 1);
        let err = translate_lexicon(&base(&[("filibuster", 2.0)]), &dict).unwrap_err();
        assert!(matches!(err, Error::NoTranslations { .. }));
    }

    #[test]
    fn requires_base_provenance() {
        let dict = BilingualDictionary::new([("tax", vec!["налог"])]);
        let lex = base(&[("tax", 1.0)]).with_provenance(Provenance::Final);
        assert!(translate_lexicon(&lex, &dict).is_err());
    }

    #[test]
    fn dictionary_file_drops_multiword_and_empty() {
        let text = "Tax\tНалог, сбор\nstate\tгосударственный долг\nempty\t\n";
        let dict = BilingualDictionary::read_tsv(text.as_bytes()).unwrap();
        assert_eq!(dict.translations("tax").unwrap(), ["налог", "сбор"]);
        assert!(dict.translations("state").is_none());
        assert!(dict.translations("empty").is_none());
        assert!(BilingualDictionary::read_tsv("no tab here\n".as_bytes()).is_err());
    }

    #[test]
    fn overlap_reports_pairs() {
        let a = ScoredLexicon::new("A", vec![("x".into(), 1.0), ("y".into(), 1.0)], Provenance::Final);
        let b = ScoredLexicon::new("B", vec![("y".into(), 1.0)], Provenance::Final);
        let o = lexicon_overlap(&[a, b]);
        assert_eq!(o, vec![("A".to_string(), "B".to_string(), 1, 1.0)]);
    }
}
