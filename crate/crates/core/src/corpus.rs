//! Article ingestion, tokenization, entity matching and time slicing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::period::{Granularity, Period};

/// Label used for documents that carry no lexicalizable frame.
pub const OTHER: &str = "Other";

/// The 14 lexicalizable frames of the Policy Frames Codebook.
pub const POLICY_FRAMES: [&str; 14] = [
    "Economic",
    "Capacity and Resources",
    "Morality",
    "Fairness and Equality",
    "Legality, Constitutionality, Jurisdiction",
    "Policy Prescription and Evaluation",
    "Crime and Punishment",
    "Security and Defense",
    "Health and Safety",
    "Quality of Life",
    "Cultural Identity",
    "Public Sentiment",
    "Political",
    "External Regulation and Reputation",
];

/// The set of frame labels that annotations may use. Always contains
/// [`OTHER`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameInventory {
    frames: BTreeSet<String>,
}

impl FrameInventory {
    pub fn new<I, S>(frames: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut frames: BTreeSet<String> = frames.into_iter().map(Into::into).collect();
        frames.insert(OTHER.to_string());
        FrameInventory { frames }
    }

    pub fn contains(&self, frame: &str) -> bool {
        self.frames.contains(frame)
    }

    /// Frames that can carry a lexicon, i.e. everything except [`OTHER`].
    pub fn lexical_frames(&self) -> impl Iterator<Item = &str> {
        self.frames.iter().map(String::as_str).filter(|f| *f != OTHER)
    }
}

impl Default for FrameInventory {
    fn default() -> Self {
        FrameInventory::new(POLICY_FRAMES)
    }
}

/// Annotated frame span in token offsets, `start..end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameSpan {
    pub frame: String,
    pub start: usize,
    pub end: usize,
    pub annotator: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub date: NaiveDate,
    pub tokens: Vec<String>,
    pub annotations: Vec<FrameSpan>,
    pub language: String,
    /// Gold primary frame, when the source corpus provides one.
    pub primary_frame: Option<String>,
}

impl Document {
    /// Builds a document from pre-tokenized text, checking span bounds.
    pub fn new(
        id: impl Into<String>,
        date: NaiveDate,
        tokens: Vec<String>,
        annotations: Vec<FrameSpan>,
    ) -> Result<Self> {
        let id = id.into();
        for span in &annotations {
            if span.start >= span.end || span.end > tokens.len() {
                return Err(Error::Ingestion {
                    id,
                    message: format!(
                        "span {}..{} of frame {:?} outside 0..{}",
                        span.start,
                        span.end,
                        span.frame,
                        tokens.len()
                    ),
                });
            }
        }
        Ok(Document {
            id,
            date,
            tokens,
            annotations,
            language: String::from("und"),
            primary_frame: None,
        })
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    /// Frames marked by at least one annotator.
    pub fn annotated_frames(&self) -> BTreeSet<&str> {
        self.annotations.iter().map(|s| s.frame.as_str()).collect()
    }

    /// Per-token flag: does any span of `frame` cover the token.
    pub fn frame_mask(&self, frame: &str) -> Vec<bool> {
        let mut mask = vec![false; self.tokens.len()];
        for span in self.annotations.iter().filter(|s| s.frame == frame) {
            for m in &mut mask[span.start..span.end] {
                *m = true;
            }
        }
        mask
    }
}

/// Lowercased maximal runs of letters and digits.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_offsets(text).into_iter().map(|t| t.text).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Character (not byte) offsets into the source text, end exclusive.
    pub start_char: usize,
    pub end_char: usize,
}

pub fn tokenize_with_offsets(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut current: Option<Token> = None;
    for (pos, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            let tok = current.get_or_insert_with(|| Token {
                text: String::new(),
                start_char: pos,
                end_char: pos,
            });
            tok.text.extend(ch.to_lowercase());
            tok.end_char = pos + 1;
        } else if let Some(tok) = current.take() {
            out.push(tok);
        }
    }
    out.extend(current);
    out
}

#[derive(Debug, Deserialize)]
struct RawAnnotation {
    frame: String,
    start_char: usize,
    end_char: usize,
    #[serde(default, deserialize_with = "string_or_number")]
    annotator: String,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    date: String,
    text: String,
    #[serde(default)]
    annotations: Vec<RawAnnotation>,
    #[serde(default)]
    lang: Option<String>,
    #[serde(default)]
    primary_frame: Option<String>,
}

fn string_or_number<'de, D>(de: D) -> std::result::Result<String, D::Error>
where
    D: serde::Deserializer<'de>,
{
    match serde_json::Value::deserialize(de)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Null => Ok(String::new()),
        other => Ok(other.to_string()),
    }
}

impl RawRecord {
    fn into_document(self, inventory: &FrameInventory) -> Result<Option<Document>> {
        let id = self.id;
        let date = NaiveDate::parse_from_str(self.date.trim(), "%Y-%m-%d").map_err(|e| {
            Error::Ingestion {
                id: id.clone(),
                message: format!("unparseable date {:?}: {e}", self.date),
            }
        })?;
        let tokens = tokenize_with_offsets(&self.text);
        if tokens.is_empty() {
            log::warn!("document {id} has no tokens; skipped");
            return Ok(None);
        }
        let mut spans = Vec::with_capacity(self.annotations.len());
        for ann in self.annotations {
            if !inventory.contains(&ann.frame) {
                return Err(Error::Ingestion {
                    id,
                    message: format!("frame {:?} not in the frame inventory", ann.frame),
                });
            }
            if ann.start_char >= ann.end_char {
                return Err(Error::Ingestion {
                    id,
                    message: format!("empty span {}..{}", ann.start_char, ann.end_char),
                });
            }
            // every token overlapping the character range
            let covered: Vec<usize> = tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| t.start_char < ann.end_char && t.end_char > ann.start_char)
                .map(|(i, _)| i)
                .collect();
            match (covered.first(), covered.last()) {
                (Some(&first), Some(&last)) => spans.push(FrameSpan {
                    frame: ann.frame,
                    start: first,
                    end: last + 1,
                    annotator: ann.annotator,
                }),
                _ => log::warn!(
                    "document {id}: span {}..{} covers no token; dropped",
                    ann.start_char,
                    ann.end_char
                ),
            }
        }
        if let Some(primary) = &self.primary_frame {
            if !inventory.contains(primary) {
                return Err(Error::Ingestion {
                    id,
                    message: format!("primary frame {primary:?} not in the frame inventory"),
                });
            }
        }
        let tokens = tokens.into_iter().map(|t| t.text).collect();
        let mut doc = Document::new(id, date, tokens, spans)?;
        if let Some(lang) = self.lang {
            doc.language = lang;
        }
        doc.primary_frame = self.primary_frame;
        Ok(Some(doc))
    }
}

/// An ingested, immutable collection of documents with id lookup.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut index = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if index.insert(doc.id.clone(), i).is_some() {
                return Err(Error::Ingestion {
                    id: doc.id.clone(),
                    message: "duplicate document id".into(),
                });
            }
        }
        Ok(Corpus { docs, index })
    }

    /// Reads newline-delimited JSON records. Blank lines are ignored and
    /// documents without tokens are skipped with a warning.
    pub fn read_ndjson<R: BufRead>(reader: R, inventory: &FrameInventory) -> Result<Self> {
        let mut docs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: RawRecord = serde_json::from_str(&line)
                .map_err(|e| Error::parse(format!("line {}", lineno + 1), e.to_string()))?;
            if let Some(doc) = record.into_document(inventory)? {
                docs.push(doc);
            }
        }
        Corpus::new(docs)
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    /// Documents of `slice`, in slice order.
    pub fn slice_documents<'a>(&'a self, slice: &'a TimeSlice) -> impl Iterator<Item = &'a Document> {
        slice.documents.iter().filter_map(move |id| self.get(id))
    }
}

/// Counts entity mentions in a token sequence. [`EntityAliasSet`] is the
/// built-in implementation; an external NER component can stand in for it.
pub trait MentionCounter {
    fn count_mentions(&self, tokens: &[String]) -> usize;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityAliasSet {
    pub entity: String,
    /// Sorted longest first so that matching prefers longer aliases.
    aliases: Vec<Vec<String>>,
}

impl EntityAliasSet {
    /// Each alias string is tokenized with [`tokenize`], which also
    /// lowercases it.
    pub fn new<I, S>(entity: impl Into<String>, aliases: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entity = entity.into();
        let mut set: BTreeSet<Vec<String>> = BTreeSet::new();
        for alias in aliases {
            let toks = tokenize(alias.as_ref());
            if toks.is_empty() {
                return Err(Error::invalid(format!(
                    "alias {:?} of entity {entity:?} has no tokens",
                    alias.as_ref()
                )));
            }
            set.insert(toks);
        }
        if set.is_empty() {
            return Err(Error::invalid(format!("entity {entity:?} has no aliases")));
        }
        let mut aliases: Vec<Vec<String>> = set.into_iter().collect();
        aliases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(EntityAliasSet { entity, aliases })
    }

    pub fn aliases(&self) -> &[Vec<String>] {
        &self.aliases
    }
}

impl MentionCounter for EntityAliasSet {
    fn count_mentions(&self, tokens: &[String]) -> usize {
        let mut count = 0;
        let mut i = 0;
        while i < tokens.len() {
            let hit = self
                .aliases
                .iter()
                .find(|alias| tokens[i..].starts_with(alias.as_slice()));
            match hit {
                Some(alias) => {
                    count += 1;
                    i += alias.len();
                }
                None => i += 1,
            }
        }
        count
    }
}

/// Number of non-overlapping alias occurrences in the document.
pub fn entity_mention_count(doc: &Document, aliases: &dyn MentionCounter) -> usize {
    aliases.count_mentions(&doc.tokens)
}

/// Document predicate "mentions the entity at least `min_mentions` times".
pub struct EntityFocus<'a> {
    pub counter: &'a dyn MentionCounter,
    pub min_mentions: usize,
}

impl EntityFocus<'_> {
    pub fn matches(&self, doc: &Document) -> bool {
        entity_mention_count(doc, self.counter) >= self.min_mentions
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSlice {
    pub period: Period,
    pub documents: Vec<String>,
}

/// Buckets documents by period. The result is sorted and gap-free between
/// the first and last non-empty period.
pub fn slice_corpus(docs: &[Document], granularity: Granularity) -> Vec<TimeSlice> {
    let mut buckets: BTreeMap<Period, Vec<String>> = BTreeMap::new();
    for doc in docs {
        buckets
            .entry(Period::of(doc.date, granularity))
            .or_default()
            .push(doc.id.clone());
    }
    let (Some(&first), Some(&last)) = (buckets.keys().next(), buckets.keys().next_back()) else {
        return Vec::new();
    };
    Period::range(first, last)
        .into_iter()
        .map(|period| TimeSlice {
            period,
            documents: buckets.remove(&period).unwrap_or_default(),
        })
        .collect()
}
