use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lexicon::ScoredLexicon;

pub const MEMBERS_PER_SET: usize = 5;

/// Five lexicon words plus one word from another frame's lexicon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntruderSet {
    pub id: String,
    pub frame: String,
    pub members: Vec<String>,
    pub intruder: String,
    pub intruder_frame: String,
    /// The six words in presentation order.
    pub order: Vec<String>,
}

impl IntruderSet {
    pub fn contains(&self, word: &str) -> bool {
        self.order.iter().any(|w| w == word)
    }

    /// Answer-key TSV: `set_id frame intruder intruder_frame words`, the last
    /// field comma-separated in presentation order.
    pub fn write_key<W: Write>(sets: &[IntruderSet], mut out: W) -> Result<()> {
        writeln!(out, "set_id\tframe\tintruder\tintruder_frame\twords")?;
        for s in sets {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                s.id,
                s.frame,
                s.intruder,
                s.intruder_frame,
                s.order.join(",")
            )?;
        }
        Ok(())
    }

    /// Annotator-facing TSV without answers: `set_id` then the six words.
    pub fn write_tasks<W: Write>(sets: &[IntruderSet], mut out: W) -> Result<()> {
        for s in sets {
            writeln!(out, "{}\t{}", s.id, s.order.join("\t"))?;
        }
        Ok(())
    }

    pub fn read_key<R: BufRead>(reader: R) -> Result<Vec<IntruderSet>> {
        let mut sets = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let ctx = format!("line {}", i + 1);
            let fields: Vec<&str> = line.split('\t').collect();
            let [id, frame, intruder, intruder_frame, words] = fields[..] else {
                return Err(Error::parse(ctx, "expected 5 tab-separated fields"));
            };
            let order: Vec<String> = words.split(',').map(String::from).collect();
            if !order.iter().any(|w| w == intruder) {
                return Err(Error::parse(ctx, "intruder missing from the word list"));
            }
            let members = order.iter().filter(|w| *w != intruder).cloned().collect();
            sets.push(IntruderSet {
                id: id.into(),
                frame: frame.into(),
                members,
                intruder: intruder.into(),
                intruder_frame: intruder_frame.into(),
                order,
            });
        }
        Ok(sets)
    }
}

/// `sets_per_frame` sets for every lexicon. Members are sampled without
/// replacement from the frame's lexicon; the intruder comes from another
/// frame's lexicon and never belongs to the target lexicon.
pub fn intruder_generate(lexicons: &[ScoredLexicon], sets_per_frame: usize, seed: u64) -> Result<Vec<IntruderSet>> {
    if lexicons.len() < 2 {
        return Err(Error::invalid("intruder sets need at least two frames"));
    }
    if let Some(small) = lexicons.iter().find(|l| l.len() < MEMBERS_PER_SET) {
        return Err(Error::invalid(format!(
            "lexicon {:?} has {} words, need at least {MEMBERS_PER_SET}",
            small.frame,
            small.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(lexicons.len() * sets_per_frame);
    for lex in lexicons {
        let own = lex.word_set();
        let words: Vec<&str> = lex.words().collect();
        let pools: Vec<(&str, Vec<&str>)> = lexicons
            .iter()
            .filter(|o| o.frame != lex.frame)
            .map(|o| (o.frame.as_str(), o.words().filter(|w| !own.contains(w)).collect::<Vec<_>>()))
            .filter(|(_, pool)| !pool.is_empty())
            .collect();
        if pools.is_empty() {
            return Err(Error::NoIntruder {
                frame: lex.frame.clone(),
                others: lexicons
                    .iter()
                    .filter(|o| o.frame != lex.frame)
                    .map(|o| o.frame.clone())
                    .collect(),
            });
        }
        for _ in 0..sets_per_frame {
            let members: Vec<String> = words
                .choose_multiple(&mut rng, MEMBERS_PER_SET)
                .map(|w| w.to_string())
                .collect();
            let (intruder_frame, pool) = pools.choose(&mut rng).expect("non-empty pools");
            let intruder = pool.choose(&mut rng).expect("non-empty pool").to_string();
            let mut order = members.clone();
            order.push(intruder.clone());
            order.shuffle(&mut rng);
            sets.push(IntruderSet {
                id: format!("s{:04}", sets.len()),
                frame: lex.frame.clone(),
                members,
                intruder,
                intruder_frame: intruder_frame.to_string(),
                order,
            });
        }
    }
    Ok(sets)
}

/// annotator -> set id -> chosen word.
pub type Responses = BTreeMap<String, BTreeMap<String, String>>;

/// Reads `annotator_id<TAB>set_id<TAB>chosen_word` lines.
pub fn read_responses<R: BufRead>(reader: R) -> Result<Responses> {
    let mut out = Responses::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [annotator, set, word] = fields[..] else {
            return Err(Error::parse(format!("line {}", i + 1), "expected annotator, set, word"));
        };
        out.entry(annotator.to_string())
            .or_default()
            .insert(set.to_string(), word.trim().to_string());
    }
    Ok(out)
}

/// Percentages per frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntruderScore {
    /// Every responding annotator found the intruder.
    pub hard: f64,
    /// At least one annotator found it.
    pub soft: f64,
    /// Mean share of annotators who found it.
    pub avg: f64,
    pub sets: usize,
}

/// Scores responses per frame. Sets nobody answered are left out.
pub fn intruder_score(sets: &[IntruderSet], responses: &Responses) -> Result<BTreeMap<String, IntruderScore>> {
    let by_id: HashMap<&str, &IntruderSet> = sets.iter().map(|s| (s.id.as_str(), s)).collect();
    // set id -> per-annotator correctness
    let mut outcomes: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
    for (annotator, answers) in responses {
        for (set_id, word) in answers {
            let set = by_id
                .get(set_id.as_str())
                .ok_or_else(|| Error::invalid(format!("annotator {annotator} answered unknown set {set_id:?}")))?;
            if !set.contains(word) {
                return Err(Error::invalid(format!(
                    "annotator {annotator} chose {word:?}, which is not in set {set_id}"
                )));
            }
            outcomes.entry(set.id.as_str()).or_default().push(*word == set.intruder);
        }
    }
    let mut per_frame: BTreeMap<&str, (usize, usize, f64, usize)> = BTreeMap::new();
    let frames: HashSet<&str> = sets.iter().map(|s| s.frame.as_str()).collect();
    for (set_id, results) in &outcomes {
        let frame = by_id[set_id].frame.as_str();
        let correct = results.iter().filter(|&&c| c).count();
        let e = per_frame.entry(frame).or_default();
        e.0 += usize::from(correct == results.len());
        e.1 += usize::from(correct > 0);
        e.2 += correct as f64 / results.len() as f64;
        e.3 += 1;
    }
    for f in frames {
        if !per_frame.contains_key(f) {
            log::warn!("no responses for frame {f:?}");
        }
    }
    Ok(per_frame
        .into_iter()
        .map(|(frame, (hard, soft, avg, n))| {
            let pct = |x: f64| 100.0 * x / n as f64;
            (
                frame.to_string(),
                IntruderScore {
                    hard: pct(hard as f64),
                    soft: pct(soft as f64),
                    avg: pct(avg),
                    sets: n,
                },
            )
        })
        .collect())
}
