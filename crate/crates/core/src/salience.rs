//! Salience shifts around market turns: decile month partitions, log-odds
//! with an informative Dirichlet prior, and AgendaLex construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::{Corpus, Document, TimeSlice};
use crate::error::{Error, Result};
use crate::framing::FrameAssignment;
use crate::lexicon::{Provenance, ScoredLexicon};
use crate::period::{Granularity, Period};
use crate::timeseries::{percent_change, TimeSeries};

pub const DEFAULT_DECILE: f64 = 0.10;
pub const DEFAULT_PRIOR_SCALE: f64 = 500.0;
pub const DEFAULT_TOP_N: usize = 500;

/// Months of strongest growth and decline, and the months right after.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonthPartition {
    pub up_months: BTreeSet<Period>,
    pub down_months: BTreeSet<Period>,
    pub after_up: BTreeSet<Period>,
    pub after_down: BTreeSet<Period>,
}

/// Ranks months by percent change of the indicator and takes the top and
/// bottom `decile`. Ties are broken toward the earlier month.
pub fn partition_months(indicator: &TimeSeries, decile: f64) -> Result<MonthPartition> {
    if indicator.granularity() != Granularity::Month {
        return Err(Error::invalid("month partition needs a monthly indicator"));
    }
    if indicator.len() < 10 {
        return Err(Error::TooShort(format!("{} months, need at least 10", indicator.len())));
    }
    if !(decile > 0.0 && decile <= 0.5) {
        return Err(Error::invalid(format!("decile {decile} outside (0, 0.5]")));
    }
    let changes = percent_change(indicator)?;
    let pts = changes.points();
    let count = (decile * pts.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    if 2 * count > pts.len() {
        return Err(Error::invalid("top and bottom deciles would overlap"));
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[b].1.total_cmp(&pts[a].1).then(a.cmp(&b)));
    let up_months: BTreeSet<Period> = order[..count].iter().map(|&i| pts[i].0).collect();
    order.sort_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1).then(a.cmp(&b)));
    let down_months: BTreeSet<Period> = order[..count].iter().map(|&i| pts[i].0).collect();

    let last = indicator.last_period().expect("non-empty");
    let successors = |set: &BTreeSet<Period>| -> BTreeSet<Period> {
        set.iter().map(Period::succ).filter(|p| *p <= last).collect()
    };
    Ok(MonthPartition {
        after_up: successors(&up_months),
        after_down: successors(&down_months),
        up_months,
        down_months,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogOdds {
    pub delta: f64,
    pub variance: f64,
    pub z: f64,
}

/// Log-odds ratio with Dirichlet prior for every word in either table.
/// Positive `delta` means the word is relatively more frequent in `i`.
pub fn log_odds_dirichlet(
    counts_i: &HashMap<String, usize>,
    counts_j: &HashMap<String, usize>,
    prior: &HashMap<String, f64>,
) -> Result<BTreeMap<String, LogOdds>> {
    if let Some((w, a)) = prior.iter().find(|(_, &a)| !(a > 0.0)) {
        return Err(Error::invalid(format!("non-positive prior {a} for {w:?}")));
    }
    let n_i: f64 = counts_i.values().sum::<usize>() as f64;
    let n_j: f64 = counts_j.values().sum::<usize>() as f64;
    let alpha0: f64 = prior.values().sum();
    let vocab: BTreeSet<&String> = counts_i.keys().chain(counts_j.keys()).collect();
    let mut out = BTreeMap::new();
    for w in vocab {
        let a = *prior
            .get(w)
            .ok_or_else(|| Error::invalid(format!("no prior for {w:?}")))?;
        let yi = counts_i.get(w).copied().unwrap_or(0) as f64;
        let yj = counts_j.get(w).copied().unwrap_or(0) as f64;
        let rest_i = n_i + alpha0 - yi - a;
        let rest_j = n_j + alpha0 - yj - a;
        if rest_i <= 0.0 || rest_j <= 0.0 {
            return Err(Error::invalid(format!(
                "prior mass outside {w:?} is zero; log-odds undefined"
            )));
        }
        let delta = ((yi + a) / rest_i).ln() - ((yj + a) / rest_j).ln();
        let variance = 1.0 / (yi + a) + 1.0 / (yj + a);
        out.insert(
            w.clone(),
            LogOdds {
                delta,
                variance,
                z: delta / variance.sqrt(),
            },
        );
    }
    Ok(out)
}

/// Informative prior: each word's corpus relative frequency scaled so the
/// pseudo-counts sum to `scale`.
pub fn informative_prior<'a, I>(docs: I, scale: f64) -> HashMap<String, f64>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut total = 0usize;
    for d in docs {
        for t in &d.tokens {
            *counts.entry(t.clone()).or_default() += 1;
            total += 1;
        }
    }
    counts
        .into_iter()
        .map(|(w, c)| (w, scale * c as f64 / total as f64))
        .collect()
}

fn pool_counts<'a, I>(docs: I) -> HashMap<String, usize>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts = HashMap::new();
    for d in docs {
        for t in &d.tokens {
            *counts.entry(t.clone()).or_default() += 1;
        }
    }
    counts
}

/// Words with positive z, highest first (ties by word), at most `top_n`.
fn top_positive(scores: &BTreeMap<String, LogOdds>, top_n: usize) -> Vec<(&String, f64)> {
    let mut v: Vec<(&String, f64)> = scores.iter().filter(|(_, s)| s.z > 0.0).map(|(w, s)| (w, s.z)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v.truncate(top_n);
    v
}

/// Words that gain salience after downturns and lose it after upturns, among
/// focus documents carrying `frame`. Scores are the z-values of the
/// downturn comparison.
pub fn build_agendalex<F>(
    frame: &str,
    corpus: &Corpus,
    assignments: &HashMap<String, FrameAssignment>,
    partition: &MonthPartition,
    focus: F,
    prior: &HashMap<String, f64>,
    top_n: usize,
) -> Result<ScoredLexicon>
where
    F: Fn(&Document) -> bool,
{
    let qualifying: Vec<&Document> = corpus
        .iter()
        .filter(|d| {
            assignments
                .get(&d.id)
                .is_some_and(|a| a.present.contains(frame))
                && focus(d)
        })
        .collect();
    let pool = |months: &BTreeSet<Period>, name: &str| -> Result<HashMap<String, usize>> {
        let docs: Vec<&Document> = qualifying
            .iter()
            .copied()
            .filter(|d| months.contains(&Period::of(d.date, Granularity::Month)))
            .collect();
        if docs.is_empty() {
            return Err(Error::EmptyPool {
                pool: format!("{name} ({frame})"),
            });
        }
        Ok(pool_counts(docs))
    };
    let down = pool(&partition.down_months, "down months")?;
    let after_down = pool(&partition.after_down, "months after down")?;
    let up = pool(&partition.up_months, "up months")?;
    let after_up = pool(&partition.after_up, "months after up")?;

    let rising = log_odds_dirichlet(&after_down, &down, prior)?;
    let falling = log_odds_dirichlet(&up, &after_up, prior)?;
    let falling_top: BTreeSet<&String> = top_positive(&falling, top_n).into_iter().map(|(w, _)| w).collect();
    let entries = top_positive(&rising, top_n)
        .into_iter()
        .filter(|(w, _)| falling_top.contains(w))
        .map(|(w, z)| (w.clone(), z))
        .collect();
    Ok(ScoredLexicon::new(frame, entries, Provenance::Agenda))
}

/// Lexicon tokens per token of focus documents, per slice.
pub fn lexicon_frequency_series<F>(
    lexicon: &BTreeSet<String>,
    slices: &[TimeSlice],
    corpus: &Corpus,
    focus: F,
) -> Result<TimeSeries>
where
    F: Fn(&Document) -> bool,
{
    let granularity = slices.first().map_or(Granularity::Month, |s| s.period.granularity());
    let points = slices
        .iter()
        .map(|slice| {
            let (mut hits, mut total) = (0usize, 0usize);
            for d in corpus.slice_documents(slice).filter(|d| focus(d)) {
                total += d.tokens.len();
                hits += d.tokens.iter().filter(|t| lexicon.contains(*t)).count();
            }
            if total == 0 {
                log::warn!("slice {} has no focus documents; frequency set to 0", slice.period);
                (slice.period, 0.0)
            } else {
                (slice.period, hits as f64 / total as f64)
            }
        })
        .collect();
    TimeSeries::new(granularity, points)
}
