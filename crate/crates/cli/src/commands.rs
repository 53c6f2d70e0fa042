//! One function per subcommand. Each reads its inputs through [`Config`],
//! writes reports through [`Run`] and finishes with a manifest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use framelex::corpus::{slice_corpus, Corpus, Document, EntityAliasSet, EntityFocus, FrameInventory, OTHER};
use framelex::embedding::{expand_lexicon, train_cbow, CbowConfig, EmbeddingSpace, ExpansionConfig, ExpansionMode};
use framelex::evaluation::{
    baseline_logreg, eval_all_frames_f1, eval_primary_accuracy, intruder_generate, intruder_score, kfold_split,
    read_responses, IntruderSet, LogRegConfig,
};
use framelex::framing::{CountMode, FrameAssigner, FrameAssignment, DEFAULT_THRESHOLD};
use framelex::lexicon::{induce_base_lexicon, DocFrequencyTable, Provenance, ScoredLexicon, DEFAULT_BASE_SIZE};
use framelex::period::Granularity;
use framelex::projection::{lexicon_overlap, project_lexicon, BilingualDictionary};
use framelex::salience::{
    build_agendalex, informative_prior, lexicon_frequency_series, partition_months, DEFAULT_DECILE,
    DEFAULT_PRIOR_SCALE, DEFAULT_TOP_N,
};
use framelex::timeseries::{align, article_coverage, granger_test, pearson, percent_change, word_coverage, TimeSeries};
use framelex::Error;

use crate::config::{Config, ValidationError};
use crate::run::{num, slug, Run};

pub const COMMANDS: [&str; 12] = [
    "induce",
    "project",
    "assign",
    "coverage",
    "correlate",
    "granger",
    "npmi",
    "agendalex",
    "eval-primary",
    "eval-frames",
    "intruder-gen",
    "intruder-score",
];

pub fn dispatch(command: &str, cfg: &Config) -> Result<PathBuf> {
    match command {
        "induce" => induce(cfg),
        "project" => project(cfg),
        "assign" => assign(cfg),
        "coverage" => coverage(cfg),
        "correlate" => correlate(cfg),
        "granger" => granger(cfg),
        "npmi" => npmi(cfg),
        "agendalex" => agendalex(cfg),
        "eval-primary" => eval_primary(cfg),
        "eval-frames" => eval_frames(cfg),
        "intruder-gen" => intruder_gen(cfg),
        "intruder-score" => intruder_scores(cfg),
        other => bail!("unknown command {other:?}"),
    }
}

fn validation(key: &str, message: impl Into<String>) -> anyhow::Error {
    ValidationError {
        key: key.to_string(),
        message: message.into(),
    }
    .into()
}

// ---------------------------------------------------------------- loading

fn inventory(cfg: &Config) -> Result<FrameInventory> {
    Ok(match cfg.opt_list("corpus.frames")? {
        Some(frames) => FrameInventory::new(frames),
        None => FrameInventory::default(),
    })
}

fn load_corpus(cfg: &Config, run: &mut Run, key: &str) -> Result<Corpus> {
    let path = cfg.input_path(key)?;
    run.input(&path)?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let corpus = Corpus::read_ndjson(BufReader::new(file), &inventory(cfg)?)
        .with_context(|| format!("reading {key} ({})", path.display()))?;
    if corpus.is_empty() {
        return Err(validation(key, "corpus has no documents"));
    }
    log::info!("{key}: {} documents", corpus.len());
    Ok(corpus)
}

fn load_aliases(cfg: &Config, run: &mut Run) -> Result<EntityAliasSet> {
    let path = cfg.input_path("entity.aliases")?;
    run.input(&path)?;
    let text = std::fs::read_to_string(&path)?;
    let table: BTreeMap<String, Vec<String>> =
        toml::from_str(&text).map_err(|e| validation("entity.aliases", e.to_string()))?;
    let name = match cfg.opt_str("entity.name")? {
        Some(n) => n,
        None if table.len() == 1 => table.keys().next().cloned().expect("one entry"),
        None => return Err(validation("entity.name", "required when the alias file lists several entities")),
    };
    let aliases = table
        .get(&name)
        .ok_or_else(|| validation("entity.name", format!("{name:?} not in the alias file")))?;
    EntityAliasSet::new(name.clone(), aliases).map_err(|e| validation("entity.aliases", e.to_string()))
}

fn min_mentions(cfg: &Config) -> Result<usize> {
    Ok(cfg.usize_in("entity.min_mentions", 2, 1, 1000)?)
}

fn load_lexicons(cfg: &Config, run: &mut Run) -> Result<Vec<ScoredLexicon>> {
    let default = run.out_dir().join("lexicons").join("final");
    let dir = cfg.input_path_or("lexicons.dir", &default)?;
    run.input(&dir)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "tsv"));
    paths.sort();
    if paths.is_empty() {
        return Err(validation("lexicons.dir", format!("no .tsv lexicons in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let file = File::open(p)?;
            ScoredLexicon::read_tsv(BufReader::new(file)).with_context(|| format!("reading {}", p.display()))
        })
        .collect()
}

fn load_series(cfg: &Config, run: &mut Run, key: &str) -> Result<TimeSeries> {
    let path = cfg.input_path(key)?;
    run.input(&path)?;
    let file = File::open(&path)?;
    TimeSeries::read_csv(BufReader::new(file)).with_context(|| format!("reading {key} ({})", path.display()))
}

fn count_mode(cfg: &Config) -> Result<CountMode> {
    match cfg.str_or("framing.count", "tokens")?.as_str() {
        "tokens" => Ok(CountMode::Tokens),
        "distinct" => Ok(CountMode::DistinctWords),
        other => Err(validation("framing.count", format!("{other:?} is not tokens or distinct"))),
    }
}

fn assigner(cfg: &Config, lexicons: &[ScoredLexicon]) -> Result<FrameAssigner> {
    let threshold = cfg.usize_in("framing.threshold", DEFAULT_THRESHOLD, 1, 100_000)?;
    Ok(FrameAssigner::new(lexicons, threshold, count_mode(cfg)?)?)
}

fn seed(cfg: &Config, run: &mut Run, key: &str) -> Result<u64> {
    let general: u64 = cfg.parse_or("general.seed", 1)?;
    let value = cfg.parse_or(key, general)?;
    run.seed(key, value);
    Ok(value)
}

/// Loads vectors from `embedding.path` or trains CBOW on `docs`.
fn embedding(cfg: &Config, run: &mut Run, docs: &[Document]) -> Result<EmbeddingSpace> {
    match cfg.str_or("embedding.source", "train")?.as_str() {
        "load" => {
            let path = cfg.input_path("embedding.path")?;
            run.input(&path)?;
            let file = File::open(&path)?;
            EmbeddingSpace::read_text(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
        }
        "train" => {
            let defaults = CbowConfig::default();
            let cbow = CbowConfig {
                dimension: cfg.usize_in("embedding.dimension", defaults.dimension, 2, 10_000)?,
                window: cfg.usize_in("embedding.window", defaults.window, 1, 100)?,
                epochs: cfg.usize_in("embedding.epochs", defaults.epochs, 1, 1000)?,
                negatives: cfg.usize_in("embedding.negatives", defaults.negatives, 1, 100)?,
                learning_rate: cfg.f64_in("embedding.learning_rate", f64::from(defaults.learning_rate), 1e-6, 1.0)? as f32,
                min_count: cfg.usize_in("embedding.min_count", defaults.min_count, 1, usize::MAX)?,
                subsample: cfg.f64_in("embedding.subsample", defaults.subsample, 0.0, 1.0)?,
                seed: seed(cfg, run, "embedding.seed")?,
                workers: cfg.usize_in("embedding.workers", defaults.workers, 1, 1024)?,
            };
            if cbow.workers > 1 {
                log::warn!("embedding.workers > 1: trained vectors are not reproducible");
            }
            let space = train_cbow(docs, &cbow)?;
            if cfg.parse_or("embedding.save", false)? {
                let mut buf = Vec::new();
                space.write_text(&mut buf)?;
                run.write("embeddings.txt", &buf)?;
            }
            Ok(space)
        }
        other => Err(validation("embedding.source", format!("{other:?} is not train or load"))),
    }
}

fn expansion(cfg: &Config, default: ExpansionConfig) -> Result<ExpansionConfig> {
    let mode: ExpansionMode = cfg.parse_or("project.mode", default.mode)?;
    let base = match mode {
        ExpansionMode::Augment => ExpansionConfig::augment(),
        ExpansionMode::Replace => ExpansionConfig::replace(),
    };
    Ok(ExpansionConfig {
        max_neighbors: cfg.usize_in("project.k", base.max_neighbors, 1, usize::MAX)?,
        max_distance: cfg.f64_in("project.t", base.max_distance, 0.0, 2.0)?,
        mode,
        vocab_cap: cfg.usize_in("project.vocab_cap", base.vocab_cap, 1, usize::MAX)?,
    })
}

fn lexicon_tsv(lex: &ScoredLexicon) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    lex.write_tsv(&mut buf)?;
    Ok(buf)
}

// ---------------------------------------------------------------- induce

fn induce(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("induce", cfg.output_dir()?)?;
    let corpus = load_corpus(cfg, &mut run, "corpus.annotated")?;
    let size = cfg.usize_in("induce.size", DEFAULT_BASE_SIZE, 1, usize::MAX)?;
    let inventory = inventory(cfg)?;
    let mut rows = Vec::new();
    for frame in inventory.lexical_frames() {
        match induce_base_lexicon(corpus.documents(), frame, size) {
            Ok(lex) => {
                run.write(&format!("lexicons/base/{}.tsv", slug(frame)), &lexicon_tsv(&lex)?)?;
                rows.push(vec![frame.to_string(), lex.len().to_string(), "ok".into()]);
            }
            Err(e @ (Error::EmptyFrame { .. } | Error::EmptyLexicon { .. })) => {
                log::warn!("{e}");
                rows.push(vec![frame.to_string(), "0".into(), e.to_string()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    run.write_csv("induce.csv", &["frame", "size", "status"], rows)?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- project

fn project(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("project", cfg.output_dir()?)?;
    let base_default = run.out_dir().join("lexicons").join("base");
    let base_dir = cfg.input_path_or("project.base_dir", &base_default)?;
    run.input(&base_dir)?;
    let mut bases = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&base_dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "tsv"));
    paths.sort();
    for p in &paths {
        bases.push(ScoredLexicon::read_tsv(BufReader::new(File::open(p)?))?);
    }
    if bases.is_empty() {
        return Err(validation("project.base_dir", "no base lexicons"));
    }

    let dictionary = match cfg.opt_input_path("project.dictionary")? {
        Some(p) => {
            run.input(&p)?;
            Some(BilingualDictionary::read_tsv(BufReader::new(File::open(&p)?))?)
        }
        None => None,
    };
    let default = if dictionary.is_some() {
        ExpansionConfig::replace()
    } else {
        ExpansionConfig::augment()
    };
    let exp = expansion(cfg, default)?;
    exp.validate().map_err(|e| validation("project", e.to_string()))?;

    let corpus = load_corpus(cfg, &mut run, "corpus.path")?;
    let space = embedding(cfg, &mut run, corpus.documents())?;
    let df = DocFrequencyTable::from_documents(corpus.iter());

    let mut rows = Vec::new();
    let mut finals = Vec::new();
    for base in &bases {
        let outcome = match &dictionary {
            Some(dict) => project_lexicon(base, dict, &space, &df, &exp)
                .map(|p| (p.translated, p.in_vocab, p.expanded, p.lexicon)),
            None => expand_lexicon(base, &space, &exp).map(|expanded| {
                let n = expanded.len();
                let lex = expanded.filter_doc_frequency(&df).with_provenance(Provenance::Final);
                (base.len(), base.len(), n, lex)
            }),
        };
        match outcome {
            Ok((translated, in_vocab, expanded, lex)) if !lex.is_empty() => {
                run.write(&format!("lexicons/final/{}.tsv", slug(&base.frame)), &lexicon_tsv(&lex)?)?;
                rows.push(vec![
                    base.frame.clone(),
                    base.len().to_string(),
                    translated.to_string(),
                    in_vocab.to_string(),
                    expanded.to_string(),
                    lex.len().to_string(),
                    framelex::projection::EXPECTED_SIZE.contains(&lex.len()).to_string(),
                    "ok".into(),
                ]);
                finals.push(lex);
            }
            Ok(_) => {
                log::warn!("{}: empty after document-frequency filtering", base.frame);
                rows.push(failed_row(&base.frame, base.len(), "empty after document-frequency filtering"));
            }
            Err(
                e @ (Error::NoTranslations { .. } | Error::NoLexiconWordInVocab { .. } | Error::EmptyLexicon { .. }),
            ) => {
                log::warn!("{e}");
                rows.push(failed_row(&base.frame, base.len(), &e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if finals.is_empty() {
        bail!("no frame produced a final lexicon");
    }
    run.write_csv(
        "project.csv",
        &["frame", "base", "translated", "in_vocab", "expanded", "final", "in_expected_range", "status"],
        rows,
    )?;
    let overlap = lexicon_overlap(&finals)
        .into_iter()
        .map(|(a, b, shared, frac)| vec![a, b, shared.to_string(), num(frac)])
        .collect();
    run.write_csv("overlap.csv", &["frame_a", "frame_b", "shared", "fraction"], overlap)?;
    run.finish(cfg)
}

fn failed_row(frame: &str, base: usize, status: &str) -> Vec<String> {
    let mut row = vec![frame.to_string(), base.to_string()];
    row.extend(std::iter::repeat_n("0".to_string(), 4));
    row.push("false".into());
    row.push(status.to_string());
    row
}

// ---------------------------------------------------------------- assign

fn assign(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("assign", cfg.output_dir()?)?;
    let corpus = load_corpus(cfg, &mut run, "corpus.path")?;
    let lexicons = load_lexicons(cfg, &mut run)?;
    let assigner = assigner(cfg, &lexicons)?;
    let mut lines = Vec::new();
    let mut primary: BTreeMap<String, usize> = BTreeMap::new();
    let mut present: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus.iter() {
        let a = assigner.assign(doc);
        *primary.entry(a.primary.clone()).or_default() += 1;
        for f in &a.present {
            *present.entry(f.clone()).or_default() += 1;
        }
        serde_json::to_writer(&mut lines, &a)?;
        lines.push(b'\n');
    }
    run.write("assignments.jsonl", &lines)?;
    let frames: BTreeSet<String> = assigner
        .frames()
        .iter()
        .cloned()
        .chain(std::iter::once(OTHER.to_string()))
        .collect();
    let rows = frames
        .into_iter()
        .map(|f| {
            let p = primary.get(&f).copied().unwrap_or(0);
            let q = present.get(&f).copied().unwrap_or(0);
            vec![f, p.to_string(), q.to_string()]
        })
        .collect();
    run.write_csv("assign_summary.csv", &["frame", "primary_docs", "present_docs"], rows)?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- coverage

fn granularity(cfg: &Config) -> Result<Granularity> {
    Ok(cfg.parse_or("corpus.granularity", Granularity::Month)?)
}

struct Coverage {
    documents: Vec<usize>,
    article: TimeSeries,
    word: TimeSeries,
}

fn compute_coverage(cfg: &Config, run: &mut Run) -> Result<Coverage> {
    let corpus = load_corpus(cfg, run, "corpus.path")?;
    let aliases = load_aliases(cfg, run)?;
    let min = min_mentions(cfg)?;
    let slices = slice_corpus(corpus.documents(), granularity(cfg)?);
    Ok(Coverage {
        documents: slices.iter().map(|s| s.documents.len()).collect(),
        article: article_coverage(&slices, &corpus, &aliases, min)?,
        word: word_coverage(&slices, &corpus, &aliases)?,
    })
}

fn coverage(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("coverage", cfg.output_dir()?)?;
    let cov = compute_coverage(cfg, &mut run)?;
    let rows = cov
        .article
        .points()
        .iter()
        .zip(cov.word.points())
        .zip(&cov.documents)
        .map(|(((period, a), (_, w)), n)| vec![period.to_string(), n.to_string(), num(*a), num(*w)])
        .collect();
    run.write_csv("coverage.csv", &["period", "documents", "article", "word"], rows)?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- correlate / granger

#[derive(Clone, Copy, PartialEq, Eq)]
enum Transform {
    None,
    Pct,
}

fn transform(cfg: &Config, key: &str, default: &str) -> Result<Transform> {
    match cfg.str_or(key, default)?.as_str() {
        "none" => Ok(Transform::None),
        "pct" => Ok(Transform::Pct),
        other => Err(validation(key, format!("{other:?} is not none or pct"))),
    }
}

fn apply(t: Transform, s: &TimeSeries) -> framelex::Result<TimeSeries> {
    match t {
        Transform::None => Ok(s.clone()),
        Transform::Pct => percent_change(s),
    }
}

/// Target series: the file at `granger.target` if set, else both coverage
/// metrics of the corpus.
fn targets(cfg: &Config, run: &mut Run, key: &str) -> Result<Vec<(String, TimeSeries)>> {
    if cfg.opt_str(key)?.is_some() {
        return Ok(vec![("target".into(), load_series(cfg, run, key)?)]);
    }
    let cov = compute_coverage(cfg, run)?;
    Ok(vec![("article".into(), cov.article), ("word".into(), cov.word)])
}

fn correlate(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("correlate", cfg.output_dir()?)?;
    let indicator = load_series(cfg, &mut run, "indicator.path")?;
    let t = transform(cfg, "correlate.transform", "none")?;
    let mut rows = Vec::new();
    for (name, series) in targets(cfg, &mut run, "correlate.target")? {
        let (x, y) = align(&series, &indicator)?;
        let (x, y) = (apply(t, &x)?, apply(t, &y)?);
        let r = pearson(&x, &y)?;
        rows.push(vec![
            name,
            if t == Transform::Pct { "pct" } else { "none" }.into(),
            x.len().to_string(),
            x.first_period().map_or(String::new(), |p| p.to_string()),
            x.last_period().map_or(String::new(), |p| p.to_string()),
            num(r),
        ]);
    }
    run.write_csv("correlate.csv", &["series", "transform", "n", "first", "last", "pearson_r"], rows)?;
    run.finish(cfg)
}

fn granger(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("granger", cfg.output_dir()?)?;
    let indicator = load_series(cfg, &mut run, "indicator.path")?;
    let t = transform(cfg, "granger.transform", "pct")?;
    let intercept: bool = cfg.parse_or("granger.intercept", true)?;
    let lags: Vec<usize> = cfg
        .opt_list("granger.lags")?
        .unwrap_or_else(|| vec!["1".into()])
        .iter()
        .map(|s| match s.parse::<usize>() {
            Ok(l) if l >= 1 => Ok(l),
            _ => Err(validation("granger.lags", format!("{s:?} is not a positive integer"))),
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (name, series) in targets(cfg, &mut run, "granger.target")? {
        let (x, y) = align(&series, &indicator)?;
        let (x, y) = (apply(t, &x)?, apply(t, &y)?);
        for &lag in &lags {
            for (target, predictor, tx, px) in [(&name, "indicator", &x, &y), (&"indicator".to_string(), name.as_str(), &y, &x)] {
                let result = granger_test(tx, px, lag, lag, intercept)?;
                for c in &result.coefficients {
                    rows.push(vec![
                        target.clone(),
                        predictor.to_string(),
                        lag.to_string(),
                        result.n_obs.to_string(),
                        c.name(),
                        num(c.estimate),
                        num(c.std_error),
                        num(c.t_stat),
                        num(c.p_value),
                    ]);
                }
            }
        }
    }
    run.write_csv(
        "granger.csv",
        &["target", "predictor", "lags", "n_obs", "coefficient", "estimate", "std_error", "t_stat", "p_value"],
        rows,
    )?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- npmi

fn npmi(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("npmi", cfg.output_dir()?)?;
    let corpus = load_corpus(cfg, &mut run, "corpus.path")?;
    let aliases = load_aliases(cfg, &mut run)?;
    let focus = EntityFocus {
        counter: &aliases,
        min_mentions: min_mentions(cfg)?,
    };
    let lexicons = load_lexicons(cfg, &mut run)?;
    let assigner = assigner(cfg, &lexicons)?;
    let docs = corpus.documents();
    let focus_flags: Vec<bool> = docs.iter().map(|d| focus.matches(d)).collect();
    let mut rows = Vec::new();
    for frame in assigner.frames() {
        let frame_flags: Vec<bool> = docs.iter().map(|d| assigner.frame_present(d, frame)).collect();
        let joint = focus_flags.iter().zip(&frame_flags).filter(|(a, b)| **a && **b).count();
        let (value, status) = match framelex::framing::npmi_from_events(&focus_flags, &frame_flags) {
            Ok(v) => (num(v), "ok".to_string()),
            Err(e @ Error::EmptyEvent { .. }) => (String::new(), e.to_string()),
            Err(e) => return Err(e.into()),
        };
        rows.push(vec![
            frame.clone(),
            value,
            focus_flags.iter().filter(|&&b| b).count().to_string(),
            frame_flags.iter().filter(|&&b| b).count().to_string(),
            joint.to_string(),
            docs.len().to_string(),
            status,
        ]);
    }
    run.write_csv(
        "npmi.csv",
        &["frame", "npmi", "focus_docs", "frame_docs", "joint_docs", "documents", "status"],
        rows,
    )?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- agendalex

fn agendalex(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("agendalex", cfg.output_dir()?)?;
    let corpus = load_corpus(cfg, &mut run, "corpus.path")?;
    let aliases = load_aliases(cfg, &mut run)?;
    let focus = EntityFocus {
        counter: &aliases,
        min_mentions: min_mentions(cfg)?,
    };
    let lexicons = load_lexicons(cfg, &mut run)?;
    let assigner = assigner(cfg, &lexicons)?;
    let indicator = load_series(cfg, &mut run, "indicator.path")?;
    if indicator.granularity() != Granularity::Month {
        return Err(validation("indicator.path", "agendalex needs a monthly indicator"));
    }
    let decile = cfg.f64_in("agendalex.decile", DEFAULT_DECILE, 1e-6, 0.5)?;
    let scale = cfg.f64_in("agendalex.prior_scale", DEFAULT_PRIOR_SCALE, 1e-9, f64::MAX)?;
    let top_n = cfg.usize_in("agendalex.top_n", DEFAULT_TOP_N, 1, usize::MAX)?;

    let slices = slice_corpus(corpus.documents(), Granularity::Month);
    let (first, last) = match (slices.first(), slices.last()) {
        (Some(a), Some(b)) => (a.period, b.period),
        _ => bail!("corpus has no dated documents"),
    };
    let window = indicator.window(first, last);
    let partition = partition_months(&window, decile).context("partitioning indicator months")?;
    let assignments: HashMap<String, FrameAssignment> =
        corpus.iter().map(|d| (d.id.clone(), assigner.assign(d))).collect();
    let prior = informative_prior(corpus.iter(), scale);

    let mut rows = Vec::new();
    for frame in assigner.frames() {
        match build_agendalex(frame, &corpus, &assignments, &partition, |d| focus.matches(d), &prior, top_n) {
            Ok(lex) => {
                run.write(&format!("agendalex/{}.tsv", slug(frame)), &lexicon_tsv(&lex)?)?;
                let words: BTreeSet<String> = lex.words().map(String::from).collect();
                let r = lexicon_frequency_series(&words, &slices, &corpus, |d| focus.matches(d))
                    .and_then(|s| align(&s, &window))
                    .and_then(|(s, w)| pearson(&s, &w));
                let (r, status) = match r {
                    Ok(r) => (num(r), "ok".to_string()),
                    Err(e) => (String::new(), e.to_string()),
                };
                rows.push(vec![frame.clone(), lex.len().to_string(), r, status]);
            }
            Err(e @ (Error::EmptyPool { .. } | Error::EmptyEvent { .. })) => {
                log::warn!("{frame}: {e}");
                rows.push(vec![frame.clone(), "0".into(), String::new(), e.to_string()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let months = |s: &BTreeSet<framelex::period::Period>| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let part_rows = vec![
        vec!["up".to_string(), months(&partition.up_months)],
        vec!["down".to_string(), months(&partition.down_months)],
        vec!["after_up".to_string(), months(&partition.after_up)],
        vec!["after_down".to_string(), months(&partition.after_down)],
    ];
    run.write_csv("agendalex_months.csv", &["set", "months"], part_rows)?;
    run.write_csv("agendalex.csv", &["frame", "size", "pearson_r", "status"], rows)?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- evaluation

struct FoldOutcome {
    test_ids: Vec<String>,
    primary: BTreeMap<String, String>,
    present: BTreeMap<String, BTreeSet<String>>,
    baseline: Option<BTreeMap<String, BTreeSet<String>>>,
}

fn gold_frames(doc: &Document) -> BTreeSet<String> {
    doc.annotated_frames()
        .into_iter()
        .filter(|f| *f != OTHER)
        .map(String::from)
        .collect()
}

/// Regenerates lexicons on each training split and predicts the held-out
/// fold. Folds run on separate threads; results come back in fold order.
fn cross_validate(cfg: &Config, run: &mut Run, with_baseline: bool) -> Result<(Corpus, Vec<FoldOutcome>)> {
    let corpus = load_corpus(cfg, run, "corpus.annotated")?;
    let k = cfg.usize_in("eval.folds", 10, 2, usize::MAX)?;
    let fold_seed = seed(cfg, run, "eval.seed")?;
    let size = cfg.usize_in("induce.size", DEFAULT_BASE_SIZE, 1, usize::MAX)?;
    let expand: bool = cfg.parse_or("eval.expand", false)?;
    let expansion_setup = if expand {
        let exp = expansion(cfg, ExpansionConfig::augment())?;
        exp.validate().map_err(|e| validation("project", e.to_string()))?;
        Some((embedding(cfg, run, corpus.documents())?, exp))
    } else {
        None
    };
    let threshold = cfg.usize_in("framing.threshold", DEFAULT_THRESHOLD, 1, 100_000)?;
    let mode = count_mode(cfg)?;
    let frames: Vec<String> = inventory(cfg)?.lexical_frames().map(String::from).collect();

    let ids: Vec<String> = corpus.iter().map(|d| d.id.clone()).collect();
    if ids.len() < k {
        return Err(validation("eval.folds", format!("{k} folds for {} documents", ids.len())));
    }
    let split = kfold_split(&ids, k, fold_seed)?;
    let outcomes: Vec<Result<FoldOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..k)
            .map(|fold| {
                let split = &split;
                let corpus = &corpus;
                let frames = &frames;
                let expansion_setup = &expansion_setup;
                scope.spawn(move || -> Result<FoldOutcome> {
                    let train: Vec<Document> = corpus
                        .iter()
                        .filter(|d| split.assignment[&d.id] != fold)
                        .cloned()
                        .collect();
                    let test: Vec<&Document> = corpus.iter().filter(|d| split.assignment[&d.id] == fold).collect();
                    let df = DocFrequencyTable::from_documents(train.iter());
                    let mut lexicons = Vec::new();
                    for frame in frames {
                        let base = match induce_base_lexicon(&train, frame, size) {
                            Ok(l) => l,
                            Err(Error::EmptyFrame { .. } | Error::EmptyLexicon { .. }) => continue,
                            Err(e) => return Err(e.into()),
                        };
                        let lex = match expansion_setup {
                            Some((space, exp)) => match expand_lexicon(&base, space, exp) {
                                Ok(l) => l.filter_doc_frequency(&df).with_provenance(Provenance::Final),
                                Err(Error::NoLexiconWordInVocab { .. }) => base,
                                Err(e) => return Err(e.into()),
                            },
                            None => base,
                        };
                        if !lex.is_empty() {
                            lexicons.push(lex);
                        }
                    }
                    if lexicons.is_empty() {
                        bail!("fold {fold}: no frame lexicon could be induced from the training split");
                    }
                    let assigner = FrameAssigner::new(&lexicons, threshold, mode)?;
                    let mut primary = BTreeMap::new();
                    let mut present = BTreeMap::new();
                    for doc in &test {
                        let a = assigner.assign(doc);
                        primary.insert(doc.id.clone(), a.primary);
                        present.insert(doc.id.clone(), a.present);
                    }
                    let baseline = with_baseline.then(|| {
                        let labelled: Vec<(&Document, BTreeSet<String>)> =
                            train.iter().map(|d| (d, gold_frames(d))).collect();
                        baseline_logreg(&labelled, &test, &LogRegConfig::default())
                    });
                    Ok(FoldOutcome {
                        test_ids: test.iter().map(|d| d.id.clone()).collect(),
                        primary,
                        present,
                        baseline,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("fold thread panicked")).collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((corpus, outcomes))
}

fn eval_primary(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("eval-primary", cfg.output_dir()?)?;
    let (corpus, outcomes) = cross_validate(cfg, &mut run, false)?;
    let gold: BTreeMap<String, String> = corpus
        .iter()
        .filter_map(|d| d.primary_frame.clone().map(|f| (d.id.clone(), f)))
        .collect();
    if gold.is_empty() {
        return Err(validation("corpus.annotated", "no document carries a primary_frame label"));
    }
    if gold.len() < corpus.len() {
        log::warn!("{} documents lack a primary_frame label and are not scored", corpus.len() - gold.len());
    }
    let mut rows = Vec::new();
    let mut all_pred = BTreeMap::new();
    for (fold, o) in outcomes.iter().enumerate() {
        let pred: BTreeMap<String, String> = o
            .test_ids
            .iter()
            .filter(|id| gold.contains_key(*id))
            .map(|id| (id.clone(), o.primary[id].clone()))
            .collect();
        let fold_gold: BTreeMap<String, String> = pred.keys().map(|id| (id.clone(), gold[id].clone())).collect();
        let acc = if pred.is_empty() {
            String::new()
        } else {
            num(eval_primary_accuracy(&pred, &fold_gold)?)
        };
        rows.push(vec![fold.to_string(), pred.len().to_string(), acc]);
        all_pred.extend(pred);
    }
    let overall = eval_primary_accuracy(&all_pred, &gold)?;
    rows.push(vec!["all".into(), all_pred.len().to_string(), num(overall)]);
    run.write_csv("eval_primary.csv", &["fold", "documents", "accuracy"], rows)?;
    run.finish(cfg)
}

fn eval_frames(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("eval-frames", cfg.output_dir()?)?;
    let with_baseline: bool = cfg.parse_or("eval.baseline", true)?;
    let (corpus, outcomes) = cross_validate(cfg, &mut run, with_baseline)?;
    let gold: BTreeMap<String, BTreeSet<String>> = corpus.iter().map(|d| (d.id.clone(), gold_frames(d))).collect();
    let mut methods: Vec<(&str, BTreeMap<String, BTreeSet<String>>)> = vec![(
        "lexicon",
        outcomes.iter().flat_map(|o| o.present.clone()).collect(),
    )];
    if with_baseline {
        methods.push((
            "logreg",
            outcomes
                .iter()
                .flat_map(|o| o.baseline.clone().expect("baseline requested"))
                .collect(),
        ));
    }
    let mut rows = Vec::new();
    for (method, pred) in methods {
        for (frame, s) in eval_all_frames_f1(&pred, &gold)? {
            rows.push(vec![
                frame,
                method.to_string(),
                num(s.precision),
                num(s.recall),
                num(s.f1),
                s.support.to_string(),
            ]);
        }
    }
    run.write_csv("eval_frames.csv", &["frame", "method", "precision", "recall", "f1", "support"], rows)?;
    run.finish(cfg)
}

// ---------------------------------------------------------------- intruders

fn intruder_gen(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("intruder-gen", cfg.output_dir()?)?;
    let lexicons = load_lexicons(cfg, &mut run)?;
    let per_frame = cfg.usize_in("intruder.sets_per_frame", 15, 1, 100_000)?;
    let s = seed(cfg, &mut run, "intruder.seed")?;
    let sets = intruder_generate(&lexicons, per_frame, s)?;
    let mut key = Vec::new();
    IntruderSet::write_key(&sets, &mut key)?;
    run.write("intruder_key.tsv", &key)?;
    let mut tasks = Vec::new();
    IntruderSet::write_tasks(&sets, &mut tasks)?;
    run.write("intruder_tasks.tsv", &tasks)?;
    run.finish(cfg)
}

fn intruder_scores(cfg: &Config) -> Result<PathBuf> {
    let mut run = Run::new("intruder-score", cfg.output_dir()?)?;
    let default_key = run.out_dir().join("intruder_key.tsv");
    let key_path = cfg.input_path_or("intruder.key", &default_key)?;
    run.input(&key_path)?;
    let sets = IntruderSet::read_key(BufReader::new(File::open(&key_path)?))?;
    let resp_path = cfg.input_path("intruder.responses")?;
    run.input(&resp_path)?;
    let responses = read_responses(BufReader::new(File::open(&resp_path)?))?;
    let rows = intruder_score(&sets, &responses)?
        .into_iter()
        .map(|(frame, s)| vec![frame, format!("{:.1}", s.hard), format!("{:.1}", s.soft), format!("{:.1}", s.avg), s.sets.to_string()])
        .collect();
    run.write_csv("intruder_scores.csv", &["frame", "hard", "soft", "avg", "sets"], rows)?;
    run.finish(cfg)
}
