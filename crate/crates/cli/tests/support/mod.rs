//! Fixture generators shared by the CLI test targets.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn framelex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framelex"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("run framelex")
}

pub fn write(path: &Path, text: &str) {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

/// Appends tokens to `text`, separated by spaces, returning the char range
/// they occupy.
fn push_tokens(text: &mut String, tokens: &[String]) -> (usize, usize) {
    if !text.is_empty() {
        text.push(' ');
    }
    let start = text.chars().count();
    text.push_str(&tokens.join(" "));
    (start, text.chars().count())
}

pub const BILINGUAL_FRAMES: [&str; 3] = ["Economic", "Political", "Morality"];
pub const PLANTED: usize = 30;
pub const ASSOCIATES: usize = 10;

/// Two synthetic languages sharing three planted frame vocabularies.
///
/// Source documents carry annotated frame segments built from the frame's
/// planted words. Target documents carry unannotated segments of the
/// translated planted words plus a few per-frame associate words. The
/// dictionary translates only part of each planted vocabulary, so the rest
/// must come back through embedding expansion. Function words occur in
/// every document and generic words are spread thinly, so both fall
/// outside the document-frequency band.
pub struct Bilingual {
    pub source: PathBuf,
    pub target: PathBuf,
    pub dictionary: PathBuf,
}

pub fn planted_target(frame: usize) -> BTreeSet<String> {
    (0..PLANTED).map(|i| format!("t{frame}p{i:02}")).collect()
}

pub fn associate_target(frame: usize) -> BTreeSet<String> {
    (0..ASSOCIATES).map(|i| format!("t{frame}a{i:02}")).collect()
}

pub struct BilingualParams {
    pub docs: usize,
    pub generic_vocab: usize,
    pub generic_per_doc: usize,
    pub segment_len: usize,
    pub dictionary_coverage: f64,
    pub seed: u64,
}

impl Default for BilingualParams {
    fn default() -> Self {
        BilingualParams {
            docs: 2000,
            generic_vocab: 4000,
            generic_per_doc: 12,
            segment_len: 14,
            dictionary_coverage: 0.6,
            seed: 42,
        }
    }
}

fn language_docs(
    lang: char,
    p: &BilingualParams,
    rng: &mut ChaCha8Rng,
    annotate: bool,
) -> String {
    let function: Vec<String> = (0..8).map(|i| format!("{lang}fw{i}")).collect();
    let mut out = String::new();
    for d in 0..p.docs {
        let frame = rng.random_range(0..4usize);
        let mut text = String::new();
        let mut generic: Vec<String> = function.clone();
        for _ in 0..p.generic_per_doc {
            generic.push(format!("{lang}g{:04}", rng.random_range(0..p.generic_vocab)));
        }
        shuffle(&mut generic, rng);
        let half = generic.len() / 2;
        push_tokens(&mut text, &generic[..half]);
        let mut annotations = Vec::new();
        if frame < 3 {
            let mut segment = Vec::with_capacity(p.segment_len);
            for _ in 0..p.segment_len {
                let r: f64 = rng.random();
                let w = if r < 0.12 {
                    function.choose(rng).unwrap().clone()
                } else if lang == 't' && r < 0.27 {
                    format!("t{frame}a{:02}", rng.random_range(0..ASSOCIATES))
                } else {
                    format!("{lang}{frame}p{:02}", rng.random_range(0..PLANTED))
                };
                segment.push(w);
            }
            let (start, end) = push_tokens(&mut text, &segment);
            if annotate {
                annotations.push(json!({
                    "frame": BILINGUAL_FRAMES[frame],
                    "start_char": start,
                    "end_char": end,
                    "annotator": 1 + d % 2,
                }));
            }
        }
        push_tokens(&mut text, &generic[half..]);
        let record = json!({
            "id": format!("{lang}{d:05}"),
            "date": format!("{}-{:02}-15", 2003 + d % 14, 1 + d % 12),
            "text": text,
            "annotations": annotations,
            "lang": if lang == 's' { "en" } else { "ru" },
        });
        writeln!(out, "{record}").unwrap();
    }
    out
}

fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        v.swap(i, rng.random_range(0..=i));
    }
}

pub fn bilingual(dir: &Path, p: &BilingualParams) -> Bilingual {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let source = language_docs('s', p, &mut rng, true);
    let target = language_docs('t', p, &mut rng, false);
    let mut dict = String::new();
    for f in 0..3 {
        for i in 0..PLANTED {
            if rng.random_bool(p.dictionary_coverage) {
                writeln!(dict, "s{f}p{i:02}\tt{f}p{i:02}").unwrap();
            }
        }
    }
    for g in 0..p.generic_vocab {
        writeln!(dict, "sg{g:04}\ttg{g:04}").unwrap();
    }
    for i in 0..8 {
        writeln!(dict, "sfw{i}\ttfw{i}").unwrap();
    }
    let b = Bilingual {
        source: dir.join("source.jsonl"),
        target: dir.join("target.jsonl"),
        dictionary: dir.join("dictionary.tsv"),
    };
    write(&b.source, &source);
    write(&b.target, &target);
    write(&b.dictionary, &dict);
    b
}

pub const NEWS_FRAMES: [&str; 3] = ["Economic", "Political", "Morality"];

/// Frame vocabularies of the newsroom corpus: twelve words per frame.
pub fn news_words(frame: usize) -> Vec<&'static str> {
    const WORDS: [[&str; 12]; 3] = [
        ["tax", "budget", "market", "price", "wage", "jobs", "trade", "deficit", "inflation", "bank", "ruble", "export"],
        ["vote", "senate", "party", "election", "campaign", "governor", "lobby", "ballot", "duma", "minister", "kremlin", "summit"],
        ["moral", "faith", "church", "sin", "duty", "conscience", "values", "virtue", "honor", "shame", "tradition", "spirit"],
    ];
    WORDS[frame].to_vec()
}

/// Paths of the newsroom fixture.
pub struct Newsroom {
    pub corpus: PathBuf,
    pub aliases: PathBuf,
    pub indicator: PathBuf,
}

/// A monthly news corpus over 2012-2015: annotated frame segments with a
/// gold primary frame, mentions of one foreign entity, and a monthly
/// indicator series whose level drives how often the entity is covered.
pub fn newsroom(dir: &Path, docs_per_month: usize, seed: u64) -> Newsroom {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let months = 48;
    let mut level = 100.0f64;
    let mut indicator = String::from("period,value\n");
    let mut corpus = String::new();
    let filler: Vec<String> = (0..300).map(|i| format!("w{i:03}")).collect();
    let function = ["the", "of", "and", "to", "in"];
    let mut prev_change = 0.0f64;
    for m in 0..months {
        let (year, month) = (2012 + m / 12, 1 + m % 12);
        let change: f64 = rng.random_range(-0.08..0.08);
        level *= 1.0 + change;
        writeln!(indicator, "{year}-{month:02},{level:.4}").unwrap();
        for d in 0..docs_per_month {
            let mut text = String::new();
            let mut annotations = Vec::new();
            let mut opening: Vec<String> = function.iter().map(|w| w.to_string()).collect();
            opening.extend((0..10).map(|_| filler.choose(&mut rng).unwrap().clone()));
            push_tokens(&mut text, &opening);
            // coverage of the entity rises after the indicator falls
            let mention_prob = (0.35 - 2.0 * prev_change).clamp(0.05, 0.9);
            if rng.random_bool(mention_prob) {
                let alias = ["United States", "USA", "Washington"].choose(&mut rng).unwrap();
                push_tokens(&mut text, &[format!("{alias} and {alias}")]);
            }
            let frames: Vec<usize> = match rng.random_range(0..6) {
                0 => vec![],
                1 => vec![0, 1],
                2 => vec![2, 0],
                k => vec![k % 3],
            };
            for (rank, &f) in frames.iter().enumerate() {
                let n = if rank == 0 { 8 } else { 4 };
                let segment: Vec<String> = (0..n)
                    .map(|_| {
                        if rng.random_bool(0.75) {
                            news_words(f).choose(&mut rng).unwrap().to_string()
                        } else {
                            filler.choose(&mut rng).unwrap().clone()
                        }
                    })
                    .collect();
                let (start, end) = push_tokens(&mut text, &segment);
                annotations.push(json!({
                    "frame": NEWS_FRAMES[f],
                    "start_char": start,
                    "end_char": end,
                    "annotator": format!("a{}", 1 + (d + rank) % 3),
                }));
            }
            let mut closing: Vec<String> = function.iter().map(|w| w.to_string()).collect();
            closing.extend((0..10).map(|_| filler.choose(&mut rng).unwrap().clone()));
            push_tokens(&mut text, &closing);
            let mut record = json!({
                "id": format!("n{m:02}{d:03}"),
                "date": format!("{year}-{month:02}-{:02}", 1 + d % 28),
                "text": text,
                "annotations": annotations,
                "lang": "ru",
            });
            if let Some(&f) = frames.first() {
                record["primary_frame"] = json!(NEWS_FRAMES[f]);
            }
            writeln!(corpus, "{record}").unwrap();
        }
        prev_change = change;
    }
    let n = Newsroom {
        corpus: dir.join("news.jsonl"),
        aliases: dir.join("aliases.toml"),
        indicator: dir.join("indicator.csv"),
    };
    write(&n.corpus, &corpus);
    write(&n.aliases, "usa = [\"United States\", \"USA\", \"Washington\"]\n");
    write(&n.indicator, &indicator);
    n
}
