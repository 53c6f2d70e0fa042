//! End-to-end behaviour of the `framelex` binary.

mod support;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::Value;
use support::*;

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    write(&path, body);
    path.display().to_string()
}

#[test]
fn unknown_command_is_a_usage_error() {
    let o = framelex(&["foo"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_required_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[general]\noutput_dir = \"out\"\n");
    let o = framelex(&["induce", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("corpus.annotated"));
}

#[test]
fn out_of_range_override_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("lex/economic.tsv"), "# frame=Economic provenance=base\ntax\t1.0\n");
    write(&dir.path().join("docs.jsonl"), "{\"id\":\"d1\",\"date\":\"2012-03-01\",\"text\":\"tax\"}\n");
    let cfg = config(dir.path(), "[corpus]\npath = \"docs.jsonl\"\n\n[lexicons]\ndir = \"lex\"\n");
    let o = framelex(&["assign", "--config", &cfg, "--framing.threshold=0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("framing.threshold"));
}

#[test]
fn assign_three_token_economic_document() {
    let dir = tempfile::tempdir().unwrap();
    write(
        &dir.path().join("lex/economic.tsv"),
        "# frame=Economic provenance=final\ntax\t2.1\nbudget\t1.7\nwage\t1.2\n",
    );
    write(
        &dir.path().join("lex/political.tsv"),
        "# frame=Political provenance=final\nvote\t2.0\nparty\t1.5\n",
    );
    write(
        &dir.path().join("docs.jsonl"),
        "{\"id\":\"d1\",\"date\":\"2012-03-01\",\"text\":\"Tax, budget and wage talks\"}\n",
    );
    let cfg = config(dir.path(), "[corpus]\npath = \"docs.jsonl\"\n\n[lexicons]\ndir = \"lex\"\n");
    let o = framelex(&["assign", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("out/assignments.jsonl")).unwrap();
    let record: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(record["doc_id"], "d1");
    assert_eq!(record["primary"], "Economic");
    assert_eq!(record["counts"]["Economic"], 3);
    assert!(dir.path().join("out/manifest.assign.json").exists());
}

#[test]
fn granger_recovers_planted_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let returns = Normal::new(0.0, 0.1).unwrap();
    let predictor: Vec<f64> = (0..168).map(|_| returns.sample(&mut rng)).collect();
    let mut target = vec![0.0; 168];
    for t in 1..168 {
        target[t] = 0.5 * target[t - 1] - 0.35 * predictor[t - 1] + noise.sample(&mut rng);
    }
    let csv = |values: &[f64]| {
        let mut s = String::from("period,value\n");
        for (i, v) in values.iter().enumerate() {
            s.push_str(&format!("{}-{:02},{v}\n", 2003 + i / 12, 1 + i % 12));
        }
        s
    };
    write(&dir.path().join("target.csv"), &csv(&target));
    write(&dir.path().join("indicator.csv"), &csv(&predictor));
    let cfg = config(
        dir.path(),
        "[indicator]\npath = \"indicator.csv\"\n\n[granger]\ntarget = \"target.csv\"\ntransform = \"none\"\n",
    );
    let o = framelex(&["granger", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let mut reader = csv::Reader::from_path(dir.path().join("out/granger.csv")).unwrap();
    let row = reader
        .records()
        .map(Result::unwrap)
        .find(|r| &r[0] == "target" && &r[1] == "indicator" && &r[4] == "beta_1")
        .expect("beta_1 row");
    let estimate: f64 = row[5].parse().unwrap();
    let p: f64 = row[8].parse().unwrap();
    assert!((estimate + 0.35).abs() < 0.1, "{estimate}");
    assert!(p < 0.05);
    assert_eq!(&row[3], "167");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let news = newsroom(dir.path(), 8, 2);
    let cfg = config(
        dir.path(),
        &format!(
            "[corpus]\nannotated = {:?}\npath = {:?}\n\n[induce]\nsize = 20\n",
            news.corpus.display().to_string(),
            news.corpus.display().to_string(),
        ),
    );
    let read = || std::fs::read(dir.path().join("out/induce.csv")).unwrap();
    assert!(framelex(&["induce", "--config", &cfg]).status.success());
    let first = read();
    assert!(framelex(&["induce", "--config", &cfg]).status.success());
    assert_eq!(first, read());
}
