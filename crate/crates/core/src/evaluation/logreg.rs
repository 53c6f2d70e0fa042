use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::corpus::Document;

#[derive(Clone, Debug, PartialEq)]
pub struct LogRegConfig {
    /// L2 penalty on word weights (the intercept is not penalised).
    pub l2: f64,
    /// Stop when every gradient component is below this.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Probability at or above which a frame is predicted present.
    pub threshold: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2: 1e-3,
            tolerance: 1e-4,
            max_iter: 2000,
            threshold: 0.5,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

struct Binary {
    weights: Vec<f64>,
    bias: f64,
}

impl Binary {
    fn score(&self, features: &[usize]) -> f64 {
        sigmoid(self.bias + features.iter().map(|&f| self.weights[f]).sum::<f64>())
    }
}

/// Full-batch gradient descent on the L2-regularised log loss with step
/// `1/L`, where `L` bounds the Hessian's largest eigenvalue.
fn fit_binary(rows: &[Vec<usize>], labels: &[bool], n_features: usize, cfg: &LogRegConfig) -> Binary {
    let n = rows.len() as f64;
    let avg_sq_norm = rows.iter().map(|r| r.len() as f64 + 1.0).sum::<f64>() / n;
    let step = 1.0 / (0.25 * avg_sq_norm + cfg.l2);
    let mut model = Binary {
        weights: vec![0.0; n_features],
        bias: 0.0,
    };
    let mut grad = vec![0.0; n_features];
    for _ in 0..cfg.max_iter {
        grad.iter_mut().zip(&model.weights).for_each(|(g, w)| *g = cfg.l2 * w);
        let mut grad_bias = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let err = (model.score(row) - f64::from(u8::from(y))) / n;
            grad_bias += err;
            for &f in row {
                grad[f] += err;
            }
        }
        let max_grad = grad.iter().fold(grad_bias.abs(), |m, g| m.max(g.abs()));
        if max_grad < cfg.tolerance {
            break;
        }
        model.bias -= step * grad_bias;
        model.weights.iter_mut().zip(&grad).for_each(|(w, g)| *w -= step * g);
    }
    model
}

/// One-vs-rest logistic regression over binary bag-of-words features.
///
/// Frames come from the training labels. A frame whose training labels are
/// all positive or all negative is predicted constantly.
pub fn baseline_logreg(
    train: &[(&Document, BTreeSet<String>)],
    test: &[&Document],
    cfg: &LogRegConfig,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut vocab: HashMap<&str, usize> = HashMap::new();
    let mut rows = Vec::with_capacity(train.len());
    for (doc, _) in train {
        let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        let row: Vec<usize> = distinct
            .into_iter()
            .map(|w| {
                let next = vocab.len();
                *vocab.entry(w).or_insert(next)
            })
            .collect();
        rows.push(row);
    }
    let test_rows: Vec<Vec<usize>> = test
        .iter()
        .map(|doc| {
            let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
            distinct.into_iter().filter_map(|w| vocab.get(w).copied()).collect()
        })
        .collect();

    let frames: BTreeSet<&String> = train.iter().flat_map(|(_, f)| f).collect();
    let mut out: BTreeMap<String, BTreeSet<String>> =
        test.iter().map(|d| (d.id.clone(), BTreeSet::new())).collect();
    for frame in frames {
        let labels: Vec<bool> = train.iter().map(|(_, f)| f.contains(frame)).collect();
        let positives = labels.iter().filter(|&&y| y).count();
        let predict: Box<dyn Fn(&[usize]) -> bool> = if positives == labels.len() || positives == 0 {
            log::warn!("frame {frame:?} has single-class training labels; predicting it constantly");
            let constant = positives > 0;
            Box::new(move |_| constant)
        } else {
            let model = fit_binary(&rows, &labels, vocab.len(), cfg);
            let threshold = cfg.threshold;
            Box::new(move |row| model.score(row) >= threshold)
        };
        for (doc, row) in test.iter().zip(&test_rows) {
            if predict(row) {
                out.get_mut(&doc.id).expect("test id").insert(frame.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn doc(id: &str, text: &str) -> Document {
        let date = NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        Document::new(id, date, text.split(' ').map(String::from).collect(), vec![]).unwrap()
    }

    fn label(frames: &[&str]) -> BTreeSet<String> {
        frames.iter().map(|f| f.to_string()).collect()
    }

    #[test]
    fn constant_frame_predicted_everywhere() {
        let a = doc("a", "x y");
        let b = doc("b", "y z");
        let t = doc("t", "q");
        let train = vec![(&a, label(&["E"])), (&b, label(&["E"]))];
        let out = baseline_logreg(&train, &[&t], &LogRegConfig::default());
        assert!(out["t"].contains("E"));
    }

    #[test]
    fn deterministic() {
        let a = doc("a", "tax money");
        let b = doc("b", "vote law");
        let c = doc("c", "tax law");
        let t = doc("t", "tax");
        let train = vec![(&a, label(&["E"])), (&b, label(&[])), (&c, label(&["E"]))];
        let one = baseline_logreg(&train, &[&t], &LogRegConfig::default());
        let two = baseline_logreg(&train, &[&t], &LogRegConfig::default());
        assert_eq!(one, two);
        assert!(one["t"].contains("E"));
    }

    #[test]
    fn unseen_features_fall_back_to_intercept() {
        // two positives out of three: intercept favours the frame
        let a = doc("a", "p q");
        let b = doc("b", "r s");
        let c = doc("c", "u v");
        let t = doc("t", "never seen");
        let train = vec![(&a, label(&["E"])), (&b, label(&["E"])), (&c, label(&[]))];
        let out = baseline_logreg(&train, &[&t], &LogRegConfig::default());
        assert!(out["t"].contains("E"));
        let train = vec![(&a, label(&["E"])), (&b, label(&[])), (&c, label(&[]))];
        let out = baseline_logreg(&train, &[&t], &LogRegConfig::default());
        assert!(out["t"].is_empty());
    }
}
