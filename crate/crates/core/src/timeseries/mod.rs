//! Coverage series, percent change, Pearson correlation and lag
//! regressions for Granger-causality tests.

mod ols;
pub mod student_t;

pub use ols::{ols, OlsFit};

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::corpus::{entity_mention_count, Corpus, MentionCounter, TimeSlice};
use crate::error::{Error, Result};
use crate::period::{Granularity, Period};

/// Gap-free series of finite values at one granularity.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    granularity: Granularity,
    points: Vec<(Period, f64)>,
}

impl TimeSeries {
    pub fn new(granularity: Granularity, points: Vec<(Period, f64)>) -> Result<Self> {
        for (i, (p, v)) in points.iter().enumerate() {
            if p.granularity() != granularity {
                return Err(Error::Alignment(format!(
                    "period {p} is not at {granularity} granularity"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite value at {p}")));
            }
            if i > 0 && points[i - 1].0.succ() != *p {
                return Err(Error::Alignment(format!(
                    "{} is not followed by {p}: series must be ordered and gap-free",
                    points[i - 1].0
                )));
            }
        }
        Ok(TimeSeries { granularity, points })
    }

    /// Convenience constructor for consecutive periods starting at `start`.
    pub fn from_values(start: Period, values: &[f64]) -> Result<Self> {
        let mut p = start;
        let mut points = Vec::with_capacity(values.len());
        for &v in values {
            points.push((p, v));
            p = p.succ();
        }
        TimeSeries::new(start.granularity(), points)
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn points(&self) -> &[(Period, f64)] {
        &self.points
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|&(_, v)| v).collect()
    }

    pub fn periods(&self) -> Vec<Period> {
        self.points.iter().map(|&(p, _)| p).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_period(&self) -> Option<Period> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_period(&self) -> Option<Period> {
        self.points.last().map(|p| p.0)
    }

    pub fn value_at(&self, period: Period) -> Option<f64> {
        self.points.iter().find(|(p, _)| *p == period).map(|&(_, v)| v)
    }

    /// Restriction to `first..=last`.
    pub fn window(&self, first: Period, last: Period) -> TimeSeries {
        TimeSeries {
            granularity: self.granularity,
            points: self
                .points
                .iter()
                .filter(|(p, _)| *p >= first && *p <= last)
                .copied()
                .collect(),
        }
    }

    /// Reads `period,value` CSV with a header line.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, header)) => {
                let header = header?;
                let cols: Vec<&str> = header.split(',').map(str::trim).collect();
                if cols != ["period", "value"] {
                    return Err(Error::parse("line 1", format!("expected header period,value, got {header:?}")));
                }
            }
            None => return Err(Error::parse("line 1", "empty series file")),
        }
        let mut points = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ctx = format!("line {}", i + 1);
            let (p, v) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(&ctx, "expected period,value"))?;
            let period: Period = p.parse()?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::parse(&ctx, format!("bad value {v:?}")))?;
            points.push((period, value));
        }
        let granularity = points
            .first()
            .map(|(p, _)| p.granularity())
            .ok_or_else(|| Error::parse("series file", "no data rows"))?;
        TimeSeries::new(granularity, points)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "period,value")?;
        for (p, v) in &self.points {
            writeln!(out, "{p},{v}")?;
        }
        Ok(())
    }
}

/// Trims two series to their common period range. Mixed granularities are
/// refused rather than resampled.
pub fn align(x: &TimeSeries, y: &TimeSeries) -> Result<(TimeSeries, TimeSeries)> {
    if x.granularity != y.granularity {
        return Err(Error::Alignment(format!(
            "cannot mix {} and {} series",
            x.granularity, y.granularity
        )));
    }
    let (Some(xa), Some(xb), Some(ya), Some(yb)) =
        (x.first_period(), x.last_period(), y.first_period(), y.last_period())
    else {
        return Err(Error::Alignment("empty series".into()));
    };
    let (first, last) = (xa.max(ya), xb.min(yb));
    if first > last {
        return Err(Error::Alignment("series do not overlap".into()));
    }
    Ok((x.window(first, last), y.window(first, last)))
}

fn check_same_periods(x: &TimeSeries, y: &TimeSeries) -> Result<()> {
    if x.granularity != y.granularity || x.len() != y.len() || x.first_period() != y.first_period() {
        return Err(Error::Alignment(format!(
            "series cover different periods ({:?}..{:?} vs {:?}..{:?})",
            x.first_period(),
            x.last_period(),
            y.first_period(),
            y.last_period()
        )));
    }
    Ok(())
}

fn series_from_slices<F>(slices: &[TimeSlice], mut value: F) -> Result<TimeSeries>
where
    F: FnMut(&TimeSlice) -> f64,
{
    let granularity = slices.first().map_or(Granularity::Month, |s| s.period.granularity());
    let points = slices.iter().map(|s| (s.period, value(s))).collect();
    TimeSeries::new(granularity, points)
}

/// Share of articles per slice mentioning the entity at least
/// `min_mentions` times.
pub fn article_coverage(
    slices: &[TimeSlice],
    corpus: &Corpus,
    counter: &dyn MentionCounter,
    min_mentions: usize,
) -> Result<TimeSeries> {
    series_from_slices(slices, |slice| {
        let docs: Vec<_> = corpus.slice_documents(slice).collect();
        if docs.is_empty() {
            log::warn!("slice {} has no documents; coverage set to 0", slice.period);
            return 0.0;
        }
        let hits = docs
            .iter()
            .filter(|d| entity_mention_count(d, counter) >= min_mentions)
            .count();
        hits as f64 / docs.len() as f64
    })
}

/// Entity mentions per token in each slice.
pub fn word_coverage(slices: &[TimeSlice], corpus: &Corpus, counter: &dyn MentionCounter) -> Result<TimeSeries> {
    series_from_slices(slices, |slice| {
        let (mut mentions, mut tokens) = (0usize, 0usize);
        for d in corpus.slice_documents(slice) {
            mentions += entity_mention_count(d, counter);
            tokens += d.tokens.len();
        }
        if tokens == 0 {
            log::warn!("slice {} has no tokens; coverage set to 0", slice.period);
            return 0.0;
        }
        mentions as f64 / tokens as f64
    })
}

/// `x_t / x_{t-1} - 1`, labelled by period `t`.
pub fn percent_change(s: &TimeSeries) -> Result<TimeSeries> {
    let pts = &s.points;
    let mut out = Vec::with_capacity(pts.len().saturating_sub(1));
    for i in 1..pts.len() {
        let prev = pts[i - 1].1;
        if prev == 0.0 {
            return Err(Error::ZeroDivisor { index: i - 1 });
        }
        out.push((pts[i].0, pts[i].1 / prev - 1.0));
    }
    Ok(TimeSeries {
        granularity: s.granularity,
        points: out,
    })
}

/// Sample Pearson correlation of two series over identical periods.
pub fn pearson(x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
    check_same_periods(x, y)?;
    if x.len() < 3 {
        return Err(Error::TooShort(format!("{} points, need at least 3", x.len())));
    }
    pearson_values(&x.values(), &y.values())
}

pub(crate) fn pearson_values(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Intercept,
    /// Lag of the target series.
    Own,
    /// Lag of the predictor series.
    Predictor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coefficient {
    pub term: Term,
    /// 0 for the intercept.
    pub lag: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

impl Coefficient {
    /// `const`, `alpha_i` or `beta_j`.
    pub fn name(&self) -> String {
        match self.term {
            Term::Intercept => "const".into(),
            Term::Own => format!("alpha_{}", self.lag),
            Term::Predictor => format!("beta_{}", self.lag),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrangerResult {
    pub own_lags: usize,
    pub predictor_lags: usize,
    pub coefficients: Vec<Coefficient>,
    pub residual_variance: f64,
    pub n_obs: usize,
    pub degenerate: bool,
}

impl GrangerResult {
    pub fn alpha(&self, lag: usize) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == Term::Own && c.lag == lag)
    }

    pub fn beta(&self, lag: usize) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == Term::Predictor && c.lag == lag)
    }

    pub fn intercept(&self) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.term == Term::Intercept)
    }
}

/// Lag design of `target_t` on `own_lags` lags of the target and
/// `predictor_lags` lags of the predictor, as (X, y).
pub fn lag_design(
    target: &[f64],
    predictor: &[f64],
    own_lags: usize,
    predictor_lags: usize,
    intercept: bool,
) -> (DMatrix<f64>, DVector<f64>) {
    let p = own_lags.max(predictor_lags);
    let n_obs = target.len().saturating_sub(p);
    let k = own_lags + predictor_lags + usize::from(intercept);
    let mut x = DMatrix::zeros(n_obs, k);
    let mut y = DVector::zeros(n_obs);
    for row in 0..n_obs {
        let t = row + p;
        y[row] = target[t];
        let mut col = 0;
        if intercept {
            x[(row, col)] = 1.0;
            col += 1;
        }
        for i in 1..=own_lags {
            x[(row, col)] = target[t - i];
            col += 1;
        }
        for j in 1..=predictor_lags {
            x[(row, col)] = predictor[t - j];
            col += 1;
        }
    }
    (x, y)
}

/// Regresses `target_t` on its own lags and the predictor's lags by OLS.
/// The predictor Granger-causes the target when a `beta` coefficient is
/// significant. Callers pass already-differenced (percent-change) series;
/// swap the arguments for the reverse direction.
pub fn granger_test(
    target: &TimeSeries,
    predictor: &TimeSeries,
    own_lags: usize,
    predictor_lags: usize,
    intercept: bool,
) -> Result<GrangerResult> {
    check_same_periods(target, predictor)?;
    let k = own_lags + predictor_lags + usize::from(intercept);
    if k == 0 {
        return Err(Error::invalid("model has no parameters"));
    }
    let p = own_lags.max(predictor_lags);
    let needed = p + k + 2;
    if target.len() < needed {
        return Err(Error::TooShort(format!(
            "{} points, need at least {needed} for {own_lags}/{predictor_lags} lags",
            target.len()
        )));
    }
    let (x, y) = lag_design(&target.values(), &predictor.values(), own_lags, predictor_lags, intercept);
    let fit = ols(&x, &y)?;
    let mut terms = Vec::with_capacity(k);
    if intercept {
        terms.push((Term::Intercept, 0));
    }
    terms.extend((1..=own_lags).map(|i| (Term::Own, i)));
    terms.extend((1..=predictor_lags).map(|j| (Term::Predictor, j)));
    let coefficients = terms
        .into_iter()
        .enumerate()
        .map(|(i, (term, lag))| Coefficient {
            term,
            lag,
            estimate: fit.coefficients[i],
            std_error: fit.std_errors[i],
            t_stat: fit.t_stats[i],
            p_value: fit.p_values[i],
        })
        .collect();
    Ok(GrangerResult {
        own_lags,
        predictor_lags,
        coefficients,
        residual_variance: fit.residual_variance,
        n_obs: y.len(),
        degenerate: fit.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, EntityAliasSet};
    use chrono::NaiveDate;

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(Period::Month(2003, 1), values).unwrap()
    }

    #[test]
    fn percent_change_examples() {
        let out = percent_change(&series(&[100.0, 110.0, 99.0])).unwrap().values();
        assert!((out[0] - 0.10).abs() < 1e-12 && (out[1] + 0.10).abs() < 1e-12);
        assert_eq!(percent_change(&series(&[5.0, 5.0, 5.0])).unwrap().values(), [0.0, 0.0]);
        assert!(matches!(
            percent_change(&series(&[2.0, 0.0, 3.0])),
            Err(Error::ZeroDivisor { index: 1 })
        ));
        // trailing zero is allowed
        assert_eq!(percent_change(&series(&[2.0, 0.0])).unwrap().values(), [-1.0]);
    }

    #[test]
    fn percent_change_labels_by_later_period() {
        let out = percent_change(&series(&[1.0, 2.0])).unwrap();
        assert_eq!(out.first_period(), Some(Period::Month(2003, 2)));
    }

    #[test]
    fn pearson_examples() {
        let x = series(&[1.0, 2.0, 3.0]);
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &series(&[2.0, 1.0, 3.0])).unwrap() - 0.5).abs() < 1e-12);
        assert!((pearson(&x, &series(&[6.0, 5.0, 4.0])).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        let x = series(&[1.0, 2.0, 3.0]);
        let shifted = TimeSeries::from_values(Period::Month(2003, 2), &[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(pearson(&x, &shifted), Err(Error::Alignment(_))));
        assert!(matches!(pearson(&x, &series(&[1.0, 1.0, 1.0])), Err(Error::ZeroVariance)));
        assert!(pearson(&series(&[1.0, 2.0]), &series(&[2.0, 1.0])).is_err());
    }

    #[test]
    fn series_must_be_gap_free() {
        let pts = vec![(Period::Month(2003, 1), 1.0), (Period::Month(2003, 3), 1.0)];
        assert!(TimeSeries::new(Granularity::Month, pts).is_err());
        let mixed = vec![(Period::Month(2003, 1), 1.0), (Period::Quarter(2003, 1), 1.0)];
        assert!(TimeSeries::new(Granularity::Month, mixed).is_err());
    }

    #[test]
    fn align_trims_and_refuses_mixed_granularity() {
        let a = series(&[1.0, 2.0, 3.0, 4.0]);
        let b = TimeSeries::from_values(Period::Month(2003, 3), &[9.0, 8.0, 7.0]).unwrap();
        let (a2, b2) = align(&a, &b).unwrap();
        assert_eq!(a2.values(), [3.0, 4.0]);
        assert_eq!(b2.values(), [9.0, 8.0]);
        let q = TimeSeries::from_values(Period::Quarter(2003, 1), &[1.0]).unwrap();
        assert!(align(&a, &q).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let s = TimeSeries::from_values(Period::Quarter(2010, 3), &[1.5, -2.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(TimeSeries::read_csv(buf.as_slice()).unwrap(), s);
        assert!(TimeSeries::read_csv("date,value\n2003,1\n".as_bytes()).is_err());
        assert!(TimeSeries::read_csv("period,value\n2003-01,x\n".as_bytes()).is_err());
    }

    fn corpus() -> (Corpus, Vec<TimeSlice>) {
        let mk = |id: &str, m: u32, words: &str| {
            let date = NaiveDate::from_ymd_opt(2003, m, 1).unwrap();
            Document::new(id, date, words.split(' ').map(String::from).collect(), vec![]).unwrap()
        };
        let docs = vec![
            mk("a", 1, "usa usa x x x"),
            mk("b", 1, "usa usa usa x x"),
            mk("c", 1, "x x x x x"),
            mk("d", 3, "x x x x x"),
        ];
        let slices = crate::corpus::slice_corpus(&docs, Granularity::Month);
        (Corpus::new(docs).unwrap(), slices)
    }

    #[test]
    fn coverage_metrics() {
        let (corpus, slices) = corpus();
        let usa = EntityAliasSet::new("usa", ["usa"]).unwrap();
        let art = article_coverage(&slices, &corpus, &usa, 2).unwrap().values();
        assert!((art[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(art[1], 0.0);
        assert_eq!(art[2], 0.0);
        let all = article_coverage(&slices, &corpus, &usa, 0).unwrap().values();
        assert_eq!(all, [1.0, 0.0, 1.0]);
        let words = word_coverage(&slices, &corpus, &usa).unwrap().values();
        assert!((words[0] - 5.0 / 15.0).abs() < 1e-12);
        assert_eq!(words[2], 0.0);
    }

    #[test]
    fn granger_length_precondition() {
        let s = series(&[0.1, 0.2]);
        assert!(matches!(granger_test(&s, &s, 1, 1, true), Err(Error::TooShort(_))));
    }

    #[test]
    fn granger_collinear_predictor() {
        let v: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64 * 0.01 + 0.001 * i as f64).collect();
        let s = series(&v);
        assert!(matches!(granger_test(&s, &s, 1, 1, false), Err(Error::CollinearLags)));
    }

    #[test]
    fn granger_without_predictor_lags_is_autoregression() {
        let v: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).sin()).collect();
        let s = series(&v);
        let r = granger_test(&s, &s, 2, 0, true).unwrap();
        assert!(r.beta(1).is_none());
        assert_eq!(r.coefficients.len(), 3);
        assert_eq!(r.n_obs, 38);
        assert_eq!(r.alpha(2).unwrap().name(), "alpha_2");
    }

    #[test]
    fn granger_misaligned_rejected() {
        let a = series(&[0.1; 20]);
        let b = TimeSeries::from_values(Period::Month(2004, 1), &[0.1; 20]).unwrap();
        assert!(matches!(granger_test(&a, &b, 1, 1, true), Err(Error::Alignment(_))));
    }
}
