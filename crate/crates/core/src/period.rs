use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Year,
    Quarter,
    Month,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Year => "year",
            Granularity::Quarter => "quarter",
            Granularity::Month => "month",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "year" | "yearly" => Ok(Granularity::Year),
            "quarter" | "quarterly" => Ok(Granularity::Quarter),
            "month" | "monthly" => Ok(Granularity::Month),
            other => Err(Error::invalid(format!("unknown granularity {other:?}"))),
        }
    }
}

/// A calendar period at one of three granularities.
///
/// Periods of the same granularity are totally ordered and have a unique
/// successor, which is what makes gap-free series possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Period {
    Year(i32),
    /// Quarter in `1..=4`.
    Quarter(i32, u8),
    /// Month in `1..=12`.
    Month(i32, u8),
}

impl Period {
    pub fn of(date: NaiveDate, granularity: Granularity) -> Self {
        let year = date.year();
        let month = date.month() as u8;
        match granularity {
            Granularity::Year => Period::Year(year),
            Granularity::Quarter => Period::Quarter(year, (month - 1) / 3 + 1),
            Granularity::Month => Period::Month(year, month),
        }
    }

    pub fn granularity(&self) -> Granularity {
        match self {
            Period::Year(_) => Granularity::Year,
            Period::Quarter(..) => Granularity::Quarter,
            Period::Month(..) => Granularity::Month,
        }
    }

    pub fn year(&self) -> i32 {
        match *self {
            Period::Year(y) | Period::Quarter(y, _) | Period::Month(y, _) => y,
        }
    }

    pub fn succ(&self) -> Self {
        match *self {
            Period::Year(y) => Period::Year(y + 1),
            Period::Quarter(y, 4) => Period::Quarter(y + 1, 1),
            Period::Quarter(y, q) => Period::Quarter(y, q + 1),
            Period::Month(y, 12) => Period::Month(y + 1, 1),
            Period::Month(y, m) => Period::Month(y, m + 1),
        }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        Period::of(date, self.granularity()) == *self
    }

    /// Every period from `first` to `last` inclusive.
    pub fn range(first: Period, last: Period) -> Vec<Period> {
        debug_assert_eq!(first.granularity(), last.granularity());
        let mut out = Vec::new();
        let mut p = first;
        while p <= last {
            out.push(p);
            p = p.succ();
        }
        out
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Year(y) => write!(f, "{y:04}"),
            Period::Quarter(y, q) => write!(f, "{y:04}-Q{q}"),
            Period::Month(y, m) => write!(f, "{y:04}-{m:02}"),
        }
    }
}

impl FromStr for Period {
    type Err = Error;

    /// Accepts `YYYY`, `YYYY-Qn` and `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::parse(format!("period {s:?}"), "expected YYYY, YYYY-Qn or YYYY-MM");
        let s = s.trim();
        let (year, rest) = match s.split_once('-') {
            Some((y, r)) => (y, Some(r)),
            None => (s, None),
        };
        if year.len() != 4 {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        match rest {
            None => Ok(Period::Year(year)),
            Some(r) if r.starts_with(['Q', 'q']) => {
                let q: u8 = r[1..].parse().map_err(|_| bad())?;
                if (1..=4).contains(&q) {
                    Ok(Period::Quarter(year, q))
                } else {
                    Err(bad())
                }
            }
            Some(r) => {
                if r.len() != 2 {
                    return Err(bad());
                }
                let m: u8 = r.parse().map_err(|_| bad())?;
                if (1..=12).contains(&m) {
                    Ok(Period::Month(year, m))
                } else {
                    Err(bad())
                }
            }
        }
    }
}
