//! Agenda-setting and framing analysis for news corpora.
//!
//! The pipeline induces frame lexicons from span-annotated text with PMI,
//! carries them into another language through a bilingual dictionary and
//! embedding query expansion, assigns frames to documents, and relates
//! entity coverage to economic indicators with correlation, Granger
//! regressions and log-odds salience shifts.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod framing;
pub mod lexicon;
pub mod period;
pub mod projection;
pub mod salience;
pub mod timeseries;

pub use error::{Error, Result};
