//! Translation-memory cleaning: language-independent features over
//! bilingual translation units, a from-scratch random forest, pluggable
//! machine-translation / part-of-speech / language-identification
//! providers, and evaluation utilities.

pub mod cli;
pub mod eval;
pub mod features;
pub mod forest;
pub mod ingestion;
pub mod metrics;
pub mod model;
pub mod providers;
pub mod seeding;
pub mod text;
