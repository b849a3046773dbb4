//! Synthetic corpus generation and corpus-fidelity analytics.
//!
//! The crate covers the full pipeline: expanding a demographic prompt grid
//! into generation jobs, running them against a completion endpoint (or a
//! deterministic mock), and then comparing corpora with lexicon log-odds,
//! LDA topic prevalence, embedding-based topic similarity and Fleiss' kappa.

pub mod agreement;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod fightin;
pub mod lexicon;
pub mod semsim;
pub mod synthgen;
pub(crate) mod rng;
pub mod topicmodel;

pub use error::{Error, Result};
