//! Unsupervised premise/conclusion segmentation of scientific abstracts.
//!
//! Every abstract is read as a cycle of sentences whose conclusion segment
//! sits at the stitching point (the end, possibly wrapping into the start).
//! That leaves at most six candidate segmentations per abstract
//! ([`cycle::enumerate_candidates`]). A corpus-wide assignment of one
//! candidate per abstract induces a premise space and a conclusion space;
//! the engine greedily picks, abstract by abstract, the candidate maximizing
//! the normalized mutual information between the two spaces
//! ([`greedy::greedycas_base`], [`greedy::greedycas_nn`]).
//!
//! Besides the search itself the crate ships corpus ingestion
//! ([`corpus`]), the information measures ([`nmi`]), four unsupervised
//! baselines ([`baselines`]) and segmentation metrics plus significance
//! tests ([`eval`]).

pub mod baselines;
pub mod corpus;
pub mod cycle;
pub mod embeddings;
mod error;
pub mod eval;
pub mod greedy;
pub mod nmi;
pub mod study;
pub mod synthetic;

pub use error::{Error, Result};
