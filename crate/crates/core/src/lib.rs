//! Explanation-preserving graph augmentation (EPA) and the empirical
//! contrastive learner (ECL) simulator.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: immutable undirected graphs, simple-cycle counting, cycle distance.
//! - [`synth`]: BA trees, house/cycle motifs and the BA-2motifs generators.
//! - [`explain`]: explanation masks, explainers and the explanation/marginal split.
//! - [`augment`]: the five explanation-preserving operators and the iid edge-drop channel.
//! - [`contrastive`]: NT-Xent and SimSiam loss values.
//! - [`ecl`]: pairwise/symmetric/partition scores, exhaustive partition search, ERM readout.
//! - [`theory`]: closed-form and brute-force pair tables, class-level partition scores,
//!   and the Monte Carlo error-rate experiment.
//! - [`io`]: JSON-lines datasets, experiment CSV and SVG charts.
//! - [`cli`]: the `epa` command-line front end.

pub mod augment;
pub mod cli;
pub mod contrastive;
pub mod ecl;
pub mod error;
pub mod explain;
pub mod graph;
pub mod io;
pub mod rng;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use explain::ExplanationMask;
pub use graph::Graph;
