//! Information-processing features of discrete dynamical systems.
//!
//! The crate computes, exactly, the mutual information between a cell's
//! state of an elementary cellular automaton (ECA) and sets of its initial
//! cell states, starting from i.i.d. uniform initial configurations. On top
//! of those features it measures how well they predict the Wolfram class
//! of a rule, relates them to Langton's λ, clusters rules by feature
//! similarity, and repeats the analysis for attractor (stationary)
//! ensembles of finite rings.
//!
//! Module map:
//!
//! - [`eca`]: rule tables, ring stepping, light-cone maps, exact joint counts
//! - [`info`]: entropy, mutual information and whole-minus-sum synergy
//! - [`features`]: feature descriptors, feature vectors and feature matrices
//! - [`predict`]: class tables, predictive power, principal-feature search
//! - [`lambda`]: Langton λ profiles and the closed-form t=1 information
//! - [`cluster`]: complete-linkage dendrograms and their export
//! - [`stationary`]: attractor ensembles and transient feature trajectories

pub mod cluster;
pub mod eca;
pub mod error;
pub mod features;
pub mod info;
pub mod lambda;
pub mod numfmt;
pub mod predict;
pub mod stationary;

pub use error::{Error, Result};
