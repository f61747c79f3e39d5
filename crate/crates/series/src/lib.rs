//! Information features of multivariate time series.
//!
//! Mutual information between continuous variables is estimated with the
//! Kraskov (KSG) k-nearest-neighbor estimator. On a panel of series arranged
//! as a chain, a sliding window yields per-date memory, transfer and
//! integration, the continuous analogues of the cellular-automaton features.
//!
//! - [`special`] (digamma)
//! - [`kdtree`] (max-norm k-d tree)
//! - [`ksg`] (point clouds, the estimator and tie-breaking jitter)
//! - [`panel`] (CSV ingestion and Gaussian detrending)
//! - [`pipeline`] (window features, trajectories and regime separation)
//! - [`synth`] (synthetic chain panels with a regime change)

pub mod error;
pub mod kdtree;
pub mod ksg;
pub mod panel;
pub mod pipeline;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
