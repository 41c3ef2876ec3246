//! Causal discovery for heteroscedastic symmetric-noise models.
//!
//! The core observation: fit the score (gradient of the log density) of
//! the joint distribution, and the coordinate belonging to a sink variable
//! has a symmetric distribution, so any odd moment of it vanishes. Cause
//! coordinates pick up skew from the mechanism. Repeatedly removing the
//! least-skewed coordinate recovers a topological order, and kernel-based
//! conditional independence tests prune the implied complete graph down to
//! a DAG.
//!
//! Module map:
//! - [`datagen`]: synthetic structural models with location-scale noise,
//!   including latent-confounder variants.
//! - [`score`]: score estimators (Stein kernel method, sliced score
//!   matching with a small MLP, and closed-form bivariate references).
//! - [`ordering`]: the skew statistic and sink-elimination order search.
//! - [`pruning`]: KCI-based edge pruning given an order.
//! - [`oracles`]: closed-form and quadrature reference values used to
//!   validate the numerics.
//! - [`metrics`], [`io`], [`config`], [`runner`]: evaluation, file formats,
//!   and the batch pipeline behind the `skewscore` CLI.
//!
//! See the `examples/` directory for end-to-end usage.

pub mod config;
pub mod dag;
pub mod datagen;
pub mod error;
pub mod io;
pub mod metrics;
pub mod oracles;
pub mod ordering;
pub mod pruning;
pub mod runner;
pub mod score;

pub use config::{EstimatorKind, RunConfig, Setting};
pub use dag::Dag;
pub use datagen::{DataMatrix, Direction, Formulation, NoiseFamily, NoiseSpec};
pub use error::{Error, Result};
pub use ordering::{topological_order, OddTestFunction, SymmetryCheck};
pub use pruning::{prune, KciConfig, PruneConfig};
pub use score::{ScoreEstimator, SsmEstimator, SteinEstimator};
