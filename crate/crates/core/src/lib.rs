//! Pipeline for measuring how media attention to public figures evolves around
//! their death: scan document streams for person mentions, build death-aligned
//! mention time series, fit decay models that split attention into a fading and
//! a persistent component, extract per-person curve features, cluster them, and
//! regress attention boosts on biographic factors.
//!
//! The crate is organised along the pipeline stages:
//!
//! * [`corpus`]: alias indexing, document scanning, daily count aggregation,
//!   inclusion criteria.
//! * [`series`]: log-fraction mention series and the variable-span smoother.
//! * [`model`]: decay-model catalog, nonlinear least-squares fitting, and the
//!   communicative/cultural decomposition.
//! * [`features`]: the four per-curve characteristic numbers.
//! * [`cluster`]: k-means, silhouette-based model selection, cross-media
//!   confusion analysis with trace bounds.
//! * [`regress`]: dummy-coded OLS, rank scaling, Wilcoxon signed-rank test,
//!   bootstrap confidence intervals.
//! * [`synth`]: seeded generators that produce corpora, series, and
//!   populations with known ground truth.

pub mod cluster;
pub mod corpus;
pub mod features;
pub mod model;
pub mod regress;
pub mod series;
pub mod synth;
