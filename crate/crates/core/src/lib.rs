//! Data-driven sweet spot prediction from vertical well logs and horizontal
//! well production.
//!
//! The pipeline has three phases:
//!
//! 1. **Pre-processing** - parse LAS well logs ([`las`]), canonicalize curve
//!    names through an alias dictionary, build a formation depth map from tops
//!    data ([`formation`]), extract depth-normalized per-formation log
//!    sections ([`log_frame`]), and summarize daily production into a
//!    cumulative production frame ([`production`]).
//! 2. **Feature extraction and interpolation** - functional principal
//!    component scores per (property, formation) block ([`fpca`]), carried
//!    from vertical well locations to horizontal well surface coordinates by
//!    ordinary kriging ([`geostat`]).
//! 3. **Predictive modeling** - a regression model zoo with elastic-net
//!    feature selection ([`models`]), ranked by repeated K-fold RMSE and
//!    externally validated with a nested leave-one-well-out loop against a
//!    kriging-on-production baseline ([`evaluation`]).
//!
//! [`synthfield`] generates synthetic fields with known ground truth so the
//! whole pipeline can be validated end to end, and [`pipeline`] orchestrates
//! the phases from a [`config::PipelineConfig`].

pub mod config;
pub mod evaluation;
pub mod formation;
pub mod fpca;
pub mod geostat;
pub mod las;
pub mod log_frame;
pub mod models;
pub mod pipeline;
pub mod production;
pub mod report;
pub mod synthfield;

pub use config::PipelineConfig;
pub use evaluation::{BenchmarkResult, LooReport, ResamplePlan};
pub use formation::{Formation3dMap, TopsTable};
pub use fpca::FpcaModel;
pub use geostat::{SpatialSamples, VariogramModel};
pub use las::{AliasDictionary, LasFile};
pub use log_frame::StandardizedLogFrame;
pub use models::{Dataset, ModelSpec};
pub use production::CumulativeProductionFrame;
pub use synthfield::SynthConfig;
