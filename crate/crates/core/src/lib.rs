//! Vulnerability-inducing change prediction.
//!
//! The pipeline labels historical changes through blame lineage
//! ([`lineage`]), turns each change into a feature vector ([`features`],
//! [`textmine`]), trains lightweight classifiers ([`classify`]) and replays
//! the two evaluation protocols, cross-validation and monthly online
//! retraining ([`eval`]).

pub mod classify;
pub mod eval;
pub mod features;
pub mod lineage;
pub mod model;
pub mod synth;
pub mod textmine;
