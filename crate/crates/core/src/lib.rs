//! Evolving autoencoder ensembles for multivariate time-series anomaly
//! detection.
//!
//! The pipeline: load or synthesise a labelled sensor series, evolve a
//! partition of the features into subgroups with a genetic algorithm,
//! train one small autoencoder per subgroup, calibrate per-submodel
//! anomaly thresholds on clean validation data, and combine the
//! submodels by threshold voting into an ensemble detector.

pub mod autoencoders;
pub mod dataset;
pub mod ensemble;
pub mod evolution;
pub mod nn;
pub mod partition;
pub mod seeds;
