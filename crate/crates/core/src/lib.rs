//! Takagi-Sugeno neuro-fuzzy regression trained by a hybrid of particle swarm
//! search (premise Gaussians) and linear least squares (rule consequents).
//!
//! The pipeline is: split the data, z-score it with training statistics,
//! seed one rule per k-means cluster, let the swarm move the premise centers
//! and widths while every candidate gets its consequents from an exact
//! least-squares solve, then report accuracy on both splits.

pub mod clustering;
pub mod data;
pub mod error;
pub mod fuzzy;
pub mod lsq;
pub mod metrics;
pub mod pso;
pub mod trainer;

pub use clustering::{cluster, seed_model, ClusterSeed};
pub use data::{load_csv, split, Dataset, SchemaSpec, Teacher};
pub use error::{AnfisError, Result};
pub use fuzzy::{membership, normalize_strengths, AnfisModel, GaussianMF, Normalization, Rule, Scaler};
pub use lsq::{assemble_design, solve_consequents, DesignMatrix, LsqSolution};
pub use metrics::Metrics;
pub use pso::{optimize, PsoOutcome, PsoParams, SwarmConfig, SwarmState};
pub use trainer::{train, TrainConfig, TrainReport};
