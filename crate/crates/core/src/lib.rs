//! Structure learning for binary r-wise Markov random fields: model
//! representation, exact and Gibbs sampling, the empirical `v̂` statistic,
//! the greedy neighborhood learner and a simulated quantum-search variant
//! with query accounting.

pub mod empirics;
pub mod error;
pub mod generate;
pub mod greedy;
pub mod model;
mod one_based;
pub mod qmaxfind;
pub mod sampler;
pub mod seed;

pub use empirics::{threshold_test, true_v, v_hat, EmpiricalProbCache, RowHistogram};
pub use error::{MrfError, Result};
pub use generate::{figure1, random_model, RandomModelSpec};
pub use greedy::{
    calibrate_tau, default_cap_l, learn_neighborhood, recover_graph, ModelMeta, NeighborhoodResult,
    RecoveredGraph, SearchPlan, SelectionRule, Symmetrize,
};
pub use model::{CliqueTensor, DerivedConstants, MrfModel, Neighborhoods, Violation};
pub use qmaxfind::{MaxFindMode, QueryLedger};
pub use sampler::{exact_joint, gibbs_sample, sample_exact, JointTable, SampleSet};
