//! Simulated quantum maximum finding and the quantum-search learner.

mod cost;
mod durr_hoyer;
mod grover;
mod learner;
mod ledger;
mod subset;

pub use cost::{crossover_closed_form_log2, crossover_log2_n, gamma_upper_bound, predict_costs, CostModel, CostPrediction};
pub use durr_hoyer::{durr_hoyer_accounting, durr_hoyer_amplitude, DurrHoyer, AMPLITUDE_LIMIT};
pub use grover::StateVector;
pub use learner::{
    find_subset_quantum, learn_neighborhood_quantum, per_call_eta, recover_graph_quantum,
    QuantumGraph, QuantumPlan,
};
pub use ledger::{MaxFindMode, QueryLedger};
pub use subset::{bits_per_index, code_space_size, decode_string, encode_subset, membership_check, SubsetString};
