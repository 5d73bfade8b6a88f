//! Closed-form costs and the entropy machinery behind the lower bound.

mod cost;
mod entropy;
mod han;

pub use cost::{base_download_cost, capacity, optimal_download_cost, Capacity};
pub use entropy::{entropy, mutual_information, EntropySource, FactoredJoint, JointDistribution, Mass};
pub use han::{
    averaged_bound, han_chain_check, permutation_bound, subset_mu, AveragedBound, HanCheck, SubsetEntropyTable,
    ENTROPY_TOLERANCE,
};
