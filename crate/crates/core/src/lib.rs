//! Simulation of active de-anonymization by group-membership queries.
//!
//! An attacker holds a noisy scan of a bipartite user/group membership graph
//! and wants to identify an anonymous victim. It can ask whether the victim
//! belongs to a group (answered through a noisy channel) or whether the
//! victim is a particular user (answered exactly). This crate implements the
//! information threshold strategy for choosing those queries, a UID-scan
//! baseline, the closed-form bounds on the expected number of queries, and
//! a reproducible Monte Carlo harness that compares the two.

pub mod attacker;
pub mod bits;
pub mod bounds;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod seeding;
mod serde_float;
pub mod stochastics;

pub use attacker::{
    init_state, run_its, run_uid_scan, AttackTranscript, FinalPhaseOrder, ItsConfig, ItsState,
    QueryKind, QueryRecord, ScanOrder, ThresholdDecision,
};
pub use bits::BitVector;
pub use bounds::{asymptotic_params, converse_lower, group_sufficiency, theorem1_upper, BoundReport};
pub use error::{Error, Result};
pub use graph::{generate_cprb, BigraphPair, GroupId, UserId, Which};
pub use oracle::{expected_response_column, VictimInstance};
pub use stochastics::{
    build_joint_uyz, entropy, info_density, make_prior, mutual_information, sample_victim,
    EdgeJointDistribution, InfoMeasures, JointUYZ, PriorKind, QueryChannel, VictimPrior,
};
