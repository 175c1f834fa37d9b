//! Risk life-cycle automaton, per-risk tracking, performance ratios,
//! management styles and the style comparison test.

mod automaton;
mod hotelling;
mod ratios;
mod tracking;

pub use automaton::{accepts, step, RiskState, RiskTransition, FINAL_STATES, INITIAL_STATE};
pub use hotelling::{hotelling_t2, HotellingResult};
pub use ratios::{
    aggregate_ratios, classify_style, compute_ratios, Activity, AggregateRatios, Diligence,
    LifecycleCounts, ProjectRatios, RatioSet, StyleLabel, StyleThresholds,
};
pub use tracking::{
    build_lifecycle, infer_state, parse_state_table, InferenceRules, Origin, Outcome,
    ProjectObservations, RiskLifecycle, RiskObservation,
};
