//! Per-risk life-cycle reconstruction from register observations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::automaton::{accepts, RiskState, RiskTransition};
use crate::corpus::{ProjectRecord, RiskItem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskObservation {
    pub snapshot_ordinal: u32,
    pub explicit_state: Option<RiskState>,
    pub probability_fraction: Option<f64>,
    pub impact_recorded: bool,
}

impl RiskObservation {
    pub fn explicit(snapshot_ordinal: u32, state: RiskState) -> Self {
        RiskObservation {
            snapshot_ordinal,
            explicit_state: Some(state),
            probability_fraction: None,
            impact_recorded: false,
        }
    }

    /// Reads an observation off a register row: a recognised status string
    /// is an explicit state; a positive cost or schedule figure counts as a
    /// recorded impact.
    pub fn from_item(snapshot_ordinal: u32, item: &RiskItem) -> Self {
        let a = &item.assessment;
        RiskObservation {
            snapshot_ordinal,
            explicit_state: item.status_note.as_deref().and_then(|s| s.parse().ok()),
            probability_fraction: a.raw_probability,
            impact_recorded: a.raw_cost.is_some_and(|c| c > 0.0)
                || a.raw_schedule.is_some_and(|s| s > 0.0),
        }
    }
}

/// When an observation without an explicit state counts as happening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceRules {
    pub happening_probability: f64,
    pub require_impact: bool,
}

impl Default for InferenceRules {
    fn default() -> Self {
        InferenceRules {
            happening_probability: 0.9,
            require_impact: true,
        }
    }
}

pub fn infer_state(obs: &RiskObservation, rules: &InferenceRules) -> RiskState {
    if let Some(state) = obs.explicit_state {
        return state;
    }
    let likely = obs
        .probability_fraction
        .is_some_and(|p| p >= rules.happening_probability);
    if likely && (obs.impact_recorded || !rules.require_impact) {
        RiskState::Hap
    } else {
        RiskState::Reg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Listed in the first register (ordinal 0).
    Initial,
    /// Added during construction.
    Construction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Realized,
    Dismissed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskLifecycle {
    pub risk_id: String,
    pub origin: Origin,
    pub first_ordinal: u32,
    /// One state per project snapshot from the first observation to the last
    /// register; unobserved snapshots carry the previous state forward.
    pub snapshot_states: Vec<RiskState>,
    /// The risk was still open in the last register and closed at completion.
    pub closed_at_completion: bool,
    pub transitions: Vec<RiskTransition>,
    pub outcome: Outcome,
}

impl RiskLifecycle {
    /// Snapshot states followed by the completion closure, if any. Always
    /// starts at `Reg` or `Hap` and ends at `Clo`.
    pub fn state_sequence(&self) -> Vec<RiskState> {
        let mut states = self.snapshot_states.clone();
        if self.closed_at_completion {
            states.push(RiskState::Clo);
        }
        states
    }
}

fn lifecycle_error(risk_id: &str, message: impl Into<String>) -> Error {
    Error::Lifecycle {
        risk_id: risk_id.to_string(),
        message: message.into(),
    }
}

/// Reconstructs the life-cycle of one risk.
///
/// `project_ordinals` lists every register ordinal of the project in
/// ascending order; the last one is the final register. Rules applied:
/// a risk may not be closed when first seen; anything still open in the
/// final register is closed at completion; reaching `Hap` at any point
/// makes the risk realized, otherwise it is dismissed.
pub fn build_lifecycle(
    risk_id: &str,
    observations: &[RiskObservation],
    project_ordinals: &[u32],
    rules: &InferenceRules,
) -> Result<RiskLifecycle> {
    let first = observations
        .first()
        .ok_or_else(|| lifecycle_error(risk_id, "no observations"))?;
    if observations
        .windows(2)
        .any(|w| w[1].snapshot_ordinal <= w[0].snapshot_ordinal)
    {
        return Err(lifecycle_error(
            risk_id,
            "observation ordinals must be strictly ascending",
        ));
    }
    if let Some(o) = observations
        .iter()
        .find(|o| !project_ordinals.contains(&o.snapshot_ordinal))
    {
        return Err(lifecycle_error(
            risk_id,
            format!(
                "observation at ordinal {} matches no register",
                o.snapshot_ordinal
            ),
        ));
    }

    let first_state = infer_state(first, rules);
    if first_state == RiskState::Clo {
        return Err(lifecycle_error(
            risk_id,
            "risk cannot be closed when first identified",
        ));
    }

    let mut observed = observations.iter().peekable();
    let mut snapshot_states = Vec::new();
    let mut state = first_state;
    for &ordinal in project_ordinals
        .iter()
        .filter(|&&o| o >= first.snapshot_ordinal)
    {
        if let Some(obs) = observed.next_if(|o| o.snapshot_ordinal == ordinal) {
            let next = infer_state(obs, rules);
            match (state, next) {
                (RiskState::Hap, RiskState::Reg) => {
                    return Err(lifecycle_error(
                        risk_id,
                        format!("regresses from Hap to Reg at ordinal {ordinal}"),
                    ))
                }
                (RiskState::Clo, s) if s != RiskState::Clo => {
                    return Err(lifecycle_error(
                        risk_id,
                        format!("reopened at ordinal {ordinal}"),
                    ))
                }
                _ => state = next,
            }
        }
        snapshot_states.push(state);
    }

    let closed_at_completion = state != RiskState::Clo;
    let mut transitions = vec![RiskTransition::Generate];
    if first_state == RiskState::Hap {
        transitions.push(RiskTransition::Occur);
    }
    for pair in snapshot_states.windows(2) {
        let t = match (pair[0], pair[1]) {
            (a, b) if a == b => RiskTransition::Continue,
            (RiskState::Reg, RiskState::Hap) => RiskTransition::Occur,
            (_, RiskState::Clo) => RiskTransition::Close,
            (a, b) => unreachable!("rejected above: {a} -> {b}"),
        };
        if t == RiskTransition::Close {
            transitions.push(t);
            break;
        }
        transitions.push(t);
    }
    if closed_at_completion {
        transitions.push(RiskTransition::Close);
    }
    if !accepts(&transitions) {
        return Err(lifecycle_error(
            risk_id,
            format!("transition word {transitions:?} is not accepted"),
        ));
    }
    let outcome = if transitions.contains(&RiskTransition::Occur) {
        Outcome::Realized
    } else {
        Outcome::Dismissed
    };
    Ok(RiskLifecycle {
        risk_id: risk_id.to_string(),
        origin: if first.snapshot_ordinal == 0 {
            Origin::Initial
        } else {
            Origin::Construction
        },
        first_ordinal: first.snapshot_ordinal,
        snapshot_states,
        closed_at_completion,
        transitions,
        outcome,
    })
}

/// Observations of one project grouped per risk, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectObservations {
    pub ordinals: Vec<u32>,
    pub risks: Vec<(String, Vec<RiskObservation>)>,
}

impl ProjectObservations {
    fn push(&mut self, risk_id: &str, obs: RiskObservation, index: &mut HashMap<String, usize>) {
        let slot = *index.entry(risk_id.to_string()).or_insert_with(|| {
            self.risks.push((risk_id.to_string(), Vec::new()));
            self.risks.len() - 1
        });
        self.risks[slot].1.push(obs);
    }

    pub fn from_project(project: &ProjectRecord) -> Self {
        let mut out = ProjectObservations {
            ordinals: project.snapshots.iter().map(|s| s.ordinal).collect(),
            risks: Vec::new(),
        };
        let mut index = HashMap::new();
        for snapshot in &project.snapshots {
            for item in &snapshot.items {
                out.push(
                    &item.risk_id,
                    RiskObservation::from_item(snapshot.ordinal, item),
                    &mut index,
                );
            }
        }
        out
    }

    pub fn lifecycles(&self, rules: &InferenceRules) -> Result<Vec<RiskLifecycle>> {
        self.risks
            .iter()
            .map(|(id, obs)| build_lifecycle(id, obs, &self.ordinals, rules))
            .collect()
    }
}

#[derive(Debug, Deserialize)]
struct StateRow {
    project_id: String,
    risk_id: String,
    snapshot: u32,
    state: String,
}

/// Reads a pre-tabulated `project_id,risk_id,snapshot,state` CSV. Projects
/// come back in first-seen order; a project's registers are the distinct
/// snapshot ordinals that appear for it.
pub fn parse_state_table(bytes: &[u8]) -> Result<Vec<(String, ProjectObservations)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut projects: Vec<(String, ProjectObservations)> = Vec::new();
    let mut project_index: HashMap<String, usize> = HashMap::new();
    let mut risk_index: Vec<HashMap<String, usize>> = Vec::new();
    for (i, row) in reader.deserialize::<StateRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            row: line,
            message: e.to_string(),
        })?;
        let state: RiskState = row.state.parse().map_err(|e: Error| Error::Parse {
            row: line,
            message: e.to_string(),
        })?;
        let p = *project_index
            .entry(row.project_id.clone())
            .or_insert_with(|| {
                projects.push((row.project_id.clone(), ProjectObservations::default()));
                risk_index.push(HashMap::new());
                projects.len() - 1
            });
        let obs = &mut projects[p].1;
        if !obs.ordinals.contains(&row.snapshot) {
            obs.ordinals.push(row.snapshot);
        }
        obs.push(
            &row.risk_id,
            RiskObservation::explicit(row.snapshot, state),
            &mut risk_index[p],
        );
    }
    for (_, obs) in &mut projects {
        obs.ordinals.sort_unstable();
        for (_, list) in &mut obs.risks {
            list.sort_by_key(|o| o.snapshot_ordinal);
        }
    }
    Ok(projects)
}
