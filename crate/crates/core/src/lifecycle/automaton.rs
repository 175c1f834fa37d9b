use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RiskState {
    /// Registered: identified, not yet happening.
    Reg,
    /// Happening: currently impacting the project.
    Hap,
    /// Closed, with or without having happened.
    Clo,
}

impl RiskState {
    pub const ALL: [RiskState; 3] = [RiskState::Reg, RiskState::Hap, RiskState::Clo];
}

impl fmt::Display for RiskState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskState::Reg => "Reg",
            RiskState::Hap => "Hap",
            RiskState::Clo => "Clo",
        })
    }
}

impl FromStr for RiskState {
    type Err = Error;

    /// Accepts the short codes and the long names, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reg" | "registered" => Ok(RiskState::Reg),
            "hap" | "happening" => Ok(RiskState::Hap),
            "clo" | "closed" => Ok(RiskState::Clo),
            other => Err(Error::Validation(format!("unknown risk state `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskTransition {
    Generate,
    Occur,
    Continue,
    Close,
}

impl RiskTransition {
    pub const ALL: [RiskTransition; 4] = [
        RiskTransition::Generate,
        RiskTransition::Occur,
        RiskTransition::Continue,
        RiskTransition::Close,
    ];
}

impl fmt::Display for RiskTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskTransition::Generate => "generate",
            RiskTransition::Occur => "occur",
            RiskTransition::Continue => "continue",
            RiskTransition::Close => "close",
        })
    }
}

pub const INITIAL_STATE: RiskState = RiskState::Reg;
pub const FINAL_STATES: [RiskState; 1] = [RiskState::Clo];

/// Transition function over identified risks.
///
/// `generate` only applies before a risk is identified, so it is illegal from
/// every state here; see [`accepts`] for how words start.
pub fn step(state: RiskState, transition: RiskTransition) -> Result<RiskState> {
    use RiskState::*;
    use RiskTransition::*;
    match (state, transition) {
        (Reg, Occur) => Ok(Hap),
        (s, Continue) => Ok(s),
        (Reg | Hap, Close) => Ok(Clo),
        (state, transition) => Err(Error::IllegalTransition { state, transition }),
    }
}

/// Whether a transition word describes a complete risk life-cycle.
///
/// The word must open with `generate` (entering `Reg`), every later symbol
/// must be legal from the running state, and the word must end on the step
/// that reaches `Clo`. Closing ends the life-cycle, so nothing may follow it.
pub fn accepts(word: &[RiskTransition]) -> bool {
    let Some((RiskTransition::Generate, rest)) = word.split_first() else {
        return false;
    };
    let mut state = INITIAL_STATE;
    for (i, &t) in rest.iter().enumerate() {
        if FINAL_STATES.contains(&state) {
            return false;
        }
        match step(state, t) {
            Ok(next) => state = next,
            Err(_) => return false,
        }
        if FINAL_STATES.contains(&state) && i + 1 != rest.len() {
            return false;
        }
    }
    FINAL_STATES.contains(&state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use RiskState::*;
    use RiskTransition::*;

    #[test]
    fn table_transitions() {
        assert_eq!(step(Reg, Occur).unwrap(), Hap);
        assert_eq!(step(Hap, Continue).unwrap(), Hap);
        assert_eq!(step(Reg, Continue).unwrap(), Reg);
        assert_eq!(step(Clo, Continue).unwrap(), Clo);
        assert_eq!(step(Reg, Close).unwrap(), Clo);
        assert_eq!(step(Hap, Close).unwrap(), Clo);
    }

    #[test]
    fn illegal_pairs() {
        let illegal: Vec<_> = RiskState::ALL
            .iter()
            .flat_map(|&s| RiskTransition::ALL.iter().map(move |&t| (s, t)))
            .filter(|&(s, t)| step(s, t).is_err())
            .collect();
        assert_eq!(
            illegal,
            [
                (Reg, Generate),
                (Hap, Generate),
                (Hap, Occur),
                (Clo, Generate),
                (Clo, Occur),
                (Clo, Close)
            ]
        );
        let err = step(Clo, Occur).unwrap_err().to_string();
        assert!(err.contains("occur") && err.contains("Clo"), "{err}");
    }

    #[test]
    fn accepted_words() {
        assert!(accepts(&[Generate, Occur, Close]));
        assert!(accepts(&[Generate, Close]));
        assert!(accepts(&[
            Generate, Continue, Occur, Continue, Continue, Close
        ]));
    }

    #[test]
    fn rejected_words() {
        assert!(!accepts(&[Generate, Occur]));
        assert!(!accepts(&[]));
        assert!(!accepts(&[Occur, Close]));
        assert!(!accepts(&[Generate, Close, Continue]));
        assert!(!accepts(&[Generate, Occur, Occur, Close]));
        assert!(!accepts(&[Generate, Generate, Close]));
    }

    #[test]
    fn parse_states() {
        assert_eq!("Registered".parse::<RiskState>().unwrap(), Reg);
        assert_eq!(" hap ".parse::<RiskState>().unwrap(), Hap);
        assert_eq!("CLO".parse::<RiskState>().unwrap(), Clo);
        assert!("open".parse::<RiskState>().is_err());
    }
}
