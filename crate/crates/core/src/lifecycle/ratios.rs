//! Risk identification performance ratios and management styles.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::tracking::{Origin, Outcome, RiskLifecycle};
use crate::error::{Error, Result};

/// Identified/realized counts split by when the risk was first identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LifecycleCounts {
    pub initial_identified: u64,
    pub initial_realized: u64,
    pub construction_identified: u64,
    pub construction_realized: u64,
}

impl LifecycleCounts {
    pub fn new(
        initial_identified: u64,
        initial_realized: u64,
        construction_identified: u64,
        construction_realized: u64,
    ) -> Self {
        LifecycleCounts {
            initial_identified,
            initial_realized,
            construction_identified,
            construction_realized,
        }
    }

    pub fn from_lifecycles(lifecycles: &[RiskLifecycle]) -> Self {
        let mut c = LifecycleCounts::default();
        for lc in lifecycles {
            let realized = u64::from(lc.outcome == Outcome::Realized);
            match lc.origin {
                Origin::Initial => {
                    c.initial_identified += 1;
                    c.initial_realized += realized;
                }
                Origin::Construction => {
                    c.construction_identified += 1;
                    c.construction_realized += realized;
                }
            }
        }
        c
    }

    pub fn identified(&self) -> u64 {
        self.initial_identified + self.construction_identified
    }

    pub fn realized(&self) -> u64 {
        self.initial_realized + self.construction_realized
    }

    pub fn dismissed(&self) -> u64 {
        self.identified() - self.realized()
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_realized > self.initial_identified
            || self.construction_realized > self.construction_identified
        {
            return Err(Error::Validation(format!(
                "realized exceeds identified in {self:?}"
            )));
        }
        Ok(())
    }
}

impl std::ops::Add for LifecycleCounts {
    type Output = LifecycleCounts;

    fn add(self, o: LifecycleCounts) -> LifecycleCounts {
        LifecycleCounts {
            initial_identified: self.initial_identified + o.initial_identified,
            initial_realized: self.initial_realized + o.initial_realized,
            construction_identified: self.construction_identified + o.construction_identified,
            construction_realized: self.construction_realized + o.construction_realized,
        }
    }
}

impl std::iter::Sum for LifecycleCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(LifecycleCounts::default(), |a, b| a + b)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Performance ratios; `None` wherever the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RatioSet {
    /// realized / identified
    pub total_realization: Option<f64>,
    /// dismissed / identified
    pub total_dismissed: Option<f64>,
    /// realized initial / identified initial
    pub initial_realization: Option<f64>,
    /// dismissed initial / identified initial
    pub initial_dismissed: Option<f64>,
    /// realized initial / realized
    pub initial_efficiency: Option<f64>,
    /// identified in construction / identified
    pub new_item: Option<f64>,
    /// realized construction / identified construction
    pub further_realized: Option<f64>,
}

impl RatioSet {
    pub fn from_counts(c: &LifecycleCounts) -> Self {
        RatioSet {
            total_realization: ratio(c.realized(), c.identified()),
            total_dismissed: ratio(c.dismissed(), c.identified()),
            initial_realization: ratio(c.initial_realized, c.initial_identified),
            initial_dismissed: ratio(
                c.initial_identified - c.initial_realized,
                c.initial_identified,
            ),
            initial_efficiency: ratio(c.initial_realized, c.realized()),
            new_item: ratio(c.construction_identified, c.identified()),
            further_realized: ratio(c.construction_realized, c.construction_identified),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRatios {
    pub project_id: String,
    pub counts: LifecycleCounts,
    pub ratios: RatioSet,
}

pub fn compute_ratios(project_id: &str, lifecycles: &[RiskLifecycle]) -> Result<ProjectRatios> {
    if lifecycles.is_empty() {
        return Err(Error::Empty(format!(
            "project `{project_id}` has no tracked risks"
        )));
    }
    let counts = LifecycleCounts::from_lifecycles(lifecycles);
    Ok(ProjectRatios {
        project_id: project_id.to_string(),
        counts,
        ratios: RatioSet::from_counts(&counts),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRatios {
    /// Ratios of the summed counts; the headline figures.
    pub pooled: ProjectRatios,
    /// Unweighted mean of each defined per-project ratio.
    pub mean_of_projects: RatioSet,
    pub projects: Vec<ProjectRatios>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Pools counts across projects (sum of numerators over sum of
/// denominators) and also reports the plain mean of per-project ratios.
pub fn aggregate_ratios(projects: Vec<ProjectRatios>) -> Result<AggregateRatios> {
    if projects.is_empty() {
        return Err(Error::Empty("no projects to aggregate".into()));
    }
    let counts: LifecycleCounts = projects.iter().map(|p| p.counts).sum();
    let field =
        |f: fn(&RatioSet) -> Option<f64>| mean_defined(projects.iter().map(|p| f(&p.ratios)));
    let mean_of_projects = RatioSet {
        total_realization: field(|r| r.total_realization),
        total_dismissed: field(|r| r.total_dismissed),
        initial_realization: field(|r| r.initial_realization),
        initial_dismissed: field(|r| r.initial_dismissed),
        initial_efficiency: field(|r| r.initial_efficiency),
        new_item: field(|r| r.new_item),
        further_realized: field(|r| r.further_realized),
    };
    Ok(AggregateRatios {
        pooled: ProjectRatios {
            project_id: "pooled".into(),
            counts,
            ratios: RatioSet::from_counts(&counts),
        },
        mean_of_projects,
        projects,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Planner,
    Doer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diligence {
    Careful,
    Excessive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StyleLabel {
    pub activity: Activity,
    pub diligence: Diligence,
}

impl fmt::Display for StyleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.diligence {
            Diligence::Careful => "careful",
            Diligence::Excessive => "excessive",
        };
        let a = match self.activity {
            Activity::Planner => "planner",
            Activity::Doer => "doer",
        };
        write!(f, "{d} {a}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StyleThresholds {
    /// `new_item` at or above this makes a doer.
    pub doer: f64,
    /// Realization at or above this makes a team careful.
    pub careful: f64,
}

impl Default for StyleThresholds {
    fn default() -> Self {
        StyleThresholds {
            doer: 0.5,
            careful: 0.5,
        }
    }
}

/// Planners are judged on initial realization, doers on further realization.
pub fn classify_style(ratios: &RatioSet, thresholds: &StyleThresholds) -> Result<StyleLabel> {
    let new_item = ratios.new_item.ok_or(Error::Unclassifiable("new_item"))?;
    let (activity, realization) = if new_item >= thresholds.doer {
        (
            Activity::Doer,
            ratios
                .further_realized
                .ok_or(Error::Unclassifiable("further_realized"))?,
        )
    } else {
        (
            Activity::Planner,
            ratios
                .initial_realization
                .ok_or(Error::Unclassifiable("initial_realization"))?,
        )
    };
    let diligence = if realization >= thresholds.careful {
        Diligence::Careful
    } else {
        Diligence::Excessive
    };
    Ok(StyleLabel {
        activity,
        diligence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn worked_example_project_4() {
        let r = RatioSet::from_counts(&LifecycleCounts::new(43, 39, 103, 68));
        assert_abs_diff_eq!(r.initial_realization.unwrap(), 39.0 / 43.0);
        assert_abs_diff_eq!(r.further_realized.unwrap(), 68.0 / 103.0);
        assert_abs_diff_eq!(r.new_item.unwrap(), 103.0 / 146.0);
        assert_abs_diff_eq!(r.total_realization.unwrap(), 107.0 / 146.0);
        assert_abs_diff_eq!(r.initial_efficiency.unwrap(), 39.0 / 107.0);
    }

    #[test]
    fn all_dismissed() {
        let r = RatioSet::from_counts(&LifecycleCounts::new(5, 0, 2, 0));
        assert_eq!(r.total_realization, Some(0.0));
        assert_eq!(r.total_dismissed, Some(1.0));
        assert_eq!(r.initial_efficiency, None);
    }

    #[test]
    fn project_1_counts() {
        let r = RatioSet::from_counts(&LifecycleCounts::new(32, 31, 6, 6));
        assert_abs_diff_eq!(r.total_realization.unwrap(), 37.0 / 38.0);
        assert_abs_diff_eq!(r.new_item.unwrap(), 6.0 / 38.0);
    }

    #[test]
    fn zero_construction_leaves_further_unset() {
        let r = RatioSet::from_counts(&LifecycleCounts::new(10, 7, 0, 0));
        assert_eq!(r.further_realized, None);
        assert_eq!(r.new_item, Some(0.0));
        let style = classify_style(&r, &StyleThresholds::default()).unwrap();
        assert_eq!(style.to_string(), "careful planner");
    }

    #[test]
    fn styles() {
        let t = StyleThresholds::default();
        let doer = RatioSet {
            new_item: Some(0.71),
            further_realized: Some(0.66),
            ..RatioSet::default()
        };
        assert_eq!(
            classify_style(&doer, &t).unwrap().to_string(),
            "careful doer"
        );
        let planner = RatioSet {
            new_item: Some(0.158),
            initial_realization: Some(0.969),
            ..RatioSet::default()
        };
        assert_eq!(
            classify_style(&planner, &t).unwrap().to_string(),
            "careful planner"
        );
        let boundary = RatioSet {
            new_item: Some(0.5),
            further_realized: Some(0.2),
            ..RatioSet::default()
        };
        assert_eq!(
            classify_style(&boundary, &t).unwrap().to_string(),
            "excessive doer"
        );
        assert!(matches!(
            classify_style(&RatioSet::default(), &t),
            Err(Error::Unclassifiable("new_item"))
        ));
    }

    #[test]
    fn aggregate_single_project_is_identity() {
        let p = ProjectRatios {
            project_id: "x".into(),
            counts: LifecycleCounts::new(43, 39, 103, 68),
            ratios: RatioSet::from_counts(&LifecycleCounts::new(43, 39, 103, 68)),
        };
        let agg = aggregate_ratios(vec![p.clone()]).unwrap();
        assert_eq!(agg.pooled.ratios, p.ratios);
        assert_eq!(agg.mean_of_projects, p.ratios);
        assert!(aggregate_ratios(vec![]).is_err());
    }
}
