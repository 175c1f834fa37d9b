use proptest::prelude::*;
use regex::Regex;
use riskbench::lifecycle::{
    accepts, build_lifecycle, hotelling_t2, InferenceRules, LifecycleCounts, Outcome, RatioSet,
    RiskObservation, RiskState, RiskTransition,
};

fn letter(t: RiskTransition) -> char {
    match t {
        RiskTransition::Generate => 'g',
        RiskTransition::Occur => 'o',
        RiskTransition::Continue => 'c',
        RiskTransition::Close => 'x',
    }
}

#[test]
fn automaton_language_matches_regex_up_to_length_7() {
    let oracle = Regex::new("^gc*(oc*)?x$").unwrap();
    let mut words: Vec<Vec<RiskTransition>> = vec![vec![]];
    let mut checked = 0usize;
    for _ in 0..7 {
        words = words
            .iter()
            .flat_map(|w| {
                RiskTransition::ALL.iter().map(move |&t| {
                    let mut next = w.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
        for w in &words {
            let text: String = w.iter().copied().map(letter).collect();
            assert_eq!(accepts(w), oracle.is_match(&text), "{text}");
            checked += 1;
        }
    }
    assert_eq!(checked, (1..=7).map(|n| 4usize.pow(n)).sum::<usize>());
    assert!(!accepts(&[]));
}

fn arb_states() -> impl Strategy<Value = Vec<Option<RiskState>>> {
    let state = prop::option::of(prop::sample::select(RiskState::ALL.to_vec()));
    prop::collection::vec(state, 1..8)
}

proptest! {
    /// Random observation histories either fail validation or yield an
    /// accepted word whose outcome agrees with the state sequence.
    #[test]
    fn realized_iff_happening_observed(states in arb_states(), start in 0u32..3) {
        let ordinals: Vec<u32> = (0..start + states.len() as u32).collect();
        let observations: Vec<RiskObservation> = states
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| RiskObservation::explicit(start + i as u32, s)))
            .collect();
        prop_assume!(!observations.is_empty());
        if let Ok(life) = build_lifecycle("r", &observations, &ordinals, &InferenceRules::default()) {
            prop_assert!(accepts(&life.transitions));
            let seq = life.state_sequence();
            prop_assert_eq!(*seq.last().unwrap(), RiskState::Clo);
            prop_assert!(seq[0] != RiskState::Clo);
            prop_assert!(!seq.windows(2).any(|w| w[0] == RiskState::Hap && w[1] == RiskState::Reg));
            let happened = seq.contains(&RiskState::Hap);
            prop_assert_eq!(life.outcome == Outcome::Realized, happened);
            prop_assert_eq!(life.transitions.contains(&RiskTransition::Occur), happened);
        }
    }

    #[test]
    fn ratio_identities(ii in 0u64..200, ir in 0u64..200, ci in 0u64..200, cr in 0u64..200) {
        let c = LifecycleCounts::new(ii.max(ir), ii.min(ir), ci.max(cr), ci.min(cr));
        let r = RatioSet::from_counts(&c);
        if let (Some(t), Some(d)) = (r.total_realization, r.total_dismissed) {
            prop_assert!((t + d - 1.0).abs() < 1e-12);
        }
        if let Some(n) = r.new_item {
            prop_assert!((n - c.construction_identified as f64 / c.identified() as f64).abs() < 1e-15);
        }
        for v in [r.total_realization, r.initial_realization, r.initial_efficiency, r.new_item, r.further_realized]
            .into_iter()
            .flatten()
        {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn hotelling_is_scale_invariant(
        a in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..8),
        b in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..8),
        sx in 0.1f64..50.0,
        sy in 0.1f64..50.0,
    ) {
        let scale = |g: &[Vec<f64>]| g.iter().map(|p| vec![p[0] * sx + 3.0, p[1] * sy - 1.0]).collect::<Vec<_>>();
        if let Ok(base) = hotelling_t2(&a, &b, 0.05) {
            let scaled = hotelling_t2(&scale(&a), &scale(&b), 0.05).unwrap();
            prop_assert!((base.t_squared - scaled.t_squared).abs() <= 1e-6 * base.t_squared.max(1.0));
            prop_assert!(base.t_squared >= 0.0);
        }
    }
}

/// T² from the raw pooled covariance with the 2×2 inverse written out.
fn hand_t2(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mean = |g: &[[f64; 2]]| {
        let n = g.len() as f64;
        [
            g.iter().map(|p| p[0]).sum::<f64>() / n,
            g.iter().map(|p| p[1]).sum::<f64>() / n,
        ]
    };
    let (ma, mb) = (mean(a), mean(b));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (g, m) in [(a, ma), (b, mb)] {
        for p in g {
            let (dx, dy) = (p[0] - m[0], p[1] - m[1]);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
    }
    let dof = (a.len() + b.len() - 2) as f64;
    let (sxx, sxy, syy) = (sxx / dof, sxy / dof, syy / dof);
    let det = sxx * syy - sxy * sxy;
    let (ixx, ixy, iyy) = (syy / det, -sxy / det, sxx / det);
    let (dx, dy) = (ma[0] - mb[0], ma[1] - mb[1]);
    let quad = dx * dx * ixx + 2.0 * dx * dy * ixy + dy * dy * iyy;
    (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64 * quad
}

type Points<'a> = &'a [[f64; 2]];

#[test]
fn hotelling_matches_hand_inverse() {
    let fixtures: [(Points, Points); 2] = [
        (
            &[
                [0.12, 0.30],
                [0.25, 0.10],
                [0.40, 0.45],
                [0.05, 0.20],
                [0.31, 0.22],
            ],
            &[
                [-0.05, 0.02],
                [0.10, -0.10],
                [0.02, 0.15],
                [-0.12, 0.01],
                [0.08, 0.05],
                [0.00, -0.04],
            ],
        ),
        (
            &[[1.0, 2.0], [2.0, 1.0], [3.0, 4.0], [4.0, 2.5]],
            &[[2.0, 2.0], [3.0, 3.5], [5.0, 4.0], [6.0, 5.0]],
        ),
    ];
    for (a, b) in fixtures {
        let va: Vec<Vec<f64>> = a.iter().map(|p| p.to_vec()).collect();
        let vb: Vec<Vec<f64>> = b.iter().map(|p| p.to_vec()).collect();
        let got = hotelling_t2(&va, &vb, 0.05).unwrap();
        let want = hand_t2(a, b);
        assert!(
            (got.t_squared - want).abs() < 1e-9,
            "{} vs {want}",
            got.t_squared
        );
    }
}

#[test]
fn equal_means_give_zero() {
    let a = vec![
        vec![1.0, 2.0],
        vec![2.0, 5.0],
        vec![4.0, 3.0],
        vec![5.0, 6.0],
    ];
    // reflect A through its mean: different points, identical mean vector
    let b: Vec<Vec<f64>> = a.iter().map(|p| vec![6.0 - p[0], 8.0 - p[1]]).collect();
    let r = hotelling_t2(&a, &b, 0.05).unwrap();
    assert!(r.t_squared.abs() < 1e-9, "{}", r.t_squared);
    assert!(!r.significant);
}

#[test]
fn permutation_of_risks_keeps_counts() {
    let ordinals = [0, 1, 2];
    let rules = InferenceRules::default();
    let histories: [&[(u32, RiskState)]; 4] = [
        &[(0, RiskState::Reg), (1, RiskState::Hap)],
        &[(0, RiskState::Reg), (2, RiskState::Clo)],
        &[(1, RiskState::Hap)],
        &[(2, RiskState::Reg)],
    ];
    let lives: Vec<_> = histories
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let obs: Vec<_> = h
                .iter()
                .map(|&(o, s)| RiskObservation::explicit(o, s))
                .collect();
            build_lifecycle(&format!("r{i}"), &obs, &ordinals, &rules).unwrap()
        })
        .collect();
    let mut reversed = lives.clone();
    reversed.reverse();
    let counts = LifecycleCounts::from_lifecycles(&lives);
    assert_eq!(counts, LifecycleCounts::from_lifecycles(&reversed));
    assert_eq!(counts, LifecycleCounts::new(2, 1, 2, 1));
}
