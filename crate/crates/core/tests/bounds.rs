use transect_core::bounds::{check_ordering, delta, epsilon, markov_gap, verify_theorems, BoundParams, BoundReport};
use transect_core::gp::{GpModel, Hyperparams, Widths};
use transect_core::planners::{path_entropy, plan_markov, DEFAULT_BUDGET};
use transect_core::transect::{RobotConfig, TransectGrid};

fn grid(r: usize, c: usize) -> TransectGrid {
    TransectGrid::new(r, c, Widths::new(1.0, 1.0).unwrap()).unwrap()
}

#[test]
fn temperature_transect_does_not_meet_condition() {
    let g = TransectGrid::new(5, 30, Widths::new(5.0, 5.0).unwrap()).unwrap();
    let rep = verify_theorems(&g, &Hyperparams::temperature(), 1, DEFAULT_BUDGET).unwrap();
    assert!(!rep.applicable);
    assert!(rep.reason.unwrap().contains("not applicable"));
    let br = BoundReport::new(BoundParams::new(&Hyperparams::temperature(), &g.widths()), 1, g.horizon());
    assert!(!br.condition_met());
    assert!(br.deltas[1..].iter().any(Option::is_none));
    assert_eq!(br.deltas[0], Some(0.0));
}

#[test]
fn anisotropic_multi_robot_is_flagged() {
    let hyp = Hyperparams::new(0.4, 2.0, 1.0, 0.1).unwrap();
    let rep = verify_theorems(&grid(3, 4), &hyp, 2, DEFAULT_BUDGET).unwrap();
    assert!(!rep.applicable);
    assert!(rep.reason.unwrap().contains("l'1 = l'2"));
    let br = BoundReport::new(BoundParams::new(&hyp, &Widths::new(1.0, 1.0).unwrap()), 2, 2);
    assert_eq!(br.multi_robot_condition, Some(false));
}

#[test]
fn theorems_hold_on_small_instances() {
    for (r, k, hyp) in [
        (3, 1, Hyperparams::new(0.6, 1.5, 1.0, 0.05).unwrap()),
        (4, 1, Hyperparams::new(0.7, 0.8, 2.0, 0.5).unwrap()),
        (4, 2, Hyperparams::new(0.35, 0.35, 1.0, 0.2).unwrap()),
    ] {
        let g = grid(r, 5);
        let rep = verify_theorems(&g, &hyp, k, DEFAULT_BUDGET).unwrap();
        assert!(rep.applicable, "{:?}", rep.reason);
        assert!(rep.all_hold(), "{:?}", rep.verdicts);
        assert_eq!(rep.epsilons.len(), g.horizon() + 1);
        let policy = plan_markov(&g, &hyp, k).unwrap();
        for v in &rep.verdicts {
            assert!(v.optimal_value <= v.markov_value + 1e-9);
            let rolled = path_entropy(&policy.rollout(&v.start).unwrap(), &g, &hyp).unwrap();
            assert!(rolled >= v.markov_value - v.epsilon0 - 1e-9);
        }
    }
}

#[test]
fn verification_respects_budget() {
    let hyp = Hyperparams::new(0.5, 1.0, 1.0, 0.1).unwrap();
    assert!(verify_theorems(&grid(3, 6), &hyp, 1, 10).is_err());
}

#[test]
fn ordering_single_robot_campaign_reports_every_trial() {
    let hyp = Hyperparams::new(0.8, 1.2, 1.0, 0.1).unwrap();
    let rep = check_ordering(&grid(4, 6), &hyp, 1, 100, 7).unwrap();
    assert_eq!(rep.trials, 100);
    assert!(rep.comparisons > 0);
    for v in &rep.violations {
        assert!(v.lhs > v.rhs);
        assert!(v.history.len() >= 2);
    }
    let again = check_ordering(&grid(4, 6), &hyp, 1, 100, 7).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn markov_gap_vanishes_without_past() {
    let hyp = Hyperparams::new(0.8, 1.2, 1.0, 0.1).unwrap();
    let m = GpModel::new(hyp, Widths::new(1.0, 1.0).unwrap());
    let x = RobotConfig::new(vec![1], 3).unwrap();
    let gap = markov_gap(&m, std::slice::from_ref(&x), &x).unwrap();
    assert_eq!(gap.mutual_info, 0.0);
    assert!(gap.variance_reduction.unwrap().abs() < 1e-15);
    let two = RobotConfig::new(vec![0, 2], 3).unwrap();
    assert!(markov_gap(&m, &[two.clone(), two.clone()], &two).unwrap().variance_reduction.is_none());
}

#[test]
fn gap_within_delta_along_a_straight_track() {
    let hyp = Hyperparams::new(0.45, 1.0, 1.0, 0.2).unwrap();
    let w = Widths::new(1.0, 1.0).unwrap();
    let p = BoundParams::new(&hyp, &w);
    let m = GpModel::new(hyp, w);
    let x = RobotConfig::new(vec![0], 1).unwrap();
    for i in 1..6 {
        let history = vec![x.clone(); i + 1];
        let gap = markov_gap(&m, &history, &x).unwrap();
        assert!(gap.mutual_info <= delta(i, &p).unwrap() + 1e-12);
    }
    let e = epsilon(0, 5, &p, 1).unwrap();
    assert!(e.sum.is_finite() && e.sum <= e.loose);
}
