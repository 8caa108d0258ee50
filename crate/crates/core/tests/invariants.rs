use nalgebra::DMatrix;
use proptest::prelude::*;

use transect_core::bounds::{delta, delta_k, epsilon, BoundParams};
use transect_core::field_io::{format_csv, parse_csv};
use transect_core::gp::{GpModel, Hyperparams, Location, Widths};
use transect_core::metrics::{ent_metric, err_metric, unobserved};
use transect_core::planners::{path_entropy, stage_entropies};
use transect_core::transect::{enumerate_configs, ObservationPath, RobotConfig, TransectGrid};

fn hyp() -> impl Strategy<Value = Hyperparams> {
    (0.3f64..5.0, 0.3f64..5.0, 0.2f64..3.0, 0.001f64..0.5)
        .prop_map(|(a, b, s, n)| Hyperparams::new(a, b, s, n).unwrap())
}

fn widths() -> impl Strategy<Value = Widths> {
    (0.5f64..6.0, 0.5f64..6.0).prop_map(|(a, b)| Widths::new(a, b).unwrap())
}

fn loc(cols: usize, rows: usize) -> impl Strategy<Value = Location> {
    (0..cols, 0..rows).prop_map(|(c, r)| Location::new(c, r))
}

/// Distinct locations from a `6 × 4` window.
fn distinct_locs(n: usize) -> impl Strategy<Value = Vec<Location>> {
    Just((0..6).flat_map(|c| (0..4).map(move |r| Location::new(c, r))).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(move |v| v[..n].to_vec())
}

fn bound_params() -> impl Strategy<Value = BoundParams> {
    (0.01f64..0.99, 1.0f64..4.0).prop_map(|(xi, rho)| {
        let ell = (-1.0 / (2.0 * xi.ln())).sqrt();
        BoundParams { xi, rho, ell1_norm: ell, ell2_norm: ell, signal_var: 1.0 }
    })
}

fn path_on(r: usize, c: usize, k: usize) -> impl Strategy<Value = ObservationPath> {
    let configs = enumerate_configs(r, k).unwrap();
    let n = configs.len();
    proptest::collection::vec(0..n, c)
        .prop_map(move |idx| ObservationPath::new(idx.iter().map(|&i| configs[i].clone()).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_symmetric_and_stationary(h in hyp(), w in widths(), u in loc(8, 5), v in loc(8, 5), dc in 0usize..4, dr in 0usize..3) {
        let m = GpModel::new(h, w);
        prop_assert_eq!(m.covariance(u, v), m.covariance(v, u));
        let shift = |l: Location| Location::new(l.col + dc, l.row + dr);
        prop_assert!((m.covariance(u, v) - m.covariance(shift(u), shift(v))).abs() <= 1e-15);
        prop_assert!(m.covariance(u, v) <= m.prior_var());
    }

    #[test]
    fn chain_rule_over_any_ordering(h in hyp(), cells in distinct_locs(9), a in 1usize..=5, perm_seed in any::<u64>()) {
        let m = GpModel::new(h, Widths::new(1.0, 1.0).unwrap());
        let (targets, given) = cells.split_at(a);
        let joint = m.conditional_entropy(targets, given).unwrap();
        let mut order: Vec<Location> = targets.to_vec();
        let n = order.len();
        for j in (1..n).rev() {
            order.swap(j, (perm_seed as usize).wrapping_mul(31 + j) % (j + 1));
        }
        let mut cond = given.to_vec();
        let mut sum = 0.0;
        for t in &order {
            sum += m.conditional_entropy(std::slice::from_ref(t), &cond).unwrap();
            cond.push(*t);
        }
        prop_assert!((joint - sum).abs() <= 1e-9, "{} vs {}", joint, sum);
    }

    #[test]
    fn conditioning_never_adds_information(h in hyp(), cells in distinct_locs(10), a in 1usize..=4, b in 0usize..=3) {
        let m = GpModel::new(h, Widths::new(1.0, 1.0).unwrap());
        let targets = &cells[..a];
        let few = &cells[a..a + b];
        let many = &cells[a..];
        let h_few = m.conditional_entropy(targets, few).unwrap();
        let h_many = m.conditional_entropy(targets, many).unwrap();
        prop_assert!(h_many <= h_few + 1e-9);
    }

    #[test]
    fn conditional_mutual_info_nonnegative(h in hyp(), cells in distinct_locs(7)) {
        let m = GpModel::new(h, Widths::new(1.0, 1.0).unwrap());
        let mi = m.cond_mutual_info(&cells[..2], &cells[2..4], &cells[4..]).unwrap();
        prop_assert!(mi >= 0.0);
    }

    #[test]
    fn delta_nondecreasing_in_stage(p in bound_params(), t in 1usize..10) {
        let vals: Vec<f64> = (0..=t).map_while(|i| delta(i, &p).ok()).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{:?}", vals);
    }

    #[test]
    fn delta_k_nondecreasing_in_robots(p in bound_params(), i in 1usize..5) {
        let vals: Vec<f64> = (1..=4).map_while(|k| delta_k(i, k, &p).ok()).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{:?}", vals);
    }

    #[test]
    fn epsilon_below_loose_bound(p in bound_params(), t in 0usize..10, k in 1usize..3) {
        for i in 0..=t {
            if let Ok(e) = epsilon(i, t, &p, k) {
                prop_assert!(e.sum <= e.loose);
                prop_assert!(e.sum >= 0.0);
            }
        }
    }

    #[test]
    fn path_entropy_is_stagewise_sum(h in hyp(), path in path_on(4, 6, 2)) {
        let g = TransectGrid::new(4, 6, Widths::new(1.0, 1.0).unwrap()).unwrap();
        let joint = path_entropy(&path, &g, &h).unwrap();
        let staged: f64 = stage_entropies(&path, &g, &h).unwrap().iter().sum();
        prop_assert!((joint - staged).abs() <= 1e-9);
    }

    #[test]
    fn more_samples_never_raise_ent_of_common_cells(h in hyp(), path in path_on(4, 5, 1), extra in proptest::collection::vec(0usize..4, 5)) {
        let g = TransectGrid::new(4, 5, Widths::new(1.0, 1.0).unwrap()).unwrap();
        let m = GpModel::new(h, g.widths());
        // Second robot added on a distinct row of every column.
        let bigger = ObservationPath::new(
            path.configs()
                .iter()
                .zip(&extra)
                .map(|(c, &e)| {
                    let r = c.rows()[0];
                    let other = if e == r { (e + 1) % 4 } else { e };
                    RobotConfig::new(vec![r, other], 4).unwrap()
                })
                .collect(),
        )
        .unwrap();
        let common = unobserved(&bigger, &g);
        let h_small = m.conditional_entropy(&common, &path.locations()).unwrap();
        let h_big = m.conditional_entropy(&common, &bigger.locations()).unwrap();
        prop_assert!(h_big <= h_small + 1e-9);
        prop_assert!(ent_metric(&bigger, &g, &h).is_ok());
    }

    #[test]
    fn err_ignores_robot_labels(h in hyp(), rows in proptest::collection::vec((0usize..5, 0usize..5), 4), seed in 0u64..1000) {
        let g = TransectGrid::new(5, 4, Widths::new(1.0, 1.0).unwrap()).unwrap();
        let z = transect_core::gp::sample_prior_field(&g, &h, 10.0, seed).unwrap();
        let g = g.with_measurements(z).unwrap();
        let pairs: Vec<(usize, usize)> = rows.iter().map(|&(a, b)| if a == b { (a, (b + 1) % 5) } else { (a, b) }).collect();
        let p1 = ObservationPath::new(pairs.iter().map(|&(a, b)| RobotConfig::new(vec![a, b], 5).unwrap()).collect()).unwrap();
        let p2 = ObservationPath::new(pairs.iter().map(|&(a, b)| RobotConfig::new(vec![b, a], 5).unwrap()).collect()).unwrap();
        prop_assert_eq!(err_metric(&p1, &g, &h, 10.0).unwrap(), err_metric(&p2, &g, &h, 10.0).unwrap());
    }

    #[test]
    fn field_csv_round_trips_bit_exact(vals in proptest::collection::vec(-1e6f64..1e6, 12), tiny in -1e-300f64..1e-300) {
        let mut vals = vals;
        vals[0] = tiny;
        let z = DMatrix::from_row_slice(3, 4, &vals);
        let back = parse_csv(&format_csv(&z).unwrap()).unwrap();
        prop_assert!(z.iter().zip(back.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
