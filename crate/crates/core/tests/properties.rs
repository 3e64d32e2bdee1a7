mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use greedy_is::auxweight::{
    block_alphas, default_tree_cap, verify_alpha_tree, weigh_block, SearchConfig,
};
use greedy_is::baselines::{hamiltonian, leapfrog};
use greedy_is::bench::{summarize, ScenarioStats};
use greedy_is::estimators::{
    generalized_is, gis_estimate_grid, is_estimate, singleton_blocks, WeightMode,
};
use greedy_is::model::{
    make_discretized_gaussian, make_gaussian, GridDistribution, GridDomain, GridPoint,
    LatticePoint, Offset, Proposal,
};
use greedy_is::search::{build_block, greedy_successor, GridWalk, LatticeWalk, Walk};

use common::block_is_valid;

fn grid_table(side: i64, weights: &[f64]) -> (GridDomain, GridDistribution) {
    let d = GridDomain::cube(2, 0, side - 1).unwrap();
    let p = GridDistribution::from_weights(d.clone(), weights).unwrap();
    (d, p)
}

fn weights(side: usize) -> impl Strategy<Value = Vec<f64>> {
    // Coarse levels so ties and plateaus actually occur.
    prop::collection::vec((1u32..6).prop_map(f64::from), side * side)
}

fn one(_: &GridPoint) -> f64 {
    1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn grid_blocks_ascend_without_revisits(w in weights(5), m in 1usize..12, start in 0usize..25) {
        let (d, p) = grid_table(5, &w);
        let walk = GridWalk::new(&d, &p, &one);
        let block = build_block(&walk, d.point(start), m).unwrap();
        prop_assert!(block_is_valid(&block, m));
    }

    #[test]
    fn lattice_blocks_ascend_without_revisits(
        x in prop::collection::vec(-8.0f64..8.0, 3),
        eps in 0.2f64..1.5,
    ) {
        let p = make_gaussian(3, 0.5, 2.0).unwrap();
        let f = |x: &[f64]| x[0] * x[0] + 0.1;
        let walk = LatticeWalk::new(&p, &f);
        let block = build_block(&walk, LatticePoint::origin(x.into(), eps), 30).unwrap();
        prop_assert!(block_is_valid(&block, 30));
    }

    #[test]
    fn blocks_are_deterministic(w in weights(4), start in 0usize..16) {
        let (d, p) = grid_table(4, &w);
        let walk = GridWalk::new(&d, &p, &one);
        let cfg = SearchConfig::new(1.3, 6, 1.0).unwrap();
        let a = weigh_block(&walk, d.point(start), &cfg).unwrap();
        let b = weigh_block(&walk, d.point(start), &cfg).unwrap();
        prop_assert_eq!(a.block, b.block);
        prop_assert_eq!(a.alphas, b.alphas);
    }

    #[test]
    fn lattice_steps_close(
        x in prop::collection::vec(-5.0f64..5.0, 1..5),
        offs in prop::collection::vec(-20i32..20, 4),
        eps in 0.1f64..2.0,
    ) {
        let f = |_: &[f64]| 1.0;
        let p = make_gaussian(x.len(), 0.0, 1.0).unwrap();
        let walk = LatticeWalk::new(&p, &f);
        let origin = LatticePoint::origin(x.clone().into(), eps);
        let start = origin.with_offset(Offset::from_slice(&offs[..x.len()]));
        let nbrs = walk.neighbors(&start);
        prop_assert_eq!(nbrs.len(), 2 * x.len());
        for y in &nbrs {
            prop_assert!(walk.neighbors(y).contains(&start));
            prop_assert!(*y != start);
        }
        let rebuilt = LatticePoint::origin(Arc::from(x.as_slice()), eps)
            .with_offset(start.offset.clone());
        prop_assert_eq!(rebuilt, start);
    }

    #[test]
    fn argmax_ignores_rescaling(w in weights(4), c in 1e-3f64..1e3, start in 0usize..16) {
        let (d, p) = grid_table(4, &w);
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let (_, ps) = grid_table(4, &scaled);
        let x = d.point(start);
        let a = greedy_successor(&GridWalk::new(&d, &p, &one), &x).unwrap();
        let b = greedy_successor(&GridWalk::new(&d, &ps, &one), &x).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn proposals_are_positive_on_the_grid(var in 0.05f64..100.0, mu in -3.0f64..3.0) {
        let d = GridDomain::cube(2, -10, 10).unwrap();
        let q = make_discretized_gaussian(d.clone(), &[mu, -mu], &[var, var]).unwrap();
        // Far tails underflow as plain densities; positivity is a finite log.
        for x in d.points() {
            prop_assert!(Proposal::log_density(&q, &x).is_finite());
        }
    }

    #[test]
    fn alphas_lie_in_unit_interval(
        branch in prop::collection::vec(1usize..5, 1..8),
        start_zero in any::<bool>(),
        b in 0.2f64..4.0,
    ) {
        let mut branch = branch;
        if start_zero {
            branch[0] = 0;
        }
        let cfg = SearchConfig::new(b, branch.len(), 1.0).unwrap();
        for a in block_alphas(&branch, &cfg).unwrap() {
            prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn random_grids_satisfy_the_alpha_constraint(w in weights(4), b in 0.5f64..3.0, m in 1usize..5) {
        let (d, p) = grid_table(4, &w);
        let walk = GridWalk::new(&d, &p, &one);
        let cfg = SearchConfig::new(b, m, 1.0).unwrap();
        for x in d.points() {
            let tree = verify_alpha_tree(&walk, &x, &cfg, default_tree_cap(2, m)).unwrap();
            prop_assert!((tree.total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_blocks_reduce_to_plain_is(seed in any::<u64>(), direct in any::<bool>()) {
        let mode = if direct { WeightMode::Direct } else { WeightMode::Indirect };
        let d = GridDomain::cube(2, -4, 4).unwrap();
        let p = make_discretized_gaussian(d.clone(), &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let q = make_discretized_gaussian(d.clone(), &[0.0, 0.0], &[9.0, 9.0]).unwrap();
        let f = |x: &GridPoint| (x.coords[0] * x.coords[0]) as f64;
        let cfg = SearchConfig::new(0.5, 1, 1.0).unwrap();
        let is = is_estimate(&p, &q, &f, 50, &mut ChaCha8Rng::seed_from_u64(seed), mode).unwrap();
        let gis =
            gis_estimate_grid(&d, &p, &q, &f, &cfg, 50, &mut ChaCha8Rng::seed_from_u64(seed), mode)
                .unwrap();
        let gen = generalized_is(
            &p, &q, &f, singleton_blocks, 50, &mut ChaCha8Rng::seed_from_u64(seed), mode,
        )
        .unwrap();
        prop_assert_eq!(is.estimate.to_bits(), gis.estimate.to_bits());
        prop_assert_eq!(is.estimate.to_bits(), gen.estimate.to_bits());
    }

    #[test]
    fn summary_identity(est in prop::collection::vec(-1e3f64..1e3, 1..50), truth in -1e3f64..1e3) {
        let (mean, bias, stdev, rmse) = summarize(&est, truth).unwrap();
        let row = ScenarioStats {
            scenario: "x".into(),
            method: "is".into(),
            n_dim: 1,
            t: 1,
            reps: est.len(),
            seed: 0,
            truth,
            mean,
            bias,
            stdev,
            rmse,
        };
        prop_assert!(row.identity_holds(), "residual {}", row.identity_residual());
        prop_assert!(bias >= 0.0 && stdev >= 0.0);
    }

    #[test]
    fn leapfrog_is_reversible(
        x in prop::collection::vec(-3.0f64..3.0, 1..5),
        mom in prop::collection::vec(-2.0f64..2.0, 4),
        step in 0.01f64..0.3,
        leaps in 1usize..40,
    ) {
        let target = make_gaussian(x.len(), 0.3, 1.7).unwrap();
        let p0 = &mom[..x.len()];
        let (x1, p1) = leapfrog(&target, &x, p0, step, leaps).unwrap();
        let back: Vec<f64> = p1.iter().map(|v| -v).collect();
        let (x2, p2) = leapfrog(&target, &x1, &back, step, leaps).unwrap();
        for k in 0..x.len() {
            prop_assert!((x2[k] - x[k]).abs() < 1e-9);
            prop_assert!((p2[k] + p0[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn leapfrog_energy_error_is_second_order() {
    let target = make_gaussian(3, 0.0, 1.0).unwrap();
    let x = [1.0, -0.5, 0.3];
    let p = [0.2, 0.9, -1.1];
    let h0 = hamiltonian(&target, &x, &p);
    let drift = |step: f64| {
        let leaps = (1.0 / step).round() as usize;
        let (x1, p1) = leapfrog(&target, &x, &p, step, leaps).unwrap();
        (hamiltonian(&target, &x1, &p1) - h0).abs()
    };
    let ratio = drift(0.1) / drift(0.05);
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}
