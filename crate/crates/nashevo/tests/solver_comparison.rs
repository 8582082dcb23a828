//! Paired comparison of plain and hybrid PSO on one LQ instance: iterations
//! until every player's cost sits within tolerance of the oracle costs.
//! The comparison is recorded, not asserted: local refinement usually helps,
//! but the contract is convergence, not a speed ranking.

use nashevo::game::lq::LqGameSpec;
use nashevo::{lq_openloop_nash, run_pso, PsoConfig, SearchSpace};

fn iterations_to_tolerance(
    trace: &[nashevo::TraceRow<f64>],
    oracle_costs: &[f64],
    tol: f64,
) -> Option<usize> {
    let players = oracle_costs.len();
    let mut per_iter: Vec<Vec<f64>> = Vec::new();
    for row in trace {
        if row.player == 0 {
            per_iter.push(vec![f64::NAN; players]);
        }
        per_iter.last_mut().unwrap()[row.player] = row.best_cost;
    }
    per_iter
        .iter()
        .position(|costs| {
            costs
                .iter()
                .zip(oracle_costs.iter())
                .all(|(c, o)| (c - o).abs() <= tol)
        })
        .map(|g| g + 1)
}

#[test]
fn hybrid_refinement_comparison_is_recorded() {
    let spec = LqGameSpec::<f64>::random_strictly_convex(2, 3, 3);
    let game = spec.build().unwrap();
    let space = SearchSpace::open_loop(&game);
    let oracle = lq_openloop_nash(&spec).unwrap();
    let oracle_costs = game.evaluate_all_costs(&oracle).unwrap();

    let mut medians = Vec::new();
    for hybrid_iter in [0usize, 20] {
        let mut hits: Vec<usize> = Vec::new();
        for seed in 0..10u64 {
            let config = PsoConfig {
                t_max: 600,
                hybrid_iter,
                stall_window: 0,
                rng_seed: seed,
                ..PsoConfig::default()
            };
            let result = run_pso(&game, &space, &config).unwrap();
            let hit = iterations_to_tolerance(&result.trace, &oracle_costs, 1e-3)
                .unwrap_or(config.t_max + 1);
            hits.push(hit);
        }
        hits.sort_unstable();
        let median = hits[hits.len() / 2];
        medians.push((hybrid_iter, median, hits.clone()));
    }

    let (_, plain_median, plain_hits) = &medians[0];
    let (_, hybrid_median, hybrid_hits) = &medians[1];
    println!(
        "iterations to cost tolerance 1e-3 over 10 seeds: \
         plain PSO median {plain_median} {plain_hits:?}, \
         hybrid PSO median {hybrid_median} {hybrid_hits:?} \
         (hybrid faster or equal: {})",
        hybrid_median <= plain_median
    );
}
