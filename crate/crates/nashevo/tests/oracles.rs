//! Oracle cross-checks: the analytic first-order-condition solution against
//! independent evaluation-based reconstructions, and the evolutionary solvers
//! against the exact LQ equilibrium.

use nashevo::game::lq::LqGameSpec;
use nashevo::{
    lq_openloop_nash, run_ga, run_pso, EncodingScheme, GaConfig, PsoConfig, SearchSpace,
};

/// Plain Gaussian elimination written independently of the crate's solver.
fn gauss_solve(a: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        b.swap(col, pivot);
        assert!(m[col][col].abs() > 1e-12, "singular test system");
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in (col + 1)..n {
            acc -= m[col][c] * x[c];
        }
        x[col] = acc / m[col][col];
    }
    x
}

/// Reconstruct the quadratic form J(u) = 1/2 u'Au + b'u + c by evaluation.
fn reconstruct_quadratic(
    f: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    h: f64,
) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let zero = vec![0.0; dim];
    let c = f(&zero);
    let mut b = vec![0.0; dim];
    let mut a = vec![vec![0.0; dim]; dim];
    let unit = |i: usize, s: f64| {
        let mut v = vec![0.0; dim];
        v[i] = s;
        v
    };
    for i in 0..dim {
        let up = f(&unit(i, h));
        let down = f(&unit(i, -h));
        b[i] = (up - down) / (2.0 * h);
        a[i][i] = (up + down - 2.0 * c) / (h * h);
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut v = vec![0.0; dim];
            v[i] = h;
            v[j] = h;
            let cross = (f(&v) - f(&unit(i, h)) - f(&unit(j, h)) + c) / (h * h);
            a[i][j] = cross;
            a[j][i] = cross;
        }
    }
    (a, b, c)
}

fn open_loop_vector(space: &SearchSpace<f64>, profile: &nashevo::StrategyProfile<f64>) -> Vec<f64> {
    space.vector_from(profile).unwrap()
}

#[test]
fn lq_cost_equals_its_reconstructed_quadratic_form() {
    let spec = LqGameSpec::<f64>::random_strictly_convex(1, 3, 17);
    let game = spec.build().unwrap();
    let space = SearchSpace::open_loop(&game);
    let dim = space.total_dim();
    let f = |u: &[f64]| game.evaluate_cost(&space.profile_from(u), 0).unwrap();
    let (a, b, c) = reconstruct_quadratic(&f, dim, 0.5);

    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let u: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut quad = c;
        for i in 0..dim {
            quad += b[i] * u[i];
            for j in 0..dim {
                quad += 0.5 * a[i][j] * u[i] * u[j];
            }
        }
        let direct = f(&u);
        assert!(
            (quad - direct).abs() <= 1e-9 * (1.0 + direct.abs()),
            "quadratic form {quad} vs direct {direct}"
        );
    }
}

#[test]
fn single_player_oracle_matches_independent_least_squares() {
    for seed in [5u64, 23, 91] {
        let spec = LqGameSpec::<f64>::random_strictly_convex(1, 3, seed);
        let game = spec.build().unwrap();
        let space = SearchSpace::open_loop(&game);
        let dim = space.total_dim();
        let f = |u: &[f64]| game.evaluate_cost(&space.profile_from(u), 0).unwrap();
        let (a, b, _) = reconstruct_quadratic(&f, dim, 0.5);
        let neg_b: Vec<f64> = b.iter().map(|x| -x).collect();
        let independent = gauss_solve(&a, &neg_b);

        let oracle = lq_openloop_nash(&spec).unwrap();
        let oracle_vec = open_loop_vector(&space, &oracle);
        for (x, y) in independent.iter().zip(oracle_vec.iter()) {
            assert!((x - y).abs() < 1e-8, "independent {x} vs oracle {y} (seed {seed})");
        }
    }
}

#[test]
fn two_player_oracle_satisfies_reconstructed_stationarity() {
    // For each player, the gradient of its reconstructed quadratic in its own
    // controls must vanish at the oracle point.
    for seed in [2u64, 14] {
        let spec = LqGameSpec::<f64>::random_strictly_convex(2, 3, seed);
        let game = spec.build().unwrap();
        let space = SearchSpace::open_loop(&game);
        let oracle = lq_openloop_nash(&spec).unwrap();
        let joint = open_loop_vector(&space, &oracle);
        for player in 0..2 {
            let range = space.player_slice(player);
            let slice_dim = range.len();
            let f = |own: &[f64]| {
                let mut v = joint.clone();
                v[range.clone()].copy_from_slice(own);
                game.evaluate_cost(&space.profile_from(&v), player).unwrap()
            };
            let (a, b, _) = reconstruct_quadratic(&f, slice_dim, 0.25);
            let own = &joint[range.clone()];
            for i in 0..slice_dim {
                let grad_i =
                    b[i] + (0..slice_dim).map(|j| a[i][j] * own[j]).sum::<f64>();
                assert!(
                    grad_i.abs() < 1e-7,
                    "seed {seed} player {player} grad[{i}] = {grad_i}"
                );
            }
        }
    }
}

#[test]
fn ga_reaches_the_oracle_on_a_random_instance() {
    let spec = LqGameSpec::<f64>::random_strictly_convex(2, 3, 101);
    let game = spec.build().unwrap();
    let space = SearchSpace::open_loop(&game);
    let scheme = EncodingScheme::for_space(4, 1, &space).unwrap();
    let config = GaConfig { max_generations: 1200, rng_seed: 1, ..GaConfig::default() };
    let result = run_ga(&game, &space, &scheme, &config).unwrap();
    let oracle = lq_openloop_nash(&spec).unwrap();
    let got = open_loop_vector(&space, &result.profile);
    let want = open_loop_vector(&space, &oracle);
    for (g, w) in got.iter().zip(want.iter()) {
        assert!((g - w).abs() <= 1e-2, "GA {g} vs oracle {w}");
    }
}

#[test]
fn pso_reaches_the_oracle_on_a_random_instance() {
    let spec = LqGameSpec::<f64>::random_strictly_convex(2, 3, 101);
    let game = spec.build().unwrap();
    let space = SearchSpace::open_loop(&game);
    let config = PsoConfig { t_max: 1200, rng_seed: 1, ..PsoConfig::default() };
    let result = run_pso(&game, &space, &config).unwrap();
    let oracle = lq_openloop_nash(&spec).unwrap();
    let got = open_loop_vector(&space, &result.profile);
    let want = open_loop_vector(&space, &oracle);
    for (g, w) in got.iter().zip(want.iter()) {
        assert!((g - w).abs() <= 1e-2, "PSO {g} vs oracle {w}");
    }
}
