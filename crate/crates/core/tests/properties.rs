//! Property tests for the optimizers, the synthetic data model, the oracles
//! and the tuning schedule.

use proptest::prelude::*;

use optlab_core::lsq::{
    self, generate_synthetic, gradient, private_block_start, private_block_width, Dataset,
};
use optlab_core::optim::{init_state, step_coefficients, trajectory, MethodKind, OptimizerSpec};
use optlab_core::oracle::{
    kernel_matrix, min_norm_solution, sign_condition_check, sign_solution, synthetic_alphas, xty,
};
use optlab_core::train::{train, TrainOptions};
use optlab_core::tune::{extend_if_edge, make_log_grid, next_alpha, DecayPolicy, Direction};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// `f(w) = 1/2 w^T A w - b^T w` with `A = M^T M + I`.
#[derive(Debug, Clone)]
struct Quadratic {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Quadratic {
    fn grad(&self, w: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| row.iter().zip(w).map(|(a, x)| a * x).sum::<f64>() - bi)
            .collect()
    }
}

fn quadratic(dim: usize) -> impl Strategy<Value = Quadratic> {
    (
        prop::collection::vec(-1.0..1.0f64, dim * dim),
        prop::collection::vec(-1.0..1.0f64, dim),
    )
        .prop_map(move |(m, b)| {
            let mut a = vec![vec![0.0; dim]; dim];
            for i in 0..dim {
                for j in 0..dim {
                    a[i][j] = (0..dim)
                        .map(|k| m[k * dim + i] * m[k * dim + j])
                        .sum::<f64>();
                }
                a[i][i] += 1.0;
            }
            Quadratic { a, b }
        })
}

fn synthetic_from(min_n: usize) -> impl Strategy<Value = Dataset> {
    (min_n..40, 0.55..0.95f64, any::<u64>())
        .prop_map(|(n, p, seed)| generate_synthetic(n, p, seed).unwrap())
}

fn synthetic() -> impl Strategy<Value = Dataset> {
    synthetic_from(1)
}

/// Dense random least-squares problem with fewer rows than columns.
fn wide_problem() -> impl Strategy<Value = Dataset> {
    (2usize..6, 6usize..12).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, d), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(x, y)| {
                let y = y.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect();
                Dataset::from_dense(&x, y).unwrap()
            })
    })
}

fn textbook(method: MethodKind, q: &Quadratic, alpha: f64, iters: usize) -> Vec<f64> {
    let dim = q.b.len();
    let (beta, eps) = (0.9, 1e-8);
    let mut w = vec![0.0; dim];
    let mut prev = w.clone();
    let mut accum = vec![0.0; dim];
    for _ in 0..iters {
        let next: Vec<f64> = match method {
            MethodKind::Sgd => {
                let g = q.grad(&w);
                (0..dim).map(|j| w[j] - alpha * g[j]).collect()
            }
            MethodKind::Hb => {
                let g = q.grad(&w);
                (0..dim)
                    .map(|j| w[j] - alpha * g[j] + beta * (w[j] - prev[j]))
                    .collect()
            }
            MethodKind::Nag => {
                let look: Vec<f64> = (0..dim).map(|j| w[j] + beta * (w[j] - prev[j])).collect();
                let g = q.grad(&look);
                (0..dim).map(|j| look[j] - alpha * g[j]).collect()
            }
            MethodKind::AdaGrad => {
                let g = q.grad(&w);
                (0..dim)
                    .map(|j| {
                        accum[j] += g[j] * g[j];
                        w[j] - alpha * g[j] / (accum[j].sqrt() + eps)
                    })
                    .collect()
            }
            _ => unreachable!(),
        };
        prev = std::mem::replace(&mut w, next);
    }
    w
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn unified_update_matches_textbook_methods(
        q in quadratic(10),
        alpha in 0.005..0.05f64,
        which in 0usize..4,
    ) {
        let method = [MethodKind::Sgd, MethodKind::Hb, MethodKind::Nag, MethodKind::AdaGrad][which];
        let spec = OptimizerSpec::new(method, alpha);
        let iters = 30;
        let ours = trajectory(&spec, &[0.0; 10], |w| q.grad(w), iters).unwrap();
        let theirs = textbook(method, &q, alpha, iters);
        let last = &ours[iters];
        let scale = 1.0 + lsq::l2_norm(&theirs);
        for (a, b) in last.iter().zip(&theirs) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{method}: {a} vs {b}");
        }
    }

    #[test]
    fn non_adaptive_iterates_stay_in_the_row_span(
        ds in wide_problem(),
        which in 0usize..3,
    ) {
        let method = [MethodKind::Sgd, MethodKind::Hb, MethodKind::Nag][which];
        let spec = OptimizerSpec::new(method, 0.01);
        let ws = trajectory(&spec, &vec![0.0; ds.d()], |w| gradient(&ds, w).unwrap(), 50).unwrap();
        let space = lsq::RowSpace::new(&ds);
        for w in &ws {
            prop_assert!(space.residual(w).unwrap() <= 1e-8 * (1.0 + lsq::l2_norm(w)));
        }
    }

    #[test]
    fn first_adaptive_step_is_a_scaled_sign(
        ds in synthetic(),
        alpha in 1e-3..1.0f64,
        which in 0usize..3,
    ) {
        let method = [MethodKind::AdaGrad, MethodKind::RmsProp, MethodKind::Adam][which];
        let spec = OptimizerSpec::new(method, alpha).with_epsilon(0.0);
        let c = step_coefficients(&spec, 1).unwrap();
        let g0 = gradient(&ds, &vec![0.0; ds.d()]).unwrap();
        let w1 = &trajectory(&spec, &vec![0.0; ds.d()], |w| gradient(&ds, w).unwrap(), 1).unwrap()[1];
        let mag = c.alpha_k / c.g_new.sqrt();
        for (wj, gj) in w1.iter().zip(&g0) {
            let expected = -mag * gj.signum() * if *gj == 0.0 { 0.0 } else { 1.0 };
            prop_assert!((wj - expected).abs() <= 1e-14 * mag);
        }
    }

    #[test]
    fn adagrad_accumulator_never_shrinks(q in quadratic(6), alpha in 0.01..0.5f64) {
        let spec = OptimizerSpec::new(MethodKind::AdaGrad, alpha);
        let mut state = init_state(&spec, &[0.0; 6]);
        let mut prev = state.g_accum();
        for _ in 0..40 {
            state.advance(&spec, |w| q.grad(w), None).unwrap();
            let now = state.g_accum();
            prop_assert!(now.iter().zip(&prev).all(|(a, b)| a >= b));
            prev = now;
        }
    }

    #[test]
    fn generated_rows_follow_the_template(ds in synthetic()) {
        prop_assert_eq!(ds.d(), 3 + 5 * ds.n());
        prop_assert!(ds.label_sum() > 0);
        for (i, (row, &y)) in ds.rows().iter().zip(ds.labels()).enumerate() {
            let start = private_block_start(i);
            let mut expected = vec![(0, y), (1, 1.0), (2, 1.0)];
            expected.extend((start..start + private_block_width(y)).map(|j| (j, 1.0)));
            prop_assert_eq!(row, &expected);
        }
    }

    #[test]
    fn generation_is_deterministic(n in 1usize..30, p in 0.55..0.95f64, seed in any::<u64>()) {
        let a = generate_synthetic(n, p, seed).unwrap();
        let b = generate_synthetic(n, p, seed).unwrap();
        prop_assert_eq!(a.to_document(), b.to_document());
    }

    #[test]
    fn xty_has_the_sign_structure(ds in synthetic()) {
        let u = xty(&ds);
        prop_assert_eq!(u[0], ds.n() as f64);
        prop_assert_eq!(u[1], ds.label_sum() as f64);
        prop_assert_eq!(u[2], ds.label_sum() as f64);
        prop_assert_eq!(sign_condition_check(&ds), Some(4.0));
        let s = sign_solution(&ds).unwrap();
        let xw = ds.matvec(&s.w).unwrap();
        for (a, y) in xw.iter().zip(ds.labels()) {
            prop_assert!((a - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn gradient_lies_in_the_row_span(ds in synthetic(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..ds.d()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = gradient(&ds, &w).unwrap();
        let r = lsq::row_span_residual(&ds, &g).unwrap();
        prop_assert!(r <= 1e-9 * (1.0 + lsq::l2_norm(&g)));
    }

    #[test]
    fn small_steps_never_increase_the_loss(ds in synthetic()) {
        // L <= 2 * trace(XX^T) <= 2 * 8n bounds the Hessian; 1/L is safe
        let alpha = 1.0 / (16.0 * ds.n() as f64);
        let spec = OptimizerSpec::new(MethodKind::Sgd, alpha);
        let ws = trajectory(&spec, &vec![0.0; ds.d()], |w| gradient(&ds, w).unwrap(), 50).unwrap();
        let losses: Vec<f64> = ws.iter().map(|w| lsq::loss(&ds, w).unwrap()).collect();
        prop_assert!(losses.windows(2).all(|l| l[1] <= l[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn closed_form_alphas_match_the_kernel_solve(ds in synthetic()) {
        let mn = min_norm_solution(&ds).unwrap();
        let (ap, am) = synthetic_alphas(ds.n_pos(), ds.n_neg());
        for (a, y) in mn.coefficients.unwrap().iter().zip(ds.labels()) {
            let expected = if *y > 0.0 { ap } else { -am };
            prop_assert!((a - expected).abs() <= 1e-10);
        }
    }

    #[test]
    fn kernel_entries_are_integers_from_the_case_table(ds in synthetic()) {
        let k = kernel_matrix(&ds);
        let y = ds.labels();
        for i in 0..ds.n() {
            for j in 0..ds.n() {
                let expected = match (i == j, y[i] > 0.0, y[i] == y[j]) {
                    (true, true, _) => 4.0,
                    (true, false, _) => 8.0,
                    (false, _, true) => 3.0,
                    (false, _, false) => 1.0,
                };
                prop_assert_eq!(k[(i, j)], expected);
            }
        }
    }

    #[test]
    // with one or two examples the two solutions can coincide
    fn the_two_oracles_point_in_different_directions(ds in synthetic_from(3)) {
        let a = min_norm_solution(&ds).unwrap().w;
        let b = sign_solution(&ds).unwrap().w;
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let cos = dot / (lsq::l2_norm(&a) * lsq::l2_norm(&b));
        prop_assert!(cos < 0.99, "cos = {cos}");
    }

    #[test]
    fn min_norm_margin_is_maximal(ds in synthetic(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mn = min_norm_solution(&ds).unwrap().w;
        let best = lsq::margin(&ds, &mn).unwrap();
        let space = lsq::RowSpace::new(&ds);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            // add a null-space component: still interpolates, larger norm
            let v: Vec<f64> = (0..ds.d()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let proj = space.project(&v).unwrap();
            let w: Vec<f64> = mn.iter().zip(v.iter().zip(&proj)).map(|(m, (a, b))| m + a - b).collect();
            prop_assert!(best >= lsq::margin(&ds, &w).unwrap() - 1e-12);
        }
    }

    #[test]
    fn step_sizes_never_increase_over_epochs(
        metrics in prop::collection::vec(0.0..1.0f64, 1..60),
        which in 0usize..3,
        delta in 0.05..0.95f64,
        period in 1usize..7,
    ) {
        let policy = [
            DecayPolicy::None,
            DecayPolicy::DevDecay { delta },
            DecayPolicy::FixedDecay { delta, period },
        ][which];
        let (mut alpha, mut best) = (1.0, None);
        for (epoch, m) in metrics.iter().enumerate() {
            let (next, b) = next_alpha(&policy, alpha, epoch + 1, *m, best, Direction::LowerIsBetter);
            prop_assert!(next <= alpha);
            alpha = next;
            best = b;
        }
    }

    #[test]
    fn edge_extension_terminates_without_duplicates(
        center in 1e-4..1.0f64,
        count in 1usize..8,
        optimum_exp in -20i32..20,
    ) {
        // the best step is the grid point closest to a fixed optimum
        let mut grid = make_log_grid(center, 2.0, count).unwrap();
        let optimum = center * 2f64.powi(optimum_exp);
        let pick = |g: &optlab_core::tune::Grid| {
            *g.values
                .iter()
                .min_by(|a, b| (a.ln() - optimum.ln()).abs().total_cmp(&(b.ln() - optimum.ln()).abs()))
                .unwrap()
        };
        let mut rounds = 0;
        while let Some(next) = extend_if_edge(&grid, pick(&grid)).unwrap() {
            prop_assert!(grid.insert(next));
            rounds += 1;
            if rounds == 8 {
                break;
            }
        }
        prop_assert!(rounds <= 8);
        let v = &grid.values;
        prop_assert!(v.windows(2).all(|w| w[0] > w[1]));
    }
}

#[test]
fn training_is_deterministic() {
    let ds = generate_synthetic(20, 0.75, 11).unwrap();
    let spec = OptimizerSpec::new(MethodKind::Adam, 0.01).with_epsilon(0.0);
    let opts = TrainOptions {
        iters: 300,
        ..Default::default()
    };
    let a = train(&ds, &spec, &DecayPolicy::None, &opts).unwrap();
    let b = train(&ds, &spec, &DecayPolicy::None, &opts).unwrap();
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
    assert_eq!(a.w, b.w);
}
