use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rminmax::manifold::Point;
use rminmax::problems::{gen_spd_data, BilinearInstance, RpcaInstance};
use rminmax::solvers::{
    rceg_step, rgda_step, run, srceg_step, srgda_step, NoiseModel, Oracle, RunSpec, SaddleProblem, SolverKind,
    SolverState, StepSchedule,
};

fn v(x: &Point) -> f64 {
    x.as_vector().unwrap()[0]
}

fn bilinear_start() -> (BilinearInstance, SolverState) {
    let p = BilinearInstance::identity(1);
    let s = SolverState::new(&p, Point::from_slice(&[1.0]), Point::from_slice(&[1.0]), 0).unwrap();
    (p, s)
}

#[test]
fn rceg_bilinear_hand_example() {
    let (p, mut s) = bilinear_start();
    rceg_step(&p, &mut s, 0.1).unwrap();
    assert!((v(s.x_half.as_ref().unwrap()) - 0.9).abs() < 1e-15);
    assert!((v(s.y_half.as_ref().unwrap()) - 1.1).abs() < 1e-15);
    assert!((v(&s.x) - 0.89).abs() < 1e-15);
    assert!((v(&s.y) - 1.09).abs() < 1e-15);
    assert_eq!((s.t, s.oracle_calls), (1, 2));
}

#[test]
fn rgda_bilinear_hand_example() {
    let (p, mut s) = bilinear_start();
    rgda_step(&p, &mut s, 0.1).unwrap();
    assert!((v(&s.x) - 0.9).abs() < 1e-15);
    assert!((v(&s.y) - 1.1).abs() < 1e-15);
    assert_eq!((s.t, s.oracle_calls), (1, 1));
    assert!(s.x_half.is_none());
    let before = s.clone();
    rgda_step(&p, &mut s, 0.0).unwrap();
    assert_eq!((s.x, s.y), (before.x, before.y));
}

#[test]
fn saddle_is_a_fixed_point() {
    let p = BilinearInstance::identity(3);
    let (x, y) = p.origin();
    let mut s = SolverState::new(&p, x.clone(), y.clone(), 0).unwrap();
    rceg_step(&p, &mut s, 0.3).unwrap();
    assert_eq!((&s.x, &s.y), (&x, &y));
}

#[test]
fn invalid_step_is_rejected_and_state_kept() {
    let (p, mut s) = bilinear_start();
    assert!(rceg_step(&p, &mut s, 0.0).is_err());
    assert!(rceg_step(&p, &mut s, f64::NAN).is_err());
    assert!(rgda_step(&p, &mut s, -1.0).is_err());
    assert_eq!((s.t, s.oracle_calls), (0, 0));
}

/// Flat-space extragradient and descent ascent for `f(x, y) = x·y`.
fn flat_eg(mut x: f64, mut y: f64, eta: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for _ in 0..steps {
        let (xh, yh) = (x - eta * y, y + eta * x);
        (x, y) = (x - eta * yh, y + eta * xh);
        out.push((x, y));
    }
    out
}

fn flat_gda(mut x: f64, mut y: f64, eta: f64, steps: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for _ in 0..steps {
        (x, y) = (x - eta * y, y + eta * x);
        out.push((x, y));
    }
    out
}

#[test]
fn euclidean_reduction_matches_flat_reference() {
    for (kind, reference) in
        [(SolverKind::Rceg, flat_eg(1.0, 1.0, 0.1, 100)), (SolverKind::Rgda, flat_gda(1.0, 1.0, 0.1, 100))]
    {
        let (p, mut s) = bilinear_start();
        for (x, y) in reference {
            kind.step(&p, &mut s, 0.1, &Oracle::Exact).unwrap();
            assert!((v(&s.x) - x).abs() <= 1e-12 && (v(&s.y) - y).abs() <= 1e-12, "{kind:?}");
        }
    }
}

#[test]
fn bilinear_gda_diverges_while_rceg_contracts() {
    let radius = |s: &SolverState| v(&s.x).hypot(v(&s.y));
    let (p, mut gda) = bilinear_start();
    let (_, mut eg) = bilinear_start();
    let (mut r_gda, mut r_eg) = (radius(&gda), radius(&eg));
    for _ in 0..100 {
        rgda_step(&p, &mut gda, 0.1).unwrap();
        rceg_step(&p, &mut eg, 0.1).unwrap();
        assert!(radius(&gda) > r_gda);
        assert!(radius(&eg) < r_eg);
        (r_gda, r_eg) = (radius(&gda), radius(&eg));
    }
}

#[test]
fn zero_noise_reduces_to_deterministic_solvers() {
    let p = RpcaInstance::new(1.0, gen_spd_data(3, 6, 0.2, 4.5, 1).unwrap()).unwrap();
    let (x, y) = p.sample_pair(&mut ChaCha8Rng::seed_from_u64(2));
    let noiseless = Oracle::Gaussian { sigma: 0.0 };
    let mut a = SolverState::new(&p, x.clone(), y.clone(), 5).unwrap();
    let mut b = a.clone();
    let mut c = a.clone();
    let mut d = a.clone();
    for _ in 0..10 {
        rceg_step(&p, &mut a, 0.05).unwrap();
        srceg_step(&p, &mut b, 0.05, &noiseless).unwrap();
        rgda_step(&p, &mut c, 0.05).unwrap();
        srgda_step(&p, &mut d, 0.05, &noiseless).unwrap();
    }
    assert_eq!((&a.x, &a.y, &a.x_bar), (&b.x, &b.y, &b.x_bar));
    assert_eq!((&c.x, &c.y, &c.x_bar), (&d.x, &d.y, &d.x_bar));
}

#[test]
fn stochastic_runs_are_seed_deterministic() {
    let p = RpcaInstance::new(1.0, gen_spd_data(3, 8, 0.2, 4.5, 1).unwrap()).unwrap();
    let (x, y) = p.sample_pair(&mut ChaCha8Rng::seed_from_u64(3));
    for oracle in [Oracle::Gaussian { sigma: 0.5 }, Oracle::Minibatch { batch_size: 2 }] {
        let go = |seed| {
            let mut s = SolverState::new(&p, x.clone(), y.clone(), seed).unwrap();
            for _ in 0..5 {
                srceg_step(&p, &mut s, 0.05, &oracle).unwrap();
            }
            s
        };
        let (a, b, c) = (go(9), go(9), go(10));
        assert_eq!((&a.x, &a.y), (&b.x, &b.y));
        assert_ne!(a.x, c.x);
    }
}

#[test]
fn noise_second_moment_and_mean() {
    let p = RpcaInstance::new(1.0, gen_spd_data(4, 3, 0.2, 4.5, 2).unwrap()).unwrap();
    let (x, y) = p.sample_pair(&mut ChaCha8Rng::seed_from_u64(4));
    let sigma = 0.7;
    let noise = NoiseModel::new(sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 10_000;
    let (mx, my) = (p.min_manifold(), p.max_manifold());
    let mut sq = Vec::with_capacity(n);
    let mut sum_x = DVector::zeros(4);
    for _ in 0..n {
        let (nx, ny) = noise.sample(mx, &x, my, &y, &mut rng).unwrap();
        sq.push(mx.inner(&x, &nx, &nx).unwrap() + my.inner(&y, &ny, &ny).unwrap());
        sum_x += nx.as_vector().unwrap();
    }
    let mean = sq.iter().sum::<f64>() / n as f64;
    let var = sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!((mean - sigma * sigma).abs() <= 3.0 * se, "{mean} vs {}", sigma * sigma);
    // each coordinate of ξ_x has variance σ²/(2·dim)
    let coord_se = (sigma * sigma / (2.0 * 3.0) / n as f64).sqrt();
    let mean_x = sum_x / n as f64;
    assert!(mean_x.iter().all(|c| c.abs() <= 4.0 * coord_se), "{mean_x}");
}

#[test]
fn minibatch_oracle_is_unbiased_and_counts_passes() {
    let n = 8;
    let p = RpcaInstance::new(1.0, gen_spd_data(2, n, 0.2, 4.5, 7).unwrap()).unwrap();
    let (x, y) = p.sample_pair(&mut ChaCha8Rng::seed_from_u64(8));
    let (_, exact_y) = p.grad(&x, &y).unwrap();
    let exact = exact_y.as_matrix().unwrap().clone();
    let oracle = Oracle::Minibatch { batch_size: 2 };
    // one RGDA step at η = 0 queries the oracle without moving
    let draws = 10_000;
    let mut samples = Vec::with_capacity(draws);
    let mut sampler_state = SolverState::new(&p, x.clone(), y.clone(), 1).unwrap();
    for _ in 0..draws {
        let before = sampler_state.clone();
        srgda_step(&p, &mut sampler_state, 0.0, &oracle).unwrap();
        assert_eq!(before.x, sampler_state.x);
        samples.push(sampler_state.data_passes - before.data_passes);
    }
    assert!(samples.iter().all(|&d| (d - 0.25).abs() < 1e-15));
    assert!((sampler_state.data_passes - draws as f64 * 0.25).abs() < 1e-9);

    let mut acc = nalgebra::DMatrix::zeros(2, 2);
    let mut acc_sq = nalgebra::DMatrix::zeros(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..draws {
        let batch = rand::seq::index::sample(&mut rng, n, 2).into_vec();
        let (_, gy) = p.batch_grad(&x, &y, &batch).unwrap();
        let g = gy.as_matrix().unwrap();
        acc += g;
        acc_sq += g.component_mul(g);
    }
    let mean = &acc / draws as f64;
    for i in 0..2 {
        for j in 0..2 {
            let var = acc_sq[(i, j)] / draws as f64 - mean[(i, j)].powi(2);
            let se = (var / draws as f64).sqrt();
            assert!((mean[(i, j)] - exact[(i, j)]).abs() <= 3.0 * se + 1e-12, "{i}{j}");
        }
    }
}

#[test]
fn run_driver_contract() {
    let p = BilinearInstance::identity(2);
    let x0 = Point::from_slice(&[1.0, -0.5]);
    let y0 = Point::from_slice(&[0.3, 0.8]);
    let mut spec = RunSpec {
        solver: SolverKind::Rceg,
        schedule: StepSchedule::constant(0.2),
        oracle: Oracle::Exact,
        iters: 0,
        seed: 1,
    };
    assert!(run(&p, x0.clone(), y0.clone(), &spec, |_, _| Ok(())).is_err());

    spec.iters = 100;
    let mut seen = Vec::new();
    let out = run(&p, x0.clone(), y0.clone(), &spec, |s, eta| {
        seen.push((s.t, s.oracle_calls, eta));
        Ok(())
    })
    .unwrap();
    let state = out.into_result().unwrap();
    assert_eq!(seen.len(), 101);
    assert!(seen.iter().enumerate().all(|(i, &(t, calls, _))| t == i && calls == 2 * i));
    let r0 = x0.as_vector().unwrap().norm_squared() + y0.as_vector().unwrap().norm_squared();
    let r1 = state.x.as_vector().unwrap().norm_squared() + state.y.as_vector().unwrap().norm_squared();
    assert!(r1 < r0);

    spec.solver = SolverKind::Srgda;
    spec.oracle = Oracle::Minibatch { batch_size: 1 };
    assert!(run(&p, x0, y0, &spec, |_, _| Ok(())).is_err());
}

#[test]
fn running_mean_tracks_half_iterates() {
    let (p, mut s) = bilinear_start();
    let mut halves = Vec::new();
    for _ in 0..5 {
        rceg_step(&p, &mut s, 0.1).unwrap();
        halves.push(v(s.x_half.as_ref().unwrap()));
    }
    let mean = halves.iter().sum::<f64>() / 5.0;
    assert!((v(s.x_bar.as_ref().unwrap()) - mean).abs() < 1e-12);

    let (p, mut s) = bilinear_start();
    let mut iterates = Vec::new();
    for _ in 0..5 {
        iterates.push(v(&s.x));
        rgda_step(&p, &mut s, 0.1).unwrap();
    }
    let mean = iterates.iter().sum::<f64>() / 5.0;
    assert!((v(s.x_bar.as_ref().unwrap()) - mean).abs() < 1e-12);
}
