//! Rate checks on a robust Karcher instance with a strongly-convex-strongly-concave
//! saddle (γ = 4).

mod common;

use common::slope;
use rminmax::harness::{solve_reference, EtaRule, EtaSpec, Experiment, ProblemKind, ReferenceOptions, RunConfig};
use rminmax::solvers::{SolverKind, StepSchedule};

fn cfg(solver: SolverKind, iters: usize) -> RunConfig {
    RunConfig {
        problem: ProblemKind::Karcher,
        d: 3,
        n: 5,
        gamma: 4.0,
        data_seed: 11,
        seed: Some(11),
        solver,
        eta: EtaSpec::Rule(EtaRule::Theorem),
        iters,
        ..Default::default()
    }
}

fn gaps(mut exp: Experiment) -> Vec<f64> {
    let schedule = std::mem::replace(&mut exp.schedule, StepSchedule::constant(1.0 / (2.0 * exp.ell_hat.unwrap())));
    let rec = solve_reference(&exp, &ReferenceOptions::default(), None).unwrap();
    exp.schedule = schedule;
    assert!(rec.grad_norm <= 1e-10, "{}", rec.grad_norm);
    exp.reference = Some(rec.to_points(&exp.problem).unwrap());
    let trace = exp.run().unwrap().into_result().unwrap();
    trace.rows.iter().map(|r| r.dist_gap.unwrap()).collect()
}

#[test]
fn extragradient_gap_contracts_linearly() {
    let exp = Experiment::prepare(&cfg(SolverKind::Rceg, 300)).unwrap();
    assert!(exp.mu_hat.unwrap() > 0.0);
    assert!(matches!(exp.schedule, StepSchedule::Constant { .. }));
    let g = gaps(exp);
    // stop once the gap sits at rounding level
    let live: Vec<f64> = g.iter().copied().take_while(|v| *v > 1e-24).collect();
    assert!(live.len() > 50);
    for w in live.windows(2) {
        assert!(w[1] <= w[0], "{} > {}", w[1], w[0]);
    }
    let logs: Vec<f64> = live[live.len() / 2..].iter().map(|v| v.ln()).collect();
    assert!(slope(&logs) <= -1e-3, "{}", slope(&logs));
}

#[test]
fn gda_gap_stays_under_the_one_over_t_envelope() {
    let exp = Experiment::prepare(&cfg(SolverKind::Rgda, 2000)).unwrap();
    assert!(matches!(exp.schedule, StepSchedule::RgdaScsc { .. }));
    let g = gaps(exp);
    let base = 2.0 * g[2];
    for (t, v) in g.iter().enumerate().skip(2) {
        assert!(t as f64 * v <= 1.1 * base, "t={t}: {} > {}", t as f64 * v, 1.1 * base);
    }
}
