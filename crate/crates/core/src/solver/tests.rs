use super::*;
use crate::data::{synthetic_lasso, synthetic_svm, Dataset, Orientation};
use crate::linalg::SparseColumnMatrix;
use crate::problems::lasso_lambda_max;

fn lasso(d: usize, n: usize, seed: u64, frac: f64) -> ProblemInstance {
    let ds = synthetic_lasso(d, n, 0.25, 0.1, seed).unwrap().dataset;
    let lambda = frac * lasso_lambda_max(&ds);
    ProblemInstance::lasso(&ds, lambda).unwrap()
}

fn svm(d: usize, n: usize, seed: u64, lambda: f64) -> ProblemInstance {
    let ds = synthetic_svm(d, n, 0.4, 0.1, seed).unwrap().dataset;
    ProblemInstance::svm(&ds, lambda).unwrap()
}

fn config(scheme: SamplingScheme, epochs: u64, seed: u64) -> SolverConfig {
    SolverConfig {
        max_epochs: epochs,
        seed,
        ..SolverConfig::new(scheme)
    }
}

#[test]
fn infinite_tolerance_stops_at_first_checkpoint() {
    let p = lasso(5, 8, 0, 0.3);
    let r = run(
        &p,
        &SolverConfig {
            gap_tol: f64::INFINITY,
            ..config(SamplingScheme::Uniform, 5, 0)
        },
    )
    .unwrap();
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.termination, Termination::GapTolReached);
}

#[test]
fn uniform_lasso_is_monotone_at_every_iteration() {
    let p = lasso(5, 8, 1, 0.2);
    let cfg = SolverConfig {
        trace_every: Some(1),
        ..config(SamplingScheme::Uniform, 30, 4)
    };
    let r = run(&p, &cfg).unwrap();
    assert_eq!(r.trace.len(), 241);
    for pair in r.trace.windows(2) {
        assert!(
            pair[1].dual_obj <= pair[0].dual_obj + 1e-12,
            "{} > {}",
            pair[1].dual_obj,
            pair[0].dual_obj
        );
    }
}

#[test]
fn zero_targets_terminate_immediately() {
    let m = SparseColumnMatrix::from_dense(3, 2, &[1.0, 0.0, 2.0, 0.5, 1.0, 0.0]).unwrap();
    let ds = Dataset::new(m, vec![0.0; 3], Orientation::FeaturesAsColumns).unwrap();
    let p = ProblemInstance::lasso(&ds, 0.1).unwrap();
    for s in SamplingScheme::all(0.5) {
        let r = run(&p, &config(s, 3, 0)).unwrap();
        assert_eq!(r.termination, Termination::SupportEmpty);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].gap, 0.0);
        assert_eq!(r.state.t, 0);
    }
}

#[test]
fn refresh_cadence_and_cost() {
    let p = lasso(6, 10, 2, 0.05);
    let nnz_pass = p.n() as u64;

    let r = run(&p, &config(SamplingScheme::Importance, 3, 0)).unwrap();
    assert_eq!(
        r.refresh,
        RefreshStats {
            refreshes: 1,
            column_ops: 0
        }
    );

    let r = run(&p, &config(SamplingScheme::GapPerEpoch, 3, 0)).unwrap();
    assert_eq!(r.termination, Termination::BudgetExhausted);
    assert_eq!(r.refresh.refreshes, 3);
    assert_eq!(r.refresh.column_ops, 3 * nnz_pass);

    let r = run(&p, &config(SamplingScheme::Adaptive, 3, 0)).unwrap();
    assert_eq!(r.termination, Termination::BudgetExhausted);
    assert_eq!(r.refresh.refreshes, 30);
    assert_eq!(r.refresh.column_ops, 30 * nnz_pass);
    assert_eq!(r.state.ops.column_ops(), 30 * nnz_pass + 2 * 30);
}

#[test]
fn uniform_epoch_costs_two_touches_per_iteration() {
    let p = svm(5, 12, 3, 0.1);
    let r = run(&p, &config(SamplingScheme::Uniform, 1, 0)).unwrap();
    assert_eq!(r.trace.last().unwrap().vector_ops, 24);
    assert_eq!(r.trace[0].vector_ops, 0);
}

#[test]
fn long_run_certifies_optimum() {
    for p in [lasso(8, 12, 4, 0.2), svm(6, 15, 4, 0.1)] {
        let r = run(
            &p,
            &SolverConfig {
                gap_tol: 1e-11,
                ..config(SamplingScheme::Uniform, 100_000, 1)
            },
        )
        .unwrap();
        let last = r.trace.last().unwrap();
        assert!(last.gap <= 1e-10, "gap {}", last.gap);
        let again = run(
            &p,
            &SolverConfig {
                suboptimality_ref: Some(last.dual_obj),
                gap_tol: 1e-11,
                ..config(SamplingScheme::AdaGap, 100_000, 9)
            },
        )
        .unwrap();
        let end = again.trace.last().unwrap();
        assert!(end.suboptimality.unwrap().abs() <= 1e-10);
    }
}

#[test]
fn checkpoints_are_self_consistent() {
    for p in [lasso(10, 20, 5, 0.1), svm(8, 25, 5, 0.05)] {
        for s in SamplingScheme::all(0.5) {
            let r = run(&p, &config(s, 6, 2)).unwrap();
            for rec in &r.trace {
                let scale = rec.dual_obj.abs().max(1.0);
                assert!((rec.gap - rec.coordinate_gap_sum).abs() <= 1e-9 * scale);
                assert!(rec.w_drift <= 1e-8, "drift {}", rec.w_drift);
            }
            for pair in r.trace.windows(2) {
                assert!(pair[1].vector_ops >= pair[0].vector_ops);
            }
        }
    }
}

#[test]
fn early_stop_is_sound() {
    let p = lasso(10, 20, 6, 0.1);
    for s in SamplingScheme::all(0.5) {
        let r = run(
            &p,
            &SolverConfig {
                gap_tol: 1e-3,
                ..config(s, 500, 3)
            },
        )
        .unwrap();
        if r.termination == Termination::GapTolReached {
            assert!(r.trace.last().unwrap().gap <= 1e-3);
        }
    }
}

#[test]
fn partial_epoch_checkpoint_on_stop() {
    let p = lasso(10, 20, 7, 0.3);
    let r = run(
        &p,
        &SolverConfig {
            gap_tol: 1e-2,
            trace_every: Some(1),
            ..config(SamplingScheme::Uniform, 500, 3)
        },
    )
    .unwrap();
    assert_eq!(r.termination, Termination::GapTolReached);
    assert_eq!(r.trace.last().unwrap().iterations, r.state.t);
}

#[test]
fn identical_configs_give_identical_traces() {
    let p = svm(8, 20, 8, 0.05);
    for s in SamplingScheme::all(0.5) {
        let cfg = SolverConfig {
            record_theory: true,
            ..config(s, 4, 11)
        };
        let a = run(&p, &cfg).unwrap();
        let b = run(&p, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.state, b.state);
    }
}

#[test]
fn theory_audit_is_clean_on_small_runs() {
    for seed in 0..3 {
        for p in [lasso(12, 18, seed, 0.1), svm(6, 20, seed, 0.05)] {
            for s in SamplingScheme::all(0.5) {
                let r = run(
                    &p,
                    &SolverConfig {
                        record_theory: true,
                        ..config(s, 5, seed)
                    },
                )
                .unwrap();
                let log = r.theory.as_ref().unwrap();
                assert!(log.is_clean(), "{} {:?}: {:?}", s.name(), p.kind(), log);
                assert!(log.iterations_checked > 0);
                for rec in &r.trace {
                    if let Some(t) = rec.theory {
                        assert!(t.f_t >= 0.0);
                        let root_n = (p.n() as f64).sqrt();
                        for c in [t.chi_g, t.chi_f].into_iter().flatten() {
                            assert!((1.0 - 1e-12..=root_n + 1e-12).contains(&c));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let p = lasso(4, 4, 0, 0.5);
    assert!(run(&p, &config(SamplingScheme::Uniform, 0, 0)).is_err());
    assert!(run(
        &p,
        &SolverConfig {
            gap_tol: -1.0,
            ..config(SamplingScheme::Uniform, 1, 0)
        }
    )
    .is_err());
    assert!(run(
        &p,
        &SolverConfig {
            trace_every: Some(0),
            ..config(SamplingScheme::Uniform, 1, 0)
        }
    )
    .is_err());
}
