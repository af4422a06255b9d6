use super::*;
use crate::solver::TraceRecord;

fn record(epoch: f64, gap: f64) -> TraceRecord {
    TraceRecord {
        epoch,
        iterations: 0,
        vector_ops: 0,
        dual_obj: 0.0,
        primal_obj: 0.0,
        gap,
        coordinate_gap_sum: gap,
        suboptimality: None,
        support_size: 0,
        w_drift: 0.0,
        theory: None,
    }
}

fn spec(schemes: Vec<SamplingScheme>, seeds: Vec<u64>) -> ExperimentSpec {
    ExperimentSpec {
        source: DataSource::Synthetic {
            d: 12,
            n: 20,
            frac: 0.2,
            noise: 0.1,
            seed: 0,
        },
        problem: ProblemKind::Lasso,
        lambda: Lambda::FractionOfMax(0.1),
        schemes,
        seeds,
        max_epochs: 30,
        gap_tol: 1e-8,
        normalize: false,
        record_theory: false,
        trace_every: None,
        gap_levels: vec![1e-1, 1e-3, 1e-6],
        out: None,
    }
}

#[test]
fn epochs_to_gap_takes_first_checkpoint() {
    let trace = [
        record(0.0, 1.0),
        record(1.0, 1e-2),
        record(2.0, 1e-4),
        record(3.0, 1e-3),
    ];
    assert_eq!(epochs_to_gap(&trace, 1.0), Some(0.0));
    assert_eq!(epochs_to_gap(&trace, 1e-3), Some(2.0));
    assert_eq!(epochs_to_gap(&trace, 1e-5), None);
}

#[test]
fn interpolation_is_linear_in_log_gap() {
    let trace = [record(0.0, 1.0), record(1.0, 1e-2), record(2.0, 1e-4)];
    let e = epochs_to_gap_interpolated(&trace, 1e-3).unwrap();
    assert!((e - 1.5).abs() < 1e-12);
    assert_eq!(epochs_to_gap_interpolated(&trace, 1e-2), Some(1.0));
    assert_eq!(
        epochs_to_gap_interpolated(&[record(0.0, 1.0), record(1.0, 0.0)], 1e-9),
        Some(1.0)
    );
    assert_eq!(epochs_to_gap_interpolated(&trace, 1e-5), None);
}

#[test]
fn median_treats_unreached_as_infinite() {
    assert_eq!(median(&[Some(1.0), Some(3.0), None]), Some(3.0));
    assert_eq!(median(&[Some(1.0), None, None]), None);
    assert_eq!(median(&[Some(1.0), Some(2.0)]), Some(1.5));
    assert_eq!(mean(&[Some(1.0), Some(2.0)]), Some(1.5));
    assert_eq!(mean(&[Some(1.0), None]), None);
}

#[test]
fn compare_emits_runs_then_aggregates() {
    let s = spec(SamplingScheme::all(0.5).to_vec(), vec![0, 1, 2, 3, 4]);
    let (_, p) = prepare_problem(&s).unwrap();
    let cmp = compare(&s, &p).unwrap();
    assert_eq!(cmp.runs.len(), 35);
    assert_eq!(cmp.rows.len(), 35 + 14);
    for (k, scheme) in s.schemes.iter().enumerate() {
        let block = &cmp.rows[k * 7..(k + 1) * 7];
        assert!(block.iter().all(|r| r.scheme == scheme.name()));
        let seeds: Vec<_> = block[..5].iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![Some(0), Some(1), Some(2), Some(3), Some(4)]);
        assert_eq!(
            (block[5].kind, block[6].kind),
            (RowKind::Median, RowKind::Mean)
        );
    }
    let reference = cmp.reference.as_ref().unwrap().dual_obj;
    for r in &cmp.runs {
        let res = r.result.as_ref().unwrap();
        for rec in &res.trace {
            assert_eq!(rec.suboptimality, Some(rec.dual_obj - reference));
        }
    }
    for row in &cmp.rows {
        let reached: Vec<f64> = row
            .epochs_to_gap
            .iter()
            .map(|e| e.unwrap_or(f64::INFINITY))
            .collect();
        assert!(reached.windows(2).all(|w| w[0] <= w[1]), "{row:?}");
    }
}

#[test]
fn compare_output_is_order_stable() {
    let s = spec(
        vec![SamplingScheme::AdaGap, SamplingScheme::Uniform],
        vec![3, 1],
    );
    let (_, p) = prepare_problem(&s).unwrap();
    let a = compare(&s, &p).unwrap().rows;
    let b = compare(&s, &p).unwrap().rows;
    assert_eq!(a, b);
    assert_eq!(a[0].seed, Some(3));
    assert_eq!(a[0].scheme, "ada_gap");
}

#[test]
fn bench_classifies_refresh_cost() {
    let s = ExperimentSpec {
        max_epochs: 4,
        ..spec(SamplingScheme::all(0.5).to_vec(), vec![0])
    };
    let (_, p) = prepare_problem(&s).unwrap();
    let n = p.n() as f64;
    for row in bench(&s, &p).unwrap() {
        assert_eq!(row.epochs, 4.0, "{}", row.scheme);
        assert_eq!(row.update_column_ops, 2 * 4 * p.n() as u64);
        match row.scheme.as_str() {
            "uniform" | "importance" => assert_eq!(row.refresh_column_ops, 0),
            "gap_per_epoch" => assert_eq!(row.refreshes_per_epoch, 1.0),
            _ => assert_eq!(row.refreshes_per_epoch, n),
        }
        let class = if row.refreshes_per_epoch == n {
            "n*nnz"
        } else {
            "nnz"
        };
        assert_eq!(row.cost_class, class);
    }
}

#[test]
fn spec_validation() {
    assert!(spec(vec![], vec![0]).validate().is_err());
    assert!(spec(vec![SamplingScheme::Uniform], vec![])
        .validate()
        .is_err());
    let mut s = spec(vec![SamplingScheme::Uniform], vec![0]);
    s.lambda = Lambda::Absolute(0.0);
    assert!(s.validate().is_err());
    s.lambda = Lambda::FractionOfMax(0.5);
    s.problem = ProblemKind::Svm;
    assert!(s.validate().is_err());
}

#[test]
fn float_text_round_trips() {
    for x in [
        0.0,
        -0.0,
        1.0,
        0.1 + 0.2,
        1e-300,
        -3.5e-7,
        2.5e17,
        f64::MAX,
        f64::MIN_POSITIVE,
        5e-324,
    ] {
        let s = csv::fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        assert!(s.len() < 32, "{s}");
    }
}

#[test]
fn trace_csv_layout() {
    let mut buf = Vec::new();
    let mut r = record(0.5, 0.1 + 0.2);
    r.suboptimality = Some(1e-300);
    r.dual_obj = 123456.75;
    write_trace_csv(&mut buf, &[r], false).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema=1");
    assert_eq!(
        lines[1],
        "epoch,iterations,vector_ops,dual_obj,primal_obj,gap,suboptimality,support_size"
    );
    assert_eq!(lines[2], "0.5,0,0,123456.75,0,0.30000000000000004,1e-300,0");
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &[record(0.0, 1.0)], true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",F_t,chi_G,chi_F"));
    assert!(text.lines().nth(2).unwrap().ends_with(",0,,,"));
}

#[test]
fn error_classes_map_to_exit_codes() {
    assert_eq!(exit_code(&Error::InvalidArgument("x".into())), EXIT_USAGE);
    assert_eq!(
        exit_code(&Error::Parse {
            line: 3,
            msg: "x".into()
        }),
        EXIT_DATA
    );
    assert_eq!(exit_code(&Error::ZeroColumn(0)), EXIT_DATA);
    assert_eq!(
        exit_code(&Error::NonFinite {
            iteration: 1,
            detail: String::new()
        }),
        EXIT_NUMERICAL
    );
    assert_eq!(exit_code(&Error::Invariant("x".into())), EXIT_NUMERICAL);
}
