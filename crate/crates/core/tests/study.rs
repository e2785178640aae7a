//! Convergence studies and their CSV/JSON reports.

use proptest::prelude::*;

use meshless::cases::BenchmarkCase;
use meshless::metrics::ErrorNorm;
use meshless::study::{run_study, ConvergenceReport, ReportConfig, RowStatus, StudyConfig, StudyRow};
use meshless::{generate_chebyshev, Distribution, Method, NodeSet, PolyDegree, Rect, StarRule};

fn round_trip_csv(report: &ConvergenceReport) -> ConvergenceReport {
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    ConvergenceReport::read_csv(buf.as_slice()).unwrap()
}

fn round_trip_json(report: &ConvergenceReport) -> ConvergenceReport {
    let mut buf = Vec::new();
    report.write_json(&mut buf).unwrap();
    ConvergenceReport::read_json(buf.as_slice()).unwrap()
}

#[test]
fn single_refinement_has_no_orders() {
    let case = BenchmarkCase::new(1).unwrap();
    let report = run_study(&case, Distribution::Uniform, &[11], &StudyConfig::hybrid(5, 5, 0.5)).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].orders, vec![None]);
    assert_eq!(report.rows[0].node_count, 121);
    assert!(report.rows[0].status.is_ok());
}

#[test]
fn chebyshev_hybrid_study_converges_at_second_order() {
    let case = BenchmarkCase::new(1).unwrap();
    let config = StudyConfig::hybrid(5, 5, 0.9).with_norm(ErrorNorm::Normalized);
    let report = run_study(&case, Distribution::Chebyshev, &[11, 21, 41], &config).unwrap();
    for row in &report.rows[1..] {
        let p = row.orders[0].unwrap();
        assert!((1.9..2.05).contains(&p), "order {p}");
    }
    assert_eq!(report.config.distribution, Distribution::Chebyshev);
    assert_eq!(report.config.norm, ErrorNorm::Normalized);
}

#[test]
fn failed_levels_are_recorded_and_do_not_abort() {
    let case = BenchmarkCase::new(1).unwrap();
    // CD2 cannot run on Chebyshev nodes; every level fails but the study completes.
    let report = run_study(&case, Distribution::Chebyshev, &[5, 7], &StudyConfig::cd2()).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.rows.iter().all(|r| matches!(r.status, RowStatus::Failed(_)) && r.errors.is_empty()));
    assert_eq!(round_trip_csv(&report), report);
}

#[test]
fn empty_refinement_is_rejected() {
    let case = BenchmarkCase::new(1).unwrap();
    assert!(run_study(&case, Distribution::Uniform, &[], &StudyConfig::default()).is_err());
}

#[test]
fn real_reports_round_trip() {
    let case = BenchmarkCase::new(3).unwrap();
    let config = StudyConfig::hybrid(5, 5, 0.3).with_condition(true);
    let report = run_study(&case, Distribution::Uniform, &[7, 9], &config).unwrap();
    assert_eq!(report.rows[1].errors.len(), 2);
    assert_eq!(round_trip_csv(&report), report);
    assert_eq!(round_trip_json(&report), report);
    let table = report.to_string();
    assert!(table.lines().count() >= 4, "{table}");
}

#[test]
fn node_sets_round_trip_through_csv() {
    let nodes = generate_chebyshev(6, 7, Rect::new(0.0, 2.0, -1.0, 1.0).unwrap()).unwrap();
    let mut buf = Vec::new();
    nodes.write_csv(&mut buf).unwrap();
    let back = NodeSet::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), nodes.len());
    for (a, b) in nodes.nodes().iter().zip(back.nodes()) {
        assert_eq!((a.x, a.y, a.kind), (b.x, b.y, b.kind));
    }
}

fn status() -> impl Strategy<Value = RowStatus> {
    let message = "[a-zA-Z0-9 ,.:;\"'=()-]{0,40}";
    prop_oneof![Just(RowStatus::Ok), message.prop_map(RowStatus::NotConvergent), message.prop_map(RowStatus::Failed),]
}

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![1e-12f64..1e3, -1e3f64..1e3, Just(0.0)]
}

fn row(fields: usize) -> impl Strategy<Value = StudyRow> {
    (
        (2usize..100, 2usize..100),
        1e-4f64..1.0,
        proptest::collection::vec(value(), fields),
        proptest::collection::vec(proptest::option::of(value()), fields),
        proptest::option::of(prop_oneof![1.0f64..1e16, Just(f64::INFINITY)]),
        (0usize..200, 0usize..100_000, 0.0f64..100.0),
        status(),
    )
        .prop_map(move |((nx, ny), h, errors, orders, condition_number, (picard, linear, wall_time), status)| {
            StudyRow {
                nx,
                ny,
                node_count: nx * ny,
                h,
                errors: if status.is_ok() { errors } else { Vec::new() },
                orders,
                condition_number,
                picard_iterations: picard,
                linear_iterations: linear,
                wall_time,
                status,
            }
        })
}

fn report() -> impl Strategy<Value = ConvergenceReport> {
    (1u8..=3, 0usize..3, any::<bool>(), 1e-3f64..10.0, any::<bool>()).prop_flat_map(
        |(case, method, cheb, epsilon, axis)| {
            let fields = if case == 3 { 2 } else { 1 };
            let config = ReportConfig {
                case,
                method: [Method::Hybrid, Method::Gfd, Method::Cd2][method],
                distribution: if cheb { Distribution::Chebyshev } else { Distribution::Uniform },
                ng: 5,
                nr: 9,
                epsilon,
                poly_degree: PolyDegree::Two,
                star_rule: if axis { StarRule::AxisQuadrant } else { StarRule::Quadrant },
                norm: ErrorNorm::Interior,
            };
            proptest::collection::vec(row(fields), 1..5)
                .prop_map(move |rows| ConvergenceReport { config: config.clone(), rows })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn csv_round_trip_is_lossless(r in report()) {
        prop_assert_eq!(round_trip_csv(&r), r);
    }

    #[test]
    fn json_round_trip_is_lossless(r in report()) {
        prop_assert_eq!(round_trip_json(&r), r);
    }
}
