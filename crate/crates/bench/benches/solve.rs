use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meshless::study::{solve_case, StudyConfig};
use meshless::Distribution;
use meshless_bench::case_nodes;

// Star configurations of the timing tables, on case 1.
fn star_configurations(c: &mut Criterion) {
    let mut group = c.benchmark_group("case1_uniform_21");
    group.sample_size(20);
    let (case, nodes) = case_nodes(1, Distribution::Uniform, 21);
    for (ng, nr) in [(5, 5), (9, 5), (9, 9)] {
        let config = StudyConfig::hybrid(ng, nr, 0.5);
        group.bench_with_input(BenchmarkId::from_parameter(format!("ng{ng}_nr{nr}")), &config, |b, cfg| {
            b.iter(|| solve_case(&case, &nodes, cfg).unwrap())
        });
    }
    group.bench_function("cd2", |b| b.iter(|| solve_case(&case, &nodes, &StudyConfig::cd2()).unwrap()));
    group.bench_function("gfd", |b| b.iter(|| solve_case(&case, &nodes, &StudyConfig::gfd()).unwrap()));
    group.finish();
}

fn nonlinear(c: &mut Criterion) {
    let mut group = c.benchmark_group("picard");
    group.sample_size(10);
    for id in [2u8, 3] {
        let (case, nodes) = case_nodes(id, Distribution::Uniform, 21);
        let eps = case.default_epsilon(Distribution::Uniform);
        group.bench_function(format!("case{id}_uniform_21"), |b| {
            b.iter(|| solve_case(&case, &nodes, &StudyConfig::hybrid(5, 5, eps)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, star_configurations, nonlinear);
criterion_main!(benches);
