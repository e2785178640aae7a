//! Shared fixtures for the criterion benchmarks.

use meshless::cases::BenchmarkCase;
use meshless::nodes::{generate, Distribution, NodeSet};

/// `n x n` nodes over the domain of `case`.
pub fn case_nodes(case: u8, distribution: Distribution, n: usize) -> (BenchmarkCase, NodeSet) {
    let case = BenchmarkCase::new(case).expect("valid case id");
    let nodes = generate(distribution, n, n, case.domain()).expect("valid grid");
    (case, nodes)
}
