//! Fixed workloads shared by the benchmarks.

use colspace::{generate, Graph, GraphFamilySpec};

/// Random triangle-free graph of the size the counting bounds are checked on.
pub fn sparse_instance(n: usize, seed: u64) -> Graph {
    generate(&GraphFamilySpec::ErdosRenyiTriangleErased { n, p: 0.35, seed })
        .expect("valid family parameters")
}

pub fn cycle(n: usize) -> Graph {
    generate(&GraphFamilySpec::Cycle { n }).expect("n >= 3")
}
