use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{parse_edge_list, Graph};
use crate::error::{Error, Result};
use crate::rng;

fn default_retries() -> u32 {
    1000
}

/// Every graph family the experiments run on. Random families are a pure
/// function of their `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamilySpec {
    Empty {
        n: usize,
    },
    Path {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    CompleteBipartite {
        left: usize,
        right: usize,
    },
    /// Root 0; every internal node has `arity` children; leaves at distance
    /// `depth` from the root. Vertices are numbered level by level.
    RootedArityTree {
        arity: usize,
        depth: usize,
    },
    DisjointCopies {
        base: Box<GraphFamilySpec>,
        copies: usize,
    },
    /// Configuration model, rejecting loops and multi-edges.
    RandomRegular {
        n: usize,
        degree: usize,
        seed: u64,
        #[serde(default = "default_retries")]
        max_retries: u32,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
        seed: u64,
    },
    /// `G(n, p)` followed by deleting a uniformly chosen edge of the
    /// lexicographically first triangle until none remain.
    ErdosRenyiTriangleErased {
        n: usize,
        p: f64,
        seed: u64,
    },
    /// Each vertex `i > 0` attaches to a uniform earlier vertex with
    /// probability `attach`, giving a random forest.
    RandomForest {
        n: usize,
        attach: f64,
        seed: u64,
    },
    FromFile {
        path: PathBuf,
    },
}

pub fn generate(spec: &GraphFamilySpec) -> Result<Graph> {
    use GraphFamilySpec::*;
    match *spec {
        Empty { n } => Ok(Graph::empty(n)),
        Path { n } => {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::from_edges(n, &edges)
        }
        Cycle { n } => {
            if n < 3 {
                return Err(Error::Infeasible(format!("cycle needs n >= 3, got {n}")));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::from_edges(n, &edges)
        }
        Complete { n } => {
            let edges: Vec<_> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            Graph::from_edges(n, &edges)
        }
        CompleteBipartite { left, right } => {
            let edges: Vec<_> = (0..left)
                .flat_map(|u| (0..right).map(move |v| (u, left + v)))
                .collect();
            Graph::from_edges(left + right, &edges)
        }
        RootedArityTree { arity, depth } => rooted_tree(arity, depth),
        DisjointCopies { ref base, copies } => Ok(generate(base)?.disjoint_copies(copies)),
        RandomRegular {
            n,
            degree,
            seed,
            max_retries,
        } => random_regular(n, degree, seed, max_retries),
        ErdosRenyi { n, p, seed } => erdos_renyi(n, p, seed),
        ErdosRenyiTriangleErased { n, p, seed } => {
            let g = erdos_renyi(n, p, seed)?;
            // a separate stream so erasure choices do not shift the edge draws
            Ok(erase_triangles(&g, &mut rng::stream(seed, 1)))
        }
        RandomForest { n, attach, seed } => {
            check_probability(attach)?;
            let mut r = rng::seeded(seed);
            let mut edges = Vec::new();
            for i in 1..n {
                if r.random_bool(attach) {
                    edges.push((r.random_range(0..i), i));
                }
            }
            Graph::from_edges(n, &edges)
        }
        FromFile { ref path } => {
            let text = std::fs::read_to_string(path)?;
            if path.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    line: e.line(),
                    message: e.to_string(),
                })
            } else {
                parse_edge_list(&text)
            }
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Infeasible(format!("probability {p} outside [0, 1]")))
    }
}

fn rooted_tree(arity: usize, depth: usize) -> Result<Graph> {
    if arity == 0 && depth > 0 {
        return Err(Error::Infeasible("tree arity must be at least 1".into()));
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut next_id = 1;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * arity);
        for &parent in &level {
            for _ in 0..arity {
                edges.push((parent, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        level = next;
    }
    Graph::from_edges(next_id, &edges)
}

fn random_regular(n: usize, degree: usize, seed: u64, max_retries: u32) -> Result<Graph> {
    if (n * degree) % 2 == 1 {
        return Err(Error::Infeasible(format!(
            "n·d must be even for a {degree}-regular graph on {n} vertices"
        )));
    }
    if degree >= n.max(1) && degree > 0 {
        return Err(Error::Infeasible(format!(
            "degree {degree} needs more than {n} vertices"
        )));
    }
    let mut r = rng::seeded(seed);
    let mut stubs: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    'attempt: for _ in 0..max_retries.max(1) {
        stubs.shuffle(&mut r);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        let edges: Vec<_> = seen.into_iter().collect();
        return Graph::from_edges(n, &edges);
    }
    Err(Error::Infeasible(format!(
        "no simple pairing found in {max_retries} configuration-model attempts"
    )))
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    let mut r = rng::seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

fn first_triangle(g: &Graph) -> Option<[(usize, usize); 3]> {
    for &(a, b) in g.edges() {
        for &c in g.neighbours(b) {
            if c > b && g.has_edge(a, c) {
                return Some([(a, b), (a, c), (b, c)]);
            }
        }
    }
    None
}

fn erase_triangles<R: Rng>(g: &Graph, r: &mut R) -> Graph {
    let mut g = g.clone();
    while let Some(tri) = first_triangle(&g) {
        let (u, v) = tri[r.random_range(0..3)];
        g = g.without_edge(u, v);
    }
    g
}
