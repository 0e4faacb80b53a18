//! Simple undirected graphs on dense vertex ids `0..n`.
//!
//! A [`Graph`] is immutable once built. Adjacency lists are kept sorted so
//! that every derived quantity (edge order, serialisation, enumeration order)
//! is a deterministic function of the edge set.

mod generate;
mod io;

pub use generate::{generate, GraphFamilySpec};
pub use io::{parse_edge_list, write_edge_list};

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of a shortest cycle, or `Infinite` for forests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn is_at_least(self, bound: usize) -> bool {
        match self {
            Girth::Finite(g) => g >= bound,
            Girth::Infinite => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    /// Builds a simple graph, rejecting loops, repeated edges and
    /// out-of-range endpoints. Edge orientation is irrelevant.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut normalised = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidVertex {
                    vertex: u.max(v),
                    n,
                });
            }
            if u == v {
                return Err(Error::InvalidEdge(u, v, "self-loop"));
            }
            normalised.push((u.min(v), u.max(v)));
        }
        normalised.sort_unstable();
        if let Some(w) = normalised.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge(w[0].0, w[0].1, "parallel edge"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &normalised {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            adjacency,
            edges: normalised,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v,
                n: self.vertex_count(),
            })
        }
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Shortest cycle length by a BFS from every vertex, `O(n·m)`.
    pub fn girth(&self) -> Girth {
        let n = self.vertex_count();
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for root in 0..n {
            dist.fill(usize::MAX);
            dist[root] = 0;
            parent[root] = usize::MAX;
            queue.clear();
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                // any cycle closed from here has length at least 2·dist[u]
                if 2 * dist[u] >= best {
                    break;
                }
                for &w in &self.adjacency[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        best = best.min(dist[u] + dist[w] + 1);
                    }
                }
            }
        }
        if best == usize::MAX {
            Girth::Infinite
        } else {
            Girth::Finite(best)
        }
    }

    /// True iff the graph has no cycle, checked by union-find over the edges.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.vertex_count()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }

    /// Number of edges of the subgraph induced by `set`.
    pub fn induced_edge_count(&self, set: &[usize]) -> usize {
        let mut inside = vec![false; self.vertex_count()];
        for &v in set {
            inside[v] = true;
        }
        set.iter()
            .map(|&v| self.adjacency[v].iter().filter(|&&w| inside[w]).count())
            .sum::<usize>()
            / 2
    }

    /// Average degree of `G[N(v)]`; zero when `N(v)` is empty.
    pub fn neighbourhood_avg_degree(&self, v: usize) -> Result<f64> {
        self.check_vertex(v)?;
        let nbrs = self.neighbours(v);
        if nbrs.is_empty() {
            return Ok(0.0);
        }
        Ok(2.0 * self.induced_edge_count(nbrs) as f64 / nbrs.len() as f64)
    }

    /// Largest neighbourhood average degree over all vertices.
    pub fn local_density(&self) -> f64 {
        (0..self.vertex_count())
            .map(|v| self.neighbourhood_avg_degree(v).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    pub fn is_independent_set(&self, set: &[usize]) -> Result<bool> {
        for &v in set {
            self.check_vertex(v)?;
        }
        Ok(set
            .iter()
            .all(|&u| set.iter().all(|&w| !self.has_edge(u, w))))
    }

    pub fn is_triangle_free(&self) -> bool {
        self.edges.iter().all(|&(u, v)| {
            let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => return false,
                }
            }
            true
        })
    }

    /// BFS layers `U_0 = {v}, U_1, ..., U_depth` at exact distance `i`.
    /// Layers past the eccentricity of `v` are empty.
    pub fn distance_layers(&self, v: usize, depth: usize) -> Result<Vec<Vec<usize>>> {
        self.check_vertex(v)?;
        let mut seen = vec![false; self.vertex_count()];
        seen[v] = true;
        let mut layers = vec![vec![v]];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &u in layers.last().expect("non-empty") {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            next.sort_unstable();
            layers.push(next);
        }
        Ok(layers)
    }

    /// Graph distances from `v`; `usize::MAX` for unreachable vertices.
    pub fn distances_from(&self, v: usize) -> Result<Vec<usize>> {
        self.check_vertex(v)?;
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// `copies` vertex-disjoint copies; copy `c` occupies ids `c·n..(c+1)·n`.
    pub fn disjoint_copies(&self, copies: usize) -> Graph {
        let n = self.vertex_count();
        let edges: Vec<_> = (0..copies)
            .flat_map(|c| self.edges.iter().map(move |&(u, v)| (u + c * n, v + c * n)))
            .collect();
        Graph::from_edges(n * copies, &edges).expect("copies of a simple graph are simple")
    }

    /// Removes edge `{u, v}` if present.
    pub fn without_edge(&self, u: usize, v: usize) -> Graph {
        let key = (u.min(v), u.max(v));
        let edges: Vec<_> = self.edges.iter().copied().filter(|&e| e != key).collect();
        Graph::from_edges(self.vertex_count(), &edges).expect("subgraph of a simple graph")
    }
}

/// JSON form: `{"n": .., "edges": [[u, v], ..]}`.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.vertex_count(),
            edges: self.edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        Graph::from_edges(repr.n, &repr.edges).map_err(serde::de::Error::custom)
    }
}
