//! Geometry of the colouring space: the distance-t colouring graph, its
//! clusters, per-vertex loose/thawed/rigid/frozen classification and the
//! constructive recolouring procedures.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colouring::{available_colours, check_proper, Colour, Colouring, ListAssignment};
use crate::enumeration::Enumerator;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_VIEW_BUDGET: u64 = 100_000;
/// Cap on stored edges of the colouring graph.
pub const DEFAULT_EDGE_BUDGET: u64 = 20_000_000;

/// The graph on all proper `k`-colourings with an edge between colourings
/// at Hamming distance at most `t`.
#[derive(Debug, Clone)]
pub struct ColouringGraphView {
    k: usize,
    t: usize,
    colourings: Vec<Colouring>,
    index: HashMap<Colouring, usize>,
    adjacency: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    clusters: Vec<Vec<usize>>,
}

impl ColouringGraphView {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn colourings(&self) -> &[Colouring] {
        &self.colourings
    }

    pub fn len(&self) -> usize {
        self.colourings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colourings.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn index_of(&self, sigma: &Colouring) -> Option<usize> {
        self.index.get(sigma).copied()
    }

    /// Neighbours of colouring `i`, sorted.
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Cluster labels are `0..cluster_count()`, numbered by smallest member.
    pub fn cluster_of(&self, i: usize) -> usize {
        self.cluster_of[i]
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster(&self, label: usize) -> &[usize] {
        &self.clusters[label]
    }

    /// Cluster size to number of clusters of that size.
    pub fn cluster_size_histogram(&self) -> Vec<(usize, usize)> {
        let mut hist = std::collections::BTreeMap::new();
        for c in &self.clusters {
            *hist.entry(c.len()).or_insert(0) += 1;
        }
        hist.into_iter().collect()
    }

    fn lookup(&self, tau: &Colouring) -> Result<usize> {
        self.index_of(tau).ok_or_else(|| {
            Error::ImproperColouring("colouring is not a proper colouring of the view".into())
        })
    }
}

pub fn build_view(g: &Graph, k: usize, t: usize) -> Result<ColouringGraphView> {
    build_view_with_budget(g, k, t, DEFAULT_VIEW_BUDGET, DEFAULT_EDGE_BUDGET)
}

pub fn build_view_with_budget(
    g: &Graph,
    k: usize,
    t: usize,
    max_colourings: u64,
    max_edges: u64,
) -> Result<ColouringGraphView> {
    let lists = ListAssignment::uniform(g.vertex_count(), k);
    let colourings: Vec<Colouring> = Enumerator::new(g, &lists)?
        .max_colourings(max_colourings)
        .iter()?
        .collect();
    let index: HashMap<Colouring, usize> = colourings
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let edges = close_pairs(&colourings, g.vertex_count(), t);
    if edges.len() as u64 > max_edges {
        return Err(Error::BudgetExceeded { budget: max_edges });
    }
    let mut adjacency = vec![Vec::new(); colourings.len()];
    let mut components = UnionFind::new(colourings.len());
    for &(i, j) in &edges {
        adjacency[i].push(j);
        adjacency[j].push(i);
        components.union(i, j);
    }
    adjacency.iter_mut().for_each(|a| a.sort_unstable());

    let mut label_of_root = HashMap::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let cluster_of: Vec<usize> = (0..colourings.len())
        .map(|i| {
            let root = components.find(i);
            let label = *label_of_root.entry(root).or_insert_with(|| {
                clusters.push(Vec::new());
                clusters.len() - 1
            });
            clusters[label].push(i);
            label
        })
        .collect();
    Ok(ColouringGraphView {
        k,
        t,
        colourings,
        index,
        adjacency,
        cluster_of,
        clusters,
    })
}

/// All pairs `i < j` with `1 ≤ dist ≤ t`.
///
/// Vertices are split into `t + 1` residue blocks; two colourings within
/// distance `t` agree on at least one whole block, so only pairs sharing a
/// block projection are compared. Each pair is attributed to the first
/// block on which it agrees.
fn close_pairs(colourings: &[Colouring], n: usize, t: usize) -> Vec<(usize, usize)> {
    if t == 0 || colourings.len() < 2 {
        return Vec::new();
    }
    let distance = |a: &Colouring, b: &Colouring| {
        a.entries()
            .iter()
            .zip(b.entries())
            .filter(|(x, y)| x != y)
            .count()
    };
    if t >= n {
        return (0..colourings.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                (i + 1..colourings.len())
                    .filter(move |&j| distance(&colourings[i], &colourings[j]) > 0)
                    .map(move |j| (i, j))
            })
            .collect();
    }
    let blocks = t + 1;
    let projection = |s: &Colouring, b: usize| -> Vec<Option<Colour>> {
        (b..n).step_by(blocks).map(|v| s.get(v)).collect()
    };
    let agrees = |a: &Colouring, b: &Colouring, block: usize| {
        (block..n).step_by(blocks).all(|v| a.get(v) == b.get(v))
    };
    let mut pairs: Vec<(usize, usize)> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|block| {
            let mut buckets: HashMap<Vec<Option<Colour>>, Vec<usize>> = HashMap::new();
            for (i, s) in colourings.iter().enumerate() {
                buckets.entry(projection(s, block)).or_default().push(i);
            }
            let mut found = Vec::new();
            for members in buckets.values() {
                for (a, &i) in members.iter().enumerate() {
                    for &j in &members[a + 1..] {
                        let (si, sj) = (&colourings[i], &colourings[j]);
                        if (0..block).any(|b| agrees(si, sj, b)) {
                            continue;
                        }
                        if distance(si, sj) <= t {
                            found.push((i.min(j), i.max(j)));
                        }
                    }
                }
            }
            found
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Classification of a vertex in a colouring. Witness `c` is the index of
/// a colouring realising colour `c` at the vertex, if one exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexStatus {
    pub vertex: usize,
    pub t: usize,
    pub loose: bool,
    pub thawed: bool,
    pub rigid: bool,
    pub frozen: bool,
    pub cluster_id: usize,
    pub cluster_size: usize,
    /// Colourings adjacent to τ, or τ itself, by colour at the vertex.
    pub loose_witnesses: Vec<Option<usize>>,
    /// Members of τ's cluster by colour at the vertex.
    pub thawed_witnesses: Vec<Option<usize>>,
}

/// Loose and rigid look at τ's closed neighbourhood in the view; thawed and
/// frozen at τ's cluster.
pub fn classify_vertex(
    view: &ColouringGraphView,
    tau: &Colouring,
    v: usize,
) -> Result<VertexStatus> {
    let i = view.lookup(tau)?;
    if v >= tau.len() {
        return Err(Error::InvalidVertex {
            vertex: v,
            n: tau.len(),
        });
    }
    let own = tau.get(v).expect("view colourings are total");
    let project = |members: &mut dyn Iterator<Item = usize>| {
        let mut witnesses = vec![None; view.k];
        for j in members {
            let c = view.colourings[j].get(v).expect("total") as usize;
            witnesses[c].get_or_insert(j);
        }
        witnesses
    };
    let loose_witnesses =
        project(&mut std::iter::once(i).chain(view.neighbours(i).iter().copied()));
    let label = view.cluster_of(i);
    let thawed_witnesses = project(&mut view.cluster(label).iter().copied());
    let covers = |w: &[Option<usize>]| w.iter().all(Option::is_some);
    let only_own = |w: &[Option<usize>]| {
        w.iter()
            .enumerate()
            .all(|(c, x)| x.is_none() || c == own as usize)
    };
    Ok(VertexStatus {
        vertex: v,
        t: view.t,
        loose: covers(&loose_witnesses),
        thawed: covers(&thawed_witnesses),
        rigid: only_own(&loose_witnesses),
        frozen: only_own(&thawed_witnesses),
        cluster_id: label,
        cluster_size: view.cluster(label).len(),
        loose_witnesses,
        thawed_witnesses,
    })
}

pub fn classify_colouring(view: &ColouringGraphView, tau: &Colouring) -> Result<Vec<VertexStatus>> {
    (0..tau.len())
        .map(|v| classify_vertex(view, tau, v))
        .collect()
}

/// Number of frozen vertices of τ at the view's `t`.
pub fn count_frozen(view: &ColouringGraphView, tau: &Colouring) -> Result<usize> {
    Ok(classify_colouring(view, tau)?
        .iter()
        .filter(|s| s.frozen)
        .count())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ForceOutcome {
    Recoloured {
        colouring: Colouring,
    },
    /// `neighbour` had no colour other than `x` available.
    Blocked {
        neighbour: usize,
    },
}

/// Gives `v` colour `x` by first moving every neighbour off `x`.
///
/// With `v` uncoloured each `u ∈ N(v)` keeps its colour unless it is `x`, in
/// which case it takes the smallest colour of `L_σ(u) ∖ {x}`. Since `N(v)` is
/// independent these choices do not interact.
pub fn force_colour(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
    x: Colour,
) -> Result<ForceOutcome> {
    g.check_vertex(v)?;
    check_proper(g, lists, sigma)?;
    if !sigma.is_total() {
        return Err(Error::Precondition(
            "force_colour needs a total colouring".into(),
        ));
    }
    if !lists.contains(v, x) {
        return Err(Error::Precondition(format!("colour {x} is not in L({v})")));
    }
    if !g.is_independent_set(g.neighbours(v))? {
        return Err(Error::Precondition(format!(
            "the neighbourhood of vertex {v} is not an independent set"
        )));
    }
    let mut out = sigma.with(v, None);
    for &u in g.neighbours(v) {
        if out.get(u) != Some(x) {
            continue;
        }
        match available_colours(g, lists, &out, u)
            .into_iter()
            .find(|&c| c != x)
        {
            Some(c) => out.set(u, Some(c)),
            None => return Ok(ForceOutcome::Blocked { neighbour: u }),
        }
    }
    out.set(v, Some(x));
    debug_assert!(check_proper(g, lists, &out).is_ok());
    debug_assert!(
        (0..g.vertex_count()).all(|w| w == v || g.has_edge(v, w) || out.get(w) == sigma.get(w))
    );
    Ok(ForceOutcome::Recoloured { colouring: out })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredOutcome {
    /// `σ_1, ..., σ_{depth-1}`; `σ_i` differs from `σ_{i-1}` only on layer
    /// `U_{depth-i+1}`.
    pub sequence: Vec<Colouring>,
    /// `(u, ℓ(u))` for `u ∈ N(v)` under the last colouring.
    pub list_sizes: Vec<(usize, usize)>,
    /// Every reported list size reaches the threshold.
    pub success: bool,
}

fn check_girth(g: &Graph, depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    let needed = 2 * depth + 2;
    if !g.girth().is_at_least(needed) {
        return Err(Error::Precondition(format!(
            "girth {} is below {needed}",
            g.girth()
        )));
    }
    Ok(())
}

/// Recolours the layers around `v` from the outside in, each pass making the
/// lists of the next layer inward long.
///
/// Pass `i` recolours `U_{depth-i+1}`. The children of each `w ∈ U_{depth-i}`
/// are visited shortest available list first, then by id; each takes the
/// available colour seen most often around `w` so far (its fixed neighbours
/// count once, recoloured siblings once each), ties to the smallest colour.
/// Siblings are pairwise non-adjacent, so their lists do not interact.
pub fn layered_recolour(
    g: &Graph,
    k: usize,
    sigma0: &Colouring,
    v: usize,
    depth: usize,
    threshold: usize,
) -> Result<LayeredOutcome> {
    g.check_vertex(v)?;
    check_girth(g, depth)?;
    let lists = ListAssignment::uniform(g.vertex_count(), k);
    check_proper(g, &lists, sigma0)?;
    if !sigma0.is_total() {
        return Err(Error::Precondition(
            "layered_recolour needs a total colouring".into(),
        ));
    }
    let layers = g.distance_layers(v, depth)?;
    let mut sigma = sigma0.clone();
    let mut sequence = Vec::with_capacity(depth - 1);
    for i in 1..depth {
        let outer = &layers[depth - i + 1];
        for &w in &layers[depth - i] {
            // colours already fixed around w count as used once
            let mut used: HashMap<Colour, usize> = g
                .neighbours(w)
                .iter()
                .filter(|c| outer.binary_search(c).is_err())
                .filter_map(|&c| sigma.get(c))
                .map(|c| (c, 1))
                .collect();
            let mut children: Vec<(Vec<Colour>, usize)> = g
                .neighbours(w)
                .iter()
                .filter(|c| outer.binary_search(c).is_ok())
                .map(|&c| (available_colours(g, &lists, &sigma, c), c))
                .collect();
            children.sort_by_key(|(avail, c)| (avail.len(), *c));
            for (avail, c) in children {
                let best = avail
                    .iter()
                    .copied()
                    .max_by_key(|col| {
                        (used.get(col).copied().unwrap_or(0), std::cmp::Reverse(*col))
                    })
                    .expect("the current colour is available");
                sigma.set(c, Some(best));
                *used.entry(best).or_insert(0) += 1;
            }
        }
        sequence.push(sigma.clone());
    }
    let list_sizes: Vec<(usize, usize)> = g
        .neighbours(v)
        .iter()
        .map(|&u| (u, available_colours(g, &lists, &sigma, u).len()))
        .collect();
    Ok(LayeredOutcome {
        success: list_sizes.iter().all(|&(_, l)| l >= threshold),
        sequence,
        list_sizes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RecolourWitness {
    /// `changed` lists the vertices whose colour differs from σ.
    Recoloured {
        colouring: Colouring,
        changed: Vec<usize>,
    },
    Blocked {
        neighbour: usize,
    },
}

/// Layered recolouring followed by [`force_colour`]; every changed vertex
/// lies within distance `depth` of `v`.
pub fn looseness_radius_witness(
    g: &Graph,
    k: usize,
    sigma: &Colouring,
    v: usize,
    x: Colour,
    depth: usize,
) -> Result<RecolourWitness> {
    let layered = layered_recolour(g, k, sigma, v, depth, 0)?;
    let start = layered.sequence.last().unwrap_or(sigma);
    let lists = ListAssignment::uniform(g.vertex_count(), k);
    match force_colour(g, &lists, start, v, x)? {
        ForceOutcome::Blocked { neighbour } => Ok(RecolourWitness::Blocked { neighbour }),
        ForceOutcome::Recoloured { colouring } => {
            let changed: Vec<usize> = (0..g.vertex_count())
                .filter(|&w| colouring.get(w) != sigma.get(w))
                .collect();
            let dist = g.distances_from(v)?;
            assert!(changed.iter().all(|&w| dist[w] <= depth));
            Ok(RecolourWitness::Recoloured { colouring, changed })
        }
    }
}

/// The distinct colours `v` takes across a cluster.
pub fn cluster_projection(view: &ColouringGraphView, label: usize, v: usize) -> BTreeSet<Colour> {
    view.cluster(label)
        .iter()
        .filter_map(|&i| view.colourings[i].get(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::{hamming_distance, is_proper};
    use crate::enumeration::enumerate_colourings;
    use crate::fixtures::{complete, complete_bipartite, cycle, path, star};
    use crate::graph::{generate, GraphFamilySpec};
    use crate::rng;
    use crate::sampling::{Sampler, SamplerConfig};
    use proptest::prelude::*;
    use std::collections::VecDeque;

    /// Naive view: all-pairs distances and BFS components.
    struct Naive {
        colourings: Vec<Colouring>,
        adjacent: Vec<Vec<bool>>,
        component: Vec<usize>,
    }

    fn naive(g: &Graph, k: usize, t: usize) -> Naive {
        let lists = ListAssignment::uniform(g.vertex_count(), k);
        let colourings: Vec<Colouring> = enumerate_colourings(g, &lists).unwrap().collect();
        let m = colourings.len();
        let adjacent: Vec<Vec<bool>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let d = hamming_distance(&colourings[i], &colourings[j]).unwrap();
                        i != j && d <= t
                    })
                    .collect()
            })
            .collect();
        let mut component = vec![usize::MAX; m];
        for s in 0..m {
            if component[s] != usize::MAX {
                continue;
            }
            component[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(i) = queue.pop_front() {
                for j in 0..m {
                    if adjacent[i][j] && component[j] == usize::MAX {
                        component[j] = s;
                        queue.push_back(j);
                    }
                }
            }
        }
        Naive {
            colourings,
            adjacent,
            component,
        }
    }

    fn naive_status(nv: &Naive, k: usize, i: usize, v: usize) -> (bool, bool, bool, bool) {
        let m = nv.colourings.len();
        let own = nv.colourings[i].get(v).unwrap();
        let near: Vec<usize> = (0..m).filter(|&j| j == i || nv.adjacent[i][j]).collect();
        let same: Vec<usize> = (0..m)
            .filter(|&j| nv.component[j] == nv.component[i])
            .collect();
        let colours = |set: &[usize]| -> BTreeSet<Colour> {
            set.iter()
                .map(|&j| nv.colourings[j].get(v).unwrap())
                .collect()
        };
        let (cn, cc) = (colours(&near), colours(&same));
        (
            cn.len() == k,
            cc.len() == k,
            cn.iter().all(|&c| c == own),
            cc.iter().all(|&c| c == own),
        )
    }

    fn agrees_with_naive(g: &Graph, k: usize, t: usize) {
        let view = build_view(g, k, t).unwrap();
        let nv = naive(g, k, t);
        assert_eq!(view.colourings(), &nv.colourings[..]);
        for i in 0..view.len() {
            let expected: Vec<usize> = (0..view.len()).filter(|&j| nv.adjacent[i][j]).collect();
            assert_eq!(view.neighbours(i), &expected[..]);
            for j in 0..view.len() {
                assert_eq!(
                    view.cluster_of(i) == view.cluster_of(j),
                    nv.component[i] == nv.component[j]
                );
            }
            for v in 0..g.vertex_count() {
                let s = classify_vertex(&view, &view.colourings()[i], v).unwrap();
                assert_eq!(
                    (s.loose, s.thawed, s.rigid, s.frozen),
                    naive_status(&nv, k, i, v)
                );
                assert!(!s.loose || s.thawed);
                assert!(!s.frozen || s.rigid);
            }
        }
    }

    #[test]
    fn view_examples() {
        let v = build_view(&complete(3), 3, 1).unwrap();
        assert_eq!((v.len(), v.edge_count(), v.cluster_count()), (6, 0, 6));
        let v = build_view(&cycle(4), 2, 3).unwrap();
        assert_eq!((v.len(), v.edge_count(), v.cluster_count()), (2, 0, 2));
        let v = build_view(&cycle(4), 2, 4).unwrap();
        assert_eq!((v.len(), v.edge_count(), v.cluster_count()), (2, 1, 1));
        assert_eq!(v.cluster_size_histogram(), vec![(2, 1)]);
    }

    #[test]
    fn view_budget() {
        assert!(matches!(
            build_view_with_budget(&Graph::empty(10), 3, 1, 1000, 1 << 30),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            build_view_with_budget(&Graph::empty(4), 3, 4, 1000, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let view = build_view(&Graph::empty(1), 3, 1).unwrap();
        for tau in view.colourings() {
            let s = classify_vertex(&view, tau, 0).unwrap();
            assert!(s.loose && s.thawed && !s.rigid && !s.frozen);
        }
        let k3 = complete(3);
        let view = build_view(&k3, 3, 1).unwrap();
        for tau in view.colourings() {
            for v in 0..3 {
                let s = classify_vertex(&view, tau, v).unwrap();
                assert!(s.rigid && s.frozen && !s.loose && !s.thawed);
                assert_eq!(s.cluster_size, 1);
            }
            assert_eq!(count_frozen(&view, tau).unwrap(), 3);
        }
        let view = build_view(&cycle(4), 2, 4).unwrap();
        for tau in view.colourings() {
            for v in 0..4 {
                assert!(classify_vertex(&view, tau, v).unwrap().thawed);
            }
            assert_eq!(count_frozen(&view, tau).unwrap(), 0);
        }
        let bad = Colouring::from_total(vec![0, 0, 1]);
        assert!(classify_vertex(&view_for(&k3), &bad, 0).is_err());
    }

    fn view_for(g: &Graph) -> ColouringGraphView {
        build_view(g, 3, 1).unwrap()
    }

    #[test]
    fn frozen_counts() {
        let two_triangles = complete(3).disjoint_copies(2);
        let view = build_view(&two_triangles, 3, 1).unwrap();
        assert_eq!(view.len(), 36);
        for tau in view.colourings() {
            assert_eq!(count_frozen(&view, tau).unwrap(), 6);
        }
        for k in 2..=4 {
            let view = build_view(&Graph::empty(3), k, 1).unwrap();
            for tau in view.colourings() {
                assert_eq!(count_frozen(&view, tau).unwrap(), 0);
            }
        }
    }

    #[test]
    fn agrees_with_naive_oracle() {
        for t in 1..=4 {
            agrees_with_naive(&cycle(5), 3, t);
            agrees_with_naive(&path(4), 3, t);
            agrees_with_naive(&complete_bipartite(2, 3), 3, t);
            agrees_with_naive(&star(4), 3, t);
            agrees_with_naive(&cycle(6), 3, t);
        }
        agrees_with_naive(&complete(3).disjoint_copies(2), 3, 2);
        agrees_with_naive(&cycle(4), 2, 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn random_graphs_agree_with_naive(seed in 0u64..10_000, n in 2usize..7, t in 1usize..5) {
            let g = generate(&GraphFamilySpec::ErdosRenyi { n, p: 0.4, seed }).unwrap();
            agrees_with_naive(&g, 3, t);
        }
    }

    #[test]
    fn force_colour_examples() {
        let g = Graph::empty(3);
        let lists = ListAssignment::uniform(3, 3);
        let sigma = Colouring::from_total(vec![0, 1, 2]);
        match force_colour(&g, &lists, &sigma, 1, 2).unwrap() {
            ForceOutcome::Recoloured { colouring } => {
                assert_eq!(colouring, Colouring::from_total(vec![0, 2, 2]))
            }
            other => panic!("{other:?}"),
        }

        let c5 = cycle(5);
        let lists = ListAssignment::uniform(5, 3);
        let all: Vec<Colouring> = enumerate_colourings(&c5, &lists).unwrap().collect();
        assert_eq!(all.len(), 30);
        for sigma in &all {
            for v in 0..5 {
                for x in 0..3 {
                    match force_colour(&c5, &lists, sigma, v, x).unwrap() {
                        ForceOutcome::Recoloured { colouring } => {
                            assert!(is_proper(&c5, &lists, &colouring));
                            assert_eq!(colouring.get(v), Some(x));
                            for w in 0..5 {
                                if w != v && !c5.has_edge(v, w) {
                                    assert_eq!(colouring.get(w), sigma.get(w));
                                }
                            }
                        }
                        other => panic!("{other:?}"),
                    }
                }
            }
        }

        let c4 = cycle(4);
        let lists = ListAssignment::uniform(4, 2);
        let sigma = Colouring::from_total(vec![0, 1, 0, 1]);
        for v in 0..4 {
            let x = 1 - sigma.get(v).unwrap();
            assert!(matches!(
                force_colour(&c4, &lists, &sigma, v, x).unwrap(),
                ForceOutcome::Blocked { .. }
            ));
        }
        let k3 = complete(3);
        let lists = ListAssignment::uniform(3, 3);
        let sigma = Colouring::from_total(vec![0, 1, 2]);
        assert!(matches!(
            force_colour(&k3, &lists, &sigma, 0, 1),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            force_colour(
                &c4,
                &ListAssignment::uniform(4, 2),
                &Colouring::from_total(vec![0, 0, 1, 1]),
                0,
                1
            ),
            Err(Error::ImproperColouring(_))
        ));
    }

    fn tree(arity: usize, depth: usize) -> Graph {
        generate(&GraphFamilySpec::RootedArityTree { arity, depth }).unwrap()
    }

    #[test]
    fn layered_recolour_examples() {
        let c5 = cycle(5);
        let sigma = Colouring::from_total(vec![0, 1, 0, 1, 2]);
        let out = layered_recolour(&c5, 3, &sigma, 0, 1, 2).unwrap();
        assert!(out.sequence.is_empty());
        assert_eq!(out.list_sizes, vec![(1, 2), (4, 1)]);
        assert!(!out.success);

        let c4 = cycle(4);
        let sigma = Colouring::from_total(vec![0, 1, 0, 1]);
        assert!(layered_recolour(&c4, 2, &sigma, 0, 1, 1).is_ok());
        assert!(matches!(
            layered_recolour(&c4, 2, &sigma, 0, 2, 1),
            Err(Error::Precondition(_))
        ));
    }

    /// Structural guarantees of the layered procedure on the 3-ary tree of
    /// depth 3, with the list sizes at `N(v)` recomputed independently.
    #[test]
    fn layered_recolour_on_tree() {
        let g = tree(3, 3);
        let lists = ListAssignment::uniform(g.vertex_count(), 4);
        let layers = g.distance_layers(0, 3).unwrap();
        let mut sampler = Sampler::new(&g, &lists, &SamplerConfig::exact(17)).unwrap();
        let mut reached = 0;
        let trials = 300;
        for _ in 0..trials {
            let sigma0 = sampler.sample().unwrap();
            let out = layered_recolour(&g, 4, &sigma0, 0, 2, 2).unwrap();
            assert_eq!(out.sequence.len(), 1);
            let sigma1 = &out.sequence[0];
            assert!(is_proper(&g, &lists, sigma1));
            for w in 0..g.vertex_count() {
                if layers[2].binary_search(&w).is_err() {
                    assert_eq!(sigma1.get(w), sigma0.get(w));
                }
            }
            for &(u, l) in &out.list_sizes {
                let blocked: BTreeSet<Colour> = g
                    .neighbours(u)
                    .iter()
                    .map(|&w| sigma1.get(w).unwrap())
                    .collect();
                assert_eq!(l, 4 - blocked.len());
            }
            let min_size = out.list_sizes.iter().map(|&(_, l)| l).min().unwrap();
            assert_eq!(min_size, best_possible(&g, &sigma0, &layers));
            reached += usize::from(out.success);
        }
        // singleton lists in layer 2 make ℓ ≥ 2 unreachable for some σ0
        assert!(reached > trials / 2 && reached < trials);
    }

    /// Smallest `ℓ` over `N(0)` under the best recolouring of layer 2.
    fn best_possible(g: &Graph, sigma0: &Colouring, layers: &[Vec<usize>]) -> usize {
        let lists = ListAssignment::uniform(g.vertex_count(), 4);
        layers[1]
            .iter()
            .map(|&u| {
                let kids: Vec<usize> = g
                    .neighbours(u)
                    .iter()
                    .copied()
                    .filter(|&c| c != 0)
                    .collect();
                let options: Vec<Vec<Colour>> = kids
                    .iter()
                    .map(|&c| available_colours(g, &lists, sigma0, c))
                    .collect();
                let mut best = 0;
                let mut stack = vec![(0usize, BTreeSet::from([sigma0.get(0).unwrap()]))];
                while let Some((d, set)) = stack.pop() {
                    if d == kids.len() {
                        best = best.max(4 - set.len());
                        continue;
                    }
                    for &c in &options[d] {
                        let mut next = set.clone();
                        next.insert(c);
                        stack.push((d + 1, next));
                    }
                }
                best
            })
            .min()
            .unwrap()
    }

    #[test]
    fn witness_examples() {
        let g = Graph::empty(1);
        let sigma = Colouring::from_total(vec![0]);
        match looseness_radius_witness(&g, 3, &sigma, 0, 2, 1).unwrap() {
            RecolourWitness::Recoloured { changed, .. } => assert_eq!(changed, vec![0]),
            other => panic!("{other:?}"),
        }
        let c5 = cycle(5);
        let lists = ListAssignment::uniform(5, 3);
        for sigma in enumerate_colourings(&c5, &lists).unwrap() {
            for x in 0..3 {
                match looseness_radius_witness(&c5, 3, &sigma, 2, x, 1).unwrap() {
                    RecolourWitness::Recoloured { changed, .. } => {
                        assert!(changed.len() <= 3);
                        assert!(changed.iter().all(|&w| (1..=3).contains(&w)));
                    }
                    other => panic!("{other:?}"),
                }
            }
        }
        let g = tree(3, 3);
        let lists = ListAssignment::uniform(g.vertex_count(), 4);
        let mut r = rng::seeded(3);
        let mut sampler = Sampler::new(&g, &lists, &SamplerConfig::exact(4)).unwrap();
        for _ in 0..100 {
            let sigma = sampler.sample().unwrap();
            let x = rand::Rng::random_range(&mut r, 0..4);
            if let RecolourWitness::Recoloured { changed, colouring } =
                looseness_radius_witness(&g, 4, &sigma, 0, x, 2).unwrap()
            {
                assert!(changed.len() <= 1 + 3 + 9);
                assert_eq!(colouring.get(0), Some(x));
                assert!(is_proper(&g, &lists, &colouring));
            }
        }
    }

    #[test]
    fn projection_matches_flags() {
        let view = build_view(&cycle(5), 3, 2).unwrap();
        for (i, tau) in view.colourings().iter().enumerate() {
            for v in 0..5 {
                let s = classify_vertex(&view, tau, v).unwrap();
                let proj = cluster_projection(&view, view.cluster_of(i), v);
                assert_eq!(s.thawed, proj.len() == 3);
                assert_eq!(s.frozen, proj.len() == 1);
            }
        }
    }
}
