//! Exact counting and enumeration of proper list colourings.
//!
//! Counting is a backtracking search over the free vertices with forward
//! checking, the smallest-domain-first vertex rule, splitting into connected
//! components, and merging of interchangeable colours: two colours that lie
//! in exactly the same domains of the current component lead to equally many
//! completions, so only one of them is explored.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::bounds::tree_free_energy;
use crate::colouring::{available_colours, check_proper, Colour, Colouring, ListAssignment};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_MAX_COLOURINGS: u64 = 10_000_000;
const MAX_PALETTE: usize = 128;

/// Exact count together with its natural logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: BigUint,
    /// `-inf` when the count is zero.
    pub log_count: f64,
}

impl CountResult {
    pub fn new(count: BigUint) -> Self {
        let log_count = ln_big(&count);
        Self { count, log_count }
    }
}

impl Serialize for CountResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CountResult", 2)?;
        st.serialize_field("count", &self.count.to_string())?;
        st.serialize_field("log_count", &self.log_count)?;
        st.end()
    }
}

pub fn ln_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits in 64 bits") as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 leading bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Configurable search over the proper colourings of a graph, optionally
/// with vertices deleted or pinned to fixed colours.
#[derive(Debug, Clone)]
pub struct Enumerator<'a> {
    graph: &'a Graph,
    lists: &'a ListAssignment,
    pinned: Colouring,
    deleted: Vec<bool>,
    node_budget: u64,
    max_colourings: u64,
}

impl<'a> Enumerator<'a> {
    pub fn new(graph: &'a Graph, lists: &'a ListAssignment) -> Result<Self> {
        lists.check_matches(graph)?;
        let n = graph.vertex_count();
        Ok(Self {
            graph,
            lists,
            pinned: Colouring::uncoloured(n),
            deleted: vec![false; n],
            node_budget: DEFAULT_NODE_BUDGET,
            max_colourings: DEFAULT_MAX_COLOURINGS,
        })
    }

    pub fn node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn max_colourings(mut self, max: u64) -> Self {
        self.max_colourings = max;
        self
    }

    /// Removes vertices from the graph; their entries are ignored.
    pub fn deleting(mut self, vertices: &[usize]) -> Result<Self> {
        for &v in vertices {
            self.graph.check_vertex(v)?;
            self.deleted[v] = true;
        }
        Ok(self)
    }

    /// Fixes the coloured entries of `partial` on non-deleted vertices.
    pub fn pinning(mut self, partial: &Colouring) -> Result<Self> {
        partial.check_matches(self.graph)?;
        let mut restricted = partial.clone();
        for v in 0..self.graph.vertex_count() {
            if self.deleted[v] {
                restricted.set(v, None);
            }
        }
        check_proper(self.graph, self.lists, &restricted)?;
        self.pinned = restricted;
        Ok(self)
    }

    fn palette(&self) -> Result<Vec<Colour>> {
        let palette = self.lists.palette();
        if palette.len() > MAX_PALETTE {
            return Err(Error::TooManyColours {
                max: MAX_PALETTE,
                found: palette.len(),
            });
        }
        Ok(palette)
    }

    fn is_free(&self, v: usize) -> bool {
        !self.deleted[v] && self.pinned.get(v).is_none()
    }

    /// Domains of the free vertices as bitsets over `palette`, after
    /// removing colours of pinned neighbours.
    fn initial_domains(&self, palette: &[Colour]) -> Vec<u128> {
        let bit = |c: Colour| 1u128 << palette.binary_search(&c).expect("colour in palette");
        (0..self.graph.vertex_count())
            .map(|v| {
                if !self.is_free(v) {
                    return 0;
                }
                let mut dom = self.lists.list(v).iter().fold(0u128, |m, &c| m | bit(c));
                for &u in self.graph.neighbours(v) {
                    if let (false, Some(c)) = (self.deleted[u], self.pinned.get(u)) {
                        dom &= !bit(c);
                    }
                }
                dom
            })
            .collect()
    }

    pub fn count(&self) -> Result<CountResult> {
        let palette = self.palette()?;
        let domains = self.initial_domains(&palette);
        let free: Vec<usize> = (0..self.graph.vertex_count())
            .filter(|&v| self.is_free(v))
            .collect();
        if free.iter().any(|&v| domains[v] == 0) {
            return Ok(CountResult::new(BigUint::zero()));
        }
        let mut alive = vec![false; self.graph.vertex_count()];
        for &v in &free {
            alive[v] = true;
        }
        let mut search = CountSearch {
            graph: self.graph,
            nodes: 0,
            budget: self.node_budget,
        };
        let count = search.count_set(&free, &domains, &mut alive)?;
        Ok(CountResult::new(count))
    }

    /// Number of colourings in the stream satisfying `pred`.
    pub fn conditioned_count<F>(&self, pred: F) -> Result<CountResult>
    where
        F: Fn(&Colouring) -> bool,
    {
        let hits = self.iter()?.filter(|s| pred(s)).count();
        Ok(CountResult::new(BigUint::from(hits)))
    }

    /// Streams every proper colouring in lexicographic order of the colour
    /// vector. Deleted vertices are reported uncoloured.
    pub fn iter(&self) -> Result<ColouringIter<'a>> {
        let total = self.count()?.count;
        if total > BigUint::from(self.max_colourings) {
            return Err(Error::BudgetExceeded {
                budget: self.max_colourings,
            });
        }
        self.iter_unchecked()
    }

    /// The lexicographically first proper colouring, found without counting.
    pub fn first(&self) -> Result<Option<Colouring>> {
        Ok(self.iter_unchecked()?.next())
    }

    fn iter_unchecked(&self) -> Result<ColouringIter<'a>> {
        let palette = self.palette()?;
        let domains = self.initial_domains(&palette);
        let order: Vec<usize> = (0..self.graph.vertex_count())
            .filter(|&v| self.is_free(v))
            .collect();
        let mut stack = Vec::new();
        let exhausted = order.iter().any(|&v| domains[v] == 0);
        if !exhausted && !order.is_empty() {
            stack.push(Frame {
                choices: domains[order[0]],
                domains,
            });
        }
        Ok(ColouringIter {
            graph: self.graph,
            palette,
            order,
            current: self.pinned.clone(),
            stack,
            emitted_trivial: exhausted,
        })
    }
}

struct CountSearch<'g> {
    graph: &'g Graph,
    nodes: u64,
    budget: u64,
}

impl CountSearch<'_> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Connected components of the alive vertices among `vertices`.
    fn components(&self, vertices: &[usize], alive: &[bool]) -> Vec<Vec<usize>> {
        let mut seen: Vec<usize> = Vec::new();
        let mut comps = Vec::new();
        for &root in vertices {
            if seen.contains(&root) {
                continue;
            }
            let mut comp = vec![root];
            seen.push(root);
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &w in self.graph.neighbours(u) {
                    if alive[w] && !seen.contains(&w) {
                        seen.push(w);
                        comp.push(w);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    fn count_set(
        &mut self,
        vertices: &[usize],
        domains: &[u128],
        alive: &mut [bool],
    ) -> Result<BigUint> {
        let mut total = BigUint::one();
        for comp in self.components(vertices, alive) {
            let c = self.count_component(&comp, domains, alive)?;
            if c.is_zero() {
                return Ok(c);
            }
            total *= c;
        }
        Ok(total)
    }

    fn count_component(
        &mut self,
        comp: &[usize],
        domains: &[u128],
        alive: &mut [bool],
    ) -> Result<BigUint> {
        match *comp {
            [v] => return Ok(BigUint::from(domains[v].count_ones())),
            [u, v] => {
                // a connected pair is an edge
                let both = (domains[u] & domains[v]).count_ones() as u64;
                let prod = domains[u].count_ones() as u64 * domains[v].count_ones() as u64;
                return Ok(BigUint::from(prod - both));
            }
            _ => {}
        }
        let live_degree = |v: usize| {
            self.graph
                .neighbours(v)
                .iter()
                .filter(|&&u| alive[u])
                .count()
        };
        let v = *comp
            .iter()
            .min_by_key(|&&v| {
                (
                    domains[v].count_ones(),
                    std::cmp::Reverse(live_degree(v)),
                    v,
                )
            })
            .expect("component is non-empty");

        // colours with equal membership across the rest of the component
        // are interchangeable
        let rest: Vec<usize> = comp.iter().copied().filter(|&u| u != v).collect();
        let mut groups: BTreeMap<Vec<u64>, (u128, u32)> = BTreeMap::new();
        let mut todo = domains[v];
        while todo != 0 {
            let bit = todo & todo.wrapping_neg();
            todo &= !bit;
            let mut sig = vec![0u64; rest.len().div_ceil(64)];
            for (i, &u) in rest.iter().enumerate() {
                if domains[u] & bit != 0 {
                    sig[i / 64] |= 1 << (i % 64);
                }
            }
            groups.entry(sig).or_insert((bit, 0)).1 += 1;
        }

        alive[v] = false;
        let mut total = BigUint::zero();
        let mut scratch = domains.to_vec();
        for &(bit, multiplicity) in groups.values() {
            self.tick()?;
            scratch.copy_from_slice(domains);
            let mut wiped = false;
            for &u in self.graph.neighbours(v) {
                if alive[u] {
                    scratch[u] &= !bit;
                    wiped |= scratch[u] == 0;
                }
            }
            if wiped {
                continue;
            }
            let sub = self.count_set(&rest, &scratch, alive);
            match sub {
                Ok(c) => total += c * multiplicity,
                Err(e) => {
                    alive[v] = true;
                    return Err(e);
                }
            }
        }
        alive[v] = true;
        Ok(total)
    }
}

struct Frame {
    domains: Vec<u128>,
    choices: u128,
}

/// Depth-first stream of proper colourings; see [`Enumerator::iter`].
pub struct ColouringIter<'a> {
    graph: &'a Graph,
    palette: Vec<Colour>,
    order: Vec<usize>,
    current: Colouring,
    stack: Vec<Frame>,
    emitted_trivial: bool,
}

impl Iterator for ColouringIter<'_> {
    type Item = Colouring;

    fn next(&mut self) -> Option<Colouring> {
        if self.order.is_empty() {
            if self.emitted_trivial {
                return None;
            }
            self.emitted_trivial = true;
            return Some(self.current.clone());
        }
        loop {
            let depth = self.stack.len();
            let frame = self.stack.last_mut()?;
            let v = self.order[depth - 1];
            if frame.choices == 0 {
                self.stack.pop();
                self.current.set(v, None);
                continue;
            }
            let bit = frame.choices & frame.choices.wrapping_neg();
            frame.choices &= !bit;
            let mut next = frame.domains.clone();
            let mut wiped = false;
            for &u in self.graph.neighbours(v) {
                // free vertices later in id order are still unassigned
                if u > v && next[u] != 0 {
                    next[u] &= !bit;
                    wiped |= next[u] == 0;
                }
            }
            if wiped {
                continue;
            }
            self.current
                .set(v, Some(self.palette[bit.trailing_zeros() as usize]));
            if depth == self.order.len() {
                return Some(self.current.clone());
            }
            self.stack.push(Frame {
                choices: next[self.order[depth]],
                domains: next,
            });
        }
    }
}

pub fn count_colourings(g: &Graph, lists: &ListAssignment) -> Result<CountResult> {
    Enumerator::new(g, lists)?.count()
}

pub fn enumerate_colourings<'a>(
    g: &'a Graph,
    lists: &'a ListAssignment,
) -> Result<ColouringIter<'a>> {
    Enumerator::new(g, lists)?.iter()
}

/// Number of ways to extend `sigma`, a proper colouring of `G∖v`, to `G`.
/// Computed by a pinned search, independently of the available list.
pub fn extension_count(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
) -> Result<u64> {
    g.check_vertex(v)?;
    sigma.check_matches(g)?;
    let rest = sigma.with(v, None);
    if (0..g.vertex_count()).any(|u| u != v && rest.get(u).is_none()) {
        return Err(Error::Precondition(
            "colouring must be total on every vertex but v".into(),
        ));
    }
    let count = Enumerator::new(g, lists)?.pinning(&rest)?.count()?.count;
    Ok(count.to_u64().expect("at most |L(v)| extensions"))
}

/// Number of proper colourings satisfying `pred`.
pub fn conditioned_count<F>(g: &Graph, lists: &ListAssignment, pred: F) -> Result<CountResult>
where
    F: Fn(&Colouring) -> bool,
{
    Enumerator::new(g, lists)?.conditioned_count(pred)
}

/// `(1/n) ln |C_k(G)|`; `-inf` when no proper colouring exists.
pub fn free_energy(g: &Graph, k: usize) -> Result<f64> {
    if g.vertex_count() == 0 {
        return Err(Error::Precondition("free energy of the empty graph".into()));
    }
    let count = count_colourings(g, &ListAssignment::uniform(g.vertex_count(), k))?;
    Ok(count.log_count / g.vertex_count() as f64)
}

/// Free energy normalised by that of the infinite `Δ`-regular tree.
pub fn relative_free_energy(g: &Graph, k: usize, max_degree: usize) -> Result<f64> {
    let tree = tree_free_energy(max_degree, k)?;
    if tree == 0.0 {
        return Err(Error::Domain("tree free energy is zero".into()));
    }
    Ok(free_energy(g, k)? / tree)
}

/// `Σ_{σ ∈ C(G∖v)} ℓ_σ(v)` by enumeration of `G∖v`.
pub fn extension_sum(g: &Graph, lists: &ListAssignment, v: usize) -> Result<BigUint> {
    let en = Enumerator::new(g, lists)?.deleting(&[v])?;
    Ok(en
        .iter()?
        .map(|s| BigUint::from(available_colours(g, lists, &s, v).len()))
        .sum())
}
