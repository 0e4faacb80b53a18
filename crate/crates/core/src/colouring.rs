//! Colourings, list assignments and available lists.
//!
//! Colours are non-negative integers. `ListAssignment::uniform(n, k)` gives
//! every vertex the palette `{0, ..., k-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub type Colour = u32;

/// Per-vertex colour lists, each kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<Colour>>", into = "Vec<Vec<Colour>>")]
pub struct ListAssignment(Vec<Vec<Colour>>);

impl From<Vec<Vec<Colour>>> for ListAssignment {
    fn from(lists: Vec<Vec<Colour>>) -> Self {
        Self::new(lists)
    }
}

impl From<ListAssignment> for Vec<Vec<Colour>> {
    fn from(l: ListAssignment) -> Self {
        l.0
    }
}

impl ListAssignment {
    pub fn new(mut lists: Vec<Vec<Colour>>) -> Self {
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
        }
        Self(lists)
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        let palette: Vec<Colour> = (0..k as Colour).collect();
        Self(vec![palette; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn list(&self, v: usize) -> &[Colour] {
        &self.0[v]
    }

    pub fn contains(&self, v: usize, c: Colour) -> bool {
        self.0[v].binary_search(&c).is_ok()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.iter().map(Vec::len).collect()
    }

    /// Sorted union of all lists.
    pub fn palette(&self) -> Vec<Colour> {
        let mut all: Vec<Colour> = self.0.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn check_matches(&self, g: &Graph) -> Result<()> {
        if self.len() != g.vertex_count() {
            return Err(Error::LengthMismatch {
                expected: g.vertex_count(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// A partial colouring: `None` marks an uncoloured vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Colouring(Vec<Option<Colour>>);

impl Colouring {
    pub fn uncoloured(n: usize) -> Self {
        Self(vec![None; n])
    }

    pub fn from_total(colours: Vec<Colour>) -> Self {
        Self(colours.into_iter().map(Some).collect())
    }

    pub fn from_partial(colours: Vec<Option<Colour>>) -> Self {
        Self(colours)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<Colour> {
        self.0[v]
    }

    pub fn set(&mut self, v: usize, c: Option<Colour>) {
        self.0[v] = c;
    }

    pub fn with(&self, v: usize, c: Option<Colour>) -> Self {
        let mut out = self.clone();
        out.0[v] = c;
        out
    }

    pub fn entries(&self) -> &[Option<Colour>] {
        &self.0
    }

    pub fn is_total(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn coloured_count(&self) -> usize {
        self.0.iter().filter(|c| c.is_some()).count()
    }

    /// The colour vector when every vertex is coloured.
    pub fn to_total(&self) -> Option<Vec<Colour>> {
        self.0.iter().copied().collect()
    }

    pub fn check_matches(&self, g: &Graph) -> Result<()> {
        if self.len() != g.vertex_count() {
            return Err(Error::LengthMismatch {
                expected: g.vertex_count(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// `L_σ(v)`: the colours of `L(v)` not used on a coloured neighbour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailableList {
    pub vertex: usize,
    pub colours: Vec<Colour>,
}

impl AvailableList {
    pub fn order(&self) -> usize {
        self.colours.len()
    }
}

/// Describes the first properness violation, if any.
pub fn properness_violation(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
) -> Option<String> {
    if lists.len() != g.vertex_count() || sigma.len() != g.vertex_count() {
        return Some("length does not match the graph".into());
    }
    for v in 0..g.vertex_count() {
        if let Some(c) = sigma.get(v) {
            if !lists.contains(v, c) {
                return Some(format!("vertex {v} has colour {c} outside its list"));
            }
        }
    }
    g.edges()
        .iter()
        .find_map(|&(u, v)| match (sigma.get(u), sigma.get(v)) {
            (Some(a), Some(b)) if a == b => Some(format!("edge ({u}, {v}) is monochromatic")),
            _ => None,
        })
}

pub fn is_proper(g: &Graph, lists: &ListAssignment, sigma: &Colouring) -> bool {
    properness_violation(g, lists, sigma).is_none()
}

pub fn check_proper(g: &Graph, lists: &ListAssignment, sigma: &Colouring) -> Result<()> {
    lists.check_matches(g)?;
    sigma.check_matches(g)?;
    match properness_violation(g, lists, sigma) {
        None => Ok(()),
        Some(why) => Err(Error::ImproperColouring(why)),
    }
}

pub fn available_list(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
) -> Result<AvailableList> {
    g.check_vertex(v)?;
    lists.check_matches(g)?;
    sigma.check_matches(g)?;
    Ok(AvailableList {
        vertex: v,
        colours: available_colours(g, lists, sigma, v),
    })
}

/// Unchecked core of [`available_list`].
pub(crate) fn available_colours(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
) -> Vec<Colour> {
    lists
        .list(v)
        .iter()
        .copied()
        .filter(|&c| g.neighbours(v).iter().all(|&u| sigma.get(u) != Some(c)))
        .collect()
}

pub fn hamming_distance(sigma: &Colouring, tau: &Colouring) -> Result<usize> {
    if sigma.len() != tau.len() {
        return Err(Error::LengthMismatch {
            expected: sigma.len(),
            found: tau.len(),
        });
    }
    if !sigma.is_total() || !tau.is_total() {
        return Err(Error::Precondition(
            "distance needs total colourings".into(),
        ));
    }
    Ok(sigma
        .entries()
        .iter()
        .zip(tau.entries())
        .filter(|(a, b)| a != b)
        .count())
}
