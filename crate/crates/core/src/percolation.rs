//! s-upward percolation on complete rooted trees.
//!
//! Trees are implicit: level `i` is an array of `arity^i` nodes in which
//! node `j` has children `j·arity .. (j+1)·arity` on level `i + 1`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::colouring::{available_colours, ListAssignment};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, SimRng};
use crate::sampling::{Sampler, SamplerConfig};

/// Largest tree handled, counted in leaves.
pub const MAX_LEAVES: usize = 10_000_000;
/// Trials per independent RNG stream.
const TRIALS_PER_STREAM: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LeafModel {
    /// Each leaf independently active with probability `p`.
    Iid { p: f64 },
    /// Exactly the leaves of an `s`-ary subtree hanging from the root.
    Adversarial,
    /// A fixed activation mask in leaf order.
    Explicit { mask: Vec<bool> },
    /// Leaf `i` is active iff `ℓ_σ(leaves[i]) ≤ threshold` in a uniform
    /// `k`-colouring σ of `graph`. `p`, when given, is the domination
    /// parameter used for the hypothesis check.
    ColouringDerived {
        graph: Graph,
        k: usize,
        threshold: usize,
        leaves: Vec<usize>,
        #[serde(default)]
        p: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolationInstance {
    pub arity: usize,
    pub depth: usize,
    pub threshold: usize,
    pub leaf_model: LeafModel,
}

impl PercolationInstance {
    pub fn new(
        arity: usize,
        depth: usize,
        threshold: usize,
        leaf_model: LeafModel,
    ) -> Result<Self> {
        let inst = Self {
            arity,
            depth,
            threshold,
            leaf_model,
        };
        inst.leaf_count()?;
        if let LeafModel::Iid { p } = inst.leaf_model {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("p = {p} is not a probability")));
            }
        }
        if let LeafModel::ColouringDerived { graph, leaves, .. } = &inst.leaf_model {
            for &v in leaves {
                graph.check_vertex(v)?;
            }
            inst.check_mask_len(leaves.len())?;
        }
        if let LeafModel::Explicit { mask } = &inst.leaf_model {
            inst.check_mask_len(mask.len())?;
        }
        Ok(inst)
    }

    /// `arity^depth`, validating the shape.
    pub fn leaf_count(&self) -> Result<usize> {
        leaf_count(self.arity, self.depth, self.threshold)
    }

    fn check_mask_len(&self, len: usize) -> Result<()> {
        let leaves = self.leaf_count()?;
        if len != leaves {
            return Err(Error::LengthMismatch {
                expected: leaves,
                found: len,
            });
        }
        Ok(())
    }
}

fn leaf_count(arity: usize, depth: usize, threshold: usize) -> Result<usize> {
    if arity < 2 || depth < 1 || threshold < 1 {
        return Err(Error::Domain(format!(
            "need arity >= 2, depth >= 1, threshold >= 1; got {arity}, {depth}, {threshold}"
        )));
    }
    arity
        .checked_pow(depth as u32)
        .filter(|&n| n <= MAX_LEAVES)
        .ok_or_else(|| Error::Precondition(format!("more than {MAX_LEAVES} leaves")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Propagation {
    /// `levels[0]` is the root, `levels[depth]` the leaves.
    pub levels: Vec<Vec<bool>>,
    pub root_active: bool,
}

fn parent_level(children: &[bool], arity: usize, threshold: usize) -> Vec<bool> {
    children
        .chunks_exact(arity)
        .map(|c| c.iter().filter(|&&a| a).count() >= threshold)
        .collect()
}

/// Bottom-up pass: a node is active iff at least `threshold` children are.
pub fn propagate(
    arity: usize,
    depth: usize,
    threshold: usize,
    leaves: &[bool],
) -> Result<Propagation> {
    let n = leaf_count(arity, depth, threshold)?;
    if leaves.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: leaves.len(),
        });
    }
    let mut levels = vec![leaves.to_vec()];
    for _ in 0..depth {
        let next = parent_level(levels.last().expect("non-empty"), arity, threshold);
        levels.push(next);
    }
    levels.reverse();
    Ok(Propagation {
        root_active: levels[0][0],
        levels,
    })
}

fn root_active(arity: usize, threshold: usize, leaves: &[bool]) -> bool {
    let mut level = parent_level(leaves, arity, threshold);
    while level.len() > 1 {
        level = parent_level(&level, arity, threshold);
    }
    level[0]
}

/// Leaves whose base-`arity` digits are all below `threshold`: the leaves
/// of an `threshold`-ary subtree, `threshold^depth` of them.
pub fn adversarial_mask(arity: usize, depth: usize, threshold: usize) -> Result<Vec<bool>> {
    let n = leaf_count(arity, depth, threshold)?;
    Ok((0..n)
        .map(|mut i| {
            (0..depth).all(|_| {
                let digit = i % arity;
                i /= arity;
                digit < threshold
            })
        })
        .collect())
}

/// Activation mask from one uniform `k`-colouring of `g`: leaf `i` is
/// active iff `ℓ_σ(layer[i]) ≤ threshold`.
pub fn colouring_leaf_model<R: Rng>(
    g: &Graph,
    k: usize,
    layer: &[usize],
    threshold: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let lists = ListAssignment::uniform(g.vertex_count(), k);
    let mut sampler = Sampler::with_rng(
        g,
        &lists,
        &SamplerConfig::exact(0),
        rng::seeded(rng.random()),
    )
    .map_err(infeasible)?;
    leaf_mask(g, &lists, &mut sampler, layer, threshold)
}

fn infeasible(e: Error) -> Error {
    match e {
        Error::EmptySolutionSpace => Error::Infeasible("graph has no proper colouring".into()),
        other => other,
    }
}

fn leaf_mask(
    g: &Graph,
    lists: &ListAssignment,
    sampler: &mut Sampler,
    layer: &[usize],
    threshold: usize,
) -> Result<Vec<bool>> {
    for &v in layer {
        g.check_vertex(v)?;
    }
    let sigma = sampler.sample()?;
    Ok(layer
        .iter()
        .map(|&v| available_colours(g, lists, &sigma, v).len() <= threshold)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// `−s^{⌈f/2⌉}`; absent when `s < 2`.
    pub bound_log: Option<f64>,
    /// `s ≥ max(6pΔ, 3 ln Δ)`; absent when no `p` is known.
    pub hypothesis_ok: Option<bool>,
}

/// Monte-Carlo root activation probability. Trials are split into fixed
/// blocks, block `b` drawing from stream `b` of `seed`, so results do not
/// depend on the number of worker threads.
pub fn estimate_root_probability(
    inst: &PercolationInstance,
    trials: u64,
    seed: u64,
) -> Result<RootEstimate> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let n = inst.leaf_count()?;
    let (arity, s) = (inst.arity, inst.threshold);
    let blocks = trials.div_ceil(TRIALS_PER_STREAM);
    let block_trials = |b: u64| TRIALS_PER_STREAM.min(trials - b * TRIALS_PER_STREAM);
    let (successes, p): (u64, Option<f64>) = match &inst.leaf_model {
        LeafModel::Iid { p } => {
            let p = *p;
            let successes = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng: SimRng = rng::stream(seed, b);
                    let mut leaves = vec![false; n];
                    (0..block_trials(b))
                        .filter(|_| {
                            leaves.iter_mut().for_each(|l| *l = rng.random_bool(p));
                            root_active(arity, s, &leaves)
                        })
                        .count() as u64
                })
                .sum();
            (successes, Some(p))
        }
        LeafModel::ColouringDerived {
            graph,
            k,
            threshold,
            leaves,
            p,
        } => {
            let lists = ListAssignment::uniform(graph.vertex_count(), *k);
            let counts: Result<Vec<u64>> = (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let mut sampler = Sampler::with_rng(
                        graph,
                        &lists,
                        &SamplerConfig::exact(seed),
                        rng::stream(seed, b),
                    )
                    .map_err(infeasible)?;
                    let mut hits = 0;
                    for _ in 0..block_trials(b) {
                        let mask = leaf_mask(graph, &lists, &mut sampler, leaves, *threshold)?;
                        hits += u64::from(root_active(arity, s, &mask));
                    }
                    Ok(hits)
                })
                .collect();
            (counts?.into_iter().sum(), *p)
        }
        LeafModel::Adversarial | LeafModel::Explicit { .. } => {
            return Err(Error::Precondition(
                "deterministic leaf models have nothing to estimate; use propagate".into(),
            ))
        }
    };
    let estimate = successes as f64 / trials as f64;
    Ok(RootEstimate {
        trials,
        successes,
        estimate,
        std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        bound_log: bounds::percolation_bound(s, inst.depth).ok(),
        hypothesis_ok: p.map(|p| bounds::percolation_hypothesis_check(p, arity, s)),
    })
}

/// `P(Bin(n, q) ≥ s)` exactly.
fn binomial_upper_tail(n: usize, q: &BigRational, s: usize) -> BigRational {
    let miss = BigRational::one() - q;
    let mut total = BigRational::zero();
    let mut binom = BigRational::one();
    for j in 0..=n {
        if j >= s {
            total += &binom * num_traits::pow(q.clone(), j) * num_traits::pow(miss.clone(), n - j);
        }
        binom = binom * BigRational::from_integer((n - j).into())
            / BigRational::from_integer((j + 1).into());
    }
    total
}

/// Exact root probability under i.i.d. leaves: level by level, a node is
/// active with probability `P(Bin(arity, q_child) ≥ s)`.
pub fn exact_root_probability_small(
    arity: usize,
    depth: usize,
    threshold: usize,
    p: &BigRational,
) -> Result<BigRational> {
    if arity < 2 || depth < 1 || threshold < 1 {
        return Err(Error::Domain(
            "need arity >= 2, depth >= 1, threshold >= 1".into(),
        ));
    }
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(Error::Domain("p is not a probability".into()));
    }
    Ok((0..depth).fold(p.clone(), |q, _| binomial_upper_tail(arity, &q, threshold)))
}

/// [`exact_root_probability_small`] for an instance with an i.i.d. model,
/// its float `p` read exactly.
pub fn exact_root_probability(inst: &PercolationInstance) -> Result<BigRational> {
    match inst.leaf_model {
        LeafModel::Iid { p } => {
            let p = BigRational::from_float(p).ok_or_else(|| Error::Domain("p".into()))?;
            exact_root_probability_small(inst.arity, inst.depth, inst.threshold, &p)
        }
        _ => Err(Error::Precondition(
            "exact root probability needs i.i.d. leaves".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domination::{wilson_interval, Z_95};
    use crate::enumeration::{conditioned_count, count_colourings};
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Sum over every leaf mask weighted by its i.i.d. probability.
    fn exhaustive(arity: usize, depth: usize, s: usize, p: &BigRational) -> BigRational {
        let n = arity.pow(depth as u32);
        let mut active_by_weight = vec![0i64; n + 1];
        for bits in 0u32..1 << n {
            let mask: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            if propagate(arity, depth, s, &mask).unwrap().root_active {
                active_by_weight[bits.count_ones() as usize] += 1;
            }
        }
        (0..=n)
            .map(|on| {
                BigRational::from_integer(active_by_weight[on].into())
                    * num_traits::pow(p.clone(), on)
                    * num_traits::pow(BigRational::one() - p, n - on)
            })
            .sum()
    }

    #[test]
    fn propagate_examples() {
        let none = vec![false; 9];
        let mut one = none.clone();
        one[4] = true;
        assert!(!propagate(3, 2, 1, &none).unwrap().root_active);
        assert!(propagate(3, 2, 1, &one).unwrap().root_active);
        let mut almost = vec![true; 9];
        assert!(propagate(3, 2, 3, &almost).unwrap().root_active);
        almost[8] = false;
        assert!(!propagate(3, 2, 3, &almost).unwrap().root_active);
        let prop = propagate(3, 2, 1, &one).unwrap();
        assert_eq!(
            prop.levels.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 3, 9]
        );
        assert_eq!(prop.levels[1], vec![false, true, false]);
        assert!(matches!(
            propagate(3, 2, 1, &[true; 8]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn adversary_needs_s_to_the_f_leaves() {
        for (arity, depth, s) in [(3, 2, 2), (4, 3, 2), (5, 2, 3), (12, 2, 8)] {
            let mask = adversarial_mask(arity, depth, s).unwrap();
            assert_eq!(mask.iter().filter(|&&a| a).count(), s.pow(depth as u32));
            assert!(propagate(arity, depth, s, &mask).unwrap().root_active);
            // dropping any one active leaf deactivates the root
            let first = mask.iter().position(|&a| a).unwrap();
            let mut fewer = mask.clone();
            fewer[first] = false;
            assert!(!propagate(arity, depth, s, &fewer).unwrap().root_active);
        }
    }

    proptest! {
        #[test]
        fn propagation_is_monotone(bits in proptest::collection::vec(0u8..4, 27), s in 1usize..4) {
            let small: Vec<bool> = bits.iter().map(|&b| b == 0).collect();
            let large: Vec<bool> = bits.iter().map(|&b| b <= 1).collect();
            let a = propagate(3, 3, s, &small).unwrap();
            let b = propagate(3, 3, s, &large).unwrap();
            for (la, lb) in a.levels.iter().zip(&b.levels) {
                prop_assert!(la.iter().zip(lb).all(|(&x, &y)| !x || y));
            }
        }
    }

    #[test]
    fn exact_examples() {
        let half = r(1, 2);
        assert_eq!(
            exact_root_probability_small(2, 1, 1, &half).unwrap(),
            r(3, 4)
        );
        assert_eq!(
            exact_root_probability_small(2, 1, 2, &half).unwrap(),
            r(1, 4)
        );
        assert_eq!(
            exact_root_probability_small(2, 2, 2, &half).unwrap(),
            r(1, 16)
        );
        assert_eq!(exhaustive(2, 2, 2, &half), r(1, 16));
        assert!(exact_root_probability_small(1, 1, 1, &half).is_err());
    }

    #[test]
    fn exact_matches_exhaustive_masks() {
        for (arity, depth) in [
            (2, 1),
            (2, 2),
            (2, 3),
            (2, 4),
            (3, 1),
            (3, 2),
            (4, 1),
            (4, 2),
            (5, 1),
            (8, 1),
            (16, 1),
        ] {
            for s in 1..=arity {
                for p in [r(1, 4), r(1, 2), r(3, 4)] {
                    assert_eq!(
                        exact_root_probability_small(arity, depth, s, &p).unwrap(),
                        exhaustive(arity, depth, s, &p),
                        "arity {arity} depth {depth} s {s}"
                    );
                }
            }
        }
    }

    #[test]
    fn estimate_examples() {
        let zero = PercolationInstance::new(3, 2, 1, LeafModel::Iid { p: 0.0 }).unwrap();
        assert_eq!(
            estimate_root_probability(&zero, 1000, 1).unwrap().estimate,
            0.0
        );
        let one = PercolationInstance::new(3, 2, 3, LeafModel::Iid { p: 1.0 }).unwrap();
        assert_eq!(
            estimate_root_probability(&one, 1000, 1).unwrap().estimate,
            1.0
        );
        let adv = PercolationInstance::new(3, 2, 2, LeafModel::Adversarial).unwrap();
        assert!(estimate_root_probability(&adv, 10, 1).is_err());
        assert!(estimate_root_probability(&zero, 0, 1).is_err());
        assert!(PercolationInstance::new(3, 2, 1, LeafModel::Iid { p: 1.5 }).is_err());
    }

    #[test]
    fn estimates_agree_with_exact_values() {
        for (arity, depth, s, p) in [
            (2, 2, 1, 0.3),
            (3, 2, 2, 0.5),
            (4, 2, 2, 0.25),
            (3, 3, 2, 0.6),
        ] {
            let inst = PercolationInstance::new(arity, depth, s, LeafModel::Iid { p }).unwrap();
            let est = estimate_root_probability(&inst, 50_000, 3).unwrap();
            let exact = exact_root_probability(&inst).unwrap().to_f64().unwrap();
            assert!(
                (est.estimate - exact).abs() <= 4.0 * est.std_error.max(1e-9),
                "{est:?} vs {exact}"
            );
            assert_eq!(est, estimate_root_probability(&inst, 50_000, 3).unwrap());
        }
    }

    #[test]
    fn bound_holds_when_hypothesis_holds() {
        let inst = PercolationInstance::new(12, 2, 8, LeafModel::Iid { p: 1.0 / 9.0 }).unwrap();
        let est = estimate_root_probability(&inst, 100_000, 5).unwrap();
        assert_eq!(est.hypothesis_ok, Some(true));
        assert_eq!(est.bound_log, Some(-8.0));
        assert!(est.estimate <= (-8.0f64).exp() + 3.0 * est.std_error);
    }

    /// A hub joined to four leaves, each leaf in its own triangle.
    fn hub_of_triangles() -> (Graph, Vec<usize>) {
        let mut edges = Vec::new();
        let leaves: Vec<usize> = (0..4).map(|i| 1 + 3 * i).collect();
        for &l in &leaves {
            edges.extend([(0, l), (l, l + 1), (l, l + 2), (l + 1, l + 2)]);
        }
        (Graph::from_edges(13, &edges).unwrap(), leaves)
    }

    #[test]
    fn colouring_leaf_examples() {
        let (g, leaves) = hub_of_triangles();
        let mut r = rng::seeded(2);
        assert!(colouring_leaf_model(&g, 4, &leaves, 4, &mut r)
            .unwrap()
            .iter()
            .all(|&a| a));
        assert!(colouring_leaf_model(&g, 4, &leaves, 0, &mut r)
            .unwrap()
            .iter()
            .all(|&a| !a));
        assert!(matches!(
            colouring_leaf_model(&g, 2, &leaves, 1, &mut r),
            Err(Error::Infeasible(_))
        ));

        let lists = ListAssignment::uniform(13, 4);
        let hits = conditioned_count(&g, &lists, |s| {
            available_colours(&g, &lists, s, leaves[0]).len() <= 1
        })
        .unwrap()
        .count;
        let exact = BigRational::new(
            hits.into(),
            count_colourings(&g, &lists).unwrap().count.into(),
        )
        .to_f64()
        .unwrap();
        let draws = 4000;
        let active = (0..draws)
            .filter(|_| colouring_leaf_model(&g, 4, &leaves, 1, &mut r).unwrap()[0])
            .count() as u64;
        let (lo, hi) = wilson_interval(active, draws, Z_95 * 1.5).unwrap();
        assert!(lo <= exact && exact <= hi, "{active}/{draws} vs {exact}");
    }

    #[test]
    fn colouring_derived_estimation() {
        let (g, leaves) = hub_of_triangles();
        let model = LeafModel::ColouringDerived {
            graph: g,
            k: 4,
            threshold: 1,
            leaves,
            p: None,
        };
        let inst = PercolationInstance::new(2, 2, 2, model).unwrap();
        let est = estimate_root_probability(&inst, 5000, 9).unwrap();
        assert_eq!(est.hypothesis_ok, None);
        assert!(est.estimate > 0.0 && est.estimate < 1.0);
        assert_eq!(est, estimate_root_probability(&inst, 5000, 9).unwrap());
    }
}
