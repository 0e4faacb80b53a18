//! Uniform sampling of proper colourings, the neighbourhood resampling
//! step, Glauber dynamics and two randomised colouring heuristics.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::colouring::{available_colours, check_proper, Colour, Colouring, ListAssignment};
use crate::enumeration::Enumerator;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, SimRng};

/// Prefix counts kept by the exact sampler before the cache is flushed.
const PREFIX_CACHE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    ExactSequential,
    Glauber,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub method: SamplingMethod,
    /// Glauber steps before the first sample.
    #[serde(default)]
    pub burn_in: u64,
    /// Glauber steps between successive samples; 0 is treated as 1.
    #[serde(default)]
    pub thin: u64,
}

impl SamplerConfig {
    pub fn exact(seed: u64) -> Self {
        Self {
            seed,
            method: SamplingMethod::ExactSequential,
            burn_in: 0,
            thin: 0,
        }
    }
}

/// Stateful sampler; successive calls to [`Sampler::sample`] continue the
/// same random stream.
pub struct Sampler<'a> {
    graph: &'a Graph,
    lists: &'a ListAssignment,
    rng: SimRng,
    engine: Engine,
}

enum Engine {
    Exact {
        total: BigUint,
        prefix_counts: HashMap<Vec<Colour>, BigUint>,
    },
    Glauber {
        state: Colouring,
        thin: u64,
        started: bool,
        burn_in: u64,
    },
}

impl<'a> Sampler<'a> {
    pub fn new(graph: &'a Graph, lists: &'a ListAssignment, cfg: &SamplerConfig) -> Result<Self> {
        Self::with_rng(graph, lists, cfg, rng::seeded(cfg.seed))
    }

    /// As [`Sampler::new`] but drawing from `rng`; `cfg.seed` is ignored.
    pub fn with_rng(
        graph: &'a Graph,
        lists: &'a ListAssignment,
        cfg: &SamplerConfig,
        rng: SimRng,
    ) -> Result<Self> {
        let enumerator = Enumerator::new(graph, lists)?;
        let engine = match cfg.method {
            SamplingMethod::ExactSequential => {
                let total = enumerator.count()?.count;
                if total.is_zero() {
                    return Err(Error::EmptySolutionSpace);
                }
                Engine::Exact {
                    total,
                    prefix_counts: HashMap::new(),
                }
            }
            SamplingMethod::Glauber => Engine::Glauber {
                state: enumerator.first()?.ok_or(Error::EmptySolutionSpace)?,
                thin: cfg.thin.max(1),
                started: false,
                burn_in: cfg.burn_in,
            },
        };
        Ok(Self {
            graph,
            lists,
            rng,
            engine,
        })
    }

    pub fn sample(&mut self) -> Result<Colouring> {
        let (graph, lists) = (self.graph, self.lists);
        match &mut self.engine {
            Engine::Exact {
                total,
                prefix_counts,
            } => {
                let r = uniform_below(total, &mut self.rng);
                sequential_descent(graph, lists, r, prefix_counts)
            }
            Engine::Glauber {
                state,
                thin,
                started,
                burn_in,
            } => {
                let steps = if *started { *thin } else { *burn_in };
                *started = true;
                for _ in 0..steps {
                    glauber_step_in_place(graph, lists, state, &mut self.rng);
                }
                Ok(state.clone())
            }
        }
    }
}

pub fn sample_uniform(g: &Graph, lists: &ListAssignment, cfg: &SamplerConfig) -> Result<Colouring> {
    Sampler::new(g, lists, cfg)?.sample()
}

pub fn sample_batch(
    g: &Graph,
    lists: &ListAssignment,
    cfg: &SamplerConfig,
    trials: usize,
) -> Result<Vec<Colouring>> {
    let mut sampler = Sampler::new(g, lists, cfg)?;
    (0..trials).map(|_| sampler.sample()).collect()
}

/// Uniform integer in `[0, bound)` by rejection on `bound.bits()` random bits.
fn uniform_below<R: Rng>(bound: &BigUint, rng: &mut R) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_mask = match bits % 32 {
        0 => u32::MAX,
        r => (1u32 << r) - 1,
    };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
        if let Some(last) = digits.last_mut() {
            *last &= top_mask;
        }
        let candidate = BigUint::new(digits);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Colours vertices in id order; at each vertex the colour is chosen by
/// locating `r` among the completion counts of the candidate colours.
fn sequential_descent(
    g: &Graph,
    lists: &ListAssignment,
    mut r: BigUint,
    cache: &mut HashMap<Vec<Colour>, BigUint>,
) -> Result<Colouring> {
    if cache.len() > PREFIX_CACHE_LIMIT {
        cache.clear();
    }
    let n = g.vertex_count();
    let mut sigma = Colouring::uncoloured(n);
    let mut prefix: Vec<Colour> = Vec::with_capacity(n);
    for v in 0..n {
        let mut chosen = None;
        for c in available_colours(g, lists, &sigma, v) {
            prefix.push(c);
            let count = match cache.get(&prefix) {
                Some(c) => c.clone(),
                None => {
                    let pinned = sigma.with(v, Some(c));
                    let count = Enumerator::new(g, lists)?.pinning(&pinned)?.count()?.count;
                    cache.insert(prefix.clone(), count.clone());
                    count
                }
            };
            if r < count {
                chosen = Some(c);
                break;
            }
            r -= count;
            prefix.pop();
        }
        let c = chosen.expect("r lies below the total count");
        sigma.set(v, Some(c));
    }
    Ok(sigma)
}

/// One heat-bath move: a uniform vertex takes a uniform colour from its
/// available list. Returns the chosen vertex.
pub(crate) fn glauber_step_in_place<R: Rng>(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &mut Colouring,
    rng: &mut R,
) -> Option<usize> {
    if g.vertex_count() == 0 {
        return None;
    }
    let v = rng.random_range(0..g.vertex_count());
    let avail = available_colours(g, lists, sigma, v);
    if let Some(&c) = avail.choose(rng) {
        sigma.set(v, Some(c));
    }
    Some(v)
}

/// A single Glauber move from a proper total colouring.
pub fn glauber_step<R: Rng>(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    rng: &mut R,
) -> Result<Colouring> {
    check_proper(g, lists, sigma)?;
    if !sigma.is_total() {
        return Err(Error::Precondition(
            "Glauber dynamics needs a total colouring".into(),
        ));
    }
    let mut next = sigma.clone();
    glauber_step_in_place(g, lists, &mut next, rng);
    Ok(next)
}

/// Lists each `u ∈ N(v)` draws from: `L(u)` minus the colours of its
/// neighbours outside `N[v]`.
fn resample_lists(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
) -> Result<Vec<(usize, Vec<Colour>)>> {
    g.check_vertex(v)?;
    let nbrs = g.neighbours(v);
    if !g.is_independent_set(nbrs)? {
        return Err(Error::Precondition(format!(
            "the neighbourhood of vertex {v} is not an independent set"
        )));
    }
    let rest = sigma.with(v, None);
    check_proper(g, lists, &rest)?;
    if (0..g.vertex_count()).any(|u| u != v && rest.get(u).is_none()) {
        return Err(Error::Precondition(
            "colouring must be total on every vertex but v".into(),
        ));
    }
    let mut outer = rest.clone();
    for &u in nbrs {
        outer.set(u, None);
    }
    Ok(nbrs
        .iter()
        .map(|&u| (u, available_colours(g, lists, &outer, u)))
        .collect())
}

/// Simultaneously redraws every `u ∈ N(v)` uniformly from its list against
/// the colouring outside `N[v]`. The result leaves `v` uncoloured.
pub fn neighbourhood_resample<R: Rng>(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
    rng: &mut R,
) -> Result<Colouring> {
    let draws = resample_lists(g, lists, sigma, v)?;
    let mut out = sigma.with(v, None);
    for (u, avail) in draws {
        let c = *avail.choose(rng).expect("the current colour is available");
        out.set(u, Some(c));
    }
    Ok(out)
}

/// Exact distribution of [`neighbourhood_resample`] from `sigma`.
pub fn neighbourhood_resample_kernel(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &Colouring,
    v: usize,
) -> Result<Vec<(Colouring, BigRational)>> {
    let draws = resample_lists(g, lists, sigma, v)?;
    let mut outcomes = vec![(sigma.with(v, None), BigRational::one())];
    for (u, avail) in draws {
        let weight = BigRational::new(1.into(), avail.len().into());
        outcomes = outcomes
            .into_iter()
            .flat_map(|(s, p)| {
                let weight = weight.clone();
                avail
                    .iter()
                    .map(move |&c| (s.with(u, Some(c)), &p * &weight))
            })
            .collect();
    }
    Ok(outcomes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum GreedyOutcome {
    Success {
        colouring: Colouring,
    },
    /// `at` is the vertex picked with an empty available list.
    Failure {
        at: usize,
        partial: Colouring,
    },
}

/// Repeatedly colours a uniform vertex among those with the fewest
/// available colours, using a uniform available colour.
pub fn greedy_colour<R: Rng>(g: &Graph, k: usize, rng: &mut R) -> GreedyOutcome {
    let lists = ListAssignment::uniform(g.vertex_count(), k);
    let mut sigma = Colouring::uncoloured(g.vertex_count());
    match greedy_complete(g, &lists, &mut sigma, rng) {
        None => GreedyOutcome::Success { colouring: sigma },
        Some(at) => GreedyOutcome::Failure { at, partial: sigma },
    }
}

/// Greedy completion of a partial colouring; returns the blocked vertex.
fn greedy_complete<R: Rng>(
    g: &Graph,
    lists: &ListAssignment,
    sigma: &mut Colouring,
    rng: &mut R,
) -> Option<usize> {
    loop {
        let mut best: Vec<usize> = Vec::new();
        let mut best_len = usize::MAX;
        for v in (0..g.vertex_count()).filter(|&v| sigma.get(v).is_none()) {
            let len = available_colours(g, lists, sigma, v).len();
            if len < best_len {
                best_len = len;
                best.clear();
            }
            if len == best_len {
                best.push(v);
            }
        }
        let &v = best.choose(rng)?;
        let avail = available_colours(g, lists, sigma, v);
        match avail.choose(rng) {
            Some(&c) => sigma.set(v, Some(c)),
            None => return Some(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    /// An uncoloured vertex is Bad when fewer than `max(list_floor, 1)`
    /// colours are available to it.
    pub list_floor: usize,
    pub max_iterations: u64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            list_floor: 1,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LocalSearchOutcome {
    Success {
        colouring: Colouring,
        iterations: u64,
    },
    Failure {
        partial: Colouring,
        iterations: u64,
    },
}

/// Local search on triangle-free graphs: while some uncoloured vertex is
/// Bad, recolour the neighbourhood of a uniform Bad vertex; otherwise try
/// to finish greedily.
pub fn local_search_colour<R: Rng>(
    g: &Graph,
    k: usize,
    cfg: &LocalSearchConfig,
    rng: &mut R,
) -> Result<LocalSearchOutcome> {
    if !g.is_triangle_free() {
        return Err(Error::Precondition(
            "local search needs a triangle-free graph".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let lists = ListAssignment::uniform(g.vertex_count(), k);
    let floor = cfg.list_floor.max(1);
    let mut sigma = Colouring::uncoloured(g.vertex_count());
    for iteration in 0..cfg.max_iterations {
        let bad: Vec<usize> = (0..g.vertex_count())
            .filter(|&v| {
                sigma.get(v).is_none() && available_colours(g, &lists, &sigma, v).len() < floor
            })
            .collect();
        match bad.choose(rng) {
            None => {
                let mut attempt = sigma.clone();
                if greedy_complete(g, &lists, &mut attempt, rng).is_none() {
                    return Ok(LocalSearchOutcome::Success {
                        colouring: attempt,
                        iterations: iteration + 1,
                    });
                }
                sigma = attempt;
            }
            Some(&v) => {
                let mut nbrs = g.neighbours(v).to_vec();
                for &u in &nbrs {
                    sigma.set(u, None);
                }
                nbrs.shuffle(rng);
                for u in nbrs {
                    let avail = available_colours(g, &lists, &sigma, u);
                    sigma.set(u, avail.choose(rng).copied());
                }
            }
        }
    }
    Ok(LocalSearchOutcome::Failure {
        partial: sigma,
        iterations: cfg.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::is_proper;
    use crate::enumeration::enumerate_colourings;
    use crate::fixtures::{complete, complete_bipartite, cycle, path, star};
    use crate::graph::{generate, GraphFamilySpec};
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::BTreeMap;

    fn chi_square_p(counts: &[u64], draws: u64) -> f64 {
        let expected = draws as f64 / counts.len() as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        1.0 - ChiSquared::new((counts.len() - 1) as f64)
            .unwrap()
            .cdf(stat)
    }

    fn histogram(g: &Graph, k: usize, draws: u64, seed: u64) -> Vec<u64> {
        let lists = ListAssignment::uniform(g.vertex_count(), k);
        let index: BTreeMap<Colouring, usize> = enumerate_colourings(g, &lists)
            .unwrap()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let mut counts = vec![0u64; index.len()];
        let mut sampler = Sampler::new(g, &lists, &SamplerConfig::exact(seed)).unwrap();
        for _ in 0..draws {
            counts[index[&sampler.sample().unwrap()]] += 1;
        }
        counts
    }

    #[test]
    fn single_vertex_and_edge_are_uniform() {
        let counts = histogram(&Graph::empty(1), 3, 100_000, 1);
        assert!(chi_square_p(&counts, 100_000) > 1e-3);
        let counts = histogram(&complete(2), 2, 20_000, 2);
        assert_eq!(counts.len(), 2);
        assert!(chi_square_p(&counts, 20_000) > 1e-3);
    }

    #[test]
    fn path_p4_is_uniform() {
        let counts = histogram(&path(4), 3, 200_000, 3);
        assert_eq!(counts.len(), 24);
        assert!(chi_square_p(&counts, 200_000) > 1e-3);
    }

    #[test]
    fn small_graphs_are_uniform() {
        for (seed, (g, k)) in [(cycle(5), 3), (complete_bipartite(2, 3), 3), (star(3), 3)]
            .into_iter()
            .enumerate()
        {
            let counts = histogram(&g, k, 100_000, 10 + seed as u64);
            assert!(counts.len() <= 100);
            assert!(chi_square_p(&counts, 100_000) > 1e-3);
        }
    }

    #[test]
    fn uniform_below_covers_range() {
        let mut r = rng::seeded(0);
        let bound = BigUint::from(5u32);
        let mut seen = [0u32; 5];
        for _ in 0..5000 {
            let x = uniform_below(&bound, &mut r);
            seen[usize::try_from(x.to_u32_digits().first().copied().unwrap_or(0)).unwrap()] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800));
        let big = BigUint::from(1u8) << 100;
        for _ in 0..100 {
            assert!(uniform_below(&big, &mut r) < big);
        }
    }

    #[test]
    fn exact_sampler_reports_empty_space() {
        let lists = ListAssignment::uniform(4, 3);
        assert!(matches!(
            Sampler::new(&complete(4), &lists, &SamplerConfig::exact(0)),
            Err(Error::EmptySolutionSpace)
        ));
    }

    #[test]
    fn samplers_are_reproducible() {
        let g = cycle(7);
        let lists = ListAssignment::uniform(7, 3);
        for method in [SamplingMethod::ExactSequential, SamplingMethod::Glauber] {
            let cfg = SamplerConfig {
                seed: 11,
                method,
                burn_in: 50,
                thin: 3,
            };
            let a = sample_batch(&g, &lists, &cfg, 20).unwrap();
            assert_eq!(a, sample_batch(&g, &lists, &cfg, 20).unwrap());
            assert!(a.iter().all(|s| is_proper(&g, &lists, s) && s.is_total()));
        }
    }

    #[test]
    fn glauber_examples() {
        let mut r = rng::seeded(5);
        let k3 = complete(3);
        let l3 = ListAssignment::uniform(3, 3);
        let sigma = Colouring::from_total(vec![0, 1, 2]);
        for _ in 0..100 {
            assert_eq!(glauber_step(&k3, &l3, &sigma, &mut r).unwrap(), sigma);
        }

        let c4 = cycle(4);
        let l2 = ListAssignment::uniform(4, 2);
        let sigma = Colouring::from_total(vec![0, 1, 0, 1]);
        for _ in 0..100 {
            assert_eq!(glauber_step(&c4, &l2, &sigma, &mut r).unwrap(), sigma);
        }

        let single = Graph::empty(1);
        let l = ListAssignment::uniform(1, 3);
        let start = Colouring::from_total(vec![0]);
        let mut counts = [0u64; 3];
        for _ in 0..30_000 {
            let s = glauber_step(&single, &l, &start, &mut r).unwrap();
            counts[s.get(0).unwrap() as usize] += 1;
        }
        assert!(chi_square_p(&counts, 30_000) > 1e-3);

        assert!(glauber_step(&c4, &l2, &Colouring::from_total(vec![0, 0, 1, 1]), &mut r).is_err());
    }

    #[test]
    fn glauber_moves_are_local_and_proper() {
        let g = generate(&GraphFamilySpec::RandomRegular {
            n: 12,
            degree: 3,
            seed: 4,
            max_retries: 1000,
        })
        .unwrap();
        let lists = ListAssignment::uniform(12, 5);
        let mut r = rng::seeded(9);
        let mut sigma = Enumerator::new(&g, &lists)
            .unwrap()
            .first()
            .unwrap()
            .unwrap();
        for _ in 0..2000 {
            let next = glauber_step(&g, &lists, &sigma, &mut r).unwrap();
            assert!(is_proper(&g, &lists, &next));
            let changed = (0..12).filter(|&v| next.get(v) != sigma.get(v)).count();
            assert!(changed <= 1);
            sigma = next;
        }
    }

    #[test]
    fn resample_examples() {
        let mut r = rng::seeded(1);
        let g = Graph::empty(2);
        let lists = ListAssignment::uniform(2, 3);
        let sigma = Colouring::from_partial(vec![None, Some(2)]);
        assert_eq!(
            neighbourhood_resample(&g, &lists, &sigma, 0, &mut r).unwrap(),
            sigma
        );

        // leaves see no coloured neighbour once the centre is removed
        let s = star(6);
        let lists = ListAssignment::uniform(7, 3);
        let mut sigma = Colouring::from_total(vec![0; 7]);
        sigma.set(0, None);
        let kernel = neighbourhood_resample_kernel(&s, &lists, &sigma, 0).unwrap();
        assert_eq!(kernel.len(), 3usize.pow(6));
        let third = BigRational::new(1.into(), 729.into());
        assert!(kernel.iter().all(|(_, p)| *p == third));

        assert!(matches!(
            neighbourhood_resample(
                &complete(3),
                &ListAssignment::uniform(3, 3),
                &Colouring::from_total(vec![0, 1, 2]),
                0,
                &mut r
            ),
            Err(Error::Precondition(_))
        ));
    }

    /// Exact stationarity of the uniform law on `C(G∖v)`.
    fn uniform_is_stationary(g: &Graph, k: usize, v: usize) -> bool {
        let lists = ListAssignment::uniform(g.vertex_count(), k);
        let states: Vec<Colouring> = Enumerator::new(g, &lists)
            .unwrap()
            .deleting(&[v])
            .unwrap()
            .iter()
            .unwrap()
            .collect();
        let index: HashMap<&Colouring, usize> =
            states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut mass = vec![BigRational::zero(); states.len()];
        for s in &states {
            let kernel = neighbourhood_resample_kernel(g, &lists, s, v).unwrap();
            let row_sum: BigRational = kernel.iter().map(|(_, p)| p.clone()).sum();
            assert!(row_sum.is_one());
            for (t, p) in kernel {
                mass[index[&t]] += p;
            }
        }
        mass.iter().all(|m| m.is_one())
    }

    #[test]
    fn resampling_preserves_uniformity() {
        assert!(uniform_is_stationary(&cycle(5), 3, 0));
        assert!(uniform_is_stationary(&star(6), 3, 0));
        assert!(uniform_is_stationary(&cycle(6), 3, 2));
        assert!(uniform_is_stationary(&complete_bipartite(2, 3), 3, 0));
    }

    #[test]
    fn greedy_examples() {
        let mut r = rng::seeded(2);
        for _ in 0..200 {
            assert!(matches!(
                greedy_colour(&complete(4), 3, &mut r),
                GreedyOutcome::Failure { .. }
            ));
            match greedy_colour(&complete(4), 4, &mut r) {
                GreedyOutcome::Success { colouring } => {
                    assert!(is_proper(
                        &complete(4),
                        &ListAssignment::uniform(4, 4),
                        &colouring
                    ))
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        for seed in 0..10_000u64 {
            let g = generate(&GraphFamilySpec::RandomForest {
                n: 1 + (seed % 50) as usize,
                attach: 0.9,
                seed,
            })
            .unwrap();
            assert!(matches!(
                greedy_colour(&g, 2, &mut rng::seeded(seed)),
                GreedyOutcome::Success { .. }
            ));
        }
    }

    #[test]
    fn local_search_examples() {
        let cfg = LocalSearchConfig::default();
        for seed in 0..1000 {
            let mut r = rng::seeded(seed);
            for (g, k) in [(cycle(5), 3), (complete_bipartite(3, 3), 2)] {
                match local_search_colour(&g, k, &cfg, &mut r).unwrap() {
                    LocalSearchOutcome::Success { colouring, .. } => {
                        let lists = ListAssignment::uniform(g.vertex_count(), k);
                        assert!(is_proper(&g, &lists, &colouring) && colouring.is_total());
                    }
                    other => panic!("seed {seed}: {other:?}"),
                }
            }
        }
        assert!(local_search_colour(&complete(4), 4, &cfg, &mut rng::seeded(0)).is_err());
        let capped = LocalSearchConfig {
            list_floor: 1,
            max_iterations: 50,
        };
        assert!(matches!(
            local_search_colour(&cycle(5), 2, &capped, &mut rng::seeded(0)).unwrap(),
            LocalSearchOutcome::Failure { iterations: 50, .. }
        ));
    }
}
