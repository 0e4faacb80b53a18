//! Exact checks of Bernoulli domination, negative correlation, the
//! renormalisation step and Chernoff-type tails, plus a Monte-Carlo
//! fallback for single events.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::colouring::{available_colours, Colour, Colouring, ListAssignment};
use crate::enumeration::Enumerator;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampling::{Sampler, SamplerConfig};

/// Largest index set handled by exhaustive subset iteration.
pub const MAX_VARIABLES: usize = 20;
/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// A binary function of a colouring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Indicator {
    /// `ℓ_σ(vertex) ≤ threshold`.
    ShortList { vertex: usize, threshold: usize },
    /// `σ(vertex) ∈ colours`.
    ColourIn { vertex: usize, colours: Vec<Colour> },
}

impl Indicator {
    fn vertex(&self) -> usize {
        match self {
            Indicator::ShortList { vertex, .. } | Indicator::ColourIn { vertex, .. } => *vertex,
        }
    }

    fn holds(&self, g: &Graph, lists: &ListAssignment, sigma: &Colouring) -> bool {
        match self {
            Indicator::ShortList { vertex, threshold } => {
                available_colours(g, lists, sigma, *vertex).len() <= *threshold
            }
            Indicator::ColourIn { vertex, colours } => {
                sigma.get(*vertex).is_some_and(|c| colours.contains(&c))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryFamilySpec {
    pub variables: Vec<Indicator>,
}

impl BinaryFamilySpec {
    pub fn short_lists(vertices: &[usize], threshold: usize) -> Self {
        Self {
            variables: vertices
                .iter()
                .map(|&vertex| Indicator::ShortList { vertex, threshold })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Outcome mask of σ: bit `i` is `X_i(σ)`.
    pub fn mask(&self, g: &Graph, lists: &ListAssignment, sigma: &Colouring) -> usize {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, x)| x.holds(g, lists, sigma))
            .fold(0, |m, (i, _)| m | (1 << i))
    }
}

/// Law of a vector of binary variables: `P(mask) = weights[mask] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    variables: usize,
    weights: Vec<BigUint>,
    denominator: BigUint,
}

impl JointDistribution {
    pub fn from_weights(variables: usize, weights: Vec<BigUint>) -> Result<Self> {
        check_variable_count(variables)?;
        if weights.len() != 1 << variables {
            return Err(Error::LengthMismatch {
                expected: 1 << variables,
                found: weights.len(),
            });
        }
        let denominator: BigUint = weights.iter().sum();
        if denominator.is_zero() {
            return Err(Error::EmptySolutionSpace);
        }
        Ok(Self {
            variables,
            weights,
            denominator,
        })
    }

    /// Independent variables with `P(X_i = 1) = probs[i]`.
    pub fn independent(probs: &[BigRational]) -> Result<Self> {
        check_variable_count(probs.len())?;
        if probs
            .iter()
            .any(|p| p < &BigRational::zero() || p > &BigRational::one())
        {
            return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
        }
        let denominator: BigInt = probs.iter().map(|p| p.denom().clone()).product();
        let weights = (0usize..1 << probs.len())
            .map(|mask| {
                let w: BigRational = probs
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        if mask >> i & 1 == 1 {
                            p.clone()
                        } else {
                            BigRational::one() - p
                        }
                    })
                    .product();
                let scaled = w * BigRational::from_integer(denominator.clone());
                debug_assert!(scaled.is_integer());
                scaled.to_integer().to_biguint().expect("non-negative")
            })
            .collect();
        Self::from_weights(probs.len(), weights)
    }

    /// Law of `family` under the uniform colouring of `(g, lists)`, by full
    /// enumeration.
    pub fn from_colourings(
        g: &Graph,
        lists: &ListAssignment,
        family: &BinaryFamilySpec,
    ) -> Result<Self> {
        check_variable_count(family.len())?;
        for x in &family.variables {
            g.check_vertex(x.vertex())?;
        }
        let mut counts = vec![0u64; 1 << family.len()];
        for sigma in Enumerator::new(g, lists)?.iter()? {
            counts[family.mask(g, lists, &sigma)] += 1;
        }
        Self::from_weights(
            family.len(),
            counts.into_iter().map(BigUint::from).collect(),
        )
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn probability(&self, mask: usize) -> BigRational {
        ratio(&self.weights[mask], &self.denominator)
    }

    /// `E[∏_{i∈J} X_i]` for every `J`, indexed by mask.
    pub fn subset_expectations(&self) -> SubsetExpectations {
        let mut sums = self.weights.clone();
        for bit in 0..self.variables {
            for mask in 0..sums.len() {
                if mask >> bit & 1 == 0 {
                    let upper = sums[mask | 1 << bit].clone();
                    sums[mask] += upper;
                }
            }
        }
        SubsetExpectations {
            variables: self.variables,
            numerators: sums,
            denominator: self.denominator.clone(),
        }
    }

    /// Law of `Σ X_i`: entry `j` is `P(Σ X_i = j)`.
    pub fn sum_distribution(&self) -> Vec<BigRational> {
        let mut by_sum = vec![BigUint::zero(); self.variables + 1];
        for (mask, w) in self.weights.iter().enumerate() {
            by_sum[mask.count_ones() as usize] += w;
        }
        by_sum.iter().map(|w| ratio(w, &self.denominator)).collect()
    }

    /// Law of the indicators `R_i = 1{Σ_{j∈Q_i} X_j > threshold}`.
    fn block_exceedances(&self, blocks: &[Vec<usize>], threshold: &BigRational) -> Result<Self> {
        let mut weights = vec![BigUint::zero(); 1 << blocks.len()];
        for (mask, w) in self.weights.iter().enumerate() {
            let r = blocks.iter().enumerate().fold(0usize, |r, (i, block)| {
                let hits = block.iter().filter(|&&j| mask >> j & 1 == 1).count();
                if BigRational::from_integer(hits.into()) > *threshold {
                    r | 1 << i
                } else {
                    r
                }
            });
            weights[r] += w;
        }
        Self::from_weights(blocks.len(), weights)
    }
}

fn check_variable_count(n: usize) -> Result<()> {
    if n > MAX_VARIABLES {
        return Err(Error::Precondition(format!(
            "{n} variables exceed the exhaustive limit of {MAX_VARIABLES}"
        )));
    }
    Ok(())
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(num.clone().into(), den.clone().into())
}

/// Exact rational at or above `x`, one ulp up for positive `x`.
fn rational_at_or_above(x: f64) -> Result<BigRational> {
    let up = if x > 0.0 { x.next_up() } else { x };
    BigRational::from_float(up).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

fn subset_of(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize)
        .filter(|&i| mask >> i & 1 == 1)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetExpectations {
    variables: usize,
    numerators: Vec<BigUint>,
    denominator: BigUint,
}

impl SubsetExpectations {
    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn expectation(&self, mask: usize) -> BigRational {
        ratio(&self.numerators[mask], &self.denominator)
    }

    /// `(J, E[∏_J X])` in mask order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, BigRational)> + '_ {
        (0..self.numerators.len()).map(|m| (subset_of(m), self.expectation(m)))
    }

    /// `J ⊆ J′ ⇒ E[∏_J] ≥ E[∏_{J′}]`.
    pub fn is_monotone(&self) -> bool {
        (0..self.numerators.len()).all(|m| {
            (0..self.variables)
                .filter(|b| m >> b & 1 == 0)
                .all(|b| self.numerators[m] >= self.numerators[m | 1 << b])
        })
    }
}

pub fn subset_product_expectations(
    g: &Graph,
    lists: &ListAssignment,
    family: &BinaryFamilySpec,
) -> Result<SubsetExpectations> {
    Ok(JointDistribution::from_colourings(g, lists, family)?.subset_expectations())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub p: f64,
    pub dominated: bool,
    /// Nonempty `J` minimising `p^{|J|} − E[∏_J X]`.
    pub worst_subset: Option<Vec<usize>>,
    /// That minimum; negative exactly when domination fails.
    pub slack: Option<f64>,
    /// Whether the variables sit on an independent vertex set, when known.
    pub independence: Option<bool>,
}

/// Exact check of `E[∏_J X] ≤ p^{|J|}` for all `J`. `p` is rounded up by
/// one ulp before the exact comparison so float error never reports a
/// spurious violation.
pub fn check_ber_domination(expectations: &SubsetExpectations, p: f64) -> Result<DominationReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} is not a probability")));
    }
    let exact_p = rational_at_or_above(p)?;
    let (a, b) = (exact_p.numer().clone(), exact_p.denom().clone());
    let den = BigInt::from(expectations.denominator.clone());
    let powers: Vec<(BigInt, BigInt)> = (0..=expectations.variables)
        .map(|j| (num_traits::pow(a.clone(), j), num_traits::pow(b.clone(), j)))
        .collect();
    let verdicts: Vec<(usize, bool, f64)> = (1..expectations.numerators.len())
        .into_par_iter()
        .map(|mask| {
            let j = mask.count_ones() as usize;
            let num = BigInt::from(expectations.numerators[mask].clone());
            let (pa, pb) = &powers[j];
            let ok = &num * pb <= pa * &den;
            let e = expectations.expectation(mask).to_f64().unwrap_or(f64::NAN);
            (mask, ok, p.powi(j as i32) - e)
        })
        .collect();
    let worst = verdicts
        .iter()
        .min_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)));
    Ok(DominationReport {
        p,
        dominated: verdicts.iter().all(|v| v.1),
        worst_subset: worst.map(|w| subset_of(w.0)),
        slack: worst.map(|w| w.2),
        independence: None,
    })
}

/// Domination check for a colouring-derived family, recording whether the
/// family's vertices are pairwise non-adjacent.
pub fn check_family_domination(
    g: &Graph,
    lists: &ListAssignment,
    family: &BinaryFamilySpec,
    p: f64,
) -> Result<(SubsetExpectations, DominationReport)> {
    let expectations = subset_product_expectations(g, lists, family)?;
    let mut report = check_ber_domination(&expectations, p)?;
    let mut vertices: Vec<usize> = family.variables.iter().map(Indicator::vertex).collect();
    vertices.sort_unstable();
    vertices.dedup();
    report.independence = Some(g.is_independent_set(&vertices)?);
    Ok((expectations, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeCorrelationReport {
    pub vertex: usize,
    pub colours: Vec<Colour>,
    pub extensions: String,
    /// `P(E_x)` per colour, as exact fractions.
    pub marginals: Vec<String>,
    pub joint: String,
    pub product: String,
    /// The inequality holds for every subset of `colours`.
    pub holds: bool,
    /// Subset with the largest `P(∧E_x) − ∏P(E_x)`, if any is violated.
    pub worst_subset: Option<Vec<Colour>>,
}

/// Exact test of `P(∧_{x∈X} E_x) ≤ ∏ P(E_x)` with `E_x = {x ∈ σ(N(v))}`,
/// where σ is a uniform extension of `sigma0` to `G ∖ v`. Entries of
/// `sigma0` on `N[v]` are ignored; it must be total elsewhere.
pub fn check_negative_correlation(
    g: &Graph,
    lists: &ListAssignment,
    sigma0: &Colouring,
    v: usize,
    colours: &[Colour],
) -> Result<NegativeCorrelationReport> {
    g.check_vertex(v)?;
    sigma0.check_matches(g)?;
    if colours.len() > MAX_VARIABLES {
        return Err(Error::Precondition(
            "too many colours for exhaustive subsets".into(),
        ));
    }
    let mut base = sigma0.with(v, None);
    for &u in g.neighbours(v) {
        base.set(u, None);
    }
    if (0..g.vertex_count()).any(|w| w != v && !g.has_edge(v, w) && base.get(w).is_none()) {
        return Err(Error::Precondition(
            "sigma0 must colour every vertex outside N[v]".into(),
        ));
    }
    let enumerator = Enumerator::new(g, lists)?.deleting(&[v])?.pinning(&base)?;
    let mut counts = vec![0u64; 1 << colours.len()];
    for sigma in enumerator.iter()? {
        let mask = colours
            .iter()
            .enumerate()
            .filter(|(_, &x)| g.neighbours(v).iter().any(|&u| sigma.get(u) == Some(x)))
            .fold(0usize, |m, (i, _)| m | 1 << i);
        counts[mask] += 1;
    }
    let dist = JointDistribution::from_weights(
        colours.len(),
        counts.into_iter().map(BigUint::from).collect(),
    )
    .map_err(|e| match e {
        Error::EmptySolutionSpace => Error::Infeasible("sigma0 has no extension".into()),
        other => other,
    })?;
    let ex = dist.subset_expectations();
    let marginals: Vec<BigRational> = (0..colours.len()).map(|i| ex.expectation(1 << i)).collect();
    let gap = |mask: usize| {
        let product: BigRational = subset_of(mask)
            .iter()
            .map(|&i| marginals[i].clone())
            .product();
        (ex.expectation(mask) - &product, product)
    };
    let worst = (1..1usize << colours.len())
        .map(|m| (m, gap(m).0))
        .filter(|(_, d)| d > &BigRational::zero())
        .max_by(|a, b| a.1.cmp(&b.1));
    let full = (1usize << colours.len()) - 1;
    Ok(NegativeCorrelationReport {
        vertex: v,
        colours: colours.to_vec(),
        extensions: dist.denominator.to_string(),
        marginals: marginals.iter().map(ToString::to_string).collect(),
        joint: ex.expectation(full).to_string(),
        product: gap(full).1.to_string(),
        holds: worst.is_none(),
        worst_subset: worst.map(|(m, _)| subset_of(m).iter().map(|&i| colours[i]).collect()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormalisationReport {
    pub q: f64,
    /// Domination of the underlying family at `p`.
    pub premise: DominationReport,
    /// Domination of the block indicators at `q`.
    pub result: DominationReport,
}

/// Builds `R_i = 1{Σ_{Q_i} X > (1+δ)p|Q_i|}` and checks it is Ber(q)-dominated
/// with `q = chernoff_upper(p|Q_i|, δ)`.
pub fn renormalise_and_check(
    dist: &JointDistribution,
    blocks: &[Vec<usize>],
    delta: f64,
    p: f64,
) -> Result<RenormalisationReport> {
    let size = blocks.first().map_or(0, Vec::len);
    if size == 0 || blocks.iter().any(|b| b.len() != size) {
        return Err(Error::Precondition(
            "blocks must be nonempty and of equal order".into(),
        ));
    }
    let mut seen = vec![false; dist.variables];
    for &j in blocks.iter().flatten() {
        if j >= dist.variables || std::mem::replace(&mut seen[j], true) {
            return Err(Error::Precondition(format!(
                "block index {j} is out of range or repeated"
            )));
        }
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    let premise = check_ber_domination(&dist.subset_expectations(), p)?;
    let threshold = BigRational::from_float(1.0 + delta)
        .ok_or_else(|| Error::Domain("delta".into()))?
        * BigRational::from_float(p).ok_or_else(|| Error::Domain("p".into()))?
        * BigRational::from_integer(size.into());
    let q = bounds::chernoff_upper(p * size as f64, delta)?;
    let renormalised = dist.block_exceedances(blocks, &threshold)?;
    let result = check_ber_domination(&renormalised.subset_expectations(), q)?;
    Ok(RenormalisationReport { q, premise, result })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub mu: f64,
    pub delta: f64,
    pub probability: f64,
    pub bound: f64,
    pub holds: bool,
}

fn tail_check(
    dist: &JointDistribution,
    mu: f64,
    delta: f64,
    bound: f64,
    in_tail: impl Fn(&BigRational) -> bool,
) -> Result<TailCheck> {
    let probability: BigRational = dist
        .sum_distribution()
        .into_iter()
        .enumerate()
        .filter(|(j, _)| in_tail(&BigRational::from_integer((*j).into())))
        .map(|(_, p)| p)
        .sum();
    Ok(TailCheck {
        mu,
        delta,
        probability: probability.to_f64().unwrap_or(f64::NAN),
        bound,
        holds: probability <= rational_at_or_above(bound)?,
    })
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// Exact `P(X ≥ (1+δ)μ)` against `[e^δ/(1+δ)^{1+δ}]^μ`.
pub fn upper_tail_check(dist: &JointDistribution, mu: f64, delta: f64) -> Result<TailCheck> {
    let bound = bounds::chernoff_upper(mu, delta)?;
    let cut = exact(1.0 + delta)? * exact(mu)?;
    tail_check(dist, mu, delta, bound, |x| *x >= cut)
}

/// Exact `P(X ≤ (1−δ)μ)` against `e^{−δ²μ/2}`.
pub fn lower_tail_check(dist: &JointDistribution, mu: f64, delta: f64) -> Result<TailCheck> {
    let bound = bounds::lower_tail_bound(delta, mu, false)?;
    let cut = exact(1.0 - delta)? * exact(mu)?;
    tail_check(dist, mu, delta, bound, |x| *x <= cut)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::Domain("more successes than trials".into()));
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    // the endpoints are exactly 0 and 1 at the extremes
    let low = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    Ok((low, high))
}

/// Monte-Carlo probability of `event` under uniform colourings drawn by the
/// exact sampler, with a 95% Wilson interval.
pub fn tail_probability_empirical<F>(
    g: &Graph,
    lists: &ListAssignment,
    event: F,
    trials: u64,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(&Colouring) -> bool,
{
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let mut sampler = Sampler::new(g, lists, &SamplerConfig::exact(seed))?;
    let mut successes = 0;
    for _ in 0..trials {
        successes += u64::from(event(&sampler.sample()?));
    }
    let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95)?;
    Ok(Estimate {
        successes,
        trials,
        estimate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{conditioned_count, count_colourings, enumerate_colourings};
    use crate::fixtures::{cycle, path, star};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn empty_subset_has_expectation_one() {
        let g = cycle(6);
        let lists = ListAssignment::uniform(6, 3);
        let ex =
            subset_product_expectations(&g, &lists, &BinaryFamilySpec::short_lists(&[0, 2, 4], 1))
                .unwrap();
        assert!(ex.expectation(0).is_one());
        assert!(ex.is_monotone());
    }

    /// Direct oracle: scan all colourings for each subset.
    #[test]
    fn c6_expectations_match_direct_scan() {
        let g = cycle(6);
        let lists = ListAssignment::uniform(6, 3);
        let all: Vec<Colouring> = enumerate_colourings(&g, &lists).unwrap().collect();
        assert_eq!(all.len(), 66);
        let family = BinaryFamilySpec::short_lists(&[0, 2, 4], 1);
        let ex = subset_product_expectations(&g, &lists, &family).unwrap();
        for mask in 0..8usize {
            let hits = all
                .iter()
                .filter(|s| {
                    subset_of(mask).iter().all(|&i| {
                        let v = [0, 2, 4][i];
                        let nbr: std::collections::BTreeSet<_> =
                            g.neighbours(v).iter().map(|&u| s.get(u).unwrap()).collect();
                        3 - nbr.len() <= 1
                    })
                })
                .count();
            assert_eq!(ex.expectation(mask), r(hits as i64, 66));
        }
        // singleton matches conditioned_count / count
        let single = conditioned_count(&g, &lists, |s| {
            available_colours(&g, &lists, s, 0).len() <= 1
        })
        .unwrap();
        assert_eq!(
            ex.expectation(1),
            BigRational::new(
                single.count.into(),
                count_colourings(&g, &lists).unwrap().count.into()
            )
        );
    }

    fn point_family(probs: &[(i64, i64)]) -> SubsetExpectations {
        let ps: Vec<BigRational> = probs.iter().map(|&(n, d)| r(n, d)).collect();
        JointDistribution::independent(&ps)
            .unwrap()
            .subset_expectations()
    }

    #[test]
    fn domination_examples() {
        let zero = point_family(&[(0, 1), (0, 1), (0, 1)]);
        for p in [0.0, 0.3, 1.0] {
            assert!(check_ber_domination(&zero, p).unwrap().dominated);
        }
        let single = point_family(&[(3, 10)]);
        let report = check_ber_domination(&single, 0.25).unwrap();
        assert!(!report.dominated);
        assert_eq!(report.worst_subset, Some(vec![0]));
        assert!(report.slack.unwrap() < 0.0);
        // p = 0.3 exactly is not representable; rounding up keeps equality dominated
        assert!(check_ber_domination(&single, 0.3).unwrap().dominated);
        assert!(check_ber_domination(&single, 1.5).is_err());
        let empty = point_family(&[]);
        let report = check_ber_domination(&empty, 0.5).unwrap();
        assert!(report.dominated && report.worst_subset.is_none());
    }

    #[test]
    fn independent_family_is_dominated_by_its_largest_mean() {
        let ex = point_family(&[(1, 4), (1, 3), (1, 5)]);
        assert_eq!(ex.expectation(0b111), r(1, 60));
        assert!(check_ber_domination(&ex, 1.0 / 3.0).unwrap().dominated);
        assert!(!check_ber_domination(&ex, 0.3).unwrap().dominated);
    }

    #[test]
    fn family_report_flags_independence() {
        let g = cycle(6);
        let lists = ListAssignment::uniform(6, 3);
        let (_, report) = check_family_domination(
            &g,
            &lists,
            &BinaryFamilySpec::short_lists(&[0, 2, 4], 1),
            0.9,
        )
        .unwrap();
        assert_eq!(report.independence, Some(true));
        let (_, report) =
            check_family_domination(&g, &lists, &BinaryFamilySpec::short_lists(&[0, 1], 1), 0.9)
                .unwrap();
        assert_eq!(report.independence, Some(false));
    }

    /// Twins share a neighbourhood, so their short-list events coincide.
    #[test]
    fn twins_are_perfectly_correlated() {
        let g = crate::fixtures::complete_bipartite(2, 3);
        let lists = ListAssignment::uniform(5, 3);
        let ex =
            subset_product_expectations(&g, &lists, &BinaryFamilySpec::short_lists(&[0, 1], 1))
                .unwrap();
        assert_eq!(ex.expectation(0b11), ex.expectation(0b01));
        assert_eq!(ex.expectation(0b01), ex.expectation(0b10));
    }

    #[test]
    fn negative_correlation_examples() {
        let s = star(6);
        let lists = ListAssignment::uniform(7, 3);
        let sigma0 = Colouring::uncoloured(7);
        let report = check_negative_correlation(&s, &lists, &sigma0, 0, &[0, 1]).unwrap();
        assert_eq!(report.extensions, "729");
        assert!(report.holds);
        // P(colour 0 missing from all leaves) = (2/3)^6
        assert_eq!(
            report.marginals[0],
            (BigRational::one() - r(64, 729)).to_string()
        );

        let single = check_negative_correlation(&s, &lists, &sigma0, 0, &[2]).unwrap();
        assert!(single.holds);
        assert_eq!(single.joint, single.product);

        let c5 = cycle(5);
        let lists = ListAssignment::uniform(5, 3);
        for (a, b) in [(0, 1), (1, 0), (0, 2), (2, 1)] {
            let sigma0 = Colouring::from_partial(vec![None, None, Some(a), Some(b), None]);
            let report = check_negative_correlation(&c5, &lists, &sigma0, 0, &[0, 1, 2]).unwrap();
            assert!(report.holds, "{report:?}");
        }
        let bad = Colouring::from_partial(vec![None, None, None, Some(0), None]);
        assert!(check_negative_correlation(&c5, &lists, &bad, 0, &[0]).is_err());
    }

    #[test]
    fn renormalisation_examples() {
        let half = vec![r(1, 2); 6];
        let dist = JointDistribution::independent(&half).unwrap();
        let report =
            renormalise_and_check(&dist, &[vec![0, 1, 2], vec![3, 4, 5]], 1.0, 0.5).unwrap();
        assert!(report.premise.dominated && report.result.dominated);
        for delta in [0.1, 0.3, 0.5] {
            let report =
                renormalise_and_check(&dist, &[vec![0, 1, 2], vec![3, 4, 5]], delta, 0.5).unwrap();
            assert!(report.result.dominated, "delta {delta}: {report:?}");
        }
        // a single block is the plain upper tail
        let report = renormalise_and_check(&dist, &[vec![0, 1, 2, 3, 4, 5]], 0.2, 0.5).unwrap();
        let tail = upper_tail_check(&dist, 3.0, 0.2).unwrap();
        assert!((report.q - tail.bound).abs() < 1e-15);
        assert!(report.result.dominated && tail.holds);

        assert!(renormalise_and_check(&dist, &[vec![0, 1], vec![2]], 1.0, 0.5).is_err());
        assert!(renormalise_and_check(&dist, &[vec![0, 1], vec![1, 2]], 1.0, 0.5).is_err());
        assert!(renormalise_and_check(&dist, &[vec![0, 9]], 1.0, 0.5).is_err());

        let g = cycle(8);
        let lists = ListAssignment::uniform(8, 3);
        assert_eq!(
            count_colourings(&g, &lists).unwrap().count,
            BigUint::from(258u32)
        );
        let family = BinaryFamilySpec::short_lists(&[0, 2, 4, 6], 1);
        let dist = JointDistribution::from_colourings(&g, &lists, &family).unwrap();
        let p = dist.subset_expectations().expectation(1).to_f64().unwrap();
        let report = renormalise_and_check(&dist, &[vec![0, 1], vec![2, 3]], 0.5, p).unwrap();
        assert!(report.q > 0.0 && report.q <= 1.0);
        assert_eq!(report.result.independence, None);
    }

    fn tails_hold(probs: &[f64]) {
        let exact: Vec<BigRational> = probs
            .iter()
            .map(|&p| BigRational::from_float(p).unwrap())
            .collect();
        let dist = JointDistribution::independent(&exact).unwrap();
        let mu: f64 = probs.iter().sum();
        for i in 1..=20 {
            let delta = i as f64 / 20.0;
            assert!(upper_tail_check(&dist, mu, delta).unwrap().holds);
            assert!(upper_tail_check(&dist, mu, 3.0 * delta).unwrap().holds);
            if delta < 1.0 && mu > 0.0 {
                assert!(lower_tail_check(&dist, mu, delta).unwrap().holds);
            }
        }
    }

    #[test]
    fn chernoff_tails_hold_exhaustively() {
        for n in 1..=12 {
            for p in [0.1, 0.3, 0.5] {
                tails_hold(&vec![p; n]);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn chernoff_tails_hold_for_mixed_means(probs in proptest::collection::vec(0.0f64..1.0, 1..9)) {
            tails_hold(&probs);
        }

        #[test]
        fn colouring_expectations_are_monotone(seed in 0u64..1000, t in 0usize..3) {
            let g = crate::graph::generate(&crate::graph::GraphFamilySpec::ErdosRenyi { n: 7, p: 0.35, seed }).unwrap();
            let lists = ListAssignment::uniform(7, 3);
            let family = BinaryFamilySpec::short_lists(&[0, 1, 2, 3], t);
            if let Ok(ex) = subset_product_expectations(&g, &lists, &family) {
                prop_assert!(ex.is_monotone());
            }
        }
    }

    #[test]
    fn tail_check_sees_exact_boundary() {
        // P(X ≥ 2) for two fair coins is 1/4
        let dist = JointDistribution::independent(&[r(1, 2), r(1, 2)]).unwrap();
        let check = upper_tail_check(&dist, 1.0, 1.0).unwrap();
        assert_eq!(check.probability, 0.25);
        assert!(check.holds);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100, Z_95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, Z_95).unwrap();
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson_interval(100, 100, Z_95).unwrap().1, 1.0);
        assert!(wilson_interval(0, 0, Z_95).is_err());
    }

    #[test]
    fn empirical_examples() {
        let g = path(3);
        let lists = ListAssignment::uniform(3, 3);
        let sure = tail_probability_empirical(&g, &lists, |_| true, 500, 1).unwrap();
        assert_eq!(sure.estimate, 1.0);
        let never = tail_probability_empirical(&g, &lists, |_| false, 500, 1).unwrap();
        assert_eq!(never.estimate, 0.0);
        assert!(tail_probability_empirical(&g, &lists, |_| true, 0, 1).is_err());

        // C5 minus vertex 0, realised by isolating it
        let g = cycle(5).without_edge(0, 1).without_edge(0, 4);
        let lists = ListAssignment::uniform(5, 3);
        let event = |s: &Colouring| available_colours(&g, &lists, s, 2).len() <= 1;
        let hits = conditioned_count(&g, &lists, |s| event(s)).unwrap().count;
        let total = count_colourings(&g, &lists).unwrap().count;
        let exact = BigRational::new(hits.into(), total.into())
            .to_f64()
            .unwrap();
        let est = tail_probability_empirical(&g, &lists, event, 20_000, 7).unwrap();
        assert!(
            est.ci_low <= exact && exact <= est.ci_high,
            "{est:?} vs {exact}"
        );
        assert_eq!(
            est,
            tail_probability_empirical(&g, &lists, event, 20_000, 7).unwrap()
        );
    }
}
