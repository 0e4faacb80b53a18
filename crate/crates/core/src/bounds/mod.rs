//! Closed-form bounds on list sizes, colouring counts, tails and
//! percolation probabilities.
//!
//! Counting bounds live in log space. Hypotheses of the underlying
//! statements are evaluated and attached to the result instead of being
//! enforced; only mathematically undefined inputs are errors.

mod lambert;

pub use lambert::lambert_w;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Relative slack used when a hypothesis compares computed reals.
const HYPOTHESIS_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub satisfied: bool,
}

impl Hypothesis {
    fn new(name: &str, satisfied: bool) -> Self {
        Self {
            name: name.to_string(),
            satisfied,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub log_value: f64,
    pub hypotheses: Vec<Hypothesis>,
}

impl BoundValue {
    fn linear(value: f64, hypotheses: Vec<Hypothesis>) -> Self {
        Self {
            value,
            log_value: value.ln(),
            hypotheses,
        }
    }

    fn logarithmic(log_value: f64, hypotheses: Vec<Hypothesis>) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
            hypotheses,
        }
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.satisfied)
    }

    pub fn hypothesis(&self, name: &str) -> Option<bool> {
        self.hypotheses
            .iter()
            .find(|h| h.name == name)
            .map(|h| h.satisfied)
    }
}

fn at_least(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - HYPOTHESIS_RTOL * rhs.abs().max(1.0)
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// `ρ = Δ/(d+1)`, required to exceed 1 wherever `ln ρ` is a divisor.
pub fn density_ratio(max_degree: usize, d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(domain(format!("local density d must be >= 0, got {d}")));
    }
    let rho = max_degree as f64 / (d + 1.0);
    if rho <= 1.0 {
        return Err(domain(format!("rho = Δ/(d+1) = {rho} must exceed 1")));
    }
    Ok(rho)
}

/// `deg / W(deg/c)`, written as `c·e^{W(deg/c)}` so that `deg = 0` gives `c`.
fn degree_over_w(deg: f64, c: f64) -> Result<f64> {
    Ok(c * lambert_w(deg / c)?.exp())
}

/// List size `(1 + 2/ln ρ)·deg/W(deg/ℓ)` that guarantees an expected
/// available list of at least `ℓ` at a vertex of degree `deg`.
pub fn required_list_size(deg: usize, d: f64, max_degree: usize, ell: f64) -> Result<BoundValue> {
    let rho = density_ratio(max_degree, d)?;
    if !(ell > 0.0) {
        return Err(domain(format!(
            "target list size must be positive, got {ell}"
        )));
    }
    let value = (1.0 + 2.0 / rho.ln()) * degree_over_w(deg as f64, ell)?;
    Ok(BoundValue::linear(
        value,
        vec![
            Hypothesis::new("ell_floor", at_least(ell, (d + 1.0) * rho.ln().powi(3))),
            Hypothesis::new("density", at_least(max_degree as f64 / 6.0 - 1.0, d)),
            Hypothesis::new("deg_at_most_max_degree", deg <= max_degree),
        ],
    ))
}

/// Per-vertex `q(v) = (1 + 1/ln ρ)·deg/W(deg/((d+1)(ln ρ)³))` of the
/// counting bound.
pub fn required_q(deg: usize, d: f64, max_degree: usize) -> Result<f64> {
    let rho = density_ratio(max_degree, d)?;
    let scale = (d + 1.0) * rho.ln().powi(3);
    Ok((1.0 + 1.0 / rho.ln()) * degree_over_w(deg as f64, scale)?)
}

/// List size `(1 + 1/ln ρ)·q` the counting bound asks of a vertex.
pub fn counting_list_size(q: f64, max_degree: usize, d: f64) -> Result<f64> {
    let rho = density_ratio(max_degree, d)?;
    Ok((1.0 + 1.0 / rho.ln()) * q)
}

fn coupon(k: f64, draws: f64, t: f64, expected_short: f64) -> Result<BoundValue> {
    let k0 = k - expected_short;
    if !(k0 > 0.0) {
        return Err(domain(format!("k0 = k - E[X] = {k0} must be positive")));
    }
    if !(t >= 1.0) {
        return Err(domain(format!("threshold t must be at least 1, got {t}")));
    }
    if !(draws >= 0.0) || !(expected_short >= 0.0) {
        return Err(domain("draw count and E[X] must be non-negative"));
    }
    let value = k0 * (-(1.0 + 1.0 / t) * draws / k0).exp();
    Ok(BoundValue::linear(
        value,
        vec![Hypothesis::new("t_integer", t.fract() == 0.0)],
    ))
}

/// `k₀·e^{−(1+1/t)d/k₀}` with `k₀ = k − E[X]`: lower bound on the expected
/// number of colours of `[k]` missed by `d` uniform picks from random lists,
/// `X` counting lists of size at most `t`.
pub fn coupon_lower_bound(k: usize, d: usize, t: usize, expected_short: f64) -> Result<BoundValue> {
    coupon(k as f64, d as f64, t as f64, expected_short)
}

/// The graph version: `k₀·e^{−(1+1/t)n/k₀}` for the colours missed by a
/// uniform list colouring of an `n`-vertex graph.
pub fn generalised_coupon_bound(
    k: usize,
    n_vertices: usize,
    t: usize,
    expected_short: f64,
) -> Result<BoundValue> {
    coupon(k as f64, n_vertices as f64, t as f64, expected_short)
}

/// `min(1, t/ℓ)`.
pub fn list_tail_bound(t: f64, ell: f64) -> Result<f64> {
    if !(ell > 0.0) || !(t >= 0.0) {
        return Err(domain(format!(
            "need ell > 0 and t >= 0, got t = {t}, ell = {ell}"
        )));
    }
    Ok((t / ell).min(1.0))
}

/// Log of `(q/√(D/(d+1)))^n` where `q` and `D` are the geometric means of
/// `q_values` and of the degrees.
pub fn count_lower_bound(g: &Graph, q_values: &[f64], d: f64) -> Result<BoundValue> {
    let n = g.vertex_count();
    if q_values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: q_values.len(),
        });
    }
    if n == 0 {
        return Err(domain("counting bound of the empty graph"));
    }
    if let Some(v) = (0..n).find(|&v| g.degree(v) == 0) {
        return Err(domain(format!("vertex {v} has degree 0; D is undefined")));
    }
    if let Some(q) = q_values.iter().find(|q| !(**q > 0.0)) {
        return Err(domain(format!("q values must be positive, got {q}")));
    }
    if !(d >= 0.0) {
        return Err(domain(format!("d must be >= 0, got {d}")));
    }
    let ln_q: f64 = q_values.iter().map(|q| q.ln()).sum::<f64>() / n as f64;
    let ln_d: f64 = (0..n).map(|v| (g.degree(v) as f64).ln()).sum::<f64>() / n as f64;
    let log_value = n as f64 * (ln_q - 0.5 * (ln_d - (d + 1.0).ln()));

    let max_degree = g.max_degree();
    let q_floor = density_ratio(max_degree, d).is_ok()
        && (0..n).all(|v| {
            required_q(g.degree(v), d, max_degree).is_ok_and(|req| at_least(q_values[v], req))
        });
    Ok(BoundValue::logarithmic(
        log_value,
        vec![
            Hypothesis::new("density", at_least(max_degree as f64 / 6.0 - 1.0, d)),
            Hypothesis::new("local_density", at_least(d, g.local_density())),
            Hypothesis::new("q_floor", q_floor),
        ],
    ))
}

/// Log of `(1−1/k)^m·((1−δ)k)^n` with `δ = (4/k)e^{Δ/k}`. When `δ ≥ 1` the
/// bound is vacuous: the log value is `−∞` and `non_vacuous` is false.
pub fn bbck_lower_bound(n: usize, m: usize, k: usize, max_degree: usize) -> Result<BoundValue> {
    if k == 0 {
        return Err(domain("k must be positive"));
    }
    let kf = k as f64;
    let delta = 4.0 / kf * (max_degree as f64 / kf).exp();
    let non_vacuous = delta < 1.0;
    let log_value = if non_vacuous {
        m as f64 * (1.0 - 1.0 / kf).ln() + n as f64 * ((1.0 - delta) * kf).ln()
    } else {
        f64::NEG_INFINITY
    };
    let dl = max_degree as f64;
    let k_regime = max_degree >= 2 && kf > dl / dl.ln();
    Ok(BoundValue::logarithmic(
        log_value,
        vec![
            Hypothesis::new("non_vacuous", non_vacuous),
            Hypothesis::new("k_above_delta_over_ln_delta", k_regime),
        ],
    ))
}

/// `δ` of the BBCK bound.
pub fn bbck_delta(k: usize, max_degree: usize) -> f64 {
    4.0 / k as f64 * (max_degree as f64 / k as f64).exp()
}

/// Free energy `ln k + (Δ/2)·ln(1 − 1/k)` of the infinite `Δ`-regular tree.
pub fn tree_free_energy(max_degree: usize, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(domain(format!("tree free energy needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    Ok(kf.ln() + max_degree as f64 / 2.0 * (1.0 - 1.0 / kf).ln())
}

/// `[e^δ/(1+δ)^{1+δ}]^μ`, a bound on `P(X ≥ (1+δ)μ)`.
pub fn chernoff_upper(mu: f64, delta: f64) -> Result<f64> {
    if !(mu >= 0.0) || !(delta >= 0.0) {
        return Err(domain(format!("need mu, delta >= 0, got {mu}, {delta}")));
    }
    if mu == 0.0 {
        return Ok(1.0);
    }
    Ok((mu * (delta - (1.0 + delta) * delta.ln_1p())).exp())
}

/// `e^{−σ}`, a bound on `P(X ≥ σ)` valid for `σ ≥ 6μ`.
pub fn chernoff_upper_abs(mu: f64, sigma: f64) -> Result<f64> {
    if !(mu >= 0.0) || !(sigma >= 0.0) {
        return Err(domain(format!("need mu, sigma >= 0, got {mu}, {sigma}")));
    }
    if !at_least(sigma, 6.0 * mu) {
        return Err(Error::Precondition(format!(
            "absolute Chernoff form needs sigma >= 6 mu, got sigma = {sigma}, mu = {mu}"
        )));
    }
    Ok((-sigma).exp())
}

/// `e^{−δ²ℓ/2}`, doubled on request, capped at 1.
pub fn lower_tail_bound(delta: f64, ell: f64, doubled: bool) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) || !(ell > 0.0) {
        return Err(domain(format!(
            "need 0 < delta < 1 and ell > 0, got delta = {delta}, ell = {ell}"
        )));
    }
    let factor = if doubled { 2.0 } else { 1.0 };
    Ok((factor * (-delta * delta * ell / 2.0).exp()).min(1.0))
}

/// Log of the root-activation bound `exp(−s^{⌈f/2⌉})`.
pub fn percolation_bound(s: usize, f: usize) -> Result<f64> {
    if s < 2 || f < 1 {
        return Err(domain(format!(
            "need s >= 2 and f >= 1, got s = {s}, f = {f}"
        )));
    }
    Ok(-(s as f64).powi(f.div_ceil(2) as i32))
}

/// `s ≥ max(6pΔ, 3 ln Δ)`, with a relative tolerance for exact ties.
pub fn percolation_hypothesis_check(p: f64, arity: usize, s: usize) -> bool {
    let s = s as f64;
    let arity = arity as f64;
    arity >= 2.0 && at_least(s, 6.0 * p * arity) && at_least(s, 3.0 * arity.ln())
}

/// `(1 + 2/ln ρ)·Δ/W(ρ/(ln ρ)³)` with `ρ = min(f/3, Δ/3)`.
pub fn vu_list_bound(max_degree: usize, f: f64) -> Result<BoundValue> {
    let rho = (f / 3.0).min(max_degree as f64 / 3.0);
    if !(rho > 1.0) {
        return Err(domain(format!("rho = min(f, Δ)/3 = {rho} must exceed 1")));
    }
    let w = lambert_w(rho / rho.ln().powi(3))?;
    let value = (1.0 + 2.0 / rho.ln()) * max_degree as f64 / w;
    Ok(BoundValue::linear(
        value,
        vec![Hypothesis::new(
            "f_range",
            f >= 1.0 && f <= (max_degree as f64).powi(2) + 1.0,
        )],
    ))
}

/// `∏ (1 − 1/(|L(v)| − deg(v)))`: lower bound on the probability that a
/// uniform list colouring avoids a given colour.
pub fn avoidance_probability_lower(list_sizes: &[f64], degrees: &[f64]) -> Result<f64> {
    if list_sizes.len() != degrees.len() {
        return Err(Error::LengthMismatch {
            expected: list_sizes.len(),
            found: degrees.len(),
        });
    }
    let mut prod = 1.0;
    for (&size, &deg) in list_sizes.iter().zip(degrees) {
        let slack = size - deg;
        if !(slack >= 1.0) {
            return Err(domain(format!(
                "need |L(v)| >= deg(v) + 1, got {size} and {deg}"
            )));
        }
        prod *= 1.0 - 1.0 / slack;
    }
    Ok(prod)
}
