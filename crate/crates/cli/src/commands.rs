//! Subcommand implementations. Each takes its fully merged parameters and
//! returns a [`Report`]; nothing here touches stdout or the file system
//! except to read graph files.

use std::fmt;

use anyhow::{Context, Result};
use colspace::bounds::{self, BoundValue, Hypothesis};
use colspace::domination::{check_family_domination, SubsetExpectations};
use colspace::enumeration::{free_energy, ln_big};
use colspace::geometry::{build_view, classify_colouring};
use colspace::percolation::{adversarial_mask, exact_root_probability, RootEstimate};
use colspace::sampling::{local_search_colour, GreedyOutcome, LocalSearchConfig, LocalSearchOutcome};
use colspace::{
    check_ber_domination, check_negative_correlation, count_colourings, estimate_root_probability,
    generate, greedy_colour, propagate, renormalise_and_check, rng, sample_batch,
    BinaryFamilySpec, Colouring, Graph, GraphFamilySpec, JointDistribution, LeafModel,
    ListAssignment, PercolationInstance, SamplerConfig, SamplingMethod,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::to_value;

pub const CONFIG_VERSION: u64 = 1;

/// Invalid or missing parameters; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn required<T: Copy>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| usage(format!("missing parameter `{name}`")))
}

/// A rectangular table for CSV output.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    /// Parameters after merging and default resolution.
    pub config: Value,
    pub result: Value,
    pub verdict: Option<bool>,
    /// Records for JSON-lines output, one per line after the header.
    pub lines: Option<Vec<Value>>,
    pub table: Option<Table>,
    pub default_format: Format,
}

impl Report {
    fn new<A: Serialize>(command: &'static str, args: &A, result: Value) -> Self {
        Self {
            command,
            config: to_value(args),
            result,
            verdict: None,
            lines: None,
            table: None,
            default_format: Format::Json,
        }
    }

    fn verdict(mut self, verdict: Option<bool>) -> Self {
        self.verdict = verdict;
        self
    }

    pub fn header(&self) -> Value {
        json!({
            "version": CONFIG_VERSION,
            "command": self.command,
            "config": self.config,
        })
    }

    pub fn document(&self) -> Value {
        let mut doc = self.header();
        doc["result"] = self.result.clone();
        if let Some(v) = self.verdict {
            doc["verdict"] = Value::Bool(v);
        }
        doc
    }
}

pub const COMMANDS: [&str; 9] = [
    "count",
    "sample",
    "classify",
    "clusters",
    "bounds",
    "dominate",
    "percolate",
    "solve",
    "freeenergy",
];

fn parse<T: DeserializeOwned>(command: &str, params: Value) -> Result<T> {
    serde_json::from_value(params)
        .map_err(|e| usage(format!("invalid parameters for `{command}`: {e}")))
}

/// Runs `command` on merged parameters.
pub fn execute(command: &str, params: Value) -> Result<Report> {
    match command {
        "count" => count(parse(command, params)?),
        "sample" => sample(parse(command, params)?),
        "classify" => classify(parse(command, params)?),
        "clusters" => clusters(parse(command, params)?),
        "bounds" => bounds(parse(command, params)?),
        "dominate" => dominate(parse(command, params)?),
        "percolate" => percolate(parse(command, params)?),
        "solve" => solve(parse(command, params)?),
        "freeenergy" => freeenergy(parse(command, params)?),
        other => Err(usage(format!(
            "unknown command `{other}`; expected one of {}",
            COMMANDS.join(", ")
        ))),
    }
}

fn build_graph(args: &GraphArgs) -> Result<Graph> {
    if args.is_empty() {
        return Err(usage("missing graph: give --family or a `graph` object"));
    }
    let spec: GraphFamilySpec = serde_json::from_value(to_value(args))
        .map_err(|e| usage(format!("invalid graph parameters: {e}")))?;
    generate(&spec).context("building the graph")
}

fn build_lists(g: &Graph, k: Option<usize>, lists: &Option<ListAssignment>) -> Result<ListAssignment> {
    match lists {
        Some(lists) => {
            lists.check_matches(g)?;
            Ok(lists.clone())
        }
        None => Ok(ListAssignment::uniform(
            g.vertex_count(),
            required(k, "k")?,
        )),
    }
}

fn count(args: CountArgs) -> Result<Report> {
    let g = build_graph(&args.graph)?;
    let lists = build_lists(&g, args.k, &args.lists)?;
    let result = count_colourings(&g, &lists)?;
    Ok(Report::new(
        "count",
        &args,
        json!({
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "count": result.count.to_string(),
            "log_count": result.log_count,
        }),
    ))
}

fn freeenergy(mut args: FreeEnergyArgs) -> Result<Report> {
    let g = build_graph(&args.graph)?;
    let k = required(args.k, "k")?;
    let max_degree = *args.max_degree.get_or_insert(g.max_degree());
    let f = free_energy(&g, k)?;
    let tree = bounds::tree_free_energy(max_degree, k)?;
    let relative = if tree == 0.0 { f64::NAN } else { f / tree };
    Ok(Report::new(
        "freeenergy",
        &args,
        json!({
            "vertices": g.vertex_count(),
            "free_energy": f,
            "tree_free_energy": tree,
            "relative_free_energy": to_value(&relative),
        }),
    ))
}

fn sample(mut args: SampleArgs) -> Result<Report> {
    let g = build_graph(&args.graph)?;
    let lists = build_lists(&g, args.k, &args.lists)?;
    let method = *args.method.get_or_insert(Method::Exact);
    let cfg = SamplerConfig {
        seed: *args.seed.get_or_insert(0),
        method: match method {
            Method::Exact => SamplingMethod::ExactSequential,
            Method::Glauber => SamplingMethod::Glauber,
        },
        burn_in: *args.burnin.get_or_insert(match method {
            Method::Exact => 0,
            Method::Glauber => 1000,
        }),
        thin: *args.thin.get_or_insert(1),
    };
    let trials = *args.trials.get_or_insert(1);
    let samples: Vec<Value> = sample_batch(&g, &lists, &cfg, trials)?
        .iter()
        .map(to_value)
        .collect();
    let mut report = Report::new(
        "sample",
        &args,
        json!({ "samples": samples.clone() }),
    );
    report.lines = Some(samples);
    report.default_format = Format::Jsonl;
    Ok(report)
}

fn classify(args: ClassifyArgs) -> Result<Report> {
    let g = build_graph(&args.graph)?;
    let k = required(args.k, "k")?;
    let t = required(args.t, "t")?;
    let view = build_view(&g, k, t)?;
    let targets: Vec<Colouring> = match &args.colouring {
        Some(tau) => vec![tau.clone()],
        None => view.colourings().to_vec(),
    };
    let mut statuses = Vec::new();
    let mut rows = Vec::new();
    let mut frozen = 0;
    for (i, tau) in targets.iter().enumerate() {
        for s in classify_colouring(&view, tau)? {
            frozen += usize::from(s.frozen);
            rows.push(vec![
                i.to_string(),
                s.vertex.to_string(),
                s.loose.to_string(),
                s.thawed.to_string(),
                s.rigid.to_string(),
                s.frozen.to_string(),
                s.cluster_id.to_string(),
                s.cluster_size.to_string(),
            ]);
            statuses.push(json!({
                "colouring_index": i,
                "vertex": s.vertex,
                "loose": s.loose,
                "thawed": s.thawed,
                "rigid": s.rigid,
                "frozen": s.frozen,
                "cluster_id": s.cluster_id,
                "cluster_size": s.cluster_size,
            }));
        }
    }
    let pairs = statuses.len();
    let mut report = Report::new(
        "classify",
        &args,
        json!({
            "colourings": to_value(&targets),
            "clusters": view.cluster_count(),
            "frozen_pairs": frozen,
            "all_frozen": frozen == pairs,
            "statuses": statuses,
        }),
    );
    report.table = Some(Table {
        header: vec![
            "colouring_index",
            "vertex",
            "loose",
            "thawed",
            "rigid",
            "frozen",
            "cluster_id",
            "cluster_size",
        ],
        rows,
    });
    report.default_format = Format::Csv;
    Ok(report)
}

fn clusters(args: ClustersArgs) -> Result<Report> {
    let g = build_graph(&args.graph)?;
    let view = build_view(&g, required(args.k, "k")?, required(args.t, "t")?)?;
    let histogram: Vec<Value> = view
        .cluster_size_histogram()
        .into_iter()
        .map(|(size, count)| json!({ "size": size, "count": count }))
        .collect();
    Ok(Report::new(
        "clusters",
        &args,
        json!({
            "colourings": view.len(),
            "edges": view.edge_count(),
            "clusters": view.cluster_count(),
            "histogram": histogram,
        }),
    ))
}

fn integer(x: f64, name: &str) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(usage(format!("`{name}` must be a non-negative integer, got {x}")))
    }
}

fn plain(value: f64) -> BoundValue {
    BoundValue {
        value,
        log_value: value.ln(),
        hypotheses: Vec::new(),
    }
}

fn bounds(args: BoundsArgs) -> Result<Report> {
    use Formula::*;
    let formula = required(args.formula, "formula")?;
    let k = || required(args.k, "k");
    let d = || required(args.d, "d");
    let t = || required(args.t, "t");
    let short = args.short.unwrap_or(0.0);
    let max_degree = || required(args.max_degree, "max_degree");
    let value = match formula {
        Coupon => bounds::coupon_lower_bound(k()?, integer(d()?, "d")?, integer(t()?, "t")?, short)?,
        GeneralisedCoupon => bounds::generalised_coupon_bound(
            k()?,
            required(args.vertices, "vertices")?,
            integer(t()?, "t")?,
            short,
        )?,
        RequiredListSize => bounds::required_list_size(
            required(args.deg, "deg")?,
            d()?,
            max_degree()?,
            required(args.ell, "ell")?,
        )?,
        RequiredQ => plain(bounds::required_q(required(args.deg, "deg")?, d()?, max_degree()?)?),
        CountingListSize => plain(bounds::counting_list_size(
            required(args.q, "q")?,
            max_degree()?,
            d()?,
        )?),
        CountLower => {
            let g = build_graph(&args.graph)?;
            let d = args.d.unwrap_or(0.0);
            let q: Vec<f64> = match args.q {
                Some(q) => vec![q; g.vertex_count()],
                None => (0..g.vertex_count())
                    .map(|v| bounds::required_q(g.degree(v), d, g.max_degree()))
                    .collect::<colspace::Result<_>>()?,
            };
            bounds::count_lower_bound(&g, &q, d)?
        }
        Bbck => {
            if args.graph.is_empty() {
                bounds::bbck_lower_bound(
                    required(args.vertices, "vertices")?,
                    required(args.edges, "edges")?,
                    k()?,
                    max_degree()?,
                )?
            } else {
                let g = build_graph(&args.graph)?;
                bounds::bbck_lower_bound(g.vertex_count(), g.edge_count(), k()?, g.max_degree())?
            }
        }
        TreeFreeEnergy => plain(bounds::tree_free_energy(max_degree()?, k()?)?),
        Chernoff => plain(bounds::chernoff_upper(
            required(args.mu, "mu")?,
            required(args.delta, "delta")?,
        )?),
        ChernoffAbs => plain(bounds::chernoff_upper_abs(
            required(args.mu, "mu")?,
            required(args.sigma, "sigma")?,
        )?),
        LowerTail => plain(bounds::lower_tail_bound(
            required(args.delta, "delta")?,
            required(args.ell, "ell")?,
            args.doubled.unwrap_or(false),
        )?),
        ListTail => plain(bounds::list_tail_bound(t()?, required(args.ell, "ell")?)?),
        Percolation => {
            let s = required(args.s, "s")?;
            let log_value = bounds::percolation_bound(s, integer(required(args.f, "f")?, "f")?)?;
            let mut hypotheses = Vec::new();
            if let (Some(p), Some(arity)) = (args.p, args.arity) {
                hypotheses.push(Hypothesis {
                    name: "s_floor".into(),
                    satisfied: bounds::percolation_hypothesis_check(p, arity, s),
                });
            }
            BoundValue {
                value: log_value.exp(),
                log_value,
                hypotheses,
            }
        }
        Vu => bounds::vu_list_bound(max_degree()?, required(args.f, "f")?)?,
        LambertW => plain(bounds::lambert_w(required(args.x, "x")?)?),
        DensityRatio => plain(bounds::density_ratio(max_degree()?, d()?)?),
    };
    Ok(Report::new("bounds", &args, to_value(&value)))
}

fn expectation_entries(ex: &SubsetExpectations) -> Vec<Value> {
    ex.entries()
        .map(|(subset, e)| json!({ "subset": subset, "expectation": e.to_string() }))
        .collect()
}

fn exact_probability(p: f64) -> Result<BigRational> {
    if !(0.0..=1.0).contains(&p) {
        return Err(usage(format!("p = {p} is not a probability")));
    }
    Ok(BigRational::from_float(p).expect("finite"))
}

/// The joint law of the family: independent coins, or short-list
/// indicators under the uniform colouring.
fn family_distribution(args: &DominateArgs) -> Result<(JointDistribution, Option<Graph>)> {
    if let Some(n) = args.independent {
        let p = exact_probability(required(args.p, "p")?)?;
        return Ok((JointDistribution::independent(&vec![p; n])?, None));
    }
    let g = build_graph(&args.graph)?;
    let lists = build_lists(&g, args.k, &args.lists)?;
    let family = short_list_family(args)?;
    Ok((JointDistribution::from_colourings(&g, &lists, &family)?, Some(g)))
}

fn short_list_family(args: &DominateArgs) -> Result<BinaryFamilySpec> {
    let vertices = args
        .vertices
        .as_ref()
        .ok_or_else(|| usage("missing parameter `vertices`"))?;
    Ok(BinaryFamilySpec::short_lists(
        vertices,
        required(args.threshold, "threshold")?,
    ))
}

fn dominate(mut args: DominateArgs) -> Result<Report> {
    let mode = *args.mode.get_or_insert(DominateMode::Domination);
    match mode {
        DominateMode::Domination => {
            let p = required(args.p, "p")?;
            let (ex, report) = if args.independent.is_some() {
                let (dist, _) = family_distribution(&args)?;
                let ex = dist.subset_expectations();
                let report = check_ber_domination(&ex, p)?;
                (ex, report)
            } else {
                let g = build_graph(&args.graph)?;
                let lists = build_lists(&g, args.k, &args.lists)?;
                check_family_domination(&g, &lists, &short_list_family(&args)?, p)?
            };
            let mut result = to_value(&report);
            result["expectations"] = Value::Array(expectation_entries(&ex));
            let verdict = report.dominated;
            Ok(Report::new("dominate", &args, result).verdict(Some(verdict)))
        }
        DominateMode::NegativeCorrelation => {
            let g = build_graph(&args.graph)?;
            let lists = build_lists(&g, args.k, &args.lists)?;
            let v = required(args.vertex, "vertex")?;
            let colours = args
                .colours
                .clone()
                .ok_or_else(|| usage("missing parameter `colours`"))?;
            let pinned = args
                .pinned
                .get_or_insert_with(|| Colouring::uncoloured(g.vertex_count()))
                .clone();
            let report = check_negative_correlation(&g, &lists, &pinned, v, &colours)?;
            let verdict = report.holds;
            Ok(Report::new("dominate", &args, to_value(&report)).verdict(Some(verdict)))
        }
        DominateMode::Renormalise => {
            let (dist, _) = family_distribution(&args)?;
            let blocks = args
                .blocks
                .clone()
                .ok_or_else(|| usage("missing parameter `blocks`"))?;
            let report = renormalise_and_check(
                &dist,
                &blocks,
                required(args.delta, "delta")?,
                required(args.p, "p")?,
            )?;
            let verdict = report.result.dominated;
            Ok(Report::new("dominate", &args, to_value(&report)).verdict(Some(verdict)))
        }
    }
}

/// `estimate ≤ bound + 3·stderr`, judged only when the hypothesis holds.
fn percolation_verdict(est: &RootEstimate) -> Option<bool> {
    match (est.hypothesis_ok, est.bound_log) {
        (Some(true), Some(log)) => Some(est.estimate <= log.exp() + 3.0 * est.std_error),
        _ => None,
    }
}

fn percolate(mut args: PercolateArgs) -> Result<Report> {
    let arity = required(args.arity, "arity")?;
    let depth = required(args.depth, "depth")?;
    let s = required(args.threshold, "threshold")?;
    let model = *args.model.get_or_insert(PercolationModel::Iid);
    let bound_log = bounds::percolation_bound(s, depth).ok();
    let bound = bound_log.map(f64::exp);
    match model {
        PercolationModel::Iid => {
            let p = required(args.p, "p")?;
            let trials = *args.trials.get_or_insert(10_000);
            let seed = *args.seed.get_or_insert(0);
            let inst = PercolationInstance::new(arity, depth, s, LeafModel::Iid { p })?;
            let est = estimate_root_probability(&inst, trials, seed)?;
            let verdict = percolation_verdict(&est);
            Ok(Report::new(
                "percolate",
                &args,
                json!({
                    "trials": est.trials,
                    "successes": est.successes,
                    "estimate": est.estimate,
                    "stderr": est.std_error,
                    "bound": bound,
                    "bound_log": bound_log,
                    "hypothesis_ok": est.hypothesis_ok,
                }),
            )
            .verdict(verdict))
        }
        PercolationModel::Exact => {
            let p = required(args.p, "p")?;
            let inst = PercolationInstance::new(arity, depth, s, LeafModel::Iid { p })?;
            let exact = exact_root_probability(&inst)?;
            let value = exact.to_f64().unwrap_or(f64::NAN);
            let hypothesis_ok = bounds::percolation_hypothesis_check(p, arity, s);
            let verdict = match (hypothesis_ok, bound) {
                (true, Some(b)) => Some(value <= b),
                _ => None,
            };
            Ok(Report::new(
                "percolate",
                &args,
                json!({
                    "probability": exact.to_string(),
                    "probability_value": value,
                    "log_probability": ln_rational(&exact),
                    "bound": bound,
                    "bound_log": bound_log,
                    "hypothesis_ok": hypothesis_ok,
                }),
            )
            .verdict(verdict))
        }
        PercolationModel::Adversarial => {
            let mask = adversarial_mask(arity, depth, s)?;
            let run = propagate(arity, depth, s, &mask)?;
            let active: Vec<usize> = run
                .levels
                .iter()
                .map(|level| level.iter().filter(|&&a| a).count())
                .collect();
            Ok(Report::new(
                "percolate",
                &args,
                json!({ "root_active": run.root_active, "active_per_level": active }),
            ))
        }
    }
}

/// `ln` of a non-negative rational, exact enough for tiny values.
fn ln_rational(x: &BigRational) -> f64 {
    let (num, den) = (x.numer(), x.denom());
    match (num.to_biguint(), den.to_biguint()) {
        (Some(n), Some(d)) => ln_big(&n) - ln_big(&d),
        _ => f64::NAN,
    }
}

fn solve(mut args: SolveArgs) -> Result<Report> {
    let g = build_graph(&args.graph)?;
    let k = required(args.k, "k")?;
    let mut rng = rng::seeded(*args.seed.get_or_insert(0));
    let (result, success) = match *args.algorithm.get_or_insert(Algorithm::Greedy) {
        Algorithm::Greedy => {
            let outcome = greedy_colour(&g, k, &mut rng);
            let success = matches!(outcome, GreedyOutcome::Success { .. });
            (to_value(&outcome), success)
        }
        Algorithm::LocalSearch => {
            let defaults = LocalSearchConfig::default();
            let cfg = LocalSearchConfig {
                list_floor: *args.list_floor.get_or_insert(defaults.list_floor),
                max_iterations: *args.max_iterations.get_or_insert(defaults.max_iterations),
            };
            let outcome = local_search_colour(&g, k, &cfg, &mut rng)?;
            let success = matches!(outcome, LocalSearchOutcome::Success { .. });
            (to_value(&outcome), success)
        }
    };
    Ok(Report::new("solve", &args, result).verdict(Some(success)))
}
