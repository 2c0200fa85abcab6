//! Route selection and power allocation.
//!
//! Three routers share one output type, [`RoutePlan`]:
//!
//! - [`mer_route`] picks the jammer-free minimum-energy route (link weight
//!   `sqrt(d^alpha)`), keeps the per-link outage split of the jammer-free
//!   optimum, and raises powers to hold those outages once jamming is present.
//! - [`mereq_route`] gives every hop the same outage `1 - (1 - pi)^(1/h)` and
//!   finds the cheapest exactly-`h`-hop path for each `h` on the expanded graph.
//! - [`merap_route`] replaces the exact outage by its exponential bound, which
//!   turns path cost into `(sum_k w_k)^2 / eps` with
//!   `w_k = sqrt(d_k^alpha (N0 + J_k))`, so a single shortest-path run suffices.
//!   [`heuristic_tighten`] then spends the slack left by the bound.

mod expand;
pub mod shortest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use self::expand::{expand_network, ExpandedGraph, ExpandedNode};
use self::shortest::shortest_path;
use crate::channel::{
    check_probability, log_success_exact, outage_from_log_success, required_power_exact,
};
use crate::error::{domain, Error, Result};
use crate::netgen::{LinkTable, NetworkInstance};
use crate::optimal::{brute_force_route, PathEnumConfig};

/// Allowed absolute excess of a plan's outage over its target.
pub const OUTAGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "MER")]
    Mer,
    #[serde(rename = "MER-AP")]
    MerAp,
    #[serde(rename = "MER-EQ")]
    MerEq,
    #[serde(rename = "OPTIMAL")]
    Optimal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Mer,
        Algorithm::MerAp,
        Algorithm::MerEq,
        Algorithm::Optimal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Mer => "MER",
            Algorithm::MerAp => "MER-AP",
            Algorithm::MerEq => "MER-EQ",
            Algorithm::Optimal => "OPTIMAL",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mer" => Ok(Algorithm::Mer),
            "mereq" => Ok(Algorithm::MerEq),
            "merap" => Ok(Algorithm::MerAp),
            "optimal" | "opt" => Ok(Algorithm::Optimal),
            _ => Err(Error::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// A source-to-destination route with its power allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub algorithm: Algorithm,
    pub nodes: Vec<usize>,
    pub powers: Vec<f64>,
    /// Exact per-link outage at the allocated powers.
    pub link_outages: Vec<f64>,
    pub e2e_outage: f64,
    pub total_power: f64,
}

impl RoutePlan {
    /// Builds a plan from a route and its powers, evaluating exact outages.
    pub fn evaluate(
        algorithm: Algorithm,
        nodes: Vec<usize>,
        powers: Vec<f64>,
        table: &LinkTable,
    ) -> Result<Self> {
        if nodes.len() < 2 || powers.len() != nodes.len() - 1 {
            return domain(format!(
                "plan needs at least one link and one power per link ({} nodes, {} powers)",
                nodes.len(),
                powers.len()
            ));
        }
        let mut log_success = 0.0;
        let mut link_outages = Vec::with_capacity(powers.len());
        for (k, &p) in powers.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return domain(format!("link {k} has invalid power {p}"));
            }
            let (u, v) = (nodes[k], nodes[k + 1]);
            let ls = log_success_exact(p, table.distance(u, v), table.terms_at(v), table.params());
            log_success += ls;
            link_outages.push(outage_from_log_success(ls));
        }
        Ok(Self {
            algorithm,
            total_power: powers.iter().sum(),
            e2e_outage: outage_from_log_success(log_success),
            nodes,
            powers,
            link_outages,
        })
    }

    pub fn hops(&self) -> usize {
        self.powers.len()
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Outage budget in the exponent domain: `eps = -ln(1 - pi) / gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBudget {
    pub eps: f64,
    pub pi: f64,
}

pub fn epsilon_budget(pi: f64, gamma: f64) -> Result<EpsilonBudget> {
    check_probability(pi, "end-to-end outage")?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain(format!("gamma must be > 0, got {gamma}"));
    }
    Ok(EpsilonBudget {
        eps: -(-pi).ln_1p() / gamma,
        pi,
    })
}

/// Link weight `sqrt(d^alpha (N0 + J))` used by MER-AP.
pub fn merap_link_weight(geom: &crate::channel::LinkGeometry, params: &crate::ChannelParams) -> f64 {
    (geom.d.powf(params.alpha) * (params.n0 + geom.jam)).sqrt()
}

/// Lagrange-optimal powers `P_i = w_i (sum_k w_k) / eps` under the bound model.
pub fn allocate_powers_approx(weights: &[f64], budget: &EpsilonBudget) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return domain("cannot allocate powers on an empty path");
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return domain(format!("link weights must be > 0, got {w}"));
    }
    let scale = weights.iter().sum::<f64>() / budget.eps;
    Ok(weights.iter().map(|w| w * scale).collect())
}

/// `1 - (1 - pi)^(1/h)`.
pub fn per_hop_outage_equal(pi: f64, h: usize) -> Result<f64> {
    check_probability(pi, "end-to-end outage")?;
    if h == 0 {
        return domain("hop count must be >= 1");
    }
    Ok(-((-pi).ln_1p() / h as f64).exp_m1())
}

/// `1 - prod_k (1 - p_k)`.
pub fn end_to_end_outage(link_outages: &[f64]) -> Result<f64> {
    let mut log_success = 0.0;
    for &p in link_outages {
        if !(0.0..1.0).contains(&p) {
            return domain(format!("link outage must lie in [0, 1), got {p}"));
        }
        log_success += (-p).ln_1p();
    }
    Ok(outage_from_log_success(log_success))
}

/// Expected total power with end-to-end retransmissions, `total / (1 - pi)`.
pub fn eer_total_power(total: f64, pi: f64) -> Result<f64> {
    check_probability(pi, "end-to-end outage")?;
    Ok(total / (1.0 - pi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOptions {
    /// Apply [`heuristic_tighten`] to MER-AP output.
    pub tighten: bool,
    /// Ignore candidate links longer than this.
    pub max_link_distance: Option<f64>,
    pub path_enum: Option<PathEnumConfig>,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self {
            tighten: true,
            max_link_distance: None,
            path_enum: None,
        }
    }
}

impl RouteOptions {
    fn allows(&self, table: &LinkTable, u: usize, v: usize) -> bool {
        u != v && self.max_link_distance.is_none_or(|cap| table.distance(u, v) <= cap)
    }
}

fn check_endpoints(inst: &NetworkInstance, pi: f64) -> Result<()> {
    check_probability(pi, "end-to-end outage")?;
    inst.validate()
}

fn weighted_route(
    inst: &NetworkInstance,
    table: &LinkTable,
    opts: &RouteOptions,
    weight: impl Fn(usize, usize) -> f64,
) -> Result<Vec<usize>> {
    let n = inst.len();
    shortest_path(
        n,
        inst.source,
        inst.dest,
        |u| u,
        |u| {
            (0..n)
                .filter(|&v| opts.allows(table, u, v))
                .map(|v| (v, weight(u, v)))
                .collect::<Vec<_>>()
        },
    )
    .map(|label| label.path)
    .ok_or(Error::NoRoute {
        source_node: inst.source,
        dest: inst.dest,
    })
}

/// MER-AP route with closed-form powers, before tightening.
pub fn merap_route(inst: &NetworkInstance, pi: f64) -> Result<RoutePlan> {
    merap_route_with(inst, pi, &RouteOptions::default())
}

pub fn merap_route_with(inst: &NetworkInstance, pi: f64, opts: &RouteOptions) -> Result<RoutePlan> {
    check_endpoints(inst, pi)?;
    let table = LinkTable::new(inst)?;
    merap_on_table(inst, &table, pi, opts)
}

fn merap_on_table(
    inst: &NetworkInstance,
    table: &LinkTable,
    pi: f64,
    opts: &RouteOptions,
) -> Result<RoutePlan> {
    let params = table.params();
    let budget = epsilon_budget(pi, params.gamma)?;
    let weight = |u: usize, v: usize| merap_link_weight(&table.geometry(u, v), params);
    let nodes = weighted_route(inst, table, opts, weight)?;
    let weights: Vec<f64> = nodes.windows(2).map(|w| weight(w[0], w[1])).collect();
    let powers = allocate_powers_approx(&weights, &budget)?;
    RoutePlan::evaluate(Algorithm::MerAp, nodes, powers, table)
}

/// Spends the slack of a conservative plan.
///
/// With `delta = (1 - pi) / (1 - p_sd)`, every link's success probability is
/// scaled by `delta^(1/H)` and its power re-solved under the exact model, so
/// the end-to-end outage lands on `pi`.
pub fn heuristic_tighten(plan: &RoutePlan, pi: f64, inst: &NetworkInstance) -> Result<RoutePlan> {
    check_probability(pi, "end-to-end outage")?;
    let table = LinkTable::new(inst)?;
    tighten_on_table(plan, pi, &table)
}

fn tighten_on_table(plan: &RoutePlan, pi: f64, table: &LinkTable) -> Result<RoutePlan> {
    if plan.e2e_outage > pi + OUTAGE_SLACK {
        return domain(format!(
            "plan outage {} already exceeds the target {pi}",
            plan.e2e_outage
        ));
    }
    let log_delta = (-pi).ln_1p() - (-plan.e2e_outage).ln_1p();
    if log_delta >= 0.0 {
        return Ok(plan.clone());
    }
    let share = log_delta / plan.hops() as f64;
    let mut powers = Vec::with_capacity(plan.hops());
    for (k, (u, v)) in plan.links().enumerate() {
        let target = outage_from_log_success(share + (-plan.link_outages[k]).ln_1p());
        let p = required_power_exact(target, table.distance(u, v), table.terms_at(v), table.params())?;
        powers.push(p.min(plan.powers[k]));
    }
    RoutePlan::evaluate(plan.algorithm, plan.nodes.clone(), powers, table)
}

/// Equal-outage routing over the hop-layered expansion.
pub fn mereq_route(inst: &NetworkInstance, pi: f64) -> Result<RoutePlan> {
    mereq_route_with(inst, pi, &RouteOptions::default())
}

pub fn mereq_route_with(inst: &NetworkInstance, pi: f64, opts: &RouteOptions) -> Result<RoutePlan> {
    check_endpoints(inst, pi)?;
    let table = LinkTable::new(inst)?;
    mereq_on_table(inst, &table, pi, opts)
}

fn mereq_on_table(
    inst: &NetworkInstance,
    table: &LinkTable,
    pi: f64,
    opts: &RouteOptions,
) -> Result<RoutePlan> {
    let n = inst.len();
    let graph = ExpandedGraph::new(n, inst.source, inst.dest, |u, v| opts.allows(table, u, v));
    let params = table.params();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;

    for h in 1..n {
        let eps = per_hop_outage_equal(pi, h)?;
        let Some(target) = graph.dest_index(h) else { continue };
        // Power needed on each physical link at this hop count, filled lazily.
        let mut cost = vec![f64::NAN; n * n];
        let mut failure: Option<Error> = None;
        let label = shortest_path(
            graph.node_count(),
            graph.source_index(),
            target,
            |idx| graph.node(idx).phys,
            |idx| {
                let u = graph.node(idx).phys;
                let mut out = Vec::with_capacity(graph.successors(idx).len());
                for &next in graph.successors(idx) {
                    let node = graph.node(next);
                    if node.layer > h {
                        continue;
                    }
                    let v = node.phys;
                    let slot = &mut cost[u * n + v];
                    if slot.is_nan() {
                        match required_power_exact(eps, table.distance(u, v), table.terms_at(v), params) {
                            Ok(p) => *slot = p,
                            Err(e) => {
                                failure.get_or_insert(e);
                                *slot = f64::INFINITY;
                            }
                        }
                    }
                    if slot.is_finite() {
                        out.push((next, *slot));
                    }
                }
                out
            },
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let Some(label) = label else { continue };
        let nodes: Vec<usize> = label.path.iter().map(|&idx| graph.node(idx).phys).collect();
        let powers: Vec<f64> = nodes.windows(2).map(|w| cost[w[0] * n + w[1]]).collect();
        let total: f64 = powers.iter().sum();
        if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
            best = Some((total, nodes, powers));
        }
    }

    let (_, nodes, powers) = best.ok_or(Error::NoRoute {
        source_node: inst.source,
        dest: inst.dest,
    })?;
    debug_assert!(is_simple(&nodes), "MER-EQ returned a non-simple walk {nodes:?}");
    RoutePlan::evaluate(Algorithm::MerEq, nodes, powers, table)
}

fn is_simple(nodes: &[usize]) -> bool {
    let mut seen = nodes.to_vec();
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}

/// Jamming-oblivious benchmark.
pub fn mer_route(inst: &NetworkInstance, pi: f64) -> Result<RoutePlan> {
    mer_route_with(inst, pi, &RouteOptions::default())
}

pub fn mer_route_with(inst: &NetworkInstance, pi: f64, opts: &RouteOptions) -> Result<RoutePlan> {
    check_endpoints(inst, pi)?;
    let table = LinkTable::new(inst)?;
    mer_on_table(inst, &table, pi, opts)
}

fn mer_on_table(
    inst: &NetworkInstance,
    table: &LinkTable,
    pi: f64,
    opts: &RouteOptions,
) -> Result<RoutePlan> {
    let params = table.params();
    let budget = epsilon_budget(pi, params.gamma)?;
    let weight = |u: usize, v: usize| table.distance(u, v).powf(params.alpha).sqrt();
    let nodes = weighted_route(inst, table, opts, weight)?;

    // Jammer-free optimum, then the outage each link had under it.
    let free_weights: Vec<f64> = nodes
        .windows(2)
        .map(|w| (table.distance(w[0], w[1]).powf(params.alpha) * params.n0).sqrt())
        .collect();
    let free_powers = allocate_powers_approx(&free_weights, &budget)?;
    let mut powers = Vec::with_capacity(free_powers.len());
    for (k, w) in nodes.windows(2).enumerate() {
        let d = table.distance(w[0], w[1]);
        let outage = -(-params.gamma * params.n0 * d.powf(params.alpha) / free_powers[k]).exp_m1();
        powers.push(required_power_exact(outage, d, table.terms_at(w[1]), params)?);
    }
    RoutePlan::evaluate(Algorithm::Mer, nodes, powers, table)
}

/// Runs one algorithm, applying tightening to MER-AP when `opts.tighten` is set.
pub fn route(
    inst: &NetworkInstance,
    algorithm: Algorithm,
    pi: f64,
    opts: &RouteOptions,
) -> Result<RoutePlan> {
    check_endpoints(inst, pi)?;
    let table = LinkTable::new(inst)?;
    route_on_table(inst, &table, algorithm, pi, opts)
}

pub(crate) fn route_on_table(
    inst: &NetworkInstance,
    table: &LinkTable,
    algorithm: Algorithm,
    pi: f64,
    opts: &RouteOptions,
) -> Result<RoutePlan> {
    match algorithm {
        Algorithm::Mer => mer_on_table(inst, table, pi, opts),
        Algorithm::MerEq => mereq_on_table(inst, table, pi, opts),
        Algorithm::MerAp => {
            let plan = merap_on_table(inst, table, pi, opts)?;
            if opts.tighten {
                tighten_on_table(&plan, pi, table)
            } else {
                Ok(plan)
            }
        }
        Algorithm::Optimal => {
            let cfg = opts
                .path_enum
                .clone()
                .unwrap_or_else(|| PathEnumConfig::for_instance(inst));
            brute_force_route(inst, pi, &cfg)
        }
    }
}
