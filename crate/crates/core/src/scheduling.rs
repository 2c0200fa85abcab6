//! Transmission sets and the max-throughput schedule.
//!
//! A transmission set is a group of directed links that may be active in the
//! same slot. The default rule is node-exclusive half-duplex: two links may be
//! scheduled together only if they share no endpoint. [`SinrRule`] optionally
//! also requires every active link to keep its outage within a factor of its
//! planned value when the other active transmitters are counted as interference.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::channel::{log_success_exact, outage_from_log_success};
use crate::error::{domain, Error, Result};
use crate::lp::DenseLp;
use crate::netgen::LinkTable;
use crate::rng::{derive_seed, rng_from_seed};
use crate::routing::RoutePlan;

/// Directed link `(tx, rx)`.
pub type Link = (usize, usize);

/// Links that can be active together, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransmissionSet {
    pub links: Vec<Link>,
}

impl TransmissionSet {
    pub fn new(mut links: Vec<Link>) -> Self {
        links.sort_unstable();
        links.dedup();
        Self { links }
    }

    pub fn contains(&self, link: &Link) -> bool {
        self.links.binary_search(link).is_ok()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Node-exclusive rule: `candidate` shares no endpoint with any link in `existing`.
pub fn schedulable(existing: &[Link], candidate: Link) -> bool {
    let (a, b) = candidate;
    existing
        .iter()
        .all(|&(u, v)| u != a && u != b && v != a && v != b)
}

/// Interference-aware admission on top of the node-exclusive rule.
#[derive(Debug, Clone)]
pub struct SinrRule<'a> {
    table: &'a LinkTable,
    powers: BTreeMap<Link, f64>,
    outages: BTreeMap<Link, f64>,
    /// Largest allowed ratio of loaded outage to interference-free outage.
    pub inflation: f64,
}

impl<'a> SinrRule<'a> {
    /// Transmit powers come from the routes; a link used by several routes
    /// takes the largest of its powers.
    pub fn new(table: &'a LinkTable, routes: &[RoutePlan], inflation: f64) -> Result<Self> {
        if !(inflation >= 1.0) {
            return domain(format!("outage inflation must be >= 1, got {inflation}"));
        }
        let mut powers: BTreeMap<Link, f64> = BTreeMap::new();
        for plan in routes {
            for (link, &p) in plan.links().zip(&plan.powers) {
                let e = powers.entry(link).or_insert(p);
                *e = e.max(p);
            }
        }
        let outages = powers
            .iter()
            .map(|(&(u, v), &p)| {
                let ls = log_success_exact(p, table.distance(u, v), table.terms_at(v), table.params());
                ((u, v), outage_from_log_success(ls))
            })
            .collect();
        Ok(Self {
            table,
            powers,
            outages,
            inflation,
        })
    }

    fn loaded_outage(&self, link: Link, active: &[Link]) -> f64 {
        let (tx, rx) = link;
        let params = self.table.params();
        let p = self.powers[&link];
        let gain = self.table.distance(tx, rx).powf(params.alpha);
        let mut ls = log_success_exact(p, self.table.distance(tx, rx), self.table.terms_at(rx), params);
        for other in active.iter().filter(|&&l| l != link) {
            let d = self.table.distance(other.0, rx);
            let x = params.gamma * (self.powers[other] / d.powf(params.alpha)) * gain / p;
            ls -= x.ln_1p();
        }
        outage_from_log_success(ls)
    }

    pub fn admits(&self, existing: &[Link], candidate: Link) -> bool {
        if !schedulable(existing, candidate) {
            return false;
        }
        let mut active = existing.to_vec();
        active.push(candidate);
        active
            .iter()
            .all(|&l| self.loaded_outage(l, &active) <= self.inflation * self.outages[&l])
    }
}

/// One run of the randomized greedy construction: visit links in random order
/// and keep each one that is admissible with what has been kept so far.
pub fn greedy_transmission_set(
    links: &[Link],
    seed: u64,
    admits: &impl Fn(&[Link], Link) -> bool,
) -> TransmissionSet {
    let mut order = links.to_vec();
    order.shuffle(&mut rng_from_seed(seed));
    let mut chosen: Vec<Link> = Vec::new();
    for link in order {
        if admits(&chosen, link) {
            chosen.push(link);
        }
    }
    TransmissionSet::new(chosen)
}

/// True when no link outside `set` can be added to it.
pub fn is_maximal(set: &TransmissionSet, links: &[Link], admits: &impl Fn(&[Link], Link) -> bool) -> bool {
    links
        .iter()
        .filter(|l| !set.contains(l))
        .all(|&l| !admits(&set.links, l))
}

/// Distinct maximal sets from `trials` greedy runs under the node-exclusive rule.
pub fn maximal_transmission_sets(links: &[Link], trials: usize, seed: u64) -> Vec<TransmissionSet> {
    maximal_transmission_sets_with(links, trials, seed, &schedulable)
}

/// As [`maximal_transmission_sets`] with a custom admission rule. Trial `i`
/// shuffles with `derive_seed(seed, i)`; results are returned sorted.
pub fn maximal_transmission_sets_with(
    links: &[Link],
    trials: usize,
    seed: u64,
    admits: &impl Fn(&[Link], Link) -> bool,
) -> Vec<TransmissionSet> {
    let mut canonical: Vec<Link> = links.to_vec();
    canonical.sort_unstable();
    canonical.dedup();
    let mut found = BTreeSet::new();
    for trial in 0..trials.max(1) {
        let set = greedy_transmission_set(&canonical, derive_seed(seed, trial as u64), admits);
        debug_assert!(is_maximal(&set, &canonical, admits));
        found.insert(set);
    }
    found.into_iter().collect()
}

/// Sorted distinct links used by any of the routes.
pub fn route_links(routes: &[RoutePlan]) -> Vec<Link> {
    let set: BTreeSet<Link> = routes.iter().flat_map(|r| r.links()).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSet {
    pub flows: Vec<(usize, usize)>,
    pub routes: Vec<RoutePlan>,
    /// Capacity of every link, bits/s/Hz.
    pub lambda: f64,
}

impl FlowSet {
    pub fn new(routes: Vec<RoutePlan>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("link capacity must be > 0, got {lambda}"));
        }
        let flows = routes
            .iter()
            .map(|r| (r.nodes[0], *r.nodes.last().expect("route has nodes")))
            .collect();
        Ok(Self {
            flows,
            routes,
            lambda,
        })
    }

    pub fn total_power(&self) -> f64 {
        self.routes.iter().map(|r| r.total_power).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub sets: Vec<TransmissionSet>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSolution {
    pub rates: Vec<f64>,
    pub schedule: Schedule,
    pub total: f64,
}

/// Largest total flow rate supportable by a time-sharing of `sets`.
///
/// Variables are the flow rates and the set weights. Each route link carries
/// the sum of the rates of flows through it, at most `lambda` times the total
/// weight of the sets containing it, and the weights sum to at most one. Any
/// leftover weight is given to the first set, which keeps every constraint
/// satisfied and makes the schedule sum to one.
pub fn max_throughput(flowset: &FlowSet, sets: &[TransmissionSet]) -> Result<ThroughputSolution> {
    if sets.is_empty() {
        return domain("at least one transmission set is required");
    }
    let l = flowset.routes.len();
    let m = sets.len();
    let links = route_links(&flowset.routes);
    let mut a = Vec::with_capacity(links.len() + 1);
    for link in &links {
        let mut row = vec![0.0; l + m];
        for (i, r) in flowset.routes.iter().enumerate() {
            if r.links().any(|x| x == *link) {
                row[i] = 1.0;
            }
        }
        for (k, s) in sets.iter().enumerate() {
            if s.contains(link) {
                row[l + k] = -flowset.lambda;
            }
        }
        a.push(row);
    }
    let mut simplex_row = vec![0.0; l + m];
    simplex_row[l..].iter_mut().for_each(|v| *v = 1.0);
    a.push(simplex_row);
    let mut b = vec![0.0; links.len()];
    b.push(1.0);
    let mut c = vec![1.0; l];
    c.extend(std::iter::repeat_n(0.0, m));

    let lp = DenseLp::new(c, a, b)?;
    let sol = lp.solve()?;
    let rates: Vec<f64> = sol.x[..l].iter().map(|&x| x.max(0.0)).collect();
    let mut weights: Vec<f64> = sol.x[l..].iter().map(|&x| x.max(0.0)).collect();
    let slack = 1.0 - weights.iter().sum::<f64>();
    if slack > 0.0 {
        weights[0] += slack;
    }

    for (row, link) in lp.a.iter().zip(&links) {
        let load: f64 = row[..l].iter().zip(&rates).map(|(a, x)| a * x).sum();
        let capacity: f64 = row[l..].iter().zip(&weights).map(|(a, w)| -a * w).sum();
        if load - capacity > 1e-8 {
            return Err(Error::Lp(format!(
                "link {link:?} overloaded by {} after {} pivots",
                load - capacity,
                sol.pivots
            )));
        }
    }
    Ok(ThroughputSolution {
        total: rates.iter().sum(),
        rates,
        schedule: Schedule {
            sets: sets.to_vec(),
            weights,
        },
    })
}

/// Total transmit power per unit throughput.
pub fn energy_per_bit(total_power: f64, throughput: f64) -> Result<f64> {
    if !(throughput > 0.0) {
        return domain(format!("throughput must be > 0, got {throughput}"));
    }
    Ok(total_power / throughput)
}
