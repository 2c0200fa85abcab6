//! Seeded experiment sweeps, cost histograms and throughput studies.
//!
//! Realization `i` always uses instance seed `derive_seed(base_seed, i)`,
//! whatever the axis value, so every algorithm and every axis point sees the
//! same placements (nodes are drawn before jammers, so a jammer-count sweep
//! keeps the nodes fixed and grows the jammer set). Realizations run on the
//! rayon pool and are reduced in index order, so output does not depend on the
//! thread count.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{domain, Error, Result};
use crate::netgen::{generate_instance, GenSpec, LinkTable, NetworkInstance};
use crate::rng::{derive_seed, rng_from_seed};
use crate::routing::{route_on_table, Algorithm, RouteOptions, RoutePlan, OUTAGE_SLACK};
use crate::scheduling::{
    energy_per_bit, max_throughput, maximal_transmission_sets_with, route_links, schedulable,
    FlowSet, SinrRule,
};

/// Largest node count for which OPTIMAL runs unless explicitly forced.
pub const OPTIMAL_MAX_NODES: usize = 10;

/// Tolerance on `|e2e - pi|` for plans that are meant to meet the target exactly.
pub const EXACT_OUTAGE_TOL: f64 = 1e-9;
/// Same, for the brute-force solver.
pub const OPTIMAL_OUTAGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    JammerCount,
    JammerPower,
    AreaSide,
    OutageTarget,
    Q,
    FlowCount,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::JammerCount => "jammer_count",
            SweepAxis::JammerPower => "jammer_power",
            SweepAxis::AreaSide => "area_side",
            SweepAxis::OutageTarget => "outage_target",
            SweepAxis::Q => "q",
            SweepAxis::FlowCount => "flow_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleRuleConfig {
    NodeExclusive,
    Sinr { inflation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "defaults::yes")]
    pub log: bool,
}

impl BinSpec {
    pub fn edges(&self) -> Result<Vec<f64>> {
        if self.count == 0 || !(self.max > self.min) || (self.log && !(self.min > 0.0)) {
            return Err(Error::Config(format!("invalid bin spec {self:?}")));
        }
        let k = self.count as f64;
        Ok((0..=self.count)
            .map(|i| {
                let t = i as f64 / k;
                if self.log {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                }
            })
            .collect())
    }
}

mod defaults {
    use crate::routing::Algorithm;

    pub fn n() -> usize {
        20
    }
    pub fn nj() -> usize {
        20
    }
    pub fn side() -> f64 {
        10.0
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn alpha() -> f64 {
        2.0
    }
    pub fn pi() -> f64 {
        0.1
    }
    pub fn realizations() -> usize {
        100
    }
    pub fn algorithms() -> Vec<Algorithm> {
        vec![Algorithm::Mer, Algorithm::MerAp, Algorithm::MerEq]
    }
    pub fn flows() -> usize {
        5
    }
    pub fn trials() -> usize {
        200
    }
    pub fn rule() -> super::ScheduleRuleConfig {
        super::ScheduleRuleConfig::NodeExclusive
    }
    pub fn yes() -> bool {
        true
    }
}

/// Sweep description, read from JSON with these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default = "defaults::n")]
    pub n: usize,
    #[serde(default = "defaults::nj")]
    pub nj: usize,
    #[serde(default = "defaults::side")]
    pub side: f64,
    #[serde(default = "defaults::one")]
    pub pj: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::one")]
    pub n0: f64,
    #[serde(default = "defaults::one")]
    pub gamma: f64,
    #[serde(default = "defaults::one")]
    pub q: f64,
    #[serde(default = "defaults::pi")]
    pub pi: f64,
    #[serde(default = "defaults::realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "defaults::algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Apply the success-ratio tightening to MER-AP.
    #[serde(default = "defaults::yes")]
    pub tighten: bool,
    /// Run OPTIMAL even when `n` exceeds [`OPTIMAL_MAX_NODES`].
    #[serde(default)]
    pub force_optimal: bool,
    /// Concurrent flows per realization (throughput studies).
    #[serde(default = "defaults::flows")]
    pub flows: usize,
    /// Greedy transmission-set trials per realization.
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    /// Link capacity in bits/s/Hz.
    #[serde(default = "defaults::one")]
    pub lambda: f64,
    #[serde(default = "defaults::rule")]
    pub schedule_rule: ScheduleRuleConfig,
    #[serde(default)]
    pub bins: Option<BinSpec>,
}

impl ExperimentConfig {
    /// Config with the default network (n = 20, nj = 20, side 10, unit jammer
    /// power, alpha = 2, N0 = 1, gamma = 1, pi = 0.1, 100 realizations).
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Self {
        Self {
            axis,
            values,
            n: defaults::n(),
            nj: defaults::nj(),
            side: defaults::side(),
            pj: 1.0,
            alpha: defaults::alpha(),
            n0: 1.0,
            gamma: 1.0,
            q: 1.0,
            pi: defaults::pi(),
            realizations: defaults::realizations(),
            base_seed: 0,
            algorithms: defaults::algorithms(),
            tighten: true,
            force_optimal: false,
            flows: defaults::flows(),
            trials: defaults::trials(),
            lambda: 1.0,
            schedule_rule: defaults::rule(),
            bins: None,
        }
    }

    /// Named presets shipped with the CLI.
    pub fn preset(name: &str) -> Result<Self> {
        let cfg = match name {
            // Histogram presets: the two parameter sets used for cost histograms.
            "hist-a3-nj50" => Self {
                alpha: 3.0,
                nj: 50,
                realizations: 1000,
                bins: Some(BinSpec {
                    min: 1e1,
                    max: 1e10,
                    count: 45,
                    log: true,
                }),
                ..Self::new(SweepAxis::JammerCount, vec![50.0])
            },
            "hist-a4-nj30" => Self {
                alpha: 4.0,
                nj: 30,
                realizations: 1000,
                bins: Some(BinSpec {
                    min: 1e1,
                    max: 1e12,
                    count: 55,
                    log: true,
                }),
                ..Self::new(SweepAxis::JammerCount, vec![30.0])
            },
            "gap" => Self {
                n: 8,
                nj: 8,
                realizations: 50,
                algorithms: vec![Algorithm::MerAp, Algorithm::MerEq, Algorithm::Optimal],
                ..Self::new(SweepAxis::OutageTarget, vec![0.05, 0.1, 0.2])
            },
            "throughput" => Self {
                n: 10,
                nj: 20,
                pi: 0.2,
                realizations: 50,
                algorithms: vec![Algorithm::Mer, Algorithm::MerAp],
                ..Self::new(SweepAxis::FlowCount, vec![1.0, 2.0, 3.0, 4.0, 5.0])
            },
            "energy-per-bit" => Self {
                n: 10,
                nj: 20,
                flows: 5,
                realizations: 50,
                algorithms: vec![Algorithm::Mer, Algorithm::MerAp],
                ..Self::new(SweepAxis::OutageTarget, vec![0.1, 0.2, 0.3])
            },
            _ => return Err(Error::Config(format!("unknown preset {name:?}"))),
        };
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(Error::from_json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::Config("axis values must be non-empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm is required".into()));
        }
        for &v in &self.values {
            self.point(v)?;
        }
        Ok(())
    }

    fn params(&self) -> ChannelParams {
        ChannelParams {
            alpha: self.alpha,
            n0: self.n0,
            gamma: self.gamma,
            q: self.q,
        }
    }

    /// Generation spec, outage target and flow count at one axis value.
    pub fn point(&self, value: f64) -> Result<AxisPoint> {
        let mut gen = GenSpec {
            n: self.n,
            nj: self.nj,
            side: self.side,
            pj: self.pj,
            params: self.params(),
            seed: 0,
        };
        let mut pi = self.pi;
        let mut flows = self.flows;
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{} value {v} is not a count", self.axis.name())))
            }
        };
        match self.axis {
            SweepAxis::JammerCount => gen.nj = as_count(value)?,
            SweepAxis::JammerPower => gen.pj = value,
            SweepAxis::AreaSide => gen.side = value,
            SweepAxis::OutageTarget => pi = value,
            SweepAxis::Q => gen.params.q = value,
            SweepAxis::FlowCount => flows = as_count(value)?,
        }
        gen.validate()?;
        crate::channel::check_probability(pi, "outage target")?;
        Ok(AxisPoint { gen, pi, flows })
    }

    fn route_options(&self) -> RouteOptions {
        RouteOptions {
            tighten: self.tighten,
            ..RouteOptions::default()
        }
    }

    /// Algorithms to run, sorted by name, with OPTIMAL dropped for large networks.
    fn active_algorithms(&self, n: usize) -> Vec<Algorithm> {
        let mut algs: Vec<Algorithm> = self
            .algorithms
            .iter()
            .copied()
            .filter(|a| *a != Algorithm::Optimal || n <= OPTIMAL_MAX_NODES || self.force_optimal)
            .collect();
        algs.sort_by_key(|a| a.name());
        algs.dedup();
        algs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPoint {
    pub gen: GenSpec,
    pub pi: f64,
    pub flows: usize,
}

/// Percentage reduction of `cost_alg` relative to `cost_benchmark`.
pub fn energy_saved(cost_benchmark: f64, cost_alg: f64) -> Result<f64> {
    if !(cost_benchmark > 0.0) {
        return domain(format!("benchmark cost must be > 0, got {cost_benchmark}"));
    }
    Ok(100.0 * (cost_benchmark - cost_alg) / cost_benchmark)
}

/// `10 log10(cost_alg / cost_optimal)`.
pub fn db_gap(cost_alg: f64, cost_optimal: f64) -> Result<f64> {
    if !(cost_alg > 0.0 && cost_optimal > 0.0) {
        return domain("costs must be > 0 for a dB gap");
    }
    Ok(10.0 * (cost_alg / cost_optimal).log10())
}

/// Counts per bin; bin `i` is `[edges[i], edges[i+1])` except the last, which
/// also takes values equal to the top edge. Values outside the edges are not counted.
pub fn cost_histogram(costs: &[f64], edges: &[f64]) -> Result<Vec<usize>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("bin edges must be strictly increasing with at least two entries");
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0; bins];
    for &c in costs {
        if c < edges[0] || c > edges[bins] || c.is_nan() {
            continue;
        }
        let idx = edges.partition_point(|&e| e <= c).saturating_sub(1).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Mean and sample standard deviation.
pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary {
            mean: f64::NAN,
            std: f64::NAN,
            count,
        };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary { mean, std, count }
}

/// Checks a plan against the outage contract of its algorithm.
pub fn check_outage_contract(plan: &RoutePlan, pi: f64, tightened: bool) -> Result<()> {
    let ok = match plan.algorithm {
        Algorithm::MerAp if !tightened => plan.e2e_outage <= pi + OUTAGE_SLACK,
        Algorithm::MerAp | Algorithm::Mer | Algorithm::MerEq => {
            (plan.e2e_outage - pi).abs() <= EXACT_OUTAGE_TOL
        }
        Algorithm::Optimal => (plan.e2e_outage - pi).abs() <= OPTIMAL_OUTAGE_TOL,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{} plan has end-to-end outage {} against target {pi}",
            plan.algorithm, plan.e2e_outage
        )))
    }
}

/// Per-realization outcome: total power per algorithm, or the failure message.
type Outcome = BTreeMap<Algorithm, std::result::Result<f64, String>>;

fn run_realization(
    cfg: &ExperimentConfig,
    point: &AxisPoint,
    algorithms: &[Algorithm],
    index: usize,
) -> Outcome {
    let spec = GenSpec {
        seed: derive_seed(cfg.base_seed, index as u64),
        ..point.gen
    };
    let opts = cfg.route_options();
    let prepared = generate_instance(&spec).and_then(|inst| {
        let table = LinkTable::new(&inst)?;
        Ok((inst, table))
    });
    let mut out = Outcome::new();
    for &alg in algorithms {
        let total = match &prepared {
            Err(e) => Err(e.to_string()),
            Ok((inst, table)) => route_on_table(inst, table, alg, point.pi, &opts)
                .and_then(|plan| {
                    check_outage_contract(&plan, point.pi, opts.tighten)?;
                    Ok(plan.total_power)
                })
                .map_err(|e| e.to_string()),
        };
        out.insert(alg, total);
    }
    out
}

/// One row per (axis value, algorithm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    pub algorithm: Algorithm,
    pub mean_total_power: f64,
    pub mean_energy_saved: f64,
    pub std_energy_saved: f64,
    /// Saving of the mean total power against the mean MER total over the
    /// same realizations; dominated by the expensive instances.
    pub saved_of_mean_power: f64,
    /// Mean of `10 log10(total / optimal total)`, when OPTIMAL ran.
    pub mean_gap_db: Option<f64>,
    pub realizations: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<SweepRow>,
    /// Failure messages, prefixed with axis value, realization and algorithm.
    pub failures: Vec<String>,
}

impl ResultTable {
    pub fn row(&self, value: f64, algorithm: Algorithm) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.algorithm == algorithm)
    }
}

fn sorted_values(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Energy-saved sweep. MER always runs as the paired benchmark.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for value in sorted_values(&cfg.values) {
        let point = cfg.point(value)?;
        let reported = cfg.active_algorithms(point.gen.n);
        let mut algorithms = reported.clone();
        if !algorithms.contains(&Algorithm::Mer) {
            algorithms.push(Algorithm::Mer);
        }
        let outcomes: Vec<Outcome> = (0..cfg.realizations)
            .into_par_iter()
            .map(|i| run_realization(cfg, &point, &algorithms, i))
            .collect();

        for &alg in &reported {
            let mut totals = Vec::new();
            let mut bench_totals = Vec::new();
            let mut saved = Vec::new();
            let mut gaps = Vec::new();
            let mut failed = 0;
            for (i, outcome) in outcomes.iter().enumerate() {
                let bench = &outcome[&Algorithm::Mer];
                let this = &outcome[&alg];
                match (bench, this) {
                    (Ok(b), Ok(t)) => {
                        totals.push(*t);
                        bench_totals.push(*b);
                        saved.push(energy_saved(*b, *t)?);
                        if let Some(Ok(opt)) = outcome.get(&Algorithm::Optimal) {
                            gaps.push(db_gap(*t, *opt)?);
                        }
                    }
                    (_, Err(e)) | (Err(e), _) => {
                        failed += 1;
                        failures.push(format!("{}={value} realization {i} {alg}: {e}", cfg.axis.name()));
                    }
                }
            }
            let s = summarize(&saved);
            let mean_total = summarize(&totals).mean;
            rows.push(SweepRow {
                axis: cfg.axis.name().to_string(),
                value,
                algorithm: alg,
                mean_total_power: mean_total,
                mean_energy_saved: s.mean,
                std_energy_saved: s.std,
                saved_of_mean_power: energy_saved(summarize(&bench_totals).mean, mean_total)
                    .unwrap_or(f64::NAN),
                mean_gap_db: (!gaps.is_empty()).then(|| summarize(&gaps).mean),
                realizations: s.count,
                failures: failed,
            });
        }
    }
    failures.dedup();
    Ok(ResultTable { rows, failures })
}

/// Per-algorithm total powers over all realizations at the first axis value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSample {
    pub algorithm: Algorithm,
    pub costs: Vec<f64>,
    pub failures: usize,
}

impl CostSample {
    pub fn coefficient_of_variation(&self) -> f64 {
        let s = summarize(&self.costs);
        s.std / s.mean
    }
}

pub fn collect_costs(cfg: &ExperimentConfig) -> Result<Vec<CostSample>> {
    cfg.validate()?;
    let point = cfg.point(cfg.values[0])?;
    let algorithms = cfg.active_algorithms(point.gen.n);
    let outcomes: Vec<Outcome> = (0..cfg.realizations)
        .into_par_iter()
        .map(|i| run_realization(cfg, &point, &algorithms, i))
        .collect();
    Ok(algorithms
        .iter()
        .map(|&alg| {
            let mut costs = Vec::new();
            let mut failures = 0;
            for o in &outcomes {
                match &o[&alg] {
                    Ok(c) => costs.push(*c),
                    Err(_) => failures += 1,
                }
            }
            CostSample {
                algorithm: alg,
                costs,
                failures,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub algorithm: Algorithm,
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub algorithm: Algorithm,
    pub mean: f64,
    pub std: f64,
    pub coefficient_of_variation: f64,
    pub below_range: usize,
    pub above_range: usize,
    pub samples: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramTable {
    pub rows: Vec<HistogramRow>,
    pub summaries: Vec<HistogramSummary>,
}

pub fn run_histogram(cfg: &ExperimentConfig) -> Result<HistogramTable> {
    let bins = cfg.bins.unwrap_or(BinSpec {
        min: 1e0,
        max: 1e12,
        count: 48,
        log: true,
    });
    let edges = bins.edges()?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for sample in collect_costs(cfg)? {
        let counts = cost_histogram(&sample.costs, &edges)?;
        for (i, &count) in counts.iter().enumerate() {
            rows.push(HistogramRow {
                algorithm: sample.algorithm,
                bin_low: edges[i],
                bin_high: edges[i + 1],
                count,
            });
        }
        let s = summarize(&sample.costs);
        summaries.push(HistogramSummary {
            algorithm: sample.algorithm,
            mean: s.mean,
            std: s.std,
            coefficient_of_variation: sample.coefficient_of_variation(),
            below_range: sample.costs.iter().filter(|&&c| c < edges[0]).count(),
            above_range: sample.costs.iter().filter(|&&c| c > *edges.last().unwrap()).count(),
            samples: s.count,
            failures: sample.failures,
        });
    }
    Ok(HistogramTable { rows, summaries })
}

/// `count` distinct ordered (source, dest) pairs drawn uniformly without replacement.
pub fn flow_endpoints(n: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).filter(move |&d| d != s).map(move |d| (s, d)))
        .collect();
    if count > pairs.len() {
        return Err(Error::Config(format!(
            "{count} flows requested but only {} distinct pairs exist",
            pairs.len()
        )));
    }
    pairs.shuffle(&mut rng_from_seed(seed));
    pairs.truncate(count);
    Ok(pairs)
}

/// Routes, schedules and throughput for one algorithm on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowStudy {
    pub algorithm: Algorithm,
    pub flowset: FlowSet,
    pub throughput: f64,
    pub rates: Vec<f64>,
    pub energy_per_bit: f64,
}

/// Routes every flow independently with `algorithm`, samples transmission sets
/// over the union of route links, and solves the throughput LP.
pub fn study_flows(
    inst: &NetworkInstance,
    endpoints: &[(usize, usize)],
    algorithm: Algorithm,
    pi: f64,
    cfg: &ExperimentConfig,
    set_seed: u64,
) -> Result<FlowStudy> {
    let table = LinkTable::new(inst)?;
    let opts = cfg.route_options();
    let mut routes = Vec::with_capacity(endpoints.len());
    for &(s, d) in endpoints {
        let flow_inst = inst.with_endpoints(s, d)?;
        let plan = route_on_table(&flow_inst, &table, algorithm, pi, &opts)?;
        check_outage_contract(&plan, pi, opts.tighten)?;
        routes.push(plan);
    }
    let links = route_links(&routes);
    let sets = match cfg.schedule_rule {
        ScheduleRuleConfig::NodeExclusive => {
            maximal_transmission_sets_with(&links, cfg.trials, set_seed, &schedulable)
        }
        ScheduleRuleConfig::Sinr { inflation } => {
            let rule = SinrRule::new(&table, &routes, inflation)?;
            maximal_transmission_sets_with(&links, cfg.trials, set_seed, &|s: &[_], l| {
                rule.admits(s, l)
            })
        }
    };
    let flowset = FlowSet::new(routes, cfg.lambda)?;
    let solution = max_throughput(&flowset, &sets)?;
    Ok(FlowStudy {
        algorithm,
        energy_per_bit: energy_per_bit(flowset.total_power(), solution.total)?,
        throughput: solution.total,
        rates: solution.rates,
        flowset,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub axis: String,
    pub value: f64,
    pub algorithm: Algorithm,
    pub mean_throughput: f64,
    pub std_throughput: f64,
    pub mean_total_power: f64,
    pub mean_energy_per_bit: f64,
    pub realizations: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputTable {
    pub rows: Vec<ThroughputRow>,
    pub failures: Vec<String>,
}

impl ThroughputTable {
    pub fn row(&self, value: f64, algorithm: Algorithm) -> Option<&ThroughputRow> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.algorithm == algorithm)
    }
}

/// Multi-flow throughput and energy per bit. Flow endpoints for realization
/// `i` come from `derive_seed(instance_seed, 1)` and set sampling from
/// `derive_seed(instance_seed, 2)`; with a flow-count axis the `k`-flow case
/// uses the first `k` pairs of the same draw.
pub fn run_throughput_study(cfg: &ExperimentConfig) -> Result<ThroughputTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for value in sorted_values(&cfg.values) {
        let point = cfg.point(value)?;
        let algorithms = cfg.active_algorithms(point.gen.n);
        let results: Vec<Vec<std::result::Result<FlowStudy, String>>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(cfg.base_seed, i as u64);
                let prepared = generate_instance(&GenSpec { seed, ..point.gen }).and_then(|inst| {
                    let n = inst.len();
                    let all = flow_endpoints(n, point.flows.min(n * (n - 1)), derive_seed(seed, 1))?;
                    if all.len() < point.flows {
                        return Err(Error::Config("not enough node pairs for the flows".into()));
                    }
                    Ok((inst, all))
                });
                algorithms
                    .iter()
                    .map(|&alg| match &prepared {
                        Err(e) => Err(e.to_string()),
                        Ok((inst, endpoints)) => {
                            study_flows(inst, endpoints, alg, point.pi, cfg, derive_seed(seed, 2))
                                .map_err(|e| e.to_string())
                        }
                    })
                    .collect()
            })
            .collect();

        for (k, &alg) in algorithms.iter().enumerate() {
            let mut throughput = Vec::new();
            let mut power = Vec::new();
            let mut epb = Vec::new();
            let mut failed = 0;
            for (i, per_alg) in results.iter().enumerate() {
                match &per_alg[k] {
                    Ok(study) => {
                        throughput.push(study.throughput);
                        power.push(study.flowset.total_power());
                        epb.push(study.energy_per_bit);
                    }
                    Err(e) => {
                        failed += 1;
                        failures.push(format!("{}={value} realization {i} {alg}: {e}", cfg.axis.name()));
                    }
                }
            }
            let t = summarize(&throughput);
            rows.push(ThroughputRow {
                axis: cfg.axis.name().to_string(),
                value,
                algorithm: alg,
                mean_throughput: t.mean,
                std_throughput: t.std,
                mean_total_power: summarize(&power).mean,
                mean_energy_per_bit: summarize(&epb).mean,
                realizations: t.count,
                failures: failed,
            });
        }
    }
    Ok(ThroughputTable { rows, failures })
}

/// Serializes rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_saved_examples() {
        assert_eq!(energy_saved(200.0, 50.0).unwrap(), 75.0);
        assert_eq!(energy_saved(3.5, 3.5).unwrap(), 0.0);
        assert!(energy_saved(0.0, 1.0).is_err());
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(cost_histogram(&[1.0, 2.0, 3.0], &[0.0, 2.0, 4.0]).unwrap(), vec![1, 2]);
        assert_eq!(cost_histogram(&[], &[0.0, 1.0, 2.0]).unwrap(), vec![0, 0]);
        assert_eq!(cost_histogram(&[4.0], &[0.0, 2.0, 4.0]).unwrap(), vec![0, 1]);
        assert_eq!(cost_histogram(&[5.0, -1.0], &[0.0, 2.0, 4.0]).unwrap(), vec![0, 0]);
        assert!(cost_histogram(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn histogram_counts_sum_to_samples() {
        let costs: Vec<f64> = (0..500).map(|i| 1.0 + (i as f64 * 0.37) % 98.0).collect();
        let edges = BinSpec {
            min: 1.0,
            max: 100.0,
            count: 13,
            log: true,
        }
        .edges()
        .unwrap();
        let counts = cost_histogram(&costs, &edges).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), costs.len());
    }

    #[test]
    fn config_round_trips_and_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"axis": "jammer_power", "values": [1, 2]}"#).unwrap();
        assert_eq!(cfg.n, 20);
        assert_eq!(cfg.nj, 20);
        assert_eq!(cfg.pi, 0.1);
        assert_eq!(cfg.realizations, 100);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig::from_json(r#"{"axis": "jammer_power", "values": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"axis": "jammer_count", "values": [1.5]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"axis": "q", "values": [0.5], "bogus": 1}"#).is_err());
    }

    #[test]
    fn optimal_is_dropped_for_large_networks() {
        let mut cfg = ExperimentConfig::new(SweepAxis::JammerCount, vec![1.0]);
        cfg.algorithms = vec![Algorithm::Optimal, Algorithm::MerAp];
        assert_eq!(cfg.active_algorithms(20), vec![Algorithm::MerAp]);
        assert_eq!(cfg.active_algorithms(8), vec![Algorithm::MerAp, Algorithm::Optimal]);
        cfg.force_optimal = true;
        assert_eq!(cfg.active_algorithms(20).len(), 2);
    }

    #[test]
    fn flow_endpoints_are_distinct_pairs() {
        let pairs = flow_endpoints(10, 5, 3).unwrap();
        assert_eq!(pairs.len(), 5);
        for (i, p) in pairs.iter().enumerate() {
            assert_ne!(p.0, p.1);
            assert!(!pairs[..i].contains(p));
        }
        assert_eq!(pairs[..3], flow_endpoints(10, 3, 3).unwrap()[..]);
        assert!(flow_endpoints(2, 3, 0).is_err());
    }

    #[test]
    fn no_jammers_means_no_saving() {
        let mut cfg = ExperimentConfig::new(SweepAxis::JammerCount, vec![0.0]);
        cfg.realizations = 10;
        cfg.algorithms = vec![Algorithm::Mer, Algorithm::MerAp];
        let table = run_sweep(&cfg).unwrap();
        let row = table.row(0.0, Algorithm::MerAp).unwrap();
        assert!(row.mean_energy_saved.abs() < 1e-6, "{}", row.mean_energy_saved);
        assert_eq!(row.failures, 0);
    }

    #[test]
    fn sweep_is_reproducible() {
        let mut cfg = ExperimentConfig::new(SweepAxis::JammerPower, vec![2.0, 1.0]);
        cfg.realizations = 6;
        cfg.n = 10;
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(to_csv(&a.rows).unwrap(), to_csv(&b.rows).unwrap());
        assert_eq!(a.rows[0].value, 1.0);
        let names: Vec<_> = a.rows.iter().take(3).map(|r| r.algorithm.name()).collect();
        assert_eq!(names, vec!["MER", "MER-AP", "MER-EQ"]);
    }

    #[test]
    fn single_flow_two_nodes_gets_lambda() {
        let mut cfg = ExperimentConfig::new(SweepAxis::FlowCount, vec![1.0]);
        cfg.n = 2;
        cfg.nj = 3;
        cfg.realizations = 4;
        cfg.algorithms = vec![Algorithm::Mer, Algorithm::MerAp];
        let table = run_throughput_study(&cfg).unwrap();
        for row in &table.rows {
            assert_close!(row.mean_throughput, cfg.lambda, 1e-12);
        }
    }
}
