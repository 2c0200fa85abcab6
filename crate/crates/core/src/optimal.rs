//! Exhaustive-search baseline.
//!
//! For a fixed path the exact outage constraint reads
//! `g(P) = sum_k f_k(P_k) = -ln(1 - pi)` with
//! `f_k(P) = -ln(1 - p_out(P))`. Each `f_k` is convex and decreasing, so the
//! minimum-power allocation is the unique KKT point
//! `1 = lambda * (-f_k'(P_k))` for all `k`. For fixed `lambda` each `P_k` is
//! found by bisection on the monotone derivative; `lambda` itself is bisected
//! until the constraint holds. Every simple path is then tried, skipping paths
//! whose jammer-free cost already exceeds the best total found.

use serde::{Deserialize, Serialize};

use crate::channel::{check_probability, log_success_exact, JammerTerm};
use crate::error::{Error, Result};
use crate::netgen::{LinkTable, NetworkInstance};
use crate::routing::{epsilon_budget, Algorithm, RoutePlan};

const INNER_REL_TOL: f64 = 1e-12;
const OUTER_ABS_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowPolicy {
    Error,
    Truncate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEnumConfig {
    pub max_hops: usize,
    pub max_paths: usize,
    pub on_overflow: OverflowPolicy,
}

impl PathEnumConfig {
    pub const DEFAULT_MAX_PATHS: usize = 1_000_000;

    pub fn for_instance(inst: &NetworkInstance) -> Self {
        Self {
            max_hops: inst.len().saturating_sub(1).max(1),
            max_paths: Self::DEFAULT_MAX_PATHS,
            on_overflow: OverflowPolicy::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEnumeration {
    pub paths: Vec<Vec<usize>>,
    /// Set when enumeration stopped at `max_paths` under the truncate policy.
    pub truncated: bool,
}

/// All simple source-to-destination paths of at most `max_hops` links, in
/// lexicographic order of their node sequences.
pub fn enumerate_paths(inst: &NetworkInstance, cfg: &PathEnumConfig) -> Result<PathEnumeration> {
    if cfg.max_hops == 0 || cfg.max_paths == 0 {
        return Err(Error::Config("path enumeration caps must be >= 1".into()));
    }
    let n = inst.len();
    let mut paths = Vec::new();
    let mut stack = vec![inst.source];
    let mut visited = vec![false; n];
    visited[inst.source] = true;

    // Explicit DFS over (node, next candidate) frames.
    let mut cursor = vec![0usize];
    while !stack.is_empty() {
        let next = cursor.last_mut().expect("cursor tracks stack");
        let mut advanced = false;
        while *next < n {
            let v = *next;
            *next += 1;
            if visited[v] {
                continue;
            }
            if v == inst.dest {
                if paths.len() == cfg.max_paths {
                    return match cfg.on_overflow {
                        OverflowPolicy::Error => Err(Error::Overflow {
                            limit: cfg.max_paths,
                        }),
                        OverflowPolicy::Truncate => Ok(PathEnumeration {
                            paths,
                            truncated: true,
                        }),
                    };
                }
                let mut p = stack.clone();
                p.push(v);
                paths.push(p);
                continue;
            }
            // A relay is only useful if there is still a hop left for the destination.
            if stack.len() < cfg.max_hops {
                visited[v] = true;
                stack.push(v);
                cursor.push(0);
                advanced = true;
                break;
            }
        }
        if !advanced {
            let done = stack.pop().expect("non-empty");
            cursor.pop();
            visited[done] = false;
            if stack.is_empty() {
                break;
            }
        }
    }
    Ok(PathEnumeration {
        paths,
        truncated: false,
    })
}

/// KKT solution of the per-path exact power program.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    pub powers: Vec<f64>,
    pub multiplier: f64,
    /// `g(P) - (-ln(1 - pi))` at the returned powers.
    pub residual: f64,
}

struct LinkModel<'a> {
    /// `gamma N0 d^alpha`.
    noise: f64,
    /// Per-jammer `gamma (P_j / d_j^alpha) d^alpha`.
    jam: Vec<f64>,
    q: f64,
    d: f64,
    terms: &'a [JammerTerm],
}

impl LinkModel<'_> {
    /// `-f'(P)`, positive and decreasing in `P`.
    fn marginal(&self, p: f64) -> f64 {
        let mut m = self.noise / (p * p);
        for &b in &self.jam {
            m += self.q * b / ((p + (1.0 - self.q) * b) * (p + b));
        }
        m
    }

    /// Power at which `-f'(P) = 1 / lambda`.
    fn power_at(&self, lambda: f64) -> Result<f64> {
        let target = 1.0 / lambda;
        let jam_sum: f64 = self.jam.iter().sum::<f64>() * self.q;
        let mut lo = (self.noise * lambda).sqrt();
        let mut hi = ((self.noise + jam_sum) * lambda).sqrt();
        if hi / lo - 1.0 <= INNER_REL_TOL {
            return Ok(hi);
        }
        for _ in 0..MAX_ITER {
            let mid = (lo * hi).sqrt();
            if self.marginal(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 <= INNER_REL_TOL {
                return Ok((lo * hi).sqrt());
            }
        }
        Err(Error::Convergence {
            iterations: MAX_ITER,
            detail: format!("inner power bisection stalled in [{lo}, {hi}] at lambda {lambda}"),
        })
    }
}

/// Minimum total power on `path` subject to exact end-to-end outage `pi`.
pub fn optimal_power_for_path(path: &[usize], inst: &NetworkInstance, pi: f64) -> Result<PathSolution> {
    check_probability(pi, "end-to-end outage")?;
    let table = LinkTable::new(inst)?;
    solve_path(path, &table, pi)
}

pub(crate) fn solve_path(path: &[usize], table: &LinkTable, pi: f64) -> Result<PathSolution> {
    if path.len() < 2 {
        return Err(Error::Domain("path needs at least one link".into()));
    }
    let params = *table.params();
    let models: Vec<LinkModel> = path
        .windows(2)
        .map(|w| {
            let d = table.distance(w[0], w[1]);
            let path_gain = d.powf(params.alpha);
            let terms = table.terms_at(w[1]);
            LinkModel {
                noise: params.gamma * params.n0 * path_gain,
                jam: terms
                    .iter()
                    .map(|t| params.gamma * t.power / t.distance.powf(params.alpha) * path_gain)
                    .collect(),
                q: params.q,
                d,
                terms,
            }
        })
        .collect();
    if let Some(bad) = models.iter().find(|m| !(m.d > 0.0)) {
        return Err(Error::Domain(format!("zero-length link (d = {})", bad.d)));
    }

    let c = -(-pi).ln_1p();
    let powers_at = |lambda: f64| -> Result<Vec<f64>> {
        models.iter().map(|m| m.power_at(lambda)).collect()
    };
    let constraint = |powers: &[f64]| -> f64 {
        models
            .iter()
            .zip(powers)
            .map(|(m, &p)| -log_success_exact(p, m.d, m.terms, &params))
            .sum()
    };

    // Start from the multiplier of the exponential-bound solution.
    let weight_sum: f64 = models
        .iter()
        .map(|m| (m.noise + params.q * m.jam.iter().sum::<f64>()).sqrt())
        .sum();
    let mut lambda = weight_sum * weight_sum / (c * c);

    // g is decreasing in lambda: find lo with g > c and hi with g <= c.
    let (mut lo, mut hi);
    let mut g = constraint(&powers_at(lambda)?);
    let mut iterations = 0;
    if g > c {
        lo = lambda;
        loop {
            lambda *= 2.0;
            g = constraint(&powers_at(lambda)?);
            iterations += 1;
            if g <= c {
                hi = lambda;
                break;
            }
            lo = lambda;
            if iterations >= MAX_ITER {
                return Err(bracket_failure(lo, g, c));
            }
        }
    } else {
        hi = lambda;
        loop {
            lambda /= 2.0;
            g = constraint(&powers_at(lambda)?);
            iterations += 1;
            if g > c {
                lo = lambda;
                break;
            }
            hi = lambda;
            if iterations >= MAX_ITER {
                return Err(bracket_failure(hi, g, c));
            }
        }
    }

    let mut best = powers_at(hi)?;
    let mut residual = constraint(&best) - c;
    for _ in 0..MAX_ITER {
        if residual.abs() <= OUTER_ABS_TOL * 1e-3 || hi / lo - 1.0 <= 1e-15 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let powers = powers_at(mid)?;
        let gm = constraint(&powers) - c;
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            best = powers;
            residual = gm;
        }
    }
    if residual.abs() > OUTER_ABS_TOL {
        return Err(Error::Convergence {
            iterations: MAX_ITER,
            detail: format!(
                "constraint residual {residual:e} at lambda in [{lo}, {hi}], path {path:?}"
            ),
        });
    }
    Ok(PathSolution {
        powers: best,
        multiplier: hi,
        residual,
    })
}

fn bracket_failure(lambda: f64, g: f64, c: f64) -> Error {
    Error::Convergence {
        iterations: MAX_ITER,
        detail: format!("could not bracket the multiplier: lambda {lambda}, g {g}, target {c}"),
    }
}

/// Exhaustive search over simple paths for the minimum exact-model power.
pub fn brute_force_route(inst: &NetworkInstance, pi: f64, cfg: &PathEnumConfig) -> Result<RoutePlan> {
    check_probability(pi, "end-to-end outage")?;
    inst.validate()?;
    let table = LinkTable::new(inst)?;
    let params = *table.params();
    let eps = epsilon_budget(pi, params.gamma)?.eps;
    let enumeration = enumerate_paths(inst, cfg)?;

    // Jammer-free optimum is a lower bound on each path's exact cost.
    let mut candidates: Vec<(f64, &Vec<usize>)> = enumeration
        .paths
        .iter()
        .map(|p| {
            let s: f64 = p
                .windows(2)
                .map(|w| (params.n0 * table.distance(w[0], w[1]).powf(params.alpha)).sqrt())
                .sum();
            (s * s / eps, p)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<(f64, &Vec<usize>, Vec<f64>)> = None;
    for (bound, path) in candidates {
        if let Some((total, _, _)) = &best {
            if bound > *total {
                break;
            }
        }
        let solution = solve_path(path, &table, pi)?;
        let total: f64 = solution.powers.iter().sum();
        let better = match &best {
            None => true,
            Some((bt, bp, _)) => {
                total < *bt || (total == *bt && (path.len(), path) < (bp.len(), *bp))
            }
        };
        if better {
            best = Some((total, path, solution.powers));
        }
    }
    let (_, path, powers) = best.ok_or(Error::NoRoute {
        source_node: inst.source,
        dest: inst.dest,
    })?;
    RoutePlan::evaluate(Algorithm::Optimal, path.clone(), powers, &table)
}
