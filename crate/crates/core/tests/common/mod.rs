//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls into the library's solvers; the oracles recompute
//! answers from first principles (simulation, brute-force grids, naive
//! recursion) so agreement is meaningful.

#![allow(dead_code)]

use jamroute::channel::{ChannelParams, Jammer};
use jamroute::{NetworkInstance, Point};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Exp1};

/// Monte-Carlo outage of one link under Rayleigh fading on every path and
/// independent ON/OFF jammers. Returns (estimate, standard error).
pub fn simulate_outage(
    p_tx: f64,
    d: f64,
    jammers: &[(f64, f64)],
    params: &ChannelParams,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let on = Bernoulli::new(params.q).unwrap();
    let mean_signal = p_tx / d.powf(params.alpha);
    let mean_jam: Vec<f64> = jammers
        .iter()
        .map(|&(p, dj)| p / dj.powf(params.alpha))
        .collect();
    let mut outages = 0usize;
    for _ in 0..samples {
        let h: f64 = Exp1.sample(&mut rng);
        let mut interference = params.n0;
        for &m in &mean_jam {
            let g: f64 = Exp1.sample(&mut rng);
            if on.sample(&mut rng) {
                interference += m * g;
            }
        }
        if mean_signal * h < params.gamma * interference {
            outages += 1;
        }
    }
    let p = outages as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Every simple path from `s` to `t` in the complete graph on `n` nodes,
/// built by plain recursion and sorted afterwards.
pub fn all_simple_paths(n: usize, s: usize, t: usize, max_hops: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, t: usize, max_hops: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        if path.len() > max_hops {
            return;
        }
        for v in 0..n {
            if !path.contains(&v) {
                path.push(v);
                go(n, t, max_hops, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, t, max_hops, &mut vec![s], &mut out);
    out.sort();
    out
}

/// Number of simple s-t paths in K_n: sum over k relays of (n-2)!/(n-2-k)!.
pub fn simple_path_count(n: usize) -> u64 {
    let m = (n - 2) as u64;
    let mut total = 0;
    let mut falling = 1;
    for k in 0..=m {
        total += falling;
        falling *= m - k;
    }
    total
}

/// Exact end-to-end success of a path with independent links, computed from
/// the closed form directly (no library call).
pub fn path_log_success(powers: &[f64], links: &[(f64, Vec<(f64, f64)>)], params: &ChannelParams) -> f64 {
    powers
        .iter()
        .zip(links)
        .map(|(&p, (d, jam))| {
            let signal = p / d.powf(params.alpha);
            let mut ls = -params.gamma * params.n0 / signal;
            for &(pj, dj) in jam {
                let x = params.gamma * (pj / dj.powf(params.alpha)) / signal;
                ls += (params.q / (1.0 + x) + 1.0 - params.q).ln();
            }
            ls
        })
        .sum()
}

/// Two-stage grid search for the minimum `P1 + P2` on a 2-link path that
/// meets end-to-end outage `pi`. For each `P1` the smallest feasible `P2` is
/// found by bisection on the closed form.
pub fn two_link_grid_min(links: &[(f64, Vec<(f64, f64)>); 2], params: &ChannelParams, pi: f64, grid: usize) -> f64 {
    let target = (1.0 - pi).ln();
    let link_ls = |k: usize, p: f64| path_log_success(&[p], std::slice::from_ref(&links[k]), params);
    let min_p2 = |p1: f64| -> Option<f64> {
        let budget = target - link_ls(0, p1);
        if budget >= 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (1e-12, 1.0);
        while link_ls(1, hi) < budget {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if link_ls(1, mid) < budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    };
    // P1 must be large enough that link 1 alone leaves some budget.
    let mut p1_min = 1e-9;
    while link_ls(0, p1_min) <= target {
        p1_min *= 1.5;
    }
    let scan = |lo: f64, hi: f64| -> (f64, f64) {
        let mut best = (f64::INFINITY, lo);
        for i in 0..=grid {
            let p1 = lo * (hi / lo).powf(i as f64 / grid as f64);
            if let Some(p2) = min_p2(p1) {
                if p1 + p2 < best.0 {
                    best = (p1 + p2, p1);
                }
            }
        }
        best
    };
    let (_, p1) = scan(p1_min, p1_min * 1e4);
    let coarse_step = 1e4f64.powf(1.0 / grid as f64);
    let (total, _) = scan(p1 / coarse_step, p1 * coarse_step);
    total
}

/// Brute-force LP oracle: for up to three sets, scan the weight simplex on a
/// grid, and for each schedule compute the best rates by a nested scan of the
/// per-flow bottleneck.
pub fn lp_grid_oracle(
    routes: &[Vec<(usize, usize)>],
    sets: &[Vec<(usize, usize)>],
    lambda: f64,
    grid: usize,
) -> f64 {
    assert!(sets.len() <= 3);
    let mut best: f64 = 0.0;
    let m = sets.len();
    let steps = grid;
    let mut weights = vec![0.0; m];
    let mut visit = |w: &[f64]| {
        let capacity = |link: &(usize, usize)| -> f64 {
            lambda
                * sets
                    .iter()
                    .zip(w)
                    .filter(|(s, _)| s.contains(link))
                    .map(|(_, &a)| a)
                    .sum::<f64>()
        };
        best = best.max(best_rates(routes, &capacity));
    };
    match m {
        1 => visit(&[1.0]),
        2 => {
            for i in 0..=steps {
                weights[0] = i as f64 / steps as f64;
                weights[1] = 1.0 - weights[0];
                visit(&weights);
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    weights[0] = i as f64 / steps as f64;
                    weights[1] = j as f64 / steps as f64;
                    weights[2] = 1.0 - weights[0] - weights[1];
                    visit(&weights);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

/// Max total rate for fixed link capacities, for at most two flows: the
/// first flow's rate is scanned and the second takes what is left.
fn best_rates(routes: &[Vec<(usize, usize)>], capacity: &dyn Fn(&(usize, usize)) -> f64) -> f64 {
    assert!(routes.len() <= 2);
    let bottleneck = |r: &Vec<(usize, usize)>, used: &dyn Fn(&(usize, usize)) -> f64| {
        r.iter()
            .map(|l| capacity(l) - used(l))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    };
    if routes.len() == 1 {
        return bottleneck(&routes[0], &|_| 0.0);
    }
    let r1_max = bottleneck(&routes[0], &|_| 0.0);
    let mut best: f64 = 0.0;
    let steps = 400;
    for i in 0..=steps {
        let r1 = r1_max * i as f64 / steps as f64;
        let r2 = bottleneck(&routes[1], &|l| if routes[0].contains(l) { r1 } else { 0.0 });
        best = best.max(r1 + r2);
    }
    best
}

/// Random small instance in a square of side 10.
pub fn random_instance(n: usize, nj: usize, params: ChannelParams, seed: u64) -> NetworkInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pt = || Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
    let nodes: Vec<Point> = (0..n).map(|_| pt()).collect();
    let jammers: Vec<Jammer> = (0..nj).map(|_| Jammer::new(pt(), 1.0).unwrap()).collect();
    NetworkInstance::new(nodes, jammers, params, 0, n - 1).unwrap()
}

/// Spearman rank correlation (no ties expected).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, i) in idx.into_iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let var: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    cov / var
}
