mod common;

use jamroute::channel::ChannelParams;
use jamroute::optimal::{enumerate_paths, optimal_power_for_path, PathEnumConfig};
use jamroute::routing::{expand_network, ExpandedGraph};
use jamroute::routing::{
    allocate_powers_approx, end_to_end_outage, epsilon_budget, heuristic_tighten, merap_route,
    route, Algorithm, RouteOptions,
};
use jamroute::{GenSpec, NetworkInstance};
use proptest::prelude::*;

fn instance(n: usize, nj: usize, alpha: f64, q: f64, seed: u64) -> NetworkInstance {
    jamroute::netgen::generate_instance(&GenSpec {
        n,
        nj,
        params: ChannelParams::new(alpha, 1.0, 1.0, q).unwrap(),
        seed,
        ..GenSpec::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn allocation_meets_budget_and_is_proportional(
        weights in prop::collection::vec(0.01f64..100.0, 1..12),
        pi in 0.001f64..0.9,
        gamma in 0.1f64..5.0,
    ) {
        let budget = epsilon_budget(pi, gamma).unwrap();
        let powers = allocate_powers_approx(&weights, &budget).unwrap();
        let spent: f64 = weights.iter().zip(&powers).map(|(w, p)| w * w / p).sum();
        prop_assert!((spent - budget.eps).abs() <= 1e-12 * budget.eps.max(1.0));
        for (w, p) in weights.iter().zip(&powers) {
            prop_assert!((p / w - powers[0] / weights[0]).abs() <= 1e-12 * (powers[0] / weights[0]));
        }
    }

    #[test]
    fn end_to_end_outage_is_bounded(outages in prop::collection::vec(0.0f64..0.99, 1..10)) {
        let e2e = end_to_end_outage(&outages).unwrap();
        let max = outages.iter().cloned().fold(0.0, f64::max);
        let sum: f64 = outages.iter().sum();
        prop_assert!(e2e >= max - 1e-15);
        prop_assert!(e2e <= sum.min(1.0) + 1e-15);
    }

    #[test]
    fn tightening_hits_target_without_raising_power(
        seed in 0u64..1000,
        pi in 0.02f64..0.5,
        q in 0.0f64..=1.0,
    ) {
        let inst = instance(12, 10, 2.0, q, seed);
        let plan = merap_route(&inst, pi).unwrap();
        prop_assert!(plan.e2e_outage <= pi + 1e-12);
        let tight = heuristic_tighten(&plan, pi, &inst).unwrap();
        prop_assert!((tight.e2e_outage - pi).abs() <= 1e-9, "{}", tight.e2e_outage);
        prop_assert!(tight.total_power <= plan.total_power * (1.0 + 1e-12));
        prop_assert_eq!(&tight.nodes, &plan.nodes);
    }

    #[test]
    fn routes_are_scale_covariant(seed in 0u64..1000, c in 0.1f64..10.0, alpha in 2.0f64..4.0) {
        let inst = instance(10, 8, alpha, 1.0, seed);
        // Distances grow by c, so received powers (signal and jamming) shrink by
        // c^alpha; scaling jammer powers by c^alpha keeps every SIR ratio fixed.
        let mut scaled = inst.scaled(c).unwrap();
        for j in &mut scaled.jammers {
            j.power *= c.powf(alpha);
        }
        let opts = RouteOptions::default();
        for algo in [Algorithm::Mer, Algorithm::MerAp, Algorithm::MerEq] {
            let a = route(&inst, algo, 0.1, &opts).unwrap();
            let b = route(&scaled, algo, 0.1, &opts).unwrap();
            prop_assert_eq!(&a.nodes, &b.nodes);
            let ratio = b.total_power / a.total_power;
            prop_assert!((ratio / c.powf(alpha) - 1.0).abs() < 1e-6, "{algo}: {ratio}");
        }
    }
}

#[test]
fn mer_ignores_jammer_positions() {
    for seed in 0..20 {
        let inst = instance(15, 10, 3.0, 1.0, seed);
        let mut quiet = inst.clone();
        for j in &mut quiet.jammers {
            j.power *= 1e-6;
        }
        let opts = RouteOptions::default();
        let loud = route(&inst, Algorithm::Mer, 0.1, &opts).unwrap();
        let soft = route(&quiet, Algorithm::Mer, 0.1, &opts).unwrap();
        assert_eq!(loud.nodes, soft.nodes);
        assert!(loud.total_power >= soft.total_power);
    }
}

#[test]
fn every_plan_is_a_simple_path_meeting_its_target() {
    let opts = RouteOptions::default();
    for seed in 0..30 {
        let inst = instance(9, 12, 2.0 + (seed % 3) as f64, 1.0, seed);
        for algo in Algorithm::ALL {
            let plan = route(&inst, algo, 0.1, &opts).unwrap();
            let mut sorted = plan.nodes.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), plan.nodes.len(), "{algo} repeats a node");
            assert_eq!(plan.nodes[0], inst.source);
            assert_eq!(*plan.nodes.last().unwrap(), inst.dest);
            assert!((plan.e2e_outage - 0.1).abs() <= 1e-8, "{algo}: {}", plan.e2e_outage);
        }
    }
}

/// Maps an expanded-graph walk to (physical nodes, layers).
fn project(g: &ExpandedGraph, walk: &[usize]) -> (Vec<usize>, Vec<usize>) {
    walk.iter().map(|&i| (g.node(i).phys, g.node(i).layer)).unzip()
}

#[test]
fn expansion_paths_are_exactly_the_hop_limited_walks() {
    for n in 2..=5 {
        let g = ExpandedGraph::new(n, 0, n - 1, |_, _| true);
        assert_eq!(g.node_count(), 1 + (n - 1) * (n - 1));
        for h in 1..n {
            let target = g.dest_index(h).unwrap();
            let mut walks: Vec<Vec<usize>> = g
                .all_paths_to(target)
                .iter()
                .map(|p| {
                    let (phys, layers) = project(&g, p);
                    assert_eq!(layers, (0..=h).collect::<Vec<_>>());
                    phys
                })
                .collect();
            walks.sort();
            // Oracle: all walks 0 -> n-1 with exactly h hops, no self-loops, that
            // neither revisit the source nor pass through the destination early.
            let mut expected = Vec::new();
            let mut stack = vec![vec![0usize]];
            while let Some(w) = stack.pop() {
                let last = *w.last().unwrap();
                if w.len() == h + 1 {
                    if last == n - 1 {
                        expected.push(w);
                    }
                    continue;
                }
                if last == n - 1 {
                    continue;
                }
                for v in 1..n {
                    if v != last {
                        let mut next = w.clone();
                        next.push(v);
                        stack.push(next);
                    }
                }
            }
            expected.sort();
            assert_eq!(walks, expected, "n = {n}, h = {h}");
        }
    }
}

#[test]
fn expanded_network_of_generated_instance_has_formula_size() {
    for n in 2..=6 {
        let inst = instance(n, 3, 2.0, 1.0, n as u64);
        assert_eq!(expand_network(&inst).node_count(), 1 + (n - 1) * (n - 1));
    }
}

#[test]
fn enumeration_matches_recursive_oracle() {
    for n in 2..=8 {
        let inst = instance(n, 2, 2.0, 1.0, 40 + n as u64);
        let got = enumerate_paths(&inst, &PathEnumConfig::for_instance(&inst)).unwrap();
        let want = common::all_simple_paths(n, inst.source, inst.dest, n - 1);
        assert_eq!(got.paths, want, "n = {n}");
        assert_eq!(got.paths.len() as u64, common::simple_path_count(n));
        for hops in 1..n - 1 {
            let cfg = PathEnumConfig {
                max_hops: hops,
                ..PathEnumConfig::for_instance(&inst)
            };
            let got = enumerate_paths(&inst, &cfg).unwrap();
            assert_eq!(got.paths, common::all_simple_paths(n, inst.source, inst.dest, hops));
        }
    }
}

#[test]
fn two_link_solver_matches_grid_search() {
    for seed in 0..6 {
        let q = [1.0, 0.5, 0.2][seed as usize % 3];
        let inst = instance(3, 4, 2.0 + seed as f64 * 0.4, q, 100 + seed);
        let relay = (0..3).find(|v| *v != inst.source && *v != inst.dest).unwrap();
        let path = [inst.source, relay, inst.dest];
        let pi = 0.1;
        let solution = optimal_power_for_path(&path, &inst, pi).unwrap();
        let total: f64 = solution.powers.iter().sum();

        let link = |u: usize, v: usize| {
            let rx = inst.pos(v);
            let jam = inst
                .jammers
                .iter()
                .map(|j| (j.power, rx.distance(&j.pos)))
                .collect::<Vec<_>>();
            (inst.distance(u, v), jam)
        };
        let links = [link(path[0], path[1]), link(path[1], path[2])];
        let oracle = common::two_link_grid_min(&links, &inst.params, pi, 2000);
        assert!(
            (total - oracle).abs() <= 1e-3 * oracle,
            "seed {seed}: solver {total}, grid {oracle}"
        );
        assert!(total <= oracle * (1.0 + 1e-9), "grid beat the solver");
    }
}
