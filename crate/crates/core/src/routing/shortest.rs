//! Dijkstra with deterministic tie-breaking.
//!
//! Labels are ordered by cost, then hop count, then the lexicographic order of
//! the node keys along the path. Extending two labels by the same edge keeps
//! their relative order, so the usual settle-once argument still holds and the
//! result is independent of iteration order.

use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq)]
pub struct PathLabel {
    pub cost: f64,
    /// Node indices from the source, inclusive of both endpoints.
    pub path: Vec<usize>,
}

fn compare(a: &PathLabel, b: &PathLabel, key: &impl Fn(usize) -> usize) -> Ordering {
    a.cost
        .partial_cmp(&b.cost)
        .unwrap_or(Ordering::Equal)
        .then(a.path.len().cmp(&b.path.len()))
        .then_with(|| a.path.iter().map(|&u| key(u)).cmp(b.path.iter().map(|&u| key(u))))
}

/// Shortest path from `source` to `target` over `n` nodes.
///
/// `edges(u)` yields `(v, weight)` pairs with non-negative weights. `key` maps a
/// node index to the id used for lexicographic tie-breaking, which lets the
/// expanded graph break ties on physical node ids.
pub fn shortest_path<I>(
    n: usize,
    source: usize,
    target: usize,
    key: impl Fn(usize) -> usize,
    mut edges: impl FnMut(usize) -> I,
) -> Option<PathLabel>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut labels: Vec<Option<PathLabel>> = vec![None; n];
    let mut settled = vec![false; n];
    labels[source] = Some(PathLabel {
        cost: 0.0,
        path: vec![source],
    });

    loop {
        let mut current: Option<usize> = None;
        for u in 0..n {
            if settled[u] {
                continue;
            }
            let Some(label) = &labels[u] else { continue };
            match current {
                None => current = Some(u),
                Some(c) => {
                    let best = labels[c].as_ref().expect("candidate has a label");
                    if compare(label, best, &key) == Ordering::Less {
                        current = Some(u);
                    }
                }
            }
        }
        let u = current?;
        settled[u] = true;
        if u == target {
            return labels[u].take();
        }
        let base = labels[u].clone().expect("settled node has a label");
        for (v, w) in edges(u) {
            if settled[v] {
                continue;
            }
            debug_assert!(w >= 0.0, "negative edge weight {w}");
            let mut path = base.path.clone();
            path.push(v);
            let candidate = PathLabel {
                cost: base.cost + w,
                path,
            };
            let better = match &labels[v] {
                None => true,
                Some(existing) => compare(&candidate, existing, &key) == Ordering::Less,
            };
            if better {
                labels[v] = Some(candidate);
            }
        }
    }
}
