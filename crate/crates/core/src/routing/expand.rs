//! Hop-layered expansion of the network graph.
//!
//! The source appears once, at layer 0. Every other node `u` is replicated as
//! `u(1) .. u(N-1)`. Edges go from the source to every `u(1)`, and from `u(h)`
//! to `v(h+1)` for every link `u -> v` with `u` not the source or destination
//! and `v` not the source. A path from the source to `x(h)` therefore has
//! exactly `h` edges. Relays may repeat across layers, so such a path maps to an
//! `h`-hop walk in the original graph; the destination never appears mid-path
//! because its replicas have no outgoing edges.

use crate::netgen::NetworkInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandedNode {
    /// Node id in the original network.
    pub phys: usize,
    /// Hop count from the source; 0 only for the source itself.
    pub layer: usize,
}

#[derive(Debug, Clone)]
pub struct ExpandedGraph {
    n: usize,
    source: usize,
    dest: usize,
    nodes: Vec<ExpandedNode>,
    adj: Vec<Vec<usize>>,
}

impl ExpandedGraph {
    /// Expands a network of `n` nodes whose link set is given by `link(u, v)`.
    pub fn new(n: usize, source: usize, dest: usize, link: impl Fn(usize, usize) -> bool) -> Self {
        let layers = n - 1;
        let mut nodes = Vec::with_capacity(1 + layers * layers);
        nodes.push(ExpandedNode {
            phys: source,
            layer: 0,
        });
        for layer in 1..=layers {
            for u in (0..n).filter(|&u| u != source) {
                nodes.push(ExpandedNode { phys: u, layer });
            }
        }

        let mut graph = Self {
            n,
            source,
            dest,
            nodes,
            adj: Vec::new(),
        };
        let mut adj = vec![Vec::new(); graph.nodes.len()];
        for u in (0..n).filter(|&u| u != source && link(source, u)) {
            adj[0].push(graph.index_of(u, 1).expect("layer-1 replica exists"));
        }
        for u in (0..n).filter(|&u| u != source && u != dest) {
            for v in (0..n).filter(|&v| v != source && v != u && link(u, v)) {
                for h in 1..layers {
                    let from = graph.index_of(u, h).expect("replica exists");
                    let to = graph.index_of(v, h + 1).expect("replica exists");
                    adj[from].push(to);
                }
            }
        }
        for succ in &mut adj {
            succ.sort_unstable();
        }
        graph.adj = adj;
        graph
    }

    pub fn physical_nodes(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> usize {
        self.n - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    pub fn node(&self, idx: usize) -> ExpandedNode {
        self.nodes[idx]
    }

    pub fn source_index(&self) -> usize {
        0
    }

    /// Index of `phys(layer)`; `None` for a source replica or an out-of-range layer.
    pub fn index_of(&self, phys: usize, layer: usize) -> Option<usize> {
        if phys == self.source {
            return (layer == 0).then_some(0);
        }
        if layer == 0 || layer > self.layers() || phys >= self.n {
            return None;
        }
        let rank = if phys > self.source { phys - 1 } else { phys };
        Some(1 + (layer - 1) * (self.n - 1) + rank)
    }

    /// Index of the destination replica at `layer`.
    pub fn dest_index(&self, layer: usize) -> Option<usize> {
        self.index_of(self.dest, layer)
    }

    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.adj[idx]
    }

    /// All source-to-`target` paths, as expanded-node index sequences.
    pub fn all_paths_to(&self, target: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        self.walk(&mut stack, target, &mut out);
        out
    }

    fn walk(&self, stack: &mut Vec<usize>, target: usize, out: &mut Vec<Vec<usize>>) {
        let top = *stack.last().expect("non-empty stack");
        if top == target {
            out.push(stack.clone());
            return;
        }
        for &next in self.successors(top) {
            stack.push(next);
            self.walk(stack, target, out);
            stack.pop();
        }
    }
}

/// Expansion of the complete graph of `inst`.
pub fn expand_network(inst: &NetworkInstance) -> ExpandedGraph {
    ExpandedGraph::new(inst.len(), inst.source, inst.dest, |_, _| true)
}
