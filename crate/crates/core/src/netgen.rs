//! Network instances: random generation and the JSON instance file.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{jammer_terms, ChannelParams, Jammer, JammerTerm, LinkGeometry};
use crate::error::{domain, Error, Result};
use crate::geometry::Point;
use crate::rng::rng_from_seed;

/// Points closer than this are considered coincident and are resampled.
pub const MIN_SEPARATION: f64 = 1e-9;

const MAX_RESAMPLE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub pos: Point,
}

/// Node and jammer placement plus channel parameters. The link set is the
/// complete directed graph on the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub nodes: Vec<Node>,
    pub jammers: Vec<Jammer>,
    pub params: ChannelParams,
    pub source: usize,
    pub dest: usize,
}

impl NetworkInstance {
    pub fn new(
        positions: Vec<Point>,
        jammers: Vec<Jammer>,
        params: ChannelParams,
        source: usize,
        dest: usize,
    ) -> Result<Self> {
        let nodes = positions
            .into_iter()
            .enumerate()
            .map(|(id, pos)| Node { id, pos })
            .collect();
        let inst = Self {
            nodes,
            jammers,
            params,
            source,
            dest,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let n = self.nodes.len();
        if n < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 nodes, got {n}"
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidInstance(format!(
                    "node ids must be dense 0..{n}, found id {} at position {i}",
                    node.id
                )));
            }
            if !(node.pos.x.is_finite() && node.pos.y.is_finite()) {
                return Err(Error::InvalidInstance(format!("node {i} has a non-finite position")));
            }
        }
        if self.source >= n || self.dest >= n {
            return Err(Error::InvalidInstance(format!(
                "source {} / dest {} out of range for {n} nodes",
                self.source, self.dest
            )));
        }
        if self.source == self.dest {
            return Err(Error::InvalidInstance("source and dest coincide".into()));
        }
        for j in &self.jammers {
            if !(j.power > 0.0 && j.power.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "jammer power must be > 0, got {}",
                    j.power
                )));
            }
            if let Some(node) = self.nodes.iter().find(|nd| nd.pos.distance(&j.pos) <= 0.0) {
                return Err(Error::Singular(format!(
                    "jammer coincides with node {}",
                    node.id
                )));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if self.nodes[a].pos.distance(&self.nodes[b].pos) <= 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "nodes {a} and {b} share a position"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pos(&self, id: usize) -> Point {
        self.nodes[id].pos
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.pos(u).distance(&self.pos(v))
    }

    /// Same placement with a different source/destination pair.
    pub fn with_endpoints(&self, source: usize, dest: usize) -> Result<Self> {
        let mut inst = self.clone();
        inst.source = source;
        inst.dest = dest;
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_params(&self, params: ChannelParams) -> Result<Self> {
        params.validate()?;
        let mut inst = self.clone();
        inst.params = params;
        Ok(inst)
    }

    /// All node and jammer coordinates multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("scale factor must be > 0, got {c}"));
        }
        let mut inst = self.clone();
        for node in &mut inst.nodes {
            node.pos = node.pos.scaled(c);
        }
        for j in &mut inst.jammers {
            j.pos = j.pos.scaled(c);
        }
        Ok(inst)
    }
}

/// Per-receiver jamming state and pairwise distances, computed once per instance.
#[derive(Debug, Clone)]
pub struct LinkTable {
    n: usize,
    dist: Vec<f64>,
    jam: Vec<f64>,
    terms: Vec<Vec<JammerTerm>>,
    params: ChannelParams,
}

impl LinkTable {
    pub fn new(inst: &NetworkInstance) -> Result<Self> {
        let n = inst.len();
        let mut dist = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                dist[u * n + v] = inst.distance(u, v);
            }
        }
        let terms = inst
            .nodes
            .iter()
            .map(|node| jammer_terms(node.pos, &inst.jammers))
            .collect::<Result<Vec<_>>>()?;
        let jam = terms
            .iter()
            .map(|t| crate::channel::aggregate_from_terms(t, &inst.params))
            .collect();
        Ok(Self {
            n,
            dist,
            jam,
            terms,
            params: inst.params,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.n + v]
    }

    /// Aggregate expected jamming at node `v`.
    pub fn jamming_at(&self, v: usize) -> f64 {
        self.jam[v]
    }

    /// Jammer terms seen by receiver `v`.
    pub fn terms_at(&self, v: usize) -> &[JammerTerm] {
        &self.terms[v]
    }

    pub fn geometry(&self, u: usize, v: usize) -> LinkGeometry {
        LinkGeometry {
            d: self.distance(u, v),
            jam: self.jamming_at(v),
        }
    }
}

/// Parameters of a random instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub nj: usize,
    pub side: f64,
    pub pj: f64,
    pub params: ChannelParams,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n: 20,
            nj: 20,
            side: 10.0,
            pj: 1.0,
            params: ChannelParams::default(),
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("need at least 2 nodes, got {}", self.n));
        }
        if !(self.side > 0.0 && self.side.is_finite()) {
            return domain(format!("side must be > 0, got {}", self.side));
        }
        if !(self.pj > 0.0 && self.pj.is_finite()) {
            return domain(format!("jammer power must be > 0, got {}", self.pj));
        }
        self.params.validate()
    }
}

fn nearest_to(nodes: &[Point], target: Point, skip: Option<usize>) -> usize {
    let mut best = usize::MAX;
    let mut best_d = f64::INFINITY;
    for (i, p) in nodes.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let d = p.distance(&target);
        // Strict comparison keeps the lowest id on ties.
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Places `n` nodes and `nj` jammers uniformly on `[0, side]^2`.
///
/// Nodes are drawn first, then jammers, each as an `(x, y)` pair. A point within
/// [`MIN_SEPARATION`] of any earlier point is redrawn. The source is the node
/// nearest `(0, 0)` and the destination the node (other than the source)
/// nearest `(side, side)`, ties going to the lowest id.
pub fn generate_instance(spec: &GenSpec) -> Result<NetworkInstance> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let mut placed: Vec<Point> = Vec::with_capacity(spec.n + spec.nj);
    let mut draw = |placed: &mut Vec<Point>| -> Result<Point> {
        for _ in 0..MAX_RESAMPLE {
            let p = Point::new(
                rng.random::<f64>() * spec.side,
                rng.random::<f64>() * spec.side,
            );
            if placed.iter().all(|q| q.distance(&p) >= MIN_SEPARATION) {
                placed.push(p);
                return Ok(p);
            }
        }
        domain("could not place a point with the minimum separation")
    };

    let mut positions = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        positions.push(draw(&mut placed)?);
    }
    let mut jammers = Vec::with_capacity(spec.nj);
    for _ in 0..spec.nj {
        let pos = draw(&mut placed)?;
        jammers.push(Jammer {
            pos,
            power: spec.pj,
        });
    }

    let source = nearest_to(&positions, Point::new(0.0, 0.0), None);
    let dest = nearest_to(&positions, Point::new(spec.side, spec.side), Some(source));
    NetworkInstance::new(positions, jammers, spec.params, source, dest)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JammerRecord {
    x: f64,
    y: f64,
    power: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    params: ChannelParams,
    nodes: Vec<NodeRecord>,
    jammers: Vec<JammerRecord>,
    source: usize,
    dest: usize,
}

impl From<&NetworkInstance> for InstanceFile {
    fn from(inst: &NetworkInstance) -> Self {
        Self {
            params: inst.params,
            nodes: inst
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id,
                    x: n.pos.x,
                    y: n.pos.y,
                })
                .collect(),
            jammers: inst
                .jammers
                .iter()
                .map(|j| JammerRecord {
                    x: j.pos.x,
                    y: j.pos.y,
                    power: j.power,
                })
                .collect(),
            source: inst.source,
            dest: inst.dest,
        }
    }
}

impl TryFrom<InstanceFile> for NetworkInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let mut nodes: Vec<Node> = file
            .nodes
            .into_iter()
            .map(|r| Node {
                id: r.id,
                pos: Point::new(r.x, r.y),
            })
            .collect();
        nodes.sort_by_key(|n| n.id);
        let inst = NetworkInstance {
            nodes,
            jammers: file
                .jammers
                .into_iter()
                .map(|r| Jammer {
                    pos: Point::new(r.x, r.y),
                    power: r.power,
                })
                .collect(),
            params: file.params,
            source: file.source,
            dest: file.dest,
        };
        inst.validate()?;
        Ok(inst)
    }
}

pub fn instance_to_json(inst: &NetworkInstance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<NetworkInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(Error::from_json)?;
    file.try_into()
}

pub fn save_instance(inst: &NetworkInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = instance_to_json(inst);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<NetworkInstance> {
    instance_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, nj: usize, seed: u64) -> GenSpec {
        GenSpec {
            n,
            nj,
            seed,
            ..GenSpec::default()
        }
    }

    #[test]
    fn two_nodes_take_both_roles() {
        for seed in 0..20 {
            let inst = generate_instance(&spec(2, 0, seed)).unwrap();
            assert_ne!(inst.source, inst.dest);
            let origin = Point::new(0.0, 0.0);
            let corner = Point::new(10.0, 10.0);
            let s = inst.pos(inst.source);
            let d = inst.pos(inst.dest);
            // Either the source is closer to the origin, or the other node
            // was already claimed as nearest to it.
            assert!(s.distance(&origin) <= d.distance(&origin));
            let _ = corner;
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(&spec(20, 20, 7)).unwrap();
        let b = generate_instance(&spec(20, 20, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&spec(20, 20, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn coordinates_in_square_and_separated() {
        for seed in 0..100 {
            let inst = generate_instance(&spec(20, 20, seed)).unwrap();
            let mut pts: Vec<Point> = inst.nodes.iter().map(|n| n.pos).collect();
            pts.extend(inst.jammers.iter().map(|j| j.pos));
            for p in &pts {
                assert!((0.0..=10.0).contains(&p.x) && (0.0..=10.0).contains(&p.y));
            }
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    assert!(pts[i].distance(&pts[j]) > 0.0);
                }
            }
        }
    }

    #[test]
    fn endpoints_are_corner_nearest() {
        for seed in 0..50 {
            let inst = generate_instance(&spec(15, 5, seed)).unwrap();
            let origin = Point::new(0.0, 0.0);
            let s = inst.pos(inst.source).distance(&origin);
            assert!(inst.nodes.iter().all(|n| n.pos.distance(&origin) >= s));
            let corner = Point::new(10.0, 10.0);
            let d = inst.pos(inst.dest).distance(&corner);
            assert!(inst
                .nodes
                .iter()
                .filter(|n| n.id != inst.source)
                .all(|n| n.pos.distance(&corner) >= d));
        }
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(generate_instance(&spec(1, 0, 0)).is_err());
    }

    #[test]
    fn node_coordinate_mean_is_centered() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..10_000u64 {
            let inst = generate_instance(&spec(2, 0, seed)).unwrap();
            for n in &inst.nodes {
                sum += n.pos.x + n.pos.y;
                count += 2;
            }
        }
        let mean = sum / count as f64;
        // Uniform on [0, 10]: sigma = 10 / sqrt(12).
        let se = 10.0 / 12f64.sqrt() / (count as f64).sqrt();
        assert!((mean - 5.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn missing_jammers_key_is_parse_error() {
        let text = r#"{"params": {"alpha": 2, "n0": 1, "gamma": 1, "q": 1},
            "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 1}],
            "source": 0, "dest": 1}"#;
        match instance_from_json(text) {
            Err(Error::Parse { line, message, .. }) => {
                assert!(line >= 1);
                assert!(message.contains("jammers"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_endpoints_rejected() {
        let text = r#"{"params": {"alpha": 2, "n0": 1, "gamma": 1, "q": 1},
            "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 1}],
            "jammers": [], "source": 1, "dest": 1}"#;
        assert!(matches!(instance_from_json(text), Err(Error::InvalidInstance(_))));
    }
}
