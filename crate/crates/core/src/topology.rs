//! Seeded topology and stream generators for the evaluation scenarios.
//!
//! Bridges are created first (ids `0..n`), then bridge-to-bridge cables,
//! then end stations with their access cables. Every generator is a pure
//! function of its spec and seed.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinkParams, NetworkGraph, NodeId, Stream, StreamId, Tick};

pub const FRAME_SIZES: [u32; 6] = [125, 250, 500, 750, 1000, 1500];
pub const PERIODS: [Tick; 4] = [250, 500, 1000, 2000];

const MAX_CONNECT_ATTEMPTS: usize = 1000;
pub const DEFAULT_MAX_CHILDREN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TopologyKind {
    /// Erdős–Rényi G(n, p); `None` uses p = 2 ln(n) / n.
    Random {
        n_bridges: usize,
        edge_probability: Option<f64>,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    Ring {
        n_bridges: usize,
    },
    /// Random recursive tree with bounded fan-out.
    Tree {
        n_bridges: usize,
        max_children: usize,
    },
    Line {
        n_bridges: usize,
    },
    External(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub hosts_per_bridge: usize,
    pub seed: u64,
}

impl TopologySpec {
    pub fn new(kind: TopologyKind, seed: u64) -> Self {
        Self {
            kind,
            hosts_per_bridge: 1,
            seed,
        }
    }

    pub fn random(n_bridges: usize, seed: u64) -> Self {
        Self::new(
            TopologyKind::Random {
                n_bridges,
                edge_probability: None,
            },
            seed,
        )
    }

    pub fn ring(n_bridges: usize) -> Self {
        Self::new(TopologyKind::Ring { n_bridges }, 0)
    }

    pub fn grid(rows: usize, cols: usize) -> Self {
        Self::new(TopologyKind::Grid { rows, cols }, 0)
    }

    pub fn tree(n_bridges: usize, seed: u64) -> Self {
        Self::new(
            TopologyKind::Tree {
                n_bridges,
                max_children: DEFAULT_MAX_CHILDREN,
            },
            seed,
        )
    }

    pub fn line(n_bridges: usize) -> Self {
        Self::new(TopologyKind::Line { n_bridges }, 0)
    }

    /// Short label used in metrics rows, e.g. `random-25`.
    pub fn label(&self) -> String {
        match &self.kind {
            TopologyKind::Random { n_bridges, .. } => format!("random-{n_bridges}"),
            TopologyKind::Grid { rows, cols } => format!("grid-{rows}x{cols}"),
            TopologyKind::Ring { n_bridges } => format!("ring-{n_bridges}"),
            TopologyKind::Tree { n_bridges, .. } => format!("tree-{n_bridges}"),
            TopologyKind::Line { n_bridges } => format!("line-{n_bridges}"),
            TopologyKind::External(p) => format!("file-{}", p.display()),
        }
    }
}

/// Parses the labels produced by [`TopologySpec::label`]: `random-25`,
/// `grid-5x5`, `ring-25`, `tree-25`, `line-4`.
impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown topology `{s}`"));
        let (name, size) = s.split_once('-').ok_or_else(bad)?;
        let n = || size.parse::<usize>().map_err(|_| bad());
        Ok(match name {
            "random" => TopologyKind::Random {
                n_bridges: n()?,
                edge_probability: None,
            },
            "ring" => TopologyKind::Ring { n_bridges: n()? },
            "line" => TopologyKind::Line { n_bridges: n()? },
            "tree" => TopologyKind::Tree {
                n_bridges: n()?,
                max_children: DEFAULT_MAX_CHILDREN,
            },
            "grid" => {
                let (r, c) = size.split_once('x').ok_or_else(bad)?;
                TopologyKind::Grid {
                    rows: r.parse().map_err(|_| bad())?,
                    cols: c.parse().map_err(|_| bad())?,
                }
            }
            "file" => TopologyKind::External(PathBuf::from(size)),
            _ => return Err(bad()),
        })
    }
}

pub fn generate(spec: &TopologySpec) -> Result<NetworkGraph> {
    if let TopologyKind::External(path) = &spec.kind {
        return crate::harness::io::load_topology(path);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, edges) = match spec.kind {
        TopologyKind::Random {
            n_bridges,
            edge_probability,
        } => {
            require(n_bridges >= 2, "random graph needs at least 2 bridges")?;
            let p = edge_probability.unwrap_or_else(|| {
                let n = n_bridges as f64;
                (2.0 * n.ln() / n).min(1.0)
            });
            require(
                (0.0..=1.0).contains(&p) && p > 0.0,
                "edge probability must be in (0, 1]",
            )?;
            (n_bridges, erdos_renyi(n_bridges, p, &mut rng)?)
        }
        TopologyKind::Grid { rows, cols } => {
            require(
                rows >= 1 && cols >= 1 && rows * cols >= 2,
                "grid needs at least 2 bridges",
            )?;
            let at = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((at(r, c), at(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((at(r, c), at(r + 1, c)));
                    }
                }
            }
            (rows * cols, edges)
        }
        TopologyKind::Ring { n_bridges } => {
            require(n_bridges >= 3, "ring needs at least 3 bridges")?;
            (
                n_bridges,
                (0..n_bridges).map(|i| (i, (i + 1) % n_bridges)).collect(),
            )
        }
        TopologyKind::Line { n_bridges } => {
            require(n_bridges >= 2, "line needs at least 2 bridges")?;
            (n_bridges, (1..n_bridges).map(|i| (i - 1, i)).collect())
        }
        TopologyKind::Tree {
            n_bridges,
            max_children,
        } => {
            require(n_bridges >= 2, "tree needs at least 2 bridges")?;
            require(max_children >= 1, "tree fan-out must be positive")?;
            (n_bridges, recursive_tree(n_bridges, max_children, &mut rng))
        }
        TopologyKind::External(_) => unreachable!(),
    };

    let params = LinkParams::default();
    let mut g = NetworkGraph::new();
    let bridges: Vec<NodeId> = (0..n).map(|_| g.add_bridge()).collect();
    for (a, b) in edges {
        g.connect(bridges[a], bridges[b], params)?;
    }
    for &b in &bridges {
        for _ in 0..spec.hosts_per_bridge {
            let h = g.add_end_station();
            g.connect(b, h, params)?;
        }
    }
    Ok(g)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidTopology(msg.to_string()))
    }
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        if undirected_connected(n, &edges) {
            return Ok(edges);
        }
    }
    Err(Error::Disconnected(MAX_CONNECT_ATTEMPTS))
}

fn recursive_tree(n: usize, max_children: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut children = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    for node in 1..n {
        let open: Vec<usize> = (0..node).filter(|&p| children[p] < max_children).collect();
        // A node added last always has free slots, so `open` is never empty.
        let parent = *open.choose(rng).expect("tree has an open parent");
        children[parent] += 1;
        edges.push((parent, node));
    }
    edges
}

fn undirected_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Uniformly random streams between distinct end stations. Ids are
/// `0..n` in generation order.
pub fn generate_streams(graph: &NetworkGraph, n: usize, seed: u64) -> Result<Vec<Stream>> {
    generate_streams_from(graph, 0, n, seed)
}

/// Like [`generate_streams`] but numbering ids from `first_id`.
pub fn generate_streams_from(
    graph: &NetworkGraph,
    first_id: u32,
    n: usize,
    seed: u64,
) -> Result<Vec<Stream>> {
    let hosts = graph.end_stations();
    if hosts.len() < 2 {
        return Err(Error::InvalidTopology(
            "stream generation needs at least 2 end stations".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let streams = (0..n)
        .map(|i| {
            let s = rng.gen_range(0..hosts.len());
            let mut d = rng.gen_range(0..hosts.len() - 1);
            if d >= s {
                d += 1;
            }
            let frame = FRAME_SIZES[rng.gen_range(0..FRAME_SIZES.len())];
            let period = PERIODS[rng.gen_range(0..PERIODS.len())];
            Stream::new(
                StreamId(first_id + i as u32),
                hosts[s],
                hosts[d],
                frame,
                period,
            )
        })
        .collect();
    Ok(streams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeKind;

    fn bridge_links(g: &NetworkGraph) -> usize {
        g.links()
            .iter()
            .filter(|l| {
                g.node(l.from).unwrap().kind == NodeKind::Bridge
                    && g.node(l.to).unwrap().kind == NodeKind::Bridge
            })
            .count()
    }

    #[test]
    fn labels_parse_back() {
        for spec in [
            TopologySpec::random(25, 0),
            TopologySpec::grid(5, 4),
            TopologySpec::ring(7),
            TopologySpec::tree(9, 0),
            TopologySpec::line(3),
        ] {
            assert_eq!(spec.label().parse::<TopologyKind>().unwrap(), spec.kind);
        }
        assert!("mesh-4".parse::<TopologyKind>().is_err());
        assert!("grid-4".parse::<TopologyKind>().is_err());
    }

    #[test]
    fn ring_counts() {
        let g = generate(&TopologySpec::ring(4)).unwrap();
        assert_eq!(g.bridges().len(), 4);
        assert_eq!(g.end_stations().len(), 4);
        assert_eq!(g.link_count(), 16);
        assert!(g.is_connected());
    }

    #[test]
    fn grid_counts() {
        let g = generate(&TopologySpec::grid(2, 3)).unwrap();
        assert_eq!(g.bridges().len(), 6);
        assert_eq!(bridge_links(&g), 14);
    }

    #[test]
    fn random_is_seeded() {
        let a = generate(&TopologySpec::random(25, 1)).unwrap();
        let b = generate(&TopologySpec::random(25, 1)).unwrap();
        let c = generate(&TopologySpec::random(25, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_connected() && c.is_connected());
    }

    #[test]
    fn tree_respects_fan_out() {
        for seed in 0..20 {
            let g = generate(&TopologySpec::tree(25, seed)).unwrap();
            assert!(g.is_connected());
            assert_eq!(bridge_links(&g), 2 * 24);
            for b in g.bridges() {
                let bridge_degree = g
                    .out_links(b)
                    .iter()
                    .filter(|l| g.node(g.link(**l).unwrap().to).unwrap().kind == NodeKind::Bridge)
                    .count();
                // children plus at most one parent
                assert!(bridge_degree <= DEFAULT_MAX_CHILDREN + 1);
            }
        }
    }

    #[test]
    fn invalid_dimensions() {
        assert!(generate(&TopologySpec::ring(2)).is_err());
        assert!(generate(&TopologySpec::line(1)).is_err());
        assert!(generate(&TopologySpec::grid(1, 1)).is_err());
        assert!(generate(&TopologySpec::random(1, 0)).is_err());
    }

    #[test]
    fn unconnectable_random_graph_errors() {
        let spec = TopologySpec::new(
            TopologyKind::Random {
                n_bridges: 30,
                edge_probability: Some(1e-9),
            },
            0,
        );
        assert!(matches!(generate(&spec), Err(Error::Disconnected(_))));
    }

    #[test]
    fn stream_generation() {
        let g = generate(&TopologySpec::ring(5)).unwrap();
        assert!(generate_streams(&g, 0, 3).unwrap().is_empty());
        let streams = generate_streams(&g, 1000, 7).unwrap();
        assert_eq!(streams.len(), 1000);
        for (i, s) in streams.iter().enumerate() {
            assert_eq!(s.id, StreamId(i as u32));
            assert!(FRAME_SIZES.contains(&s.frame_size_bytes));
            assert!(PERIODS.contains(&s.period));
            assert_eq!(2000 % s.period, 0);
            s.check(&g).unwrap();
        }
        assert_eq!(streams, generate_streams(&g, 1000, 7).unwrap());
    }

    #[test]
    fn stream_generation_needs_two_hosts() {
        let mut g = NetworkGraph::new();
        let b = g.add_bridge();
        let h = g.add_end_station();
        g.connect(b, h, LinkParams::default()).unwrap();
        assert!(generate_streams(&g, 1, 0).is_err());
    }
}
