//! Core domain types: ticks, identifiers, the network graph, streams and
//! request batches, plus the small arithmetic helpers every other module
//! leans on (hyper period, sub-cycle, throughput, transmission time).

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One macro tick is one microsecond. All schedule arithmetic is integral.
pub type Tick = u64;

/// Largest payload that fits a single Ethernet frame.
pub const MAX_FRAME_BYTES: u32 = 1500;

/// Default link rate: 1 Gbit/s = 1000 bits per microsecond tick.
pub const DEFAULT_RATE_BITS_PER_TICK: u64 = 1000;
pub const DEFAULT_PROPAGATION: Tick = 1;
pub const DEFAULT_PROCESSING: Tick = 4;

/// Throughput in bits per tick. With 1 µs ticks this is numerically Mbit/s.
pub type Throughput = Ratio<u64>;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Dense node identifier, assigned in creation order.
    NodeId,
    "n"
);
id_type!(
    /// Dense directed-link identifier, assigned in creation order. A link is
    /// the egress port on its `from` node.
    LinkId,
    "l"
);
id_type!(
    /// Stream identifier. Smaller ids are older (FIFO) and win every final
    /// tie-break.
    StreamId,
    "s"
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Bridge,
    EndStation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkParams {
    pub rate_bits_per_tick: u64,
    pub propagation: Tick,
    /// Processing delay spent by the receiving node before it can forward.
    pub processing: Tick,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            rate_bits_per_tick: DEFAULT_RATE_BITS_PER_TICK,
            propagation: DEFAULT_PROPAGATION,
            processing: DEFAULT_PROCESSING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub rate_bits_per_tick: u64,
    pub propagation: Tick,
    pub processing_at_receiver: Tick,
}

/// Switched network of bridges and end stations joined by directed links.
///
/// Physical cables are full duplex, so [`NetworkGraph::connect`] always
/// creates a pair of opposite links. Single directed links can be added
/// with [`NetworkGraph::add_link`] (used by the file loader, which checks
/// pairing itself).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
}

impl NetworkGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { id, kind });
        self.out_links.push(Vec::new());
        id
    }

    pub fn add_bridge(&mut self) -> NodeId {
        self.add_node(NodeKind::Bridge)
    }

    pub fn add_end_station(&mut self) -> NodeId {
        self.add_node(NodeKind::EndStation)
    }

    pub fn add_link(&mut self, from: NodeId, to: NodeId, params: LinkParams) -> Result<LinkId> {
        self.check_node(from)?;
        self.check_node(to)?;
        if params.rate_bits_per_tick == 0 {
            return Err(Error::ZeroRate);
        }
        if from == to {
            return Err(Error::InvalidTopology(format!("self loop at {from}")));
        }
        let id = LinkId(self.links.len() as u32);
        self.links.push(Link {
            id,
            from,
            to,
            rate_bits_per_tick: params.rate_bits_per_tick,
            propagation: params.propagation,
            processing_at_receiver: params.processing,
        });
        self.out_links[from.index()].push(id);
        Ok(id)
    }

    /// Adds a full-duplex cable as two directed links, `a -> b` first.
    pub fn connect(
        &mut self,
        a: NodeId,
        b: NodeId,
        params: LinkParams,
    ) -> Result<(LinkId, LinkId)> {
        let ab = self.add_link(a, b, params)?;
        let ba = self.add_link(b, a, params)?;
        Ok((ab, ba))
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(id))
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.nodes.get(id.index()).ok_or(Error::UnknownNode(id))
    }

    pub fn link(&self, id: LinkId) -> Result<&Link> {
        self.links.get(id.index()).ok_or(Error::UnknownLink(id))
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        self.out_links.get(node.index()).map_or(&[], Vec::as_slice)
    }

    pub fn is_end_station(&self, id: NodeId) -> bool {
        matches!(self.nodes.get(id.index()), Some(n) if n.kind == NodeKind::EndStation)
    }

    pub fn end_stations(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::EndStation)
            .map(|n| n.id)
            .collect()
    }

    pub fn bridges(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Bridge)
            .map(|n| n.id)
            .collect()
    }

    pub fn find_link(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.out_links(from)
            .iter()
            .copied()
            .find(|l| self.links[l.index()].to == to)
    }

    /// True when every node can reach every other node over directed links.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for l in self.out_links(n) {
                let to = self.links[l.index()].to;
                if !seen[to.index()] {
                    seen[to.index()] = true;
                    stack.push(to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// A unicast periodic stream. The deadline always equals the period and
/// releases are in phase at `k * period`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stream {
    pub id: StreamId,
    pub src: NodeId,
    pub dst: NodeId,
    pub frame_size_bytes: u32,
    pub period: Tick,
}

impl Stream {
    pub fn new(
        id: StreamId,
        src: NodeId,
        dst: NodeId,
        frame_size_bytes: u32,
        period: Tick,
    ) -> Self {
        Self {
            id,
            src,
            dst,
            frame_size_bytes,
            period,
        }
    }

    pub fn deadline(&self) -> Tick {
        self.period
    }

    pub fn throughput(&self) -> Throughput {
        throughput(self)
    }

    /// Checks the stream against the graph: endpoints must be distinct end
    /// stations, the frame must fit one Ethernet frame, the period must be
    /// positive.
    pub fn check(&self, graph: &NetworkGraph) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidStream {
            id: self.id,
            reason: reason.to_string(),
        };
        if self.period == 0 {
            return Err(invalid("period must be positive"));
        }
        if self.frame_size_bytes == 0 || self.frame_size_bytes > MAX_FRAME_BYTES {
            return Err(invalid("frame size must be in 1..=1500 bytes"));
        }
        if self.src == self.dst {
            return Err(invalid("source equals destination"));
        }
        if !graph.is_end_station(self.src) || !graph.is_end_station(self.dst) {
            return Err(invalid("source and destination must be end stations"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequestBatch {
    pub add: Vec<Stream>,
    pub del: Vec<StreamId>,
}

impl RequestBatch {
    pub fn add_only(add: Vec<Stream>) -> Self {
        Self {
            add,
            del: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.del.is_empty()
    }
}

/// Least common multiple of all periods.
pub fn hyper_period(periods: &[Tick]) -> Result<Tick> {
    fold_periods(periods, |a, b| a.lcm(&b))
}

/// Greatest common divisor of all periods; candidate offsets are its
/// multiples.
pub fn sub_cycle(periods: &[Tick]) -> Result<Tick> {
    fold_periods(periods, |a, b| a.gcd(&b))
}

fn fold_periods(periods: &[Tick], f: impl Fn(Tick, Tick) -> Tick) -> Result<Tick> {
    let (&first, rest) = periods.split_first().ok_or(Error::EmptyPeriods)?;
    if periods.contains(&0) {
        return Err(Error::ZeroPeriod);
    }
    Ok(rest.iter().fold(first, |acc, &p| f(acc, p)))
}

/// Bits per tick (= Mbit/s).
pub fn throughput(stream: &Stream) -> Throughput {
    Ratio::new(u64::from(stream.frame_size_bytes) * 8, stream.period)
}

pub fn aggregated_throughput<'a>(streams: impl IntoIterator<Item = &'a Stream>) -> Throughput {
    streams
        .into_iter()
        .fold(Ratio::from_integer(0), |acc, s| acc + s.throughput())
}

/// Renders a throughput in Mbit/s with three decimals, rounding half up.
pub fn format_mbps(t: Throughput) -> String {
    let milli = (t * 1000 + Ratio::new(1, 2)).floor().to_integer();
    format!("{}.{:03}", milli / 1000, milli % 1000)
}

pub fn mbps_f64(t: Throughput) -> f64 {
    *t.numer() as f64 / *t.denom() as f64
}

pub fn transmission_ticks(frame_size_bytes: u32, rate_bits_per_tick: u64) -> Result<Tick> {
    if rate_bits_per_tick == 0 {
        return Err(Error::ZeroRate);
    }
    Ok((u64::from(frame_size_bytes) * 8).div_ceil(rate_bits_per_tick))
}

/// Admitted set after a batch: `(prev \ del) ∪ add \ rejected`.
pub fn apply_batch_semantics(
    prev: &BTreeSet<StreamId>,
    batch: &RequestBatch,
    rejected: &BTreeSet<StreamId>,
) -> Result<BTreeSet<StreamId>> {
    let mut next = prev.clone();
    for id in &batch.del {
        if !next.remove(id) {
            return Err(Error::UnknownStream(*id));
        }
    }
    next.extend(
        batch
            .add
            .iter()
            .map(|s| s.id)
            .filter(|id| !rejected.contains(id)),
    );
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(frame: u32, period: Tick) -> Stream {
        Stream::new(StreamId(0), NodeId(0), NodeId(1), frame, period)
    }

    fn ids(v: &[u32]) -> BTreeSet<StreamId> {
        v.iter().map(|&i| StreamId(i)).collect()
    }

    #[test]
    fn hyper_period_examples() {
        assert_eq!(hyper_period(&[250, 500, 1000, 2000]).unwrap(), 2000);
        assert_eq!(hyper_period(&[1000]).unwrap(), 1000);
        assert_eq!(hyper_period(&[250, 400]).unwrap(), 2000);
        assert!(matches!(hyper_period(&[]), Err(Error::EmptyPeriods)));
        assert!(matches!(hyper_period(&[0, 2]), Err(Error::ZeroPeriod)));
    }

    #[test]
    fn sub_cycle_examples() {
        assert_eq!(sub_cycle(&[250, 500, 1000, 2000]).unwrap(), 250);
        assert_eq!(sub_cycle(&[250, 250]).unwrap(), 250);
        assert_eq!(sub_cycle(&[300, 200]).unwrap(), 100);
        assert!(sub_cycle(&[]).is_err());
    }

    #[test]
    fn throughput_examples() {
        assert_eq!(throughput(&stream(1500, 2000)), Ratio::from_integer(6));
        assert_eq!(throughput(&stream(125, 250)), Ratio::from_integer(4));
        assert_eq!(throughput(&stream(125, 125)), Ratio::from_integer(8));
        assert_eq!(format_mbps(throughput(&stream(1500, 2000))), "6.000");
        assert_eq!(format_mbps(Ratio::new(2, 3)), "0.667");
    }

    #[test]
    fn transmission_ticks_examples() {
        assert_eq!(transmission_ticks(125, 1000).unwrap(), 1);
        assert_eq!(transmission_ticks(1500, 1000).unwrap(), 12);
        assert_eq!(transmission_ticks(130, 1000).unwrap(), 2);
        assert!(matches!(transmission_ticks(125, 0), Err(Error::ZeroRate)));
    }

    #[test]
    fn batch_semantics_examples() {
        let mk = |add: &[u32], del: &[u32]| RequestBatch {
            add: add
                .iter()
                .map(|&i| Stream::new(StreamId(i), NodeId(0), NodeId(1), 125, 250))
                .collect(),
            del: del.iter().map(|&i| StreamId(i)).collect(),
        };
        let (a, b, c, d, e) = (0, 1, 2, 3, 4);
        assert_eq!(
            apply_batch_semantics(&ids(&[]), &mk(&[a, b], &[]), &ids(&[])).unwrap(),
            ids(&[a, b])
        );
        assert_eq!(
            apply_batch_semantics(&ids(&[a, b]), &mk(&[c], &[a]), &ids(&[])).unwrap(),
            ids(&[b, c])
        );
        assert_eq!(
            apply_batch_semantics(&ids(&[b, c]), &mk(&[d, e], &[]), &ids(&[e])).unwrap(),
            ids(&[b, c, d])
        );
        assert!(matches!(
            apply_batch_semantics(&ids(&[b]), &mk(&[], &[a]), &ids(&[])),
            Err(Error::UnknownStream(_))
        ));
    }

    #[test]
    fn connect_creates_link_pair() {
        let mut g = NetworkGraph::new();
        let a = g.add_bridge();
        let b = g.add_end_station();
        let (ab, ba) = g.connect(a, b, LinkParams::default()).unwrap();
        assert_eq!(g.link(ab).unwrap().to, b);
        assert_eq!(g.link(ba).unwrap().to, a);
        assert_eq!(g.find_link(b, a), Some(ba));
        assert!(g.is_connected());
        assert!(matches!(
            g.add_link(a, NodeId(9), LinkParams::default()),
            Err(Error::UnknownNode(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const PERIODS: [Tick; 6] = [125, 250, 400, 500, 1000, 2000];

        proptest! {
            #[test]
            fn hyper_period_and_sub_cycle_divide(idx in proptest::collection::vec(0usize..6, 1..6)) {
                let ps: Vec<Tick> = idx.iter().map(|&i| PERIODS[i]).collect();
                let h = hyper_period(&ps).unwrap();
                let g = sub_cycle(&ps).unwrap();
                for p in &ps {
                    prop_assert_eq!(h % p, 0);
                    prop_assert_eq!(p % g, 0);
                }
            }

            #[test]
            fn throughput_monotone(frame in 1u32..1500, period in 2u64..5000) {
                let base = throughput(&stream(frame, period));
                prop_assert!(throughput(&stream(frame + 1, period)) > base);
                prop_assert!(throughput(&stream(frame, period + 1)) < base);
            }

            #[test]
            fn remove_then_readd_is_idempotent(n in 0u32..20, k in 0u32..20) {
                let prev: BTreeSet<StreamId> = (0..n).map(StreamId).collect();
                let chosen: Vec<Stream> = (0..n.min(k))
                    .map(|i| Stream::new(StreamId(i), NodeId(0), NodeId(1), 125, 250))
                    .collect();
                let del = RequestBatch { add: vec![], del: chosen.iter().map(|s| s.id).collect() };
                let mid = apply_batch_semantics(&prev, &del, &BTreeSet::new()).unwrap();
                let back = apply_batch_semantics(&mid, &RequestBatch::add_only(chosen), &BTreeSet::new()).unwrap();
                prop_assert_eq!(back, prev);
            }
        }
    }
}
