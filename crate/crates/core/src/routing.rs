//! Candidate routes: repeated Dijkstra runs over penalized link costs.
//!
//! Every link starts at cost 1. After each run the cost of every link on
//! the returned path goes up by one, which steers later runs away from
//! already used links without forbidding them. Duplicate paths are
//! dropped; ten duplicates in a row end the search early.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::model::{LinkId, NetworkGraph, NodeId, Stream, StreamId};

pub const DEFAULT_K: usize = 4;
pub const DUPLICATE_CUTOFF: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Route {
    pub links: Vec<LinkId>,
}

impl Route {
    pub fn new(links: Vec<LinkId>) -> Self {
        Self { links }
    }

    pub fn hop_count(&self) -> usize {
        self.links.len()
    }

    /// Checks that the links form a simple path from `src` to `dst` whose
    /// intermediate nodes are all bridges.
    pub fn is_valid(&self, graph: &NetworkGraph, src: NodeId, dst: NodeId) -> bool {
        route_error(graph, &self.links, src, dst).is_none()
    }

    /// Ordering used everywhere a route preference is needed: fewer hops
    /// first, then the lexicographically smaller link sequence.
    pub fn rank_key(&self) -> (usize, &[LinkId]) {
        (self.links.len(), &self.links)
    }
}

/// Describes why `links` is not a simple `src -> dst` path, if it isn't.
pub fn route_error(
    graph: &NetworkGraph,
    links: &[LinkId],
    src: NodeId,
    dst: NodeId,
) -> Option<String> {
    if links.is_empty() {
        return Some("empty route".into());
    }
    let mut at = src;
    let mut visited = vec![src];
    for (i, &l) in links.iter().enumerate() {
        let Ok(link) = graph.link(l) else {
            return Some(format!("unknown link {l}"));
        };
        if link.from != at {
            return Some(format!("hop {i} ({l}) does not leave {at}"));
        }
        if i > 0 && graph.is_end_station(at) {
            return Some(format!("end station {at} used as relay"));
        }
        if visited.contains(&link.to) {
            return Some(format!("node {} visited twice", link.to));
        }
        visited.push(link.to);
        at = link.to;
    }
    (at != dst).then(|| format!("route ends at {at}, expected {dst}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub stream: StreamId,
    pub routes: Vec<Route>,
}

pub type CandidateMap = BTreeMap<StreamId, CandidateSet>;

fn check_endpoints(graph: &NetworkGraph, src: NodeId, dst: NodeId) -> Result<()> {
    graph.node(src)?;
    graph.node(dst)?;
    if src == dst || !graph.is_end_station(src) || !graph.is_end_station(dst) {
        return Err(Error::InvalidTopology(format!(
            "route endpoints {src} -> {dst} must be distinct end stations"
        )));
    }
    Ok(())
}

/// Minimum-cost path; equal costs are broken by the smaller link sequence.
/// End stations other than `src` never relay.
fn dijkstra(graph: &NetworkGraph, src: NodeId, dst: NodeId, costs: &[u64]) -> Option<Vec<LinkId>> {
    let n = graph.node_count();
    let mut best: Vec<Option<(u64, Vec<LinkId>)>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[src.index()] = Some((0, Vec::new()));
    heap.push(Reverse((0u64, Vec::<LinkId>::new(), src)));
    while let Some(Reverse((cost, path, v))) = heap.pop() {
        if settled[v.index()] {
            continue;
        }
        settled[v.index()] = true;
        if v == dst {
            return Some(path);
        }
        if v != src && graph.is_end_station(v) {
            continue;
        }
        for &l in graph.out_links(v) {
            let w = graph.links()[l.index()].to;
            if settled[w.index()] {
                continue;
            }
            let next_cost = cost + costs[l.index()];
            let better = match &best[w.index()] {
                None => true,
                Some((c, p)) => {
                    next_cost < *c
                        || (next_cost == *c && path.iter().chain(std::iter::once(&l)).lt(p.iter()))
                }
            };
            if better {
                let mut next = path.clone();
                next.push(l);
                best[w.index()] = Some((next_cost, next.clone()));
                heap.push(Reverse((next_cost, next, w)));
            }
        }
    }
    None
}

pub fn shortest_route(graph: &NetworkGraph, src: NodeId, dst: NodeId) -> Result<Route> {
    check_endpoints(graph, src, dst)?;
    let costs = vec![1; graph.link_count()];
    dijkstra(graph, src, dst, &costs)
        .map(Route::new)
        .ok_or(Error::NoRoute { src, dst })
}

/// Up to `k` distinct routes, sorted by hop count then link sequence. The
/// first Dijkstra run uses unit costs, so the set always contains a true
/// shortest path.
pub fn candidate_routes(
    graph: &NetworkGraph,
    src: NodeId,
    dst: NodeId,
    k: usize,
) -> Result<Vec<Route>> {
    check_endpoints(graph, src, dst)?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mut costs = vec![1u64; graph.link_count()];
    let mut routes: Vec<Route> = Vec::with_capacity(k);
    let mut duplicates = 0;
    while routes.len() < k {
        let Some(path) = dijkstra(graph, src, dst, &costs) else {
            return Err(Error::NoRoute { src, dst });
        };
        for l in &path {
            costs[l.index()] += 1;
        }
        if routes.iter().any(|r| r.links == path) {
            duplicates += 1;
            if duplicates >= DUPLICATE_CUTOFF {
                break;
            }
        } else {
            duplicates = 0;
            routes.push(Route::new(path));
        }
    }
    routes.sort_by(|a, b| a.rank_key().cmp(&b.rank_key()));
    Ok(routes)
}

/// Candidate sets for every stream. Streams sharing endpoints share one
/// routing computation.
pub fn compute_candidates<'a>(
    graph: &NetworkGraph,
    streams: impl IntoIterator<Item = &'a Stream>,
    k: usize,
) -> Result<CandidateMap> {
    let mut out = CandidateMap::new();
    extend_candidates(graph, streams, k, &mut out, &mut HashMap::new())?;
    Ok(out)
}

/// Adds candidate sets for streams not already present in `map`.
pub fn extend_candidates<'a>(
    graph: &NetworkGraph,
    streams: impl IntoIterator<Item = &'a Stream>,
    k: usize,
    map: &mut CandidateMap,
    cache: &mut HashMap<(NodeId, NodeId), Vec<Route>>,
) -> Result<()> {
    for s in streams {
        if map.contains_key(&s.id) {
            continue;
        }
        let routes = match cache.get(&(s.src, s.dst)) {
            Some(r) => r.clone(),
            None => {
                let r = candidate_routes(graph, s.src, s.dst, k)?;
                cache.insert((s.src, s.dst), r.clone());
                r
            }
        };
        map.insert(
            s.id,
            CandidateSet {
                stream: s.id,
                routes,
            },
        );
    }
    Ok(())
}
