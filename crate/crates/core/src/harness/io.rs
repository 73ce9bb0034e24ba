//! Plain-text file formats. Every file starts with a `# ttplan-v1` line;
//! other lines starting with `#` and blank lines are ignored.
//!
//! ```text
//! node <id> bridge|host
//! link <id> <from> <to> <rate_bps> <prop_us> <proc_us>
//! stream <id> <src> <dst> <bytes> <period_us>
//! port <link_id> t=<start> len=<len> stream=<id> frame=<j>
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    hyper_period, sub_cycle, LinkId, LinkParams, NetworkGraph, NodeId, NodeKind, Stream, StreamId,
    Tick,
};
use crate::placement::{ScheduleState, StreamSchedule};
use crate::routing::Route;
use crate::verify::Violation;

pub const FORMAT_HEADER: &str = "# ttplan-v1";

/// Link rates are stored per tick; one tick is one microsecond.
const TICKS_PER_SECOND: u64 = 1_000_000;

struct Lines<'a> {
    path: PathBuf,
    text: &'a str,
}

impl<'a> Lines<'a> {
    fn new(path: &Path, text: &'a str) -> Result<Self> {
        let lines = Self {
            path: path.to_path_buf(),
            text,
        };
        if text.lines().next().map(str::trim_end) != Some(FORMAT_HEADER) {
            return Err(lines.error(1, format!("expected `{FORMAT_HEADER}` header")));
        }
        Ok(lines)
    }

    fn error(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    /// Non-comment lines as (1-based line number, fields).
    fn records(&self) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
        self.text.lines().enumerate().filter_map(|(i, l)| {
            let l = l.trim();
            (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
        })
    }

    /// Comment lines after the header, split into fields.
    fn comments(&self) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
        self.text.lines().enumerate().skip(1).filter_map(|(i, l)| {
            l.trim()
                .strip_prefix('#')
                .map(|c| (i + 1, c.split_whitespace().collect()))
        })
    }

    fn number<T: std::str::FromStr>(&self, line: usize, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.error(line, format!("invalid {what} `{field}`")))
    }

    fn keyed<T: std::str::FromStr>(&self, line: usize, field: &str, key: &str) -> Result<T> {
        let value = field
            .strip_prefix(key)
            .and_then(|f| f.strip_prefix('='))
            .ok_or_else(|| {
                self.error(line, format!("expected `{key}=<value>`, found `{field}`"))
            })?;
        self.number(line, value, key)
    }

    fn arity(&self, line: usize, fields: &[&str], n: usize) -> Result<()> {
        if fields.len() == n {
            Ok(())
        } else {
            Err(self.error(
                line,
                format!(
                    "`{}` takes {} fields, found {}",
                    fields[0],
                    n - 1,
                    fields.len() - 1
                ),
            ))
        }
    }
}

pub fn parse_topology(text: &str, path: &Path) -> Result<NetworkGraph> {
    let lines = Lines::new(path, text)?;
    let mut graph = NetworkGraph::new();
    let mut link_lines = Vec::new();
    let mut directed = HashMap::new();
    for (n, f) in lines.records() {
        match f[0] {
            "node" => {
                lines.arity(n, &f, 3)?;
                let id: u32 = lines.number(n, f[1], "node id")?;
                if id as usize != graph.node_count() {
                    return Err(lines.error(
                        n,
                        format!(
                            "node ids must be consecutive from 0, expected {}",
                            graph.node_count()
                        ),
                    ));
                }
                let kind = match f[2] {
                    "bridge" => NodeKind::Bridge,
                    "host" => NodeKind::EndStation,
                    other => return Err(lines.error(n, format!("unknown node kind `{other}`"))),
                };
                graph.add_node(kind);
            }
            "link" => {
                lines.arity(n, &f, 7)?;
                let id: u32 = lines.number(n, f[1], "link id")?;
                if id as usize != graph.link_count() {
                    return Err(lines.error(
                        n,
                        format!(
                            "link ids must be consecutive from 0, expected {}",
                            graph.link_count()
                        ),
                    ));
                }
                let from = NodeId(lines.number(n, f[2], "node id")?);
                let to = NodeId(lines.number(n, f[3], "node id")?);
                for node in [from, to] {
                    if node.index() >= graph.node_count() {
                        return Err(lines.error(n, format!("unknown node {}", node.0)));
                    }
                }
                let rate_bps: u64 = lines.number(n, f[4], "rate")?;
                if rate_bps == 0 || !rate_bps.is_multiple_of(TICKS_PER_SECOND) {
                    return Err(lines.error(n, "rate must be a positive multiple of 1000000 bit/s"));
                }
                let params = LinkParams {
                    rate_bits_per_tick: rate_bps / TICKS_PER_SECOND,
                    propagation: lines.number(n, f[5], "propagation delay")?,
                    processing: lines.number(n, f[6], "processing delay")?,
                };
                if directed.insert((from, to), n).is_some() {
                    return Err(lines.error(n, format!("duplicate link {} -> {}", from.0, to.0)));
                }
                graph
                    .add_link(from, to, params)
                    .map_err(|e| lines.error(n, e.to_string()))?;
                link_lines.push(n);
            }
            other => return Err(lines.error(n, format!("unknown record `{other}`"))),
        }
    }
    for (link, &n) in graph.links().iter().zip(&link_lines) {
        if !directed.contains_key(&(link.to, link.from)) {
            return Err(lines.error(
                n,
                format!(
                    "link {} has no reverse link {} -> {}",
                    link.id.0, link.to.0, link.from.0
                ),
            ));
        }
    }
    Ok(graph)
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<NetworkGraph> {
    let path = path.as_ref();
    parse_topology(&std::fs::read_to_string(path)?, path)
}

pub fn format_topology(graph: &NetworkGraph) -> String {
    let mut out = format!("{FORMAT_HEADER}\n");
    for node in graph.nodes() {
        let kind = match node.kind {
            NodeKind::Bridge => "bridge",
            NodeKind::EndStation => "host",
        };
        let _ = writeln!(out, "node {} {kind}", node.id.0);
    }
    for l in graph.links() {
        let _ = writeln!(
            out,
            "link {} {} {} {} {} {}",
            l.id.0,
            l.from.0,
            l.to.0,
            l.rate_bits_per_tick * TICKS_PER_SECOND,
            l.propagation,
            l.processing_at_receiver
        );
    }
    out
}

pub fn save_topology(graph: &NetworkGraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_topology(graph))?;
    Ok(())
}

pub fn parse_streams(text: &str, path: &Path, graph: &NetworkGraph) -> Result<Vec<Stream>> {
    let lines = Lines::new(path, text)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (n, f) in lines.records() {
        if f[0] != "stream" {
            return Err(lines.error(n, format!("unknown record `{}`", f[0])));
        }
        lines.arity(n, &f, 6)?;
        let s = Stream::new(
            StreamId(lines.number(n, f[1], "stream id")?),
            NodeId(lines.number(n, f[2], "node id")?),
            NodeId(lines.number(n, f[3], "node id")?),
            lines.number(n, f[4], "frame size")?,
            lines.number(n, f[5], "period")?,
        );
        s.check(graph).map_err(|e| lines.error(n, e.to_string()))?;
        if !seen.insert(s.id) {
            return Err(lines.error(n, format!("duplicate stream id {}", s.id.0)));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load_streams(path: impl AsRef<Path>, graph: &NetworkGraph) -> Result<Vec<Stream>> {
    let path = path.as_ref();
    parse_streams(&std::fs::read_to_string(path)?, path, graph)
}

pub fn format_streams(streams: &[Stream]) -> String {
    let mut out = format!("{FORMAT_HEADER}\n");
    for s in streams {
        let _ = writeln!(
            out,
            "stream {} {} {} {} {}",
            s.id.0, s.src.0, s.dst.0, s.frame_size_bytes, s.period
        );
    }
    out
}

pub fn save_streams(streams: &[Stream], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_streams(streams))?;
    Ok(())
}

/// Scheduling tables of every egress port, sorted by link then start.
/// A comment line records the hyper period and sub-cycle.
pub fn format_tables(state: &ScheduleState) -> String {
    let mut out = format!(
        "{FORMAT_HEADER}\n# hyper-period {} sub-cycle {}\n",
        state.hyper_period(),
        state.sub_cycle()
    );
    for t in state.timelines() {
        for r in t.iter() {
            let _ = writeln!(
                out,
                "port {} t={} len={} stream={} frame={}",
                t.link().0,
                r.start,
                r.len(),
                r.stream.0,
                r.frame
            );
        }
    }
    out
}

pub fn export_tables(state: &ScheduleState, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_tables(state))?;
    Ok(())
}

/// Rebuilds a state from exported tables. The route of each stream is its
/// frame-0 ports chained from the source (start order if they do not
/// chain); offsets are taken as 0. The
/// result is not checked: run the validator on it.
pub fn parse_schedule(
    text: &str,
    path: &Path,
    graph: Arc<NetworkGraph>,
    streams: &[Stream],
) -> Result<ScheduleState> {
    let lines = Lines::new(path, text)?;
    let by_id: BTreeMap<StreamId, &Stream> = streams.iter().map(|s| (s.id, s)).collect();

    let mut declared: Option<(Tick, Tick)> = None;
    for (n, c) in lines.comments() {
        if let ["hyper-period", h, "sub-cycle", g] = c[..] {
            declared = Some((
                lines.number(n, h, "hyper period")?,
                lines.number(n, g, "sub-cycle")?,
            ));
        }
    }

    // stream -> frame -> (start, len, link)
    let mut hops: BTreeMap<StreamId, BTreeMap<u32, Vec<(Tick, Tick, LinkId)>>> = BTreeMap::new();
    let mut first_line = BTreeMap::new();
    for (n, f) in lines.records() {
        if f[0] != "port" {
            return Err(lines.error(n, format!("unknown record `{}`", f[0])));
        }
        lines.arity(n, &f, 6)?;
        let link = LinkId(lines.number(n, f[1], "link id")?);
        if link.index() >= graph.link_count() {
            return Err(lines.error(n, format!("unknown link {}", link.0)));
        }
        let start: Tick = lines.keyed(n, f[2], "t")?;
        let len: Tick = lines.keyed(n, f[3], "len")?;
        let id = StreamId(lines.keyed(n, f[4], "stream")?);
        let frame: u32 = lines.keyed(n, f[5], "frame")?;
        if !by_id.contains_key(&id) {
            return Err(lines.error(n, format!("stream {} is not in the stream list", id.0)));
        }
        first_line.entry(id).or_insert(n);
        hops.entry(id)
            .or_default()
            .entry(frame)
            .or_default()
            .push((start, len, link));
    }

    let (h, g) = match declared {
        Some(v) => v,
        None => {
            let periods: Vec<Tick> = hops.keys().map(|id| by_id[id].period).collect();
            if periods.is_empty() {
                (1, 1)
            } else {
                (hyper_period(&periods)?, sub_cycle(&periods)?)
            }
        }
    };

    let mut entries = Vec::new();
    for (id, frames) in hops {
        let n = first_line[&id];
        let mut tx_start = Vec::new();
        let mut route: Option<Vec<LinkId>> = None;
        let mut tx_len = Vec::new();
        for (expected, (j, mut list)) in frames.into_iter().enumerate() {
            if j as usize != expected {
                return Err(lines.error(n, format!("stream {} is missing frame {expected}", id.0)));
            }
            list.sort_unstable();
            order_along_path(&graph, by_id[&id].src, &mut list);
            let links: Vec<LinkId> = list.iter().map(|x| x.2).collect();
            match &route {
                None => {
                    tx_len = list.iter().map(|x| x.1).collect();
                    route = Some(links);
                }
                Some(r) if *r != links => {
                    return Err(lines.error(
                        n,
                        format!("stream {} frame {j} takes a different route", id.0),
                    ));
                }
                Some(_) => {}
            }
            tx_start.push(list.iter().map(|x| x.0).collect());
        }
        let stream = by_id[&id].clone();
        let schedule = StreamSchedule {
            stream: id,
            route: Route::new(route.unwrap_or_default()),
            offset: 0,
            tx_len,
            tx_start,
        };
        entries.push((stream, schedule));
    }
    ScheduleState::from_schedules(graph, h, g, entries)
}

/// Reorders the hops of one frame to follow links from `src`, if they form
/// such a path; otherwise leaves them in start order.
fn order_along_path(graph: &NetworkGraph, src: NodeId, hops: &mut [(Tick, Tick, LinkId)]) {
    let mut at = src;
    let mut ordered = Vec::with_capacity(hops.len());
    let mut left: Vec<_> = hops.to_vec();
    while !left.is_empty() {
        let Some(i) = left
            .iter()
            .position(|h| graph.links()[h.2.index()].from == at)
        else {
            return;
        };
        let hop = left.remove(i);
        at = graph.links()[hop.2.index()].to;
        ordered.push(hop);
    }
    hops.copy_from_slice(&ordered);
}

pub fn import_schedule(
    path: impl AsRef<Path>,
    graph: Arc<NetworkGraph>,
    streams: &[Stream],
) -> Result<ScheduleState> {
    let path = path.as_ref();
    parse_schedule(&std::fs::read_to_string(path)?, path, graph, streams)
}

pub fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| format!("{v}\n")).collect()
}

pub fn violations_json(violations: &[Violation]) -> Result<String> {
    serde_json::to_string_pretty(violations).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate, TopologySpec};

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn topology_round_trip() {
        let g = generate(&TopologySpec::random(6, 3)).unwrap();
        let text = format_topology(&g);
        assert_eq!(parse_topology(&text, p()).unwrap(), g);
    }

    #[test]
    fn topology_errors_name_the_line() {
        let base = "# ttplan-v1\nnode 0 host\nnode 1 bridge\n";
        let err = |t: &str| match parse_topology(t, p()) {
            Err(Error::Parse { line, msg, .. }) => (line, msg),
            other => panic!("{other:?}"),
        };
        let (line, msg) = err(&format!("{base}link 0 0 7 1000000000 1 4\n"));
        assert_eq!(line, 4);
        assert!(msg.contains("unknown node 7"), "{msg}");
        assert_eq!(err(&format!("{base}link 0 0 1 1000000000 1 4\n")).0, 4);
        assert_eq!(err(&format!("{base}node 5 host\n")).0, 4);
        assert_eq!(err(&format!("{base}node 2 switch\n")).0, 4);
        assert_eq!(err(&format!("{base}link 0 0 1 1500000 1 4\n")).0, 4);
        assert_eq!(err("node 0 host\n").0, 1);
        let ok = format!("{base}link 0 0 1 1000000000 1 4\n\n# note\nlink 1 1 0 1000000000 1 4\n");
        assert_eq!(parse_topology(&ok, p()).unwrap().link_count(), 2);
    }

    #[test]
    fn streams_round_trip_and_check() {
        let g = generate(&TopologySpec::ring(4)).unwrap();
        let s = crate::topology::generate_streams(&g, 20, 1).unwrap();
        assert_eq!(parse_streams(&format_streams(&s), p(), &g).unwrap(), s);
        let bad = "# ttplan-v1\nstream 0 0 5 125 250\n";
        assert!(matches!(
            parse_streams(bad, p(), &g),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
