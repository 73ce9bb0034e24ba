//! Independent schedule validation and an exhaustive reference search for
//! tiny instances.
//!
//! [`validate`] re-derives every constraint from the stored stream
//! schedules and the graph alone; it does not trust the port timelines
//! except to compare them against a rebuild.

mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use oracle::{oracle_best, OracleMode, OracleResult};

use crate::model::{transmission_ticks, LinkId, StreamId, Tick};
use crate::placement::ScheduleState;
use crate::routing::route_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationKind {
    Overlap,
    Precedence,
    Deadline,
    Release,
    RouteBroken,
    MissingFrame,
    PeriodDivides,
    TimelineMismatch,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub link: Option<LinkId>,
    pub stream: Option<StreamId>,
    pub frame: Option<u32>,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            link: None,
            stream: None,
            frame: None,
            detail: detail.into(),
        }
    }

    fn link(mut self, l: LinkId) -> Self {
        self.link = Some(l);
        self
    }

    fn stream(mut self, s: StreamId) -> Self {
        self.stream = Some(s);
        self
    }

    fn frame(mut self, j: usize) -> Self {
        self.frame = Some(j as u32);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        write!(
            f,
            "violation {} link={} stream={} frame={} {}",
            self.kind,
            opt(self.link.map(|l| l.0.to_string())),
            opt(self.stream.map(|s| s.0.to_string())),
            opt(self.frame.map(|j| j.to_string())),
            self.detail
        )
    }
}

/// Checks every admitted stream and every port. An empty result means the
/// state is a valid schedule.
pub fn validate(state: &ScheduleState) -> Vec<Violation> {
    use ViolationKind::*;

    let graph = state.graph();
    let h = state.hyper_period();
    let mut out = Vec::new();
    // link -> (start, end, stream, frame)
    let mut per_link: BTreeMap<LinkId, Vec<(Tick, Tick, StreamId, u32)>> = BTreeMap::new();

    for sched in state.schedules() {
        let id = sched.stream;
        let Some(stream) = state.stream(id) else {
            out.push(Violation::new(RouteBroken, "schedule without stream definition").stream(id));
            continue;
        };
        if !h.is_multiple_of(stream.period) {
            out.push(
                Violation::new(
                    PeriodDivides,
                    format!("period {} does not divide {h}", stream.period),
                )
                .stream(id),
            );
            continue;
        }
        if let Some(why) = route_error(graph, &sched.route.links, stream.src, stream.dst) {
            out.push(Violation::new(RouteBroken, why).stream(id));
            continue;
        }
        let hops = sched.route.links.len();
        let mut tx_ok = sched.tx_len.len() == hops;
        for (i, l) in sched.route.links.iter().enumerate() {
            let link = &graph.links()[l.index()];
            let want =
                transmission_ticks(stream.frame_size_bytes, link.rate_bits_per_tick).unwrap_or(0);
            if sched.tx_len.get(i) != Some(&want) {
                out.push(
                    Violation::new(
                        RouteBroken,
                        format!("hop {i} transmission length should be {want}"),
                    )
                    .stream(id)
                    .link(*l),
                );
                tx_ok = false;
            }
        }
        let frames = (h / stream.period) as usize;
        if sched.tx_start.len() != frames || sched.tx_start.iter().any(|f| f.len() != hops) {
            out.push(
                Violation::new(
                    MissingFrame,
                    format!("expected {frames} frames on {hops} hops"),
                )
                .stream(id),
            );
            continue;
        }
        if !tx_ok {
            continue;
        }
        if sched.offset >= stream.period {
            out.push(
                Violation::new(Release, format!("offset {} not below period", sched.offset))
                    .stream(id),
            );
        }
        for j in 0..frames {
            let period_start = j as Tick * stream.period;
            let deadline = period_start + stream.period;
            let release = period_start + sched.offset;
            if sched.tx_start[j][0] < release {
                out.push(
                    Violation::new(
                        Release,
                        format!(
                            "starts at {} before release {release}",
                            sched.tx_start[j][0]
                        ),
                    )
                    .stream(id)
                    .frame(j)
                    .link(sched.route.links[0]),
                );
            }
            for i in 0..hops {
                let link = &graph.links()[sched.route.links[i].index()];
                let end = sched.tx_end(j, i);
                per_link.entry(link.id).or_default().push((
                    sched.tx_start[j][i],
                    end,
                    id,
                    j as u32,
                ));
                if i + 1 < hops {
                    let ready = end + link.propagation + link.processing_at_receiver;
                    let next = sched.tx_start[j][i + 1];
                    if next < ready {
                        out.push(
                            Violation::new(
                                Precedence,
                                format!("hop {} starts at {next}, frame ready at {ready}", i + 1),
                            )
                            .stream(id)
                            .frame(j)
                            .link(sched.route.links[i + 1]),
                        );
                    }
                } else {
                    let delivered = end + link.propagation;
                    if delivered > deadline {
                        out.push(
                            Violation::new(
                                Deadline,
                                format!("delivered at {delivered}, deadline {deadline}"),
                            )
                            .stream(id)
                            .frame(j)
                            .link(link.id),
                        );
                    }
                }
            }
        }
    }

    for (link, mut intervals) in per_link {
        intervals.sort_unstable();
        let mut reach: Option<(Tick, StreamId, u32)> = None;
        for (start, end, s, j) in intervals {
            if let Some((until, other, oj)) = reach {
                if start < until {
                    out.push(
                        Violation::new(
                            Overlap,
                            format!("[{start}, {end}) overlaps {other} frame {oj} until {until}"),
                        )
                        .link(link)
                        .stream(s)
                        .frame(j as usize),
                    );
                }
            }
            if reach.is_none_or(|(until, ..)| end > until) {
                reach = Some((end, s, j));
            }
        }
    }

    let rebuilt = state.rebuild_timelines();
    let stored = state.timelines();
    if rebuilt.len() != stored.len() {
        out.push(Violation::new(
            TimelineMismatch,
            "port count differs from graph",
        ));
    }
    for (r, s) in rebuilt.iter().zip(stored) {
        if r != s {
            out.push(
                Violation::new(
                    TimelineMismatch,
                    "stored reservations differ from schedules",
                )
                .link(s.link()),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests;
