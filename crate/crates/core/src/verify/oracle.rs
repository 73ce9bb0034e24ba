use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    aggregated_throughput, hyper_period, sub_cycle, transmission_ticks, LinkId, NetworkGraph,
    Stream, StreamId, Throughput, Tick,
};
use crate::placement::{Reservation, ScheduleState};
use crate::routing::{CandidateMap, Route};

pub const MAX_BRIDGES: usize = 4;
pub const MAX_STREAMS: usize = 6;
pub const MAX_ROUTES: usize = 2;
pub const MAX_TICK_STREAMS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Every insertion order, route and offset, placed with the same
    /// machinery the planners use.
    Restricted,
    /// Free start ticks for every frame. Only for at most two streams that
    /// all use one and the same single-link route.
    Tick,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub admitted: Vec<StreamId>,
    pub throughput: Throughput,
    /// Search nodes visited.
    pub explored: usize,
}

/// Best admitted subset of a tiny instance, starting from an empty network.
///
/// `offsets` defaults to the multiples of the gcd of all periods, the set
/// the planners would try for the same batch.
pub fn oracle_best(
    graph: &Arc<NetworkGraph>,
    streams: &[Stream],
    candidates: &CandidateMap,
    offsets: Option<&[Tick]>,
    mode: OracleMode,
) -> Result<OracleResult> {
    let bridges = graph.bridges().len();
    if bridges > MAX_BRIDGES {
        return Err(Error::InstanceTooLarge(format!(
            "{bridges} bridges, at most {MAX_BRIDGES}"
        )));
    }
    if streams.len() > MAX_STREAMS {
        return Err(Error::InstanceTooLarge(format!(
            "{} streams, at most {MAX_STREAMS}",
            streams.len()
        )));
    }
    let mut routes = Vec::with_capacity(streams.len());
    for s in streams {
        s.check(graph)?;
        let set = candidates
            .get(&s.id)
            .ok_or(Error::MissingCandidates(s.id))?;
        if set.routes.is_empty() {
            return Err(Error::MissingCandidates(s.id));
        }
        if set.routes.len() > MAX_ROUTES {
            return Err(Error::InstanceTooLarge(format!(
                "{} has {} candidate routes, at most {MAX_ROUTES}",
                s.id,
                set.routes.len()
            )));
        }
        routes.push(set.routes.as_slice());
    }
    let periods: Vec<Tick> = streams.iter().map(|s| s.period).collect();
    if periods.is_empty() {
        return Ok(OracleResult {
            admitted: Vec::new(),
            throughput: Throughput::from_integer(0),
            explored: 1,
        });
    }
    let h = hyper_period(&periods)?;

    match mode {
        OracleMode::Restricted => {
            let g = sub_cycle(&periods)?;
            let mut state = ScheduleState::new(graph.clone(), h);
            state.set_sub_cycle(g);
            let mut search = Restricted {
                streams,
                routes: &routes,
                offsets,
                g,
                seen: HashSet::new(),
                best: (Throughput::from_integer(0), Vec::new()),
                explored: 0,
            };
            search.dfs(&state, 0)?;
            let (throughput, mut admitted) = search.best;
            admitted.sort();
            Ok(OracleResult {
                admitted,
                throughput,
                explored: search.explored,
            })
        }
        OracleMode::Tick => tick_search(graph, streams, &routes, h),
    }
}

struct Restricted<'a> {
    streams: &'a [Stream],
    routes: &'a [&'a [Route]],
    offsets: Option<&'a [Tick]>,
    g: Tick,
    seen: HashSet<(u32, Vec<(LinkId, Reservation)>)>,
    best: (Throughput, Vec<StreamId>),
    explored: usize,
}

impl Restricted<'_> {
    fn dfs(&mut self, state: &ScheduleState, placed: u32) -> Result<()> {
        self.explored += 1;
        let current = state.aggregated_throughput();
        if current > self.best.0 {
            self.best = (current, state.admitted_ids());
        }
        let rest = aggregated_throughput(
            self.streams
                .iter()
                .enumerate()
                .filter(|(i, _)| placed & (1 << i) == 0)
                .map(|(_, s)| s),
        );
        if current + rest <= self.best.0 {
            return Ok(());
        }
        let mut fingerprint: Vec<(LinkId, Reservation)> = state
            .timelines()
            .iter()
            .flat_map(|t| t.iter().map(move |r| (t.link(), r)))
            .collect();
        fingerprint.sort_unstable();
        if !self.seen.insert((placed, fingerprint)) {
            return Ok(());
        }

        for (i, stream) in self.streams.iter().enumerate() {
            if placed & (1 << i) != 0 {
                continue;
            }
            let offsets: Vec<Tick> = match self.offsets {
                Some(o) => o.iter().copied().filter(|&o| o < stream.period).collect(),
                None => (0..)
                    .map(|k| k * self.g)
                    .take_while(|&o| o < stream.period)
                    .collect(),
            };
            for route in self.routes[i] {
                for &offset in &offsets {
                    let mut next = state.clone();
                    if next.place_with_offsets(stream, route, &[offset])?.is_some() {
                        self.dfs(&next, placed | (1 << i))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// One frame to be sent on the shared link.
#[derive(Debug, Clone, Copy)]
struct Job {
    release: Tick,
    latest_start: Tick,
    len: Tick,
}

fn tick_search(
    graph: &NetworkGraph,
    streams: &[Stream],
    routes: &[&[Route]],
    h: Tick,
) -> Result<OracleResult> {
    if streams.len() > MAX_TICK_STREAMS {
        return Err(Error::InstanceTooLarge(format!(
            "tick mode takes at most {MAX_TICK_STREAMS} streams"
        )));
    }
    let link = match routes
        .first()
        .map(|r| r.first().map(|r| r.links.as_slice()))
    {
        Some(Some([l])) => *l,
        _ => {
            return Err(Error::InstanceTooLarge(
                "tick mode needs a single-link route".into(),
            ))
        }
    };
    if routes.iter().any(|r| r.len() != 1 || r[0].links != [link]) {
        return Err(Error::InstanceTooLarge(
            "tick mode needs every stream on the same single link".into(),
        ));
    }
    let link = graph.link(link)?;

    let mut best = (Throughput::from_integer(0), Vec::new());
    let mut explored = 0;
    for subset in 0u32..(1 << streams.len()) {
        let chosen: Vec<&Stream> = streams
            .iter()
            .enumerate()
            .filter(|(i, _)| subset & (1 << i) != 0)
            .map(|(_, s)| s)
            .collect();
        let value = aggregated_throughput(chosen.iter().copied());
        if value <= best.0 && subset != 0 {
            continue;
        }
        let mut jobs = Vec::new();
        let mut hopeless = false;
        for s in &chosen {
            let len = transmission_ticks(s.frame_size_bytes, link.rate_bits_per_tick)?;
            for j in 0..h / s.period {
                let release = j * s.period;
                match (release + s.period).checked_sub(len + link.propagation) {
                    Some(latest) if latest >= release => jobs.push(Job {
                        release,
                        latest_start: latest,
                        len,
                    }),
                    _ => hopeless = true,
                }
            }
        }
        if hopeless {
            continue;
        }
        if jobs.len() > 64 {
            return Err(Error::InstanceTooLarge(format!(
                "{} frames in tick mode, at most 64",
                jobs.len()
            )));
        }
        let mut failed = HashSet::new();
        if sequence(&jobs, 0, 0, &mut failed, &mut explored) {
            let mut ids: Vec<StreamId> = chosen.iter().map(|s| s.id).collect();
            ids.sort();
            best = (value, ids);
        }
    }
    Ok(OracleResult {
        admitted: best.1,
        throughput: best.0,
        explored,
    })
}

/// Non-preemptive single-machine feasibility with release times and
/// deadlines. Any feasible tick assignment can be shifted left until each
/// frame starts at its release or at the end of the previous frame, so
/// enumerating orders with left-justified starts covers every start-tick
/// choice.
fn sequence(
    jobs: &[Job],
    done: u64,
    free_at: Tick,
    failed: &mut HashSet<(u64, Tick)>,
    explored: &mut usize,
) -> bool {
    *explored += 1;
    if done.count_ones() as usize == jobs.len() {
        return true;
    }
    if failed.contains(&(done, free_at)) {
        return false;
    }
    let pending = || {
        jobs.iter()
            .enumerate()
            .filter(|(i, _)| done & (1 << i) == 0)
    };
    if pending().any(|(_, j)| j.latest_start < free_at) {
        failed.insert((done, free_at));
        return false;
    }
    for (i, job) in pending() {
        let start = free_at.max(job.release);
        if start <= job.latest_start
            && sequence(jobs, done | (1 << i), start + job.len, failed, explored)
        {
            return true;
        }
    }
    failed.insert((done, free_at));
    false
}
