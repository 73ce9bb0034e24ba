//! Reservation state and stream placement.
//!
//! A [`ScheduleState`] owns one [`PortTimeline`] per directed link plus the
//! schedule of every admitted stream. Frames are forwarded store-and-forward:
//! a bridge may start sending a frame once it has fully received it and
//! spent its processing delay, and frames wait in the egress buffer
//! whenever the port is reserved.

mod timeline;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;

pub use timeline::{PortTimeline, Reservation};

use crate::error::{Error, Result};
use crate::model::{
    hyper_period, transmission_ticks, LinkId, NetworkGraph, Stream, StreamId, Throughput, Tick,
};
use crate::routing::Route;

pub const DEFAULT_MAX_HYPER_PERIOD: Tick = 100_000;

/// Per-hop timing constants of a route for one stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub link: LinkId,
    pub tx_len: Tick,
    pub propagation: Tick,
    pub processing: Tick,
}

pub fn route_hops(graph: &NetworkGraph, stream: &Stream, route: &Route) -> Result<Vec<Hop>> {
    route
        .links
        .iter()
        .map(|&l| {
            let link = graph.link(l)?;
            Ok(Hop {
                link: l,
                tx_len: transmission_ticks(stream.frame_size_bytes, link.rate_bits_per_tick)?,
                propagation: link.propagation,
                processing: link.processing_at_receiver,
            })
        })
        .collect()
}

/// Route and per-frame, per-hop transmission start times of one admitted
/// stream over one hyper period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamSchedule {
    pub stream: StreamId,
    pub route: Route,
    /// Release offset of every frame relative to its period start.
    pub offset: Tick,
    /// Transmission length per hop.
    pub tx_len: Vec<Tick>,
    /// `tx_start[frame][hop]`.
    pub tx_start: Vec<Vec<Tick>>,
}

impl StreamSchedule {
    pub fn frame_count(&self) -> usize {
        self.tx_start.len()
    }

    pub fn tx_end(&self, frame: usize, hop: usize) -> Tick {
        self.tx_start[frame][hop] + self.tx_len[hop]
    }

    pub fn reservations(&self) -> impl Iterator<Item = (LinkId, Reservation)> + '_ {
        self.tx_start
            .iter()
            .enumerate()
            .flat_map(move |(j, starts)| {
                starts.iter().enumerate().map(move |(i, &start)| {
                    (
                        self.route.links[i],
                        Reservation {
                            start,
                            end: start + self.tx_len[i],
                            stream: self.stream,
                            frame: j as u32,
                        },
                    )
                })
            })
    }
}

/// The admitted stream set of a network together with all reservations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleState {
    graph: Arc<NetworkGraph>,
    hyper_period: Tick,
    sub_cycle: Tick,
    max_hyper_period: Tick,
    buffer_cap: Option<usize>,
    streams: BTreeMap<StreamId, Stream>,
    schedules: BTreeMap<StreamId, StreamSchedule>,
    timelines: Vec<PortTimeline>,
}

impl ScheduleState {
    /// Empty state. The sub-cycle starts equal to the hyper period (a
    /// single candidate offset) until planners set it from known periods.
    pub fn new(graph: Arc<NetworkGraph>, hyper_period: Tick) -> Self {
        assert!(hyper_period > 0, "hyper period must be positive");
        let timelines = (0..graph.link_count())
            .map(|i| PortTimeline::new(LinkId(i as u32), hyper_period))
            .collect();
        Self {
            graph,
            hyper_period,
            sub_cycle: hyper_period,
            max_hyper_period: DEFAULT_MAX_HYPER_PERIOD.max(hyper_period),
            buffer_cap: None,
            streams: BTreeMap::new(),
            schedules: BTreeMap::new(),
            timelines,
        }
    }

    /// Empty copy on the same graph and hyper period.
    pub fn emptied(&self) -> Self {
        let mut s = Self::new(self.graph.clone(), self.hyper_period);
        s.sub_cycle = self.sub_cycle;
        s.max_hyper_period = self.max_hyper_period;
        s.buffer_cap = self.buffer_cap;
        s
    }

    /// Builds a state from externally produced schedules (EDF output,
    /// imported tables). Timelines are derived without any overlap check;
    /// run the validator to judge the result.
    pub fn from_schedules(
        graph: Arc<NetworkGraph>,
        hyper_period: Tick,
        sub_cycle: Tick,
        entries: impl IntoIterator<Item = (Stream, StreamSchedule)>,
    ) -> Result<Self> {
        let mut state = Self::new(graph, hyper_period);
        state.sub_cycle = sub_cycle;
        for (stream, schedule) in entries {
            if stream.id != schedule.stream {
                return Err(Error::InvalidStream {
                    id: stream.id,
                    reason: format!("schedule belongs to {}", schedule.stream),
                });
            }
            if state.streams.contains_key(&stream.id) {
                return Err(Error::AlreadyAdmitted(stream.id));
            }
            for l in &schedule.route.links {
                state.graph.link(*l)?;
            }
            state.commit(stream, schedule);
        }
        Ok(state)
    }

    pub fn graph(&self) -> &Arc<NetworkGraph> {
        &self.graph
    }

    pub fn hyper_period(&self) -> Tick {
        self.hyper_period
    }

    pub fn sub_cycle(&self) -> Tick {
        self.sub_cycle
    }

    pub fn set_sub_cycle(&mut self, g: Tick) {
        assert!(g > 0, "sub-cycle must be positive");
        self.sub_cycle = g;
    }

    pub fn max_hyper_period(&self) -> Tick {
        self.max_hyper_period
    }

    pub fn set_max_hyper_period(&mut self, max: Tick) {
        self.max_hyper_period = max.max(self.hyper_period);
    }

    pub fn buffer_cap(&self) -> Option<usize> {
        self.buffer_cap
    }

    /// Limits how many frames may wait at one egress port at once, e.g. 8
    /// for 802.1Qbv-style queue isolation. `None` means unbounded.
    pub fn set_buffer_cap(&mut self, cap: Option<usize>) {
        self.buffer_cap = cap;
    }

    /// Stretches the hyper period to `new_h`, repeating every admitted
    /// schedule. Shrinking is not supported.
    pub fn grow_hyper_period(&mut self, new_h: Tick) -> Result<()> {
        if new_h == self.hyper_period {
            return Ok(());
        }
        if !new_h.is_multiple_of(self.hyper_period) || new_h > self.max_hyper_period {
            return Err(Error::Config(format!(
                "cannot grow hyper period {} to {new_h} (limit {})",
                self.hyper_period, self.max_hyper_period
            )));
        }
        let old_h = self.hyper_period;
        let reps = new_h / old_h;
        let entries: Vec<(Stream, StreamSchedule)> = self
            .schedules
            .values()
            .map(|sched| {
                let mut sched = sched.clone();
                let base = std::mem::take(&mut sched.tx_start);
                sched.tx_start = (0..reps)
                    .flat_map(|m| {
                        base.iter()
                            .map(move |starts| starts.iter().map(|t| t + m * old_h).collect())
                    })
                    .collect();
                (self.streams[&sched.stream].clone(), sched)
            })
            .collect();
        let mut grown = Self::from_schedules(self.graph.clone(), new_h, self.sub_cycle, entries)?;
        grown.max_hyper_period = self.max_hyper_period;
        grown.buffer_cap = self.buffer_cap;
        *self = grown;
        Ok(())
    }

    pub fn is_admitted(&self, id: StreamId) -> bool {
        self.schedules.contains_key(&id)
    }

    pub fn stream(&self, id: StreamId) -> Option<&Stream> {
        self.streams.get(&id)
    }

    pub fn streams(&self) -> impl Iterator<Item = &Stream> + '_ {
        self.streams.values()
    }

    pub fn schedule(&self, id: StreamId) -> Option<&StreamSchedule> {
        self.schedules.get(&id)
    }

    pub fn schedules(&self) -> impl Iterator<Item = &StreamSchedule> + '_ {
        self.schedules.values()
    }

    pub fn admitted_ids(&self) -> Vec<StreamId> {
        self.schedules.keys().copied().collect()
    }

    pub fn admitted_count(&self) -> usize {
        self.schedules.len()
    }

    pub fn aggregated_throughput(&self) -> Throughput {
        crate::model::aggregated_throughput(self.streams.values())
    }

    pub fn timeline(&self, link: LinkId) -> Result<&PortTimeline> {
        self.timelines
            .get(link.index())
            .ok_or(Error::UnknownLink(link))
    }

    pub fn timelines(&self) -> &[PortTimeline] {
        &self.timelines
    }

    /// Test hook for corrupting stored tables.
    #[doc(hidden)]
    pub fn timelines_mut(&mut self) -> &mut [PortTimeline] {
        &mut self.timelines
    }

    /// Reserved fraction of the hyper period on `link`.
    pub fn utilization(&self, link: LinkId) -> Result<Ratio<u64>> {
        let t = self.timeline(link)?;
        Ok(Ratio::new(t.reserved_ticks(), self.hyper_period))
    }

    /// Sum of reserved ticks over the links of `route`; divided by the
    /// hyper period this is the route's summed utilization.
    pub fn route_reserved_ticks(&self, route: &Route) -> Tick {
        route
            .links
            .iter()
            .map(|l| self.timelines[l.index()].reserved_ticks())
            .sum()
    }

    /// Forwards one frame released at `release` as early as the timelines
    /// allow. Returns the per-hop start ticks, or `None` if the frame
    /// misses the deadline of the period containing `release`.
    pub fn asap_forward(
        &self,
        stream: &Stream,
        route: &Route,
        release: Tick,
    ) -> Result<Option<Vec<Tick>>> {
        if release >= self.hyper_period {
            return Err(Error::Config(format!(
                "release {release} outside hyper period {}",
                self.hyper_period
            )));
        }
        let hops = route_hops(&self.graph, stream, route)?;
        let deadline = (release / stream.period + 1) * stream.period;
        let mut starts = Vec::with_capacity(hops.len());
        Ok(self
            .forward(&hops, release, deadline, &mut starts)
            .map(|_| starts))
    }

    /// Core of [`Self::asap_forward`]: fills `starts` and returns the
    /// delivery tick.
    fn forward(
        &self,
        hops: &[Hop],
        release: Tick,
        deadline: Tick,
        starts: &mut Vec<Tick>,
    ) -> Option<Tick> {
        starts.clear();
        let mut eligible = release;
        let mut delivered = release;
        for hop in hops {
            let t = self.timelines[hop.link.index()].earliest_fit(eligible, hop.tx_len);
            let end = t + hop.tx_len;
            if end + hop.propagation > deadline {
                return None;
            }
            starts.push(t);
            delivered = end + hop.propagation;
            eligible = delivered + hop.processing;
        }
        Some(delivered)
    }

    /// Tries every frame of the hyper period at `offset`. Returns the worst
    /// release-to-delivery delay and the start times. Gives up early once
    /// the worst delay reaches `bound`.
    fn evaluate_offset(
        &self,
        stream: &Stream,
        hops: &[Hop],
        offset: Tick,
        bound: Option<Tick>,
    ) -> Option<(Tick, Vec<Vec<Tick>>)> {
        let frames = (self.hyper_period / stream.period) as usize;
        let mut worst = 0;
        let mut all = Vec::with_capacity(frames);
        for j in 0..frames as Tick {
            let release = j * stream.period + offset;
            let deadline = (j + 1) * stream.period;
            let mut starts = Vec::with_capacity(hops.len());
            let delivered = self.forward(hops, release, deadline, &mut starts)?;
            worst = worst.max(delivered - release);
            if bound.is_some_and(|b| worst >= b) {
                return None;
            }
            all.push(starts);
        }
        Some((worst, all))
    }

    fn check_placeable(&self, stream: &Stream) -> Result<()> {
        if self.schedules.contains_key(&stream.id) {
            return Err(Error::AlreadyAdmitted(stream.id));
        }
        if stream.period == 0 || !self.hyper_period.is_multiple_of(stream.period) {
            return Err(Error::InvalidStream {
                id: stream.id,
                reason: format!(
                    "period {} does not divide hyper period {}",
                    stream.period, self.hyper_period
                ),
            });
        }
        Ok(())
    }

    /// Places `stream` on `route`, choosing among the sub-cycle offsets
    /// `0, g, 2g, ... < period` the one whose worst frame delay (release to
    /// delivery) is smallest; ties go to the earlier offset. On success all
    /// reservations are committed; on `None` the state is untouched.
    pub fn place(&mut self, stream: &Stream, route: &Route) -> Result<Option<&StreamSchedule>> {
        let g = self.sub_cycle;
        let offsets: Vec<Tick> = (0..)
            .map(|i| i * g)
            .take_while(|&o| o < stream.period)
            .collect();
        self.place_with_offsets(stream, route, &offsets)
    }

    /// [`Self::place`] restricted to the given offsets (each must be below
    /// the period). FirstFit uses `&[0]`.
    pub fn place_with_offsets(
        &mut self,
        stream: &Stream,
        route: &Route,
        offsets: &[Tick],
    ) -> Result<Option<&StreamSchedule>> {
        self.check_placeable(stream)?;
        debug_assert!(route.is_valid(&self.graph, stream.src, stream.dst));
        let hops = route_hops(&self.graph, stream, route)?;
        let mut best: Option<(Tick, Tick, Vec<Vec<Tick>>)> = None;
        for &offset in offsets {
            if offset >= stream.period {
                continue;
            }
            let bound = best.as_ref().map(|b| b.0);
            let Some((score, starts)) = self.evaluate_offset(stream, &hops, offset, bound) else {
                continue;
            };
            if let Some(cap) = self.buffer_cap {
                if !self.within_buffer_cap(stream, &hops, offset, &starts, cap) {
                    continue;
                }
            }
            best = Some((score, offset, starts));
        }
        let Some((_, offset, tx_start)) = best else {
            return Ok(None);
        };
        let schedule = StreamSchedule {
            stream: stream.id,
            route: route.clone(),
            offset,
            tx_len: hops.iter().map(|h| h.tx_len).collect(),
            tx_start,
        };
        self.commit(stream.clone(), schedule);
        Ok(self.schedules.get(&stream.id))
    }

    fn commit(&mut self, stream: Stream, schedule: StreamSchedule) {
        for (link, r) in schedule.reservations() {
            self.timelines[link.index()].insert(r);
        }
        self.streams.insert(stream.id, stream);
        self.schedules.insert(schedule.stream, schedule);
    }

    /// Removes a stream and all of its reservations.
    pub fn release(&mut self, id: StreamId) -> Result<(Stream, StreamSchedule)> {
        let schedule = self.schedules.remove(&id).ok_or(Error::UnknownStream(id))?;
        let stream = self
            .streams
            .remove(&id)
            .expect("stream stored with its schedule");
        for (link, r) in schedule.reservations() {
            self.timelines[link.index()].remove(r.start, r.stream, r.frame);
        }
        Ok((stream, schedule))
    }

    /// Timelines recomputed from the admitted schedules alone.
    pub fn rebuild_timelines(&self) -> Vec<PortTimeline> {
        let mut out: Vec<PortTimeline> = (0..self.graph.link_count())
            .map(|i| PortTimeline::new(LinkId(i as u32), self.hyper_period))
            .collect();
        for s in self.schedules.values() {
            for (link, r) in s.reservations() {
                if let Some(t) = out.get_mut(link.index()) {
                    t.insert(r);
                }
            }
        }
        out
    }

    /// Waiting intervals `[arrival, tx_start)` of every frame queued at
    /// `link`. A frame arrives at its first hop when it is released and at
    /// later hops after reception plus processing.
    fn waiting_intervals(&self, link: LinkId) -> Vec<(Tick, Tick)> {
        let Some(timeline) = self.timelines.get(link.index()) else {
            return Vec::new();
        };
        timeline
            .iter()
            .filter_map(|r| {
                let sched = self.schedules.get(&r.stream)?;
                let stream = self.streams.get(&r.stream)?;
                let hop = sched.route.links.iter().position(|&l| l == link)?;
                let j = r.frame as usize;
                let arrival = if hop == 0 {
                    j as Tick * stream.period + sched.offset
                } else {
                    let prev = self.graph.link(sched.route.links[hop - 1]).ok()?;
                    sched.tx_end(j, hop - 1) + prev.propagation + prev.processing_at_receiver
                };
                Some((arrival, r.start))
            })
            .collect()
    }

    /// Largest number of frames simultaneously buffered (fully arrived but
    /// not yet transmitting) at the egress port of `link`.
    pub fn buffer_occupancy(&self, link: LinkId) -> usize {
        max_overlap(&self.waiting_intervals(link))
    }

    pub fn max_buffer_occupancy(&self) -> usize {
        (0..self.graph.link_count())
            .map(|i| self.buffer_occupancy(LinkId(i as u32)))
            .max()
            .unwrap_or(0)
    }

    fn within_buffer_cap(
        &self,
        stream: &Stream,
        hops: &[Hop],
        offset: Tick,
        starts: &[Vec<Tick>],
        cap: usize,
    ) -> bool {
        hops.iter().enumerate().all(|(i, hop)| {
            let mut intervals = self.waiting_intervals(hop.link);
            for (j, s) in starts.iter().enumerate() {
                let arrival = if i == 0 {
                    j as Tick * stream.period + offset
                } else {
                    s[i - 1] + hops[i - 1].tx_len + hops[i - 1].propagation + hops[i - 1].processing
                };
                intervals.push((arrival, s[i]));
            }
            max_overlap(&intervals) <= cap
        })
    }
}

/// Maximum number of half-open intervals covering one tick.
fn max_overlap(intervals: &[(Tick, Tick)]) -> usize {
    let mut events: Vec<(Tick, i32)> = Vec::with_capacity(intervals.len() * 2);
    for &(a, b) in intervals {
        if a < b {
            events.push((a, 1));
            events.push((b, -1));
        }
    }
    // Ends sort before starts at the same tick.
    events.sort_unstable();
    let mut cur = 0i32;
    let mut best = 0i32;
    for (_, d) in events {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}

/// Hyper period of the union of `admitted` and `requested` periods.
pub fn required_hyper_period<'a>(periods: impl IntoIterator<Item = &'a Tick>) -> Result<Tick> {
    let v: Vec<Tick> = periods.into_iter().copied().collect();
    hyper_period(&v)
}
