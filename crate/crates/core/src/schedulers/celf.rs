use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::score::{check_crf_alpha, crf, Score, DEFAULT_ALPHA};
use super::{begin_batch, projected_hyper_period, PlanResult, Planner};
use crate::error::Result;
use crate::model::{RequestBatch, Stream, StreamId};
use crate::placement::ScheduleState;
use crate::routing::{CandidateMap, Route};

/// One stream-route rating computed during a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrfEvaluation {
    pub stream: StreamId,
    pub route: usize,
    pub score: Score,
}

/// Greedy over all stream-route pairs at once, best rating first.
///
/// Ratings only drop as reservations are added, so a stale rating is an
/// upper bound on the fresh one. The lazy variant recomputes only the
/// popped pair and places it once its fresh rating still beats the stale
/// head of the heap. `lazy = false` rescans every live pair each round and
/// exists as a reference for the lazy variant.
#[derive(Debug, Clone, Copy)]
pub struct Celf {
    pub alpha: u64,
    pub lazy: bool,
}

impl Default for Celf {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            lazy: true,
        }
    }
}

impl Celf {
    pub fn eager(alpha: u64) -> Self {
        Self { alpha, lazy: false }
    }

    /// Like [`Planner::plan`], additionally recording every rating
    /// computed after the initial heap build.
    pub fn plan_traced(
        &self,
        state: &mut ScheduleState,
        batch: &RequestBatch,
        candidates: &CandidateMap,
        trace: &mut Vec<CrfEvaluation>,
    ) -> Result<PlanResult> {
        let max_route = batch
            .add
            .iter()
            .filter_map(|s| candidates.get(&s.id))
            .flat_map(|c| c.routes.iter().map(Route::hop_count))
            .max()
            .unwrap_or(0);
        check_crf_alpha(
            self.alpha,
            projected_hyper_period(state, batch),
            &batch.add,
            max_route,
        )?;
        let mut result = PlanResult {
            rejected: begin_batch(state, batch, Some(candidates))?,
            ..PlanResult::default()
        };

        let streams: Vec<&Stream> = batch
            .add
            .iter()
            .filter(|s| !result.rejected.contains(&s.id))
            .collect();
        let mut pairs = Vec::new();
        for (si, s) in streams.iter().enumerate() {
            for (ri, route) in candidates[&s.id].routes.iter().enumerate() {
                pairs.push(Pair {
                    score: crf(
                        self.alpha,
                        s,
                        state.route_reserved_ticks(route),
                        state.hyper_period(),
                    ),
                    stream: s.id,
                    stream_index: si,
                    route_index: ri,
                    route,
                });
            }
        }

        let mut admitted = vec![false; streams.len()];
        if self.lazy {
            self.run_lazy(state, &streams, pairs, &mut admitted, &mut result, trace)?;
        } else {
            self.run_eager(state, &streams, pairs, &mut admitted, &mut result, trace)?;
        }
        for (s, ok) in streams.iter().zip(&admitted) {
            if !ok {
                result.rejected.push(s.id);
            }
        }
        Ok(result)
    }

    fn rate(&self, state: &ScheduleState, stream: &Stream, route: &Route) -> Score {
        crf(
            self.alpha,
            stream,
            state.route_reserved_ticks(route),
            state.hyper_period(),
        )
    }

    fn run_lazy<'a>(
        &self,
        state: &mut ScheduleState,
        streams: &[&Stream],
        pairs: Vec<Pair<'a>>,
        admitted: &mut [bool],
        result: &mut PlanResult,
        trace: &mut Vec<CrfEvaluation>,
    ) -> Result<()> {
        let mut heap = BinaryHeap::from(pairs);
        while let Some(mut top) = heap.pop() {
            if admitted[top.stream_index] {
                continue;
            }
            let stream = streams[top.stream_index];
            top.score = self.rate(state, stream, top.route);
            trace.push(top.evaluation());
            if heap.peek().is_some_and(|next| *next > top) {
                heap.push(top);
                continue;
            }
            result.place_attempts += 1;
            if state.place(stream, top.route)?.is_some() {
                admitted[top.stream_index] = true;
                result.admitted.push(stream.id);
            }
        }
        Ok(())
    }

    fn run_eager<'a>(
        &self,
        state: &mut ScheduleState,
        streams: &[&Stream],
        mut live: Vec<Pair<'a>>,
        admitted: &mut [bool],
        result: &mut PlanResult,
        trace: &mut Vec<CrfEvaluation>,
    ) -> Result<()> {
        loop {
            live.retain(|p| !admitted[p.stream_index]);
            for p in live.iter_mut() {
                p.score = self.rate(state, streams[p.stream_index], p.route);
                trace.push(p.evaluation());
            }
            let Some(best) = live
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1))
                .map(|(i, _)| i)
            else {
                return Ok(());
            };
            let pair = live.swap_remove(best);
            let stream = streams[pair.stream_index];
            result.place_attempts += 1;
            if state.place(stream, pair.route)?.is_some() {
                admitted[pair.stream_index] = true;
                result.admitted.push(stream.id);
            }
        }
    }
}

impl Planner for Celf {
    fn name(&self) -> String {
        if self.lazy { "CELF" } else { "CELF-eager" }.into()
    }

    fn plan(
        &self,
        state: &mut ScheduleState,
        batch: &RequestBatch,
        candidates: &CandidateMap,
    ) -> Result<PlanResult> {
        self.plan_traced(state, batch, candidates, &mut Vec::new())
    }
}

/// Heap entry. Greater means "try first": higher score, then smaller
/// stream id, then fewer hops, then the smaller link sequence.
#[derive(Debug, Clone)]
struct Pair<'a> {
    score: Score,
    stream: StreamId,
    stream_index: usize,
    route_index: usize,
    route: &'a Route,
}

impl Pair<'_> {
    fn evaluation(&self) -> CrfEvaluation {
        CrfEvaluation {
            stream: self.stream,
            route: self.route_index,
            score: self.score,
        }
    }
}

impl PartialEq for Pair<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pair<'_> {}

impl PartialOrd for Pair<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pair<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .cmp(&other.score)
            .then_with(|| other.stream.cmp(&self.stream))
            .then_with(|| other.route.rank_key().cmp(&self.route.rank_key()))
    }
}
