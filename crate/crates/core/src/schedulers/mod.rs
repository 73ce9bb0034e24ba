//! Planners that turn a request batch into an updated schedule.
//!
//! [`H2s`], [`Celf`] and [`FirstFit`] are defensive: reservations of
//! already admitted streams are never touched. [`Offensive`] wraps either
//! of the first two and may rebuild the whole schedule when that admits
//! more throughput. [`Edf`] re-simulates everything on every call.

mod celf;
mod edf;
mod firstfit;
mod h2s;
mod offensive;
pub mod score;

use std::collections::BTreeSet;

pub use celf::{Celf, CrfEvaluation};
pub use edf::{edf_initial_subset, edf_plan, simulate_edf, Edf, EdfSimulation};
pub use firstfit::FirstFit;
pub use h2s::H2s;
pub use offensive::Offensive;
pub use score::{Score, DEFAULT_ALPHA};

use crate::error::{Error, Result};
use crate::model::{sub_cycle, RequestBatch, StreamId, Tick};
use crate::placement::ScheduleState;
use crate::routing::CandidateMap;

/// Outcome of one planner call. `admitted` and `rejected` partition the
/// batch's added streams.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanResult {
    pub admitted: Vec<StreamId>,
    pub rejected: Vec<StreamId>,
    /// Number of `place` calls made.
    pub place_attempts: usize,
    /// True when an offensive rebuild replaced the defensive result.
    pub offensive: bool,
}

pub trait Planner {
    fn name(&self) -> String;

    /// Removes `batch.del`, then tries to admit `batch.add`. On `Err` the
    /// state is unchanged.
    fn plan(
        &self,
        state: &mut ScheduleState,
        batch: &RequestBatch,
        candidates: &CandidateMap,
    ) -> Result<PlanResult>;
}

/// Hyper period the state will have after [`begin_batch`] runs on `batch`.
pub(crate) fn projected_hyper_period(state: &ScheduleState, batch: &RequestBatch) -> Tick {
    batch.add.iter().fold(state.hyper_period(), |h, s| {
        let next = num_integer::lcm(h, s.period.max(1));
        if next > state.max_hyper_period() {
            h
        } else {
            next
        }
    })
}

/// Shared batch prologue: validates the batch, releases deleted streams,
/// grows the hyper period to cover the requested periods and updates the
/// sub-cycle. Streams whose period would push the hyper period past the
/// state's limit are returned as pre-rejected.
pub(crate) fn begin_batch(
    state: &mut ScheduleState,
    batch: &RequestBatch,
    candidates: Option<&CandidateMap>,
) -> Result<Vec<StreamId>> {
    let graph = state.graph().clone();
    let mut seen = BTreeSet::new();
    for s in &batch.add {
        s.check(&graph)?;
        if state.is_admitted(s.id) {
            return Err(Error::AlreadyAdmitted(s.id));
        }
        if !seen.insert(s.id) {
            return Err(Error::DuplicateStream(s.id));
        }
        if let Some(c) = candidates {
            match c.get(&s.id) {
                Some(set) if !set.routes.is_empty() => {}
                _ => return Err(Error::MissingCandidates(s.id)),
            }
        }
    }
    let mut dels = BTreeSet::new();
    for id in &batch.del {
        if !state.is_admitted(*id) || !dels.insert(*id) {
            return Err(Error::UnknownStream(*id));
        }
    }

    for id in &batch.del {
        state.release(*id)?;
    }

    let mut periods: Vec<Tick> = state.streams().map(|s| s.period).collect();
    let h = projected_hyper_period(state, batch);
    let mut pre_rejected = Vec::new();
    for s in &batch.add {
        if h.is_multiple_of(s.period) {
            periods.push(s.period);
        } else {
            pre_rejected.push(s.id);
        }
    }
    state.grow_hyper_period(h)?;
    if !periods.is_empty() {
        state.set_sub_cycle(sub_cycle(&periods)?);
    }
    Ok(pre_rejected)
}
