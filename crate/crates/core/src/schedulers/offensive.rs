use super::{PlanResult, Planner};
use crate::error::Result;
use crate::model::{RequestBatch, Stream};
use crate::placement::ScheduleState;
use crate::routing::CandidateMap;

/// Defragmenting wrapper around a defensive planner.
///
/// Runs the inner planner defensively first. Only if that rejects
/// something does it rebuild from an empty network: all surviving old
/// streams are planned first, then the new batch. The rebuild is thrown
/// away unless it readmits every old stream, and it replaces the
/// defensive result only with strictly higher aggregated throughput.
///
/// `candidates` must also cover the previously admitted streams.
#[derive(Debug, Clone, Copy, Default)]
pub struct Offensive<P> {
    pub inner: P,
}

impl<P> Offensive<P> {
    pub fn new(inner: P) -> Self {
        Self { inner }
    }
}

impl<P: Planner> Planner for Offensive<P> {
    fn name(&self) -> String {
        format!("Offensive-{}", self.inner.name())
    }

    fn plan(
        &self,
        state: &mut ScheduleState,
        batch: &RequestBatch,
        candidates: &CandidateMap,
    ) -> Result<PlanResult> {
        let mut defensive = state.clone();
        let mut result = self.inner.plan(&mut defensive, batch, candidates)?;
        if result.rejected.is_empty() {
            *state = defensive;
            return Ok(result);
        }

        let old: Vec<Stream> = state
            .streams()
            .filter(|s| !batch.del.contains(&s.id))
            .cloned()
            .collect();
        let mut rebuilt = state.emptied();
        let readmit = self
            .inner
            .plan(&mut rebuilt, &RequestBatch::add_only(old), candidates)?;
        result.place_attempts += readmit.place_attempts;
        if !readmit.rejected.is_empty() {
            *state = defensive;
            return Ok(result);
        }
        let fresh = self.inner.plan(
            &mut rebuilt,
            &RequestBatch::add_only(batch.add.clone()),
            candidates,
        )?;
        result.place_attempts += fresh.place_attempts;
        if rebuilt.aggregated_throughput() > defensive.aggregated_throughput() {
            *state = rebuilt;
            Ok(PlanResult {
                admitted: fresh.admitted,
                rejected: fresh.rejected,
                place_attempts: result.place_attempts,
                offensive: true,
            })
        } else {
            *state = defensive;
            Ok(result)
        }
    }
}
