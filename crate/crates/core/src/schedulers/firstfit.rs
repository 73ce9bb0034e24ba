use super::{begin_batch, PlanResult, Planner};
use crate::error::Result;
use crate::model::RequestBatch;
use crate::placement::ScheduleState;
use crate::routing::CandidateMap;

/// Baseline: streams in request order, shortest candidate route only,
/// plain ASAP placement with every frame released at its period start.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstFit;

impl Planner for FirstFit {
    fn name(&self) -> String {
        "FF".into()
    }

    fn plan(
        &self,
        state: &mut ScheduleState,
        batch: &RequestBatch,
        candidates: &CandidateMap,
    ) -> Result<PlanResult> {
        let mut result = PlanResult {
            rejected: begin_batch(state, batch, Some(candidates))?,
            ..PlanResult::default()
        };
        for stream in &batch.add {
            if result.rejected.contains(&stream.id) {
                continue;
            }
            let shortest = candidates[&stream.id]
                .routes
                .iter()
                .min_by(|a, b| a.rank_key().cmp(&b.rank_key()))
                .expect("candidate set checked non-empty");
            result.place_attempts += 1;
            if state.place_with_offsets(stream, shortest, &[0])?.is_some() {
                result.admitted.push(stream.id);
            } else {
                result.rejected.push(stream.id);
            }
        }
        Ok(result)
    }
}
