use super::score::{check_ssf_alpha, ssf, DEFAULT_ALPHA};
use super::{begin_batch, PlanResult, Planner};
use crate::error::Result;
use crate::model::RequestBatch;
use crate::placement::ScheduleState;
use crate::routing::CandidateMap;

/// Hierarchical one-pass greedy: streams in ascending stream-sorting score
/// (short periods first, then large frames, then old ids), each trying its
/// candidate routes from fewest hops up. The first successful placement
/// admits the stream; running out of routes rejects it.
#[derive(Debug, Clone, Copy)]
pub struct H2s {
    pub alpha: u64,
}

impl Default for H2s {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl Planner for H2s {
    fn name(&self) -> String {
        "H2S".into()
    }

    fn plan(
        &self,
        state: &mut ScheduleState,
        batch: &RequestBatch,
        candidates: &CandidateMap,
    ) -> Result<PlanResult> {
        check_ssf_alpha(self.alpha, &batch.add)?;
        let mut result = PlanResult {
            rejected: begin_batch(state, batch, Some(candidates))?,
            ..PlanResult::default()
        };

        let mut order: Vec<_> = batch
            .add
            .iter()
            .filter(|s| !result.rejected.contains(&s.id))
            .collect();
        order.sort_by_cached_key(|s| ssf(self.alpha, s));

        for stream in order {
            let mut routes: Vec<_> = candidates[&stream.id].routes.iter().collect();
            routes.sort_by(|a, b| a.rank_key().cmp(&b.rank_key()));
            let mut placed = false;
            for route in routes {
                result.place_attempts += 1;
                if state.place(stream, route)?.is_some() {
                    placed = true;
                    break;
                }
            }
            if placed {
                result.admitted.push(stream.id);
            } else {
                result.rejected.push(stream.id);
            }
        }
        Ok(result)
    }
}
