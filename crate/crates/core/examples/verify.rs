//! Schedules a batch, then breaks one reservation and lets the validator
//! find it.
//!
//! cargo run --example verify

use std::sync::Arc;

use ttplan::harness::io::{format_violations, violations_json};
use ttplan::{
    compute_candidates, generate, generate_streams, validate, H2s, Planner, RequestBatch,
    ScheduleState, StreamSchedule, TopologySpec,
};

fn main() -> ttplan::Result<()> {
    let g = Arc::new(generate(&TopologySpec::grid(3, 3))?);
    let streams = generate_streams(&g, 60, 4)?;
    let candidates = compute_candidates(&g, &streams, 4)?;
    let mut state = ScheduleState::new(g.clone(), 1);
    H2s::default().plan(&mut state, &RequestBatch::add_only(streams), &candidates)?;
    println!("planned: {} violations", validate(&state).len());

    // Start the last hop of one frame before the previous hop finishes.
    let mut entries: Vec<(ttplan::Stream, StreamSchedule)> = state
        .schedules()
        .map(|s| (state.stream(s.stream).unwrap().clone(), s.clone()))
        .collect();
    let (_, sched) = entries
        .iter_mut()
        .find(|(_, s)| s.route.hop_count() > 1)
        .unwrap();
    let hops = sched.route.hop_count();
    sched.tx_start[0][hops - 1] = sched.tx_start[0][hops - 2];
    let broken =
        ScheduleState::from_schedules(g, state.hyper_period(), state.sub_cycle(), entries)?;

    let v = validate(&broken);
    print!("{}", format_violations(&v));
    println!("{}", violations_json(&v[..1])?);
    Ok(())
}
