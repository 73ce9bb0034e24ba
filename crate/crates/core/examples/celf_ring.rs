//! CELF against H2S on an oversaturated ring, plus the order in which CELF
//! rated stream-route pairs.
//!
//! cargo run --release --example celf_ring

use std::sync::Arc;

use ttplan::{
    compute_candidates, generate, generate_streams, Celf, H2s, Planner, RequestBatch,
    ScheduleState, TopologySpec,
};

fn main() -> ttplan::Result<()> {
    let g = Arc::new(generate(&TopologySpec::ring(25))?);
    let streams = generate_streams(&g, 2500, 1)?;
    let candidates = compute_candidates(&g, &streams, 4)?;
    let batch = RequestBatch::add_only(streams);

    let mut h2s = ScheduleState::new(g.clone(), 1);
    H2s::default().plan(&mut h2s, &batch, &candidates)?;

    let mut celf = ScheduleState::new(g, 1);
    let mut trace = Vec::new();
    let result = Celf::default().plan_traced(&mut celf, &batch, &candidates, &mut trace)?;

    for (name, s) in [("H2S", &h2s), ("CELF", &celf)] {
        println!(
            "{name:>4}: {} Mbit/s, {} admitted",
            ttplan::format_mbps(s.aggregated_throughput()),
            s.admitted_count()
        );
    }
    println!(
        "CELF rated {} pairs for {} place attempts; first three:",
        trace.len(),
        result.place_attempts
    );
    for e in trace.iter().take(3) {
        println!(
            "  {} route {} score {:.6}",
            e.stream,
            e.route,
            e.score.to_f64()
        );
    }
    Ok(())
}
