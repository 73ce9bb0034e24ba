//! Exhaustive search on a tiny instance next to the heuristics.
//!
//! cargo run --example oracle

use std::sync::Arc;

use ttplan::verify::{oracle_best, OracleMode};
use ttplan::{
    compute_candidates, Celf, H2s, LinkParams, NetworkGraph, Planner, RequestBatch, ScheduleState,
    Stream, StreamId,
};

fn main() -> ttplan::Result<()> {
    // Three bridges in a triangle, 100 Mbit/s links.
    let slow = LinkParams {
        rate_bits_per_tick: 100,
        ..LinkParams::default()
    };
    let mut g = NetworkGraph::new();
    let bridges: Vec<_> = (0..3).map(|_| g.add_bridge()).collect();
    let hosts: Vec<_> = bridges
        .iter()
        .map(|&b| {
            let h = g.add_end_station();
            g.connect(h, b, slow).map(|_| h)
        })
        .collect::<ttplan::Result<_>>()?;
    for i in 0..3 {
        g.connect(bridges[i], bridges[(i + 1) % 3], slow)?;
    }
    let g = Arc::new(g);

    let streams = vec![
        Stream::new(StreamId(0), hosts[0], hosts[1], 1500, 250),
        Stream::new(StreamId(1), hosts[0], hosts[1], 1000, 250),
        Stream::new(StreamId(2), hosts[2], hosts[1], 750, 500),
        Stream::new(StreamId(3), hosts[0], hosts[2], 1500, 500),
        Stream::new(StreamId(4), hosts[1], hosts[0], 500, 250),
    ];
    let candidates = compute_candidates(&g, &streams, 2)?;
    let best = oracle_best(&g, &streams, &candidates, None, OracleMode::Restricted)?;
    println!(
        "oracle: {:?}, {} Mbit/s, {} nodes explored",
        best.admitted,
        ttplan::format_mbps(best.throughput),
        best.explored
    );
    for p in [&H2s::default() as &dyn Planner, &Celf::default()] {
        let mut state = ScheduleState::new(g.clone(), 1);
        let r = p.plan(
            &mut state,
            &RequestBatch::add_only(streams.clone()),
            &candidates,
        )?;
        println!(
            "{:>6}: {:?}, {} Mbit/s",
            p.name(),
            r.admitted,
            ttplan::format_mbps(state.aggregated_throughput())
        );
    }
    Ok(())
}
