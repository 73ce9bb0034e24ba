//! A fragmented port: defensive H2S cannot use the holes left by departed
//! streams, the offensive wrapper rebuilds and admits everything.
//!
//! cargo run --example offensive_defrag

use std::sync::Arc;

use ttplan::{
    compute_candidates, generate, H2s, NodeId, Offensive, Planner, RequestBatch, ScheduleState,
    Stream, StreamId, TopologySpec,
};

fn main() -> ttplan::Result<()> {
    let g = Arc::new(generate(&TopologySpec::ring(10))?);
    let bridge_of = |h: NodeId| g.link(g.out_links(h)[0]).map(|l| l.to);
    let hosts = g.end_stations();
    let a = hosts[0];
    let mut z = hosts[1];
    for &h in &hosts[1..] {
        if g.find_link(bridge_of(a)?, bridge_of(h)?).is_some() {
            z = h;
            break;
        }
    }

    let small: Vec<Stream> = (0..200)
        .map(|i| Stream::new(StreamId(i), a, z, 125, 250))
        .collect();
    let big: Vec<Stream> = (200..204)
        .map(|i| Stream::new(StreamId(i), a, z, 1500, 250))
        .collect();
    let all: Vec<Stream> = small.iter().chain(&big).cloned().collect();
    let candidates = compute_candidates(&g, &all, 4)?;

    let mut state = ScheduleState::new(g.clone(), 1);
    H2s::default().plan(&mut state, &RequestBatch::add_only(small), &candidates)?;
    let batch = RequestBatch {
        add: big,
        del: (0..200).filter(|i| i % 2 == 1).map(StreamId).collect(),
    };

    let mut defensive = state.clone();
    let d = H2s::default().plan(&mut defensive, &batch, &candidates)?;
    let o = Offensive::new(H2s::default()).plan(&mut state, &batch, &candidates)?;
    println!(
        "defensive: admitted {:?}, rejected {:?}",
        d.admitted, d.rejected
    );
    println!(
        "offensive: admitted {:?}, rejected {:?}, rebuilt {}",
        o.admitted, o.rejected, o.offensive
    );
    println!(
        "throughput {} vs {} Mbit/s",
        ttplan::format_mbps(defensive.aggregated_throughput()),
        ttplan::format_mbps(state.aggregated_throughput())
    );
    Ok(())
}
