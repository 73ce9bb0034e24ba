//! The EDF benchmark: a two-frame simulation, then admission on a network.
//!
//! cargo run --release --example edf

use std::sync::Arc;

use ttplan::schedulers::{edf_initial_subset, edf_plan, simulate_edf, EdfSimulation};
use ttplan::{
    generate, generate_streams, shortest_route, validate, LinkParams, NetworkGraph, Stream,
    StreamId, TopologySpec,
};

fn main() -> ttplan::Result<()> {
    let mut g = NetworkGraph::new();
    let a = g.add_end_station();
    let z = g.add_end_station();
    g.connect(a, z, LinkParams::default())?;
    let route = shortest_route(&g, a, z)?;
    let set = vec![
        (Stream::new(StreamId(0), a, z, 1500, 500), route.clone()),
        (Stream::new(StreamId(1), a, z, 1500, 250), route),
    ];
    if let EdfSimulation::Feasible(tx) = simulate_edf(&g, 500, &set)? {
        println!(
            "deadline 500 starts {:?}, deadline 250 starts {:?}",
            tx[0], tx[1]
        );
    }

    let g = Arc::new(generate(&TopologySpec::random(10, 2))?);
    let streams = generate_streams(&g, 1500, 2)?;
    let seed = edf_initial_subset(&g, &streams)?;
    let (result, state) = edf_plan(&g, &streams)?;
    println!(
        "{} streams: initial subset {seed}, admitted {}, {} Mbit/s, {} violations",
        streams.len(),
        result.admitted.len(),
        ttplan::format_mbps(state.aggregated_throughput()),
        validate(&state).len()
    );
    Ok(())
}
