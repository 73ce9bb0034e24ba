//! Places one stream on an empty line network and prints its frames.
//!
//! cargo run --example placement

use std::sync::Arc;

use ttplan::{shortest_route, LinkParams, NetworkGraph, ScheduleState, Stream, StreamId};

fn main() -> ttplan::Result<()> {
    let mut g = NetworkGraph::new();
    let talker = g.add_end_station();
    let b1 = g.add_bridge();
    let b2 = g.add_bridge();
    let listener = g.add_end_station();
    for (a, b) in [(talker, b1), (b1, b2), (b2, listener)] {
        g.connect(a, b, LinkParams::default())?;
    }
    let g = Arc::new(g);
    let route = shortest_route(&g, talker, listener)?;

    let mut state = ScheduleState::new(g, 2000);
    state.set_sub_cycle(250);
    let first = Stream::new(StreamId(0), talker, listener, 125, 250);
    let second = Stream::new(StreamId(1), talker, listener, 1500, 500);
    for s in [&first, &second] {
        let Some(sched) = state.place(s, &route)? else {
            println!("{} does not fit", s.id);
            continue;
        };
        println!("{} offset {} tx_len {:?}", s.id, sched.offset, sched.tx_len);
        for (j, starts) in sched.tx_start.iter().enumerate() {
            let delivered = sched.tx_end(j, starts.len() - 1) + 1;
            println!("  frame {j}: starts {starts:?}, delivered at {delivered}");
        }
    }
    println!("max buffer occupancy {}", state.max_buffer_occupancy());
    Ok(())
}
