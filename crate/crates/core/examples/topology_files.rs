//! Writes a topology, streams and port tables to a directory, then reads
//! them back and validates the imported schedule.
//!
//! cargo run --example topology_files -- /tmp/ttplan-demo

use std::sync::Arc;

use ttplan::harness::io;
use ttplan::harness::{run_scenario, Algorithm, ScenarioConfig};
use ttplan::{validate, TopologySpec};

fn main() -> ttplan::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "ttplan-demo".into());
    let dir = std::path::Path::new(&dir);
    std::fs::create_dir_all(dir)?;

    let cfg = ScenarioConfig::new(TopologySpec::tree(8, 1), 200, Algorithm::Celf, 1);
    let run = run_scenario(&cfg)?;
    io::save_topology(run.state.graph(), dir.join("topology.txt"))?;
    io::save_streams(&run.requested, dir.join("streams.txt"))?;
    io::export_tables(&run.state, dir.join("tables.txt"))?;

    let graph = Arc::new(io::load_topology(dir.join("topology.txt"))?);
    let streams = io::load_streams(dir.join("streams.txt"), &graph)?;
    let state = io::import_schedule(dir.join("tables.txt"), graph, &streams)?;
    let same = io::format_tables(&state) == std::fs::read_to_string(dir.join("tables.txt"))?;
    println!(
        "{} streams, {} admitted, {} violations, identical re-export: {same}",
        streams.len(),
        state.admitted_count(),
        validate(&state).len()
    );
    Ok(())
}
