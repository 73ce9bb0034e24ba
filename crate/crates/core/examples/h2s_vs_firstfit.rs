//! H2S, CELF and FirstFit on random 25-bridge networks with 2500 streams.
//!
//! cargo run --release --example h2s_vs_firstfit

use ttplan::harness::{run_scenario, Algorithm, ScenarioConfig};
use ttplan::TopologySpec;

fn main() -> ttplan::Result<()> {
    for algorithm in [Algorithm::H2s, Algorithm::Celf, Algorithm::FirstFit] {
        let mut mbps = 0.0;
        let mut admitted = 0;
        let mut secs = 0.0;
        for seed in 0..3 {
            let cfg = ScenarioConfig::new(TopologySpec::random(25, seed), 2500, algorithm, seed);
            let row = run_scenario(&cfg)?.rows.remove(0);
            mbps += row.throughput_mbps();
            admitted += row.admitted_count;
            secs += row.solving_time_seconds;
        }
        println!(
            "{algorithm:>5}: {:>9.1} Mbit/s, {:>6.1} admitted, {:.3} s",
            mbps / 3.0,
            admitted as f64 / 3.0,
            secs / 3.0
        );
    }
    Ok(())
}
