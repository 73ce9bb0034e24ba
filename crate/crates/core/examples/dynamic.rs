//! Streams leaving and entering a 25-bridge ring over 50 steps.
//!
//! cargo run --release --example dynamic

use ttplan::harness::{run_scenario, Algorithm, DynamicConfig, ScenarioConfig};
use ttplan::TopologySpec;

fn main() -> ttplan::Result<()> {
    let dynamic = DynamicConfig {
        initial_n: 1500,
        steps: 50,
        leave_per_step: 100,
        enter_per_step: 200,
    };
    for algorithm in [Algorithm::H2s, Algorithm::Celf] {
        let cfg =
            ScenarioConfig::new(TopologySpec::ring(25), 0, algorithm, 0).with_dynamic(dynamic);
        let run = run_scenario(&cfg)?;
        println!("{algorithm}");
        for row in run.rows.iter().step_by(5) {
            println!(
                "  step {:>2}: {:>8.1} Mbit/s, {:>4} admitted, {:>3} rejected",
                row.step,
                row.throughput_mbps(),
                row.admitted_count,
                row.rejected_count
            );
        }
    }
    Ok(())
}
