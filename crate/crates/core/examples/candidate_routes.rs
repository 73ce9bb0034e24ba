//! Candidate routes between two corners of a 4x4 grid.
//!
//! cargo run --example candidate_routes

use ttplan::{candidate_routes, generate, TopologySpec};

fn main() -> ttplan::Result<()> {
    let g = generate(&TopologySpec::grid(4, 4))?;
    let hosts = g.end_stations();
    let (src, dst) = (hosts[0], hosts[hosts.len() - 1]);
    for k in [1, 4, 8] {
        let routes = candidate_routes(&g, src, dst, k)?;
        println!("k = {k}: {} routes", routes.len());
        for r in routes {
            let path: Vec<String> = r.links.iter().map(|l| l.0.to_string()).collect();
            println!("  {} hops: {}", r.hop_count(), path.join(" "));
        }
    }
    Ok(())
}
