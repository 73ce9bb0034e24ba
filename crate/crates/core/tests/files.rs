use std::sync::Arc;

use ttplan::harness::io::{
    export_tables, format_tables, import_schedule, load_streams, load_topology, parse_schedule,
    save_streams, save_topology,
};
use ttplan::harness::{run_scenario, write_metrics_csv, Algorithm, DynamicConfig, ScenarioConfig};
use ttplan::{generate, validate, Error, TopologySpec, ViolationKind};

#[test]
fn exported_tables_reimport_clean_and_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (i, topology) in [
        TopologySpec::random(10, 1),
        TopologySpec::grid(3, 3),
        TopologySpec::ring(6),
    ]
    .into_iter()
    .enumerate()
    {
        for algorithm in Algorithm::ALL {
            let cfg = ScenarioConfig::new(topology.clone(), 400, algorithm, i as u64)
                .with_batch_size(150);
            let run = run_scenario(&cfg).unwrap();
            let path = dir.path().join(format!("{i}-{algorithm}.txt"));
            export_tables(&run.state, &path).unwrap();
            let graph = run.state.graph().clone();
            let back = import_schedule(&path, graph, &run.requested).unwrap();
            assert_eq!(validate(&back), vec![], "{algorithm}");
            assert_eq!(back.admitted_ids(), run.state.admitted_ids());
            assert_eq!(
                format_tables(&back),
                std::fs::read_to_string(&path).unwrap(),
                "{algorithm}"
            );
        }
    }
}

#[test]
fn topology_and_stream_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generate(&TopologySpec::tree(12, 2)).unwrap();
    let topo = dir.path().join("topo.txt");
    save_topology(&graph, &topo).unwrap();
    let loaded = load_topology(&topo).unwrap();
    assert_eq!(loaded, graph);

    let streams = ttplan::generate_streams(&graph, 50, 9).unwrap();
    let file = dir.path().join("streams.txt");
    save_streams(&streams, &file).unwrap();
    assert_eq!(load_streams(&file, &loaded).unwrap(), streams);
}

#[test]
fn edited_tables_show_up_as_violations() {
    let cfg = ScenarioConfig::new(TopologySpec::line(3), 6, Algorithm::H2s, 0);
    let run = run_scenario(&cfg).unwrap();
    let text = format_tables(&run.state);
    let graph = run.state.graph().clone();
    let path = std::path::Path::new("edited");

    // Push the first reservation of every port one tick later.
    let mut seen = std::collections::HashSet::new();
    let shifted: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            if f[0] == "port" && seen.insert(f[1]) {
                let t: u64 = f[2][2..].parse().unwrap();
                format!("port {} t={} {} {} {}\n", f[1], t + 1, f[3], f[4], f[5])
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let state = parse_schedule(&shifted, path, graph.clone(), &run.requested).unwrap();
    let v = validate(&state);
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| matches!(
        x.kind,
        ViolationKind::Overlap
            | ViolationKind::Precedence
            | ViolationKind::Deadline
            | ViolationKind::Release
    )));

    // Dropping one hop of a frame is a parse error naming the stream.
    let lines: Vec<&str> = text.lines().collect();
    let last = lines.last().unwrap();
    let dropped: String = lines
        .iter()
        .filter(|l| *l != last)
        .map(|l| format!("{l}\n"))
        .collect();
    match parse_schedule(&dropped, path, graph.clone(), &run.requested) {
        Err(Error::Parse { .. }) => {}
        Ok(state) => assert!(!validate(&state).is_empty()),
        Err(e) => panic!("{e}"),
    }

    let unknown = format!("{text}port 999 t=0 len=1 stream=0 frame=0\n");
    assert!(matches!(
        parse_schedule(&unknown, path, graph, &run.requested),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn metrics_csv_has_one_row_per_step_and_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let dynamic = DynamicConfig {
        initial_n: 50,
        steps: 3,
        leave_per_step: 10,
        enter_per_step: 20,
    };
    let mut rows = Vec::new();
    for algorithm in [Algorithm::H2s, Algorithm::Celf] {
        let cfg = ScenarioConfig::new(TopologySpec::ring(5), 0, algorithm, 1).with_dynamic(dynamic);
        rows.extend(run_scenario(&cfg).unwrap().rows);
    }
    let path = dir.path().join("metrics.csv");
    write_metrics_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# ttplan-v1\n"));
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert_eq!(
        lines[0],
        ttplan::harness::metrics::METRICS_COLUMNS.join(",")
    );
    assert!(lines[1].starts_with("ring-5-s1,0,H2S,"));
    assert!(lines[5].starts_with("ring-5-s1,0,CELF,"));
}

#[test]
fn same_config_same_bytes() {
    let cfg = ScenarioConfig::new(TopologySpec::random(25, 8), 2500, Algorithm::Celf, 8);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(format_tables(&a.state), format_tables(&b.state));
    let graph = Arc::new(generate(&cfg.topology).unwrap());
    assert_eq!(graph.as_ref(), a.state.graph().as_ref());
}
