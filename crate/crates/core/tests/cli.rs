use std::path::Path;
use std::process::{Command, Output};

fn ttplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttplan"))
        .args(args)
        .output()
        .unwrap()
}

/// Data lines of a CSV: the header row plus one per record.
fn csv_lines(path: &str) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# ttplan-v1\n"));
    text.lines().filter(|l| !l.starts_with('#')).count()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_schedule_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (topo, streams, tables, metrics) = (
        p(dir.path(), "topo.txt"),
        p(dir.path(), "streams.txt"),
        p(dir.path(), "tables.txt"),
        p(dir.path(), "metrics.csv"),
    );
    let out = ttplan(&["gen-topology", "--topology", "grid-3x3", "--out", &topo]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = ttplan(&[
        "gen-streams",
        "--topology-file",
        &topo,
        "--n",
        "40",
        "--seed",
        "2",
        "--out",
        &streams,
    ]);
    assert!(out.status.success());

    let out = ttplan(&[
        "schedule",
        "--topology-file",
        &topo,
        "--streams-file",
        &streams,
        "--algo",
        "celf",
        "--out",
        &tables,
        "--metrics",
        &metrics,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(csv_lines(&metrics), 2);

    let verify = |tables: &str| {
        ttplan(&[
            "verify",
            "--topology-file",
            &topo,
            "--streams-file",
            &streams,
            "--schedule-file",
            tables,
        ])
    };
    assert_eq!(verify(&tables).status.code(), Some(0));

    // Move one reservation onto its predecessor on the same port.
    let text = std::fs::read_to_string(&tables).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let port = |l: &str| l.split(' ').nth(1).map(String::from);
    let i = (1..lines.len())
        .find(|&i| lines[i].starts_with("port") && port(&lines[i]) == port(&lines[i - 1]))
        .unwrap();
    let prev: Vec<String> = lines[i - 1].split(' ').map(String::from).collect();
    let mut f: Vec<String> = lines[i].split(' ').map(String::from).collect();
    f[2] = prev[2].clone();
    lines[i] = f.join(" ");
    let bad = p(dir.path(), "bad.txt");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let out = verify(&bad);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("violation"));
}

#[test]
fn rejected_streams_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (topo, streams) = (p(dir.path(), "topo.txt"), p(dir.path(), "streams.txt"));
    assert!(
        ttplan(&["gen-topology", "--topology", "ring-4", "--out", &topo])
            .status
            .success()
    );
    assert!(ttplan(&[
        "gen-streams",
        "--topology-file",
        &topo,
        "--n",
        "800",
        "--out",
        &streams
    ])
    .status
    .success());
    let out = ttplan(&[
        "schedule",
        "--topology-file",
        &topo,
        "--streams-file",
        &streams,
        "--algo",
        "h2s",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("# ttplan-v1"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ttplan(&["schedule"]).status.code(), Some(2));
    assert_eq!(
        ttplan(&["bench", "--topology", "hexagon-3", "--n", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ttplan(&["bench", "--algo", "fastest", "--n", "5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bench_and_dynamic_write_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = p(dir.path(), "bench.csv");
    let out = ttplan(&[
        "bench",
        "--topology",
        "ring-5",
        "--algo",
        "h2s,ff",
        "--n",
        "100",
        "--seeds",
        "2",
        "--out",
        &out_csv,
    ]);
    assert!(out.status.success());
    assert_eq!(csv_lines(&out_csv), 1 + 4);

    let dyn_csv = p(dir.path(), "dynamic.csv");
    let out = ttplan(&[
        "dynamic",
        "--topology",
        "ring-5",
        "--algo",
        "celf",
        "--initial",
        "60",
        "--steps",
        "3",
        "--leave",
        "10",
        "--enter",
        "20",
        "--out",
        &dyn_csv,
    ]);
    assert!(out.status.success());
    assert_eq!(csv_lines(&dyn_csv), 1 + 4);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
}
