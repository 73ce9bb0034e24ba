use std::sync::Arc;

use super::*;
use crate::model::{LinkParams, NetworkGraph, NodeId, Stream, Throughput};
use crate::placement::StreamSchedule;
use crate::routing::{compute_candidates, shortest_route, Route};

fn line() -> (Arc<NetworkGraph>, NodeId, NodeId) {
    let mut g = NetworkGraph::new();
    let a = g.add_end_station();
    let b1 = g.add_bridge();
    let b2 = g.add_bridge();
    let z = g.add_end_station();
    let p = LinkParams::default();
    g.connect(a, b1, p).unwrap();
    g.connect(b1, b2, p).unwrap();
    g.connect(b2, z, p).unwrap();
    (Arc::new(g), a, z)
}

fn two_streams() -> (ScheduleState, Vec<(Stream, StreamSchedule)>) {
    let (g, a, z) = line();
    let route = shortest_route(&g, a, z).unwrap();
    let mut state = ScheduleState::new(g, 1000);
    state.set_sub_cycle(250);
    for id in 0..2 {
        let s = Stream::new(StreamId(id), a, z, 125, 500);
        state.place(&s, &route).unwrap().unwrap();
    }
    let entries = state
        .schedules()
        .map(|sc| (state.stream(sc.stream).unwrap().clone(), sc.clone()))
        .collect();
    (state, entries)
}

fn rebuild(state: &ScheduleState, entries: Vec<(Stream, StreamSchedule)>) -> ScheduleState {
    ScheduleState::from_schedules(
        state.graph().clone(),
        state.hyper_period(),
        state.sub_cycle(),
        entries,
    )
    .unwrap()
}

fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
    v.iter().map(|x| x.kind).collect()
}

#[test]
fn empty_state_is_valid() {
    let (g, ..) = line();
    assert!(validate(&ScheduleState::new(g, 1000)).is_empty());
}

#[test]
fn placed_streams_are_valid() {
    let (state, _) = two_streams();
    assert_eq!(validate(&state), vec![]);
}

#[test]
fn one_overlap_is_reported_once() {
    let (state, mut entries) = two_streams();
    // Stream 0 frame 0 last hop delayed onto stream 1's window; still
    // in time and after its previous hop.
    let other = entries[1].1.tx_start[0][2];
    entries[0].1.tx_start[0][2] = other;
    let v = validate(&rebuild(&state, entries));
    assert_eq!(kinds(&v), vec![ViolationKind::Overlap], "{v:?}");
    assert_eq!(
        v[0].link,
        Some(state.schedules().next().unwrap().route.links[2])
    );
}

#[test]
fn deadline_is_inclusive() {
    let (g, a, z) = line();
    let route = shortest_route(&g, a, z).unwrap();
    let s = Stream::new(StreamId(0), a, z, 125, 500);
    let mut state = ScheduleState::new(g, 500);
    state.place(&s, &route).unwrap().unwrap();
    let mut sched = state.schedule(s.id).unwrap().clone();
    // Last hop: 1 tick transmission plus 1 tick propagation.
    sched.tx_start[0][2] = 498;
    assert!(validate(&rebuild(&state, vec![(s.clone(), sched.clone())])).is_empty());
    sched.tx_start[0][2] = 499;
    let v = validate(&rebuild(&state, vec![(s, sched)]));
    assert_eq!(kinds(&v), vec![ViolationKind::Deadline]);
}

#[test]
fn precedence_and_release() {
    let (state, mut entries) = two_streams();
    let sched = &mut entries[0].1;
    sched.tx_start[1][1] = sched.tx_end(1, 0);
    let v = validate(&rebuild(&state, entries.clone()));
    assert_eq!(kinds(&v), vec![ViolationKind::Precedence]);
    assert_eq!(v[0].frame, Some(1));

    let (state, mut entries) = two_streams();
    entries[0].1.offset = 10;
    let v = validate(&rebuild(&state, entries));
    assert_eq!(
        kinds(&v),
        vec![ViolationKind::Release, ViolationKind::Release]
    );
}

#[test]
fn structural_checks() {
    let (state, mut entries) = two_streams();
    entries[0].1.route = Route::new(entries[0].1.route.links[..2].to_vec());
    entries[0].1.tx_len.pop();
    for f in &mut entries[0].1.tx_start {
        f.pop();
    }
    assert_eq!(
        kinds(&validate(&rebuild(&state, entries))),
        vec![ViolationKind::RouteBroken]
    );

    let (state, mut entries) = two_streams();
    entries[1].1.tx_start.pop();
    assert_eq!(
        kinds(&validate(&rebuild(&state, entries))),
        vec![ViolationKind::MissingFrame]
    );

    let (state, mut entries) = two_streams();
    entries[1].0.period = 300;
    let v = validate(&rebuild(&state, entries));
    assert_eq!(kinds(&v), vec![ViolationKind::PeriodDivides]);
}

#[test]
fn stale_timeline_is_reported() {
    let (mut state, _) = two_streams();
    let link = state.schedules().next().unwrap().route.links[1];
    state.timelines_mut()[link.index()].force_insert(crate::placement::Reservation {
        start: 900,
        end: 910,
        stream: StreamId(77),
        frame: 0,
    });
    let v = validate(&state);
    assert_eq!(kinds(&v), vec![ViolationKind::TimelineMismatch]);
    assert_eq!(v[0].link, Some(link));
}

#[test]
fn display_lists_subject() {
    let v = Violation::new(ViolationKind::Deadline, "late")
        .stream(StreamId(3))
        .frame(2);
    assert_eq!(
        v.to_string(),
        "violation Deadline link=- stream=3 frame=2 late"
    );
}

fn shared_link() -> (Arc<NetworkGraph>, NodeId, NodeId) {
    let mut g = NetworkGraph::new();
    let a = g.add_end_station();
    let z = g.add_end_station();
    g.connect(a, z, LinkParams::default()).unwrap();
    (Arc::new(g), a, z)
}

#[test]
fn oracle_single_stream() {
    let (g, a, z) = line();
    let s = vec![Stream::new(StreamId(0), a, z, 125, 250)];
    let c = compute_candidates(&g, &s, 2).unwrap();
    let r = oracle_best(&g, &s, &c, None, OracleMode::Restricted).unwrap();
    assert_eq!(r.admitted, vec![StreamId(0)]);
    assert_eq!(r.throughput, Throughput::from_integer(4));
}

#[test]
fn oracle_two_on_one_link() {
    let (g, a, z) = shared_link();
    let s: Vec<Stream> = (0..2)
        .map(|i| Stream::new(StreamId(i), a, z, 125, 250))
        .collect();
    let c = compute_candidates(&g, &s, 2).unwrap();
    for mode in [OracleMode::Restricted, OracleMode::Tick] {
        let r = oracle_best(&g, &s, &c, None, mode).unwrap();
        assert_eq!(r.throughput, Throughput::from_integer(8), "{mode:?}");
        assert_eq!(r.admitted.len(), 2);
    }
}

/// Brute force over raw start ticks for two streams on one link with
/// h = period: every pair of start ticks is tried.
fn brute_two(s: &[Stream], link: &crate::model::Link) -> Throughput {
    let h = crate::model::hyper_period(&[s[0].period, s[1].period]).unwrap();
    let len = |x: &Stream| transmission_ticks(x.frame_size_bytes, link.rate_bits_per_tick).unwrap();
    let fits = |x: &Stream| h == x.period && len(x) + link.propagation <= x.period;
    let mut best = Throughput::from_integer(0);
    for x in s {
        if fits(x) && x.throughput() > best {
            best = x.throughput();
        }
    }
    if fits(&s[0]) && fits(&s[1]) {
        let (l0, l1) = (len(&s[0]), len(&s[1]));
        let both = (0..=h - l0 - link.propagation)
            .any(|a| (0..=h - l1 - link.propagation).any(|b| a + l0 <= b || b + l1 <= a));
        if both {
            best = s[0].throughput() + s[1].throughput();
        }
    }
    best
}

#[test]
fn tick_mode_matches_brute_force() {
    let (g, a, z) = shared_link();
    let link = g.links()[0].clone();
    for (f0, f1, p) in [
        (125, 125, 250),
        (1500, 1500, 25),
        (1500, 1000, 25),
        (1500, 125, 20),
        (1500, 1500, 13),
    ] {
        let s = vec![
            Stream::new(StreamId(0), a, z, f0, p),
            Stream::new(StreamId(1), a, z, f1, p),
        ];
        let c = compute_candidates(&g, &s, 2).unwrap();
        let tick = oracle_best(&g, &s, &c, None, OracleMode::Tick).unwrap();
        assert_eq!(tick.throughput, brute_two(&s, &link), "{f0} {f1} {p}");
        let restricted = oracle_best(&g, &s, &c, None, OracleMode::Restricted).unwrap();
        assert!(tick.throughput >= restricted.throughput);
    }
}

#[test]
fn oracle_rejects_large_instances() {
    let (g, a, z) = line();
    let s: Vec<Stream> = (0..7)
        .map(|i| Stream::new(StreamId(i), a, z, 125, 250))
        .collect();
    let c = compute_candidates(&g, &s, 2).unwrap();
    assert!(matches!(
        oracle_best(&g, &s, &c, None, OracleMode::Restricted),
        Err(crate::error::Error::InstanceTooLarge(_))
    ));
    assert!(matches!(
        oracle_best(&g, &s[..2], &c, None, OracleMode::Tick),
        Err(crate::error::Error::InstanceTooLarge(_))
    ));
}

/// Mixed periods on one 50 bit/tick link: placement at sub-cycle offsets
/// keeps the short stream's frames 125 ticks apart, leaving no 120-tick
/// gap. Free start ticks can push its second frame late instead.
#[test]
fn tick_mode_beats_restricted_with_mixed_periods() {
    let mut g = NetworkGraph::new();
    let a = g.add_end_station();
    let z = g.add_end_station();
    let p = LinkParams {
        rate_bits_per_tick: 50,
        ..LinkParams::default()
    };
    g.connect(a, z, p).unwrap();
    let g = Arc::new(g);
    let long = Stream::new(StreamId(0), a, z, 750, 250);
    let short = Stream::new(StreamId(1), a, z, 250, 125);
    let s = vec![long.clone(), short.clone()];
    let c = compute_candidates(&g, &s, 2).unwrap();
    let restricted = oracle_best(&g, &s, &c, None, OracleMode::Restricted).unwrap();
    let tick = oracle_best(&g, &s, &c, None, OracleMode::Tick).unwrap();
    assert_eq!(restricted.throughput, Throughput::from_integer(24));
    assert_eq!(tick.throughput, Throughput::from_integer(40));

    // Witness for the tick result.
    let sched = |st: &Stream, len: Tick, starts: Vec<Tick>| StreamSchedule {
        stream: st.id,
        route: Route::new(vec![crate::model::LinkId(0)]),
        offset: 0,
        tx_len: vec![len],
        tx_start: starts.into_iter().map(|t| vec![t]).collect(),
    };
    let state = ScheduleState::from_schedules(
        g,
        250,
        125,
        [
            (long.clone(), sched(&long, 120, vec![40])),
            (short.clone(), sched(&short, 40, vec![0, 209])),
        ],
    )
    .unwrap();
    assert_eq!(validate(&state), vec![]);
}
