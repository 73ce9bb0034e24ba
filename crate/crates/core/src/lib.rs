//! Incremental time-triggered scheduling and routing of periodic streams
//! on switched full-duplex networks.
//!
//! Time is counted in integer ticks of one microsecond. A [`ScheduleState`]
//! holds the admitted streams and the reservation table of every egress
//! port; planners from [`schedulers`] turn a [`RequestBatch`] into an
//! updated state, and [`verify::validate`] checks any state from scratch.
//!
//! ```
//! use std::sync::Arc;
//! use ttplan::{compute_candidates, generate, generate_streams, H2s, Planner, RequestBatch, ScheduleState, TopologySpec};
//!
//! let graph = Arc::new(generate(&TopologySpec::ring(4)).unwrap());
//! let streams = generate_streams(&graph, 10, 7).unwrap();
//! let candidates = compute_candidates(&graph, &streams, 4).unwrap();
//! let mut state = ScheduleState::new(graph, 1);
//! let result = H2s::default()
//!     .plan(&mut state, &RequestBatch::add_only(streams), &candidates)
//!     .unwrap();
//! assert_eq!(result.admitted.len() + result.rejected.len(), 10);
//! assert!(ttplan::verify::validate(&state).is_empty());
//! ```

pub mod error;
pub mod harness;
pub mod model;
pub mod placement;
pub mod routing;
pub mod schedulers;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    format_mbps, hyper_period, sub_cycle, LinkId, LinkParams, NetworkGraph, NodeId, NodeKind,
    RequestBatch, Stream, StreamId, Throughput, Tick,
};
pub use placement::{PortTimeline, Reservation, ScheduleState, StreamSchedule};
pub use routing::{
    candidate_routes, compute_candidates, shortest_route, CandidateMap, CandidateSet, Route,
};
pub use schedulers::{Celf, Edf, FirstFit, H2s, Offensive, PlanResult, Planner};
pub use topology::{generate, generate_streams, generate_streams_from, TopologyKind, TopologySpec};
pub use verify::{validate, Violation, ViolationKind};
