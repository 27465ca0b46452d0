//! Fault-tolerant routing in binary hypercube networks.
//!
//! Two routers are provided: Chiu's unsafe-node router, which steers by the
//! safe / unsafe status of each neighbor, and Fault Avoidance Routing (FAR),
//! which scores every neighbor by its distance to the destination plus its
//! proximity to all faulty nodes and picks the cheapest one with a small
//! continuous Hopfield network. [`harness`] runs Monte Carlo experiments over
//! both and [`report`] writes plot-ready tables.

pub mod chiu;
pub mod error;
pub mod far;
pub mod harness;
pub mod report;
pub mod route;
pub mod safety;
pub mod seed;
pub mod topology;

pub use chiu::{chiu_route, chiu_step, ChiuStep};
pub use error::{Error, Result};
pub use far::{
    build_hopfield, far_argmin, far_cost, far_route, hopfield_energy, hopfield_run, DecisionMode,
    FarParams, FarRoute, HopTelemetry, HopfieldOutcome, HopfieldState,
};
pub use harness::{bfs_shortest, run_case, sweep, CaseSpec, CaseStats, Execution, RouterKind};
pub use report::{emit_results, OutputFormat, ResultRow};
pub use route::{RouteStatus, RoutingOutcome};
pub use safety::{classify, FaultMap, NodeStatus, SafetyClassification, UnsafeRule};
pub use topology::{hamming_distance, DimSet, Hypercube, NodeId};
