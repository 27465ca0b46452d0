//! Routing results shared by both routers, and the path audit.

use serde::{Deserialize, Serialize};

use crate::safety::FaultMap;
use crate::topology::{hamming_distance, link_dimension, NodeId};

/// Default hop budget for an `n`-cube.
pub fn default_max_hops(dimension: u32) -> usize {
    4 * dimension as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RouteStatus {
    Delivered,
    /// The router found no admissible next hop.
    Undeliverable,
    HopLimitExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingOutcome {
    /// Starts at the source; ends at the destination iff delivered.
    pub path: Vec<NodeId>,
    pub status: RouteStatus,
}

impl RoutingOutcome {
    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn delivered(&self) -> bool {
        self.status == RouteStatus::Delivered
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathViolation {
    Empty,
    WrongSource,
    WrongDestination,
    NotAdjacent {
        step: usize,
    },
    FaultyNode {
        step: usize,
    },
    /// Delivered in fewer hops than the shortest possible path.
    TooShort {
        hops: usize,
        lower_bound: usize,
    },
}

/// Checks the structural invariants of a routed path: starts at `source`,
/// every step crosses one link, no node is faulty, and (if delivered) it ends
/// at `dest` with at least `lower_bound` hops. Parity follows from the
/// adjacency check, since each hop flips exactly one address bit.
pub fn audit_path(
    outcome: &RoutingOutcome,
    source: NodeId,
    dest: NodeId,
    faults: &FaultMap,
    lower_bound: usize,
) -> Result<(), PathViolation> {
    let path = &outcome.path;
    let first = *path.first().ok_or(PathViolation::Empty)?;
    if first != source {
        return Err(PathViolation::WrongSource);
    }
    for (step, &x) in path.iter().enumerate() {
        if faults.is_faulty(x) {
            return Err(PathViolation::FaultyNode { step });
        }
        if step > 0 && link_dimension(path[step - 1], x).is_none() {
            return Err(PathViolation::NotAdjacent { step });
        }
        // bit-flip parity: hops so far and distance from source agree mod 2
        debug_assert_eq!(step as u32 % 2, hamming_distance(source, x) % 2);
    }
    if outcome.delivered() {
        if *path.last().unwrap() != dest {
            return Err(PathViolation::WrongDestination);
        }
        let hops = outcome.hops();
        if hops < lower_bound {
            return Err(PathViolation::TooShort { hops, lower_bound });
        }
    }
    Ok(())
}
