//! Chiu's unsafe-node router.
//!
//! Each step consults only the current node's neighbors and their safety
//! status. Candidates are tried in a fixed priority ladder; inside one rung
//! the lowest dimension wins.

use crate::error::{Error, Result};
use crate::route::{RouteStatus, RoutingOutcome};
use crate::safety::{NodeStatus, SafetyClassification};
use crate::topology::{flip, hamming_distance, DimSet, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiuStep {
    Deliver,
    Next(NodeId),
    /// No admissible neighbor.
    Error,
}

/// The rung of the priority ladder that produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rung {
    Deliver,
    CloserSafe,
    CloserOrdinaryUnsafe,
    CloserStronglyUnsafe,
    SidewaysSafe,
    SidewaysOrdinaryUnsafe,
    Error,
}

fn first_with(
    c: NodeId,
    dims: DimSet,
    cls: &SafetyClassification,
    want: NodeStatus,
) -> Option<NodeId> {
    dims.iter()
        .map(|j| flip(c, j))
        .find(|&y| cls.status(y) == want)
}

/// One routing decision at `c` for destination `t`, with the rung that fired.
pub fn chiu_decide(c: NodeId, t: NodeId, cls: &SafetyClassification) -> Result<(ChiuStep, Rung)> {
    let cube = cls.cube();
    for x in [c, t] {
        cube.check(x)?;
        if cls.status(x) == NodeStatus::Faulty {
            return Err(Error::FaultyEndpoint(x));
        }
    }
    let h = hamming_distance(c, t);
    if h == 0 {
        return Ok((ChiuStep::Deliver, Rung::Deliver));
    }
    let closer = cube.towards_destination(c, t);
    let sideways = closer.complement_within(cube.dimension());
    let c_strong = cls.status(c) == NodeStatus::StronglyUnsafe;

    let ladder = [
        (closer, NodeStatus::Safe, Rung::CloserSafe, true),
        (
            closer,
            NodeStatus::OrdinaryUnsafe,
            Rung::CloserOrdinaryUnsafe,
            true,
        ),
        (
            closer,
            NodeStatus::StronglyUnsafe,
            Rung::CloserStronglyUnsafe,
            c_strong || h <= 2,
        ),
        (sideways, NodeStatus::Safe, Rung::SidewaysSafe, true),
        (
            sideways,
            NodeStatus::OrdinaryUnsafe,
            Rung::SidewaysOrdinaryUnsafe,
            true,
        ),
    ];
    for (dims, want, rung, enabled) in ladder {
        if !enabled {
            continue;
        }
        if let Some(y) = first_with(c, dims, cls, want) {
            return Ok((ChiuStep::Next(y), rung));
        }
    }
    Ok((ChiuStep::Error, Rung::Error))
}

pub fn chiu_step(c: NodeId, t: NodeId, cls: &SafetyClassification) -> Result<ChiuStep> {
    chiu_decide(c, t, cls).map(|(s, _)| s)
}

/// Routes from `source` to `dest`, giving up after `max_hops` hops.
pub fn chiu_route(
    source: NodeId,
    dest: NodeId,
    cls: &SafetyClassification,
    max_hops: usize,
) -> Result<RoutingOutcome> {
    chiu_route_traced(source, dest, cls, max_hops, |_, _| {})
}

/// As [`chiu_route`], calling `observe(current, rung)` for every decision.
pub fn chiu_route_traced(
    source: NodeId,
    dest: NodeId,
    cls: &SafetyClassification,
    max_hops: usize,
    mut observe: impl FnMut(NodeId, Rung),
) -> Result<RoutingOutcome> {
    let mut path = vec![source];
    let mut current = source;
    loop {
        let (step, rung) = chiu_decide(current, dest, cls)?;
        observe(current, rung);
        let status = match step {
            ChiuStep::Deliver => RouteStatus::Delivered,
            ChiuStep::Error => RouteStatus::Undeliverable,
            ChiuStep::Next(_) if path.len() > max_hops => RouteStatus::HopLimitExceeded,
            ChiuStep::Next(y) => {
                path.push(y);
                current = y;
                continue;
            }
        };
        return Ok(RoutingOutcome { path, status });
    }
}
