//! Fault maps and the safe / unsafe node classification.
//!
//! A non-faulty node becomes unsafe when enough of its neighbors are faulty
//! or already unsafe. The classification is the least fixed point of that
//! rule, computed by repeated sweeps starting from "every non-faulty node is
//! safe". Unsafe nodes with no safe neighbor are strongly unsafe; the rest
//! are ordinary unsafe.

use bitvec::prelude::*;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{flip, Hypercube, NodeId};

/// One bit per node, set iff the node is faulty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultMap {
    bits: BitVec<u64, Lsb0>,
    faulty: Vec<NodeId>,
}

impl FaultMap {
    pub fn fault_free(cube: Hypercube) -> Self {
        FaultMap {
            bits: bitvec![u64, Lsb0; 0; cube.node_count()],
            faulty: Vec::new(),
        }
    }

    /// Marks exactly the listed nodes faulty. Duplicates are ignored.
    pub fn from_list<I>(cube: Hypercube, faulty: I) -> Result<Self>
    where
        I: IntoIterator<Item = NodeId>,
    {
        let mut map = FaultMap::fault_free(cube);
        for x in faulty {
            cube.check(x)?;
            map.bits.set(x.index(), true);
        }
        map.faulty = map.bits.iter_ones().map(|i| NodeId(i as u32)).collect();
        Ok(map)
    }

    /// `count` distinct faulty nodes chosen uniformly outside `excluded`,
    /// deterministic in `seed`.
    pub fn random(cube: Hypercube, count: usize, seed: u64, excluded: &[NodeId]) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FaultMap::random_with(cube, count, &mut rng, excluded)
    }

    pub fn random_with<R: Rng + ?Sized>(
        cube: Hypercube,
        count: usize,
        rng: &mut R,
        excluded: &[NodeId],
    ) -> Result<Self> {
        let mut excl: Vec<u32> = Vec::with_capacity(excluded.len());
        for &x in excluded {
            excl.push(cube.check(x)?.0);
        }
        excl.sort_unstable();
        excl.dedup();
        let available = cube.node_count() - excl.len();
        if count > available {
            return Err(Error::InfeasibleFaultCount {
                requested: count,
                available,
            });
        }
        let picks = index::sample(rng, available, count);
        let nodes = picks.into_iter().map(|i| {
            // i-th node address that is not excluded
            let mut v = i as u32;
            for &e in &excl {
                if e <= v {
                    v += 1;
                } else {
                    break;
                }
            }
            NodeId(v)
        });
        FaultMap::from_list(cube, nodes)
    }

    #[inline]
    pub fn is_faulty(&self, x: NodeId) -> bool {
        self.bits[x.index()]
    }

    /// Faulty nodes in ascending address order.
    pub fn faulty_nodes(&self) -> &[NodeId] {
        &self.faulty
    }

    pub fn fault_count(&self) -> usize {
        self.faulty.len()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }
}

/// Which unsafe-node definition to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnsafeRule {
    /// Unsafe with at least 2 faulty neighbors, or at least 3 unsafe neighbors.
    #[default]
    Chiu,
    /// Unsafe with at least 2 neighbors that are faulty or unsafe (counted jointly).
    Lee,
}

impl UnsafeRule {
    /// Whether a non-faulty node with the given neighbor counts is unsafe.
    #[inline]
    pub fn fires(self, faulty_neighbors: u32, unsafe_neighbors: u32) -> bool {
        match self {
            UnsafeRule::Chiu => faulty_neighbors >= 2 || unsafe_neighbors >= 3,
            UnsafeRule::Lee => faulty_neighbors + unsafe_neighbors >= 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    Faulty,
    Safe,
    OrdinaryUnsafe,
    StronglyUnsafe,
}

impl NodeStatus {
    #[inline]
    pub fn is_unsafe(self) -> bool {
        matches!(
            self,
            NodeStatus::OrdinaryUnsafe | NodeStatus::StronglyUnsafe
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyClassification {
    cube: Hypercube,
    status: Vec<NodeStatus>,
    rule: UnsafeRule,
}

impl SafetyClassification {
    #[inline]
    pub fn status(&self, x: NodeId) -> NodeStatus {
        self.status[x.index()]
    }

    pub fn statuses(&self) -> &[NodeStatus] {
        &self.status
    }

    pub fn rule(&self) -> UnsafeRule {
        self.rule
    }

    pub fn cube(&self) -> Hypercube {
        self.cube
    }

    pub fn unsafe_nodes(&self) -> Vec<NodeId> {
        self.nodes_where(NodeStatus::is_unsafe)
    }

    pub fn nodes_where(&self, pred: impl Fn(NodeStatus) -> bool) -> Vec<NodeId> {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, &s)| pred(s))
            .map(|(i, _)| NodeId(i as u32))
            .collect()
    }
}

/// Classifies every node under `rule`.
pub fn classify(cube: Hypercube, faults: &FaultMap, rule: UnsafeRule) -> SafetyClassification {
    assert_eq!(faults.len(), cube.node_count(), "fault map size mismatch");
    let n = cube.dimension();
    let faulty_neighbors: Vec<u32> = cube
        .nodes()
        .map(|x| (0..n).filter(|&j| faults.is_faulty(flip(x, j))).count() as u32)
        .collect();

    // The unsafe set only grows, so sweeping until stable reaches the least
    // fixed point.
    let mut is_unsafe = vec![false; cube.node_count()];
    loop {
        let mut changed = false;
        for x in cube.nodes() {
            if faults.is_faulty(x) || is_unsafe[x.index()] {
                continue;
            }
            let unsafe_nbrs = (0..n).filter(|&j| is_unsafe[flip(x, j).index()]).count() as u32;
            if rule.fires(faulty_neighbors[x.index()], unsafe_nbrs) {
                is_unsafe[x.index()] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let status = cube
        .nodes()
        .map(|x| {
            if faults.is_faulty(x) {
                NodeStatus::Faulty
            } else if !is_unsafe[x.index()] {
                NodeStatus::Safe
            } else {
                let has_safe = (0..n).any(|j| {
                    let y = flip(x, j);
                    !faults.is_faulty(y) && !is_unsafe[y.index()]
                });
                if has_safe {
                    NodeStatus::OrdinaryUnsafe
                } else {
                    NodeStatus::StronglyUnsafe
                }
            }
        })
        .collect();

    SafetyClassification { cube, status, rule }
}
