//! Hypercube geometry.
//!
//! A node address is an unsigned integer whose bit `j` is coordinate `x_j`.
//! Two nodes are neighbors in dimension `j` iff their addresses differ only
//! in bit `j`, so neighbor lookup is an XOR and distance is a popcount.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIMENSION: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn bit(self, j: u32) -> bool {
        (self.0 >> j) & 1 == 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Number of differing address bits.
#[inline]
pub fn hamming_distance(x: NodeId, y: NodeId) -> u32 {
    (x.0 ^ y.0).count_ones()
}

/// A set of dimension indices, stored as a bit mask (bit `j` set iff `j` is
/// a member). Iteration is in ascending dimension order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DimSet(pub u32);

impl DimSet {
    pub const EMPTY: DimSet = DimSet(0);

    /// All dimensions `0..n`.
    pub fn all(n: u32) -> DimSet {
        if n >= 32 {
            DimSet(u32::MAX)
        } else {
            DimSet((1u32 << n) - 1)
        }
    }

    #[inline]
    pub fn contains(self, j: u32) -> bool {
        j < 32 && (self.0 >> j) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, j: u32) {
        self.0 |= 1 << j;
    }

    #[inline]
    pub fn remove(&mut self, j: u32) {
        self.0 &= !(1 << j);
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement_within(self, n: u32) -> DimSet {
        DimSet(!self.0 & DimSet::all(n).0)
    }

    pub fn iter(self) -> DimIter {
        DimIter(self.0)
    }
}

impl FromIterator<u32> for DimSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = DimSet::EMPTY;
        for j in iter {
            s.insert(j);
        }
        s
    }
}

impl IntoIterator for DimSet {
    type Item = u32;
    type IntoIter = DimIter;

    fn into_iter(self) -> DimIter {
        self.iter()
    }
}

pub struct DimIter(u32);

impl Iterator for DimIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let j = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(j)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for DimIter {}

/// An n-dimensional binary hypercube with `2^n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Hypercube {
    dimension: u32,
}

impl TryFrom<u32> for Hypercube {
    type Error = Error;

    fn try_from(dimension: u32) -> Result<Self> {
        Hypercube::new(dimension)
    }
}

impl From<Hypercube> for u32 {
    fn from(c: Hypercube) -> u32 {
        c.dimension
    }
}

impl Hypercube {
    pub fn new(dimension: u32) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&dimension) {
            return Err(Error::InvalidDimension(dimension));
        }
        Ok(Hypercube { dimension })
    }

    #[inline]
    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        1usize << self.dimension
    }

    #[inline]
    pub fn contains(&self, x: NodeId) -> bool {
        (x.0 as u64) < (1u64 << self.dimension)
    }

    pub fn check(&self, x: NodeId) -> Result<NodeId> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(Error::NodeOutOfRange {
                node: x,
                dimension: self.dimension,
            })
        }
    }

    /// Iterates all node addresses in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count() as u32).map(NodeId)
    }

    /// `x` with bit `j` flipped.
    pub fn neighbor_in_dim(&self, x: NodeId, j: u32) -> Result<NodeId> {
        if j >= self.dimension {
            return Err(Error::DimensionIndexOutOfRange {
                index: j,
                dimension: self.dimension,
            });
        }
        Ok(flip(x, j))
    }

    /// The `n` neighbors of `x`; element `j` is the neighbor across dimension `j`.
    pub fn neighbors(&self, x: NodeId) -> Vec<NodeId> {
        (0..self.dimension).map(|j| flip(x, j)).collect()
    }

    /// Dimensions along which a step from `c` moves one hop closer to `t`.
    pub fn towards_destination(&self, c: NodeId, t: NodeId) -> DimSet {
        DimSet((c.0 ^ t.0) & DimSet::all(self.dimension).0)
    }
}

/// `x` with bit `j` flipped, unchecked.
#[inline]
pub fn flip(x: NodeId, j: u32) -> NodeId {
    NodeId(x.0 ^ (1 << j))
}

/// The dimension separating two adjacent nodes, or `None` if they are not adjacent.
#[inline]
pub fn link_dimension(x: NodeId, y: NodeId) -> Option<u32> {
    let d = x.0 ^ y.0;
    (d.count_ones() == 1).then(|| d.trailing_zeros())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(v: u32) -> NodeId {
        NodeId(v)
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(n(0b0000), n(0b1111)), 4);
        assert_eq!(hamming_distance(n(0b1010), n(0b1010)), 0);
        assert_eq!(hamming_distance(n(0b0101), n(0b0110)), 2);
    }

    #[test]
    fn neighbor_in_dim_examples() {
        let c = Hypercube::new(3).unwrap();
        assert_eq!(c.neighbor_in_dim(n(0b000), 0).unwrap(), n(0b001));
        assert_eq!(c.neighbor_in_dim(n(0b001), 0).unwrap(), n(0b000));
        assert_eq!(c.neighbor_in_dim(n(0b101), 1).unwrap(), n(0b111));
        assert!(matches!(
            c.neighbor_in_dim(n(0), 3),
            Err(Error::DimensionIndexOutOfRange {
                index: 3,
                dimension: 3
            })
        ));
    }

    #[test]
    fn neighbors_examples() {
        let c = Hypercube::new(3).unwrap();
        assert_eq!(c.neighbors(n(0b000)), vec![n(0b001), n(0b010), n(0b100)]);
        assert_eq!(c.neighbors(n(0b111)), vec![n(0b110), n(0b101), n(0b011)]);
    }

    #[test]
    fn towards_destination_examples() {
        let c = Hypercube::new(3).unwrap();
        let d: Vec<u32> = c.towards_destination(n(0b000), n(0b011)).iter().collect();
        assert_eq!(d, vec![0, 1]);
        assert!(c.towards_destination(n(0b101), n(0b101)).is_empty());
        let d: Vec<u32> = c.towards_destination(n(0b000), n(0b111)).iter().collect();
        assert_eq!(d, vec![0, 1, 2]);
    }

    #[test]
    fn dimension_bounds() {
        assert_eq!(Hypercube::new(0), Err(Error::InvalidDimension(0)));
        assert_eq!(Hypercube::new(31), Err(Error::InvalidDimension(31)));
        assert_eq!(Hypercube::new(30).unwrap().node_count(), 1 << 30);
        let c = Hypercube::new(4).unwrap();
        assert!(c.check(n(15)).is_ok());
        assert!(c.check(n(16)).is_err());
    }

    #[test]
    fn dimset_ops() {
        let s: DimSet = [3u32, 0, 5].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert_eq!(s.len(), 3);
        assert_eq!(
            s.complement_within(4).iter().collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(link_dimension(n(0b100), n(0b110)), Some(1));
        assert_eq!(link_dimension(n(0b100), n(0b111)), None);
    }

    fn cube_and_nodes() -> impl Strategy<Value = (Hypercube, NodeId, NodeId, NodeId)> {
        (1u32..=12).prop_flat_map(|d| {
            let m = 1u32 << d;
            (Just(Hypercube::new(d).unwrap()), 0..m, 0..m, 0..m)
                .prop_map(|(c, a, b, e)| (c, NodeId(a), NodeId(b), NodeId(e)))
        })
    }

    proptest! {
        #[test]
        fn metric_properties((cube, x, y, z) in cube_and_nodes()) {
            prop_assert_eq!(hamming_distance(x, y), hamming_distance(y, x));
            prop_assert!(hamming_distance(x, z) <= hamming_distance(x, y) + hamming_distance(y, z));
            prop_assert!(hamming_distance(x, y) <= cube.dimension());
        }

        #[test]
        fn neighbor_properties((cube, x, y, _z) in cube_and_nodes()) {
            let nx = cube.neighbors(x);
            prop_assert_eq!(nx.len(), cube.dimension() as usize);
            for (j, &v) in nx.iter().enumerate() {
                prop_assert_eq!(hamming_distance(x, v), 1);
                prop_assert!(cube.contains(v));
                prop_assert_eq!(cube.neighbor_in_dim(v, j as u32).unwrap(), x);
                prop_assert!(cube.neighbors(v).contains(&x));
            }
            prop_assert_eq!(nx.contains(&y), cube.neighbors(y).contains(&x));
        }

        #[test]
        fn towards_destination_properties((cube, c, t, _z) in cube_and_nodes()) {
            let d = cube.towards_destination(c, t);
            prop_assert_eq!(d.len() as u32, hamming_distance(c, t));
            prop_assert_eq!(d.is_empty(), c == t);
            for j in d {
                prop_assert_eq!(hamming_distance(flip(c, j), t) + 1, hamming_distance(c, t));
            }
            for j in d.complement_within(cube.dimension()) {
                prop_assert_eq!(hamming_distance(flip(c, j), t), hamming_distance(c, t) + 1);
            }
        }
    }
}
