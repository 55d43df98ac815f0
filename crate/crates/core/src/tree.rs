//! Outcome paths and complete binary trees indexed by outcome prefixes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest supported depth. Trees this deep already hold 2^26 - 1 nodes.
pub const MAX_DEPTH: usize = 26;

/// A sequence of binary outcomes packed little-endian: bit `t - 1` holds `y_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Path {
    bits: u64,
    len: usize,
}

impl Path {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > 64 || (len < 64 && bits >> len != 0) {
            return Err(Error::InvalidArgument(format!("bits {bits:#x} do not fit length {len}")));
        }
        Ok(Path { bits, len })
    }

    pub fn empty() -> Self {
        Path::default()
    }

    pub fn from_outcomes(ys: &[bool]) -> Result<Self> {
        let mut p = Path::empty();
        for &y in ys {
            p = p.push(y)?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Outcome of round `t` (1-based).
    pub fn outcome(&self, t: usize) -> bool {
        assert!(t >= 1 && t <= self.len, "round {t} outside path of length {}", self.len);
        (self.bits >> (t - 1)) & 1 == 1
    }

    pub fn push(&self, y: bool) -> Result<Self> {
        if self.len >= 64 {
            return Err(Error::InvalidArgument("path longer than 64".into()));
        }
        Ok(Path { bits: self.bits | ((y as u64) << self.len), len: self.len + 1 })
    }

    /// The first `k` outcomes as an integer.
    pub fn prefix(&self, k: usize) -> u64 {
        assert!(k <= self.len);
        if k == 64 {
            self.bits
        } else {
            self.bits & ((1u64 << k) - 1)
        }
    }

    pub fn outcomes(&self) -> Vec<bool> {
        (1..=self.len).map(|t| self.outcome(t)).collect()
    }
}

/// Index of the node for round `t` and prefix `q`.
pub fn node_index(t: usize, q: u64) -> usize {
    ((1usize << (t - 1)) - 1) + q as usize
}

/// Complete binary tree of depth `n`: round `t` holds `2^(t-1)` nodes, one per outcome prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree<A>", bound(deserialize = "A: Deserialize<'de>"))]
pub struct BinaryTree<A> {
    depth: usize,
    nodes: Vec<A>,
}

#[derive(Deserialize)]
struct RawTree<A> {
    depth: usize,
    nodes: Vec<A>,
}

impl<A> TryFrom<RawTree<A>> for BinaryTree<A> {
    type Error = Error;
    fn try_from(r: RawTree<A>) -> Result<Self> {
        BinaryTree::from_vec(r.depth, r.nodes)
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::TooLarge { what: "tree depth", size: depth as f64, limit: MAX_DEPTH as f64 });
    }
    Ok(())
}

impl<A> BinaryTree<A> {
    pub fn from_vec(depth: usize, nodes: Vec<A>) -> Result<Self> {
        check_depth(depth)?;
        let want = (1usize << depth) - 1;
        if nodes.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: nodes.len() });
        }
        Ok(BinaryTree { depth, nodes })
    }

    /// Builds a tree from `f(t, q)` for every round `t` and prefix `q`.
    pub fn from_fn(depth: usize, mut f: impl FnMut(usize, u64) -> A) -> Result<Self> {
        check_depth(depth)?;
        let mut nodes = Vec::with_capacity((1usize << depth) - 1);
        for t in 1..=depth {
            for q in 0..(1u64 << (t - 1)) {
                nodes.push(f(t, q));
            }
        }
        Ok(BinaryTree { depth, nodes })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[A] {
        &self.nodes
    }

    pub fn get(&self, t: usize, q: u64) -> &A {
        assert!(t >= 1 && t <= self.depth && q < (1u64 << (t - 1)), "node ({t}, {q}) out of range");
        &self.nodes[node_index(t, q)]
    }

    pub fn set(&mut self, t: usize, q: u64, value: A) {
        assert!(t >= 1 && t <= self.depth && q < (1u64 << (t - 1)), "node ({t}, {q}) out of range");
        self.nodes[node_index(t, q)] = value;
    }

    /// Value at round `t` along `path`; only the first `t - 1` outcomes are read.
    pub fn at(&self, path: &Path, t: usize) -> &A {
        self.get(t, path.prefix(t - 1))
    }

    pub fn map<B>(&self, f: impl FnMut(&A) -> B) -> BinaryTree<B> {
        BinaryTree { depth: self.depth, nodes: self.nodes.iter().map(f).collect() }
    }
}

impl<A: Clone> BinaryTree<A> {
    pub fn constant(depth: usize, value: A) -> Result<Self> {
        Self::from_fn(depth, |_, _| value.clone())
    }

    /// The values seen along a full path of length `depth`.
    pub fn along(&self, path: &Path) -> Vec<A> {
        (1..=self.depth).map(|t| self.at(path, t).clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_bits_little_endian() {
        let p = Path::from_outcomes(&[true, false, true]).unwrap();
        assert_eq!(p.bits(), 0b101);
        assert_eq!(p.len(), 3);
        assert!(p.outcome(1) && !p.outcome(2) && p.outcome(3));
        assert_eq!(p.prefix(2), 0b01);
        assert_eq!(p.outcomes(), vec![true, false, true]);
        assert!(Path::new(0b100, 2).is_err());
    }

    #[test]
    fn node_layout() {
        assert_eq!(node_index(1, 0), 0);
        assert_eq!(node_index(2, 1), 2);
        assert_eq!(node_index(3, 0), 3);
        let t = BinaryTree::from_fn(3, |t, q| (t, q)).unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(t.nodes()[5], (3, 2));
    }

    #[test]
    fn write_read_round_trip_and_prefix_dependence() {
        let depth = 6;
        let mut tree = BinaryTree::constant(depth, 0u64).unwrap();
        for t in 1..=depth {
            for q in 0..(1u64 << (t - 1)) {
                tree.set(t, q, (t as u64) * 1000 + q);
            }
        }
        for t in 1..=depth {
            for q in 0..(1u64 << (t - 1)) {
                assert_eq!(*tree.get(t, q), (t as u64) * 1000 + q);
            }
        }
        for bits in 0..(1u64 << depth) {
            let path = Path::new(bits, depth).unwrap();
            for t in 1..=depth {
                // flipping outcomes at rounds >= t leaves the value unchanged
                let flipped = Path::new(bits ^ (((1u64 << depth) - 1) & !((1u64 << (t - 1)) - 1)), depth).unwrap();
                assert_eq!(tree.at(&path, t), tree.at(&flipped, t));
            }
        }
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(BinaryTree::from_vec(2, vec![1, 2, 3]).is_ok());
        assert!(BinaryTree::from_vec(2, vec![1, 2]).is_err());
        assert!(BinaryTree::<u8>::from_fn(MAX_DEPTH + 1, |_, _| 0).is_err());
    }

    #[test]
    fn serde_round_trip_validates() {
        let t = BinaryTree::from_vec(2, vec![0.5, 0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"depth":2,"nodes":[0.5,0.25,0.75]}"#);
        let back: BinaryTree<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<BinaryTree<f64>>(r#"{"depth":2,"nodes":[1.0]}"#).is_err());
    }
}
