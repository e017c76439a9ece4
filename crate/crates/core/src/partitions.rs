//! Integer partitions and compositions.
//!
//! A [`Partition`] is the common currency for nilpotent orbits of `GL_r`, for
//! the iterated highest-derivative partition of a multisegment and for the
//! covering Barbasch–Vogan dual.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    /// The partition of zero.
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    /// Builds a partition from parts that must already be weakly decreasing
    /// and positive.
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidPartition(format!("zero part in {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!(
                "parts not weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    /// Sorts arbitrary parts into a partition, dropping zeros.
    pub fn from_unsorted<I: IntoIterator<Item = u64>>(parts: I) -> Self {
        let mut parts: Vec<u64> = parts.into_iter().filter(|&p| p > 0).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    /// The one-part partition `(size)`, or the empty partition for zero.
    pub fn row(size: u64) -> Self {
        Self::from_unsorted([size])
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part `i` with implicit zero padding.
    pub fn part(&self, i: usize) -> u64 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Number of parts, `H(p)`.
    pub fn height(&self) -> usize {
        self.parts.len()
    }

    /// Largest part, `W(p) = H(p^T)`.
    pub fn width(&self) -> u64 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Conjugate Young diagram.
    pub fn transpose(&self) -> Self {
        let width = self.width() as usize;
        let mut cols = vec![0u64; width];
        for &p in &self.parts {
            for c in cols.iter_mut().take(p as usize) {
                *c += 1;
            }
        }
        Self { parts: cols }
    }

    /// Componentwise sum with `other` after zero padding.
    pub fn add(&self, other: &Self) -> Self {
        let len = self.parts.len().max(other.parts.len());
        let parts = (0..len).map(|i| self.part(i) + other.part(i)).collect();
        Self { parts }
    }

    /// Dominance order: every prefix sum of `self` is at most that of `other`.
    pub fn dominance_leq(&self, other: &Self) -> Result<bool> {
        if self.size() != other.size() {
            return Err(Error::IncomparableSizes(self.size(), other.size()));
        }
        let len = self.parts.len().max(other.parts.len());
        let (mut lhs, mut rhs) = (0u64, 0u64);
        for i in 0..len {
            lhs += self.part(i);
            rhs += other.part(i);
            if lhs > rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dominance as a partial ordering; `None` when incomparable.
    pub fn dominance_cmp(&self, other: &Self) -> Option<Ordering> {
        match (
            self.dominance_leq(other).ok()?,
            other.dominance_leq(self).ok()?,
        ) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    /// All partitions of `size`, in reverse lexicographic order starting at `(size)`.
    pub fn all_of(size: u64) -> PartitionIter {
        PartitionIter::new(size)
    }
}

/// Sum of partitions, zero padded to a common length.
pub fn sum<'a, I: IntoIterator<Item = &'a Partition>>(ps: I) -> Partition {
    ps.into_iter().fold(Partition::empty(), |acc, p| acc.add(p))
}

/// The column block `(n_alpha^a, b)` where `p = a * n_alpha + b` and `0 <= b < n_alpha`.
pub fn s_col(p: u64, n_alpha: u64) -> Partition {
    assert!(n_alpha >= 1, "column height must be positive");
    let (a, b) = (p / n_alpha, p % n_alpha);
    let mut parts = vec![n_alpha; a as usize];
    if b > 0 {
        parts.push(b);
    }
    Partition { parts }
}

/// Covering Barbasch–Vogan duality: the sum of the column blocks of every part.
pub fn bv_dual(p: &Partition, n_alpha: u64) -> Partition {
    p.parts
        .iter()
        .map(|&part| s_col(part, n_alpha))
        .fold(Partition::empty(), |acc, block| acc.add(&block))
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<u64>::deserialize(deserializer)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}

/// Iterator over the partitions of a fixed size.
#[derive(Clone, Debug)]
pub struct PartitionIter {
    next: Option<Vec<u64>>,
}

impl PartitionIter {
    fn new(size: u64) -> Self {
        let first = if size == 0 { Vec::new() } else { vec![size] };
        Self { next: Some(first) }
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let current = self.next.take()?;
        // Successor: find the rightmost part > 1, decrease it and refill the
        // tail greedily with parts no larger than the decreased value.
        let mut succ = current.clone();
        let mut freed = 0u64;
        while let Some(&1) = succ.last() {
            succ.pop();
            freed += 1;
        }
        if let Some(last) = succ.last_mut() {
            *last -= 1;
            let cap = *last;
            freed += 1;
            while freed > 0 {
                let take = freed.min(cap);
                succ.push(take);
                freed -= take;
            }
            self.next = Some(succ);
        }
        Some(Partition { parts: current })
    }
}

/// A sequence of positive integers where order matters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Composition {
    parts: Vec<u64>,
}

impl Composition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "zero part in composition {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// The partition obtained by sorting the parts.
    pub fn sorted(&self) -> Partition {
        Partition::from_unsorted(self.parts.iter().copied())
    }

    /// All compositions of `size`; there are `2^(size-1)` of them.
    pub fn all_of(size: u64) -> Vec<Composition> {
        if size == 0 {
            return vec![Composition { parts: Vec::new() }];
        }
        let cuts = size - 1;
        (0u64..1 << cuts)
            .map(|mask| {
                let mut parts = Vec::new();
                let mut run = 1;
                for bit in 0..cuts {
                    if mask >> bit & 1 == 1 {
                        parts.push(run);
                        run = 1;
                    } else {
                        run += 1;
                    }
                }
                parts.push(run);
                Composition { parts }
            })
            .collect()
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}
