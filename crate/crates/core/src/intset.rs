//! Finite sets of integers inside a declared bound `[0, N)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bitset::BitSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntSetError {
    #[error("bound must be at least 1")]
    ZeroBound,
    #[error("{value} is outside [0, {bound})")]
    OutOfBound { value: usize, bound: usize },
    #[error("bounds differ: {0} vs {1}")]
    BoundMismatch(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntSet {
    bits: BitSet,
}

impl IntSet {
    pub fn empty(bound: usize) -> Result<Self, IntSetError> {
        if bound == 0 {
            return Err(IntSetError::ZeroBound);
        }
        Ok(IntSet {
            bits: BitSet::new(bound),
        })
    }

    pub fn full(bound: usize) -> Result<Self, IntSetError> {
        if bound == 0 {
            return Err(IntSetError::ZeroBound);
        }
        Ok(IntSet {
            bits: BitSet::full(bound),
        })
    }

    pub fn from_values<I: IntoIterator<Item = usize>>(bound: usize, values: I) -> Result<Self, IntSetError> {
        let mut s = IntSet::empty(bound)?;
        for v in values {
            s.insert(v)?;
        }
        Ok(s)
    }

    /// `{ x < bound : pred(x) }`.
    pub fn from_fn(bound: usize, pred: impl Fn(usize) -> bool) -> Result<Self, IntSetError> {
        IntSet::from_values(bound, (0..bound).filter(|x| pred(*x)))
    }

    pub fn from_bits(bits: BitSet) -> Result<Self, IntSetError> {
        if bits.len() == 0 {
            return Err(IntSetError::ZeroBound);
        }
        Ok(IntSet { bits })
    }

    pub fn bound(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Values at or above the bound are never members.
    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn insert(&mut self, v: usize) -> Result<(), IntSetError> {
        if v >= self.bound() {
            return Err(IntSetError::OutOfBound { value: v, bound: self.bound() });
        }
        self.bits.insert(v);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    fn same_bound(&self, other: &IntSet) -> Result<(), IntSetError> {
        if self.bound() != other.bound() {
            return Err(IntSetError::BoundMismatch(self.bound(), other.bound()));
        }
        Ok(())
    }

    pub fn union(&self, other: &IntSet) -> Result<IntSet, IntSetError> {
        self.same_bound(other)?;
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Ok(IntSet { bits })
    }

    pub fn intersection(&self, other: &IntSet) -> Result<IntSet, IntSetError> {
        self.same_bound(other)?;
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Ok(IntSet { bits })
    }

    pub fn difference(&self, other: &IntSet) -> Result<IntSet, IntSetError> {
        self.same_bound(other)?;
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Ok(IntSet { bits })
    }

    pub fn complement(&self) -> IntSet {
        IntSet {
            bits: self.bits.complement(),
        }
    }

    pub fn is_subset(&self, other: &IntSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Same members, larger bound.
    pub fn widened(&self, bound: usize) -> Result<IntSet, IntSetError> {
        if let Some(max) = self.iter().last() {
            if max >= bound {
                return Err(IntSetError::OutOfBound { value: max, bound });
            }
        }
        IntSet::from_values(bound, self.iter())
    }

    /// Compact listing with runs, e.g. `0,2,5-9`.
    pub fn to_list_string(&self) -> String {
        let mut parts = Vec::new();
        let mut it = self.iter().peekable();
        while let Some(start) = it.next() {
            let mut end = start;
            while it.peek() == Some(&(end + 1)) {
                end = it.next().unwrap_or(end);
            }
            parts.push(match end - start {
                0 => start.to_string(),
                1 => format!("{start},{end}"),
                _ => format!("{start}-{end}"),
            });
        }
        parts.join(",")
    }
}

impl fmt::Debug for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntSet(N={}, {{{}}})", self.bound(), self.to_list_string())
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    bound: usize,
    members: Vec<usize>,
}

impl Serialize for IntSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            bound: self.bound(),
            members: self.iter().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        IntSet::from_values(w.bound, w.members).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert!(IntSet::empty(0).is_err());
        let mut s = IntSet::from_values(10, [1, 3, 4, 5, 9]).unwrap();
        assert_eq!(s.len(), 5);
        assert!(!s.contains(10));
        assert!(s.insert(10).is_err());
        assert_eq!(s.to_list_string(), "1,3-5,9");
        assert_eq!(s.complement().to_list_string(), "0,2,6-8");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"bound":10,"members":[1,3,4,5,9]}"#);
        let back: IntSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<IntSet>(r#"{"bound":3,"members":[4]}"#).is_err());
        let other = IntSet::from_values(11, [1]).unwrap();
        assert!(s.union(&other).is_err());
    }
}
