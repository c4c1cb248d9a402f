//! Φ-patterns: admissible index tuples, good orderings, witness checking
//! and witness search.

mod admissible;
mod ramsey;
mod search;
mod verify;

pub use admissible::{count_admissible, enumerate_admissible, good_ordering, is_admissible, is_good_ordering, Admissible};
pub use ramsey::{
    cauchy_subsequence, find_homogeneous, multi_large, ramsey_large, verify_interleaved, CauchyResult, Coloring,
    InterleavedVerdict,
};
pub use search::{search_witness, SearchOptions, Strategy};
pub use verify::{verify_witness, Certificate, Verdict, Violation, Witness};

pub use crate::tensor_set::superdiagonal;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tensor_set::{hex, TensorSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("values {values:?} are not onto 1..={m}")]
    NotSurjective { values: Vec<usize>, m: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("empty index tuple")]
    EmptyTuple,
    #[error("{0:?} is not a permutation of 1..=k")]
    NotAPermutation(Vec<usize>),
    #[error("inconsistent shapes: {0}")]
    ShapeMismatch(String),
    #[error("no witness of depth {depth} within the ground bounds")]
    NotFoundWithinBounds { depth: usize },
    #[error("search budget of {nodes} nodes exhausted")]
    BudgetExceeded { nodes: u64 },
    #[error("h = {h} exceeds the ground size {n}")]
    HTooLarge { h: usize, n: usize },
    #[error("h = {h} is smaller than the arity {k}")]
    HTooSmall { h: usize, k: usize },
    #[error("color {color} at {tuple:?} is outside 1..={r}")]
    InvalidColor { tuple: Vec<usize>, color: usize, r: usize },
    #[error("no Cauchy subsequence of length {t} within a prefix of length {n}")]
    NotFoundWithinPrefix { t: usize, n: usize },
    #[error("sequence is not strictly increasing at position {0}")]
    NotIncreasing(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, PatternError>;

/// A map from `{1..k}` onto `{1..m}`, stored 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surjection {
    m: usize,
    values: Vec<usize>,
}

impl Surjection {
    pub fn new(values: Vec<usize>, m: usize) -> Result<Self> {
        let onto = (1..=m).all(|l| values.contains(&l));
        if values.is_empty() || m == 0 || !onto || values.iter().any(|v| *v == 0 || *v > m) {
            return Err(PatternError::NotSurjective { values, m });
        }
        Ok(Surjection { m, values })
    }

    /// `m` is taken to be the largest value.
    pub fn from_values(values: Vec<usize>) -> Result<Self> {
        let m = values.iter().copied().max().unwrap_or(0);
        Surjection::new(values, m)
    }

    pub fn constant(k: usize) -> Self {
        Surjection { m: 1, values: vec![1; k] }
    }

    pub fn identity(k: usize) -> Self {
        Surjection {
            m: k,
            values: (1..=k).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoleGround {
    pub size: usize,
    /// Role sequences must be strictly increasing.
    pub ordered: bool,
}

#[derive(Clone, Debug)]
pub struct PatternSpec {
    phis: Vec<Surjection>,
    targets: Vec<TensorSet>,
    grounds: Vec<RoleGround>,
    strict: bool,
    excluded: Vec<usize>,
}

impl PatternSpec {
    pub fn new(phis: Vec<Surjection>, targets: Vec<TensorSet>, grounds: Vec<RoleGround>) -> Result<Self> {
        let first = phis
            .first()
            .ok_or_else(|| PatternError::ShapeMismatch("Φ is empty".into()))?;
        let (k, m) = (first.k(), first.m());
        if phis.iter().any(|p| p.k() != k || p.m() != m) {
            return Err(PatternError::ShapeMismatch("all φ must share arity and codomain".into()));
        }
        if targets.len() != phis.len() {
            return Err(PatternError::ShapeMismatch(format!(
                "{} targets for {} maps",
                targets.len(),
                phis.len()
            )));
        }
        if grounds.len() != m {
            return Err(PatternError::ShapeMismatch(format!("{} grounds for {m} roles", grounds.len())));
        }
        if grounds.iter().any(|g| g.size == 0) {
            return Err(PatternError::ShapeMismatch("empty role ground".into()));
        }
        for (p, x) in phis.iter().zip(&targets) {
            let want: Vec<usize> = p.values().iter().map(|l| grounds[l - 1].size).collect();
            if x.dims() != want.as_slice() {
                return Err(PatternError::ShapeMismatch(format!(
                    "target for {:?} has dims {:?}, expected {want:?}",
                    p.values(),
                    x.dims()
                )));
            }
        }
        Ok(PatternSpec {
            phis,
            targets,
            grounds,
            strict: false,
            excluded: Vec::new(),
        })
    }

    /// Requires `j₁ < … < j_k` for every map, not just at descents.
    pub fn with_strict_staggering(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Values no role may take.
    pub fn with_excluded(mut self, mut values: Vec<usize>) -> Self {
        values.sort_unstable();
        values.dedup();
        self.excluded = values;
        self
    }

    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn phis(&self) -> &[Surjection] {
        &self.phis
    }

    pub fn targets(&self) -> &[TensorSet] {
        &self.targets
    }

    pub fn grounds(&self) -> &[RoleGround] {
        &self.grounds
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn k(&self) -> usize {
        self.phis[0].k()
    }

    pub fn m(&self) -> usize {
        self.phis[0].m()
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update([u8::from(self.strict)]);
        for v in &self.excluded {
            h.update((*v as u64).to_le_bytes());
        }
        h.update(b"|");
        for g in &self.grounds {
            h.update((g.size as u64).to_le_bytes());
            h.update([u8::from(g.ordered)]);
        }
        for (p, x) in self.phis.iter().zip(&self.targets) {
            for v in p.values() {
                h.update((*v as u64).to_le_bytes());
            }
            h.update(x.digest().as_bytes());
        }
        hex(&h.finalize())
    }
}
