//! Subsets of finite boxes `[0,N₁) × … × [0,N_k)`.
//!
//! Small sets (dimension ≤ 3, every side ≤ 64) are stored as bitsets; larger
//! ones stay lazy. Preimages of a target set under `Sum` or `Product` keep
//! the target so fibers can be computed by shifting.

use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::bitset::BitSet;

pub const MATERIALIZE_MAX_DIM: usize = 3;
pub const MATERIALIZE_MAX_SIDE: usize = 64;

type Predicate = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Sum,
    Product,
}

#[derive(Clone)]
enum Repr {
    Bits(BitSet),
    Lazy(Predicate),
    Preimage { target: BitSet, op: Op },
}

#[derive(Clone)]
pub struct TensorSet {
    dims: Vec<usize>,
    label: String,
    repr: Repr,
}

impl TensorSet {
    /// Builds from a predicate, materializing when the box is small.
    pub fn from_predicate(
        dims: &[usize],
        label: impl Into<String>,
        pred: impl Fn(&[usize]) -> bool + Send + Sync + 'static,
    ) -> Self {
        let mut set = TensorSet {
            dims: dims.to_vec(),
            label: label.into(),
            repr: Repr::Lazy(Arc::new(pred)),
        };
        if set.should_materialize() {
            set = set.materialized();
        }
        set
    }

    pub fn from_tuples<'a>(dims: &[usize], label: impl Into<String>, tuples: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let cells: usize = dims.iter().product();
        let mut bits = BitSet::new(cells);
        let mut set = TensorSet {
            dims: dims.to_vec(),
            label: label.into(),
            repr: Repr::Bits(BitSet::new(0)),
        };
        for t in tuples {
            if let Some(flat) = set.flat(t) {
                bits.insert(flat);
            }
        }
        set.repr = Repr::Bits(bits);
        set
    }

    pub fn empty(dims: &[usize]) -> Self {
        TensorSet::from_predicate(dims, "empty", |_| false)
    }

    pub fn full(dims: &[usize]) -> Self {
        TensorSet::from_predicate(dims, "full", |_| true)
    }

    /// `{ t ∈ [0,N)^k : t₁ + … + t_k ∈ A }` where `A ⊆ [0, target.len())`.
    pub fn sum_preimage(k: usize, side: usize, target: &BitSet) -> Self {
        TensorSet {
            dims: vec![side; k],
            label: format!("sum^-1(A), |A|={}", target.count()),
            repr: Repr::Preimage {
                target: target.clone(),
                op: Op::Sum,
            },
        }
    }

    /// `{ t ∈ [0,N)^k : t₁ · … · t_k ∈ A }`.
    pub fn product_preimage(k: usize, side: usize, target: &BitSet) -> Self {
        TensorSet {
            dims: vec![side; k],
            label: format!("prod^-1(A), |A|={}", target.count()),
            repr: Repr::Preimage {
                target: target.clone(),
                op: Op::Product,
            },
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.repr, Repr::Bits(_))
    }

    fn should_materialize(&self) -> bool {
        self.dims.len() <= MATERIALIZE_MAX_DIM && self.dims.iter().all(|d| *d <= MATERIALIZE_MAX_SIDE)
    }

    /// Bitset copy of the set; only for boxes that fit in memory.
    pub fn materialized(&self) -> TensorSet {
        if self.is_materialized() {
            return self.clone();
        }
        let cells: usize = self.dims.iter().product();
        let mut bits = BitSet::new(cells);
        let mut t = vec![0; self.dims.len()];
        for flat in 0..cells {
            self.unflat(flat, &mut t);
            if self.contains_in_box(&t) {
                bits.insert(flat);
            }
        }
        TensorSet {
            dims: self.dims.clone(),
            label: self.label.clone(),
            repr: Repr::Bits(bits),
        }
    }

    fn flat(&self, t: &[usize]) -> Option<usize> {
        if t.len() != self.dims.len() {
            return None;
        }
        let mut flat = 0;
        for (x, d) in t.iter().zip(&self.dims) {
            if x >= d {
                return None;
            }
            flat = flat * d + x;
        }
        Some(flat)
    }

    fn unflat(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
    }

    /// Membership; tuples outside the box (or of the wrong length) are not members.
    pub fn contains(&self, t: &[usize]) -> bool {
        match self.flat(t) {
            None => false,
            Some(flat) => match &self.repr {
                Repr::Bits(b) => b.contains(flat),
                _ => self.contains_in_box(t),
            },
        }
    }

    fn contains_in_box(&self, t: &[usize]) -> bool {
        match &self.repr {
            Repr::Bits(b) => b.contains(self.flat(t).unwrap_or(usize::MAX)),
            Repr::Lazy(p) => p(t),
            Repr::Preimage { target, op } => match combine(*op, t) {
                Some(v) => target.contains(v),
                None => false,
            },
        }
    }

    /// `{ v : (prefix, v) ∈ X }` as a bitset over the last axis.
    pub fn fiber(&self, prefix: &[usize]) -> BitSet {
        let k = self.dims.len();
        let side = self.dims[k - 1];
        if prefix.len() + 1 != k || prefix.iter().zip(&self.dims).any(|(x, d)| x >= d) {
            return BitSet::new(side);
        }
        match &self.repr {
            Repr::Bits(b) => {
                let mut base = 0;
                for (x, d) in prefix.iter().zip(&self.dims) {
                    base = base * d + x;
                }
                base *= side;
                let mut out = BitSet::new(side);
                for v in 0..side {
                    if b.contains(base + v) {
                        out.insert(v);
                    }
                }
                out
            }
            Repr::Preimage { target, op: Op::Sum } => {
                let s: usize = prefix.iter().sum();
                let shifted = target.shifted_down(s.min(target.len()));
                let mut out = BitSet::new(side);
                for v in shifted.iter().take_while(|v| *v < side) {
                    out.insert(v);
                }
                out
            }
            Repr::Preimage { target, op: Op::Product } => {
                let mut out = BitSet::new(side);
                match combine(Op::Product, prefix) {
                    Some(0) if target.contains(0) => out = BitSet::full(side),
                    Some(p) if p > 0 => {
                        for v in target.iter().filter(|a| a % p == 0).map(|a| a / p) {
                            out.insert(v);
                        }
                    }
                    _ => {}
                }
                out
            }
            _ => {
                let mut t = prefix.to_vec();
                t.push(0);
                let mut out = BitSet::new(side);
                for v in 0..side {
                    t[k - 1] = v;
                    if self.contains_in_box(&t) {
                        out.insert(v);
                    }
                }
                out
            }
        }
    }

    /// Content digest: exact for bitsets and preimages, label-based for lazy predicates.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.dims {
            h.update((*d as u64).to_le_bytes());
        }
        match &self.repr {
            Repr::Bits(b) => {
                h.update(b"bits");
                for w in b.words() {
                    h.update(w.to_le_bytes());
                }
            }
            Repr::Preimage { target, op } => {
                h.update(if *op == Op::Sum { b"sum " } else { b"prod" });
                h.update((target.len() as u64).to_le_bytes());
                for w in target.words() {
                    h.update(w.to_le_bytes());
                }
            }
            Repr::Lazy(_) => {
                h.update(b"lazy");
                h.update(self.label.as_bytes());
            }
        }
        hex(&h.finalize())
    }
}

fn combine(op: Op, t: &[usize]) -> Option<usize> {
    match op {
        Op::Sum => t.iter().try_fold(0usize, |a, x| a.checked_add(*x)),
        Op::Product => t.iter().try_fold(1usize, |a, x| a.checked_mul(*x)),
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl fmt::Debug for TensorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorSet")
            .field("dims", &self.dims)
            .field("label", &self.label)
            .field("materialized", &self.is_materialized())
            .finish()
    }
}

/// `Δ⁺_k = { (n₁,…,n_k) : n₁ < … < n_k }` over `[0,N)^k`.
pub fn superdiagonal(k: usize, n: usize) -> TensorSet {
    TensorSet::from_predicate(&vec![n; k], format!("superdiagonal({k},{n})"), |t| {
        t.windows(2).all(|w| w[0] < w[1])
    })
}
