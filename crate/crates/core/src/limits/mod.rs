//! Computable sides of limit statements on finite prefixes.
//!
//! Sequences are indexed from 1 as `a_1, …, a_N`. Every estimate is taken
//! on the prefix at hand and reports a trace so convergence can be judged
//! from outside.

mod density;
mod double;

pub use density::{
    asymptotic_density_bounds, banach_density, banach_nested_tensor_formula, banach_window_cap, schnirelmann,
    DensityMethod, DensityPoint, DensityReport,
};
pub use double::{iterated_double_limit, riemann_double, Caps, DoubleLimit, LimitOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitError {
    #[error("sequence is empty")]
    Empty,
    #[error("a_{index} is not finite")]
    NonFinite { index: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("caps must be at least {min} on both axes, got ({n}, {m})")]
    Caps { n: usize, m: usize, min: usize },
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("no inner limit at n={n}: tail spread {spread:e} does not shrink")]
    NoInnerLimit { n: usize, spread: f64 },
    #[error("no outer limit: tail spread {spread:e} does not shrink")]
    NoOuterLimit { spread: f64 },
    #[error("cap too small on the {axis} axis: tail spread {spread:e} above {target:e}")]
    CapTooSmall { axis: Axis, spread: f64, target: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Inner,
    Outer,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Inner => "inner",
            Axis::Outer => "outer",
        })
    }
}

pub type Result<T> = std::result::Result<T, LimitError>;

/// A nonempty finite prefix of real values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixSequence {
    values: Vec<f64>,
}

impl PrefixSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LimitError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LimitError::NonFinite { index: i + 1 });
        }
        Ok(PrefixSequence { values })
    }

    /// `a_n = f(n)` for `n = 1..=len`.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        PrefixSequence::new((1..=len).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `a_n`, 1-based.
    pub fn get(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

/// Running min or max at the last index.
pub fn running_extrema_limit(seq: &PrefixSequence, mode: Extremum) -> f64 {
    let it = seq.values.iter().copied();
    match mode {
        Extremum::Min => it.fold(f64::INFINITY, f64::min),
        Extremum::Max => it.fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NestedPoint {
    pub n: usize,
    pub inf: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NestedLimits {
    pub liminf: f64,
    pub limsup: f64,
    /// Index `n` at which the estimates are read off.
    pub tail_start: usize,
    /// `(n, min_{n≤k≤N} a_k, max_{n≤k≤N} a_k)` for every `n`.
    pub trace: Vec<NestedPoint>,
}

/// Index where tail estimates are read: the start of the second half.
pub fn tail_start(len: usize) -> usize {
    len.div_ceil(2).max(1)
}

/// `b_n = min_{n≤k≤N} a_k` and the max analogue, read off at [`tail_start`].
pub fn liminf_limsup_nested(seq: &PrefixSequence) -> NestedLimits {
    let n = seq.len();
    let mut trace = vec![
        NestedPoint {
            n: 0,
            inf: f64::INFINITY,
            sup: f64::NEG_INFINITY,
        };
        n
    ];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in (0..n).rev() {
        lo = lo.min(seq.values[i]);
        hi = hi.max(seq.values[i]);
        trace[i] = NestedPoint { n: i + 1, inf: lo, sup: hi };
    }
    let start = tail_start(n);
    NestedLimits {
        liminf: trace[start - 1].inf,
        limsup: trace[start - 1].sup,
        tail_start: start,
        trace,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitPointCheck {
    pub holds: bool,
    /// Every `n` with `|a_n − ℓ| < eps`.
    pub indices: Vec<usize>,
}

/// Whether at least `count` terms lie within `eps` of `target`.
pub fn limit_point_check(seq: &PrefixSequence, target: f64, eps: f64, count: usize) -> Result<LimitPointCheck> {
    if count == 0 {
        return Err(LimitError::ZeroCount);
    }
    let indices: Vec<usize> = (1..=seq.len())
        .filter(|&n| (seq.values[n - 1] - target).abs() < eps)
        .collect();
    Ok(LimitPointCheck {
        holds: indices.len() >= count,
        indices,
    })
}
