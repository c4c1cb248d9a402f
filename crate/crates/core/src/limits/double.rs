//! Iterated limits `lim_n lim_m a_{n,m}` detected from finite grids.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Axis, LimitError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub n: usize,
    pub m: usize,
}

pub const MIN_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitOptions {
    pub tol: f64,
    pub caps: Caps,
    /// Points sampled per tail quarter; `None` reads every index.
    /// Sparse sampling can miss oscillations whose period divides the spacing.
    pub samples: Option<usize>,
    /// Read tails through `2·s(2j) − s(j)`, which cancels a `c/j` error term.
    pub extrapolate: bool,
}

impl LimitOptions {
    pub fn new(tol: f64, caps: Caps) -> Self {
        LimitOptions {
            tol,
            caps,
            samples: None,
            extrapolate: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(LimitError::Tolerance(self.tol));
        }
        if self.caps.n < MIN_CAP || self.caps.m < MIN_CAP {
            return Err(LimitError::Caps {
                n: self.caps.n,
                m: self.caps.m,
                min: MIN_CAP,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerLimit {
    pub n: usize,
    pub value: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleLimit {
    pub value: f64,
    /// Tail spread of the outer sequence.
    pub spread: f64,
    /// Inner limits at every `n` the outer tail looked at, in increasing `n`.
    pub inner: Vec<InnerLimit>,
}

enum Tail {
    Settled { value: f64, spread: f64 },
    Shrinking { spread: f64 },
    Stuck { spread: f64 },
}

fn quarter(lo: usize, hi: usize, samples: Option<usize>) -> Vec<usize> {
    match samples {
        Some(s) if hi - lo + 1 > s && s >= 2 => {
            let mut pts: Vec<usize> = (0..s).map(|i| lo + (hi - lo) * i / (s - 1)).collect();
            pts.dedup();
            pts
        }
        _ => (lo..=hi).collect(),
    }
}

fn spread(vals: &[f64]) -> f64 {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Cauchy test on the last quarter of `1..=cap` at `tol/2`, compared with
/// the quarter before it to tell a slow tail from a non-convergent one.
fn tail<F>(cap: usize, opts: &LimitOptions, mut s: F) -> Result<Tail>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut read = |j: usize| -> Result<f64> {
        if opts.extrapolate {
            let j = j - j % 2;
            Ok(2.0 * s(j)? - s(j / 2)?)
        } else {
            s(j)
        }
    };
    let last: Vec<f64> = quarter(cap - cap / 4, cap, opts.samples)
        .into_iter()
        .map(&mut read)
        .collect::<Result<_>>()?;
    let width = spread(&last);
    if width <= opts.tol / 2.0 {
        return Ok(Tail::Settled {
            value: last[last.len() - 1],
            spread: width,
        });
    }
    let before: Vec<f64> = quarter(cap / 2, cap - cap / 4, opts.samples)
        .into_iter()
        .map(&mut read)
        .collect::<Result<_>>()?;
    Ok(if width < spread(&before) {
        Tail::Shrinking { spread: width }
    } else {
        Tail::Stuck { spread: width }
    })
}

/// Estimates `lim_n lim_m a(n, m)` for `1 ≤ n ≤ caps.n`, `1 ≤ m ≤ caps.m`.
///
/// Inner limits are computed only at the `n` the outer tail test reads.
pub fn iterated_double_limit(a: impl Fn(usize, usize) -> f64, opts: &LimitOptions) -> Result<DoubleLimit> {
    opts.validate()?;
    let mut inner: BTreeMap<usize, InnerLimit> = BTreeMap::new();
    let target = opts.tol / 2.0;
    let outer = tail(opts.caps.n, opts, |n| {
        if let Some(l) = inner.get(&n) {
            return Ok(l.value);
        }
        let found = match tail(opts.caps.m, opts, |m| Ok(a(n, m)))? {
            Tail::Settled { value, spread } => InnerLimit { n, value, spread },
            Tail::Shrinking { spread } => {
                return Err(LimitError::CapTooSmall {
                    axis: Axis::Inner,
                    spread,
                    target,
                })
            }
            Tail::Stuck { spread } => return Err(LimitError::NoInnerLimit { n, spread }),
        };
        let value = found.value;
        inner.insert(n, found);
        Ok(value)
    })?;
    match outer {
        Tail::Settled { value, spread } => Ok(DoubleLimit {
            value,
            spread,
            inner: inner.into_values().collect(),
        }),
        Tail::Shrinking { spread } => Err(LimitError::CapTooSmall {
            axis: Axis::Outer,
            spread,
            target,
        }),
        Tail::Stuck { spread } => Err(LimitError::NoOuterLimit { spread }),
    }
}

/// `lim_n lim_m (1/m) Σ_{k=−nm}^{nm} f(k/m)`, an estimate of `∫ f` over ℝ.
pub fn riemann_double(f: impl Fn(f64) -> f64, opts: &LimitOptions) -> Result<DoubleLimit> {
    iterated_double_limit(
        |n, m| {
            let span = (n * m) as i64;
            let m = m as f64;
            (-span..=span).map(|k| f(k as f64 / m)).sum::<f64>() / m
        },
        opts,
    )
}
