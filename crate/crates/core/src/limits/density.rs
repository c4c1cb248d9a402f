//! Densities of `A ⊆ [0,N)` read on the positions `1..N`; element 0 is ignored.

use serde::Serialize;

use crate::intset::IntSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    Schnirelmann,
    Asymptotic,
    Banach,
    NestedTensor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityPoint {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub method: DensityMethod,
    pub lower: f64,
    pub upper: f64,
    /// Bound on the error from reading windows inside the prefix only.
    pub slack: f64,
    /// Distance between the reported extremum and the last trace value.
    pub limit_gap: f64,
    pub trace: Vec<DensityPoint>,
}

impl DensityReport {
    fn flat(method: DensityMethod, value: f64, trace: Vec<DensityPoint>) -> Self {
        DensityReport {
            method,
            lower: value,
            upper: value,
            slack: 0.0,
            limit_gap: 0.0,
            trace,
        }
    }
}

/// `counts[n] = |A ∩ [1,n]|` for `n = 0..N-1`.
fn prefix_counts(a: &IntSet) -> Vec<usize> {
    let mut counts = Vec::with_capacity(a.bound());
    counts.push(0);
    for n in 1..a.bound() {
        counts.push(counts[n - 1] + usize::from(a.contains(n)));
    }
    counts
}

/// Largest window length used for Banach densities: `⌊√(N−1)⌋`, at least 1.
pub fn banach_window_cap(bound: usize) -> usize {
    (bound.saturating_sub(1) as f64).sqrt().floor().max(1.0) as usize
}

/// `inf_n |A∩[1,n]|/n` over `1 ≤ n < N`.
pub fn schnirelmann(a: &IntSet) -> DensityReport {
    let counts = prefix_counts(a);
    let trace: Vec<DensityPoint> = (1..counts.len())
        .map(|n| {
            let r = counts[n] as f64 / n as f64;
            DensityPoint { n, lower: r, upper: r }
        })
        .collect();
    let value = trace.iter().map(|p| p.lower).fold(f64::INFINITY, f64::min);
    DensityReport::flat(DensityMethod::Schnirelmann, if trace.is_empty() { 0.0 } else { value }, trace)
}

/// Liminf/limsup of the counting ratios, read as in [`super::liminf_limsup_nested`].
pub fn asymptotic_density_bounds(a: &IntSet) -> DensityReport {
    let counts = prefix_counts(a);
    let m = counts.len() - 1;
    if m == 0 {
        return DensityReport::flat(DensityMethod::Asymptotic, 0.0, Vec::new());
    }
    let ratios: Vec<f64> = (1..=m).map(|n| counts[n] as f64 / n as f64).collect();
    let seq = super::PrefixSequence { values: ratios };
    let nested = super::liminf_limsup_nested(&seq);
    let trace = nested
        .trace
        .iter()
        .map(|p| DensityPoint {
            n: p.n,
            lower: p.inf,
            upper: p.sup,
        })
        .collect();
    DensityReport {
        method: DensityMethod::Asymptotic,
        lower: nested.liminf,
        upper: nested.limsup,
        slack: 0.0,
        limit_gap: 0.0,
        trace,
    }
}

/// Sliding-window extrema `a̲_k, ā_k` over windows `[x+1, x+k] ⊆ [1, N)`.
///
/// Upper is `inf_k ā_k/k`, lower is `sup_k a̲_k/k`, for `k ≤ ⌊√(N−1)⌋`.
pub fn banach_density(a: &IntSet) -> DensityReport {
    let counts = prefix_counts(a);
    let m = counts.len() - 1;
    if m == 0 {
        return DensityReport::flat(DensityMethod::Banach, 0.0, Vec::new());
    }
    let kmax = banach_window_cap(a.bound()).min(m);
    let trace: Vec<DensityPoint> = (1..=kmax)
        .map(|k| {
            let (lo, hi) = (0..=m - k)
                .map(|x| counts[x + k] - counts[x])
                .fold((usize::MAX, 0), |(lo, hi), c| (lo.min(c), hi.max(c)));
            DensityPoint {
                n: k,
                lower: lo as f64 / k as f64,
                upper: hi as f64 / k as f64,
            }
        })
        .collect();
    let upper = trace.iter().map(|p| p.upper).fold(f64::INFINITY, f64::min);
    let lower = trace.iter().map(|p| p.lower).fold(0.0, f64::max);
    let last = trace[trace.len() - 1];
    DensityReport {
        method: DensityMethod::Banach,
        lower,
        upper,
        slack: 2.0 * kmax as f64 / m as f64,
        limit_gap: (last.upper - upper).max(lower - last.lower),
        trace,
    }
}

/// `min_{1≤k≤n} max_{1≤x≤m} |A∩[x+1,x+k]|/k` on the grid `n ≤ ⌊√(N−1)⌋`,
/// `m ≤ N−1−n_max`, with the max/min dual for the lower value.
///
/// Each inner sequence is monotone in `m` and each outer one monotone in `n`,
/// so the iterated limit on the grid is the corner value. The trace holds
/// `(n, lim_m)` for both duals.
pub fn banach_nested_tensor_formula(a: &IntSet) -> DensityReport {
    let counts = prefix_counts(a);
    let total = counts.len() - 1;
    let kmax = banach_window_cap(a.bound());
    if total <= kmax {
        return DensityReport::flat(DensityMethod::NestedTensor, 0.0, Vec::new());
    }
    let mcap = total - kmax;
    // Inner limits in m, then the running min/max over k.
    let mut trace = Vec::with_capacity(kmax);
    let (mut upper, mut lower) = (f64::INFINITY, 0.0f64);
    for k in 1..=kmax {
        let (mut lo, mut hi) = (usize::MAX, 0);
        for x in 1..=mcap {
            let c = counts[x + k] - counts[x];
            lo = lo.min(c);
            hi = hi.max(c);
        }
        upper = upper.min(hi as f64 / k as f64);
        lower = lower.max(lo as f64 / k as f64);
        trace.push(DensityPoint { n: k, lower, upper });
    }
    DensityReport {
        method: DensityMethod::NestedTensor,
        lower,
        upper,
        slack: 2.0 * kmax as f64 / total as f64,
        limit_gap: 0.0,
        trace,
    }
}
