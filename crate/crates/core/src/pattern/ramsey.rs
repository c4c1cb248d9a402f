//! Ramsey-type extraction built on the witness search.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::search::{search_witness, SearchOptions};
use super::{PatternError, PatternSpec, Result, RoleGround, Surjection};
use crate::tensor_set::TensorSet;

fn square_side(x: &TensorSet) -> Result<usize> {
    let n = x.dims()[0];
    if x.dims().iter().any(|d| *d != n) {
        return Err(PatternError::ShapeMismatch(format!(
            "expected a cube [0,N)^k, got dims {:?}",
            x.dims()
        )));
    }
    Ok(n)
}

fn absent_on_exhaustion<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(PatternError::NotFoundWithinBounds { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `H ⊆ [0,N)` with `|H| = h` and `[H]^k ⊆ X`, listed increasingly.
pub fn ramsey_large(x: &TensorSet, h: usize, opts: &SearchOptions) -> Result<Option<Vec<usize>>> {
    let k = x.dim();
    let n = square_side(x)?;
    if h > n {
        return Err(PatternError::HTooLarge { h, n });
    }
    if h < k {
        return Err(PatternError::HTooSmall { h, k });
    }
    let spec = PatternSpec::new(
        vec![Surjection::constant(k)],
        vec![x.clone()],
        vec![RoleGround { size: n, ordered: true }],
    )?;
    Ok(absent_on_exhaustion(search_witness(&spec, h, opts))?.map(|w| w.sequences[0].clone()))
}

/// Pairwise disjoint increasing `H₁,…,H_k` of length `h` whose staggered
/// tuples `(h_{1,s₁},…,h_{k,s_k})`, `s₁ < … < s_k`, all lie in `X`.
pub fn multi_large(x: &TensorSet, h: usize, opts: &SearchOptions) -> Result<Option<Vec<Vec<usize>>>> {
    if h == 0 {
        return Err(PatternError::InvalidArgument("h must be at least 1".into()));
    }
    let k = x.dim();
    let grounds = x
        .dims()
        .iter()
        .map(|d| RoleGround { size: *d, ordered: true })
        .collect();
    let spec = PatternSpec::new(vec![Surjection::identity(k)], vec![x.clone()], grounds)?.with_strict_staggering(true);
    Ok(absent_on_exhaustion(search_witness(&spec, h, opts))?.map(|w| w.sequences))
}

pub type Coloring = Arc<dyn Fn(&[usize]) -> usize + Send + Sync>;

/// Colors are cached in a byte table when `N^k` is at most this.
const TABLE_CAP: u64 = 1 << 25;

/// Homogeneous `H` of size `h` for a coloring of increasing `k`-tuples of
/// `[0,N)` into `1..=r`. Colors are tried in increasing order. Colors are
/// range-checked up front whenever the table fits; beyond that an
/// out-of-range color simply matches no class.
pub fn find_homogeneous(
    coloring: Coloring,
    k: usize,
    r: usize,
    n: usize,
    h: usize,
    opts: &SearchOptions,
) -> Result<Option<(Vec<usize>, usize)>> {
    if r == 0 || r > u8::MAX as usize {
        return Err(PatternError::InvalidArgument(format!("r = {r} must lie in 1..=255")));
    }
    if k == 0 {
        return Err(PatternError::InvalidArgument("k must be at least 1".into()));
    }
    if h < k {
        return Err(PatternError::HTooSmall { h, k });
    }
    if h > n {
        return Err(PatternError::HTooLarge { h, n });
    }
    let table = color_table(coloring.as_ref(), k, r, n)?;
    let mut budget_hit = None;
    for color in 1..=r {
        let label = format!("color {color} of {r}");
        let class = match &table {
            Some(tab) => {
                let tab = Arc::clone(tab);
                TensorSet::from_predicate(&vec![n; k], label, move |t| {
                    increasing(t) && tab[rank(t, n)] as usize == color
                })
            }
            None => {
                let c = Arc::clone(&coloring);
                TensorSet::from_predicate(&vec![n; k], label, move |t| increasing(t) && c(t) == color)
            }
        };
        match ramsey_large(&class, h, opts) {
            Ok(Some(hs)) => return Ok(Some((hs, color))),
            Ok(None) => {}
            Err(e @ PatternError::BudgetExceeded { .. }) => budget_hit = Some(e),
            Err(e) => return Err(e),
        }
    }
    match budget_hit {
        Some(e) => Err(e),
        None => Ok(None),
    }
}

fn color_table(coloring: &(dyn Fn(&[usize]) -> usize + Send + Sync), k: usize, r: usize, n: usize) -> Result<Option<Arc<Vec<u8>>>> {
    if (n as u64).checked_pow(k as u32).map_or(true, |c| c > TABLE_CAP) {
        return Ok(None);
    }
    let mut tab = vec![0u8; n.pow(k as u32)];
    let mut t: Vec<usize> = (0..k).collect();
    while k <= n {
        let c = coloring(&t);
        if c == 0 || c > r {
            return Err(PatternError::InvalidColor { tuple: t, color: c, r });
        }
        tab[rank(&t, n)] = c as u8;
        if !next_combination(&mut t, n) {
            break;
        }
    }
    Ok(Some(Arc::new(tab)))
}

fn rank(t: &[usize], n: usize) -> usize {
    t.iter().fold(0, |acc, x| acc * n + x)
}

fn increasing(t: &[usize]) -> bool {
    t.windows(2).all(|w| w[0] < w[1])
}

/// Next increasing tuple in lexicographic order over `[0,n)`.
fn next_combination(t: &mut [usize], n: usize) -> bool {
    let k = t.len();
    for i in (0..k).rev() {
        if t[i] < n - k + i {
            t[i] += 1;
            for q in i + 1..k {
                t[q] = t[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyResult {
    /// 1-based indices into the prefix.
    pub indices: Vec<usize>,
    /// `1/n₁`: every later pair of chosen terms is within this distance.
    pub epsilon: f64,
    /// Largest `|a_{n_u} − a_{n_v}|` over `2 ≤ u < v ≤ t`.
    pub max_gap: f64,
}

/// Indices `n₁ < … < n_t` homogeneous for the class
/// `C₁ = { k < n < m : |a_n − a_m| ≤ 1/k }`.
pub fn cauchy_subsequence(prefix: &[f64], t: usize, opts: &SearchOptions) -> Result<CauchyResult> {
    let n = prefix.len();
    if t < 3 {
        return Err(PatternError::InvalidArgument("target length must be at least 3".into()));
    }
    if prefix.iter().any(|a| !a.is_finite()) {
        return Err(PatternError::InvalidArgument("sequence terms must be finite".into()));
    }
    if t > n {
        return Err(PatternError::NotFoundWithinPrefix { t, n });
    }
    // Element e of [0,N) stands for index e+1.
    let terms: Arc<Vec<f64>> = Arc::new(prefix.to_vec());
    let coloring: Coloring = Arc::new(move |tr: &[usize]| {
        let (k, a, b) = (tr[0] + 1, terms[tr[1]], terms[tr[2]]);
        if (a - b).abs() <= 1.0 / k as f64 {
            1
        } else {
            2
        }
    });
    let found = match find_homogeneous(coloring, 3, 2, n, t, opts) {
        Ok(found) => found,
        Err(PatternError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    match found {
        Some((h, 1)) => {
            let indices: Vec<usize> = h.iter().map(|e| e + 1).collect();
            let mut max_gap: f64 = 0.0;
            for u in 1..h.len() {
                for v in u + 1..h.len() {
                    max_gap = max_gap.max((prefix[h[u]] - prefix[h[v]]).abs());
                }
            }
            Ok(CauchyResult {
                epsilon: 1.0 / indices[0] as f64,
                indices,
                max_gap,
            })
        }
        _ => Err(PatternError::NotFoundWithinPrefix { t, n }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleavedVerdict {
    pub passed: bool,
    pub checks: u64,
    /// First failing `(i, j, k)`, 1-based.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<(usize, usize, usize)>,
}

/// Checks `(a_i, a_{2j}, a_{2j+1}, a_k) ∈ X` for all `i < 2j` and
/// `2j+1 < k ≤ len(a)`.
pub fn verify_interleaved(x: &TensorSet, a: &[usize]) -> Result<InterleavedVerdict> {
    if x.dim() != 4 {
        return Err(PatternError::ShapeMismatch(format!("X has dimension {}, expected 4", x.dim())));
    }
    if a.len() % 2 == 0 {
        return Err(PatternError::ShapeMismatch(format!(
            "sequence length {} is not of the form 2L+1",
            a.len()
        )));
    }
    if let Some(p) = a.windows(2).position(|w| w[0] >= w[1]) {
        return Err(PatternError::NotIncreasing(p + 2));
    }
    let side = x.dims().iter().copied().min().unwrap_or(0);
    if a.last().is_some_and(|v| *v >= side) {
        return Err(PatternError::ShapeMismatch("sequence leaves the box of X".into()));
    }
    let len = a.len();
    let at = |i: usize| a[i - 1];
    let mut checks = 0;
    for j in 1..=(len - 1) / 2 {
        for i in 1..2 * j {
            for k in 2 * j + 2..=len {
                checks += 1;
                if !x.contains(&[at(i), at(2 * j), at(2 * j + 1), at(k)]) {
                    return Ok(InterleavedVerdict {
                        passed: false,
                        checks,
                        violation: Some((i, j, k)),
                    });
                }
            }
        }
    }
    Ok(InterleavedVerdict {
        passed: true,
        checks,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_set::superdiagonal;

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    #[test]
    fn ramsey_large_examples() {
        let d = superdiagonal(2, 10);
        assert_eq!(ramsey_large(&d, 4, &opts()).unwrap(), Some(vec![0, 1, 2, 3]));
        let even_gap = TensorSet::from_predicate(&[16, 16], "gap even", |t| t[0] < t[1] && (t[1] - t[0]) % 2 == 0);
        let h = ramsey_large(&even_gap, 5, &opts()).unwrap().unwrap();
        assert_eq!(h.len(), 5);
        assert!(h.iter().all(|v| v % 2 == h[0] % 2));
        assert_eq!(ramsey_large(&TensorSet::empty(&[8, 8]), 2, &opts()).unwrap(), None);
        assert!(matches!(ramsey_large(&d, 11, &opts()), Err(PatternError::HTooLarge { .. })));
        assert!(matches!(ramsey_large(&d, 1, &opts()), Err(PatternError::HTooSmall { .. })));
    }

    #[test]
    fn multi_large_examples() {
        let full = TensorSet::full(&[10, 10]);
        let hs = multi_large(&full, 3, &opts()).unwrap().unwrap();
        assert_eq!(hs.len(), 2);
        let x = TensorSet::from_predicate(&[32, 32], "even<odd", |t| t[0] % 2 == 0 && t[1] % 2 == 1 && t[0] < t[1]);
        let hs = multi_large(&x, 4, &opts()).unwrap().unwrap();
        assert!(hs[0].iter().all(|v| v % 2 == 0));
        assert!(hs[1].iter().all(|v| v % 2 == 1));
        for s1 in 0..4 {
            for s2 in s1 + 1..4 {
                assert!(x.contains(&[hs[0][s1], hs[1][s2]]));
            }
        }
        let contradiction = TensorSet::from_predicate(&[12, 12], "x<y and x>y", |t| t[0] < t[1] && t[0] > t[1]);
        assert_eq!(multi_large(&contradiction, 2, &opts()).unwrap(), None);
    }

    #[test]
    fn homogeneous_examples() {
        let one: Coloring = Arc::new(|_: &[usize]| 1);
        assert_eq!(find_homogeneous(one, 2, 1, 10, 4, &opts()).unwrap(), Some((vec![0, 1, 2, 3], 1)));
        let parity: Coloring = Arc::new(|t: &[usize]| 1 + (t[1] - t[0]) % 2);
        assert_eq!(find_homogeneous(parity, 2, 2, 16, 4, &opts()).unwrap(), Some((vec![0, 2, 4, 6], 1)));
        let bad: Coloring = Arc::new(|_: &[usize]| 3);
        assert!(matches!(find_homogeneous(bad, 2, 2, 6, 3, &opts()), Err(PatternError::InvalidColor { .. })));
    }

    #[test]
    fn cauchy_examples() {
        let constant = vec![0.5; 20];
        let r = cauchy_subsequence(&constant, 5, &opts()).unwrap();
        assert_eq!(r.indices, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.max_gap, 0.0);
        assert_eq!(r.epsilon, 1.0);

        let alt: Vec<f64> = (1..=64).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = cauchy_subsequence(&alt, 5, &opts()).unwrap();
        // n₁ is unconstrained by C₁; the terms after it share a parity.
        assert_eq!(r.indices, vec![1, 2, 4, 6, 8]);
        assert!(r.indices[1..].iter().all(|i| i % 2 == 0));
        assert_eq!(r.max_gap, 0.0);

        let harmonic: Vec<f64> = (1..=128).map(|n| 1.0 / n as f64).collect();
        let r = cauchy_subsequence(&harmonic, 5, &opts()).unwrap();
        for u in 1..5 {
            for v in u + 1..5 {
                let gap = (harmonic[r.indices[u] - 1] - harmonic[r.indices[v] - 1]).abs();
                assert!(gap <= r.epsilon);
            }
        }
        assert!(matches!(cauchy_subsequence(&harmonic[..3], 5, &opts()), Err(PatternError::NotFoundWithinPrefix { .. })));
    }

    #[test]
    fn interleaved_examples() {
        let a: Vec<usize> = (0..7).collect();
        let full = TensorSet::full(&[8, 8, 8, 8]);
        assert!(verify_interleaved(&full, &a).unwrap().passed);
        let chain = TensorSet::from_predicate(&[8; 4], "w<x<y<z", |t| t[0] < t[1] && t[1] < t[2] && t[2] < t[3]);
        let v = verify_interleaved(&chain, &a).unwrap();
        assert!(v.passed);
        // L = 3: j=1: i∈{1}, k∈{4..7} → 4; j=2: i∈{1,2,3}, k∈{6,7} → 6; j=3: none.
        assert_eq!(v.checks, 10);
        let holed = TensorSet::from_predicate(&[8; 4], "missing one", |t| t != [2, 3, 4, 6]);
        assert_eq!(verify_interleaved(&holed, &a).unwrap().violation, Some((3, 2, 7)));
        assert!(verify_interleaved(&full, &[3, 1, 2]).is_err());
        assert!(verify_interleaved(&superdiagonal(2, 4), &[0, 1, 2]).is_err());
    }
}
