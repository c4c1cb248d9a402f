use super::{PatternError, Result, Surjection};

/// `j₁ ≤ … ≤ j_k` with `j_s < j_{s+1}` wherever `φ(s) ≥ φ(s+1)`.
pub fn is_admissible(phi: &Surjection, j: &[usize]) -> Result<bool> {
    if j.len() != phi.k() {
        return Err(PatternError::ArityMismatch {
            expected: phi.k(),
            got: j.len(),
        });
    }
    Ok(admissible_with(phi.values(), j, false))
}

pub(crate) fn admissible_with(values: &[usize], j: &[usize], strict: bool) -> bool {
    (0..j.len().saturating_sub(1)).all(|s| {
        if strict || values[s] >= values[s + 1] {
            j[s] < j[s + 1]
        } else {
            j[s] <= j[s + 1]
        }
    })
}

/// Lexicographic stream of admissible tuples in `[1..L]^k`.
pub struct Admissible {
    steps: Vec<bool>,
    limit: usize,
    current: Vec<usize>,
    done: bool,
}

impl Admissible {
    pub(crate) fn new(values: &[usize], limit: usize, strict: bool) -> Self {
        let k = values.len();
        let steps: Vec<bool> = (0..k.saturating_sub(1))
            .map(|s| strict || values[s] >= values[s + 1])
            .collect();
        let mut it = Admissible {
            steps,
            limit,
            current: vec![0; k],
            done: limit == 0 || k == 0,
        };
        if !it.done {
            it.done = !it.fill_from(0, 1);
        }
        it
    }

    /// Strict steps from position `p` to the end: the slack `j_p` needs below `L`.
    fn tail_strict(&self, p: usize) -> usize {
        self.steps[p..].iter().filter(|s| **s).count()
    }

    /// Sets positions `p..` to their least values given `current[p] = start`.
    fn fill_from(&mut self, p: usize, start: usize) -> bool {
        let mut v = start;
        for q in p..self.current.len() {
            if q > p {
                v = self.current[q - 1] + usize::from(self.steps[q - 1]);
            }
            if v + self.tail_strict(q) > self.limit {
                return false;
            }
            self.current[q] = v;
        }
        true
    }
}

impl Iterator for Admissible {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // Odometer: bump the rightmost position that still has room.
        let mut advanced = false;
        for p in (0..self.current.len()).rev() {
            let next = self.current[p] + 1;
            if next + self.tail_strict(p) <= self.limit && self.fill_from(p, next) {
                advanced = true;
                break;
            }
        }
        self.done = !advanced;
        Some(out)
    }
}

pub fn enumerate_admissible(phi: &Surjection, limit: usize) -> Admissible {
    Admissible::new(phi.values(), limit, false)
}

pub fn count_admissible(phi: &Surjection, limit: usize) -> u64 {
    enumerate_admissible(phi, limit).count() as u64
}

/// The ordering from the recursion `σ(1) = min{ t : j_t = min j }`, i.e. a
/// stable sort of positions by value. 1-based.
pub fn good_ordering(j: &[usize]) -> Result<Vec<usize>> {
    if j.is_empty() {
        return Err(PatternError::EmptyTuple);
    }
    let mut sigma: Vec<usize> = (1..=j.len()).collect();
    sigma.sort_by_key(|t| j[t - 1]);
    Ok(sigma)
}

pub fn is_good_ordering(sigma: &[usize], j: &[usize]) -> Result<bool> {
    if sigma.len() != j.len() {
        return Err(PatternError::ArityMismatch {
            expected: j.len(),
            got: sigma.len(),
        });
    }
    let mut seen = vec![false; sigma.len()];
    for s in sigma {
        if *s == 0 || *s > sigma.len() || seen[s - 1] {
            return Err(PatternError::NotAPermutation(sigma.to_vec()));
        }
        seen[s - 1] = true;
    }
    Ok(sigma.windows(2).all(|w| {
        let (a, b) = (j[w[0] - 1], j[w[1] - 1]);
        a <= b && (w[0] < w[1] || a < b)
    }))
}
