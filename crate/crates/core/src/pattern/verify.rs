use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::admissible::Admissible;
use super::{PatternError, PatternSpec, Result};

pub const WITNESS_SCHEMA: &str = "tensorlab.witness/v1";

/// One sequence per role; `sequences[ℓ-1][n-1] = a_{ℓ,n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub sequences: Vec<Vec<usize>>,
}

impl Witness {
    pub fn new(sequences: Vec<Vec<usize>>) -> Self {
        Witness { sequences }
    }

    pub fn depth(&self) -> usize {
        self.sequences.first().map_or(0, |s| s.len())
    }
}

/// Roles and positions are 1-based; `phi` indexes the spec's map list from 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfGround { role: usize, n: usize, value: usize, size: usize },
    Repeated { value: usize, first: (usize, usize), second: (usize, usize) },
    NotIncreasing { role: usize, n: usize },
    Excluded { role: usize, n: usize, value: usize },
    Membership { phi: usize, j: Vec<usize>, tuple: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub checks_per_phi: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub spec_hash: String,
    pub depth: usize,
    pub sequences: Vec<Vec<usize>>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn new(spec: &PatternSpec, w: &Witness, verdict: Verdict) -> Self {
        Certificate {
            schema: WITNESS_SCHEMA.into(),
            spec_hash: spec.digest(),
            depth: w.depth(),
            sequences: w.sequences.clone(),
            verdict,
        }
    }
}

pub fn verify_witness(spec: &PatternSpec, w: &Witness) -> Result<Verdict> {
    let m = spec.m();
    if w.sequences.len() != m {
        return Err(PatternError::ShapeMismatch(format!(
            "witness has {} sequences for {m} roles",
            w.sequences.len()
        )));
    }
    let depth = w.depth();
    if depth == 0 || w.sequences.iter().any(|s| s.len() != depth) {
        return Err(PatternError::ShapeMismatch("role sequences must share a positive length".into()));
    }
    let fail = |v: Violation, checks: Vec<u64>| Verdict {
        passed: false,
        checks_per_phi: checks,
        violation: Some(v),
    };
    for (l, seq) in w.sequences.iter().enumerate() {
        let size = spec.grounds()[l].size;
        if let Some((n, &value)) = seq.iter().enumerate().find(|(_, v)| **v >= size) {
            return Ok(fail(Violation::OutOfGround { role: l + 1, n: n + 1, value, size }, vec![]));
        }
        if let Some((n, &value)) = seq.iter().enumerate().find(|(_, v)| spec.excluded().binary_search(v).is_ok()) {
            return Ok(fail(Violation::Excluded { role: l + 1, n: n + 1, value }, vec![]));
        }
    }
    let mut checks = Vec::with_capacity(spec.phis().len());
    let mut tuple = vec![0; spec.k()];
    for (pi, (phi, x)) in spec.phis().iter().zip(spec.targets()).enumerate() {
        checks.push(0);
        for j in Admissible::new(phi.values(), depth, spec.strict()) {
            for (s, (&role, &js)) in phi.values().iter().zip(&j).enumerate() {
                tuple[s] = w.sequences[role - 1][js - 1];
            }
            checks[pi] += 1;
            if !x.contains(&tuple) {
                return Ok(fail(Violation::Membership { phi: pi, j, tuple: tuple.clone() }, checks));
            }
        }
    }
    let mut first_seen: HashMap<usize, (usize, usize)> = HashMap::new();
    for (l, seq) in w.sequences.iter().enumerate() {
        let ordered = spec.grounds()[l].ordered;
        for (n, &value) in seq.iter().enumerate() {
            if let Some(first) = first_seen.insert(value, (l + 1, n + 1)) {
                return Ok(fail(Violation::Repeated { value, first, second: (l + 1, n + 1) }, checks));
            }
            if ordered && n > 0 && seq[n - 1] >= value {
                return Ok(fail(Violation::NotIncreasing { role: l + 1, n: n + 1 }, checks));
            }
        }
    }
    Ok(Verdict {
        passed: true,
        checks_per_phi: checks,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{RoleGround, Surjection};
    use super::*;
    use crate::tensor_set::{superdiagonal, TensorSet};

    #[test]
    fn superdiagonal_witness_passes() {
        let spec = PatternSpec::new(
            vec![Surjection::constant(2)],
            vec![superdiagonal(2, 16)],
            vec![RoleGround { size: 16, ordered: true }],
        )
        .unwrap();
        let w = Witness::new(vec![(0..5).collect()]);
        let v = verify_witness(&spec, &w).unwrap();
        assert!(v.passed);
        assert_eq!(v.checks_per_phi, vec![10]);
    }

    fn parity_spec() -> PatternSpec {
        let x = TensorSet::from_predicate(&[16, 16], "even<odd", |t| t[0] < t[1] && t[0] % 2 == 0 && t[1] % 2 == 1);
        PatternSpec::new(
            vec![Surjection::identity(2)],
            vec![x],
            vec![RoleGround { size: 16, ordered: true }; 2],
        )
        .unwrap()
    }

    #[test]
    fn parity_witness() {
        let spec = parity_spec();
        let good = Witness::new(vec![vec![2, 4, 6, 8], vec![3, 5, 7, 9]]);
        let v = verify_witness(&spec, &good).unwrap();
        assert!(v.passed);
        // Nondecreasing pairs in [1..4]²: C(5,2) = 10.
        assert_eq!(v.checks_per_phi, vec![10]);

        // a_{2,n} = 2n: the first admissible tuple (1,1) maps to (2,2).
        let bad = Witness::new(vec![vec![2, 4, 6, 8], vec![2, 4, 6, 8]]);
        let v = verify_witness(&spec, &bad).unwrap();
        assert_eq!(
            v.violation,
            Some(Violation::Membership { phi: 0, j: vec![1, 1], tuple: vec![2, 2] })
        );
        let all_pairs = TensorSet::full(&[16, 16]);
        let loose = PatternSpec::new(vec![Surjection::identity(2)], vec![all_pairs], vec![RoleGround { size: 16, ordered: true }; 2]).unwrap();
        let v = verify_witness(&loose, &bad).unwrap();
        assert!(matches!(v.violation, Some(Violation::Repeated { value: 2, .. })));

        // Disjoint but wrong parity: the first admissible tuple (1,1) fails.
        let bad = Witness::new(vec![vec![2, 4, 6, 8], vec![10, 12, 14, 15]]);
        let v = verify_witness(&spec, &bad).unwrap();
        assert_eq!(
            v.violation,
            Some(Violation::Membership { phi: 0, j: vec![1, 1], tuple: vec![2, 10] })
        );
    }

    #[test]
    fn shape_errors() {
        let spec = parity_spec();
        assert!(verify_witness(&spec, &Witness::new(vec![vec![1]])).is_err());
        assert!(verify_witness(&spec, &Witness::new(vec![vec![1], vec![2, 3]])).is_err());
        let v = verify_witness(&spec, &Witness::new(vec![vec![20], vec![3]])).unwrap();
        assert!(matches!(v.violation, Some(Violation::OutOfGround { .. })));
        let loose = PatternSpec::new(vec![Surjection::identity(2)], vec![TensorSet::full(&[16, 16])], vec![RoleGround { size: 16, ordered: true }; 2]).unwrap();
        let v = verify_witness(&loose, &Witness::new(vec![vec![4, 2], vec![3, 5]])).unwrap();
        assert!(matches!(v.violation, Some(Violation::NotIncreasing { role: 1, n: 2 })));
    }
}
