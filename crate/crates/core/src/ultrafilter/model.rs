//! Exhaustive cross-check of the point arithmetic against the definitional
//! evaluators on small grounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::definitional::{
    first_disagreement, image_of, principal_point, star_of, tensor_of, Membership, Tabulated,
};
use super::{FiniteMap, FiniteUltrafilter, Result, Space, SubsetMask, UltrafilterError};

pub const MODEL_SCHEMA: &str = "tensorlab.model/v1";

/// Pair checks (ultrafilter axioms) and disjoint-pair checks (additivity)
/// are exhaustive up to this many cases and sampled beyond it.
const PAIR_BUDGET: u64 = 1 << 20;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    pub ground_cap: usize,
    pub cell_cap: usize,
    /// Image commutation runs over all maps when both grounds are at most this size.
    pub exhaustive_map_cap: usize,
    pub map_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            ground_cap: 6,
            cell_cap: 20,
            exhaustive_map_cap: 3,
            map_samples: 24,
            seed: 0,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Generating points of the ultrafilters involved, as coordinates.
    pub points: Vec<Vec<usize>>,
    /// Offending subset as a hex cell mask (cells numbered row-major).
    pub subset: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub name: String,
    pub statement: String,
    pub ultrafilters: usize,
    pub subsets_per_ultrafilter: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maps: Option<u64>,
    pub checks: u64,
    pub exhaustive: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelReport {
    pub schema: String,
    pub sizes: Vec<usize>,
    pub clauses: Vec<ClauseReport>,
    pub passed: bool,
}

impl ModelReport {
    pub fn clause(&self, name: &str) -> Option<&ClauseReport> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct Outcome {
    checks: u64,
    cex: Option<Counterexample>,
}

impl Outcome {
    fn fail(checks: u64, points: Vec<Vec<usize>>, x: SubsetMask, detail: impl Into<String>) -> Self {
        Outcome {
            checks,
            cex: Some(Counterexample {
                points,
                subset: x.hex(),
                detail: detail.into(),
            }),
        }
    }
}

struct Runner {
    pool: Option<rayon::ThreadPool>,
}

impl Runner {
    /// Evaluates `f` on every unit and merges in unit order, so the report
    /// does not depend on scheduling.
    fn run<T: Sync>(&self, units: &[T], f: impl Fn(&T) -> Result<Outcome> + Sync + Send) -> Result<Outcome> {
        let results: Vec<Result<Outcome>> = match &self.pool {
            Some(pool) => pool.install(|| units.par_iter().map(&f).collect()),
            None => units.iter().map(&f).collect(),
        };
        let mut total = Outcome::default();
        for r in results {
            let o = r?;
            total.checks += o.checks;
            if total.cex.is_none() {
                total.cex = o.cex;
            }
        }
        Ok(total)
    }
}

fn compare(a: &dyn Membership, b: &dyn Membership, points: Vec<Vec<usize>>, what: &str) -> Result<Outcome> {
    let n = 1u64 << a.space().cells();
    Ok(match first_disagreement(a, b)? {
        None => Outcome { checks: n, cex: None },
        Some(x) => Outcome::fail(x.bits() + 1, points, x, what),
    })
}

/// Runs every finite clause on `I × J` (and `I × J × K` when `k` is given).
pub fn check_model(i: usize, j: usize, k: Option<usize>, cfg: &ModelConfig) -> Result<ModelReport> {
    let mut sizes = vec![i, j];
    sizes.extend(k);
    for s in &sizes {
        if *s == 0 {
            return Err(UltrafilterError::EmptyGround);
        }
        if *s > cfg.ground_cap {
            return Err(UltrafilterError::CapExceeded(format!(
                "ground of size {s} (max {})",
                cfg.ground_cap
            )));
        }
    }
    let biggest: usize = sizes.iter().product();
    let cell_cap = cfg.cell_cap.min(super::definitional::TABLE_CAP);
    if biggest > cell_cap {
        return Err(UltrafilterError::CapExceeded(format!(
            "product space with {biggest} cells (max {cell_cap})"
        )));
    }
    let runner = Runner {
        pool: if cfg.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| UltrafilterError::CapExceeded(e.to_string()))?,
            )
        } else {
            None
        },
    };

    let si = Space::of_sizes(&[i])?;
    let sj = Space::of_sizes(&[j])?;
    let pair = Space::of_sizes(&[i, j])?;
    let p1 = FiniteMap::projection(&pair, &[1])?;
    let p2 = FiniteMap::projection(&pair, &[2])?;
    let all_w = FiniteUltrafilter::all_on(&pair);
    let subsets = 1u64 << pair.cells();

    let mut clauses = Vec::new();
    let mut push = |name: &str, statement: &str, ultrafilters: usize, per: u64, maps: Option<u64>, exhaustive: bool, o: Outcome| {
        clauses.push(ClauseReport {
            name: name.into(),
            statement: statement.into(),
            ultrafilters,
            subsets_per_ultrafilter: per,
            maps,
            checks: o.checks,
            exhaustive,
            passed: o.cex.is_none(),
            counterexample: o.cex,
        });
    };

    // The definitional tensor of the two projections satisfies the axioms.
    let pair_cases = 1u64 << (2 * pair.cells());
    let axioms_exhaustive = pair_cases <= PAIR_BUDGET;
    let o = runner.run(&all_w, |w| {
        let a = image_of(&p1, w)?;
        let b = image_of(&p2, w)?;
        let t = Tabulated::of(&tensor_of(&a, &b)?)?;
        axioms(&t, vec![w.coords()], cfg.seed ^ w.point() as u64)
    })?;
    push(
        "ultrafilter-axioms",
        "pi1(W) (x) pi2(W) contains I x J, omits the empty set, is closed under intersection and supersets, and contains exactly one of X and its complement",
        all_w.len(),
        subsets,
        None,
        axioms_exhaustive,
        o,
    );

    let o = runner.run(&all_w, |w| Ok(additivity(w, cfg.seed ^ w.point() as u64)))?;
    push(
        "finite-additivity",
        "mu(A u B) = mu(A) + mu(B) for disjoint A, B",
        all_w.len(),
        subsets,
        None,
        3u64.pow(pair.cells() as u32) <= PAIR_BUDGET,
        o,
    );

    let o = runner.run(&all_w, |w| {
        let a = image_of(&p1, w)?;
        let b = image_of(&p2, w)?;
        let t = tensor_of(&a, &b)?;
        compare(&t, w, vec![w.coords()], "W differs from pi1(W) (x) pi2(W)")
    })?;
    push(
        "projection-factorization",
        "W = pi1(W) (x) pi2(W)",
        all_w.len(),
        subsets,
        None,
        true,
        o,
    );

    let uv: Vec<(FiniteUltrafilter, FiniteUltrafilter)> = FiniteUltrafilter::all_on(&si)
        .into_iter()
        .flat_map(|u| FiniteUltrafilter::all_on(&sj).into_iter().map(move |v| (u.clone(), v)))
        .collect();
    let o = runner.run(&uv, |(u, v)| {
        let t = tensor_of(u, v)?;
        let a = image_of(&p1, &t)?;
        let b = image_of(&p2, &t)?;
        let pts = vec![u.coords(), v.coords()];
        let mut o = compare(&a, u, pts.clone(), "pi1(U (x) V) differs from U")?;
        if o.cex.is_none() {
            let o2 = compare(&b, v, pts, "pi2(U (x) V) differs from V")?;
            o.checks += o2.checks;
            o.cex = o2.cex;
        }
        Ok(o)
    })?;
    push(
        "tensor-projections",
        "pi1(U (x) V) = U and pi2(U (x) V) = V",
        uv.len(),
        (1u64 << i) + (1u64 << j),
        None,
        true,
        o,
    );

    let o = runner.run(&all_w, |w| {
        let a = image_of(&p1, w)?;
        let b = image_of(&p2, w)?;
        let proj = tensor_of(&a, &b)?;
        let proj_ok = first_disagreement(&proj, w)?.is_none();
        let mut checks = subsets;
        let mut is_tensor = false;
        for (u, v) in &uv {
            let t = tensor_of(u, v)?;
            checks += 1 << pair.cells();
            if first_disagreement(&t, w)?.is_none() {
                is_tensor = true;
                break;
            }
        }
        if is_tensor == proj_ok {
            Ok(Outcome { checks, cex: None })
        } else {
            Ok(Outcome::fail(
                checks,
                vec![w.coords()],
                SubsetMask::empty(pair.cells()),
                format!("is a tensor product: {is_tensor}, equals tensor of projections: {proj_ok}"),
            ))
        }
    })?;
    push(
        "tensor-characterization",
        "W is some U (x) V exactly when W = pi1(W) (x) pi2(W)",
        all_w.len(),
        subsets,
        None,
        true,
        o,
    );

    let o = runner.run(&all_w, |w| {
        let a = image_of(&p1, w)?;
        let b = image_of(&p2, w)?;
        let pa = principal_point(&a)?;
        let pb = principal_point(&b)?;
        if pa.is_none() && pb.is_none() {
            return Ok(Outcome::fail(
                0,
                vec![w.coords()],
                SubsetMask::empty(pair.cells()),
                "neither projection of a principal ultrafilter is principal",
            ));
        }
        let t = tensor_of(&a, &b)?;
        compare(&t, w, vec![w.coords()], "principal projection but W is not the tensor of its projections")
    })?;
    push(
        "principal-projection",
        "if pi1(W) or pi2(W) is principal then W = pi1(W) (x) pi2(W)",
        all_w.len(),
        subsets,
        None,
        true,
        o,
    );

    // Image commutation over maps I -> I and J -> J.
    let exhaustive_maps = i <= cfg.exhaustive_map_cap && j <= cfg.exhaustive_map_cap;
    let maps_i = map_family(&si, exhaustive_maps, cfg.map_samples, cfg.seed)?;
    let maps_j = map_family(&sj, exhaustive_maps, cfg.map_samples, cfg.seed.wrapping_add(1))?;
    let map_pairs: Vec<(usize, usize)> = if exhaustive_maps {
        (0..maps_i.len())
            .flat_map(|a| (0..maps_j.len()).map(move |b| (a, b)))
            .collect()
    } else {
        (0..maps_i.len().min(maps_j.len())).map(|a| (a, a)).collect()
    };
    let o = runner.run(&map_pairs, |(a, b)| {
        let f1 = &maps_i[*a];
        let f2 = &maps_j[*b];
        let fp = FiniteMap::pair(f1, f2)?;
        let mut total = Outcome::default();
        for (u, v) in &uv {
            let iu = image_of(f1, u)?;
            let iv = image_of(f2, v)?;
            let lhs = tensor_of(&iu, &iv)?;
            let t = tensor_of(u, v)?;
            let rhs = image_of(&fp, &t)?;
            let o = compare(&lhs, &rhs, vec![u.coords(), v.coords()], &format!(
                "f1(U) (x) f2(V) differs from (f1,f2)(U (x) V) for f1={:?}, f2={:?}",
                f1.table(),
                f2.table()
            ))?;
            total.checks += o.checks;
            if o.cex.is_some() {
                total.cex = o.cex;
                break;
            }
        }
        Ok(total)
    })?;
    push(
        "image-commutation",
        "f1(U) (x) f2(V) = (f1, f2)(U (x) V)",
        uv.len(),
        subsets,
        Some(map_pairs.len() as u64),
        exhaustive_maps,
        o,
    );

    let stars: Vec<(usize, usize)> = (0..all_w.len())
        .flat_map(|a| (0..all_w.len()).map(move |b| (a, b)))
        .collect();
    let o = runner.run(&stars, |(a, b)| {
        let (v, w) = (&all_w[*a], &all_w[*b]);
        let s = star_of(v, w)?;
        let pv = image_of(&p1, v)?;
        let pw = image_of(&p2, w)?;
        let t = tensor_of(&pv, &pw)?;
        compare(&s, &t, vec![v.coords(), w.coords()], "V * W differs from pi1(V) (x) pi2(W)")
    })?;
    push(
        "star-extension",
        "V * W = pi1(V) (x) pi2(W) for (a,b) * (c,d) = (a,d)",
        all_w.len(),
        subsets,
        None,
        true,
        o,
    );

    let o = runner.run(&all_w, |w| {
        let s = star_of(w, w)?;
        compare(&s, w, vec![w.coords()], "W * W differs from W")
    })?;
    push(
        "star-idempotent",
        "every W is idempotent for the extended * operation",
        all_w.len(),
        subsets,
        None,
        true,
        o,
    );

    if let Some(k) = k {
        let sk = Space::of_sizes(&[k])?;
        let triple = Space::of_sizes(&[i, j, k])?;
        let tsubsets = 1u64 << triple.cells();
        let q1 = FiniteMap::projection(&triple, &[1])?;
        let q2 = FiniteMap::projection(&triple, &[2])?;
        let q3 = FiniteMap::projection(&triple, &[3])?;
        let q13 = FiniteMap::projection(&triple, &[1, 3])?;
        let q23 = FiniteMap::projection(&triple, &[2, 3])?;
        let all_z = FiniteUltrafilter::all_on(&triple);
        let o = runner.run(&all_z, |z| {
            let mut checks = 0;
            for (q, label) in [(&q13, "pi13"), (&q23, "pi23")] {
                let side = image_of(q, z)?;
                let two = q.codomain().clone();
                let r1 = FiniteMap::projection(&two, &[1])?;
                let r2 = FiniteMap::projection(&two, &[2])?;
                let a = image_of(&r1, &side)?;
                let b = image_of(&r2, &side)?;
                let t = tensor_of(&a, &b)?;
                let o = compare(&side, &t, vec![z.coords()], &format!("{label}(Z) is not a tensor product"))?;
                checks += o.checks;
                if o.cex.is_some() {
                    return Ok(Outcome { checks, cex: o.cex });
                }
            }
            let a = image_of(&q1, z)?;
            let b = image_of(&q2, z)?;
            let c = Tabulated::of(&image_of(&q3, z)?)?;
            let ab = Tabulated::of(&tensor_of(&a, &b)?)?;
            let abc = tensor_of(&ab, &c)?;
            let mut o = compare(&abc, z, vec![z.coords()], "Z differs from pi1(Z) (x) pi2(Z) (x) pi3(Z)")?;
            o.checks += checks;
            Ok(o)
        })?;
        push(
            "triple-factorization",
            "if pi13(Z) and pi23(Z) are tensor products then Z = pi1(Z) (x) pi2(Z) (x) pi3(Z)",
            all_z.len(),
            tsubsets,
            None,
            true,
            o,
        );

        let triples: Vec<Vec<usize>> = all_z.iter().map(|z| z.coords()).collect();
        let o = runner.run(&triples, |c| {
            let u = FiniteUltrafilter::at(si.clone(), c[0])?;
            let v = FiniteUltrafilter::at(sj.clone(), c[1])?;
            let w = FiniteUltrafilter::at(sk.clone(), c[2])?;
            let vw = Tabulated::of(&tensor_of(&v, &w)?)?;
            let uv = Tabulated::of(&tensor_of(&u, &v)?)?;
            let left = tensor_of(&u, &vw)?;
            let right = tensor_of(&uv, &w)?;
            compare(&left, &right, vec![vec![c[0]], vec![c[1]], vec![c[2]]], "U (x) (V (x) W) differs from (U (x) V) (x) W")
        })?;
        push(
            "tensor-associativity",
            "U (x) (V (x) W) = (U (x) V) (x) W",
            triples.len(),
            tsubsets,
            None,
            true,
            o,
        );
    }

    let passed = clauses.iter().all(|c| c.passed);
    Ok(ModelReport {
        schema: MODEL_SCHEMA.into(),
        sizes,
        clauses,
        passed,
    })
}

fn map_family(space: &Space, exhaustive: bool, samples: usize, seed: u64) -> Result<Vec<FiniteMap>> {
    if exhaustive {
        return Ok(FiniteMap::all_maps(space, space).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.cells();
    let mut maps = vec![FiniteMap::identity(space)];
    while maps.len() < samples.max(1) {
        let table = (0..n).map(|_| rng.gen_range(0..n)).collect();
        maps.push(FiniteMap::new(space, space, table)?);
    }
    Ok(maps)
}

fn axioms(t: &dyn Membership, points: Vec<Vec<usize>>, seed: u64) -> Result<Outcome> {
    let cells = t.space().cells();
    let empty = SubsetMask::empty(cells);
    let full = SubsetMask::full(cells);
    if t.contains(empty) {
        return Ok(Outcome::fail(1, points, empty, "contains the empty set"));
    }
    if !t.contains(full) {
        return Ok(Outcome::fail(2, points, full, "omits the whole space"));
    }
    let mut checks = 2;
    for x in t.space().subsets() {
        checks += 1;
        if t.contains(x) == t.contains(x.complement()) {
            return Ok(Outcome::fail(checks, points, x, "not exactly one of X and its complement"));
        }
    }
    // (A ∈ F and B ∈ F) ⇔ A ∩ B ∈ F covers intersection and superset closure.
    let mut check_pair = |a: SubsetMask, b: SubsetMask| -> Option<Outcome> {
        checks += 1;
        let both = t.contains(a) && t.contains(b);
        if both != t.contains(a.intersection(&b)) {
            Some(Outcome::fail(checks, points.clone(), a, format!(
                "intersection closure fails with partner {}",
                b.hex()
            )))
        } else {
            None
        }
    };
    let pair_cases = 1u64 << (2 * cells);
    if pair_cases <= PAIR_BUDGET {
        for a in t.space().subsets() {
            for b in t.space().subsets() {
                if let Some(o) = check_pair(a, b) {
                    return Ok(o);
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..PAIR_BUDGET {
            let a = SubsetMask::new(cells, rng.gen())?;
            let b = SubsetMask::new(cells, rng.gen())?;
            if let Some(o) = check_pair(a, b) {
                return Ok(o);
            }
        }
    }
    Ok(Outcome { checks, cex: None })
}

fn additivity(w: &FiniteUltrafilter, seed: u64) -> Outcome {
    let cells = w.space().cells();
    let mu = |x: SubsetMask| u64::from(w.contains(x));
    let mut checks = 0;
    let mut check = |a: SubsetMask, b: SubsetMask| -> Option<Outcome> {
        checks += 1;
        if mu(a.union(&b)) != mu(a) + mu(b) {
            Some(Outcome::fail(checks, vec![w.coords()], a, format!("additivity fails with {}", b.hex())))
        } else {
            None
        }
    };
    let total = 3u64.pow(cells as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = total.min(PAIR_BUDGET);
    for code in 0..cases {
        // Each cell goes to A, to B, or to neither.
        let mut c = if total <= PAIR_BUDGET { code } else { rng.gen_range(0..total) };
        let (mut a, mut b) = (0u64, 0u64);
        for cell in 0..cells {
            match c % 3 {
                1 => a |= 1 << cell,
                2 => b |= 1 << cell,
                _ => {}
            }
            c /= 3;
        }
        let a = SubsetMask::new(cells, a).expect("fits");
        let b = SubsetMask::new(cells, b).expect("fits");
        if let Some(o) = check(a, b) {
            return o;
        }
    }
    Outcome { checks, cex: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_counts() {
        let r = check_model(2, 2, None, &ModelConfig::default()).unwrap();
        assert!(r.passed, "{r:#?}");
        let c = r.clause("projection-factorization").unwrap();
        assert_eq!(c.ultrafilters, 4);
        assert_eq!(c.subsets_per_ultrafilter, 16);
        assert_eq!(c.checks, 64);
    }

    #[test]
    fn singleton_grounds() {
        let r = check_model(1, 1, Some(1), &ModelConfig::default()).unwrap();
        assert!(r.passed);
        assert!(r.clauses.iter().all(|c| c.ultrafilters == 1));
    }

    #[test]
    fn caps() {
        let cfg = ModelConfig::default();
        assert!(check_model(7, 1, None, &cfg).is_err());
        assert!(check_model(5, 5, None, &cfg).is_err());
        assert!(check_model(0, 2, None, &cfg).is_err());
    }

    #[test]
    fn workers_do_not_change_report() {
        let a = check_model(3, 2, Some(2), &ModelConfig::default()).unwrap();
        let b = check_model(3, 2, Some(2), &ModelConfig { workers: 3, ..ModelConfig::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_maps_on_larger_grounds() {
        let r = check_model(4, 2, None, &ModelConfig { map_samples: 6, ..ModelConfig::default() }).unwrap();
        assert!(r.passed);
        let c = r.clause("image-commutation").unwrap();
        assert!(!c.exhaustive);
        assert_eq!(c.maps, Some(6));
    }
}
