//! Backtracking witness search.
//!
//! Slots `(ℓ, n)` are filled in the order `n` outer, `ℓ` inner. Along any
//! admissible tuple the slots `(φ(s), j_s)` occur in strictly increasing
//! order, so once the first `k-1` of them are filled the last coordinate is
//! confined to a fiber of `X^φ`. Each assignment intersects those fibers
//! into the domains of the later slots, and a branch is abandoned as soon as
//! some later slot has no usable value left.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::admissible::Admissible;
use super::verify::{verify_witness, Witness};
use super::{PatternError, PatternSpec, Result};
use crate::bitset::BitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Complete backtracking, least element first.
    Exhaustive,
    /// Candidates ranked by the smallest surviving later domain, with seeded restarts.
    Greedy { restarts: usize, pool: usize },
    /// Exhaustive until the node budget runs out, then greedy.
    Auto,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub strategy: Strategy,
    pub node_budget: u64,
    /// Above 1 the first slot's candidates are split across threads and the
    /// first witness found wins, so the result may vary between runs.
    pub workers: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            strategy: Strategy::Auto,
            node_budget: 2_000_000,
            workers: 1,
            seed: 0,
        }
    }
}

struct Trigger {
    phi: usize,
    prefix: Vec<usize>,
    targets: Vec<usize>,
}

struct Plan<'a> {
    spec: &'a PatternSpec,
    m: usize,
    slots: usize,
    triggers: Vec<Vec<Trigger>>,
    init: Vec<BitSet>,
    universe: usize,
}

impl<'a> Plan<'a> {
    fn new(spec: &'a PatternSpec, depth: usize) -> Plan<'a> {
        let m = spec.m();
        let k = spec.k();
        let slots = depth * m;
        let slot = |role: usize, n: usize| (n - 1) * m + (role - 1);
        let mut init: Vec<BitSet> = (0..slots)
            .map(|t| {
                let mut d = BitSet::full(spec.grounds()[t % m].size);
                for &v in spec.excluded() {
                    d.remove(v);
                }
                d
            })
            .collect();
        let mut grouped: BTreeMap<(usize, Vec<usize>), Vec<usize>> = BTreeMap::new();
        for (pi, phi) in spec.phis().iter().enumerate() {
            let values = phi.values();
            if k == 1 {
                let fiber = spec.targets()[pi].fiber(&[]);
                for n in 1..=depth {
                    init[slot(values[0], n)].intersect_with(&fiber);
                }
                continue;
            }
            for j in Admissible::new(values, depth, spec.strict()) {
                let prefix: Vec<usize> = (0..k - 1).map(|s| slot(values[s], j[s])).collect();
                let last = slot(values[k - 1], j[k - 1]);
                debug_assert!(prefix.windows(2).all(|w| w[0] < w[1]) && prefix[k - 2] < last);
                grouped.entry((pi, prefix)).or_default().push(last);
            }
        }
        let mut triggers: Vec<Vec<Trigger>> = (0..slots).map(|_| Vec::new()).collect();
        for ((phi, prefix), targets) in grouped {
            let at = *prefix.last().expect("k ≥ 2");
            triggers[at].push(Trigger { phi, prefix, targets });
        }
        let universe = spec.grounds().iter().map(|g| g.size).max().unwrap_or(0);
        Plan {
            spec,
            m,
            slots,
            triggers,
            init,
            universe,
        }
    }
}

enum Flow {
    Found,
    Exhausted,
    Budget,
    Stopped,
}

struct Dfs<'p> {
    plan: &'p Plan<'p>,
    assign: Vec<usize>,
    used: BitSet,
    cache: HashMap<(usize, Vec<usize>), BitSet>,
    nodes: &'p AtomicU64,
    budget: u64,
    stop: &'p AtomicBool,
    greedy: Option<(usize, Option<ChaCha8Rng>)>,
}

const CACHE_CAP: usize = 1 << 18;

impl<'p> Dfs<'p> {
    fn new(plan: &'p Plan<'p>, nodes: &'p AtomicU64, budget: u64, stop: &'p AtomicBool) -> Self {
        Dfs {
            plan,
            assign: vec![0; plan.slots],
            used: BitSet::new(plan.universe),
            cache: HashMap::new(),
            nodes,
            budget,
            stop,
            greedy: None,
        }
    }

    fn lower_bound(&self, t: usize) -> Option<usize> {
        let m = self.plan.m;
        let role = t % m;
        (self.plan.spec.grounds()[role].ordered && t >= m).then(|| self.assign[t - m])
    }

    fn candidates(&self, t: usize, domains: &[BitSet]) -> Vec<usize> {
        let lb = self.lower_bound(t);
        domains[t]
            .iter()
            .filter(|v| !self.used.contains(*v) && lb.map_or(true, |b| *v > b))
            .collect()
    }

    /// Domains after fixing slot `t` (already written to `assign`/`used`), or
    /// `None` if a later slot is left without options.
    fn propagate(&mut self, t: usize, domains: &[BitSet]) -> Option<Vec<BitSet>> {
        let mut next = domains.to_vec();
        let plan = self.plan;
        for trig in &plan.triggers[t] {
            let values: Vec<usize> = trig.prefix.iter().map(|s| self.assign[*s]).collect();
            if self.cache.len() > CACHE_CAP {
                self.cache.clear();
            }
            let fiber = self
                .cache
                .entry((trig.phi, values))
                .or_insert_with_key(|(phi, vals)| plan.spec.targets()[*phi].fiber(vals));
            for s in &trig.targets {
                next[*s].intersect_with(fiber);
            }
        }
        self.viable(t, &next).then_some(next)
    }

    /// Every later slot still has a value that is unused and, for ordered
    /// roles, can extend an increasing chain.
    fn viable(&self, t: usize, domains: &[BitSet]) -> bool {
        let m = self.plan.m;
        // All later slots need distinct values.
        let mut pool = BitSet::new(self.plan.universe);
        for d in &domains[t + 1..] {
            pool.union_with(d);
        }
        pool.difference_with(&self.used);
        if pool.count() < self.plan.slots - t - 1 {
            return false;
        }
        for role in 0..m {
            let ordered = self.plan.spec.grounds()[role].ordered;
            let mut s = role;
            let mut prev: Option<usize> = None;
            while s <= t {
                prev = Some(self.assign[s]);
                s += m;
            }
            while s < self.plan.slots {
                let pick = domains[s]
                    .iter()
                    .find(|v| !self.used.contains(*v) && (!ordered || prev.map_or(true, |p| *v > p)));
                match pick {
                    None => return false,
                    Some(v) if ordered => prev = Some(v),
                    Some(_) => {}
                }
                s += m;
            }
        }
        true
    }

    fn tick(&self) -> Option<Flow> {
        if self.stop.load(Ordering::Relaxed) {
            return Some(Flow::Stopped);
        }
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Some(Flow::Budget);
        }
        None
    }

    fn score(&self, t: usize, domains: &[BitSet]) -> usize {
        (t + 1..self.plan.slots)
            .map(|s| domains[s].iter().filter(|v| !self.used.contains(*v)).count())
            .min()
            .unwrap_or(usize::MAX)
    }

    fn run(&mut self, t: usize, domains: &[BitSet]) -> Flow {
        if t == self.plan.slots {
            return Flow::Found;
        }
        let mut cands = self.candidates(t, domains);
        if let Some((pool, rng)) = &mut self.greedy {
            if let Some(rng) = rng {
                cands.shuffle(rng);
            }
            cands.truncate(*pool);
            let mut scored = Vec::with_capacity(cands.len());
            for v in cands {
                if let Some(flow) = self.tick() {
                    return flow;
                }
                self.assign[t] = v;
                self.used.insert(v);
                if let Some(next) = self.propagate(t, domains) {
                    scored.push((self.score(t, &next), v, next));
                }
                self.used.remove(v);
            }
            // Highest score first, least element among ties.
            scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for (_, v, next) in scored {
                self.assign[t] = v;
                self.used.insert(v);
                match self.run(t + 1, &next) {
                    Flow::Exhausted => {}
                    other => return other,
                }
                self.used.remove(v);
            }
            return Flow::Exhausted;
        }
        for v in cands {
            if let Some(flow) = self.tick() {
                return flow;
            }
            self.assign[t] = v;
            self.used.insert(v);
            if let Some(next) = self.propagate(t, domains) {
                match self.run(t + 1, &next) {
                    Flow::Exhausted => {}
                    other => return other,
                }
            }
            self.used.remove(v);
        }
        Flow::Exhausted
    }

    fn witness(&self) -> Witness {
        let m = self.plan.m;
        let depth = self.plan.slots / m;
        Witness::new(
            (0..m)
                .map(|role| (0..depth).map(|n| self.assign[n * m + role]).collect())
                .collect(),
        )
    }
}

enum Outcome {
    Found(Witness),
    Exhausted,
    Budget,
}

fn exhaustive(plan: &Plan<'_>, opts: &SearchOptions) -> Result<Outcome> {
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    if opts.workers <= 1 {
        let mut dfs = Dfs::new(plan, &nodes, opts.node_budget, &stop);
        return Ok(match dfs.run(0, &plan.init) {
            Flow::Found => Outcome::Found(dfs.witness()),
            Flow::Budget => Outcome::Budget,
            Flow::Exhausted | Flow::Stopped => Outcome::Exhausted,
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| PatternError::Internal(e.to_string()))?;
    let roots: Vec<usize> = plan.init[0].iter().collect();
    let budget_hit = AtomicBool::new(false);
    let found = pool.install(|| {
        roots.par_iter().find_map_any(|&v| {
            let mut dfs = Dfs::new(plan, &nodes, opts.node_budget, &stop);
            if dfs.tick().is_some() {
                budget_hit.store(true, Ordering::Relaxed);
                return None;
            }
            dfs.assign[0] = v;
            dfs.used.insert(v);
            let next = dfs.propagate(0, &plan.init)?;
            match dfs.run(1, &next) {
                Flow::Found => {
                    stop.store(true, Ordering::Relaxed);
                    Some(dfs.witness())
                }
                Flow::Budget => {
                    budget_hit.store(true, Ordering::Relaxed);
                    None
                }
                _ => None,
            }
        })
    });
    Ok(match found {
        Some(w) => Outcome::Found(w),
        None if budget_hit.load(Ordering::Relaxed) => Outcome::Budget,
        None => Outcome::Exhausted,
    })
}

fn greedy(plan: &Plan<'_>, restarts: usize, pool: usize, opts: &SearchOptions) -> Outcome {
    let restarts = restarts.max(1);
    let per_run = (opts.node_budget / restarts as u64).max(1);
    let stop = AtomicBool::new(false);
    let mut exhausted_all = true;
    for r in 0..restarts {
        let nodes = AtomicU64::new(0);
        let mut dfs = Dfs::new(plan, &nodes, per_run, &stop);
        let rng = (r > 0).then(|| ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64)));
        dfs.greedy = Some((pool.max(1), rng));
        match dfs.run(0, &plan.init) {
            Flow::Found => return Outcome::Found(dfs.witness()),
            Flow::Budget => exhausted_all = false,
            _ => {}
        }
    }
    // A truncated pool never proves absence.
    let complete = exhausted_all && pool >= plan.universe;
    if complete {
        Outcome::Exhausted
    } else {
        Outcome::Budget
    }
}

/// Searches for a depth-`depth` witness. Every returned witness has been
/// re-verified against the spec.
pub fn search_witness(spec: &PatternSpec, depth: usize, opts: &SearchOptions) -> Result<Witness> {
    if depth == 0 {
        return Err(PatternError::InvalidArgument("depth must be at least 1".into()));
    }
    let plan = Plan::new(spec, depth);
    let outcome = match opts.strategy {
        Strategy::Exhaustive => exhaustive(&plan, opts)?,
        Strategy::Greedy { restarts, pool } => greedy(&plan, restarts, pool, opts),
        Strategy::Auto => match exhaustive(&plan, opts)? {
            Outcome::Budget => greedy(&plan, 8, 16, opts),
            other => other,
        },
    };
    match outcome {
        Outcome::Found(w) => {
            let verdict = verify_witness(spec, &w)?;
            if !verdict.passed {
                return Err(PatternError::Internal(format!(
                    "search produced a witness that fails verification: {:?}",
                    verdict.violation
                )));
            }
            Ok(w)
        }
        Outcome::Exhausted => Err(PatternError::NotFoundWithinBounds { depth }),
        Outcome::Budget => Err(PatternError::BudgetExceeded { nodes: opts.node_budget }),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{RoleGround, Surjection};
    use super::*;
    use crate::tensor_set::{superdiagonal, TensorSet};

    fn exhaustive_opts() -> SearchOptions {
        SearchOptions {
            strategy: Strategy::Exhaustive,
            ..SearchOptions::default()
        }
    }

    #[test]
    fn superdiagonal_depth_six() {
        let spec = PatternSpec::new(
            vec![Surjection::constant(3)],
            vec![superdiagonal(3, 20)],
            vec![RoleGround { size: 20, ordered: true }],
        )
        .unwrap();
        let w = search_witness(&spec, 6, &exhaustive_opts()).unwrap();
        assert_eq!(w.sequences, vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn two_maps_same_parity() {
        let x = TensorSet::from_predicate(&[32, 32], "x+y even", |t| (t[0] + t[1]) % 2 == 0);
        let spec = PatternSpec::new(
            vec![Surjection::new(vec![1, 2], 2).unwrap(), Surjection::new(vec![2, 1], 2).unwrap()],
            vec![x.clone(), x],
            vec![RoleGround { size: 32, ordered: true }; 2],
        )
        .unwrap();
        let w = search_witness(&spec, 4, &exhaustive_opts()).unwrap();
        let parity = w.sequences[0][0] % 2;
        assert!(w.sequences.iter().flatten().all(|v| v % 2 == parity));
        assert!(verify_witness(&spec, &w).unwrap().passed);
    }

    #[test]
    fn empty_target_not_found() {
        let spec = PatternSpec::new(
            vec![Surjection::constant(2)],
            vec![TensorSet::empty(&[10, 10])],
            vec![RoleGround { size: 10, ordered: true }],
        )
        .unwrap();
        assert_eq!(
            search_witness(&spec, 2, &exhaustive_opts()),
            Err(PatternError::NotFoundWithinBounds { depth: 2 })
        );
        let spec1 = PatternSpec::new(
            vec![Surjection::constant(1)],
            vec![TensorSet::empty(&[10])],
            vec![RoleGround { size: 10, ordered: false }],
        )
        .unwrap();
        assert!(search_witness(&spec1, 1, &SearchOptions::default()).is_err());
    }

    #[test]
    fn budget_is_reported() {
        // Needs 7 distinct values from a ground of 6: exhausting that takes many nodes.
        let spec = PatternSpec::new(
            vec![Surjection::constant(1)],
            vec![TensorSet::full(&[6])],
            vec![RoleGround { size: 6, ordered: false }],
        )
        .unwrap();
        let opts = SearchOptions { node_budget: 10, ..exhaustive_opts() };
        // Forward checking rejects this at the root, so even a tiny budget suffices.
        assert_eq!(search_witness(&spec, 7, &opts), Err(PatternError::NotFoundWithinBounds { depth: 7 }));

        let x = TensorSet::from_predicate(&[12, 12], "never increasing", |t| t[0] > t[1] || t[0] % 5 == 4);
        let spec = PatternSpec::new(
            vec![Surjection::constant(2)],
            vec![x],
            vec![RoleGround { size: 12, ordered: false }],
        )
        .unwrap();
        let opts = SearchOptions { node_budget: 3, ..exhaustive_opts() };
        assert!(matches!(search_witness(&spec, 6, &opts), Err(PatternError::BudgetExceeded { .. })));
    }

    #[test]
    fn parallel_and_greedy_find_verified_witnesses() {
        let x = TensorSet::from_predicate(&[40, 40], "x<y, x+y odd", |t| t[0] < t[1] && (t[0] + t[1]) % 2 == 1);
        let spec = PatternSpec::new(
            vec![Surjection::identity(2)],
            vec![x],
            vec![RoleGround { size: 40, ordered: true }; 2],
        )
        .unwrap();
        for opts in [
            SearchOptions { workers: 4, ..exhaustive_opts() },
            SearchOptions { strategy: Strategy::Greedy { restarts: 3, pool: 8 }, ..SearchOptions::default() },
        ] {
            let w = search_witness(&spec, 5, &opts).unwrap();
            assert!(verify_witness(&spec, &w).unwrap().passed);
        }
    }
}
