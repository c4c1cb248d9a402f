//! Set-at-a-time search for the full arrangement.
//!
//! Members are added in a fixed role schedule: first enough of each role to
//! complete one combination, then round robin. Every combination the new
//! member completes confines it to a shifted copy of `A` (a quotient set for
//! products). Within a role members are added in increasing order, so each
//! certificate is reached once. Later members of a role are tried in order of
//! how often their difference to the earlier members recurs inside `A`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Combinations, Mode, SumsetSpec};
use crate::bitset::BitSet;
use crate::intset::IntSet;
use crate::pattern::{PatternError, SearchOptions, Strategy};

pub(super) enum Outcome {
    Found(Vec<Vec<usize>>),
    Exhausted,
    Budget,
}

const POPULARITY_CAP: usize = 1 << 16;

/// Other members of one combination, as `(role, insertion index)`.
type Combo = Vec<(usize, usize)>;

struct Plan<'a> {
    a: &'a IntSet,
    spec: &'a SumsetSpec,
    schedule: Vec<usize>,
    /// Later steps of the same role, in insertion order.
    role_steps: Vec<Vec<usize>>,
    /// `next_of_role[t][s]`: the first step after `t` that places a member of `s`.
    next_of_role: Vec<Vec<Option<usize>>>,
    /// `triggers[t]`: `(later step, other members)` for every combination
    /// whose other members are all placed once step `t` is.
    triggers: Vec<Vec<(usize, Combo)>>,
    init: Vec<BitSet>,
    /// First members of all roles but the last to start; see [`ladder`].
    capped: Vec<usize>,
    /// `popularity[δ] = |A ∩ (A − δ)|`.
    popularity: Vec<u32>,
}

impl<'a> Plan<'a> {
    fn new(a: &'a IntSet, spec: &'a SumsetSpec, len: usize) -> Plan<'a> {
        let k = spec.k();
        let n = a.bound();
        let mut roles: Vec<usize> = (0..k).collect();
        roles.sort_by_key(|&s| (std::cmp::Reverse(spec.multiplicities[s]), s));
        let mut schedule = Vec::with_capacity(k * len);
        let mut count = vec![0usize; k];
        // Core rounds are aligned at the end, so a role with n_s members
        // joins for the last n_s rounds and the final slot completes the
        // first combination.
        let top = spec.multiplicities.iter().copied().max().unwrap_or(1);
        for round in 0..top {
            for &s in &roles {
                if round + spec.multiplicities[s] >= top && count[s] < len {
                    schedule.push(s);
                    count[s] += 1;
                }
            }
        }
        while schedule.len() < k * len {
            for &s in &roles {
                if count[s] < len {
                    schedule.push(s);
                    count[s] += 1;
                }
            }
        }
        // step_of[s][i]: the step placing the i-th member of role s.
        let mut step_of = vec![Vec::with_capacity(len); k];
        for (t, &s) in schedule.iter().enumerate() {
            step_of[s].push(t);
        }
        let mut init: Vec<BitSet> = schedule
            .iter()
            .map(|_| {
                let mut d = BitSet::full(n);
                if spec.excludes_zero() {
                    d.remove(0);
                }
                d
            })
            .collect();
        let mut triggers: Vec<Vec<(usize, Combo)>> = vec![Vec::new(); schedule.len()];
        let mut count = vec![0usize; k];
        for (t, &s) in schedule.iter().enumerate() {
            let mut per_role: Vec<Vec<Vec<usize>>> = Vec::with_capacity(k);
            for r in 0..k {
                let need = spec.multiplicities[r] - usize::from(r == s);
                per_role.push(Combinations::new(count[r], need).collect());
            }
            if per_role.iter().all(|c| !c.is_empty()) {
                let mut idx = vec![0usize; k];
                'outer: loop {
                    let combo: Combo = (0..k)
                        .flat_map(|r| per_role[r][idx[r]].iter().map(move |i| (r, *i)))
                        .collect();
                    match combo.iter().map(|&(r, i)| step_of[r][i]).max() {
                        Some(at) => triggers[at].push((t, combo)),
                        None => {
                            let f = fiber(a, spec, spec.combine(std::iter::empty()));
                            init[t].intersect_with(&f);
                        }
                    }
                    let mut r = k;
                    loop {
                        if r == 0 {
                            break 'outer;
                        }
                        r -= 1;
                        idx[r] += 1;
                        if idx[r] < per_role[r].len() {
                            break;
                        }
                        idx[r] = 0;
                    }
                }
            }
            count[s] += 1;
        }
        let mut firsts: Vec<usize> = step_of.iter().filter_map(|v| v.first().copied()).collect();
        firsts.sort_unstable();
        firsts.pop();
        let capped = firsts;
        let next_of_role = (0..schedule.len())
            .map(|t| (0..k).map(|r| (t + 1..schedule.len()).find(|u| schedule[*u] == r)).collect())
            .collect();
        let role_steps = (0..schedule.len())
            .map(|t| step_of[schedule[t]].iter().copied().filter(|u| *u > t).collect())
            .collect();
        let popularity = (0..n)
            .filter(|_| spec.mode == Mode::Additive && n <= POPULARITY_CAP)
            .map(|d| {
                let mut shifted = a.bits().shifted_down(d);
                shifted.intersect_with(a.bits());
                shifted.count() as u32
            })
            .collect();
        Plan {
            a,
            spec,
            schedule,
            role_steps,
            next_of_role,
            triggers,
            init,
            capped,
            popularity,
        }
    }
}

/// Values `v` with `partial ∘ v ∈ A`.
fn fiber(a: &IntSet, spec: &SumsetSpec, partial: Option<usize>) -> BitSet {
    let n = a.bound();
    let bits = a.bits();
    match (spec.mode, partial) {
        (_, None) => BitSet::new(n),
        (Mode::Additive, Some(p)) => bits.shifted_down(p),
        (Mode::Multiplicative, Some(0)) => {
            if bits.contains(0) {
                BitSet::full(n)
            } else {
                BitSet::new(n)
            }
        }
        (Mode::Multiplicative, Some(p)) => {
            let mut out = BitSet::new(n);
            for v in bits.iter().filter(|x| x % p == 0) {
                out.insert(v / p);
            }
            out
        }
    }
}

struct Dfs<'p> {
    plan: &'p Plan<'p>,
    sets: Vec<Vec<usize>>,
    used: BitSet,
    /// `levels[t]`: domains in force when step `t` is about to be placed.
    levels: Vec<Vec<BitSet>>,
    nodes: u64,
    budget: u64,
    rng: Option<ChaCha8Rng>,
    cap: Option<usize>,
}

enum Flow {
    Found,
    Exhausted,
    Budget,
}

/// Applies the triggers of step `t` (just placed) to the later domains,
/// writing them into `dst`. `false` when some role can no longer be completed.
fn propagate(plan: &Plan<'_>, sets: &[Vec<usize>], used: &BitSet, t: usize, src: &[BitSet], dst: &mut [BitSet]) -> bool {
    for u in t + 1..src.len() {
        dst[u].clone_from(&src[u]);
    }
    for (later, combo) in &plan.triggers[t] {
        let partial = plan.spec.combine(combo.iter().map(|&(r, i)| sets[r][i]));
        let d = &mut dst[*later];
        match (plan.spec.mode, partial) {
            (Mode::Additive, Some(p)) => d.intersect_with_shifted_down(plan.a.bits(), p),
            _ => d.intersect_with(&fiber(plan.a, plan.spec, partial)),
        }
        if d.is_empty() {
            return false;
        }
    }
    // Each role must still admit an increasing run of fresh values.
    for (s, first) in plan.next_of_role[t].iter().enumerate() {
        let Some(first) = *first else { continue };
        let mut from = sets[s].last().map_or(0, |c| c + 1);
        for &u in std::iter::once(&first).chain(&plan.role_steps[first]) {
            match dst[u].iter_from(from).find(|v| !used.contains(*v)) {
                Some(v) => from = v + 1,
                None => return false,
            }
        }
    }
    true
}

impl Dfs<'_> {
    fn run(&mut self, step: usize) -> Flow {
        let plan = self.plan;
        if step == plan.schedule.len() {
            return Flow::Found;
        }
        let s = plan.schedule[step];
        let mut dom = self.levels[step][step].clone();
        dom.difference_with(&self.used);
        if let Some(&last) = self.sets[s].last() {
            dom.clear_through(last);
        }
        let cap = self.cap.filter(|_| plan.capped.contains(&step)).unwrap_or(usize::MAX);
        let mut cands: Vec<usize> = dom.iter().take_while(|v| *v < cap).collect();
        if !plan.popularity.is_empty() && !self.sets[s].is_empty() {
            let mates = &self.sets[s];
            cands.sort_by_cached_key(|&v| {
                let score: u64 = mates.iter().map(|x| u64::from(plan.popularity[v - x])).sum();
                (std::cmp::Reverse(score), v)
            });
        }
        if let Some(rng) = self.rng.as_mut() {
            cands.shuffle(rng);
        }
        for v in cands {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Flow::Budget;
            }
            self.sets[s].push(v);
            self.used.insert(v);
            let (lo, hi) = self.levels.split_at_mut(step + 1);
            let flow = if propagate(plan, &self.sets, &self.used, step, &lo[step], &mut hi[0]) {
                self.run(step + 1)
            } else {
                Flow::Exhausted
            };
            if matches!(flow, Flow::Found) {
                return flow;
            }
            self.used.remove(v);
            self.sets[s].pop();
            if matches!(flow, Flow::Budget) {
                return flow;
            }
        }
        Flow::Exhausted
    }
}

fn attempt(plan: &Plan<'_>, budget: u64, rng: Option<ChaCha8Rng>, cap: Option<usize>) -> (Outcome, u64) {
    let steps = plan.schedule.len();
    let mut dfs = Dfs {
        plan,
        sets: vec![Vec::new(); plan.spec.k()],
        used: BitSet::new(plan.a.bound()),
        levels: vec![plan.init.clone(); steps + 1],
        nodes: 0,
        budget,
        rng,
        cap,
    };
    let outcome = match dfs.run(0) {
        Flow::Found => Outcome::Found(dfs.sets),
        Flow::Exhausted => Outcome::Exhausted,
        Flow::Budget => Outcome::Budget,
    };
    (outcome, dfs.nodes.min(budget))
}

/// Shifting role `s` by `t_s` with `Σ n_s·t_s = 0` keeps every combination
/// sum, so certificates usually exist whose first members are small in all
/// roles but one. Those are tried first under growing caps, then the search
/// runs uncapped on what is left of the budget.
fn ladder(plan: &Plan<'_>, budget: u64) -> Outcome {
    let mut left = budget;
    if plan.spec.mode == Mode::Additive && !plan.capped.is_empty() {
        for cap in LADDER {
            let (outcome, spent) = attempt(plan, (budget / 8).min(left), None, Some(cap));
            if let Outcome::Found(_) = outcome {
                return outcome;
            }
            left -= spent;
        }
    }
    attempt(plan, left.max(1), None, None).0
}

const LADDER: [usize; 3] = [4, 16, 64];

fn restarts(plan: &Plan<'_>, restarts: usize, opts: &SearchOptions) -> Outcome {
    let restarts = restarts.max(1);
    let per_run = (opts.node_budget / restarts as u64).max(1);
    for r in 0..restarts {
        let rng = (r > 0).then(|| ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64)));
        match attempt(plan, per_run, rng, None).0 {
            // Every run is complete, so finishing one settles the question.
            Outcome::Budget => {}
            done => return done,
        }
    }
    Outcome::Budget
}

/// Sets are returned sorted within each role.
pub(super) fn search(a: &IntSet, spec: &SumsetSpec, len: usize, opts: &SearchOptions) -> Result<Outcome, PatternError> {
    if len == 0 {
        return Err(PatternError::InvalidArgument("len must be at least 1".into()));
    }
    let plan = Plan::new(a, spec, len);
    Ok(match opts.strategy {
        Strategy::Exhaustive => ladder(&plan, opts.node_budget),
        Strategy::Greedy { restarts: r, .. } => restarts(&plan, r, opts),
        Strategy::Auto => match ladder(&plan, opts.node_budget) {
            Outcome::Budget => restarts(&plan, 8, opts),
            other => other,
        },
    })
}
