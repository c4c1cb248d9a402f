use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use tensorlab::limits::{
    asymptotic_density_bounds, banach_density, banach_nested_tensor_formula, iterated_double_limit, riemann_double,
    schnirelmann, Caps, LimitError, LimitOptions,
};
use tensorlab::pattern::{
    cauchy_subsequence, find_homogeneous, ramsey_large, search_witness, verify_witness, Certificate, Coloring,
    PatternError, PatternSpec, RoleGround, SearchOptions, Strategy, Surjection,
};
use tensorlab::setlang::{Env, Sort, Value as SlValue};
use tensorlab::sumset::{
    find_full_sumset, find_general, find_ksum_distinct, find_ksum_same, verify_certificate, Mode, SumsetCertificate,
    SumsetError, SumsetSpec, SUMSET_SCHEMA,
};
use tensorlab::tensor_set::TensorSet;
use tensorlab::ultrafilter::{check_model, ModelConfig};

use super::inputs::{self, ErrorSlot};
use super::{Command, Global, InputError, Outcome, Status};

type Run = Result<Outcome, InputError>;

pub fn dispatch(cmd: &Command, g: &Global) -> Run {
    if g.workers == 0 {
        return Err(InputError("--workers must be at least 1".into()));
    }
    match cmd {
        Command::CheckModel(a) => a.run(g),
        Command::FindHomogeneous(a) => a.run(g),
        Command::RamseyLarge(a) => a.run(g),
        Command::CauchySub(a) => a.run(g),
        Command::PatternSearch(a) => a.run(g),
        Command::FindSumset(a) => a.run(g),
        Command::Density(a) => a.run(),
        Command::DoubleLimit(a) => a.run(),
        Command::Integrate(a) => a.run(),
    }
}

fn not_found(summary: impl Into<String>, reason: &str) -> Outcome {
    Outcome {
        status: Status::NotFound,
        summary: summary.into(),
        result: json!({ "reason": reason }),
    }
}

fn pattern_outcome(e: PatternError) -> Run {
    match e {
        PatternError::NotFoundWithinBounds { .. } | PatternError::NotFoundWithinPrefix { .. } => {
            Ok(not_found(format!("not found: {e}"), "exhausted"))
        }
        PatternError::BudgetExceeded { .. } => Ok(not_found(format!("not found: {e}"), "budget")),
        e => Err(e.into()),
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyArg {
    Exhaustive,
    Greedy,
    Auto,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// Node budget per search.
    #[arg(long, default_value_t = 2_000_000)]
    pub budget: u64,
    /// Greedy restarts.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Greedy candidates kept per slot.
    #[arg(long, default_value_t = 8)]
    pub pool: usize,
}

impl SearchArgs {
    fn options(&self, g: &Global) -> SearchOptions {
        SearchOptions {
            strategy: match self.strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                StrategyArg::Greedy => Strategy::Greedy {
                    restarts: self.restarts,
                    pool: self.pool,
                },
                StrategyArg::Auto => Strategy::Auto,
            },
            node_budget: self.budget,
            workers: g.workers,
            seed: g.seed,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CheckModel {
    #[arg(long)]
    pub i: usize,
    #[arg(long)]
    pub j: usize,
    /// Third ground size, for the triple clauses.
    #[arg(long)]
    pub k: Option<usize>,
}

impl CheckModel {
    fn run(&self, g: &Global) -> Run {
        let cfg = ModelConfig {
            seed: g.seed,
            workers: g.workers,
            ..ModelConfig::default()
        };
        let report = check_model(self.i, self.j, self.k, &cfg)?;
        let failed: Vec<&str> = report.clauses.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let summary = if failed.is_empty() {
            format!("{} clauses pass", report.clauses.len())
        } else {
            format!("{} of {} clauses fail: {}", failed.len(), report.clauses.len(), failed.join(", "))
        };
        Ok(Outcome {
            status: if report.passed { Status::Pass } else { Status::Fail },
            summary,
            result: serde_json::to_value(&report)?,
        })
    }
}

/// A tuple predicate or coloring over `j1..jk`, with evaluation errors collected.
fn tuple_fn(flag: &str, text: &str, sort: Sort) -> Result<(impl Fn(&[usize]) -> Option<i64> + Send + Sync + 'static, ErrorSlot), InputError> {
    let f = Arc::new(inputs::func(flag, text, &[sort])?);
    let slot = ErrorSlot::default();
    let s = slot.clone();
    let call = move |t: &[usize]| {
        let j: Vec<i64> = t.iter().map(|v| *v as i64).collect();
        match f.eval(&Env::tuple(&j)) {
            Ok(SlValue::Int(v)) => Some(v),
            Ok(SlValue::Bool(b)) => Some(i64::from(b)),
            Ok(SlValue::Real(_)) => None,
            Err(e) => {
                s.record(e);
                None
            }
        }
    };
    Ok((call, slot))
}

#[derive(Args, Debug, Serialize)]
pub struct FindHomogeneous {
    /// Color of the tuple (j1,…,jk), an integer expression with values in 1..=r.
    #[arg(long)]
    pub coloring: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub r: usize,
    /// Ground size N; tuples are drawn from [0,N).
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

impl FindHomogeneous {
    fn run(&self, g: &Global) -> Run {
        let (color, slot) = tuple_fn("--coloring", &self.coloring, Sort::Int)?;
        let coloring: Coloring = Arc::new(move |t: &[usize]| color(t).and_then(|c| usize::try_from(c).ok()).unwrap_or(0));
        let found = find_homogeneous(coloring, self.k, self.r, self.n, self.h, &self.search.options(g));
        slot.check("--coloring")?;
        match found {
            Ok(Some((h, color))) => Ok(Outcome {
                status: Status::Found,
                summary: format!("color {color}: H = {h:?}"),
                result: json!({ "set": h, "color": color }),
            }),
            Ok(None) => Ok(not_found("no homogeneous set of that size", "exhausted")),
            Err(e) => pattern_outcome(e),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RamseyLarge {
    /// Membership of (j1,…,jk) in X, a boolean expression.
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub h: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

impl RamseyLarge {
    fn run(&self, g: &Global) -> Run {
        if self.k == 0 || self.n == 0 {
            return Err(InputError("--k and --n must be at least 1".into()));
        }
        let (pred, slot) = tuple_fn("--set", &self.set, Sort::Bool)?;
        let x = TensorSet::from_predicate(&vec![self.n; self.k], "X", move |t| pred(t) == Some(1));
        let found = ramsey_large(&x, self.h, &self.search.options(g));
        slot.check("--set")?;
        match found {
            Ok(Some(h)) => Ok(Outcome {
                status: Status::Found,
                summary: format!("H = {h:?}"),
                result: json!({ "set": h }),
            }),
            Ok(None) => Ok(not_found("no such H", "exhausted")),
            Err(e) => pattern_outcome(e),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CauchySub {
    /// a_n as an expression in n.
    #[arg(long)]
    pub seq: Option<String>,
    /// One value per line.
    #[arg(long)]
    pub seq_file: Option<PathBuf>,
    /// Prefix length when --seq is given.
    #[arg(long, default_value_t = 256)]
    pub len: usize,
    #[arg(long, default_value_t = 5)]
    pub t: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

impl CauchySub {
    fn run(&self, g: &Global) -> Run {
        let a = inputs::sequence(self.seq.as_deref(), self.seq_file.as_deref(), self.len)?;
        match cauchy_subsequence(&a, self.t, &self.search.options(g)) {
            Ok(r) => Ok(Outcome {
                status: Status::Found,
                summary: format!("indices {:?}, epsilon {}", r.indices, r.epsilon),
                result: serde_json::to_value(&r)?,
            }),
            Err(e) => pattern_outcome(e),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct PatternSearch {
    /// A map [k]→[m] as comma-separated values; repeat for each map.
    #[arg(long, required = true)]
    pub phi: Vec<String>,
    /// Boolean expression over j1..jk; give one per map, or one for all.
    #[arg(long, required = true)]
    pub target: Vec<String>,
    /// Role ground sizes, comma-separated, or one size for every role.
    #[arg(long)]
    pub ground: String,
    #[arg(long)]
    pub depth: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

impl PatternSearch {
    fn run(&self, g: &Global) -> Run {
        let phis = self
            .phi
            .iter()
            .map(|p| Ok(Surjection::from_values(inputs::usize_list("--phi", p)?)?))
            .collect::<Result<Vec<_>, InputError>>()?;
        if self.target.len() != 1 && self.target.len() != phis.len() {
            return Err(InputError(format!("{} targets for {} maps", self.target.len(), phis.len())));
        }
        let m = phis[0].m();
        let mut sizes = inputs::usize_list("--ground", &self.ground)?;
        if sizes.len() == 1 {
            sizes = vec![sizes[0]; m];
        }
        let grounds: Vec<RoleGround> = sizes.iter().map(|&size| RoleGround { size, ordered: true }).collect();
        let mut slots = Vec::new();
        let mut targets = Vec::new();
        for (i, phi) in phis.iter().enumerate() {
            let text = &self.target[i.min(self.target.len() - 1)];
            let (pred, slot) = tuple_fn("--target", text, Sort::Bool)?;
            let dims: Vec<usize> = phi.values().iter().map(|l| sizes.get(l - 1).copied().unwrap_or(0)).collect();
            targets.push(TensorSet::from_predicate(&dims, text.clone(), move |t| pred(t) == Some(1)));
            slots.push(slot);
        }
        let spec = PatternSpec::new(phis, targets, grounds)?;
        let found = search_witness(&spec, self.depth, &self.search.options(g));
        for s in &slots {
            s.check("--target")?;
        }
        match found {
            Ok(w) => {
                let verdict = verify_witness(&spec, &w)?;
                let cert = Certificate::new(&spec, &w, verdict);
                Ok(Outcome {
                    status: Status::Found,
                    summary: format!("witness {:?}", cert.sequences),
                    result: serde_json::to_value(&cert)?,
                })
            }
            Err(e) => pattern_outcome(e),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SumsetMode {
    /// k-fold sums of distinct members of one set B.
    Same,
    /// b_1 + … + b_k with b_s from B_s at increasing positions.
    Distinct,
    /// B + C with every sum in A.
    Full,
    /// (B_1)^{n_1} + … + (B_k)^{n_k} for multiplicities given by --mults.
    General,
}

#[derive(Args, Debug, Serialize)]
pub struct FindSumset {
    #[arg(long, value_enum)]
    pub mode: SumsetMode,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub set_file: Option<PathBuf>,
    #[arg(long)]
    pub bound: usize,
    #[arg(long)]
    pub len: usize,
    /// Number of summands for --mode same and --mode distinct.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Multiplicities for --mode general, e.g. 1,2,2.
    #[arg(long)]
    pub mults: Option<String>,
    /// Products instead of sums.
    #[arg(long)]
    pub product: bool,
    /// Let 0 appear in product mode.
    #[arg(long)]
    pub allow_zero: bool,
    /// Only require combinations whose B_1 member is below the others.
    #[arg(long)]
    pub lead_below_rest: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

impl FindSumset {
    fn spec(&self) -> Result<SumsetSpec, SumsetError> {
        let spec = match self.mode {
            SumsetMode::Same => SumsetSpec::new(vec![self.k])?,
            SumsetMode::Distinct => SumsetSpec::staggered(self.k)?,
            SumsetMode::Full => SumsetSpec::new(vec![1, 1])?,
            SumsetMode::General => {
                let text = self
                    .mults
                    .as_deref()
                    .ok_or_else(|| SumsetError::InvalidSpec("--mode general needs --mults".into()))?;
                let mults = inputs::usize_list("--mults", text).map_err(|e| SumsetError::InvalidSpec(e.0))?;
                SumsetSpec::new(mults)?
            }
        };
        Ok(spec
            .with_mode(if self.product { Mode::Multiplicative } else { Mode::Additive })
            .with_zero_allowed(self.allow_zero)
            .with_lead_below_rest(self.lead_below_rest))
    }

    fn run(&self, g: &Global) -> Run {
        let a = inputs::set(self.set.as_deref(), self.set_file.as_deref(), self.bound)?;
        let spec = self.spec()?;
        let opts = self.search.options(g);
        let additive = spec.mode == Mode::Additive && !spec.lead_below_rest;
        let sets = match self.mode {
            SumsetMode::Same if additive => find_ksum_same(&a, self.k, self.len, &opts).map(|o| o.map(|b| vec![b])),
            SumsetMode::Distinct if additive => find_ksum_distinct(&a, self.k, self.len, &opts),
            SumsetMode::Full if additive => find_full_sumset(&a, self.len, &opts).map(|o| o.map(|(b, c)| vec![b, c])),
            _ => find_general(&a, &spec, self.len, &opts).map(|o| o.map(|c| c.sets)),
        };
        let sets = match sets {
            Ok(Some(s)) => s,
            Ok(None) => return Ok(not_found("no certificate of that length", "exhausted")),
            Err(SumsetError::Pattern(PatternError::BudgetExceeded { nodes })) => {
                return Ok(not_found(format!("search budget of {nodes} nodes exhausted"), "budget"))
            }
            Err(e) => return Err(e.into()),
        };
        let mut cert = SumsetCertificate {
            schema: SUMSET_SCHEMA.into(),
            spec,
            len: self.len,
            sets,
            verified: 0,
        };
        let verdict = verify_certificate(&a, &cert)?;
        if !verdict.passed {
            return Err(InputError(format!("internal: certificate failed re-verification: {:?}", verdict.violation)));
        }
        cert.verified = verdict.checked;
        Ok(Outcome {
            status: Status::Found,
            summary: format!("{:?} ({} combinations verified)", cert.sets, cert.verified),
            result: serde_json::to_value(&cert)?,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    Schnirelmann,
    Asymptotic,
    Banach,
    BanachNested,
}

#[derive(Args, Debug, Serialize)]
pub struct Density {
    #[arg(long, value_enum)]
    pub kind: DensityKind,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub set_file: Option<PathBuf>,
    #[arg(long)]
    pub bound: usize,
}

impl Density {
    fn run(&self) -> Run {
        let a = inputs::set(self.set.as_deref(), self.set_file.as_deref(), self.bound)?;
        let r = match self.kind {
            DensityKind::Schnirelmann => schnirelmann(&a),
            DensityKind::Asymptotic => asymptotic_density_bounds(&a),
            DensityKind::Banach => banach_density(&a),
            DensityKind::BanachNested => banach_nested_tensor_formula(&a),
        };
        let summary = if r.lower == r.upper {
            format!("{}", r.lower)
        } else {
            format!("lower {}, upper {}", r.lower, r.upper)
        };
        Ok(Outcome {
            status: Status::Pass,
            summary,
            result: serde_json::to_value(&r)?,
        })
    }
}

fn limit_outcome(r: Result<tensorlab::limits::DoubleLimit, LimitError>, flag: &str, slot: &ErrorSlot) -> Run {
    slot.check(flag)?;
    match r {
        Ok(l) => Ok(Outcome {
            status: Status::Found,
            summary: format!("{} (tail spread {:e})", l.value, l.spread),
            result: serde_json::to_value(&l)?,
        }),
        Err(e @ (LimitError::NoInnerLimit { .. } | LimitError::NoOuterLimit { .. })) => {
            Ok(not_found(e.to_string(), "no_limit"))
        }
        Err(e @ LimitError::CapTooSmall { .. }) => Ok(not_found(e.to_string(), "cap_too_small")),
        Err(e) => Err(e.into()),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct DoubleLimit {
    /// a(n, m) as an expression in n and m.
    #[arg(long)]
    pub expr: String,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 64)]
    pub n_cap: usize,
    #[arg(long, default_value_t = 4096)]
    pub m_cap: usize,
    /// Points read per tail quarter; every index when omitted.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Cancel a c/j error term before the tail test.
    #[arg(long)]
    pub extrapolate: bool,
}

impl DoubleLimit {
    fn run(&self) -> Run {
        let f = inputs::func("--expr", &self.expr, &[Sort::Int, Sort::Real])?;
        let slot = ErrorSlot::default();
        let opts = LimitOptions {
            tol: self.tol,
            caps: Caps {
                n: self.n_cap,
                m: self.m_cap,
            },
            samples: self.samples,
            extrapolate: self.extrapolate,
        };
        let r = iterated_double_limit(inputs::nm_fn(f, slot.clone()), &opts);
        limit_outcome(r, "--expr", &slot)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct Integrate {
    /// f(x), an expression in the real variable x.
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 16)]
    pub n_cap: usize,
    #[arg(long, default_value_t = 256)]
    pub m_cap: usize,
    #[arg(long, default_value_t = 6)]
    pub samples: usize,
}

impl Integrate {
    fn run(&self) -> Run {
        let f = inputs::func("--f", &self.f, &[Sort::Real, Sort::Int])?;
        let slot = ErrorSlot::default();
        let opts = LimitOptions {
            tol: self.tol,
            caps: Caps {
                n: self.n_cap,
                m: self.m_cap,
            },
            samples: Some(self.samples),
            extrapolate: true,
        };
        let r = riemann_double(inputs::x_fn(f, slot.clone()), &opts);
        limit_outcome(r, "--f", &slot)
    }
}

