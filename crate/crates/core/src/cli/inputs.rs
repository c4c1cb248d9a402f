//! Turning command-line text into sets, sequences and functions.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use tensorlab::intset::IntSet;
use tensorlab::setlang::{eval_set, parse_func, parse_list_file, parse_set, Env, FuncExpr, SetlangError, Sort, Value};

use super::InputError;

pub fn read_file(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

/// A set from an expression or from a list file, exactly one of which is given.
pub fn set(expr: Option<&str>, file: Option<&Path>, bound: usize) -> Result<IntSet, InputError> {
    match (expr, file) {
        (Some(e), None) => Ok(eval_set(&parse_set(e, bound).map_err(|e| InputError(format!("--set: {e}")))?)),
        (None, Some(p)) => parse_list_file(&read_file(p)?, bound).map_err(|e| InputError(format!("{}: {e}", p.display()))),
        _ => Err(InputError("give exactly one of --set and --set-file".into())),
    }
}

pub fn func(flag: &str, text: &str, allowed: &[Sort]) -> Result<FuncExpr, InputError> {
    let f = parse_func(text).map_err(|e| InputError(format!("{flag}: {e}")))?;
    if !allowed.contains(&f.sort()) {
        let want: Vec<String> = allowed.iter().map(|s| s.to_string()).collect();
        return Err(InputError(format!("{flag}: expression is {}, expected {}", f.sort(), want.join(" or "))));
    }
    Ok(f)
}

/// Collects the first evaluation error raised inside a callback that cannot fail.
#[derive(Clone, Default)]
pub struct ErrorSlot(Arc<OnceLock<SetlangError>>);

impl ErrorSlot {
    pub fn record(&self, e: SetlangError) {
        let _ = self.0.set(e);
    }

    pub fn check(&self, flag: &str) -> Result<(), InputError> {
        match self.0.get() {
            Some(e) => Err(InputError(format!("{flag}: evaluation failed: {e}"))),
            None => Ok(()),
        }
    }
}

pub fn as_real(v: Value) -> f64 {
    match v {
        Value::Int(i) => i as f64,
        Value::Real(r) => r,
        Value::Bool(b) => f64::from(u8::from(b)),
    }
}

/// Numeric closure over `n` and `m`; evaluation errors land in `slot` and yield NaN.
pub fn nm_fn(f: FuncExpr, slot: ErrorSlot) -> impl Fn(usize, usize) -> f64 {
    move |n, m| match f.eval(&Env::nm(n as i64, m as i64)) {
        Ok(v) => as_real(v),
        Err(e) => {
            slot.record(e);
            f64::NAN
        }
    }
}

pub fn x_fn(f: FuncExpr, slot: ErrorSlot) -> impl Fn(f64) -> f64 {
    move |x| match f.eval(&Env::x(x)) {
        Ok(v) => as_real(v),
        Err(e) => {
            slot.record(e);
            f64::NAN
        }
    }
}

/// `a_1..a_len` from an expression in `n` or from a file with one value per line.
pub fn sequence(expr: Option<&str>, file: Option<&Path>, len: usize) -> Result<Vec<f64>, InputError> {
    match (expr, file) {
        (Some(e), None) => {
            let f = func("--seq", e, &[Sort::Int, Sort::Real])?;
            (1..=len)
                .map(|n| {
                    f.eval(&Env::nm(n as i64, 0))
                        .map(as_real)
                        .map_err(|e| InputError(format!("--seq at n={n}: {e}")))
                })
                .collect()
        }
        (None, Some(p)) => {
            let text = read_file(p)?;
            let mut out = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let t = line.split('#').next().unwrap_or("").trim();
                if t.is_empty() {
                    continue;
                }
                let v: f64 = t
                    .parse()
                    .map_err(|_| InputError(format!("{}:{}: expected a number, found {t:?}", p.display(), i + 1)))?;
                out.push(v);
            }
            Ok(out)
        }
        _ => Err(InputError("give exactly one of --seq and --seq-file".into())),
    }
}

/// Comma-separated positive integers, e.g. `1,2,2`.
pub fn usize_list(flag: &str, text: &str) -> Result<Vec<usize>, InputError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| InputError(format!("{flag}: {s:?} is not a nonnegative integer")))
        })
        .collect()
}
