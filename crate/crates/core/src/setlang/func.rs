use std::fmt;

use serde::Serialize;

use super::lexer::{describe, Cursor, Tok};
use super::{Pos, Result, SetlangError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Int,
    Real,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "integer",
            Sort::Real => "real",
            Sort::Bool => "boolean",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
}

/// Variable bindings: `n`, `m` and `j1, j2, …` are integers, `x` is real.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Env {
    pub n: Option<i64>,
    pub m: Option<i64>,
    pub x: Option<f64>,
    pub j: Vec<i64>,
}

impl Env {
    pub fn nm(n: i64, m: i64) -> Self {
        Env {
            n: Some(n),
            m: Some(m),
            ..Env::default()
        }
    }

    pub fn x(x: f64) -> Self {
        Env {
            x: Some(x),
            ..Env::default()
        }
    }

    pub fn tuple(j: &[i64]) -> Self {
        Env {
            j: j.to_vec(),
            ..Env::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Var {
    N,
    M,
    X,
    J(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Abs,
    Real,
    Floor,
}

const FUNCS: [(&str, Func); 8] = [
    ("exp", Func::Exp),
    ("ln", Func::Ln),
    ("sqrt", Func::Sqrt),
    ("sin", Func::Sin),
    ("cos", Func::Cos),
    ("abs", Func::Abs),
    ("real", Func::Real),
    ("floor", Func::Floor),
];

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Node {
    Int(i64),
    Real(f64),
    Var(Var),
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    If(Box<Node>, Box<Node>, Box<Node>),
}

#[derive(Clone, Debug, PartialEq)]
enum Instr {
    Push(Value),
    Load(Var),
    Neg,
    Not,
    Bin(BinOp),
    Call(Func),
    JumpIfFalse(usize),
    Jump(usize),
}

/// A sort-checked expression compiled to a stack program.
#[derive(Clone, Debug, PartialEq)]
pub struct FuncExpr {
    ast: Node,
    sort: Sort,
    code: Vec<Instr>,
}

pub fn parse_func(text: &str) -> Result<FuncExpr> {
    let mut p = Parser { cur: Cursor::new(text)? };
    let (ast, sort) = p.expr()?;
    p.cur.expect_end()?;
    let mut code = Vec::new();
    compile(&ast, &mut code);
    Ok(FuncExpr { ast, sort, code })
}

impl FuncExpr {
    pub fn sort(&self) -> Sort {
        self.sort
    }

    #[cfg(test)]
    pub(crate) fn ast(&self) -> &Node {
        &self.ast
    }

    pub fn eval(&self, env: &Env) -> Result<Value> {
        let mut stack: Vec<Value> = Vec::with_capacity(8);
        let mut pc = 0;
        while pc < self.code.len() {
            match &self.code[pc] {
                Instr::Push(v) => stack.push(*v),
                Instr::Load(v) => stack.push(load(*v, env)?),
                Instr::Neg => {
                    let a = stack.pop().expect("operand");
                    stack.push(neg(a)?);
                }
                Instr::Not => {
                    let a = stack.pop().expect("operand");
                    stack.push(Value::Bool(!as_bool(a)));
                }
                Instr::Bin(op) => {
                    let b = stack.pop().expect("operand");
                    let a = stack.pop().expect("operand");
                    stack.push(binary(*op, a, b)?);
                }
                Instr::Call(f) => {
                    let a = stack.pop().expect("operand");
                    stack.push(call(*f, a)?);
                }
                Instr::JumpIfFalse(t) => {
                    if !as_bool(stack.pop().expect("condition")) {
                        pc = *t;
                        continue;
                    }
                }
                Instr::Jump(t) => {
                    pc = *t;
                    continue;
                }
            }
            pc += 1;
        }
        Ok(stack.pop().expect("result"))
    }

    /// Integer result; reals are rejected rather than truncated.
    pub fn eval_int(&self, env: &Env) -> Result<i64> {
        match self.eval(env)? {
            Value::Int(v) => Ok(v),
            Value::Bool(b) => Ok(i64::from(b)),
            Value::Real(_) => Err(Pos { line: 1, col: 1 }.sort("expected an integer expression")),
        }
    }

    /// Real result; integers must be converted with `real(…)` in the source.
    pub fn eval_real(&self, env: &Env) -> Result<f64> {
        match self.eval(env)? {
            Value::Real(v) => Ok(v),
            _ => Err(Pos { line: 1, col: 1 }.sort("expected a real expression")),
        }
    }
}

fn compile(node: &Node, code: &mut Vec<Instr>) {
    match node {
        Node::Int(v) => code.push(Instr::Push(Value::Int(*v))),
        Node::Real(v) => code.push(Instr::Push(Value::Real(*v))),
        Node::Var(v) => code.push(Instr::Load(*v)),
        Node::Neg(a) => {
            compile(a, code);
            code.push(Instr::Neg);
        }
        Node::Not(a) => {
            compile(a, code);
            code.push(Instr::Not);
        }
        Node::Bin(op, a, b) => {
            compile(a, code);
            compile(b, code);
            code.push(Instr::Bin(*op));
        }
        Node::Call(f, a) => {
            compile(a, code);
            code.push(Instr::Call(*f));
        }
        Node::If(c, t, e) => {
            compile(c, code);
            let jf = code.len();
            code.push(Instr::JumpIfFalse(0));
            compile(t, code);
            let j = code.len();
            code.push(Instr::Jump(0));
            code[jf] = Instr::JumpIfFalse(code.len());
            compile(e, code);
            code[j] = Instr::Jump(code.len());
        }
    }
}

pub(crate) fn load(v: Var, env: &Env) -> Result<Value> {
    let missing = |name: String| SetlangError::Unbound(name);
    match v {
        Var::N => env.n.map(Value::Int).ok_or_else(|| missing("n".into())),
        Var::M => env.m.map(Value::Int).ok_or_else(|| missing("m".into())),
        Var::X => env.x.map(Value::Real).ok_or_else(|| missing("x".into())),
        Var::J(i) => env
            .j
            .get(i - 1)
            .copied()
            .map(Value::Int)
            .ok_or_else(|| missing(format!("j{i}"))),
    }
}

fn as_bool(v: Value) -> bool {
    matches!(v, Value::Bool(true))
}

pub(crate) fn neg(a: Value) -> Result<Value> {
    match a {
        Value::Int(v) => v.checked_neg().map(Value::Int).ok_or(SetlangError::Overflow),
        Value::Real(v) => Ok(Value::Real(-v)),
        Value::Bool(_) => unreachable!("sort checked"),
    }
}

pub(crate) fn binary(op: BinOp, a: Value, b: Value) -> Result<Value> {
    use BinOp::*;
    Ok(match (a, b) {
        (Value::Int(x), Value::Int(y)) => match op {
            Add => Value::Int(x.checked_add(y).ok_or(SetlangError::Overflow)?),
            Sub => Value::Int(x.checked_sub(y).ok_or(SetlangError::Overflow)?),
            Mul => Value::Int(x.checked_mul(y).ok_or(SetlangError::Overflow)?),
            Div => {
                if y == 0 {
                    return Err(SetlangError::DivisionByZero);
                }
                Value::Int(x.checked_div(y).ok_or(SetlangError::Overflow)?)
            }
            Mod => {
                if y == 0 {
                    return Err(SetlangError::DivisionByZero);
                }
                if x < 0 || y < 0 {
                    return Err(SetlangError::NegativeMod(x, y));
                }
                Value::Int(x % y)
            }
            Lt => Value::Bool(x < y),
            Le => Value::Bool(x <= y),
            Gt => Value::Bool(x > y),
            Ge => Value::Bool(x >= y),
            Eq => Value::Bool(x == y),
            Ne => Value::Bool(x != y),
            And | Or => unreachable!("sort checked"),
        },
        (Value::Real(x), Value::Real(y)) => match op {
            Add => Value::Real(x + y),
            Sub => Value::Real(x - y),
            Mul => Value::Real(x * y),
            Div => {
                if y == 0.0 {
                    return Err(SetlangError::DivisionByZero);
                }
                Value::Real(x / y)
            }
            Lt => Value::Bool(x < y),
            Le => Value::Bool(x <= y),
            Gt => Value::Bool(x > y),
            Ge => Value::Bool(x >= y),
            Eq => Value::Bool(x == y),
            Ne => Value::Bool(x != y),
            Mod | And | Or => unreachable!("sort checked"),
        },
        (Value::Bool(x), Value::Bool(y)) => match op {
            And => Value::Bool(x && y),
            Or => Value::Bool(x || y),
            Eq => Value::Bool(x == y),
            Ne => Value::Bool(x != y),
            _ => unreachable!("sort checked"),
        },
        _ => unreachable!("sort checked"),
    })
}

pub(crate) fn call(f: Func, a: Value) -> Result<Value> {
    Ok(match (f, a) {
        (Func::Abs, Value::Int(v)) => Value::Int(v.checked_abs().ok_or(SetlangError::Overflow)?),
        (Func::Abs, Value::Real(v)) => Value::Real(v.abs()),
        (Func::Real, Value::Int(v)) => Value::Real(v as f64),
        (Func::Floor, Value::Real(v)) => {
            let r = v.floor();
            if !r.is_finite() || r < i64::MIN as f64 || r >= i64::MAX as f64 {
                return Err(SetlangError::Floor(v));
            }
            Value::Int(r as i64)
        }
        (Func::Exp, Value::Real(v)) => Value::Real(v.exp()),
        (Func::Ln, Value::Real(v)) => Value::Real(v.ln()),
        (Func::Sqrt, Value::Real(v)) => Value::Real(v.sqrt()),
        (Func::Sin, Value::Real(v)) => Value::Real(v.sin()),
        (Func::Cos, Value::Real(v)) => Value::Real(v.cos()),
        _ => unreachable!("sort checked"),
    })
}

struct Parser {
    cur: Cursor,
}

type Typed = (Node, Sort);

impl Parser {
    fn expr(&mut self) -> Result<Typed> {
        let at = self.cur.pos();
        if self.cur.eat_word("if") {
            let (c, cs) = self.expr()?;
            if cs != Sort::Bool {
                return Err(at.sort(format!("condition is {cs}, expected boolean")));
            }
            if !self.cur.eat_word("then") {
                return Err(self.cur.pos().syntax(format!("expected 'then', found {}", describe(self.cur.peek()))));
            }
            let (t, ts) = self.expr()?;
            if !self.cur.eat_word("else") {
                return Err(self.cur.pos().syntax(format!("expected 'else', found {}", describe(self.cur.peek()))));
            }
            let (e, es) = self.expr()?;
            if ts != es {
                return Err(at.sort(format!("branches are {ts} and {es}")));
            }
            return Ok((Node::If(Box::new(c), Box::new(t), Box::new(e)), ts));
        }
        self.or()
    }

    fn logic(&mut self, word: &str, op: BinOp, next: fn(&mut Self) -> Result<Typed>) -> Result<Typed> {
        let at = self.cur.pos();
        let mut lhs = next(self)?;
        while self.cur.eat_word(word) {
            let rhs = next(self)?;
            if lhs.1 != Sort::Bool || rhs.1 != Sort::Bool {
                return Err(at.sort(format!("'{word}' needs booleans, got {} and {}", lhs.1, rhs.1)));
            }
            lhs = (Node::Bin(op, Box::new(lhs.0), Box::new(rhs.0)), Sort::Bool);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Typed> {
        self.logic("or", BinOp::Or, Self::and)
    }

    fn and(&mut self) -> Result<Typed> {
        self.logic("and", BinOp::And, Self::not)
    }

    fn not(&mut self) -> Result<Typed> {
        let at = self.cur.pos();
        if self.cur.eat_word("not") {
            let (a, s) = self.not()?;
            if s != Sort::Bool {
                return Err(at.sort(format!("'not' needs a boolean, got {s}")));
            }
            return Ok((Node::Not(Box::new(a)), Sort::Bool));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Typed> {
        let at = self.cur.pos();
        let lhs = self.sum()?;
        let ops = [
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("==", BinOp::Eq),
            ("!=", BinOp::Ne),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ];
        for (sym, op) in ops {
            if self.cur.eat_sym(sym) {
                let rhs = self.sum()?;
                let (lhs, rhs) = widen_literals(lhs, rhs);
                if lhs.1 != rhs.1 {
                    return Err(at.sort(format!("cannot compare {} with {}", lhs.1, rhs.1)));
                }
                if lhs.1 == Sort::Bool && !matches!(op, BinOp::Eq | BinOp::Ne) {
                    return Err(at.sort("booleans are not ordered"));
                }
                return Ok((Node::Bin(op, Box::new(lhs.0), Box::new(rhs.0)), Sort::Bool));
            }
        }
        Ok(lhs)
    }

    fn arith(at: Pos, op: BinOp, lhs: Typed, rhs: Typed) -> Result<Typed> {
        let (lhs, rhs) = widen_literals(lhs, rhs);
        if lhs.1 != rhs.1 {
            return Err(at.sort(format!("mixed {} and {} operands; use real(…) or floor(…)", lhs.1, rhs.1)));
        }
        match (op, lhs.1) {
            (_, Sort::Bool) => Err(at.sort("arithmetic on booleans")),
            (BinOp::Mod, Sort::Real) => Err(at.sort("'mod' needs integers")),
            _ => Ok((Node::Bin(op, Box::new(lhs.0), Box::new(rhs.0)), lhs.1)),
        }
    }

    fn sum(&mut self) -> Result<Typed> {
        let mut lhs = self.prod()?;
        loop {
            let at = self.cur.pos();
            let op = if self.cur.eat_sym("+") {
                BinOp::Add
            } else if self.cur.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.prod()?;
            lhs = Self::arith(at, op, lhs, rhs)?;
        }
    }

    fn prod(&mut self) -> Result<Typed> {
        let mut lhs = self.unary()?;
        loop {
            let at = self.cur.pos();
            let op = if self.cur.eat_sym("*") {
                BinOp::Mul
            } else if self.cur.eat_sym("/") {
                BinOp::Div
            } else if self.cur.eat_word("mod") {
                BinOp::Mod
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Self::arith(at, op, lhs, rhs)?;
        }
    }

    fn unary(&mut self) -> Result<Typed> {
        let at = self.cur.pos();
        if self.cur.eat_sym("-") {
            let (a, s) = self.unary()?;
            if s == Sort::Bool {
                return Err(at.sort("cannot negate a boolean"));
            }
            return Ok((Node::Neg(Box::new(a)), s));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Typed> {
        let (tok, at) = self.cur.bump();
        match tok {
            Tok::Int(v) => {
                let v = i64::try_from(v).map_err(|_| at.syntax(format!("integer {v} is too large")))?;
                Ok((Node::Int(v), Sort::Int))
            }
            Tok::Real(v) => Ok((Node::Real(v), Sort::Real)),
            Tok::Sym("(") => {
                let inner = self.expr()?;
                self.cur.expect_sym(")")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(var) = variable(&name) {
                    let sort = if var == Var::X { Sort::Real } else { Sort::Int };
                    return Ok((Node::Var(var), sort));
                }
                let Some(&(_, f)) = FUNCS.iter().find(|(n, _)| *n == name) else {
                    return Err(at.syntax(format!("unknown name '{name}'")));
                };
                self.cur.expect_sym("(")?;
                let (arg, s) = self.expr()?;
                self.cur.expect_sym(")")?;
                let out = match (f, s) {
                    (Func::Abs, Sort::Int | Sort::Real) => s,
                    (Func::Real, Sort::Int) => Sort::Real,
                    (Func::Floor, Sort::Real) => Sort::Int,
                    (Func::Exp | Func::Ln | Func::Sqrt | Func::Sin | Func::Cos, Sort::Real) => Sort::Real,
                    _ => return Err(at.sort(format!("{name} does not take a {s} argument"))),
                };
                Ok((Node::Call(f, Box::new(arg)), out))
            }
            t => Err(at.syntax(format!("expected an expression, found {}", describe(&t)))),
        }
    }
}

/// A bare integer literal next to a real operand is read as a real.
fn widen_literals(lhs: Typed, rhs: Typed) -> (Typed, Typed) {
    let widen = |t: Typed, other: Sort| match t {
        (Node::Int(v), Sort::Int) if other == Sort::Real => (Node::Real(v as f64), Sort::Real),
        t => t,
    };
    let (ls, rs) = (lhs.1, rhs.1);
    (widen(lhs, rs), widen(rhs, ls))
}

fn variable(name: &str) -> Option<Var> {
    match name {
        "n" => Some(Var::N),
        "m" => Some(Var::M),
        "x" => Some(Var::X),
        _ => {
            let digits = name.strip_prefix('j')?;
            if digits.starts_with('0') {
                return None;
            }
            digits.parse::<usize>().ok().filter(|i| *i >= 1).map(Var::J)
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::N => f.write_str("n"),
            Var::M => f.write_str("m"),
            Var::X => f.write_str("x"),
            Var::J(i) => write!(f, "j{i}"),
        }
    }
}

impl BinOp {
    fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Mod => "mod",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            And => "and",
            Or => "or",
        }
    }
}

struct Operand<'a>(&'a Node);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Node::Int(_) | Node::Real(_) | Node::Var(_) | Node::Call(..) => write!(f, "{}", self.0),
            other => write!(f, "({other})"),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Int(v) => write!(f, "{v}"),
            Node::Real(v) => write!(f, "{v:?}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => write!(f, "-{}", Operand(a)),
            Node::Not(a) => write!(f, "not {}", Operand(a)),
            Node::Bin(op, a, b) => write!(f, "{} {} {}", Operand(a), op.symbol(), Operand(b)),
            Node::Call(func, a) => {
                let name = FUNCS.iter().find(|(_, g)| g == func).map_or("?", |(n, _)| n);
                write!(f, "{name}({a})")
            }
            Node::If(c, t, e) => write!(f, "if {} then {} else {}", Operand(c), Operand(t), Operand(e)),
        }
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Reference semantics by structural recursion.
    fn walk(node: &Node, env: &Env) -> Result<Value> {
        match node {
            Node::Int(v) => Ok(Value::Int(*v)),
            Node::Real(v) => Ok(Value::Real(*v)),
            Node::Var(v) => load(*v, env),
            Node::Neg(a) => neg(walk(a, env)?),
            Node::Not(a) => Ok(Value::Bool(walk(a, env)? == Value::Bool(false))),
            Node::Bin(op, a, b) => {
                let x = walk(a, env)?;
                let y = walk(b, env)?;
                binary(*op, x, y)
            }
            Node::Call(func, a) => call(*func, walk(a, env)?),
            Node::If(c, t, e) => {
                if walk(c, env)? == Value::Bool(true) {
                    walk(t, env)
                } else {
                    walk(e, env)
                }
            }
        }
    }

    fn int(text: &str, env: &Env) -> i64 {
        parse_func(text).unwrap().eval_int(env).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(int("(j2 - j1) mod 2", &Env::tuple(&[1, 3])), 0);
        assert_eq!(parse_func("exp(0 - x*x)").unwrap().eval_real(&Env::x(0.0)).unwrap(), 1.0);
        assert_eq!(int("if n < m then n else m", &Env::nm(7, 3)), 3);
        assert_eq!(int("7 / 2 + 7 mod 2", &Env::default()), 4);
        assert_eq!(int("floor(2.5e1 / 2.0)", &Env::default()), 12);
        assert_eq!(int("1 + 2 * 3 - -4", &Env::default()), 11);
        let lazy = parse_func("if n == 0 then 0 else 10 / n").unwrap();
        assert_eq!(lazy.eval_int(&Env::nm(0, 0)).unwrap(), 0);
    }

    #[test]
    fn sort_errors() {
        for bad in ["n + x", "x mod 2.0", "exp(n)", "floor(n)", "if n then 1 else 2", "if n < 1 then 1 else 2.0", "not n", "(n < 1) < (m < 1)"] {
            assert!(matches!(parse_func(bad), Err(SetlangError::Sort { .. })), "{bad}");
        }
        assert!(matches!(parse_func("real(n) + x"), Ok(f) if f.sort() == Sort::Real));
        assert_eq!(parse_func("2 * x < 1").unwrap().to_string(), "(2.0 * x) < 1.0");
        assert!(matches!(parse_func("(1 + 1) * x"), Err(SetlangError::Sort { .. })));
        assert!(matches!(parse_func("n +"), Err(SetlangError::Syntax { line: 1, col: 4, .. })));
        assert!(matches!(parse_func("j0"), Err(SetlangError::Syntax { .. })));
        assert!(matches!(parse_func("foo(1)"), Err(SetlangError::Syntax { .. })));
    }

    #[test]
    fn eval_errors() {
        let e = Env::nm(-3, 0);
        assert_eq!(parse_func("n / m").unwrap().eval(&e), Err(SetlangError::DivisionByZero));
        assert_eq!(parse_func("n mod 2").unwrap().eval(&e), Err(SetlangError::NegativeMod(-3, 2)));
        assert_eq!(parse_func("n mod m").unwrap().eval(&e), Err(SetlangError::DivisionByZero));
        assert_eq!(parse_func("x").unwrap().eval(&e), Err(SetlangError::Unbound("x".into())));
        assert_eq!(parse_func("j3").unwrap().eval(&Env::tuple(&[1])), Err(SetlangError::Unbound("j3".into())));
        assert_eq!(
            parse_func("9223372036854775807 + 1").unwrap().eval(&e),
            Err(SetlangError::Overflow)
        );
        assert!(matches!(parse_func("floor(exp(1000.0))").unwrap().eval(&e), Err(SetlangError::Floor(_))));
    }

    fn gen(rng: &mut ChaCha8Rng, sort: Sort, depth: u32) -> Node {
        let leaf = depth == 0 || rng.gen_bool(0.3);
        match sort {
            Sort::Int if leaf => match rng.gen_range(0..4) {
                0 => Node::Int(rng.gen_range(0..20)),
                1 => Node::Var(Var::N),
                2 => Node::Var(Var::M),
                _ => Node::Var(Var::J(rng.gen_range(1..3))),
            },
            Sort::Real if leaf => match rng.gen_range(0..2) {
                0 => Node::Real(rng.gen_range(0..40) as f64 / 4.0),
                _ => Node::Var(Var::X),
            },
            Sort::Bool if leaf => {
                let s = if rng.gen_bool(0.5) { Sort::Int } else { Sort::Real };
                Node::Bin(BinOp::Lt, Box::new(gen(rng, s, 0)), Box::new(gen(rng, s, 0)))
            }
            Sort::Int => match rng.gen_range(0..5) {
                0 => Node::Neg(Box::new(gen(rng, Sort::Int, depth - 1))),
                1 => Node::Call(Func::Abs, Box::new(gen(rng, Sort::Int, depth - 1))),
                2 => Node::Call(Func::Floor, Box::new(gen(rng, Sort::Real, depth - 1))),
                3 => Node::If(
                    Box::new(gen(rng, Sort::Bool, depth - 1)),
                    Box::new(gen(rng, Sort::Int, depth - 1)),
                    Box::new(gen(rng, Sort::Int, depth - 1)),
                ),
                _ => {
                    let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod];
                    let op = ops[rng.gen_range(0..ops.len())];
                    Node::Bin(op, Box::new(gen(rng, Sort::Int, depth - 1)), Box::new(gen(rng, Sort::Int, depth - 1)))
                }
            },
            Sort::Real => match rng.gen_range(0..4) {
                0 => Node::Call(
                    [Func::Exp, Func::Sin, Func::Cos, Func::Sqrt, Func::Ln, Func::Abs][rng.gen_range(0..6)],
                    Box::new(gen(rng, Sort::Real, depth - 1)),
                ),
                1 => Node::Call(Func::Real, Box::new(gen(rng, Sort::Int, depth - 1))),
                2 => Node::Neg(Box::new(gen(rng, Sort::Real, depth - 1))),
                _ => {
                    let ops = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];
                    let op = ops[rng.gen_range(0..ops.len())];
                    Node::Bin(op, Box::new(gen(rng, Sort::Real, depth - 1)), Box::new(gen(rng, Sort::Real, depth - 1)))
                }
            },
            Sort::Bool => match rng.gen_range(0..3) {
                0 => Node::Not(Box::new(gen(rng, Sort::Bool, depth - 1))),
                1 => Node::Bin(
                    if rng.gen_bool(0.5) { BinOp::And } else { BinOp::Or },
                    Box::new(gen(rng, Sort::Bool, depth - 1)),
                    Box::new(gen(rng, Sort::Bool, depth - 1)),
                ),
                _ => {
                    let ops = [BinOp::Le, BinOp::Ge, BinOp::Eq, BinOp::Ne, BinOp::Gt];
                    let s = if rng.gen_bool(0.5) { Sort::Int } else { Sort::Real };
                    Node::Bin(
                        ops[rng.gen_range(0..ops.len())],
                        Box::new(gen(rng, s, depth - 1)),
                        Box::new(gen(rng, s, depth - 1)),
                    )
                }
            },
        }
    }

    /// Equality that treats NaN as equal to itself.
    fn same(a: &Result<Value>, b: &Result<Value>) -> bool {
        format!("{a:?}") == format!("{b:?}")
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn stack_program_matches_tree_walk(seed in any::<u64>(), n in -5i64..30, m in -5i64..30, x in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sort = [Sort::Int, Sort::Real, Sort::Bool][rng.gen_range(0..3)];
            let ast = gen(&mut rng, sort, 5);
            let text = ast.to_string();
            let parsed = parse_func(&text).unwrap();
            prop_assert_eq!(parsed.ast(), &ast, "{}", text);
            prop_assert_eq!(parsed.sort(), sort);
            prop_assert_eq!(parsed.to_string(), text.clone());
            let env = Env { n: Some(n), m: Some(m), x: Some(x), j: vec![n + 1, m - 2] };
            let fast = parsed.eval(&env);
            let slow = walk(&ast, &env);
            prop_assert!(same(&fast, &slow), "{} -> {:?} vs {:?}", text, fast, slow);
        }

        #[test]
        fn parser_is_total(text in "[a-z0-9 ()+*/<>=!.\\-]{0,30}") {
            match parse_func(&text) {
                Ok(f) => { let _ = f.eval(&Env::nm(1, 2)); }
                Err(SetlangError::Syntax { line, col, .. }) | Err(SetlangError::Sort { line, col, .. }) => {
                    prop_assert!(line >= 1 && col >= 1);
                }
                Err(other) => prop_assert!(false, "unexpected {other:?}"),
            }
        }
    }
}
