use std::fmt;

use super::lexer::{describe, Cursor, Tok};
use super::{Pos, Result, SetlangError};
use crate::intset::IntSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetNode {
    All,
    Empty,
    /// Inclusive ranges `lo..hi`; single values have `lo == hi`.
    List(Vec<(u64, u64)>),
    Residue { modulus: u64, residues: Vec<u64> },
    Complement(Box<SetNode>),
    Union(Box<SetNode>, Box<SetNode>),
    Intersection(Box<SetNode>, Box<SetNode>),
    Difference(Box<SetNode>, Box<SetNode>),
}

/// A parsed set together with its bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetExpr {
    pub node: SetNode,
    pub bound: usize,
}

pub fn parse_set(text: &str, bound: usize) -> Result<SetExpr> {
    if bound == 0 {
        return Err(SetlangError::ZeroBound);
    }
    let mut p = Parser {
        cur: Cursor::new(text)?,
        bound,
    };
    let node = p.expr()?;
    p.cur.expect_end()?;
    Ok(SetExpr { node, bound })
}

pub fn eval_set(e: &SetExpr) -> IntSet {
    let bits = eval_node(&e.node, e.bound);
    IntSet::from_bits(bits).expect("bound checked at parse time")
}

/// One integer per line; blank lines and `#` comments are skipped.
pub fn parse_list_file(text: &str, bound: usize) -> Result<IntSet> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let pos = Pos {
            line: i + 1,
            col: body.len() - body.trim_start().len() + 1,
        };
        let v: u64 = trimmed
            .parse()
            .map_err(|_| pos.syntax(format!("expected a nonnegative integer, found {trimmed:?}")))?;
        check_bound(v, bound, pos)?;
        values.push(v as usize);
    }
    IntSet::from_values(bound, values).map_err(|_| SetlangError::ZeroBound)
}

fn check_bound(v: u64, bound: usize, pos: Pos) -> Result<()> {
    if v >= bound as u64 {
        return Err(SetlangError::Bound {
            line: pos.line,
            col: pos.col,
            value: v,
            bound,
        });
    }
    Ok(())
}

struct Parser {
    cur: Cursor,
    bound: usize,
}

impl Parser {
    fn expr(&mut self) -> Result<SetNode> {
        let mut lhs = self.term()?;
        loop {
            if self.cur.eat_sym("|") {
                lhs = SetNode::Union(Box::new(lhs), Box::new(self.term()?));
            } else if self.cur.eat_sym("\\") {
                lhs = SetNode::Difference(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<SetNode> {
        let mut lhs = self.factor()?;
        while self.cur.eat_sym("&") {
            lhs = SetNode::Intersection(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<SetNode> {
        if self.cur.eat_sym("~") {
            return Ok(SetNode::Complement(Box::new(self.factor()?)));
        }
        if self.cur.eat_sym("(") {
            let inner = self.expr()?;
            self.cur.expect_sym(")")?;
            return Ok(inner);
        }
        if self.cur.eat_word("all") {
            return Ok(SetNode::All);
        }
        if self.cur.eat_word("empty") {
            return Ok(SetNode::Empty);
        }
        if self.cur.eat_word("mod") {
            return self.residue();
        }
        if matches!(self.cur.peek(), Tok::Int(_)) {
            return self.list();
        }
        Err(self.cur.pos().syntax(format!("expected a set, found {}", describe(self.cur.peek()))))
    }

    fn residue(&mut self) -> Result<SetNode> {
        let (modulus, at) = self.cur.expect_int()?;
        if modulus == 0 {
            return Err(at.syntax("zero modulus"));
        }
        self.cur.expect_sym(":")?;
        let mut residues = Vec::new();
        loop {
            let (r, at) = self.cur.expect_int()?;
            if r >= modulus {
                return Err(at.syntax(format!("residue {r} is not below the modulus {modulus}")));
            }
            residues.push(r);
            if !self.cur.eat_sym(",") {
                return Ok(SetNode::Residue { modulus, residues });
            }
        }
    }

    fn list(&mut self) -> Result<SetNode> {
        let mut items = Vec::new();
        loop {
            let (lo, at) = self.cur.expect_int()?;
            check_bound(lo, self.bound, at)?;
            let mut hi = lo;
            if self.cur.eat_sym("..") || self.cur.eat_sym("-") {
                let (v, at) = self.cur.expect_int()?;
                check_bound(v, self.bound, at)?;
                if v < lo {
                    return Err(at.syntax(format!("range {lo}..{v} runs backwards")));
                }
                hi = v;
            }
            items.push((lo, hi));
            if !self.cur.eat_sym(",") {
                return Ok(SetNode::List(items));
            }
        }
    }
}

fn eval_node(node: &SetNode, bound: usize) -> crate::bitset::BitSet {
    use crate::bitset::BitSet;
    match node {
        SetNode::All => BitSet::full(bound),
        SetNode::Empty => BitSet::new(bound),
        SetNode::List(items) => {
            BitSet::from_indices(bound, items.iter().flat_map(|&(lo, hi)| lo as usize..=hi as usize))
        }
        SetNode::Residue { modulus, residues } => {
            let p = *modulus as usize;
            let mut out = BitSet::new(bound);
            for &r in residues {
                for v in (r as usize..bound).step_by(p) {
                    out.insert(v);
                }
            }
            out
        }
        SetNode::Complement(x) => eval_node(x, bound).complement(),
        SetNode::Union(a, b) => {
            let mut out = eval_node(a, bound);
            out.union_with(&eval_node(b, bound));
            out
        }
        SetNode::Intersection(a, b) => {
            let mut out = eval_node(a, bound);
            out.intersect_with(&eval_node(b, bound));
            out
        }
        SetNode::Difference(a, b) => {
            let mut out = eval_node(a, bound);
            out.difference_with(&eval_node(b, bound));
            out
        }
    }
}

impl SetNode {
    fn is_atom(&self) -> bool {
        matches!(self, SetNode::All | SetNode::Empty | SetNode::List(_) | SetNode::Residue { .. })
    }
}

struct Operand<'a>(&'a SetNode);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Residue lists would swallow a following ",", and binary nodes need grouping.
        if self.0.is_atom() && !matches!(self.0, SetNode::Residue { .. }) || matches!(self.0, SetNode::Complement(_)) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for SetNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetNode::All => f.write_str("all"),
            SetNode::Empty => f.write_str("empty"),
            SetNode::List(items) => {
                for (i, (lo, hi)) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    if lo == hi {
                        write!(f, "{lo}")?;
                    } else {
                        write!(f, "{lo}..{hi}")?;
                    }
                }
                Ok(())
            }
            SetNode::Residue { modulus, residues } => {
                write!(f, "mod {modulus}: ")?;
                let rs: Vec<String> = residues.iter().map(|r| r.to_string()).collect();
                f.write_str(&rs.join(","))
            }
            SetNode::Complement(x) => write!(f, "~{}", Operand(x)),
            SetNode::Union(a, b) => write!(f, "{} | {}", Operand(a), Operand(b)),
            SetNode::Intersection(a, b) => write!(f, "{} & {}", Operand(a), Operand(b)),
            SetNode::Difference(a, b) => write!(f, "{} \\ {}", Operand(a), Operand(b)),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node)
    }
}
