use super::{Pos, Result};

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Int(u64),
    Real(f64),
    Ident(String),
    Sym(&'static str),
    End,
}

const SYMBOLS: [&str; 19] = [
    "..", "<=", ">=", "==", "!=", "(", ")", ",", ":", "-", "\\", "|", "&", "~", "+", "*", "/", "<", ">",
];

pub(super) fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Real(s.parse().map_err(|_| pos.syntax(format!("bad number {s}")))?)
            } else {
                Tok::Int(s.parse().map_err(|_| pos.syntax(format!("integer {s} is too large")))?)
            };
            col += i - start;
            out.push((tok, pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), pos));
            }
            None => return Err(pos.syntax(format!("unexpected character {c:?}"))),
        }
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

/// Token cursor shared by both parsers.
pub(super) struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub(super) fn new(text: &str) -> Result<Self> {
        Ok(Cursor { toks: lex(text)?, at: 0 })
    }

    pub(super) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(super) fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub(super) fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(super) fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            return true;
        }
        false
    }

    pub(super) fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(x) if x == w) {
            self.bump();
            return true;
        }
        false
    }

    pub(super) fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            return Ok(());
        }
        Err(self.pos().syntax(format!("expected '{s}', found {}", describe(self.peek()))))
    }

    pub(super) fn expect_int(&mut self) -> Result<(u64, Pos)> {
        match self.bump() {
            (Tok::Int(v), p) => Ok((v, p)),
            (t, p) => Err(p.syntax(format!("expected an integer, found {}", describe(&t)))),
        }
    }

    pub(super) fn expect_end(&mut self) -> Result<()> {
        match self.peek() {
            Tok::End => Ok(()),
            t => Err(self.pos().syntax(format!("unexpected {}", describe(t)))),
        }
    }
}

pub(super) fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(v) => format!("integer {v}"),
        Tok::Real(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::End => "end of input".into(),
    }
}
