//! Text input for expressions and operators.
//!
//! Expression grammar, lowest precedence first:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' '-'? integer)?
//! atom  := integer | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! `x y z k` are variables, `exp(..)` and `log(..)` are the elementary
//! functions, and any other identifier is a function symbol: `a` depends on
//! both variables, `f(x)` only on `x`, `g(y)` only on `y`. A subscript names
//! derivatives: `a_xy`, `f_xx(x)`. Operators use the same grammar with `Dx`
//! and `Dy` for the derivations, e.g. `Dx*Dy + a*Dx + b*Dy + c`; coefficients
//! multiply from the left regardless of where they are written.

use crate::expr::{Deps, Expr, Mode, SymError, Var};
use crate::operator::Lpdo;
use num::BigInt;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Sym(#[from] SymError),
}

fn syn<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax { pos, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident { name: String, dx: u32, dy: u32 },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            if self.pos >= self.src.len() {
                out.push((start, Tok::Eof));
                return Ok(out);
            }
            let c = self.src[self.pos];
            let tok = match c {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    self.pos += 1;
                    Tok::Comma
                }
                b'0'..=b'9' => {
                    let mut end = self.pos;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    self.pos = end;
                    Tok::Num(text.parse().unwrap())
                }
                c if c.is_ascii_alphabetic() => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric())
                    {
                        end += 1;
                    }
                    let name = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                    self.pos = end;
                    let (mut dx, mut dy) = (0u32, 0u32);
                    if self.pos < self.src.len() && self.src[self.pos] == b'_' {
                        let mut sub = self.pos + 1;
                        let sub_start = sub;
                        while sub < self.src.len()
                            && (self.src[sub] == b'x' || self.src[sub] == b'y')
                        {
                            if self.src[sub] == b'x' {
                                dx += 1;
                            } else {
                                dy += 1;
                            }
                            sub += 1;
                        }
                        if sub == sub_start {
                            return syn(self.pos, "expected x or y after '_'");
                        }
                        self.pos = sub;
                    }
                    Tok::Ident { name, dx, dy }
                }
                other => {
                    return syn(start, format!("unexpected character '{}'", other as char));
                }
            };
            out.push((start, tok));
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    operator_mode: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            syn(self.pos(), format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc.div(self.unary()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => {
                let e: i64 = match (&n).try_into() {
                    Ok(e) => e,
                    Err(_) => return syn(pos, "exponent too large"),
                };
                Ok(base.pow(if neg { -e } else { e })?)
            }
            _ => syn(pos, "expected integer exponent"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => Ok(crate::expr::bigrat(crate::expr::Rat::from(n))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident { name, dx, dy } => self.ident(pos, name, dx, dy),
            _ => syn(pos, "expected a number, name, or '('"),
        }
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(args)
    }

    fn ident(&mut self, pos: usize, name: String, dx: u32, dy: u32) -> Result<Expr, ParseError> {
        let subscripted = dx + dy > 0;
        match name.as_str() {
            "x" | "y" | "z" | "k" => {
                if subscripted {
                    return syn(pos, "variables take no derivative subscript");
                }
                let v = match name.as_str() {
                    "x" => Var::X,
                    "y" => Var::Y,
                    "z" => Var::Z,
                    _ => Var::K,
                };
                Ok(crate::expr::var(v))
            }
            "exp" | "log" => {
                if subscripted {
                    return syn(pos, "exp and log take no derivative subscript");
                }
                let args = self.call_args()?;
                if args.len() != 1 {
                    return syn(pos, format!("{name} takes exactly one argument"));
                }
                let arg = args.into_iter().next().unwrap();
                if name == "exp" {
                    Ok(crate::expr::exp(arg))
                } else {
                    Ok(crate::expr::log(arg)?)
                }
            }
            "Dx" if self.operator_mode => {
                if subscripted {
                    return syn(pos, "Dx takes no derivative subscript");
                }
                Ok(dx_marker())
            }
            "Dy" if self.operator_mode => {
                if subscripted {
                    return syn(pos, "Dy takes no derivative subscript");
                }
                Ok(dy_marker())
            }
            _ => {
                let deps = if *self.peek() == Tok::LParen {
                    let args = self.call_args()?;
                    let names: Vec<&Expr> = args.iter().collect();
                    match names.as_slice() {
                        [Expr::Var(Var::X)] => Deps::XOnly,
                        [Expr::Var(Var::Y)] => Deps::YOnly,
                        [Expr::Var(Var::X), Expr::Var(Var::Y)] => Deps::XY,
                        _ => {
                            return syn(
                                pos,
                                "function arguments must be (x), (y), or (x,y)",
                            )
                        }
                    }
                } else {
                    Deps::XY
                };
                Ok(crate::expr::func_atom(&name, dx, dy, deps))
            }
        }
    }
}

// markers for the derivations while an operator is parsed as a commutative
// expression; '$' cannot be produced by the lexer, so no clash is possible
fn dx_marker() -> Expr {
    crate::expr::func_atom("$Dx", 0, 0, Deps::XY)
}

fn dy_marker() -> Expr {
    crate::expr::func_atom("$Dy", 0, 0, Deps::XY)
}

fn run(src: &str, operator_mode: bool) -> Result<Expr, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, at: 0, operator_mode };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return syn(p.pos(), "unexpected trailing input");
    }
    Ok(e)
}

/// Parses an expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    run(src, false)
}

/// Parses an operator written as a polynomial in `Dx` and `Dy`.
pub fn parse_operator(src: &str) -> Result<Lpdo, ParseError> {
    let e = run(src, true)?;
    let expanded = e.normalized_in(Mode::Rational)?;
    let mut coeffs: BTreeMap<(u32, u32), Expr> = BTreeMap::new();
    let terms = match expanded {
        Expr::Sum(ts) => ts,
        single => vec![single],
    };
    for t in terms {
        let (i, j, c) = split_op_term(t)?;
        let entry = coeffs.entry((i, j)).or_insert_with(Expr::zero);
        *entry = std::mem::replace(entry, Expr::zero()) + c;
    }
    Ok(Lpdo::from_coeffs(coeffs))
}

fn is_marker(e: &Expr, name: &str) -> bool {
    matches!(e, Expr::Func(f) if f.name == name && f.dx == 0 && f.dy == 0)
}

fn split_op_term(t: Expr) -> Result<(u32, u32, Expr), ParseError> {
    let (num, den) = match t {
        Expr::Quot(n, d) => (*n, Some(*d)),
        other => (other, None),
    };
    if let Some(d) = &den {
        if d.contains_func("$Dx") || d.contains_func("$Dy") {
            return Err(ParseError::Syntax {
                pos: 0,
                msg: "Dx and Dy cannot appear in a denominator".into(),
            });
        }
    }
    let factors = match num {
        Expr::Prod(fs) => fs,
        single => vec![single],
    };
    let (mut i, mut j) = (0u32, 0u32);
    let mut rest = Vec::new();
    for f in factors {
        if is_marker(&f, "$Dx") {
            i += 1;
        } else if is_marker(&f, "$Dy") {
            j += 1;
        } else if let Expr::Pow(b, n) = &f {
            if is_marker(b, "$Dx") {
                i += n;
            } else if is_marker(b, "$Dy") {
                j += n;
            } else {
                rest.push(f);
            }
        } else {
            if f.contains_func("$Dx") || f.contains_func("$Dy") {
                return Err(ParseError::Syntax {
                    pos: 0,
                    msg: "Dx and Dy must appear polynomially".into(),
                });
            }
            rest.push(f);
        }
    }
    let coeff = crate::expr::prod(rest);
    let coeff = match den {
        Some(d) => coeff.div(d)?,
        None => coeff,
    };
    Ok((i, j, coeff))
}
