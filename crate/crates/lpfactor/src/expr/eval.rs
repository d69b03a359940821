//! Exact evaluation at rational points.
//!
//! Values live in the fraction field of the group algebra Q[G], where a basis
//! element is `e^a * prod(log g_i ^ k_i)` for a rational exponent `a` and
//! formal logarithm generators. Exponentials of distinct rational numbers are
//! linearly independent over the rationals, so a vanishing value of an
//! exponential polynomial really is zero. Logarithm generators are treated as
//! formally independent; expressions are rewritten (`log(u*v)`, `log(u^n)`,
//! `log(exp u)`) before evaluation, which removes the syntactic relations.

use super::{Expr, Rat, SymError, Var};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum LogGen {
    MinusOne,
    OfRat(Rat),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct ExtMono {
    earg: Rat,
    logs: BTreeMap<LogGen, u32>,
}

impl ExtMono {
    fn mul(&self, other: &ExtMono) -> ExtMono {
        let mut logs = self.logs.clone();
        for (g, k) in &other.logs {
            *logs.entry(g.clone()).or_insert(0) += k;
        }
        ExtMono { earg: &self.earg + &other.earg, logs }
    }

    fn is_trivial(&self) -> bool {
        self.earg.is_zero() && self.logs.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct ExtPoly(BTreeMap<ExtMono, Rat>);

impl ExtPoly {
    fn from_rat(c: Rat) -> ExtPoly {
        let mut p = ExtPoly::default();
        if !c.is_zero() {
            p.0.insert(ExtMono::default(), c);
        }
        p
    }

    fn from_term(m: ExtMono, c: Rat) -> ExtPoly {
        let mut p = ExtPoly::default();
        if !c.is_zero() {
            p.0.insert(m, c);
        }
        p
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, other: &ExtPoly) -> ExtPoly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            let e = out.0.entry(m.clone()).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                out.0.remove(m);
            }
        }
        out
    }

    fn mul(&self, other: &ExtPoly) -> ExtPoly {
        let mut out = ExtPoly::default();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                let m = ma.mul(mb);
                let e = out.0.entry(m.clone()).or_insert_with(Rat::zero);
                *e += ca * cb;
                if e.is_zero() {
                    out.0.remove(&m);
                }
            }
        }
        out
    }

    fn single(&self) -> Option<(&ExtMono, &Rat)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }
}

/// A value: quotient of two exponential-logarithmic polynomials. The
/// denominator is never zero.
#[derive(Clone, Debug)]
pub(crate) struct ExtVal {
    num: ExtPoly,
    den: ExtPoly,
}

impl ExtVal {
    pub(crate) fn from_rat(c: Rat) -> ExtVal {
        ExtVal { num: ExtPoly::from_rat(c), den: ExtPoly::from_rat(Rat::one()) }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn add(&self, other: &ExtVal) -> ExtVal {
        ExtVal {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    fn mul(&self, other: &ExtVal) -> ExtVal {
        ExtVal { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }
    }

    fn div(&self, other: &ExtVal) -> Result<ExtVal, SymError> {
        if other.num.is_zero() {
            return Err(SymError::PoleError);
        }
        Ok(ExtVal {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        })
    }

    fn pow(&self, n: i64) -> Result<ExtVal, SymError> {
        let base = if n < 0 {
            ExtVal::from_rat(Rat::one()).div(self)?
        } else {
            self.clone()
        };
        let mut out = ExtVal::from_rat(Rat::one());
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Extracts a plain rational, if the value is one.
    pub(crate) fn as_rat(&self) -> Option<Rat> {
        let d = match self.den.single() {
            Some((m, c)) if m.is_trivial() => c.clone(),
            _ => return None,
        };
        if self.num.is_zero() {
            return Some(Rat::zero());
        }
        match self.num.single() {
            Some((m, c)) if m.is_trivial() => Some(c / d),
            _ => None,
        }
    }
}

fn exp_of(v: &ExtVal) -> Result<ExtVal, SymError> {
    // the argument must reduce to  a + sum of integer multiples of log generators
    let den_c = match v.den.single() {
        Some((m, c)) if m.is_trivial() => c.clone(),
        _ => return Err(SymError::EvalUnsupported("exponential of a non-polynomial value")),
    };
    let mut earg = Rat::zero();
    let mut coeff = Rat::one();
    for (m, c) in &v.num.0 {
        let c = c / &den_c;
        if m.is_trivial() {
            earg += c;
            continue;
        }
        if !m.earg.is_zero() {
            return Err(SymError::EvalUnsupported("exponential of an exponential value"));
        }
        if m.logs.len() != 1 {
            return Err(SymError::EvalUnsupported("exponential of a product of logarithms"));
        }
        let (g, k) = m.logs.iter().next().unwrap();
        if *k != 1 || !c.denom().is_one() {
            return Err(SymError::EvalUnsupported("exponential of a non-integer logarithm multiple"));
        }
        let n: i64 = match c.numer().try_into() {
            Ok(n) => n,
            Err(_) => return Err(SymError::EvalUnsupported("exponential of a huge logarithm multiple")),
        };
        match g {
            LogGen::MinusOne => {
                if n.rem_euclid(2) == 1 {
                    coeff = -coeff;
                }
            }
            LogGen::OfRat(q) => {
                let m = n.unsigned_abs() as u32;
                let p = Rat::new(q.numer().pow(m), q.denom().pow(m));
                coeff *= if n < 0 { p.recip() } else { p };
            }
        }
    }
    Ok(ExtVal {
        num: ExtPoly::from_term(ExtMono { earg, logs: BTreeMap::new() }, coeff),
        den: ExtPoly::from_rat(Rat::one()),
    })
}

fn log_of(v: &ExtVal) -> Result<ExtVal, SymError> {
    if v.num.is_zero() {
        return Err(SymError::PoleError);
    }
    let (nm, nc) = v
        .num
        .single()
        .ok_or(SymError::EvalUnsupported("logarithm of a sum of exponentials"))?;
    let (dm, dc) = v
        .den
        .single()
        .ok_or(SymError::EvalUnsupported("logarithm of a sum of exponentials"))?;
    if !nm.logs.is_empty() || !dm.logs.is_empty() {
        return Err(SymError::EvalUnsupported("logarithm of a logarithm"));
    }
    let c = nc / dc;
    let mut terms = ExtPoly::from_rat(&nm.earg - &dm.earg);
    let abs = c.abs();
    if !abs.is_one() {
        let mut logs = BTreeMap::new();
        logs.insert(LogGen::OfRat(abs), 1);
        terms = terms.add(&ExtPoly::from_term(ExtMono { earg: Rat::zero(), logs }, Rat::one()));
    }
    if c.is_negative() {
        let mut logs = BTreeMap::new();
        logs.insert(LogGen::MinusOne, 1);
        terms = terms.add(&ExtPoly::from_term(ExtMono { earg: Rat::zero(), logs }, Rat::one()));
    }
    Ok(ExtVal { num: terms, den: ExtPoly::from_rat(Rat::one()) })
}

/// A random polynomial in `x` and `y`, stored as `(i, j, c)` terms for
/// `c*x^i*y^j`. Partial derivatives are evaluated directly from the terms.
#[derive(Clone, Debug)]
pub(crate) struct RandPoly {
    terms: Vec<(u32, u32, Rat)>,
}

impl RandPoly {
    pub(crate) fn new(terms: Vec<(u32, u32, Rat)>) -> Self {
        RandPoly { terms }
    }

    fn falling(n: u32, k: u32) -> Rat {
        let mut p = Rat::one();
        for i in 0..k {
            p *= Rat::from(num::BigInt::from(n - i));
        }
        p
    }

    fn rat_ipow(base: &Rat, e: u32) -> Rat {
        let mut p = Rat::one();
        for _ in 0..e {
            p *= base;
        }
        p
    }

    pub(crate) fn eval_deriv(&self, dx: u32, dy: u32, x: &Rat, y: &Rat) -> Rat {
        let mut out = Rat::zero();
        for (i, j, c) in &self.terms {
            if *i < dx || *j < dy {
                continue;
            }
            let mut t = c * Self::falling(*i, dx) * Self::falling(*j, dy);
            t *= Self::rat_ipow(x, i - dx);
            t *= Self::rat_ipow(y, j - dy);
            out += t;
        }
        out
    }
}

/// Variable and function-symbol assignments for evaluation.
#[derive(Clone, Debug, Default)]
pub(crate) struct EvalCtx {
    vars: BTreeMap<Var, Rat>,
    funcs: BTreeMap<String, RandPoly>,
}

impl EvalCtx {
    pub(crate) fn bind_var(&mut self, v: Var, r: Rat) {
        self.vars.insert(v, r);
    }

    pub(crate) fn bind_func(&mut self, name: String, p: RandPoly) {
        self.funcs.insert(name, p);
    }
}

pub(crate) fn eval_ext(e: &Expr, ctx: &EvalCtx) -> Result<ExtVal, SymError> {
    match e {
        Expr::Rational(r) => Ok(ExtVal::from_rat(r.clone())),
        Expr::Var(v) => match ctx.vars.get(v) {
            Some(r) => Ok(ExtVal::from_rat(r.clone())),
            None => Err(SymError::UnboundSymbol(v.name().to_string())),
        },
        Expr::Func(f) => match ctx.funcs.get(&f.name) {
            Some(p) => {
                let x = ctx
                    .vars
                    .get(&Var::X)
                    .ok_or_else(|| SymError::UnboundSymbol("x".into()))?;
                let y = ctx
                    .vars
                    .get(&Var::Y)
                    .ok_or_else(|| SymError::UnboundSymbol("y".into()))?;
                Ok(ExtVal::from_rat(p.eval_deriv(f.dx, f.dy, x, y)))
            }
            None => Err(SymError::UnboundSymbol(f.name.clone())),
        },
        Expr::Exp(u) => exp_of(&eval_ext(u, ctx)?),
        Expr::Log(u) => log_of(&eval_ext(u, ctx)?),
        Expr::Pow(b, n) => eval_ext(b, ctx)?.pow(*n as i64),
        Expr::Prod(fs) => {
            let mut out = ExtVal::from_rat(Rat::one());
            for f in fs {
                out = out.mul(&eval_ext(f, ctx)?);
            }
            Ok(out)
        }
        Expr::Quot(n, d) => eval_ext(n, ctx)?.div(&eval_ext(d, ctx)?),
        Expr::Sum(ts) => {
            let mut out = ExtVal::from_rat(Rat::zero());
            for t in ts {
                out = out.add(&eval_ext(t, ctx)?);
            }
            Ok(out)
        }
    }
}

/// Evaluates to a plain rational number. Fails with [`SymError::EvalUnsupported`]
/// when the value involves surviving exponentials or logarithms.
pub fn eval_at(e: &Expr, vars: &BTreeMap<Var, Rat>) -> Result<Rat, SymError> {
    let mut ctx = EvalCtx::default();
    for (v, r) in vars {
        ctx.bind_var(*v, r.clone());
    }
    let v = eval_ext(e, &ctx)?;
    v.as_rat().ok_or(SymError::EvalUnsupported("value is not rational"))
}
