//! Structural canonical form.
//!
//! Rules, applied bottom-up:
//! * sums flatten, like terms merge by their coefficient-stripped monic part,
//!   terms sort by that part (rational constant first);
//! * products flatten, rational leaves fold into one leading coefficient,
//!   factors with equal base merge into integer powers and sort by base;
//! * a sum appearing as a factor gives up its rational content (signed so its
//!   leading term is positive) and any symbolic factor common to all terms;
//! * quotients are hoisted out of products and nested quotients, matching
//!   numerator/denominator factors cancel syntactically, the denominator keeps
//!   canonical positive sign and no rational coefficient;
//! * `e^a * e^b -> e^(a+b)`, `(e^u)^n -> e^(nu)`, `e^0 -> 1`, `log 1 -> 0`;
//! * a rational constant times a bare sum distributes over the sum.
//!
//! Products of distinct sums are never expanded here; that is the job of
//! [`Mode::Rational`], which canonicalizes through the polynomial layer.

use super::poly;
use super::{Expr, Mode, Rat, SymError};
use num::{One, Zero};
use std::collections::BTreeMap;

pub(crate) fn norm_rec(e: Expr, mode: Mode) -> Result<Expr, SymError> {
    match mode {
        Mode::Structural => norm_structural(e),
        Mode::Rational => {
            let s = norm_structural(e)?;
            poly::rational_canonical(&s, Mode::Rational)
        }
        Mode::Formal => {
            let s = formal_rewrite(norm_structural(e)?)?;
            poly::rational_canonical(&s, Mode::Formal)
        }
    }
}

fn norm_structural(e: Expr) -> Result<Expr, SymError> {
    Ok(match e {
        Expr::Rational(_) | Expr::Var(_) => e,
        Expr::Func(f) => super::func_atom(&f.name, f.dx, f.dy, f.deps),
        Expr::Exp(u) => norm_exp(norm_structural(*u)?),
        Expr::Log(u) => norm_log(norm_structural(*u)?, false)?,
        Expr::Pow(b, n) => norm_pow(norm_structural(*b)?, n as i64)?,
        Expr::Prod(fs) => {
            let fs = fs.into_iter().map(norm_structural).collect::<Result<Vec<_>, _>>()?;
            norm_prod(fs)?
        }
        Expr::Quot(a, b) => norm_quot(norm_structural(*a)?, norm_structural(*b)?)?,
        Expr::Sum(ts) => {
            let ts = ts.into_iter().map(norm_structural).collect::<Result<Vec<_>, _>>()?;
            norm_sum(ts)
        }
    })
}

/// Applies the formal log/exp rewrites everywhere in an already structurally
/// normalized tree.
pub(crate) fn formal_rewrite(e: Expr) -> Result<Expr, SymError> {
    Ok(match e {
        Expr::Rational(_) | Expr::Var(_) | Expr::Func(_) => e,
        Expr::Exp(u) => {
            let u = formal_rewrite(*u)?;
            match u {
                Expr::Log(v) => *v,
                other => norm_exp(other),
            }
        }
        Expr::Log(u) => norm_log(formal_rewrite(*u)?, true)?,
        Expr::Pow(b, n) => norm_pow(formal_rewrite(*b)?, n as i64)?,
        Expr::Prod(fs) => {
            let fs = fs.into_iter().map(formal_rewrite).collect::<Result<Vec<_>, _>>()?;
            norm_prod(fs)?
        }
        Expr::Quot(a, b) => norm_quot(formal_rewrite(*a)?, formal_rewrite(*b)?)?,
        Expr::Sum(ts) => {
            let ts = ts.into_iter().map(formal_rewrite).collect::<Result<Vec<_>, _>>()?;
            norm_sum(ts)
        }
    })
}

pub(crate) fn norm_exp(u: Expr) -> Expr {
    if u.is_zero_expr() {
        return Expr::one();
    }
    Expr::Exp(Box::new(u))
}

pub(crate) fn norm_log(u: Expr, formal: bool) -> Result<Expr, SymError> {
    if u.is_zero_expr() {
        return Err(SymError::LogOfZero);
    }
    if u.is_one() {
        return Ok(Expr::zero());
    }
    if formal {
        match u {
            Expr::Exp(v) => return Ok(*v),
            Expr::Pow(b, n) => {
                let inner = norm_log(*b, true)?;
                return Ok(super::prod(vec![super::int(n as i64), inner]));
            }
            Expr::Prod(fs) => {
                let mut terms = Vec::new();
                for f in fs {
                    if f.is_one() {
                        continue;
                    }
                    terms.push(norm_log(f, true)?);
                }
                return Ok(norm_sum(terms));
            }
            Expr::Quot(a, b) => {
                let la = norm_log(*a, true)?;
                let lb = norm_log(*b, true)?;
                return Ok(la - lb);
            }
            other => return Ok(Expr::Log(Box::new(other))),
        }
    }
    Ok(Expr::Log(Box::new(u)))
}

fn rat_pow(r: &Rat, n: i64) -> Result<Rat, SymError> {
    if r.is_zero() {
        if n < 0 {
            return Err(SymError::DivisionByZero);
        }
        return Ok(if n == 0 { Rat::one() } else { Rat::zero() });
    }
    let m = n.unsigned_abs() as u32;
    let p = Rat::new(r.numer().pow(m), r.denom().pow(m));
    Ok(if n < 0 { p.recip() } else { p })
}

pub(crate) fn norm_pow(b: Expr, n: i64) -> Result<Expr, SymError> {
    if n == 0 {
        return Ok(Expr::one());
    }
    if n == 1 {
        return Ok(b);
    }
    match b {
        Expr::Rational(r) => Ok(Expr::Rational(rat_pow(&r, n)?)),
        other => {
            let mut acc = ProdAcc::new();
            acc.push(other, n)?;
            acc.build()
        }
    }
}

pub(crate) fn norm_prod(factors: Vec<Expr>) -> Result<Expr, SymError> {
    let mut acc = ProdAcc::new();
    for f in factors {
        acc.push(f, 1)?;
    }
    acc.build()
}

pub(crate) fn norm_quot(num: Expr, den: Expr) -> Result<Expr, SymError> {
    if den.is_zero_expr() {
        return Err(SymError::DivisionByZero);
    }
    if num.is_zero_expr() {
        return Ok(Expr::zero());
    }
    let mut acc = ProdAcc::new();
    acc.push(num, 1)?;
    acc.push(den, -1)?;
    acc.build()
}

pub(crate) fn norm_sum(terms: Vec<Expr>) -> Expr {
    let mut by_monic: BTreeMap<Expr, Rat> = BTreeMap::new();
    let mut stack = terms;
    stack.reverse();
    while let Some(t) = stack.pop() {
        if let Expr::Sum(inner) = t {
            for s in inner.into_iter().rev() {
                stack.push(s);
            }
            continue;
        }
        let (c, monic) = split_term(&t);
        let entry = by_monic.entry(monic).or_insert_with(Rat::zero);
        *entry += c;
    }
    let mut out = Vec::with_capacity(by_monic.len());
    for (monic, c) in by_monic {
        if c.is_zero() {
            continue;
        }
        out.push(rebuild_term(c, monic));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Sum(out),
    }
}

/// Splits a normalized non-sum term into rational coefficient and monic part.
pub(crate) fn split_term(t: &Expr) -> (Rat, Expr) {
    match t {
        Expr::Rational(r) => (r.clone(), Expr::one()),
        Expr::Prod(fs) => {
            if let Expr::Rational(c) = &fs[0] {
                let rest = fs[1..].to_vec();
                let monic = if rest.len() == 1 { rest.into_iter().next().unwrap() } else { Expr::Prod(rest) };
                (c.clone(), monic)
            } else {
                (Rat::one(), t.clone())
            }
        }
        Expr::Quot(n, d) => {
            let (c, nm) = split_term(n);
            if c.is_one() {
                (Rat::one(), t.clone())
            } else {
                (c, Expr::Quot(Box::new(nm), d.clone()))
            }
        }
        _ => (Rat::one(), t.clone()),
    }
}

pub(crate) fn rebuild_term(c: Rat, monic: Expr) -> Expr {
    if monic.is_one() {
        return Expr::Rational(c);
    }
    if c.is_one() {
        return monic;
    }
    match monic {
        Expr::Prod(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::Rational(c));
            v.extend(fs);
            Expr::Prod(v)
        }
        Expr::Quot(n, d) => Expr::Quot(Box::new(rebuild_term(c, *n)), d),
        other => Expr::Prod(vec![Expr::Rational(c), other]),
    }
}

/// Product accumulator: rational coefficient, base -> signed exponent, and the
/// merged argument of an optional exponential factor.
struct ProdAcc {
    coeff: Rat,
    bases: BTreeMap<Expr, i64>,
    exp_args: Vec<Expr>,
}

impl ProdAcc {
    fn new() -> Self {
        ProdAcc { coeff: Rat::one(), bases: BTreeMap::new(), exp_args: Vec::new() }
    }

    fn push(&mut self, f: Expr, e: i64) -> Result<(), SymError> {
        if e == 0 {
            return Ok(());
        }
        match f {
            Expr::Rational(r) => {
                self.coeff *= rat_pow(&r, e)?;
            }
            Expr::Prod(fs) => {
                for sub in fs {
                    self.push(sub, e)?;
                }
            }
            Expr::Pow(b, n) => self.push(*b, e * n as i64)?,
            Expr::Quot(a, b) => {
                self.push(*a, e)?;
                self.push(*b, -e)?;
            }
            Expr::Exp(u) => {
                let scaled = if e == 1 { *u } else { super::prod(vec![super::int(e), *u]) };
                self.exp_args.push(scaled);
            }
            Expr::Sum(ts) => {
                let (content, commons, prim) = sum_factor_out(ts);
                self.coeff *= rat_pow(&content, e)?;
                for (b, be) in commons {
                    self.push_base(b, be * e);
                }
                self.push_base(prim, e);
            }
            atom => self.push_base(atom, e),
        }
        Ok(())
    }

    fn push_base(&mut self, b: Expr, e: i64) {
        if e == 0 {
            return;
        }
        match self.bases.entry(b) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += e;
                if *o.get() == 0 {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(e);
            }
        }
    }

    fn build(self) -> Result<Expr, SymError> {
        let ProdAcc { coeff, bases, exp_args } = self;
        if coeff.is_zero() {
            return Ok(Expr::zero());
        }
        let mut num: Vec<Expr> = Vec::new();
        let mut den: Vec<Expr> = Vec::new();
        for (b, e) in bases {
            if e == 0 {
                continue;
            }
            let target = if e > 0 { &mut num } else { &mut den };
            let m = e.unsigned_abs() as u32;
            target.push(if m == 1 { b } else { Expr::Pow(Box::new(b), m) });
        }
        if !exp_args.is_empty() {
            let total = norm_sum(exp_args);
            if !total.is_zero_expr() {
                num.push(Expr::Exp(Box::new(total)));
                num.sort_by(cmp_by_base);
            }
        }
        let numerator = build_plain(coeff, num);
        if den.is_empty() {
            return Ok(numerator);
        }
        let denominator = build_plain(Rat::one(), den);
        Ok(Expr::Quot(Box::new(numerator), Box::new(denominator)))
    }
}

fn base_of(f: &Expr) -> &Expr {
    match f {
        Expr::Pow(b, _) => b,
        other => other,
    }
}

fn cmp_by_base(a: &Expr, b: &Expr) -> std::cmp::Ordering {
    base_of(a).cmp(base_of(b)).then_with(|| a.cmp(b))
}

fn build_plain(coeff: Rat, mut factors: Vec<Expr>) -> Expr {
    factors.sort_by(cmp_by_base);
    if factors.is_empty() {
        return Expr::Rational(coeff);
    }
    if coeff.is_one() {
        if factors.len() == 1 {
            return factors.pop().unwrap();
        }
        return Expr::Prod(factors);
    }
    if factors.len() == 1 {
        if let Expr::Sum(ts) = &factors[0] {
            // constant times a bare sum distributes
            let scaled = ts
                .iter()
                .map(|t| {
                    let (c, m) = split_term(t);
                    rebuild_term(c * coeff.clone(), m)
                })
                .collect();
            return Expr::Sum(scaled);
        }
    }
    let mut v = Vec::with_capacity(factors.len() + 1);
    v.push(Expr::Rational(coeff));
    v.extend(factors);
    Expr::Prod(v)
}

/// Decomposes a sum used as a factor: signed rational content, symbolic
/// factors common to every term (positive exponents only, so sums of separate
/// quotients are not forced over a common denominator), and the primitive sum.
fn sum_factor_out(terms: Vec<Expr>) -> (Rat, Vec<(Expr, i64)>, Expr) {
    let mut decomp: Vec<(Rat, BTreeMap<Expr, i64>)> = Vec::with_capacity(terms.len());
    for t in &terms {
        decomp.push(term_bases(t));
    }
    let coeffs: Vec<Rat> = decomp.iter().map(|(c, _)| c.clone()).collect();
    let content = super::rat_content(&coeffs, &coeffs[0]);

    let mut common: BTreeMap<Expr, i64> = decomp[0].1.clone();
    common.retain(|_, e| *e > 0);
    for (_, bases) in decomp.iter().skip(1) {
        common.retain(|b, e| {
            let other = bases.get(b).copied().unwrap_or(0);
            if other > 0 {
                *e = (*e).min(other);
                true
            } else {
                false
            }
        });
        if common.is_empty() {
            break;
        }
    }

    if content.is_one() && common.is_empty() {
        return (content, Vec::new(), Expr::Sum(terms));
    }

    let mut prim_terms = Vec::with_capacity(terms.len());
    for (c, bases) in decomp {
        let mut acc = ProdAcc::new();
        acc.coeff = c / content.clone();
        for (b, e) in bases {
            let cut = common.get(&b).copied().unwrap_or(0);
            if e != cut {
                acc.push_base(b, e - cut);
            }
        }
        prim_terms.push(acc.build().expect("re-assembling sum terms cannot divide by zero"));
    }
    let prim = norm_sum(prim_terms);
    (content, common.into_iter().collect(), prim)
}

/// Full multiplicative decomposition of a normalized term (sum excluded).
fn term_bases(t: &Expr) -> (Rat, BTreeMap<Expr, i64>) {
    let mut acc = ProdAcc::new();
    acc.push(t.clone(), 1).expect("normalized term cannot divide by zero");
    let mut bases = acc.bases;
    for u in acc.exp_args {
        // exp factors participate as opaque bases during common-factor search
        if !u.is_zero_expr() {
            *bases.entry(Expr::Exp(Box::new(u))).or_insert(0) += 1;
        }
    }
    (acc.coeff, bases)
}
