//! Rational canonical form.
//!
//! An expression is viewed as a rational function in its multiplicative atoms
//! (variables, function-symbol derivatives, exponentials, logarithms). Both
//! numerator and denominator are expanded into multivariate polynomials over
//! the rationals, their greatest common divisor is removed, and the
//! denominator is scaled to integer primitive form with positive leading
//! coefficient. Equal rational functions therefore rebuild to identical trees.
//!
//! The gcd is computed over the integers by a primitive polynomial remainder
//! sequence, recursing on the smallest-index variable of either operand. The
//! sequence runs under a fixed work budget: past it the fraction is left
//! unreduced. An unreduced result is still exact, merely not canonical, so
//! structural comparison of such forms may report a false difference; the
//! randomized zero test is unaffected. The budget only triggers on dozens of
//! atoms at once, far beyond the sizes ordinary coefficient fields reach.

use super::{Expr, Mode, Rat, SymError};
use num::{BigInt, Integer, One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Dense exponent vector; derived order is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Mono(Vec<u32>);

impl Mono {
    fn unit(width: usize) -> Mono {
        Mono(vec![0; width])
    }

    fn gen(width: usize, i: usize) -> Mono {
        let mut v = vec![0; width];
        v[i] = 1;
        Mono(v)
    }

    fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

type RPoly = BTreeMap<Mono, Rat>;
type IPoly = BTreeMap<Mono, BigInt>;

fn rp_const(width: usize, c: Rat) -> RPoly {
    let mut p = RPoly::new();
    if !c.is_zero() {
        p.insert(Mono::unit(width), c);
    }
    p
}

fn rp_add(a: &RPoly, b: &RPoly) -> RPoly {
    let mut out = a.clone();
    for (m, c) in b {
        let e = out.entry(m.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            out.remove(m);
        }
    }
    out
}

fn rp_mul(a: &RPoly, b: &RPoly) -> RPoly {
    let mut out = RPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = ma.mul(mb);
            let e = out.entry(m.clone()).or_insert_with(Rat::zero);
            *e += ca * cb;
            if e.is_zero() {
                out.remove(&m);
            }
        }
    }
    out
}

/// Exact division by leading-term reduction over the rationals.
/// Returns `None` when the division is not exact or exceeds `steps` work
/// units; callers that know the division is exact pass `i64::MAX`.
fn rp_div_bounded(a: &RPoly, b: &RPoly, mut steps: i64) -> Option<RPoly> {
    let (bm, bc) = b.last_key_value()?;
    let mut r = a.clone();
    let mut q = RPoly::new();
    while let Some((rm, rc)) = r.last_key_value() {
        steps -= b.len() as i64;
        if steps < 0 {
            return None;
        }
        if !bm.divides(rm) {
            return None;
        }
        let m = rm.div(bm);
        let c = rc / bc;
        let mut piece = RPoly::new();
        piece.insert(m.clone(), -c.clone());
        r = rp_add(&r, &rp_mul(&piece, b));
        q.insert(m, c);
    }
    Some(q)
}

fn rp_div_exact(a: &RPoly, b: &RPoly) -> Option<RPoly> {
    rp_div_bounded(a, b, i64::MAX)
}

fn ip_add(a: &IPoly, b: &IPoly) -> IPoly {
    let mut out = a.clone();
    for (m, c) in b {
        let e = out.entry(m.clone()).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            out.remove(m);
        }
    }
    out
}

fn ip_mul(a: &IPoly, b: &IPoly) -> IPoly {
    let mut out = IPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = ma.mul(mb);
            let e = out.entry(m.clone()).or_insert_with(BigInt::zero);
            *e += ca * cb;
            if e.is_zero() {
                out.remove(&m);
            }
        }
    }
    out
}

fn ip_neg(a: &IPoly) -> IPoly {
    a.iter().map(|(m, c)| (m.clone(), -c)).collect()
}

fn ip_sub(a: &IPoly, b: &IPoly) -> IPoly {
    ip_add(a, &ip_neg(b))
}

fn ip_int_content(a: &IPoly) -> BigInt {
    let mut g = BigInt::zero();
    for c in a.values() {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn ip_scale_int(a: &IPoly, s: &BigInt) -> IPoly {
    a.iter().map(|(m, c)| (m.clone(), c * s)).collect()
}

fn ip_div_int(a: &IPoly, s: &BigInt) -> IPoly {
    a.iter().map(|(m, c)| (m.clone(), c / s)).collect()
}

fn ip_is_const(a: &IPoly) -> bool {
    a.len() <= 1 && a.keys().all(|m| m.0.iter().all(|e| *e == 0))
}

fn deg_v(a: &IPoly, v: usize) -> u32 {
    a.keys().map(|m| m.0[v]).max().unwrap_or(0)
}

/// Coefficient of `v^d`, with the `v` slot zeroed.
fn coeff_at(a: &IPoly, v: usize, d: u32) -> IPoly {
    let mut out = IPoly::new();
    for (m, c) in a {
        if m.0[v] == d {
            let mut m2 = m.clone();
            m2.0[v] = 0;
            out.insert(Mono(m2.0), c.clone());
        }
    }
    out
}

fn shift_v(a: &IPoly, v: usize, d: u32) -> IPoly {
    a.iter()
        .map(|(m, c)| {
            let mut m2 = m.clone();
            m2.0[v] += d;
            (m2, c.clone())
        })
        .collect()
}

fn smallest_var(a: &IPoly) -> Option<usize> {
    let width = a.keys().next()?.0.len();
    for v in 0..width {
        if a.keys().any(|m| m.0[v] > 0) {
            return Some(v);
        }
    }
    None
}

/// Makes the coefficient of the largest monomial positive.
fn ip_sign_norm(a: IPoly) -> IPoly {
    match a.last_key_value() {
        Some((_, c)) if c.is_negative() => ip_neg(&a),
        _ => a,
    }
}

/// Content of `a` viewed as a polynomial in `v`: gcd of its `v`-coefficients.
fn content_wrt(a: &IPoly, v: usize, budget: &mut i64) -> Option<IPoly> {
    let mut g = IPoly::new();
    for d in 0..=deg_v(a, v) {
        let c = coeff_at(a, v, d);
        if c.is_empty() {
            continue;
        }
        g = ip_gcd(&g, &c, budget)?;
        if ip_is_const(&g) && g.values().next().map(|x| x.is_one()).unwrap_or(false) {
            break;
        }
    }
    Some(g)
}

fn ip_div_exact(a: &IPoly, b: &IPoly) -> IPoly {
    let ar: RPoly = a.iter().map(|(m, c)| (m.clone(), Rat::from(c.clone()))).collect();
    let br: RPoly = b.iter().map(|(m, c)| (m.clone(), Rat::from(c.clone()))).collect();
    let q = rp_div_exact(&ar, &br).expect("gcd and content divisions are exact");
    q.into_iter()
        .map(|(m, c)| {
            debug_assert!(c.denom().is_one());
            (m, c.numer().clone())
        })
        .collect()
}

/// Primitive polynomial remainder sequence gcd over the integers, or `None`
/// once the shared work budget runs out.
fn ip_gcd(a: &IPoly, b: &IPoly, budget: &mut i64) -> Option<IPoly> {
    *budget -= (a.len() + b.len()) as i64;
    if *budget < 0 {
        return None;
    }
    if a.is_empty() {
        return Some(ip_sign_norm(b.clone()));
    }
    if b.is_empty() {
        return Some(ip_sign_norm(a.clone()));
    }
    if ip_is_const(a) || ip_is_const(b) {
        let g = ip_int_content(a).gcd(&ip_int_content(b));
        let width = a.keys().next().unwrap().0.len();
        let mut out = IPoly::new();
        out.insert(Mono::unit(width), g);
        return Some(out);
    }
    let v = smallest_var(a)
        .into_iter()
        .chain(smallest_var(b))
        .min()
        .expect("non-constant polynomials have a variable");

    let cont_a = content_wrt(a, v, budget)?;
    let cont_b = content_wrt(b, v, budget)?;
    let prim_a = ip_div_exact(a, &cont_a);
    let prim_b = ip_div_exact(b, &cont_b);
    let g_cont = ip_gcd(&cont_a, &cont_b, budget)?;

    let (mut big, mut small) = if deg_v(&prim_a, v) >= deg_v(&prim_b, v) {
        (prim_a, prim_b)
    } else {
        (prim_b, prim_a)
    };
    loop {
        // pseudo-remainder of big by small in v, scaled step by step
        let db = deg_v(&small, v);
        let lc_b = coeff_at(&small, v, db);
        let mut r = big.clone();
        while !r.is_empty() && deg_v(&r, v) >= db {
            *budget -= (lc_b.len() * r.len() + small.len()) as i64;
            if *budget < 0 {
                return None;
            }
            let dr = deg_v(&r, v);
            let lc_r = coeff_at(&r, v, dr);
            r = ip_sub(&ip_mul(&lc_b, &r), &ip_mul(&lc_r, &shift_v(&small, v, dr - db)));
        }
        if r.is_empty() {
            let prim = ip_div_exact(&small, &content_wrt(&small, v, budget)?);
            return Some(ip_sign_norm(ip_mul(&g_cont, &prim)));
        }
        let r_prim = ip_div_exact(&r, &content_wrt(&r, v, budget)?);
        big = small;
        small = r_prim;
        if deg_v(&small, v) == 0 {
            // gcd in v is trivial; only the content part survives
            return Some(ip_sign_norm(g_cont));
        }
    }
}

/// Work budget for one fraction reduction. Concrete coefficient fields are
/// cancelled far below this; fractions over many opaque-function atoms hit it
/// and come back unreduced instead of stalling.
const GCD_BUDGET: i64 = 400_000;

/// Gcd of two integer polynomials with cheap escapes: trial exact division in
/// both directions first, then the budgeted remainder sequence, and on budget
/// exhaustion just the shared integer content (always a valid common factor).
fn poly_gcd_with_fallback(ni: &IPoly, di: &IPoly) -> IPoly {
    let width = ni.keys().chain(di.keys()).next().map(|m| m.0.len()).unwrap_or(0);
    let cn = ip_int_content(ni);
    let cd = ip_int_content(di);
    let cg = cn.gcd(&cd);
    let const_g = |g: BigInt| -> IPoly {
        let mut out = IPoly::new();
        out.insert(Mono::unit(width), g);
        out
    };
    if ip_is_const(ni) || ip_is_const(di) {
        return const_g(cg);
    }
    let na = ip_div_int(ni, &cn);
    let da = ip_div_int(di, &cd);
    let to_rp = |p: &IPoly| -> RPoly {
        p.iter().map(|(m, c)| (m.clone(), Rat::from(c.clone()))).collect()
    };
    // primitive part divides primitive part exactly iff it does so rationally
    let steps = 8 * (na.len() + da.len() + 8) as i64;
    if rp_div_bounded(&to_rp(&na), &to_rp(&da), steps).is_some() {
        return ip_sign_norm(ip_scale_int(&da, &cg));
    }
    if rp_div_bounded(&to_rp(&da), &to_rp(&na), steps).is_some() {
        return ip_sign_norm(ip_scale_int(&na, &cg));
    }
    let mut budget = GCD_BUDGET;
    match ip_gcd(&na, &da, &mut budget) {
        Some(gp) => ip_sign_norm(ip_scale_int(&gp, &cg)),
        None => const_g(cg),
    }
}

#[derive(Clone, Debug)]
struct RF {
    num: RPoly,
    den: RPoly,
    width: usize,
}

impl RF {
    fn constant(width: usize, c: Rat) -> RF {
        RF { num: rp_const(width, c), den: rp_const(width, Rat::one()), width }
    }

    fn atom(width: usize, i: usize) -> RF {
        let mut num = RPoly::new();
        num.insert(Mono::gen(width, i), Rat::one());
        RF { num, den: rp_const(width, Rat::one()), width }
    }

    fn add(&self, other: &RF) -> RF {
        // shared or nested denominators are common (iterated transforms stack
        // powers of one invariant); catching them keeps the lcm small
        if self.den == other.den {
            return RF {
                num: rp_add(&self.num, &other.num),
                den: self.den.clone(),
                width: self.width,
            };
        }
        let steps = 8 * (self.den.len() + other.den.len() + 8) as i64;
        if let Some(q) = rp_div_bounded(&other.den, &self.den, steps) {
            return RF {
                num: rp_add(&rp_mul(&self.num, &q), &other.num),
                den: other.den.clone(),
                width: self.width,
            };
        }
        if let Some(q) = rp_div_bounded(&self.den, &other.den, steps) {
            return RF {
                num: rp_add(&self.num, &rp_mul(&other.num, &q)),
                den: self.den.clone(),
                width: self.width,
            };
        }
        RF {
            num: rp_add(&rp_mul(&self.num, &other.den), &rp_mul(&other.num, &self.den)),
            den: rp_mul(&self.den, &other.den),
            width: self.width,
        }
    }

    fn mul(&self, other: &RF) -> RF {
        RF {
            num: rp_mul(&self.num, &other.num),
            den: rp_mul(&self.den, &other.den),
            width: self.width,
        }
    }

    fn div(&self, other: &RF) -> Result<RF, SymError> {
        if other.num.is_empty() {
            return Err(SymError::DivisionByZero);
        }
        Ok(RF {
            num: rp_mul(&self.num, &other.den),
            den: rp_mul(&self.den, &other.num),
            width: self.width,
        })
    }

    fn pow(&self, n: i64) -> Result<RF, SymError> {
        let mut out = RF::constant(self.width, Rat::one());
        let base = if n < 0 {
            RF::constant(self.width, Rat::one()).div(self)?
        } else {
            self.clone()
        };
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Cancels the polynomial gcd and normalizes the denominator to integer
    /// primitive form with positive leading coefficient.
    fn reduce(self) -> RF {
        if self.num.is_empty() {
            return RF::constant(self.width, Rat::zero());
        }
        let scale_to_int = |p: &RPoly| -> (IPoly, BigInt) {
            let mut l = BigInt::one();
            for c in p.values() {
                l = l.lcm(c.denom());
            }
            let ip = p
                .iter()
                .map(|(m, c)| {
                    let s = c * Rat::from(l.clone());
                    (m.clone(), s.numer().clone())
                })
                .collect();
            (ip, l)
        };
        let (ni, nl) = scale_to_int(&self.num);
        let (di, dl) = scale_to_int(&self.den);
        let g = poly_gcd_with_fallback(&ni, &di);
        let nr = ip_div_exact(&ni, &g);
        let mut dr = ip_div_exact(&di, &g);

        let mut dc = ip_int_content(&dr);
        if dr.last_key_value().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            dc = -dc;
        }
        dr = ip_div_int(&dr, &dc);
        // num/den = (ni/nl)/(di/dl) = ni*dl / (di*nl); den replaced by dr = di/(g*dc)
        let carry = Rat::new(dl, nl * dc);
        let num = nr
            .into_iter()
            .map(|(m, c)| (m, Rat::from(c) * carry.clone()))
            .collect();
        let den = dr.into_iter().map(|(m, c)| (m, Rat::from(c))).collect();
        RF { num, den, width: self.width }
    }
}

#[derive(Default)]
struct AtomReg {
    canon: BTreeMap<Expr, Expr>,
    set: BTreeSet<Expr>,
}

impl AtomReg {
    fn insert(&mut self, orig: &Expr, canon: Expr) {
        self.canon.insert(orig.clone(), canon.clone());
        self.set.insert(canon);
    }

    fn collect(&mut self, e: &Expr, mode: Mode) -> Result<(), SymError> {
        match e {
            Expr::Rational(_) => Ok(()),
            Expr::Var(_) | Expr::Func(_) => {
                self.insert(e, e.clone());
                Ok(())
            }
            Expr::Exp(u) => {
                let cu = rational_canonical(u, mode)?;
                self.insert(e, Expr::Exp(Box::new(cu)));
                Ok(())
            }
            Expr::Log(u) => {
                let cu = rational_canonical(u, mode)?;
                self.insert(e, Expr::Log(Box::new(cu)));
                Ok(())
            }
            Expr::Pow(b, _) => self.collect(b, mode),
            Expr::Prod(fs) => fs.iter().try_for_each(|f| self.collect(f, mode)),
            Expr::Quot(n, d) => {
                self.collect(n, mode)?;
                self.collect(d, mode)
            }
            Expr::Sum(ts) => ts.iter().try_for_each(|t| self.collect(t, mode)),
        }
    }
}

fn to_rf(
    e: &Expr,
    width: usize,
    index: &BTreeMap<Expr, usize>,
    canon: &BTreeMap<Expr, Expr>,
) -> Result<RF, SymError> {
    match e {
        Expr::Rational(r) => Ok(RF::constant(width, r.clone())),
        Expr::Var(_) | Expr::Func(_) | Expr::Exp(_) | Expr::Log(_) => {
            let key = canon.get(e).expect("atom registered during collection");
            Ok(RF::atom(width, index[key]))
        }
        Expr::Pow(b, n) => to_rf(b, width, index, canon)?.pow(*n as i64),
        Expr::Prod(fs) => {
            let mut out = RF::constant(width, Rat::one());
            for f in fs {
                out = out.mul(&to_rf(f, width, index, canon)?);
            }
            Ok(out)
        }
        Expr::Quot(n, d) => {
            to_rf(n, width, index, canon)?.div(&to_rf(d, width, index, canon)?)
        }
        Expr::Sum(ts) => {
            let mut out = RF::constant(width, Rat::zero());
            for t in ts {
                out = out.add(&to_rf(t, width, index, canon)?);
            }
            Ok(out)
        }
    }
}

fn poly_to_expr(p: &RPoly, atoms: &[Expr]) -> Expr {
    let mut terms = Vec::with_capacity(p.len());
    for (m, c) in p {
        let mut factors = vec![Expr::Rational(c.clone())];
        for (i, e) in m.0.iter().enumerate() {
            if *e > 0 {
                factors.push(
                    atoms[i]
                        .clone()
                        .pow(*e as i64)
                        .expect("atom powers are positive"),
                );
            }
        }
        terms.push(super::prod(factors));
    }
    super::sum(terms)
}

/// Canonicalizes an already structurally normalized expression as a reduced
/// rational function in its atoms.
pub(crate) fn rational_canonical(e: &Expr, mode: Mode) -> Result<Expr, SymError> {
    let mut reg = AtomReg::default();
    reg.collect(e, mode)?;
    let atoms: Vec<Expr> = reg.set.iter().cloned().collect();
    let index: BTreeMap<Expr, usize> =
        atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let rf = to_rf(e, atoms.len(), &index, &reg.canon)?.reduce();

    let num = poly_to_expr(&rf.num, &atoms);
    let den = poly_to_expr(&rf.den, &atoms);
    if den.is_one() {
        Ok(num)
    } else {
        num.div(den)
    }
}
