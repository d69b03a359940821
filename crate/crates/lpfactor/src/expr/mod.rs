//! Immutable expression trees over exact rationals.
//!
//! Leaves are rational constants, the variables `x y z k`, and opaque function
//! symbols with a derivative multi-index. Interior nodes are sums, products,
//! integer powers, quotients, `exp` and `log`. Every constructor returns a
//! normalized tree; structural equality of normalized trees is the `==` of the
//! library.
//!
//! `exp` and `log` are inert apart from differentiation and the always-valid
//! merges `e^a * e^b = e^(a+b)`, `(e^u)^n = e^(nu)`, `e^0 = 1`, `log 1 = 0`.
//! Logarithm algebra (`log(uv) = log u + log v`, `log(e^u) = u`, ...) is only
//! applied in [`Mode::Formal`].

mod diff;
mod eval;
mod integrate;
mod normalize;
mod poly;
mod print;
mod subst;
mod zero;

pub use eval::eval_at;
pub use integrate::integrate_poly;
pub use subst::Bindings;
pub use zero::{is_zero, is_zero_with, ZeroCfg, DEFAULT_ZERO_SEED, DEFAULT_ZERO_TRIALS};

use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Independent variables. `z` only appears in polynomial identities and `k` is
/// the Bloch parameter; both are constants under differentiation in `x`, `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    Z,
    K,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::K => "k",
        }
    }
}

/// Which variables an opaque function symbol depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Deps {
    XY,
    XOnly,
    YOnly,
}

/// An opaque function symbol differentiated `dx` times in `x` and `dy` times
/// in `y`. A derivative in a variable the symbol does not depend on is the
/// zero expression, never an atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncSymbol {
    pub name: String,
    pub dx: u32,
    pub dy: u32,
    pub deps: Deps,
}

/// Normalized expression tree.
///
/// The variant order doubles as the canonical total order on node kinds
/// (derived `Ord`, lexicographic in the contents). Sums hold at least two
/// terms sorted by their coefficient-stripped part; products hold an optional
/// leading rational coefficient followed by factors sorted by base; powers
/// have exponent at least 2 (negative powers normalize into quotients);
/// quotient denominators are nonzero with positive canonical sign.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Rational(Rat),
    Var(Var),
    Func(FuncSymbol),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Pow(Box<Expr>, u32),
    Prod(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Sum(Vec<Expr>),
}

/// Normalization strength.
///
/// * `Structural`: flatten, sort, fold constants, collect like terms and like
///   factors, cancel syntactically matching quotient factors. No distribution.
/// * `Rational`: full distribution plus gcd reduction of quotients; the result
///   is a canonical rational function in the occurring atoms. This is the
///   polynomial canonical form when no quotients occur.
/// * `Formal`: `Rational` preceded by the log/exp rewrites
///   (`log(e^u) -> u`, `exp(log u) -> u`, `log(uv) -> log u + log v`,
///   `log(u^n) -> n log u`, `log(u/v) -> log u - log v`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Structural,
    Rational,
    Formal,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SymError {
    #[error("division by an expression that normalizes to zero")]
    DivisionByZero,
    #[error("logarithm of the zero expression")]
    LogOfZero,
    #[error("evaluation hit a pole (zero denominator or log/0^negative)")]
    PoleError,
    #[error("unbound symbol `{0}` at evaluation")]
    UnboundSymbol(String),
    #[error("expression is not polynomial in {0}")]
    NotPolynomial(&'static str),
    #[error("zero test inconclusive: every sampled point hit a pole")]
    Inconclusive,
    #[error("evaluation outside the supported exact field: {0}")]
    EvalUnsupported(&'static str),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Rational(Rat::zero())
    }

    pub fn one() -> Expr {
        Expr::Rational(Rat::one())
    }

    pub fn is_zero_expr(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            Expr::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Re-normalizes an arbitrarily built tree. Trees coming out of the
    /// library constructors are already in structural normal form.
    pub fn normalized(self) -> Result<Expr, SymError> {
        normalize::norm_rec(self, Mode::Structural)
    }

    pub fn normalized_in(self, mode: Mode) -> Result<Expr, SymError> {
        normalize::norm_rec(self, mode)
    }

    pub fn diff(&self, v: Var, n: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = diff::diff1(&e, v);
        }
        e
    }

    pub fn substitute(&self, b: &Bindings) -> Result<Expr, SymError> {
        subst::substitute(self, b)
    }

    /// Relabels `x <-> y`, including derivative indices and one-variable
    /// dependence tags of function symbols. An exact involution.
    pub fn swap_xy(&self) -> Expr {
        subst::swap_xy(self)
    }

    /// Replaces exact leaf atoms (typically derivative atoms of opaque
    /// functions) by expressions. Non-leaf nodes are never matched.
    pub fn replace_atoms(&self, map: &std::collections::BTreeMap<Expr, Expr>) -> Result<Expr, SymError> {
        subst::replace_atoms(self, map)
    }

    pub fn pow(&self, n: i64) -> Result<Expr, SymError> {
        normalize::norm_pow(self.clone(), n)
    }

    pub fn div(self, other: Expr) -> Result<Expr, SymError> {
        normalize::norm_quot(self, other)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Expr::Rational(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Func(f) => match f.deps {
                Deps::XY => v == Var::X || v == Var::Y,
                Deps::XOnly => v == Var::X,
                Deps::YOnly => v == Var::Y,
            },
            Expr::Exp(u) | Expr::Log(u) | Expr::Pow(u, _) => u.contains_var(v),
            Expr::Prod(es) | Expr::Sum(es) => es.iter().any(|e| e.contains_var(v)),
            Expr::Quot(a, b) => a.contains_var(v) || b.contains_var(v),
        }
    }

    /// True when a derivative atom of the named function symbol occurs.
    pub fn contains_func(&self, name: &str) -> bool {
        match self {
            Expr::Rational(_) | Expr::Var(_) => false,
            Expr::Func(f) => f.name == name,
            Expr::Exp(u) | Expr::Log(u) | Expr::Pow(u, _) => u.contains_func(name),
            Expr::Prod(es) | Expr::Sum(es) => es.iter().any(|e| e.contains_func(name)),
            Expr::Quot(a, b) => a.contains_func(name) || b.contains_func(name),
        }
    }

    /// True when any function symbol occurs.
    pub fn has_funcs(&self) -> bool {
        match self {
            Expr::Rational(_) | Expr::Var(_) => false,
            Expr::Func(_) => true,
            Expr::Exp(u) | Expr::Log(u) | Expr::Pow(u, _) => u.has_funcs(),
            Expr::Prod(es) | Expr::Sum(es) => es.iter().any(|e| e.has_funcs()),
            Expr::Quot(a, b) => a.has_funcs() || b.has_funcs(),
        }
    }
}

/// `p` as an expression.
pub fn int(n: i64) -> Expr {
    Expr::Rational(Rat::from(BigInt::from(n)))
}

/// `p/q` as an expression; panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Expr {
    assert!(q != 0, "rational literal with zero denominator");
    Expr::Rational(Rat::new(BigInt::from(p), BigInt::from(q)))
}

pub fn bigrat(r: Rat) -> Expr {
    Expr::Rational(r)
}

pub fn var(v: Var) -> Expr {
    Expr::Var(v)
}

pub fn x() -> Expr {
    Expr::Var(Var::X)
}

pub fn y() -> Expr {
    Expr::Var(Var::Y)
}

pub fn z() -> Expr {
    Expr::Var(Var::Z)
}

pub fn k() -> Expr {
    Expr::Var(Var::K)
}

/// Opaque function of both variables, underived.
pub fn func(name: &str) -> Expr {
    func_atom(name, 0, 0, Deps::XY)
}

/// Opaque function of `x` alone.
pub fn func_of_x(name: &str) -> Expr {
    func_atom(name, 0, 0, Deps::XOnly)
}

/// Opaque function of `y` alone.
pub fn func_of_y(name: &str) -> Expr {
    func_atom(name, 0, 0, Deps::YOnly)
}

pub fn func_atom(name: &str, dx: u32, dy: u32, deps: Deps) -> Expr {
    let dead = match deps {
        Deps::XY => false,
        Deps::XOnly => dy > 0,
        Deps::YOnly => dx > 0,
    };
    if dead {
        return Expr::zero();
    }
    Expr::Func(FuncSymbol { name: name.to_string(), dx, dy, deps })
}

pub fn sum(terms: Vec<Expr>) -> Expr {
    normalize::norm_sum(terms)
}

pub fn prod(factors: Vec<Expr>) -> Expr {
    normalize::norm_prod(factors).expect("product of normalized expressions cannot divide by zero")
}

pub fn div(a: Expr, b: Expr) -> Result<Expr, SymError> {
    normalize::norm_quot(a, b)
}

pub fn exp(u: Expr) -> Expr {
    normalize::norm_exp(u)
}

pub fn log(u: Expr) -> Result<Expr, SymError> {
    normalize::norm_log(u, false)
}

pub fn neg(e: Expr) -> Expr {
    prod(vec![int(-1), e])
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sum(vec![self, neg(rhs)])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        prod(vec![self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::fmt_expr(self, f)
    }
}

pub(crate) use normalize::{norm_prod, norm_sum, rebuild_term, split_term};

/// Signed content of a list of rational coefficients: gcd of the numerators
/// over lcm of the denominators, carrying the sign of `lead`.
pub(crate) fn rat_content(coeffs: &[Rat], lead: &Rat) -> Rat {
    use num::Integer;
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for c in coeffs {
        num = num.gcd(&c.numer().abs());
        den = den.lcm(&c.denom().abs());
    }
    if num.is_zero() {
        return Rat::one();
    }
    let mut content = Rat::new(num, den);
    if lead.is_negative() {
        content = -content;
    }
    content
}
