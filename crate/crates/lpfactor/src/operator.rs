//! Linear partial differential operators in two variables.
//!
//! An operator is a finite sum `sum c_ij Dx^i Dy^j` with expression
//! coefficients acting from the left. Composition follows the Leibniz rule,
//! so operators do not commute with their coefficients.

use crate::expr::{self, Expr, SymError, Var, ZeroCfg};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Errors raised by operator-level transformations.
#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("operator is not in the form Dx*Dy + a*Dx + b*Dy + c")]
    NotNormalForm,
    #[error("characteristic coefficients are not rational constants")]
    NonConstantCoefficients,
    #[error("no admissible change of variables makes the leading coefficient nonzero")]
    CannotNormalize,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Which first-order coefficient `reduce_form` removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KillCoeff {
    /// The `Dx` coefficient, removed by a gauge with `phi_y = -a`.
    A,
    /// The `Dy` coefficient, removed by a gauge with `phi_x = -b`.
    B,
}

/// A linear partial differential operator with normalized coefficients.
/// Coefficients that normalize to zero are not stored; the zero operator has
/// no terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lpdo {
    coeffs: BTreeMap<(u32, u32), Expr>,
}

impl Default for Lpdo {
    fn default() -> Self {
        Lpdo::new()
    }
}

impl Lpdo {
    pub fn new() -> Lpdo {
        Lpdo { coeffs: BTreeMap::new() }
    }

    pub fn from_coeffs(coeffs: BTreeMap<(u32, u32), Expr>) -> Lpdo {
        let mut op = Lpdo::new();
        for ((i, j), c) in coeffs {
            op.add_term(i, j, c);
        }
        op
    }

    /// Builder step: adds `c * Dx^i Dy^j`.
    pub fn with(mut self, i: u32, j: u32, c: Expr) -> Lpdo {
        self.add_term(i, j, c);
        self
    }

    fn add_term(&mut self, i: u32, j: u32, c: Expr) {
        if c.is_zero_expr() {
            return;
        }
        match self.coeffs.entry((i, j)) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let merged = std::mem::replace(o.get_mut(), Expr::zero()) + c;
                if merged.is_zero_expr() {
                    o.remove();
                } else {
                    *o.get_mut() = merged;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Coefficient of `Dx^i Dy^j`; zero when absent.
    pub fn coeff(&self, i: u32, j: u32) -> Expr {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Expr)> {
        self.coeffs.iter()
    }

    pub fn is_zero_op(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total order; the zero operator has order -1.
    pub fn order(&self) -> i32 {
        self.coeffs.keys().map(|(i, j)| (i + j) as i32).max().unwrap_or(-1)
    }

    /// Applies the operator to an expression.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for ((i, j), c) in &self.coeffs {
            let d = f.diff(Var::X, *i).diff(Var::Y, *j);
            terms.push(c.clone() * d);
        }
        expr::sum(terms)
    }

    pub fn add(&self, other: &Lpdo) -> Lpdo {
        let mut out = self.clone();
        for ((i, j), c) in &other.coeffs {
            out.add_term(*i, *j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Lpdo {
        self.scale(&expr::int(-1))
    }

    pub fn sub(&self, other: &Lpdo) -> Lpdo {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by `s` from the left.
    pub fn scale(&self, s: &Expr) -> Lpdo {
        let mut out = Lpdo::new();
        for ((i, j), c) in &self.coeffs {
            out.add_term(*i, *j, s.clone() * c.clone());
        }
        out
    }

    /// Operator composition `self . other` by the Leibniz rule:
    /// `Dx^i Dy^j (d g) = sum C(i,p) C(j,q) (Dx^(i-p) Dy^(j-q) d) Dx^p Dy^q g`.
    pub fn compose(&self, other: &Lpdo) -> Lpdo {
        let mut out = Lpdo::new();
        for ((i, j), c) in &self.coeffs {
            for ((k, l), d) in &other.coeffs {
                for p in 0..=*i {
                    for q in 0..=*j {
                        let coeff = expr::prod(vec![
                            c.clone(),
                            expr::int(binom(*i, p)),
                            expr::int(binom(*j, q)),
                            d.diff(Var::X, i - p).diff(Var::Y, j - q),
                        ]);
                        out.add_term(p + k, q + l, coeff);
                    }
                }
            }
        }
        out
    }

    /// Conjugation by `e^phi`: returns `e^(-phi) . self . e^phi`, obtained by
    /// replacing `Dx` with `Dx + phi_x` and `Dy` with `Dy + phi_y` (these two
    /// first-order operators commute, so the substitution is well defined).
    pub fn gauge_conjugate(&self, phi: &Expr) -> Lpdo {
        let dx_shift = Lpdo::new()
            .with(1, 0, Expr::one())
            .with(0, 0, phi.diff(Var::X, 1));
        let dy_shift = Lpdo::new()
            .with(0, 1, Expr::one())
            .with(0, 0, phi.diff(Var::Y, 1));
        let mut out = Lpdo::new();
        for ((i, j), c) in &self.coeffs {
            let mut term = Lpdo::new().with(0, 0, c.clone());
            for _ in 0..*i {
                term = term.compose(&dx_shift);
            }
            for _ in 0..*j {
                term = term.compose(&dy_shift);
            }
            out = out.add(&term);
        }
        out
    }

    /// Relabels the variables `x <-> y` (and `Dx <-> Dy`).
    pub fn swap_vars(&self) -> Lpdo {
        let mut out = Lpdo::new();
        for ((i, j), c) in &self.coeffs {
            out.add_term(*j, *i, c.swap_xy());
        }
        out
    }

    /// Shears coordinates to `(x + lambda*y, y)`: `Dy` becomes
    /// `lambda*Dx + Dy` and coefficients get `x -> x - lambda*y`. Requires
    /// every coefficient to be free of function symbols.
    pub fn shear(&self, lambda: i64) -> Result<Lpdo, SymError> {
        let bind = expr::Bindings::new().var(
            Var::X,
            expr::x() - expr::prod(vec![expr::int(lambda), expr::y()]),
        );
        let mut out = Lpdo::new();
        for ((i, j), c) in &self.coeffs {
            if c.has_funcs() {
                return Err(SymError::EvalUnsupported(
                    "shear of an operator with function-symbol coefficients",
                ));
            }
            let tc = c.substitute(&bind)?;
            for q in 0..=*j {
                let scale = expr::int(binom(*j, q))
                    * expr::int(lambda).pow((*j - q) as i64)?;
                out.add_term(i + j - q, q, scale * tc.clone());
            }
        }
        Ok(out)
    }

    /// Coefficient-wise randomized equality.
    pub fn equal_mod_zero_test(&self, other: &Lpdo, cfg: &ZeroCfg) -> Result<bool, SymError> {
        let diff = self.sub(other);
        for (_, c) in diff.iter() {
            if !expr::is_zero_with(c, cfg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Characteristic polynomial of the principal part:
    /// `P(w) = sum over i+j = order of a_ij w^i`.
    pub fn char_poly(&self) -> CharPoly {
        let n = self.order().max(0) as u32;
        let coeffs = (0..=n).map(|i| self.coeff(i, n - i)).collect();
        CharPoly { coeffs }
    }
}

fn binom(n: u32, k: u32) -> i64 {
    let mut r: i64 = 1;
    for t in 0..k.min(n - k) {
        r = r * (n - t) as i64 / (t + 1) as i64;
    }
    r
}

/// Characteristic polynomial in the root variable, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    coeffs: Vec<Expr>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Expr {
        self.coeffs.get(i).cloned().unwrap_or_else(Expr::zero)
    }

    /// Evaluates `P(w)`.
    pub fn eval(&self, w: &Expr) -> Result<Expr, SymError> {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            terms.push(c.clone() * w.pow(i as i64)?);
        }
        Ok(expr::sum(terms))
    }

    /// Evaluates the derivative `P'(w)`.
    pub fn eval_deriv(&self, w: &Expr) -> Result<Expr, SymError> {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            terms.push(expr::prod(vec![
                expr::int(i as i64),
                c.clone(),
                w.pow(i as i64 - 1)?,
            ]));
        }
        Ok(expr::sum(terms))
    }

    /// Rational roots, for a polynomial whose coefficients are all rational
    /// constants. Symbolic coefficients yield an empty list.
    pub fn rational_roots(&self) -> Vec<Expr> {
        use num::{BigInt, One, Signed, Zero};
        let mut ints: Vec<BigInt> = Vec::with_capacity(self.coeffs.len());
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            match c.as_rational() {
                Some(r) => lcm = num::Integer::lcm(&lcm, r.denom()),
                None => return Vec::new(),
            }
        }
        for c in &self.coeffs {
            let r = c.as_rational().unwrap();
            ints.push(r.numer() * (&lcm / r.denom()));
        }
        while ints.last().map(|c| c.is_zero()).unwrap_or(false) {
            ints.pop();
        }
        if ints.len() <= 1 {
            return Vec::new();
        }
        let lead = ints.last().unwrap().clone();
        // zero root first
        let mut roots = Vec::new();
        if ints[0].is_zero() {
            roots.push(Expr::zero());
        }
        let trailing = ints.iter().find(|c| !c.is_zero()).unwrap().clone();
        let eval_int = |p: &BigInt, q: &BigInt| -> BigInt {
            // q^deg * P(p/q)
            let deg = ints.len() - 1;
            let mut acc = BigInt::zero();
            for (i, c) in ints.iter().enumerate() {
                acc += c * p.pow(i as u32) * q.pow((deg - i) as u32);
            }
            acc
        };
        for p in divisors(&trailing.abs()) {
            for q in divisors(&lead.abs()) {
                for sign in [1i64, -1] {
                    let pp = &p * BigInt::from(sign);
                    if eval_int(&pp, &q).is_zero() {
                        let root = expr::bigrat(crate::expr::Rat::new(pp, q.clone()));
                        if !roots.contains(&root) {
                            roots.push(root);
                        }
                    }
                }
            }
        }
        roots
    }
}

fn divisors(n: &num::BigInt) -> Vec<num::BigInt> {
    use num::{BigInt, One, Zero};
    let mut out = Vec::new();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            out.push(d.clone());
            let e = n / &d;
            if e != d {
                out.push(e);
            }
        }
        d += BigInt::one();
    }
    out.sort();
    out
}

/// An invertible change of variables applied while normalizing an operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarStep {
    SwapXY,
    Shear(i64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarChange {
    pub steps: Vec<VarStep>,
}

impl VarChange {
    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }
}

impl Lpdo {
    /// Makes the coefficient of `Dx^order` nonzero, trying the identity, the
    /// variable swap, and (for constant principal parts) shears
    /// `x -> x + lambda*y`. Returns the transformed operator and the change
    /// applied, or `None` if no listed change works.
    pub fn normalize_leading(&self) -> Option<(Lpdo, VarChange)> {
        let n = self.order();
        if n < 0 {
            return None;
        }
        let n = n as u32;
        if !self.coeff(n, 0).is_zero_expr() {
            return Some((self.clone(), VarChange::default()));
        }
        let swapped = self.swap_vars();
        if !swapped.coeff(n, 0).is_zero_expr() {
            return Some((swapped, VarChange { steps: vec![VarStep::SwapXY] }));
        }
        let principal_constant = (0..=n).all(|i| {
            let c = self.coeff(i, n - i);
            c.is_zero_expr() || c.as_rational().is_some()
        });
        if principal_constant {
            for lambda in 1..=8 {
                if let Ok(sheared) = self.shear(lambda) {
                    if !sheared.coeff(n, 0).is_zero_expr() {
                        return Some((sheared, VarChange { steps: vec![VarStep::Shear(lambda)] }));
                    }
                }
            }
        }
        None
    }
}

impl Lpdo {
    /// True when the operator is `Dx*Dy + a*Dx + b*Dy + c` with unit mixed
    /// leading coefficient and no `Dx^2` or `Dy^2` terms.
    pub fn is_normal_form(&self) -> bool {
        self.order() <= 2
            && self.coeff(1, 1).is_one()
            && self.coeff(2, 0).is_zero_expr()
            && self.coeff(0, 2).is_zero_expr()
    }

    /// Conjugates a normal-form operator by a gauge that removes the chosen
    /// first-order coefficient. The gauge exponent is found by term-wise
    /// polynomial integration, so the targeted coefficient must be polynomial
    /// in the integration variable. Returns the conjugated operator and the
    /// exponent used.
    pub fn reduce_form(&self, kill: KillCoeff) -> Result<(Lpdo, Expr), OperatorError> {
        if !self.is_normal_form() {
            return Err(OperatorError::NotNormalForm);
        }
        let phi = match kill {
            KillCoeff::A => {
                let a = self.coeff(1, 0);
                if a.is_zero_expr() {
                    Expr::zero()
                } else {
                    -expr::integrate_poly(&a, Var::Y)?
                }
            }
            KillCoeff::B => {
                let b = self.coeff(0, 1);
                if b.is_zero_expr() {
                    Expr::zero()
                } else {
                    -expr::integrate_poly(&b, Var::X)?
                }
            }
        };
        Ok((self.gauge_conjugate(&phi), phi))
    }
}

impl fmt::Display for Lpdo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        // highest order first, then higher x-degree first
        let mut keys: Vec<&(u32, u32)> = self.coeffs.keys().collect();
        keys.sort_by_key(|k| (std::cmp::Reverse(k.0 + k.1), std::cmp::Reverse(k.0)));
        for (idx, key) in keys.into_iter().enumerate() {
            let c = &self.coeffs[key];
            let (i, j) = *key;
            let (negative, magnitude) = trim_sign(c);
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut d_part = String::new();
            if i > 0 {
                d_part.push_str("Dx");
                if i > 1 {
                    d_part.push_str(&format!("^{i}"));
                }
            }
            if j > 0 {
                if !d_part.is_empty() {
                    d_part.push('*');
                }
                d_part.push_str("Dy");
                if j > 1 {
                    d_part.push_str(&format!("^{j}"));
                }
            }
            if d_part.is_empty() {
                write!(f, "{}", wrap_term(&magnitude))?;
            } else if magnitude.is_one() {
                write!(f, "{d_part}")?;
            } else {
                write!(f, "{}*{}", wrap_term(&magnitude), d_part)?;
            }
        }
        Ok(())
    }
}

fn trim_sign(c: &Expr) -> (bool, Expr) {
    use num::Signed;
    let (coeff, monic) = crate::expr::split_term(c);
    if coeff.is_negative() {
        (true, crate::expr::rebuild_term(-coeff, monic))
    } else {
        (false, c.clone())
    }
}

fn wrap_term(e: &Expr) -> String {
    match e {
        Expr::Sum(_) => format!("({e})"),
        _ => format!("{e}"),
    }
}
