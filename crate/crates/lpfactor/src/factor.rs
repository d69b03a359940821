//! Factorization of second and third order operators into a first-order left
//! factor and a lower-order right factor, keyed by a simple root of the
//! characteristic polynomial.
//!
//! The construction is exact: given a root `w` of the characteristic
//! polynomial with nonvanishing derivative there, the factor coefficients are
//! rational expressions in the operator coefficients, and the defect of the
//! factorization is captured by remainder expressions (`l2` for order 2, `l3`
//! and `l31` for order 3) satisfying
//!
//! ```text
//! order 2:  input = left . right - l2
//! order 3:  input = left . right - l3*Dy - l31
//! ```
//!
//! The remainders are the obstruction to exact factorization: the operator
//! splits at `w` exactly when they vanish. `l2` and `l3` are invariant under
//! gauge conjugation, which makes them useful far beyond the factorization
//! test itself; see [`verify_gauge_invariance`].

use crate::expr::{self, is_zero_with, Expr, Mode, Rat, SymError, Var, ZeroCfg};
use crate::operator::Lpdo;
use num::One;
use thiserror::Error;

/// Errors raised by the factorization entry points.
#[derive(Debug, Error)]
pub enum FactorError {
    #[error("operator must have order {expected}, found {found}")]
    WrongOrder { expected: u32, found: i32 },
    #[error("the supplied value is not a root of the characteristic polynomial")]
    NotARoot,
    #[error("the characteristic derivative vanishes at the root; a simple root is required")]
    MultipleRoot,
    #[error("every admissible leading coefficient vanishes; normalize the operator first")]
    LeadingCoefficientZero,
    #[error("characteristic coefficients are not rational constants; supply a root explicitly")]
    NonConstantCoefficients,
    #[error("the characteristic polynomial has no simple rational root")]
    NoSimpleRoots,
    #[error("stated coefficient conditions hold but the candidate factors do not reproduce the input")]
    ExpansionMismatch,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// A second-order factorization attempt at a fixed root.
///
/// The factor coefficients follow the normalization `p1 = 1`, `p2 = -w`, so
/// the left factor is `Dx - w*Dy + p3` and the right factor is
/// `p4*Dx + p5*Dy + p6` with `p4 = a20` and `p5 = a20*w + a11`.
#[derive(Clone, Debug)]
pub struct Factorization2 {
    pub omega: Expr,
    /// `[p1, p2, p3, p4, p5, p6]`.
    pub p: [Expr; 6],
    /// Remainder: `left . right - input` as a zero-order operator.
    pub l2: Expr,
    /// True when `l2` passed the randomized zero test.
    pub exact: bool,
}

impl Factorization2 {
    pub fn left_factor(&self) -> Lpdo {
        Lpdo::new()
            .with(1, 0, self.p[0].clone())
            .with(0, 1, self.p[1].clone())
            .with(0, 0, self.p[2].clone())
    }

    pub fn right_factor(&self) -> Lpdo {
        Lpdo::new()
            .with(1, 0, self.p[3].clone())
            .with(0, 1, self.p[4].clone())
            .with(0, 0, self.p[5].clone())
    }

    /// `left . right - l2`, which reproduces the input operator.
    pub fn recompose(&self) -> Lpdo {
        self.left_factor()
            .compose(&self.right_factor())
            .sub(&Lpdo::new().with(0, 0, self.l2.clone()))
    }
}

/// A third-order factorization attempt at a fixed root: left factor
/// `Dx - w*Dy + p3`, right factor `p4*Dx^2 + p5*Dx*Dy + p6*Dy^2 + p7*Dx +
/// p8*Dy + p9`, remainders `l3` (coefficient of `Dy`) and `l31` (zero order).
#[derive(Clone, Debug)]
pub struct Factorization3 {
    pub omega: Expr,
    /// `[p1, ..., p9]`.
    pub p: [Expr; 9],
    pub l3: Expr,
    pub l31: Expr,
    /// True when both remainders passed the randomized zero test.
    pub exact: bool,
}

impl Factorization3 {
    pub fn left_factor(&self) -> Lpdo {
        Lpdo::new()
            .with(1, 0, self.p[0].clone())
            .with(0, 1, self.p[1].clone())
            .with(0, 0, self.p[2].clone())
    }

    pub fn right_factor(&self) -> Lpdo {
        Lpdo::new()
            .with(2, 0, self.p[3].clone())
            .with(1, 1, self.p[4].clone())
            .with(0, 2, self.p[5].clone())
            .with(1, 0, self.p[6].clone())
            .with(0, 1, self.p[7].clone())
            .with(0, 0, self.p[8].clone())
    }

    /// `left . right - l3*Dy - l31`, which reproduces the input operator.
    pub fn recompose(&self) -> Lpdo {
        self.left_factor().compose(&self.right_factor()).sub(
            &Lpdo::new()
                .with(0, 1, self.l3.clone())
                .with(0, 0, self.l31.clone()),
        )
    }
}

fn rational(e: &Expr) -> Result<Expr, SymError> {
    e.clone().normalized_in(Mode::Rational)
}

/// Directional derivative along the left factor symbol: `f_x - w*f_y`.
fn l_of(f: &Expr, omega: &Expr) -> Expr {
    f.diff(Var::X, 1) - omega.clone() * f.diff(Var::Y, 1)
}

/// Validates the root and returns `P'(w)`, the shared denominator of the
/// factor formulas.
fn check_root(a: &Lpdo, omega: &Expr, cfg: &ZeroCfg) -> Result<Expr, FactorError> {
    let cp = a.char_poly();
    let at_root = cp.eval(omega)?;
    if !is_zero_with(&at_root, cfg)? {
        return Err(FactorError::NotARoot);
    }
    let deriv = rational(&cp.eval_deriv(omega)?)?;
    if deriv.is_zero_expr() || is_zero_with(&deriv, cfg)? {
        return Err(FactorError::MultipleRoot);
    }
    Ok(deriv)
}

/// Factors a second-order operator at the simple root `omega` of its
/// characteristic polynomial, returning factors and remainder.
pub fn factor2(a: &Lpdo, omega: &Expr, cfg: &ZeroCfg) -> Result<Factorization2, FactorError> {
    if a.order() != 2 {
        return Err(FactorError::WrongOrder { expected: 2, found: a.order() });
    }
    let dp = check_root(a, omega, cfg)?;
    let (a20, a11) = (a.coeff(2, 0), a.coeff(1, 1));
    let (a10, a01, a00) = (a.coeff(1, 0), a.coeff(0, 1), a.coeff(0, 0));

    let p4 = a20.clone();
    let p5 = rational(&(a20.clone() * omega.clone() + a11))?;
    // The Dx and I coefficients of the composition give a linear system for
    // p3 and p6 whose determinant is -P'(w); these are its solutions.
    let rhs_x = a10 - l_of(&a20, omega);
    let rhs_y = a01 - l_of(&p5, omega);
    let p3 = rational(&(omega.clone() * rhs_x.clone() + rhs_y.clone()).div(dp.clone())?)?;
    let p6 = rational(&(p5.clone() * rhs_x - p4.clone() * rhs_y).div(dp)?)?;
    let l2 = rational(&(l_of(&p6, omega) + p3.clone() * p6.clone() - a00))?;
    let exact = l2.is_zero_expr() || is_zero_with(&l2, cfg)?;
    Ok(Factorization2 {
        omega: omega.clone(),
        p: [Expr::one(), -omega.clone(), p3, p4, p5, p6],
        l2,
        exact,
    })
}

/// Factors a third-order operator at the simple root `omega`, returning a
/// first-order left factor, a second-order right factor, and the remainder
/// pair `(l3, l31)`.
pub fn factor3(a: &Lpdo, omega: &Expr, cfg: &ZeroCfg) -> Result<Factorization3, FactorError> {
    if a.order() != 3 {
        return Err(FactorError::WrongOrder { expected: 3, found: a.order() });
    }
    let dp = check_root(a, omega, cfg)?;
    let (a30, a21, a12) = (a.coeff(3, 0), a.coeff(2, 1), a.coeff(1, 2));
    let (a20, a11, a02) = (a.coeff(2, 0), a.coeff(1, 1), a.coeff(0, 2));
    let (a10, a01, a00) = (a.coeff(1, 0), a.coeff(0, 1), a.coeff(0, 0));

    let p4 = a30.clone();
    let p5 = rational(&(a30.clone() * omega.clone() + a21))?;
    let p6 = rational(&(p5.clone() * omega.clone() + a12))?;
    // Second-order coefficients of the composition determine p3 linearly with
    // determinant P'(w) = p6 + w*p5 + w^2*p4; p7 and p8 follow by
    // back-substitution, p9 from the Dx coefficient.
    let ca = a20 - l_of(&a30, omega);
    let cb = a11 - l_of(&p5, omega);
    let cc = a02 - l_of(&p6, omega);
    let p3 = rational(
        &(omega.clone() * omega.clone() * ca.clone() + omega.clone() * cb.clone() + cc)
            .div(dp)?,
    )?;
    let p7 = rational(&(ca - p3.clone() * p4.clone()))?;
    let p8 = rational(&(cb - p3.clone() * p5.clone() + omega.clone() * p7.clone()))?;
    let p9 = rational(&(a10 - l_of(&p7, omega) - p3.clone() * p7.clone()))?;

    let l3 = rational(
        &(l_of(&p8, omega) + p3.clone() * p8.clone() - omega.clone() * p9.clone() - a01),
    )?;
    let l31 = rational(&(l_of(&p9, omega) + p3.clone() * p9.clone() - a00))?;
    let exact = (l3.is_zero_expr() || is_zero_with(&l3, cfg)?)
        && (l31.is_zero_expr() || is_zero_with(&l31, cfg)?);
    Ok(Factorization3 {
        omega: omega.clone(),
        p: [Expr::one(), -omega.clone(), p3, p4, p5, p6, p7, p8, p9],
        l3,
        l31,
        exact,
    })
}

/// Simple rational roots of the characteristic polynomial, for operators
/// whose principal coefficients are rational constants.
fn simple_constant_roots(a: &Lpdo) -> Result<Vec<Expr>, FactorError> {
    let cp = a.char_poly();
    for i in 0..=cp.degree() {
        let c = cp.coeff(i);
        if !c.is_zero_expr() && c.as_rational().is_none() {
            return Err(FactorError::NonConstantCoefficients);
        }
    }
    let mut simple = Vec::new();
    for root in cp.rational_roots() {
        let d = cp.eval_deriv(&root)?.normalized_in(Mode::Rational)?;
        if !d.is_zero_expr() {
            simple.push(root);
        }
    }
    if simple.is_empty() {
        return Err(FactorError::NoSimpleRoots);
    }
    Ok(simple)
}

/// Tries every simple rational root of the characteristic polynomial and
/// returns one factorization per root.
pub fn factor2_auto(a: &Lpdo, cfg: &ZeroCfg) -> Result<Vec<Factorization2>, FactorError> {
    if a.order() != 2 {
        return Err(FactorError::WrongOrder { expected: 2, found: a.order() });
    }
    simple_constant_roots(a)?
        .iter()
        .map(|w| factor2(a, w, cfg))
        .collect()
}

/// Third-order analogue of [`factor2_auto`].
pub fn factor3_auto(a: &Lpdo, cfg: &ZeroCfg) -> Result<Vec<Factorization3>, FactorError> {
    if a.order() != 3 {
        return Err(FactorError::WrongOrder { expected: 3, found: a.order() });
    }
    simple_constant_roots(a)?
        .iter()
        .map(|w| factor3(a, w, cfg))
        .collect()
}

fn const_op(pairs: &[(u32, u32, Rat)]) -> Lpdo {
    let mut op = Lpdo::new();
    for (i, j, c) in pairs {
        op = op.with(*i, *j, expr::bigrat(c.clone()));
    }
    op
}

/// Constant-coefficient shortcut for `X^2 - Y^2 + a10*X + a01*Y + a00`:
/// returns linear factors `(X + Y + alpha, X - Y + beta)` when the constant
/// term satisfies `a00 = (a10^2 - a01^2)/4`, and `None` otherwise. `X` and
/// `Y` are represented as `Dx` and `Dy`.
pub fn const_factor_condition2(a10: &Rat, a01: &Rat, a00: &Rat) -> Option<(Lpdo, Lpdo)> {
    let two = Rat::from_integer(2.into());
    let alpha = (a10 - a01) / &two;
    let beta = (a10 + a01) / &two;
    if &alpha * &beta != *a00 {
        return None;
    }
    let one = Rat::one();
    let left = const_op(&[(1, 0, one.clone()), (0, 1, one.clone()), (0, 0, alpha)]);
    let right = const_op(&[(1, 0, one.clone()), (0, 1, -one), (0, 0, beta)]);
    Some((left, right))
}

/// Constant-coefficient shortcut for
/// `X^2*Y + X*Y^2 + a20*X^2 + a11*X*Y + a02*Y^2 + a10*X + a01*Y + a00`.
///
/// Checks the stated sufficient conditions (with `g = a11 - a20 - a02`):
///
/// ```text
/// a01 = a10 + (a20 + 1)*g       a00 = g*(a10 + a20*g)
/// ```
///
/// and, when they hold, builds the candidate pair
/// `(X + Y + g, X*Y - a20*X + (a20 - a11 + g)*Y + a10 + a20*g)`. The
/// candidate is trusted only after expansion: if its product differs from the
/// input polynomial the call fails with [`FactorError::ExpansionMismatch`]
/// rather than returning factors that do not multiply out.
pub fn const_factor_condition3(
    a20: &Rat,
    a11: &Rat,
    a02: &Rat,
    a10: &Rat,
    a01: &Rat,
    a00: &Rat,
) -> Result<Option<(Lpdo, Lpdo)>, FactorError> {
    let g = a11 - a20 - a02;
    let one = Rat::one();
    let cond_a01 = a10 + (a20 + &one) * &g;
    let cond_a00 = &g * (a10 + a20 * &g);
    if *a01 != cond_a01 || *a00 != cond_a00 {
        return Ok(None);
    }
    let left = const_op(&[(1, 0, one.clone()), (0, 1, one.clone()), (0, 0, g.clone())]);
    let right = const_op(&[
        (1, 1, one.clone()),
        (1, 0, -a20.clone()),
        (0, 1, a20 - a11 + &g),
        (0, 0, a10 + a20 * &g),
    ]);
    let input = const_op(&[
        (2, 1, one.clone()),
        (1, 2, one),
        (2, 0, a20.clone()),
        (1, 1, a11.clone()),
        (0, 2, a02.clone()),
        (1, 0, a10.clone()),
        (0, 1, a01.clone()),
        (0, 0, a00.clone()),
    ]);
    if left.compose(&right) != input {
        return Err(FactorError::ExpansionMismatch);
    }
    Ok(Some((left, right)))
}

/// One level of the invariant hierarchy below a fixed third-order root: the
/// right factor's own factorization remainders, keyed by its root.
#[derive(Clone, Debug)]
pub struct SecondLevel {
    pub omega: Expr,
    pub l2: Expr,
}

/// Hierarchy entry for one simple root of the third-order characteristic
/// polynomial.
#[derive(Clone, Debug)]
pub struct HierarchyEntry {
    pub omega: Expr,
    pub l3: Expr,
    pub l31: Expr,
    /// Remainders of the order-two right factor at each of its simple roots.
    pub seconds: Vec<SecondLevel>,
}

/// The full set of remainder invariants reachable from an operator by
/// repeated factorization: up to 3 roots at order three, each contributing up
/// to 2 second-level remainders.
#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub entries: Vec<HierarchyEntry>,
}

/// Builds the invariant hierarchy of a third-order operator over the simple
/// rational roots of its characteristic polynomial.
pub fn invariant_hierarchy(a: &Lpdo, cfg: &ZeroCfg) -> Result<InvariantSet, FactorError> {
    if a.order() != 3 {
        return Err(FactorError::WrongOrder { expected: 3, found: a.order() });
    }
    let roots = simple_constant_roots(a)?;
    invariant_hierarchy_at(a, &roots, cfg)
}

/// Same as [`invariant_hierarchy`] but with caller-supplied roots, for
/// operators whose characteristic coefficients are not rational constants.
pub fn invariant_hierarchy_at(
    a: &Lpdo,
    roots: &[Expr],
    cfg: &ZeroCfg,
) -> Result<InvariantSet, FactorError> {
    let mut entries = Vec::new();
    for w in roots {
        let f3 = factor3(a, w, cfg)?;
        let right = f3.right_factor();
        let mut seconds = Vec::new();
        if right.order() == 2 {
            let rp = right.char_poly();
            let constant = (0..=rp.degree()).all(|i| {
                let c = rp.coeff(i);
                c.is_zero_expr() || c.as_rational().is_some()
            });
            if constant {
                for z in rp.rational_roots() {
                    let d = rp.eval_deriv(&z)?.normalized_in(Mode::Rational)?;
                    if d.is_zero_expr() {
                        continue;
                    }
                    let f2 = factor2(&right, &z, cfg)?;
                    seconds.push(SecondLevel { omega: z, l2: f2.l2 });
                }
            }
        }
        entries.push(HierarchyEntry {
            omega: w.clone(),
            l3: f3.l3,
            l31: f3.l31,
            seconds,
        });
    }
    Ok(InvariantSet { entries })
}

/// The three curl-style first-order invariants of a coefficient triple
/// `(a1, a2, a3)` attached to the principal part `Dx*Dy*(Dx + Dy)`, with the
/// diagonal derivative expanded as `d_t = d_x + d_y`:
///
/// ```text
/// l21 = a2_x - a1_y    l32 = a3_y - a2_t    l31 = a3_x - a1_t
/// ```
pub fn linear_invariants(a1: &Expr, a2: &Expr, a3: &Expr) -> (Expr, Expr, Expr) {
    let dt = |e: &Expr| e.diff(Var::X, 1) + e.diff(Var::Y, 1);
    let l21 = a2.diff(Var::X, 1) - a1.diff(Var::Y, 1);
    let l32 = a3.diff(Var::Y, 1) - dt(a2);
    let l31 = a3.diff(Var::X, 1) - dt(a1);
    (l21, l32, l31)
}

/// Searches for a gauge exponent `phi` with `phi_x = a1` and `phi_y = a2`,
/// which exists when the curl `l21` vanishes and `a3` is consistent with
/// `a1 + a2`. Built by term-wise path integration of polynomial data;
/// returns `None` when the compatibility conditions fail.
pub fn find_gauge_to_product_form(
    a1: &Expr,
    a2: &Expr,
    a3: &Expr,
    cfg: &ZeroCfg,
) -> Result<Option<Expr>, FactorError> {
    let (l21, _, _) = linear_invariants(a1, a2, a3);
    if !is_zero_with(&l21, cfg)? {
        return Ok(None);
    }
    let consistency = a3.clone() - a1.clone() - a2.clone();
    if !is_zero_with(&consistency, cfg)? {
        return Ok(None);
    }
    let phi1 = expr::integrate_poly(a1, Var::X)?;
    let residue = rational(&(a2.clone() - phi1.diff(Var::Y, 1)))?;
    let phi2 = if residue.is_zero_expr() {
        Expr::zero()
    } else {
        expr::integrate_poly(&residue, Var::Y)?
    };
    Ok(Some(rational(&(phi1 + phi2))?))
}

/// Outcome of one gauge-invariance comparison.
#[derive(Clone, Debug)]
pub struct GaugeCheck {
    pub name: &'static str,
    pub pass: bool,
}

/// Report of [`verify_gauge_invariance`]: each remainder comparison between
/// an operator and its gauge conjugate, at the same root.
#[derive(Clone, Debug)]
pub struct GaugeReport {
    pub order: u32,
    pub checks: Vec<GaugeCheck>,
}

impl GaugeReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Factors `a` and its conjugate `e^-phi . a . e^phi` at the same root and
/// compares remainders: `l2` (order 2) and `l3` (order 3) must agree, while
/// `l31` shifts by `l3*phi_y`.
pub fn verify_gauge_invariance(
    a: &Lpdo,
    phi: &Expr,
    omega: &Expr,
    cfg: &ZeroCfg,
) -> Result<GaugeReport, FactorError> {
    let conjugated = a.gauge_conjugate(phi);
    match a.order() {
        2 => {
            let plain = factor2(a, omega, cfg)?;
            let gauged = factor2(&conjugated, omega, cfg)?;
            let same = is_zero_with(&(gauged.l2.clone() - plain.l2.clone()), cfg)?;
            Ok(GaugeReport {
                order: 2,
                checks: vec![GaugeCheck { name: "l2 invariant", pass: same }],
            })
        }
        3 => {
            let plain = factor3(a, omega, cfg)?;
            let gauged = factor3(&conjugated, omega, cfg)?;
            let l3_same = is_zero_with(&(gauged.l3.clone() - plain.l3.clone()), cfg)?;
            let shift = gauged.l31.clone()
                - plain.l31.clone()
                - plain.l3.clone() * phi.diff(Var::Y, 1);
            let l31_shift = is_zero_with(&shift, cfg)?;
            Ok(GaugeReport {
                order: 3,
                checks: vec![
                    GaugeCheck { name: "l3 invariant", pass: l3_same },
                    GaugeCheck { name: "l31 shifts by l3*phi_y", pass: l31_shift },
                ],
            })
        }
        n => Err(FactorError::WrongOrder { expected: 2, found: n }),
    }
}
