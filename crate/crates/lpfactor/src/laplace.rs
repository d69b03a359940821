//! Invariant chains for hyperbolic operators.
//!
//! A hyperbolic operator in first normal form, `Dx*Dy + a*Dx + b*Dy + c`,
//! carries two invariants
//!
//! ```text
//! a_hat = a*b + a_x - c        b_hat = a*b + b_y - c
//! ```
//!
//! that are unchanged by gauge conjugation and vanish exactly when the
//! operator splits into first-order factors (one per factor order). When
//! `a_hat` does not vanish the operator admits an invertible transformation
//! to a new normal-form operator whose `b_hat` equals the old `a_hat`;
//! iterating yields a chain that either reaches a factorizable member or runs
//! forever. The chain obeys a discrete lattice recurrence, and imposing
//! Dirichlet, periodic, or quasi-periodic boundary data on it produces the
//! finite closures studied here: integer matrices for the first two, a
//! spectral-parameter matrix for the third, plus the classical field
//! equations each closure encodes.

use crate::expr::{self, is_zero_with, Expr, Mode, SymError, Var, ZeroCfg};
use crate::operator::Lpdo;
use num::{BigInt, One, Zero};
use thiserror::Error;

/// Errors raised by chain construction and closure checks.
#[derive(Debug, Error)]
pub enum LaplaceError {
    #[error("operator is not in the form Dx*Dy + a*Dx + b*Dy + c")]
    NotNormalForm,
    #[error("the driving invariant vanishes; the operator factors and the transform stops")]
    FactorizableStop,
    #[error("periodic closure needs at least 3 sites, got {0}")]
    PeriodicTooSmall(usize),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// A hyperbolic operator `Dx*Dy + a*Dx + b*Dy + c` held by its three
/// non-principal coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolicOp {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
}

/// The invariant pair of a normal-form operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplaceInvariants {
    pub a_hat: Expr,
    pub b_hat: Expr,
}

impl HyperbolicOp {
    pub fn new(a: Expr, b: Expr, c: Expr) -> HyperbolicOp {
        HyperbolicOp { a, b, c }
    }

    /// Reads a normal-form operator out of a general one; fails unless the
    /// principal part is exactly `Dx*Dy`.
    pub fn from_lpdo(op: &Lpdo) -> Result<HyperbolicOp, LaplaceError> {
        if !op.is_normal_form() {
            return Err(LaplaceError::NotNormalForm);
        }
        Ok(HyperbolicOp {
            a: op.coeff(1, 0),
            b: op.coeff(0, 1),
            c: op.coeff(0, 0),
        })
    }

    pub fn to_lpdo(&self) -> Lpdo {
        Lpdo::new()
            .with(1, 1, Expr::one())
            .with(1, 0, self.a.clone())
            .with(0, 1, self.b.clone())
            .with(0, 0, self.c.clone())
    }

    /// Relabels `x <-> y`, which swaps the roles of `a` and `b` (and of the
    /// two invariants).
    pub fn swap(&self) -> HyperbolicOp {
        HyperbolicOp {
            a: self.b.swap_xy(),
            b: self.a.swap_xy(),
            c: self.c.swap_xy(),
        }
    }

    /// Gauge conjugation by `e^phi` stays inside the normal form:
    /// `a + phi_y`, `b + phi_x`, and the zero-order coefficient follows.
    pub fn gauge(&self, phi: &Expr) -> Result<HyperbolicOp, LaplaceError> {
        HyperbolicOp::from_lpdo(&self.to_lpdo().gauge_conjugate(phi))
    }

    pub fn invariants(&self) -> Result<LaplaceInvariants, SymError> {
        laplace_invariants(self)
    }
}

fn rational(e: &Expr) -> Result<Expr, SymError> {
    e.clone().normalized_in(Mode::Rational)
}

/// Computes the invariant pair `(a_hat, b_hat)` of a normal-form operator.
pub fn laplace_invariants(op: &HyperbolicOp) -> Result<LaplaceInvariants, SymError> {
    let ab = op.a.clone() * op.b.clone();
    let a_hat = rational(&(ab.clone() + op.a.diff(Var::X, 1) - op.c.clone()))?;
    let b_hat = rational(&(ab + op.b.diff(Var::Y, 1) - op.c.clone()))?;
    Ok(LaplaceInvariants { a_hat, b_hat })
}

/// Two normal-form operators are gauge equivalent exactly when their
/// invariant pairs agree; this checks both differences under the randomized
/// zero test.
pub fn equivalent(
    left: &HyperbolicOp,
    right: &HyperbolicOp,
    cfg: &ZeroCfg,
) -> Result<bool, SymError> {
    let li = laplace_invariants(left)?;
    let ri = laplace_invariants(right)?;
    Ok(is_zero_with(&(li.a_hat - ri.a_hat), cfg)?
        && is_zero_with(&(li.b_hat - ri.b_hat), cfg)?)
}

/// One step of the invariant chain: rebuilds the operator from the
/// factorization-with-remainder whose remainder is `a_hat`, producing
///
/// ```text
/// a' = a - (log a_hat)_y      b' = b      c' = b_y + a'*b - a_hat
/// ```
///
/// The new operator satisfies `b_hat' = a_hat` exactly. Stops with
/// [`LaplaceError::FactorizableStop`] when `a_hat` vanishes, since then the
/// operator already factors and the logarithm is undefined.
pub fn laplace_transform(op: &HyperbolicOp, cfg: &ZeroCfg) -> Result<HyperbolicOp, LaplaceError> {
    let inv = laplace_invariants(op)?;
    if inv.a_hat.is_zero_expr() || is_zero_with(&inv.a_hat, cfg)? {
        return Err(LaplaceError::FactorizableStop);
    }
    let log_hat = expr::log(inv.a_hat.clone())?;
    let a2 = rational(&(op.a.clone() - log_hat.diff(Var::Y, 1)))?;
    let b2 = op.b.clone();
    let c2 = rational(
        &(op.b.diff(Var::Y, 1) + a2.clone() * op.b.clone() - inv.a_hat.clone()),
    )?;
    Ok(HyperbolicOp { a: a2, b: b2, c: c2 })
}

/// Which invariant drives the chain: the `a_hat` direction transforms the
/// operator as written, the `b_hat` direction works on the relabeled
/// operator (`x <-> y`, `a <-> b`) and is the inverse walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AHat,
    BHat,
}

/// Why a chain stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The step budget ran out with the invariant still nonzero.
    RanToLimit,
    /// The driving invariant vanished: that member factors exactly.
    HitFactorizable,
}

/// One chain member with its invariant pair.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub op: HyperbolicOp,
    pub invariants: LaplaceInvariants,
}

/// A run of the iterated transform: every operator visited, each with its
/// invariants, plus the reason the run stopped.
#[derive(Clone, Debug)]
pub struct LaplaceChain {
    pub direction: Direction,
    pub states: Vec<ChainState>,
    pub termination: Termination,
}

impl LaplaceChain {
    /// The invariant trace `[(a_hat, b_hat), ...]` along the chain.
    pub fn trace(&self) -> Vec<(Expr, Expr)> {
        self.states
            .iter()
            .map(|s| (s.invariants.a_hat.clone(), s.invariants.b_hat.clone()))
            .collect()
    }
}

/// Iterates the transform up to `max_steps` states, recording every member.
/// The chain stops early, with `HitFactorizable`, at the first member whose
/// driving invariant vanishes.
pub fn laplace_chain(
    op: &HyperbolicOp,
    max_steps: usize,
    direction: Direction,
    cfg: &ZeroCfg,
) -> Result<LaplaceChain, LaplaceError> {
    let mut states = Vec::new();
    let mut current = op.clone();
    let mut termination = Termination::RanToLimit;
    while states.len() < max_steps {
        let invariants = laplace_invariants(&current)?;
        states.push(ChainState { op: current.clone(), invariants });
        if states.len() == max_steps {
            break;
        }
        let step = match direction {
            Direction::AHat => laplace_transform(&current, cfg),
            Direction::BHat => {
                laplace_transform(&current.swap(), cfg).map(|next| next.swap())
            }
        };
        match step {
            Ok(next) => current = next,
            Err(LaplaceError::FactorizableStop) => {
                termination = Termination::HitFactorizable;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LaplaceChain { direction, states, termination })
}

/// Checks the lattice recurrence along a chain: with `u_n` the negated
/// driving invariant of state `n` (the sign that matches the zero-order
/// coefficient of reduced operators), every interior step must satisfy
///
/// ```text
/// u_(n+1) - 2*u_n - (log u_n)_xy + u_(n-1) = 0
/// ```
///
/// under the formal-mode zero test. Chains with fewer than three states are
/// vacuously consistent.
pub fn verify_recurrence(chain: &LaplaceChain, cfg: &ZeroCfg) -> Result<bool, SymError> {
    let u: Vec<Expr> = chain
        .states
        .iter()
        .map(|s| match chain.direction {
            Direction::AHat => -s.invariants.a_hat.clone(),
            Direction::BHat => -s.invariants.b_hat.clone(),
        })
        .collect();
    for n in 1..u.len().saturating_sub(1) {
        let log_term = expr::log(u[n].clone())?.diff(Var::X, 1).diff(Var::Y, 1);
        let resid = u[n + 1].clone() - expr::int(2) * u[n].clone() - log_term + u[n - 1].clone();
        if !is_zero_with(&resid, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How a finite chain segment is closed off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainClosure {
    /// Dirichlet data: the invariants just outside the segment are zero.
    Truncated,
    /// Indices wrap modulo the segment length.
    Periodic,
}

/// A dense integer matrix with exact arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub n: usize,
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> IntMatrix {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix { n, rows }
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det_exact(&self) -> BigInt {
        if self.n == 0 {
            return BigInt::one();
        }
        let mut m = self.rows.clone();
        let n = self.n;
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = &t / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        sign * m[n - 1][n - 1].clone()
    }

    /// Reference determinant by cofactor expansion along the first row.
    pub fn det_cofactor(&self) -> BigInt {
        fn det(rows: &[Vec<BigInt>]) -> BigInt {
            let n = rows.len();
            if n == 0 {
                return BigInt::one();
            }
            if n == 1 {
                return rows[0][0].clone();
            }
            let mut acc = BigInt::zero();
            for j in 0..n {
                if rows[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<BigInt>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &rows[0][j] * det(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
        det(&self.rows)
    }
}

/// The coupling matrix of the closed chain: tridiagonal with `-2` on the
/// diagonal and `1` beside it; the periodic closure adds the two corner
/// entries and needs at least 3 sites to keep them distinct from the band.
pub fn cartan_matrix(n: usize, closure: ChainClosure) -> Result<IntMatrix, LaplaceError> {
    if closure == ChainClosure::Periodic && n < 3 {
        return Err(LaplaceError::PeriodicTooSmall(n));
    }
    let mut rows = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        rows[i][i] = BigInt::from(-2);
        if i + 1 < n {
            rows[i][i + 1] = BigInt::one();
            rows[i + 1][i] = BigInt::one();
        }
    }
    if closure == ChainClosure::Periodic {
        rows[0][n - 1] += BigInt::one();
        rows[n - 1][0] += BigInt::one();
    }
    Ok(IntMatrix::from_rows(rows))
}

/// The index-shift matrix of the quasi-periodic closure: ones on the
/// superdiagonal and the spectral weight `k^n` in the bottom-left corner, so
/// that applying it `n` times scales a solution row by `k^n`.
pub fn shift_matrix(n: usize) -> Vec<Vec<Expr>> {
    let mut rows = vec![vec![Expr::zero(); n]; n];
    for i in 0..n.saturating_sub(1) {
        rows[i][i + 1] = Expr::one();
    }
    if n > 0 {
        rows[n - 1][0] = expr::k()
            .pow(n as i64)
            .expect("positive power cannot fail");
    }
    rows
}

/// Determinant of a symbolic matrix by cofactor expansion, canonicalized in
/// rational mode.
pub fn det_expr(rows: &[Vec<Expr>]) -> Result<Expr, SymError> {
    fn det(rows: &[Vec<Expr>]) -> Expr {
        let n = rows.len();
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return rows[0][0].clone();
        }
        let mut terms = Vec::new();
        for j in 0..n {
            if rows[0][j].is_zero_expr() {
                continue;
            }
            let minor: Vec<Vec<Expr>> = rows[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            terms.push(expr::prod(vec![
                expr::int(sign),
                rows[0][j].clone(),
                det(&minor),
            ]));
        }
        expr::sum(terms)
    }
    det(rows).normalized_in(Mode::Rational)
}

/// The determinant sequence of mixed-derivative matrices of `w`: `d_0 = 1`
/// and `d_m = det [ dx^i dy^j w ]` for `i, j < m`, each canonicalized in
/// rational mode. Separable `w` of rank `r` makes every `d_m` with `m > r`
/// vanish identically.
pub fn dn_sequence(w: &Expr, n_max: usize) -> Result<Vec<Expr>, SymError> {
    let mut out = vec![Expr::one()];
    for m in 1..=n_max {
        let rows: Vec<Vec<Expr>> = (0..m)
            .map(|i| (0..m).map(|j| w.diff(Var::X, i as u32).diff(Var::Y, j as u32)).collect())
            .collect();
        out.push(det_expr(&rows)?);
    }
    Ok(out)
}

fn nth<'a>(seq: &'a [Expr], i: isize, closure: ChainClosure) -> Option<&'a Expr> {
    let n = seq.len() as isize;
    match closure {
        ChainClosure::Periodic => {
            let idx = i.rem_euclid(n);
            seq.get(idx as usize)
        }
        ChainClosure::Truncated => {
            if (0..n).contains(&i) {
                seq.get(i as usize)
            } else {
                None
            }
        }
    }
}

/// Checks the first-order compatibility system of the chain on indexed
/// coefficient families:
///
/// ```text
/// c_n,x = c_n * (b_(n+1) - b_n)        b_n,y = c_n - c_(n-1)
/// ```
///
/// Relations whose neighbors fall outside a truncated family are skipped;
/// periodic families wrap. Both sequences must have equal length.
pub fn commutator_check(
    b_seq: &[Expr],
    c_seq: &[Expr],
    closure: ChainClosure,
    cfg: &ZeroCfg,
) -> Result<bool, SymError> {
    assert_eq!(b_seq.len(), c_seq.len(), "families must have equal length");
    for n in 0..c_seq.len() as isize {
        if let (Some(cn), Some(bn), Some(bn1)) = (
            nth(c_seq, n, closure),
            nth(b_seq, n, closure),
            nth(b_seq, n + 1, closure),
        ) {
            let resid =
                cn.diff(Var::X, 1) - cn.clone() * (bn1.clone() - bn.clone());
            if !is_zero_with(&resid, cfg)? {
                return Ok(false);
            }
        }
        if let (Some(bn), Some(cn), Some(cn_prev)) = (
            nth(b_seq, n, closure),
            nth(c_seq, n, closure),
            nth(c_seq, n - 1, closure),
        ) {
            let resid = bn.diff(Var::Y, 1) - (cn.clone() - cn_prev.clone());
            if !is_zero_with(&resid, cfg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Substitutes the exponential gauge `b_n = q_n,x`, `c_n = e^(q_(n+1) - q_n)`
/// into the chain compatibility relations
///
/// ```text
/// c_(n+1) - c_n = b_n,y + (log c_n)_xy        b_(n+1) - b_n = (log c_n)_x
/// ```
///
/// and tests whether the residuals vanish once the lattice field equation
/// `q_n,xy = e^(q_(n+1) - q_n) - e^(q_n - q_(n-1))` is imposed on opaque
/// mixed-derivative symbols. Concrete `q_n` (no opaque symbols) are checked
/// as they stand, so a family violating the field equation is refuted.
pub fn toda_gauge_check(
    q_seq: &[Expr],
    closure: ChainClosure,
    cfg: &ZeroCfg,
) -> Result<bool, SymError> {
    let n_len = q_seq.len() as isize;
    let q = |i: isize| nth(q_seq, i, closure);
    let c_of = |i: isize| -> Option<Expr> {
        Some(expr::exp(q(i + 1)?.clone() - q(i)?.clone()))
    };
    // field-equation substitution on the mixed-derivative atom of each q_n
    // that has both neighbors
    let mut atom_map = std::collections::BTreeMap::new();
    for i in 0..n_len {
        let (Some(prev), Some(this), Some(next)) = (q(i - 1), q(i), q(i + 1)) else {
            continue;
        };
        if let Expr::Func(f) = this {
            let atom = expr::func_atom(&f.name, f.dx + 1, f.dy + 1, f.deps);
            let rhs = expr::exp(next.clone() - this.clone())
                - expr::exp(this.clone() - prev.clone());
            atom_map.insert(atom, rhs);
        }
    }
    let impose = |e: Expr| -> Result<Expr, SymError> {
        e.replace_atoms(&atom_map)?.normalized_in(Mode::Formal)
    };
    for n in 0..n_len {
        if let (Some(cn), Some(cn1), Some(bn)) = (c_of(n), c_of(n + 1), q(n)) {
            let log_cn = expr::log(cn.clone())?;
            let resid = cn1
                - cn.clone()
                - bn.diff(Var::X, 1).diff(Var::Y, 1)
                - log_cn.diff(Var::X, 1).diff(Var::Y, 1);
            if !is_zero_with(&impose(resid)?, cfg)? {
                return Ok(false);
            }
        }
        if let (Some(cn), Some(bn), Some(bn1)) = (c_of(n), q(n), q(n + 1)) {
            let resid = bn1.diff(Var::X, 1) - bn.diff(Var::X, 1)
                - expr::log(cn)?.diff(Var::X, 1);
            if !is_zero_with(&impose(resid)?, cfg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Which closed-chain field equation to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    /// One-site Dirichlet closure: `(log u)_xy + 2u = 0`.
    Liouville,
    /// Two-site periodic closure: `theta_xy = 2(e^-theta - e^theta)`.
    SinhGordon,
    /// Three-site periodic closure with the rank-one reduction
    /// `u1 = u3 = e^theta`, `u2 = e^(-2 theta)`.
    Tzitzeica,
}

/// One named assertion inside a closure report.
#[derive(Clone, Debug)]
pub struct ClosureCheck {
    pub name: String,
    pub pass: bool,
}

/// Result of [`closure_identity_check`]: the individual reductions, the
/// exponential-coupling coefficient when one appears, and any scaling remark.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub kind: ClosureKind,
    pub checks: Vec<ClosureCheck>,
    pub kappa: Option<Expr>,
    pub note: String,
}

impl ClosureReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Residual of site `n` of the closed lattice `(log u_n)_xy = u_(n+1) -
/// 2 u_n + u_(n-1)`, with out-of-range neighbors zero under truncation.
fn lattice_residual(
    u: &[Expr],
    n: isize,
    closure: ChainClosure,
) -> Result<Expr, SymError> {
    let site = nth(u, n, closure).expect("site index in range").clone();
    let zero = Expr::zero();
    let up = nth(u, n + 1, closure).unwrap_or(&zero).clone();
    let down = nth(u, n - 1, closure).unwrap_or(&zero).clone();
    let log_term = expr::log(site.clone())?.diff(Var::X, 1).diff(Var::Y, 1);
    Ok(log_term - (up - expr::int(2) * site + down))
}

fn formal(e: &Expr) -> Result<Expr, SymError> {
    e.clone().normalized_in(Mode::Formal)
}

/// Verifies the classical field equation carried by each small closure, by
/// exact reduction (every check is structural; no randomized test needed).
pub fn closure_identity_check(kind: ClosureKind) -> Result<ClosureReport, SymError> {
    match kind {
        ClosureKind::Liouville => {
            // one-site Dirichlet closure, with its explicit solution
            let theta = expr::func("theta");
            let u = vec![expr::exp(theta.clone())];
            let resid = lattice_residual(&u, 0, ChainClosure::Truncated)?;
            let target =
                theta.diff(Var::X, 1).diff(Var::Y, 1) + expr::int(2) * expr::exp(theta.clone());
            let reduces = formal(&(resid - target))?.is_zero_expr();
            // particular solution u = -1/(x+y)^2 of (log u)_xy + 2u = 0
            let s = expr::x() + expr::y();
            let particular = expr::int(-1).div(s.clone() * s)?;
            let log_part = expr::log(particular.clone())?
                .diff(Var::X, 1)
                .diff(Var::Y, 1);
            let solves =
                formal(&(log_part + expr::int(2) * particular))?.is_zero_expr();
            Ok(ClosureReport {
                kind,
                checks: vec![
                    ClosureCheck {
                        name: "one-site closure reduces to (log u)_xy + 2u = 0".into(),
                        pass: reduces,
                    },
                    ClosureCheck {
                        name: "u = -1/(x+y)^2 solves it exactly".into(),
                        pass: solves,
                    },
                ],
                kappa: None,
                note: "the sign of u is immaterial under the mixed log derivative".into(),
            })
        }
        ClosureKind::SinhGordon => {
            let theta = expr::func("theta");
            let u = vec![
                expr::exp(theta.clone()),
                expr::exp(-theta.clone()),
            ];
            let r1 = lattice_residual(&u, 0, ChainClosure::Periodic)?;
            let r2 = lattice_residual(&u, 1, ChainClosure::Periodic)?;
            let kappa = expr::int(2);
            let target = theta.diff(Var::X, 1).diff(Var::Y, 1)
                - kappa.clone()
                    * (expr::exp(-theta.clone()) - expr::exp(theta.clone()));
            let row1 = formal(&(r1.clone() - target))?.is_zero_expr();
            let row2 = formal(&(r2 + r1))?.is_zero_expr();
            Ok(ClosureReport {
                kind,
                checks: vec![
                    ClosureCheck {
                        name: "site 1 reduces to theta_xy = 2(e^-theta - e^theta)".into(),
                        pass: row1,
                    },
                    ClosureCheck {
                        name: "site 2 gives the negated same equation".into(),
                        pass: row2,
                    },
                ],
                kappa: Some(kappa),
                note: "the two-site wraparound doubles both neighbor couplings, so the \
                       equation appears with coefficient 2 instead of the unit-coefficient \
                       display; the recurrence form is the consistent one"
                    .into(),
            })
        }
        ClosureKind::Tzitzeica => {
            let theta = expr::func("theta");
            let e_th = expr::exp(theta.clone());
            let e_m2 = expr::exp(expr::int(-2) * theta.clone());
            let u = vec![e_th.clone(), e_m2.clone(), e_th.clone()];
            let target =
                theta.diff(Var::X, 1).diff(Var::Y, 1) - (e_m2.clone() - e_th.clone());
            let mut checks = Vec::new();
            for (n, scale) in [(0isize, 1i64), (1, -2), (2, 1)] {
                let resid = lattice_residual(&u, n, ChainClosure::Periodic)?;
                let reduced =
                    formal(&(resid - expr::int(scale) * target.clone()))?.is_zero_expr();
                checks.push(ClosureCheck {
                    name: format!(
                        "site {} is {} times theta_xy = e^(-2 theta) - e^theta",
                        n + 1,
                        scale
                    ),
                    pass: reduced,
                });
            }
            Ok(ClosureReport {
                kind,
                checks,
                kappa: None,
                note: "all three sites collapse to the same scalar equation".into(),
            })
        }
    }
}

/// Eliminates `psi_1` from the first-order spectral system
///
/// ```text
/// psi_1,x + b1*psi_1 = c1*psi_2        psi_2,x + b2*psi_2 = c2*psi_1
/// ```
///
/// into a scalar second-order equation for `psi_2`, returning its
/// coefficients `(1, ..., ...)` after clearing the common factor. With the
/// quasi-periodic weights `c1 = c2 = 1/k` this gives
/// `(1, b1 + b2, b2_x + b1*b2 - k^-2)`.
pub fn bloch_reduce(
    b1: &Expr,
    b2: &Expr,
    c1: &Expr,
    c2: &Expr,
) -> Result<(Expr, Expr, Expr), SymError> {
    let logc2_x = if c2.as_rational().is_some() {
        Expr::zero()
    } else {
        expr::log(c2.clone())?.diff(Var::X, 1)
    };
    let a2 = Expr::one();
    let a1 = rational(&(b1.clone() + b2.clone() - logc2_x.clone()))?;
    let a0 = rational(
        &(b2.diff(Var::X, 1) + b1.clone() * b2.clone()
            - b2.clone() * logc2_x
            - c1.clone() * c2.clone()),
    )?;
    Ok((a2, a1, a0))
}
