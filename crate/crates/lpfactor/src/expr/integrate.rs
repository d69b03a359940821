//! Termwise antidifferentiation for expressions polynomial in one variable.

use super::{Expr, Mode, SymError, Var};

/// Integrates `e` with respect to `v`.
///
/// The expression must expand to a polynomial in `v` whose coefficients
/// (including any denominator) do not involve `v`; otherwise
/// [`SymError::NotPolynomial`] is returned. The constant of integration is
/// zero.
pub fn integrate_poly(e: &Expr, v: Var) -> Result<Expr, SymError> {
    let r = e.clone().normalized_in(Mode::Rational)?;
    let (num, den) = match r {
        Expr::Quot(n, d) => (*n, Some(*d)),
        other => (other, None),
    };
    if let Some(d) = &den {
        if d.contains_var(v) {
            return Err(SymError::NotPolynomial("denominator depends on the variable"));
        }
    }
    let terms = match num {
        Expr::Sum(ts) => ts,
        single => vec![single],
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        out.push(integrate_term(t, v)?);
    }
    let total = super::sum(out);
    match den {
        Some(d) => total.div(d),
        None => Ok(total),
    }
}

fn integrate_term(t: Expr, v: Var) -> Result<Expr, SymError> {
    let factors = match t {
        Expr::Prod(fs) => fs,
        single => vec![single],
    };
    let mut pow: i64 = 0;
    let mut rest = Vec::with_capacity(factors.len());
    for f in factors {
        match &f {
            Expr::Var(w) if *w == v => pow += 1,
            Expr::Pow(b, n) if **b == Expr::Var(v) => pow += *n as i64,
            other if other.contains_var(v) => {
                return Err(SymError::NotPolynomial("coefficient depends on the variable"))
            }
            _ => rest.push(f),
        }
    }
    rest.push(super::var(v).pow(pow + 1)?);
    rest.push(super::rat(1, pow + 1));
    Ok(super::prod(rest))
}
