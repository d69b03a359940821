//! Partial differentiation on normalized expressions.

use super::{Expr, Var};

/// Single partial derivative. Input and output are in structural normal form.
pub(crate) fn diff1(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Rational(_) => Expr::zero(),
        Expr::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Func(f) => {
            let (dx, dy) = match v {
                Var::X => (f.dx + 1, f.dy),
                Var::Y => (f.dx, f.dy + 1),
                Var::Z | Var::K => return Expr::zero(),
            };
            super::func_atom(&f.name, dx, dy, f.deps)
        }
        Expr::Exp(u) => {
            let du = diff1(u, v);
            if du.is_zero_expr() {
                return Expr::zero();
            }
            super::prod(vec![du, e.clone()])
        }
        Expr::Log(u) => {
            let du = diff1(u, v);
            if du.is_zero_expr() {
                return Expr::zero();
            }
            du.div((**u).clone()).expect("log argument is structurally nonzero")
        }
        Expr::Pow(b, n) => {
            let db = diff1(b, v);
            if db.is_zero_expr() {
                return Expr::zero();
            }
            let lowered = b
                .clone()
                .pow(*n as i64 - 1)
                .expect("positive power cannot lose its base");
            super::prod(vec![super::int(*n as i64), lowered, db])
        }
        Expr::Prod(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, f) in fs.iter().enumerate() {
                let df = diff1(f, v);
                if df.is_zero_expr() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                factors.extend(fs.iter().take(i).cloned());
                factors.push(df);
                factors.extend(fs.iter().skip(i + 1).cloned());
                terms.push(super::prod(factors));
            }
            super::sum(terms)
        }
        Expr::Quot(a, b) => {
            let da = diff1(a, v);
            let db = diff1(b, v);
            if db.is_zero_expr() {
                return da.div((**b).clone()).expect("denominator is structurally nonzero");
            }
            let num = super::prod(vec![da, (**b).clone()])
                - super::prod(vec![(**a).clone(), db]);
            let den = (**b).clone().pow(2).expect("denominator is structurally nonzero");
            num.div(den).expect("denominator is structurally nonzero")
        }
        Expr::Sum(ts) => super::sum(ts.iter().map(|t| diff1(t, v)).collect()),
    }
}
