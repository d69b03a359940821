//! Textual form of expressions.
//!
//! The grammar matches the parser: `+ -` at the lowest precedence, `* /` next
//! (left associative), `^` highest, `exp(..)` and `log(..)` as calls.
//! Derivatives of function symbols print as subscripts (`a_xy`), symbols of
//! one variable carry their argument (`f_x(x)`), so output parses back to the
//! same normalized tree.

use super::{normalize, Deps, Expr};
use num::{One, Signed};
use std::fmt;

const PREC_SUM: u8 = 1;
const PREC_PROD: u8 = 2;
const PREC_POW: u8 = 3;

pub(crate) fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    fmt_prec(e, f, 0)
}

fn fmt_prec(e: &Expr, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match e {
        Expr::Rational(r) => {
            let parens = prec >= PREC_PROD && r.is_negative();
            if parens {
                write!(f, "(")?;
            }
            if r.denom().is_one() {
                write!(f, "{}", r.numer())?;
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())?;
            }
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Var(v) => write!(f, "{}", v.name()),
        Expr::Func(sym) => {
            write!(f, "{}", sym.name)?;
            if sym.dx + sym.dy > 0 {
                write!(f, "_")?;
                for _ in 0..sym.dx {
                    write!(f, "x")?;
                }
                for _ in 0..sym.dy {
                    write!(f, "y")?;
                }
            }
            match sym.deps {
                Deps::XY => Ok(()),
                Deps::XOnly => write!(f, "(x)"),
                Deps::YOnly => write!(f, "(y)"),
            }
        }
        Expr::Exp(u) => {
            write!(f, "exp(")?;
            fmt_prec(u, f, 0)?;
            write!(f, ")")
        }
        Expr::Log(u) => {
            write!(f, "log(")?;
            fmt_prec(u, f, 0)?;
            write!(f, ")")
        }
        Expr::Pow(b, n) => {
            fmt_prec(b, f, PREC_POW)?;
            write!(f, "^{n}")
        }
        Expr::Prod(fs) => {
            let parens = prec > PREC_PROD;
            if parens {
                write!(f, "(")?;
            }
            let mut first = true;
            let mut iter = fs.iter();
            if let Some(Expr::Rational(c)) = fs.first() {
                iter.next();
                if *c == -super::Rat::one() {
                    write!(f, "-")?;
                } else {
                    fmt_prec(&Expr::Rational(c.clone()), f, PREC_PROD)?;
                    first = false;
                }
            }
            for factor in iter {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                fmt_prec(factor, f, PREC_PROD)?;
            }
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Quot(n, d) => {
            let parens = prec > PREC_PROD;
            if parens {
                write!(f, "(")?;
            }
            fmt_prec(n, f, PREC_PROD)?;
            write!(f, "/")?;
            fmt_prec(d, f, PREC_POW)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Sum(ts) => {
            let parens = prec > PREC_SUM;
            if parens {
                write!(f, "(")?;
            }
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    fmt_prec(t, f, PREC_SUM)?;
                    continue;
                }
                let (c, monic) = normalize::split_term(t);
                if c.is_negative() {
                    write!(f, " - ")?;
                    fmt_prec(&normalize::rebuild_term(-c, monic), f, PREC_SUM)?;
                } else {
                    write!(f, " + ")?;
                    fmt_prec(t, f, PREC_SUM)?;
                }
            }
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}
