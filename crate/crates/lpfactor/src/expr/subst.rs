//! Substitution of variables and function symbols.

use super::{diff, Expr, SymError, Var};
use std::collections::BTreeMap;

/// A set of replacements applied together.
///
/// Variable bindings replace a variable leaf by an expression. Function
/// bindings replace every derivative atom of the named symbol by the matching
/// derivative of the replacement, so binding `a` to `x*y` turns `a_x` into `y`.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    vars: BTreeMap<Var, Expr>,
    funcs: BTreeMap<String, Expr>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn var(mut self, v: Var, e: Expr) -> Self {
        self.vars.insert(v, e);
        self
    }

    pub fn func(mut self, name: &str, e: Expr) -> Self {
        self.funcs.insert(name.to_string(), e);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.funcs.is_empty()
    }
}

pub(crate) fn substitute(e: &Expr, b: &Bindings) -> Result<Expr, SymError> {
    match e {
        Expr::Rational(_) => Ok(e.clone()),
        Expr::Var(v) => Ok(match b.vars.get(v) {
            Some(r) => r.clone(),
            None => e.clone(),
        }),
        Expr::Func(f) => match b.funcs.get(&f.name) {
            Some(r) => {
                let mut out = r.clone();
                for _ in 0..f.dx {
                    out = diff::diff1(&out, Var::X);
                }
                for _ in 0..f.dy {
                    out = diff::diff1(&out, Var::Y);
                }
                Ok(out)
            }
            None => Ok(e.clone()),
        },
        Expr::Exp(u) => Ok(super::normalize::norm_exp(substitute(u, b)?)),
        Expr::Log(u) => super::normalize::norm_log(substitute(u, b)?, false),
        Expr::Pow(base, n) => substitute(base, b)?.pow(*n as i64),
        Expr::Prod(fs) => {
            let fs = fs.iter().map(|f| substitute(f, b)).collect::<Result<Vec<_>, _>>()?;
            super::norm_prod(fs)
        }
        Expr::Quot(n, d) => substitute(n, b)?.div(substitute(d, b)?),
        Expr::Sum(ts) => {
            let ts = ts.iter().map(|t| substitute(t, b)).collect::<Result<Vec<_>, _>>()?;
            Ok(super::norm_sum(ts))
        }
    }
}

pub(crate) fn swap_xy(e: &Expr) -> Expr {
    match e {
        Expr::Rational(_) => e.clone(),
        Expr::Var(Var::X) => Expr::Var(Var::Y),
        Expr::Var(Var::Y) => Expr::Var(Var::X),
        Expr::Var(_) => e.clone(),
        Expr::Func(f) => {
            let deps = match f.deps {
                super::Deps::XY => super::Deps::XY,
                super::Deps::XOnly => super::Deps::YOnly,
                super::Deps::YOnly => super::Deps::XOnly,
            };
            super::func_atom(&f.name, f.dy, f.dx, deps)
        }
        Expr::Exp(u) => super::normalize::norm_exp(swap_xy(u)),
        Expr::Log(u) => {
            super::normalize::norm_log(swap_xy(u), false).expect("swap keeps log arguments nonzero")
        }
        Expr::Pow(b, n) => swap_xy(b).pow(*n as i64).expect("swap keeps powers well formed"),
        Expr::Prod(fs) => super::prod(fs.iter().map(swap_xy).collect()),
        Expr::Quot(n, d) => swap_xy(n)
            .div(swap_xy(d))
            .expect("swap keeps denominators nonzero"),
        Expr::Sum(ts) => super::norm_sum(ts.iter().map(swap_xy).collect()),
    }
}

/// Replaces exact subtree matches. Keys and the tree must both be in normal
/// form; replacement happens top-down, so a replaced subtree is not rescanned.
pub(crate) fn replace_atoms(e: &Expr, map: &BTreeMap<Expr, Expr>) -> Result<Expr, SymError> {
    if let Some(r) = map.get(e) {
        return Ok(r.clone());
    }
    match e {
        Expr::Rational(_) | Expr::Var(_) | Expr::Func(_) => Ok(e.clone()),
        Expr::Exp(u) => Ok(super::normalize::norm_exp(replace_atoms(u, map)?)),
        Expr::Log(u) => super::normalize::norm_log(replace_atoms(u, map)?, false),
        Expr::Pow(base, n) => replace_atoms(base, map)?.pow(*n as i64),
        Expr::Prod(fs) => {
            let fs = fs.iter().map(|f| replace_atoms(f, map)).collect::<Result<Vec<_>, _>>()?;
            super::norm_prod(fs)
        }
        Expr::Quot(n, d) => replace_atoms(n, map)?.div(replace_atoms(d, map)?),
        Expr::Sum(ts) => {
            let ts = ts.iter().map(|t| replace_atoms(t, map)).collect::<Result<Vec<_>, _>>()?;
            Ok(super::norm_sum(ts))
        }
    }
}
