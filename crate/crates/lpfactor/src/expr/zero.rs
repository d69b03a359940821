//! Probabilistic zero testing.
//!
//! Function symbols are replaced by random dense polynomials of total degree
//! three with large integer coefficients, variables by random integers, and
//! the expression is evaluated exactly. A nonzero value proves the expression
//! nonzero; agreement of every trial with zero makes a false "is zero" answer
//! vanishingly unlikely (the polynomial identity underlying each trial is
//! subject to the usual degree-over-field-size bound, here with points drawn
//! from about `2*10^6` values per coordinate).

use super::eval::{eval_ext, EvalCtx, RandPoly};
use super::{Deps, Expr, Rat, SymError, Var};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const DEFAULT_ZERO_SEED: u64 = 0x5eed_ca11;
pub const DEFAULT_ZERO_TRIALS: u32 = 8;

const COEFF_BOUND: i64 = 1_000_000;
const POLY_DEGREE: u32 = 3;
const POLE_RETRIES: u64 = 5;

/// Settings for the randomized zero test.
#[derive(Clone, Copy, Debug)]
pub struct ZeroCfg {
    pub seed: u64,
    pub trials: u32,
    pub parallel: bool,
}

impl Default for ZeroCfg {
    fn default() -> Self {
        ZeroCfg { seed: DEFAULT_ZERO_SEED, trials: DEFAULT_ZERO_TRIALS, parallel: true }
    }
}

impl ZeroCfg {
    pub fn with_seed(seed: u64) -> Self {
        ZeroCfg { seed, ..ZeroCfg::default() }
    }
}

fn collect_funcs(e: &Expr, out: &mut BTreeMap<String, Deps>) {
    match e {
        Expr::Rational(_) | Expr::Var(_) => {}
        Expr::Func(f) => {
            out.entry(f.name.clone()).or_insert(f.deps);
        }
        Expr::Exp(u) | Expr::Log(u) => collect_funcs(u, out),
        Expr::Pow(b, _) => collect_funcs(b, out),
        Expr::Prod(es) | Expr::Sum(es) => {
            for s in es {
                collect_funcs(s, out);
            }
        }
        Expr::Quot(a, b) => {
            collect_funcs(a, out);
            collect_funcs(b, out);
        }
    }
}

fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    Rat::from(BigInt::from(rng.gen_range(-COEFF_BOUND..=COEFF_BOUND)))
}

fn random_poly(rng: &mut ChaCha8Rng, deps: Deps) -> RandPoly {
    let mut terms = Vec::new();
    for i in 0..=POLY_DEGREE {
        for j in 0..=(POLY_DEGREE - i) {
            match deps {
                Deps::XOnly if j > 0 => continue,
                Deps::YOnly if i > 0 => continue,
                _ => {}
            }
            terms.push((i, j, random_rat(rng)));
        }
    }
    RandPoly::new(terms)
}

enum Trial {
    Zero,
    Nonzero,
    Skipped,
}

fn run_trial(e: &Expr, funcs: &BTreeMap<String, Deps>, seed: u64) -> Result<Trial, SymError> {
    for retry in 0..POLE_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add(retry.wrapping_mul(0x517c_c1b7_2722_0a95)),
        );
        let mut ctx = EvalCtx::default();
        for v in [Var::X, Var::Y, Var::Z, Var::K] {
            ctx.bind_var(v, random_rat(&mut rng));
        }
        for (name, deps) in funcs {
            ctx.bind_func(name.clone(), random_poly(&mut rng, *deps));
        }
        match eval_ext(e, &ctx) {
            Ok(v) => {
                return Ok(if v.is_zero() { Trial::Zero } else { Trial::Nonzero });
            }
            Err(SymError::PoleError) => continue,
            Err(SymError::EvalUnsupported(_)) => return Ok(Trial::Skipped),
            Err(other) => return Err(other),
        }
    }
    Ok(Trial::Skipped)
}

/// Tests whether `e` is identically zero, with default settings.
pub fn is_zero(e: &Expr) -> Result<bool, SymError> {
    is_zero_with(e, &ZeroCfg::default())
}

/// Tests whether `e` is identically zero.
///
/// Returns `Ok(false)` as soon as one evaluation is nonzero (a proof),
/// `Ok(true)` when every usable trial evaluated to zero, and
/// [`SymError::Inconclusive`] when no trial produced a value, for instance
/// because every sample point hit a pole.
pub fn is_zero_with(e: &Expr, cfg: &ZeroCfg) -> Result<bool, SymError> {
    let s = e.clone().normalized()?;
    if s.is_zero_expr() {
        return Ok(true);
    }
    let f = super::normalize::formal_rewrite(s)?;
    if f.is_zero_expr() {
        return Ok(true);
    }
    if let Expr::Rational(_) = f {
        return Ok(false);
    }
    let mut funcs = BTreeMap::new();
    collect_funcs(&f, &mut funcs);

    let trials = cfg.trials.max(1);
    let results = crate::par::map_indexed(trials, cfg.parallel, |t| {
        let seed = cfg
            .seed
            .wrapping_add((u64::from(t) + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        run_trial(&f, &funcs, seed)
    });

    let mut zeros = 0u32;
    for r in results {
        match r? {
            Trial::Nonzero => return Ok(false),
            Trial::Zero => zeros += 1,
            Trial::Skipped => {}
        }
    }
    if zeros == 0 {
        return Err(SymError::Inconclusive);
    }
    Ok(true)
}
