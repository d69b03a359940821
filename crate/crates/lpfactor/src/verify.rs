//! Identity suites.
//!
//! Two batteries back the `verify` command. The reference suite pins every
//! worked identity the library is built around to a small named fixture:
//! factorization remainder formulas, gauge behaviour, transform chains,
//! lattice matrices, minor ladders, and closure reductions. The random suite
//! re-derives the compositional properties on seeded random operators so a
//! regression anywhere in the normalization or factorization pipeline shows
//! up as a counterexample, not a silent drift.
//!
//! Fixtures run through [`crate::par`], so a sweep uses the thread pool when
//! the `parallel` feature and the runtime flag allow it.

use crate::expr::{self, is_zero_with, Bindings, Expr, Mode, Rat, Var, ZeroCfg};
use crate::factor::{
    const_factor_condition2, const_factor_condition3, factor2, factor2_auto, factor3,
    find_gauge_to_product_form, linear_invariants, verify_gauge_invariance, FactorError,
};
use crate::laplace::{
    bloch_reduce, cartan_matrix, closure_identity_check, commutator_check, dn_sequence,
    equivalent, laplace_chain, laplace_transform, toda_gauge_check, verify_recurrence,
    ChainClosure, ClosureKind, Direction, HyperbolicOp, LaplaceError, Termination,
};
use crate::operator::Lpdo;
use crate::par;
use crate::parse::parse_operator;
use num::{BigInt, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Outcome of a single named check.
#[derive(Clone, Debug)]
pub struct FixtureResult {
    pub name: &'static str,
    pub pass: bool,
    /// Empty on success; a human-readable reason on failure.
    pub detail: String,
}

/// Outcome of a whole suite run.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub results: Vec<FixtureResult>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.results.len() - self.passed()
    }
}

type Check = Box<dyn Fn(&ZeroCfg) -> Result<(), String> + Send + Sync>;

struct Fixture {
    name: &'static str,
    check: Check,
}

fn fixture<F>(name: &'static str, f: F) -> Fixture
where
    F: Fn(&ZeroCfg) -> Result<(), String> + Send + Sync + 'static,
{
    Fixture { name, check: Box::new(f) }
}

fn run(suite: &'static str, fixtures: Vec<Fixture>, cfg: &ZeroCfg) -> SuiteReport {
    let results = par::map_slice(&fixtures, cfg.parallel, |fx| match (fx.check)(cfg) {
        Ok(()) => FixtureResult { name: fx.name, pass: true, detail: String::new() },
        Err(detail) => FixtureResult { name: fx.name, pass: false, detail },
    });
    SuiteReport { suite, results }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rational(e: &Expr) -> Result<Expr, String> {
    e.clone().normalized_in(Mode::Rational).map_err(err)
}

/// Passes only when the difference cancels identically under rational
/// normalization, with no probabilistic step.
fn structural_zero(e: &Expr, what: &str) -> Result<(), String> {
    let n = rational(e)?;
    ensure(n.is_zero_expr(), format!("{what} = {n}, expected the zero expression"))
}

fn probable_zero(e: &Expr, cfg: &ZeroCfg, what: &str) -> Result<(), String> {
    ensure(is_zero_with(e, cfg).map_err(err)?, format!("{what} failed the zero test"))
}

/// Coefficient-wise structural equality after rational normalization.
fn ops_equal_structural(a: &Lpdo, b: &Lpdo) -> Result<bool, String> {
    let d = a.sub(b);
    for (_, c) in d.iter() {
        if !rational(c)?.is_zero_expr() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn ops_match(a: &Lpdo, b: &Lpdo, what: &str) -> Result<(), String> {
    ensure(ops_equal_structural(a, b)?, format!("{what}: {a} differs from {b}"))
}

fn op(src: &str) -> Result<Lpdo, String> {
    parse_operator(src).map_err(err)
}

fn hyper(src: &str) -> Result<HyperbolicOp, String> {
    HyperbolicOp::from_lpdo(&op(src)?).map_err(err)
}

fn half(e: Expr) -> Expr {
    e * expr::rat(1, 2)
}

fn quarter(e: Expr) -> Expr {
    e * expr::rat(1, 4)
}

// ---------------------------------------------------------------------------
// reference suite
// ---------------------------------------------------------------------------

/// Runs every named fixture; the CLI exposes this as the curated suite.
pub fn reference_suite(cfg: &ZeroCfg) -> SuiteReport {
    run("reference", reference_fixtures(), cfg)
}

fn reference_fixtures() -> Vec<Fixture> {
    let mut f: Vec<Fixture> = Vec::new();

    f.push(fixture("mixed log derivative", |_| {
        let e = (expr::int(-2) * expr::log(expr::x() + expr::y()).map_err(err)?)
            .diff(Var::X, 1)
            .diff(Var::Y, 1);
        let want = expr::int(2)
            .div((expr::x() + expr::y()).pow(2).map_err(err)?)
            .map_err(err)?;
        structural_zero(&(e - want), "d_xy(-2*log(x+y)) - 2/(x+y)^2")
    }));

    f.push(fixture("exponential pair cancels", |_| {
        let theta = expr::func("theta");
        let mut map = BTreeMap::new();
        map.insert(expr::func("u1"), expr::exp(theta.clone()));
        map.insert(expr::func("u2"), expr::exp(expr::neg(theta)));
        let out = (expr::func("u1") * expr::func("u2"))
            .replace_atoms(&map)
            .map_err(err)?
            .normalized_in(Mode::Formal)
            .map_err(err)?;
        ensure(out.is_one(), format!("u1*u2 with reciprocal exponentials = {out}"))
    }));

    f.push(fixture("three-variable cubic identity", |_| {
        let (x, y, z) = (expr::x(), expr::y(), expr::z());
        let cubes = x.clone().pow(3).map_err(err)?
            + y.clone().pow(3).map_err(err)?
            + z.clone().pow(3).map_err(err)?
            - expr::int(3) * x.clone() * y.clone() * z.clone();
        let sym = x.clone().pow(2).map_err(err)?
            + y.clone().pow(2).map_err(err)?
            + z.clone().pow(2).map_err(err)?
            - x.clone() * y.clone()
            - x.clone() * z.clone()
            - z.clone() * y.clone();
        let rhs = (x + y + z) * sym.clone();
        structural_zero(&(cubes - rhs), "cubic difference")?;
        let ones = Bindings::new()
            .var(Var::X, Expr::one())
            .var(Var::Y, Expr::one())
            .var(Var::Z, Expr::one());
        let at_ones = sym.substitute(&ones).map_err(err)?;
        ensure(at_ones.is_zero_expr(), format!("symmetric factor at x=y=z=1 is {at_ones}"))
    }));

    f.push(fixture("first-order composition cross term", |_| {
        let (a, b) = (expr::func("a"), expr::func("b"));
        let left = Lpdo::new().with(1, 0, Expr::one()).with(0, 0, b.clone());
        let right = Lpdo::new().with(0, 1, Expr::one()).with(0, 0, a.clone());
        let want = Lpdo::new()
            .with(1, 1, Expr::one())
            .with(1, 0, a.clone())
            .with(0, 1, b.clone())
            .with(0, 0, a.clone() * b + a.diff(Var::X, 1));
        ops_match(&left.compose(&right), &want, "(Dx+b).(Dy+a)")
    }));

    f.push(fixture("separable kernel annihilated", |_| {
        let left = Lpdo::new().with(1, 0, Expr::one());
        let right = Lpdo::new().with(0, 1, Expr::one()).with(0, 0, expr::x());
        let psi = expr::func_of_x("X") * expr::exp(expr::neg(expr::x() * expr::y()));
        let out = left.compose(&right).apply(&psi);
        structural_zero(&out, "Dx.(Dy+x) applied to X(x)*exp(-x*y)")
    }));

    f.push(fixture("hyperbolic symbol roots", |_| {
        let a = op("Dx^2 - Dy^2 + x*Dx")?;
        let cp = a.char_poly();
        let roots = cp.rational_roots();
        ensure(roots.len() == 2, format!("expected two roots, got {roots:?}"))?;
        ensure(
            roots.contains(&expr::int(1)) && roots.contains(&expr::int(-1)),
            format!("expected roots -1 and 1, got {roots:?}"),
        )
    }));

    f.push(fixture("elliptic symbol lacks rational roots", |cfg| {
        let a = op("Dx^2 + Dy^2 + x*Dx")?;
        ensure(a.char_poly().rational_roots().is_empty(), "w^2 + 1 has a rational root?")?;
        match factor2_auto(&a, cfg) {
            Err(FactorError::NoSimpleRoots) => Ok(()),
            other => Err(format!("expected NoSimpleRoots, got {other:?}")),
        }
    }));

    f.push(fixture("gauge preserves transform invariants", |_| {
        let base = hyper("Dx*Dy + x*Dx + 2")?;
        let phi = expr::x() * expr::y() + expr::x().pow(2).map_err(err)?;
        let inv = base.gauge(&phi).map_err(err)?.invariants().map_err(err)?;
        structural_zero(&(inv.a_hat + expr::int(1)), "a-invariant shift under gauge")?;
        structural_zero(&(inv.b_hat + expr::int(2)), "b-invariant shift under gauge")
    }));

    f.push(fixture("constant wave factorization", |_| {
        let rat = |n: i64| Rat::from_integer(n.into());
        let (left, right) = const_factor_condition2(&rat(4), &rat(2), &rat(3))
            .ok_or("condition rejected a satisfying triple")?;
        let want_left = op("Dx + Dy + 1")?;
        let want_right = op("Dx - Dy + 3")?;
        ops_match(&left, &want_left, "left factor")?;
        ops_match(&right, &want_right, "right factor")?;
        let input = op("Dx^2 - Dy^2 + 4*Dx + 2*Dy + 3")?;
        ops_match(&left.compose(&right), &input, "expansion")?;

        // seeded random triples built from the two linear roots
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let alpha = Rat::from_integer(rng.gen_range(-3i64..=3).into());
            let beta = Rat::from_integer(rng.gen_range(-3i64..=3).into());
            let a10 = &alpha + &beta;
            let a01 = &beta - &alpha;
            let a00 = &alpha * &beta;
            let (l, r) = const_factor_condition2(&a10, &a01, &a00)
                .ok_or("condition rejected a constructed triple")?;
            let input = Lpdo::new()
                .with(2, 0, Expr::one())
                .with(0, 2, expr::int(-1))
                .with(1, 0, expr::bigrat(a10))
                .with(0, 1, expr::bigrat(a01))
                .with(0, 0, expr::bigrat(a00));
            ops_match(&l.compose(&r), &input, "random expansion")?;
        }
        Ok(())
    }));

    f.push(fixture("wave remainder closed form", |cfg| {
        let (a10, a01, a00) = (expr::func("a10"), expr::func("a01"), expr::func("a00"));
        let a = Lpdo::new()
            .with(2, 0, Expr::one())
            .with(0, 2, expr::int(-1))
            .with(1, 0, a10.clone())
            .with(0, 1, a01.clone())
            .with(0, 0, a00.clone());
        let fac = factor2(&a, &expr::int(1), cfg).map_err(err)?;
        let hdiff = half(a10.clone() - a01.clone());
        let closed = hdiff.diff(Var::X, 1) - hdiff.diff(Var::Y, 1)
            + quarter(a10.clone() * a10 - a01.clone() * a01)
            - a00;
        probable_zero(&(fac.l2 - closed), cfg, "wave remainder vs closed form")
    }));

    f.push(fixture("third-order remainders at zero root", |cfg| {
        let (a11, a10, a01, a00) =
            (expr::func("a11"), expr::func("a10"), expr::func("a01"), expr::func("a00"));
        let b = Lpdo::new()
            .with(2, 1, Expr::one())
            .with(1, 2, Expr::one())
            .with(1, 1, a11.clone())
            .with(1, 0, a10.clone())
            .with(0, 1, a01.clone())
            .with(0, 0, a00.clone());
        let fac = factor3(&b, &expr::int(0), cfg).map_err(err)?;
        structural_zero(&(fac.l3 - (a11.diff(Var::X, 1) - a01)), "l3 closed form")?;
        structural_zero(&(fac.l31 - (a10.diff(Var::X, 1) - a00)), "l31 closed form")
    }));

    f.push(fixture("antiderivative condition instance", |cfg| {
        let x2 = expr::x().pow(2).map_err(err)?;
        let base = Lpdo::new()
            .with(2, 1, Expr::one())
            .with(1, 2, Expr::one())
            .with(1, 1, x2.clone())
            .with(1, 0, x2)
            .with(0, 1, expr::int(2) * expr::x());
        let good = base.clone().with(0, 0, expr::int(2) * expr::x());
        let fac = factor3(&good, &expr::int(0), cfg).map_err(err)?;
        ensure(fac.exact, "matched antiderivative data should split exactly")?;
        structural_zero(&fac.l3, "l3 on matched data")?;
        structural_zero(&fac.l31, "l31 on matched data")?;

        let bad = base.with(0, 0, expr::int(2) * expr::x() + expr::int(1));
        let fac = factor3(&bad, &expr::int(0), cfg).map_err(err)?;
        ensure(!fac.exact, "perturbed zero-order term should leave a remainder")
    }));

    f.push(fixture("cubic operator condition split", |_| {
        let rat = |n: i64| Rat::from_integer(n.into());
        let zero = rat(0);
        let two = rat(2);
        let got = const_factor_condition3(&zero, &zero, &zero, &two, &two, &zero)
            .map_err(err)?
            .ok_or("conditions rejected a satisfying tuple")?;
        let input = op("Dx^2*Dy + Dx*Dy^2 + 2*Dx + 2*Dy")?;
        ops_match(&got.0.compose(&got.1), &input, "expansion")?;

        let violating = const_factor_condition3(&zero, &zero, &zero, &two, &rat(3), &zero)
            .map_err(err)?;
        ensure(violating.is_none(), "violated condition still produced factors")
    }));

    f.push(fixture("gradient family invariants vanish", |cfg| {
        let phi = expr::func("phi");
        let (a1, a2) = (phi.diff(Var::X, 1), phi.diff(Var::Y, 1));
        let a3 = a1.clone() + a2.clone();
        let (l21, l32, l31) = linear_invariants(&a1, &a2, &a3);
        structural_zero(&l21, "l21 on gradient data")?;
        structural_zero(&l32, "l32 on gradient data")?;
        structural_zero(&l31, "l31 on gradient data")?;

        let found = find_gauge_to_product_form(
            &expr::y(),
            &expr::x(),
            &(expr::x() + expr::y()),
            cfg,
        )
        .map_err(err)?
        .ok_or("integrable data should yield a gauge")?;
        structural_zero(&(found - expr::x() * expr::y()), "recovered gauge exponent")
    }));

    f.push(fixture("order-2 gauge leaves remainder", |cfg| {
        let a = op("Dx^2 - Dy^2 + x*Dx + y*Dy + x*y")?;
        let rep = verify_gauge_invariance(&a, &(expr::x() * expr::y()), &expr::int(1), cfg)
            .map_err(err)?;
        ensure(rep.pass(), format!("{:?}", rep.checks))
    }));

    f.push(fixture("order-3 gauge shifts zero-order remainder", |cfg| {
        let a = op("Dx^3 - Dx*Dy^2 + x*Dx*Dy + y*Dy + 3")?;
        let rep = verify_gauge_invariance(&a, &(expr::x() * expr::y()), &expr::int(1), cfg)
            .map_err(err)?;
        ensure(rep.pass(), format!("{:?}", rep.checks))
    }));

    f.push(fixture("gauge cancels zero-order remainder", |cfg| {
        let a = op("Dx^3 - Dx*Dy^2 + Dx*Dy + 2*Dy + 3")?;
        let fac = factor3(&a, &expr::int(1), cfg).map_err(err)?;
        ensure(!fac.l3.is_zero_expr(), "instance needs a nonzero Dy remainder")?;
        let l3 = fac.l3.as_rational().ok_or("constant remainder expected")?;
        let l31 = fac.l31.as_rational().ok_or("constant remainder expected")?;
        let phi = expr::bigrat(-(l31 / l3)) * expr::y();
        let conj = factor3(&a.gauge_conjugate(&phi), &expr::int(1), cfg).map_err(err)?;
        structural_zero(&conj.l31, "conjugated zero-order remainder")
    }));

    f.push(fixture("linear-coefficient invariants", |_| {
        let inv = hyper("Dx*Dy + x*Dx + 2")?.invariants().map_err(err)?;
        structural_zero(&(inv.a_hat + expr::int(1)), "a-invariant")?;
        structural_zero(&(inv.b_hat + expr::int(2)), "b-invariant")
    }));

    f.push(fixture("gauge conjugates equivalent", |cfg| {
        let base = hyper("Dx*Dy + x*Dx + 2")?;
        let phi = expr::x().pow(2).map_err(err)? * expr::y()
            - expr::int(3) * expr::x() * expr::y();
        let conj = base.gauge(&phi).map_err(err)?;
        ensure(equivalent(&base, &conj, cfg).map_err(err)?, "conjugate not equivalent")?;
        let other = hyper("Dx*Dy + x*Dx + 3")?;
        ensure(!equivalent(&base, &other, cfg).map_err(err)?, "distinct invariants matched")
    }));

    f.push(fixture("matched invariants give potential form", |cfg| {
        let base = HyperbolicOp::new(expr::x(), expr::y(), expr::x() * expr::y());
        let inv = base.invariants().map_err(err)?;
        structural_zero(&(inv.a_hat.clone() - inv.b_hat), "invariants should coincide")?;
        let conj = base.gauge(&expr::neg(expr::x() * expr::y())).map_err(err)?;
        ensure(
            rational(&conj.a)?.is_zero_expr() && rational(&conj.b)?.is_zero_expr(),
            format!("first-order coefficients survive: {} / {}", conj.a, conj.b),
        )?;
        ensure(equivalent(&base, &conj, cfg).map_err(err)?, "potential form not equivalent")
    }));

    f.push(fixture("transform advances invariants", |cfg| {
        let next = laplace_transform(&hyper("Dx*Dy + x*Dx + 2")?, cfg).map_err(err)?;
        let inv = next.invariants().map_err(err)?;
        structural_zero(&inv.a_hat, "advanced a-invariant")?;
        structural_zero(&(inv.b_hat + expr::int(1)), "advanced b-invariant")
    }));

    f.push(fixture("chain terminates at factorizable", |cfg| {
        let chain =
            laplace_chain(&hyper("Dx*Dy + x*Dx + 2")?, 5, Direction::AHat, cfg).map_err(err)?;
        ensure(chain.termination == Termination::HitFactorizable, "chain ran past the stop")?;
        let trace = chain.trace();
        let want = [
            (expr::int(-1), expr::int(-2)),
            (expr::int(0), expr::int(-1)),
        ];
        ensure(trace == want, format!("trace {trace:?}"))?;

        let last = chain.states.last().unwrap().op.to_lpdo();
        let fac = factor2(&last, &expr::int(0), cfg).map_err(err)?;
        structural_zero(&fac.l2, "remainder of the terminal operator")?;
        ops_match(&fac.left_factor(), &Lpdo::new().with(1, 0, Expr::one()), "terminal left")?;
        ops_match(
            &fac.right_factor(),
            &Lpdo::new().with(0, 1, Expr::one()).with(0, 0, expr::x()),
            "terminal right",
        )
    }));

    f.push(fixture("chain recurrence on reduced operator", |cfg| {
        let base = HyperbolicOp::new(Expr::zero(), expr::x(), expr::x() * expr::y() + expr::int(1));
        let chain = laplace_chain(&base, 3, Direction::AHat, cfg).map_err(err)?;
        ensure(chain.states.len() == 3, "chain stopped early")?;
        ensure(verify_recurrence(&chain, cfg).map_err(err)?, "second-difference identity failed")
    }));

    f.push(fixture("open lattice matrix determinants", |_| {
        for n in 1..=8usize {
            let m = cartan_matrix(n, ChainClosure::Truncated).map_err(err)?;
            let want = if n % 2 == 0 {
                BigInt::from(n as i64 + 1)
            } else {
                BigInt::from(-(n as i64 + 1))
            };
            ensure(m.det_exact() == want, format!("det at size {n}"))?;
            ensure(m.det_cofactor() == want, format!("cofactor det at size {n}"))?;
        }
        let one = cartan_matrix(1, ChainClosure::Truncated).map_err(err)?;
        ensure(*one.entry(0, 0) == BigInt::from(-2), "size-1 matrix should be [[-2]]")
    }));

    f.push(fixture("periodic lattice matrix singular", |_| {
        for n in 3..=8usize {
            let m = cartan_matrix(n, ChainClosure::Periodic).map_err(err)?;
            ensure(m.det_exact().is_zero(), format!("wrapped det at size {n}"))?;
            ensure(m.det_cofactor().is_zero(), format!("wrapped cofactor det at size {n}"))?;
            let ones = vec![BigInt::one(); n];
            ensure(
                m.mul_vec(&ones).iter().all(|v| v.is_zero()),
                format!("all-ones kernel vector fails at size {n}"),
            )?;
        }
        let m3 = cartan_matrix(3, ChainClosure::Periodic).map_err(err)?;
        ensure(
            *m3.entry(0, 2) == BigInt::one() && *m3.entry(2, 0) == BigInt::one(),
            "wrap couplings missing at size 3",
        )?;
        match cartan_matrix(2, ChainClosure::Periodic) {
            Err(LaplaceError::PeriodicTooSmall(2)) => Ok(()),
            other => Err(format!("size 2 wrap should be rejected, got {other:?}")),
        }
    }));

    f.push(fixture("ladder starts at the seed function", |_| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let w = random_poly(&mut rng) + expr::int(rng.gen_range(1..=3)) * expr::exp(expr::x());
            let d = dn_sequence(&w, 1).map_err(err)?;
            structural_zero(&(d[1].clone() - w), "first minor vs seed")?;
        }
        Ok(())
    }));

    f.push(fixture("rank-two seeds kill higher minors", |_| {
        let concrete = expr::x() * expr::exp(expr::y()) + expr::exp(expr::x()) * expr::y();
        let d = dn_sequence(&concrete, 4).map_err(err)?;
        structural_zero(&d[3], "third minor of a rank-two seed")?;
        structural_zero(&d[4], "fourth minor of a rank-two seed")?;

        let opaque = expr::func_of_x("X1") * expr::func_of_y("Y1")
            + expr::func_of_x("X2") * expr::func_of_y("Y2");
        let d = dn_sequence(&opaque, 4).map_err(err)?;
        structural_zero(&d[3], "third minor of an opaque rank-two seed")?;
        structural_zero(&d[4], "fourth minor of an opaque rank-two seed")
    }));

    f.push(fixture("ladder log identity", |cfg| {
        let w = expr::func("w");
        let d = dn_sequence(&w, 2).map_err(err)?;
        let log_xy = expr::log(w.clone()).map_err(err)?.diff(Var::X, 1).diff(Var::Y, 1);
        let resid = log_xy - d[2].clone().div(w.clone() * w).map_err(err)?;
        probable_zero(&resid, cfg, "log second-derivative vs minor ratio")
    }));

    f.push(fixture("lattice couplings under exponential gauge", |cfg| {
        // q_n = n*(x+y): couplings e^{x+y} and slopes n satisfy both relations
        let b: Vec<Expr> = (0..4).map(expr::int).collect();
        let c: Vec<Expr> = (0..4).map(|_| expr::exp(expr::x() + expr::y())).collect();
        ensure(
            commutator_check(&b, &c, ChainClosure::Truncated, cfg).map_err(err)?,
            "commutator relations failed on an explicit solution",
        )
    }));

    f.push(fixture("exponential gauge solves the lattice", |cfg| {
        let q: Vec<Expr> = (1..=4).map(|i| expr::func(&format!("q{i}"))).collect();
        ensure(
            toda_gauge_check(&q, ChainClosure::Truncated, cfg).map_err(err)?,
            "open family: substitution did not close",
        )?;
        ensure(
            toda_gauge_check(&q, ChainClosure::Periodic, cfg).map_err(err)?,
            "wrapped family: substitution did not close",
        )
    }));

    f.push(fixture("liouville particular solution", |_| {
        let rep = closure_identity_check(ClosureKind::Liouville).map_err(err)?;
        ensure(rep.pass(), format!("{:?}", rep.checks))?;
        ensure(rep.kappa.is_none(), "no reduction constant expected")
    }));

    f.push(fixture("sinh-gordon reduction constant", |_| {
        let rep = closure_identity_check(ClosureKind::SinhGordon).map_err(err)?;
        ensure(rep.pass(), format!("{:?}", rep.checks))?;
        ensure(
            rep.kappa == Some(expr::int(2)),
            format!("reduction constant {:?}", rep.kappa),
        )
    }));

    f.push(fixture("tzitzeica reduction", |_| {
        let rep = closure_identity_check(ClosureKind::Tzitzeica).map_err(err)?;
        ensure(rep.pass(), format!("{:?}", rep.checks))
    }));

    f.push(fixture("two-site periodic reduction", |_| {
        let (b1, b2) = (expr::func("b1"), expr::func("b2"));
        let inv_k = Expr::one().div(expr::k()).map_err(err)?;
        let (a2, a1, a0) = bloch_reduce(&b1, &b2, &inv_k, &inv_k).map_err(err)?;
        ensure(a2.is_one(), format!("leading coefficient {a2}"))?;
        structural_zero(&(a1 - (b1.clone() + b2.clone())), "middle coefficient")?;
        let want = b2.diff(Var::X, 1) + b1 * b2.clone()
            - Expr::one().div(expr::k().pow(2).map_err(err)?).map_err(err)?;
        structural_zero(&(a0 - want), "zero-order coefficient")
    }));

    f.push(fixture("operator text round-trip", |_| {
        let a = op("Dx*Dy + x*Dx + 2")?;
        let want = Lpdo::new()
            .with(1, 1, Expr::one())
            .with(1, 0, expr::x())
            .with(0, 0, expr::int(2));
        ops_match(&a, &want, "parsed operator")?;
        for src in ["Dx*Dy + x*Dx + 2", "Dx^3 - Dx*Dy^2 + x*Dx*Dy + y*Dy + 3"] {
            let parsed = op(src)?;
            let reparsed = op(&parsed.to_string())?;
            ops_match(&parsed, &reparsed, "round-trip")?;
        }
        Ok(())
    }));

    f.push(fixture("characteristic remainders match rotated invariants", |cfg| {
        // in half-sum coordinates u = x+y, v = x-y the wave operator becomes
        // 4*(Du*Dv + ...) and its two remainders are four times the transform
        // invariants of that normal form
        let (a10, a01, a00) = (expr::func("a10"), expr::func("a01"), expr::func("a00"));
        let a = Lpdo::new()
            .with(2, 0, Expr::one())
            .with(0, 2, expr::int(-1))
            .with(1, 0, a10.clone())
            .with(0, 1, a01.clone())
            .with(0, 0, a00.clone());
        let du = |e: &Expr| half(e.diff(Var::X, 1) + e.diff(Var::Y, 1));
        let dv = |e: &Expr| half(e.diff(Var::X, 1) - e.diff(Var::Y, 1));
        let at = quarter(a10.clone() + a01.clone());
        let bt = quarter(a10 - a01);
        let ct = quarter(a00);
        let a_hat = at.clone() * bt.clone() + du(&at) - ct.clone();
        let b_hat = at * bt.clone() + dv(&bt) - ct;

        let minus = factor2(&a, &expr::int(-1), cfg).map_err(err)?;
        probable_zero(
            &(minus.l2 - expr::int(4) * a_hat),
            cfg,
            "remainder at root -1 vs scaled a-invariant",
        )?;
        let plus = factor2(&a, &expr::int(1), cfg).map_err(err)?;
        probable_zero(
            &(plus.l2 - expr::int(4) * b_hat),
            cfg,
            "remainder at root +1 vs scaled b-invariant",
        )
    }));

    f
}

// ---------------------------------------------------------------------------
// random sweeps
// ---------------------------------------------------------------------------

/// Aggregate outcome of a randomized sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepOutcome {
    pub trials: u32,
    /// Trials whose remainders passed the randomized zero test and whose
    /// recomposition matched the input under it.
    pub zero_ok: u32,
    /// Trials whose recomposition matched the input coefficient-wise after
    /// rational normalization, with no probabilistic step.
    pub structural_ok: u32,
}

const TRIAL_STRIDE: u64 = 0x9e37_79b9_7f4a_7c15;

fn trial_rng(seed: u64, t: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(t) + 1).wrapping_mul(TRIAL_STRIDE))
}

/// Up to three monomials `x^i*y^j` with `i + j <= 2` and coefficients in
/// `[-3, 3]`; may be zero.
fn random_poly(rng: &mut ChaCha8Rng) -> Expr {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=3u32) {
        let i = rng.gen_range(0..=2u32);
        let j = rng.gen_range(0..=(2 - i));
        let c = rng.gen_range(-3i64..=3);
        if c == 0 {
            continue;
        }
        let mut fs = vec![expr::int(c)];
        if i > 0 {
            fs.push(expr::x().pow(i64::from(i)).expect("positive power"));
        }
        if j > 0 {
            fs.push(expr::y().pow(i64::from(j)).expect("positive power"));
        }
        terms.push(expr::prod(fs));
    }
    expr::sum(terms)
}

/// First-order factor `Dx - w*Dy + p` with an integer root `w`.
fn random_left(rng: &mut ChaCha8Rng) -> (i64, Lpdo) {
    let w = rng.gen_range(-3i64..=3);
    let left = Lpdo::new()
        .with(1, 0, Expr::one())
        .with(0, 1, expr::int(-w))
        .with(0, 0, random_poly(rng));
    (w, left)
}

fn structural_match(a: &Lpdo, b: &Lpdo) -> Result<bool, String> {
    ops_equal_structural(a, b)
}

/// Composes random first-order factors, refactors at the shared root, and
/// grades the round trip. Degenerate draws (order drop, multiple root) are
/// redrawn a bounded number of times.
pub fn sweep_recompose2(seed: u64, trials: u32, cfg: &ZeroCfg) -> Result<SweepOutcome, String> {
    let graded = par::map_indexed(trials, cfg.parallel, |t| -> Result<(bool, bool), String> {
        let mut rng = trial_rng(seed, t);
        for _ in 0..16 {
            let (w, left) = random_left(&mut rng);
            let right = Lpdo::new()
                .with(1, 0, random_poly(&mut rng))
                .with(0, 1, random_poly(&mut rng))
                .with(0, 0, random_poly(&mut rng));
            let input = left.compose(&right);
            if input.order() != 2 {
                continue;
            }
            let fac = match factor2(&input, &expr::int(w), cfg) {
                Ok(fac) => fac,
                Err(FactorError::MultipleRoot | FactorError::NotARoot) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let structural = structural_match(&fac.recompose(), &input)?;
            let zero = is_zero_with(&fac.l2, cfg).map_err(err)?
                && (structural
                    || fac.recompose().equal_mod_zero_test(&input, cfg).map_err(err)?);
            return Ok((structural, zero));
        }
        Err("no usable random second-order draw".into())
    });
    collect_grades(trials, graded)
}

/// Same round trip for third-order operators: first-order times second-order.
pub fn sweep_recompose3(seed: u64, trials: u32, cfg: &ZeroCfg) -> Result<SweepOutcome, String> {
    let graded = par::map_indexed(trials, cfg.parallel, |t| -> Result<(bool, bool), String> {
        let mut rng = trial_rng(seed, t);
        for _ in 0..16 {
            let (w, left) = random_left(&mut rng);
            let right = Lpdo::new()
                .with(2, 0, random_poly(&mut rng))
                .with(1, 1, random_poly(&mut rng))
                .with(0, 2, random_poly(&mut rng))
                .with(1, 0, random_poly(&mut rng))
                .with(0, 1, random_poly(&mut rng))
                .with(0, 0, random_poly(&mut rng));
            let input = left.compose(&right);
            if input.order() != 3 {
                continue;
            }
            let fac = match factor3(&input, &expr::int(w), cfg) {
                Ok(fac) => fac,
                Err(FactorError::MultipleRoot | FactorError::NotARoot) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let structural = structural_match(&fac.recompose(), &input)?;
            let zero = is_zero_with(&fac.l3, cfg).map_err(err)?
                && is_zero_with(&fac.l31, cfg).map_err(err)?
                && (structural
                    || fac.recompose().equal_mod_zero_test(&input, cfg).map_err(err)?);
            return Ok((structural, zero));
        }
        Err("no usable random third-order draw".into())
    });
    collect_grades(trials, graded)
}

fn collect_grades(
    trials: u32,
    graded: Vec<Result<(bool, bool), String>>,
) -> Result<SweepOutcome, String> {
    let mut out = SweepOutcome { trials, zero_ok: 0, structural_ok: 0 };
    for g in graded {
        let (structural, zero) = g?;
        out.structural_ok += u32::from(structural);
        out.zero_ok += u32::from(zero);
    }
    Ok(out)
}

/// Random (operator, gauge exponent) pairs per order; returns how many pairs
/// violated the remainder-invariance report.
pub fn sweep_gauge_pairs(
    order: u32,
    seed: u64,
    trials: u32,
    cfg: &ZeroCfg,
) -> Result<u32, String> {
    let graded = par::map_indexed(trials, cfg.parallel, |t| -> Result<bool, String> {
        let mut rng = trial_rng(seed, t);
        for _ in 0..16 {
            let (w, left) = random_left(&mut rng);
            let right = if order == 2 {
                Lpdo::new()
                    .with(1, 0, random_poly(&mut rng))
                    .with(0, 1, random_poly(&mut rng))
                    .with(0, 0, random_poly(&mut rng))
            } else {
                Lpdo::new()
                    .with(2, 0, random_poly(&mut rng))
                    .with(1, 1, random_poly(&mut rng))
                    .with(0, 2, random_poly(&mut rng))
                    .with(1, 0, random_poly(&mut rng))
                    .with(0, 1, random_poly(&mut rng))
                    .with(0, 0, random_poly(&mut rng))
            };
            let input = left.compose(&right);
            if input.order() != order as i32 {
                continue;
            }
            let phi = random_poly(&mut rng);
            let rep = match verify_gauge_invariance(&input, &phi, &expr::int(w), cfg) {
                Ok(rep) => rep,
                Err(FactorError::MultipleRoot | FactorError::NotARoot) => continue,
                Err(e) => return Err(e.to_string()),
            };
            return Ok(rep.pass());
        }
        Err("no usable random gauge draw".into())
    });
    let mut failures = 0;
    for g in graded {
        failures += u32::from(!g?);
    }
    Ok(failures)
}

/// Random (normal-form operator, gauge exponent) pairs; counts pairs whose
/// transform invariants moved under conjugation.
pub fn sweep_transform_gauge(seed: u64, trials: u32, cfg: &ZeroCfg) -> Result<u32, String> {
    let graded = par::map_indexed(trials, cfg.parallel, |t| -> Result<bool, String> {
        let mut rng = trial_rng(seed, t);
        let base = HyperbolicOp::new(
            random_poly(&mut rng),
            random_poly(&mut rng),
            random_poly(&mut rng),
        );
        let phi = random_poly(&mut rng);
        let conj = base.gauge(&phi).map_err(err)?;
        equivalent(&base, &conj, cfg).map_err(err)
    });
    let mut failures = 0;
    for g in graded {
        failures += u32::from(!g?);
    }
    Ok(failures)
}

/// Random constant wave-operator coefficient pairs: the condition-satisfying
/// zero-order term must split with a clean expansion, the violated one must
/// leave a nonzero remainder. Returns the number of failing pairs.
pub fn sweep_wave_conditions(seed: u64, trials: u32, cfg: &ZeroCfg) -> Result<u32, String> {
    let graded = par::map_indexed(trials, cfg.parallel, |t| -> Result<bool, String> {
        let mut rng = trial_rng(seed, t);
        let a10 = Rat::from_integer(rng.gen_range(-3i64..=3).into());
        let a01 = Rat::from_integer(rng.gen_range(-3i64..=3).into());
        let a00 = (&a10 * &a10 - &a01 * &a01) / Rat::from_integer(4.into());

        let build = |c: &Rat| {
            Lpdo::new()
                .with(2, 0, Expr::one())
                .with(0, 2, expr::int(-1))
                .with(1, 0, expr::bigrat(a10.clone()))
                .with(0, 1, expr::bigrat(a01.clone()))
                .with(0, 0, expr::bigrat(c.clone()))
        };
        let Some((l, r)) = const_factor_condition2(&a10, &a01, &a00) else {
            return Ok(false);
        };
        if !structural_match(&l.compose(&r), &build(&a00))? {
            return Ok(false);
        }

        let off = &a00 + Rat::one();
        if const_factor_condition2(&a10, &a01, &off).is_some() {
            return Ok(false);
        }
        let fac = factor2(&build(&off), &expr::int(1), cfg).map_err(err)?;
        Ok(!is_zero_with(&fac.l2, cfg).map_err(err)?)
    });
    let mut failures = 0;
    for g in graded {
        failures += u32::from(!g?);
    }
    Ok(failures)
}

/// Bundles the sweeps as named fixtures with the acceptance thresholds:
/// every remainder must pass the zero test and at least 95% of round trips
/// must be structural.
pub fn random_suite(seed: u64, trials: u32, cfg: &ZeroCfg) -> SuiteReport {
    let mut f: Vec<Fixture> = Vec::new();

    f.push(fixture("random second-order recompositions", move |cfg| {
        let o = sweep_recompose2(seed, trials, cfg)?;
        ensure(
            o.zero_ok == o.trials,
            format!("{} of {} trials failed the zero test", o.trials - o.zero_ok, o.trials),
        )?;
        ensure(
            u64::from(o.structural_ok) * 100 >= u64::from(o.trials) * 95,
            format!("only {} of {} round trips were structural", o.structural_ok, o.trials),
        )
    }));

    f.push(fixture("random third-order recompositions", move |cfg| {
        let o = sweep_recompose3(seed, trials, cfg)?;
        ensure(
            o.zero_ok == o.trials,
            format!("{} of {} trials failed the zero test", o.trials - o.zero_ok, o.trials),
        )?;
        ensure(
            u64::from(o.structural_ok) * 100 >= u64::from(o.trials) * 95,
            format!("only {} of {} round trips were structural", o.structural_ok, o.trials),
        )
    }));

    f.push(fixture("random gauge pairs, order 2", move |cfg| {
        let bad = sweep_gauge_pairs(2, seed, trials, cfg)?;
        ensure(bad == 0, format!("{bad} of {trials} pairs broke remainder invariance"))
    }));

    f.push(fixture("random gauge pairs, order 3", move |cfg| {
        let bad = sweep_gauge_pairs(3, seed, trials, cfg)?;
        ensure(bad == 0, format!("{bad} of {trials} pairs broke remainder invariance"))
    }));

    f.push(fixture("random transform-invariant gauges", move |cfg| {
        let bad = sweep_transform_gauge(seed, trials, cfg)?;
        ensure(bad == 0, format!("{bad} of {trials} pairs moved the invariants"))
    }));

    f.push(fixture("random constant wave conditions", move |cfg| {
        let bad = sweep_wave_conditions(seed, trials, cfg)?;
        ensure(bad == 0, format!("{bad} of {trials} coefficient pairs misbehaved"))
    }));

    run("random", f, cfg)
}
