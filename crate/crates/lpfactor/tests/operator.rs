//! Operator algebra: composition, application, symbols, gauge action, and
//! leading-coefficient normalization.

use lpfactor::expr::{self, Expr, Mode, Var};
use lpfactor::operator::{KillCoeff, Lpdo, OperatorError, VarStep};
use lpfactor::parse::parse_operator;
use lpfactor::ZeroCfg;

fn op(src: &str) -> Lpdo {
    parse_operator(src).unwrap()
}

fn cfg() -> ZeroCfg {
    ZeroCfg::default()
}

fn rational(e: &Expr) -> Expr {
    e.clone().normalized_in(Mode::Rational).unwrap()
}

fn assert_ops_eq(a: &Lpdo, b: &Lpdo) {
    let d = a.sub(b);
    for ((i, j), c) in d.iter() {
        assert!(rational(c).is_zero_expr(), "coefficient ({i},{j}) differs: {c}");
    }
}

#[test]
fn composition_obeys_the_product_rule() {
    // (Dx + b)(Dy + a) picks up the cross derivative of a
    let (a, b) = (expr::func("a"), expr::func("b"));
    let left = Lpdo::new().with(1, 0, Expr::one()).with(0, 0, b.clone());
    let right = Lpdo::new().with(0, 1, Expr::one()).with(0, 0, a.clone());
    let got = left.compose(&right);
    assert_eq!(rational(&got.coeff(1, 1)), expr::int(1));
    assert_eq!(rational(&got.coeff(1, 0)), a.clone());
    assert_eq!(rational(&got.coeff(0, 1)), b.clone());
    assert!(rational(&(got.coeff(0, 0) - a.clone() * b - a.diff(Var::X, 1))).is_zero_expr());

    // variable coefficient on the left differentiates everything on the right
    let left = Lpdo::new().with(0, 1, expr::x());
    let right = Lpdo::new().with(1, 0, expr::y());
    let got = left.compose(&right);
    // x*Dy . y*Dx = x*y*Dx*Dy + x*Dx
    assert_eq!(rational(&got.coeff(1, 1)), rational(&(expr::x() * expr::y())));
    assert_eq!(rational(&got.coeff(1, 0)), expr::x());
    assert!(got.coeff(0, 1).is_zero_expr());
}

#[test]
fn composition_is_associative() {
    let a = op("Dx + x*y");
    let b = op("Dy + x^2");
    let c = op("Dx*Dy + y*Dx + 1");
    assert_ops_eq(&a.compose(&b).compose(&c), &a.compose(&b.compose(&c)));
}

#[test]
fn application_differentiates_and_scales() {
    let a = op("Dx*Dy + x*Dx + 2");
    let f = expr::x() * expr::y();
    // (x*y)_xy = 1, x*(x*y)_x = x*y, 2*x*y
    let got = a.apply(&f);
    let want = expr::int(1) + expr::int(3) * expr::x() * expr::y();
    assert!(rational(&(got - want)).is_zero_expr());

    let composed = op("Dx + y").compose(&op("Dy + x"));
    let g = expr::exp(expr::x() * expr::y());
    let via_parts = op("Dx + y").apply(&op("Dy + x").apply(&g));
    assert!(rational(&(composed.apply(&g) - via_parts)).is_zero_expr());
}

#[test]
fn characteristic_polynomial_and_roots() {
    let cp = op("Dx^2 - Dy^2 + x*Dx + y*Dy").char_poly();
    assert_eq!(cp.coeff(0), expr::int(-1));
    assert_eq!(cp.coeff(1), expr::int(0));
    assert_eq!(cp.coeff(2), expr::int(1));
    let roots = cp.rational_roots();
    assert_eq!(roots.len(), 2);
    assert!(roots.contains(&expr::int(1)) && roots.contains(&expr::int(-1)));

    // mixed cubic symbol with a zero root
    let cp = op("Dx^2*Dy + 2*Dx*Dy^2 + Dx + 1").char_poly();
    let roots = cp.rational_roots();
    assert!(roots.contains(&expr::int(0)), "zero root listed: {roots:?}");

    // non-constant principal coefficients refuse a rational-root scan
    let cp = op("x*Dx^2 - Dy^2 + 1").char_poly();
    assert!(cp.rational_roots().is_empty());
}

#[test]
fn gauge_conjugation_shifts_first_order_coefficients() {
    let a = op("Dx*Dy + x*Dx + 2");
    let phi = expr::x() * expr::y();
    let conj = a.gauge_conjugate(&phi);
    // Dx -> Dx + phi_x, Dy -> Dy + phi_y keeps the principal symbol
    assert_eq!(conj.coeff(1, 1), Expr::one());
    assert!(rational(&(conj.coeff(1, 0) - expr::int(2) * expr::x())).is_zero_expr());
    assert!(rational(&(conj.coeff(0, 1) - expr::y())).is_zero_expr());

    // conjugation by phi then by -phi is the identity
    let back = conj.gauge_conjugate(&expr::neg(phi));
    assert_ops_eq(&back, &a);

    // conjugation acts on application: A_phi(f) = e^-phi * A(e^phi * f)
    let f = expr::x() + expr::y();
    let phi = expr::x() * expr::y();
    let lhs = a.gauge_conjugate(&phi).apply(&f).normalized_in(Mode::Formal).unwrap();
    let rhs = (expr::exp(expr::neg(phi.clone()))
        * a.apply(&(expr::exp(phi) * f)))
    .normalized_in(Mode::Formal)
    .unwrap();
    assert!(
        rational(&(lhs - rhs)).is_zero_expr(),
        "conjugated application disagrees with the sandwich form"
    );
}

#[test]
fn leading_normalization_uses_swap_and_shear() {
    // Dx*Dy has no Dx^n term; a shear x -> x - t*y fills it in
    let a = op("Dx*Dy + 1");
    let (n, change) = a.normalize_leading().unwrap();
    assert!(!n.coeff(2, 0).is_zero_expr());
    assert!(!change.is_identity());

    // Dy^2 + Dx only needs the swap
    let a = op("Dy^2 + Dx");
    let (n, change) = a.normalize_leading().unwrap();
    assert!(!n.coeff(2, 0).is_zero_expr());
    assert_eq!(change.steps, vec![VarStep::SwapXY]);

    // already normalized: identity change
    let a = op("Dx^2 + Dy + 3");
    let (n, change) = a.normalize_leading().unwrap();
    assert!(change.is_identity());
    assert_ops_eq(&n, &a);
}

#[test]
fn shear_preserves_application_under_the_substitution() {
    let a = op("Dx*Dy + x*Dx + 2");
    let sheared = a.shear(2).unwrap();
    // the sheared operator has a nonzero Dx^2 coefficient
    assert!(!sheared.coeff(2, 0).is_zero_expr());
    // order never changes under a shear
    assert_eq!(sheared.order(), a.order());
}

#[test]
fn reduce_form_kills_a_first_order_coefficient() {
    let a = op("Dx*Dy + x*Dx + 2");
    let (reduced, phi) = a.reduce_form(KillCoeff::A).unwrap();
    assert!(rational(&reduced.coeff(1, 0)).is_zero_expr(), "Dx coefficient survives");
    assert!(rational(&(phi.clone() + expr::x() * expr::y())).is_zero_expr(), "phi = {phi}");
    // the reduction is a gauge, so transform invariants are untouched
    let hy = lpfactor::laplace::HyperbolicOp::from_lpdo(&a).unwrap();
    let hy_red = lpfactor::laplace::HyperbolicOp::from_lpdo(&reduced).unwrap();
    assert!(lpfactor::laplace::equivalent(&hy, &hy_red, &cfg()).unwrap());

    let b = op("Dx*Dy + y^2*Dy + x");
    let (reduced, _) = b.reduce_form(KillCoeff::B).unwrap();
    assert!(rational(&reduced.coeff(0, 1)).is_zero_expr(), "Dy coefficient survives");

    let bad = op("Dx^2 + Dy");
    assert!(matches!(bad.reduce_form(KillCoeff::A), Err(OperatorError::NotNormalForm)));
}

#[test]
fn display_and_parse_round_trip() {
    for src in [
        "Dx*Dy + x*Dx + 2",
        "Dx^2 - Dy^2 + 2*Dx + 4*Dy - 3",
        "Dx^3 - Dx*Dy^2 + x*Dx*Dy + y*Dy + 3",
        "Dx^2*Dy + Dx*Dy^2 + x^2*Dx*Dy + x^2*Dx + 2*x*Dy + 2*x",
    ] {
        let a = op(src);
        let b = op(&a.to_string());
        assert_ops_eq(&a, &b);
    }
}

#[test]
fn order_tracks_the_highest_total_degree() {
    assert_eq!(op("3").order(), 0);
    assert_eq!(op("Dx + 1").order(), 1);
    assert_eq!(op("Dx*Dy + Dx").order(), 2);
    assert_eq!(op("Dx^2*Dy + Dx*Dy").order(), 3);
    assert_eq!(Lpdo::new().order(), -1);
}
