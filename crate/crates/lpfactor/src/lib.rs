//! Exact symbolic tools for bivariate linear partial differential operators:
//! factorization into first-order factors with remainder invariants, Laplace
//! invariant chains with truncated / periodic / Bloch closures, and the lattice
//! identities those chains satisfy.
//!
//! The engine works over exact rationals. Unknown functions enter as opaque
//! symbols carrying a derivative multi-index, and identities are checked either
//! structurally (canonical forms) or probabilistically by evaluation at random
//! rational points (see [`expr::is_zero`]).

pub mod expr;
pub mod factor;
pub mod laplace;
pub mod operator;
pub mod par;
pub mod parse;
pub mod verify;

pub use expr::{Expr, Mode, Rat, SymError, Var, ZeroCfg};
pub use operator::Lpdo;
