//! Exact arithmetic in towers of real quadratic extensions of the rationals.
//!
//! A [`FieldTower`] is a chain `Q ⊂ Q(√d1) ⊂ Q(√d1, √d2) ⊂ ...` where every
//! radicand is positive and certified non-square in the field below it, so
//! every level is a genuine field and zero testing is structural. Every
//! `√d` denotes the positive real square root, which makes [`FieldElem::sign`]
//! well defined and decidable.

mod approx;
mod elem;
mod expr;
mod node;
mod tower;

use std::ops::Mul;

use thiserror::Error;

pub use approx::DecimalInterval;
pub use elem::FieldElem;
pub use expr::{Expr, ExprContext};
pub use tower::FieldTower;

pub type Rational = num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn of_f64(x: f64, eps: f64) -> Sign {
        if x.abs() <= eps {
            Sign::Zero
        } else if x > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        match (self, rhs) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("radicand must be positive")]
    NonPositiveRadicand,
    #[error("radicand is already a square in the field (root {0})")]
    AlreadySquare(Box<FieldElem>),
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to incompatible towers")]
    IncompatibleTowers,
    #[error("square root of a negative number")]
    NegativeInput,
    #[error("malformed number expression: {0}")]
    BadExpr(String),
}
