//! Expression-tree encoding of exact numbers used by the model file format:
//! `{"rat": "p/q"} | {"sqrt": e} | {"add": [e...]} | {"mul": [e...]} | {"neg": e}`.

use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{FieldElem, FieldError, FieldTower};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expr {
    Rat(String),
    Sqrt(Box<Expr>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn rat(r: &BigRational) -> Expr {
        Expr::Rat(r.to_string())
    }

    /// Canonical encoding: a sum of monomials `c * √d_i * √d_j ...` in ascending
    /// generator order, each radicand encoded recursively.
    pub fn from_elem(x: &FieldElem) -> Expr {
        let monos = x.monomials();
        if monos.is_empty() {
            return Expr::Rat("0".into());
        }
        let tower = x.tower();
        let mut terms: Vec<Expr> = monos
            .iter()
            .map(|(mask, c)| {
                if *mask == 0 {
                    return Expr::rat(c);
                }
                let mut factors = Vec::new();
                if !c.is_one() {
                    factors.push(Expr::rat(c));
                }
                for bit in 0..64 {
                    if mask & (1u64 << bit) != 0 {
                        let rad = tower.radicand(bit + 1);
                        factors.push(Expr::Sqrt(Box::new(Expr::from_elem(&rad))));
                    }
                }
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    Expr::Mul(factors)
                }
            })
            .collect();
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational, FieldError> {
    let s = s.trim();
    if let Ok(r) = BigRational::from_str(s) {
        return Ok(r);
    }
    // plain decimal literal such as "-3.25"
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(FieldError::BadExpr(format!("not a rational: {s:?}")));
    }
    let num = num_bigint::BigInt::from_str(&digits)
        .map_err(|e| FieldError::BadExpr(e.to_string()))?;
    let den = num_bigint::BigInt::from(10).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Evaluates expressions into one growing tower: each `sqrt` either resolves to
/// an existing generator, to an in-field root, or adjoins a new level.
#[derive(Clone, Debug)]
pub struct ExprContext {
    tower: FieldTower,
}

impl Default for ExprContext {
    fn default() -> Self {
        ExprContext::new(FieldTower::rationals())
    }
}

impl ExprContext {
    pub fn new(tower: FieldTower) -> ExprContext {
        ExprContext { tower }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    /// Adjoin levels in the given order (used to pin the tower layout of a file).
    pub fn declare_levels(&mut self, radicands: &[Expr]) -> Result<(), FieldError> {
        for r in radicands {
            let d = self.eval(r)?;
            self.tower = self.tower.adjoin(&d)?;
        }
        Ok(())
    }

    pub fn eval(&mut self, e: &Expr) -> Result<FieldElem, FieldError> {
        let v = match e {
            Expr::Rat(s) => FieldElem::from_rational(parse_rational(s)?),
            Expr::Neg(inner) => -self.eval(inner)?,
            Expr::Add(items) => {
                let mut acc = FieldElem::zero();
                for it in items {
                    let v = self.eval(it)?;
                    acc = acc.checked_add(&v)?;
                }
                acc
            }
            Expr::Mul(items) => {
                let mut acc = FieldElem::one();
                for it in items {
                    let v = self.eval(it)?;
                    acc = acc.checked_mul(&v)?;
                }
                acc
            }
            Expr::Sqrt(inner) => {
                let d = self.eval(inner)?.lift(&self.tower)?;
                if let Some(level) = (1..=self.tower.depth()).find(|&l| self.tower.radicand(l) == d)
                {
                    self.tower.generator(level)
                } else {
                    let (tower, root) = FieldElem::sqrt_adjoining(&self.tower, &d)?;
                    self.tower = tower;
                    root
                }
            }
        };
        v.lift(&self.tower)
    }

    /// Encode the current tower's radicands, in level order.
    pub fn level_exprs(&self) -> Vec<Expr> {
        (1..=self.tower.depth())
            .map(|l| Expr::from_elem(&self.tower.radicand(l)))
            .collect()
    }
}
