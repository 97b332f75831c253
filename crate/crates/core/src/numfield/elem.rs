use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::node::{self, Node};
use super::{DecimalInterval, FieldError, FieldTower, Rational, Sign};

/// An exact real number in a [`FieldTower`].
///
/// The operator impls (`+`, `-`, `*`, `/`) panic on incompatible towers or
/// division by zero; use the `checked_*` methods where that can happen.
#[derive(Clone)]
pub struct FieldElem {
    tower: FieldTower,
    node: Node,
}

impl FieldElem {
    pub(crate) fn from_parts(tower: FieldTower, node: Node) -> FieldElem {
        debug_assert!(node.level() <= tower.depth());
        FieldElem { tower, node }
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    pub fn from_rational(r: Rational) -> FieldElem {
        FieldElem::from_parts(FieldTower::rationals(), Node::Rat(r))
    }

    pub fn from_int(n: i64) -> FieldElem {
        FieldElem::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> FieldElem {
        FieldElem::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn zero() -> FieldElem {
        FieldElem::from_int(0)
    }

    pub fn one() -> FieldElem {
        FieldElem::from_int(1)
    }

    /// `√radicand` as a generator of `tower`'s top level when `radicand` is not a
    /// square, or the in-field root otherwise; returns the (possibly extended) tower.
    pub fn sqrt_adjoining(
        tower: &FieldTower,
        radicand: &FieldElem,
    ) -> Result<(FieldTower, FieldElem), FieldError> {
        match tower.adjoin(radicand) {
            Ok(t) => {
                let g = t.generator(t.depth());
                Ok((t, g))
            }
            Err(FieldError::AlreadySquare(root)) => {
                let root = if root.sign() == Sign::Negative {
                    -*root
                } else {
                    *root
                };
                Ok((tower.clone(), root.lift(tower)?))
            }
            Err(e) => Err(e),
        }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    /// Highest tower level this element actually involves.
    pub fn level(&self) -> usize {
        self.node.level()
    }

    pub fn is_zero(&self) -> bool {
        self.node.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.node.as_rational()
    }

    /// Re-home this element into `tower`. Succeeds whenever `tower` shares every
    /// level the element uses.
    pub fn lift(&self, tower: &FieldTower) -> Result<FieldElem, FieldError> {
        if self.node.level() <= self.tower.common_prefix(tower) {
            Ok(FieldElem::from_parts(tower.clone(), self.node.clone()))
        } else {
            Err(FieldError::IncompatibleTowers)
        }
    }

    /// The tower that can host both operands.
    fn join(&self, other: &FieldElem) -> Result<FieldTower, FieldError> {
        let (a, b) = (&self.tower, &other.tower);
        let common = a.common_prefix(b);
        let a_fits_b = self.node.level() <= common;
        let b_fits_a = other.node.level() <= common;
        match (a_fits_b, b_fits_a) {
            (true, true) => Ok(if b.depth() > a.depth() { b.clone() } else { a.clone() }),
            (true, false) => Ok(b.clone()),
            (false, true) => Ok(a.clone()),
            (false, false) => Err(FieldError::IncompatibleTowers),
        }
    }

    /// Whether `self` and `other` can be combined arithmetically.
    pub fn is_compatible(&self, other: &FieldElem) -> bool {
        self.join(other).is_ok()
    }

    pub fn checked_add(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        let t = self.join(other)?;
        let n = self.node.add(&other.node);
        Ok(FieldElem::from_parts(t, n))
    }

    pub fn checked_sub(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        let t = self.join(other)?;
        let n = self.node.sub(&other.node);
        Ok(FieldElem::from_parts(t, n))
    }

    pub fn checked_mul(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        let t = self.join(other)?;
        let n = self.node.mul(&other.node, t.radicands());
        Ok(FieldElem::from_parts(t, n))
    }

    pub fn checked_div(&self, other: &FieldElem) -> Result<FieldElem, FieldError> {
        let t = self.join(other)?;
        let inv = other
            .node
            .inv(t.radicands())
            .ok_or(FieldError::DivisionByZero)?;
        let n = self.node.mul(&inv, t.radicands());
        Ok(FieldElem::from_parts(t, n))
    }

    pub fn recip(&self) -> Result<FieldElem, FieldError> {
        let inv = self
            .node
            .inv(self.tower.radicands())
            .ok_or(FieldError::DivisionByZero)?;
        Ok(FieldElem::from_parts(self.tower.clone(), inv))
    }

    pub fn scale(&self, k: &Rational) -> FieldElem {
        FieldElem::from_parts(self.tower.clone(), self.node.scale(k))
    }

    pub fn square(&self) -> FieldElem {
        self * self
    }

    /// Exact sign of the represented real number.
    pub fn sign(&self) -> Sign {
        self.node.sign(self.tower.radicands())
    }

    /// A square root lying in this element's own tower, if there is one.
    pub fn sqrt_in_field(&self) -> Result<Option<FieldElem>, FieldError> {
        if self.sign() == Sign::Negative {
            return Err(FieldError::NegativeInput);
        }
        let rads = self.tower.radicands();
        Ok(self
            .node
            .sqrt_within(self.tower.depth(), rads)
            .map(|n| FieldElem::from_parts(self.tower.clone(), n)))
    }

    /// Write `self = r^2 * rest` pulling rational square factors out of the
    /// coefficient content, so `rest` has integer coefficients.
    pub fn split_square_content(&self) -> (Rational, FieldElem) {
        if self.is_zero() {
            return (Rational::one(), self.clone());
        }
        let c = node::content(&self.node);
        let primitive = self.node.scale(&c.recip());
        let (sn, tn) = node::square_part(c.numer());
        let (sd, td) = node::square_part(c.denom());
        // c = (sn/sd)^2 * tn/td = (sn/(sd*td))^2 * tn*td
        let r = BigRational::new(sn, sd * &td);
        let k = BigRational::from_integer(tn * td);
        (
            r,
            FieldElem::from_parts(self.tower.clone(), primitive.scale(&k)),
        )
    }

    /// Enclosing interval of width below `10^-digits`.
    pub fn approx(&self, digits: u32) -> DecimalInterval {
        DecimalInterval::enclose(&self.node, self.tower.radicands(), digits.max(1))
    }

    pub fn to_f64(&self) -> f64 {
        match self.as_rational() {
            Some(r) => super::approx::rational_to_f64(r),
            None => self.approx(20).midpoint_f64(),
        }
    }

    /// Coefficients over the monomial basis `∏ √d_i` of this element's tower,
    /// indexed by the bitmask of generators (length `2^depth`).
    pub fn coefficients(&self) -> Vec<Rational> {
        let depth = self.tower.depth();
        assert!(depth < 24, "tower too deep for a dense coefficient vector");
        let mut out = vec![Rational::zero(); 1 << depth];
        self.node
            .for_each_monomial(0, &mut |mask, c| out[mask as usize] += c);
        out
    }

    pub fn from_coefficients(tower: &FieldTower, coeffs: &[Rational]) -> FieldElem {
        let monos: Vec<(u64, Rational)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as u64, c.clone()))
            .collect();
        let n = Node::from_monomials(&monos, tower.radicands());
        FieldElem::from_parts(tower.clone(), n)
    }

    /// Nonzero monomials `(generator bitmask, coefficient)` in ascending mask order.
    pub fn monomials(&self) -> Vec<(u64, Rational)> {
        let mut out = Vec::new();
        self.node
            .for_each_monomial(0, &mut |mask, c| out.push((mask, c.clone())));
        out.sort_by_key(|(m, _)| *m);
        out
    }

    pub fn abs(&self) -> FieldElem {
        if self.sign() == Sign::Negative {
            -self
        } else {
            self.clone()
        }
    }
}

impl PartialEq for FieldElem {
    /// Numeric equality; elements from incompatible towers are never equal.
    fn eq(&self, other: &Self) -> bool {
        match self.join(other) {
            Ok(_) => self.node == other.node,
            Err(_) => false,
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElem({self})")
    }
}

impl fmt::Display for FieldElem {
    /// Sum of monomials, e.g. `1/2 + 3*√31*√166`; radicands above level 1 print in
    /// parentheses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let monos = self.monomials();
        if monos.is_empty() {
            return write!(f, "0");
        }
        for (i, (mask, c)) in monos.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let c = c.abs();
            let mut parts = Vec::new();
            if *mask == 0 || !c.is_one() {
                parts.push(c.to_string());
            }
            for bit in 0..64 {
                if mask & (1u64 << bit) != 0 {
                    let rad = self.tower.radicand(bit + 1);
                    if rad.level() == 0 {
                        parts.push(format!("√{rad}"));
                    } else {
                        parts.push(format!("√({rad})"));
                    }
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl From<Rational> for FieldElem {
    fn from(r: Rational) -> Self {
        FieldElem::from_rational(r)
    }
}

impl From<i64> for FieldElem {
    fn from(n: i64) -> Self {
        FieldElem::from_int(n)
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;

    fn neg(self) -> FieldElem {
        FieldElem::from_parts(self.tower.clone(), self.node.neg())
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;

    fn neg(self) -> FieldElem {
        -&self
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElem> for &FieldElem {
            type Output = FieldElem;

            fn $method(self, rhs: &FieldElem) -> FieldElem {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("field arithmetic failed: {e}"),
                }
            }
        }

        impl $trait<FieldElem> for FieldElem {
            type Output = FieldElem;

            fn $method(self, rhs: FieldElem) -> FieldElem {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&FieldElem> for FieldElem {
            type Output = FieldElem;

            fn $method(self, rhs: &FieldElem) -> FieldElem {
                (&self).$method(rhs)
            }
        }

        impl $trait<FieldElem> for &FieldElem {
            type Output = FieldElem;

            fn $method(self, rhs: FieldElem) -> FieldElem {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);
