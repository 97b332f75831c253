use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::node::Node;

/// A closed interval `[lo, hi]` with rational endpoints, guaranteed to contain
/// the real number it was computed for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecimalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    digits: u32,
}

impl DecimalInterval {
    pub(crate) fn enclose(node: &Node, rads: &[Node], digits: u32) -> DecimalInterval {
        if let Some(r) = node.as_rational() {
            return DecimalInterval {
                lo: r.clone(),
                hi: r.clone(),
                digits,
            };
        }
        let target = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits));
        // ~3.33 bits per decimal digit plus slack for accumulated rounding
        let mut bits = digits as u64 * 4 + 32;
        loop {
            let mut ctx = Evaluator {
                rads,
                bits,
                sqrt_cache: vec![None; rads.len()],
            };
            let (lo, hi) = ctx.eval(node);
            if &hi - &lo < target {
                return DecimalInterval { lo, hi, digits };
            }
            bits *= 2;
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(r) => self.contains(&r),
            None => false,
        }
    }

    pub fn excludes_zero(&self) -> bool {
        self.lo.is_positive() || self.hi.is_negative()
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn midpoint_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    /// Midpoint rounded to `digits` decimals.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        format_decimal(&self.midpoint(), digits)
    }
}

impl fmt::Display for DecimalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.digits + 1;
        write!(
            f,
            "[{}, {}]",
            format_decimal(&self.lo, d),
            format_decimal(&self.hi, d)
        )
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back through a fixed-point string for extreme magnitudes
        format_decimal(r, 20).parse().unwrap_or(f64::NAN)
    })
}

/// Round half away from zero to `digits` decimals.
pub fn format_decimal(r: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10).pow(digits);
    let scaled = r * BigRational::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let mag = scaled.abs();
    let rounded = (mag + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if neg && !rounded.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    let frac = frac_part.to_string();
    let pad = "0".repeat(digits as usize - frac.len());
    format!("{sign}{int_part}.{pad}{frac}")
}

struct Evaluator<'a> {
    rads: &'a [Node],
    bits: u64,
    sqrt_cache: Vec<Option<(BigRational, BigRational)>>,
}

impl Evaluator<'_> {
    fn grid(&self) -> BigRational {
        BigRational::from_integer(BigInt::one() << self.bits)
    }

    fn round_down(&self, x: &BigRational) -> BigRational {
        let g = self.grid();
        (x * &g).floor() / g
    }

    fn round_up(&self, x: &BigRational) -> BigRational {
        let g = self.grid();
        (x * &g).ceil() / g
    }

    fn eval(&mut self, node: &Node) -> (BigRational, BigRational) {
        match node {
            Node::Rat(r) => (self.round_down(r), self.round_up(r)),
            Node::Ext { level, p, q } => {
                let (plo, phi) = self.eval(p);
                let (qlo, qhi) = self.eval(q);
                let (slo, shi) = self.sqrt_of_level(*level);
                let prods = [&qlo * &slo, &qlo * &shi, &qhi * &slo, &qhi * &shi];
                let mlo = prods.iter().min().unwrap();
                let mhi = prods.iter().max().unwrap();
                (self.round_down(&(plo + mlo)), self.round_up(&(phi + mhi)))
            }
        }
    }

    fn sqrt_of_level(&mut self, level: usize) -> (BigRational, BigRational) {
        if let Some(iv) = &self.sqrt_cache[level - 1] {
            return iv.clone();
        }
        let (dlo, dhi) = self.eval(&self.rads[level - 1].clone());
        let dlo = if dlo.is_negative() { BigRational::zero() } else { dlo };
        let scale = BigInt::one() << (2 * self.bits);
        let one = BigInt::one() << self.bits;
        // floor(sqrt(floor(dlo * 4^b))) / 2^b  <=  sqrt(dlo)
        let lo_int = (dlo * BigRational::from_integer(scale.clone())).floor().to_integer().sqrt();
        let hi_scaled = (dhi * BigRational::from_integer(scale)).ceil().to_integer();
        let mut hi_int = hi_scaled.sqrt();
        if &hi_int * &hi_int < hi_scaled {
            hi_int += 1;
        }
        let iv = (
            BigRational::new(lo_int, one.clone()),
            BigRational::new(hi_int, one),
        );
        self.sqrt_cache[level - 1] = Some(iv.clone());
        iv
    }
}
