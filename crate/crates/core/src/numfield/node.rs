//! Sparse coefficient trees for elements of a quadratic tower.
//!
//! A node of level `l > 0` is `p + q * sqrt(d_l)` where `p` and `q` have level
//! strictly below `l` and `q` is never zero. Level 0 is a plain rational. Levels
//! that an element does not involve are skipped entirely, so the representation
//! is canonical: two nodes denote the same number iff they are structurally equal.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Sign;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Rat(BigRational),
    Ext {
        level: usize,
        p: Box<Node>,
        q: Box<Node>,
    },
}

/// Radicands indexed by `level - 1`.
pub(crate) type Radicands<'a> = &'a [Node];

impl Node {
    pub fn zero() -> Node {
        Node::Rat(BigRational::zero())
    }

    pub fn one() -> Node {
        Node::Rat(BigRational::one())
    }

    pub fn level(&self) -> usize {
        match self {
            Node::Rat(_) => 0,
            Node::Ext { level, .. } => *level,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Node::Rat(r) if r.is_zero())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Node::Rat(r) => Some(r),
            Node::Ext { .. } => None,
        }
    }

    /// Build `p + q * sqrt(d_level)`, collapsing when `q` is zero.
    pub fn ext(level: usize, p: Node, q: Node) -> Node {
        debug_assert!(p.level() < level && q.level() < level);
        if q.is_zero() {
            p
        } else {
            Node::Ext {
                level,
                p: Box::new(p),
                q: Box::new(q),
            }
        }
    }

    /// The generator `sqrt(d_level)`.
    pub fn generator(level: usize) -> Node {
        Node::ext(level, Node::zero(), Node::one())
    }

    /// Split into `(p, q)` with respect to `level`, treating a lower-level node as `q = 0`.
    fn split(&self, level: usize) -> (&Node, Option<&Node>) {
        match self {
            Node::Ext { level: l, p, q } if *l == level => (p, Some(q)),
            _ => (self, None),
        }
    }

    pub fn neg(&self) -> Node {
        match self {
            Node::Rat(r) => Node::Rat(-r),
            Node::Ext { level, p, q } => Node::Ext {
                level: *level,
                p: Box::new(p.neg()),
                q: Box::new(q.neg()),
            },
        }
    }

    pub fn add(&self, other: &Node) -> Node {
        match (self, other) {
            (Node::Rat(a), Node::Rat(b)) => Node::Rat(a + b),
            _ => {
                let level = self.level().max(other.level());
                let (pa, qa) = self.split(level);
                let (pb, qb) = other.split(level);
                let p = pa.add(pb);
                let q = match (qa, qb) {
                    (Some(a), Some(b)) => a.add(b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => unreachable!("top level must be present"),
                };
                Node::ext(level, p, q)
            }
        }
    }

    pub fn sub(&self, other: &Node) -> Node {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Node {
        if k.is_zero() {
            return Node::zero();
        }
        match self {
            Node::Rat(r) => Node::Rat(r * k),
            Node::Ext { level, p, q } => Node::Ext {
                level: *level,
                p: Box::new(p.scale(k)),
                q: Box::new(q.scale(k)),
            },
        }
    }

    pub fn mul(&self, other: &Node, rads: Radicands) -> Node {
        match (self, other) {
            (Node::Rat(a), Node::Rat(b)) => Node::Rat(a * b),
            (Node::Rat(a), b) | (b, Node::Rat(a)) => b.scale(a),
            _ => {
                let level = self.level().max(other.level());
                let (pa, qa) = self.split(level);
                let (pb, qb) = other.split(level);
                match (qa, qb) {
                    (Some(qa), Some(qb)) => {
                        let d = &rads[level - 1];
                        let p = pa.mul(pb, rads).add(&qa.mul(qb, rads).mul(d, rads));
                        let q = pa.mul(qb, rads).add(&qa.mul(pb, rads));
                        Node::ext(level, p, q)
                    }
                    (Some(qa), None) => Node::ext(level, pa.mul(pb, rads), qa.mul(pb, rads)),
                    (None, Some(qb)) => Node::ext(level, pa.mul(pb, rads), pa.mul(qb, rads)),
                    (None, None) => unreachable!("top level must be present"),
                }
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, rads: Radicands) -> Option<Node> {
        match self {
            Node::Rat(r) => (!r.is_zero()).then(|| Node::Rat(r.recip())),
            Node::Ext { level, p, q } => {
                // (p + q s)^-1 = (p - q s) / (p^2 - q^2 d)
                let d = &rads[level - 1];
                let norm = p.mul(p, rads).sub(&q.mul(q, rads).mul(d, rads));
                let inv_norm = norm.inv(rads)?;
                Some(Node::ext(
                    *level,
                    p.mul(&inv_norm, rads),
                    q.neg().mul(&inv_norm, rads),
                ))
            }
        }
    }

    pub fn sign(&self, rads: Radicands) -> Sign {
        match self {
            Node::Rat(r) => Sign::of_rational(r),
            Node::Ext { level, p, q } => {
                let sp = p.sign(rads);
                let sq = q.sign(rads);
                if sp == Sign::Zero {
                    return sq;
                }
                if sp == sq {
                    return sp;
                }
                let d = &rads[level - 1];
                let diff = p.mul(p, rads).sub(&q.mul(q, rads).mul(d, rads));
                sp * diff.sign(rads)
            }
        }
    }

    /// A square root of `self` inside the field of level `top`, if one exists.
    pub fn sqrt_within(&self, top: usize, rads: Radicands) -> Option<Node> {
        debug_assert!(self.level() <= top);
        if self.is_zero() {
            return Some(Node::zero());
        }
        if self.sign(rads) == Sign::Negative {
            return None;
        }
        if top == 0 {
            return self.as_rational().and_then(rational_sqrt).map(Node::Rat);
        }
        let d = &rads[top - 1];
        match self.split(top) {
            (p, Some(q)) => {
                // (u + v s)^2 = p + q s  <=>  u^2 + v^2 d = p, 2uv = q.
                // u^2 is a root of T^2 - p T + q^2 d / 4.
                let disc = p.mul(p, rads).sub(&q.mul(q, rads).mul(d, rads));
                let root = disc.sqrt_within(top - 1, rads)?;
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                for cand in [p.add(&root), p.sub(&root)] {
                    let t = cand.scale(&half);
                    if t.is_zero() {
                        continue;
                    }
                    if let Some(u) = t.sqrt_within(top - 1, rads) {
                        let two_u_inv = u.scale(&BigRational::from_integer(2.into())).inv(rads)?;
                        let v = q.mul(&two_u_inv, rads);
                        return Some(Node::ext(top, u, v));
                    }
                }
                None
            }
            (p, None) => {
                if let Some(r) = p.sqrt_within(top - 1, rads) {
                    return Some(r);
                }
                let over_d = p.mul(&d.inv(rads)?, rads);
                over_d
                    .sqrt_within(top - 1, rads)
                    .map(|v| Node::ext(top, Node::zero(), v))
            }
        }
    }

    /// Visit every rational leaf together with the bitmask of generators multiplying it.
    pub fn for_each_monomial(&self, mask: u64, f: &mut impl FnMut(u64, &BigRational)) {
        match self {
            Node::Rat(r) => {
                if !r.is_zero() {
                    f(mask, r)
                }
            }
            Node::Ext { level, p, q } => {
                p.for_each_monomial(mask, f);
                q.for_each_monomial(mask | (1u64 << (level - 1)), f);
            }
        }
    }

    /// Rebuild a node from monomials `(mask, coefficient)`.
    pub fn from_monomials(monos: &[(u64, BigRational)], rads: Radicands) -> Node {
        let mut acc = Node::zero();
        for (mask, c) in monos {
            let mut term = Node::Rat(c.clone());
            for bit in 0..64 {
                if mask & (1u64 << bit) != 0 {
                    term = term.mul(&Node::generator(bit + 1), rads);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }
}

impl Sign {
    pub(crate) fn of_rational(r: &BigRational) -> Sign {
        match r.cmp(&BigRational::zero()) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

pub(crate) fn integer_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub(crate) fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    let n = integer_sqrt_exact(r.numer())?;
    let d = integer_sqrt_exact(r.denom())?;
    Some(BigRational::new(n, d))
}

/// Largest square factor found by exact test plus trial division by small primes:
/// returns `(s, t)` with `n = s^2 * t`.
pub(crate) fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    if let Some(s) = integer_sqrt_exact(n) {
        return (s, BigInt::one());
    }
    let mut s = BigInt::one();
    let mut t = n.clone();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(10_000);
    while p <= limit {
        let p2 = &p * &p;
        while (&t % &p2).is_zero() {
            t /= &p2;
            s *= &p;
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if let Some(r) = integer_sqrt_exact(&t) {
        s *= r;
        t = BigInt::one();
    }
    (s, t)
}

/// gcd of numerators over lcm of denominators of all leaves; positive.
pub(crate) fn content(node: &Node) -> BigRational {
    let mut g = BigInt::zero();
    let mut l = BigInt::one();
    node.for_each_monomial(0, &mut |_, c| {
        g = g.gcd(c.numer());
        l = l.lcm(c.denom());
    });
    if g.is_zero() {
        BigRational::one()
    } else {
        BigRational::new(g, l)
    }
}
