use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, LazyLock};

use super::node::Node;
use super::{FieldElem, FieldError, Sign};

static NEXT_LEVEL_ID: AtomicU64 = AtomicU64::new(1);

static RATIONALS: LazyLock<FieldTower> = LazyLock::new(|| FieldTower {
    inner: Arc::new(TowerInner {
        radicands: Vec::new(),
        ids: Vec::new(),
    }),
});

#[derive(Debug)]
struct TowerInner {
    radicands: Vec<Node>,
    ids: Vec<u64>,
}

/// A chain of real quadratic extensions of `Q`. Cheap to clone.
#[derive(Clone)]
pub struct FieldTower {
    inner: Arc<TowerInner>,
}

impl FieldTower {
    /// The base field `Q`.
    pub fn rationals() -> FieldTower {
        RATIONALS.clone()
    }

    pub fn depth(&self) -> usize {
        self.inner.ids.len()
    }

    /// Adjoin `√d`. Fails if `d` is not positive, or if it already has a square
    /// root in this tower (returned inside the error so callers can use it).
    pub fn adjoin(&self, d: &FieldElem) -> Result<FieldTower, FieldError> {
        let d = d.lift(self)?;
        if d.sign() != Sign::Positive {
            return Err(FieldError::NonPositiveRadicand);
        }
        if let Some(root) = d.sqrt_in_field()? {
            return Err(FieldError::AlreadySquare(Box::new(root)));
        }
        let mut radicands = self.inner.radicands.clone();
        let mut ids = self.inner.ids.clone();
        radicands.push(d.node().clone());
        ids.push(NEXT_LEVEL_ID.fetch_add(1, Ordering::Relaxed));
        Ok(FieldTower {
            inner: Arc::new(TowerInner { radicands, ids }),
        })
    }

    /// The radicand `d_level` (1-based) as an element of this tower.
    pub fn radicand(&self, level: usize) -> FieldElem {
        assert!(level >= 1 && level <= self.depth(), "level out of range");
        FieldElem::from_parts(self.clone(), self.inner.radicands[level - 1].clone())
    }

    /// The generator `√d_level` (1-based).
    pub fn generator(&self, level: usize) -> FieldElem {
        assert!(level >= 1 && level <= self.depth(), "level out of range");
        FieldElem::from_parts(self.clone(), Node::generator(level))
    }

    /// Truncate to the first `depth` levels.
    pub fn truncate(&self, depth: usize) -> FieldTower {
        if depth >= self.depth() {
            return self.clone();
        }
        if depth == 0 {
            return FieldTower::rationals();
        }
        FieldTower {
            inner: Arc::new(TowerInner {
                radicands: self.inner.radicands[..depth].to_vec(),
                ids: self.inner.ids[..depth].to_vec(),
            }),
        }
    }

    /// Number of leading levels shared with `other`.
    pub fn common_prefix(&self, other: &FieldTower) -> usize {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return self.depth();
        }
        self.inner
            .ids
            .iter()
            .zip(&other.inner.ids)
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn is_prefix_of(&self, other: &FieldTower) -> bool {
        self.common_prefix(other) == self.depth()
    }

    pub fn same_as(&self, other: &FieldTower) -> bool {
        self.depth() == other.depth() && self.is_prefix_of(other)
    }

    pub(crate) fn radicands(&self) -> &[Node] {
        &self.inner.radicands
    }
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower[")?;
        for level in 1..=self.depth() {
            if level > 1 {
                write!(f, ", ")?;
            }
            write!(f, "√({})", self.radicand(level))?;
        }
        write!(f, "]")
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}
