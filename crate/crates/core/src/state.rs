//! Program-point states: a constrained affine set or unreachable.

use std::fmt;

use crate::affine::ConstrainedAffineSet;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum AbstractState<S> {
    Bottom,
    Set(ConstrainedAffineSet<S>),
}

impl<S: Scalar> AbstractState<S> {
    /// Wraps `set`, collapsing an empty noise box to `Bottom`.
    pub fn from_set(set: ConstrainedAffineSet<S>) -> Self {
        if set.phi().is_empty() {
            AbstractState::Bottom
        } else {
            AbstractState::Set(set)
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, AbstractState::Bottom)
    }

    pub fn as_set(&self) -> Option<&ConstrainedAffineSet<S>> {
        match self {
            AbstractState::Bottom => None,
            AbstractState::Set(s) => Some(s),
        }
    }

    pub fn into_set(self) -> Option<ConstrainedAffineSet<S>> {
        match self {
            AbstractState::Bottom => None,
            AbstractState::Set(s) => Some(s),
        }
    }

    /// Unwraps a reachable state; panics on `Bottom`.
    pub fn expect_set(self, msg: &str) -> ConstrainedAffineSet<S> {
        self.into_set().expect(msg)
    }
}

impl<S: Scalar> From<ConstrainedAffineSet<S>> for AbstractState<S> {
    fn from(set: ConstrainedAffineSet<S>) -> Self {
        Self::from_set(set)
    }
}

impl<S: Scalar> fmt::Display for AbstractState<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractState::Bottom => writeln!(f, "⊥"),
            AbstractState::Set(s) => write!(f, "{s}"),
        }
    }
}
