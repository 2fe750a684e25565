//! The quartic double well `V(x) = -x²/2 + λx⁴/4` and its classical landmarks.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Physical constants of the double well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    lambda: T,
    hbar: T,
    mass: T,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(lambda: T, hbar: T, mass: T) -> Result<Self> {
        for (field, value) in [("lambda", lambda), ("hbar", hbar), ("mass", mass)] {
            if !(value.is_finite() && value > T::zero()) {
                return Err(invalid(field, format!("must be positive and finite, got {value}")));
            }
        }
        Ok(Self {
            lambda,
            hbar,
            mass,
        })
    }

    /// Unit mass and `hbar = 1`.
    pub fn with_lambda(lambda: T) -> Result<Self> {
        Self::new(lambda, T::one(), T::one())
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// Position of the right-hand minimum, `1/√λ`.
    pub fn well_center(&self) -> T {
        self.lambda.sqrt().recip()
    }
}

/// `-x²/2 + (λ/4)x⁴`. Even in `x` bit for bit.
#[inline]
pub fn potential<T: Scalar>(x: T, p: &SystemParams<T>) -> T {
    let x2 = x * x;
    let quarter = T::lit(0.25);
    -T::lit(0.5) * x2 + quarter * p.lambda * x2 * x2
}

/// `-dV/dx = x - λx³`.
#[inline]
pub fn force<T: Scalar>(x: T, p: &SystemParams<T>) -> T {
    x - p.lambda * x * x * x
}

/// Left minimum, right minimum and the common minimum energy `-1/(4λ)`.
pub fn well_minima<T: Scalar>(p: &SystemParams<T>) -> (T, T, T) {
    let x0 = p.well_center();
    (-x0, x0, -(T::lit(4.0) * p.lambda).recip())
}

/// Linearized intra-well angular frequency `√(2a₀²λ/m)` about a center offset `a0`.
///
/// Tends to `√2` for unit mass when `a0² → 1/λ`.
pub fn small_oscillation_frequency<T: Scalar>(p: &SystemParams<T>, a0: T) -> T {
    (T::lit(2.0) * a0 * a0 * p.lambda / p.mass).sqrt()
}
