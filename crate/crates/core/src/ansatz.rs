//! Two-Gaussian wave packet
//!
//! ```text
//! ψ(x) = N₁ exp(-(x - a₀ - ε)²/2b₀²) + N₂ exp(-(x + a₀ + ε)²/2b₀²)
//! ```
//!
//! with real amplitudes and a frozen width. The offset `a₀` and width `b₀` are
//! fixed once per parameter set by [`solve_ansatz_params`]; the dynamical
//! degrees of freedom are `(N₁, N₂, ε)`.
//!
//! Population imbalance is exposed as `pop_diff = (N₁² − N₂²)·b₀√π`, which is
//! `±1` for a normalized packet sitting entirely in one well.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, GridWavefunction};
use crate::potential::SystemParams;
use crate::scalar::Scalar;

const MAX_CENTER_ITERATIONS: usize = 200;
const MAX_GOLDEN_ITERATIONS: usize = 400;

/// Width-to-offset ratio above which the narrow-packet expansion is considered broken.
pub const WIDE_PACKET_RATIO: f64 = 0.5;

/// Frozen shape `(a₀, b₀)` of the two Gaussians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzShape<T> {
    pub a0: T,
    pub b0: T,
    pub params: SystemParams<T>,
}

impl<T: Scalar> AnsatzShape<T> {
    pub fn new(params: SystemParams<T>, a0: T, b0: T) -> Result<Self> {
        if !(a0.is_finite() && a0 > T::zero()) {
            return Err(invalid("a0", format!("must be positive, got {a0}")));
        }
        if !(b0.is_finite() && b0 > T::zero()) {
            return Err(invalid("b0", format!("must be positive, got {b0}")));
        }
        Ok(Self { a0, b0, params })
    }

    /// False when `b₀/a₀` exceeds [`WIDE_PACKET_RATIO`].
    pub fn is_narrow(&self) -> bool {
        self.b0 / self.a0 <= T::lit(WIDE_PACKET_RATIO)
    }

    /// Overlap factor `exp(-a₀²/b₀²)` of the unshifted Gaussians.
    pub fn overlap(&self) -> T {
        (-(self.a0 * self.a0) / (self.b0 * self.b0)).exp()
    }

    /// Residual of `a₀² + (3/2)b₀² = 1/λ + ℏ²/(4mb₀⁶λ)·exp(-a₀²/b₀²)`.
    pub fn center_residual(&self) -> T {
        let a2 = self.a0 * self.a0;
        a2 - center_rhs(&self.params, a2, self.b0)
    }

    /// Amplitude scale of the short-time drive, `(3/2)λa₀b₀²`.
    pub fn drive_scale(&self) -> T {
        T::lit(1.5) * self.params.lambda() * self.a0 * self.b0 * self.b0
    }
}

fn center_rhs<T: Scalar>(p: &SystemParams<T>, a2: T, b0: T) -> T {
    let lambda = p.lambda();
    let b2 = b0 * b0;
    let b6 = b2 * b2 * b2;
    let tunnel = p.hbar() * p.hbar() / (T::lit(4.0) * p.mass() * b6 * lambda) * (-a2 / b2).exp();
    lambda.recip() - T::lit(1.5) * b2 + tunnel
}

/// Solves the center condition for `a₀` at fixed width `b0` by fixed-point
/// iteration from `a₀² = 1/λ − (3/2)b₀²`.
pub fn center_for_width<T: Scalar>(p: &SystemParams<T>, b0: T) -> Result<T> {
    let mut a2 = p.lambda().recip() - T::lit(1.5) * b0 * b0;
    let tol = T::lit(4.0) * T::epsilon();
    for _ in 0..MAX_CENTER_ITERATIONS {
        if !(a2.is_finite() && a2 > T::zero()) {
            break;
        }
        let next = center_rhs(p, a2, b0);
        if (next - a2).abs() <= tol * next.abs() {
            if next > T::lit(1.5) * b0 * b0 {
                return Ok(next.sqrt());
            }
            break;
        }
        a2 = next;
    }
    Err(Error::NoSolution(format!(
        "center iteration failed for b0 = {b0} (lambda = {}, hbar = {})",
        p.lambda(),
        p.hbar()
    )))
}

/// Gaussian-integral matrix elements for a pair of width-`b` Gaussians at `±c`:
/// returns `(S11, S12, H11, H12)` with unnormalized Gaussians.
fn pair_elements<T: Scalar>(p: &SystemParams<T>, c: T, b: T) -> (T, T, T, T) {
    let sqrt_pi = T::PI().sqrt();
    let lambda = p.lambda();
    let h2m = p.hbar() * p.hbar() / (T::lit(2.0) * p.mass());
    let (c2, b2) = (c * c, b * b);
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);

    let s11 = b * sqrt_pi;
    let s12 = s11 * (-c2 / b2).exp();

    let t11 = h2m * s11 * half / b2;
    let t12 = h2m * s12 * (half / b2 - c2 / (b2 * b2));

    let x2_self = c2 + half * b2;
    let x4_self = c2 * c2 + T::lit(3.0) * c2 * b2 + T::lit(0.75) * b2 * b2;
    let v11 = s11 * (-half * x2_self + quarter * lambda * x4_self);
    let v12 = s12 * (-half * half * b2 + quarter * lambda * T::lit(0.75) * b2 * b2);

    (s11, s12, t11 + v11, t12 + v12)
}

/// `⟨H⟩` of the symmetric combination at offset `a` and width `b`.
pub fn symmetric_energy<T: Scalar>(p: &SystemParams<T>, a: T, b: T) -> T {
    let (s11, s12, h11, h12) = pair_elements(p, a, b);
    (h11 + h12) / (s11 + s12)
}

/// Determines `(a₀, b₀)`: `b₀` minimizes the symmetric-state energy by
/// golden-section search, with `a₀(b₀)` from the center condition.
pub fn solve_ansatz_params<T: Scalar>(p: &SystemParams<T>) -> Result<AnsatzShape<T>> {
    let harmonic = (p.hbar() / (T::lit(2.0) * p.mass()).sqrt()).sqrt();
    let energy = |b: T| -> Result<T> {
        let a = center_for_width(p, b)?;
        Ok(symmetric_energy(p, a, b))
    };

    let mut lo = harmonic * T::lit(0.5);
    let mut hi = harmonic * T::lit(1.5);
    // Keep the upper end inside the region where a center exists.
    for _ in 0..60 {
        if energy(hi).is_ok() {
            break;
        }
        hi = lo + (hi - lo) * T::lit(0.5);
    }
    energy(hi)?;
    energy(lo)?;

    let golden = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let tol = T::lit(1e-10).max(T::epsilon().sqrt() * harmonic);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let mut f1 = energy(x1)?;
    let mut f2 = energy(x2)?;
    for _ in 0..MAX_GOLDEN_ITERATIONS {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = energy(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = energy(x2)?;
        }
    }
    let b0 = (lo + hi) * T::lit(0.5);
    let a0 = center_for_width(p, b0)?;
    AnsatzShape::new(*p, a0, b0)
}

/// How the moments treat the overlap between the two Gaussians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Expansion {
    /// Keep the overlap denominator.
    #[default]
    Full,
    /// Replace the normalization by its leading-order value, i.e. use `pop_diff`.
    Leading,
}

/// Dynamical state of the packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGaussianState<T> {
    pub n1: T,
    pub n2: T,
    pub epsilon: T,
    pub shape: AnsatzShape<T>,
}

impl<T: Scalar> TwoGaussianState<T> {
    /// Unnormalized state with the given raw amplitudes.
    pub fn new(shape: AnsatzShape<T>, n1: T, n2: T, epsilon: T) -> Self {
        Self {
            n1,
            n2,
            epsilon,
            shape,
        }
    }

    /// Normalized packet localized in the right well, displaced by `epsilon`.
    pub fn right_well(shape: AnsatzShape<T>, epsilon: T) -> Self {
        normalize(&Self::new(shape, T::one(), T::zero(), epsilon)).expect("nonzero amplitude")
    }

    /// Normalized `N₁ = N₂` (`sign = 1`) or `N₁ = -N₂` (`sign = -1`) state.
    pub fn parity_state(shape: AnsatzShape<T>, sign: T) -> Self {
        normalize(&Self::new(shape, T::one(), sign, T::zero())).expect("nonzero amplitude")
    }

    /// Center `a₀ + ε` of the right-hand Gaussian.
    pub fn center(&self) -> T {
        self.shape.a0 + self.epsilon
    }

    /// `exp(-(a₀+ε)²/b₀²)`, the normalized overlap of the two displaced Gaussians.
    pub fn overlap(&self) -> T {
        let c = self.center();
        (-(c * c) / (self.shape.b0 * self.shape.b0)).exp()
    }

    fn weight(&self) -> T {
        self.n1 * self.n1 + self.n2 * self.n2 + T::lit(2.0) * self.n1 * self.n2 * self.overlap()
    }

    /// `(N₁² + N₂² + 2N₁N₂·overlap)·b₀√π − 1`.
    pub fn norm_residual(&self) -> T {
        self.weight() * self.shape.b0 * T::PI().sqrt() - T::one()
    }

    /// `(N₁² − N₂²)·b₀√π`.
    pub fn pop_diff(&self) -> T {
        (self.n1 * self.n1 - self.n2 * self.n2) * self.shape.b0 * T::PI().sqrt()
    }

    fn imbalance(&self, mode: Expansion) -> T {
        match mode {
            Expansion::Full => (self.n1 * self.n1 - self.n2 * self.n2) / self.weight(),
            Expansion::Leading => self.pop_diff(),
        }
    }

    /// Evaluates the packet at `x`.
    pub fn amplitude_at(&self, x: T) -> T {
        let c = self.center();
        let two_b2 = T::lit(2.0) * self.shape.b0 * self.shape.b0;
        self.n1 * (-(x - c) * (x - c) / two_b2).exp() + self.n2 * (-(x + c) * (x + c) / two_b2).exp()
    }

    /// Plain-text record `n1,n2,epsilon,a0,b0,lambda,hbar,mass`.
    pub fn to_record(&self) -> String {
        let p = &self.shape.params;
        [
            self.n1,
            self.n2,
            self.epsilon,
            self.shape.a0,
            self.shape.b0,
            p.lambda(),
            p.hbar(),
            p.mass(),
        ]
        .iter()
        .map(|v| format!("{:.16e}", v.to_f64_lossy()))
        .collect::<Vec<_>>()
        .join(",")
    }
}

impl<T: Scalar> fmt::Display for TwoGaussianState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_record())
    }
}

impl<T: Scalar> FromStr for TwoGaussianState<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields = s
            .trim()
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::InvalidInput(format!("state record field `{f}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if fields.len() != 8 {
            return Err(Error::InvalidInput(format!(
                "state record needs 8 fields, got {}",
                fields.len()
            )));
        }
        let params = SystemParams::new(fields[5], fields[6], fields[7])?;
        let shape = AnsatzShape::new(params, fields[3], fields[4])?;
        Ok(Self::new(shape, fields[0], fields[1], fields[2]))
    }
}

/// Rescales both amplitudes so that the norm residual vanishes.
pub fn normalize<T: Scalar>(state: &TwoGaussianState<T>) -> Result<TwoGaussianState<T>> {
    if state.n1 == T::zero() && state.n2 == T::zero() {
        return Err(Error::DegenerateState);
    }
    let scale = (state.weight() * state.shape.b0 * T::PI().sqrt()).sqrt().recip();
    Ok(TwoGaussianState {
        n1: state.n1 * scale,
        n2: state.n2 * scale,
        ..*state
    })
}

/// `⟨x⟩ = (a₀+ε)(N₁² − N₂²)/(N₁² + N₂² + 2N₁N₂·overlap)`.
pub fn expect_x<T: Scalar>(state: &TwoGaussianState<T>, mode: Expansion) -> T {
    state.center() * state.imbalance(mode)
}

/// `⟨x³⟩ = (a₀+ε)[(a₀+ε)² + (3/2)b₀²]·imbalance`.
pub fn expect_x3<T: Scalar>(state: &TwoGaussianState<T>, mode: Expansion) -> T {
    let c = state.center();
    let b2 = state.shape.b0 * state.shape.b0;
    c * (c * c + T::lit(1.5) * b2) * state.imbalance(mode)
}

/// Quantum-fluctuation drive
/// `Q = λ(a₀+ε)³P(P² − 1) − (3/2)λ(a₀+ε)b₀²P` with `P` the population imbalance.
pub fn quantum_fluctuation_q<T: Scalar>(state: &TwoGaussianState<T>, mode: Expansion) -> T {
    let lambda = state.shape.params.lambda();
    let c = state.center();
    let b2 = state.shape.b0 * state.shape.b0;
    let pd = state.imbalance(mode);
    lambda * c * c * c * pd * (pd * pd - T::one()) - T::lit(1.5) * lambda * c * b2 * pd
}

/// `⟨H⟩` of a (not necessarily normalized) packet, from closed-form Gaussian integrals.
pub fn energy<T: Scalar>(state: &TwoGaussianState<T>) -> T {
    let (s11, s12, h11, h12) = pair_elements(&state.shape.params, state.center(), state.shape.b0);
    let diag = state.n1 * state.n1 + state.n2 * state.n2;
    let cross = T::lit(2.0) * state.n1 * state.n2;
    (diag * h11 + cross * h12) / (diag * s11 + cross * s12)
}

/// Both forms of the ground-doublet splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelingSplitting<T> {
    /// `(a₀²ℏ²/2mb₀⁴)·exp(-a₀²/b₀²)`.
    pub ansatz: T,
    /// `λ^{-1/2}·exp(-√(2m)/λℏ)`.
    pub asymptotic: T,
}

impl<T: Scalar> TunnelingSplitting<T> {
    /// `ln ΔE` of the ansatz form; finite even when the splitting underflows.
    pub fn ln_ansatz(shape: &AnsatzShape<T>) -> T {
        let p = &shape.params;
        let (a2, b2) = (shape.a0 * shape.a0, shape.b0 * shape.b0);
        (a2 * p.hbar() * p.hbar() / (T::lit(2.0) * p.mass() * b2 * b2)).ln() - a2 / b2
    }

    pub fn ln_asymptotic(p: &SystemParams<T>) -> T {
        -T::lit(0.5) * p.lambda().ln() - (T::lit(2.0) * p.mass()).sqrt() / (p.lambda() * p.hbar())
    }
}

pub fn tunneling_splitting<T: Scalar>(shape: &AnsatzShape<T>) -> TunnelingSplitting<T> {
    TunnelingSplitting {
        ansatz: TunnelingSplitting::ln_ansatz(shape).exp(),
        asymptotic: TunnelingSplitting::ln_asymptotic(&shape.params).exp(),
    }
}

/// Mass tolerated outside the grid by [`synthesize_wavefunction`].
pub const GRID_MASS_TOLERANCE: f64 = 1e-8;

/// Samples the packet on `grid` and renormalizes it discretely.
pub fn synthesize_wavefunction<T: Scalar>(
    state: &TwoGaussianState<T>,
    grid: &GridSpec<T>,
) -> Result<GridWavefunction<T>> {
    // Each Gaussian's density is normal with σ = b₀/√2, so the mass beyond a
    // distance d is erfc(d/b₀)/2 ≤ exp(-d²/b₀²)/2.
    let b0 = state.shape.b0;
    let c = state.center();
    let total = state.n1 * state.n1 + state.n2 * state.n2;
    let mut outside = T::zero();
    for (amp, center) in [(state.n1, c), (state.n2, -c)] {
        if amp == T::zero() {
            continue;
        }
        let share = amp * amp / total;
        for d in [center - grid.x_min(), grid.x_max() - center] {
            outside += if d <= T::zero() {
                share
            } else {
                share * T::lit(0.5) * (-(d * d) / (b0 * b0)).exp()
            };
        }
    }
    if outside > T::lit(GRID_MASS_TOLERANCE) {
        return Err(Error::GridTooNarrow {
            mass: outside.to_f64_lossy(),
            x_min: grid.x_min().to_f64_lossy(),
            x_max: grid.x_max().to_f64_lossy(),
        });
    }
    let amps = grid
        .points()
        .map(|x| Complex::new(state.amplitude_at(x), T::zero()))
        .collect();
    GridWavefunction::new(*grid, amps, T::zero())
}
