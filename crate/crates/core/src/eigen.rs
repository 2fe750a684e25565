//! Lowest eigenpairs of the three-point finite-difference Hamiltonian
//! `-(ℏ²/2m)∂² + V` with Dirichlet ends.
//!
//! On a mirror-symmetric grid the problem is split into even and odd halves,
//! each a single-well symmetric tridiagonal matrix. That keeps the eigenvectors
//! parity-definite and lets the ground doublet be resolved even when its
//! splitting is far below the eigenvalue rounding error: the splitting is then
//! taken from the exact discrete Wronskian identity
//!
//! ```text
//! (E₋ − E₊)·Σ_{x>0} ψ₊ψ₋ = (ℏ²/2m dx²)·2ψ₊(dx/2)ψ₋(dx/2)
//! ```

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, GridWavefunction};
use crate::potential::{potential, SystemParams};
use crate::scalar::Scalar;

/// Largest number of eigenpairs served per call.
pub const MAX_EIGENPAIRS: usize = 16;

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Scalar> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n - 1");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { T::zero() }
                + if i + 1 < n { self.off[i].abs() } else { T::zero() };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// `index`-th smallest eigenvalue by bisection to working precision.
    pub fn eigenvalue(&self, index: usize) -> T {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..400 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    }

    /// Solves `(A − σI)y = rhs` without pivoting, eliminating from index 0.
    fn shifted_solve(&self, sigma: T, rhs: &[T]) -> Vec<T> {
        let n = self.len();
        let scale = self.diag.iter().fold(T::zero(), |m, d| m.max(d.abs())).max(T::one());
        let guard = T::epsilon() * scale;
        let fix = |p: T| if p.abs() < guard { if p < T::zero() { -guard } else { guard } } else { p };

        let mut upper = vec![T::zero(); n.saturating_sub(1)];
        let mut y = vec![T::zero(); n];
        let mut pivot = fix(self.diag[0] - sigma);
        y[0] = rhs[0] / pivot;
        for i in 1..n {
            upper[i - 1] = self.off[i - 1] / pivot;
            pivot = fix(self.diag[i] - sigma - self.off[i - 1] * upper[i - 1]);
            y[i] = (rhs[i] - self.off[i - 1] * y[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            let next = y[i + 1];
            y[i] -= upper[i] * next;
        }
        y
    }

    /// Eigenvector for a (bisection-accurate) eigenvalue by inverse iteration,
    /// orthogonalized against `against`. Scaled so its largest entry is `+1`.
    pub fn eigenvector(&self, value: T, against: &[Vec<T>]) -> Vec<T> {
        let n = self.len();
        let mut v: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(0.25) * T::from_count(i).sin())
            .collect();
        for _ in 0..4 {
            for u in against {
                let proj = dot(u, &v) / dot(u, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= proj * *b);
            }
            v = self.shifted_solve(value, &v);
            let m = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            v.iter_mut().for_each(|x| *x /= m);
        }
        let peak = v
            .iter()
            .copied()
            .fold(T::zero(), |m, x| if x.abs() > m.abs() { x } else { m });
        if peak < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    }

    /// `‖(A − λ)v‖₂`.
    pub fn residual(&self, value: T, v: &[T]) -> T {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut r = (self.diag[i] - value) * v[i];
                if i > 0 {
                    r += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    r += self.off[i] * v[i + 1];
                }
                r * r
            })
            .fold(T::zero(), |s, x| s + x)
            .sqrt()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub energy: T,
    pub state: GridWavefunction<T>,
    /// Set on mirror-symmetric grids.
    pub parity: Option<Parity>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Tolerance on `|E₀(2n) − E₀(n)| / max(1, |E₀|)`; `None` skips the refinement check.
    pub resolution_tol: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            resolution_tol: Some(1e-4),
        }
    }
}

/// Three-point Hamiltonian for an arbitrary potential.
#[derive(Debug, Clone)]
pub struct FiniteDifferenceHamiltonian<T> {
    pub grid: GridSpec<T>,
    pub hbar: T,
    pub mass: T,
    potential: Vec<T>,
}

impl<T: Scalar> FiniteDifferenceHamiltonian<T> {
    pub fn new(grid: GridSpec<T>, hbar: T, mass: T, v: impl Fn(T) -> T) -> Self {
        Self {
            potential: grid.points().map(v).collect(),
            grid,
            hbar,
            mass,
        }
    }

    pub fn double_well(p: &SystemParams<T>, grid: GridSpec<T>) -> Self {
        Self::new(grid, p.hbar(), p.mass(), |x| potential(x, p))
    }

    /// Kinetic coupling `ℏ²/(2m dx²)`.
    pub fn coupling(&self) -> T {
        let dx = self.grid.dx();
        self.hbar * self.hbar / (T::lit(2.0) * self.mass * dx * dx)
    }

    pub fn matrix(&self) -> SymTridiagonal<T> {
        let c = self.coupling();
        let n = self.potential.len();
        SymTridiagonal::new(
            self.potential.iter().map(|v| T::lit(2.0) * c + *v).collect(),
            vec![-c; n - 1],
        )
    }

    /// Positive half of a symmetric grid with the mirror condition folded into row 0.
    fn half_matrix(&self, parity: Parity) -> SymTridiagonal<T> {
        let c = self.coupling();
        let n = self.potential.len();
        let mut diag: Vec<T> = self.potential[n / 2..]
            .iter()
            .map(|v| T::lit(2.0) * c + *v)
            .collect();
        diag[0] += match parity {
            Parity::Even => -c,
            Parity::Odd => c,
        };
        SymTridiagonal::new(diag, vec![-c; n / 2 - 1])
    }

    /// `Hψ` on the grid.
    pub fn apply(&self, psi: &[Complex<T>]) -> Vec<Complex<T>> {
        let c = self.coupling();
        let n = psi.len();
        (0..n)
            .map(|i| {
                let mut r = psi[i] * (T::lit(2.0) * c + self.potential[i]);
                if i > 0 {
                    r = r - psi[i - 1] * c;
                }
                if i + 1 < n {
                    r = r - psi[i + 1] * c;
                }
                r
            })
            .collect()
    }

    fn full_vector(&self, half: &[T], parity: Parity) -> Vec<Complex<T>> {
        let n = self.potential.len();
        let sign = match parity {
            Parity::Even => T::one(),
            Parity::Odd => -T::one(),
        };
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (j, u) in half.iter().enumerate() {
            out[n / 2 + j] = Complex::new(*u, T::zero());
            out[n / 2 - 1 - j] = Complex::new(sign * *u, T::zero());
        }
        out
    }

    /// The `k` lowest eigenpairs, ascending.
    pub fn lowest(&self, k: usize) -> Result<Vec<EigenPair<T>>> {
        if k == 0 || k > MAX_EIGENPAIRS {
            return Err(invalid("k", format!("must be in 1..={MAX_EIGENPAIRS}, got {k}")));
        }
        let mut pairs = Vec::with_capacity(k);
        if self.grid.is_symmetric() {
            let mut candidates = Vec::new();
            for parity in [Parity::Even, Parity::Odd] {
                let m = self.half_matrix(parity);
                let mut found: Vec<Vec<T>> = Vec::new();
                for idx in 0..k.min(m.len()) {
                    let e = m.eigenvalue(idx);
                    let v = m.eigenvector(e, &found);
                    found.push(v.clone());
                    candidates.push((e, parity, v));
                }
            }
            candidates.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap()
                    .then_with(|| (a.1 == Parity::Odd).cmp(&(b.1 == Parity::Odd)))
            });
            for (e, parity, v) in candidates.into_iter().take(k) {
                let state = GridWavefunction::new(self.grid, self.full_vector(&v, parity), T::zero())?;
                pairs.push(EigenPair {
                    energy: e,
                    state,
                    parity: Some(parity),
                });
            }
        } else {
            let m = self.matrix();
            let mut found: Vec<Vec<T>> = Vec::new();
            for idx in 0..k.min(m.len()) {
                let e = m.eigenvalue(idx);
                let v = m.eigenvector(e, &found);
                found.push(v.clone());
                let amps = v.iter().map(|x| Complex::new(*x, T::zero())).collect();
                pairs.push(EigenPair {
                    energy: e,
                    state: GridWavefunction::new(self.grid, amps, T::zero())?,
                    parity: None,
                });
            }
        }
        Ok(pairs)
    }

    fn ground_energy(&self) -> T {
        if self.grid.is_symmetric() {
            self.half_matrix(Parity::Even).eigenvalue(0)
        } else {
            self.matrix().eigenvalue(0)
        }
    }

    /// Ground doublet from the parity-resolved half problems.
    pub fn ground_doublet(&self) -> Result<DoubletSplitting<T>> {
        if !self.grid.is_symmetric() {
            return Err(Error::InvalidInput("doublet splitting needs a mirror-symmetric grid".into()));
        }
        let even = self.half_matrix(Parity::Even);
        let odd = self.half_matrix(Parity::Odd);
        let e0 = even.eigenvalue(0);
        let e1 = odd.eigenvalue(0);
        let u = even.eigenvector(e0, &[]);
        let w = odd.eigenvector(e1, &[]);
        let overlap = dot(&u, &w);
        let wronskian = T::lit(2.0) * self.coupling() * u[0] * w[0];
        Ok(DoubletSplitting {
            e0,
            e1,
            wronskian: wronskian / overlap,
        })
    }
}

/// Energies of the lowest even/odd pair and their splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubletSplitting<T> {
    pub e0: T,
    pub e1: T,
    /// Splitting from the Wronskian identity; accurate when `e1 − e0` is not.
    pub wronskian: T,
}

impl<T: Scalar> DoubletSplitting<T> {
    pub fn direct(&self) -> T {
        self.e1 - self.e0
    }

    /// Tunneling period `2πℏ/ΔE`.
    pub fn tunneling_period(&self, hbar: T) -> T {
        T::lit(2.0) * T::PI() * hbar / self.wronskian
    }
}

fn check_resolution<T: Scalar>(
    h: &FiniteDifferenceHamiltonian<T>,
    fine: impl FnOnce(GridSpec<T>) -> FiniteDifferenceHamiltonian<T>,
    opts: &EigenOptions,
) -> Result<()> {
    let Some(tol) = opts.resolution_tol else {
        return Ok(());
    };
    let e0 = h.ground_energy();
    let e0_fine = fine(h.grid.refined()).ground_energy();
    let change = ((e0_fine - e0).abs() / e0.abs().max(T::one())).to_f64_lossy();
    if change > tol {
        return Err(Error::Resolution {
            change,
            tolerance: tol,
        });
    }
    Ok(())
}

fn check_spacing<T: Scalar>(p: &SystemParams<T>, grid: &GridSpec<T>) -> Result<()> {
    // Harmonic width of the well ground state.
    let width = (p.hbar() / (T::lit(2.0) * p.mass()).sqrt()).sqrt();
    if grid.dx() >= width / T::lit(8.0) {
        return Err(invalid(
            "n_points",
            format!("dx = {} does not resolve the packet width {}", grid.dx(), width),
        ));
    }
    Ok(())
}

/// The `k` lowest eigenpairs of the double well on `grid`.
pub fn eigenpairs<T: Scalar>(
    p: &SystemParams<T>,
    grid: &GridSpec<T>,
    k: usize,
) -> Result<Vec<EigenPair<T>>> {
    eigenpairs_with_options(p, grid, k, &EigenOptions::default())
}

pub fn eigenpairs_with_options<T: Scalar>(
    p: &SystemParams<T>,
    grid: &GridSpec<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair<T>>> {
    check_spacing(p, grid)?;
    let h = FiniteDifferenceHamiltonian::double_well(p, *grid);
    check_resolution(&h, |g| FiniteDifferenceHamiltonian::double_well(p, g), opts)?;
    h.lowest(k)
}

/// Eigenpairs for an arbitrary potential; used to check the discretization
/// against analytically solvable cases.
pub fn eigenpairs_for_potential<T: Scalar>(
    grid: &GridSpec<T>,
    hbar: T,
    mass: T,
    k: usize,
    v: impl Fn(T) -> T + Copy,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair<T>>> {
    let h = FiniteDifferenceHamiltonian::new(*grid, hbar, mass, v);
    check_resolution(&h, |g| FiniteDifferenceHamiltonian::new(g, hbar, mass, v), opts)?;
    h.lowest(k)
}

/// Ground doublet of the double well; the grid must be mirror symmetric.
pub fn ground_splitting<T: Scalar>(p: &SystemParams<T>, grid: &GridSpec<T>) -> Result<DoubletSplitting<T>> {
    check_spacing(p, grid)?;
    FiniteDifferenceHamiltonian::double_well(p, *grid).ground_doublet()
}

/// Natural logarithm of the exact splitting, for comparison with
/// [`crate::ansatz::TunnelingSplitting::ln_ansatz`].
pub fn ln_splitting<T: Scalar>(d: &DoubletSplitting<T>) -> T {
    d.wronskian.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sturm_bisection_small_matrix() {
        // [[2,-1,0],[-1,2,-1],[0,-1,2]] has eigenvalues 2 - √2, 2, 2 + √2.
        let m = SymTridiagonal::new(vec![2.0, 2.0, 2.0], vec![-1.0, -1.0]);
        let s = 2f64.sqrt();
        for (i, e) in [2.0 - s, 2.0, 2.0 + s].into_iter().enumerate() {
            assert_relative_eq!(m.eigenvalue(i), e, max_relative = 1e-14);
            let v = m.eigenvector(m.eigenvalue(i), &[]);
            assert!(m.residual(m.eigenvalue(i), &v) < 1e-12);
        }
    }

    #[test]
    fn harmonic_spectrum() {
        let grid = GridSpec::symmetric(12.0, 1 << 15).unwrap();
        let opts = EigenOptions { resolution_tol: None };
        let pairs = eigenpairs_for_potential(&grid, 1.0, 1.0, 5, |x: f64| 0.5 * x * x, &opts).unwrap();
        for (n, pair) in pairs.iter().enumerate() {
            assert!((pair.energy - (n as f64 + 0.5)).abs() < 1e-6, "n = {n}: {}", pair.energy);
            let expected = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
            assert_eq!(pair.parity, Some(expected));
        }
    }

    #[test]
    fn asymmetric_grid_uses_full_matrix() {
        let grid = GridSpec::new(-9.0, 10.0, 4096).unwrap();
        let opts = EigenOptions { resolution_tol: None };
        let pairs = eigenpairs_for_potential(&grid, 1.0, 1.0, 3, |x: f64| 0.5 * x * x, &opts).unwrap();
        assert!(pairs.iter().all(|p| p.parity.is_none()));
        assert!((pairs[2].energy - 2.5).abs() < 1e-3);
        assert!(pairs[0].state.overlap(&pairs[1].state).norm() < 1e-10);
    }

    #[test]
    fn double_well_doublet_structure() {
        let p = SystemParams::new(0.2, 0.3, 1.0).unwrap();
        let grid = GridSpec::symmetric(4.0 * p.well_center(), 2048).unwrap();
        let pairs = eigenpairs(&p, &grid, 4).unwrap();
        let split = pairs[1].energy - pairs[0].energy;
        assert!(split > 0.0);
        assert!(split < 1e-3 * (pairs[2].energy - pairs[1].energy));
        for (i, pair) in pairs.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!(pair.state.parity_defect(sign) < 1e-8);
            let h = FiniteDifferenceHamiltonian::double_well(&p, grid);
            let hpsi = h.apply(&pair.state.amps);
            let res: f64 = hpsi
                .iter()
                .zip(&pair.state.amps)
                .map(|(a, b)| (a - b * pair.energy).norm_sqr())
                .sum::<f64>()
                * grid.dx();
            assert!(res.sqrt() < 1e-8, "residual {}", res.sqrt());
        }
        let d = ground_splitting(&p, &grid).unwrap();
        assert_relative_eq!(d.wronskian, split, max_relative = 1e-4);
    }

    #[test]
    fn wronskian_splitting_survives_underflow_of_direct_difference() {
        let p = SystemParams::<f64>::new(0.2, 0.1, 1.0).unwrap();
        let grid = GridSpec::symmetric(3.0 * p.well_center(), 4096).unwrap();
        let d = ground_splitting(&p, &grid).unwrap();
        assert!(d.wronskian > 0.0 && d.wronskian < 1e-15);
        assert!(d.direct().abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_rejected() {
        let p = SystemParams::new(0.2, 0.3, 1.0).unwrap();
        let grid = GridSpec::symmetric(4.0 * p.well_center(), 256).unwrap();
        assert!(eigenpairs(&p, &grid, 2).is_err());
        let grid = GridSpec::symmetric(4.0 * p.well_center(), 2048).unwrap();
        let strict = EigenOptions { resolution_tol: Some(1e-12) };
        assert!(matches!(
            eigenpairs_with_options(&p, &grid, 2, &strict),
            Err(Error::Resolution { .. })
        ));
    }
}
