//! Uniform spatial grids and complex wave functions sampled on them.

use std::io::{self, Read, Write};

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Smallest grid accepted for propagation.
pub const MIN_GRID_POINTS: usize = 256;

/// Cell-centered uniform grid: `x_i = x_min + (i + 1/2)·dx`, `dx = (x_max − x_min)/n`.
///
/// A grid with `x_min = −x_max` is mirror symmetric: `x_i = −x_{n−1−i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(invalid("x_max", format!("must exceed x_min ({x_min} .. {x_max})")));
        }
        if n_points < MIN_GRID_POINTS || !n_points.is_power_of_two() {
            return Err(invalid(
                "n_points",
                format!("must be a power of two >= {MIN_GRID_POINTS}, got {n_points}"),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid over `[-half_width, half_width]`.
    pub fn symmetric(half_width: T, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_count(self.n_points)
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= T::lit(1e-12) * (self.x_max - self.x_min)
    }

    pub fn point(&self, i: usize) -> T {
        self.x_min + (T::from_count(i) + T::lit(0.5)) * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Same interval, twice the points.
    pub fn refined(&self) -> Self {
        Self {
            n_points: self.n_points * 2,
            ..*self
        }
    }

    /// Angular wavenumbers in discrete Fourier transform order.
    pub fn wavenumbers(&self) -> Vec<T> {
        let n = self.n_points;
        let scale = T::lit(2.0) * T::PI() / (T::from_count(n) * self.dx());
        (0..n)
            .map(|j| {
                if j < n / 2 {
                    T::from_count(j) * scale
                } else {
                    -(T::from_count(n - j) * scale)
                }
            })
            .collect()
    }
}

/// Complex amplitudes on a [`GridSpec`] with an attached time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction<T> {
    pub grid: GridSpec<T>,
    pub amps: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Scalar> GridWavefunction<T> {
    /// Builds and discretely normalizes (`Σ|ψᵢ|²dx = 1`).
    pub fn new(grid: GridSpec<T>, amps: Vec<Complex<T>>, time: T) -> Result<Self> {
        if amps.len() != grid.n_points() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a grid of {} points",
                amps.len(),
                grid.n_points()
            )));
        }
        let mut psi = Self { grid, amps, time };
        let norm = psi.norm();
        if !(norm.is_finite() && norm > T::zero()) {
            return Err(Error::InvalidInput("wave function has zero or non-finite norm".into()));
        }
        let scale = norm.sqrt().recip();
        psi.amps.iter_mut().for_each(|a| *a = *a * scale);
        Ok(psi)
    }

    /// `Σ|ψᵢ|²·dx`.
    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, v| s + v) * self.grid.dx()
    }

    pub fn density(&self) -> impl Iterator<Item = T> + '_ {
        self.amps.iter().map(|a| a.norm_sqr())
    }

    /// `|⟨self|other⟩|` with the grid measure.
    pub fn overlap(&self, other: &Self) -> Complex<T> {
        let dx = self.grid.dx();
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b)
            * dx
    }

    /// Largest `|ψ(x) − s·ψ(−x)|` for parity `s = ±1`; requires a symmetric grid.
    pub fn parity_defect(&self, sign: T) -> T {
        let n = self.amps.len();
        (0..n / 2)
            .map(|i| (self.amps[i] - self.amps[n - 1 - i] * sign).norm())
            .fold(T::zero(), T::max)
    }

    /// Writes `n_points` (u64), `x_min`, `x_max`, then interleaved real/imaginary
    /// parts, all little-endian 64-bit.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.grid.n_points() as u64).to_le_bytes())?;
        w.write_all(&self.grid.x_min().to_f64_lossy().to_le_bytes())?;
        w.write_all(&self.grid.x_max().to_f64_lossy().to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&a.im.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`write_snapshot`](Self::write_snapshot); the amplitudes are
    /// taken as stored (no renormalization) and the time is reset to zero.
    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)
                .map_err(|e| Error::InvalidInput(format!("truncated snapshot: {e}")))?;
            Ok(word)
        };
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let x_min = f64::from_le_bytes(next(&mut r)?);
        let x_max = f64::from_le_bytes(next(&mut r)?);
        let grid = GridSpec::new(T::lit(x_min), T::lit(x_max), n)?;
        let mut amps = Vec::with_capacity(n);
        for _ in 0..n {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            amps.push(Complex::new(T::lit(re), T::lit(im)));
        }
        Ok(Self {
            grid,
            amps,
            time: T::zero(),
        })
    }
}
