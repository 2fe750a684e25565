//! Exact grid propagation of the double well and the observables recorded from it.
//!
//! The primary integrator is Strang splitting with a spectral kinetic term
//! (`e^{-iTdt/2ℏ} e^{-iVdt/ℏ} e^{-iTdt/2ℏ}` per step, consecutive half kinetic
//! factors fused). A Crank–Nicolson integrator on the three-point Laplacian is
//! kept as an independent reference.

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, GridWavefunction};
use crate::potential::{potential, SystemParams};
use crate::scalar::Scalar;

/// Edge density that aborts a run.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-6;

const EDGE_CHECK_INTERVAL: usize = 1024;

/// One measurement of the wave function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSample<T> {
    pub t: T,
    pub mean_x: T,
    pub mean_p: T,
    pub mean_x3: T,
    /// `λ(⟨x⟩³ − ⟨x³⟩)`.
    pub q: T,
    pub energy: T,
    /// Right-well minus left-well probability.
    pub pop_diff: T,
}

/// Time series of [`ObservableSample`]s in column layout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries<T> {
    pub times: Vec<T>,
    pub mean_x: Vec<T>,
    pub mean_p: Vec<T>,
    pub mean_x3: Vec<T>,
    pub q_drive: Vec<T>,
    pub energy: Vec<T>,
    pub pop_diff: Vec<T>,
}

pub const OBSERVABLE_CSV_HEADER: &str = "t,mean_x,mean_p,mean_x3,q,energy,pop_diff";

impl<T: Scalar> ObservableSeries<T> {
    pub fn push(&mut self, s: ObservableSample<T>) {
        self.times.push(s.t);
        self.mean_x.push(s.mean_x);
        self.mean_p.push(s.mean_p);
        self.mean_x3.push(s.mean_x3);
        self.q_drive.push(s.q);
        self.energy.push(s.energy);
        self.pop_diff.push(s.pop_diff);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sampling interval (zero for fewer than two samples).
    pub fn interval(&self) -> T {
        if self.times.len() < 2 {
            T::zero()
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{OBSERVABLE_CSV_HEADER}")?;
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.mean_x[i],
                self.mean_p[i],
                self.mean_x3[i],
                self.q_drive[i],
                self.energy[i],
                self.pop_diff[i],
            ];
            writeln!(w, "{}", crate::csv_row(&row))?;
        }
        Ok(())
    }
}

fn fold_sum<T: Scalar>(it: impl Iterator<Item = T>) -> T {
    it.fold(T::zero(), |s, v| s + v)
}

/// Strang split-operator propagator bound to one grid, parameter set and time step.
pub struct SplitOperator<T: Scalar> {
    params: SystemParams<T>,
    grid: GridSpec<T>,
    dt: T,
    points: Vec<T>,
    potential: Vec<T>,
    wavenumbers: Vec<T>,
    half_kinetic: Vec<Complex<T>>,
    full_kinetic: Vec<Complex<T>>,
    potential_phase: Vec<Complex<T>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    spectrum: Vec<Complex<T>>,
}

impl<T: Scalar> SplitOperator<T> {
    pub fn new(params: &SystemParams<T>, grid: &GridSpec<T>, dt: T) -> Result<Self> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(crate::error::invalid("dt", format!("must be positive, got {dt}")));
        }
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());

        let hbar = params.hbar();
        let points: Vec<T> = grid.points().collect();
        let pot: Vec<T> = points.iter().map(|x| potential(*x, params)).collect();
        let wavenumbers = grid.wavenumbers();
        // The 1/n of the unnormalized inverse transform is folded into the kinetic factors.
        let inv_n = T::from_count(n).recip();
        let kinetic_phase = |k: T, tau: T| {
            let phase = -hbar * k * k / (T::lit(2.0) * params.mass()) * tau;
            Complex::from_polar(inv_n, phase)
        };
        let half = dt * T::lit(0.5);
        Ok(Self {
            params: *params,
            grid: *grid,
            dt,
            half_kinetic: wavenumbers.iter().map(|k| kinetic_phase(*k, half)).collect(),
            full_kinetic: wavenumbers.iter().map(|k| kinetic_phase(*k, dt)).collect(),
            potential_phase: pot
                .iter()
                .map(|v| Complex::from_polar(T::one(), -*v * dt / hbar))
                .collect(),
            points,
            potential: pot,
            wavenumbers,
            forward,
            inverse,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            spectrum: vec![Complex::new(T::zero(), T::zero()); n],
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    fn kinetic(&mut self, amps: &mut [Complex<T>], full: bool) {
        self.forward.process_with_scratch(amps, &mut self.scratch);
        let factors = if full { &self.full_kinetic } else { &self.half_kinetic };
        amps.iter_mut().zip(factors).for_each(|(a, f)| *a = *a * f);
        self.inverse.process_with_scratch(amps, &mut self.scratch);
    }

    fn check_edges(&self, psi: &GridWavefunction<T>, time: T) -> Result<()> {
        let first = psi.amps[0].norm_sqr();
        let last = psi.amps[psi.amps.len() - 1].norm_sqr();
        let density = first.max(last);
        if density > T::lit(EDGE_DENSITY_LIMIT) {
            return Err(Error::EdgeLeakage {
                density: density.to_f64_lossy(),
                time: time.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Advances `psi` by `n_steps` Strang steps.
    pub fn evolve(&mut self, psi: &mut GridWavefunction<T>, n_steps: usize) -> Result<()> {
        if psi.grid != self.grid {
            return Err(Error::InvalidInput("wave function lives on a different grid".into()));
        }
        if n_steps == 0 {
            return Ok(());
        }
        let t0 = psi.time;
        let mut amps = std::mem::take(&mut psi.amps);
        self.kinetic(&mut amps, false);
        for step in 0..n_steps {
            amps.iter_mut()
                .zip(&self.potential_phase)
                .for_each(|(a, f)| *a = *a * f);
            let last = step + 1 == n_steps;
            self.kinetic(&mut amps, !last);
            if !last && (step + 1) % EDGE_CHECK_INTERVAL == 0 {
                psi.amps = amps;
                self.check_edges(psi, t0 + T::from_count(step + 1) * self.dt)?;
                amps = std::mem::take(&mut psi.amps);
            }
        }
        psi.amps = amps;
        psi.time = t0 + T::from_count(n_steps) * self.dt;
        self.check_edges(psi, psi.time)
    }

    /// Measures all observables of `psi` using this propagator's transforms.
    pub fn measure(&mut self, psi: &GridWavefunction<T>) -> ObservableSample<T> {
        let dx = self.grid.dx();
        let lambda = self.params.lambda();
        let density: Vec<T> = psi.density().collect();
        let norm = fold_sum(density.iter().copied()) * dx;

        let mut mean_x = T::zero();
        let mut mean_x3 = T::zero();
        let mut pot = T::zero();
        let mut pop = T::zero();
        for ((rho, x), v) in density.iter().zip(&self.points).zip(&self.potential) {
            mean_x += *rho * *x;
            mean_x3 += *rho * *x * *x * *x;
            pot += *rho * *v;
            if *x > T::zero() {
                pop += *rho;
            } else if *x < T::zero() {
                pop -= *rho;
            }
        }
        let scale = dx / norm;
        let (mean_x, mean_x3, pot, pop) = (mean_x * scale, mean_x3 * scale, pot * scale, pop * scale);

        self.spectrum.copy_from_slice(&psi.amps);
        self.forward.process_with_scratch(&mut self.spectrum, &mut self.scratch);
        let hbar = self.params.hbar();
        let mut weight = T::zero();
        let mut p_sum = T::zero();
        let mut k2_sum = T::zero();
        for (c, k) in self.spectrum.iter().zip(&self.wavenumbers) {
            let w = c.norm_sqr();
            weight += w;
            p_sum += w * *k;
            k2_sum += w * *k * *k;
        }
        let mean_p = hbar * p_sum / weight;
        let kinetic = hbar * hbar * k2_sum / (T::lit(2.0) * self.params.mass() * weight);

        ObservableSample {
            t: psi.time,
            mean_x,
            mean_p,
            mean_x3,
            q: lambda * (mean_x * mean_x * mean_x - mean_x3),
            energy: kinetic + pot,
            pop_diff: pop,
        }
    }
}

/// Evolves a copy of `psi` by `n_steps` steps of size `dt`.
pub fn evolve<T: Scalar>(
    psi: &GridWavefunction<T>,
    p: &SystemParams<T>,
    dt: T,
    n_steps: usize,
) -> Result<GridWavefunction<T>> {
    let mut prop = SplitOperator::new(p, &psi.grid, dt)?;
    let mut out = psi.clone();
    prop.evolve(&mut out, n_steps)?;
    Ok(out)
}

/// One-off measurement of `psi`.
pub fn measure<T: Scalar>(psi: &GridWavefunction<T>, p: &SystemParams<T>) -> ObservableSample<T> {
    SplitOperator::new(p, &psi.grid, T::one())
        .expect("unit step is valid")
        .measure(psi)
}

/// Evolves `psi0` for `n_steps` steps, measuring at step 0 and every `sample_every` steps.
pub fn record_q_drive<T: Scalar>(
    psi0: &GridWavefunction<T>,
    p: &SystemParams<T>,
    dt: T,
    n_steps: usize,
    sample_every: usize,
) -> Result<ObservableSeries<T>> {
    if sample_every == 0 {
        return Err(crate::error::invalid("sample_every", "must be at least 1"));
    }
    let mut prop = SplitOperator::new(p, &psi0.grid, dt)?;
    let mut psi = psi0.clone();
    let mut series = ObservableSeries::default();
    series.push(prop.measure(&psi));
    for _ in 0..n_steps / sample_every {
        prop.evolve(&mut psi, sample_every)?;
        series.push(prop.measure(&psi));
    }
    Ok(series)
}

/// Reference integrator: Crank–Nicolson on the three-point Hamiltonian.
pub fn crank_nicolson<T: Scalar>(
    psi: &GridWavefunction<T>,
    p: &SystemParams<T>,
    dt: T,
    n_steps: usize,
) -> Result<GridWavefunction<T>> {
    let grid = psi.grid;
    let n = grid.n_points();
    let dx = grid.dx();
    let c = p.hbar() * p.hbar() / (T::lit(2.0) * p.mass() * dx * dx);
    let i_half = Complex::new(T::zero(), dt / (T::lit(2.0) * p.hbar()));
    let one = Complex::new(T::one(), T::zero());
    let diag: Vec<Complex<T>> = grid
        .points()
        .map(|x| Complex::new(T::lit(2.0) * c + potential(x, p), T::zero()))
        .collect();
    let off = Complex::new(-c, T::zero());

    // Forward-eliminated factors of (1 + iHdt/2ℏ), reused every step.
    let a_off = i_half * off;
    let mut upper = vec![Complex::new(T::zero(), T::zero()); n];
    let mut pivots = vec![Complex::new(T::zero(), T::zero()); n];
    pivots[0] = one + i_half * diag[0];
    for i in 1..n {
        upper[i - 1] = a_off / pivots[i - 1];
        pivots[i] = one + i_half * diag[i] - a_off * upper[i - 1];
    }

    let mut out = psi.clone();
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    for _ in 0..n_steps {
        let v = &out.amps;
        for i in 0..n {
            let mut h = diag[i] * v[i];
            if i > 0 {
                h = h + off * v[i - 1];
            }
            if i + 1 < n {
                h = h + off * v[i + 1];
            }
            rhs[i] = v[i] - i_half * h;
        }
        let y = &mut out.amps;
        y[0] = rhs[0] / pivots[0];
        for i in 1..n {
            y[i] = (rhs[i] - a_off * y[i - 1]) / pivots[i];
        }
        for i in (0..n - 1).rev() {
            let next = y[i + 1];
            y[i] = y[i] - upper[i] * next;
        }
    }
    out.time = psi.time + T::from_count(n_steps) * dt;
    Ok(out)
}
