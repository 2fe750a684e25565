//! Reduced centroid dynamics.
//!
//! * driven Duffing form of the Ehrenfest equation, `m ẍ = x − λx³ + Q(t)`;
//! * intra-well displacement, `ε̈ + 2a₀²λε + 3a₀λε² + λε³ = 0`;
//! * slow population imbalance, `P̈ + Ω²P = 0` with
//!   `Ω² = a₀ℏ²/(4m b₀⁶)·exp(-a₀²/b₀²)`.
//!
//! All integrators are fixed step (classical fourth-order Runge–Kutta).

use std::io::{self, Write};

use crate::ansatz::AnsatzShape;
use crate::error::{invalid, Error, Result};
use crate::potential::{force, potential, SystemParams};
use crate::scalar::Scalar;

/// Largest step accepted by [`duffing_step`].
pub const MAX_STEP: f64 = 0.01;

/// Centroid phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub x: T,
    pub v: T,
    pub t: T,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new(x: T, v: T, t: T) -> Result<Self> {
        if !(x.is_finite() && v.is_finite() && t.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite phase point ({x}, {v}, {t})")));
        }
        Ok(Self { x, v, t })
    }

    pub fn at_rest(x: T) -> Self {
        Self {
            x,
            v: T::zero(),
            t: T::zero(),
        }
    }
}

/// Natural cubic spline through recorded drive samples. Never extrapolates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayDrive<T> {
    times: Vec<T>,
    values: Vec<T>,
    second: Vec<T>,
}

impl<T: Scalar> ReplayDrive<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        let n = times.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidInput(
                "replay drive needs at least two (t, Q) samples of equal length".into(),
            ));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "replay times must be strictly increasing (index {})",
                i + 1
            )));
        }
        // Tridiagonal system for interior second derivatives, natural ends.
        let mut second = vec![T::zero(); n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![T::zero(); m];
            let mut upper = vec![T::zero(); m];
            let mut rhs = vec![T::zero(); m];
            for k in 0..m {
                let i = k + 1;
                let h0 = times[i] - times[i - 1];
                let h1 = times[i + 1] - times[i];
                diag[k] = T::lit(2.0) * (h0 + h1);
                upper[k] = h1;
                rhs[k] = T::lit(6.0) * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for k in 1..m {
                let lower = times[k + 1] - times[k];
                let w = lower / diag[k - 1];
                diag[k] -= w * upper[k - 1];
                let prev = rhs[k - 1];
                rhs[k] -= w * prev;
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for k in (0..m - 1).rev() {
                second[k + 1] = (rhs[k] - upper[k] * second[k + 2]) / diag[k];
            }
        }
        Ok(Self {
            times,
            values,
            second,
        })
    }

    pub fn span(&self) -> (T, T) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, t: T) -> Result<T> {
        let (start, end) = self.span();
        if !(t >= start && t <= end) {
            return Err(Error::DriveOutOfRange {
                t: t.to_f64_lossy(),
                start: start.to_f64_lossy(),
                end: end.to_f64_lossy(),
            });
        }
        let i = self
            .times
            .partition_point(|s| *s <= t)
            .clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let six = T::lit(6.0);
        Ok(a * self.values[i - 1]
            + b * self.values[i]
            + ((a * a * a - a) * self.second[i - 1] + (b * b * b - b) * self.second[i]) * h * h / six)
    }
}

/// Prescribed drive `Q(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveSpec<T> {
    None,
    /// `offset + amplitude·cos(omega·t + phase)`.
    Sinusoid {
        amplitude: T,
        omega: T,
        offset: T,
        phase: T,
    },
    Replay(ReplayDrive<T>),
}

impl<T: Scalar> DriveSpec<T> {
    /// Zero-offset cosine drive.
    pub fn cosine(amplitude: T, omega: T) -> Self {
        Self::Sinusoid {
            amplitude,
            omega,
            offset: T::zero(),
            phase: T::zero(),
        }
    }

    /// Single-well drive `−(3/2)λb₀²(a₀ + ε(t))` along the linear solution
    /// `ε(t) = ε₀ cos ωt`, `ω = √(2a₀²λ/m)`.
    pub fn short_time(shape: &AnsatzShape<T>, epsilon0: T) -> Self {
        let lambda = shape.params.lambda();
        let k = T::lit(1.5) * lambda * shape.b0 * shape.b0;
        Self::Sinusoid {
            amplitude: k * epsilon0,
            omega: crate::potential::small_oscillation_frequency(&shape.params, shape.a0),
            offset: -k * shape.a0,
            phase: T::PI(),
        }
    }

    pub fn value(&self, t: T) -> Result<T> {
        match self {
            Self::None => Ok(T::zero()),
            Self::Sinusoid {
                amplitude,
                omega,
                offset,
                phase,
            } => Ok(*offset + *amplitude * (*omega * t + *phase).cos()),
            Self::Replay(r) => r.value(t),
        }
    }

    /// Period of a sinusoidal drive.
    pub fn period(&self) -> Option<T> {
        match self {
            Self::Sinusoid { omega, .. } if *omega != T::zero() => Some(T::lit(2.0) * T::PI() / omega.abs()),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Sinusoid { .. } => "sinusoid",
            Self::Replay(_) => "replay",
        }
    }
}

/// Uniformly sampled solution of one of the reduced equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<PhasePoint<T>>,
    pub drive: DriveSpec<T>,
    pub params: SystemParams<T>,
    /// Conserved energy at each sample, for autonomous equations.
    pub energy_series: Option<Vec<T>>,
    /// Time at which the intra-well equation left its domain of validity.
    pub regime_exit: Option<T>,
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,x,v";

impl<T: Scalar> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn positions(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn last(&self) -> PhasePoint<T> {
        *self.samples.last().expect("trajectories hold at least one sample")
    }

    pub fn interval(&self) -> T {
        if self.samples.len() < 2 {
            T::zero()
        } else {
            self.samples[1].t - self.samples[0].t
        }
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> Option<T> {
        let e = self.energy_series.as_ref()?;
        let e0 = e[0];
        Some(
            e.iter()
                .map(|v| ((*v - e0) / e0).abs())
                .fold(T::zero(), T::max),
        )
    }

    /// Angular frequency from successive upward crossings of `level`.
    pub fn crossing_frequency(&self, level: T) -> Option<T> {
        crate::chaos::crossing_frequency(&self.times(), &self.positions(), level)
    }

    /// CSV `t,x,v[,energy]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        match &self.energy_series {
            Some(_) => writeln!(w, "{TRAJECTORY_CSV_HEADER},energy")?,
            None => writeln!(w, "{TRAJECTORY_CSV_HEADER}")?,
        }
        for (i, s) in self.samples.iter().enumerate() {
            match &self.energy_series {
                Some(e) => writeln!(w, "{}", crate::csv_row(&[s.t, s.x, s.v, e[i]]))?,
                None => writeln!(w, "{}", crate::csv_row(&[s.t, s.x, s.v]))?,
            }
        }
        Ok(())
    }
}

/// Energy `m v²/2 − x²/2 + λx⁴/4` of the undriven centroid.
pub fn duffing_energy<T: Scalar>(s: &PhasePoint<T>, p: &SystemParams<T>) -> T {
    T::lit(0.5) * p.mass() * s.v * s.v + potential(s.x, p)
}

#[inline]
fn rk4<T: Scalar>(
    s: &PhasePoint<T>,
    dt: T,
    mut accel: impl FnMut(T, T) -> Result<T>,
) -> Result<PhasePoint<T>> {
    let half = dt * T::lit(0.5);
    let th = s.t + half;
    let k1x = s.v;
    let k1v = accel(s.x, s.t)?;
    let k2x = s.v + half * k1v;
    let k2v = accel(s.x + half * k1x, th)?;
    let k3x = s.v + half * k2v;
    let k3v = accel(s.x + half * k2x, th)?;
    let k4x = s.v + dt * k3v;
    let k4v = accel(s.x + dt * k3x, s.t + dt)?;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    Ok(PhasePoint {
        x: s.x + sixth * (k1x + two * k2x + two * k3x + k4x),
        v: s.v + sixth * (k1v + two * k2v + two * k3v + k4v),
        t: s.t + dt,
    })
}

fn check_step<T: Scalar>(dt: T) -> Result<()> {
    if !(dt > T::zero() && dt <= T::lit(MAX_STEP)) {
        return Err(invalid("dt", format!("must lie in (0, {MAX_STEP}], got {dt}")));
    }
    Ok(())
}

/// One RK4 step of `m ẍ = x − λx³ + Q(t)`.
pub fn duffing_step<T: Scalar>(
    state: &PhasePoint<T>,
    p: &SystemParams<T>,
    drive: &DriveSpec<T>,
    dt: T,
) -> Result<PhasePoint<T>> {
    check_step(dt)?;
    let inv_m = p.mass().recip();
    rk4(state, dt, |x, t| Ok((force(x, p) + drive.value(t)?) * inv_m))
}

fn step_count<T: Scalar>(t_end: T, dt: T) -> Result<usize> {
    if !(t_end.is_finite() && t_end >= T::zero()) {
        return Err(invalid("t_end", format!("must be non-negative, got {t_end}")));
    }
    (t_end / dt)
        .round()
        .to_usize()
        .ok_or_else(|| invalid("t_end", "step count out of range"))
}

/// Integrates the driven Duffing equation, keeping every `sample_every`-th step.
///
/// Step `i` is taken from the time `t₀ + i·dt`, so identical inputs give
/// identical trajectories.
pub fn integrate<T: Scalar>(
    initial: &PhasePoint<T>,
    p: &SystemParams<T>,
    drive: &DriveSpec<T>,
    t_end: T,
    dt: T,
    sample_every: usize,
) -> Result<Trajectory<T>> {
    check_step(dt)?;
    if sample_every == 0 {
        return Err(invalid("sample_every", "must be at least 1"));
    }
    let n = step_count(t_end, dt)?;
    let autonomous = matches!(drive, DriveSpec::None);
    let mut samples = Vec::with_capacity(n / sample_every + 1);
    let mut energy = autonomous.then(Vec::new);
    let mut s = *initial;
    let record = |s: &PhasePoint<T>, samples: &mut Vec<PhasePoint<T>>, energy: &mut Option<Vec<T>>| {
        samples.push(*s);
        if let Some(e) = energy.as_mut() {
            e.push(duffing_energy(s, p));
        }
    };
    record(&s, &mut samples, &mut energy);
    for i in 1..=n {
        s = duffing_step(&s, p, drive, dt)?;
        s.t = initial.t + T::from_count(i) * dt;
        if i % sample_every == 0 {
            record(&s, &mut samples, &mut energy);
        }
    }
    Ok(Trajectory {
        samples,
        drive: drive.clone(),
        params: *p,
        energy_series: energy,
        regime_exit: None,
    })
}

/// Integrates the intra-well displacement equation with its full cubic
/// right-hand side, sampling every step. Stops and records `regime_exit` when
/// `|ε|` reaches `a₀`.
pub fn epsilon_dynamics<T: Scalar>(
    initial: &PhasePoint<T>,
    shape: &AnsatzShape<T>,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>> {
    check_step(dt)?;
    let a0 = shape.a0;
    if initial.x.abs() >= a0 {
        return Err(invalid("epsilon", format!("|ε(0)| must be below a0 = {a0}")));
    }
    let p = shape.params;
    let lambda = p.lambda();
    let inv_m = p.mass().recip();
    let (k1, k2) = (T::lit(2.0) * a0 * a0 * lambda, T::lit(3.0) * a0 * lambda);
    let accel = |e: T| -(k1 * e + k2 * e * e + lambda * e * e * e) * inv_m;
    let energy_of = |s: &PhasePoint<T>| {
        T::lit(0.5) * p.mass() * s.v * s.v
            + T::lit(0.5) * k1 * s.x * s.x
            + k2 / T::lit(3.0) * s.x * s.x * s.x
            + T::lit(0.25) * lambda * s.x * s.x * s.x * s.x
    };

    let n = step_count(t_end, dt)?;
    let mut samples = Vec::with_capacity(n + 1);
    let mut energy = Vec::with_capacity(n + 1);
    let mut regime_exit = None;
    let mut s = *initial;
    samples.push(s);
    energy.push(energy_of(&s));
    for i in 1..=n {
        s = rk4(&s, dt, |x, _| Ok(accel(x)))?;
        s.t = initial.t + T::from_count(i) * dt;
        samples.push(s);
        energy.push(energy_of(&s));
        if s.x.abs() >= a0 {
            regime_exit = Some(s.t);
            break;
        }
    }
    Ok(Trajectory {
        samples,
        drive: DriveSpec::None,
        params: p,
        energy_series: Some(energy),
        regime_exit,
    })
}

/// `Ω = √(a₀ℏ²/(4m b₀⁶)·exp(-a₀²/b₀²))`.
pub fn population_frequency<T: Scalar>(shape: &AnsatzShape<T>) -> T {
    let p = &shape.params;
    let b2 = shape.b0 * shape.b0;
    let coeff = shape.a0 * p.hbar() * p.hbar() / (T::lit(4.0) * p.mass() * b2 * b2 * b2);
    (coeff * shape.overlap()).sqrt()
}

/// Evolves the population imbalance under its linear equation. The solution
/// is harmonic, so it is evaluated in closed form at the sample times
/// `k·dt`; `x` holds `P` and `v` holds `dP/dt`.
pub fn population_oscillation<T: Scalar>(
    initial_pop_diff: T,
    initial_rate: T,
    shape: &AnsatzShape<T>,
    t_end: T,
    dt: T,
) -> Result<Trajectory<T>> {
    if !(initial_pop_diff.abs() <= T::one()) {
        return Err(invalid("pop_diff", format!("must lie in [-1, 1], got {initial_pop_diff}")));
    }
    if !(dt > T::zero()) {
        return Err(invalid("dt", "must be positive"));
    }
    let omega = population_frequency(shape);
    let n = step_count(t_end, dt)?;
    let samples = (0..=n)
        .map(|i| {
            let t = T::from_count(i) * dt;
            let (s, c) = (omega * t).sin_cos();
            let x = initial_pop_diff * c + if omega > T::zero() { initial_rate / omega * s } else { initial_rate * t };
            let v = -initial_pop_diff * omega * s + initial_rate * c;
            PhasePoint { x, v, t }
        })
        .collect();
    Ok(Trajectory {
        samples,
        drive: DriveSpec::None,
        params: shape.params,
        energy_series: None,
        regime_exit: None,
    })
}
