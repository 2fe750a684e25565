//! Diagnostics for regular versus chaotic centroid motion: largest Lyapunov
//! exponent, stroboscopic sections, power spectra and correlation dimension.

use std::io::{self, Write};

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::potential::SystemParams;
use crate::reduced::{duffing_step, DriveSpec, PhasePoint, Trajectory};
use crate::scalar::Scalar;

/// Renormalizations between convergence-series entries.
const SERIES_STRIDE: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovResult<T> {
    pub exponent: T,
    /// Running estimate `(t, λ(t))`.
    pub convergence_series: Vec<(T, T)>,
    pub renorm_interval: T,
    pub perturbation_size: T,
    /// Spread of the last fifth of the running estimate is below 25% of the final value.
    pub converged: bool,
}

pub const LYAPUNOV_CSV_HEADER: &str = "t,lyapunov";

impl<T: Scalar> LyapunovResult<T> {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{LYAPUNOV_CSV_HEADER}")?;
        for (t, l) in &self.convergence_series {
            writeln!(w, "{}", crate::csv_row(&[*t, *l]))?;
        }
        Ok(())
    }
}

fn convergence_flag<T: Scalar>(series: &[(T, T)], last: T) -> bool {
    if series.len() < 5 {
        return false;
    }
    let tail = &series[series.len() - series.len() / 5..];
    let (lo, hi) = tail
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    hi - lo < T::lit(0.25) * last.abs()
}

/// Benettin two-trajectory estimate of the largest Lyapunov exponent of the
/// driven Duffing flow. The companion starts `delta0` away along the phase-space
/// diagonal and is pulled back to that distance every `renorm_every` steps.
pub fn largest_lyapunov<T: Scalar>(
    initial: &PhasePoint<T>,
    p: &SystemParams<T>,
    drive: &DriveSpec<T>,
    t_end: T,
    dt: T,
    renorm_every: usize,
    delta0: T,
) -> Result<LyapunovResult<T>> {
    if !(delta0 >= T::lit(1e-9) && delta0 <= T::lit(1e-6)) {
        return Err(invalid("delta0", format!("must lie in [1e-9, 1e-6], got {delta0}")));
    }
    if renorm_every == 0 {
        return Err(invalid("renorm_every", "must be at least 1"));
    }
    if !(t_end > T::zero()) {
        return Err(invalid("t_end", "must be positive"));
    }
    let n_blocks = (t_end / (dt * T::from_count(renorm_every)))
        .round()
        .to_usize()
        .filter(|n| *n > 0)
        .ok_or_else(|| invalid("t_end", "shorter than one renormalization interval"))?;
    let bound = T::lit(10.0) / p.lambda().sqrt();
    let offset = delta0 / T::lit(2.0).sqrt();

    let mut a = *initial;
    let mut b = PhasePoint {
        x: a.x + offset,
        v: a.v + offset,
        t: a.t,
    };
    let mut log_sum = T::zero();
    let mut step = 0usize;
    let mut series = Vec::with_capacity(n_blocks / SERIES_STRIDE + 1);
    for block in 1..=n_blocks {
        for _ in 0..renorm_every {
            a = duffing_step(&a, p, drive, dt)?;
            b = duffing_step(&b, p, drive, dt)?;
            step += 1;
            let t = initial.t + T::from_count(step) * dt;
            a.t = t;
            b.t = t;
        }
        if !(a.x.abs() <= bound && b.x.abs() <= bound) {
            return Err(Error::UnstableIntegration {
                t: a.t.to_f64_lossy(),
                x: a.x.to_f64_lossy(),
            });
        }
        let (dx, dv) = (b.x - a.x, b.v - a.v);
        let d = dx.hypot(dv);
        if !(d > T::zero()) {
            return Err(Error::UnstableIntegration {
                t: a.t.to_f64_lossy(),
                x: a.x.to_f64_lossy(),
            });
        }
        log_sum += (d / delta0).ln();
        let scale = delta0 / d;
        b.x = a.x + dx * scale;
        b.v = a.v + dv * scale;
        if block % SERIES_STRIDE == 0 || block == n_blocks {
            let elapsed = a.t - initial.t;
            series.push((a.t, log_sum / elapsed));
        }
    }
    let exponent = log_sum / (a.t - initial.t);
    Ok(LyapunovResult {
        exponent,
        converged: convergence_flag(&series, exponent),
        convergence_series: series,
        renorm_interval: dt * T::from_count(renorm_every),
        perturbation_size: delta0,
    })
}

/// Four-point Lagrange interpolation of uniformly sampled `f` at fractional index `s`.
fn lagrange4<T: Scalar>(f: &[T], s: T) -> T {
    let n = f.len();
    let i = s.floor().to_usize().unwrap_or(0).clamp(1, n.saturating_sub(3).max(1));
    let u = s - T::from_count(i);
    let (f0, f1, f2, f3) = (f[i - 1], f[i], f[i + 1], f[i + 2]);
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    -u * (u - one) * (u - two) / six * f0 + (u + one) * (u - one) * (u - two) / two * f1
        - (u + one) * u * (u - two) / two * f2
        + (u + one) * u * (u - one) / six * f3
}

/// Stroboscopic section at `t₀ + k·period`, `k = 1, 2, …`, interpolated with
/// cubics from the trajectory samples.
pub fn poincare_section<T: Scalar>(traj: &Trajectory<T>, period: T) -> Result<Vec<PhasePoint<T>>> {
    let samples = &traj.samples;
    if samples.len() < 4 {
        return Err(Error::InvalidInput("trajectory too short for a section".into()));
    }
    let h = traj.interval();
    let span = samples[samples.len() - 1].t - samples[0].t;
    if !(period > T::lit(10.0) * h && period <= span) {
        return Err(Error::PeriodMismatch {
            period: period.to_f64_lossy(),
            interval: span.to_f64_lossy(),
        });
    }
    if let Some(expected) = traj.drive.period() {
        if ((period - expected) / expected).abs() > T::lit(1e-9) {
            return Err(Error::PeriodMismatch {
                period: period.to_f64_lossy(),
                interval: expected.to_f64_lossy(),
            });
        }
    }
    let xs: Vec<T> = samples.iter().map(|s| s.x).collect();
    let vs: Vec<T> = samples.iter().map(|s| s.v).collect();
    let t0 = samples[0].t;
    let mut out = Vec::new();
    let mut k = 1usize;
    loop {
        let t = t0 + T::from_count(k) * period;
        if t > samples[samples.len() - 1].t {
            break;
        }
        let s = (t - t0) / h;
        out.push(PhasePoint {
            x: lagrange4(&xs, s),
            v: lagrange4(&vs, s),
            t,
        });
        k += 1;
    }
    Ok(out)
}

/// Grassberger–Procaccia correlation dimension of a point set in the `(x, v)`
/// plane. Radii span `[1e-3, 1]` of the set diameter; the slope of
/// `ln C(r)` against `ln r` is fitted over the decade `[1e-2, 1e-1]`.
pub fn correlation_dimension<T: Scalar>(points: &[PhasePoint<T>]) -> Result<T> {
    if points.len() < 10 {
        return Err(Error::InvalidInput("correlation dimension needs at least 10 points".into()));
    }
    let mut dist = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            dist.push((a.x - b.x).hypot(a.v - b.v));
        }
    }
    dist.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let diameter = dist[dist.len() - 1];
    if !(diameter > T::zero()) {
        return Err(Error::InvalidInput("all points coincide".into()));
    }
    let total = T::from_count(dist.len());
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (T::zero(), T::zero(), T::zero(), T::zero(), 0usize);
    let ladder = 31;
    for j in 0..ladder {
        let exponent = T::lit(-3.0) + T::lit(3.0) * T::from_count(j) / T::from_count(ladder - 1);
        let frac = T::lit(10.0).powf(exponent);
        if frac < T::lit(1e-2 - 1e-12) || frac > T::lit(1e-1 + 1e-12) {
            continue;
        }
        let r = diameter * frac;
        let count = dist.partition_point(|d| *d < r);
        if count == 0 {
            continue;
        }
        let (lx, ly) = (r.ln(), (T::from_count(count) / total).ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        n += 1;
    }
    if n < 3 {
        return Err(Error::InvalidInput("too few occupied radii for a slope".into()));
    }
    let nn = T::from_count(n);
    Ok((nn * sxy - sx * sy) / (nn * sxx - sx * sx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

/// One-sided periodogram over angular frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult<T> {
    pub omega: Vec<T>,
    pub power: Vec<T>,
    pub window: Window,
    /// Bin width `2π/(N·Δt)`.
    pub resolution: T,
    /// `Σ x²w² / Σ w²` of the mean-removed input.
    pub windowed_variance: T,
}

pub const SPECTRUM_CSV_HEADER: &str = "omega,power";

impl<T: Scalar> SpectrumResult<T> {
    pub fn total_power(&self) -> T {
        self.power.iter().fold(T::zero(), |s, p| s + *p) * self.resolution
    }

    /// `Σ S·Δω` over the windowed variance; 1 up to rounding.
    pub fn parseval_ratio(&self) -> T {
        self.total_power() / self.windowed_variance
    }

    /// Fraction of the (non-DC) power at angular frequencies below `omega`.
    pub fn mass_below(&self, omega: T) -> T {
        let total = self.power[1..].iter().fold(T::zero(), |s, p| s + *p);
        let below = self
            .omega
            .iter()
            .zip(&self.power)
            .skip(1)
            .filter(|(w, _)| **w < omega)
            .fold(T::zero(), |s, (_, p)| s + *p);
        below / total
    }

    /// Largest non-DC peak with parabolic refinement in log power.
    pub fn dominant_frequency(&self) -> T {
        self.dominant_in(T::zero(), T::infinity())
    }

    /// Largest peak with `lo < ω < hi`, refined as in [`dominant_frequency`](Self::dominant_frequency).
    pub fn dominant_in(&self, lo: T, hi: T) -> T {
        let mut best = None::<usize>;
        for k in 1..self.power.len() {
            let w = self.omega[k];
            if w > lo && w < hi && best.map_or(true, |b| self.power[k] > self.power[b]) {
                best = Some(k);
            }
        }
        let Some(k) = best else { return T::nan() };
        if k + 1 >= self.power.len() || k < 2 {
            return self.omega[k];
        }
        let tiny = T::min_positive_value();
        let (a, b, c) = (
            (self.power[k - 1] + tiny).ln(),
            (self.power[k] + tiny).ln(),
            (self.power[k + 1] + tiny).ln(),
        );
        let denom = a - T::lit(2.0) * b + c;
        let shift = if denom < T::zero() {
            (T::lit(0.5) * (a - c) / denom).max(-T::lit(0.5)).min(T::lit(0.5))
        } else {
            T::zero()
        };
        self.omega[k] + shift * self.resolution
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SPECTRUM_CSV_HEADER}")?;
        for (o, p) in self.omega.iter().zip(&self.power) {
            writeln!(w, "{}", crate::csv_row(&[*o, *p]))?;
        }
        Ok(())
    }
}

/// Minimum number of samples for a spectrum.
pub const MIN_SPECTRUM_SAMPLES: usize = 256;

/// Periodogram of a uniformly sampled real series after removing its mean.
/// Normalized so that `Σ S(ω)·Δω` equals the windowed variance.
pub fn power_spectrum<T: Scalar>(times: &[T], values: &[T], window: Window) -> Result<SpectrumResult<T>> {
    let n = values.len();
    if times.len() != n {
        return Err(Error::InvalidInput("times and values differ in length".into()));
    }
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples, got {n}"
        )));
    }
    let dt = (times[n - 1] - times[0]) / T::from_count(n - 1);
    if !(dt > T::zero()) {
        return Err(Error::NonuniformSampling { index: 1 });
    }
    let tol = T::lit(1e-6) * dt;
    if let Some(i) = times.windows(2).position(|w| ((w[1] - w[0]) - dt).abs() > tol) {
        return Err(Error::NonuniformSampling { index: i + 1 });
    }
    let mean = values.iter().fold(T::zero(), |s, v| s + *v) / T::from_count(n);
    let weights: Vec<T> = match window {
        Window::Rectangular => vec![T::one(); n],
        Window::Hann => (0..n)
            .map(|i| {
                let s = (T::PI() * T::from_count(i) / T::from_count(n - 1)).sin();
                s * s
            })
            .collect(),
    };
    let mut buf: Vec<Complex<T>> = values
        .iter()
        .zip(&weights)
        .map(|(v, w)| Complex::new((*v - mean) * *w, T::zero()))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let sum_w2 = weights.iter().fold(T::zero(), |s, w| s + *w * *w);
    let windowed_variance = values
        .iter()
        .zip(&weights)
        .fold(T::zero(), |s, (v, w)| s + (*v - mean) * (*v - mean) * *w * *w)
        / sum_w2;
    let two_pi = T::lit(2.0) * T::PI();
    let resolution = two_pi / (T::from_count(n) * dt);
    let norm = dt / (two_pi * sum_w2);
    let half = n / 2;
    let power = (0..=half)
        .map(|k| {
            let factor = if k == 0 || (n % 2 == 0 && k == half) { T::one() } else { T::lit(2.0) };
            factor * buf[k].norm_sqr() * norm
        })
        .collect();
    let omega = (0..=half).map(|k| T::from_count(k) * resolution).collect();
    Ok(SpectrumResult {
        omega,
        power,
        window,
        resolution,
        windowed_variance,
    })
}

/// Angular frequency from the mean spacing of upward crossings of `level`,
/// located by linear interpolation. `None` with fewer than two crossings.
pub fn crossing_frequency<T: Scalar>(times: &[T], values: &[T], level: T) -> Option<T> {
    let mut first = None;
    let mut last = T::zero();
    let mut count = 0usize;
    for i in 1..values.len().min(times.len()) {
        let (a, b) = (values[i - 1] - level, values[i] - level);
        if a < T::zero() && b >= T::zero() {
            let t = times[i - 1] + (times[i] - times[i - 1]) * (-a / (b - a));
            if first.is_none() {
                first = Some(t);
            }
            last = t;
            count += 1;
        }
    }
    let first = first?;
    if count < 2 {
        return None;
    }
    Some(T::lit(2.0) * T::PI() * T::from_count(count - 1) / (last - first))
}
