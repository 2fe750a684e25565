//! Named experiments. Each one reads an [`ExperimentConfig`] and writes its
//! CSV artifacts through an [`Output`].

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use semiquantal::{
    correlation_dimension, csv_row, eigenpairs, epsilon_dynamics, ground_splitting, integrate, largest_lyapunov,
    normalize, poincare_section, population_frequency, population_oscillation, power_spectrum, record_q_drive,
    solve_ansatz_params, synthesize_wavefunction, AnsatzShape, DriveSpec, GridSpec, GridWavefunction,
    LyapunovResult, ObservableSeries, PhasePoint, ReplayDrive, SpectrumResult, SplitOperator, SystemParams,
    TunnelingSplitting, TwoGaussianState, Window,
};

use crate::config::{DriveKind, Experiment, ExperimentConfig};
use crate::error::{CliError, Context};
use crate::output::Output;

/// Period of the small in-well oscillation, `2π/√2`.
const WELL_PERIOD: f64 = 2.0 * PI / SQRT_2;

pub fn run(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    match cfg.experiment {
        Experiment::Eigen => eigen(cfg, out),
        Experiment::Evolve => evolve(cfg, out),
        Experiment::Ansatz => ansatz(cfg, out),
        Experiment::Duffing => duffing(cfg, out),
        Experiment::Epsilon => epsilon(cfg, out),
        Experiment::Poposc => poposc(cfg, out),
        Experiment::Crossover => crossover(cfg, out),
    }
}

fn shape(cfg: &ExperimentConfig) -> Result<AnsatzShape<f64>, CliError> {
    solve_ansatz_params(&cfg.params).context("solving the ansatz shape")
}

/// Configured grid, or `±3a₀` (at least `±3/√λ`) with 1024 points.
fn grid(cfg: &ExperimentConfig, shape: Option<&AnsatzShape<f64>>) -> Result<GridSpec<f64>, CliError> {
    match &cfg.grid {
        Some(g) => GridSpec::new(g.x_min, g.x_max, g.n_points),
        None => {
            let reach = shape.map_or(0.0, |s| s.a0).max(cfg.params.well_center());
            GridSpec::symmetric(3.0 * reach, 1024)
        }
    }
    .context("building the grid")
}

fn packet(cfg: &ExperimentConfig, shape: AnsatzShape<f64>, grid: &GridSpec<f64>) -> Result<GridWavefunction<f64>, CliError> {
    let state = TwoGaussianState::new(shape, cfg.state.n1, cfg.state.n2, cfg.state.epsilon);
    let state = normalize(&state).context("normalizing the initial packet")?;
    synthesize_wavefunction(&state, grid).context("sampling the initial packet")
}

fn steps(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round() as usize
}

fn read_replay(path: &Path) -> Result<ReplayDrive<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::Numerical {
        context: format!("reading replay series {}", path.display()),
        source: semiquantal::Error::InvalidInput(msg),
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(ti), Some(qi)) = (col("t"), col("q")) else {
        return Err(bad("header needs `t` and `q` columns".into()));
    };
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| {
            fields
                .get(i)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: bad number", n + 2)))
        };
        times.push(get(ti)?);
        values.push(get(qi)?);
    }
    ReplayDrive::new(times, values).context(format!("reading replay series {}", path.display()))
}

fn drive(cfg: &ExperimentConfig) -> Result<DriveSpec<f64>, CliError> {
    let d = &cfg.drive;
    Ok(match d.kind {
        DriveKind::None => DriveSpec::None,
        DriveKind::Sinusoid => DriveSpec::Sinusoid {
            amplitude: d.amplitude,
            omega: d.omega,
            offset: d.offset,
            phase: d.phase,
        },
        DriveKind::Replay => DriveSpec::Replay(read_replay(d.series.as_deref().expect("validated"))?),
    })
}

fn write_series(out: &mut Output, name: &str, s: &ObservableSeries<f64>) -> Result<(), CliError> {
    out.write(name, |w| s.write_csv(w))
}

fn write_spectrum(out: &mut Output, name: &str, s: &SpectrumResult<f64>) -> Result<(), CliError> {
    out.write(name, |w| s.write_csv(w))
}

fn write_summary(out: &mut Output, name: &str, rows: &[(&str, f64)]) -> Result<(), CliError> {
    out.write(name, |w| {
        writeln!(w, "key,value")?;
        for (k, v) in rows {
            writeln!(w, "{k},{}", csv_row(&[*v]))?;
        }
        Ok(())
    })
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

fn eigen(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(cfg, None)?;
    let pairs = eigenpairs(&cfg.params, &grid, cfg.eigen_k).context("eigen: diagonalization")?;
    out.write("eigen.csv", |w| {
        writeln!(w, "n,energy")?;
        for (n, pair) in pairs.iter().enumerate() {
            writeln!(w, "{n},{}", csv_row(&[pair.energy]))?;
        }
        Ok(())
    })?;
    if grid.is_symmetric() {
        let d = ground_splitting(&cfg.params, &grid).context("eigen: ground doublet")?;
        write_summary(
            out,
            "doublet.csv",
            &[
                ("e0", d.e0),
                ("e1", d.e1),
                ("splitting_direct", d.direct()),
                ("splitting", d.wronskian),
                ("tunneling_period", d.tunneling_period(cfg.params.hbar())),
            ],
        )?;
    }
    Ok(())
}

fn evolve(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let shape = shape(cfg)?;
    let grid = grid(cfg, Some(&shape))?;
    let psi = packet(cfg, shape, &grid)?;
    let n = steps(cfg.run.t_end, cfg.run.dt);
    let every = cfg.run.sample_every;
    let mut prop = SplitOperator::new(&cfg.params, &grid, cfg.run.dt).context("evolve: propagator")?;
    let mut last = psi;
    let mut series = ObservableSeries::default();
    series.push(prop.measure(&last));
    for done in (0..n).step_by(every) {
        let k = every.min(n - done);
        prop.evolve(&mut last, k).context("evolve: propagation")?;
        if k == every {
            series.push(prop.measure(&last));
        }
    }
    write_series(out, "observables.csv", &series)?;
    if series.len() >= semiquantal::chaos::MIN_SPECTRUM_SAMPLES {
        let s = power_spectrum(&series.times, &series.q_drive, Window::Hann).context("evolve: Q spectrum")?;
        write_spectrum(out, "spectrum.csv", &s)?;
    }
    out.write("final.bin", |w| last.write_snapshot(w))
}

fn ansatz(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let lambda = cfg.params.lambda();
    let rows = cfg
        .ansatz_hbar_values
        .par_iter()
        .map(|&hbar| {
            let p = SystemParams::new(lambda, hbar, cfg.params.mass()).context(format!("ansatz: hbar = {hbar}"))?;
            let shape = solve_ansatz_params(&p).context(format!("ansatz: shape at hbar = {hbar}"))?;
            let width = (hbar / (2.0 * p.mass()).sqrt()).sqrt();
            let dx_target = width / 16.0;
            let half = 3.0 * p.well_center();
            let n = ((2.0 * half / dx_target).ceil() as usize).next_power_of_two().max(1024);
            let grid = GridSpec::symmetric(half, n).context("ansatz: grid")?;
            let exact = ground_splitting(&p, &grid).context(format!("ansatz: doublet at hbar = {hbar}"))?;
            Ok([
                hbar,
                shape.a0,
                shape.b0,
                TunnelingSplitting::ln_ansatz(&shape),
                TunnelingSplitting::ln_asymptotic(&p),
                exact.wronskian.ln(),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    out.write("ansatz.csv", |w| {
        writeln!(w, "hbar,a0,b0,ln_splitting_ansatz,ln_splitting_asymptotic,ln_splitting_exact")?;
        for r in &rows {
            writeln!(w, "{}", csv_row(r))?;
        }
        Ok(())
    })?;
    if rows.len() >= 2 {
        let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r[0]).collect();
        let slope = |col: usize| {
            let y: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            let n = inv.len() as f64;
            let (mx, my) = (inv.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
            let sxy: f64 = inv.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = inv.iter().map(|a| (a - mx) * (a - mx)).sum();
            sxy / sxx
        };
        write_summary(
            out,
            "ansatz_fit.csv",
            &[
                ("slope_ansatz", slope(3)),
                ("slope_asymptotic", slope(4)),
                ("slope_exact", slope(5)),
            ],
        )?;
    }
    Ok(())
}

fn lyapunov_rows(
    start: &PhasePoint<f64>,
    p: &SystemParams<f64>,
    drives: Vec<(f64, DriveSpec<f64>, f64)>,
    cfg: &ExperimentConfig,
) -> Result<Vec<(f64, LyapunovResult<f64>)>, CliError> {
    let l = &cfg.lyapunov;
    drives
        .into_par_iter()
        .map(|(param, d, t_end)| {
            largest_lyapunov(start, p, &d, t_end, l.dt, l.renorm_every, l.delta0)
                .context(format!("Lyapunov run at {param}"))
                .map(|r| (param, r))
        })
        .collect()
}

fn write_lyapunov(out: &mut Output, name: &str, rows: &[(f64, LyapunovResult<f64>)]) -> Result<(), CliError> {
    out.write(name, |w| {
        writeln!(w, "param_value,exponent,converged_flag")?;
        for (param, r) in rows {
            writeln!(w, "{},{}", csv_row(&[*param, r.exponent]), flag(r.converged))?;
        }
        Ok(())
    })
}

/// Longest Lyapunov horizon a replay drive supports without extrapolating.
fn replay_horizon(span: f64, cfg: &ExperimentConfig) -> f64 {
    let block = cfg.lyapunov.dt * cfg.lyapunov.renorm_every as f64;
    ((span / block).floor() - 1.0).max(0.0) * block
}

fn duffing(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let p = cfg.params;
    let x0 = match cfg.initial_x {
        Some(x) => x,
        None => shape(cfg)?.a0 + cfg.state.epsilon,
    };
    let start = PhasePoint::new(x0, cfg.initial_v, 0.0).context("duffing: initial point")?;
    let base = drive(cfg)?;
    let traj = integrate(&start, &p, &base, cfg.run.t_end, cfg.run.dt, cfg.run.sample_every)
        .context("duffing: trajectory")?;
    out.write("trajectory.csv", |w| traj.write_csv(w))?;

    let horizon = match &base {
        DriveSpec::Replay(r) => {
            let (a, b) = r.span();
            replay_horizon(b - a, cfg)
        }
        _ => cfg.lyapunov.periods * base.period().unwrap_or(WELL_PERIOD),
    };
    let mut drives = vec![];
    match (&base, cfg.duffing_amplitudes.is_empty()) {
        (DriveSpec::Sinusoid { omega, offset, phase, .. }, false) => {
            for &a in &cfg.duffing_amplitudes {
                let d = DriveSpec::Sinusoid { amplitude: a, omega: *omega, offset: *offset, phase: *phase };
                drives.push((a, d, horizon));
            }
        }
        (DriveSpec::Sinusoid { amplitude, .. }, true) => drives.push((*amplitude, base.clone(), horizon)),
        _ => drives.push((0.0, base.clone(), horizon)),
    }
    let rows = lyapunov_rows(&start, &p, drives, cfg)?;
    write_lyapunov(out, "lyapunov.csv", &rows)?;

    if let Some(period) = base.period() {
        let strobe = integrate(&start, &p, &base, horizon, cfg.lyapunov.dt, 2).context("duffing: section run")?;
        let section = poincare_section(&strobe, period).context("duffing: section")?;
        out.write("section.csv", |w| {
            writeln!(w, "x,v")?;
            for s in &section {
                writeln!(w, "{}", csv_row(&[s.x, s.v]))?;
            }
            Ok(())
        })?;
        if let Ok(dim) = correlation_dimension(&section) {
            write_summary(out, "section_summary.csv", &[("points", section.len() as f64), ("correlation_dimension", dim)])?;
        }
    }

    if cfg.duffing_ensemble > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let c = p.well_center();
        let starts: Vec<PhasePoint<f64>> = (0..cfg.duffing_ensemble)
            .map(|_| PhasePoint {
                x: c * rng.gen_range(0.5..1.3),
                v: rng.gen_range(-0.2..0.2),
                t: 0.0,
            })
            .collect();
        let l = &cfg.lyapunov;
        let rows = starts
            .par_iter()
            .map(|s| {
                largest_lyapunov(s, &p, &base, horizon, l.dt, l.renorm_every, l.delta0)
                    .context("duffing: ensemble member")
                    .map(|r| (*s, r))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        out.write("ensemble.csv", |w| {
            writeln!(w, "x0,v0,exponent,converged_flag")?;
            for (s, r) in &rows {
                writeln!(w, "{},{}", csv_row(&[s.x, s.v, r.exponent]), flag(r.converged))?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn epsilon(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let shape = shape(cfg)?;
    let start = PhasePoint::new(cfg.state.epsilon, cfg.initial_v, 0.0).context("epsilon: initial point")?;
    let traj = epsilon_dynamics(&start, &shape, cfg.run.t_end, cfg.run.dt).context("epsilon: integration")?;
    let every = cfg.run.sample_every;
    out.write("epsilon.csv", |w| {
        writeln!(w, "t,x,v,energy")?;
        let energy = traj.energy_series.as_deref().unwrap_or(&[]);
        for (i, s) in traj.samples.iter().enumerate().step_by(every) {
            writeln!(w, "{}", csv_row(&[s.t, s.x, s.v, energy[i]]))?;
        }
        Ok(())
    })?;
    let linear = (2.0 * shape.a0 * shape.a0 * cfg.params.lambda() / cfg.params.mass()).sqrt();
    write_summary(
        out,
        "epsilon_summary.csv",
        &[
            ("a0", shape.a0),
            ("b0", shape.b0),
            ("linear_omega", linear),
            ("measured_omega", traj.crossing_frequency(0.0).unwrap_or(f64::NAN)),
            ("regime_exit_time", traj.regime_exit.unwrap_or(f64::NAN)),
        ],
    )
}

fn poposc(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let shape = shape(cfg)?;
    let traj = population_oscillation(cfg.poposc_pop_diff, cfg.poposc_rate, &shape, cfg.run.t_end, cfg.run.dt)
        .context("poposc: evolution")?;
    let every = cfg.run.sample_every;
    out.write("poposc.csv", |w| {
        writeln!(w, "t,pop_diff,rate")?;
        for s in traj.samples.iter().step_by(every) {
            writeln!(w, "{}", csv_row(&[s.t, s.x, s.v]))?;
        }
        Ok(())
    })?;
    let omega = population_frequency(&shape);
    let grid = grid(cfg, Some(&shape))?;
    let exact = ground_splitting(&cfg.params, &grid).context("poposc: exact doublet")?;
    let hbar = cfg.params.hbar();
    write_summary(
        out,
        "poposc_summary.csv",
        &[
            ("omega", omega),
            ("period", 2.0 * PI / omega),
            ("exact_omega", exact.wronskian / hbar),
            ("exact_period", exact.tunneling_period(hbar)),
            ("log_ratio", (omega.ln() - (exact.wronskian / hbar).ln()) / (exact.wronskian / hbar).ln().abs()),
        ],
    )
}

fn crossover(cfg: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let p = cfg.params;
    let c = &cfg.crossover;
    let shape = shape(cfg)?;
    let grid = grid(cfg, Some(&shape))?;
    let doublet = ground_splitting(&p, &grid).context("crossover: eigen stage")?;
    let slow_omega = doublet.wronskian / p.hbar();
    let tunneling_period = doublet.tunneling_period(p.hbar());
    let psi = packet(cfg, shape, &grid)?;

    let record = |t_end: f64, dt: f64, samples: usize, what: &str| {
        let n = steps(t_end, dt);
        let every = (n / samples).max(1);
        record_q_drive(&psi, &p, dt, n, every).context(format!("crossover: {what} window"))
    };
    let short = record(c.short_periods * WELL_PERIOD, c.short_dt, c.short_samples, "short")?;
    let long = record(c.long_periods * tunneling_period, c.long_dt, c.long_samples, "long")?;
    write_series(out, "q_short.csv", &short)?;
    write_series(out, "q_long.csv", &long)?;

    let spectrum = |s: &ObservableSeries<f64>, what: &str| {
        power_spectrum(&s.times, &s.q_drive, Window::Hann).context(format!("crossover: {what} spectrum"))
    };
    let spec_short = spectrum(&short, "short")?;
    let spec_long = spectrum(&long, "long")?;
    write_spectrum(out, "spectrum_short.csv", &spec_short)?;
    write_spectrum(out, "spectrum_long.csv", &spec_long)?;
    let x_short = power_spectrum(&short.times, &short.mean_x, Window::Hann).context("crossover: <x> spectrum")?;

    let amp = shape.drive_scale();
    let horizon = cfg.lyapunov.periods * WELL_PERIOD;
    let start = PhasePoint::new(shape.a0 + cfg.state.epsilon, 0.0, 0.0).context("crossover: initial point")?;
    let mut drives: Vec<(String, f64, DriveSpec<f64>, f64, PhasePoint<f64>)> = c
        .sweep
        .iter()
        .map(|f| (format!("fast_x{f}"), f * amp, DriveSpec::cosine(f * amp, SQRT_2), horizon, start))
        .collect();
    drives.push(("slow".into(), amp, DriveSpec::cosine(amp, slow_omega), horizon, start));
    for (label, s) in [("replay_short", &short), ("replay_long", &long)] {
        let replay = ReplayDrive::new(s.times.clone(), s.q_drive.clone()).context("crossover: replay drive")?;
        let span = s.times[s.len() - 1] - s.times[0];
        let from = PhasePoint::new(s.mean_x[0], s.mean_p[0] / p.mass(), 0.0).context("crossover: replay start")?;
        drives.push((label.into(), span, DriveSpec::Replay(replay), replay_horizon(span, cfg), from));
    }
    let l = &cfg.lyapunov;
    let results = drives
        .par_iter()
        .map(|(label, _, d, t_end, from)| {
            largest_lyapunov(from, &p, d, *t_end, l.dt, l.renorm_every, l.delta0)
                .context(format!("crossover: Lyapunov ({label})"))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    out.write("lyapunov.csv", |w| {
        writeln!(w, "label,param_value,exponent,converged_flag")?;
        for ((label, param, ..), r) in drives.iter().zip(&results) {
            writeln!(w, "{label},{},{}", csv_row(&[*param, r.exponent]), flag(r.converged))?;
        }
        Ok(())
    })?;

    let exponent_of = |label: &str| {
        drives
            .iter()
            .zip(&results)
            .find(|((l, ..), _)| l == label)
            .map_or(f64::NAN, |(_, r)| r.exponent)
    };
    let sweep_max = drives
        .iter()
        .zip(&results)
        .filter(|((l, ..), _)| l.starts_with("fast_"))
        .map(|(_, r)| r.exponent)
        .fold(f64::NAN, f64::max);
    let cutoff = 0.1 * SQRT_2;
    write_summary(
        out,
        "summary.csv",
        &[
            ("lambda", p.lambda()),
            ("hbar", p.hbar()),
            ("a0", shape.a0),
            ("b0", shape.b0),
            ("drive_scale", amp),
            ("splitting", doublet.wronskian),
            ("tunneling_omega", slow_omega),
            ("tunneling_period", tunneling_period),
            ("short_q_peak_omega", spec_short.dominant_frequency()),
            ("short_x_peak_omega", x_short.dominant_frequency()),
            ("short_mean_abs_q", short.q_drive.iter().map(|q| q.abs()).sum::<f64>() / short.len() as f64),
            ("long_low_peak_omega", spec_long.dominant_in(0.0, cutoff)),
            ("long_mass_below_cutoff", spec_long.mass_below(cutoff)),
            ("lyapunov_fast", exponent_of("fast_x1")),
            ("lyapunov_slow", exponent_of("slow")),
            ("lyapunov_sweep_max", sweep_max),
            ("lyapunov_replay_short", exponent_of("replay_short")),
            ("lyapunov_replay_long", exponent_of("replay_long")),
        ],
    )
}
