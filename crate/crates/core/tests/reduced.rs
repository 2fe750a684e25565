use std::f64::consts::{PI, SQRT_2};

use semiquantal::*;

fn params() -> SystemParams<f64> {
    SystemParams::new(0.2, 0.4, 1.0).unwrap()
}

#[test]
fn undriven_energy_is_conserved_over_a_million_steps() {
    let p = params();
    let s0 = PhasePoint::at_rest(0.6 * p.well_center());
    let traj = integrate(&s0, &p, &DriveSpec::None, 1000.0, 0.001, 500).unwrap();
    assert!(traj.energy_drift().unwrap() < 1e-8);
}

#[test]
fn forward_then_backward_returns() {
    let p = params();
    let s0 = PhasePoint::new(1.4 * p.well_center(), 0.3, 0.0).unwrap();
    let forward = integrate(&s0, &p, &DriveSpec::None, 50.0, 0.001, 1000).unwrap().last();
    let flipped = PhasePoint::new(forward.x, -forward.v, 0.0).unwrap();
    let back = integrate(&flipped, &p, &DriveSpec::None, 50.0, 0.001, 1000).unwrap().last();
    assert!((back.x - s0.x).abs() < 1e-7 && (back.v + s0.v).abs() < 1e-7, "{back:?}");
}

#[test]
fn fourth_order_self_convergence() {
    let p = params();
    let drive = DriveSpec::cosine(0.1, SQRT_2);
    let s0 = PhasePoint::at_rest(1.2 * p.well_center());
    let end = |dt: f64| integrate(&s0, &p, &drive, 8.0, dt, 1).unwrap().last();
    let reference = end(0.01 / 64.0);
    let err = |s: PhasePoint<f64>| (s.x - reference.x).hypot(s.v - reference.v);
    let factor = err(end(0.01)) / err(end(0.005));
    assert!(factor >= 14.0, "factor {factor}");
}

#[test]
fn epsilon_linear_frequency() {
    let shape = solve_ansatz_params(&params()).unwrap();
    let linear = (2.0 * shape.a0 * shape.a0 * shape.params.lambda()).sqrt();
    let traj = epsilon_dynamics(&PhasePoint::at_rest(1e-4 * shape.a0), &shape, 100.0, 0.001).unwrap();
    let w = traj.crossing_frequency(0.0).unwrap();
    assert!((w / linear - 1.0).abs() < 1e-3);
    assert!(traj.regime_exit.is_none());
}

#[test]
fn epsilon_softens_at_large_amplitude() {
    let shape = solve_ansatz_params(&params()).unwrap();
    let linear = (2.0 * shape.a0 * shape.a0 * shape.params.lambda()).sqrt();
    let s0 = PhasePoint::at_rest(0.3 * shape.a0);
    let w = epsilon_dynamics(&s0, &shape, 100.0, 0.001).unwrap().crossing_frequency(0.0).unwrap();
    let w_ref = epsilon_dynamics(&s0, &shape, 100.0, 0.0001).unwrap().crossing_frequency(0.0).unwrap();
    assert!((w - w_ref).abs() < 1e-6 * w_ref);
    assert!(w < linear, "{w} vs {linear}");
}

#[test]
fn linearized_epsilon_matches_short_time_drive_frequency() {
    let shape = solve_ansatz_params(&params()).unwrap();
    let drive = DriveSpec::short_time(&shape, 0.1);
    let Some(period) = drive.period() else { panic!("sinusoid") };
    let linear = (2.0 * shape.a0 * shape.a0 * shape.params.lambda()).sqrt();
    assert!((2.0 * PI / period - linear).abs() < 1e-12);
}

#[test]
fn replayed_quantum_drive_closes_the_centroid_equation() {
    let p = params();
    let shape = solve_ansatz_params(&p).unwrap();
    let grid = GridSpec::symmetric(3.0 * shape.a0, 1024).unwrap();
    let psi = synthesize_wavefunction(&normalize(&TwoGaussianState::right_well(shape, 0.1)).unwrap(), &grid).unwrap();
    let t_end = 5.0 * 2.0 * PI / SQRT_2;
    let dt = 0.002;
    let series = record_q_drive(&psi, &p, dt, (t_end / dt).round() as usize, 5).unwrap();
    let drive = DriveSpec::Replay(ReplayDrive::new(series.times.clone(), series.q_drive.clone()).unwrap());
    let start = PhasePoint::new(series.mean_x[0], series.mean_p[0] / p.mass(), 0.0).unwrap();
    let span = series.times[series.len() - 1];
    let traj = integrate(&start, &p, &drive, span, 0.01, 1).unwrap();
    let scale = series.mean_x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = traj
        .samples
        .iter()
        .map(|s| {
            let k = (s.t / (series.times[1] - series.times[0])).round() as usize;
            (s.x - series.mean_x[k]).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 0.05 * scale, "sup deviation {worst}");
}

#[test]
fn population_frequency_is_same_order_as_rabi() {
    let p = SystemParams::<f64>::new(0.2, 0.3, 1.0).unwrap();
    let shape = solve_ansatz_params(&p).unwrap();
    let grid = GridSpec::symmetric(3.0 * p.well_center(), 1024).unwrap();
    let rabi = ground_splitting(&p, &grid).unwrap().wronskian / p.hbar();
    let omega = population_frequency(&shape);
    assert!(((omega.ln() - rabi.ln()) / rabi.ln()).abs() < 0.3);
}

#[test]
fn trajectory_csv_has_energy_column_only_when_undriven() {
    let p = params();
    let s0 = PhasePoint::at_rest(2.0);
    let mut plain = Vec::new();
    integrate(&s0, &p, &DriveSpec::None, 0.1, 0.01, 1).unwrap().write_csv(&mut plain).unwrap();
    let mut driven = Vec::new();
    integrate(&s0, &p, &DriveSpec::cosine(0.1, 1.0), 0.1, 0.01, 1).unwrap().write_csv(&mut driven).unwrap();
    let plain = String::from_utf8(plain).unwrap();
    let driven = String::from_utf8(driven).unwrap();
    assert!(plain.starts_with("t,x,v,energy\n"));
    assert!(driven.starts_with("t,x,v\n"));
    assert_eq!(plain.lines().count(), 12);
}

#[test]
fn single_precision_integration_runs() {
    let p = SystemParams::<f32>::new(0.2, 0.4, 1.0).unwrap();
    let s0 = PhasePoint::at_rest(1.2 * p.well_center());
    let traj = integrate(&s0, &p, &DriveSpec::None, 10.0, 0.01, 10).unwrap();
    assert!(traj.energy_drift().unwrap() < 1e-4);
}
