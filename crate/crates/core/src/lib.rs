//! Semiquantal dynamics of a particle in the quartic double well
//! `V(x) = -x²/2 + λx⁴/4`.
//!
//! The crate covers the two-Gaussian variational description of the wave
//! packet, exact grid propagation and diagonalization, the reduced centroid
//! equations driven by the quantum fluctuation term, and the diagnostics used
//! to tell regular from chaotic centroid motion.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64` aliases
//! below fix the precision used by the command-line driver.

pub mod ansatz;
pub mod chaos;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod potential;
pub mod propagator;
pub mod reduced;
pub mod scalar;

pub use ansatz::{
    center_for_width, energy, expect_x, expect_x3, normalize, quantum_fluctuation_q, solve_ansatz_params,
    symmetric_energy, synthesize_wavefunction, tunneling_splitting, AnsatzShape, Expansion, TunnelingSplitting,
    TwoGaussianState,
};
pub use chaos::{
    correlation_dimension, crossing_frequency, largest_lyapunov, poincare_section, power_spectrum, LyapunovResult,
    SpectrumResult, Window,
};
pub use eigen::{
    eigenpairs, eigenpairs_for_potential, eigenpairs_with_options, ground_splitting, ln_splitting, DoubletSplitting,
    EigenOptions, EigenPair, FiniteDifferenceHamiltonian, Parity,
};
pub use error::{Error, Result};
pub use grid::{GridSpec, GridWavefunction};
pub use potential::{force, potential, small_oscillation_frequency, well_minima, SystemParams};
pub use propagator::{
    crank_nicolson, evolve, measure, record_q_drive, ObservableSample, ObservableSeries, SplitOperator,
};
pub use reduced::{
    duffing_energy, duffing_step, epsilon_dynamics, integrate, population_frequency, population_oscillation,
    DriveSpec, PhasePoint, ReplayDrive, Trajectory,
};
pub use scalar::Scalar;

pub type SystemParamsF64 = SystemParams<f64>;
pub type AnsatzShapeF64 = AnsatzShape<f64>;
pub type TwoGaussianStateF64 = TwoGaussianState<f64>;
pub type GridSpecF64 = GridSpec<f64>;
pub type GridWavefunctionF64 = GridWavefunction<f64>;
pub type EigenPairF64 = EigenPair<f64>;
pub type PhasePointF64 = PhasePoint<f64>;
pub type DriveSpecF64 = DriveSpec<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ObservableSeriesF64 = ObservableSeries<f64>;
pub type LyapunovResultF64 = LyapunovResult<f64>;
pub type SpectrumResultF64 = SpectrumResult<f64>;

/// Comma-joined `{:.16e}` fields, the number format of every CSV output.
pub fn csv_row<T: Scalar>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}
