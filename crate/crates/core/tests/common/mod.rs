#![allow(dead_code)]

use semiquantal::{solve_ansatz_params, AnsatzShape, SystemParams, TwoGaussianState};

/// Adaptive Simpson quadrature with an absolute error target.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Moments `(⟨x⟩, ⟨x³⟩)` of the two-Gaussian packet from direct quadrature of
/// its explicit wave function, normalized by the quadrature norm.
pub fn quadrature_moments(state: &TwoGaussianState<f64>) -> (f64, f64) {
    let b = state.shape.b0;
    let c = state.shape.a0 + state.epsilon;
    let (n1, n2) = (state.n1, state.n2);
    let psi = move |x: f64| {
        n1 * (-(x - c) * (x - c) / (2.0 * b * b)).exp() + n2 * (-(x + c) * (x + c) / (2.0 * b * b)).exp()
    };
    let reach = c.abs() + 16.0 * b;
    let cuts = [-reach, -c.abs(), 0.0, c.abs(), reach];
    let integrate = |g: &dyn Fn(f64) -> f64| {
        cuts.windows(2)
            .map(|w| simpson(g, w[0], w[1], 1e-14))
            .sum::<f64>()
    };
    let norm = integrate(&|x| psi(x) * psi(x));
    let m1 = integrate(&|x| x * psi(x) * psi(x));
    let m3 = integrate(&|x| x * x * x * psi(x) * psi(x));
    (m1 / norm, m3 / norm)
}

pub fn shape(lambda: f64, hbar: f64) -> AnsatzShape<f64> {
    solve_ansatz_params(&SystemParams::new(lambda, hbar, 1.0).unwrap()).unwrap()
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
