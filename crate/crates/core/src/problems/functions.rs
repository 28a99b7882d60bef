//! Closed forms of the bundled test functions, before thresholding.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use std::sync::OnceLock;

use crate::qmc::gaussian_point;

/// Cholesky factor of the four-branch input covariance (independent
/// standard normals).
pub fn four_branch_factor() -> &'static DMatrix<f64> {
    static FACTOR: OnceLock<DMatrix<f64>> = OnceLock::new();
    FACTOR.get_or_init(|| DMatrix::identity(2, 2))
}

/// `sin(2 pi k u)` on `[0, 1]` with `k = 3` periods.
pub fn sine(u: &[f64]) -> f64 {
    (6.0 * PI * u[0]).sin()
}

/// Bichon's multimodal function on `[-4, 7] x [-3, 8]`.
pub fn multimodal_raw(v: &[f64]) -> f64 {
    let (x1, x2) = (v[0], v[1]);
    (x1 * x1 + 4.0) * (x2 - 1.0) / 20.0 - (2.5 * x1).sin()
}

pub fn multimodal(u: &[f64]) -> f64 {
    multimodal_raw(&[-4.0 + 11.0 * u[0], -3.0 + 11.0 * u[1]])
}

/// Four-branch series system limit state; small values mean failure.
pub fn four_branch_raw(v: &[f64]) -> f64 {
    let (x1, x2) = (v[0], v[1]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d2 = 0.1 * (x1 - x2) * (x1 - x2);
    let a = 3.0 + d2 - (x1 + x2) * s;
    let b = 3.0 + d2 + (x1 + x2) * s;
    let c = (x1 - x2) + 6.0 * s;
    let d = (x2 - x1) + 6.0 * s;
    a.min(b).min(c).min(d)
}

/// Negated four-branch response under standard normal inputs, so that
/// large values indicate failure.
pub fn four_branch(u: &[f64]) -> f64 {
    let mut v = [0.0; 2];
    gaussian_point(u, &[0.0, 0.0], four_branch_factor(), &mut v).expect("unit-cube input");
    -four_branch_raw(&v)
}

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

/// Ishigami function on `[-pi, pi]^3`.
pub fn ishigami_raw(v: &[f64]) -> f64 {
    v[0].sin() + ISHIGAMI_A * v[1].sin().powi(2) + ISHIGAMI_B * v[2].powi(4) * v[0].sin()
}

pub fn ishigami(u: &[f64]) -> f64 {
    let v: Vec<f64> = u.iter().map(|x| -PI + 2.0 * PI * x).collect();
    ishigami_raw(&v)
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

/// Six-dimensional Hartmann function (global minimum about -3.32).
pub fn hartmann_raw(u: &[f64]) -> f64 {
    -HARTMANN_ALPHA
        .iter()
        .zip(HARTMANN_A.iter().zip(&HARTMANN_P))
        .map(|(alpha, (a, p))| {
            let e: f64 = (0..6).map(|j| a[j] * (u[j] - p[j]).powi(2)).sum();
            alpha * (-e).exp()
        })
        .sum::<f64>()
}

/// Negated Hartmann, so failure sits near the global minimum.
pub fn hartmann(u: &[f64]) -> f64 {
    -hartmann_raw(u)
}
