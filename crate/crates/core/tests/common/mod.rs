//! Independent numerical oracles shared by the integration tests. Nothing
//! here calls into the library under test.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// Kronrod abscissae (descending, last is 0) and weights for G7K15.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive G7K15 by recursive bisection until each piece meets
/// `max(abs_tol, rel_tol * |piece|)`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64, abs: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        if e <= abs.max(rel * v.abs()) || depth >= 60 || (b - a).abs() < 1e-15 * (a.abs() + b.abs()) {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, rel, abs * 0.5, depth + 1) + rec(f, m, b, rel, abs * 0.5, depth + 1)
    }
    rec(f, a, b, rel_tol, abs_tol, 0)
}

/// Integrates over consecutive intervals of sorted, deduplicated breakpoints.
pub fn integrate_pieces(f: &dyn Fn(f64) -> f64, mut breaks: Vec<f64>, rel_tol: f64, abs_tol: f64) -> f64 {
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    breaks.windows(2).map(|w| integrate(f, w[0], w[1], rel_tol, abs_tol)).sum()
}

/// Voigt density by direct convolution of a Gaussian (sd `sigma`) with a
/// Lorentzian (HWHM `gamma`).
///
/// The Lorentzian is absorbed by `t = x - gamma tan(theta)`, giving
/// `(1/pi) * integral_{-pi/2}^{pi/2} G(x - gamma tan theta) d theta`, a
/// bounded smooth integrand. Breakpoints sit where the Gaussian argument
/// crosses multiples of `sigma`.
pub fn voigt_convolution(x: f64, sigma: f64, gamma: f64) -> f64 {
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let g = move |theta: f64| {
        let u = (x - gamma * theta.tan()) / sigma;
        norm * (-0.5 * u * u).exp()
    };
    let mut breaks = vec![-FRAC_PI_2, FRAC_PI_2];
    for k in [-12.0, -8.0, -5.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0] {
        breaks.push(((x + k * sigma) / gamma).atan());
    }
    let peak = norm;
    integrate_pieces(&g, breaks, 1e-12, 1e-18 * peak) / PI
}

/// Bloch right-hand side with `Gamma1 = 2 gamma1`, `Gamma2 = gamma1 + gamma2`.
#[derive(Clone, Copy, Debug)]
pub struct Bloch {
    pub big_gamma1: f64,
    pub big_gamma2: f64,
    pub omega: f64,
    pub delta: f64,
}

impl Bloch {
    pub fn from_rates(gamma1: f64, gamma2: f64, omega: f64, delta: f64) -> Self {
        Self { big_gamma1: 2.0 * gamma1, big_gamma2: gamma1 + gamma2, omega, delta }
    }

    fn rhs(&self, r: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = r;
        [
            -self.delta * y - self.big_gamma2 * x,
            self.delta * x - self.omega * z - self.big_gamma2 * y,
            self.omega * y - self.big_gamma1 * z,
        ]
    }
}

/// Dormand–Prince 5(4) with step control on the mixed error
/// `|e_i| / (atol + rtol |y_i|)`, stopping exactly at each output time.
pub fn dopri45(sys: &Bloch, r0: [f64; 3], times: &[f64], rtol: f64, atol: f64) -> Vec<[f64; 3]> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let rate = sys.big_gamma1.abs() + sys.big_gamma2.abs() + sys.omega.abs() + sys.delta.abs();
    let mut h = if rate > 0.0 { 1e-3 / rate } else { 1e-3 };
    let mut t = 0.0;
    let mut y = r0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let mut k = [[0.0; 3]; 7];
            for s in 0..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    for i in 0..3 {
                        ys[i] += step * A[s][j] * kj[i];
                    }
                }
                k[s] = sys.rhs(ys);
            }
            let mut y5 = y;
            let mut err: f64 = 0.0;
            for i in 0..3 {
                let mut d5 = 0.0;
                let mut d4 = 0.0;
                for s in 0..7 {
                    d5 += B5[s] * k[s][i];
                    d4 += B4[s] * k[s][i];
                }
                y5[i] += step * d5;
                let e = step * (d5 - d4);
                err = err.max(e.abs() / (atol + rtol * y[i].abs().max(y5[i].abs())));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                if last && step < h {
                    // Shortened to land on the output time; keep the controller's h.
                    continue;
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
        }
        out.push(y);
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Eigenvalues of a small symmetric matrix (row-major, `n x n`) by cyclic
/// Jacobi rotations.
pub fn jacobi_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i * n + j].powi(2)).sum();
        let diag: f64 = (0..n).map(|i| m[i * n + i].powi(2)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}
