//! Quadrature rules: Gauss–Hermite for Gaussian expectations and a
//! vector-valued adaptive Gauss–Kronrod integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Real};

/// Largest supported Gauss–Hermite order.
pub const MAX_HERMITE_NODES: usize = 512;

/// Gauss–Hermite rule for the weight `exp(-x^2)` on the real line.
///
/// Nodes are generated in `f64` (Golub–Welsch plus Newton polishing) and
/// converted to `T`; weights sum to `sqrt(pi)`.
#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_HERMITE_NODES {
            return Err(Error::Argument(format!(
                "Gauss-Hermite order must be in 1..={MAX_HERMITE_NODES}, got {n}"
            )));
        }
        let (x, w) = hermite_rule_f64(n);
        Ok(Self {
            nodes: x.into_iter().map(T::lit).collect(),
            weights: w.into_iter().map(T::lit).collect(),
        })
    }

    /// Nodes and probability weights for `N(mean, sd^2)`: the weights sum to one.
    pub fn normal_nodes(&self, mean: T, sd: T) -> impl Iterator<Item = (T, T)> + '_ {
        let scale = T::SQRT_2() * sd;
        let norm = T::one() / T::PI().sqrt();
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (mean + scale * x, w * norm))
    }
}

fn hermite_rule_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^{-1/4}
    // Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix of the
    // Hermite recurrence; each is then polished by Newton steps on the
    // Hermite function and the weight follows from p_{n-1}.
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off);
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let nf = n as f64;
    let eval = |z: f64| {
        let mut p1 = PIM4;
        let mut p2 = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for &z0 in &diag {
        let mut z = z0;
        for _ in 0..3 {
            let (p, dp) = eval(z);
            // Newton on p(z) exp(-z^2/2), which is far less curved than p.
            let step = p / (dp - z * p);
            if !step.is_finite() {
                break;
            }
            z -= step;
            if step.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, dp) = eval(z);
        x.push(z);
        w.push(2.0 / (dp * dp));
    }
    // Enforce exact symmetry.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let xm = 0.5 * (x[j] - x[i]);
        let wm = 0.5 * (w[i] + w[j]);
        x[i] = -xm;
        x[j] = xm;
        w[i] = wm;
        w[j] = wm;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `e[i]` couples rows `i` and `i + 1`; on return `d`
/// holds the eigenvalues (unsorted).
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

// Kronrod 15 / Gauss 7 abscissae and weights on [-1, 1].
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment<T> {
    a: T,
    b: T,
    value: Vec<T>,
    error: T,
    order: usize,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.order.cmp(&self.order))
    }
}

fn kronrod_segment<T, F>(f: &F, a: T, b: T, dim: usize) -> Result<(Vec<T>, T)>
where
    T: Real,
    F: Fn(T) -> Result<Vec<T>> + Sync,
{
    let c = (a + b) * T::half();
    let h = (b - a) * T::half();
    let mut pts = Vec::with_capacity(15);
    for (i, &xk) in XGK.iter().enumerate() {
        let d = h * T::lit(xk);
        if i < 7 {
            pts.push(c - d);
            pts.push(c + d);
        } else {
            pts.push(c);
        }
    }
    let vals: Vec<Vec<T>> = pts.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
    for v in &vals {
        if v.len() != dim {
            return Err(Error::Numerical("integrand changed dimension".into()));
        }
    }
    let mut kron = vec![T::zero(); dim];
    let mut gauss = vec![T::zero(); dim];
    for d in 0..dim {
        let mut k = Vec::with_capacity(15);
        let mut g = Vec::with_capacity(7);
        for i in 0..7 {
            let pair = vals[2 * i][d] + vals[2 * i + 1][d];
            k.push(T::lit(WGK[i]) * pair);
            if i % 2 == 1 {
                g.push(T::lit(WG[i / 2]) * pair);
            }
        }
        k.push(T::lit(WGK[7]) * vals[14][d]);
        g.push(T::lit(WG[3]) * vals[14][d]);
        kron[d] = compensated_sum(k) * h;
        gauss[d] = compensated_sum(g) * h;
    }
    let err = kron
        .iter()
        .zip(gauss.iter())
        .map(|(k, g)| (*k - *g).abs())
        .fold(T::zero(), T::max);
    Ok((kron, err))
}

/// Adaptive 7/15-point Gauss–Kronrod integration of a vector-valued
/// function over `[breaks[0], breaks[last]]`.
///
/// `breaks` seeds the initial partition. Subdivision stops when the summed
/// max-norm error estimate drops below `atol`. The reduction order is fixed
/// by the segment layout, so results do not depend on thread scheduling.
pub fn integrate_adaptive<T, F>(f: F, breaks: &[T], atol: T, max_segments: usize) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(T) -> Result<Vec<T>> + Sync,
{
    if breaks.len() < 2 {
        return Err(Error::Argument("need at least two break points".into()));
    }
    let dim = f(breaks[0])?.len();
    let mut heap = BinaryHeap::new();
    let mut order = 0usize;
    let mut total_err = T::zero();
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Argument("break points must increase".into()));
        }
        let (value, error) = kronrod_segment(&f, w[0], w[1], dim)?;
        total_err += error;
        heap.push(Segment { a: w[0], b: w[1], value, error, order });
        order += 1;
    }
    while total_err > atol {
        if heap.len() >= max_segments {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not reach tolerance {atol:e} within {max_segments} segments (estimate {total_err:e})"
            )));
        }
        let seg = heap.pop().expect("non-empty");
        let mid = (seg.a + seg.b) * T::half();
        if !(mid > seg.a && mid < seg.b) {
            // Interval exhausted at this precision; accept it.
            heap.push(Segment { error: T::zero(), ..seg });
            total_err = heap.iter().map(|s| s.error).sum();
            continue;
        }
        let (lv, le) = kronrod_segment(&f, seg.a, mid, dim)?;
        let (rv, re) = kronrod_segment(&f, mid, seg.b, dim)?;
        heap.push(Segment { a: seg.a, b: mid, value: lv, error: le, order });
        heap.push(Segment { a: mid, b: seg.b, value: rv, error: re, order: order + 1 });
        order += 2;
        // Recompute rather than update incrementally so rounding does not drift.
        total_err = compensated_sum(heap.iter().map(|s| s.error));
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let mut out = vec![T::zero(); dim];
    for (d, o) in out.iter_mut().enumerate() {
        *o = compensated_sum(segs.iter().map(|s| s.value[d]));
    }
    Ok(out)
}
