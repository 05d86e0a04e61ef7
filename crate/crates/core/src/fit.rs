//! Weighted nonlinear least squares (Levenberg–Marquardt) for decay curves
//! and resonance lineshapes, with covariance-based standard errors.
//!
//! Covariance convention: with Poisson inverse-variance weights the weights
//! already carry the noise scale, so the covariance is `(J^T W J)^-1`
//! unscaled. Unweighted fits scale `(J^T J)^-1` by the residual variance
//! `RSS / (n - p)`.

use crate::closed_form::{voigt, voigt_fwhm, VoigtArgs};
use crate::error::{ensure, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{compensated_sum, Real};
use crate::sequences::CountsRecord;

/// Per-point weighting of the squared residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Inverse Poisson variance `shots^2 / max(counts, 1)`. Records without
    /// counts (noiseless data) fall back to unit weights.
    #[default]
    Poisson,
    Unweighted,
}

/// Inverted lineshape on a constant background.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineshapeModel {
    /// Parameters `center, sigma, depth, offset`.
    Gaussian,
    /// Parameters `center, gamma` (half width), `depth, offset`.
    Lorentzian,
    /// Parameters `center, sigma, gamma, depth, offset`.
    Voigt,
}

impl std::str::FromStr for LineshapeModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "lorentzian" => Ok(Self::Lorentzian),
            "voigt" => Ok(Self::Voigt),
            _ => Err(Error::Argument(format!("unknown lineshape model '{s}'"))),
        }
    }
}

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub names: Vec<&'static str>,
    pub params: Vec<T>,
    pub std_errors: Vec<T>,
    pub covariance: Matrix<T>,
    /// RMS of the unweighted residuals, in signal units.
    pub residual_rms: T,
    /// Weighted sum of squared residuals at the optimum.
    pub chi2: T,
    pub dof: usize,
    pub converged: bool,
    pub n_iter: usize,
    /// Full width at half maximum and its standard error (lineshapes only).
    pub fwhm: Option<(T, T)>,
}

impl<T: Real> FitResult<T> {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn std_error(&self, name: &str) -> Option<T> {
        self.index(name).map(|i| self.std_errors[i])
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub weighting: Weighting,
    pub max_iter: usize,
    /// Relative parameter-change threshold for convergence.
    pub rtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { weighting: Weighting::Poisson, max_iter: 200, rtol: 1e-10 }
    }
}

impl FitOptions {
    pub fn with_weighting(weighting: Weighting) -> Self {
        Self { weighting, ..Self::default() }
    }
}

struct Problem<T> {
    x: Vec<T>,
    y: Vec<T>,
    w: Vec<T>,
    /// Whether `w` are inverse variances (covariance left unscaled).
    absolute_weights: bool,
}

fn prepare<T: Real>(records: &[CountsRecord<T>], weighting: Weighting, min_points: usize) -> Result<Problem<T>> {
    ensure(records.len() >= min_points, || {
        Error::Argument(format!("need at least {min_points} points, got {}", records.len()))
    })?;
    let x: Vec<T> = records.iter().map(|r| r.setting).collect();
    let y: Vec<T> = records.iter().map(|r| r.observed()).collect();
    ensure(x.iter().chain(&y).all(|v| v.is_finite()), || {
        Error::Argument("non-finite value in fit data".into())
    })?;
    let all_counts = records.iter().all(|r| r.counts.is_some());
    let (w, absolute_weights) = match weighting {
        Weighting::Poisson if all_counts => (
            records.iter().map(|r| T::one() / r.poisson_variance().unwrap_or(T::one())).collect(),
            true,
        ),
        _ => (vec![T::one(); records.len()], false),
    };
    let (lo, hi) = y.iter().fold((y[0], y[0]), |(a, b), &v| (a.min(v), b.max(v)));
    ensure(hi - lo > T::epsilon() * T::lit(4.0) * hi.abs().max(lo.abs()), || {
        Error::DegenerateFit("all data values are equal".into())
    })?;
    Ok(Problem { x, y, w, absolute_weights })
}

struct LmOutcome<T> {
    p: Vec<T>,
    cov: Matrix<T>,
    chi2: T,
    rss: T,
    converged: bool,
    n_iter: usize,
}

/// Damped Gauss–Newton on `sum w (y - f(p, x))^2`.
///
/// `model` returns the prediction and fills the gradient with respect to the
/// parameters; a non-finite prediction marks the trial point as invalid.
fn levenberg_marquardt<T, F>(prob: &Problem<T>, p0: Vec<T>, opts: &FitOptions, model: F) -> Result<LmOutcome<T>>
where
    T: Real,
    F: Fn(&[T], T, &mut [T]) -> T,
{
    let n = prob.x.len();
    let np = p0.len();
    ensure(n > np, || Error::Argument(format!("{n} points cannot constrain {np} parameters")))?;
    let rtol = T::lit(opts.rtol).max(T::epsilon() * T::lit(4.0));
    let gtol = T::epsilon().sqrt() * T::lit(1e-2);
    let ftol = T::lit(1e-10).max(T::epsilon() * T::lit(1e3));

    // Weighted residuals and Jacobian at `p`.
    let eval = |p: &[T]| -> Option<(Vec<T>, Matrix<T>, T)> {
        let mut r = Vec::with_capacity(n);
        let mut jac = Matrix::zeros(n, np);
        let mut g = vec![T::zero(); np];
        for i in 0..n {
            let f = model(p, prob.x[i], &mut g);
            if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let sw = prob.w[i].sqrt();
            r.push(sw * (prob.y[i] - f));
            for k in 0..np {
                jac[(i, k)] = sw * g[k];
            }
        }
        let chi2 = compensated_sum(r.iter().map(|v| *v * *v));
        Some((r, jac, chi2))
    };
    let normal_eq = |r: &[T], jac: &Matrix<T>| -> (Matrix<T>, Vec<T>) {
        let mut jtj = Matrix::zeros(np, np);
        let mut jtr = vec![T::zero(); np];
        for a in 0..np {
            for b in a..np {
                let s = compensated_sum((0..n).map(|i| jac[(i, a)] * jac[(i, b)]));
                jtj[(a, b)] = s;
                jtj[(b, a)] = s;
            }
            jtr[a] = compensated_sum((0..n).map(|i| jac[(i, a)] * r[i]));
        }
        (jtj, jtr)
    };
    let gradient_small = |jtj: &Matrix<T>, jtr: &[T], chi2: T| -> bool {
        // Scale-free: cosine between the residual and each Jacobian column.
        // Columns carrying no information at working precision are skipped.
        let max_diag = jtj.diagonal().into_iter().fold(T::zero(), T::max);
        (0..np).all(|k| {
            let d = (jtj[(k, k)] * chi2).sqrt();
            jtj[(k, k)] <= max_diag * T::epsilon() || jtr[k].abs() <= gtol * d
        })
    };

    let mut p = p0.clone();
    let (mut r, mut jac, mut chi2) =
        eval(&p).ok_or_else(|| Error::Numerical("model is not finite at the initial guess".into()))?;
    let mut lambda = T::lit(1e-3);
    let mut damping = vec![T::zero(); np];
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < opts.max_iter {
        n_iter += 1;
        let (jtj, jtr) = normal_eq(&r, &jac);
        if chi2 == T::zero() || gradient_small(&jtj, &jtr, chi2) {
            converged = true;
            break;
        }
        // Damping scale per parameter: the largest squared column norm seen
        // so far, so a column that flattens out (a width collapsing to zero)
        // keeps a finite trust region.
        for (k, d) in damping.iter_mut().enumerate() {
            *d = d.max(jtj[(k, k)]);
        }
        let max_diag = damping.iter().copied().fold(T::zero(), T::max);
        let floor = max_diag * T::epsilon();
        let mut accepted = false;
        while lambda < T::lit(1e20) {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * damping[k].max(floor);
            }
            let step = match a.solve_spd(&jtr) {
                Ok(s) => s,
                Err(_) => {
                    lambda *= T::lit(10.0);
                    continue;
                }
            };
            let trial: Vec<T> = p.iter().zip(&step).map(|(a, b)| *a + *b).collect();
            match eval(&trial) {
                Some((r2, j2, c2)) if c2 <= chi2 => {
                    let small_step = step
                        .iter()
                        .zip(&trial)
                        .zip(&p0)
                        .all(|((d, v), v0)| d.abs() <= rtol * v.abs().max(v0.abs()));
                    // Both the achieved and the linearized chi2 reduction are
                    // negligible: a flat valley such as a width at zero.
                    let jts: Vec<T> = (0..np).map(|a| compensated_sum((0..np).map(|b| jtj[(a, b)] * step[b]))).collect();
                    let predicted = T::two() * compensated_sum(step.iter().zip(&jtr).map(|(s, g)| *s * *g))
                        - compensated_sum(step.iter().zip(&jts).map(|(s, g)| *s * *g));
                    let flat = chi2 - c2 <= ftol * chi2 && predicted.abs() <= ftol * chi2;
                    let small = small_step || flat;
                    // Gain ratio: trust the linear model more only when it
                    // predicted the achieved reduction well.
                    let gain = if predicted > T::zero() { (chi2 - c2) / predicted } else { T::one() };
                    p = trial;
                    r = r2;
                    jac = j2;
                    chi2 = c2;
                    if gain > T::lit(0.75) {
                        lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                    } else if gain < T::lit(0.25) {
                        lambda *= T::lit(10.0);
                    }
                    accepted = true;
                    if small {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= T::lit(10.0),
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent direction left at working precision.
            converged = gradient_small(&jtj, &jtr, chi2);
            break;
        }
    }

    let (jtj, _) = normal_eq(&r, &jac);
    let mut cov = match jtj.inverse_spd() {
        Ok(c) if c.diagonal().iter().all(|v| *v >= T::zero() && v.is_finite()) => c,
        _ => jtj.pseudo_inverse_psd(T::epsilon() * T::lit(1e3)),
    };
    let rss = compensated_sum(
        (0..n).map(|i| {
            let mut g = vec![T::zero(); np];
            let d = prob.y[i] - model(&p, prob.x[i], &mut g);
            d * d
        }),
    );
    if !prob.absolute_weights {
        let s2 = chi2 / T::from_usize_lossy(n - np);
        cov.data.iter_mut().for_each(|v| *v *= s2);
    }
    Ok(LmOutcome { p, cov, chi2, rss, converged, n_iter })
}

fn finish<T: Real>(
    names: Vec<&'static str>,
    out: LmOutcome<T>,
    n: usize,
    fwhm: Option<(T, T)>,
) -> FitResult<T> {
    let std_errors = out.cov.diagonal().into_iter().map(|v| v.max(T::zero()).sqrt()).collect();
    let dof = n - names.len();
    FitResult {
        names,
        params: out.p,
        std_errors,
        covariance: out.cov,
        residual_rms: (out.rss / T::from_usize_lossy(n)).sqrt(),
        chi2: out.chi2,
        dof,
        converged: out.converged,
        n_iter: out.n_iter,
        fwhm,
    }
}

/// Linear change of parameters `p = offset + scale * q`; transforms a
/// covariance in `q` to one in `p`.
fn rescale<T: Real>(out: &mut LmOutcome<T>, offset: &[T], scale: &[T]) {
    let np = out.p.len();
    for k in 0..np {
        out.p[k] = offset[k] + scale[k] * out.p[k];
    }
    for a in 0..np {
        for b in 0..np {
            out.cov[(a, b)] *= scale[a] * scale[b];
        }
    }
}

/// Fits `A exp(-t / T)` to a decay record; parameters are named `A` and `T`.
pub fn fit_exponential<T: Real>(records: &[CountsRecord<T>], opts: &FitOptions) -> Result<FitResult<T>> {
    let prob = prepare(records, opts.weighting, 3)?;
    ensure(prob.x.iter().all(|t| *t >= T::zero()), || {
        Error::Argument("decay times must be non-negative".into())
    })?;
    let t_scale = prob.x.iter().fold(T::zero(), |m, &t| m.max(t));
    ensure(t_scale > T::zero(), || Error::Argument("decay times span zero".into()))?;
    let scaled = Problem {
        x: prob.x.iter().map(|t| *t / t_scale).collect(),
        y: prob.y.clone(),
        w: prob.w.clone(),
        absolute_weights: prob.absolute_weights,
    };
    let (a0, tau0) = log_linear_init(&scaled.x, &scaled.y);
    let out = levenberg_marquardt(&scaled, vec![a0, tau0], opts, |p, t, g| {
        let (a, tau) = (p[0], p[1]);
        if tau <= T::zero() {
            return T::nan();
        }
        let e = (-t / tau).exp();
        g[0] = e;
        g[1] = a * e * t / (tau * tau);
        a * e
    })?;
    let mut out = out;
    rescale(&mut out, &[T::zero(), T::zero()], &[T::one(), t_scale]);
    Ok(finish(vec!["A", "T"], out, prob.x.len(), None))
}

/// Weighted regression of `ln y` on `t` over the positive samples.
fn log_linear_init<T: Real>(t: &[T], y: &[T]) -> (T, T) {
    let pts: Vec<(T, T, T)> = t
        .iter()
        .zip(y)
        .filter(|(_, v)| **v > T::zero())
        .map(|(a, v)| (*a, v.ln(), *v * *v))
        .collect();
    let span = t.iter().fold(T::zero(), |m, &v| m.max(v));
    let mean_y = compensated_sum(y.iter().copied()) / T::from_usize_lossy(y.len());
    if pts.len() < 2 {
        return (mean_y.abs().max(T::epsilon()), span);
    }
    let sw = compensated_sum(pts.iter().map(|p| p.2));
    let mt = compensated_sum(pts.iter().map(|p| p.2 * p.0)) / sw;
    let ml = compensated_sum(pts.iter().map(|p| p.2 * p.1)) / sw;
    let stt = compensated_sum(pts.iter().map(|p| p.2 * (p.0 - mt) * (p.0 - mt)));
    let stl = compensated_sum(pts.iter().map(|p| p.2 * (p.0 - mt) * (p.1 - ml)));
    if stt <= T::zero() {
        return (mean_y.abs().max(T::epsilon()), span);
    }
    let slope = stl / stt;
    let tau = if slope < T::zero() { -T::one() / slope } else { span * T::lit(10.0) };
    let a = (ml - slope * mt).exp();
    (a, tau.min(span * T::lit(1e3)))
}

/// Fits an inverted lineshape `offset - depth * shape(x - center)` where the
/// shape has unit peak height. The FWHM and its standard error are returned
/// alongside the native width parameters.
pub fn fit_lineshape<T: Real>(
    records: &[CountsRecord<T>],
    model: LineshapeModel,
    opts: &FitOptions,
) -> Result<FitResult<T>> {
    let prob = prepare(records, opts.weighting, 5)?;
    ensure(prob.x.windows(2).all(|w| w[1] > w[0]), || {
        Error::Argument("lineshape settings must be strictly increasing".into())
    })?;
    let n = prob.x.len();
    let mid = (prob.x[0] + prob.x[n - 1]) * T::half();
    let xs = (prob.x[n - 1] - prob.x[0]) * T::half();
    let scaled = Problem {
        x: prob.x.iter().map(|x| (*x - mid) / xs).collect(),
        y: prob.y.clone(),
        w: prob.w.clone(),
        absolute_weights: prob.absolute_weights,
    };
    let (c0, fwhm0, depth0, offset0) = lineshape_init(&scaled.x, &scaled.y);
    let ln2 = T::LN_2();
    let g_per_fwhm = T::one() / (T::two() * (T::two() * ln2).sqrt());
    match model {
        LineshapeModel::Gaussian => {
            let p0 = vec![c0, fwhm0 * g_per_fwhm, depth0, offset0];
            let mut out = levenberg_marquardt(&scaled, p0, opts, |p, x, g| {
                let (c, s, d, o) = (p[0], p[1], p[2], p[3]);
                if s == T::zero() {
                    return T::nan();
                }
                let u = (x - c) / s;
                let e = (-(u * u) * T::half()).exp();
                g[0] = -d * e * u / s;
                g[1] = -d * e * u * u / s;
                g[2] = -e;
                g[3] = T::one();
                o - d * e
            })?;
            rescale(&mut out, &[mid, T::zero(), T::zero(), T::zero()], &[xs, xs, T::one(), T::one()]);
            out.p[1] = out.p[1].abs();
            let k = T::one() / g_per_fwhm;
            let fwhm = (k * out.p[1], k * out.cov[(1, 1)].max(T::zero()).sqrt());
            Ok(finish(vec!["center", "sigma", "depth", "offset"], out, n, Some(fwhm)))
        }
        LineshapeModel::Lorentzian => {
            let p0 = vec![c0, fwhm0 * T::half(), depth0, offset0];
            let mut out = levenberg_marquardt(&scaled, p0, opts, |p, x, g| {
                let (c, h, d, o) = (p[0], p[1], p[2], p[3]);
                if h == T::zero() {
                    return T::nan();
                }
                let u = x - c;
                let den = u * u + h * h;
                let l = h * h / den;
                g[0] = -d * T::two() * u * h * h / (den * den);
                g[1] = -d * T::two() * h * u * u / (den * den);
                g[2] = -l;
                g[3] = T::one();
                o - d * l
            })?;
            rescale(&mut out, &[mid, T::zero(), T::zero(), T::zero()], &[xs, xs, T::one(), T::one()]);
            out.p[1] = out.p[1].abs();
            let fwhm = (T::two() * out.p[1], T::two() * out.cov[(1, 1)].max(T::zero()).sqrt());
            Ok(finish(vec!["center", "gamma", "depth", "offset"], out, n, Some(fwhm)))
        }
        LineshapeModel::Voigt => {
            let p0 = vec![c0, fwhm0 * T::lit(0.3), fwhm0 * T::lit(0.3), depth0, offset0];
            let shape = |x: T, s: T, h: T| -> T {
                let (s, h) = (s.abs(), h.abs());
                let peak = voigt(VoigtArgs::new(T::zero(), s, h));
                let v = voigt(VoigtArgs::new(x, s, h));
                match (v, peak) {
                    (Ok(v), Ok(p)) if p > T::zero() => v / p,
                    _ => T::nan(),
                }
            };
            let mut out = levenberg_marquardt(&scaled, p0, opts, |p, x, g| {
                let (c, s, h, d, o) = (p[0], p[1], p[2], p[3], p[4]);
                let f0 = shape(x - c, s, h);
                let eps = T::epsilon().cbrt();
                let diff = |k: usize| -> T {
                    let step = eps * p[k].abs().max(T::lit(1e-2));
                    let at = |delta: T| {
                        let mut q = [c, s, h];
                        q[k] += delta;
                        shape(x - q[0], q[1], q[2])
                    };
                    (at(step) - at(-step)) / (T::two() * step)
                };
                g[0] = -d * diff(0);
                g[1] = -d * diff(1);
                g[2] = -d * diff(2);
                g[3] = -f0;
                g[4] = T::one();
                o - d * f0
            })?;
            rescale(
                &mut out,
                &[mid, T::zero(), T::zero(), T::zero(), T::zero()],
                &[xs, xs, xs, T::one(), T::one()],
            );
            out.p[1] = out.p[1].abs();
            out.p[2] = out.p[2].abs();
            let (s, h) = (out.p[1], out.p[2]);
            let f = voigt_fwhm(s, h);
            // Propagate through the width formula with a numerical gradient.
            let ds = T::epsilon().cbrt() * (s.abs() + h.abs());
            let gs = (voigt_fwhm(s + ds, h) - voigt_fwhm((s - ds).abs(), h)) / (T::two() * ds);
            let gh = (voigt_fwhm(s, h + ds) - voigt_fwhm(s, (h - ds).abs())) / (T::two() * ds);
            let var = gs * gs * out.cov[(1, 1)] + gh * gh * out.cov[(2, 2)] + T::two() * gs * gh * out.cov[(1, 2)];
            let fwhm = (f, var.max(T::zero()).sqrt());
            Ok(finish(vec!["center", "sigma", "gamma", "depth", "offset"], out, n, Some(fwhm)))
        }
    }
}

/// Initial center, FWHM, depth and offset of a dip from the raw samples.
fn lineshape_init<T: Real>(x: &[T], y: &[T]) -> (T, T, T, T) {
    let n = x.len();
    let k = (n / 10).max(1);
    let edge = compensated_sum(y[..k].iter().chain(&y[n - k..]).copied()) / T::from_usize_lossy(2 * k);
    let (imin, ymin) = y
        .iter()
        .enumerate()
        .fold((0, y[0]), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let depth = edge - ymin;
    let half = edge - depth * T::half();
    let below: Vec<T> = x.iter().zip(y).filter(|(_, v)| **v <= half).map(|(a, _)| *a).collect();
    let span = x[n - 1] - x[0];
    let dx = span / T::from_usize_lossy(n - 1);
    let fwhm = match (below.first(), below.last()) {
        (Some(a), Some(b)) => (*b - *a + dx).max(dx),
        _ => span * T::lit(0.1),
    };
    (x[imin], fwhm, depth, edge)
}

/// Renders `value(uncertainty) unit` with an SI prefix chosen from the value,
/// the uncertainty rounded to one significant digit (two when it starts
/// with 1), e.g. `5.7(3) ms`.
pub fn format_with_uncertainty(value: f64, sigma: f64, unit: &str) -> String {
    const PREFIXES: [(i32, &str); 9] =
        [(-12, "p"), (-9, "n"), (-6, "μ"), (-3, "m"), (0, ""), (3, "k"), (6, "M"), (9, "G"), (12, "T")];
    if !value.is_finite() || !sigma.is_finite() || sigma < 0.0 {
        return format!("{value:e} ± {sigma:e} {unit}").trim_end().to_string();
    }
    let mag = if value != 0.0 { value.abs() } else { sigma.max(f64::MIN_POSITIVE) };
    // Dimensionless values carry no prefix.
    let exp3 = if unit.is_empty() { 0 } else { ((mag.log10() / 3.0).floor() as i32 * 3).clamp(-12, 12) };
    let prefix = PREFIXES.iter().find(|(e, _)| *e == exp3).map(|p| p.1).unwrap_or("");
    let scale = 10f64.powi(exp3);
    let (v, s) = (value / scale, sigma / scale);
    let unit_str = format!("{prefix}{unit}");
    let suffix = if unit_str.is_empty() { String::new() } else { format!(" {unit_str}") };
    if s == 0.0 {
        return format!("{v}{suffix}");
    }
    // Round-off level uncertainty: twelve significant digits, exact in the last.
    if s < v.abs() * 1e-12 {
        let decimals = (11 - v.abs().log10().floor() as i32).max(0) as usize;
        return format!("{v:.decimals$}(0){suffix}");
    }
    let lead = s.log10().floor() as i32;
    let digits = if (s / 10f64.powi(lead)).round() as i64 == 1 { 2 } else { 1 };
    let decimals = (digits - 1 - lead).max(0);
    let unc = (s * 10f64.powi(decimals)).round();
    if decimals == 0 {
        // Uncertainty at or above the units digit: show it in value units.
        let q = 10f64.powi((lead - digits + 1).max(0));
        let vr = (v / q).round() * q;
        let ur = (s / q).round() * q;
        return format!("{vr:.0}({ur:.0}){suffix}");
    }
    format!("{v:.prec$}({unc:.0}){suffix}", prec = decimals as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(a: f64, t: f64, times: &[f64]) -> Vec<CountsRecord<f64>> {
        times.iter().map(|&x| CountsRecord::noiseless(x, a * (-x / t).exp())).collect()
    }

    #[test]
    fn noiseless_exponential() {
        let times: Vec<f64> = (1..=20).map(|k| k as f64 * 0.8e-3).collect();
        let r = fit_exponential(&decay(1.0, 5.7e-3, &times), &FitOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.get("A").unwrap() - 1.0).abs() < 1e-8);
        assert!((r.get("T").unwrap() / 5.7e-3 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_and_short_inputs() {
        let flat: Vec<_> = (1..=5).map(|k| CountsRecord::noiseless(k as f64, 0.4)).collect();
        assert!(matches!(fit_exponential(&flat, &FitOptions::default()), Err(Error::DegenerateFit(_))));
        let short = decay(1.0, 1.0, &[0.1, 0.2]);
        assert!(matches!(fit_exponential(&short, &FitOptions::default()), Err(Error::Argument(_))));
    }

    #[test]
    fn gaussian_dip_width() {
        let fwhm = std::f64::consts::TAU * 14e6;
        let sigma = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt());
        let w0 = std::f64::consts::TAU * 2.87e9;
        let recs: Vec<_> = (-40..=40)
            .map(|k| {
                let x = w0 + k as f64 * fwhm / 10.0;
                let u = (x - w0 - 1e6) / sigma;
                CountsRecord::noiseless(x, 1.0 - 0.2 * (-0.5 * u * u).exp())
            })
            .collect();
        let r = fit_lineshape(&recs, LineshapeModel::Gaussian, &FitOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.fwhm.unwrap().0 / fwhm - 1.0).abs() < 1e-6);
        assert!(((r.get("center").unwrap() - w0 - 1e6) / fwhm).abs() < 1e-6);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_with_uncertainty(5.7e-3, 0.3e-3, "s"), "5.7(3) ms");
        assert_eq!(format_with_uncertainty(10.6e-6, 0.9e-6, "s"), "10.6(9) μs");
        assert_eq!(format_with_uncertainty(1.234, 0.012, ""), "1.234(12)");
        assert_eq!(format_with_uncertainty(4.32e4, 0.96, "rad/s"), "43.2000(10) krad/s");
        assert_eq!(format_with_uncertainty(123.0, 40.0, "s"), "120(40) s");
        assert_eq!(format_with_uncertainty(0.99113, 0.00052, ""), "0.9911(5)");
        assert_eq!(format_with_uncertainty(5.0000000000586e-3, 2e-16, "s"), "5.00000000006(0) ms");
    }
}
