//! Step weights, the singular weight `w̄(x) = |x − ξ|^α`, the weighted
//! Ditzian–Totik modulus of smoothness and an upper estimator of the
//! weighted K-functional.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::symmetric_diff;
use crate::error::{Error, Result};
use crate::function::{CorpusFunction, RealFunction};
use crate::numkit::KahanSum;

/// Default number of uniform points in sup-norm grids on `[0, 1]`.
pub const DEFAULT_X_GRID: usize = 2001;
/// Default number of step sizes per decade in the modulus.
pub const DEFAULT_H_GRID: usize = 128;
/// Smallest grid size accepted by [`ModulusQuery`].
pub const MIN_GRID: usize = 64;
/// Largest step in the modulus lattice.
const H_LATTICE_TOP: f64 = 10.0;
/// Smallest step in the modulus lattice.
const H_LATTICE_FLOOR: f64 = 1e-7;

/// `φ(x) = x^{β(0)} (1 − x)^{β(1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepWeight {
    pub beta0: f64,
    pub beta1: f64,
}

impl StepWeight {
    pub fn new(beta0: f64, beta1: f64) -> Result<Self> {
        if !(beta0 >= 0.0 && beta1 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step-weight exponents must be nonnegative, got ({beta0}, {beta1})"
            )));
        }
        Ok(Self { beta0, beta1 })
    }

    /// `ϕ(x) = √(x(1−x))`.
    pub fn classical() -> Self {
        Self { beta0: 0.5, beta1: 0.5 }
    }

    /// `φ ≡ 1`.
    pub fn unit() -> Self {
        Self { beta0: 0.0, beta1: 0.0 }
    }

    /// `ϕ^λ`, the effective step weight of the `W^r_{ϕ,λ}` scale.
    pub fn classical_power(lambda: f64) -> Self {
        Self {
            beta0: 0.5 * lambda,
            beta1: 0.5 * lambda,
        }
    }

    pub fn min_exponent(&self) -> f64 {
        self.beta0.min(self.beta1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_phi(self, x)
    }
}

pub fn eval_phi(w: &StepWeight, x: f64) -> f64 {
    x.powf(w.beta0) * (1.0 - x).powf(w.beta1)
}

/// `ϕ(x) = √(x(1−x))`.
pub fn varphi(x: f64) -> f64 {
    (x * (1.0 - x)).max(0.0).sqrt()
}

/// `w̄(x) = |x − ξ|^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularWeight {
    pub xi: f64,
    pub alpha: f64,
}

impl SingularWeight {
    pub fn new(xi: f64, alpha: f64) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::InvalidParameter(format!("xi = {xi} must lie in (0, 1)")));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        Ok(Self { xi, alpha })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_wbar(self, x)
    }

    /// `‖w̄ g‖` over the sup grid.
    pub fn weighted_norm<F: RealFunction + ?Sized>(&self, g: &F, x_grid_size: usize) -> f64 {
        sup_grid(x_grid_size, self.xi)
            .map(|x| (self.eval(x) * g.value(x)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn eval_wbar(w: &SingularWeight, x: f64) -> f64 {
    (x - w.xi).abs().powf(w.alpha)
}

/// `δ_n(x) = ϕ(x) + n^{−1/2}`.
pub fn delta_n(n: usize, x: f64) -> f64 {
    varphi(x) + 1.0 / (n as f64).sqrt()
}

/// Uniform grid of `m` points on `[0, 1]` with the exact point `ξ` removed.
pub fn sup_grid(m: usize, xi: f64) -> impl Iterator<Item = f64> + Clone {
    let last = (m - 1) as f64;
    (0..m).map(move |i| i as f64 / last).filter(move |&x| x != xi)
}

/// Order, scale and discretisation of one modulus evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusQuery {
    pub r: usize,
    pub t: f64,
    pub x_grid_size: usize,
    /// Step sizes per decade.
    pub h_grid_size: usize,
}

impl ModulusQuery {
    pub fn new(r: usize, t: f64) -> Self {
        Self {
            r,
            t,
            x_grid_size: DEFAULT_X_GRID,
            h_grid_size: DEFAULT_H_GRID,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidParameter("modulus order must be >= 1".into()));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t = {} must be positive", self.t)));
        }
        if self.x_grid_size < MIN_GRID || self.h_grid_size < MIN_GRID {
            return Err(Error::InvalidParameter(format!(
                "grid sizes must be >= {MIN_GRID}, got x = {}, h = {}",
                self.x_grid_size, self.h_grid_size
            )));
        }
        Ok(())
    }
}

/// Steps `10^{1 − j/per_decade}` of the fixed lattice that do not exceed `t`.
///
/// The lattice does not depend on `t`, so the step sets for `t_1 ≤ t_2` are
/// nested and the discretised modulus is nondecreasing in `t`.
pub fn step_lattice(t: f64, per_decade: usize) -> Vec<f64> {
    let limit = t * (1.0 + 1e-12);
    (0..)
        .map(|j| 10f64.powf(H_LATTICE_TOP.log10() - j as f64 / per_decade as f64))
        .take_while(|&h| h >= H_LATTICE_FLOOR)
        .filter(|&h| h <= limit)
        .collect()
}

/// A discretised modulus together with the number of `(x, h)` pairs skipped
/// because a difference node left `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub value: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// `ω_φ^r(f, t)_w̄` for any function; the caller is responsible for `f`
/// being bounded.
pub fn weighted_modulus_of<F: RealFunction + Sync + ?Sized>(
    f: &F,
    sw: &SingularWeight,
    w: &StepWeight,
    q: &ModulusQuery,
) -> Result<ModulusEstimate> {
    Ok(weighted_modulus_profile(f, sw, w, q, &[q.t])?[0])
}

/// [`weighted_modulus_of`] at every `t` in `ts` from a single sweep of the
/// step lattice; agrees exactly with separate calls.
pub fn weighted_modulus_profile<F: RealFunction + Sync + ?Sized>(
    f: &F,
    sw: &SingularWeight,
    w: &StepWeight,
    q: &ModulusQuery,
    ts: &[f64],
) -> Result<Vec<ModulusEstimate>> {
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    let top = ModulusQuery { t: t_max, ..*q };
    top.validate()?;
    let xs: Vec<(f64, f64, f64)> = sup_grid(q.x_grid_size, sw.xi)
        .map(|x| (x, sw.eval(x), w.eval(x)))
        .collect();
    let steps = step_lattice(t_max, q.h_grid_size);
    let per_step: Vec<(f64, usize)> = steps
        .par_iter()
        .map(|&h| {
            let mut sup = 0.0f64;
            let mut skipped = 0;
            for &(x, wb, phi) in &xs {
                match symmetric_diff(f, h, q.r, x, |_| phi) {
                    Some(d) => sup = sup.max((wb * d).abs()),
                    None => skipped += 1,
                }
            }
            (sup, skipped)
        })
        .collect();
    ts.iter()
        .map(|&t| {
            ModulusQuery { t, ..*q }.validate()?;
            let limit = t * (1.0 + 1e-12);
            let mut est = ModulusEstimate { value: 0.0, evaluated: 0, skipped: 0 };
            for (&h, &(sup, skipped)) in steps.iter().zip(&per_step) {
                if h <= limit {
                    est.value = est.value.max(sup);
                    est.skipped += skipped;
                    est.evaluated += xs.len() - skipped;
                }
            }
            Ok(est)
        })
        .collect()
}

/// `ω_φ^r(f, t)_w̄ = sup_{0<h≤t} sup_x |w̄(x) Δ^r_{hφ(x)} f(x)|`, discretised
/// over the sup grid (exact `ξ` excluded) and the step lattice; inadmissible
/// `(x, h)` pairs are skipped.
pub fn weighted_modulus(
    f: &CorpusFunction,
    sw: &SingularWeight,
    w: &StepWeight,
    q: &ModulusQuery,
) -> Result<f64> {
    Ok(weighted_modulus_detail(f, sw, w, q)?.value)
}

/// [`weighted_modulus`] with admissibility counts.
pub fn weighted_modulus_detail(
    f: &CorpusFunction,
    sw: &SingularWeight,
    w: &StepWeight,
    q: &ModulusQuery,
) -> Result<ModulusEstimate> {
    if !f.is_bounded() {
        return Err(Error::ModulusUndefined(f.name().to_string()));
    }
    weighted_modulus_of(f, sw, w, q)
}

/// `f` continued past the endpoints by odd reflection,
/// `f(−y) = 2f(0) − f(y)` and `f(1+y) = 2f(1) − f(1−y)`.
fn reflected<F: RealFunction + ?Sized>(f: &F, x: f64) -> f64 {
    if x < 0.0 {
        2.0 * f.value(0.0) - f.value(-x)
    } else if x > 1.0 {
        2.0 * f.value(1.0) - f.value(2.0 - x)
    } else {
        f.value(x)
    }
}

/// Offsets and weights of the `r`-fold midpoint rule on `[−w/2, w/2]^r`
/// with `m` points per axis, grouped by the value of `Σ u_k`.
fn nested_midpoint(r: usize, m: usize, width: f64) -> Vec<(f64, f64)> {
    // counts[s] = number of index tuples with Σ i_k = s.
    let mut counts = vec![1.0f64];
    for _ in 0..r {
        let mut next = vec![0.0; counts.len() + m - 1];
        for (s, c) in counts.iter().enumerate() {
            for i in 0..m {
                next[s + i] += c;
            }
        }
        counts = next;
    }
    let total = (m as f64).powi(r as i32);
    let h = width / m as f64;
    counts
        .iter()
        .enumerate()
        .map(|(s, c)| {
            // Σ of r midpoints −w/2 + (i_k + 1/2) h.
            let offset = -(r as f64) * width / 2.0 + (s as f64 + r as f64 / 2.0) * h;
            (offset, c / total)
        })
        .collect()
}

/// Points per axis of the Steklov-mean quadrature.
const STEKLOV_POINTS: usize = 32;

/// Log-spaced Steklov scales used when the caller has no preference.
pub fn default_steklov_grid() -> Vec<f64> {
    (0..=12).map(|j| 10f64.powf(-4.0 + j as f64 / 4.0)).collect()
}

/// Candidates `g` for the K-functional infimum, reduced to the two norms
/// `(‖w̄(f − g)‖, ‖w̄ φ^r g^{(r)}‖)` each contributes.
#[derive(Debug, Clone)]
pub struct KFunctionalEstimator {
    r: usize,
    candidates: Vec<(f64, f64)>,
}

impl KFunctionalEstimator {
    /// Builds the candidate set: the `r`-fold Steklov means
    /// `g_h = ∫ f(· + Σ u_k) du / h^r` over `[−h/2, h/2]^r` for every `h` in
    /// `steklov_grid` (with `f` continued by odd reflection and
    /// `g_h^{(r)} = h^{−r} Δ^r_h f`), plus `g = f` when `f` carries an
    /// analytic `r`-th derivative.
    pub fn new(
        f: &CorpusFunction,
        sw: &SingularWeight,
        w: &StepWeight,
        r: usize,
        steklov_grid: &[f64],
        x_grid_size: usize,
    ) -> Result<Self> {
        if !f.is_bounded() {
            return Err(Error::ModulusUndefined(f.name().to_string()));
        }
        if steklov_grid.is_empty() {
            return Err(Error::NoCandidates);
        }
        if r == 0 {
            return Err(Error::InvalidParameter("K-functional order must be >= 1".into()));
        }
        if let Some(h) = steklov_grid.iter().find(|&&h| !(h > 0.0 && h * r as f64 <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "Steklov scale {h} must satisfy 0 < h <= 1/r"
            )));
        }
        let xs: Vec<(f64, f64, f64)> = sup_grid(x_grid_size, sw.xi)
            .map(|x| (x, sw.eval(x), w.eval(x).powi(r as i32)))
            .collect();

        let mut candidates: Vec<(f64, f64)> = steklov_grid
            .par_iter()
            .map(|&h| {
                let rule = nested_midpoint(r, STEKLOV_POINTS, h);
                let mut dist = 0.0f64;
                let mut smooth = 0.0f64;
                for &(x, wb, phir) in &xs {
                    let g: f64 = rule
                        .iter()
                        .map(|&(u, c)| c * reflected(f, x + u))
                        .collect::<KahanSum>()
                        .value();
                    let dr = central_diff_reflected(f, h, r, x) / h.powi(r as i32);
                    dist = dist.max((wb * (f.value(x) - g)).abs());
                    smooth = smooth.max((wb * phir * dr).abs());
                }
                (dist, smooth)
            })
            .collect();

        if let Some(d) = f.derivative(r).filter(|_| f.derivative_orders() >= r) {
            let smooth = xs
                .iter()
                .map(|&(x, wb, phir)| (wb * phir * d(x)).abs())
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max);
            candidates.push((0.0, smooth));
        }
        Ok(Self { r, candidates })
    }

    /// Upper estimate of `K_{r,φ}(f, t^r)_w̄`.
    pub fn upper(&self, t: f64) -> f64 {
        let tr = t.powi(self.r as i32);
        self.candidates
            .iter()
            .map(|(dist, smooth)| dist + tr * smooth)
            .fold(f64::INFINITY, f64::min)
    }
}

fn central_diff_reflected<F: RealFunction + ?Sized>(f: &F, h: f64, r: usize, x: f64) -> f64 {
    let half = r as f64 / 2.0;
    let mut acc = KahanSum::new();
    let mut binom = 1.0;
    for k in 0..=r {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binom * reflected(f, x + (half - k as f64) * h));
        binom = binom * (r - k) as f64 / (k + 1) as f64;
    }
    acc.value()
}

/// `min_g {‖w̄(f − g)‖ + t^r ‖w̄ φ^r g^{(r)}‖}` over the candidates of
/// [`KFunctionalEstimator`]; an upper bound on the K-functional.
pub fn kfunctional_upper(
    f: &CorpusFunction,
    sw: &SingularWeight,
    w: &StepWeight,
    r: usize,
    t: f64,
    steklov_grid: &[f64],
) -> Result<f64> {
    Ok(KFunctionalEstimator::new(f, sw, w, r, steklov_grid, DEFAULT_X_GRID)?.upper(t))
}

/// Points per axis of the quadrature in [`check_phi_integral`].
const PHI_INTEGRAL_POINTS: usize = 64;

/// Ratio of `∫_{[−t/2,t/2]^r} φ^{−r}(x + Σ u_k) du` (nested midpoint rule) to
/// `t^r φ^{−r}(x)`.
pub fn check_phi_integral(w: &StepWeight, r: usize, t: f64, x: f64) -> Result<f64> {
    if !(1..=3).contains(&r) {
        return Err(Error::OutsideHypothesis(format!("r = {r} not in 1..=3")));
    }
    if !(t > 0.0 && t < 1.0 / (8.0 * r as f64)) {
        return Err(Error::OutsideHypothesis(format!("t = {t} not in (0, 1/(8r))")));
    }
    let margin = r as f64 * t / 2.0;
    if !(x > margin && x < 1.0 - margin) {
        return Err(Error::OutsideHypothesis(format!(
            "x = {x} not in (rt/2, 1 − rt/2) = ({margin}, {})",
            1.0 - margin
        )));
    }
    let phi_x = w.eval(x);
    let mean: KahanSum = nested_midpoint(r, PHI_INTEGRAL_POINTS, t)
        .into_iter()
        .map(|(u, c)| c * (phi_x / w.eval(x + u)).powi(r as i32))
        .collect();
    Ok(mean.value())
}
