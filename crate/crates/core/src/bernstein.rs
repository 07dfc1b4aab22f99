//! Bernstein basis and operator, forward/symmetric differences, derivatives
//! of the operator and central moments.
//!
//! Basis values are computed in log space,
//! `p_{n,k}(x) = exp(ln C(n,k) + k ln x + (n-k) ln(1-x))`, with the endpoints
//! `x = 0` and `x = 1` short-circuited to their exact 0/1 values. Sums run in
//! ascending `k` with compensated accumulation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::numkit::{log_binomial, log_binomial_row, KahanSum};

/// Slack allowed when checking that difference nodes stay inside `[0, 1]`.
const NODE_SLACK: f64 = 1e-12;

/// `p_{n,k}(x)`; zero for `k` outside `[0, n]`.
pub fn basis(n: usize, k: i64, x: f64) -> f64 {
    if k < 0 || k as usize > n {
        return 0.0;
    }
    let k = k as usize;
    if x <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let lc = log_binomial(n as u64, k as i64);
    (lc + k as f64 * x.ln() + (n - k) as f64 * (-x).ln_1p()).exp()
}

/// A polynomial of degree `n` stored by its Bernstein coefficients.
#[derive(Debug, Clone)]
pub struct BernsteinPoly {
    coeffs: Vec<f64>,
    log_binom: Arc<Vec<f64>>,
}

impl BernsteinPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a Bernstein polynomial needs at least one coefficient");
        let log_binom = Arc::new(log_binomial_row(coeffs.len() - 1));
        Self { coeffs, log_binom }
    }

    /// `B_n(f)` as a polynomial: samples `f(k/n)` for `k = 0..=n`.
    pub fn from_samples<F: RealFunction + ?Sized>(f: &F, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Bernstein degree must be positive".into()));
        }
        let samples = (0..=n)
            .map(|k| {
                let x = k as f64 / n as f64;
                let v = f.value(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SampleAtSingularity { x })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(samples))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The `r`-th derivative, again in Bernstein form of degree `n - r`:
    /// `n!/(n-r)! · Σ_k Δ^r c_k · p_{n-r,k}`.
    pub fn derivative(&self, r: usize) -> Result<Self> {
        let n = self.degree();
        if r > n {
            return Err(Error::OrderExceedsDegree { r, n });
        }
        if r == 0 {
            return Ok(self.clone());
        }
        let mut diffs = self.coeffs.clone();
        for _ in 0..r {
            for k in 0..diffs.len() - 1 {
                diffs[k] = diffs[k + 1] - diffs[k];
            }
            diffs.pop();
        }
        let falling: f64 = (0..r).map(|j| (n - j) as f64).product();
        for d in &mut diffs {
            *d *= falling;
        }
        Ok(Self::new(diffs))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree();
        if x == 0.0 {
            return self.coeffs[0];
        }
        if x == 1.0 {
            return self.coeffs[n];
        }
        if !(0.0..=1.0).contains(&x) {
            return self.de_casteljau(x);
        }
        let lx = x.ln();
        let l1x = (-x).ln_1p();
        let mut acc = KahanSum::new();
        for (k, (&c, &lc)) in self.coeffs.iter().zip(self.log_binom.iter()).enumerate() {
            if c == 0.0 {
                continue;
            }
            let e = lc + k as f64 * lx + (n - k) as f64 * l1x;
            if e > -745.0 {
                acc.add(c * e.exp());
            }
        }
        acc.value()
    }

    fn de_casteljau(&self, x: f64) -> f64 {
        let mut b = self.coeffs.clone();
        let n = b.len();
        for level in 1..n {
            for k in 0..n - level {
                b[k] = (1.0 - x) * b[k] + x * b[k + 1];
            }
        }
        b[0]
    }
}

/// `B_n(f, x) = Σ_k f(k/n) p_{n,k}(x)`.
pub fn bernstein<F: RealFunction + ?Sized>(f: &F, n: usize, x: f64) -> Result<f64> {
    Ok(BernsteinPoly::from_samples(f, n)?.eval(x))
}

/// `B_n^{(r)}(f, x)` via forward differences of the samples.
pub fn bernstein_deriv<F: RealFunction + ?Sized>(f: &F, n: usize, r: usize, x: f64) -> Result<f64> {
    if r > n {
        return Err(Error::OrderExceedsDegree { r, n });
    }
    Ok(BernsteinPoly::from_samples(f, n)?.derivative(r)?.eval(x))
}

fn binomial(r: usize, k: usize) -> f64 {
    log_binomial(r as u64, k as i64).exp().round()
}

fn check_node(x: f64) -> Result<f64> {
    if (-NODE_SLACK..=1.0 + NODE_SLACK).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        Err(Error::OutOfDomain { x })
    }
}

/// Forward difference `Σ_k (-1)^k C(r,k) f(x + (r-k)h)`.
pub fn forward_diff<F: RealFunction + ?Sized>(f: &F, h: f64, r: usize, x: f64) -> Result<f64> {
    if !(h > 0.0) || r == 0 {
        return Err(Error::InvalidParameter(format!(
            "forward difference needs h > 0 and r >= 1, got h = {h}, r = {r}"
        )));
    }
    let mut acc = KahanSum::new();
    for k in 0..=r {
        let node = check_node(x + (r - k) as f64 * h)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binomial(r, k) * f.value(node));
    }
    Ok(acc.value())
}

/// Symmetric difference `Σ_k (-1)^k C(r,k) f(x + (r/2 - k) h step(x))`.
///
/// Returns `None` when some node leaves `[0, 1]` (the pair `(x, h)` is
/// inadmissible); nodes are never clamped.
pub fn symmetric_diff<F, S>(f: &F, h: f64, r: usize, x: f64, step: S) -> Option<f64>
where
    F: RealFunction + ?Sized,
    S: Fn(f64) -> f64,
{
    let s = h * step(x);
    let half = r as f64 / 2.0;
    let mut acc = KahanSum::new();
    for k in 0..=r {
        let node = x + (half - k as f64) * s;
        if !(0.0..=1.0).contains(&node) {
            return None;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binomial(r, k) * f.value(node));
    }
    Some(acc.value())
}

/// `Σ_k |k - n x|^γ p_{n,k}(x)`.
pub fn central_moment(n: usize, x: f64, gamma: f64) -> f64 {
    let nx = n as f64 * x;
    let weights: Vec<f64> = (0..=n).map(|k| (k as f64 - nx).abs().powf(gamma)).collect();
    BernsteinPoly::new(weights).eval(x)
}
