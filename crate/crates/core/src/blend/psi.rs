//! The smooth cutoff `ψ(x) = Σ_j a_j x^{2r+j}`, `j = 1..=2r+1`, with
//! `ψ(1) = 1` and `ψ^{(d)}(1) = 0` for `d = 1..=2r`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{solve_dense, DenseSystem, KahanSum};

pub const MAX_PSI_ORDER: usize = 5;

/// Monomial coefficients of `ψ` for one order `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiPoly {
    r: usize,
    coeffs: Vec<f64>,
    /// Coefficients of `(x-1)^d`, `d = 2r+1..=4r+1`, in the expansion about 1.
    #[serde(skip)]
    at_one: Vec<f64>,
}

/// Falling factorial `m (m-1) ⋯ (m-d+1)`.
fn falling(m: usize, d: usize) -> f64 {
    (0..d).map(|i| (m - i) as f64).product()
}

fn binomial(m: usize, d: usize) -> f64 {
    let d = d.min(m - d);
    (0..d).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// The `(2r+1)`-square system: row `d` is `Σ_j (2r+j)_d a_j = δ_{d0}`.
pub fn psi_system(r: usize) -> Result<DenseSystem> {
    if r == 0 || r > MAX_PSI_ORDER {
        return Err(Error::UnsupportedOrder(r));
    }
    let m = 2 * r + 1;
    let a = (0..m)
        .map(|d| (1..=m).map(|j| falling(2 * r + j, d)).collect())
        .collect();
    let mut b = vec![0.0; m];
    b[0] = 1.0;
    DenseSystem::new(a, b)
}

pub fn solve_psi(r: usize) -> Result<PsiPoly> {
    let sys = psi_system(r)?;
    let coeffs = solve_dense(&sys)?;
    let at_one = (2 * r + 1..=4 * r + 1)
        .map(|d| {
            coeffs
                .iter()
                .enumerate()
                .filter(|&(j, _)| 2 * r + 1 + j >= d)
                .map(|(j, a)| a * binomial(2 * r + 1 + j, d))
                .collect::<KahanSum>()
                .value()
        })
        .collect();
    Ok(PsiPoly { r, coeffs, at_one })
}

impl PsiPoly {
    pub fn order(&self) -> usize {
        self.r
    }

    /// `a_1..a_{2r+1}`, the coefficients of `x^{2r+1}..x^{4r+1}`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `ψ^{(d)}(1)` from the monomial coefficients, together with the scale
    /// `Σ_j |a_j| (2r+j)_d` against which its rounding error should be judged.
    pub fn derivative_at_one(&self, d: usize) -> (f64, f64) {
        let mut value = KahanSum::new();
        let mut scale = 0.0;
        for (j, a) in self.coeffs.iter().enumerate() {
            let m = 2 * self.r + 1 + j;
            if m >= d {
                let t = a * falling(m, d);
                value.add(t);
                scale += t.abs();
            }
        }
        (value.value(), scale)
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_psi(self, x)
    }
}

/// `ψ(x)`, extended by 0 for `x ≤ 0` and by 1 for `x ≥ 1`.
///
/// Horner in `x` on `(0, 1/2]` and in `x - 1` on `(1/2, 1)`, so that both
/// flat ends are evaluated without cancellation.
pub fn eval_psi(psi: &PsiPoly, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let lead = 2 * psi.r + 1;
    if x <= 0.5 {
        let inner = psi.coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a);
        inner * x.powi(lead as i32)
    } else {
        let y = x - 1.0;
        let inner = psi.at_one.iter().rev().fold(0.0, |acc, t| acc * y + t);
        1.0 + inner * y.powi(lead as i32)
    }
}
