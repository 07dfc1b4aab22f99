//! Linear combinations `B_{n,r} = Σ_i C_i(n) B_{n_i}` of Bernstein operators
//! whose coefficients satisfy
//!
//! * `n = n_0 < n_1 < … < n_{r-1} ≤ C n`,
//! * `Σ |C_i| ≤ C`,
//! * `Σ C_i = 1`,
//! * `Σ C_i n_i^{-k} = 0` for `k = 1..r-1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bernstein::BernsteinPoly;
use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::numkit::{solve_dense, DenseSystem, KahanSum};

/// How the degrees `n_i` grow from the base degree `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderRule {
    /// `n_i = n · 2^i`
    #[default]
    Doubling,
    /// `n_i = n · (i + 1)`
    Arithmetic,
}

impl LadderRule {
    pub fn degree(self, n: usize, i: usize) -> usize {
        match self {
            LadderRule::Doubling => n << i,
            LadderRule::Arithmetic => n * (i + 1),
        }
    }
}

impl fmt::Display for LadderRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LadderRule::Doubling => "doubling",
            LadderRule::Arithmetic => "arithmetic",
        })
    }
}

impl FromStr for LadderRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "doubling" => Ok(LadderRule::Doubling),
            "arithmetic" => Ok(LadderRule::Arithmetic),
            other => Err(Error::Config(format!(
                "unknown ladder rule `{other}` (expected doubling or arithmetic)"
            ))),
        }
    }
}

/// Degrees and coefficients of one combination. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinationScheme {
    r: usize,
    n_base: usize,
    rule: LadderRule,
    ladder: Vec<usize>,
    coeffs: Vec<f64>,
}

/// Residuals of the defining conditions, for diagnostics and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// `max n_i / n`.
    pub ladder_ratio: f64,
    /// `Σ |C_i|`.
    pub abs_sum: f64,
    /// `|Σ C_i − 1|`.
    pub sum_residual: f64,
    /// `max_k |Σ C_i (n/n_i)^k|`, `k = 1..r-1`.
    pub moment_residual: f64,
}

pub fn build_scheme(n: usize, r: usize, rule: LadderRule) -> Result<CombinationScheme> {
    if r == 0 {
        return Err(Error::InvalidParameter("combination needs r >= 1 terms".into()));
    }
    if n < r {
        return Err(Error::InvalidParameter(format!(
            "base degree n = {n} must be at least r = {r}"
        )));
    }
    let ladder: Vec<usize> = (0..r).map(|i| rule.degree(n, i)).collect();
    // Row k holds (n / n_i)^k, i.e. the condition Σ C_i n_i^{-k} scaled by n^k.
    let a: Vec<Vec<f64>> = (0..r)
        .map(|k| {
            ladder
                .iter()
                .map(|&ni| (n as f64 / ni as f64).powi(k as i32))
                .collect()
        })
        .collect();
    let mut b = vec![0.0; r];
    b[0] = 1.0;
    let coeffs = solve_dense(&DenseSystem::new(a, b)?)?;
    Ok(CombinationScheme {
        r,
        n_base: n,
        rule,
        ladder,
        coeffs,
    })
}

impl CombinationScheme {
    pub fn terms(&self) -> usize {
        self.r
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn rule(&self) -> LadderRule {
        self.rule
    }

    pub fn ladder(&self) -> &[usize] {
        &self.ladder
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn conditions(&self) -> ConditionReport {
        let n = self.n_base as f64;
        let moment_residual = (1..self.r)
            .map(|k| {
                self.coeffs
                    .iter()
                    .zip(&self.ladder)
                    .map(|(c, &ni)| c * (n / ni as f64).powi(k as i32))
                    .collect::<KahanSum>()
                    .value()
                    .abs()
            })
            .fold(0.0, f64::max);
        ConditionReport {
            ladder_ratio: *self.ladder.last().unwrap() as f64 / n,
            abs_sum: self.coeffs.iter().map(|c| c.abs()).sum(),
            sum_residual: (self.coeffs.iter().copied().collect::<KahanSum>().value() - 1.0).abs(),
            moment_residual,
        }
    }

    /// Pre-samples `f` at every ladder degree.
    pub fn operator<F: RealFunction + ?Sized>(&self, f: &F) -> Result<CombinedOperator> {
        let terms = self
            .coeffs
            .iter()
            .zip(&self.ladder)
            .map(|(&c, &ni)| Ok((c, BernsteinPoly::from_samples(f, ni)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CombinedOperator { terms })
    }
}

/// `Σ_i C_i B_{n_i}(f, ·)` with the samples already taken.
#[derive(Debug, Clone)]
pub struct CombinedOperator {
    terms: Vec<(f64, BernsteinPoly)>,
}

impl CombinedOperator {
    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, p)| c * p.eval(x))
            .collect::<KahanSum>()
            .value()
    }

    /// Derivative of order `r` of every term.
    pub fn derivative(&self, r: usize) -> Result<CombinedOperator> {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| Ok((*c, p.derivative(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CombinedOperator { terms })
    }
}

/// `B_{n,r}(f, x)`.
pub fn combined<F: RealFunction + ?Sized>(f: &F, scheme: &CombinationScheme, x: f64) -> Result<f64> {
    Ok(scheme.operator(f)?.eval(x))
}

/// `B_{n,r}^{(r_deriv)}(f, x) = Σ_i C_i B_{n_i}^{(r_deriv)}(f, x)`.
pub fn combined_deriv<F: RealFunction + ?Sized>(
    f: &F,
    scheme: &CombinationScheme,
    r_deriv: usize,
    x: f64,
) -> Result<f64> {
    if r_deriv > scheme.n_base {
        return Err(Error::OrderExceedsDegree {
            r: r_deriv,
            n: scheme.n_base,
        });
    }
    Ok(scheme.operator(f)?.derivative(r_deriv)?.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::bernstein;

    /// Closed form: C_i is the Lagrange basis polynomial in the variable 1/n
    /// at nodes 1/n_i, evaluated at 0, i.e. Π_{j≠i} n_i / (n_i - n_j).
    fn lagrange_at_zero(ladder: &[usize]) -> Vec<f64> {
        ladder
            .iter()
            .enumerate()
            .map(|(i, &ni)| {
                ladder
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &nj)| ni as f64 / (ni as f64 - nj as f64))
                    .product()
            })
            .collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn scheme_examples() {
        let s1 = build_scheme(10, 1, LadderRule::Doubling).unwrap();
        assert_eq!(s1.coeffs(), &[1.0]);
        let s2 = build_scheme(10, 2, LadderRule::Doubling).unwrap();
        assert_eq!(s2.ladder(), &[10, 20]);
        assert!(close(s2.coeffs(), &[-1.0, 2.0], 1e-14));
        let s3 = build_scheme(10, 3, LadderRule::Doubling).unwrap();
        assert!(close(s3.coeffs(), &[1.0 / 3.0, -2.0, 8.0 / 3.0], 1e-13));
    }

    #[test]
    fn coefficients_match_closed_form() {
        for rule in [LadderRule::Doubling, LadderRule::Arithmetic] {
            for r in 1..=5 {
                for n in [5usize, 8, 33, 128] {
                    let s = build_scheme(n, r, rule).unwrap();
                    assert!(close(s.coeffs(), &lagrange_at_zero(s.ladder()), 1e-10), "{rule} r={r} n={n}");
                }
            }
        }
    }

    #[test]
    fn conditions_hold() {
        for r in 1..=5 {
            let s = build_scheme(16, r, LadderRule::Doubling).unwrap();
            let c = s.conditions();
            assert!(c.ladder_ratio <= 2f64.powi(r as i32 - 1));
            assert!(c.sum_residual <= 1e-12);
            assert!(c.moment_residual <= 1e-12);
            assert!(c.abs_sum <= 3f64.powi(r as i32), "r={r} abs_sum={}", c.abs_sum);
        }
    }

    #[test]
    fn doubling_coefficients_do_not_depend_on_n() {
        for r in 1..=5 {
            let a = build_scheme(12, r, LadderRule::Doubling).unwrap();
            let b = build_scheme(24, r, LadderRule::Doubling).unwrap();
            assert!(close(a.coeffs(), b.coeffs(), 1e-12));
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(build_scheme(4, 0, LadderRule::Doubling).is_err());
        assert!(build_scheme(2, 3, LadderRule::Doubling).is_err());
        assert!("halving".parse::<LadderRule>().is_err());
        assert_eq!("arithmetic".parse::<LadderRule>().unwrap(), LadderRule::Arithmetic);
    }

    #[test]
    fn combined_examples() {
        let s = build_scheme(16, 3, LadderRule::Doubling).unwrap();
        for x in [0.0, 0.2, 0.71, 1.0] {
            assert!((combined(&|_t: f64| 4.0, &s, x).unwrap() - 4.0).abs() < 1e-13);
            assert!((combined(&|t: f64| t, &s, x).unwrap() - x).abs() < 1e-13);
        }
        let s2 = build_scheme(10, 2, LadderRule::Doubling).unwrap();
        for x in [0.1, 0.5, 0.9] {
            let v = combined(&|t: f64| (t - x) * (t - x), &s2, x).unwrap();
            assert!(v.abs() <= 1e-12, "x={x} v={v}");
        }
    }

    #[test]
    fn single_term_is_plain_bernstein() {
        let f = |t: f64| (4.0 * t).cos() + t;
        let s = build_scheme(37, 1, LadderRule::Doubling).unwrap();
        for x in [0.0, 0.123, 0.5, 0.999] {
            assert_eq!(
                combined(&f, &s, x).unwrap().to_bits(),
                bernstein(&f, 37, x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn combined_derivative_examples() {
        let s = build_scheme(10, 2, LadderRule::Doubling).unwrap();
        for x in [0.0, 0.4, 1.0] {
            assert!((combined_deriv(&|t: f64| t, &s, 1, x).unwrap() - 1.0).abs() < 1e-12);
            assert!((combined_deriv(&|t: f64| t * t, &s, 2, x).unwrap() - 2.0).abs() < 1e-12);
            assert!(combined_deriv(&|_t: f64| 7.0, &s, 1, x).unwrap().abs() < 1e-12);
        }
        assert!(combined_deriv(&|t: f64| t, &s, 11, 0.5).is_err());
    }

    #[test]
    fn moment_annihilation() {
        for r in 1..=4 {
            for n in [32usize, 64, 128] {
                let s = build_scheme(n, r, LadderRule::Doubling).unwrap();
                for k in 1..r {
                    for i in 1..=101 {
                        let x = i as f64 / 102.0;
                        let v = combined(&|t: f64| (t - x).powi(k as i32), &s, x).unwrap();
                        assert!(v.abs() <= 1e-9, "r={r} n={n} k={k} x={x} v={v}");
                    }
                }
            }
        }
    }
}
