//! Small numerical utilities shared by the operators: dense Gaussian
//! elimination, log-space binomials and log-log least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot size (against the original row maximum) below which a
/// system is reported as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

/// A square linear system `a · x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl DenseSystem {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let m = a.len();
        if m == 0 {
            return Err(Error::MalformedSystem("empty matrix".into()));
        }
        if let Some(i) = a.iter().position(|row| row.len() != m) {
            return Err(Error::MalformedSystem(format!(
                "row {i} has length {} in a {m}x{m} matrix",
                a[i].len()
            )));
        }
        if b.len() != m {
            return Err(Error::MalformedSystem(format!(
                "right-hand side has length {} for a {m}x{m} matrix",
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// Max-norm of `a · x − b`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| (dot(row, x) - bi).abs())
            .fold(0.0, f64::max)
    }
}

/// LU factorisation with scaled partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
    swaps: usize,
}

impl LuFactors {
    pub fn factor(a: &[Vec<f64>]) -> Result<Self> {
        let m = a.len();
        let mut lu: Vec<Vec<f64>> = a.to_vec();
        let scale: Vec<f64> = lu
            .iter()
            .map(|row| row.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            .collect();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut swaps = 0;

        for col in 0..m {
            let mut best = col;
            let mut best_rel = -1.0;
            for row in col..m {
                let s = scale[perm[row]];
                let rel = if s > 0.0 { lu[row][col].abs() / s } else { 0.0 };
                if rel > best_rel {
                    best_rel = rel;
                    best = row;
                }
            }
            if !(best_rel >= PIVOT_THRESHOLD) {
                return Err(Error::SingularSystem {
                    column: col,
                    pivot: best_rel.max(0.0),
                });
            }
            if best != col {
                lu.swap(best, col);
                perm.swap(best, col);
                swaps += 1;
            }
            let pivot = lu[col][col];
            for row in col + 1..m {
                let factor = lu[row][col] / pivot;
                lu[row][col] = factor;
                if factor != 0.0 {
                    for k in col + 1..m {
                        lu[row][k] -= factor * lu[col][k];
                    }
                }
            }
        }
        Ok(Self { lu, perm, swaps })
    }

    /// Determinant as the signed product of the pivots.
    pub fn determinant(&self) -> f64 {
        let sign = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        self.lu
            .iter()
            .enumerate()
            .fold(sign, |acc, (i, row)| acc * row[i])
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.lu.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..m {
            let s = dot(&self.lu[i][..i], &y[..i]);
            y[i] -= s;
        }
        for i in (0..m).rev() {
            let s = dot(&self.lu[i][i + 1..], &y[i + 1..]);
            y[i] = (y[i] - s) / self.lu[i][i];
        }
        y
    }
}

/// Solves `a · x = b` by Gaussian elimination with partial pivoting,
/// followed by iterative refinement with residuals in doubled precision.
pub fn solve_dense(sys: &DenseSystem) -> Result<Vec<f64>> {
    const REFINEMENT_STEPS: usize = 6;
    let lu = LuFactors::factor(&sys.a)?;
    let mut x = lu.solve(&sys.b);
    for _ in 0..REFINEMENT_STEPS {
        let r: Vec<f64> = sys
            .a
            .iter()
            .zip(&sys.b)
            .map(|(row, bi)| residual_dot2(row, &x, *bi))
            .collect();
        if r.iter().all(|v| *v == 0.0) {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem {
            column: 0,
            pivot: 0.0,
        });
    }
    Ok(x)
}

/// Determinant of a square matrix via the pivot product of its LU factors.
pub fn determinant(a: &[Vec<f64>]) -> Result<f64> {
    DenseSystem::new(a.to_vec(), vec![0.0; a.len()])?;
    Ok(LuFactors::factor(a)?.determinant())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `b − a·x` accumulated with error-free transformations (Ogita–Rump–Oishi
/// Dot2), i.e. as if computed in twice the working precision.
fn residual_dot2(a: &[f64], x: &[f64], b: f64) -> f64 {
    let mut s = b;
    let mut c = 0.0;
    for (ai, xi) in a.iter().zip(x) {
        let p = -ai * xi;
        let pe = (-ai).mul_add(*xi, -p);
        let t = s + p;
        let z = t - s;
        let se = (s - (t - z)) + (p - z);
        s = t;
        c += pe + se;
    }
    s + c
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `ln C(n, k)`, or `-inf` when `k` is outside `[0, n]`.
///
/// Evaluated as a compensated running sum of `ln((n - j) / (j + 1))`-type
/// terms over the shorter side, so results are reproducible bit for bit.
pub fn log_binomial(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return f64::NEG_INFINITY;
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = KahanSum::new();
    for j in 0..k {
        acc.add(((n - j) as f64).ln());
        acc.add(-((j + 1) as f64).ln());
    }
    acc.value()
}

/// `ln C(n, k)` for every `k = 0..=n`, built from the same compensated sums
/// as [`log_binomial`] and mirrored so that row `k` and row `n - k` agree.
pub fn log_binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![0.0; n + 1];
    let mut acc = KahanSum::new();
    for k in 1..=n / 2 {
        acc.add(((n - k + 1) as f64).ln());
        acc.add(-(k as f64).ln());
        row[k] = acc.value();
    }
    for k in n / 2 + 1..=n {
        row[k] = row[n - k];
    }
    row
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LogLogFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Domain(format!(
            "log-log fit needs positive finite coordinates, got ({x}, {y})"
        )));
    }
    let distinct = {
        let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    if distinct < 2 {
        return Err(Error::UnderdeterminedFit);
    }

    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mean_x = lx.iter().copied().collect::<KahanSum>().value() / m;
    let mean_y = ly.iter().copied().collect::<KahanSum>().value() / m;

    let mut sxx = KahanSum::new();
    let mut sxy = KahanSum::new();
    let mut syy = KahanSum::new();
    for (x, y) in lx.iter().zip(&ly) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
    }
    let slope = sxy.value() / sxx.value();
    let intercept = mean_y - slope * mean_x;

    let ss_res: KahanSum = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .collect();
    let ss_tot = syy.value();
    // A flat series is fitted exactly by the zero-slope line.
    let r_squared = if ss_tot <= f64::EPSILON * f64::EPSILON * m {
        1.0
    } else {
        (1.0 - ss_res.value() / ss_tot).clamp(0.0, 1.0)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}
