//! The blended function `F̄_n` and the modified combination `B̄_{n,r-1}`.
//!
//! Near the singular point `ξ`, `f` is replaced by its degree-`r` Lagrange
//! interpolant `H` at the grid nodes `x_i = ⌊nξ − ((r−1)/2 + i)⌋ / n`,
//! `i = 1..=r+1`. The switch happens on the bands `[x'_1, x'_2]` and
//! `[x'_3, x'_4]` with
//!
//! ```text
//! x'_1 = ⌊nξ − 2√n⌋/n   x'_2 = ⌊nξ − √n⌋/n   x'_3 = ⌊nξ + √n⌋/n   x'_4 = ⌊nξ + 2√n⌋/n
//! F̄_n = f (1 − ψ̄_1 + ψ̄_2) + ψ̄_1 (1 − ψ̄_2) H
//! ```
//!
//! where `ψ̄_1`, `ψ̄_2` are `ψ` rescaled to the two bands.

mod psi;

pub use psi::{eval_psi, psi_system, solve_psi, PsiPoly, MAX_PSI_ORDER};

use serde::Serialize;

use crate::combinations::{build_scheme, CombinationScheme, CombinedOperator, LadderRule};
use crate::error::{Error, Result};
use crate::function::RealFunction;

/// `⌊v⌋`, treating values within 1e-9 of an integer as that integer so that
/// `nξ` products like `100 · 0.3` land on the intended grid index.
fn grid_floor(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r as i64
    } else {
        v.floor() as i64
    }
}

/// Cut points, interpolation nodes and cutoff for one `(n, r, ξ)`.
#[derive(Debug, Clone, Serialize)]
pub struct BlendSpec {
    n: usize,
    r: usize,
    xi: f64,
    cut_index: [i64; 4],
    cuts: [f64; 4],
    node_index: Vec<i64>,
    nodes: Vec<f64>,
    psi: PsiPoly,
}

pub fn build_blend(n: usize, r: usize, xi: f64) -> Result<BlendSpec> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter(format!("xi = {xi} must lie in (0, 1)")));
    }
    if n == 0 || r == 0 {
        return Err(Error::InvalidParameter("blend needs n >= 1 and r >= 1".into()));
    }
    let psi = solve_psi(r)?;
    let too_small = |reason: String| Error::NTooSmall { n, xi, reason };

    let nf = n as f64;
    let nxi = nf * xi;
    let root = nf.sqrt();
    let cut_index = [
        grid_floor(nxi - 2.0 * root),
        grid_floor(nxi - root),
        grid_floor(nxi + root),
        grid_floor(nxi + 2.0 * root),
    ];
    if cut_index[0] < 0 {
        return Err(too_small(format!("x'_1 = {}/{n} < 0", cut_index[0])));
    }
    if cut_index[3] > n as i64 {
        return Err(too_small(format!("x'_4 = {}/{n} > 1", cut_index[3])));
    }
    if cut_index.windows(2).any(|w| w[0] >= w[1]) {
        return Err(too_small(format!("cut points {cut_index:?} not strictly increasing")));
    }

    let offset = (r as f64 - 1.0) / 2.0;
    let node_index: Vec<i64> = (1..=r + 1)
        .map(|i| grid_floor(nxi - (offset + i as f64)))
        .collect();
    if let Some(k) = node_index
        .iter()
        .find(|&&k| k <= cut_index[1] || k >= cut_index[2])
    {
        return Err(too_small(format!(
            "node {k}/{n} outside ({}/{n}, {}/{n})",
            cut_index[1], cut_index[2]
        )));
    }
    let mut sorted = node_index.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(too_small(format!("interpolation nodes {node_index:?} collide")));
    }

    Ok(BlendSpec {
        n,
        r,
        xi,
        cuts: cut_index.map(|k| k as f64 / nf),
        cut_index,
        nodes: node_index.iter().map(|&k| k as f64 / nf).collect(),
        node_index,
        psi,
    })
}

impl BlendSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `x'_1 < x'_2 < x'_3 < x'_4`.
    pub fn cuts(&self) -> [f64; 4] {
        self.cuts
    }

    /// `x_1 > x_2 > … > x_{r+1}`, in generation order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn psi(&self) -> &PsiPoly {
        &self.psi
    }

    /// Whether `x` lies in `A = [0, x'_2] ∪ [x'_3, 1]`.
    pub fn in_outer_set(&self, x: f64) -> bool {
        x <= self.cuts[1] || x >= self.cuts[2]
    }

    fn psi1(&self, x: f64) -> f64 {
        let [c1, c2, _, _] = self.cuts;
        eval_psi(&self.psi, (x - c1) / (c2 - c1))
    }

    fn psi2(&self, x: f64) -> f64 {
        let [_, _, c3, c4] = self.cuts;
        eval_psi(&self.psi, (x - c3) / (c4 - c3))
    }

    /// Samples `f` at the nodes and returns `H(f, ·)`.
    pub fn interpolant<F: RealFunction + ?Sized>(&self, f: &F) -> Result<Interpolant> {
        let values = self
            .nodes
            .iter()
            .map(|&x| {
                let v = f.value(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NodeAtSingularity { x })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Interpolant {
            n: self.n as f64,
            node_index: self.node_index.iter().map(|&k| k as f64).collect(),
            values,
        })
    }

    /// `F̄_n(f, ·)` as a function that can be sampled.
    pub fn blended<'a, F: RealFunction + ?Sized>(&'a self, f: &'a F) -> Result<BlendedFunction<'a, F>> {
        Ok(BlendedFunction {
            spec: self,
            h: self.interpolant(f)?,
            f,
        })
    }
}

/// Lagrange interpolant through `r + 1` grid nodes, evaluated in product form
/// in the grid coordinate `u = n x`, where the nodes are integers.
#[derive(Debug, Clone)]
pub struct Interpolant {
    n: f64,
    node_index: Vec<f64>,
    values: Vec<f64>,
}

impl Interpolant {
    pub fn eval(&self, x: f64) -> f64 {
        let u = self.n * x;
        let mut acc = 0.0;
        for (i, (&ki, &fi)) in self.node_index.iter().zip(&self.values).enumerate() {
            let li: f64 = self
                .node_index
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &kj)| (u - kj) / (ki - kj))
                .product();
            acc += fi * li;
        }
        acc
    }
}

/// `H(f, x)`.
pub fn lagrange_h<F: RealFunction + ?Sized>(f: &F, spec: &BlendSpec, x: f64) -> Result<f64> {
    Ok(spec.interpolant(f)?.eval(x))
}

/// `F̄_n(f, ·)` bound to a concrete `f`.
pub struct BlendedFunction<'a, F: ?Sized> {
    spec: &'a BlendSpec,
    h: Interpolant,
    f: &'a F,
}

impl<F: RealFunction + ?Sized> BlendedFunction<'_, F> {
    pub fn interpolant(&self) -> &Interpolant {
        &self.h
    }
}

impl<F: RealFunction + ?Sized> RealFunction for BlendedFunction<'_, F> {
    fn value(&self, x: f64) -> f64 {
        let [c1, c2, c3, c4] = self.spec.cuts;
        if x <= c1 || x >= c4 {
            self.f.value(x)
        } else if x < c2 {
            let s = self.spec.psi1(x);
            self.f.value(x) * (1.0 - s) + s * self.h.eval(x)
        } else if x <= c3 {
            self.h.eval(x)
        } else {
            let s = self.spec.psi2(x);
            self.f.value(x) * s + (1.0 - s) * self.h.eval(x)
        }
    }
}

/// `F̄_n(f, x)`.
pub fn blended_f<F: RealFunction + ?Sized>(f: &F, spec: &BlendSpec, x: f64) -> Result<f64> {
    Ok(spec.blended(f)?.value(x))
}

/// `B̄_{n,r-1}(f, ·) = Σ_{i=0}^{r-2} C_i(n) B_{n_i}(F̄_n, ·)` with `F̄_n`
/// built once from the base degree `n`.
#[derive(Debug, Clone)]
pub struct ModifiedOperator {
    spec: BlendSpec,
    scheme: CombinationScheme,
    op: CombinedOperator,
}

pub fn modified_eval<F: RealFunction + ?Sized>(
    f: &F,
    n: usize,
    r: usize,
    xi: f64,
    rule: LadderRule,
) -> Result<ModifiedOperator> {
    if r < 2 {
        return Err(Error::CombinationOrderTooSmall(r));
    }
    let spec = build_blend(n, r, xi)?;
    let scheme = build_scheme(n, r - 1, rule)?;
    let op = scheme.operator(&spec.blended(f)?)?;
    Ok(ModifiedOperator { spec, scheme, op })
}

impl ModifiedOperator {
    pub fn spec(&self) -> &BlendSpec {
        &self.spec
    }

    pub fn scheme(&self) -> &CombinationScheme {
        &self.scheme
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.op.eval(x)
    }

    /// `B̄^{(order)}_{n,r-1}(f, ·)`.
    pub fn derivative(&self, order: usize) -> Result<CombinedOperator> {
        if order > self.scheme.n_base() {
            return Err(Error::OrderExceedsDegree {
                r: order,
                n: self.scheme.n_base(),
            });
        }
        self.op.derivative(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::basis;
    use crate::combinations::combined;

    fn monomial(m: i32) -> impl Fn(f64) -> f64 {
        move |x: f64| x.powi(m)
    }

    #[test]
    fn blend_example_cuts_and_nodes() {
        let spec = build_blend(100, 2, 0.5).unwrap();
        let expect = [0.30, 0.40, 0.60, 0.70];
        for (c, e) in spec.cuts().iter().zip(expect) {
            assert!((c - e).abs() < 1e-15);
        }
        let nodes = spec.nodes();
        for (c, e) in nodes.iter().zip([0.48, 0.47, 0.46]) {
            assert!((c - e).abs() < 1e-15);
        }
    }

    #[test]
    fn blend_rejects_small_n() {
        assert!(matches!(build_blend(16, 2, 0.1), Err(Error::NTooSmall { .. })));
        assert!(matches!(build_blend(16, 2, 0.9), Err(Error::NTooSmall { .. })));
        // √n too small to keep the r + 1 nodes inside (x'_2, x'_3).
        assert!(matches!(build_blend(9, 3, 0.5), Err(Error::NTooSmall { .. })));
        assert!(build_blend(64, 2, 0.0).is_err());
    }

    #[test]
    fn floor_snaps_representation_noise() {
        // 100 · 0.3 is 30.000000000000004 in binary; the nodes still sit on
        // the intended grid indices.
        let spec = build_blend(100, 3, 0.3).unwrap();
        for (x, e) in spec.nodes().iter().zip([0.28, 0.27, 0.26, 0.25]) {
            assert!((x - e).abs() < 1e-15, "{x} vs {e}");
        }
    }

    #[test]
    fn interpolant_reproduces_low_degree() {
        for r in 2..=3 {
            let spec = build_blend(256, r, 0.5).unwrap();
            for m in 0..=r as i32 {
                let f = monomial(m);
                let h = spec.interpolant(&f).unwrap();
                for i in 0..=40 {
                    let x = 0.35 + 0.3 * i as f64 / 40.0;
                    assert!((h.eval(x) - f(x)).abs() <= 1e-9, "r={r} m={m} x={x}");
                }
            }
            let g = |x: f64| (7.0 * x).sin();
            let x1 = spec.nodes()[0];
            assert!((lagrange_h(&g, &spec, x1).unwrap() - g(x1)).abs() <= 1e-12);
        }
    }

    #[test]
    fn interpolant_example_abs() {
        let spec = build_blend(100, 2, 0.5).unwrap();
        let f = |x: f64| (x - 0.5).abs();
        assert!((lagrange_h(&f, &spec, 0.47).unwrap() - 0.03).abs() < 1e-13);
    }

    #[test]
    fn interpolant_rejects_singular_node() {
        let spec = build_blend(100, 2, 0.5).unwrap();
        let f = |x: f64| if (x - 0.47).abs() < 1e-12 { f64::INFINITY } else { 1.0 };
        assert!(matches!(
            spec.interpolant(&f),
            Err(Error::NodeAtSingularity { .. })
        ));
    }

    #[test]
    fn blended_regions() {
        let spec = build_blend(400, 2, 0.5).unwrap();
        let f = |x: f64| (x - 0.5).abs().powf(0.3);
        let fb = spec.blended(&f).unwrap();
        let [c1, c2, c3, c4] = spec.cuts();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            if x <= c1 || x >= c4 {
                assert_eq!(fb.value(x).to_bits(), f(x).to_bits());
            } else if (c2..=c3).contains(&x) {
                assert_eq!(fb.value(x), fb.interpolant().eval(x));
            }
        }
        // The bands are convex combinations of f and H.
        for i in 1..100 {
            let x = c1 + (c2 - c1) * i as f64 / 100.0;
            let (a, b) = (f(x), fb.interpolant().eval(x));
            let v = fb.value(x);
            assert!(v >= a.min(b) - 1e-15 && v <= a.max(b) + 1e-15);
        }
    }

    #[test]
    fn blended_reproduces_monomials() {
        for r in 2..=3 {
            for &xi in &[0.3, 0.5, 0.7] {
                let spec = build_blend(128, r, xi).unwrap();
                for m in 0..=r as i32 {
                    let f = monomial(m);
                    for i in 0..=1000 {
                        let x = i as f64 / 1000.0;
                        let v = blended_f(&f, &spec, x).unwrap();
                        assert!((v - f(x)).abs() <= 1e-9, "r={r} xi={xi} m={m} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn blended_never_samples_inside_window() {
        let spec = build_blend(256, 2, 0.5).unwrap();
        let f = |x: f64| (x - 0.5).abs().powf(-0.5);
        let fb = spec.blended(&f).unwrap();
        assert!(fb.value(0.5).is_finite());
    }

    #[test]
    fn modified_reproduces_constants_and_linears() {
        for r in 2..=3 {
            let c = modified_eval(&|_x: f64| 1.5, 64, r, 0.5, LadderRule::Doubling).unwrap();
            let l = modified_eval(&|x: f64| x, 64, r, 0.5, LadderRule::Doubling).unwrap();
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                assert!((c.eval(x) - 1.5).abs() < 1e-12);
                assert!((l.eval(x) - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modified_requires_two_terms() {
        assert!(matches!(
            modified_eval(&|x: f64| x, 64, 1, 0.5, LadderRule::Doubling),
            Err(Error::CombinationOrderTooSmall(1))
        ));
    }

    #[test]
    fn modified_matches_brute_force_sum() {
        let f = |x: f64| (x - 0.5).abs().powf(1.5);
        let n = 256;
        let op = modified_eval(&f, n, 2, 0.5, LadderRule::Doubling).unwrap();
        let spec = op.spec().clone();
        let x = 0.9;

        // Direct evaluation of Σ_k F̄(k/n) p_{n,k}(x) with a single-term scheme.
        let fb = spec.blended(&f).unwrap();
        let brute: f64 = (0..=n)
            .map(|k| fb.value(k as f64 / n as f64) * basis(n, k as i64, x))
            .sum();
        assert!((op.eval(x) - brute).abs() <= 1e-13);

        // Only samples inside [x'_1, x'_4] differ from the plain operator.
        let scheme = build_scheme(n, 1, LadderRule::Doubling).unwrap();
        let plain = combined(&f, &scheme, x).unwrap();
        let [c1, _, _, c4] = spec.cuts();
        let window: f64 = (0..=n)
            .map(|k| k as f64 / n as f64)
            .filter(|&t| t > c1 && t < c4)
            .map(|t| (fb.value(t) - f(t)).abs() * basis(n, (t * n as f64).round() as i64, x))
            .sum();
        assert!((op.eval(x) - plain).abs() <= window + 1e-15);
    }

    #[test]
    fn weighted_stability_witness() {
        let corpus: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|x: f64| (x - 0.5).abs().powf(1.5)),
            Box::new(|x: f64| (x - 0.5).signum() * (x - 0.5).abs().powf(0.5)),
            Box::new(|x: f64| (std::f64::consts::PI * x).sin()),
            Box::new(|x: f64| x * x * x),
        ];
        let wbar = |x: f64| (x - 0.5).abs();
        for f in &corpus {
            let fref: &dyn Fn(f64) -> f64 = f.as_ref();
            let norm_f = (0..=2000)
                .map(|i| i as f64 / 2000.0)
                .map(|x| wbar(x) * fref(x).abs())
                .fold(0.0, f64::max);
            for n in [64usize, 256, 1024] {
                let op = modified_eval(fref, n, 2, 0.5, LadderRule::Doubling).unwrap();
                let norm_b = (0..=2000)
                    .map(|i| i as f64 / 2000.0)
                    .map(|x| wbar(x) * op.eval(x).abs())
                    .fold(0.0, f64::max);
                assert!(norm_b <= 8.0 * norm_f, "n={n}: {norm_b} vs {norm_f}");
            }
        }
    }
}
