//! Builtin test functions.
//!
//! Names may carry the exponent in parentheses, e.g. `abspow(2.5)`; a bare
//! `abspow` uses [`DEFAULT_GAMMA`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::function::{CorpusFunction, RealFunction};
use crate::weights::SingularWeight;

pub const DEFAULT_GAMMA: f64 = 1.5;

/// Highest derivative order registered for the power-type members.
const POWER_DERIVATIVES: usize = 4;

/// `(name, description)` of every builtin.
pub const BUILTINS: &[(&str, &str)] = &[
    ("abspow", "|x - xi|^gamma, gamma > 0 (default 1.5)"),
    ("signpow", "sign(x - xi) |x - xi|^gamma, gamma > 0 (default 1.5)"),
    ("sin", "sin(pi x)"),
    ("poly3", "x^3"),
    ("linear", "2x - 1"),
    ("constant", "1"),
];

fn parse_name(spec: &str) -> Result<(&str, Option<f64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec, None));
    };
    let inner = spec[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Config(format!("malformed function name `{spec}`")))?;
    let gamma = inner
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("malformed exponent in `{spec}`")))?;
    Ok((spec[..open].trim(), Some(gamma)))
}

/// `γ (γ−1) ⋯ (γ−k+1)`.
fn falling(gamma: f64, k: usize) -> f64 {
    (0..k).map(|i| gamma - i as f64).product()
}

fn abspow(xi: f64, gamma: f64) -> CorpusFunction {
    let mut f = CorpusFunction::new(format!("abspow({gamma})"), move |x: f64| {
        (x - xi).abs().powf(gamma)
    })
    .with_singularity(xi, Some(gamma));
    for k in 1..=POWER_DERIVATIVES {
        let c = falling(gamma, k);
        let odd = k % 2 == 1;
        f = f.with_derivative(k, move |x: f64| {
            let d = x - xi;
            let s = if odd { d.signum() } else { 1.0 };
            c * s * d.abs().powf(gamma - k as f64)
        });
    }
    f
}

fn signpow(xi: f64, gamma: f64) -> CorpusFunction {
    let sign = |d: f64| if d == 0.0 { 0.0 } else { d.signum() };
    let mut f = CorpusFunction::new(format!("signpow({gamma})"), move |x: f64| {
        let d = x - xi;
        sign(d) * d.abs().powf(gamma)
    })
    .with_singularity(xi, Some(gamma));
    for k in 1..=POWER_DERIVATIVES {
        let c = falling(gamma, k);
        let odd = k % 2 == 1;
        f = f.with_derivative(k, move |x: f64| {
            let d = x - xi;
            let s = if odd { 1.0 } else { sign(d) };
            c * s * d.abs().powf(gamma - k as f64)
        });
    }
    f
}

/// Looks up a builtin by name; `xi` is the singularity of the power-type
/// members and is recorded on every member.
pub fn lookup(spec: &str, xi: f64) -> Result<CorpusFunction> {
    let (name, gamma) = parse_name(spec)?;
    let power = |gamma: Option<f64>| -> Result<f64> {
        let g = gamma.unwrap_or(DEFAULT_GAMMA);
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("`{name}` needs gamma > 0, got {g}")));
        }
        Ok(g)
    };
    let plain = |f: CorpusFunction| -> Result<CorpusFunction> {
        match gamma {
            Some(_) => Err(Error::Config(format!("`{name}` takes no exponent"))),
            None => Ok(f.with_singularity(xi, None)),
        }
    };
    match name {
        "abspow" => Ok(abspow(xi, power(gamma)?)),
        "signpow" => Ok(signpow(xi, power(gamma)?)),
        "sin" => plain(
            CorpusFunction::new("sin", |x: f64| (PI * x).sin())
                .with_derivative(1, |x| PI * (PI * x).cos())
                .with_derivative(2, |x| -PI * PI * (PI * x).sin())
                .with_derivative(3, |x| -PI.powi(3) * (PI * x).cos())
                .with_derivative(4, |x| PI.powi(4) * (PI * x).sin()),
        ),
        "poly3" => plain(
            CorpusFunction::new("poly3", |x: f64| x * x * x)
                .with_derivative(1, |x| 3.0 * x * x)
                .with_derivative(2, |x| 6.0 * x)
                .with_derivative(3, |_| 6.0)
                .with_derivative(4, |_| 0.0),
        ),
        "linear" => plain(
            CorpusFunction::new("linear", |x: f64| 2.0 * x - 1.0)
                .with_derivative(1, |_| 2.0)
                .with_derivative(2, |_| 0.0)
                .with_derivative(3, |_| 0.0)
                .with_derivative(4, |_| 0.0),
        ),
        "constant" => plain(
            CorpusFunction::new("constant", |_: f64| 1.0)
                .with_derivative(1, |_| 0.0)
                .with_derivative(2, |_| 0.0)
                .with_derivative(3, |_| 0.0)
                .with_derivative(4, |_| 0.0),
        ),
        _ => Err(Error::Config(format!("unknown corpus function `{name}`"))),
    }
}

/// `|w̄ f|` at `ξ ± 10^{−k}`, `k = 3..=8`, the larger side per `k`.
pub fn approach_trace(f: &CorpusFunction, sw: &SingularWeight) -> Vec<f64> {
    (3..=8)
        .map(|k| {
            let d = 10f64.powi(-k);
            let at = |x: f64| (sw.eval(x) * f.value(x)).abs();
            at(sw.xi - d).max(at(sw.xi + d))
        })
        .collect()
}

/// `lim_{x→ξ} w̄(x) f(x) = 0`, judged on [`approach_trace`]: the trace must
/// be nonincreasing and shrink by all but one decade of the weight's own
/// decay.
pub fn vanishes_at_singularity(f: &CorpusFunction, sw: &SingularWeight) -> bool {
    let trace = approach_trace(f, sw);
    let monotone = trace.windows(2).all(|w| w[1] <= w[0]);
    let decay = 10f64.powf(-4.0 * sw.alpha);
    monotone && trace[5] <= decay * trace[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_exponents() {
        let f = lookup("abspow(2.5)", 0.3).unwrap();
        assert_eq!(f.gamma(), Some(2.5));
        assert_eq!(f.xi(), Some(0.3));
        assert!((f.value(0.7) - 0.4f64.powf(2.5)).abs() < 1e-15);
        assert_eq!(lookup("abspow", 0.5).unwrap().gamma(), Some(DEFAULT_GAMMA));
        assert_eq!(lookup("signpow(1)", 0.5).unwrap().value(0.25), -0.25);
        assert!(matches!(lookup("abspow(-1)", 0.5), Err(Error::Config(_))));
        assert!(matches!(lookup("abspow(0)", 0.5), Err(Error::Config(_))));
        assert!(matches!(lookup("abspow(x)", 0.5), Err(Error::Config(_))));
        assert!(matches!(lookup("sin(2)", 0.5), Err(Error::Config(_))));
        assert!(matches!(lookup("cosh", 0.5), Err(Error::Config(_))));
        for (name, _) in BUILTINS {
            assert!(lookup(name, 0.5).unwrap().is_bounded());
        }
    }

    #[test]
    fn derivative_metadata_matches_differences() {
        for name in ["abspow(3.5)", "signpow(3.5)", "sin", "poly3", "linear", "constant"] {
            let f = lookup(name, 0.4).unwrap();
            for k in 1..=POWER_DERIVATIVES {
                let lower = f.derivative(k - 1).unwrap();
                let d = f.derivative(k).unwrap();
                for x in [0.1, 0.33, 0.47, 0.8] {
                    let h = 1e-5;
                    let fd = (lower(x + h) - lower(x - h)) / (2.0 * h);
                    let exact = d(x);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * exact.abs().max(1.0),
                        "{name} k={k} x={x}: {fd} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn members_vanish_under_the_weight() {
        for alpha in [0.25, 1.0, 2.0] {
            let sw = SingularWeight::new(0.5, alpha).unwrap();
            for (name, _) in BUILTINS {
                let f = lookup(name, 0.5).unwrap();
                assert!(vanishes_at_singularity(&f, &sw), "{name} alpha={alpha}");
            }
        }
    }
}
