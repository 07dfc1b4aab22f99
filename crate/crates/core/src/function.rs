//! Real functions on `[0, 1]` as consumed by the operators.

use std::fmt;
use std::sync::Arc;

/// Anything that can be sampled on `[0, 1]`.
///
/// Implemented for plain closures and for [`CorpusFunction`].
pub trait RealFunction {
    fn value(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + ?Sized> RealFunction for F {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named test function with singularity metadata and, where known,
/// analytic derivatives of orders `1..=4`.
#[derive(Clone)]
pub struct CorpusFunction {
    name: String,
    eval: Callable,
    xi: Option<f64>,
    gamma: Option<f64>,
    derivs: Vec<Callable>,
    bounded: bool,
}

impl CorpusFunction {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            xi: None,
            gamma: None,
            derivs: Vec::new(),
            bounded: true,
        }
    }

    pub fn with_singularity(mut self, xi: f64, gamma: Option<f64>) -> Self {
        self.xi = Some(xi);
        self.gamma = gamma;
        self
    }

    /// Registers the derivative of order `order` (1-based, consecutive).
    pub fn with_derivative<F>(mut self, order: usize, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        assert_eq!(order, self.derivs.len() + 1, "derivatives must be added in order");
        self.derivs.push(Arc::new(d));
        self
    }

    pub fn unbounded(mut self) -> Self {
        self.bounded = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn xi(&self) -> Option<f64> {
        self.xi
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// Highest derivative order with analytic metadata.
    pub fn derivative_orders(&self) -> usize {
        self.derivs.len()
    }

    /// Analytic derivative of order `order`; order 0 is the function itself.
    pub fn derivative(&self, order: usize) -> Option<impl Fn(f64) -> f64 + '_> {
        let f: &Callable = if order == 0 {
            &self.eval
        } else {
            self.derivs.get(order - 1)?
        };
        Some(move |x| f(x))
    }

    /// Returns `c · f`, scaling the derivative metadata as well.
    pub fn scaled(&self, c: f64) -> Self {
        let base = self.eval.clone();
        let derivs = self
            .derivs
            .iter()
            .map(|d| {
                let d = d.clone();
                Arc::new(move |x: f64| c * d(x)) as Callable
            })
            .collect();
        Self {
            name: format!("{c}*{}", self.name),
            eval: Arc::new(move |x| c * base(x)),
            xi: self.xi,
            gamma: self.gamma,
            derivs,
            bounded: self.bounded,
        }
    }
}

impl RealFunction for CorpusFunction {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
}

impl fmt::Debug for CorpusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusFunction")
            .field("name", &self.name)
            .field("xi", &self.xi)
            .field("gamma", &self.gamma)
            .field("derivative_orders", &self.derivs.len())
            .field("bounded", &self.bounded)
            .finish()
    }
}
