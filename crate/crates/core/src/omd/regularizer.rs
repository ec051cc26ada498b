use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied mirror map given by its value, derivative and inverse derivative.
#[derive(Clone)]
pub struct CustomMap {
    name: String,
    value: ScalarMap,
    derivative: ScalarMap,
    inverse_derivative: ScalarMap,
}

#[derive(Clone)]
enum Kind {
    /// `R(z) = scale·z²/2`.
    Quadratic {
        scale: f64,
    },
    /// `R(z) = z·ln z` on `z > 0`.
    Entropic,
    Custom(CustomMap),
}

/// A strongly convex mirror map `R` together with its strong-convexity modulus.
///
/// The modulus follows the convention `R(x) - R(y) - R'(y)(x - y) ≥ (sigma/2)(x - y)²`.
#[derive(Clone)]
pub struct Regularizer {
    kind: Kind,
    sigma: f64,
}

impl fmt::Debug for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Quadratic { scale } => write!(f, "Quadratic {{ scale: {scale} }}"),
            Kind::Entropic => write!(f, "Entropic {{ sigma: {} }}", self.sigma),
            Kind::Custom(c) => write!(f, "Custom {{ name: {:?}, sigma: {} }}", c.name, self.sigma),
        }
    }
}

impl PartialEq for Regularizer {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Quadratic { scale: a }, Kind::Quadratic { scale: b }) => a == b,
            (Kind::Entropic, Kind::Entropic) => self.sigma == other.sigma,
            // closures have no identity worth comparing
            _ => false,
        }
    }
}

impl Regularizer {
    /// `R(z) = scale·z²/2`, which is `scale`-strongly convex.
    pub fn quadratic(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Configuration(format!(
                "quadratic regularizer scale must be positive, got {scale}"
            )));
        }
        Ok(Regularizer {
            kind: Kind::Quadratic { scale },
            sigma: scale,
        })
    }

    /// Negative entropy `R(z) = z ln z`, strongly convex with modulus `1/p_hi` on `(0, p_hi]`.
    pub fn entropic(p_hi: f64) -> Result<Self> {
        if !(p_hi > 0.0 && p_hi.is_finite()) {
            return Err(Error::Configuration("entropic map needs a positive upper price".into()));
        }
        Ok(Regularizer {
            kind: Kind::Entropic,
            sigma: 1.0 / p_hi,
        })
    }

    pub fn custom<V, D, I>(
        name: impl Into<String>,
        value: V,
        derivative: D,
        inverse_derivative: I,
        sigma: f64,
    ) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Configuration(format!(
                "strong-convexity modulus must be positive, got {sigma}"
            )));
        }
        Ok(Regularizer {
            kind: Kind::Custom(CustomMap {
                name: name.into(),
                value: Arc::new(value),
                derivative: Arc::new(derivative),
                inverse_derivative: Arc::new(inverse_derivative),
            }),
            sigma,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Scale of a quadratic map, `None` otherwise.
    pub fn quadratic_scale(&self) -> Option<f64> {
        match self.kind {
            Kind::Quadratic { scale } => Some(scale),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Quadratic { scale } => format!("quadratic(scale={scale})"),
            Kind::Entropic => format!("entropic(sigma={})", self.sigma),
            Kind::Custom(c) => format!("custom({}, sigma={})", c.name, self.sigma),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { scale } => 0.5 * scale * x * x,
            Kind::Entropic => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            Kind::Custom(c) => (c.value)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { scale } => scale * x,
            Kind::Entropic => 1.0 + x.ln(),
            Kind::Custom(c) => (c.derivative)(x),
        }
    }

    pub fn inverse_derivative(&self, v: f64) -> f64 {
        match &self.kind {
            Kind::Quadratic { scale } => v / scale,
            Kind::Entropic => (v - 1.0).exp(),
            Kind::Custom(c) => (c.inverse_derivative)(v),
        }
    }

    /// Minimizer of `R` over `[lo, hi]`.
    pub fn argmin_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let x = match self.kind {
            Kind::Quadratic { .. } => 0.0,
            Kind::Entropic => (-1.0f64).exp(),
            Kind::Custom(_) => self.inverse_derivative(0.0),
        };
        if x.is_nan() {
            return Err(Error::Configuration(format!(
                "{}: cannot locate the unconstrained minimizer",
                self.describe()
            )));
        }
        Ok(x.clamp(lo, hi))
    }

    /// Spot-checks that `inverse_derivative ∘ derivative` is the identity and that
    /// the derivative is strictly increasing on a grid over `[lo, hi]`.
    pub fn check_on_grid(&self, lo: f64, hi: f64, points: usize) -> Result<()> {
        let n = points.max(2);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..n {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let d = self.derivative(x);
            let back = self.inverse_derivative(d);
            if !((back - x).abs() <= 1e-10 * x.abs().max(1.0)) {
                return Err(Error::Configuration(format!(
                    "{}: inverse_derivative(derivative({x})) = {back}",
                    self.describe()
                )));
            }
            if !(d > prev) {
                return Err(Error::Configuration(format!(
                    "{}: derivative not strictly increasing near {x}",
                    self.describe()
                )));
            }
            prev = d;
        }
        Ok(())
    }
}

/// One mirror-descent proxy update: the `y` with `R'(y) = R'(p) - eps·g`.
pub fn mirror_step(reg: &Regularizer, p: f64, eps: f64, g: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Configuration(format!(
            "step size must be nonnegative, got {eps}"
        )));
    }
    if let Kind::Quadratic { scale } = reg.kind {
        return Ok(p - eps * g / scale);
    }
    if eps == 0.0 || g == 0.0 {
        return Ok(p);
    }
    let target = reg.derivative(p) - eps * g;
    let y = reg.inverse_derivative(target);
    if !y.is_finite() || (reg.derivative(y) - target).abs() > 1e-8 * (1.0 + target.abs()) {
        return Err(Error::Configuration(format!(
            "{}: mirror map not invertible at R' = {target}",
            reg.describe()
        )));
    }
    Ok(y)
}
