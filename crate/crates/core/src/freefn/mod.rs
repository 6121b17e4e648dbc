//! The free function `g(x)`: a small expression language with exact
//! derivatives of any order.
//!
//! A [`FreeFunction`] is either the zero function, a parsed expression, or a
//! linear combination of basis members. Expression derivatives are produced
//! by symbolic differentiation and cached per order, so the `k`-th derivative
//! tree is built once and reused by every later evaluation.

mod expr;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

pub use expr::{Expr, Func};
pub use parse::{parse, parse_with};

use crate::basis::BasisFamily;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: expected {expected}")]
pub struct ParseError {
    /// Byte offset into the input where parsing failed.
    pub position: usize,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error at x = {x}: {reason}")]
    Domain { x: f64, reason: String },
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderExceeded { order: usize, max: usize },
}

impl EvalError {
    pub(crate) fn domain(x: f64, reason: impl Into<String>) -> Self {
        EvalError::Domain {
            x,
            reason: reason.into(),
        }
    }
}

/// A parsed expression with a lazily grown cache of derivative trees.
///
/// Cloning is cheap and clones share the cache.
#[derive(Clone)]
pub struct SymbolicFunction {
    source: Arc<str>,
    derivatives: Arc<RwLock<Vec<Arc<Expr>>>>,
}

impl SymbolicFunction {
    pub fn new(expr: Expr, source: impl Into<Arc<str>>) -> Self {
        Self {
            source: source.into(),
            derivatives: Arc::new(RwLock::new(vec![Arc::new(expr)])),
        }
    }

    /// Parses `text` with `x` as the variable.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::new(parse(text)?, text))
    }

    pub fn parse_with(
        text: &str,
        variable: &str,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Self, ParseError> {
        Ok(Self::new(parse_with(text, variable, consts)?, text))
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// The derivative tree of the given order.
    pub fn derivative_tree(&self, order: usize) -> Arc<Expr> {
        if let Some(t) = self.derivatives.read().expect("derivative cache poisoned").get(order) {
            return Arc::clone(t);
        }
        let mut cache = self.derivatives.write().expect("derivative cache poisoned");
        while cache.len() <= order {
            let next = cache.last().expect("cache holds the base tree").derivative();
            cache.push(Arc::new(next));
        }
        Arc::clone(&cache[order])
    }

    pub fn eval(&self, x: f64, order: usize) -> Result<f64, EvalError> {
        self.derivative_tree(order).eval(x)
    }
}

impl fmt::Debug for SymbolicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SymbolicFunction").field(&self.source).finish()
    }
}

/// `Σ ξ_i h_i(x)` over a basis family.
#[derive(Debug, Clone)]
pub struct Combination {
    basis: BasisFamily,
    coefficients: Vec<f64>,
    max_order: usize,
}

impl Combination {
    /// Panics if the coefficient count differs from the basis size.
    pub fn new(basis: BasisFamily, coefficients: Vec<f64>, max_order: usize) -> Self {
        assert_eq!(
            basis.len(),
            coefficients.len(),
            "one coefficient per basis member"
        );
        Self {
            basis,
            coefficients,
            max_order,
        }
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

#[derive(Debug, Clone)]
pub enum FreeFunction {
    Zero,
    Symbolic(SymbolicFunction),
    Combination(Combination),
}

impl FreeFunction {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        SymbolicFunction::parse(text).map(FreeFunction::Symbolic)
    }

    pub fn parse_with(
        text: &str,
        variable: &str,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Self, ParseError> {
        SymbolicFunction::parse_with(text, variable, consts).map(FreeFunction::Symbolic)
    }

    pub fn combination(basis: BasisFamily, coefficients: Vec<f64>) -> Self {
        FreeFunction::Combination(Combination::new(basis, coefficients, usize::MAX))
    }

    /// Highest derivative order guaranteed to evaluate.
    pub fn max_order(&self) -> usize {
        match self {
            FreeFunction::Zero | FreeFunction::Symbolic(_) => usize::MAX,
            FreeFunction::Combination(c) => c.max_order,
        }
    }

    /// The `order`-th derivative at `x`.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64, EvalError> {
        match self {
            FreeFunction::Zero => Ok(0.0),
            FreeFunction::Symbolic(s) => s.eval(x, order),
            FreeFunction::Combination(c) => {
                if order > c.max_order {
                    return Err(EvalError::OrderExceeded {
                        order,
                        max: c.max_order,
                    });
                }
                let row = c
                    .basis
                    .eval_row(x, order)
                    .map_err(|e| EvalError::domain(x, e.to_string()))?;
                Ok(row.iter().zip(&c.coefficients).map(|(h, k)| h * k).sum())
            }
        }
    }

    pub fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(x, 0)
    }
}

impl From<SymbolicFunction> for FreeFunction {
    fn from(s: SymbolicFunction) -> Self {
        FreeFunction::Symbolic(s)
    }
}

/// Anything that can be evaluated as a scalar function of one variable.
pub trait Univariate: Send + Sync {
    fn value(&self, x: f64) -> Result<f64, EvalError>;
}

impl Univariate for FreeFunction {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(x, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BasisFamily, BasisMember};

    #[test]
    fn chain_rule() {
        let f = FreeFunction::parse("sin(3*x + 1)").unwrap();
        for &x in &[-1.0, 0.0, 0.7, 2.5] {
            let d = f.eval(x, 1).unwrap();
            assert!((d - 3.0 * (3.0 * x + 1.0).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_function() {
        for order in 0..6 {
            assert_eq!(FreeFunction::Zero.eval(1.3, order).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivative_cache_is_shared() {
        let s = SymbolicFunction::parse("exp(2*x)").unwrap();
        let c = s.clone();
        assert!((s.eval(0.0, 5).unwrap() - 32.0).abs() < 1e-12);
        assert_eq!(c.derivatives.read().unwrap().len(), 6);
    }

    #[test]
    fn combination_order_limit() {
        let basis = BasisFamily::new(vec![BasisMember::Exp, BasisMember::Sin]).unwrap();
        let g = FreeFunction::Combination(Combination::new(basis, vec![2.0, -1.0], 2));
        let x: f64 = 0.3;
        assert!((g.eval(x, 2).unwrap() - (2.0 * x.exp() + x.sin())).abs() < 1e-14);
        assert_eq!(
            g.eval(x, 3).unwrap_err(),
            EvalError::OrderExceeded { order: 3, max: 2 }
        );
    }

    #[test]
    fn domain_errors_surface() {
        let f = FreeFunction::parse("ln(x)").unwrap();
        assert!(matches!(f.eval(-1.0, 0), Err(EvalError::Domain { .. })));
        assert!(matches!(f.eval(0.0, 2), Err(EvalError::Domain { .. })));
        let a = FreeFunction::parse("abs(x - 1)").unwrap();
        assert!(a.eval(1.0, 1).is_err());
    }
}
