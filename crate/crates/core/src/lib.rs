//! Constrained expressions: functions that satisfy a set of linear
//! constraints for every choice of a free function `g(x)`.
//!
//! ```
//! use cexpr::{BasisFamily, ConstrainedExpression, ConstraintSet, FreeFunction};
//! use cexpr::constraints::{derivative_constraint, point_constraint};
//!
//! let set: ConstraintSet = [point_constraint(0.0, 1.0), derivative_constraint(1.0, 1, 0.0)]
//!     .into_iter()
//!     .collect();
//! let g = FreeFunction::parse("sin(x)").unwrap();
//! let y = ConstrainedExpression::build(set, BasisFamily::monomials(2), g).unwrap();
//! assert!((y.evaluate(0.0, 0).unwrap() - 1.0).abs() < 1e-12);
//! assert!(y.evaluate(1.0, 1).unwrap().abs() < 1e-12);
//! ```

pub mod basis;
pub mod cli;
pub mod constraints;
pub mod engine;
pub mod forms;
pub mod freefn;
pub mod linalg;
pub mod problem;
pub mod repro;
pub mod spec;

pub use basis::{BasisError, BasisFamily, BasisMember};
pub use constraints::{ConstraintError, ConstraintSet, ConstraintTerm, LinearConstraint};
pub use engine::{CoefficientMatrix, ConstrainedExpression, EngineError, SupportMatrix};
pub use forms::FormError;
pub use freefn::{EvalError, FreeFunction, ParseError, Univariate};
