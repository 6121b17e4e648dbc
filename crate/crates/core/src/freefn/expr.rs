//! Expression trees in one variable with symbolic differentiation.

use std::fmt;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// A node of a univariate expression tree.
///
/// Named constants (`pi`, `e`, user bindings) are folded into [`Expr::Const`]
/// at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Simplifying constructors. They only fold constants and drop neutral
// elements, which is enough to keep repeated derivatives compact.

pub fn constant(v: f64) -> Expr {
    Expr::Const(v)
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(v) => Expr::Const(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(0.0), e) | (e, Expr::Const(0.0)) => e,
        (a, Expr::Neg(b)) => sub(a, *b),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (e, Expr::Const(0.0)) => e,
        (Expr::Const(0.0), e) => neg(e),
        (a, Expr::Neg(b)) => add(a, *b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(0.0), _) | (_, Expr::Const(0.0)) => Expr::Const(0.0),
        (Expr::Const(1.0), e) | (e, Expr::Const(1.0)) => e,
        (Expr::Const(m), e) | (e, Expr::Const(m)) if m == -1.0 => neg(e),
        // c1 * (c2 * e) -> (c1 c2) * e
        (Expr::Const(c1), Expr::Mul(l, r)) | (Expr::Mul(l, r), Expr::Const(c1))
            if matches!(*l, Expr::Const(_)) =>
        {
            let Expr::Const(c2) = *l else { unreachable!() };
            mul(Expr::Const(c1 * c2), *r)
        }
        (e, Expr::Const(c)) => Expr::Mul(Box::new(Expr::Const(c)), Box::new(e)),
        (Expr::Neg(a), Expr::Neg(b)) => mul(*a, *b),
        (Expr::Neg(a), b) | (b, Expr::Neg(a)) => neg(mul(*a, b)),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
        (Expr::Const(0.0), _) => Expr::Const(0.0),
        (e, Expr::Const(1.0)) => e,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (_, Expr::Const(0.0)) => Expr::Const(1.0),
        (e, Expr::Const(1.0)) => e,
        (Expr::Const(x), Expr::Const(y)) if x > 0.0 => Expr::Const(x.powf(y)),
        (a, b) => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl Expr {
    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Symbolic derivative with respect to the variable.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) => constant(0.0),
            Expr::Var => constant(1.0),
            Expr::Neg(a) => neg(a.derivative()),
            Expr::Add(a, b) => add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Expr::Div(a, b) => {
                let da = a.derivative();
                let db = b.derivative();
                if db.is_const() && db == constant(0.0) {
                    div(da, (**b).clone())
                } else {
                    div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        pow((**b).clone(), constant(2.0)),
                    )
                }
            }
            Expr::Pow(base, exponent) => {
                let du = base.derivative();
                if let Expr::Const(c) = **exponent {
                    // c u^(c-1) u'
                    mul(
                        mul(constant(c), pow((**base).clone(), constant(c - 1.0))),
                        du,
                    )
                } else {
                    // u^v (v' ln u + v u'/u)
                    let dv = exponent.derivative();
                    mul(
                        self.clone(),
                        add(
                            mul(dv, call(Func::Ln, (**base).clone())),
                            div(mul((**exponent).clone(), du), (**base).clone()),
                        ),
                    )
                }
            }
            Expr::Call(f, a) => {
                let du = a.derivative();
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Exp => self.clone(),
                    Func::Ln => div(constant(1.0), u),
                    Func::Sqrt => div(constant(0.5), self.clone()),
                    // u/|u|, undefined at u = 0
                    Func::Abs => div(u.clone(), call(Func::Abs, u)),
                };
                mul(outer, du)
            }
        }
    }

    /// Evaluates the tree at `x`, reporting domain violations instead of
    /// returning NaN or infinities.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(EvalError::domain(x, "division by zero"));
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let e = b.eval(x)?;
                eval_pow(base, e, x)?
            }
            Expr::Call(f, a) => {
                let u = a.eval(x)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Ln => {
                        if u <= 0.0 {
                            return Err(EvalError::domain(x, "ln of a nonpositive value"));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u < 0.0 {
                            return Err(EvalError::domain(x, "sqrt of a negative value"));
                        }
                        u.sqrt()
                    }
                    Func::Abs => u.abs(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::domain(x, "non-finite value"))
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

fn eval_pow(base: f64, e: f64, x: f64) -> Result<f64, EvalError> {
    if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
        if base == 0.0 && e < 0.0 {
            return Err(EvalError::domain(x, "zero raised to a negative power"));
        }
        return Ok(base.powi(e as i32));
    }
    if base < 0.0 {
        return Err(EvalError::domain(x, "negative base with fractional exponent"));
    }
    if base == 0.0 && e < 0.0 {
        return Err(EvalError::domain(x, "zero raised to a negative power"));
    }
    Ok(base.powf(e))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "x"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 4)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 5)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
