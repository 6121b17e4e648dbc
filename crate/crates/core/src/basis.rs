//! Support-function families `h(x) = {h_1, ..., h_m}` with analytic
//! derivatives of any order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::freefn::{EvalError, SymbolicFunction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BasisError {
    #[error("basis member {member} ({name}) is undefined at x = {x} for derivative order {order}")]
    UndefinedAt {
        member: usize,
        name: String,
        x: f64,
        order: usize,
    },
    #[error("basis index {index} out of range for a family of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("a basis family needs at least one member")]
    Empty,
    #[error("invalid basis descriptor '{0}'")]
    Descriptor(String),
}

/// One support function.
#[derive(Clone)]
pub enum BasisMember {
    /// `x^k`
    Monomial(u32),
    /// `x^k / k!`
    ScaledMonomial(u32),
    Exp,
    Sin,
    Cos,
    /// Natural log, defined for `x > 0`.
    Ln,
    /// `x^(-k)`, undefined at zero.
    Reciprocal(u32),
    /// Any parsed expression; derivatives come from symbolic differentiation.
    Composite(SymbolicFunction),
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `k (k-1) ... (k-r+1)`, exact for the small integers involved.
fn falling(k: u32, r: u32) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (k - i) as f64)
}

fn powi(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

impl BasisMember {
    /// Derivative of the given order at `x`, or `None` where undefined.
    fn try_eval(&self, x: f64, order: usize) -> Result<f64, EvalError> {
        let undefined = |reason: &str| EvalError::Domain {
            x,
            reason: reason.to_string(),
        };
        let r = order as u32;
        let v = match self {
            BasisMember::Monomial(k) => {
                if r > *k {
                    0.0
                } else {
                    falling(*k, r) * powi(x, k - r)
                }
            }
            BasisMember::ScaledMonomial(k) => {
                if r > *k {
                    0.0
                } else {
                    powi(x, k - r) / factorial(k - r)
                }
            }
            BasisMember::Exp => x.exp(),
            BasisMember::Sin => match order % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            BasisMember::Cos => match order % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            },
            BasisMember::Ln => {
                if x <= 0.0 {
                    return Err(undefined("ln needs x > 0"));
                }
                if order == 0 {
                    x.ln()
                } else {
                    // (-1)^(r-1) (r-1)! / x^r
                    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
                    sign * factorial(r - 1) / powi(x, r)
                }
            }
            BasisMember::Reciprocal(k) => {
                if x == 0.0 {
                    return Err(undefined("x^-k is singular at 0"));
                }
                // (-1)^r k (k+1) ... (k+r-1) x^(-k-r)
                let rising = (0..r).fold(1.0, |acc, i| acc * (k + i) as f64);
                let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * rising / powi(x, k + r)
            }
            BasisMember::Composite(f) => return f.eval(x, order),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(undefined("non-finite value"))
        }
    }

    /// Descriptor text, as accepted by [`BasisMember::from_str`].
    pub fn descriptor(&self) -> String {
        match self {
            BasisMember::Monomial(k) => format!("monomial:{k}"),
            BasisMember::ScaledMonomial(k) => format!("scaled-monomial:{k}"),
            BasisMember::Exp => "exp".into(),
            BasisMember::Sin => "sin".into(),
            BasisMember::Cos => "cos".into(),
            BasisMember::Ln => "ln".into(),
            BasisMember::Reciprocal(k) => format!("recip:{k}"),
            BasisMember::Composite(f) => format!("expr:{}", f.source()),
        }
    }

    pub fn is_monomial(&self) -> bool {
        matches!(self, BasisMember::Monomial(_) | BasisMember::ScaledMonomial(_))
    }
}

impl fmt::Debug for BasisMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl fmt::Display for BasisMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for BasisMember {
    type Err = BasisError;

    /// Accepts `monomial:k`, `scaled-monomial:k`, `exp`, `sin`, `cos`, `ln`,
    /// `recip:k` and `expr:<text>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_with(s, "x", &BTreeMap::new())
    }
}

impl BasisMember {
    /// Like [`str::parse`], with `expr:` members read in `variable` and with
    /// `consts` bound.
    pub fn parse_with(
        s: &str,
        variable: &str,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Self, BasisError> {
        let bad = || BasisError::Descriptor(s.to_string());
        let s = s.trim();
        if let Some(text) = s.strip_prefix("expr:") {
            return SymbolicFunction::parse_with(text, variable, consts)
                .map(BasisMember::Composite)
                .map_err(|e| BasisError::Descriptor(format!("{s}: {e}")));
        }
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a.trim().parse::<u32>().map_err(|_| bad())?)),
            None => (s, None),
        };
        Ok(match (kind, arg) {
            ("monomial", Some(k)) => BasisMember::Monomial(k),
            ("scaled-monomial", Some(k)) => BasisMember::ScaledMonomial(k),
            ("recip", Some(k)) if k > 0 => BasisMember::Reciprocal(k),
            ("exp", None) => BasisMember::Exp,
            ("sin", None) => BasisMember::Sin,
            ("cos", None) => BasisMember::Cos,
            ("ln", None) => BasisMember::Ln,
            _ => return Err(bad()),
        })
    }
}

/// An ordered, non-empty family of support functions. Member order fixes
/// the column order of every matrix built from the family.
#[derive(Debug, Clone)]
pub struct BasisFamily {
    members: Vec<BasisMember>,
}

impl BasisFamily {
    pub fn new(members: Vec<BasisMember>) -> Result<Self, BasisError> {
        if members.is_empty() {
            return Err(BasisError::Empty);
        }
        Ok(Self { members })
    }

    /// `{1, x, ..., x^(n-1)}`
    pub fn monomials(n: usize) -> Self {
        Self::from_powers(0..n as u32)
    }

    pub fn from_powers(powers: impl IntoIterator<Item = u32>) -> Self {
        let members: Vec<_> = powers.into_iter().map(BasisMember::Monomial).collect();
        Self::new(members).expect("at least one power")
    }

    /// Parses a list of descriptors.
    pub fn from_descriptors<S: AsRef<str>>(descriptors: &[S]) -> Result<Self, BasisError> {
        let members = descriptors
            .iter()
            .map(|d| d.as_ref().parse())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(members)
    }

    pub fn from_descriptors_with<S: AsRef<str>>(
        descriptors: &[S],
        variable: &str,
        consts: &BTreeMap<String, f64>,
    ) -> Result<Self, BasisError> {
        let members = descriptors
            .iter()
            .map(|d| BasisMember::parse_with(d.as_ref(), variable, consts))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BasisMember] {
        &self.members
    }

    /// `d^order h_index / dx^order` at `x`. `index` is zero-based.
    pub fn eval_member(&self, index: usize, x: f64, order: usize) -> Result<f64, BasisError> {
        let member = self.members.get(index).ok_or(BasisError::IndexOutOfRange {
            index,
            size: self.len(),
        })?;
        member
            .try_eval(x, order)
            .map_err(|_| BasisError::UndefinedAt {
                member: index,
                name: member.descriptor(),
                x,
                order,
            })
    }

    /// The row `h^(order)(x)`.
    pub fn eval_row(&self, x: f64, order: usize) -> Result<Vec<f64>, BasisError> {
        (0..self.len()).map(|i| self.eval_member(i, x, order)).collect()
    }

    pub fn descriptors(&self) -> Vec<String> {
        self.members.iter().map(BasisMember::descriptor).collect()
    }
}
