use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FactorId;

/// A numeric test. On the wire: `{"op": "ge", "value": 2500}` or
/// `{"op": "between", "value": [low, high]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Condition {
    Lt(f64),
    Le(f64),
    Eq(f64),
    Ge(f64),
    Gt(f64),
    /// Inclusive on both ends.
    Between(f64, f64),
}

impl Condition {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Condition::Lt(b) => v < b,
            Condition::Le(b) => v <= b,
            Condition::Eq(b) => v == b,
            Condition::Ge(b) => v >= b,
            Condition::Gt(b) => v > b,
            Condition::Between(lo, hi) => lo <= v && v <= hi,
        }
    }

    /// Bounds must be finite; `between` needs `low <= high`.
    pub fn check(&self) -> Result<()> {
        let bounds: &[f64] = match self {
            Condition::Lt(b) | Condition::Le(b) | Condition::Eq(b) | Condition::Ge(b) | Condition::Gt(b) => std::slice::from_ref(b),
            Condition::Between(lo, hi) => {
                if lo > hi {
                    return Err(Error::InvalidPredicate(format!("between bounds out of order: {lo} > {hi}")));
                }
                &[*lo, *hi]
            }
        };
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidPredicate("bounds must be finite".into()));
        }
        Ok(())
    }
}

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidPredicate(format!("`{}` is not a number", s.trim())))
}

impl FromStr for Condition {
    type Err = Error;

    /// `<7`, `>= 2500`, `= 0`, `between 1 5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("between") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [lo, hi] = parts.as_slice() else {
                return Err(Error::InvalidPredicate(format!("`{s}`: between takes two numbers")));
            };
            let cond = Condition::Between(number(lo)?, number(hi)?);
            cond.check()?;
            return Ok(cond);
        }
        let ops: [(&str, fn(f64) -> Condition); 5] = [
            ("<=", Condition::Le),
            (">=", Condition::Ge),
            ("<", Condition::Lt),
            (">", Condition::Gt),
            ("=", Condition::Eq),
        ];
        for (op, make) in ops {
            if let Some(rest) = s.strip_prefix(op) {
                return Ok(make(number(rest)?));
            }
        }
        Err(Error::InvalidPredicate(format!("`{s}`: expected one of < <= = >= > between")))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Lt(b) => write!(f, "<{b}"),
            Condition::Le(b) => write!(f, "<={b}"),
            Condition::Eq(b) => write!(f, "={b}"),
            Condition::Ge(b) => write!(f, ">={b}"),
            Condition::Gt(b) => write!(f, ">{b}"),
            Condition::Between(lo, hi) => write!(f, "between {lo} {hi}"),
        }
    }
}

/// A condition on one factor's value. Predicates in a query are conjunctive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    #[serde(rename = "factor")]
    pub factor_id: FactorId,
    #[serde(flatten)]
    pub condition: Condition,
}

impl Predicate {
    pub fn new(factor_id: impl Into<FactorId>, condition: Condition) -> Self {
        Self { factor_id: factor_id.into(), condition }
    }
}

impl FromStr for Predicate {
    type Err = Error;

    /// `factor op number` or `factor between a b`, e.g. `population>=2500`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(['<', '>', '='])
            .or_else(|| s.find(" between ").map(|i| i + 1))
            .ok_or_else(|| Error::InvalidPredicate(format!("`{s}`: expected `factor op number`")))?;
        let factor = s[..split].trim();
        if factor.is_empty() {
            return Err(Error::InvalidPredicate(format!("`{s}`: missing factor")));
        }
        Ok(Predicate::new(factor, s[split..].parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!("<7".parse::<Condition>().unwrap(), Condition::Lt(7.0));
        assert_eq!(">= 2500".parse::<Condition>().unwrap(), Condition::Ge(2500.0));
        assert_eq!("between 1 5".parse::<Condition>().unwrap(), Condition::Between(1.0, 5.0));
        assert!("between 5 1".parse::<Condition>().is_err());
        assert!("~3".parse::<Condition>().is_err());
        assert!("<abc".parse::<Condition>().is_err());
        assert!("<NaN".parse::<Condition>().is_err());

        let p: Predicate = "inhabitants>=2500".parse().unwrap();
        assert_eq!(p, Predicate::new("inhabitants", Condition::Ge(2500.0)));
        let p: Predicate = "supermarket_count = 0".parse().unwrap();
        assert_eq!(p, Predicate::new("supermarket_count", Condition::Eq(0.0)));
        let p: Predicate = "rate between 2 3.5".parse().unwrap();
        assert_eq!(p, Predicate::new("rate", Condition::Between(2.0, 3.5)));
        assert!(">=3".parse::<Predicate>().is_err());
        assert!("population".parse::<Predicate>().is_err());
    }

    #[test]
    fn display_parses_back() {
        for c in [Condition::Lt(7.0), Condition::Le(-1.5), Condition::Eq(0.0), Condition::Ge(2500.0), Condition::Gt(1e9), Condition::Between(1.0, 2.0)] {
            assert_eq!(c.to_string().parse::<Condition>().unwrap(), c);
        }
    }

    #[test]
    fn wire_format() {
        let p = Predicate::new("population", Condition::Ge(2500.0));
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"factor":"population","op":"ge","value":2500.0}"#);
        let b: Predicate = serde_json::from_str(r#"{"factor":"x","op":"between","value":[1,2]}"#).unwrap();
        assert_eq!(b.condition, Condition::Between(1.0, 2.0));
    }

    #[test]
    fn semantics() {
        assert!(Condition::Between(1.0, 2.0).holds(1.0));
        assert!(Condition::Between(1.0, 2.0).holds(2.0));
        assert!(!Condition::Lt(7.0).holds(7.0));
        assert!(Condition::Le(7.0).holds(7.0));
        assert!(Condition::Eq(0.0).holds(0.0));
    }
}
