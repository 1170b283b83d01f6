//! Model parameters and the exponent type used for γ and α.
//!
//! Exponents remember an exact rational value when they were given as one
//! ("1/3", "2", "0.25"), so that the exponent set P can be enumerated in exact
//! arithmetic. Anything involving `sqrt(..)` is kept as a float only.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real {
    value: f64,
    exact: Option<Rational64>,
}

impl Real {
    pub fn float(value: f64) -> Self {
        Real { value, exact: None }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        let q = Rational64::new(num, den);
        Real { value: *q.numer() as f64 / *q.denom() as f64, exact: Some(q) }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Rational64> {
        self.exact
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real::float(v)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(q) if *q.denom() == 1 => write!(f, "{}", q.numer()),
            Some(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_rational(a)?;
        let b = parse_rational(b)?;
        if *b.numer() == 0 {
            return None;
        }
        return Some(a / b);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if body.is_empty() || body.contains(['e', 'E']) {
        return None;
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if frac.len() > 15 {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let q = Rational64::new(digits, 10_i64.pow(frac.len() as u32));
    Some(if neg { -q } else { q })
}

/// Float evaluation of products/quotients of numbers and `sqrt(k)`.
fn parse_float_expr(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.rsplit_once('/') {
        return Some(parse_float_expr(a)? / parse_float_expr(b)?);
    }
    if let Some((a, b)) = s.split_once('*') {
        return Some(parse_float_expr(a)? * parse_float_expr(b)?);
    }
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        return Some(parse_float_expr(inner)?.sqrt());
    }
    s.parse().ok()
}

impl FromStr for Real {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(q) = parse_rational(s) {
            return Ok(Real { value: *q.numer() as f64 / *q.denom() as f64, exact: Some(q) });
        }
        parse_float_expr(s)
            .filter(|v| v.is_finite())
            .map(Real::float)
            .ok_or_else(|| Error::Config(format!("cannot parse number '{s}'")))
    }
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self.exact {
            Some(_) => ser.serialize_str(&self.to_string()),
            None => ser.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Int(i) => Ok(Real::ratio(i, 1)),
            Raw::Num(v) => Ok(Real::float(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Physical and scaling parameters.
///
/// `h = 0` denotes the semiclassical limit (no ε attached).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    pub n: usize,
    pub gamma: Real,
    pub alpha: Real,
    pub lambda: f64,
    pub eps: Option<f64>,
    pub h: f64,
    pub t_final: f64,
}

impl ModelParams {
    /// Parameters without a semiclassical scale. Validates Assumption-range
    /// constraints on (n, γ, α).
    pub fn new(n: usize, gamma: impl Into<Real>, alpha: impl Into<Real>, lambda: f64) -> Result<Self> {
        let p = ModelParams {
            n,
            gamma: gamma.into(),
            alpha: alpha.into(),
            lambda,
            eps: None,
            h: 0.0,
            t_final: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParams(format!("eps must lie in (0,1), got {eps}")));
        }
        self.eps = Some(eps);
        self.h = eps.powf(1.0 - self.alpha.value() / self.gamma.value());
        Ok(self)
    }

    pub fn with_h(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParams(format!("h must lie in (0,1), got {h}")));
        }
        self.eps = Some(h.powf(1.0 / (1.0 - self.alpha.value() / self.gamma.value())));
        self.h = h;
        Ok(self)
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.value()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    /// Moving initial time τ₀ = h^{α/(γ−α)}; zero in the limit h = 0.
    pub fn tau0(&self) -> f64 {
        if self.h == 0.0 {
            0.0
        } else {
            self.h.powf(self.alpha() / (self.gamma() - self.alpha()))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, g, a) = (self.n as f64, self.gamma(), self.alpha());
        if self.n < 3 {
            return Err(Error::InvalidParams(format!("n = {} < 3", self.n)));
        }
        let lower = f64::max(1.0, n / 2.0 - 2.0);
        if !(g > lower && g <= n - 2.0) {
            return Err(Error::InvalidParams(format!(
                "gamma = {g} outside ({lower}, {}] for n = {}",
                n - 2.0,
                self.n
            )));
        }
        if !(a > 0.0 && a < g) {
            return Err(Error::InvalidParams(format!("alpha = {a} outside (0, gamma = {g})")));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParams("lambda is not finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_and_irrational() {
        let a: Real = "1/3".parse().unwrap();
        assert_eq!(a.exact(), Some(Rational64::new(1, 3)));
        let b: Real = "0.25".parse().unwrap();
        assert_eq!(b.exact(), Some(Rational64::new(1, 4)));
        let c: Real = "sqrt(3)/4".parse().unwrap();
        assert!(c.exact().is_none());
        assert!((c.value() - 3f64.sqrt() / 4.0).abs() < 1e-16);
        assert!("abc".parse::<Real>().is_err());
    }

    #[test]
    fn scaling_relations() {
        let p = ModelParams::new(4, Real::ratio(2, 1), Real::ratio(1, 3), 1.0).unwrap().with_eps(1e-3).unwrap();
        assert!((p.h - 1e-3f64.powf(5.0 / 6.0)).abs() < 1e-15);
        assert!((p.tau0() - 1e-3f64.powf(1.0 / 6.0)).abs() < 1e-14);
        let q = p.with_h(p.h).unwrap();
        assert!((q.eps.unwrap() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(4, 2.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(4, 2.0, 2.0, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, 0.5, 1.0).is_err());
        assert!(ModelParams::new(5, 3.0, 2.0, 1.0).is_ok());
    }
}
