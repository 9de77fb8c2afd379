use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Estimation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Cesaro,
    Zeta,
    Heat,
    Lidskii,
    PPower,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cesaro => "cesaro",
            Method::Zeta => "zeta",
            Method::Heat => "heat",
            Method::Lidskii => "lidskii",
            Method::PPower => "p_power",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurability {
    Yes,
    No,
    Undecided,
}

/// A real value, or a complex one for eigenvalue routes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceValue {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl TraceValue {
    pub fn re(self) -> f64 {
        match self {
            TraceValue::Real(v) => v,
            TraceValue::Complex { re, .. } => re,
        }
    }

    pub fn im(self) -> f64 {
        match self {
            TraceValue::Real(_) => 0.0,
            TraceValue::Complex { im, .. } => im,
        }
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }

    fn scaled(self, c: f64) -> Self {
        match self {
            TraceValue::Real(v) => TraceValue::Real(v * c),
            TraceValue::Complex { re, im } => TraceValue::Complex { re: re * c, im: im * c },
        }
    }
}

/// Output of one estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub method: Method,
    pub value: TraceValue,
    /// Bounds on the real part.
    pub interval: (f64, f64),
    pub measurable: Measurability,
    pub p: f64,
    pub diagnostics: BTreeMap<String, f64>,
    pub config_echo: BTreeMap<String, serde_json::Value>,
}

impl TraceReport {
    pub(crate) fn new(method: Method, value: TraceValue, interval: (f64, f64), p: f64) -> Self {
        Self {
            method,
            value,
            interval,
            measurable: Measurability::Undecided,
            p,
            diagnostics: BTreeMap::new(),
            config_echo: BTreeMap::new(),
        }
    }

    pub(crate) fn diag(&mut self, key: &str, v: f64) {
        self.diagnostics.insert(key.to_string(), v);
    }

    pub(crate) fn echo(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(serde_json::Value::Null);
        self.config_echo.insert(key.to_string(), v);
    }

    /// Multiplies value and interval by `c`; diagnostics listed in
    /// `scaled_keys` are multiplied too. Used to apply the sequence scale
    /// after computing on the normalized generator.
    pub(crate) fn scaled(mut self, c: f64, scaled_keys: &[&str]) -> Self {
        if c == 1.0 {
            return self;
        }
        self.value = self.value.scaled(c);
        let (a, b) = (self.interval.0 * c, self.interval.1 * c);
        self.interval = (a.min(b), a.max(b));
        for key in scaled_keys {
            if let Some(v) = self.diagnostics.get_mut(*key) {
                *v *= c;
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut r = TraceReport::new(Method::PPower, TraceValue::Real(1.5), (1.0, 2.0), 2.0);
        r.diag("grid_size", 3.0);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["method"], "p_power");
        assert_eq!(v["value"], 1.5);
        assert_eq!(v["measurable"], "undecided");
        assert_eq!(v["interval"], serde_json::json!([1.0, 2.0]));
        let c = TraceValue::Complex { re: 0.0, im: 1.0 };
        assert_eq!(serde_json::to_value(c).unwrap(), serde_json::json!({"re": 0.0, "im": 1.0}));
        let back: TraceReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
