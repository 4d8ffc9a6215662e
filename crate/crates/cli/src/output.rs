//! Report envelope and number formatting.

use lhv_core::{Law, Outcome};
use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::args::RunConfig;

pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl InvariantCheck {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        InvariantCheck { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub results: Value,
    pub invariant_checks: Vec<InvariantCheck>,
    pub version: String,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.invariant_checks.iter().all(|c| c.passed)
    }

    /// Pretty JSON with every float cut to [`SIGNIFICANT_DIGITS`].
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&round_floats(v)).expect("json value prints");
        s.push('\n');
        s
    }
}

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn law_json(law: &Law) -> Value {
    use Outcome::*;
    json!({
        "p(+,+)": law.get(Plus, Plus),
        "p(+,-)": law.get(Plus, Minus),
        "p(-,+)": law.get(Minus, Plus),
        "p(-,-)": law.get(Minus, Minus),
        "correlator": law.correlator(),
    })
}

pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn nine_significant_digits() {
        assert_eq!(round_sig(std::f64::consts::PI), 3.14159265);
        assert_eq!(round_sig(0.125), 0.125);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333333333);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn integers_untouched() {
        let v = round_floats(json!({"n": 123456789012u64, "x": [1.23456789012]}));
        assert_eq!(v, json!({"n": 123456789012u64, "x": [1.23456789]}));
    }
}
