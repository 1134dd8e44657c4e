//! Number formatting for files written by the crate.

use serde::Serialize;
use serde_json::Value;

/// Significant digits used for every number written to CSV or JSON.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal representation of `x` rounded to 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        // avoids "-0"
        return "0".to_string();
    }
    format!("{r}")
}

/// Rounds every floating-point number inside `value`.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with floats rounded to [`SIGNIFICANT_DIGITS`].
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&round_json(serde_json::to_value(value)?))
}
