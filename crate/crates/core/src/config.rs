//! Strict JSON parsing with field-path errors.
//!
//! Every configuration document goes through [`parse_value`] and
//! [`from_value`], so a bad field is reported as e.g.
//! `scenarios[2].delta: invalid type: string "x", expected f64`.

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{Error, Result};

const KNOWN_KINDS: [&str; 4] = ["np", "mix", "sam", "pp"];

/// Parses strict JSON (no comments, no trailing commas).
pub fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::config("$", format!("malformed JSON: {e}")))
}

/// Deserializes `value` into `T`, reporting the path of the first bad field.
///
/// Unknown method kinds are reported as [`Error::UnsupportedMethod`] rather than
/// as schema errors.
pub fn from_value<T: DeserializeOwned>(value: Value) -> Result<T> {
    check_method_kinds(&value)?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        Error::config(path, e.into_inner().to_string())
    })
}

/// Parses and deserializes in one step.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    from_value(parse_value(text)?)
}

fn check_method_kinds(value: &Value) -> Result<()> {
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                if key == "methods" {
                    if let Value::Array(items) = v {
                        for item in items {
                            if let Some(kind) = item.get("kind").and_then(Value::as_str) {
                                if !KNOWN_KINDS.contains(&kind) {
                                    return Err(Error::UnsupportedMethod(kind.to_string()));
                                }
                            }
                        }
                    }
                }
                check_method_kinds(v)?;
            }
            Ok(())
        }
        Value::Array(items) => items.iter().try_for_each(check_method_kinds),
        _ => Ok(()),
    }
}

/// Wraps a validation error with the location it was found at.
pub(crate) fn at(path: impl Into<String>, err: Error) -> Error {
    match err {
        Error::Config { .. } | Error::UnsupportedMethod(_) => err,
        other => Error::config(path, other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparators::MethodSpec;
    use crate::simulation::ScenarioSpec;

    #[test]
    fn malformed_json_is_a_config_error() {
        let err = parse_value("{\"a\": 1,}").unwrap_err();
        assert_eq!(err.field_path(), Some("$"));
        assert!(parse_value("// comment\n{}").is_err());
    }

    #[test]
    fn field_path_is_reported() {
        let text = r#"[{"label":"a","endpoint":"binary","theta_h":0.4,"n_h":300,"theta":0.4,"n":150,"theta_t":0.5,"n_t":300,"delta":"wide"}]"#;
        let err = from_str::<Vec<ScenarioSpec>>(text).unwrap_err();
        assert_eq!(err.field_path(), Some("[0].delta"));
        let text = r#"[{"label":"a","endpoint":"binary","theta_h":0.4,"n_h":300,"theta":0.4,"n":150,"theta_t":0.5,"n_t":300,"delta":0.1,"colour":1}]"#;
        let err = from_str::<Vec<ScenarioSpec>>(text).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn unknown_method_kind_names_the_non_goal() {
        let err = from_str::<Vec<MethodSpec>>(r#"[{"kind":"sam"},{"kind":"cp"}]"#);
        // a bare array has no `methods` key, so this falls through to serde
        assert!(err.is_err());
        let err = from_str::<serde_json::Value>(r#"{"methods":[{"kind":"cp"}]}"#).unwrap_err();
        assert_eq!(err, Error::UnsupportedMethod("cp".into()));
        assert!(err.to_string().contains("non-goal"));
    }

    #[test]
    fn method_wire_format() {
        let m: Vec<MethodSpec> = from_str(r#"[{"kind":"np"},{"kind":"mix","w_tilde":0.5},{"kind":"sam"},{"kind":"pp","gamma_grid":51}]"#).unwrap();
        assert_eq!(
            m,
            vec![MethodSpec::Np, MethodSpec::mix(0.5), MethodSpec::Sam, MethodSpec::PowerPrior { gamma_grid: 51 }]
        );
        assert!(from_str::<MethodSpec>(r#"{"kind":"mix"}"#).is_err());
        assert!(from_str::<MethodSpec>(r#"{"kind":"sam","w_tilde":0.5}"#).is_err());
    }
}
