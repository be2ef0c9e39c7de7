//! Parameter resolution: command-line flag, then `--spec` JSON field, then default.

use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

pub struct Spec(Map<String, Value>);

impl Spec {
    pub fn empty() -> Self {
        Spec(Map::new())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read spec {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(map)) => Ok(Spec(map)),
            Ok(_) => Err(CliError::Usage("spec file must hold a JSON object".into())),
            Err(e) => Err(CliError::Usage(format!("invalid spec JSON: {e}"))),
        }
    }

    fn field(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn f64(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.field(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("spec field '{key}' must be a number"))),
        }
    }

    pub fn u64(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.field(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("spec field '{key}' must be a non-negative integer"))),
        }
    }

    pub fn string(&self, flag: Option<String>, key: &str) -> Result<Option<String>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.field(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(Value::Array(items)) => {
                let parts: Option<Vec<String>> = items.iter().map(|v| v.as_u64().map(|n| n.to_string())).collect();
                parts
                    .map(|p| Some(p.join(",")))
                    .ok_or_else(|| CliError::Usage(format!("spec field '{key}' must be a list of integers")))
            }
            Some(_) => Err(CliError::Usage(format!("spec field '{key}' has an unsupported type"))),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.field(key) {
            None | Some(Value::Null) => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(_) => Err(CliError::Usage(format!("spec field '{key}' must be a boolean"))),
        }
    }
}

pub fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required parameter --{name}")))
}

/// `a:b:step`, a comma list, or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid n grid '{s}' (expected a:b:step or a comma list)"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(bad());
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step == 0 || a > b {
            return Err(bad());
        }
        Ok((a..=b).step_by(step).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

/// Comma-separated coordinates.
pub fn parse_coords(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("'{}' is not a number", t.trim())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("30:300:30").unwrap().len(), 10);
        assert_eq!(parse_grid("30:300:30").unwrap()[9], 300);
        assert_eq!(parse_grid("5,10, 20").unwrap(), vec![5, 10, 20]);
        assert_eq!(parse_grid("7").unwrap(), vec![7]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:5:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn flags_override_spec() {
        let spec =
            Spec(serde_json::from_str(r#"{"eps": 0.3, "n": [30, 60], "trials": 5, "normalised": true}"#).unwrap());
        assert_eq!(spec.f64(None, "eps").unwrap(), Some(0.3));
        assert_eq!(spec.f64(Some(0.1), "eps").unwrap(), Some(0.1));
        assert_eq!(spec.string(None, "n").unwrap().as_deref(), Some("30,60"));
        assert_eq!(spec.u64(None, "trials").unwrap(), Some(5));
        assert_eq!(spec.u64(None, "missing").unwrap(), None);
        assert!(spec.flag(false, "normalised").unwrap());
        assert!(spec.u64(None, "eps").is_err());
    }
}
