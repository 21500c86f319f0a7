//! Configuration input: JSON files with flat overrides, and `γ` grids.
//!
//! Canonical JSON keys: `K`, `N`, `m`, `mu`, `tau`, `eta`, `gamma`, `L`.
//! Missing keys take the reference defaults of [`SystemParams::default`];
//! overrides win over file values.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{SystemConfig, SystemParams};

/// Upper bound on the number of grid points accepted by [`parse_gamma_grid`].
pub const MAX_GRID_POINTS: usize = 100_000;

/// Flag-level overrides; `None` leaves the file or default value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub users: Option<usize>,
    pub rows: Option<usize>,
    pub mu: Option<f64>,
    pub tau: Option<f64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub field_bits: Option<u32>,
}

/// Builds a validated configuration from optional JSON text and overrides.
/// Unknown keys, type mismatches and invariant violations are all collected
/// into a single [`Error::Config`].
pub fn parse_config(json: Option<&str>, overrides: &Overrides) -> Result<SystemConfig> {
    let mut params = SystemParams::default();
    let mut problems = Vec::new();

    if let Some(text) = json {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) => {
                for (key, value) in &map {
                    apply_key(&mut params, key, value, &mut problems);
                }
            }
            Ok(other) => problems.push(format!(
                "configuration must be a JSON object, got {}",
                kind(&other)
            )),
            Err(e) => problems.push(format!("configuration is not valid JSON: {e}")),
        }
    }

    let o = overrides;
    if let Some(v) = o.nodes {
        params.nodes = v;
    }
    if let Some(v) = o.users {
        params.users = v;
    }
    if let Some(v) = o.rows {
        params.rows = v;
    }
    if let Some(v) = o.mu {
        params.mu = v;
    }
    if let Some(v) = o.tau {
        params.tau = v;
    }
    if let Some(v) = o.eta {
        params.eta = v;
    }
    if let Some(v) = o.gamma {
        params.gamma = v;
    }
    if let Some(v) = o.field_bits {
        params.field_bits = v;
    }

    match SystemConfig::new(params) {
        Ok(c) if problems.is_empty() => Ok(c),
        Ok(_) => Err(Error::Config(problems)),
        Err(Error::Config(more)) => {
            problems.extend(more);
            Err(Error::Config(problems))
        }
        Err(e) => Err(e),
    }
}

fn apply_key(params: &mut SystemParams, key: &str, value: &Value, problems: &mut Vec<String>) {
    let count = |problems: &mut Vec<String>| match value.as_u64() {
        Some(v) => usize::try_from(v).ok(),
        None => {
            problems.push(format!(
                "key {key:?}: expected a nonnegative integer, got {}",
                kind(value)
            ));
            None
        }
    };
    let real = |problems: &mut Vec<String>| match value.as_f64() {
        Some(v) => Some(v),
        None => {
            problems.push(format!(
                "key {key:?}: expected a number, got {}",
                kind(value)
            ));
            None
        }
    };
    match key {
        "K" => count(problems).map(|v| params.nodes = v),
        "N" => count(problems).map(|v| params.users = v),
        "m" => count(problems).map(|v| params.rows = v),
        "L" => count(problems).map(|v| params.field_bits = u32::try_from(v).unwrap_or(u32::MAX)),
        "mu" => real(problems).map(|v| params.mu = v),
        "tau" => real(problems).map(|v| params.tau = v),
        "eta" => real(problems).map(|v| params.eta = v),
        "gamma" => real(problems).map(|v| params.gamma = v),
        _ => {
            problems.push(format!("unknown key {key:?}"));
            None
        }
    };
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(n) if n.is_u64() => "an integer",
        Value::Number(n) if n.is_i64() => "a negative integer",
        Value::Number(_) => "a real number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Parses `start:stop:step` into `start, start+step, …` up to `stop`
/// (inclusive within a relative tolerance). A bare number is a one-point grid.
pub fn parse_gamma_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(vec![format!("gamma grid {spec:?}: {why}")]);
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad("expected numbers")))
        .collect::<Result<Vec<_>>>()?;
    if nums.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    match nums[..] {
        [g] if g >= 0.0 => Ok(vec![g]),
        [_] => Err(bad("gamma must be nonnegative")),
        [start, stop, step] => {
            if start < 0.0 {
                return Err(bad("gamma must be nonnegative"));
            }
            if stop < start {
                return Err(bad("stop is below start"));
            }
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            let span = (stop - start) / step;
            let steps = (span + 1e-9 * span.max(1.0)).floor();
            if steps >= MAX_GRID_POINTS as f64 {
                return Err(bad("too many grid points"));
            }
            // index-based to avoid accumulating rounding error
            let grid: Vec<f64> = (0..=steps as usize)
                .map(|i| start + i as f64 * step)
                .collect();
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("step is below the floating-point resolution"));
            }
            Ok(grid)
        }
        _ => Err(bad("expected start:stop:step")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problems(e: Error) -> Vec<String> {
        match e {
            Error::Config(p) => p,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        for json in [None, Some("{}")] {
            let c = parse_config(json, &Overrides::default()).unwrap();
            assert_eq!(
                (c.nodes(), c.users(), c.rows(), c.mu(), c.tau(), c.eta()),
                (6, 6, 60, 0.5, 0.005, 0.8)
            );
        }
    }

    #[test]
    fn integrality_rule() {
        for mu in [0.3, 0.35, 1.0 / 3.0] {
            let o = Overrides {
                mu: Some(mu),
                ..Overrides::default()
            };
            assert!(parse_config(None, &o).is_ok(), "mu={mu}");
        }
        let o = Overrides {
            mu: Some(0.33),
            ..Overrides::default()
        };
        assert!(parse_config(None, &o).is_err());
    }

    #[test]
    fn flags_override_file() {
        let o = Overrides {
            eta: Some(2.0),
            ..Overrides::default()
        };
        let c = parse_config(Some(r#"{"eta": 0.8, "K": 4, "m": 8}"#), &o).unwrap();
        assert_eq!(c.eta(), 2.0);
        assert_eq!(c.nodes(), 4);
    }

    #[test]
    fn all_problems_listed() {
        let p = problems(
            parse_config(
                Some(r#"{"K": "six", "bogus": 1, "mu": 0.33, "tau": -1}"#),
                &Overrides::default(),
            )
            .unwrap_err(),
        );
        assert_eq!(p.len(), 4, "{p:?}");
        assert!(p.iter().any(|s| s.contains("bogus")));
        assert!(p.iter().any(|s| s.contains("\"K\"")));
        assert!(p.iter().any(|s| s.contains("m*mu")));
        assert!(p.iter().any(|s| s.contains("tau")));
    }

    #[test]
    fn malformed_documents() {
        assert!(parse_config(Some("[1,2]"), &Overrides::default()).is_err());
        assert!(parse_config(Some("{"), &Overrides::default()).is_err());
        assert!(parse_config(Some(r#"{"K": -3}"#), &Overrides::default()).is_err());
        assert!(parse_config(Some(r#"{"L": 99999999999}"#), &Overrides::default()).is_err());
    }

    #[test]
    fn gamma_grids() {
        let g = parse_gamma_grid("0:2:0.1").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert!((g[20] - 2.0).abs() < 1e-12);
        assert_eq!(parse_gamma_grid("1.5").unwrap(), vec![1.5]);
        assert_eq!(parse_gamma_grid("1:1:0.5").unwrap(), vec![1.0]);
        for bad in [
            "",
            "a:b:c",
            "0:1",
            "0:1:0",
            "1:0:0.1",
            "-1:1:1",
            "0:1e12:1e-9",
            "0:inf:1",
            "NaN",
            "1:1.0000000000000002:1e-17",
        ] {
            assert!(parse_gamma_grid(bad).is_err(), "{bad}");
        }
    }
}
