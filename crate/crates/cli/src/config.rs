//! Line-oriented `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Experiment configuration: string values keyed by parameter name, typed
/// on access. Keys iterate in sorted order, so serialization is canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", i + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return err(format!("line {}: bad key `{k}`", i + 1));
            }
            if cfg.entries.insert(k.to_string(), v.to_string()).is_some() {
                return err(format!("line {}: duplicate key `{k}`", i + 1));
            }
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Fails on keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => err(format!("unknown parameter `{k}` for this subcommand")),
            None => Ok(()),
        }
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).or_else(|_| err(format!("`{key}` must be {what}, got `{v}`"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let x = self.typed::<f64>(key, "a number")?.unwrap_or(default);
        if !x.is_finite() {
            return err(format!("`{key}` must be finite"));
        }
        Ok(x)
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError(format!("missing `{key}`")))?;
        self.f64_or(key, 0.0)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        Ok(self.typed(key, "a nonnegative integer")?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.typed(key, "a nonnegative integer")?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        Ok(self.typed(key, "true or false")?.unwrap_or(default))
    }

    pub fn grid_or(&self, key: &str, default: &str) -> Result<Vec<f64>, ConfigError> {
        parse_grid(self.get(key).unwrap_or(default)).map_err(|e| ConfigError(format!("`{key}`: {}", e.0)))
    }

    /// A probability grid: nonempty, within `[0, 1]`, strictly increasing.
    pub fn p_grid_or(&self, key: &str, default: &str) -> Result<Vec<f64>, ConfigError> {
        let g = self.grid_or(key, default)?;
        if g.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return err(format!("`{key}` values must lie in [0, 1]"));
        }
        if g.windows(2).any(|w| w[0] >= w[1]) {
            return err(format!("`{key}` must be strictly increasing"));
        }
        Ok(g)
    }

    /// `p,q` pair of a regular tiling.
    pub fn pq_or(&self, key: &str, default: (u32, u32)) -> Result<(u32, u32), ConfigError> {
        let Some(v) = self.get(key) else { return Ok(default) };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [p, q] => match (p.parse(), q.parse()) {
                (Ok(p), Ok(q)) => Ok((p, q)),
                _ => err(format!("`{key}` must be two integers `p,q`, got `{v}`")),
            },
            _ => err(format!("`{key}` must be two integers `p,q`, got `{v}`")),
        }
    }
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, ConfigError> {
    let num = |x: &str| -> Result<f64, ConfigError> {
        let v: f64 = x.trim().parse().map_err(|_| ConfigError(format!("bad number `{}`", x.trim())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            err("grid values must be finite")
        }
    };
    let out = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, h] = parts.as_slice() else {
            return err(format!("range `{s}` must be start:stop:step"));
        };
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if !(h > 0.0) || b < a {
            return err(format!("range `{s}` needs step > 0 and stop ≥ start"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize + 1;
        if n > 1_000_000 {
            return err(format!("range `{s}` has too many points"));
        }
        // round to 12 decimals so 0.1 + 3·0.1 prints as 0.4
        (0..n).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if out.is_empty() {
        return err("empty grid");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1:0.5:0.1").unwrap(), vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(parse_grid("5,6,7").unwrap(), vec![5.0, 6.0, 7.0]);
        assert_eq!(parse_grid("0.30:0.70:0.02").unwrap().len(), 21);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = Config::new();
        c.set("lambda", "0.5,1");
        c.set("p", "0.30:0.70:0.02");
        c.set("seed", "18446744073709551615");
        let back = Config::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.u64_or("seed", 0).unwrap(), u64::MAX);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("novalue").is_err());
        assert!(Config::parse("a = 1\na = 2").is_err());
        let c = Config::parse("# comment\n\np = 1.5\n").unwrap();
        assert!(c.p_grid_or("p", "0.5").is_err());
        assert!(c.check_keys(&["q"]).is_err());
        assert!(c.check_keys(&["p"]).is_ok());
    }
}
