//! Pool options from flags and an optional TOML file; flags win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::{Args, ValueEnum};
use kolyrec_core::suite::SuiteConfig;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PoolArgs {
    /// The modulus M (odd, at least 3).
    #[arg(long = "M", value_name = "M")]
    pub modulus: Option<u64>,
    /// Pool primes, comma separated; each must be 1 mod M.
    #[arg(long, value_delimiter = ',')]
    pub primes: Option<Vec<u64>>,
    /// Generators, as l=s pairs.
    #[arg(long, value_delimiter = ',', value_parser = parse_root)]
    pub roots: Option<Vec<(u64, u64)>>,
    /// Largest omega(r) among the enumerated levels.
    #[arg(long)]
    pub max_omega: Option<usize>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn parse_root(s: &str) -> Result<(u64, u64), String> {
    let (l, g) = s.split_once('=').ok_or_else(|| format!("expected l=s, got {s}"))?;
    let l = l.trim().parse().map_err(|_| format!("bad prime in {s}"))?;
    let g = g.trim().parse().map_err(|_| format!("bad root in {s}"))?;
    Ok((l, g))
}

/// Contents of `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "M")]
    pub modulus: Option<u64>,
    pub primes: Option<Vec<u64>>,
    #[serde(default)]
    pub roots: BTreeMap<String, u64>,
    pub max_omega: Option<usize>,
    pub checks: Option<Vec<String>>,
    pub format: Option<Format>,
    pub timings: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

pub fn default_primes(m: u64) -> Option<Vec<u64>> {
    match m {
        3 => Some(vec![7, 13, 19]),
        5 => Some(vec![11, 31]),
        _ => None,
    }
}

pub struct Resolved {
    pub suite: SuiteConfig,
    pub format: Format,
}

pub fn resolve(
    file: &FileConfig,
    pool: &PoolArgs,
    checks: Option<Vec<String>>,
    timings: bool,
) -> Result<Resolved, String> {
    let modulus = pool.modulus.or(file.modulus).unwrap_or(3);
    let primes = match pool.primes.clone().or_else(|| file.primes.clone()) {
        Some(p) => p,
        None => default_primes(modulus).ok_or_else(|| format!("no default pool for M = {modulus}; pass --primes"))?,
    };
    let mut roots = BTreeMap::new();
    for (l, s) in &file.roots {
        let l: u64 = l.parse().map_err(|_| format!("bad prime key {l} in roots"))?;
        roots.insert(l, *s);
    }
    for &(l, s) in pool.roots.iter().flatten() {
        roots.insert(l, s);
    }
    let max_omega = pool.max_omega.or(file.max_omega).unwrap_or(primes.len());
    let mut suite = SuiteConfig::new(modulus, &primes);
    suite.roots = roots;
    suite.max_omega = max_omega;
    suite.checks = checks.or_else(|| file.checks.clone()).unwrap_or_default();
    suite.timings = timings || file.timings.unwrap_or(false);
    Ok(Resolved { suite, format: pool.format.or(file.format).unwrap_or(Format::Text) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("M = 5\nprimes = [11]\n[roots]\n11 = 2\n").unwrap();
        let pool = PoolArgs { primes: Some(vec![11, 31]), ..Default::default() };
        let r = resolve(&file, &pool, None, false).unwrap();
        assert_eq!(r.suite.modulus, 5);
        assert_eq!(r.suite.primes, vec![11, 31]);
        assert_eq!(r.suite.roots.get(&11), Some(&2));
        assert_eq!(r.suite.max_omega, 2);
        assert_eq!(r.format, Format::Text);
    }

    #[test]
    fn defaults() {
        let r = resolve(&FileConfig::default(), &PoolArgs::default(), None, false).unwrap();
        assert_eq!(r.suite.primes, vec![7, 13, 19]);
        assert!(resolve(&FileConfig::default(), &PoolArgs { modulus: Some(7), ..Default::default() }, None, false)
            .is_err());
    }

    #[test]
    fn root_pairs() {
        assert_eq!(parse_root("7=5"), Ok((7, 5)));
        assert!(parse_root("7").is_err());
    }
}
