//! TOML/JSON configuration: Hamiltonian specs and experiment settings.

use crate::error::{Error, Result};
use delone_fermions::hamiltonian::BiEquivariantCoefficient;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

const TABLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Block {
    pub arity: usize,
    pub range: f64,
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct HamSpec {
    #[serde(default, rename = "block")]
    pub blocks: Vec<Block>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Pattern file; a unit chain of `sites` points is used when absent.
    pub pattern: Option<PathBuf>,
    pub sites: usize,
    pub n: usize,
    pub t: f64,
    pub u: f64,
    pub gap_factor: f64,
    pub cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { pattern: None, sites: 20, n: 2, t: 1.0, u: -8.0, gap_factor: 5.0, cap: crate::eigen::DEFAULT_CAP }
    }
}

/// Parses `text` as JSON when `path` ends in `.json`, TOML otherwise.
pub fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(text)?)
    } else {
        Ok(toml::from_str(text)?)
    }
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    parse(path, &std::fs::read_to_string(path)?)
}

fn number(params: &Value, key: &str) -> Result<f64> {
    params.get(key).and_then(Value::as_f64).ok_or_else(|| Error::Config(format!("missing numeric parameter `{key}`")))
}

fn expect_arity(b: &Block, n: usize) -> Result<()> {
    if b.arity != n {
        return Err(Error::Config(format!("`{}` blocks have arity {n}, got {}", b.kind, b.arity)));
    }
    Ok(())
}

impl Block {
    pub fn coefficient(&self) -> Result<BiEquivariantCoefficient> {
        if !(self.range >= 0.0) {
            return Err(Error::Config(format!("range must be non-negative, got {}", self.range)));
        }
        let distance = self.params.get("distance").and_then(Value::as_f64).unwrap_or(self.range);
        match self.kind.as_str() {
            "hopping" => {
                expect_arity(self, 1)?;
                Ok(BiEquivariantCoefficient::hopping(number(&self.params, "t")?, distance))
            }
            "pair_diagonal" => {
                expect_arity(self, 2)?;
                Ok(BiEquivariantCoefficient::pair_diagonal(number(&self.params, "u")?, distance))
            }
            "potential_table" => {
                let rows = self.params.get("table").and_then(Value::as_array).ok_or_else(|| Error::Config("`potential_table` needs `table = [[d, w], …]`".into()))?;
                let mut table = Vec::with_capacity(rows.len());
                for row in rows {
                    match row.as_array().map(|r| r.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>()) {
                        Some(Some(v)) if v.len() == 2 => table.push((v[0], v[1])),
                        _ => return Err(Error::Config(format!("bad table row {row}"))),
                    }
                }
                if self.arity < 2 {
                    return Err(Error::Config("`potential_table` needs arity ≥ 2".into()));
                }
                Ok(BiEquivariantCoefficient::diagonal(self.arity, self.range, move |d| {
                    table.iter().find(|(x, _)| (x - d).abs() <= TABLE_TOL).map_or(0.0, |(_, w)| *w)
                }))
            }
            "expression" => Err(Error::Config("`expression` blocks are not supported; use `potential_table`".into())),
            other => Err(Error::Config(format!("unknown block kind `{other}`"))),
        }
    }
}

impl HamSpec {
    pub fn coefficients(&self) -> Result<Vec<BiEquivariantCoefficient>> {
        self.blocks.iter().map(Block::coefficient).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let t = r#"
            [[block]]
            arity = 1
            range = 1.0
            kind = "hopping"
            params = { t = 1.0 }

            [[block]]
            arity = 2
            range = 1.0
            kind = "potential_table"
            params = { table = [[1.0, -4.0]] }
        "#;
        let j = r#"{"block": [
            {"arity": 1, "range": 1.0, "kind": "hopping", "params": {"t": 1.0}},
            {"arity": 2, "range": 1.0, "kind": "potential_table", "params": {"table": [[1.0, -4.0]]}}
        ]}"#;
        let a: HamSpec = parse(Path::new("h.toml"), t).unwrap();
        let b: HamSpec = parse(Path::new("h.json"), j).unwrap();
        assert_eq!(a.blocks.len(), 2);
        assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
        assert_eq!(a.coefficients().unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_blocks() {
        let bad = |s: &str| -> bool {
            let spec: HamSpec = parse(Path::new("h.toml"), s).unwrap();
            spec.coefficients().is_err()
        };
        assert!(bad("[[block]]\narity = 2\nrange = 1.0\nkind = \"hopping\"\nparams = { t = 1.0 }"));
        assert!(bad("[[block]]\narity = 1\nrange = 1.0\nkind = \"hopping\""));
        assert!(bad("[[block]]\narity = 2\nrange = 1.0\nkind = \"expression\""));
        assert!(bad("[[block]]\narity = 2\nrange = 1.0\nkind = \"magic\""));
    }

    #[test]
    fn experiment_defaults() {
        let c: ExperimentConfig = parse(Path::new("e.toml"), "u = -4.0").unwrap();
        assert_eq!((c.sites, c.n, c.u, c.gap_factor), (20, 2, -4.0, 5.0));
    }
}
