use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::SweepSpec;

/// One named numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Parameters fixed by the generator.
    pub parameters: Map<String, Value>,
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(generator: impl Into<String>) -> Self {
        Self {
            generator: generator.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            sweep: None,
            parameters: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn for_spec(spec: &SweepSpec) -> Self {
        Self {
            sweep: Some(spec.clone()),
            ..Self::new("run_sweep")
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }
}

/// Equal-length named columns plus provenance and derived scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub columns: Vec<Column>,
    pub provenance: Provenance,
    pub summary: Map<String, Value>,
}

/// Round-trip float formatting: 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

impl Dataset {
    /// Panics if the columns differ in length, which is a generator bug.
    pub fn new(id: impl Into<String>, columns: Vec<Column>, provenance: Provenance) -> Self {
        let id = id.into();
        if let Some(first) = columns.first() {
            for c in &columns {
                assert_eq!(
                    c.values.len(),
                    first.values.len(),
                    "dataset `{id}`: column `{}` has a different length",
                    c.name
                );
            }
        }
        Self {
            id,
            columns,
            provenance,
            summary: Map::new(),
        }
    }

    pub fn with_summary(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.column_names().join(","))?;
        let mut line = String::new();
        for r in 0..self.rows() {
            line.clear();
            for (k, c) in self.columns.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&format_number(c.values[r]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Sidecar contents: id, column list, row count, provenance and summary.
    pub fn meta_json(&self) -> Value {
        serde_json::json!({
            "id": self.id,
            "columns": self.column_names(),
            "rows": self.rows(),
            "provenance": self.provenance,
            "summary": self.summary,
        })
    }

    /// Write `<id>.csv` and `<id>.meta.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.id));
        let meta = dir.join(format!("{}.meta.json", self.id));
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(&csv, buf)?;
        let mut text = serde_json::to_string_pretty(&self.meta_json()).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&meta, text)?;
        Ok((csv, meta))
    }
}
