//! Table and report serialisation. Every float in a CSV is written with 17
//! significant digits so that parsing it back gives the same bits.

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

/// A grid result: column names, stringified cells and the same rows as JSON.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub records: Vec<serde_json::Value>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new(), records: Vec::new() }
    }

    pub fn push(&mut self, cells: Vec<String>, record: impl Serialize) -> Result<()> {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self.records.push(serde_json::to_value(record)?);
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        json_bytes(&self.records)
    }
}

pub fn json_bytes(v: &impl Serialize) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
