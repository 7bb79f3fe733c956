//! Feature matrix files.
//!
//! Text form: tab-separated, header `record` followed by the schema, one row
//! per record. Binary form: a 64-byte little-endian header laid out like the
//! waveform store, the column names, then row-major `f64` values.
//!
//! | offset | type | field |
//! |---|---|---|
//! | 0 | `[u8; 8]` | magic `XFMRFEAT` |
//! | 8 | `u32` | format version |
//! | 12 | `u32` | column count |
//! | 16 | `u64` | row count |
//! | 24..64 | | zero |
//!
//! Each column name follows as a `u32` byte length and UTF-8 bytes, then
//! each record id the same way, then the values.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"XFMRFEAT";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub schema: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    fn check(&self) -> Result<()> {
        if self.ids.len() != self.rows.len() {
            return Err(Error::invalid(format!("{} ids for {} rows", self.ids.len(), self.rows.len())));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != self.schema.len()) {
            return Err(Error::invalid(format!("row {i} has {} values, schema has {}", self.rows[i].len(), self.schema.len())));
        }
        Ok(())
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        self.check()?;
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        write!(w, "record")?;
        for s in &self.schema {
            write!(w, "\t{s}")?;
        }
        writeln!(w)?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            write!(w, "{id}")?;
            for v in row {
                write!(w, "\t{v:?}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_tsv(path: &Path) -> Result<FeatureTable> {
        let bad = |d: String| Error::format("feature table", d);
        let mut lines = BufReader::new(std::fs::File::open(path)?).lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
        let mut cols = header.split('\t');
        if cols.next() != Some("record") {
            return Err(bad("header must start with 'record'".into()));
        }
        let schema: Vec<String> = cols.map(str::to_string).collect();
        let (mut ids, mut rows) = (Vec::new(), Vec::new());
        for (n, line) in lines.enumerate() {
            let line = line?;
            let mut fields = line.split('\t');
            ids.push(fields.next().unwrap_or_default().to_string());
            let row: Vec<f64> = fields
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", n + 2))))
                .collect::<Result<_>>()?;
            if row.len() != schema.len() {
                return Err(bad(format!("line {} has {} values, header has {}", n + 2, row.len(), schema.len())));
            }
            rows.push(row);
        }
        Ok(FeatureTable { schema, ids, rows })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.check()?;
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.rows.len() * self.schema.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.schema.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows.len() as u64).to_le_bytes());
        out.resize(HEADER_LEN, 0);
        for s in self.schema.iter().chain(&self.ids) {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        for row in &self.rows {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<FeatureTable> {
        let bad = |d: &str| Error::format("binary feature table", d.to_string());
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return Err(bad("bad magic or truncated header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        if u32_at(8) != VERSION {
            return Err(bad("unsupported version"));
        }
        let cols = u32_at(12) as usize;
        let rows = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        let mut pos = HEADER_LEN;
        let mut string = || -> Result<String> {
            if pos + 4 > bytes.len() {
                return Err(bad("truncated name block"));
            }
            let len = u32_at(pos) as usize;
            pos += 4;
            let s = bytes.get(pos..pos + len).ok_or_else(|| bad("truncated name block"))?;
            pos += len;
            String::from_utf8(s.to_vec()).map_err(|_| bad("name is not UTF-8"))
        };
        let schema = (0..cols).map(|_| string()).collect::<Result<Vec<_>>>()?;
        let ids = (0..rows).map(|_| string()).collect::<Result<Vec<_>>>()?;
        if bytes.len() != pos + 8 * rows * cols {
            return Err(bad("value block size does not match the header"));
        }
        let rows = (0..rows)
            .map(|r| {
                (0..cols)
                    .map(|c| {
                        let o = pos + 8 * (r * cols + c);
                        f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
                    })
                    .collect()
            })
            .collect();
        Ok(FeatureTable { schema, ids, rows })
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<FeatureTable> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        FeatureTable::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> FeatureTable {
        FeatureTable {
            schema: vec!["phaseA.F2.max".into(), "phaseA.db4.E_d3".into()],
            ids: vec!["r000001".into(), "r000002".into()],
            rows: vec![vec![0.1 + 0.2, -3.5e-300], vec![1e20, 7.0]],
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.tsv");
        table().write_tsv(&p).unwrap();
        assert_eq!(FeatureTable::read_tsv(&p).unwrap(), table());
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("record\tphaseA.F2.max\tphaseA.db4.E_d3\n"));
    }

    #[test]
    fn binary_round_trip_and_corruption() {
        let b = table().to_bytes().unwrap();
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(FeatureTable::from_bytes(&b).unwrap(), table());
        assert!(FeatureTable::from_bytes(&b[..b.len() - 1]).is_err());
        let mut c = b.clone();
        c[0] = b'Y';
        assert!(FeatureTable::from_bytes(&c).is_err());
    }

    #[test]
    fn rejects_ragged_tables() {
        let mut t = table();
        t.rows[1].pop();
        assert!(t.to_bytes().is_err());
    }
}
