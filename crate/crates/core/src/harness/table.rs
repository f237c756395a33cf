//! CSV tables with a `# key=value` metadata line.
//!
//! Reals are written with 17 significant digits so that reading a table
//! back reproduces every value bit for bit. Missing values are empty fields.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One CSV field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Missing,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x:.16e}"),
            Value::Missing => Ok(()),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as i64)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Real)
    }
}

impl Value {
    pub fn as_f64(self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(i as f64),
            Value::Real(x) => Some(x),
            Value::Missing => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { meta: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Values of one column, `None` for missing fields.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        if !self.meta.is_empty() {
            let line: Vec<String> = self.meta.iter().map(|(k, v)| format!("{k}={}", v.replace(' ', "_"))).collect();
            writeln!(w, "# {}", line.join(" "))?;
        }
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    /// Reads a table written by [`Table::write_to`]; every field is parsed
    /// as a real.
    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            for pair in line.trim_start_matches('#').split_whitespace() {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("metadata entry `{pair}` is not key=value")))?;
                meta.push((k.to_string(), v.to_string()));
            }
        }
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let row = record
                .iter()
                .map(|f| {
                    if f.is_empty() {
                        Ok(Value::Missing)
                    } else {
                        f.parse::<f64>().map(Value::Real).map_err(|e| Error::Parse(format!("`{f}`: {e}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { meta, header, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return io.into();
        }
        unreachable!("checked to be an i/o error");
    }
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reals_round_trip_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = Table::new(&["x", "comp0"]).meta("test", "burgers").meta("order", 5);
        for _ in 0..500 {
            let x: f64 = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-300..300));
            t.push(vec![x.into(), (1.0 / 3.0 + x).into()]);
        }
        t.push(vec![Value::Missing, f64::MIN_POSITIVE.into()]);
        let back = Table::read_from(t.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.meta, t.meta);
        assert_eq!(back.header, t.header);
        for (a, b) in t.rows.iter().zip(&back.rows) {
            for (u, v) in a.iter().zip(b) {
                assert_eq!(u.as_f64().map(f64::to_bits), v.as_f64().map(f64::to_bits));
            }
        }
    }

    #[test]
    fn layout() {
        let mut t = Table::new(&["N", "error", "rate"]).meta("test", "advect low");
        t.push(vec![40usize.into(), 0.5.into(), Value::Missing]);
        t.push(vec![80usize.into(), 0.125.into(), 2.0.into()]);
        assert_eq!(
            t.to_csv_string(),
            "# test=advect_low\nN,error,rate\n40,5.0000000000000000e-1,\n80,1.2500000000000000e-1,2.0000000000000000e0\n"
        );
        assert_eq!(t.column("rate").unwrap(), vec![None, Some(2.0)]);
    }
}
