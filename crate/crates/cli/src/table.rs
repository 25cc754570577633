//! Delimited tables with a `#`-prefixed metadata header.

use std::fmt;
use std::io::Write;

use crate::error::{CliError, Result};

/// Significant digits of every emitted real.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Metadata keys every table carries.
pub const REQUIRED_METADATA: [&str; 3] = ["command", "seed", "version"];

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i128),
    /// Always stored already rounded to [`SIGNIFICANT_DIGITS`].
    Num(f64),
    Flag(bool),
}

impl Cell {
    pub fn num(v: f64) -> Self {
        Cell::Num(round_significant(v))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Int(i) => i as f64,
            Cell::Num(x) => x,
            Cell::Flag(b) => f64::from(u8::from(b)),
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "true" => return Ok(Cell::Flag(true)),
            "false" => return Ok(Cell::Flag(false)),
            _ => {}
        }
        let digits = text.strip_prefix('-').unwrap_or(text);
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return text.parse().map(Cell::Int).map_err(|e| CliError::Table(format!("cell `{text}`: {e}")));
        }
        text.parse().map(Cell::Num).map_err(|e| CliError::Table(format!("cell `{text}`: {e}")))
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a == b,
            (Cell::Num(a), Cell::Num(b)) => a == b || a.to_bits() == b.to_bits(),
            (Cell::Flag(a), Cell::Flag(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Num(x) => f.write_str(&format_significant(*x)),
            Cell::Flag(b) => write!(f, "{b}"),
        }
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i128)
            }
        }
    )*};
}
int_cell!(u32, u64, u128, usize, i64);

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

/// Renders `x` with [`SIGNIFICANT_DIGITS`] digits, keeping trailing zeros.
/// Decimal notation for exponents in `[-5, 8)`, scientific otherwise.
pub fn format_significant(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.prec$e}", prec = SIGNIFICANT_DIGITS - 1);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).expect("exponent of {:e} output");
    if (-5..8).contains(&exp) {
        format!("{x:.prec$}", prec = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize)
    } else {
        sci
    }
}

/// The value a reader recovers from [`format_significant`].
pub fn round_significant(x: f64) -> f64 {
    format_significant(x).parse().expect("formatted reals re-parse")
}

/// A rectangular table plus ordered `key: value` metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(command: &str, seed: Option<u64>, columns: &[&str]) -> Self {
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: vec![
                ("command".into(), command.into()),
                ("seed".into(), seed),
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ],
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Adds or replaces a metadata entry. Newlines are flattened to spaces.
    pub fn set_meta(&mut self, key: &str, value: impl fmt::Display) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.into(), value)),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// The cells of column `name`, top to bottom.
    pub fn column_values(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Table(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut body = csv::Writer::from_writer(out);
        body.write_record(&self.columns)?;
        for row in &self.rows {
            body.write_record(row.iter().map(Cell::to_string))?;
        }
        body.flush()
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("table output is UTF-8")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            match line.strip_prefix('#') {
                Some(meta) => {
                    let (k, v) = meta
                        .trim_start()
                        .split_once(':')
                        .ok_or_else(|| CliError::Table(format!("metadata line `{line}` lacks `key: value`")))?;
                    metadata.push((k.to_string(), v.strip_prefix(' ').unwrap_or(v).to_string()));
                }
                None => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        if let Some(missing) = REQUIRED_METADATA.iter().find(|k| !metadata.iter().any(|(m, _)| m == *k)) {
            return Err(CliError::Table(format!("metadata `{missing}` missing")));
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let columns =
            reader.headers().map_err(|e| CliError::Table(e.to_string()))?.iter().map(str::to_string).collect();
        let mut table = ResultTable { columns, rows: Vec::new(), metadata };
        for record in reader.records() {
            let record = record.map_err(|e| CliError::Table(e.to_string()))?;
            let row = record.iter().map(Cell::parse).collect::<Result<Vec<_>>>()?;
            table.push_row(row)?;
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_significant(0.028939), "0.0289390000");
        assert_eq!(format_significant(1.0), "1.00000000");
        assert_eq!(format_significant(0.0), "0.00000000");
        assert_eq!(format_significant(9.9999999996), "10.0000000");
        assert_eq!(format_significant(123456789.0), "1.23456789e8");
        assert_eq!(format_significant(2.5e-7), "2.50000000e-7");
        assert_eq!(format_significant(f64::INFINITY), "inf");
    }

    #[test]
    fn cells_keep_their_kind() {
        assert_eq!(Cell::parse("12").unwrap(), Cell::Int(12));
        assert_eq!(Cell::parse("-3").unwrap(), Cell::Int(-3));
        assert_eq!(Cell::parse("1.00000000").unwrap(), Cell::Num(1.0));
        assert_eq!(Cell::parse("true").unwrap(), Cell::Flag(true));
        assert_eq!(Cell::parse("inf").unwrap(), Cell::Num(f64::INFINITY));
        assert!(Cell::parse("x").is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let mut t = ResultTable::new("test", None, &["a", "b"]);
        assert!(t.push_row(vec![Cell::Int(1)]).is_err());
    }

    #[test]
    fn metadata_required_on_parse() {
        assert!(ResultTable::parse("# command: x\na\n1\n").is_err());
    }

    #[test]
    fn render_layout() {
        let mut t = ResultTable::new("demo", Some(7), &["k", "t", "blind"]);
        t.push_row(vec![3u32.into(), 0.5.into(), true.into()]).unwrap();
        let text = t.render();
        let expected = format!(
            "# command: demo\n# seed: 7\n# version: {}\nk,t,blind\n3,0.500000000,true\n",
            env!("CARGO_PKG_VERSION")
        );
        assert_eq!(text, expected);
        assert_eq!(ResultTable::parse(&text).unwrap(), t);
    }
}
