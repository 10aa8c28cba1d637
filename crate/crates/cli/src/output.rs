//! Tables and their CSV / plot-data serialization.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Na,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Na, Cell::Num)
    }
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

/// Formats with 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NA".to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// Error code of the first failure in this row.
    pub error: Option<String>,
}

impl Row {
    pub fn ok(cells: Vec<Cell>) -> Self {
        Row { cells, error: None }
    }

    /// Leading `keys`, then `width` NA cells.
    pub fn failed(keys: Vec<Cell>, width: usize, code: &str) -> Self {
        let mut cells = keys;
        cells.resize(cells.len() + width, Cell::Na);
        Row { cells, error: Some(code.to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; NA and text become `None`.
    pub fn values(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(self.rows.iter().map(|r| r.cells.get(k).and_then(Cell::num)).collect())
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// CSV body with a trailing `error` column.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for line in header {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "{},error", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .cells
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_number(*v),
                    Cell::Text(t) => t.clone(),
                    Cell::Na => "NA".to_string(),
                })
                .collect();
            let _ = writeln!(s, "{},{}", cells.join(","), row.error.as_deref().unwrap_or(""));
        }
        s
    }
}

/// Columns for external plotting: one x column and its y series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: Vec<String>,
    /// Blank line between blocks whenever this column changes.
    pub block_by: Option<String>,
}

impl PlotSpec {
    pub fn new(x: &str, y: &[&str]) -> Self {
        PlotSpec { x: x.into(), y: y.iter().map(|c| c.to_string()).collect(), block_by: None }
    }

    pub fn blocks(mut self, column: &str) -> Self {
        self.block_by = Some(column.into());
        self
    }

    /// Whitespace-separated columns in gnuplot's block layout.
    pub fn render(&self, table: &Table) -> String {
        let mut s = format!("# {} {}\n", self.x, self.y.join(" "));
        let idx = |c: &str| table.column(c);
        let (Some(xi), Some(yi)) = (idx(&self.x), self.y.iter().map(|c| idx(c)).collect::<Option<Vec<_>>>()) else {
            return s;
        };
        let bi = self.block_by.as_deref().and_then(idx);
        let mut last: Option<&Cell> = None;
        for row in &table.rows {
            if let Some(b) = bi {
                if last.is_some_and(|l| l != &row.cells[b]) {
                    s.push('\n');
                }
                last = Some(&row.cells[b]);
            }
            let mut parts = vec![cell_text(&row.cells[xi])];
            parts.extend(yi.iter().map(|&k| cell_text(&row.cells[k])));
            s.push_str(&parts.join(" "));
            s.push('\n');
        }
        s
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_number(*v),
        Cell::Text(t) => t.clone(),
        Cell::Na => "NA".to_string(),
    }
}

/// `foo.csv` → `foo.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write_file(path: &Path, text: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn failed_rows_carry_sentinel() {
        let mut t = Table::new(&["x", "y", "z"]);
        t.rows.push(Row::ok(vec![1.0.into(), 2.0.into(), 3.0.into()]));
        t.rows.push(Row::failed(vec![4.0.into()], 2, "linalg"));
        let csv = t.to_csv(&["target = demo".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# target = demo");
        assert_eq!(lines[1], "x,y,z,error");
        assert!(lines[2].ends_with(','));
        assert_eq!(lines[3], "4.0000000000000000e0,NA,NA,linalg");
        assert_eq!(t.failures(), 1);
    }

    #[test]
    fn plot_blocks() {
        let mut t = Table::new(&["s", "x", "y"]);
        for (s, x) in [(1.0, 0.0), (1.0, 1.0), (2.0, 0.0)] {
            t.rows.push(Row::ok(vec![s.into(), x.into(), (x * 2.0).into()]));
        }
        let out = PlotSpec::new("x", &["y"]).blocks("s").render(&t);
        assert_eq!(out.lines().filter(|l| l.is_empty()).count(), 1);
    }
}
