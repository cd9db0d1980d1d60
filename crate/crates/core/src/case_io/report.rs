use serde_json::{Map, Value};

use crate::capacitor::CppSolution;
use crate::error::CppError;
use crate::evaluation::{AccuracyReport, CumulativeErrorReport};
use crate::restoration::{StudyTable, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Round to 4 significant digits.
pub fn sig4(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.3e}").parse().unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => sig4(*x).to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => {
                serde_json::Number::from_f64(sig4(*x)).map_or(Value::Null, Value::Number)
            }
            Cell::Empty => Value::Null,
        }
    }
}

/// Column-ordered table rendered as CSV or a JSON array of records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.header.join(",");
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let m: Map<String, Value> = self
                            .header
                            .iter()
                            .cloned()
                            .zip(row.iter().map(Cell::json))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut out = serde_json::to_string_pretty(&records).unwrap();
                out.push('\n');
                out
            }
        }
    }
}

pub const ACCURACY_HEADER: [&str; 7] = [
    "benchmark",
    "model",
    "quantity",
    "corr",
    "mean_abs",
    "max_abs",
    "rel_at_max",
];

pub fn accuracy_table(reports: &[AccuracyReport]) -> Table {
    let mut t = Table::new(ACCURACY_HEADER);
    for r in reports {
        for (q, s) in &r.rows {
            t.push(vec![
                Cell::Text(r.benchmark.clone()),
                Cell::Text(r.model.clone()),
                Cell::Text(q.label().into()),
                Cell::Num(s.corr),
                Cell::Num(s.mean_abs),
                Cell::Num(s.max_abs),
                Cell::Num(s.rel_at_max),
            ]);
        }
    }
    t
}

pub fn cumulative_table(rows: &[(String, String, CumulativeErrorReport)]) -> Table {
    let mut t = Table::new([
        "benchmark",
        "model",
        "voltage_re",
        "voltage_im",
        "p_mw",
        "q_mvar",
    ]);
    for (bench, model, r) in rows {
        t.push(vec![
            Cell::Text(bench.clone()),
            Cell::Text(model.clone()),
            Cell::Num(r.voltage_re),
            Cell::Num(r.voltage_im),
            Cell::Num(r.p),
            Cell::Num(r.q),
        ]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyField {
    /// AC-converged sample counts.
    Converged,
    /// Mean shed percentage.
    Shed,
}

fn study_variants(table: &StudyTable) -> Vec<Variant> {
    let mut vs: Vec<Variant> = Vec::new();
    for r in &table.rows {
        if !vs.contains(&r.variant) {
            vs.push(r.variant);
        }
    }
    if vs.is_empty() {
        vs = Variant::ALL.to_vec();
    }
    vs
}

/// One row per contingency class keyed `N-k`, one column per variant.
pub fn study_table(table: &StudyTable, field: StudyField) -> Table {
    let variants = study_variants(table);
    let mut t = Table::new(std::iter::once("scenario").chain(variants.iter().map(|v| v.label())));
    for k in table.classes() {
        let mut row = vec![Cell::Text(format!("N-{k}"))];
        for &v in &variants {
            row.push(match (table.get(k, v), field) {
                (None, _) => Cell::Empty,
                (Some(r), StudyField::Converged) => Cell::Int(r.converged as u64),
                (Some(r), StudyField::Shed) => Cell::Num(r.mean_shed),
            });
        }
        t.push(row);
    }
    t
}

/// Placement sweep in the shape of the capacitor table.
pub fn cpp_table(rows: &[(f64, Result<CppSolution, CppError>)]) -> Table {
    let mut t = Table::new([
        "v_min", "min_v", "max_v", "max_q", "count", "time_s", "status",
    ]);
    for (v, r) in rows {
        let mut row = vec![Cell::Num(*v)];
        match r {
            Ok(s) => {
                let ver = s.verification.as_ref();
                row.extend([
                    ver.map_or(Cell::Empty, |x| Cell::Num(x.min_v_violation)),
                    ver.map_or(Cell::Empty, |x| Cell::Num(x.max_v_violation)),
                    ver.map_or(Cell::Empty, |x| Cell::Num(x.max_q_violation)),
                    Cell::Int(s.count as u64),
                    Cell::Num(s.seconds),
                    Cell::Text(
                        match ver {
                            Some(x) if !x.converged => "ac_diverged",
                            _ => "optimal",
                        }
                        .into(),
                    ),
                ]);
            }
            Err(e) => {
                let status = match e {
                    CppError::Infeasible(_) => "infeasible",
                    CppError::NodeLimit(_) => "node_limit",
                    _ => "error",
                };
                row.extend([
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ]);
                row.push(Cell::Text(status.into()));
            }
        }
        t.push(row);
    }
    t
}
