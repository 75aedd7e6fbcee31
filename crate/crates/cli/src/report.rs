use serde_json::{json, Map, Value};
use superpartner::{FamilyConstant, Grid, ParamPoint, SampledFunction};

/// A finished command: the JSON document, its CSV rendering and the verdict
/// that decides the exit code.
pub struct Report {
    pub json: Value,
    pub table: Table,
    pub pass: bool,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
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

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => csv_number(*v),
            Cell::Text(s) => quote(s),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

/// 17 significant digits; non-finite values print as `nan`, `inf`, `-inf`.
pub fn csv_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Non-finite numbers become `null`.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn nums(values: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(values.into_iter().map(num).collect())
}

/// Masked samples become `null`.
pub fn samples(f: &SampledFunction<f64>) -> Value {
    Value::Array((0..f.grid().len()).map(|i| f.value(i).map_or(Value::Null, num)).collect())
}

pub fn params(a: &ParamPoint<f64>) -> Value {
    Value::Object(a.iter().map(|(n, v)| (n.to_string(), num(v))).collect::<Map<_, _>>())
}

pub fn grid(g: &Grid<f64>) -> Value {
    json!({ "lo": num(g.x_lo()), "hi": num(g.x_hi()), "n": g.len(), "anchor": num(g.anchor_x()) })
}

pub fn family_constant(f: FamilyConstant<f64>) -> Value {
    match f {
        FamilyConstant::Finite(v) => num(v),
        FamilyConstant::Infinite => Value::String("inf".into()),
    }
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
