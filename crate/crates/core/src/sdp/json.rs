//! JSON problem files.
//!
//! ```json
//! { "name": "...", "n": 3, "scalar": "exact",
//!   "F0": [[1, 1, "1"], [1, 2, "1/2"]],
//!   "vars": [ { "name": "y", "b": "1", "F": [[2, 2, "-1"]] } ] }
//! ```
//!
//! Indices are 1-based and address the upper triangle (`i ≤ j`). Values are
//! strings in the exact-scalar grammar (`"p/q+r/s*sqrt5"`) or, for
//! `"scalar": "double"`, decimal literals (strings or JSON numbers). An
//! optional `"offset"` carries a constant objective term and `"note"` a
//! free-text provenance remark.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;
use serde_json::Value;

use super::{Form, MatrixPencil, ScalarKind, SdpProblem};
use crate::exactnum::{Field, Matrix, QuadExt};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid problem at {location}: {message}")]
    Semantic { location: String, message: String },
}

/// A problem as loaded from disk, in whichever scalar type the file declares.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyProblem {
    Double(SdpProblem<f64>),
    Exact(SdpProblem<QuadExt>),
}

impl AnyProblem {
    pub fn name(&self) -> &str {
        match self {
            AnyProblem::Double(p) => &p.name,
            AnyProblem::Exact(p) => &p.name,
        }
    }

    pub fn scalar(&self) -> ScalarKind {
        match self {
            AnyProblem::Double(_) => ScalarKind::Double,
            AnyProblem::Exact(_) => ScalarKind::Exact,
        }
    }

    pub fn to_f64(&self) -> SdpProblem<f64> {
        match self {
            AnyProblem::Double(p) => p.clone(),
            AnyProblem::Exact(p) => p.to_f64(),
        }
    }

    /// Exact data; double files are converted through their exact binary values.
    pub fn to_exact(&self) -> SdpProblem<QuadExt> {
        match self {
            AnyProblem::Double(p) => p.to_exact(),
            AnyProblem::Exact(p) => p.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileProblem {
    name: String,
    n: usize,
    scalar: ScalarKind,
    #[serde(rename = "F0")]
    f0: Vec<Entry>,
    vars: UniqueVars,
    #[serde(default)]
    offset: Option<ValueText>,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileVar {
    name: String,
    b: ValueText,
    #[serde(rename = "F")]
    f: Vec<Entry>,
}

#[derive(Deserialize)]
struct Entry(usize, usize, ValueText);

/// A scalar literal as written in the file, checked to be parseable in at
/// least one of the two grammars so that typos are reported with a position.
struct ValueText(String);

impl<'de> Deserialize<'de> for ValueText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => {
                if s.parse::<QuadExt>().is_err() && s.parse::<f64>().is_err() {
                    return Err(de::Error::custom(format!("{s:?} is not a scalar literal")));
                }
                Ok(ValueText(s))
            }
            Value::Number(n) => Ok(ValueText(n.to_string())),
            other => Err(de::Error::custom(format!("expected a scalar, found {other}"))),
        }
    }
}

/// The `vars` array, rejecting duplicate names while it is read.
struct UniqueVars(Vec<FileVar>);

impl<'de> Deserialize<'de> for UniqueVars {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = UniqueVars;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of variables")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<UniqueVars, A::Error> {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                while let Some(v) = seq.next_element::<FileVar>()? {
                    if !seen.insert(v.name.clone()) {
                        return Err(de::Error::custom(format!(
                            "duplicate variable name {:?}",
                            v.name
                        )));
                    }
                    out.push(v);
                }
                Ok(UniqueVars(out))
            }
        }
        d.deserialize_seq(V)
    }
}

trait ParseValue: Field {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

impl ParseValue for QuadExt {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.parse().map_err(|e: crate::exactnum::ParseScalarError| e.to_string())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ParseValue for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(format!("{s:?} is not finite")),
            Err(_) => Err(format!("{s:?} is not a decimal number")),
        }
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

fn build_matrix<T: ParseValue>(n: usize, entries: &[Entry], location: &str) -> Result<Matrix<T>, LoadError> {
    let semantic = |message: String| LoadError::Semantic {
        location: location.to_string(),
        message,
    };
    let mut m = Matrix::zeros(n, n);
    let mut seen = HashSet::new();
    for Entry(i, j, v) in entries {
        let (i, j) = (*i, *j);
        if i == 0 || j == 0 || i > n || j > n {
            return Err(semantic(format!("index ({i}, {j}) outside 1..={n}")));
        }
        if i > j {
            return Err(semantic(format!(
                "index ({i}, {j}) is below the diagonal; give upper-triangle entries only"
            )));
        }
        if !seen.insert((i, j)) {
            return Err(semantic(format!("entry ({i}, {j}) given twice")));
        }
        let value = T::parse_value(&v.0).map_err(|e| semantic(format!("entry ({i}, {j}): {e}")))?;
        m.set_sym(i - 1, j - 1, value);
    }
    Ok(m)
}

fn build<T: ParseValue>(f: &FileProblem) -> Result<SdpProblem<T>, LoadError> {
    if f.n == 0 {
        return Err(LoadError::Semantic {
            location: "n".into(),
            message: "dimension must be positive".into(),
        });
    }
    let mut pencil = MatrixPencil::new(build_matrix::<T>(f.n, &f.f0, "F0")?);
    let mut objective = Vec::new();
    for (k, var) in f.vars.0.iter().enumerate() {
        let loc = format!("vars[{k}] ({:?})", var.name);
        pencil.push(var.name.clone(), build_matrix::<T>(f.n, &var.f, &loc)?);
        objective.push(T::parse_value(&var.b.0).map_err(|e| LoadError::Semantic {
            location: format!("{loc}.b"),
            message: e,
        })?);
    }
    let offset = match &f.offset {
        Some(v) => T::parse_value(&v.0).map_err(|e| LoadError::Semantic {
            location: "offset".into(),
            message: e,
        })?,
        None => T::zero(),
    };
    Ok(SdpProblem {
        name: f.name.clone(),
        note: f.note.clone().unwrap_or_default(),
        pencil,
        objective,
        offset,
        form: Form::DualForm,
    })
}

pub fn parse_problem(text: &str) -> Result<AnyProblem, LoadError> {
    let file: FileProblem = serde_json::from_str(text).map_err(|e| LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(match file.scalar {
        ScalarKind::Double => AnyProblem::Double(build(&file)?),
        ScalarKind::Exact => AnyProblem::Exact(build(&file)?),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn load_problem(path: &Path) -> Result<AnyProblem, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text)
}

fn entries_json<T: ParseValue>(m: &Matrix<T>) -> Value {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in i..m.cols() {
            if !m[(i, j)].is_zero() {
                out.push(Value::Array(vec![
                    Value::from(i + 1),
                    Value::from(j + 1),
                    Value::String(m[(i, j)].render()),
                ]));
            }
        }
    }
    Value::Array(out)
}

fn to_json<T: ParseValue>(p: &SdpProblem<T>, kind: ScalarKind) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("name".into(), Value::String(p.name.clone()));
    if !p.note.is_empty() {
        obj.insert("note".into(), Value::String(p.note.clone()));
    }
    obj.insert("n".into(), Value::from(p.dim()));
    obj.insert("scalar".into(), serde_json::to_value(kind).unwrap());
    if !p.offset.is_zero() {
        obj.insert("offset".into(), Value::String(p.offset.render()));
    }
    obj.insert("F0".into(), entries_json(&p.pencil.constant));
    let vars = p
        .pencil
        .terms
        .iter()
        .zip(&p.objective)
        .map(|(t, b)| {
            let mut v = serde_json::Map::new();
            v.insert("name".into(), Value::String(t.name.clone()));
            v.insert("b".into(), Value::String(b.render()));
            v.insert("F".into(), entries_json(&t.matrix));
            Value::Object(v)
        })
        .collect();
    obj.insert("vars".into(), Value::Array(vars));
    Value::Object(obj)
}

/// Canonical text of a problem: keys in a fixed order, entries in row-major
/// upper-triangle order, zeros omitted, scalar arrays on one line.
pub fn problem_to_string(p: &AnyProblem) -> String {
    let v = match p {
        AnyProblem::Double(p) => to_json(p, ScalarKind::Double),
        AnyProblem::Exact(p) => to_json(p, ScalarKind::Exact),
    };
    let mut s = String::new();
    write_value(&mut s, &v, 0);
    s.push('\n');
    s
}

pub fn exact_problem_to_string(p: &SdpProblem<QuadExt>) -> String {
    problem_to_string(&AnyProblem::Exact(p.clone()))
}

pub fn store_problem(p: &AnyProblem, path: &Path) -> Result<(), LoadError> {
    std::fs::write(path, problem_to_string(p)).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty printer that keeps arrays of scalars on one line.
pub fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&x.to_string());
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            let _ = write!(out, "{}]", pad(indent));
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), Value::String(key.clone()));
                write_value(out, x, indent + 1);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            let _ = write!(out, "{}}}", pad(indent));
        }
        other => out.push_str(&other.to_string()),
    }
}
