//! Row filtering by a SQL-like predicate.
//!
//! Comparison semantics: integers compare exactly with integers and as f64
//! with floats; NaN is unordered, so only `!=` holds for it. Strings order
//! by bytes. Bools and binaries support only `=` and `!=`. `CONTAINS` is a
//! substring test between strings.

pub mod expr;

use std::cmp::Ordering;
use std::fmt;

use dpk_core::{
    ColumnData, ColumnType, DocTable, JobContext, ParamDef, ParamType, Params, Statistics, TableOutcome,
    TableTransform, TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};

pub use expr::{parse, CmpOp, Expr, Literal, Operand, ParseError};

use crate::PerWorker;

#[derive(Clone, Debug, PartialEq)]
pub enum FilterError {
    Parse(ParseError),
    UnknownColumn(String),
    TypeMismatch(String),
}

impl fmt::Display for FilterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterError::Parse(e) => e.fmt(f),
            FilterError::UnknownColumn(c) => write!(f, "unknown column {c:?}"),
            FilterError::TypeMismatch(m) => write!(f, "type mismatch: {m}"),
        }
    }
}

impl std::error::Error for FilterError {}

impl From<FilterError> for TransformError {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::UnknownColumn(c) => TransformError::MissingColumn(c),
            other => TransformError::InvalidInput(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Str,
    Num,
    Bool,
    Bin,
}

impl Kind {
    fn of_column(ty: ColumnType) -> Kind {
        match ty {
            ColumnType::String => Kind::Str,
            ColumnType::Int64 | ColumnType::Float64 => Kind::Num,
            ColumnType::Bool => Kind::Bool,
            ColumnType::Binary => Kind::Bin,
        }
    }

    fn of_literal(l: &Literal) -> Kind {
        match l {
            Literal::Str(_) => Kind::Str,
            Literal::Int(_) | Literal::Float(_) => Kind::Num,
            Literal::Bool(_) => Kind::Bool,
        }
    }
}

enum Cell<'a> {
    Str(&'a str),
    Int(i64),
    Float(f64),
    Bool(bool),
    Bin(&'a [u8]),
}

enum Bound<'a> {
    Column(&'a ColumnData),
    Lit(&'a Literal),
}

impl<'a> Bound<'a> {
    fn cell(&self, row: usize) -> Cell<'a> {
        match self {
            Bound::Column(ColumnData::String(v)) => Cell::Str(&v[row]),
            Bound::Column(ColumnData::Int64(v)) => Cell::Int(v[row]),
            Bound::Column(ColumnData::Float64(v)) => Cell::Float(v[row]),
            Bound::Column(ColumnData::Bool(v)) => Cell::Bool(v[row]),
            Bound::Column(ColumnData::Binary(v)) => Cell::Bin(&v[row]),
            Bound::Lit(Literal::Str(s)) => Cell::Str(s),
            Bound::Lit(Literal::Int(i)) => Cell::Int(*i),
            Bound::Lit(Literal::Float(x)) => Cell::Float(*x),
            Bound::Lit(Literal::Bool(b)) => Cell::Bool(*b),
        }
    }
}

enum Node<'a> {
    Cmp(Bound<'a>, CmpOp, Bound<'a>),
    Truth(Bound<'a>),
    Not(Box<Node<'a>>),
    And(Box<Node<'a>>, Box<Node<'a>>),
    Or(Box<Node<'a>>, Box<Node<'a>>),
}

fn bind<'a>(op: &'a Operand, table: &'a DocTable) -> Result<(Bound<'a>, Kind), FilterError> {
    match op {
        Operand::Column(name) => {
            let data = table.column(name).ok_or_else(|| FilterError::UnknownColumn(name.clone()))?;
            Ok((Bound::Column(data), Kind::of_column(data.column_type())))
        }
        Operand::Lit(l) => Ok((Bound::Lit(l), Kind::of_literal(l))),
    }
}

fn describe(op: &Operand) -> String {
    match op {
        Operand::Column(c) => c.clone(),
        Operand::Lit(l) => format!("{l:?}"),
    }
}

fn compile<'a>(e: &'a Expr, table: &'a DocTable) -> Result<Node<'a>, FilterError> {
    Ok(match e {
        Expr::Cmp { left, op, right } => {
            let (l, lk) = bind(left, table)?;
            let (r, rk) = bind(right, table)?;
            let ok = lk == rk
                && match op {
                    CmpOp::Contains => lk == Kind::Str,
                    o if o.is_ordering() => matches!(lk, Kind::Str | Kind::Num),
                    _ => true,
                };
            if !ok {
                return Err(FilterError::TypeMismatch(format!(
                    "{} {} {}",
                    describe(left),
                    op.symbol(),
                    describe(right)
                )));
            }
            Node::Cmp(l, *op, r)
        }
        Expr::Truth(o) => {
            let (b, k) = bind(o, table)?;
            if k != Kind::Bool {
                return Err(FilterError::TypeMismatch(format!("{} is not a bool", describe(o))));
            }
            Node::Truth(b)
        }
        Expr::Not(x) => Node::Not(Box::new(compile(x, table)?)),
        Expr::And(a, b) => Node::And(Box::new(compile(a, table)?), Box::new(compile(b, table)?)),
        Expr::Or(a, b) => Node::Or(Box::new(compile(a, table)?), Box::new(compile(b, table)?)),
    })
}

fn holds(ord: Option<Ordering>, op: CmpOp) -> bool {
    match (op, ord) {
        (CmpOp::Ne, None) => true,
        (_, None) => false,
        (CmpOp::Eq, Some(o)) => o == Ordering::Equal,
        (CmpOp::Ne, Some(o)) => o != Ordering::Equal,
        (CmpOp::Lt, Some(o)) => o == Ordering::Less,
        (CmpOp::Le, Some(o)) => o != Ordering::Greater,
        (CmpOp::Gt, Some(o)) => o == Ordering::Greater,
        (CmpOp::Ge, Some(o)) => o != Ordering::Less,
        (CmpOp::Contains, _) => unreachable!("handled by caller"),
    }
}

impl Node<'_> {
    fn eval(&self, row: usize) -> bool {
        match self {
            Node::Cmp(l, op, r) => {
                let (a, b) = (l.cell(row), r.cell(row));
                if *op == CmpOp::Contains {
                    return matches!((a, b), (Cell::Str(x), Cell::Str(y)) if x.contains(y));
                }
                let ord = match (a, b) {
                    (Cell::Int(x), Cell::Int(y)) => Some(x.cmp(&y)),
                    (Cell::Int(x), Cell::Float(y)) => (x as f64).partial_cmp(&y),
                    (Cell::Float(x), Cell::Int(y)) => x.partial_cmp(&(y as f64)),
                    (Cell::Float(x), Cell::Float(y)) => x.partial_cmp(&y),
                    (Cell::Str(x), Cell::Str(y)) => Some(x.cmp(y)),
                    (Cell::Bool(x), Cell::Bool(y)) => Some(x.cmp(&y)),
                    (Cell::Bin(x), Cell::Bin(y)) => Some(x.cmp(y)),
                    _ => unreachable!("kinds checked at compile time"),
                };
                holds(ord, *op)
            }
            Node::Truth(b) => matches!(b.cell(row), Cell::Bool(true)),
            Node::Not(x) => !x.eval(row),
            Node::And(a, b) => a.eval(row) && b.eval(row),
            Node::Or(a, b) => a.eval(row) || b.eval(row),
        }
    }
}

/// Per-row truth of `expr` over `table`.
pub fn evaluate(expr: &Expr, table: &DocTable) -> Result<Vec<bool>, FilterError> {
    let node = compile(expr, table)?;
    Ok((0..table.num_rows()).map(|r| node.eval(r)).collect())
}

pub struct FilterTransform {
    expr: Expr,
}

impl FilterTransform {
    pub fn new(source: &str) -> Result<Self, FilterError> {
        Ok(FilterTransform { expr: parse(source).map_err(FilterError::Parse)? })
    }
}

impl TableTransform for FilterTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let keep = evaluate(&self.expr, &table)?;
        let out = table.filter(&keep);
        let mut meta = Statistics::new();
        meta.add("rows_in", table.num_rows() as f64);
        meta.add("rows_out", out.num_rows() as f64);
        Ok((vec![out], meta))
    }
}

pub struct FilterConfiguration;

impl TransformConfiguration for FilterConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("filter")
            .param(ParamDef::required(
                "expr",
                ParamType::Str,
                "row predicate, e.g. \"lang = 'en' AND docq_total_words >= 50\"",
            ))
            .validator(|p| match parse(p.str("expr")) {
                Ok(_) => Ok(()),
                Err(e) => Err(p.invalid("expr", e.to_string())),
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let expr = parse(params.str("expr")).map_err(|e| TransformError::InvalidInput(e.to_string()))?;
        Ok(Box::new(PerWorker(move |_| FilterTransform { expr: expr.clone() })))
    }
}

#[cfg(test)]
mod tests {
    use dpk_core::Column;

    use super::*;

    fn table() -> DocTable {
        DocTable::new(vec![
            Column::new("contents", ColumnData::String(vec!["lorem ipsum".into(), "hello".into(), "Lorem".into()])),
            Column::new("docq_total_words", ColumnData::Int64(vec![12, 3, 40])),
            Column::new("lang", ColumnData::String(vec!["en".into(), "en".into(), "de".into()])),
            Column::new("score", ColumnData::Float64(vec![0.5, f64::NAN, 2.0])),
            Column::new("ok", ColumnData::Bool(vec![true, false, true])),
        ])
        .unwrap()
    }

    fn keep(src: &str) -> Vec<bool> {
        evaluate(&parse(src).unwrap(), &table()).unwrap()
    }

    #[test]
    fn conjunction() {
        assert_eq!(keep("docq_total_words >= 10 AND lang = 'en'"), [true, false, false]);
    }

    #[test]
    fn true_is_identity() {
        assert_eq!(keep("true"), [true, true, true]);
        assert_eq!(keep("ok"), [true, false, true]);
    }

    #[test]
    fn contains_is_case_sensitive_substring() {
        assert_eq!(keep("NOT contents CONTAINS 'lorem'"), [false, true, true]);
    }

    #[test]
    fn nan_is_unordered() {
        assert_eq!(keep("score < 1"), [true, false, false]);
        assert_eq!(keep("score != 1"), [true, true, true]);
        assert_eq!(keep("score = score"), [true, false, true]);
        assert_eq!(keep("docq_total_words < 3.5"), [false, true, false]);
    }

    #[test]
    fn unknown_columns_and_type_errors() {
        let t = table();
        assert_eq!(evaluate(&parse("nope = 1").unwrap(), &t).unwrap_err(), FilterError::UnknownColumn("nope".into()));
        for bad in ["lang = 1", "ok < true", "docq_total_words CONTAINS 'x'", "lang", "score"] {
            assert!(matches!(evaluate(&parse(bad).unwrap(), &t), Err(FilterError::TypeMismatch(_))), "{bad}");
        }
    }

    #[test]
    fn transform_reports_counts() {
        let mut f = FilterTransform::new("lang = 'en'").unwrap();
        let (out, meta) = f.transform(table(), "x").unwrap();
        assert_eq!(out[0].num_rows(), 2);
        assert_eq!(meta.get("rows_in"), 3.0);
        assert_eq!(meta.get("rows_out"), 2.0);
        assert!(FilterTransform::new("lang = ").is_err());
    }
}
