//! Random filter expressions over a fixed mixed-type schema, their source
//! rendering, and a row-wise reference interpreter.

#![allow(dead_code)]

use dpk_core::{Column, ColumnData, DocTable, Value};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub enum Lit {
    S(String),
    I(i64),
    F(f64),
    B(bool),
}

#[derive(Clone, Debug)]
pub enum Rhs {
    Lit(Lit),
    Col(&'static str),
}

#[derive(Clone, Debug)]
pub enum T {
    Cmp(&'static str, &'static str, Rhs),
    Bare(&'static str),
    True,
    Not(Box<T>),
    And(Box<T>, Box<T>),
    Or(Box<T>, Box<T>),
}

pub const STR_COLS: [&str; 2] = ["s", "s2"];
pub const NUM_COLS: [&str; 3] = ["i", "j", "x"];
pub const BOOL_COLS: [&str; 2] = ["flag", "flag2"];
pub const BIN_COLS: [&str; 2] = ["bin", "bin2"];
pub const ORDER_OPS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];
pub const EQ_OPS: [&str; 2] = ["=", "!="];

pub fn word(r: &mut ChaCha8Rng) -> String {
    const ALPHA: [char; 5] = ['a', 'b', 'c', '\'', ' '];
    (0..r.random_range(0..4)).map(|_| ALPHA[r.random_range(0..ALPHA.len())]).collect()
}

pub fn num(r: &mut ChaCha8Rng) -> f64 {
    r.random_range(-10..=10) as f64 / 2.0
}

pub fn table(r: &mut ChaCha8Rng, rows: usize) -> DocTable {
    let strs = |r: &mut ChaCha8Rng| ColumnData::String((0..rows).map(|_| word(r)).collect());
    let ints = |r: &mut ChaCha8Rng| ColumnData::Int64((0..rows).map(|_| r.random_range(-5..=5)).collect());
    let bools = |r: &mut ChaCha8Rng| ColumnData::Bool((0..rows).map(|_| r.random_bool(0.5)).collect());
    let bins = |r: &mut ChaCha8Rng| {
        ColumnData::Binary(
            (0..rows).map(|_| (0..r.random_range(0..2)).map(|_| r.random_range(0..2u8)).collect()).collect(),
        )
    };
    let x = ColumnData::Float64((0..rows).map(|_| if r.random_bool(0.1) { f64::NAN } else { num(r) }).collect());
    DocTable::new(vec![
        Column::new("s", strs(r)),
        Column::new("s2", strs(r)),
        Column::new("i", ints(r)),
        Column::new("j", ints(r)),
        Column::new("x", x),
        Column::new("flag", bools(r)),
        Column::new("flag2", bools(r)),
        Column::new("bin", bins(r)),
        Column::new("bin2", bins(r)),
    ])
    .unwrap()
}

pub fn pick<T: Copy>(r: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[r.random_range(0..xs.len())]
}

pub fn leaf(r: &mut ChaCha8Rng) -> T {
    match r.random_range(0..9) {
        0 | 1 => {
            let c = pick(r, &STR_COLS);
            let op = if r.random_bool(0.25) { "CONTAINS" } else { pick(r, &ORDER_OPS) };
            let rhs = if r.random_bool(0.3) { Rhs::Col(pick(r, &STR_COLS)) } else { Rhs::Lit(Lit::S(word(r))) };
            T::Cmp(c, op, rhs)
        }
        2..=4 => {
            let c = pick(r, &NUM_COLS);
            let rhs = match r.random_range(0..3) {
                0 => Rhs::Col(pick(r, &NUM_COLS)),
                1 => Rhs::Lit(Lit::I(r.random_range(-6..=6))),
                _ => Rhs::Lit(Lit::F(num(r))),
            };
            T::Cmp(c, pick(r, &ORDER_OPS), rhs)
        }
        5 => {
            let rhs =
                if r.random_bool(0.5) { Rhs::Col(pick(r, &BOOL_COLS)) } else { Rhs::Lit(Lit::B(r.random_bool(0.5))) };
            T::Cmp(pick(r, &BOOL_COLS), pick(r, &EQ_OPS), rhs)
        }
        6 => T::Cmp(pick(r, &BIN_COLS), pick(r, &EQ_OPS), Rhs::Col(pick(r, &BIN_COLS))),
        7 => T::Bare(pick(r, &BOOL_COLS)),
        _ => T::True,
    }
}

pub fn tree(r: &mut ChaCha8Rng, depth: usize) -> T {
    if depth == 0 || r.random_bool(0.3) {
        return leaf(r);
    }
    match r.random_range(0..3) {
        0 => T::Not(Box::new(tree(r, depth - 1))),
        1 => T::And(Box::new(tree(r, depth - 1)), Box::new(tree(r, depth - 1))),
        _ => T::Or(Box::new(tree(r, depth - 1)), Box::new(tree(r, depth - 1))),
    }
}

pub fn kw(r: &mut ChaCha8Rng, k: &str) -> String {
    if r.random_bool(0.5) {
        k.to_lowercase()
    } else {
        k.to_string()
    }
}

/// Fully parenthesized source text with randomized operator spellings.
pub fn render(t: &T, r: &mut ChaCha8Rng) -> String {
    match t {
        T::Cmp(c, op, rhs) => {
            let op = match *op {
                "=" if r.random_bool(0.5) => "==".to_string(),
                "!=" if r.random_bool(0.5) => "<>".to_string(),
                "CONTAINS" => kw(r, "CONTAINS"),
                o => o.to_string(),
            };
            let rhs = match rhs {
                Rhs::Col(c) => format!("\"{c}\""),
                Rhs::Lit(Lit::S(s)) => format!("'{}'", s.replace('\'', "''")),
                Rhs::Lit(Lit::I(i)) => i.to_string(),
                Rhs::Lit(Lit::F(f)) => format!("{f:?}"),
                Rhs::Lit(Lit::B(b)) => kw(r, &b.to_string().to_uppercase()),
            };
            format!("{c} {op} {rhs}")
        }
        T::Bare(c) => c.to_string(),
        T::True => kw(r, "TRUE"),
        T::Not(x) => format!("{} ({})", kw(r, "NOT"), render(x, r)),
        T::And(a, b) => format!("({}) {} ({})", render(a, r), kw(r, "AND"), render(b, r)),
        T::Or(a, b) => format!("({}) {} ({})", render(a, r), kw(r, "OR"), render(b, r)),
    }
}

pub fn cell(row: &[Value], names: &[String], c: &str) -> Value {
    row[names.iter().position(|n| n == c).unwrap()].clone()
}

pub fn as_f64(v: &Value) -> f64 {
    match v {
        Value::Int64(i) => *i as f64,
        Value::Float64(f) => *f,
        other => panic!("not numeric: {other:?}"),
    }
}

/// Row-wise interpreter.
pub fn oracle(t: &T, row: &[Value], names: &[String]) -> bool {
    match t {
        T::True => true,
        T::Bare(c) => cell(row, names, c) == Value::Bool(true),
        T::Not(x) => !oracle(x, row, names),
        T::And(a, b) => oracle(a, row, names) && oracle(b, row, names),
        T::Or(a, b) => oracle(a, row, names) || oracle(b, row, names),
        T::Cmp(c, op, rhs) => {
            let l = cell(row, names, c);
            let r = match rhs {
                Rhs::Col(c2) => cell(row, names, c2),
                Rhs::Lit(Lit::S(s)) => Value::String(s.clone()),
                Rhs::Lit(Lit::I(i)) => Value::Int64(*i),
                Rhs::Lit(Lit::F(f)) => Value::Float64(*f),
                Rhs::Lit(Lit::B(b)) => Value::Bool(*b),
            };
            let ord = match (&l, &r) {
                (Value::String(a), Value::String(b)) => {
                    if *op == "CONTAINS" {
                        return a.contains(b.as_str());
                    }
                    Some(a.cmp(b))
                }
                (Value::Int64(a), Value::Int64(b)) => Some(a.cmp(b)),
                (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
                (Value::Binary(a), Value::Binary(b)) => Some(a.cmp(b)),
                (a, b) => {
                    let (a, b) = (as_f64(a), as_f64(b));
                    if a.is_nan() || b.is_nan() {
                        None
                    } else {
                        a.partial_cmp(&b)
                    }
                }
            };
            match ord {
                None => *op == "!=",
                Some(o) => match *op {
                    "=" => o.is_eq(),
                    "!=" => o.is_ne(),
                    "<" => o.is_lt(),
                    "<=" => o.is_le(),
                    ">" => o.is_gt(),
                    ">=" => o.is_ge(),
                    _ => unreachable!(),
                },
            }
        }
    }
}
