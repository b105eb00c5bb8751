//! In-memory columnar document table and its Parquet encoding.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use arrow_array::{
    cast::AsArray, Array, ArrayRef, BinaryArray, BooleanArray, Float64Array, Int64Array, RecordBatch,
    RecordBatchOptions, StringArray,
};
use arrow_schema::{DataType, Field, Schema};
use bytes::Bytes;
use parquet::arrow::arrow_reader::ParquetRecordBatchReaderBuilder;
use parquet::arrow::ArrowWriter;
use parquet::basic::Compression;
use parquet::file::properties::WriterProperties;

use crate::error::TableError;

/// Canonical text column.
pub const CONTENTS: &str = "contents";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnType {
    String,
    Int64,
    Float64,
    Bool,
    Binary,
}

impl ColumnType {
    pub fn name(self) -> &'static str {
        match self {
            ColumnType::String => "string",
            ColumnType::Int64 => "int64",
            ColumnType::Float64 => "float64",
            ColumnType::Bool => "bool",
            ColumnType::Binary => "binary",
        }
    }

    fn arrow(self) -> DataType {
        match self {
            ColumnType::String => DataType::Utf8,
            ColumnType::Int64 => DataType::Int64,
            ColumnType::Float64 => DataType::Float64,
            ColumnType::Bool => DataType::Boolean,
            ColumnType::Binary => DataType::Binary,
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub enum ColumnData {
    String(Vec<String>),
    Int64(Vec<i64>),
    Float64(Vec<f64>),
    Bool(Vec<bool>),
    Binary(Vec<Vec<u8>>),
}

/// Floats compare by bit pattern so that logical equality is reflexive.
impl PartialEq for ColumnData {
    fn eq(&self, other: &Self) -> bool {
        use ColumnData::*;
        match (self, other) {
            (String(a), String(b)) => a == b,
            (Int64(a), Int64(b)) => a == b,
            (Float64(a), Float64(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()),
            (Bool(a), Bool(b)) => a == b,
            (Binary(a), Binary(b)) => a == b,
            _ => false,
        }
    }
}

macro_rules! each_variant {
    ($data:expr, $v:ident => $body:expr) => {
        match $data {
            ColumnData::String($v) => $body,
            ColumnData::Int64($v) => $body,
            ColumnData::Float64($v) => $body,
            ColumnData::Bool($v) => $body,
            ColumnData::Binary($v) => $body,
        }
    };
}

macro_rules! map_variant {
    ($data:expr, $v:ident => $body:expr) => {
        match $data {
            ColumnData::String($v) => ColumnData::String($body),
            ColumnData::Int64($v) => ColumnData::Int64($body),
            ColumnData::Float64($v) => ColumnData::Float64($body),
            ColumnData::Bool($v) => ColumnData::Bool($body),
            ColumnData::Binary($v) => ColumnData::Binary($body),
        }
    };
}

impl ColumnData {
    pub fn len(&self) -> usize {
        each_variant!(self, v => v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_type(&self) -> ColumnType {
        match self {
            ColumnData::String(_) => ColumnType::String,
            ColumnData::Int64(_) => ColumnType::Int64,
            ColumnData::Float64(_) => ColumnType::Float64,
            ColumnData::Bool(_) => ColumnType::Bool,
            ColumnData::Binary(_) => ColumnType::Binary,
        }
    }

    pub fn empty(ty: ColumnType) -> Self {
        match ty {
            ColumnType::String => ColumnData::String(Vec::new()),
            ColumnType::Int64 => ColumnData::Int64(Vec::new()),
            ColumnType::Float64 => ColumnData::Float64(Vec::new()),
            ColumnType::Bool => ColumnData::Bool(Vec::new()),
            ColumnType::Binary => ColumnData::Binary(Vec::new()),
        }
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            ColumnData::String(v) => Value::String(v[row].clone()),
            ColumnData::Int64(v) => Value::Int64(v[row]),
            ColumnData::Float64(v) => Value::Float64(v[row]),
            ColumnData::Bool(v) => Value::Bool(v[row]),
            ColumnData::Binary(v) => Value::Binary(v[row].clone()),
        }
    }

    /// Logical byte size of one value.
    pub fn value_size(&self, row: usize) -> u64 {
        match self {
            ColumnData::String(v) => v[row].len() as u64,
            ColumnData::Int64(_) | ColumnData::Float64(_) => 8,
            ColumnData::Bool(_) => 1,
            ColumnData::Binary(v) => v[row].len() as u64,
        }
    }

    #[allow(clippy::clone_on_copy)]
    fn filter(&self, keep: &[bool]) -> ColumnData {
        map_variant!(self, v => v
            .iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|(x, _)| x.clone())
            .collect())
    }

    fn slice(&self, start: usize, len: usize) -> ColumnData {
        map_variant!(self, v => v[start..start + len].to_vec())
    }

    fn append(&mut self, other: &ColumnData) -> bool {
        match (self, other) {
            (ColumnData::String(a), ColumnData::String(b)) => a.extend_from_slice(b),
            (ColumnData::Int64(a), ColumnData::Int64(b)) => a.extend_from_slice(b),
            (ColumnData::Float64(a), ColumnData::Float64(b)) => a.extend_from_slice(b),
            (ColumnData::Bool(a), ColumnData::Bool(b)) => a.extend_from_slice(b),
            (ColumnData::Binary(a), ColumnData::Binary(b)) => a.extend_from_slice(b),
            _ => return false,
        }
        true
    }

    fn to_arrow(&self) -> ArrayRef {
        match self {
            ColumnData::String(v) => Arc::new(StringArray::from_iter_values(v)),
            ColumnData::Int64(v) => Arc::new(Int64Array::from(v.clone())),
            ColumnData::Float64(v) => Arc::new(Float64Array::from(v.clone())),
            ColumnData::Bool(v) => Arc::new(BooleanArray::from(v.clone())),
            ColumnData::Binary(v) => Arc::new(BinaryArray::from_iter_values(v)),
        }
    }

    fn from_arrow(name: &str, array: &dyn Array) -> Result<ColumnData, TableError> {
        if array.null_count() > 0 {
            return Err(TableError::Unsupported { name: name.to_string(), reason: "null values".into() });
        }
        let data = match array.data_type() {
            DataType::Utf8 => {
                ColumnData::String(array.as_string::<i32>().iter().map(|s| s.unwrap_or_default().to_string()).collect())
            }
            DataType::LargeUtf8 => {
                ColumnData::String(array.as_string::<i64>().iter().map(|s| s.unwrap_or_default().to_string()).collect())
            }
            DataType::Int64 => {
                ColumnData::Int64(array.as_primitive::<arrow_array::types::Int64Type>().values().to_vec())
            }
            DataType::Float64 => {
                ColumnData::Float64(array.as_primitive::<arrow_array::types::Float64Type>().values().to_vec())
            }
            DataType::Boolean => ColumnData::Bool(array.as_boolean().iter().map(|b| b.unwrap_or(false)).collect()),
            DataType::Binary => {
                ColumnData::Binary(array.as_binary::<i32>().iter().map(|b| b.unwrap_or_default().to_vec()).collect())
            }
            DataType::LargeBinary => {
                ColumnData::Binary(array.as_binary::<i64>().iter().map(|b| b.unwrap_or_default().to_vec()).collect())
            }
            other => {
                return Err(TableError::Unsupported { name: name.to_string(), reason: format!("arrow type {other}") })
            }
        };
        Ok(data)
    }
}

/// A single cell value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    String(String),
    Int64(i64),
    Float64(f64),
    Bool(bool),
    Binary(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Column { name: name.into(), data }
    }
}

/// Named, typed, row-aligned columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DocTable {
    columns: Vec<Column>,
    num_rows: usize,
}

impl DocTable {
    pub fn new(columns: Vec<Column>) -> Result<Self, TableError> {
        let num_rows = columns.first().map_or(0, |c| c.data.len());
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(TableError::DuplicateColumn(c.name.clone()));
            }
            if c.data.len() != num_rows {
                return Err(TableError::RowCountMismatch {
                    name: c.name.clone(),
                    len: c.data.len(),
                    expected: num_rows,
                });
            }
        }
        Ok(DocTable { columns, num_rows })
    }

    /// Single string column named `contents`.
    pub fn from_contents<S: Into<String>>(docs: impl IntoIterator<Item = S>) -> Self {
        let docs: Vec<String> = docs.into_iter().map(Into::into).collect();
        DocTable::new(vec![Column::new(CONTENTS, ColumnData::String(docs))]).expect("single column is always valid")
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn schema(&self) -> Vec<(String, ColumnType)> {
        self.columns.iter().map(|c| (c.name.clone(), c.data.column_type())).collect()
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns.iter().find(|c| c.name == name).map(|c| &c.data)
    }

    pub fn strings(&self, name: &str) -> Result<&[String], TableError> {
        match self.require(name)? {
            ColumnData::String(v) => Ok(v),
            other => Err(wrong_type(name, ColumnType::String, other)),
        }
    }

    pub fn int64s(&self, name: &str) -> Result<&[i64], TableError> {
        match self.require(name)? {
            ColumnData::Int64(v) => Ok(v),
            other => Err(wrong_type(name, ColumnType::Int64, other)),
        }
    }

    fn require(&self, name: &str) -> Result<&ColumnData, TableError> {
        self.column(name).ok_or_else(|| TableError::MissingColumn(name.to_string()))
    }

    /// Adds a column, replacing any existing column of the same name in place.
    pub fn with_column(mut self, name: impl Into<String>, data: ColumnData) -> Result<Self, TableError> {
        let name = name.into();
        if data.len() != self.num_rows && !self.columns.is_empty() {
            return Err(TableError::RowCountMismatch { name, len: data.len(), expected: self.num_rows });
        }
        if self.columns.is_empty() {
            self.num_rows = data.len();
        }
        match self.columns.iter_mut().find(|c| c.name == name) {
            Some(existing) => existing.data = data,
            None => self.columns.push(Column { name, data }),
        }
        Ok(self)
    }

    pub fn filter(&self, keep: &[bool]) -> DocTable {
        assert_eq!(keep.len(), self.num_rows, "filter mask length");
        let num_rows = keep.iter().filter(|k| **k).count();
        DocTable {
            columns: self.columns.iter().map(|c| Column { name: c.name.clone(), data: c.data.filter(keep) }).collect(),
            num_rows,
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> DocTable {
        assert!(start + len <= self.num_rows, "slice out of range");
        DocTable {
            columns: self
                .columns
                .iter()
                .map(|c| Column { name: c.name.clone(), data: c.data.slice(start, len) })
                .collect(),
            num_rows: len,
        }
    }

    /// Appends rows of `other`, which must have the identical schema.
    pub fn append(&mut self, other: &DocTable) -> Result<(), TableError> {
        if self.schema() != other.schema() {
            return Err(TableError::SchemaMismatch(format!(
                "{} vs {}",
                describe_schema(&self.schema()),
                describe_schema(&other.schema())
            )));
        }
        for (mine, theirs) in self.columns.iter_mut().zip(&other.columns) {
            let ok = mine.data.append(&theirs.data);
            debug_assert!(ok);
        }
        self.num_rows += other.num_rows;
        Ok(())
    }

    pub fn concat<'a>(tables: impl IntoIterator<Item = &'a DocTable>) -> Result<DocTable, TableError> {
        let mut iter = tables.into_iter();
        let Some(first) = iter.next() else {
            return Ok(DocTable::default());
        };
        let mut out = first.clone();
        for t in iter {
            out.append(t)?;
        }
        Ok(out)
    }

    pub fn row(&self, index: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.data.value(index)).collect()
    }

    /// Per-row sum of value byte lengths.
    pub fn row_sizes(&self) -> Vec<u64> {
        (0..self.num_rows).map(|r| self.columns.iter().map(|c| c.data.value_size(r)).sum()).collect()
    }

    pub fn logical_size(&self) -> u64 {
        self.row_sizes().iter().sum()
    }

    pub fn to_parquet(&self) -> Result<Vec<u8>, TableError> {
        let fields: Vec<Field> =
            self.columns.iter().map(|c| Field::new(&c.name, c.data.column_type().arrow(), false)).collect();
        let schema = Arc::new(Schema::new(fields));
        let arrays: Vec<ArrayRef> = self.columns.iter().map(|c| c.data.to_arrow()).collect();
        let batch = RecordBatch::try_new_with_options(
            Arc::clone(&schema),
            arrays,
            &RecordBatchOptions::new().with_row_count(Some(self.num_rows)),
        )?;
        let props = WriterProperties::builder().set_compression(Compression::SNAPPY).build();
        let mut buf = Vec::new();
        let mut writer = ArrowWriter::try_new(&mut buf, schema, Some(props))?;
        writer.write(&batch)?;
        writer.close()?;
        Ok(buf)
    }

    pub fn from_parquet(data: &[u8]) -> Result<DocTable, TableError> {
        let builder = ParquetRecordBatchReaderBuilder::try_new(Bytes::copy_from_slice(data))?;
        let schema = Arc::clone(builder.schema());
        let mut columns: Vec<Column> = Vec::with_capacity(schema.fields().len());
        for field in schema.fields() {
            let ty = match field.data_type() {
                DataType::Utf8 | DataType::LargeUtf8 => ColumnType::String,
                DataType::Int64 => ColumnType::Int64,
                DataType::Float64 => ColumnType::Float64,
                DataType::Boolean => ColumnType::Bool,
                DataType::Binary | DataType::LargeBinary => ColumnType::Binary,
                other => {
                    return Err(TableError::Unsupported {
                        name: field.name().clone(),
                        reason: format!("arrow type {other}"),
                    })
                }
            };
            columns.push(Column::new(field.name().clone(), ColumnData::empty(ty)));
        }
        let mut num_rows = 0;
        for batch in builder.build()? {
            let batch = batch?;
            num_rows += batch.num_rows();
            for (col, array) in columns.iter_mut().zip(batch.columns()) {
                let part = ColumnData::from_arrow(&col.name, array.as_ref())?;
                col.data.append(&part);
            }
        }
        let mut table = DocTable::new(columns)?;
        table.num_rows = num_rows;
        Ok(table)
    }
}

fn wrong_type(name: &str, expected: ColumnType, actual: &ColumnData) -> TableError {
    TableError::WrongType { name: name.to_string(), expected: expected.name(), actual: actual.column_type().name() }
}

fn describe_schema(schema: &[(String, ColumnType)]) -> String {
    let parts: Vec<String> = schema.iter().map(|(n, t)| format!("{n}:{t}")).collect();
    format!("[{}]", parts.join(", "))
}
