//! Re-chunks a stream of tables to a row count or logical byte size.
//!
//! Rows are buffered across calls. Full chunks are emitted as soon as they
//! are complete; the remainder goes out at flush. Ordering and chunk
//! boundaries are global only with a single worker.

use dpk_core::{
    DocTable, JobContext, ParamDef, ParamType, Params, Statistics, TableOutcome, TableTransform, TransformConfigSpec,
    TransformConfiguration, TransformError, TransformJob,
};

use crate::PerWorker;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SizeBound {
    Rows(usize),
    /// Logical bytes: the sum of value byte lengths.
    Bytes(u64),
}

pub struct ResizeTransform {
    bound: SizeBound,
    buffer: Option<DocTable>,
}

impl ResizeTransform {
    pub fn new(bound: SizeBound) -> Self {
        ResizeTransform { bound, buffer: None }
    }

    /// Lengths of the complete chunks at the front of `t`.
    fn complete_chunks(&self, t: &DocTable) -> Vec<usize> {
        match self.bound {
            SizeBound::Rows(max) => vec![max; t.num_rows() / max],
            SizeBound::Bytes(max) => {
                let sizes = t.row_sizes();
                let mut out = Vec::new();
                let (mut start, mut acc) = (0, 0u64);
                for (i, &s) in sizes.iter().enumerate() {
                    if i > start && acc + s > max {
                        out.push(i - start);
                        start = i;
                        acc = 0;
                    }
                    acc += s;
                }
                // A trailing run is complete only if it reaches the bound.
                if start < sizes.len() && acc >= max {
                    out.push(sizes.len() - start);
                }
                out
            }
        }
    }

    fn cut(&mut self) -> Vec<DocTable> {
        let Some(buf) = self.buffer.take() else {
            return Vec::new();
        };
        let chunks = self.complete_chunks(&buf);
        let mut out = Vec::with_capacity(chunks.len());
        let mut start = 0;
        for len in chunks {
            out.push(buf.slice(start, len));
            start += len;
        }
        if start < buf.num_rows() {
            self.buffer = Some(if start == 0 { buf } else { buf.slice(start, buf.num_rows() - start) });
        }
        out
    }
}

fn stats(rows_in: usize, out: &[DocTable]) -> Statistics {
    let mut meta = Statistics::new();
    meta.add("rows_in", rows_in as f64);
    meta.add("rows_out", out.iter().map(DocTable::num_rows).sum::<usize>() as f64);
    meta.add("tables_out", out.len() as f64);
    meta
}

impl TableTransform for ResizeTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let rows_in = table.num_rows();
        match &mut self.buffer {
            Some(buf) => buf.append(&table)?,
            None if rows_in > 0 => self.buffer = Some(table),
            None => {}
        }
        let out = self.cut();
        let meta = stats(rows_in, &out);
        Ok((out, meta))
    }

    fn flush(&mut self) -> Result<TableOutcome, TransformError> {
        let out: Vec<DocTable> = self.buffer.take().into_iter().collect();
        let meta = stats(0, &out);
        Ok((out, meta))
    }
}

pub struct ResizeConfiguration;

impl ResizeConfiguration {
    pub fn bound(params: &Params) -> SizeBound {
        match (params.opt_int("max_rows_per_table"), params.opt_float("max_mbytes_per_table")) {
            (Some(r), _) => SizeBound::Rows(r as usize),
            (None, Some(mb)) => SizeBound::Bytes(((mb * 1024.0 * 1024.0).floor() as u64).max(1)),
            (None, None) => unreachable!("validated"),
        }
    }
}

impl TransformConfiguration for ResizeConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("resize")
            .param(ParamDef::maybe("max_rows_per_table", ParamType::Int, "rows per output table"))
            .param(ParamDef::maybe("max_mbytes_per_table", ParamType::Float, "logical MiB per output table"))
            .validator(|p| match (p.opt_int("max_rows_per_table"), p.opt_float("max_mbytes_per_table")) {
                (Some(_), Some(_)) | (None, None) => Err(p.invalid(
                    "max_rows_per_table",
                    "set exactly one of resize_max_rows_per_table and resize_max_mbytes_per_table",
                )),
                (Some(r), None) if r < 1 => Err(p.invalid("max_rows_per_table", "must be >= 1")),
                (None, Some(m)) if m.is_nan() || m <= 0.0 => Err(p.invalid("max_mbytes_per_table", "must be > 0")),
                _ => Ok(()),
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let bound = Self::bound(params);
        Ok(Box::new(PerWorker(move |_| ResizeTransform::new(bound))))
    }
}
