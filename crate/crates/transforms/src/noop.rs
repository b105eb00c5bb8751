//! 1:1 pass-through, optionally sleeping per call for harness calibration.

use std::thread;
use std::time::Duration;

use dpk_core::{
    DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableOutcome, TableTransform, TransformConfigSpec,
    TransformConfiguration, TransformError, TransformJob,
};

use crate::PerWorker;

pub struct NoopTransform {
    sleep: Duration,
}

impl NoopTransform {
    pub fn new(sleep_s: f64) -> Self {
        NoopTransform { sleep: Duration::from_secs_f64(sleep_s) }
    }
}

impl TableTransform for NoopTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        if !self.sleep.is_zero() {
            thread::sleep(self.sleep);
        }
        let mut meta = Statistics::new();
        meta.add("nrows", table.num_rows() as f64);
        Ok((vec![table], meta))
    }
}

pub struct NoopConfiguration;

impl TransformConfiguration for NoopConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("noop")
            .param(ParamDef::optional("sleep_s", ParamValue::Float(0.0), "seconds to sleep per file"))
            .validator(|p| {
                if p.float("sleep_s") < 0.0 {
                    return Err(p.invalid("sleep_s", "must be >= 0"));
                }
                Ok(())
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let sleep = params.float("sleep_s");
        Ok(Box::new(PerWorker(move |_| NoopTransform::new(sleep))))
    }
}
