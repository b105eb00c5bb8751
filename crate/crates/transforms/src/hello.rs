//! The minimal example transform: adds a greeting column.

use dpk_core::{
    ColumnData, DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableOutcome, TableTransform,
    TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};

use crate::PerWorker;

pub struct HelloTransform {
    who: String,
    column_name: String,
}

impl HelloTransform {
    pub fn new(who: impl Into<String>, column_name: impl Into<String>) -> Self {
        HelloTransform { who: who.into(), column_name: column_name.into() }
    }
}

impl TableTransform for HelloTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let greeting = format!("Hello {}!", self.who);
        let rows = table.num_rows();
        let table = table.with_column(&self.column_name, ColumnData::String(vec![greeting; rows]))?;
        let mut meta = Statistics::new();
        meta.add("nrows", rows as f64);
        Ok((vec![table], meta))
    }
}

pub struct HelloConfiguration;

impl TransformConfiguration for HelloConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("hello")
            .param(ParamDef::optional("who", ParamValue::Str("World".into()), "Who to say hello to."))
            .param(ParamDef::optional("column_name", ParamValue::Str("greeting".into()), "Name of column to add"))
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let who = params.str("who").to_string();
        let column = params.str("column_name").to_string();
        Ok(Box::new(PerWorker(move |_| HelloTransform::new(who.clone(), column.clone()))))
    }
}
