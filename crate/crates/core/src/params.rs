//! Transform parameter declarations and validation.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamType {
    Str,
    Int,
    Float,
    Bool,
}

impl ParamType {
    pub fn name(self) -> &'static str {
        match self {
            ParamType::Str => "string",
            ParamType::Int => "integer",
            ParamType::Float => "float",
            ParamType::Bool => "bool",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl ParamValue {
    pub fn parse(ty: ParamType, flag: &str, raw: &str) -> Result<ParamValue, ConfigError> {
        let mismatch =
            || ConfigError::TypeMismatch { flag: flag.to_string(), value: raw.to_string(), expected: ty.name() };
        Ok(match ty {
            ParamType::Str => ParamValue::Str(raw.to_string()),
            ParamType::Int => ParamValue::Int(raw.trim().parse().map_err(|_| mismatch())?),
            ParamType::Float => {
                let v: f64 = raw.trim().parse().map_err(|_| mismatch())?;
                if !v.is_finite() {
                    return Err(mismatch());
                }
                ParamValue::Float(v)
            }
            ParamType::Bool => match raw.trim().to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => ParamValue::Bool(true),
                "false" | "0" | "no" => ParamValue::Bool(false),
                _ => return Err(mismatch()),
            },
        })
    }

    pub fn param_type(&self) -> ParamType {
        match self {
            ParamValue::Str(_) => ParamType::Str,
            ParamValue::Int(_) => ParamType::Int,
            ParamValue::Float(_) => ParamType::Float,
            ParamValue::Bool(_) => ParamType::Bool,
        }
    }
}

/// Renders in a form that [`ParamValue::parse`] maps back to the same value.
impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Str(s) => f.write_str(s),
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Float(x) => write!(f, "{x:?}"),
            ParamValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParamDef {
    pub name: String,
    pub ty: ParamType,
    pub required: bool,
    pub default: Option<ParamValue>,
    pub help: String,
}

impl ParamDef {
    pub fn optional(name: &str, default: ParamValue, help: &str) -> Self {
        ParamDef {
            name: name.to_string(),
            ty: default.param_type(),
            required: false,
            default: Some(default),
            help: help.to_string(),
        }
    }

    /// Optional parameter with no default; absent from the validated map
    /// unless given.
    pub fn maybe(name: &str, ty: ParamType, help: &str) -> Self {
        ParamDef { name: name.to_string(), ty, required: false, default: None, help: help.to_string() }
    }

    pub fn required(name: &str, ty: ParamType, help: &str) -> Self {
        ParamDef { name: name.to_string(), ty, required: true, default: None, help: help.to_string() }
    }
}

pub type Validator = fn(&Params) -> Result<(), ConfigError>;

/// A transform's name, its declared parameters and a cross-field check.
#[derive(Clone, Debug)]
pub struct TransformConfigSpec {
    pub name: String,
    pub params: Vec<ParamDef>,
    pub validator: Option<Validator>,
}

impl TransformConfigSpec {
    pub fn new(name: &str) -> Self {
        assert!(is_valid_name(name), "invalid transform name {name:?}");
        TransformConfigSpec { name: name.to_string(), params: Vec::new(), validator: None }
    }

    pub fn param(mut self, def: ParamDef) -> Self {
        self.params.push(def);
        self
    }

    pub fn validator(mut self, v: Validator) -> Self {
        self.validator = Some(v);
        self
    }

    /// Full CLI flag (without dashes) for a parameter.
    pub fn flag(&self, param: &str) -> String {
        format!("{}_{}", self.name, param)
    }

    pub fn flags(&self) -> Vec<String> {
        self.params.iter().map(|p| self.flag(&p.name)).collect()
    }
}

/// Transform names double as CLI tokens and flag prefixes.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Validated, typed and defaulted parameter map keyed by unprefixed name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    prefix: String,
    values: BTreeMap<String, ParamValue>,
}

impl Params {
    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn str(&self, name: &str) -> &str {
        match self.values.get(name) {
            Some(ParamValue::Str(s)) => s,
            other => panic!("parameter {name} is not a string: {other:?}"),
        }
    }

    pub fn int(&self, name: &str) -> i64 {
        match self.values.get(name) {
            Some(ParamValue::Int(i)) => *i,
            other => panic!("parameter {name} is not an integer: {other:?}"),
        }
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.values.get(name) {
            Some(ParamValue::Float(x)) => *x,
            Some(ParamValue::Int(i)) => *i as f64,
            other => panic!("parameter {name} is not a float: {other:?}"),
        }
    }

    pub fn bool(&self, name: &str) -> bool {
        match self.values.get(name) {
            Some(ParamValue::Bool(b)) => *b,
            other => panic!("parameter {name} is not a bool: {other:?}"),
        }
    }

    pub fn opt_int(&self, name: &str) -> Option<i64> {
        self.contains(name).then(|| self.int(name))
    }

    pub fn opt_float(&self, name: &str) -> Option<f64> {
        self.contains(name).then(|| self.float(name))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ParamValue)> {
        self.values.iter()
    }

    /// Prefixed flag map, as echoed into job reports.
    pub fn to_flags(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(k, v)| (format!("{}_{}", self.prefix, k), v.to_string())).collect()
    }

    /// Error helper naming the prefixed flag.
    pub fn invalid(&self, name: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::invalid(format!("{}_{}", self.prefix, name), message)
    }
}

/// Types, defaults and checks a raw `name → string` map (keys unprefixed).
pub fn validate_params(spec: &TransformConfigSpec, raw: &BTreeMap<String, String>) -> Result<Params, ConfigError> {
    for key in raw.keys() {
        if !spec.params.iter().any(|p| &p.name == key) {
            let flag = spec.flag(key);
            return Err(ConfigError::UnknownFlag {
                suggestion: nearest(&flag, spec.flags().iter().map(String::as_str)),
                flag,
            });
        }
    }
    let mut values = BTreeMap::new();
    for def in &spec.params {
        let flag = spec.flag(&def.name);
        match raw.get(&def.name) {
            Some(text) => {
                values.insert(def.name.clone(), ParamValue::parse(def.ty, &flag, text)?);
            }
            None => match &def.default {
                Some(d) => {
                    values.insert(def.name.clone(), d.clone());
                }
                None if def.required => return Err(ConfigError::Missing(flag)),
                None => {}
            },
        }
    }
    let params = Params { prefix: spec.name.clone(), values };
    if let Some(check) = spec.validator {
        check(&params)?;
    }
    Ok(params)
}

/// Closest candidate by edit distance, if reasonably close.
pub fn nearest<'a>(target: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<String> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(target, c), c))
        .filter(|(d, c)| *d <= (c.len().max(target.len()) / 2).max(2))
        .min()
        .map(|(_, c)| c.to_string())
}
