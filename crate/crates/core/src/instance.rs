//! Instance files: `{"problem", "n_vars", "lambda", "coeffs", "dims"}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::criteria::{CFInstance, CaratheodoryInstance, Problem};
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::CMat;
use crate::words::{AdmissibleSet, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub out_dim: usize,
    pub in_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub problem: Problem,
    pub n_vars: usize,
    pub lambda: Vec<Word>,
    #[serde(with = "json::coeff_map")]
    pub coeffs: BTreeMap<Word, CMat>,
    pub dims: Dims,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Caratheodory(CaratheodoryInstance),
    Cf(CFInstance),
}

impl Instance {
    pub fn problem(&self) -> Problem {
        match self {
            Instance::Caratheodory(_) => Problem::Caratheodory,
            Instance::Cf(_) => Problem::Cf,
        }
    }

    pub fn lambda(&self) -> &AdmissibleSet {
        match self {
            Instance::Caratheodory(i) => i.lambda(),
            Instance::Cf(i) => i.lambda(),
        }
    }

    pub fn with_lambda(&self, wider: AdmissibleSet) -> Result<Instance> {
        Ok(match self {
            Instance::Caratheodory(i) => Instance::Caratheodory(i.with_lambda(wider)?),
            Instance::Cf(i) => Instance::Cf(i.with_lambda(wider)?),
        })
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        match inst {
            Instance::Caratheodory(i) => InstanceFile {
                problem: Problem::Caratheodory,
                n_vars: i.lambda().n_vars(),
                lambda: i.lambda().iter().cloned().collect(),
                coeffs: i.data().coeffs().clone(),
                dims: Dims { out_dim: i.dim(), in_dim: i.dim() },
            },
            Instance::Cf(i) => InstanceFile {
                problem: Problem::Cf,
                n_vars: i.lambda().n_vars(),
                lambda: i.lambda().iter().cloned().collect(),
                coeffs: i.coeffs().clone(),
                dims: Dims { out_dim: i.out_dim(), in_dim: i.in_dim() },
            },
        }
    }

    pub fn into_instance(self) -> Result<Instance> {
        let lambda = AdmissibleSet::new(self.n_vars, self.lambda)?;
        match self.problem {
            Problem::Caratheodory => {
                if self.dims.out_dim != self.dims.in_dim {
                    return Err(Error::DimensionMismatch("Carathéodory data need square coefficients".into()));
                }
                Ok(Instance::Caratheodory(CaratheodoryInstance::from_coeffs(lambda, self.dims.out_dim, self.coeffs)?))
            }
            Problem::Cf => Ok(Instance::Cf(CFInstance::new(lambda, self.dims.out_dim, self.dims.in_dim, self.coeffs)?)),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.into_instance()
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn instance_to_string(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes");
    s.push('\n');
    s
}

/// Reads an index set given either as `{"n_vars": N, "words": [...]}` or as
/// a bare list of word keys (then `n_vars` must be supplied).
pub fn parse_lambda(text: &str, n_vars: Option<usize>) -> Result<AdmissibleSet> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.is_array() {
        let words: Vec<Word> = serde_json::from_value(value)?;
        let n = n_vars
            .or_else(|| words.iter().map(Word::max_letter).max())
            .ok_or_else(|| Error::InvalidData("cannot infer n_vars from an empty word list".into()))?;
        return AdmissibleSet::new(n, words);
    }
    let set: AdmissibleSet = serde_json::from_value(value)?;
    if let Some(n) = n_vars {
        if n != set.n_vars() {
            return Err(Error::DimensionMismatch(format!("index set is over {} letters, not {n}", set.n_vars())));
        }
    }
    Ok(set)
}
