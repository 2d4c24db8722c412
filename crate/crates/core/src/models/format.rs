//! Versioned JSON model files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Algorithm, TrainedModel};

pub const MODEL_FORMAT: &str = "heatcast-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted model together with what it was fitted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub algorithm: Algorithm,
    pub counter_id: String,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(algorithm: Algorithm, counter_id: impl Into<String>, model: TrainedModel) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            algorithm,
            counter_id: counter_id.into(),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Format(format!("not a model file (format {:?})", self.format)));
        }
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model file version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                self.version
            )));
        }
        Ok(())
    }
}

pub fn write_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, file)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let file: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    file.check()?;
    Ok(file)
}
