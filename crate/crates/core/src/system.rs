//! Any trained abstaining system behind one interface, persisted as a single
//! key=value file.

use std::path::Path;

use crate::attached::AttachedPipeline;
use crate::dataset::{LabelSpace, Scaler};
use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::merged::AbstainModel;

#[derive(Clone, Debug, PartialEq)]
pub enum TrainedSystem {
    Attached(AttachedPipeline),
    Merged(AbstainModel),
}

impl TrainedSystem {
    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        match self {
            TrainedSystem::Attached(p) => p.decide(x),
            TrainedSystem::Merged(m) => m.decide(x),
        }
    }

    /// Output labels; for labeled merged models this is `Y*`.
    pub fn label_space(&self) -> &LabelSpace {
        match self {
            TrainedSystem::Attached(p) => p.model().label_space(),
            TrainedSystem::Merged(m) => m.label_space(),
        }
    }

    pub fn scaler(&self) -> &Scaler {
        match self {
            TrainedSystem::Attached(p) => p.model().scaler(),
            TrainedSystem::Merged(m) => m.scaler(),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        self.scaler().names()
    }

    pub fn to_kv(&self) -> Result<KvDoc> {
        let mut doc = KvDoc::new();
        match self {
            TrainedSystem::Attached(p) => {
                doc.push("system", "attached");
                doc.extend_prefixed("attached.", &p.to_kv()?);
            }
            TrainedSystem::Merged(m) => {
                doc.push("system", "merged");
                doc.extend_prefixed("merged.", &m.to_kv()?);
            }
        }
        Ok(doc)
    }

    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        match doc.require("system")? {
            "attached" => Ok(TrainedSystem::Attached(AttachedPipeline::from_kv(&doc.section("attached."))?)),
            "merged" => Ok(TrainedSystem::Merged(AbstainModel::from_kv(&doc.section("merged."))?)),
            other => Err(Error::Format(format!("unknown system '{other}'"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_kv()?.write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(&KvDoc::read(path)?)
    }
}
