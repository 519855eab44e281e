use serde::{Deserialize, Serialize};

use super::{Arrangement, Role, Species, Unit, UnitKind};
use crate::error::{Error, Result};
use crate::Stamp;

pub const ARRANGEMENT_FORMAT_VERSION: u32 = 1;

/// On-disk form of an [`Arrangement`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementDoc {
    pub version: u32,
    #[serde(rename = "S")]
    pub superatom_size: usize,
    pub blockade_radius: f64,
    pub units: Vec<UnitDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Stamp>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitDoc {
    pub id: usize,
    pub species: Species,
    pub kind: UnitKind,
    pub size: usize,
    pub x: f64,
    pub y: f64,
    pub role: Role,
}

impl Arrangement {
    pub fn to_doc(&self, generator: Option<Stamp>) -> ArrangementDoc {
        ArrangementDoc {
            version: ARRANGEMENT_FORMAT_VERSION,
            superatom_size: self.superatom_size,
            blockade_radius: self.blockade_radius,
            units: self
                .units
                .iter()
                .map(|u| UnitDoc {
                    id: u.id,
                    species: u.species,
                    kind: u.kind,
                    size: u.size,
                    x: u.position[0],
                    y: u.position[1],
                    role: u.role,
                })
                .collect(),
            generator,
        }
    }

    pub fn from_doc(doc: &ArrangementDoc) -> Result<Self> {
        if doc.version != ARRANGEMENT_FORMAT_VERSION {
            return Err(Error::InvalidLayout(format!(
                "unsupported arrangement version {}",
                doc.version
            )));
        }
        let units = doc
            .units
            .iter()
            .map(|u| Unit {
                id: u.id,
                species: u.species,
                kind: u.kind,
                size: u.size,
                position: [u.x, u.y],
                role: u.role,
            })
            .collect();
        Arrangement::from_units(units, doc.blockade_radius, doc.superatom_size)
    }

    pub fn to_json(&self, generator: Option<Stamp>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc(generator))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ArrangementDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }
}
