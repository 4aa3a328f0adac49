use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_path: Option<String>,
    pub num_pages: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassageKind {
    Reaction,
    General,
}

/// Page rectangle in PDF points, origin at the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn center_distance(&self, other: &BoundingBox) -> f64 {
        let (ax, ay) = self.center();
        let (bx, by) = other.center();
        ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Passage {
    pub passage_id: String,
    pub doc_id: String,
    pub kind: PassageKind,
    pub text: String,
    pub page: u32,
    #[serde(default)]
    pub boxes: Vec<BoundingBox>,
    #[serde(default)]
    pub compound_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction_id: Option<String>,
}

/// A named and/or structured participant of a reaction. `canonical` is
/// derived from `smiles` at load time; any stored value is replaced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemEntity {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smiles: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionRecord {
    pub reaction_id: String,
    pub passage_id: String,
    #[serde(default)]
    pub reactants: Vec<ChemEntity>,
    #[serde(default)]
    pub products: Vec<ChemEntity>,
    #[serde(default)]
    pub catalysts: Vec<ChemEntity>,
    #[serde(default)]
    pub solvents: Vec<ChemEntity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yield_pct: Option<f64>,
}

impl ReactionRecord {
    pub fn entities(&self) -> impl Iterator<Item = &ChemEntity> {
        self.reactants
            .iter()
            .chain(&self.products)
            .chain(&self.catalysts)
            .chain(&self.solvents)
    }

    /// Reactants and products only; the entities that take part in linking.
    pub fn linkable_entities(&self) -> impl Iterator<Item = &ChemEntity> {
        self.reactants.iter().chain(&self.products)
    }

    fn entities_mut(&mut self) -> impl Iterator<Item = &mut ChemEntity> {
        self.reactants
            .iter_mut()
            .chain(self.products.iter_mut())
            .chain(self.catalysts.iter_mut())
            .chain(self.solvents.iter_mut())
    }

    pub(crate) fn for_each_entity_mut<E>(
        &mut self,
        mut f: impl FnMut(&mut ChemEntity) -> Result<(), E>,
    ) -> Result<(), E> {
        for e in self.entities_mut() {
            f(e)?;
        }
        Ok(())
    }
}

/// A parsed molecular diagram. `canonical` is derived from `smiles`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagram {
    pub diagram_id: String,
    pub doc_id: String,
    pub page: u32,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub smiles: String,
    #[serde(default)]
    pub canonical: String,
}
