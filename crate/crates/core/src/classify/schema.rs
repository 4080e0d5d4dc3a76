use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

/// Ordered, uniquely named feature columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureDef>,
}

impl FeatureSchema {
    /// Panics on duplicate names.
    pub fn new(features: Vec<FeatureDef>) -> Self {
        for (i, f) in features.iter().enumerate() {
            assert!(
                features[..i].iter().all(|g| g.name != f.name),
                "duplicate feature {}",
                f.name
            );
        }
        Self { features }
    }

    pub fn numeric(names: &[&str]) -> Self {
        Self::new(
            names
                .iter()
                .map(|n| FeatureDef { name: n.to_string(), kind: FeatureKind::Numeric })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Sub-schema keeping the given column indices in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::new(indices.iter().map(|&i| self.features[i].clone()).collect())
    }

    /// Hex sha256 over `name:kind` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for f in &self.features {
            let kind = match f.kind {
                FeatureKind::Numeric => "numeric",
                FeatureKind::Boolean => "boolean",
            };
            h.update(format!("{}:{}\n", f.name, kind));
        }
        hex::encode(h.finalize())
    }

    /// Positions in `self` of each of `other`'s columns.
    pub fn projection_to(&self, other: &FeatureSchema) -> Option<Vec<usize>> {
        other.features.iter().map(|f| self.features.iter().position(|g| g == f)).collect()
    }
}
