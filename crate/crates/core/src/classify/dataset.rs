use serde::{Deserialize, Serialize};

use super::{ClassifyError, FeatureSchema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub id: String,
    pub values: Vec<f64>,
    pub target: u8,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema) -> Self {
        Self { schema, rows: Vec::new() }
    }

    pub fn push(&mut self, id: impl Into<String>, values: Vec<f64>, target: u8) -> Result<(), ClassifyError> {
        self.push_weighted(id, values, target, 1.0)
    }

    pub fn push_weighted(
        &mut self,
        id: impl Into<String>,
        values: Vec<f64>,
        target: u8,
        weight: f64,
    ) -> Result<(), ClassifyError> {
        if values.len() != self.schema.len() {
            return Err(ClassifyError::SchemaMismatch(format!(
                "row has {} values, schema has {}",
                values.len(),
                self.schema.len()
            )));
        }
        if target > 1 {
            return Err(ClassifyError::BadTarget(target));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(ClassifyError::BadWeight(weight));
        }
        self.rows.push(Row { id: id.into(), values, target, weight });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.target == 1).count()
    }

    /// Same rows restricted to the given columns.
    pub fn project(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.select(indices),
            rows: self
                .rows
                .iter()
                .map(|r| Row {
                    id: r.id.clone(),
                    values: indices.iter().map(|&i| r.values[i]).collect(),
                    target: r.target,
                    weight: r.weight,
                })
                .collect(),
        }
    }

    /// Column-major copy of the feature values.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.schema.len())
            .map(|j| self.rows.iter().map(|r| r.values[j]).collect())
            .collect()
    }
}
