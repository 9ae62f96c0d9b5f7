//! Row-aligned feature matrix plus numeric target.

use serde::{Deserialize, Serialize};
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    target: Vec<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Matrix, target: Vec<f64>, column_names: Vec<String>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        if target.len() != features.rows() {
            return Err(Error::InvalidData(format!(
                "{} feature rows vs {} targets",
                features.rows(),
                target.len()
            )));
        }
        if column_names.len() != features.cols() {
            return Err(Error::InvalidData(format!(
                "{} columns vs {} column names",
                features.cols(),
                column_names.len()
            )));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite target value".into()));
        }
        Ok(Dataset { features, target, column_names })
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Rows gathered in the order given.
    pub fn subset_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            target: idx.iter().map(|&i| self.target[i]).collect(),
            column_names: self.column_names.clone(),
        }
    }

    /// Restriction to the named columns, in the order given.
    pub fn select_columns(&self, names: &[String]) -> Result<Dataset> {
        let idx = self.column_indices(names)?;
        Ok(Dataset {
            features: self.features.select_cols(&idx),
            target: self.target.clone(),
            column_names: names.to_vec(),
        })
    }

    pub fn column_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                self.column_names
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::UnknownColumn {
                        name: name.clone(),
                        available: self.column_names.clone(),
                    })
            })
            .collect()
    }

    pub fn target_mean(&self) -> f64 {
        self.target.iter().sum::<f64>() / self.target.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let features = Matrix::from_vec(3, 2, vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0]).unwrap();
        Dataset::new(features, vec![1.0, 2.0, 3.0], vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn validates_alignment() {
        let features = Matrix::zeros(2, 1);
        assert!(Dataset::new(features.clone(), vec![1.0], vec!["x".into()]).is_err());
        assert!(Dataset::new(features, vec![1.0, f64::INFINITY], vec!["x".into()]).is_err());
    }

    #[test]
    fn subset_and_column_selection() {
        let d = toy();
        let rows = d.subset_rows(&[2, 0]);
        assert_eq!(rows.target(), &[3.0, 1.0]);
        let cols = d.select_columns(&["b".into()]).unwrap();
        assert_eq!(cols.features().column(0), vec![10.0, 20.0, 30.0]);
        assert!(matches!(
            d.select_columns(&["missing".into()]),
            Err(Error::UnknownColumn { .. })
        ));
    }
}
