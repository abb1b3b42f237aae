use crate::classifier::FeatureMatrix;
use crate::cover::AssignmentMatrix;
use crate::error::{Error, Result};
use crate::graph::AttributeTable;

/// Feature rows paired with class labels; rows with a missing label are
/// never included.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: FeatureMatrix,
    /// Class index per row, into `classes`.
    pub labels: Vec<usize>,
    /// Sorted class vocabulary.
    pub classes: Vec<String>,
    /// Graph node behind each row.
    pub nodes: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(features: FeatureMatrix, labels: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::UniverseMismatch(features.rows(), labels.len()));
        }
        if labels.is_empty() {
            return Err(Error::Empty("dataset has no rows".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::InvalidParameter(format!("label {bad} has no class")));
        }
        let nodes = (0..labels.len()).collect();
        Ok(LabeledDataset {
            features,
            labels,
            classes,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows `rows` as a new dataset sharing the class vocabulary.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            classes: self.classes.clone(),
            nodes: rows.iter().map(|&r| self.nodes[r]).collect(),
        }
    }
}

/// Labels the rows of a per-node feature matrix with `attribute`, keeping
/// only nodes whose value is known. The class vocabulary is the set of
/// observed values.
pub fn build_dataset_from_features(
    features: &FeatureMatrix,
    attrs: &AttributeTable,
    attribute: &str,
) -> Result<LabeledDataset> {
    let attr = attrs.get(attribute)?;
    if features.rows() != attrs.node_count() {
        return Err(Error::UniverseMismatch(features.rows(), attrs.node_count()));
    }
    let nodes: Vec<usize> = (0..features.rows())
        .filter(|&v| attr.values[v].is_some())
        .collect();
    if nodes.is_empty() {
        return Err(Error::Empty(format!("no node has a value for {attribute:?}")));
    }
    let mut observed: Vec<usize> = nodes.iter().map(|&v| attr.values[v].unwrap()).collect();
    observed.sort_unstable();
    observed.dedup();
    let classes = observed.iter().map(|&c| attr.categories[c].clone()).collect();
    let labels = nodes
        .iter()
        .map(|&v| observed.binary_search(&attr.values[v].unwrap()).unwrap())
        .collect();
    Ok(LabeledDataset {
        features: features.select_rows(&nodes),
        labels,
        classes,
        nodes,
    })
}

/// [`build_dataset_from_features`] over a community assignment matrix.
pub fn build_dataset(
    matrix: &AssignmentMatrix,
    attrs: &AttributeTable,
    attribute: &str,
) -> Result<LabeledDataset> {
    build_dataset_from_features(&FeatureMatrix::from_assignment(matrix), attrs, attribute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::assignment_matrix;
    use crate::detectors::Cover;

    fn attrs(vals: &[Option<&str>]) -> AttributeTable {
        AttributeTable::from_columns(
            vals.len(),
            vec![("dorm".into(), vals.iter().map(|v| v.map(str::to_string)).collect())],
        )
        .unwrap()
    }

    #[test]
    fn drops_missing_rows() {
        let m = assignment_matrix(&Cover::new(vec![vec![0, 1]], "c"), 3).unwrap();
        let d = build_dataset(&m, &attrs(&[Some("A"), None, Some("B")]), "dorm").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.nodes, vec![0, 2]);
        assert_eq!(d.classes, vec!["A", "B"]);
        assert_eq!(d.labels, vec![0, 1]);
        assert_eq!(d.features.value(0, 0), 1.0);
        assert_eq!(d.features.value(1, 0), 0.0);
    }

    #[test]
    fn errors_and_constant_case() {
        let m = assignment_matrix(&Cover::empty("c"), 3).unwrap();
        assert!(matches!(
            build_dataset(&m, &attrs(&[None, None, None]), "dorm"),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            build_dataset(&m, &attrs(&[Some("A"); 3]), "year"),
            Err(Error::UnknownAttribute(_))
        ));
        let d = build_dataset(&m, &attrs(&[Some("A"); 3]), "dorm").unwrap();
        assert_eq!(d.classes.len(), 1);
        assert_eq!(d.len(), 3);
    }
}
