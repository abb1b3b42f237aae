use crate::cover::AssignmentMatrix;
use crate::graph::{AttributeTable, Graph};

/// One feature column: a 0/1 column stored as its ascending one-rows, or a
/// dense real column.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Binary(Vec<usize>),
    Dense(Vec<f64>),
}

/// Column-major feature matrix mixing binary and real-valued columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    columns: Vec<Column>,
    names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(rows: usize) -> Self {
        FeatureMatrix {
            rows,
            columns: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn from_assignment(m: &AssignmentMatrix) -> Self {
        let mut out = FeatureMatrix::new(m.rows());
        for j in 0..m.cols() {
            out.push_binary(m.column_ids()[j].clone(), m.column(j).to_vec());
        }
        out
    }

    /// Adds a binary column from its one-rows (any order, duplicates ignored).
    pub fn push_binary(&mut self, name: impl Into<String>, mut ones: Vec<usize>) {
        ones.sort_unstable();
        ones.dedup();
        assert!(ones.last().is_none_or(|&r| r < self.rows), "row out of range");
        self.columns.push(Column::Binary(ones));
        self.names.push(name.into());
    }

    pub fn push_dense(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.rows, "dense column length");
        self.columns.push(Column::Dense(values));
        self.names.push(name.into());
    }

    /// Appends all columns of `other`, which must have the same row count.
    pub fn extend(&mut self, other: FeatureMatrix) {
        assert_eq!(self.rows, other.rows, "row count mismatch");
        self.columns.extend(other.columns);
        self.names.extend(other.names);
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        match &self.columns[col] {
            Column::Binary(ones) => f64::from(u8::from(ones.binary_search(&row).is_ok())),
            Column::Dense(v) => v[row],
        }
    }

    /// Rows `rows` (in that order) as a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut position = vec![usize::MAX; self.rows];
        for (new, &old) in rows.iter().enumerate() {
            position[old] = new;
        }
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Binary(ones) => {
                    let mut mapped: Vec<usize> = ones
                        .iter()
                        .map(|&r| position[r])
                        .filter(|&p| p != usize::MAX)
                        .collect();
                    mapped.sort_unstable();
                    Column::Binary(mapped)
                }
                Column::Dense(v) => Column::Dense(rows.iter().map(|&r| v[r]).collect()),
            })
            .collect();
        FeatureMatrix {
            rows: rows.len(),
            columns,
            names: self.names.clone(),
        }
    }
}

/// Per-node features from attribute values: for every attribute other than
/// `exclude` and every category, the fraction of the node's neighbors with
/// that value (neighbors with a missing value are not counted; no known
/// neighbor gives 0), followed by one-hot columns of the node's own value.
pub fn neighbor_attribute_features(
    graph: &Graph,
    attrs: &AttributeTable,
    exclude: &str,
) -> FeatureMatrix {
    let n = graph.node_count();
    let mut out = FeatureMatrix::new(n);
    for attr in attrs.attributes().iter().filter(|a| a.name != exclude) {
        let k = attr.categories.len();
        let mut fractions = vec![vec![0.0; n]; k];
        for v in 0..n {
            let mut counts = vec![0usize; k];
            let mut known = 0usize;
            for &(u, _) in graph.neighbors(v) {
                if let Some(c) = attr.values[u] {
                    counts[c] += 1;
                    known += 1;
                }
            }
            if known > 0 {
                for c in 0..k {
                    fractions[c][v] = counts[c] as f64 / known as f64;
                }
            }
        }
        for (c, col) in fractions.into_iter().enumerate() {
            out.push_dense(format!("friends:{}={}", attr.name, attr.categories[c]), col);
        }
        for (c, cat) in attr.categories.iter().enumerate() {
            let ones = (0..n).filter(|&v| attr.values[v] == Some(c)).collect();
            out.push_binary(format!("own:{}={}", attr.name, cat), ones);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, cols: &[(&str, &[Option<&str>])]) -> AttributeTable {
        AttributeTable::from_columns(
            n,
            cols.iter()
                .map(|(name, vals)| {
                    (
                        name.to_string(),
                        vals.iter().map(|v| v.map(str::to_string)).collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn neighbor_fractions() {
        // node 0 joined to 1,2,3; node 4 joined to 5; node 6 isolated
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (0, 3), (4, 5)]).unwrap();
        let attrs = table(
            7,
            &[
                ("dorm", &[None, Some("A"), Some("A"), Some("B"), None, Some("A"), Some("B")]),
                ("year", &[Some("1"); 7]),
            ],
        );
        let f = neighbor_attribute_features(&g, &attrs, "year");
        assert_eq!(f.names()[0], "friends:dorm=A");
        assert_eq!(f.names()[1], "friends:dorm=B");
        assert!((f.value(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.value(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.value(4, 0), 1.0);
        assert_eq!((f.value(6, 0), f.value(6, 1)), (0.0, 0.0));
        // own one-hot columns follow the fractions
        assert_eq!(f.names()[2], "own:dorm=A");
        assert_eq!(f.value(1, 2), 1.0);
        assert_eq!(f.value(0, 2), 0.0);
        assert_eq!(f.cols(), 4);
    }

    #[test]
    fn missing_neighbors_are_excluded() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let attrs = table(3, &[("dorm", &[None, Some("A"), None])]);
        let f = neighbor_attribute_features(&g, &attrs, "other");
        assert_eq!(f.value(0, 0), 1.0);
    }

    #[test]
    fn select_rows_remaps() {
        let mut f = FeatureMatrix::new(4);
        f.push_binary("b", vec![0, 3]);
        f.push_dense("d", vec![0.1, 0.2, 0.3, 0.4]);
        let s = f.select_rows(&[3, 1]);
        assert_eq!(s.rows(), 2);
        assert_eq!(s.value(0, 0), 1.0);
        assert_eq!(s.value(1, 0), 0.0);
        assert_eq!(s.value(0, 1), 0.4);
    }
}
