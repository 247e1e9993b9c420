use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leaf partitions of one federated tree as seen by the passive party.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceTree {
    pub tree_id: usize,
    /// Instance ids per recorded leaf.
    pub leaves: Vec<Vec<u64>>,
}

/// The passive party's accumulated view of federated leaf partitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LeafTrace {
    pub trees: Vec<TraceTree>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    tree_id: usize,
    leaf_id: usize,
    instance_id: u64,
}

impl LeafTrace {
    /// The first `n` trees only.
    pub fn prefix(&self, n: usize) -> LeafTrace {
        LeafTrace {
            trees: self.trees[..n.min(self.trees.len())].to_vec(),
        }
    }

    /// Trees with at least one recorded leaf.
    pub fn contributing_trees(&self) -> usize {
        self.trees.iter().filter(|t| !t.leaves.is_empty()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.contributing_trees() == 0
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["tree_id", "leaf_id", "instance_id"])?;
        for tree in &self.trees {
            for (leaf_id, leaf) in tree.leaves.iter().enumerate() {
                for &instance_id in leaf {
                    w.write_record(&[
                        tree.tree_id.to_string(),
                        leaf_id.to_string(),
                        instance_id.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads `(tree_id, leaf_id, instance_id)` rows. Trees and leaves are
    /// ordered by id; trees without any rows are not reconstructed.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<LeafTrace> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        let mut grouped: std::collections::BTreeMap<usize, std::collections::BTreeMap<usize, Vec<u64>>> =
            Default::default();
        for (i, row) in r.deserialize::<TraceRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })?;
            grouped
                .entry(row.tree_id)
                .or_default()
                .entry(row.leaf_id)
                .or_default()
                .push(row.instance_id);
        }
        Ok(LeafTrace {
            trees: grouped
                .into_iter()
                .map(|(tree_id, leaves)| TraceTree {
                    tree_id,
                    leaves: leaves.into_values().collect(),
                })
                .collect(),
        })
    }
}
