//! Selected SNP sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of distinct SNP column indices selected for interaction scoring.
///
/// Indices are kept sorted ascending, so two sets over the same SNPs compare
/// equal regardless of selection order, and the base-3 cell indexing of the
/// reward tabulation is reproducible: the smallest index is the most
/// significant digit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSet {
    indices: Vec<usize>,
}

impl ActionSet {
    /// Builds a set from indices in any order. Errors on an empty list or
    /// duplicate indices.
    pub fn new(indices: impl Into<Vec<usize>>) -> Result<Self> {
        let mut indices = indices.into();
        if indices.is_empty() {
            return Err(Error::invalid("action set must contain at least one SNP"));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "action set contains a duplicate SNP index: {indices:?}"
            )));
        }
        Ok(ActionSet { indices })
    }

    /// Number of SNPs in the set (the interaction order n).
    pub fn order(&self) -> usize {
        self.indices.len()
    }

    /// Sorted ascending indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

impl std::fmt::Display for ActionSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, idx) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let a = ActionSet::new(vec![7, 2]).unwrap();
        let b = ActionSet::new(vec![2, 7]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.indices(), &[2, 7]);
        assert_eq!(a.order(), 2);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(ActionSet::new(vec![3, 3]).is_err());
        assert!(ActionSet::new(Vec::new()).is_err());
    }

    #[test]
    fn display_is_brace_delimited() {
        let a = ActionSet::new(vec![9, 1]).unwrap();
        assert_eq!(a.to_string(), "{1,9}");
    }
}
