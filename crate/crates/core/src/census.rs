//! Brute-force census of unlabeled rooted trees.
//!
//! Trees are generated directly as canonical forms: a tree on `m` vertices
//! is a root over a multiset of smaller trees whose sizes sum to `m - 1`.
//! Nothing here touches the counting recurrence, so it can be used to check
//! [`crate::topology::sizes_table`].

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::topology::{subtree_distribution, TreeCountTable};

/// Practical limit: the census materializes every class.
pub const MAX_CENSUS_SIZE: usize = 16;

/// Canonical forms (as produced by `RootedTree::canonical_form`) of every
/// rooted tree with `1..=n_max` vertices; entry `i` holds size `i + 1`.
pub fn rooted_tree_classes(n_max: usize) -> Vec<Vec<String>> {
    let mut by_size: Vec<Vec<String>> = Vec::with_capacity(n_max);
    for m in 1..=n_max {
        // all smaller classes, in a fixed order, for multiset selection
        let pool: Vec<(usize, &str)> = by_size
            .iter()
            .enumerate()
            .flat_map(|(i, forms)| forms.iter().map(move |f| (i + 1, f.as_str())))
            .collect();
        let mut found = BTreeSet::new();
        let mut chosen = Vec::new();
        choose(&pool, pool.len(), m - 1, &mut chosen, &mut found);
        by_size.push(found.into_iter().collect());
    }
    by_size
}

fn choose<'a>(
    pool: &[(usize, &'a str)],
    limit: usize,
    remaining: usize,
    chosen: &mut Vec<&'a str>,
    found: &mut BTreeSet<String>,
) {
    if remaining == 0 {
        let mut parts = chosen.clone();
        parts.sort_unstable();
        found.insert(format!("({})", parts.concat()));
        return;
    }
    for idx in 0..limit {
        let (size, form) = pool[idx];
        if size <= remaining {
            chosen.push(form);
            // indices are non-increasing, so each multiset is visited once
            choose(pool, idx + 1, remaining - size, chosen, found);
            chosen.pop();
        }
    }
}

pub fn count_rooted_trees(n_max: usize) -> Vec<u64> {
    rooted_tree_classes(n_max).iter().map(|c| c.len() as u64).collect()
}

#[derive(Debug, Clone)]
pub struct TableCheck {
    pub recurrence: Vec<u64>,
    pub enumerated: Vec<u64>,
    /// 1-based size of the first disagreement.
    pub first_mismatch: Option<usize>,
    /// Largest `|row sum - 1|` over the subtree distribution.
    pub max_row_error: f64,
}

impl TableCheck {
    pub const ROW_TOLERANCE: f64 = 1e-12;

    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.max_row_error <= Self::ROW_TOLERANCE
    }
}

/// Compares a count table against the census and checks that the derived
/// subtree distribution is normalized.
pub fn check_table(table: &TreeCountTable) -> Result<TableCheck> {
    let n_max = table.n_max();
    if n_max > MAX_CENSUS_SIZE {
        return Err(Error::invalid(format!(
            "census supports sizes up to {MAX_CENSUS_SIZE}, requested {n_max}"
        )));
    }
    let recurrence: Vec<u64> = table.counts().iter().map(|x| x.to_u64().unwrap_or(u64::MAX)).collect();
    let enumerated = count_rooted_trees(n_max);
    let first_mismatch = recurrence
        .iter()
        .zip(&enumerated)
        .position(|(a, b)| a != b)
        .map(|i| i + 1);

    let mut max_row_error = 0.0f64;
    if n_max >= 3 && first_mismatch.is_none() {
        let dist = subtree_distribution(table, n_max)?;
        for k in 3..=n_max {
            let sum: f64 = dist.row(k).iter().map(|s| s.probability).sum();
            max_row_error = max_row_error.max((sum - 1.0).abs());
        }
    }
    Ok(TableCheck {
        recurrence,
        enumerated,
        first_mismatch,
        max_row_error,
    })
}

/// Runs [`check_table`] on the recurrence output, optionally adding one to
/// entry `corrupt` (1-based) first as a negative control.
pub fn check_tables(n_max: usize, corrupt: Option<usize>) -> Result<TableCheck> {
    let table = TreeCountTable::new(n_max)?;
    let table = match corrupt {
        Some(i) if (1..=n_max).contains(&i) => {
            let mut counts = table.counts().to_vec();
            counts[i - 1] += BigUint::from(1u32);
            TreeCountTable::from_counts(counts)
        }
        Some(i) => return Err(Error::invalid(format!("corrupt index {i} outside 1..={n_max}"))),
        None => table,
    };
    check_table(&table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_classes() {
        let classes = rooted_tree_classes(4);
        assert_eq!(classes[0], vec!["()"]);
        assert_eq!(classes[1], vec!["(())"]);
        assert_eq!(classes[2].len(), 2);
        assert_eq!(classes[3].len(), 4);
    }

    #[test]
    fn counts_through_ten() {
        assert_eq!(count_rooted_trees(10), vec![1, 1, 2, 4, 9, 20, 48, 115, 286, 719]);
    }

    #[test]
    fn corruption_is_reported() {
        let check = check_tables(8, Some(6)).unwrap();
        assert!(!check.passed());
        assert_eq!(check.first_mismatch, Some(6));
        assert!(check_tables(8, Some(9)).is_err());
    }

    #[test]
    fn clean_tables_pass() {
        assert!(check_tables(1, None).unwrap().passed());
        let check = check_tables(8, None).unwrap();
        assert!(check.passed());
        assert_eq!(check.recurrence, vec![1, 1, 2, 4, 9, 20, 48, 115]);
    }
}
