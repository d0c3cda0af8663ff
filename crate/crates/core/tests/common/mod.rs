#![allow(dead_code)]

use std::collections::BTreeSet;

/// AHU encoding of the tree given by a parent array (`parents[0]` is the root).
pub fn encode(parents: &[usize], v: usize) -> String {
    let mut kids: Vec<String> = (1..parents.len())
        .filter(|&c| parents[c] == v)
        .map(|c| encode(parents, c))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// Every rooted tree on `n` vertices arises from some labeling where each
/// parent precedes its child; enumerate all such parent arrays and
/// deduplicate by canonical form.
pub fn rooted_tree_forms(n: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut parents = vec![0usize; n];
    fn rec(parents: &mut Vec<usize>, i: usize, out: &mut BTreeSet<String>) {
        if i == parents.len() {
            out.insert(encode(parents, 0));
            return;
        }
        for p in 0..i {
            parents[i] = p;
            rec(parents, i + 1, out);
        }
    }
    rec(&mut parents, 1, &mut out);
    out
}

/// Pearson chi-square statistic against a uniform distribution.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Upper 0.001 quantile of chi-square with 8 degrees of freedom.
pub const CHI2_8DF_P001: f64 = 26.124_481_558_376_14;
