//! Uniform random unlabeled rooted trees (Nijenhuis–Wilf RANRUT) and the
//! counting tables it draws from.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::RootedTree;
use crate::error::{Error, Result};
use crate::seed::Rng;

/// `counts()[i - 1]` is the number of unlabeled rooted trees on `i` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCountTable {
    t: Vec<BigUint>,
}

impl TreeCountTable {
    /// Table for sizes `1..=n_max` from the recurrence
    /// `t[i] = (1 / (i - 1)) * sum_{j,d : jd < i} d * t[i - jd] * t[d]`.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("table size must be at least 1"));
        }
        // 1-based working copy; slot 0 unused
        let mut t = vec![BigUint::zero(); n_max + 1];
        t[1] = BigUint::one();
        if n_max >= 2 {
            t[2] = BigUint::one();
        }
        for i in 3..=n_max {
            let mut acc = BigUint::zero();
            for j in 1..i {
                for d in 1..=(i - 1) / j {
                    acc += &t[i - j * d] * &t[d] * d;
                }
            }
            let (q, r) = (&acc / (i - 1), &acc % (i - 1));
            if !r.is_zero() {
                return Err(Error::Overflow(format!("inexact division at size {i}")));
            }
            t[i] = q;
        }
        t.remove(0);
        Ok(TreeCountTable { t })
    }

    /// Wraps counts produced elsewhere, e.g. to check them.
    pub fn from_counts(t: Vec<BigUint>) -> Self {
        TreeCountTable { t }
    }

    pub fn n_max(&self) -> usize {
        self.t.len()
    }

    /// Number of rooted trees on `size` vertices (1-based).
    pub fn get(&self, size: usize) -> &BigUint {
        &self.t[size - 1]
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.t
    }

    /// Counts that fit in 64 bits, checked.
    pub fn to_u64(&self) -> Result<Vec<u64>> {
        self.t
            .iter()
            .enumerate()
            .map(|(i, x)| {
                x.to_u64()
                    .ok_or_else(|| Error::Overflow(format!("t[{}] exceeds 64 bits", i + 1)))
            })
            .collect()
    }
}

pub fn sizes_table(n_max: usize) -> Result<TreeCountTable> {
    TreeCountTable::new(n_max)
}

/// One admissible split of a tree of size `k`: `j` copies of a subtree of
/// size `d` hanging off the root of a tree of size `k - jd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub j: usize,
    pub d: usize,
    pub probability: f64,
}

/// `p[k][j][d] = d * t[k - jd] * t[d] / ((k - 1) * t[k])` for `jd < k`.
///
/// Rows are stored sparsely, listing only pairs with `jd < k`, so memory is
/// `O(n^2 log n)` instead of the cubic dense array.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeDistribution {
    rows: Vec<Vec<Split>>,
}

impl SubtreeDistribution {
    pub fn new(t: &TreeCountTable, n: usize) -> Result<Self> {
        if n > t.n_max() {
            return Err(Error::invalid(format!(
                "count table covers sizes up to {}, distribution needs {n}",
                t.n_max()
            )));
        }
        let mut rows = vec![Vec::new(); n + 1];
        for (k, row) in rows.iter_mut().enumerate().skip(3) {
            let denom = t.get(k) * (k - 1);
            for j in 1..k {
                for d in 1..=(k - 1) / j {
                    let num = t.get(k - j * d) * t.get(d) * d;
                    row.push(Split {
                        j,
                        d,
                        probability: ratio(&num, &denom),
                    });
                }
            }
        }
        Ok(SubtreeDistribution { rows })
    }

    /// Largest size with a row.
    pub fn max_size(&self) -> usize {
        self.rows.len() - 1
    }

    /// Admissible splits for size `k`; empty for `k < 3`.
    pub fn row(&self, k: usize) -> &[Split] {
        self.rows.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn probability(&self, k: usize, j: usize, d: usize) -> f64 {
        self.row(k)
            .iter()
            .find(|s| s.j == j && s.d == d)
            .map_or(0.0, |s| s.probability)
    }

    fn sample(&self, k: usize, rng: &mut Rng) -> (usize, usize) {
        let row = self.row(k);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for s in row {
            acc += s.probability;
            if u < acc {
                return (s.j, s.d);
            }
        }
        // row sums to 1 up to rounding
        let last = row.last().expect("rows for k >= 3 are non-empty");
        (last.j, last.d)
    }
}

pub fn subtree_distribution(t: &TreeCountTable, n: usize) -> Result<SubtreeDistribution> {
    SubtreeDistribution::new(t, n)
}

/// `num / den` to double precision without overflowing intermediate floats.
fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    const SHIFT: i32 = 256;
    let q: BigUint = (num << SHIFT as usize) / den;
    q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-SHIFT)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RanrutVariant {
    /// Each of the `j` subtrees of size `d` is drawn independently.
    #[default]
    PaperLiteral,
    /// One subtree of size `d` is drawn and attached `j` times; uniform
    /// over isomorphism classes.
    SameCopy,
}

impl std::str::FromStr for RanrutVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(RanrutVariant::PaperLiteral),
            "same-copy" => Ok(RanrutVariant::SameCopy),
            _ => Err(Error::invalid(format!("unknown RANRUT variant `{s}`"))),
        }
    }
}

/// Draws a random unlabeled rooted tree on `n` vertices.
pub fn ranrut(n: usize, dist: &SubtreeDistribution, rng: &mut Rng, variant: RanrutVariant) -> Result<RootedTree> {
    if n == 0 {
        return Err(Error::invalid("a tree needs at least one vertex"));
    }
    if n > 2 && n > dist.max_size() {
        return Err(Error::invalid(format!(
            "distribution covers sizes up to {}, requested {n}",
            dist.max_size()
        )));
    }
    Ok(draw(n, dist, rng, variant))
}

fn draw(n: usize, dist: &SubtreeDistribution, rng: &mut Rng, variant: RanrutVariant) -> RootedTree {
    if n <= 2 {
        return RootedTree::path(n);
    }
    let (j, d) = dist.sample(n, rng);
    let mut tree = draw(n - j * d, dist, rng, variant);
    let root = tree.root();
    match variant {
        RanrutVariant::PaperLiteral => {
            for _ in 0..j {
                let sub = draw(d, dist, rng, variant);
                tree.attach_copy(root, &sub);
            }
        }
        RanrutVariant::SameCopy => {
            let sub = draw(d, dist, rng, variant);
            for _ in 0..j {
                tree.attach_copy(root, &sub);
            }
        }
    }
    tree
}

/// Precomputed tables for drawing degree-bounded random trees of one size.
#[derive(Debug, Clone)]
pub struct TreeGenerator {
    n: usize,
    delta: usize,
    variant: RanrutVariant,
    dist: SubtreeDistribution,
}

impl TreeGenerator {
    pub fn new(n: usize, delta: usize, variant: RanrutVariant) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a tree needs at least one vertex"));
        }
        super::tree::check_degree_feasible(n, delta)?;
        let t = TreeCountTable::new(n.max(2))?;
        let dist = SubtreeDistribution::new(&t, n.max(2))?;
        Ok(TreeGenerator {
            n,
            delta,
            variant,
            dist,
        })
    }

    /// RANRUT followed by degree pruning.
    pub fn rooted_tree(&self, rng: &mut Rng) -> RootedTree {
        let tree = draw(self.n, &self.dist, rng, self.variant);
        super::tree::prune(&tree, self.delta, rng).expect("feasibility checked at construction")
    }

    pub fn topology(&self, rng: &mut Rng) -> super::Topology {
        self.rooted_tree(rng).to_topology()
    }
}
