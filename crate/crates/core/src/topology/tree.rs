use std::collections::VecDeque;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::graph::Topology;
use crate::error::{Error, Result};
use crate::seed::Rng;

/// An ordered rooted unlabeled tree stored as an arena of child lists.
///
/// Vertex indices are arena slots; they carry no meaning beyond identity.
/// Child lists keep insertion order, so "rightmost child" is the last entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    children: Vec<Vec<usize>>,
    root: usize,
}

impl RootedTree {
    pub fn singleton() -> Self {
        RootedTree {
            children: vec![Vec::new()],
            root: 0,
        }
    }

    /// Root 0 with `n - 1` leaf children.
    pub fn star(n: usize) -> Self {
        assert!(n >= 1);
        let mut children = vec![Vec::new(); n];
        children[0] = (1..n).collect();
        RootedTree { children, root: 0 }
    }

    /// A path of `n` vertices rooted at one end.
    pub fn path(n: usize) -> Self {
        assert!(n >= 1);
        let children = (0..n)
            .map(|v| if v + 1 < n { vec![v + 1] } else { Vec::new() })
            .collect();
        RootedTree { children, root: 0 }
    }

    /// Builds a tree from a parent array (`None` marks the root), validating
    /// that it is connected and acyclic.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        let mut root = None;
        for (v, p) in parents.iter().enumerate() {
            match *p {
                None if root.is_none() => root = Some(v),
                None => return Err(Error::invalid("more than one root")),
                Some(p) if p >= n || p == v => return Err(Error::invalid(format!("bad parent {p} for vertex {v}"))),
                Some(p) => children[p].push(v),
            }
        }
        let root = root.ok_or_else(|| Error::invalid("no root"))?;
        let tree = RootedTree { children, root };
        if tree.preorder().len() != n {
            return Err(Error::invalid("parent array contains a cycle"));
        }
        Ok(tree)
    }

    pub fn nodes(&self) -> usize {
        self.children.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// Neighbourhood size in the underlying graph.
    pub fn degree(&self, v: usize) -> usize {
        self.children[v].len() + usize::from(v != self.root)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.nodes()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0)];
        while let Some((v, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(self.children[v].iter().map(|&c| (c, d + 1)));
        }
        best
    }

    fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if out.len() > self.nodes() {
                break;
            }
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Appends a copy of `sub` as the new rightmost child of `at`.
    pub fn attach_copy(&mut self, at: usize, sub: &RootedTree) {
        let offset = self.nodes();
        let shift = |v: usize| v + offset;
        for list in &sub.children {
            self.children.push(list.iter().copied().map(shift).collect());
        }
        self.children[at].push(shift(sub.root));
    }

    /// AHU canonical string: equal iff the trees are isomorphic as rooted trees.
    pub fn canonical_form(&self) -> String {
        fn encode(tree: &RootedTree, v: usize) -> String {
            let mut parts: Vec<String> = tree.children[v].iter().map(|&c| encode(tree, c)).collect();
            parts.sort_unstable();
            let mut s = String::with_capacity(2 + parts.iter().map(String::len).sum::<usize>());
            s.push('(');
            parts.iter().for_each(|p| s.push_str(p));
            s.push(')');
            s
        }
        encode(self, self.root)
    }

    /// Maps the tree to a topology: root becomes leader 0, the other
    /// vertices are numbered in breadth-first order.
    pub fn to_topology(&self) -> Topology {
        let n = self.nodes();
        let mut label = vec![usize::MAX; n];
        let mut queue = VecDeque::from([self.root]);
        let mut next = 0;
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        while let Some(v) = queue.pop_front() {
            label[v] = next;
            next += 1;
            for &c in &self.children[v] {
                queue.push_back(c);
            }
        }
        for (v, list) in self.children.iter().enumerate() {
            edges.extend(list.iter().map(|&c| (label[v], label[c])));
        }
        Topology::from_edges(n, edges).expect("a tree is a simple graph")
    }
}

/// Returns `Err` if no tree on `n` vertices has max degree `delta`.
pub fn check_degree_feasible(n: usize, delta: usize) -> Result<()> {
    let needed = match n {
        0 | 1 => 0,
        2 => 1,
        _ => 2,
    };
    if delta < needed {
        Err(Error::InfeasibleDegreeBound { n, delta })
    } else {
        Ok(())
    }
}

/// Pushes subtrees downwards until every vertex has at most `delta`
/// neighbours: the root keeps at most `delta` children, any other vertex at
/// most `delta - 1`.
///
/// Processing is preorder. While a vertex is over capacity its rightmost
/// subtree is detached and re-attached below it, descending through
/// uniformly chosen children until a vertex with spare capacity is found.
/// Moved subtrees only ever get deeper, so the tree depth never decreases.
pub fn prune(tree: &RootedTree, delta: usize, rng: &mut Rng) -> Result<RootedTree> {
    check_degree_feasible(tree.nodes(), delta)?;
    let mut tree = tree.clone();
    let root = tree.root;
    let capacity = |v: usize| if v == root { delta } else { delta - 1 };

    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        while tree.children[v].len() > capacity(v) {
            let moved = tree.children[v].pop().expect("over capacity implies a child");
            let mut cursor = v;
            loop {
                if tree.children[cursor].len() < capacity(cursor) {
                    tree.children[cursor].push(moved);
                    break;
                }
                // cursor is full and delta >= 2, so it has at least one child
                let list = &tree.children[cursor];
                cursor = list[rng.gen_range(0..list.len())];
            }
        }
        stack.extend(tree.children[v].iter().rev());
    }
    Ok(tree)
}
