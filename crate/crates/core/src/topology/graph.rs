use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// One snapshot of the network: an undirected simple graph on `0..n`.
/// Node 0 is the leader.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyJson", into = "TopologyJson")]
pub struct Topology {
    adjacency: Vec<Vec<usize>>,
}

/// Wire form: `{"n": .., "leader": 0, "edges": [[u, v], ..]}`, `u < v`,
/// edges sorted lexicographically.
#[derive(Debug, Serialize, Deserialize)]
struct TopologyJson {
    n: usize,
    leader: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<TopologyJson> for Topology {
    type Error = Error;

    fn try_from(json: TopologyJson) -> Result<Self> {
        if json.leader != 0 {
            return Err(Error::invalid("leader must be node 0"));
        }
        Topology::from_edges(json.n, json.edges.iter().map(|&[u, v]| (u, v)))
    }
}

impl From<Topology> for TopologyJson {
    fn from(t: Topology) -> Self {
        TopologyJson {
            n: t.n(),
            leader: 0,
            edges: t.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl Topology {
    /// `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Topology {
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge {{{u}, {v}}} out of range for n={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge at node {u}")));
            }
        }
        Ok(Topology { adjacency })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Renames node `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n());
        let mut adjacency = vec![Vec::new(); self.n()];
        for (u, list) in self.adjacency.iter().enumerate() {
            adjacency[perm[u]] = list.iter().map(|&v| perm[v]).collect();
            adjacency[perm[u]].sort_unstable();
        }
        Topology { adjacency }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("topology serializes")
    }
}

/// Leader adjacent to every other node.
pub fn star(n: usize) -> Topology {
    Topology::from_edges(n, (1..n).map(|i| (0, i))).expect("star is simple")
}

/// Edges `{i, i+1}`; the leader is the endpoint 0.
pub fn path(n: usize) -> Topology {
    Topology::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
}

/// Erdős–Rényi G(n, p): every unordered pair independently with probability `p`.
pub fn gnp(n: usize, p: f64, rng: &mut Rng) -> Result<Topology> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Topology::from_edges(n, edges)
}

/// A path with the leader at one end and the other `n - 1` positions
/// filled by a uniformly random permutation of `1..n`.
pub fn shuffled_path(n: usize, rng: &mut Rng) -> Topology {
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(rng);
    let mut prev = 0;
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for &v in &order {
        edges.push((prev, v));
        prev = v;
    }
    Topology::from_edges(n, edges).expect("path is simple")
}

/// Star with its non-leader labels permuted. The graph is invariant under
/// this relabeling; the draw is kept so RNG consumption matches other families.
pub fn shuffled_star(n: usize, rng: &mut Rng) -> Topology {
    let mut perm: Vec<usize> = (0..n).collect();
    perm[1..].shuffle(rng);
    star(n).relabel(&perm)
}
