use std::collections::VecDeque;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::PeerGraph;

/// Directed diameter; `Infinite` when some ordered pair is unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Diameter {
    Finite(usize),
    Infinite,
}

impl Diameter {
    pub fn finite(self) -> Option<usize> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Infinite => None,
        }
    }

    pub fn is_at_least(self, d: usize) -> bool {
        match self {
            Diameter::Finite(x) => x >= d,
            Diameter::Infinite => true,
        }
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diameter::Finite(d) => write!(f, "{d}"),
            Diameter::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Diameter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Diameter::Finite(d) => s.serialize_u64(*d as u64),
            Diameter::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Hop distances from `src` along out-edges; `usize::MAX` marks unreachable nodes.
pub fn bfs_distances(graph: &PeerGraph, src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.n()];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &w in graph.row(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Longest shortest directed path over all ordered pairs, by BFS from every node.
pub fn directed_diameter(graph: &PeerGraph) -> Diameter {
    let mut diameter = 0;
    for src in 0..graph.n() {
        for d in bfs_distances(graph, src) {
            if d == usize::MAX {
                return Diameter::Infinite;
            }
            diameter = diameter.max(d);
        }
    }
    Diameter::Finite(diameter)
}

/// Connected components of the symmetrized graph, each sorted, ordered by smallest member.
pub fn weak_components(graph: &PeerGraph) -> Vec<Vec<usize>> {
    let n = graph.n();
    let mut adj = vec![Vec::new(); n];
    for (i, j) in graph.edges() {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut label = vec![usize::MAX; n];
    let mut components = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        label[start] = id;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if label[w] == usize::MAX {
                    label[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// True when every part of `finer` lies inside a single part of `coarser`.
pub fn refines(finer: &[Vec<usize>], coarser: &[Vec<usize>]) -> bool {
    let n: usize = coarser.iter().map(Vec::len).sum();
    let mut label = vec![usize::MAX; n];
    for (id, part) in coarser.iter().enumerate() {
        for &i in part {
            label[i] = id;
        }
    }
    finer.iter().all(|part| part.iter().all(|&i| label[i] == label[part[0]]))
}

/// Whether each component's induced subgraph is complete.
pub fn components_complete(graph: &PeerGraph, components: &[Vec<usize>]) -> bool {
    components.iter().all(|c| c.iter().all(|&i| graph.degree(i) == c.len() - 1 && graph.row(i).iter().all(|j| c.binary_search(j).is_ok())))
}
