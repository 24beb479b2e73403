//! Combinatorial inputs shared by the threshold solvers and the samplers.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A hypergraph on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertex_count: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Validates the edges (nonempty, in range, no repeated vertex) and sorts
    /// each edge.
    pub fn new(vertex_count: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            if e.is_empty() {
                return Err(Error::InvalidInput(format!("hyperedge {i} is empty")));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("hyperedge {i} repeats a vertex")));
            }
            if *e.last().unwrap() >= vertex_count {
                return Err(Error::InvalidInput(format!("hyperedge {i} references a missing vertex")));
            }
            out.push(e);
        }
        Ok(Self {
            vertex_count,
            edges: out,
        })
    }

    pub fn is_uniform(&self, k: usize) -> bool {
        self.edges.iter().all(|e| e.len() == k)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.degrees().iter().all(|&x| x == d)
    }

    /// True when every edge has at least three vertices.
    pub fn is_true_hypergraph(&self) -> bool {
        self.edges.iter().all(|e| e.len() >= 3)
    }

    /// Edge indices incident to each vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                inc[v].push(i);
            }
        }
        inc
    }
}

/// A simple undirected graph on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Rejects loops, repeated edges and out-of-range endpoints.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::InvalidInput(format!("loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) references a missing vertex")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) appears twice")));
            }
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Per vertex: `(neighbour, edge index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        adj
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        Self {
            vertex_count: n,
            edges,
        }
    }

    pub fn path(n: usize) -> Self {
        Self {
            vertex_count: n,
            edges: (1..n).map(|v| (v - 1, v)).collect(),
        }
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.edges.push((n - 1, 0));
        }
        g
    }

    pub fn star(leaves: usize) -> Self {
        Self {
            vertex_count: leaves + 1,
            edges: (1..=leaves).map(|v| (0, v)).collect(),
        }
    }
}

/// Lists `L_1, ..., L_n` of allowed symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListAssignment {
    pub lists: Vec<Vec<String>>,
}

impl ListAssignment {
    /// Rejects empty lists and repeated symbols inside a list.
    pub fn new(lists: Vec<Vec<String>>) -> Result<Self> {
        for (i, l) in lists.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidInput(format!("list L_{} is empty", i + 1)));
            }
            let distinct: BTreeSet<&String> = l.iter().collect();
            if distinct.len() != l.len() {
                return Err(Error::InvalidInput(format!("list L_{} repeats a symbol", i + 1)));
            }
        }
        Ok(Self { lists })
    }

    /// `n` copies of the same alphabet.
    pub fn uniform(n: usize, alphabet: &[&str]) -> Self {
        Self {
            lists: vec![alphabet.iter().map(|s| s.to_string()).collect(); n],
        }
    }

    /// `n` copies of the alphabet `s0, s1, ...` of the given size.
    pub fn uniform_size(n: usize, size: usize) -> Self {
        Self {
            lists: vec![(0..size).map(|i| format!("s{i}")).collect(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Interns every symbol; returns per-position symbol ids and the symbol table.
    pub fn interned(&self) -> (Vec<Vec<u32>>, Vec<String>) {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let mut table = Vec::new();
        let lists = self
            .lists
            .iter()
            .map(|l| {
                l.iter()
                    .map(|s| {
                        *ids.entry(s.as_str()).or_insert_with(|| {
                            table.push(s.clone());
                            (table.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect();
        (lists, table)
    }
}
