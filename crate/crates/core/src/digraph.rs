//! Finite directed multigraphs and their simple projections.
//!
//! Vertices and edges carry opaque string ids; internally everything is
//! reindexed densely and sets of vertices or edges are boolean masks indexed
//! by those dense indices.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One edge of a [`MultiDigraph`]. `tail` and `head` are dense vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

/// A finite directed multigraph. Parallel edges and loops are allowed.
#[derive(Clone, Debug)]
pub struct MultiDigraph {
    vertices: Vec<String>,
    vertex_lookup: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<String, usize>,
    simple: SimpleDigraph,
    edge_arc: Vec<usize>,
    arc_edges: Vec<Vec<usize>>,
}

/// A digraph with at most one arc per ordered pair of vertices.
#[derive(Clone, Debug)]
pub struct SimpleDigraph {
    vertices: Vec<String>,
    arcs: Vec<(usize, usize)>,
    arc_lookup: HashMap<(usize, usize), usize>,
    out: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for SimpleDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.arcs == other.arcs
    }
}

/// Serialized digraph: `{"vertices":["x","y"],"edges":[{"id":"e1","tail":"x","head":"y"}]}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigraphSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
}

fn index_ids(ids: &[String]) -> Result<HashMap<String, usize>> {
    let mut lookup = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if lookup.insert(id.clone(), i).is_some() {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(lookup)
}

impl MultiDigraph {
    /// Builds a multigraph from vertex ids and `(edge id, tail id, head id)` triples.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let vertex_lookup = index_ids(&vertices)?;
        let mut resolved = Vec::new();
        for (id, tail, head) in edges {
            let t = *vertex_lookup.get(&tail).ok_or(Error::UnknownVertex(tail))?;
            let h = *vertex_lookup.get(&head).ok_or(Error::UnknownVertex(head))?;
            resolved.push(Edge { id, tail: t, head: h });
        }
        Self::from_indexed(vertices, resolved)
    }

    /// Builds a multigraph whose edges already use dense vertex indices.
    pub fn from_indexed(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let vertex_lookup = index_ids(&vertices)?;
        let n = vertices.len();
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidInput(format!(
                    "edge `{}` references a vertex index out of range",
                    e.id
                )));
            }
        }
        let edge_ids: Vec<String> = edges.iter().map(|e| e.id.clone()).collect();
        let edge_lookup = index_ids(&edge_ids)?;

        let simple = SimpleDigraph::from_pairs(
            vertices.clone(),
            edges.iter().map(|e| (e.tail, e.head)),
        );
        let mut arc_edges = vec![Vec::new(); simple.arc_count()];
        let edge_arc: Vec<usize> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let a = simple.arc_lookup[&(e.tail, e.head)];
                arc_edges[a].push(i);
                a
            })
            .collect();

        Ok(Self {
            vertices,
            vertex_lookup,
            edges,
            edge_lookup,
            simple,
            edge_arc,
            arc_edges,
        })
    }

    pub fn from_spec(spec: &DigraphSpec) -> Result<Self> {
        Self::new(
            spec.vertices.iter().cloned(),
            spec.edges
                .iter()
                .map(|e| (e.id.clone(), e.tail.clone(), e.head.clone())),
        )
    }

    pub fn to_spec(&self) -> DigraphSpec {
        DigraphSpec {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    tail: self.vertices[e.tail].clone(),
                    head: self.vertices[e.head].clone(),
                })
                .collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.vertex_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_owned()))
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edge_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_owned()))
    }

    /// The underlying simple digraph, computed once at construction.
    pub fn simple(&self) -> &SimpleDigraph {
        &self.simple
    }

    /// Index of the arc of the simple projection that edge `e` belongs to.
    pub fn arc_of_edge(&self, e: usize) -> usize {
        self.edge_arc[e]
    }

    /// Edges in `E(x, y)` for the arc with index `arc`.
    pub fn edges_of_arc(&self, arc: usize) -> &[usize] {
        &self.arc_edges[arc]
    }
}

impl SimpleDigraph {
    /// Builds the simple digraph on `vertices` with one arc per distinct pair.
    pub fn from_pairs(vertices: Vec<String>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut arcs: Vec<(usize, usize)> = pairs.into_iter().collect();
        arcs.sort_unstable();
        arcs.dedup();
        let mut out = vec![Vec::new(); vertices.len()];
        let mut arc_lookup = HashMap::with_capacity(arcs.len());
        for (a, &(x, y)) in arcs.iter().enumerate() {
            out[x].push((y, a));
            arc_lookup.insert((x, y), a);
        }
        Self {
            vertices,
            arcs,
            arc_lookup,
            out,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Arcs as `(tail, head)` index pairs, sorted.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> (usize, usize) {
        self.arcs[a]
    }

    pub fn arc_index(&self, tail: usize, head: usize) -> Option<usize> {
        self.arc_lookup.get(&(tail, head)).copied()
    }

    /// Outgoing `(head, arc index)` pairs of `x`.
    pub fn out_arcs(&self, x: usize) -> &[(usize, usize)] {
        &self.out[x]
    }

    pub fn arc_label(&self, a: usize) -> String {
        let (x, y) = self.arcs[a];
        format!("{}->{}", self.vertices[x], self.vertices[y])
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertices.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{x}")))
        }
    }

    /// Converts back into a multigraph with one edge per arc, named `tail->head`.
    pub fn to_multigraph(&self) -> MultiDigraph {
        let edges = self
            .arcs
            .iter()
            .enumerate()
            .map(|(a, &(tail, head))| Edge {
                id: self.arc_label(a),
                tail,
                head,
            })
            .collect();
        MultiDigraph::from_indexed(self.vertices.clone(), edges)
            .expect("arc labels of a simple digraph are unique")
    }
}

/// The simple projection `D^s`: an arc `(x, y)` exists iff `E(x, y)` is nonempty.
pub fn underlying_simple(d: &MultiDigraph) -> SimpleDigraph {
    d.simple().clone()
}

/// Mask of all vertices reachable from `x` (including `x` itself).
pub fn reachable(ds: &SimpleDigraph, x: usize) -> Result<Vec<bool>> {
    ds.check_vertex(x)?;
    let mut seen = vec![false; ds.vertex_count()];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in ds.out_arcs(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    Ok(seen)
}

/// `reach[x][z]` is true iff `z` is reachable from `x`.
pub fn reachability_matrix(ds: &SimpleDigraph) -> Vec<Vec<bool>> {
    (0..ds.vertex_count())
        .map(|x| reachable(ds, x).expect("vertex in range"))
        .collect()
}

/// Arc weights `ω: E^s -> [1, ∞)`, indexed by arc index of a [`SimpleDigraph`].
#[derive(Clone, Debug, PartialEq)]
pub struct ArcWeights(pub Vec<f64>);

impl ArcWeights {
    pub fn constant(ds: &SimpleDigraph, value: f64) -> Self {
        Self(vec![value; ds.arc_count()])
    }

    /// The all-zero function, the starting point of the Kleene iteration.
    pub fn zeros(ds: &SimpleDigraph) -> Self {
        Self(vec![0.0; ds.arc_count()])
    }

    pub fn get(&self, arc: usize) -> f64 {
        self.0[arc]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0.0)
    }

    /// Checks that the assignment is total on `ds` and every value is at least 1.
    pub fn validate(&self, ds: &SimpleDigraph) -> Result<()> {
        if self.0.len() != ds.arc_count() {
            return Err(Error::WeightArity {
                expected: ds.arc_count(),
                got: self.0.len(),
            });
        }
        for (a, &w) in self.0.iter().enumerate() {
            if !(w >= 1.0) || !w.is_finite() {
                return Err(Error::InvalidWeight {
                    arc: ds.arc_label(a),
                    value: w,
                });
            }
        }
        Ok(())
    }

    /// True iff `self <= other` pointwise, allowing `slack`.
    pub fn dominated_by(&self, other: &ArcWeights, slack: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a <= *b + slack)
    }

    pub fn sup_distance(&self, other: &ArcWeights) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    cost: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum path-product weights `ω̄(x, ·)` from `x` to every vertex.
///
/// Entry `z` is `None` when `z` is not reachable. Weights must be at least 1,
/// so a path product never decreases when the path is extended and a
/// cheapest-first search settles each vertex once.
pub fn min_product_from(ds: &SimpleDigraph, w: &ArcWeights, x: usize) -> Vec<Option<f64>> {
    debug_assert!(w.0.iter().all(|&v| v >= 1.0));
    let mut best: Vec<Option<f64>> = vec![None; ds.vertex_count()];
    let mut done = vec![false; ds.vertex_count()];
    let mut heap = BinaryHeap::new();
    best[x] = Some(1.0);
    heap.push(HeapEntry { cost: 1.0, vertex: x });
    while let Some(HeapEntry { cost, vertex }) = heap.pop() {
        if done[vertex] {
            continue;
        }
        done[vertex] = true;
        for &(next, arc) in ds.out_arcs(vertex) {
            let cand = cost * w.get(arc);
            if best[next].is_none_or(|b| cand < b) {
                best[next] = Some(cand);
                heap.push(HeapEntry {
                    cost: cand,
                    vertex: next,
                });
            }
        }
    }
    best
}

/// `ω̄(x, z)`: the least product of arc weights over directed `xz`-paths.
pub fn min_product_weight(ds: &SimpleDigraph, w: &ArcWeights, x: usize, z: usize) -> Result<Option<f64>> {
    ds.check_vertex(x)?;
    ds.check_vertex(z)?;
    w.validate(ds)?;
    Ok(min_product_from(ds, w, x)[z])
}

/// True iff `x ∈ A` implies `y ∈ A` for every arc `(x, y)`.
pub fn is_out_closed(ds: &SimpleDigraph, a: &[bool]) -> bool {
    first_escape(ds, a).is_none()
}

fn first_escape(ds: &SimpleDigraph, a: &[bool]) -> Option<(usize, usize)> {
    ds.arcs().iter().copied().find(|&(x, y)| a[x] && !a[y])
}

/// True iff `F` contains an edge of `E(x, y)` for every arc with `x ∉ A`, `y ∈ A`.
///
/// `a` must be out-closed; otherwise an error naming an escaping arc is returned.
pub fn is_a_cut(d: &MultiDigraph, a: &[bool], f: &[bool]) -> Result<bool> {
    let ds = d.simple();
    if let Some((x, y)) = first_escape(ds, a) {
        return Err(Error::NotOutClosed {
            tail: d.vertices()[x].clone(),
            head: d.vertices()[y].clone(),
        });
    }
    Ok(uncut_arc(d, a, f).is_none())
}

/// First boundary arc (`x ∉ A`, `y ∈ A`) that `F` fails to cut, if any.
pub(crate) fn uncut_arc(d: &MultiDigraph, a: &[bool], f: &[bool]) -> Option<usize> {
    let ds = d.simple();
    (0..ds.arc_count()).find(|&arc| {
        let (x, y) = ds.arc(arc);
        !a[x] && a[y] && !d.edges_of_arc(arc).iter().any(|&e| f[e])
    })
}

/// Builds a vertex mask from ids.
pub fn vertex_mask<'a>(d: &MultiDigraph, ids: impl IntoIterator<Item = &'a str>) -> Result<Vec<bool>> {
    let mut mask = vec![false; d.vertex_count()];
    for id in ids {
        mask[d.vertex_index(id)?] = true;
    }
    Ok(mask)
}

/// Builds an edge mask from ids.
pub fn edge_mask<'a>(d: &MultiDigraph, ids: impl IntoIterator<Item = &'a str>) -> Result<Vec<bool>> {
    let mut mask = vec![false; d.edge_count()];
    for id in ids {
        mask[d.edge_index(id)?] = true;
    }
    Ok(mask)
}
