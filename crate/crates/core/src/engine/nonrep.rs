//! The path digraph for nonrepetitive sequences from lists.
//!
//! Vertices `v1..vn` stand for prefixes, arcs run `v(i+1) -> vi`, and the arc
//! into `vi` carries one edge `e(s,t)` for every block of length `2t` ending at
//! position `i + 1 = s + 2t - 1`.

use std::sync::Arc;

use crate::digraph::{Edge, MultiDigraph};
use crate::error::{Error, Result};
use crate::probability::{CutModel, CutSample, ExactConfig, ProductSpace, RiskTable, Variable};
use crate::structures::ListAssignment;

use super::LclInstance;

/// Random sequence `a_i` drawn uniformly from `L_i`, with `A` the nonrepetitive
/// prefixes and `F` the repetitions.
pub struct NonrepModel {
    digraph: MultiDigraph,
    symbols: Vec<Vec<u32>>,
    params: Vec<(usize, usize)>,
}

impl NonrepModel {
    /// Symbol ids of the sequence at an outcome.
    pub fn sequence(&self, outcome: &[usize]) -> Vec<u32> {
        outcome.iter().enumerate().map(|(i, &o)| self.symbols[i][o]).collect()
    }

    /// True when `a_k = a_{k+t}` for `s ≤ k ≤ s+t-1` (1-based).
    fn is_square_at(seq: &[u32], s: usize, t: usize) -> bool {
        (s..s + t).all(|k| seq[k - 1] == seq[k + t - 1])
    }

    fn sample_seq(&self, seq: &[u32]) -> CutSample {
        let n = seq.len();
        let bad_from = shortest_repetitive_prefix(seq).unwrap_or(n + 1);
        let a = (1..=n).map(|i| i < bad_from).collect();
        let f = self
            .params
            .iter()
            .map(|&(s, t)| Self::is_square_at(seq, s, t))
            .collect();
        CutSample { a, f }
    }
}

impl CutModel for NonrepModel {
    fn digraph(&self) -> &MultiDigraph {
        &self.digraph
    }

    fn sample(&self, outcome: &[usize]) -> CutSample {
        self.sample_seq(&self.sequence(outcome))
    }
}

/// Length of the shortest prefix of `seq` that contains a repetition `xx`.
pub fn shortest_repetitive_prefix<T: PartialEq>(seq: &[T]) -> Option<usize> {
    (2..=seq.len()).find(|&end| has_repetition_ending_at(seq, end))
}

/// True when some block `xx` ends at position `end` (1-based, inclusive).
pub fn has_repetition_ending_at<T: PartialEq>(seq: &[T], end: usize) -> bool {
    (1..=end / 2).any(|t| {
        let start = end - 2 * t;
        seq[start..start + t] == seq[start + t..end]
    })
}

/// A list assignment with its path digraph, product space and cut model.
pub struct NonrepInstance {
    lists: ListAssignment,
    space: ProductSpace,
    model: Arc<NonrepModel>,
}

impl NonrepInstance {
    pub fn new(lists: ListAssignment) -> Result<Self> {
        let lists = ListAssignment::new(lists.lists)?;
        let n = lists.len();
        if n == 0 {
            return Err(Error::InvalidInput("need at least one position".into()));
        }
        let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        let mut params = Vec::new();
        for i in 1..n {
            // arc v(i+1) -> vi; blocks of length 2t end at i + 1
            for t in 1..=i.div_ceil(2) {
                let s = i + 2 - 2 * t;
                edges.push(Edge {
                    id: format!("e({s},{t})"),
                    tail: i,
                    head: i - 1,
                });
                params.push((s, t));
            }
        }
        let digraph = MultiDigraph::from_indexed(vertices, edges)?;
        let space = ProductSpace::new(
            lists
                .lists
                .iter()
                .enumerate()
                .map(|(i, l)| Variable::uniform(format!("a{}", i + 1), l.iter().cloned()))
                .collect(),
        )?;
        let (symbols, _) = lists.interned();
        let model = Arc::new(NonrepModel {
            digraph,
            symbols,
            params,
        });
        Ok(Self { lists, space, model })
    }

    pub fn uniform(n: usize, alphabet_size: usize) -> Result<Self> {
        Self::new(ListAssignment::uniform_size(n, alphabet_size))
    }

    pub fn lists(&self) -> &ListAssignment {
        &self.lists
    }

    pub fn digraph(&self) -> &MultiDigraph {
        &self.model.digraph
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn model(&self) -> Arc<NonrepModel> {
        self.model.clone()
    }

    /// `(s, t)` of edge `e`.
    pub fn edge_params(&self, e: usize) -> (usize, usize) {
        self.model.params[e]
    }

    /// `(A, F)` for an explicit word over the lists' symbols.
    pub fn sample_word(&self, word: &[&str]) -> Result<CutSample> {
        if word.len() != self.lists.len() {
            return Err(Error::InvalidInput("word length differs from the number of lists".into()));
        }
        let outcome = word
            .iter()
            .enumerate()
            .map(|(i, w)| {
                self.lists.lists[i]
                    .iter()
                    .position(|s| s == w)
                    .ok_or_else(|| Error::InvalidInput(format!("{w} is not in L_{}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.model.sample(&outcome))
    }

    /// Risk bound `Π_{k=s}^{s+t-1} 1/|L_{k+t}|` for targets `vj` with
    /// `j ≤ s+t-1`, and 1 for the others.
    pub fn bound_risks(&self) -> RiskTable {
        let sizes: Vec<f64> = self.lists.lists.iter().map(|l| l.len() as f64).collect();
        let params = &self.model.params;
        RiskTable::from_fn(self.digraph(), |e, z| {
            let (s, t) = params[e];
            if z < s + t - 1 {
                (s..s + t).map(|k| 1.0 / sizes[k + t - 1]).product()
            } else {
                1.0
            }
        })
        .expect("every reachable pair is filled")
    }

    /// Instance with the bound risk table and the exact model attached.
    pub fn bound_instance(&self) -> LclInstance {
        LclInstance::new(self.digraph().clone(), self.bound_risks())
            .and_then(|i| i.with_exact(self.space.clone(), self.model.clone()))
            .expect("bound table matches the digraph")
    }

    /// Instance with the exact risk table, by enumeration.
    pub fn exact_instance(&self, cfg: &ExactConfig) -> Result<LclInstance> {
        LclInstance::from_model(self.space.clone(), self.model.clone(), cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::is_a_cut;

    #[test]
    fn path_structure() {
        let inst = NonrepInstance::uniform(5, 3).unwrap();
        let d = inst.digraph();
        assert_eq!(d.vertex_count(), 5);
        assert_eq!(d.simple().arc_count(), 4);
        // blocks ending at 2: (1,1); at 3: (2,1); at 4: (3,1),(1,2); at 5: (4,1),(2,2)
        let ids: Vec<&str> = d.edges().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["e(1,1)", "e(2,1)", "e(3,1)", "e(1,2)", "e(4,1)", "e(2,2)"]);
        let e12 = d.edge_index("e(1,2)").unwrap();
        assert_eq!(d.vertices()[d.edge(e12).tail], "v4");
        assert_eq!(d.vertices()[d.edge(e12).head], "v3");
    }

    #[test]
    fn ababcca_cut() {
        let inst = NonrepInstance::new(ListAssignment::uniform(7, &["a", "b", "c"])).unwrap();
        let word: Vec<&str> = "ababcca".split("").filter(|s| !s.is_empty()).collect();
        let s = inst.sample_word(&word).unwrap();
        assert_eq!(s.a, vec![true, true, true, false, false, false, false]);
        let d = inst.digraph();
        let cut: Vec<&str> = d
            .edges()
            .iter()
            .zip(&s.f)
            .filter(|(_, &f)| f)
            .map(|(e, _)| e.id.as_str())
            .collect();
        assert_eq!(cut, ["e(1,2)", "e(5,1)"]);
        assert!(is_a_cut(d, &s.a, &s.f).unwrap());
    }

    #[test]
    fn repetition_helpers() {
        assert_eq!(shortest_repetitive_prefix(b"abcb"), None);
        assert_eq!(shortest_repetitive_prefix(b"abab"), Some(4));
        assert_eq!(shortest_repetitive_prefix(b"abcc"), Some(4));
        assert_eq!(shortest_repetitive_prefix(b"aa"), Some(2));
        assert!(has_repetition_ending_at(b"xabcabc", 7));
        assert!(!has_repetition_ending_at(b"xabcabd", 7));
    }

    #[test]
    fn exact_risks_below_bounds() {
        let inst = NonrepInstance::uniform(5, 2).unwrap();
        let exact = inst.exact_instance(&ExactConfig::sequential()).unwrap();
        let bound = inst.bound_risks();
        for e in 0..inst.digraph().edge_count() {
            for &(z, p) in exact.risks().row(e) {
                assert!(p <= bound.get(e, z).unwrap() + 1e-12, "e={e} z={z} p={p}");
            }
        }
    }

    #[test]
    fn bound_values() {
        let inst = NonrepInstance::uniform(4, 4).unwrap();
        let bound = inst.bound_risks();
        let e = inst.digraph().edge_index("e(1,2)").unwrap();
        // head v3: targets v1, v2 get 1/16, v3 gets 1
        assert_eq!(bound.row(e), &[(0, 1.0 / 16.0), (1, 1.0 / 16.0), (2, 1.0)]);
    }
}
