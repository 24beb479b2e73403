//! Seeded instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use lcl_core::choice::{ChoiceInstance, MarginalWeights};
use lcl_core::digraph::{Edge, MultiDigraph};
use lcl_core::family::{FamilyEvent, FamilyInstance, MembershipFn, Subset, TauAssignment, Witness, WitnessMap};
use lcl_core::probability::{CutModel, CutSample, FnCutModel, ProductSpace, Variable};
use lcl_core::structures::Hypergraph;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A variable whose value 0 ("bad") has probability `bad`.
fn skewed(name: String, size: usize, bad: f64) -> Variable {
    let rest = (1.0 - bad) / (size - 1) as f64;
    let mut weights = vec![rest; size];
    weights[0] = bad;
    Variable {
        name,
        values: (0..size).map(|v| v.to_string()).collect(),
        weights,
    }
}

pub struct LclCase {
    pub digraph: MultiDigraph,
    pub space: ProductSpace,
    pub model: Arc<dyn CutModel>,
}

/// Up to 5 vertices and 8 edges, at most 4096 outcomes.
///
/// A vertex is good when its own variable is nonzero and it is not knocked out
/// by the shared variable together with a partner's variable; `A` is the set of
/// vertices all of whose descendants are good. `F` holds one designated edge
/// per boundary arc plus every edge whose tail variable is 0 and whose noise
/// flag is set.
pub fn random_lcl(seed: u64) -> LclCase {
    let mut r = rng(seed);
    let n = r.gen_range(2..=5);
    let m = r.gen_range(1..=8);
    let vertices: Vec<String> = (0..n).map(|v| format!("x{v}")).collect();
    let mut edges = Vec::with_capacity(m);
    for e in 0..m {
        let tail = r.gen_range(0..n);
        let mut head = r.gen_range(0..n - 1);
        if head >= tail {
            head += 1;
        }
        edges.push(Edge {
            id: format!("e{e}"),
            tail,
            head,
        });
    }
    let digraph = MultiDigraph::from_indexed(vertices, edges.clone()).unwrap();
    let mut vars: Vec<Variable> = (0..n)
        .map(|v| skewed(format!("b{v}"), r.gen_range(2..=4), r.gen_range(0.01..0.3)))
        .collect();
    vars.push(skewed("c".into(), r.gen_range(2..=4), r.gen_range(0.05..0.6)));
    let space = ProductSpace::new(vars).unwrap();
    let partner: Vec<usize> = (0..n).map(|_| r.gen_range(0..n)).collect();
    let noise: Vec<bool> = (0..m).map(|_| r.gen_bool(0.3)).collect();
    let reach = reach_closure(n, &edges);
    let ds = digraph.simple().clone();
    let arc_edges: Vec<Vec<usize>> = (0..ds.arc_count()).map(|a| digraph.edges_of_arc(a).to_vec()).collect();
    let c = n;
    let model = FnCutModel::new(digraph.clone(), move |o: &[usize]| {
        let good: Vec<bool> = (0..n)
            .map(|v| o[v] != 0 && !(o[c] == 0 && o[partner[v]] == 1))
            .collect();
        let a: Vec<bool> = (0..n).map(|x| (0..n).all(|y| !reach[x][y] || good[y])).collect();
        let mut f: Vec<bool> = edges.iter().enumerate().map(|(i, e)| o[e.tail] == 0 && noise[i]).collect();
        for (arc, &(x, y)) in ds.arcs().iter().enumerate() {
            if !a[x] && a[y] {
                let par = &arc_edges[arc];
                f[par[o[c] % par.len()]] = true;
            }
        }
        CutSample { a, f }
    });
    LclCase {
        digraph,
        space,
        model: Arc::new(model),
    }
}

/// Reflexive-transitive closure of the edge relation.
pub fn reach_closure(n: usize, edges: &[Edge]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (x, row) in r.iter_mut().enumerate() {
        row[x] = true;
    }
    for e in edges {
        r[e.tail][e.head] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

/// Every outcome with its probability, first variable fastest.
pub fn outcomes(space: &ProductSpace) -> Vec<(Vec<usize>, f64)> {
    let vars = space.variables();
    let mut out = vec![(Vec::new(), 1.0)];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|(o, p)| {
                v.weights.iter().enumerate().map(move |(x, w)| {
                    let mut o2 = o.clone();
                    o2.push(x);
                    (o2, p * w)
                })
            })
            .collect();
    }
    out
}

/// `Pr(x ∈ A)` per vertex by direct summation.
pub fn oracle_vertex_probs(space: &ProductSpace, model: &dyn CutModel) -> Vec<f64> {
    let n = model.digraph().vertex_count();
    let mut pr = vec![0.0; n];
    for (o, p) in outcomes(space) {
        let s = model.sample(&o);
        for (acc, _) in pr.iter_mut().zip(&s.a).filter(|(_, &a)| a) {
            *acc += p;
        }
    }
    pr
}

/// Minimum product of arc weights over all walks from `x` to `z` (weights are
/// at least 1, so walks never beat paths); `None` when unreachable.
pub fn oracle_min_product(arcs: &[(usize, usize)], w: &[f64], n: usize, x: usize, z: usize) -> Option<f64> {
    let mut best = vec![f64::INFINITY; n];
    best[x] = 1.0;
    for _ in 0..n {
        for (a, &(u, v)) in arcs.iter().enumerate() {
            if best[u] * w[a] < best[v] {
                best[v] = best[u] * w[a];
            }
        }
    }
    best[z].is_finite().then_some(best[z])
}

pub struct FamilyCase {
    pub inst: FamilyInstance,
    pub witnesses: WitnessMap,
    pub tau: TauAssignment,
}

/// `|I| ≤ 3`; each constraint has a support `C` and fails when all its
/// variables are 0. `S ∈ A` iff no constraint with support inside `S` fails;
/// `B(i)` lists the constraints through `i`, each witnessed by its support.
pub fn random_family(seed: u64) -> FamilyCase {
    let mut r = rng(seed);
    let n = r.gen_range(1..=3usize);
    let full: Subset = (1 << n) - 1;
    let vars: Vec<Variable> = (0..n)
        .map(|i| skewed(format!("v{i}"), r.gen_range(2..=3), r.gen_range(0.05..0.5)))
        .collect();
    let space = ProductSpace::new(vars).unwrap();
    let mut supports: Vec<Subset> = Vec::new();
    for i in 0..n {
        // every element gets at least one constraint
        supports.push(1 << i | (r.gen_range(0..=full) & full));
    }
    for _ in 0..r.gen_range(0..3) {
        let s = r.gen_range(1..=full);
        supports.push(s);
    }
    let fails = |o: &[usize], s: Subset| (0..64).filter(|b| s >> b & 1 == 1).all(|b| o[b as usize] == 0);
    let sup = Arc::new(supports.clone());
    let family: MembershipFn = Arc::new(move |o: &[usize], s: Subset| {
        !sup.iter().any(|&c| c & !s == 0 && fails(o, c))
    });
    let mut events = vec![Vec::new(); n];
    let mut witnesses = WitnessMap::new();
    for (j, &c) in supports.iter().enumerate() {
        for (i, bundle) in events.iter_mut().enumerate() {
            if c >> i & 1 == 1 {
                bundle.push(FamilyEvent::with_predicate(format!("C{j}"), move |o| fails(o, c)));
                witnesses
                    .insert(i, bundle.len() - 1, Witness { set: c, p: None })
                    .unwrap();
            }
        }
    }
    let elements = (1..=n).map(|i| i.to_string()).collect();
    let inst = FamilyInstance::exact(elements, space, family, events).unwrap();
    let tau = TauAssignment((0..n).map(|_| r.gen_range(1.0..3.0)).collect());
    FamilyCase { inst, witnesses, tau }
}

/// Universes of size 1–4, forbidden sets of size 1–3, weights in `[0.3, 1]`.
pub fn random_choice(seed: u64) -> (ChoiceInstance, MarginalWeights) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=5usize);
    let universes: Vec<Vec<String>> = (0..n)
        .map(|i| (0..r.gen_range(1..=4)).map(|x| format!("u{i}x{x}")).collect())
        .collect();
    let mut forbidden = Vec::new();
    for _ in 0..r.gen_range(0..=6) {
        let size = r.gen_range(1..=3.min(n));
        let dom: Vec<usize> = (0..n).choose_multiple(&mut r, size);
        forbidden.push(
            dom.iter()
                .map(|&i| universes[i].choose(&mut r).unwrap().clone())
                .collect(),
        );
    }
    let inst = ChoiceInstance::new(universes, forbidden).unwrap();
    let w = MarginalWeights((0..inst.element_count()).map(|_| r.gen_range(0.3..=1.0)).collect());
    (inst, w)
}

/// A hypergraph on `n` vertices with `m` edges of size 3 to 5.
pub fn random_true_hypergraph(seed: u64, n: usize, m: usize) -> Hypergraph {
    let mut r = rng(seed);
    let edges = (0..m)
        .map(|_| {
            let size = r.gen_range(3..=5.min(n));
            (0..n).choose_multiple(&mut r, size)
        })
        .collect();
    Hypergraph::new(n, edges).unwrap()
}

/// Random dependency neighbourhoods on `n ≤ 6` events with small probabilities.
pub fn random_lll(seed: u64) -> (Vec<Vec<usize>>, Vec<f64>) {
    let mut r = rng(seed);
    let n = r.gen_range(1..=6usize);
    let gamma = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && r.gen_bool(0.4)).collect())
        .collect();
    let probs = (0..n).map(|_| r.gen_range(0.0..0.2)).collect();
    (gamma, probs)
}
