mod common;

use std::sync::Arc;

use lcl_core::choice::{
    avoids_all, check_expectation_condition, extract_choice, multichoice_certificate, randomized_choice_search,
    ChoiceFunction, Multichoice,
};
use lcl_core::digraph::{is_a_cut, min_product_weight, underlying_simple, ArcWeights, Edge, MultiDigraph};
use lcl_core::engine::LclInstance;
use lcl_core::exec::Execution;
use lcl_core::family::{check_family_condition, hypercube_digraph, submasks, validate_family, FamilyInstance};
use lcl_core::lll::{auto_mu, mu_to_tau, to_family, LllInstance, MuVerdict};
use lcl_core::probability::{
    cond_prob, cond_prob_rational, estimate_cond_prob, exact_prob, exact_prob_rational, rational_to_f64,
    risk_table_exact, CutSample, ExactConfig, FnCutModel, ProductSpace, Variable,
};
use lcl_core::samplers::{
    ep_acyclic_edge_coloring, is_acyclic_edge_coloring, is_nonrepetitive, is_nonrepetitive_coloring,
    mt_two_coloring, nonrep_sequence_build, verify_proper_2coloring, AcyclicWitness,
};
use lcl_core::structures::{Graph, Hypergraph, ListAssignment};
use lcl_core::thresholds::{acyclic_feasible, hypergraph_two_coloring_max_degree, HypColVariant};
use proptest::prelude::*;
use rand::Rng;

fn digraph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<f64>)> {
    (1usize..=7).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), 0..14),
            prop::collection::vec(1.0f64..4.0, 14),
        )
    })
}

fn multigraph(n: usize, pairs: &[(usize, usize)]) -> MultiDigraph {
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, &(tail, head))| Edge {
            id: format!("e{i}"),
            tail,
            head,
        })
        .collect();
    MultiDigraph::from_indexed((0..n).map(|v| format!("v{v}")).collect(), edges).unwrap()
}

/// Minimum product over simple paths by exhaustive search.
fn brute_paths(arcs: &[(usize, usize)], w: &[f64], n: usize, x: usize, z: usize) -> Option<f64> {
    fn go(arcs: &[(usize, usize)], w: &[f64], at: usize, z: usize, seen: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
        if at == z {
            *best = Some(best.map_or(acc, |b| b.min(acc)));
            return;
        }
        for (a, &(u, v)) in arcs.iter().enumerate() {
            if u == at && !seen[v] {
                seen[v] = true;
                go(arcs, w, v, z, seen, acc * w[a], best);
                seen[v] = false;
            }
        }
    }
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut best = None;
    go(arcs, w, x, z, &mut seen, 1.0, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_weights_match_brute_force((n, pairs, ws) in digraph_strategy()) {
        let d = multigraph(n, &pairs);
        let ds = d.simple();
        let w = ArcWeights(ws[..ds.arc_count()].to_vec());
        for x in 0..n {
            for z in 0..n {
                let lib = min_product_weight(ds, &w, x, z).unwrap();
                let brute = brute_paths(ds.arcs(), w.as_slice(), n, x, z);
                match (lib, brute) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12 * b),
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }
    }

    #[test]
    fn path_weights_concatenate((n, pairs, ws) in digraph_strategy()) {
        let d = multigraph(n, &pairs);
        let ds = d.simple();
        let w = ArcWeights(ws[..ds.arc_count()].to_vec());
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if let (Some(a), Some(b), Some(c)) = (
                        min_product_weight(ds, &w, x, y).unwrap(),
                        min_product_weight(ds, &w, y, z).unwrap(),
                        min_product_weight(ds, &w, x, z).unwrap(),
                    ) {
                        prop_assert!(c <= a * b * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn full_edge_set_cuts_out_closed_sets((n, pairs, _w) in digraph_strategy(), seed in any::<u64>()) {
        let d = multigraph(n, &pairs);
        let reach = common::reach_closure(n, d.edges());
        let mut r = common::rng(seed);
        let good: Vec<bool> = (0..n).map(|_| r.gen_bool(0.6)).collect();
        let a: Vec<bool> = (0..n).map(|x| (0..n).all(|y| !reach[x][y] || good[y])).collect();
        prop_assert!(is_a_cut(&d, &a, &vec![true; d.edge_count()]).unwrap());
    }

    #[test]
    fn underlying_simple_round_trip((n, pairs, _w) in digraph_strategy()) {
        let d = multigraph(n, &pairs);
        let once = underlying_simple(&d);
        let twice = underlying_simple(&once.to_multigraph());
        prop_assert_eq!(once.arcs(), twice.arcs());
        prop_assert_eq!(once.vertices(), twice.vertices());
    }

    #[test]
    fn conditional_probability_identity(sizes in prop::collection::vec(1usize..=3, 1..=4), seed in any::<u64>()) {
        let space = ProductSpace::new(
            sizes.iter().enumerate().map(|(i, &s)| Variable::uniform(format!("x{i}"), (0..s).map(|v| v.to_string()))).collect(),
        ).unwrap();
        let mut r = common::rng(seed);
        let pt: Vec<usize> = sizes.iter().map(|&s| r.gen_range(0..s)).collect();
        let qt: Vec<usize> = sizes.iter().map(|&s| r.gen_range(0..=s)).collect();
        // P: first variable matches; Q: every variable is at most its bound (can be null)
        let p = move |o: &[usize]| o[0] == pt[0];
        let q = move |o: &[usize]| o.iter().zip(&qt).all(|(&v, &b)| v < b);
        let cfg = ExactConfig::default();
        let lhs = cond_prob(&space, p.clone(), q.clone(), &cfg).unwrap() * exact_prob(&space, q.clone(), &cfg).unwrap();
        let joint = exact_prob(&space, |o| p(o) && q(o), &cfg).unwrap();
        prop_assert!((lhs - joint).abs() <= 1e-12);
        let lhs_r = cond_prob_rational(&space, p.clone(), q.clone()).unwrap() * exact_prob_rational(&space, q.clone()).unwrap();
        prop_assert_eq!(lhs_r, exact_prob_rational(&space, |o| p(o) && q(o)).unwrap());
    }

    #[test]
    fn risk_entries_are_probabilities_and_monotone(seed in any::<u64>()) {
        let case = common::random_lcl(seed);
        let cfg = ExactConfig::default();
        let table = risk_table_exact(&case.space, &case.model, &cfg).unwrap();
        // F' = F plus every edge with tail variable 1 implies F, so risks can only grow
        let base = case.model.clone();
        let bigger = FnCutModel::new(case.digraph.clone(), move |o: &[usize]| {
            let s = base.sample(o);
            let f = s.f.iter().enumerate().map(|(e, &x)| x || o[base.digraph().edge(e).tail] == 1).collect();
            CutSample { a: s.a, f }
        });
        let big = risk_table_exact(&case.space, &bigger, &cfg).unwrap();
        for e in 0..case.digraph.edge_count() {
            for &(z, p) in table.row(e) {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(big.get(e, z).unwrap() >= p - 1e-15);
            }
        }
    }

    #[test]
    fn apply_f_is_monotone(seed in any::<u64>()) {
        let case = common::random_lcl(seed);
        let inst = LclInstance::from_model(case.space, case.model, &ExactConfig::default()).unwrap();
        let mut r = common::rng(seed);
        let m = inst.simple().arc_count();
        let lo = ArcWeights((0..m).map(|_| r.gen_range(1.0..3.0)).collect());
        let hi = ArcWeights(lo.as_slice().iter().map(|&v| v + r.gen_range(0.0..2.0)).collect());
        let flo = inst.apply_f(&lo, Execution::Sequential).unwrap();
        let fhi = inst.apply_f(&hi, Execution::Sequential).unwrap();
        prop_assert!(flo.dominated_by(&fhi, 0.0));
        let par = inst.apply_f(&lo, Execution::Parallel).unwrap();
        prop_assert_eq!(flo.as_slice(), par.as_slice());
    }

    #[test]
    fn random_families_are_downward_closed(seed in any::<u64>()) {
        let case = common::random_family(seed);
        let space = case.inst.space().unwrap();
        for (o, _) in common::outcomes(space) {
            let fam = case.inst.family_at(&o).unwrap();
            for &s in fam.members() {
                for t in submasks(s) {
                    prop_assert!(fam.contains(t));
                }
            }
        }
        prop_assert!(validate_family(&case.inst, &ExactConfig::default()).unwrap().valid);
    }

    #[test]
    fn hypergraph_families_are_downward_closed(edges in prop::collection::vec(prop::collection::btree_set(0usize..4, 1..=4), 0..4)) {
        let h = Hypergraph::new(4, edges.into_iter().map(|e| e.into_iter().collect()).collect()).unwrap();
        let inst = FamilyInstance::hypergraph_two_coloring(&h).unwrap();
        for (o, _) in common::outcomes(inst.space().unwrap()) {
            let fam = inst.family_at(&o).unwrap();
            for &s in fam.members() {
                for t in submasks(s) {
                    prop_assert!(fam.contains(t));
                }
            }
        }
        prop_assert!(validate_family(&inst, &ExactConfig::default()).unwrap().valid);
    }

    #[test]
    fn reduction_is_sound(seed in any::<u64>()) {
        let case = common::random_family(seed);
        let cfg = ExactConfig::default();
        let rep = check_family_condition(&case.inst, &case.tau, &case.witnesses, 0.0, &cfg).unwrap();
        let hyp = hypercube_digraph(&case.inst, &case.tau).unwrap();
        let lcl = hyp.lcl_instance(&cfg).unwrap();
        if rep.feasible {
            prop_assert!(lcl.check_condition(&hyp.weights, 1e-12).unwrap().feasible);
        }
        let d = min_product_weight(lcl.simple(), &hyp.weights, hyp.vertex_of(case.inst.full_set()), hyp.vertex_of(0))
            .unwrap()
            .unwrap();
        prop_assert!((1.0 / d - rep.bound).abs() <= 1e-12);
    }

    #[test]
    fn lopsided_feasibility_carries_over(seed in any::<u64>()) {
        let (gamma, probs) = common::random_lll(seed);
        if let MuVerdict::Feasible { mu, .. } = auto_mu(&probs, &gamma, 100_000).unwrap() {
            let inst = LllInstance::new(gamma, probs, mu).unwrap();
            let t = mu_to_tau(&inst, 1e-12).unwrap();
            prop_assert!(t.condition_holds);
            prop_assert!(t.bound_mismatch <= 1e-12);
            let (fam, w) = to_family(&inst).unwrap();
            let tau = lcl_core::family::TauAssignment(t.tau.clone());
            let rep = check_family_condition(&fam, &tau, &w, 1e-12, &ExactConfig::default()).unwrap();
            prop_assert!(rep.feasible);
        }
    }

    #[test]
    fn acyclic_feasibility_is_monotone_in_k(delta in 2u64..40, k in 1u64..200) {
        if acyclic_feasible(delta, k).unwrap().result.feasible {
            prop_assert!(acyclic_feasible(delta, k + 1).unwrap().result.feasible);
        }
    }

    #[test]
    fn expectation_forms_agree(seed in any::<u64>()) {
        let (inst, w) = common::random_choice(seed);
        let rep = check_expectation_condition(&inst, &w, 0.0).unwrap();
        prop_assert!(rep.forms_agree);
        for u in &rep.universes {
            prop_assert!((u.margin - u.margin_normalised).abs() <= 1e-12 * (1.0 + u.tau + u.expected_defect));
        }
    }

    #[test]
    fn extraction_and_certificates(seed in any::<u64>()) {
        let (inst, w) = common::random_choice(seed);
        let mut r = common::rng(seed);
        let m = Multichoice((0..inst.element_count()).map(|_| r.gen_bool(0.7)).collect());
        if multichoice_certificate(&inst, &m) {
            prop_assert!(avoids_all(&inst, &extract_choice(&inst, &m).unwrap()));
        }
        let f = ChoiceFunction((0..inst.universe_count()).map(|i| inst.universe(i)[r.gen_range(0..inst.universe(i).len())]).collect());
        if avoids_all(&inst, &f) {
            prop_assert!(multichoice_certificate(&inst, &f.as_multichoice(&inst)));
        }
        if check_expectation_condition(&inst, &w, 0.0).unwrap().feasible {
            let s = randomized_choice_search(&inst, &w, seed, 100_000).unwrap();
            prop_assert!(avoids_all(&inst, &s.choice));
        }
    }

    #[test]
    fn nonrepetitive_verifier_matches_brute_force(seq in prop::collection::vec(0u8..3, 0..12)) {
        let brute = (0..seq.len()).any(|i| (1..=(seq.len() - i) / 2).any(|t| seq[i..i + t] == seq[i + t..i + 2 * t]));
        prop_assert_eq!(is_nonrepetitive(&seq).valid, !brute);
    }

    #[test]
    fn two_colouring_verifier_matches_brute_force(bits in prop::collection::vec(any::<bool>(), 6)) {
        let h = Hypergraph::new(6, vec![vec![0, 1, 2], vec![2, 3, 4], vec![1, 4, 5], vec![0, 5]]).unwrap();
        let proper = h.edges.iter().all(|e| e.iter().any(|&v| bits[v] != bits[e[0]]));
        let v = verify_proper_2coloring(&h, &bits).unwrap();
        prop_assert_eq!(v.valid, proper);
        if let Some(e) = v.witness {
            prop_assert!(h.edges[e].iter().all(|&x| bits[x] == bits[h.edges[e][0]]));
        }
    }

    #[test]
    fn acyclic_verifier_matches_cycle_enumeration(colours in prop::collection::vec(0usize..3, 6)) {
        let k4 = Graph::complete(4);
        let adjacent_clash = (0..6).any(|a| (a + 1..6).any(|b| {
            let (e, f) = (k4.edges[a], k4.edges[b]);
            colours[a] == colours[b] && (e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1)
        }));
        // the cycles of K4: four triangles and three 4-cycles
        let edge = |u: usize, v: usize| k4.edges.iter().position(|&(a, b)| (a, b) == (u.min(v), u.max(v))).unwrap();
        let cycles: Vec<Vec<usize>> = vec![
            vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3],
            vec![0, 1, 2, 3], vec![0, 1, 3, 2], vec![0, 2, 1, 3],
        ];
        let bichromatic = cycles.iter().any(|c| {
            let es: Vec<usize> = (0..c.len()).map(|i| edge(c[i], c[(i + 1) % c.len()])).collect();
            let mut cs: Vec<usize> = es.iter().map(|&e| colours[e]).collect();
            cs.sort_unstable();
            cs.dedup();
            cs.len() <= 2
        });
        let v = is_acyclic_edge_coloring(&k4, &colours).unwrap();
        prop_assert_eq!(v.valid, !adjacent_clash && !bichromatic);
        if let Some(AcyclicWitness::Bichromatic(c)) = v.witness {
            let mut cs: Vec<usize> = c.iter().map(|&e| colours[e]).collect();
            cs.sort_unstable();
            cs.dedup();
            prop_assert_eq!(cs.len(), 2);
        }
    }

    #[test]
    fn samplers_are_deterministic(seed in any::<u64>()) {
        let h = common::random_true_hypergraph(seed, 10, 8);
        prop_assert_eq!(mt_two_coloring(&h, seed, 10_000).unwrap(), mt_two_coloring(&h, seed, 10_000).unwrap());
        let lists = ListAssignment::uniform_size(30, 3);
        prop_assert_eq!(nonrep_sequence_build(&lists, seed, 10_000).unwrap(), nonrep_sequence_build(&lists, seed, 10_000).unwrap());
        let g = Graph::complete(5);
        let a = ep_acyclic_edge_coloring(&g, 7, seed, 10_000).unwrap();
        prop_assert_eq!(&a, &ep_acyclic_edge_coloring(&g, 7, seed, 10_000).unwrap());
        if let Some(c) = a.object {
            prop_assert!(is_acyclic_edge_coloring(&g, &c).unwrap().valid);
        }
    }

    #[test]
    fn nonrepetitive_colouring_check_is_exhaustive(colours in prop::collection::vec(0usize..3, 5)) {
        let g = Graph::cycle(5);
        // paths with an even number of vertices on C5 have 2 or 4 vertices
        let mut bad = false;
        for s in 0..5 {
            for dir in [1usize, 4] {
                let p: Vec<usize> = (0..4).map(|i| (s + i * dir) % 5).collect();
                bad |= colours[p[0]] == colours[p[1]];
                bad |= colours[p[0]] == colours[p[2]] && colours[p[1]] == colours[p[3]];
            }
        }
        prop_assert_eq!(is_nonrepetitive_coloring(&g, &colours, 4, 10_000).unwrap().valid, !bad);
    }
}

#[test]
fn estimates_cover_the_exact_value() {
    let space = ProductSpace::new(
        (0..4)
            .map(|i| Variable::uniform(format!("x{i}"), ["0", "1", "2"]))
            .collect(),
    )
    .unwrap();
    type Pred = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;
    let events: Vec<(Pred, Pred)> = (0..10)
        .map(|j| {
            let p: Pred = Arc::new(move |o: &[usize]| (o[0] + o[1] * j).is_multiple_of(3));
            let q: Pred = Arc::new(move |o: &[usize]| o[2] + o[3] >= j % 4);
            (p, q)
        })
        .collect();
    let cfg = ExactConfig::default();
    for (p, q) in &events {
        let exact = cond_prob(&space, |o| p(o), |o| q(o), &cfg).unwrap();
        let covered = (0..50u64)
            .filter(|&seed| {
                let e = estimate_cond_prob(&space, |o| p(o), |o| q(o), 2000, seed, Execution::Parallel).unwrap();
                (e.estimate - exact).abs() <= e.half_width
            })
            .count();
        assert!(covered >= 45, "{covered}/50");
    }
}

#[test]
fn hypcol_bounds_grow_with_k() {
    for variant in [
        HypColVariant::Lll,
        HypColVariant::Exact,
        HypColVariant::Crude,
        HypColVariant::Improved,
    ] {
        let mut prev = 0.0;
        for k in 2..=40 {
            let b = hypergraph_two_coloring_max_degree(k, variant).unwrap();
            assert!(b.bound >= prev, "{variant:?} k = {k}");
            prev = b.bound;
        }
    }
}

#[test]
fn rational_and_float_probabilities_agree() {
    let case = common::random_lcl(17);
    let cfg = ExactConfig::default();
    let ev = |o: &[usize]| o[0] != 0;
    let f = exact_prob(&case.space, ev, &cfg).unwrap();
    let r = rational_to_f64(&exact_prob_rational(&case.space, ev).unwrap());
    assert!((f - r).abs() <= 1e-12);
}
