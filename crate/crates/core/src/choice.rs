//! Choice functions avoiding forbidden partial choice functions: defects,
//! multichoice certificates, extraction, the expectation condition and a
//! resampling search.

use std::collections::{BTreeMap, HashMap};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::structures::Graph;

/// Serialized instance: universes and forbidden sets as element ids, weights
/// as an id → p map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiceSpec {
    pub universes: Vec<Vec<String>>,
    #[serde(default)]
    pub forbidden: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, f64>>,
}

/// Disjoint universes `U_1..U_n` and forbidden sets `P_1..P_m`.
///
/// Elements are numbered globally, universe by universe, in input order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceInstance {
    ids: Vec<String>,
    universe_of: Vec<usize>,
    universes: Vec<Vec<usize>>,
    forbidden: Vec<Vec<usize>>,
    /// `N_i`: indices of forbidden sets whose domain contains `i`.
    neighbours: Vec<Vec<usize>>,
}

impl ChoiceInstance {
    pub fn new(universes: Vec<Vec<String>>, forbidden: Vec<Vec<String>>) -> Result<Self> {
        let mut ids = Vec::new();
        let mut universe_of = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut unis = Vec::with_capacity(universes.len());
        for (i, u) in universes.into_iter().enumerate() {
            if u.is_empty() {
                return Err(Error::InvalidInput(format!("universe U_{} is empty", i + 1)));
            }
            let mut members = Vec::with_capacity(u.len());
            for id in u {
                if index.contains_key(&id) {
                    return Err(Error::DuplicateId(id));
                }
                index.insert(id.clone(), ids.len());
                members.push(ids.len());
                ids.push(id);
                universe_of.push(i);
            }
            unis.push(members);
        }
        let mut forb = Vec::with_capacity(forbidden.len());
        let mut neighbours = vec![Vec::new(); unis.len()];
        for (j, p) in forbidden.into_iter().enumerate() {
            if p.is_empty() {
                return Err(Error::InvalidInput(format!("forbidden set P_{} is empty", j + 1)));
            }
            let mut set = Vec::with_capacity(p.len());
            for id in &p {
                let x = *index.get(id).ok_or_else(|| Error::UnknownVertex(id.clone()))?;
                set.push(x);
            }
            set.sort_unstable();
            set.dedup();
            let mut dom: Vec<usize> = set.iter().map(|&x| universe_of[x]).collect();
            dom.dedup();
            if dom.len() != set.len() {
                return Err(Error::InvalidInput(format!(
                    "P_{} takes two elements from one universe",
                    j + 1
                )));
            }
            for &i in &dom {
                neighbours[i].push(j);
            }
            forb.push(set);
        }
        Ok(Self {
            ids,
            universe_of,
            universes: unis,
            forbidden: forb,
            neighbours,
        })
    }

    pub fn from_spec(spec: &ChoiceSpec) -> Result<Self> {
        Self::new(spec.universes.clone(), spec.forbidden.clone())
    }

    /// Proper `k`-colourings of `g`: `U_v = {(v, c)}`, `P = {(u, c), (v, c)}`
    /// per edge and colour.
    pub fn graph_coloring(g: &Graph, k: usize) -> Result<Self> {
        let universes = (0..g.vertex_count)
            .map(|v| (0..k).map(|c| format!("{v}:{c}")).collect())
            .collect();
        let forbidden = g
            .edges
            .iter()
            .flat_map(|&(u, v)| (0..k).map(move |c| vec![format!("{u}:{c}"), format!("{v}:{c}")]))
            .collect();
        Self::new(universes, forbidden)
    }

    pub fn universe_count(&self) -> usize {
        self.universes.len()
    }

    pub fn element_count(&self) -> usize {
        self.ids.len()
    }

    pub fn universe(&self, i: usize) -> &[usize] {
        &self.universes[i]
    }

    pub fn forbidden(&self) -> &[Vec<usize>] {
        &self.forbidden
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn universe_of(&self, x: usize) -> usize {
        self.universe_of[x]
    }

    pub fn element(&self, id: &str) -> Result<usize> {
        self.ids
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    /// `dom(P_j)`.
    pub fn domain(&self, j: usize) -> Vec<usize> {
        self.forbidden[j].iter().map(|&x| self.universe_of[x]).collect()
    }
}

/// A subset `M` of the union of the universes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multichoice(pub Vec<bool>);

impl Multichoice {
    pub fn from_elements(inst: &ChoiceInstance, elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m = vec![false; inst.element_count()];
        for x in elements {
            *m.get_mut(x)
                .ok_or_else(|| Error::InvalidInput(format!("element {x} does not exist")))? = true;
        }
        Ok(Self(m))
    }

    pub fn from_ids<'a>(inst: &ChoiceInstance, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let xs = ids.into_iter().map(|id| inst.element(id)).collect::<Result<Vec<_>>>()?;
        Self::from_elements(inst, xs)
    }

    /// `|M ∩ U_i|`.
    pub fn count_in(&self, inst: &ChoiceInstance, i: usize) -> usize {
        inst.universe(i).iter().filter(|&&x| self.0[x]).count()
    }

    fn contains_all(&self, set: &[usize]) -> bool {
        set.iter().all(|&x| self.0[x])
    }
}

/// `def_i(M) = |{ j ∈ N_i : P_j ⊆ M }|`.
pub fn defect(inst: &ChoiceInstance, m: &Multichoice, i: usize) -> usize {
    inst.neighbours(i)
        .iter()
        .filter(|&&j| m.contains_all(&inst.forbidden[j]))
        .count()
}

/// `|M_i| ≥ 1 + def_i(M)` for every `i`.
pub fn multichoice_certificate(inst: &ChoiceInstance, m: &Multichoice) -> bool {
    (0..inst.universe_count()).all(|i| m.count_in(inst, i) > defect(inst, m, i))
}

/// Chosen element of each universe (global indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceFunction(pub Vec<usize>);

impl ChoiceFunction {
    pub fn ids<'a>(&self, inst: &'a ChoiceInstance) -> Vec<&'a str> {
        self.0.iter().map(|&x| inst.id(x)).collect()
    }

    pub fn as_multichoice(&self, inst: &ChoiceInstance) -> Multichoice {
        Multichoice::from_elements(inst, self.0.iter().copied()).expect("chosen elements exist")
    }
}

/// Index of the first forbidden set occurring in `f`, or `None` when `f` is a
/// choice function avoiding all of them.
pub fn first_occurring(inst: &ChoiceInstance, f: &ChoiceFunction) -> Option<usize> {
    let chosen: std::collections::HashSet<usize> = f.0.iter().copied().collect();
    inst.forbidden
        .iter()
        .position(|p| p.iter().all(|x| chosen.contains(x)))
}

/// True when `f` picks exactly one element from each universe and contains
/// no forbidden set.
pub fn avoids_all(inst: &ChoiceInstance, f: &ChoiceFunction) -> bool {
    f.0.len() == inst.universe_count()
        && f.0
            .iter()
            .enumerate()
            .all(|(i, &x)| x < inst.element_count() && inst.universe_of(x) == i)
        && first_occurring(inst, f).is_none()
}

/// Picks, in each universe, the smallest element of `M_i` that lies in no
/// forbidden set occurring in `M`.
pub fn extract_choice(inst: &ChoiceInstance, m: &Multichoice) -> Result<ChoiceFunction> {
    if !multichoice_certificate(inst, m) {
        return Err(Error::Precondition("multichoice function is not a certificate".into()));
    }
    let mut blocked = vec![false; inst.element_count()];
    for p in &inst.forbidden {
        if m.contains_all(p) {
            for &x in p {
                blocked[x] = true;
            }
        }
    }
    let choice = (0..inst.universe_count())
        .map(|i| {
            inst.universe(i)
                .iter()
                .copied()
                .find(|&x| m.0[x] && !blocked[x])
                .ok_or_else(|| Error::Precondition(format!("no free element in M_{}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let f = ChoiceFunction(choice);
    assert!(avoids_all(inst, &f), "extracted choice function hits a forbidden set");
    Ok(f)
}

/// `p(x) ∈ [0, 1]` per element.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalWeights(pub Vec<f64>);

impl MarginalWeights {
    pub fn uniform(inst: &ChoiceInstance, p: f64) -> Self {
        Self(vec![p; inst.element_count()])
    }

    /// Every element must appear in the map.
    pub fn from_map(inst: &ChoiceInstance, map: &BTreeMap<String, f64>) -> Result<Self> {
        for id in map.keys() {
            inst.element(id)?;
        }
        let w = (0..inst.element_count())
            .map(|x| {
                map.get(inst.id(x))
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("no weight for element {}", inst.id(x))))
            })
            .collect::<Result<Vec<_>>>()?;
        let w = Self(w);
        w.validate(inst)?;
        Ok(w)
    }

    pub fn validate(&self, inst: &ChoiceInstance) -> Result<()> {
        if self.0.len() != inst.element_count() {
            return Err(Error::WeightArity {
                expected: inst.element_count(),
                got: self.0.len(),
            });
        }
        if let Some(p) = self.0.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!("weight {p} is outside [0, 1]")));
        }
        Ok(())
    }

    /// `τ(i) = Σ_{x ∈ U_i} p(x)`.
    pub fn tau(&self, inst: &ChoiceInstance) -> Vec<f64> {
        (0..inst.universe_count())
            .map(|i| inst.universe(i).iter().map(|&x| self.0[x]).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniverseReport {
    /// `τ(i) = E|M_i|`.
    pub tau: f64,
    /// `E def_i(M) = Σ_{j ∈ N_i} Π_{x ∈ P_j} p(x)`.
    pub expected_defect: f64,
    /// `τ(i) - 1 - E def_i(M)`.
    pub margin: f64,
    /// `τ(i) - 1 - Σ_{j ∈ N_i} Π q(x)·τ(dom P_j)`.
    pub margin_normalised: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub universes: Vec<UniverseReport>,
    pub feasible: bool,
    /// Both forms give the same margins to within `1e-12` (relative).
    pub forms_agree: bool,
    /// When feasible, some choice function avoids every forbidden set.
    pub choice_exists: bool,
}

/// Checks `Σ_{x ∈ U_i} p(x) ≥ 1 + Σ_{j ∈ N_i} Π_{x ∈ P_j} p(x)` and its
/// normalised form.
pub fn check_expectation_condition(inst: &ChoiceInstance, w: &MarginalWeights, tol: f64) -> Result<ExpectationReport> {
    w.validate(inst)?;
    let tau = w.tau(inst);
    if let Some(i) = tau.iter().position(|&t| t <= 0.0) {
        return Err(Error::Precondition(format!("τ({}) = 0", i + 1)));
    }
    let q: Vec<f64> = (0..inst.element_count())
        .map(|x| w.0[x] / tau[inst.universe_of(x)])
        .collect();
    let mut universes = Vec::with_capacity(inst.universe_count());
    let mut forms_agree = true;
    for (i, &t) in tau.iter().enumerate() {
        let expected_defect: f64 = inst
            .neighbours(i)
            .iter()
            .map(|&j| inst.forbidden[j].iter().map(|&x| w.0[x]).product::<f64>())
            .sum();
        let normalised: f64 = inst
            .neighbours(i)
            .iter()
            .map(|&j| {
                let qp: f64 = inst.forbidden[j].iter().map(|&x| q[x]).product();
                let td: f64 = inst.domain(j).iter().map(|&d| tau[d]).product();
                qp * td
            })
            .sum();
        let margin = t - 1.0 - expected_defect;
        let margin_normalised = t - 1.0 - normalised;
        forms_agree &= (margin - margin_normalised).abs() <= 1e-12 * (1.0 + t + expected_defect);
        universes.push(UniverseReport {
            tau: t,
            expected_defect,
            margin,
            margin_normalised,
        });
    }
    let feasible = universes.iter().all(|u| u.margin >= -tol);
    Ok(ExpectationReport {
        universes,
        feasible,
        forms_agree,
        choice_exists: feasible,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoiceSearch {
    pub choice: ChoiceFunction,
    pub resamples: u64,
    pub seed: u64,
}

/// Draws each `U_i` from `q(x) = p(x)/τ(i)` and, while some `P_j` occurs,
/// redraws every universe in `dom(P_j)` for the lowest such `j`.
pub fn randomized_choice_search(
    inst: &ChoiceInstance,
    w: &MarginalWeights,
    seed: u64,
    cap: u64,
) -> Result<ChoiceSearch> {
    let report = check_expectation_condition(inst, w, 0.0)?;
    if !report.feasible {
        return Err(Error::Precondition("expectation condition fails".into()));
    }
    let samplers = (0..inst.universe_count())
        .map(|i| {
            WeightedIndex::new(inst.universe(i).iter().map(|&x| w.0[x]))
                .map_err(|e| Error::InvalidInput(format!("U_{}: {e}", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |i: usize, rng: &mut ChaCha8Rng| inst.universe(i)[samplers[i].sample(rng)];
    let mut f = ChoiceFunction((0..inst.universe_count()).map(|i| draw(i, &mut rng)).collect());
    let mut resamples = 0;
    while let Some(j) = first_occurring(inst, &f) {
        if resamples >= cap {
            return Err(Error::CapExhausted { cap });
        }
        resamples += 1;
        for d in inst.domain(j) {
            f.0[d] = draw(d, &mut rng);
        }
    }
    assert!(avoids_all(inst, &f));
    Ok(ChoiceSearch {
        choice: f,
        resamples,
        seed,
    })
}

/// Independent searches, one per seed.
pub fn randomized_choice_search_many(
    inst: &ChoiceInstance,
    w: &MarginalWeights,
    seeds: &[u64],
    cap: u64,
    exec: Execution,
) -> Vec<Result<ChoiceSearch>> {
    map_slice(exec, seeds, |&s| randomized_choice_search(inst, w, s, cap))
}

/// First avoiding choice function in lexicographic order, if the product of
/// universe sizes is at most `limit`.
pub fn exhaustive_choice(inst: &ChoiceInstance, limit: u64) -> Result<Option<ChoiceFunction>> {
    let total = (0..inst.universe_count()).try_fold(1u64, |acc, i| acc.checked_mul(inst.universe(i).len() as u64));
    match total {
        Some(t) if t <= limit => {}
        _ => {
            return Err(Error::EnumerationCap {
                outcomes: total.map_or(u128::MAX, u128::from),
                cap: limit,
            })
        }
    }
    let n = inst.universe_count();
    let mut pos = vec![0usize; n];
    loop {
        let f = ChoiceFunction((0..n).map(|i| inst.universe(i)[pos[i]]).collect());
        if first_occurring(inst, &f).is_none() {
            return Ok(Some(f));
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(None);
            }
            pos[i] += 1;
            if pos[i] < inst.universe(i).len() {
                break;
            }
            pos[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn two_universes() -> ChoiceInstance {
        ChoiceInstance::new(
            vec![s(&["a1", "a2"]), s(&["b1", "b2"])],
            vec![s(&["a1", "b1"]), s(&["a1", "b2"]), s(&["a2"])],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(ChoiceInstance::new(vec![s(&[])], vec![]).is_err());
        assert!(ChoiceInstance::new(vec![s(&["x"]), s(&["x"])], vec![]).is_err());
        assert!(ChoiceInstance::new(vec![s(&["x", "y"])], vec![s(&["x", "y"])]).is_err());
        assert!(ChoiceInstance::new(vec![s(&["x"])], vec![s(&[])]).is_err());
        assert!(ChoiceInstance::new(vec![s(&["x"])], vec![s(&["z"])]).is_err());
    }

    #[test]
    fn defect_examples() {
        let inst = two_universes();
        let empty = Multichoice::from_elements(&inst, []).unwrap();
        assert_eq!(defect(&inst, &empty, 0), 0);
        let m = Multichoice::from_ids(&inst, ["a1", "b1"]).unwrap();
        assert_eq!(defect(&inst, &m, 0), 1);
        assert_eq!(defect(&inst, &m, 1), 1);
        let full = Multichoice(vec![true; 4]);
        // P_1, P_2, P_3 all occur; N_1 = {1,2,3}, N_2 = {1,2}
        assert_eq!(defect(&inst, &full, 0), 3);
        assert_eq!(defect(&inst, &full, 1), 2);
    }

    #[test]
    fn certificate_examples() {
        let free = ChoiceInstance::new(vec![s(&["a", "b"]), s(&["c"])], vec![]).unwrap();
        assert!(multichoice_certificate(&free, &Multichoice::from_ids(&free, ["a", "c"]).unwrap()));
        assert!(!multichoice_certificate(&free, &Multichoice::from_ids(&free, ["a"]).unwrap()));
        let inst = two_universes();
        assert!(!multichoice_certificate(&inst, &Multichoice(vec![true; 4])));
        let tiny = ChoiceInstance::new(vec![s(&["a", "b"]), s(&["c", "d"])], vec![s(&["a"])]).unwrap();
        // |M_1| = 2 ≥ 1 + 1, |M_2| = 2 ≥ 1 + 0
        assert!(multichoice_certificate(&tiny, &Multichoice(vec![true; 4])));
    }

    #[test]
    fn extraction() {
        let tiny = ChoiceInstance::new(vec![s(&["a", "b"]), s(&["c", "d"])], vec![s(&["a"])]).unwrap();
        let f = extract_choice(&tiny, &Multichoice(vec![true; 4])).unwrap();
        assert_eq!(f.ids(&tiny), ["b", "c"]);
        let inst = two_universes();
        let m = Multichoice::from_ids(&inst, ["a1", "b1"]).unwrap();
        assert!(extract_choice(&inst, &m).is_err());
        // an avoiding choice function is its own certificate
        let three = ChoiceInstance::new(
            vec![s(&["x1", "x2"]), s(&["y1", "y2"]), s(&["z1", "z2"])],
            vec![s(&["x1", "y1"]), s(&["y2", "z2"]), s(&["x2", "z1"])],
        )
        .unwrap();
        let f = ChoiceFunction(vec![0, 3, 4]);
        assert!(avoids_all(&three, &f));
        let m = f.as_multichoice(&three);
        assert!(multichoice_certificate(&three, &m));
        assert_eq!(extract_choice(&three, &m).unwrap(), f);
    }

    #[test]
    fn expectation_examples() {
        let free = ChoiceInstance::new(vec![s(&["a", "b"]), s(&["c"])], vec![]).unwrap();
        let r = check_expectation_condition(&free, &MarginalWeights::uniform(&free, 1.0), 0.0).unwrap();
        assert_eq!(r.universes[0].margin, 1.0);
        assert_eq!(r.universes[1].margin, 0.0);
        assert!(r.feasible && r.forms_agree);

        // two variables, clauses forbidding (x=T, y=T) and (x=F, y=F)
        let sat = ChoiceInstance::new(
            vec![s(&["xT", "xF"]), s(&["yT", "yF"])],
            vec![s(&["xT", "yT"]), s(&["xF", "yF"])],
        )
        .unwrap();
        let r = check_expectation_condition(&sat, &MarginalWeights::uniform(&sat, 0.75), 0.0).unwrap();
        // τ = 1.5, E def = 2·0.5625 = 1.125
        assert_eq!(r.universes[0].tau, 1.5);
        assert_eq!(r.universes[0].expected_defect, 1.125);
        assert_eq!(r.universes[0].margin, -0.625);
        assert!(!r.feasible && r.forms_agree);
        let zero = check_expectation_condition(&sat, &MarginalWeights::uniform(&sat, 0.0), 0.0);
        assert!(zero.is_err());
    }

    #[test]
    fn search_examples() {
        let free = ChoiceInstance::new(vec![s(&["a", "b"]), s(&["c"])], vec![]).unwrap();
        let r = randomized_choice_search(&free, &MarginalWeights::uniform(&free, 1.0), 1, 10).unwrap();
        assert_eq!(r.resamples, 0);

        // path on 5 vertices, 10 colours, p ≡ 1/4: 2.5 ≥ 1 + 2·10/16
        let g = Graph::path(5);
        let inst = ChoiceInstance::graph_coloring(&g, 10).unwrap();
        let w = MarginalWeights::uniform(&inst, 0.25);
        assert!(check_expectation_condition(&inst, &w, 0.0).unwrap().feasible);
        for seed in 0..20 {
            let r = randomized_choice_search(&inst, &w, seed, 10_000).unwrap();
            assert!(avoids_all(&inst, &r.choice));
        }
        assert!(exhaustive_choice(&inst, 100_000).unwrap().is_some());
    }

    #[test]
    fn search_cap_is_reported() {
        // K3 with 2 colours has no proper colouring
        let inst = ChoiceInstance::graph_coloring(&Graph::complete(3), 2).unwrap();
        let w = MarginalWeights::uniform(&inst, 1.0);
        assert!(matches!(
            randomized_choice_search(&inst, &w, 0, 100),
            Err(Error::Precondition(_))
        ));
        assert_eq!(exhaustive_choice(&inst, 100).unwrap(), None);
    }

    proptest::proptest! {
        #[test]
        fn colouring_margins_agree(n in 2usize..7, k in 2usize..6, p in 0.05f64..1.0, seed in 0u64..1000) {
            let g = crate::samplers::random_bounded_degree_graph(n, 3, seed);
            let inst = ChoiceInstance::graph_coloring(&g, k).unwrap();
            let r = check_expectation_condition(&inst, &MarginalWeights::uniform(&inst, p), 0.0).unwrap();
            proptest::prop_assert!(r.forms_agree);
            for (v, u) in r.universes.iter().enumerate() {
                // τ = kp, E def = deg(v)·k·p²
                let want = k as f64 * p - 1.0 - g.degrees()[v] as f64 * k as f64 * p * p;
                proptest::prop_assert!((u.margin - want).abs() < 1e-12);
            }
        }
    }
}
