//! Downward-closed random families over a small ground set `I`.
//!
//! Subsets of `I` are bitmasks (`u64`, bit `i` for element `i`). Events
//! attached to an element may carry a predicate on outcomes (exact mode) or
//! only a caller-supplied bound on `max_Z Pr(B | Z ∈ A)` (bound mode).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::digraph::{ArcWeights, Edge, MultiDigraph};
use crate::engine::LclInstance;
use crate::error::{Error, Result};
use crate::probability::{
    fold_outcomes, ratio_or_zero, CutModel, CutSample, ExactConfig, KahanSum, ProductSpace, Variable,
};
use crate::structures::Hypergraph;

pub type Subset = u64;

/// Largest ground set the crate accepts.
pub const MAX_ELEMENTS: usize = 63;
/// Default bound on `|I ∖ X|` for exact evaluation of `σ`.
pub const MAX_FREE_ELEMENTS: usize = 20;
/// Largest ground set for the hypercube reduction.
pub const MAX_HYPERCUBE_ELEMENTS: usize = 4;

pub type EventFn = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;
pub type MembershipFn = Arc<dyn Fn(&[usize], Subset) -> bool + Send + Sync>;

pub fn popcount(s: Subset) -> usize {
    s.count_ones() as usize
}

fn elements_of(s: Subset) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&i| s >> i & 1 == 1)
}

/// Every submask of `mask`, starting from the empty set.
pub fn submasks(mask: Subset) -> Vec<Subset> {
    let mut out = Vec::with_capacity(1usize << popcount(mask));
    let mut s: Subset = 0;
    loop {
        out.push(s);
        if s == mask {
            break;
        }
        s = (s.wrapping_sub(mask)) & mask;
    }
    out
}

/// A downward-closed family given by its members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitFamily {
    n: usize,
    members: BTreeSet<Subset>,
}

impl ExplicitFamily {
    /// Errors unless every subset of a member is a member.
    pub fn new(n: usize, members: impl IntoIterator<Item = Subset>) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(Error::InvalidInput(format!("ground set of {n} elements is too large")));
        }
        let full = full_set(n);
        let members: BTreeSet<Subset> = members.into_iter().collect();
        if members.iter().any(|&s| s & !full != 0) {
            return Err(Error::InvalidInput("member outside the ground set".into()));
        }
        if !is_downward_closed(&members) {
            return Err(Error::NotDownwardClosed);
        }
        Ok(Self { n, members })
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.members.contains(&s)
    }

    pub fn members(&self) -> &BTreeSet<Subset> {
        &self.members
    }

    /// `∂A = { i : S ∈ A, S ∪ {i} ∉ A for some S ⊆ I ∖ {i} }`.
    pub fn boundary(&self) -> Subset {
        boundary_of(self.n, |s| self.members.contains(&s), self.members.iter().copied())
    }
}

fn full_set(n: usize) -> Subset {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn is_downward_closed(members: &BTreeSet<Subset>) -> bool {
    members
        .iter()
        .all(|&s| elements_of(s).all(|i| members.contains(&(s & !(1 << i)))))
}

fn boundary_of(n: usize, member: impl Fn(Subset) -> bool, members: impl Iterator<Item = Subset>) -> Subset {
    let mut b = 0;
    for s in members {
        for i in 0..n {
            if s >> i & 1 == 0 && !member(s | 1 << i) {
                b |= 1 << i;
            }
        }
    }
    b
}

/// `∂A` of a downward-closed family given by its members.
pub fn boundary(family: &ExplicitFamily) -> Subset {
    family.boundary()
}

/// An event in `B(i)`.
#[derive(Clone)]
pub struct FamilyEvent {
    pub name: String,
    pub holds: Option<EventFn>,
}

impl FamilyEvent {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            holds: None,
        }
    }

    pub fn with_predicate(name: impl Into<String>, f: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            holds: Some(Arc::new(f)),
        }
    }
}

/// Ground set, random family, event bundles and (optionally) the space.
#[derive(Clone)]
pub struct FamilyInstance {
    elements: Vec<String>,
    events: Vec<Vec<FamilyEvent>>,
    space: Option<ProductSpace>,
    family: Option<MembershipFn>,
}

impl FamilyInstance {
    /// An instance that only knows event names; every `σ` needs a bound.
    pub fn bound_only(elements: Vec<String>, events: Vec<Vec<FamilyEvent>>) -> Result<Self> {
        Self::check_shape(&elements, &events)?;
        Ok(Self {
            elements,
            events,
            space: None,
            family: None,
        })
    }

    /// An instance with a product space and a membership predicate
    /// `(outcome, S) ↦ S ∈ A`.
    pub fn exact(
        elements: Vec<String>,
        space: ProductSpace,
        family: MembershipFn,
        events: Vec<Vec<FamilyEvent>>,
    ) -> Result<Self> {
        Self::check_shape(&elements, &events)?;
        Ok(Self {
            elements,
            events,
            space: Some(space),
            family: Some(family),
        })
    }

    fn check_shape(elements: &[String], events: &[Vec<FamilyEvent>]) -> Result<()> {
        if elements.len() > MAX_ELEMENTS {
            return Err(Error::InvalidInput(format!(
                "ground set of {} elements is too large",
                elements.len()
            )));
        }
        if events.len() != elements.len() {
            return Err(Error::InvalidInput("need one event bundle per element".into()));
        }
        let distinct: BTreeSet<&String> = elements.iter().collect();
        if distinct.len() != elements.len() {
            return Err(Error::InvalidInput("duplicate element name".into()));
        }
        Ok(())
    }

    /// Vertices of `h` coloured independently and uniformly with two colors;
    /// `S ∈ A` iff no edge inside `S` is monochromatic; `B(v)` holds one
    /// "edge H is monochromatic" event per edge `H ∋ v`.
    pub fn hypergraph_two_coloring(h: &Hypergraph) -> Result<Self> {
        let n = h.vertex_count;
        let elements: Vec<String> = (1..=n).map(|v| v.to_string()).collect();
        let space = ProductSpace::new(
            (1..=n)
                .map(|v| Variable::uniform(format!("c{v}"), ["0", "1"]))
                .collect(),
        )?;
        let masks: Arc<Vec<Subset>> = Arc::new(h.edges.iter().map(|e| e.iter().map(|&v| 1u64 << v).sum()).collect());
        let edge_lists: Arc<Vec<Vec<usize>>> = Arc::new(h.edges.clone());
        let family: MembershipFn = {
            let masks = masks.clone();
            let edge_lists = edge_lists.clone();
            Arc::new(move |o: &[usize], s: Subset| {
                !masks
                    .iter()
                    .zip(edge_lists.iter())
                    .any(|(&m, e)| m & !s == 0 && monochromatic(o, e))
            })
        };
        let mut events = vec![Vec::new(); n];
        for (hi, e) in h.edges.iter().enumerate() {
            for &v in e {
                let edge = e.clone();
                events[v].push(FamilyEvent::with_predicate(format!("H{}", hi + 1), move |o| {
                    monochromatic(o, &edge)
                }));
            }
        }
        Self::exact(elements, space, family, events)
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn events(&self, i: usize) -> &[FamilyEvent] {
        &self.events[i]
    }

    pub fn space(&self) -> Option<&ProductSpace> {
        self.space.as_ref()
    }

    pub fn full_set(&self) -> Subset {
        full_set(self.elements.len())
    }

    pub fn subset_from_names<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<Subset> {
        let mut s = 0;
        for name in names {
            let i = self
                .elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| Error::UnknownVertex(name.to_string()))?;
            s |= 1 << i;
        }
        Ok(s)
    }

    pub fn subset_label(&self, s: Subset) -> String {
        let names: Vec<&str> = elements_of(s).map(|i| self.elements[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    fn exact_parts(&self) -> Result<(&ProductSpace, &MembershipFn)> {
        match (&self.space, &self.family) {
            (Some(s), Some(f)) => Ok((s, f)),
            _ => Err(Error::MissingModel),
        }
    }

    /// The family realised at `outcome` (`|I| ≤ 20`).
    pub fn family_at(&self, outcome: &[usize]) -> Result<ExplicitFamily> {
        let (_, fam) = self.exact_parts()?;
        let n = self.elements.len();
        if n > MAX_FREE_ELEMENTS {
            return Err(Error::EnumerationCap {
                outcomes: 1u128 << n,
                cap: 1 << MAX_FREE_ELEMENTS,
            });
        }
        let members: BTreeSet<Subset> = (0..1u64 << n).filter(|&s| fam(outcome, s)).collect();
        if !is_downward_closed(&members) {
            return Err(Error::NotDownwardClosed);
        }
        Ok(ExplicitFamily { n, members })
    }
}

fn monochromatic(o: &[usize], edge: &[usize]) -> bool {
    edge.iter().all(|&v| o[v] == o[edge[0]])
}

/// `τ(i) ≥ 1` per element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauAssignment(pub Vec<f64>);

impl TauAssignment {
    pub fn constant(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::WeightArity {
                expected: n,
                got: self.0.len(),
            });
        }
        for (i, &t) in self.0.iter().enumerate() {
            if !(t >= 1.0) || !t.is_finite() {
                return Err(Error::InvalidWeight {
                    arc: format!("element {}", i + 1),
                    value: t,
                });
            }
        }
        Ok(())
    }

    /// `τ(X) = Π_{i ∈ X} τ(i)`.
    pub fn product(&self, x: Subset) -> f64 {
        elements_of(x).map(|i| self.0[i]).product()
    }
}

/// Witness set for one `(i, B)` pair, with an optional bound on
/// `max_Z Pr(B | Z ∈ A)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub set: Subset,
    pub p: Option<f64>,
}

/// Witnesses keyed by `(element, index of the event in B(element))`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WitnessMap(BTreeMap<(usize, usize), Witness>);

impl WitnessMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Errors when `i ∉ X` or the bound is not a probability.
    pub fn insert(&mut self, i: usize, event: usize, w: Witness) -> Result<()> {
        if w.set >> i & 1 == 0 {
            return Err(Error::InvalidInput(format!(
                "witness for element {} does not contain it",
                i + 1
            )));
        }
        if let Some(p) = w.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("bound {p} is outside [0, 1]")));
            }
        }
        self.0.insert((i, event), w);
        Ok(())
    }

    pub fn get(&self, i: usize, event: usize) -> Option<&Witness> {
        self.0.get(&(i, event))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Witness)> {
        self.0.iter()
    }

    /// `X = H ∖ {u}` with `u` the smallest vertex of `H` other than `i`, and
    /// bound `2^{1-|H|}` when `with_bounds`, for the hypergraph instance.
    pub fn hypergraph_standard(h: &Hypergraph, with_bounds: bool) -> Result<Self> {
        let mut w = Self::new();
        let mut next = vec![0usize; h.vertex_count];
        for e in &h.edges {
            if e.len() < 2 {
                return Err(Error::InvalidInput("edges need at least two vertices".into()));
            }
            let mask: Subset = e.iter().map(|&v| 1u64 << v).sum();
            for &v in e {
                let u = *e.iter().find(|&&u| u != v).unwrap();
                let p = 0.5f64.powi(e.len() as i32 - 1);
                w.insert(
                    v,
                    next[v],
                    Witness {
                        set: mask & !(1 << u),
                        p: with_bounds.then_some(p),
                    },
                )?;
                next[v] += 1;
            }
        }
        Ok(w)
    }
}

/// `max_{Z ⊆ I∖X} Pr(B | Z ∈ A) · τ(X)` by enumeration (`|I ∖ X| ≤ max_free`).
pub fn sigma_exact(
    inst: &FamilyInstance,
    i: usize,
    event: usize,
    x: Subset,
    tau: &TauAssignment,
    max_free: usize,
    cfg: &ExactConfig,
) -> Result<f64> {
    Ok(max_conditional(inst, i, event, x, max_free, cfg)? * tau.product(x))
}

/// `max_{Z ⊆ I∖X} Pr(B | Z ∈ A)`, with `Pr(· | null event) = 0`.
pub fn max_conditional(
    inst: &FamilyInstance,
    i: usize,
    event: usize,
    x: Subset,
    max_free: usize,
    cfg: &ExactConfig,
) -> Result<f64> {
    let (space, fam) = inst.exact_parts()?;
    let ev = inst
        .events
        .get(i)
        .and_then(|b| b.get(event))
        .ok_or_else(|| Error::InvalidInput(format!("no event {event} for element {}", i + 1)))?;
    let holds = ev.holds.as_ref().ok_or(Error::MissingModel)?;
    let free = inst.full_set() & !x;
    if popcount(free) > max_free {
        return Err(Error::EnumerationCap {
            outcomes: 1u128 << popcount(free),
            cap: 1u64 << max_free,
        });
    }
    let zs = submasks(free);
    let parts = fold_outcomes(
        space,
        cfg,
        || vec![(KahanSum::default(), KahanSum::default()); zs.len()],
        |acc, o, p| {
            if p <= 0.0 {
                return;
            }
            let b = holds(o);
            for (slot, &z) in acc.iter_mut().zip(&zs) {
                if fam(o, z) {
                    slot.0.add(p);
                    if b {
                        slot.1.add(p);
                    }
                }
            }
        },
    )?;
    let mut totals = vec![(KahanSum::default(), KahanSum::default()); zs.len()];
    for part in &parts {
        for (t, s) in totals.iter_mut().zip(part) {
            t.0.merge(&s.0);
            t.1.merge(&s.1);
        }
    }
    Ok(totals
        .iter()
        .map(|(pz, pbz)| ratio_or_zero(pbz.value(), pz.value()))
        .fold(0.0, f64::max))
}

/// `σ(B, X)`: `p·τ(X)` when the witness carries a bound `p`, exact otherwise.
pub fn sigma_of_witness(
    inst: &FamilyInstance,
    i: usize,
    event: usize,
    w: &Witness,
    tau: &TauAssignment,
    cfg: &ExactConfig,
) -> Result<f64> {
    match w.p {
        Some(p) => Ok(p * tau.product(w.set)),
        None => sigma_exact(inst, i, event, w.set, tau, MAX_FREE_ELEMENTS, cfg),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementReport {
    pub element: String,
    pub tau: f64,
    pub sigmas: Vec<f64>,
    /// `τ(i) - 1 - Σ_B σ(B, X(i, B))`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub elements: Vec<ElementReport>,
    pub feasible: bool,
    /// `1/τ(I)`, a lower bound on `Pr(I ∈ A)` when feasible.
    pub bound: f64,
    pub tolerance: f64,
}

/// Checks `τ(i) ≥ 1 + Σ_{B ∈ B(i)} σ(B, X(i, B))` for every element.
pub fn check_family_condition(
    inst: &FamilyInstance,
    tau: &TauAssignment,
    witnesses: &WitnessMap,
    tol: f64,
    cfg: &ExactConfig,
) -> Result<FamilyReport> {
    let n = inst.element_count();
    tau.validate(n)?;
    for (&(i, b), _) in witnesses.iter() {
        if i >= n || b >= inst.events[i].len() {
            return Err(Error::InvalidInput(format!(
                "witness for an unknown event ({}, {})",
                i + 1,
                b + 1
            )));
        }
    }
    let mut elements = Vec::with_capacity(n);
    for i in 0..n {
        let mut sigmas = Vec::with_capacity(inst.events[i].len());
        for (b, ev) in inst.events[i].iter().enumerate() {
            let w = witnesses.get(i, b).ok_or_else(|| Error::MissingWitness {
                element: inst.elements[i].clone(),
                event: ev.name.clone(),
            })?;
            sigmas.push(sigma_of_witness(inst, i, b, w, tau, cfg)?);
        }
        let margin = tau.0[i] - 1.0 - sigmas.iter().sum::<f64>();
        elements.push(ElementReport {
            element: inst.elements[i].clone(),
            tau: tau.0[i],
            sigmas,
            margin,
        });
    }
    Ok(FamilyReport {
        feasible: elements.iter().all(|e| e.margin >= -tol),
        elements,
        bound: 1.0 / tau.product(inst.full_set()),
        tolerance: tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyValidation {
    pub valid: bool,
    pub outcomes_checked: u64,
    pub problem: Option<String>,
}

/// Checks on every positive-probability outcome that `A` is nonempty and
/// downward-closed and that `i ∈ ∂A` forces some event of `B(i)`.
pub fn validate_family(inst: &FamilyInstance, cfg: &ExactConfig) -> Result<FamilyValidation> {
    let (space, _) = inst.exact_parts()?;
    if inst.events.iter().flatten().any(|e| e.holds.is_none()) {
        return Err(Error::MissingModel);
    }
    let parts = fold_outcomes(
        space,
        cfg,
        || (0u64, None::<String>),
        |acc, o, p| {
            if p <= 0.0 || acc.1.is_some() {
                return;
            }
            acc.0 += 1;
            acc.1 = inst.outcome_problem(o);
        },
    )?;
    let mut checked = 0;
    for (c, problem) in parts {
        checked += c;
        if let Some(problem) = problem {
            return Ok(FamilyValidation {
                valid: false,
                outcomes_checked: checked,
                problem: Some(problem),
            });
        }
    }
    Ok(FamilyValidation {
        valid: true,
        outcomes_checked: checked,
        problem: None,
    })
}

impl FamilyInstance {
    fn outcome_problem(&self, o: &[usize]) -> Option<String> {
        let describe = || format!("{:?}", self.space.as_ref().unwrap().describe(o));
        let fam = match self.family_at(o) {
            Ok(f) => f,
            Err(Error::NotDownwardClosed) => return Some(format!("family not downward-closed at {}", describe())),
            Err(e) => return Some(e.to_string()),
        };
        if !fam.contains(0) {
            return Some(format!("family empty at {}", describe()));
        }
        let b = fam.boundary();
        for i in elements_of(b) {
            let covered = self.events[i].iter().any(|e| (e.holds.as_ref().unwrap())(o));
            if !covered {
                return Some(format!(
                    "element {} on the boundary with no event holding at {}",
                    self.elements[i],
                    describe()
                ));
            }
        }
        None
    }
}

/// The hypercube digraph on `2^I` with arcs `S ∪ {i} -> S`, one edge per
/// event in `B(i)`, and weights `τ(i)`.
pub struct HypercubeReduction {
    pub digraph: MultiDigraph,
    pub model: Arc<dyn CutModel>,
    pub weights: ArcWeights,
    /// Subset of each vertex.
    pub subsets: Vec<Subset>,
    space: ProductSpace,
}

struct HypercubeModel {
    digraph: MultiDigraph,
    n: usize,
    family: MembershipFn,
    /// `(element, event)` per edge.
    edge_events: Vec<(usize, usize)>,
    events: Vec<Vec<EventFn>>,
}

impl CutModel for HypercubeModel {
    fn digraph(&self) -> &MultiDigraph {
        &self.digraph
    }

    fn sample(&self, outcome: &[usize]) -> CutSample {
        let a = (0..1u64 << self.n).map(|s| (self.family)(outcome, s)).collect();
        let f = self
            .edge_events
            .iter()
            .map(|&(i, b)| (self.events[i][b])(outcome))
            .collect();
        CutSample { a, f }
    }
}

/// Builds the hypercube LCL instance for `|I| ≤ 4`.
pub fn hypercube_digraph(inst: &FamilyInstance, tau: &TauAssignment) -> Result<HypercubeReduction> {
    let n = inst.element_count();
    if n > MAX_HYPERCUBE_ELEMENTS {
        return Err(Error::Precondition(format!(
            "hypercube reduction needs at most {MAX_HYPERCUBE_ELEMENTS} elements, got {n}"
        )));
    }
    tau.validate(n)?;
    let (space, fam) = inst.exact_parts()?;
    let events: Vec<Vec<EventFn>> = inst
        .events
        .iter()
        .map(|b| b.iter().map(|e| e.holds.clone().ok_or(Error::MissingModel)).collect())
        .collect::<Result<_>>()?;
    let subsets: Vec<Subset> = (0..1u64 << n).collect();
    let vertices: Vec<String> = subsets.iter().map(|&s| inst.subset_label(s)).collect();
    let mut edges = Vec::new();
    let mut edge_events = Vec::new();
    for &s in &subsets {
        for i in 0..n {
            if s >> i & 1 == 1 {
                continue;
            }
            for (b, ev) in inst.events[i].iter().enumerate() {
                edges.push(Edge {
                    id: format!("e({},{},{})", inst.elements[i], vertices[s as usize], ev.name),
                    tail: (s | 1 << i) as usize,
                    head: s as usize,
                });
                edge_events.push((i, b));
            }
        }
    }
    let digraph = MultiDigraph::from_indexed(vertices, edges)?;
    // Arcs exist only where some event is attached; their weight is τ(i) for
    // the element i removed along the arc.
    let ds = digraph.simple();
    let weights = ArcWeights(
        ds.arcs()
            .iter()
            .map(|&(x, y)| tau.0[(x ^ y).trailing_zeros() as usize])
            .collect(),
    );
    let model = Arc::new(HypercubeModel {
        digraph: digraph.clone(),
        n,
        family: fam.clone(),
        edge_events,
        events,
    });
    Ok(HypercubeReduction {
        digraph,
        model,
        weights,
        subsets,
        space: space.clone(),
    })
}

impl HypercubeReduction {
    /// The LCL instance with its exact risk table.
    pub fn lcl_instance(&self, cfg: &ExactConfig) -> Result<LclInstance> {
        LclInstance::from_model(self.space.clone(), self.model.clone(), cfg)
    }

    pub fn vertex_of(&self, s: Subset) -> usize {
        s as usize
    }
}

/// Bound-mode data: per element, the `(X, p)` pairs of its events.
#[derive(Clone, Debug, PartialEq)]
pub struct TauSystem {
    pub terms: Vec<Vec<(Subset, f64)>>,
}

impl TauSystem {
    /// Collects the bound-mode witnesses of every event.
    pub fn from_witnesses(inst: &FamilyInstance, witnesses: &WitnessMap) -> Result<Self> {
        let mut terms = Vec::with_capacity(inst.element_count());
        for i in 0..inst.element_count() {
            let mut row = Vec::new();
            for (b, ev) in inst.events[i].iter().enumerate() {
                let w = witnesses.get(i, b).ok_or_else(|| Error::MissingWitness {
                    element: inst.elements[i].clone(),
                    event: ev.name.clone(),
                })?;
                let p = w.p.ok_or_else(|| {
                    Error::Precondition(format!("witness for ({}, {}) has no bound", inst.elements[i], ev.name))
                })?;
                row.push((w.set, p));
            }
            terms.push(row);
        }
        Ok(Self { terms })
    }

    /// `τ ↦ 1 + Σ_B p(B)·τ(X(B))`.
    pub fn apply(&self, tau: &TauAssignment) -> TauAssignment {
        TauAssignment(
            self.terms
                .iter()
                .map(|row| 1.0 + row.iter().map(|&(x, p)| p * tau.product(x)).sum::<f64>())
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TauVerdict {
    Converged { tau: Vec<f64>, iterations: u64 },
    Diverged { iterations: u64, max_tau: f64 },
    Indeterminate { iterations: u64, last_step: f64 },
}

/// Least `τ ≥ 1` with `τ ≥ 1 + Σ_B p(B)·τ(X)`, by monotone iteration from `τ ≡ 1`.
pub fn least_tau_solution(sys: &TauSystem, tol: f64, iter_cap: u64, value_cap: f64) -> TauVerdict {
    let mut tau = TauAssignment::constant(sys.terms.len(), 1.0);
    let mut iterations = 0;
    loop {
        let next = sys.apply(&tau);
        iterations += 1;
        let max_tau = next.0.iter().copied().fold(1.0, f64::max);
        if !(max_tau <= value_cap) {
            return TauVerdict::Diverged { iterations, max_tau };
        }
        let step = tau
            .0
            .iter()
            .zip(&next.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        tau = next;
        if step < tol {
            return TauVerdict::Converged {
                tau: tau.0,
                iterations,
            };
        }
        if iterations >= iter_cap {
            return TauVerdict::Indeterminate {
                iterations,
                last_step: step,
            };
        }
    }
}

/// Serialized bound-mode instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub ground: Vec<String>,
    #[serde(default)]
    pub tau: Option<Vec<f64>>,
    pub events: Vec<FamilyEventSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyEventSpec {
    pub element: String,
    pub name: String,
    pub witness: Vec<String>,
    pub p: f64,
}

impl FamilySpec {
    /// Bound-mode instance and witnesses.
    pub fn build(&self) -> Result<(FamilyInstance, WitnessMap)> {
        let mut events: Vec<Vec<FamilyEvent>> = vec![Vec::new(); self.ground.len()];
        let probe = FamilyInstance::bound_only(self.ground.clone(), events.clone())?;
        let mut witnesses = WitnessMap::new();
        for ev in &self.events {
            let i = probe.subset_from_names([ev.element.as_str()])?.trailing_zeros() as usize;
            let set = probe.subset_from_names(ev.witness.iter().map(String::as_str))?;
            witnesses.insert(i, events[i].len(), Witness { set, p: Some(ev.p) })?;
            events[i].push(FamilyEvent::named(ev.name.clone()));
        }
        Ok((FamilyInstance::bound_only(self.ground.clone(), events)?, witnesses))
    }
}
