//! Finite product probability spaces, exact enumeration, Monte-Carlo
//! estimation, random cut models and exact risk tables.
//!
//! An outcome ([`SamplePoint`]) is a vector holding, for each variable, the
//! index of its chosen value. Events are predicates on outcomes.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::digraph::{is_out_closed, reachability_matrix, uncut_arc, MultiDigraph};
use crate::error::{Error, Result};
use crate::exec::{map_chunks, Execution};

/// Value indices, one per variable of a [`ProductSpace`].
pub type SamplePoint = Vec<usize>;

/// Default limit on the number of outcomes an exact computation may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;
/// Outcome limit for exact rational arithmetic.
pub const RATIONAL_ENUMERATION_CAP: u64 = 1 << 16;

const CHUNK: u64 = 4096;
const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// One independent finite variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
    pub weights: Vec<f64>,
}

impl Variable {
    pub fn uniform(name: impl Into<String>, values: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        let w = 1.0 / values.len() as f64;
        Self {
            name: name.into(),
            weights: vec![w; values.len()],
            values,
        }
    }
}

/// Serialized space: `{"variables":[{"name":"a1","values":["a","b"],"weights":[0.5,0.5]}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub variables: Vec<Variable>,
}

/// A finite product of independent variables.
#[derive(Clone, Debug)]
pub struct ProductSpace {
    variables: Vec<Variable>,
    lookup: HashMap<String, usize>,
    samplers: Vec<WeightedIndex<f64>>,
}

impl ProductSpace {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        let mut lookup = HashMap::new();
        let mut samplers = Vec::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if lookup.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateId(v.name.clone()));
            }
            if v.values.is_empty() {
                return Err(Error::InvalidSpace(format!("variable `{}` has no values", v.name)));
            }
            if v.values.len() != v.weights.len() {
                return Err(Error::InvalidSpace(format!(
                    "variable `{}` has {} values but {} weights",
                    v.name,
                    v.values.len(),
                    v.weights.len()
                )));
            }
            if v.weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
                return Err(Error::InvalidSpace(format!(
                    "variable `{}` has a negative or non-finite weight",
                    v.name
                )));
            }
            let total: f64 = v.weights.iter().sum();
            if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::InvalidSpace(format!(
                    "weights of `{}` sum to {total}, not 1",
                    v.name
                )));
            }
            samplers.push(
                WeightedIndex::new(&v.weights)
                    .map_err(|e| Error::InvalidSpace(format!("variable `{}`: {e}", v.name)))?,
            );
        }
        Ok(Self {
            variables,
            lookup,
            samplers,
        })
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        Self::new(spec.variables.clone())
    }

    pub fn to_spec(&self) -> SpaceSpec {
        SpaceSpec {
            variables: self.variables.clone(),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown variable `{name}`")))
    }

    /// Number of outcomes (product of domain sizes).
    pub fn outcome_count(&self) -> u128 {
        self.variables
            .iter()
            .map(|v| v.values.len() as u128)
            .try_fold(1u128, |acc, n| acc.checked_mul(n))
            .unwrap_or(u128::MAX)
    }

    /// Decodes an outcome from its mixed-radix index (first variable fastest).
    pub fn outcome(&self, mut index: u64) -> SamplePoint {
        self.variables
            .iter()
            .map(|v| {
                let n = v.values.len() as u64;
                let value = (index % n) as usize;
                index /= n;
                value
            })
            .collect()
    }

    pub fn probability(&self, outcome: &[usize]) -> f64 {
        self.variables
            .iter()
            .zip(outcome)
            .map(|(v, &x)| v.weights[x])
            .product()
    }

    pub fn probability_rational(&self, outcome: &[usize]) -> BigRational {
        self.variables
            .iter()
            .zip(outcome)
            .map(|(v, &x)| BigRational::from_f64(v.weights[x]).expect("finite weight"))
            .fold(BigRational::one(), |acc, w| acc * w)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SamplePoint {
        self.samplers.iter().map(|s| s.sample(rng)).collect()
    }

    /// Human-readable view of an outcome: variable name to value.
    pub fn describe(&self, outcome: &[usize]) -> BTreeMap<String, String> {
        self.variables
            .iter()
            .zip(outcome)
            .map(|(v, &x)| (v.name.clone(), v.values[x].clone()))
            .collect()
    }

    fn checked_count(&self, cap: u64) -> Result<u64> {
        let n = self.outcome_count();
        if n > cap as u128 {
            Err(Error::EnumerationCap { outcomes: n, cap })
        } else {
            Ok(n as u64)
        }
    }
}

/// Settings for exhaustive enumeration.
#[derive(Clone, Copy, Debug)]
pub struct ExactConfig {
    pub cap: u64,
    pub exec: Execution,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            exec: Execution::default(),
        }
    }
}

impl ExactConfig {
    pub fn sequential() -> Self {
        Self {
            exec: Execution::Sequential,
            ..Self::default()
        }
    }
}

/// Compensated (Kahan) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(-other.carry);
    }
}

/// Runs `step(acc, outcome, probability)` over every outcome, one accumulator
/// per chunk, and returns the accumulators in enumeration order.
pub fn fold_outcomes<T, I, S>(space: &ProductSpace, cfg: &ExactConfig, init: I, step: S) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    S: Fn(&mut T, &[usize], f64) + Sync + Send,
{
    let n = space.checked_count(cfg.cap)?;
    let radices: Vec<usize> = space.variables.iter().map(|v| v.values.len()).collect();
    Ok(map_chunks(cfg.exec, n, CHUNK, |range| {
        let mut acc = init();
        let mut outcome = space.outcome(range.start);
        for _ in range {
            let p = space.probability(&outcome);
            step(&mut acc, &outcome, p);
            for (slot, &radix) in outcome.iter_mut().zip(&radices) {
                *slot += 1;
                if *slot < radix {
                    break;
                }
                *slot = 0;
            }
        }
        acc
    }))
}

/// `Pr(event)` by exhaustive enumeration.
pub fn exact_prob<P>(space: &ProductSpace, event: P, cfg: &ExactConfig) -> Result<f64>
where
    P: Fn(&[usize]) -> bool + Sync + Send,
{
    let parts = fold_outcomes(space, cfg, KahanSum::default, |acc, o, p| {
        if event(o) {
            acc.add(p);
        }
    })?;
    let mut total = KahanSum::default();
    parts.iter().for_each(|s| total.merge(s));
    Ok(total.value().clamp(0.0, 1.0))
}

/// `Pr(event)` as an exact rational, treating each weight as the exact
/// binary fraction it is stored as. Limited to [`RATIONAL_ENUMERATION_CAP`] outcomes.
pub fn exact_prob_rational<P>(space: &ProductSpace, event: P) -> Result<BigRational>
where
    P: Fn(&[usize]) -> bool,
{
    let n = space.checked_count(RATIONAL_ENUMERATION_CAP)?;
    let mut total = BigRational::zero();
    for i in 0..n {
        let o = space.outcome(i);
        if event(&o) {
            total += space.probability_rational(&o);
        }
    }
    Ok(total)
}

/// `Pr(p | q)`, defined as 0 when `Pr(q) = 0`.
pub fn cond_prob<P, Q>(space: &ProductSpace, p: P, q: Q, cfg: &ExactConfig) -> Result<f64>
where
    P: Fn(&[usize]) -> bool + Sync + Send,
    Q: Fn(&[usize]) -> bool + Sync + Send,
{
    let parts = fold_outcomes(
        space,
        cfg,
        || (KahanSum::default(), KahanSum::default()),
        |(joint, cond), o, w| {
            if q(o) {
                cond.add(w);
                if p(o) {
                    joint.add(w);
                }
            }
        },
    )?;
    let (mut joint, mut cond) = (KahanSum::default(), KahanSum::default());
    for (j, c) in &parts {
        joint.merge(j);
        cond.merge(c);
    }
    Ok(ratio_or_zero(joint.value(), cond.value()))
}

/// Rational `Pr(p | q)` with the same zero convention.
pub fn cond_prob_rational<P, Q>(space: &ProductSpace, p: P, q: Q) -> Result<BigRational>
where
    P: Fn(&[usize]) -> bool,
    Q: Fn(&[usize]) -> bool,
{
    let joint = exact_prob_rational(space, |o| q(o) && p(o))?;
    let cond = exact_prob_rational(space, &q)?;
    if cond.is_zero() {
        Ok(BigRational::zero())
    } else {
        Ok(joint / cond)
    }
}

pub(crate) fn ratio_or_zero(joint: f64, cond: f64) -> f64 {
    if cond > 0.0 {
        (joint / cond).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Result of a Monte-Carlo conditional-probability estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    /// Half-width of a 95% normal-approximation interval.
    pub half_width: f64,
    pub trials: u64,
    /// Trials in which the conditioning event held.
    pub conditioned_trials: u64,
    /// Set when the conditioning event never held; `estimate` is then 0.
    pub unconditioned: bool,
}

const MC_CHUNK: u64 = 1024;

/// Estimates `Pr(p | q)` from `trials` independent samples.
///
/// Trials are grouped in fixed blocks of 1024, each with its own ChaCha8
/// stream derived from `(seed, block index)`, so the result depends only on
/// the seed and not on how blocks are scheduled.
pub fn estimate_cond_prob<P, Q>(
    space: &ProductSpace,
    p: P,
    q: Q,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<Estimate>
where
    P: Fn(&[usize]) -> bool + Sync + Send,
    Q: Fn(&[usize]) -> bool + Sync + Send,
{
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let counts = map_chunks(exec, trials, MC_CHUNK, |range| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(range.start / MC_CHUNK);
        let (mut hits_q, mut hits_pq) = (0u64, 0u64);
        for _ in range {
            let o = space.sample(&mut rng);
            if q(&o) {
                hits_q += 1;
                if p(&o) {
                    hits_pq += 1;
                }
            }
        }
        (hits_q, hits_pq)
    });
    let (hits_q, hits_pq) = counts
        .iter()
        .fold((0, 0), |(a, b), (c, d)| (a + c, b + d));
    if hits_q == 0 {
        return Ok(Estimate {
            estimate: 0.0,
            half_width: 0.0,
            trials,
            conditioned_trials: 0,
            unconditioned: true,
        });
    }
    let est = hits_pq as f64 / hits_q as f64;
    Ok(Estimate {
        estimate: est,
        half_width: 1.96 * (est * (1.0 - est) / hits_q as f64).sqrt(),
        trials,
        conditioned_trials: hits_q,
        unconditioned: false,
    })
}

/// The random pair `(A, F)` realised at one outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutSample {
    /// Vertex mask of `A`.
    pub a: Vec<bool>,
    /// Edge mask of `F`.
    pub f: Vec<bool>,
}

/// A random out-closed set `A` and random cut `F` on a fixed digraph.
pub trait CutModel: Send + Sync {
    fn digraph(&self) -> &MultiDigraph;
    fn sample(&self, outcome: &[usize]) -> CutSample;
}

/// A [`CutModel`] backed by a closure.
pub struct FnCutModel<F> {
    digraph: MultiDigraph,
    f: F,
}

impl<F> FnCutModel<F>
where
    F: Fn(&[usize]) -> CutSample + Send + Sync,
{
    pub fn new(digraph: MultiDigraph, f: F) -> Self {
        Self { digraph, f }
    }
}

impl<F> CutModel for FnCutModel<F>
where
    F: Fn(&[usize]) -> CutSample + Send + Sync,
{
    fn digraph(&self) -> &MultiDigraph {
        &self.digraph
    }

    fn sample(&self, outcome: &[usize]) -> CutSample {
        (self.f)(outcome)
    }
}

impl<M: CutModel + ?Sized> CutModel for Arc<M> {
    fn digraph(&self) -> &MultiDigraph {
        (**self).digraph()
    }

    fn sample(&self, outcome: &[usize]) -> CutSample {
        (**self).sample(outcome)
    }
}

/// Why an outcome breaks the cut-model requirements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CutViolation {
    /// `A` is not out-closed; the arc leaves `A`.
    NotOutClosed { tail: String, head: String },
    /// `F` misses every parallel edge of a boundary arc.
    UncutArc { tail: String, head: String },
    /// The sampled masks have the wrong length.
    BadShape,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutCounterexample {
    pub outcome: SamplePoint,
    pub violation: CutViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutValidation {
    pub valid: bool,
    pub outcomes_checked: u64,
    pub counterexample: Option<CutCounterexample>,
}

fn classify(d: &MultiDigraph, s: &CutSample) -> Option<CutViolation> {
    let ds = d.simple();
    if s.a.len() != d.vertex_count() || s.f.len() != d.edge_count() {
        return Some(CutViolation::BadShape);
    }
    if !is_out_closed(ds, &s.a) {
        let (x, y) = ds
            .arcs()
            .iter()
            .copied()
            .find(|&(x, y)| s.a[x] && !s.a[y])
            .expect("escaping arc");
        return Some(CutViolation::NotOutClosed {
            tail: d.vertices()[x].clone(),
            head: d.vertices()[y].clone(),
        });
    }
    uncut_arc(d, &s.a, &s.f).map(|arc| {
        let (x, y) = ds.arc(arc);
        CutViolation::UncutArc {
            tail: d.vertices()[x].clone(),
            head: d.vertices()[y].clone(),
        }
    })
}

/// Checks that every positive-probability outcome yields an out-closed `A`
/// and an `A`-cut `F`. Returns the first violating outcome in enumeration order.
pub fn validate_cut_model<M: CutModel + ?Sized>(
    space: &ProductSpace,
    model: &M,
    cfg: &ExactConfig,
) -> Result<CutValidation> {
    let d = model.digraph();
    let parts = fold_outcomes(
        space,
        cfg,
        || (0u64, None::<CutCounterexample>),
        |(count, found), o, p| {
            if p <= 0.0 || found.is_some() {
                return;
            }
            *count += 1;
            if let Some(violation) = classify(d, &model.sample(o)) {
                *found = Some(CutCounterexample {
                    outcome: o.to_vec(),
                    violation,
                });
            }
        },
    )?;
    let outcomes_checked = parts.iter().map(|(c, _)| c).sum();
    let counterexample = parts.into_iter().find_map(|(_, f)| f);
    Ok(CutValidation {
        valid: counterexample.is_none(),
        outcomes_checked,
        counterexample,
    })
}

/// Conditional probabilities `p(e, z) = Pr(e ∈ F | z ∈ A)` for every edge `e`
/// and every `z` reachable from the head of `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskTable {
    /// Per edge: `(z, p)` pairs sorted by `z`.
    entries: Vec<Vec<(usize, f64)>>,
}

/// Serialized risk table: `{"risks":[{"edge":"e1","z":"v3","p":0.25}]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub risks: Vec<RiskEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEntry {
    pub edge: String,
    pub z: String,
    pub p: f64,
}

impl RiskTable {
    /// Builds a table by evaluating `value(edge, z)` on the exact domain.
    pub fn from_fn(d: &MultiDigraph, mut value: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let reach = reachability_matrix(d.simple());
        let mut entries = Vec::with_capacity(d.edge_count());
        for (e, edge) in d.edges().iter().enumerate() {
            let mut row = Vec::new();
            for (z, &r) in reach[edge.head].iter().enumerate() {
                if r {
                    let p = value(e, z);
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidInput(format!(
                            "risk p({}, {}) = {p} is outside [0, 1]",
                            edge.id,
                            d.vertices()[z]
                        )));
                    }
                    row.push((z, p));
                }
            }
            entries.push(row);
        }
        Ok(Self { entries })
    }

    /// Reads a serialized table. Reachable pairs the file does not mention get
    /// `missing` (1.0 is always a sound choice); entries outside the domain
    /// are rejected.
    pub fn from_spec(d: &MultiDigraph, spec: &RiskSpec, missing: f64) -> Result<Self> {
        let reach = reachability_matrix(d.simple());
        let mut given: HashMap<(usize, usize), f64> = HashMap::new();
        for r in &spec.risks {
            let e = d.edge_index(&r.edge)?;
            let z = d.vertex_index(&r.z)?;
            if !reach[d.edge(e).head][z] {
                return Err(Error::InvalidInput(format!(
                    "risk entry ({}, {}) is not a reachable pair",
                    r.edge, r.z
                )));
            }
            if given.insert((e, z), r.p).is_some() {
                return Err(Error::InvalidInput(format!(
                    "risk entry ({}, {}) given twice",
                    r.edge, r.z
                )));
            }
        }
        Self::from_fn(d, |e, z| given.get(&(e, z)).copied().unwrap_or(missing))
    }

    pub fn to_spec(&self, d: &MultiDigraph) -> RiskSpec {
        let mut risks = Vec::new();
        for (e, row) in self.entries.iter().enumerate() {
            for &(z, p) in row {
                risks.push(RiskEntry {
                    edge: d.edge(e).id.clone(),
                    z: d.vertices()[z].clone(),
                    p,
                });
            }
        }
        RiskSpec { risks }
    }

    pub fn get(&self, e: usize, z: usize) -> Option<f64> {
        let row = self.entries.get(e)?;
        row.binary_search_by_key(&z, |&(v, _)| v).ok().map(|i| row[i].1)
    }

    /// `(z, p)` pairs of edge `e`.
    pub fn row(&self, e: usize) -> &[(usize, f64)] {
        &self.entries[e]
    }

    pub fn edge_count(&self) -> usize {
        self.entries.len()
    }

    /// True iff the table is defined exactly on the reachable pairs of `d`
    /// with values in `[0, 1]`.
    pub fn matches(&self, d: &MultiDigraph) -> bool {
        if self.entries.len() != d.edge_count() {
            return false;
        }
        let reach = reachability_matrix(d.simple());
        self.entries.iter().enumerate().all(|(e, row)| {
            let dom: Vec<usize> = (0..d.vertex_count())
                .filter(|&z| reach[d.edge(e).head][z])
                .collect();
            row.len() == dom.len()
                && row
                    .iter()
                    .zip(&dom)
                    .all(|(&(z, p), &want)| z == want && (0.0..=1.0).contains(&p))
        })
    }
}

/// `Pr(v ∈ A)` for every vertex.
pub fn vertex_probabilities<M: CutModel + ?Sized>(
    space: &ProductSpace,
    model: &M,
    cfg: &ExactConfig,
) -> Result<Vec<f64>> {
    let n = model.digraph().vertex_count();
    let parts = fold_outcomes(
        space,
        cfg,
        || vec![KahanSum::default(); n],
        |acc, o, p| {
            if p <= 0.0 {
                return;
            }
            let s = model.sample(o);
            for (v, slot) in acc.iter_mut().enumerate() {
                if s.a[v] {
                    slot.add(p);
                }
            }
        },
    )?;
    let mut total = vec![KahanSum::default(); n];
    for part in &parts {
        for (t, s) in total.iter_mut().zip(part) {
            t.merge(s);
        }
    }
    Ok(total.iter().map(|s| s.value().clamp(0.0, 1.0)).collect())
}

/// Exact risk table of a cut model, in a single enumeration pass.
///
/// The model is assumed valid (see [`validate_cut_model`]).
pub fn risk_table_exact<M: CutModel + ?Sized>(
    space: &ProductSpace,
    model: &M,
    cfg: &ExactConfig,
) -> Result<RiskTable> {
    let d = model.digraph();
    let reach = reachability_matrix(d.simple());
    let domains: Vec<Vec<usize>> = d
        .edges()
        .iter()
        .map(|e| (0..d.vertex_count()).filter(|&z| reach[e.head][z]).collect())
        .collect();
    let n = d.vertex_count();

    let parts = fold_outcomes(
        space,
        cfg,
        || {
            (
                vec![KahanSum::default(); n],
                domains
                    .iter()
                    .map(|dom| vec![KahanSum::default(); dom.len()])
                    .collect::<Vec<_>>(),
            )
        },
        |(in_a, joint), o, p| {
            if p <= 0.0 {
                return;
            }
            let s = model.sample(o);
            for (v, slot) in in_a.iter_mut().enumerate() {
                if s.a[v] {
                    slot.add(p);
                }
            }
            for (e, dom) in domains.iter().enumerate() {
                if !s.f[e] {
                    continue;
                }
                for (k, &z) in dom.iter().enumerate() {
                    if s.a[z] {
                        joint[e][k].add(p);
                    }
                }
            }
        },
    )?;

    let mut in_a = vec![KahanSum::default(); n];
    let mut joint: Vec<Vec<KahanSum>> = domains.iter().map(|d| vec![KahanSum::default(); d.len()]).collect();
    for (pa, pj) in &parts {
        for (t, s) in in_a.iter_mut().zip(pa) {
            t.merge(s);
        }
        for (trow, srow) in joint.iter_mut().zip(pj) {
            for (t, s) in trow.iter_mut().zip(srow) {
                t.merge(s);
            }
        }
    }
    let entries = domains
        .iter()
        .enumerate()
        .map(|(e, dom)| {
            dom.iter()
                .enumerate()
                .map(|(k, &z)| (z, ratio_or_zero(joint[e][k].value(), in_a[z].value())))
                .collect()
        })
        .collect();
    Ok(RiskTable { entries })
}

/// Converts a rational to the nearest `f64` (for reporting).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n: &BigInt = r.numer();
        let d: &BigInt = r.denom();
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}
