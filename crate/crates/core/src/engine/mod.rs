//! The cut-lemma core: edge risks, the monotone weight operator, condition
//! checking, least-fixed-point weights and the probability bounds that a
//! feasible weight assignment certifies.

mod nonrep;

pub use nonrep::{NonrepInstance, NonrepModel};

use std::sync::Arc;

use serde::Serialize;

use crate::digraph::{min_product_from, reachability_matrix, ArcWeights, MultiDigraph, SimpleDigraph};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::probability::{
    risk_table_exact, validate_cut_model, vertex_probabilities, CutModel, ExactConfig, ProductSpace, RiskTable,
};

/// Tolerance used when asserting probability bounds against exact probabilities.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// A product space together with a cut model on the instance's digraph.
#[derive(Clone)]
pub struct ExactModel {
    pub space: ProductSpace,
    pub model: Arc<dyn CutModel>,
}

/// A digraph with risk table `p(e, z)` and, optionally, the exact model the
/// table came from.
#[derive(Clone)]
pub struct LclInstance {
    digraph: MultiDigraph,
    risks: RiskTable,
    reach: Vec<Vec<bool>>,
    exact: Option<ExactModel>,
}

impl std::fmt::Debug for LclInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LclInstance")
            .field("vertices", &self.digraph.vertex_count())
            .field("edges", &self.digraph.edge_count())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Result of checking `ω ≥ f(ω)` on every arc.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightReport {
    pub arcs: Vec<String>,
    pub weights: Vec<f64>,
    /// `ω(xy) - 1 - Σ_{e ∈ E(x,y)} ρ(e)` per arc.
    pub margins: Vec<f64>,
    pub feasible: bool,
    pub tolerance: f64,
    pub iterations: u64,
}

impl WeightReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Parameters of [`LclInstance::least_weight_solution`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Convergence threshold on the sup-norm step.
    pub tol: f64,
    pub iter_cap: u64,
    /// Any weight above this value is taken as divergence.
    pub value_cap: f64,
    /// Tolerance of the feasibility check run on the limit.
    pub report_tol: f64,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            iter_cap: 100_000,
            value_cap: 1e9,
            report_tol: 1e-9,
            exec: Execution::default(),
        }
    }
}

/// Outcome of the Kleene iteration `ω_0 = 0`, `ω_{n+1} = f(ω_n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FixedPointVerdict {
    /// The iteration settled; `report.weights` is the least solution.
    Converged { report: WeightReport, chain_monotone: bool },
    /// Some weight exceeded the value cap: no solution exists for this table.
    Diverged { iterations: u64, max_weight: f64, chain_monotone: bool },
    /// Neither converged nor diverged within the iteration cap.
    Indeterminate { iterations: u64, last_step: f64, chain_monotone: bool },
}

/// A probability-bound query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundQuery {
    /// `Pr(y ∈ A) ≤ Pr(x ∈ A)·ω(xy)` for the arc `(x, y)`.
    Arc(usize, usize),
    /// `Pr(x ∈ A) ≥ Pr(z ∈ A)/ω̄(x, z)` for `z` reachable from `x`.
    Reach(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcBound {
    pub tail: String,
    pub head: String,
    pub pr_head: f64,
    /// `Pr(x ∈ A)·ω(xy)`.
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachBound {
    pub from: String,
    pub to: String,
    /// `Pr(z ∈ A)/ω̄(x, z)`.
    pub lower_bound: f64,
    pub pr_from: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub arc_bounds: Vec<ArcBound>,
    pub reach_bounds: Vec<ReachBound>,
    pub all_pass: bool,
}

impl LclInstance {
    /// Pairs a digraph with a risk table defined exactly on its reachable pairs.
    pub fn new(digraph: MultiDigraph, risks: RiskTable) -> Result<Self> {
        if !risks.matches(&digraph) {
            return Err(Error::InvalidInput(
                "risk table is not defined exactly on the reachable pairs of the digraph".into(),
            ));
        }
        let reach = reachability_matrix(digraph.simple());
        Ok(Self {
            digraph,
            risks,
            reach,
            exact: None,
        })
    }

    /// Validates the cut model by enumeration and builds its exact risk table.
    pub fn from_model(space: ProductSpace, model: Arc<dyn CutModel>, cfg: &ExactConfig) -> Result<Self> {
        let validation = validate_cut_model(&space, &*model, cfg)?;
        if let Some(cx) = validation.counterexample {
            return Err(Error::Precondition(format!(
                "cut model fails at outcome {:?}: {:?}",
                space.describe(&cx.outcome),
                cx.violation
            )));
        }
        let risks = risk_table_exact(&space, &*model, cfg)?;
        let mut inst = Self::new(model.digraph().clone(), risks)?;
        inst.exact = Some(ExactModel { space, model });
        Ok(inst)
    }

    /// Attaches an exact model whose digraph has the same ids as this instance.
    pub fn with_exact(mut self, space: ProductSpace, model: Arc<dyn CutModel>) -> Result<Self> {
        if model.digraph().to_spec() != self.digraph.to_spec() {
            return Err(Error::InvalidInput("model digraph differs from instance digraph".into()));
        }
        self.exact = Some(ExactModel { space, model });
        Ok(self)
    }

    pub fn digraph(&self) -> &MultiDigraph {
        &self.digraph
    }

    pub fn simple(&self) -> &SimpleDigraph {
        self.digraph.simple()
    }

    pub fn risks(&self) -> &RiskTable {
        &self.risks
    }

    pub fn exact(&self) -> Option<&ExactModel> {
        self.exact.as_ref()
    }

    pub fn is_reachable(&self, x: usize, z: usize) -> bool {
        self.reach[x][z]
    }

    fn arc_labels(&self) -> Vec<String> {
        (0..self.simple().arc_count())
            .map(|a| self.simple().arc_label(a))
            .collect()
    }

    /// `ρ(e) = min over z reachable from head(e) of p(e, z)·ω̄(tail(e), z)`.
    pub fn risk_of_edge(&self, w: &ArcWeights, e: usize) -> Result<f64> {
        if e >= self.digraph.edge_count() {
            return Err(Error::UnknownEdge(format!("#{e}")));
        }
        w.validate(self.simple())?;
        let dist = min_product_from(self.simple(), w, self.digraph.edge(e).tail);
        Ok(self.edge_risk(e, &dist))
    }

    fn edge_risk(&self, e: usize, dist_from_tail: &[Option<f64>]) -> f64 {
        self.risks
            .row(e)
            .iter()
            .map(|&(z, p)| {
                let d = dist_from_tail[z].expect("z reachable from head is reachable from tail");
                p * d
            })
            .fold(f64::INFINITY, f64::min)
            .min(f64::MAX)
    }

    /// The operator `f(ω)(xy) = 1 + Σ_{e ∈ E(x,y)} ρ_ω(e)`, with `f(0) = 1`.
    pub fn apply_f(&self, w: &ArcWeights, exec: Execution) -> Result<ArcWeights> {
        let ds = self.simple();
        if w.as_slice().len() != ds.arc_count() {
            return Err(Error::WeightArity {
                expected: ds.arc_count(),
                got: w.as_slice().len(),
            });
        }
        if w.is_zero() {
            return Ok(ArcWeights::constant(ds, 1.0));
        }
        w.validate(ds)?;
        let n = ds.vertex_count();
        let is_tail: Vec<bool> = (0..n).map(|x| !ds.out_arcs(x).is_empty()).collect();
        let dist: Vec<Vec<Option<f64>>> = map_indices(exec, n, |x| {
            if is_tail[x] {
                min_product_from(ds, w, x)
            } else {
                Vec::new()
            }
        });
        let values = map_indices(exec, ds.arc_count(), |a| {
            let (x, _) = ds.arc(a);
            1.0 + self
                .digraph
                .edges_of_arc(a)
                .iter()
                .map(|&e| self.edge_risk(e, &dist[x]))
                .sum::<f64>()
        });
        Ok(ArcWeights(values))
    }

    /// Checks `ω(xy) ≥ 1 + Σ ρ_ω(e)` on every arc.
    pub fn check_condition(&self, w: &ArcWeights, tol: f64) -> Result<WeightReport> {
        self.check_condition_with(w, tol, Execution::default())
    }

    pub fn check_condition_with(&self, w: &ArcWeights, tol: f64, exec: Execution) -> Result<WeightReport> {
        w.validate(self.simple())?;
        let fw = self.apply_f(w, exec)?;
        let margins: Vec<f64> = w.as_slice().iter().zip(fw.as_slice()).map(|(a, b)| a - b).collect();
        Ok(WeightReport {
            arcs: self.arc_labels(),
            weights: w.as_slice().to_vec(),
            feasible: margins.iter().all(|&m| m >= -tol),
            margins,
            tolerance: tol,
            iterations: 0,
        })
    }

    /// Iterates `ω_{n+1} = f(ω_n)` from `ω_0 = 0` (see [`Self::least_weight_solution`]).
    pub fn kleene_iterates(&self, exec: Execution) -> KleeneIterates<'_> {
        KleeneIterates {
            inst: self,
            current: ArcWeights::zeros(self.simple()),
            exec,
        }
    }

    /// Least solution of `ω ≥ f(ω)` by Kleene iteration from the zero function.
    ///
    /// Weights above `value_cap` mean the risk table admits no solution; hitting
    /// `iter_cap` first is reported as indeterminate.
    pub fn least_weight_solution(&self, opts: &SolveOptions) -> Result<FixedPointVerdict> {
        let mut current = ArcWeights::zeros(self.simple());
        let mut chain_monotone = true;
        let mut iterations = 0u64;
        loop {
            let next = self.apply_f(&current, opts.exec)?;
            iterations += 1;
            chain_monotone &= current.dominated_by(&next, 1e-12 * next.as_slice().iter().fold(1.0_f64, |m, &v| m.max(v)));
            debug_assert!(chain_monotone, "Kleene chain decreased");
            let max_weight = next.as_slice().iter().copied().fold(0.0, f64::max);
            if !(max_weight <= opts.value_cap) {
                return Ok(FixedPointVerdict::Diverged {
                    iterations,
                    max_weight,
                    chain_monotone,
                });
            }
            let step = current.sup_distance(&next);
            current = next;
            if step < opts.tol {
                let mut report = self.check_condition_with(&current, opts.report_tol, opts.exec)?;
                report.iterations = iterations;
                return Ok(FixedPointVerdict::Converged { report, chain_monotone });
            }
            if iterations >= opts.iter_cap {
                return Ok(FixedPointVerdict::Indeterminate {
                    iterations,
                    last_step: step,
                    chain_monotone,
                });
            }
        }
    }

    /// Evaluates the arc and reachability bounds with exact probabilities.
    ///
    /// Requires an attached exact model and a weight assignment that passes
    /// [`Self::check_condition`] at [`BOUND_TOLERANCE`].
    pub fn probability_bounds(&self, w: &ArcWeights, queries: &[BoundQuery], cfg: &ExactConfig) -> Result<BoundReport> {
        let exact = self.exact.as_ref().ok_or(Error::MissingModel)?;
        let check = self.check_condition_with(w, BOUND_TOLERANCE, cfg.exec)?;
        if !check.feasible {
            return Err(Error::Precondition(format!(
                "weights violate the cut condition (min margin {})",
                check.min_margin()
            )));
        }
        let pr = vertex_probabilities(&exact.space, &*exact.model, cfg)?;
        self.bounds_from_probabilities(w, queries, &pr)
    }

    /// Same as [`Self::probability_bounds`] with vertex probabilities supplied
    /// by the caller.
    pub fn bounds_from_probabilities(&self, w: &ArcWeights, queries: &[BoundQuery], pr: &[f64]) -> Result<BoundReport> {
        let ds = self.simple();
        let names = self.digraph.vertices();
        let mut arc_bounds = Vec::new();
        let mut reach_bounds = Vec::new();
        for &q in queries {
            match q {
                BoundQuery::Arc(x, y) => {
                    let a = ds.arc_index(x, y).ok_or_else(|| {
                        Error::InvalidInput(format!("({}, {}) is not an arc", names[x], names[y]))
                    })?;
                    let rhs = pr[x] * w.get(a);
                    arc_bounds.push(ArcBound {
                        tail: names[x].clone(),
                        head: names[y].clone(),
                        pr_head: pr[y],
                        rhs,
                        pass: pr[y] <= rhs + BOUND_TOLERANCE,
                    });
                }
                BoundQuery::Reach(x, z) => {
                    let dist = min_product_from(ds, w, x);
                    let d = dist[z].ok_or_else(|| {
                        Error::InvalidInput(format!("{} is not reachable from {}", names[z], names[x]))
                    })?;
                    let lower_bound = pr[z] / d;
                    reach_bounds.push(ReachBound {
                        from: names[x].clone(),
                        to: names[z].clone(),
                        lower_bound,
                        pr_from: pr[x],
                        pass: pr[x] + BOUND_TOLERANCE >= lower_bound,
                    });
                }
            }
        }
        let all_pass = arc_bounds.iter().all(|b| b.pass) && reach_bounds.iter().all(|b| b.pass);
        Ok(BoundReport {
            arc_bounds,
            reach_bounds,
            all_pass,
        })
    }

    /// Every arc query and every reachable-pair query of the instance.
    pub fn all_queries(&self) -> Vec<BoundQuery> {
        let ds = self.simple();
        let mut q: Vec<BoundQuery> = ds.arcs().iter().map(|&(x, y)| BoundQuery::Arc(x, y)).collect();
        for x in 0..ds.vertex_count() {
            for z in 0..ds.vertex_count() {
                if self.reach[x][z] {
                    q.push(BoundQuery::Reach(x, z));
                }
            }
        }
        q
    }
}

/// Iterator over `ω_1, ω_2, ...` of the Kleene chain.
pub struct KleeneIterates<'a> {
    inst: &'a LclInstance,
    current: ArcWeights,
    exec: Execution,
}

impl Iterator for KleeneIterates<'_> {
    type Item = ArcWeights;

    fn next(&mut self) -> Option<ArcWeights> {
        let next = self
            .inst
            .apply_f(&self.current, self.exec)
            .expect("Kleene iterates are zero or at least 1");
        self.current = next.clone();
        Some(next)
    }
}

/// Both sides of `Σ_i (Π_{j<i} a_j)(b_i − a_i) ≤ Π b_i − Π a_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Telescoping {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates the telescoping product inequality for `b_i ≥ max(a_i, 1)`,
/// `a_i ≥ 0`. `holds` allows a relative rounding slack of `1e-12`.
pub fn telescoping_check(a: &[f64], b: &[f64]) -> Result<Telescoping> {
    if a.len() != b.len() {
        return Err(Error::Precondition("sequences differ in length".into()));
    }
    for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        if !(ai >= 0.0) || !(bi >= ai.max(1.0)) {
            return Err(Error::Precondition(format!(
                "need 0 <= a_i and b_i >= max(a_i, 1) at i = {}",
                i + 1
            )));
        }
    }
    let mut prefix = 1.0;
    let mut lhs = 0.0;
    for (&ai, &bi) in a.iter().zip(b) {
        lhs += prefix * (bi - ai);
        prefix *= ai;
    }
    let rhs = b.iter().product::<f64>() - a.iter().product::<f64>();
    let scale = b.iter().product::<f64>().max(1.0);
    Ok(Telescoping {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12 * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::MultiDigraph;
    use crate::probability::{CutSample, FnCutModel, Variable};

    fn single_arc(p: f64) -> LclInstance {
        let d = MultiDigraph::new(["x", "y"], vec![("e".into(), "x".into(), "y".into())]).unwrap();
        let risks = RiskTable::from_fn(&d, |_, _| p).unwrap();
        LclInstance::new(d, risks).unwrap()
    }

    #[test]
    fn zero_risk_gives_zero() {
        let inst = single_arc(0.0);
        let w = ArcWeights(vec![3.0]);
        assert_eq!(inst.risk_of_edge(&w, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_arc_risk() {
        let inst = single_arc(0.25);
        let w = ArcWeights(vec![2.0]);
        assert_eq!(inst.risk_of_edge(&w, 0).unwrap(), 0.5);
        assert!(inst.risk_of_edge(&w, 3).is_err());
    }

    #[test]
    fn risk_uses_tail_distances() {
        // x -> y -> z with e: x->y. z is reachable from y, so the risk may use
        // ω̄(x, z) = ω(xy)·ω(yz).
        let d = MultiDigraph::new(
            ["x", "y", "z"],
            vec![("e".into(), "x".into(), "y".into()), ("g".into(), "y".into(), "z".into())],
        )
        .unwrap();
        let z = d.vertex_index("z").unwrap();
        let risks = RiskTable::from_fn(&d, |e, v| if e == 0 && v == z { 0.1 } else { 0.9 }).unwrap();
        let inst = LclInstance::new(d, risks).unwrap();
        let w = ArcWeights(vec![2.0, 3.0]);
        // candidates: z = y: 0.9·2 = 1.8; z = z: 0.1·6 = 0.6.
        assert!((inst.risk_of_edge(&w, 0).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn f_examples() {
        let zero = single_arc(0.0);
        assert_eq!(zero.apply_f(&ArcWeights(vec![5.0]), Execution::Sequential).unwrap().0, vec![1.0]);
        let half = single_arc(0.25);
        assert_eq!(half.apply_f(&ArcWeights(vec![0.0]), Execution::Sequential).unwrap().0, vec![1.0]);
        assert_eq!(half.apply_f(&ArcWeights(vec![2.0]), Execution::Sequential).unwrap().0, vec![1.5]);
        assert!(half.apply_f(&ArcWeights(vec![0.5]), Execution::Sequential).is_err());
    }

    #[test]
    fn zero_risks_feasible_at_one() {
        let inst = single_arc(0.0);
        let r = inst.check_condition(&ArcWeights(vec![1.0]), 0.0).unwrap();
        assert!(r.feasible);
        assert_eq!(r.margins, vec![0.0]);
    }

    #[test]
    fn zero_risks_converge_in_two_iterations() {
        let inst = single_arc(0.0);
        match inst.least_weight_solution(&SolveOptions::default()).unwrap() {
            FixedPointVerdict::Converged { report, chain_monotone } => {
                assert_eq!(report.iterations, 2);
                assert_eq!(report.weights, vec![1.0]);
                assert!(chain_monotone);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_arc_fixed_point() {
        // ω = 1 + ω/4 has least solution 4/3.
        let inst = single_arc(0.25);
        match inst.least_weight_solution(&SolveOptions::default()).unwrap() {
            FixedPointVerdict::Converged { report, .. } => {
                assert!((report.weights[0] - 4.0 / 3.0).abs() < 1e-11);
                assert!(report.feasible);
            }
            other => panic!("unexpected {other:?}"),
        }
        // ω = 1 + 2ω has none and the chain grows geometrically.
        let d = MultiDigraph::new(
            ["x", "y"],
            vec![("e".into(), "x".into(), "y".into()), ("g".into(), "x".into(), "y".into())],
        )
        .unwrap();
        let risks = RiskTable::from_fn(&d, |_, _| 1.0).unwrap();
        let inst = LclInstance::new(d, risks).unwrap();
        assert!(matches!(
            inst.least_weight_solution(&SolveOptions::default()).unwrap(),
            FixedPointVerdict::Diverged { .. }
        ));
        // ω = 1 + ω has none either, but the chain only grows linearly.
        let inst = single_arc(1.0);
        assert!(matches!(
            inst.least_weight_solution(&SolveOptions::default()).unwrap(),
            FixedPointVerdict::Indeterminate { .. }
        ));
    }

    #[test]
    fn iteration_cap_is_indeterminate() {
        let inst = single_arc(0.999);
        let opts = SolveOptions {
            iter_cap: 5,
            ..SolveOptions::default()
        };
        assert!(matches!(
            inst.least_weight_solution(&opts).unwrap(),
            FixedPointVerdict::Indeterminate { iterations: 5, .. }
        ));
    }

    #[test]
    fn bounds_need_exact_model_and_feasible_weights() {
        let inst = single_arc(0.25);
        let cfg = ExactConfig::default();
        assert_eq!(
            inst.probability_bounds(&ArcWeights(vec![2.0]), &inst.all_queries(), &cfg).unwrap_err(),
            Error::MissingModel
        );

        let space = ProductSpace::new(vec![Variable::uniform("c", ["0", "1"])]).unwrap();
        let d = inst.digraph().clone();
        let model: Arc<dyn CutModel> = Arc::new(FnCutModel::new(d, |_: &[usize]| CutSample {
            a: vec![true, true],
            f: vec![false],
        }));
        let inst = LclInstance::from_model(space, model, &cfg).unwrap();
        let r = inst.probability_bounds(&ArcWeights(vec![1.0]), &inst.all_queries(), &cfg).unwrap();
        assert!(r.all_pass);
        assert_eq!(r.arc_bounds.len(), 1);
        assert_eq!(r.reach_bounds.len(), 3);
    }

    #[test]
    fn telescoping_examples() {
        let t = telescoping_check(&[0.5], &[2.0]).unwrap();
        assert_eq!(t.lhs, 1.5);
        assert_eq!(t.rhs, 1.5);
        assert!(t.holds);
        let same = telescoping_check(&[1.5, 2.0], &[1.5, 2.0]).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert!(same.holds);
        assert!(telescoping_check(&[2.0], &[1.5]).is_err());
        assert!(telescoping_check(&[0.5], &[0.9]).is_err());
        assert!(telescoping_check(&[0.5], &[]).is_err());
    }
}
