//! Edge-count bound for colour-critical true hypergraphs: the weight function
//! `g`, greedy peeling, degree profiles and the per-vertex conditions.

use serde::{Deserialize, Serialize};

use super::{scalar_feasible, FeasibilityResult, SeriesCondition, SOLVER_TOLERANCE};
use crate::error::{Error, Result};
use crate::structures::Hypergraph;

/// Relative slack for the inequalities below (several hold with equality at
/// the intended parameters).
const REL_TOL: f64 = 1e-12;

fn geq(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - REL_TOL * lhs.abs().max(rhs.abs()).max(1.0)
}

/// `k` colours, slack `c` and weight parameter `z > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalParams {
    pub k: f64,
    pub c: f64,
    pub z: f64,
}

impl CriticalParams {
    pub fn new(k: f64, c: f64, z: f64) -> Result<Self> {
        if !(z > 1.0) {
            return Err(Error::Precondition(format!("z = {z} must exceed 1")));
        }
        if !(k >= 1.0) {
            return Err(Error::Precondition(format!("k = {k} must be at least 1")));
        }
        Ok(Self { k, c, z })
    }

    /// `g(1) = 1 - 1/z`, `g(t) = 2^{1-t}/z` for `t > 1`.
    pub fn g(&self, t: usize) -> f64 {
        match t {
            0 => 0.0,
            1 => 1.0 - 1.0 / self.z,
            _ => 2f64.powi(1 - t as i32) / self.z,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.k - self.c
    }
}

/// Counts `a_t` (edges through `v` leaving `V'`, meeting it in `t` vertices)
/// and `b_t` (edges through `v` inside `V'` of size `t`); index `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl DegreeProfile {
    pub fn add_a(&mut self, t: usize) {
        bump(&mut self.a, t);
    }

    pub fn add_b(&mut self, t: usize) {
        bump(&mut self.b, t);
    }

    pub fn a(&self, t: usize) -> u64 {
        self.a.get(t).copied().unwrap_or(0)
    }

    pub fn b(&self, t: usize) -> u64 {
        self.b.get(t).copied().unwrap_or(0)
    }

    pub fn alpha(&self, t: usize, p: &CriticalParams) -> f64 {
        self.a(t) as f64 * p.g(t)
    }

    pub fn beta(&self, t: usize, p: &CriticalParams) -> f64 {
        self.b(t) as f64 * p.g(t)
    }

    /// `γ = Σ α_t + Σ β_t`.
    pub fn gamma(&self, p: &CriticalParams) -> f64 {
        (1..self.a.len()).map(|t| self.alpha(t, p)).sum::<f64>()
            + (1..self.b.len()).map(|t| self.beta(t, p)).sum::<f64>()
    }

    /// No inside edge has fewer than three vertices.
    pub fn is_true(&self) -> bool {
        self.b(0) == 0 && self.b(1) == 0 && self.b(2) == 0
    }

    pub fn is_empty(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&x| x == 0)
    }
}

fn bump(v: &mut Vec<u64>, t: usize) {
    if v.len() <= t {
        v.resize(t + 1, 0);
    }
    v[t] += 1;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinSlack {
    pub k: f64,
    /// Smaller root of `c² = 16(k - c)`.
    pub c_min: f64,
    /// `4√k`.
    pub default_c: f64,
    pub default_c_suffices: bool,
    /// `default_c² - 16(k - default_c)`, which equals `64√k`.
    pub default_excess: f64,
}

pub fn critical_min_slack(k: f64) -> Result<MinSlack> {
    if !(k >= 1.0) {
        return Err(Error::Precondition(format!("k = {k} must be at least 1")));
    }
    let c_min = -8.0 + (64.0 + 16.0 * k).sqrt();
    let default_c = 4.0 * k.sqrt();
    Ok(MinSlack {
        k,
        c_min,
        default_c,
        default_c_suffices: default_c >= c_min,
        default_excess: default_c * default_c - 16.0 * (k - default_c),
    })
}

/// `τ ≥ 1 + (k-c)τ/k + 4(k-c)τ²/k²`: the second requirement after choosing
/// `z = k/(4τ) + 1`.
pub fn critical_scalar_condition(k: f64, c: f64) -> FeasibilityResult {
    let lin = (k - c) / k;
    let quad = 4.0 * (k - c) / (k * k);
    let cond = SeriesCondition::new(
        format!("tau >= 1 + {lin} tau + {quad} tau^2"),
        f64::INFINITY,
        move |t| lin * t + quad * t * t,
    )
    .with_derivative(move |t| lin + 2.0 * quad * t);
    scalar_feasible(&cond, SOLVER_TOLERANCE)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalCheck {
    /// `4τ/k ≥ 1/(z-1)`.
    pub first_holds: bool,
    /// `τ ≥ 1 + 4zτ²(k-c)/k²`.
    pub second_holds: bool,
    pub second_rhs: f64,
    /// True when `z = k/(4τ) + 1`.
    pub canonical_z: bool,
    /// `(4(k-c)/k²)τ² - (c/k)τ + 1`, reported when `z = k/(4τ) + 1`.
    pub quadratic: Option<f64>,
    pub quadratic_holds: Option<bool>,
}

pub fn critical_condition_check(k: f64, c: f64, tau: f64, z: f64) -> Result<CriticalCheck> {
    if !(z > 1.0) || !(tau >= 1.0) {
        return Err(Error::Precondition("need z > 1 and τ ≥ 1".into()));
    }
    let first_holds = geq(4.0 * tau / k, 1.0 / (z - 1.0));
    let second_rhs = 1.0 + 4.0 * z * tau * tau * (k - c) / (k * k);
    let second_holds = geq(tau, second_rhs);
    let want_z = k / (4.0 * tau) + 1.0;
    let canonical_z = (z - want_z).abs() <= REL_TOL * want_z;
    let quadratic = canonical_z.then(|| 4.0 * (k - c) / (k * k) * tau * tau - c / k * tau + 1.0);
    Ok(CriticalCheck {
        first_holds,
        second_holds,
        second_rhs,
        canonical_z,
        quadratic_holds: quadratic.map(|q| q <= REL_TOL * (1.0 + c / k * tau)),
        quadratic,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexCondition {
    /// Right-hand side of the per-vertex requirement.
    pub rhs: f64,
    pub holds: bool,
    pub gamma: f64,
    /// `γ < k - c`, both conditions of [`critical_condition_check`] and
    /// `2τ/k ≤ 1`, under which `β_3`'s coefficient is the largest one.
    pub reduction_applies: bool,
    /// The requirement holds whenever the reduction applies.
    pub reduction_consistent: bool,
}

/// `τ ≥ 1 + α_1·z/(z-1)·τ/k + Σ_{t≥2} α_t·½z(2τ/k)^t + Σ_{t≥3} β_t·z(2τ/k)^{t-1}`.
pub fn critical_vertex_condition(profile: &DegreeProfile, p: &CriticalParams, tau: f64) -> Result<VertexCondition> {
    if !profile.is_true() {
        return Err(Error::Precondition("profile has an inside edge with fewer than 3 vertices".into()));
    }
    if profile.a(0) != 0 {
        return Err(Error::Precondition("a_0 must be zero".into()));
    }
    let (k, z) = (p.k, p.z);
    let x = 2.0 * tau / k;
    let mut rhs = 1.0 + profile.alpha(1, p) * z / (z - 1.0) * tau / k;
    for t in 2..profile.a.len() {
        rhs += profile.alpha(t, p) * 0.5 * z * x.powi(t as i32);
    }
    for t in 3..profile.b.len() {
        rhs += profile.beta(t, p) * z * x.powi(t as i32 - 1);
    }
    let holds = geq(tau, rhs);
    let gamma = profile.gamma(p);
    let check = critical_condition_check(k, p.c, tau, z)?;
    let reduction_applies = gamma < p.threshold() && check.first_holds && check.second_holds && x <= 1.0;
    Ok(VertexCondition {
        rhs,
        holds,
        gamma,
        reduction_applies,
        reduction_consistent: !reduction_applies || holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeelStep {
    pub vertex: usize,
    /// `Σ_{H ∋ v} g(|H ∩ V_i|)` at removal.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PeelOutcome {
    AllPeeled {
        /// Sum of the step weights.
        chain_sum: f64,
        /// `Σ_H Σ_{j=1}^{|H|} g(j)`, recomputed from the edge sizes.
        recount: f64,
        edge_count: u64,
        /// `|E| > chain_sum ≥ (k - c)n`.
        certificate_holds: bool,
    },
    Remainder {
        remaining: Vec<usize>,
        profiles: Vec<DegreeProfile>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeelResult {
    pub chain: Vec<PeelStep>,
    pub true_hypergraph: bool,
    #[serde(flatten)]
    pub outcome: PeelOutcome,
}

/// Repeatedly removes the lowest-numbered vertex `v` of `V_i` with
/// `Σ_{H ∋ v} g(|H ∩ V_i|) ≥ k - c`.
pub fn greedy_peel(h: &Hypergraph, p: &CriticalParams) -> Result<PeelResult> {
    let threshold = p.threshold();
    if !(threshold > 0.0) {
        return Err(Error::Precondition(format!("k - c = {threshold} must be positive")));
    }
    let n = h.vertex_count;
    let inc = h.incidence();
    let mut alive = vec![true; n];
    let mut size: Vec<usize> = h.edges.iter().map(Vec::len).collect();
    let weight = |v: usize, size: &[usize]| inc[v].iter().map(|&e| p.g(size[e])).sum::<f64>();
    let mut chain = Vec::new();
    while let Some(v) = (0..n).find(|&v| alive[v] && weight(v, &size) >= threshold) {
        chain.push(PeelStep {
            vertex: v,
            weight: weight(v, &size),
        });
        alive[v] = false;
        for &e in &inc[v] {
            size[e] -= 1;
        }
    }
    let outcome = if chain.len() == n {
        let chain_sum: f64 = chain.iter().map(|s| s.weight).sum();
        let recount: f64 = h
            .edges
            .iter()
            .map(|e| (1..=e.len()).map(|j| p.g(j)).sum::<f64>())
            .sum();
        let edge_count = h.edges.len() as u64;
        PeelOutcome::AllPeeled {
            chain_sum,
            recount,
            edge_count,
            certificate_holds: (n == 0 || edge_count as f64 > chain_sum)
                && chain_sum >= threshold * n as f64 * (1.0 - REL_TOL),
        }
    } else {
        let remaining: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        let profiles = remaining
            .iter()
            .map(|&v| {
                let mut prof = DegreeProfile::default();
                for &e in &inc[v] {
                    let inside = size[e];
                    if inside == h.edges[e].len() {
                        prof.add_b(inside);
                    } else {
                        prof.add_a(inside);
                    }
                }
                prof
            })
            .collect();
        PeelOutcome::Remainder { remaining, profiles }
    };
    Ok(PeelResult {
        chain,
        true_hypergraph: h.is_true_hypergraph(),
        outcome,
    })
}
