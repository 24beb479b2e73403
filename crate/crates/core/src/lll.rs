//! Lopsided Lovász Local Lemma: the `μ` condition, its `τ = 1/(1-μ)` form and
//! a fixed-point search for `μ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyEvent, FamilyInstance, Subset, TauAssignment, Witness, WitnessMap};

/// Events `B_1..B_n` with negative-dependency neighbourhoods `Γ(i)` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct LllInstance {
    gamma: Vec<Vec<usize>>,
    probs: Vec<f64>,
    mu: Vec<f64>,
}

/// JSON form with 1-based neighbourhoods:
/// `{"n":2,"gamma":[[2],[1]],"p":[0.125,0.125],"mu":[0.25,0.25]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LllSpec {
    pub n: usize,
    pub gamma: Vec<Vec<usize>>,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
}

impl LllInstance {
    pub fn new(gamma: Vec<Vec<usize>>, probs: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let n = gamma.len();
        if probs.len() != n || mu.len() != n {
            return Err(Error::InvalidInput("gamma, p and mu must have the same length".into()));
        }
        for (i, g) in gamma.iter().enumerate() {
            if g.iter().any(|&j| j >= n) {
                return Err(Error::InvalidInput(format!("Γ({}) names a missing event", i + 1)));
            }
            if g.contains(&i) {
                return Err(Error::InvalidInput(format!("Γ({}) contains {}", i + 1, i + 1)));
            }
            let mut sorted = g.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != g.len() {
                return Err(Error::InvalidInput(format!("Γ({}) repeats an event", i + 1)));
            }
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!("probability {p} is outside [0, 1]")));
        }
        if let Some(m) = mu.iter().find(|m| !(0.0..1.0).contains(*m)) {
            return Err(Error::InvalidInput(format!("μ value {m} is outside [0, 1)")));
        }
        Ok(Self { gamma, probs, mu })
    }

    pub fn from_spec(spec: &LllSpec) -> Result<Self> {
        if spec.gamma.len() != spec.n {
            return Err(Error::InvalidInput(format!(
                "n = {} but gamma has {} entries",
                spec.n,
                spec.gamma.len()
            )));
        }
        let gamma = spec
            .gamma
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&j| {
                        if j == 0 || j > spec.n {
                            Err(Error::InvalidInput(format!("gamma entry {j} is not in 1..={}", spec.n)))
                        } else {
                            Ok(j - 1)
                        }
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mu = spec
            .mu
            .clone()
            .ok_or_else(|| Error::InvalidInput("mu is required".into()))?;
        Self::new(gamma, spec.p.clone(), mu)
    }

    pub fn to_spec(&self) -> LllSpec {
        LllSpec {
            n: self.len(),
            gamma: self
                .gamma
                .iter()
                .map(|g| g.iter().map(|&j| j + 1).collect())
                .collect(),
            p: self.probs.clone(),
            mu: Some(self.mu.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn gamma(&self) -> &[Vec<usize>] {
        &self.gamma
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    fn neighbourhood_mask(&self, i: usize) -> Subset {
        self.gamma[i].iter().fold(1u64 << i, |m, &j| m | 1 << j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LllReport {
    pub feasible: bool,
    /// `Π(1 - μ(i))`.
    pub bound: f64,
    /// `μ(i)·Π_{j∈Γ(i)}(1-μ(j)) - Pr(B_i)` per event.
    pub margins: Vec<f64>,
}

/// Checks `Pr(B_i) ≤ μ(i)·Π_{j∈Γ(i)}(1-μ(j))`; margins at least `-tol` pass.
pub fn check_lopsided(inst: &LllInstance, tol: f64) -> LllReport {
    let margins: Vec<f64> = (0..inst.len())
        .map(|i| {
            let prod: f64 = inst.gamma[i].iter().map(|&j| 1.0 - inst.mu[j]).product();
            inst.mu[i] * prod - inst.probs[i]
        })
        .collect();
    LllReport {
        feasible: margins.iter().all(|&m| m >= -tol),
        bound: inst.mu.iter().map(|m| 1.0 - m).product(),
        margins,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauTranslation {
    pub tau: Vec<f64>,
    /// `τ(i) - 1 - Pr(B_i)·τ(Γ(i) ∪ {i})` per event.
    pub margins: Vec<f64>,
    pub condition_holds: bool,
    /// `1/τ(I)`.
    pub bound: f64,
    /// `|Π(1-μ(i))·Π τ(i) - 1|`.
    pub bound_mismatch: f64,
}

/// Relative slack used when confirming the `τ` form of a feasible `μ`.
pub const TRANSLATION_TOLERANCE: f64 = 1e-12;

/// `τ(i) = 1/(1-μ(i))` and the check `τ(i) ≥ 1 + Pr(B_i)·τ(Γ(i) ∪ {i})`.
pub fn mu_to_tau(inst: &LllInstance, tol: f64) -> Result<TauTranslation> {
    if !check_lopsided(inst, tol).feasible {
        return Err(Error::Precondition("μ does not satisfy the lopsided condition".into()));
    }
    let tau = TauAssignment(inst.mu.iter().map(|m| 1.0 / (1.0 - m)).collect());
    let margins: Vec<f64> = (0..inst.len())
        .map(|i| tau.0[i] - 1.0 - inst.probs[i] * tau.product(inst.neighbourhood_mask(i)))
        .collect();
    let condition_holds = margins
        .iter()
        .zip(&tau.0)
        .enumerate()
        .all(|(i, (&m, &t))| m >= -(tol + TRANSLATION_TOLERANCE) * t * tau.product(inst.neighbourhood_mask(i)));
    let full: Subset = if inst.is_empty() { 0 } else { u64::MAX >> (64 - inst.len()) };
    let tau_i = tau.product(full);
    let mu_bound: f64 = inst.mu.iter().map(|m| 1.0 - m).product();
    Ok(TauTranslation {
        bound: 1.0 / tau_i,
        bound_mismatch: (mu_bound * tau_i - 1.0).abs(),
        tau: tau.0,
        margins,
        condition_holds,
    })
}

/// The same events as a bound-mode family instance: `B(i) = {B_i}` with
/// witness `Γ(i) ∪ {i}` and bound `Pr(B_i)`.
pub fn to_family(inst: &LllInstance) -> Result<(FamilyInstance, WitnessMap)> {
    if inst.len() > crate::family::MAX_ELEMENTS {
        return Err(Error::InvalidInput("too many events".into()));
    }
    let elements: Vec<String> = (1..=inst.len()).map(|i| i.to_string()).collect();
    let events = (1..=inst.len())
        .map(|i| vec![FamilyEvent::named(format!("B{i}"))])
        .collect();
    let fam = FamilyInstance::bound_only(elements, events)?;
    let mut w = WitnessMap::new();
    for i in 0..inst.len() {
        w.insert(
            i,
            0,
            Witness {
                set: inst.neighbourhood_mask(i),
                p: Some(inst.probs[i]),
            },
        )?;
    }
    Ok((fam, w))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MuVerdict {
    Feasible { mu: Vec<f64>, iterations: u64 },
    Infeasible { iterations: u64 },
    Indeterminate { iterations: u64 },
}

/// Iterates `μ(i) ← Pr(B_i)/Π_{j∈Γ(i)}(1-μ(j))` from `μ = Pr(B)`.
///
/// The sequence is nondecreasing; reaching 1 anywhere proves that no `μ`
/// exists, and a stable point is a feasible `μ` (with equality).
pub fn auto_mu(probs: &[f64], gamma: &[Vec<usize>], iterations: u64) -> Result<MuVerdict> {
    LllInstance::new(gamma.to_vec(), probs.to_vec(), vec![0.0; probs.len()])?;
    if probs.iter().any(|&p| p >= 1.0) {
        return Ok(MuVerdict::Infeasible { iterations: 0 });
    }
    let mut mu = probs.to_vec();
    for t in 1..=iterations {
        let next: Vec<f64> = (0..probs.len())
            .map(|i| probs[i] / gamma[i].iter().map(|&j| 1.0 - mu[j]).product::<f64>())
            .collect();
        if next.iter().any(|&m| !(m < 1.0)) {
            return Ok(MuVerdict::Infeasible { iterations: t });
        }
        let step = mu.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        mu = next;
        if step <= 1e-15 {
            return Ok(MuVerdict::Feasible { mu, iterations: t });
        }
    }
    Ok(MuVerdict::Indeterminate { iterations })
}
