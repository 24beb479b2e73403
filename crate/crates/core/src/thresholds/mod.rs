//! Scalar conditions of the form `τ ≥ 1 + g(τ)` and the closed-form bounds of
//! the classical applications.

mod critical;

pub use critical::{
    critical_condition_check, critical_min_slack, critical_scalar_condition, critical_vertex_condition,
    greedy_peel, CriticalCheck, CriticalParams, DegreeProfile, MinSlack, PeelOutcome, PeelResult,
    VertexCondition,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of grid intervals scanned before local refinement.
pub const GRID_POINTS: usize = 10_000;
/// Upper end of the search when `g` is finite everywhere.
pub const UNBOUNDED_SEARCH_LIMIT: f64 = 1e6;

type RealFn<'a> = Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;

/// `τ ≥ 1 + g(τ)` with `g` nondecreasing and finite on `[1, radius)`.
pub struct SeriesCondition<'a> {
    pub g: RealFn<'a>,
    /// Derivative of `g`, used to pin down tangent points.
    pub dg: Option<RealFn<'a>>,
    pub radius: f64,
    pub description: String,
}

impl<'a> SeriesCondition<'a> {
    pub fn new(description: impl Into<String>, radius: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self {
            g: Box::new(g),
            dg: None,
            radius,
            description: description.into(),
        }
    }

    pub fn with_derivative(mut self, dg: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        self.dg = Some(Box::new(dg));
        self
    }

    /// `h(τ) = τ - 1 - g(τ)`, with `-∞` outside the domain.
    pub fn h(&self, tau: f64) -> f64 {
        if !(tau < self.radius) {
            return f64::NEG_INFINITY;
        }
        let v = tau - 1.0 - (self.g)(tau);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Least `τ` with `h(τ) ≥ 0` when feasible (the maximiser when the maximum
    /// is within tolerance of zero), otherwise the maximiser of `h`.
    pub tau_star: f64,
    /// `h(τ*)`.
    pub margin: f64,
    /// Maximiser of `h` on the domain.
    pub peak_tau: f64,
    pub peak_margin: f64,
    /// Number of evaluations of `h`.
    pub iterations: u64,
}

/// Decides whether `τ - 1 - g(τ) ≥ -tol` somewhere on `[1, radius)`.
///
/// The maximum of `h` is located on a grid of [`GRID_POINTS`] intervals
/// (uniform for a finite radius, geometric up to [`UNBOUNDED_SEARCH_LIMIT`]
/// otherwise), refined by golden-section search in the neighbouring cells and,
/// when `g'` is known, by bisection on `1 - g'`.
pub fn scalar_feasible(cond: &SeriesCondition<'_>, tol: f64) -> FeasibilityResult {
    let mut evals = 0u64;
    let mut h = |x: f64| {
        evals += 1;
        cond.h(x)
    };
    if !(cond.radius > 1.0) {
        return FeasibilityResult {
            feasible: false,
            tau_star: 1.0,
            margin: f64::NEG_INFINITY,
            peak_tau: 1.0,
            peak_margin: f64::NEG_INFINITY,
            iterations: 0,
        };
    }
    let hi = if cond.radius.is_finite() {
        cond.radius
    } else {
        UNBOUNDED_SEARCH_LIMIT
    };
    let grid: Vec<f64> = (0..=GRID_POINTS)
        .map(|i| {
            let f = i as f64 / GRID_POINTS as f64;
            if cond.radius.is_finite() {
                1.0 + (hi - 1.0) * f
            } else {
                hi.powf(f)
            }
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| h(x)).collect();
    let mut j = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[j] {
            j = i;
        }
    }
    let last_inside = if cond.radius.is_finite() {
        // largest double below the radius
        f64::from_bits(cond.radius.to_bits() - 1)
    } else {
        hi
    };
    let a0 = grid[j.saturating_sub(1)];
    let b0 = grid[(j + 1).min(GRID_POINTS)].min(last_inside);
    let (mut peak_tau, mut peak_margin) = (grid[j], values[j]);

    // golden-section search for the maximum on [a0, b0]
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a0, b0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..200 {
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + phi * (b - a);
            hd = h(d);
        }
    }
    for (x, v) in [(c, hc), (d, hd)] {
        if v > peak_margin {
            peak_tau = x;
            peak_margin = v;
        }
    }
    if let Some(dg) = &cond.dg {
        let dh = |x: f64| 1.0 - dg(x);
        let (mut lo, mut up) = (a0, b0);
        if dh(lo) > 0.0 && dh(up) < 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (lo + up);
                if mid <= lo || mid >= up {
                    break;
                }
                if dh(mid) > 0.0 {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            let root = 0.5 * (lo + up);
            let v = h(root);
            if v >= peak_margin - 1e-15 * root.max(1.0) {
                peak_tau = root;
                peak_margin = v;
            }
        }
    }
    let feasible = peak_margin >= -tol;
    let (tau_star, margin) = if feasible && peak_margin <= tol {
        // tangent within tolerance: h is flat at rounding level around the
        // peak, so the peak is the least root
        (peak_tau, peak_margin)
    } else if feasible {
        let mut candidates: Vec<(f64, f64)> = grid[..=j]
            .iter()
            .zip(&values[..=j])
            .map(|(&x, &v)| (x, v))
            .filter(|&(x, _)| x < peak_tau)
            .collect();
        candidates.push((peak_tau, peak_margin));
        match candidates.iter().position(|&(_, v)| v >= 0.0) {
            None => (peak_tau, peak_margin),
            Some(0) => candidates[0],
            Some(i) => {
                let (mut lo, mut up) = (candidates[i - 1].0, candidates[i].0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + up);
                    if mid <= lo || mid >= up {
                        break;
                    }
                    if h(mid) >= 0.0 {
                        up = mid;
                    } else {
                        lo = mid;
                    }
                }
                (up, h(up))
            }
        }
    } else {
        (peak_tau, peak_margin)
    };
    FeasibilityResult {
        feasible,
        tau_star,
        margin,
        peak_tau,
        peak_margin,
        iterations: evals,
    }
}

/// Largest `d ≥ start` with `feasible(d)`, assuming `feasible` is monotone and
/// holds at `start`.
fn largest_feasible(start: u64, feasible: impl Fn(u64) -> bool) -> u64 {
    let mut lo = start;
    let mut step = 1u64;
    let mut hi = loop {
        let probe = lo.saturating_add(step);
        if probe == lo || !feasible(probe) {
            break probe;
        }
        lo = probe;
        step = step.saturating_mul(2);
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Default tolerance for the scalar solver.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypColVariant {
    /// Symmetric LLL: `d ≤ 2^{k-1}/(ek) + 1 - 1/k`.
    Lll,
    /// `d ≤ 2^{k-1}/k·(1 - 1/k)^{k-1}`.
    Exact,
    /// `d ≤ 2^{k-1}/(ek)`.
    Crude,
    /// `d ≤ 2^{k-1}/(e(k-1))`.
    Improved,
}

impl std::str::FromStr for HypColVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lll" => Ok(Self::Lll),
            "exact" => Ok(Self::Exact),
            "crude" => Ok(Self::Crude),
            "improved" => Ok(Self::Improved),
            other => Err(Error::InvalidInput(format!("unknown variant {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypColBound {
    pub k: u32,
    pub variant: HypColVariant,
    pub bound: f64,
    /// `⌊bound⌋`.
    pub max_d: u64,
    /// Solver run on the scalar condition at `d = max_d` (absent for `lll`).
    pub solver_at_max_d: Option<FeasibilityResult>,
    /// Largest integer `d` for which the solver finds the scalar condition
    /// feasible (absent for `lll`).
    pub solver_frontier: Option<u64>,
}

/// Largest `k` for which the two-colouring bounds are evaluated.
pub const MAX_HYPCOL_K: u32 = 60;

/// `τ ≥ 1 + d·τ^m/2^{k-1}`.
pub fn hypcol_condition(k: u32, m: u32, d: f64) -> SeriesCondition<'static> {
    let scale = d / 2f64.powi(k as i32 - 1);
    SeriesCondition::new(
        format!("tau >= 1 + {d} tau^{m} / 2^{}", k - 1),
        f64::INFINITY,
        move |t| scale * t.powi(m as i32),
    )
    .with_derivative(move |t| scale * m as f64 * t.powi(m as i32 - 1))
}

/// Maximum degree `d` of a `k`-uniform `d`-regular hypergraph that each bound
/// certifies as two-colourable.
pub fn hypergraph_two_coloring_max_degree(k: u32, variant: HypColVariant) -> Result<HypColBound> {
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k} must be at least 2")));
    }
    if k > MAX_HYPCOL_K {
        return Err(Error::Precondition(format!("k = {k} exceeds {MAX_HYPCOL_K}")));
    }
    let kf = k as f64;
    let p = 2f64.powi(k as i32 - 1);
    let e = std::f64::consts::E;
    let bound = match variant {
        HypColVariant::Lll => p / (e * kf) + 1.0 - 1.0 / kf,
        HypColVariant::Exact => p / kf * (1.0 - 1.0 / kf).powi(k as i32 - 1),
        HypColVariant::Crude => p / (e * kf),
        HypColVariant::Improved => p / (e * (kf - 1.0)),
    };
    let max_d = bound.floor() as u64;
    let m = match variant {
        HypColVariant::Lll => None,
        HypColVariant::Improved => Some(k - 1),
        HypColVariant::Exact | HypColVariant::Crude => Some(k),
    };
    let (solver_at_max_d, solver_frontier) = match m {
        None => (None, None),
        Some(m) => {
            let feasible = |d: u64| scalar_feasible(&hypcol_condition(k, m, d as f64), SOLVER_TOLERANCE).feasible;
            let at = scalar_feasible(&hypcol_condition(k, m, max_d as f64), SOLVER_TOLERANCE);
            let frontier = if at.feasible {
                Some(largest_feasible(max_d, feasible))
            } else {
                (0..max_d).rev().find(|&d| feasible(d))
            };
            (Some(at), frontier)
        }
    };
    Ok(HypColBound {
        k,
        variant,
        bound,
        max_d,
        solver_at_max_d,
        solver_frontier,
    })
}

/// `ω ≥ 1/(1 - ω/L)`, i.e. `ω ≥ 1 + g(ω)` with `g(ω) = ω/(L - ω)` on `[1, L)`.
pub fn nonrepetitive_condition(l: f64) -> SeriesCondition<'static> {
    SeriesCondition::new(format!("omega >= 1/(1 - omega/{l})"), l, move |w| w / (l - w))
        .with_derivative(move |w| l / ((l - w) * (l - w)))
}

/// Feasibility of the nonrepetitive-sequence condition for lists of size `L`.
pub fn nonrepetitive_sequence_feasible(l: f64) -> Result<FeasibilityResult> {
    if !(l >= 2.0) {
        return Err(Error::Precondition(format!("list size {l} must be at least 2")));
    }
    Ok(scalar_feasible(&nonrepetitive_condition(l), SOLVER_TOLERANCE))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChromaticBound {
    pub delta: u64,
    /// `Δ² + 3·2^{-2/3}Δ^{5/3} + 2^{2/3}Δ^{5/3}/(Δ^{1/3} - 2^{1/3})`.
    pub value: f64,
    /// `⌈value⌉`.
    pub k: u64,
    /// `y = 1 - (2/Δ)^{1/3}`.
    pub y: f64,
    /// `k/Δ²`.
    pub lhs: f64,
    /// `1/y + 1/(Δ(1-y)²)`.
    pub rhs: f64,
    pub inequality_holds: bool,
    /// Solver on the series condition at `k`.
    pub solver: FeasibilityResult,
}

/// `τ ≥ 1 + (Δτ/k)/(1 - Δ²τ/k)²` on `[1, k/Δ²)`.
pub fn nonrepetitive_coloring_condition(delta: f64, k: f64) -> SeriesCondition<'static> {
    let a = delta / k;
    let b = delta * delta / k;
    SeriesCondition::new(
        format!("tau >= 1 + (D tau/k)/(1 - D^2 tau/k)^2 with D = {delta}, k = {k}"),
        1.0 / b,
        move |t| a * t / ((1.0 - b * t) * (1.0 - b * t)),
    )
    .with_derivative(move |t| {
        let u = 1.0 - b * t;
        a / (u * u) + 2.0 * a * b * t / (u * u * u)
    })
}

/// Number of colours that suffices for a nonrepetitive colouring of any graph
/// of maximum degree `Δ ≥ 3`.
pub fn nonrepetitive_chromatic_bound(delta: u64) -> Result<ChromaticBound> {
    if delta <= 2 {
        return Err(Error::Precondition(format!(
            "maximum degree {delta} must exceed 2 (the bound divides by Δ^(1/3) - 2^(1/3))"
        )));
    }
    let d = delta as f64;
    let c13 = 2f64.cbrt();
    let d53 = d.powf(5.0 / 3.0);
    let value = d * d + 3.0 / (c13 * c13) * d53 + c13 * c13 * d53 / (d.cbrt() - c13);
    let k = value.ceil() as u64;
    let y = 1.0 - (2.0 / d).cbrt();
    let lhs = k as f64 / (d * d);
    let rhs = 1.0 / y + 1.0 / (d * (1.0 - y) * (1.0 - y));
    Ok(ChromaticBound {
        delta,
        value,
        k,
        y,
        lhs,
        rhs,
        inequality_holds: lhs >= rhs,
        solver: scalar_feasible(&nonrepetitive_coloring_condition(d, k as f64), SOLVER_TOLERANCE),
    })
}

/// Smallest `k` for which the series condition itself is feasible (the
/// closed form fixes `y` instead of optimising it).
pub fn nonrepetitive_chromatic_solver_min(delta: u64) -> Result<u64> {
    let bound = nonrepetitive_chromatic_bound(delta)?;
    let d = delta as f64;
    let feasible = |k: u64| scalar_feasible(&nonrepetitive_coloring_condition(d, k as f64), SOLVER_TOLERANCE).feasible;
    let (mut lo, mut hi) = (delta * delta, bound.k);
    if !feasible(hi) {
        return Err(Error::Precondition("series condition infeasible at the closed-form bound".into()));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcyclicResult {
    pub delta: u64,
    pub k: u64,
    /// True unless `k = 4(Δ-1)`, the palette the argument is written for.
    pub extrapolated: bool,
    #[serde(flatten)]
    pub result: FeasibilityResult,
}

/// `τ ≥ 1 + (rτ)⁴/(1 - (rτ)²) + 2(Δ-1)τ/k` with `r = (Δ-1)/k`, on `[1, 1/r)`.
pub fn acyclic_condition(delta: u64, k: u64) -> SeriesCondition<'static> {
    let r = (delta as f64 - 1.0) / k as f64;
    let s = 2.0 * (delta as f64 - 1.0) / k as f64;
    SeriesCondition::new(
        format!("tau >= 1 + (r tau)^4/(1 - (r tau)^2) + {s} tau with r = {r}"),
        1.0 / r,
        move |t| {
            let u = r * t;
            u.powi(4) / (1.0 - u * u) + s * t
        },
    )
    .with_derivative(move |t| {
        let u = r * t;
        let w = 1.0 - u * u;
        r * (4.0 * u.powi(3) - 2.0 * u.powi(5)) / (w * w) + s
    })
}

pub fn acyclic_feasible(delta: u64, k: u64) -> Result<AcyclicResult> {
    if delta < 2 || k < 1 {
        return Err(Error::Precondition("need Δ ≥ 2 and k ≥ 1".into()));
    }
    Ok(AcyclicResult {
        delta,
        k,
        extrapolated: k != 4 * (delta - 1),
        result: scalar_feasible(&acyclic_condition(delta, k), SOLVER_TOLERANCE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_examples() {
        let zero = SeriesCondition::new("0", f64::INFINITY, |_| 0.0);
        let r = scalar_feasible(&zero, 1e-12);
        assert!(r.feasible);
        assert_eq!((r.tau_star, r.margin), (1.0, 0.0));

        let quarter = SeriesCondition::new("t^2/4", f64::INFINITY, |t| t * t / 4.0);
        let r = scalar_feasible(&quarter, 1e-12);
        assert!(r.feasible);
        assert!((r.tau_star - 2.0).abs() < 1e-6, "{r:?}");
        assert!(r.margin.abs() < 1e-12);
        let with_dg = quarter.with_derivative(|t| t / 2.0);
        let r = scalar_feasible(&with_dg, 1e-12);
        assert!((r.tau_star - 2.0).abs() < 1e-12, "{r:?}");

        let square = SeriesCondition::new("t^2", f64::INFINITY, |t| t * t);
        let r = scalar_feasible(&square, 1e-12);
        assert!(!r.feasible);
        assert_eq!(r.peak_tau, 1.0);
        assert_eq!(r.margin, -1.0);
    }

    #[test]
    fn empty_domain_is_infeasible() {
        let c = SeriesCondition::new("", 1.0, |_| 0.0);
        assert!(!scalar_feasible(&c, 1e-12).feasible);
    }

    #[test]
    fn least_root_is_reported() {
        // h(τ) = τ - 1 - τ²/8 has roots 4 ± 2√2
        let c = SeriesCondition::new("", f64::INFINITY, |t| t * t / 8.0);
        let r = scalar_feasible(&c, 1e-12);
        assert!((r.tau_star - (4.0 - 8f64.sqrt())).abs() < 1e-12);
        assert!((r.peak_tau - 4.0).abs() < 1e-6);
        assert!((r.peak_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypcol_values() {
        let imp = hypergraph_two_coloring_max_degree(10, HypColVariant::Improved).unwrap();
        assert!((imp.bound - 512.0 / (9.0 * std::f64::consts::E)).abs() < 1e-12);
        assert_eq!(imp.max_d, 20);
        assert!(imp.solver_at_max_d.as_ref().unwrap().feasible);
        let crude = hypergraph_two_coloring_max_degree(10, HypColVariant::Crude).unwrap();
        assert_eq!(crude.max_d, 18);
        let exact = hypergraph_two_coloring_max_degree(10, HypColVariant::Exact).unwrap();
        let lll = hypergraph_two_coloring_max_degree(10, HypColVariant::Lll).unwrap();
        assert!(exact.bound >= lll.bound);
        assert_eq!(exact.solver_frontier, Some(exact.max_d));
        assert!(lll.solver_at_max_d.is_none());
        assert!(hypergraph_two_coloring_max_degree(1, HypColVariant::Exact).is_err());
    }

    #[test]
    fn nonrepetitive_sequence_examples() {
        let four = nonrepetitive_sequence_feasible(4.0).unwrap();
        assert!(four.feasible);
        assert!((four.tau_star - 2.0).abs() < 1e-9);
        assert!(four.margin.abs() < 1e-9);
        assert!(!nonrepetitive_sequence_feasible(3.0).unwrap().feasible);
        let hundred = nonrepetitive_sequence_feasible(100.0).unwrap();
        let want = (100.0 - 9600f64.sqrt()) / 2.0;
        assert!((hundred.tau_star - want).abs() < 1e-9);
        assert!(nonrepetitive_sequence_feasible(1.5).is_err());
    }

    #[test]
    fn chromatic_bound_delta_100() {
        let b = nonrepetitive_chromatic_bound(100).unwrap();
        assert_eq!(b.k, 15083);
        assert!(b.inequality_holds);
        assert!(b.solver.feasible);
        assert!(nonrepetitive_chromatic_bound(2).is_err());
        let min = nonrepetitive_chromatic_solver_min(100).unwrap();
        assert!(min <= b.k);
    }

    #[test]
    fn acyclic_examples() {
        let standard = acyclic_feasible(5, 16).unwrap();
        assert!(!standard.extrapolated);
        assert!(standard.result.feasible);
        let want = 2.0 * (5f64.sqrt() - 1.0);
        assert!((standard.result.tau_star - want).abs() < 1e-9, "{:?}", standard.result);
        assert!(standard.result.margin.abs() < 1e-9);
        assert!(!acyclic_feasible(5, 8).unwrap().result.feasible);
        let wide = acyclic_feasible(5, 400).unwrap();
        assert!(wide.extrapolated && wide.result.feasible);
        assert!(wide.result.tau_star < 1.05);
    }
}
