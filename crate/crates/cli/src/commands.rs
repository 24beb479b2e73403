use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lcl_core::choice::{
    check_expectation_condition, randomized_choice_search_many, ChoiceInstance, ChoiceSpec, MarginalWeights,
};
use lcl_core::digraph::{ArcWeights, DigraphSpec, EdgeSpec, MultiDigraph};
use lcl_core::engine::{FixedPointVerdict, LclInstance, NonrepInstance, SolveOptions, WeightReport};
use lcl_core::family::{
    check_family_condition, hypercube_digraph, least_tau_solution, validate_family, FamilyInstance, FamilySpec,
    TauAssignment, TauSystem, TauVerdict,
};
use lcl_core::lll::{auto_mu, check_lopsided, mu_to_tau, LllInstance, LllSpec, MuVerdict};
use lcl_core::probability::{validate_cut_model, ExactConfig, RiskEntry, RiskSpec, RiskTable};
use lcl_core::samplers::{
    batch, ep_acyclic_edge_coloring, is_acyclic_edge_coloring, is_nonrepetitive, median_resamples,
    mt_two_coloring, nonrep_sequence_build, random_bounded_degree_graph, random_regular_uniform_hypergraph,
    respects_lists, verify_proper_2coloring, SamplerReport,
};
use lcl_core::structures::{Graph, Hypergraph, ListAssignment};
use lcl_core::thresholds::{
    acyclic_feasible, critical_condition_check, critical_min_slack, critical_scalar_condition, greedy_peel,
    hypergraph_two_coloring_max_degree, nonrepetitive_chromatic_bound, nonrepetitive_sequence_feasible,
    CriticalParams, FeasibilityResult, HypColVariant, PeelOutcome,
};
use lcl_core::Error;

use crate::output::{Cell, Report, Status, Table};
use crate::Global;

const DEFAULT_ITER_CAP: u64 = 100_000;
const DEFAULT_SAMPLER_CAP: u64 = 1_000_000;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_hypergraph(path: &Path) -> Result<Hypergraph> {
    let h: Hypergraph = read_json(path)?;
    Ok(Hypergraph::new(h.vertex_count, h.edges)?)
}

fn read_graph(path: &Path) -> Result<Graph> {
    let g: Graph = read_json(path)?;
    Ok(Graph::new(g.vertex_count, g.edges)?)
}

fn read_lists(path: &Path) -> Result<ListAssignment> {
    let l: ListAssignment = read_json(path)?;
    Ok(ListAssignment::new(l.lists)?)
}

fn exact_config(g: &Global) -> ExactConfig {
    let mut cfg = ExactConfig {
        exec: g.exec(),
        ..ExactConfig::default()
    };
    if let Some(cap) = g.cap {
        cfg.cap = cap;
    }
    cfg
}

#[derive(Args, Debug)]
pub struct FileArgs {
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckLclArgs {
    /// Instance: digraph, risk table and optional arc weights.
    #[arg(required_unless_present = "nonrep_n")]
    pub file: Option<PathBuf>,
    /// Built-in nonrepetitive-sequence instance on this many positions.
    #[arg(long, conflicts_with = "file", requires = "list_size")]
    pub nonrep_n: Option<usize>,
    /// List size for the built-in nonrepetitive instance.
    #[arg(long)]
    pub list_size: Option<usize>,
    /// Risk assumed for reachable (edge, vertex) pairs absent from the table.
    #[arg(long, default_value_t = 1.0)]
    pub missing_risk: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LclFile {
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeSpec>,
    #[serde(default)]
    risks: Vec<RiskEntry>,
    /// Keyed by `"tail->head"`.
    #[serde(default)]
    weights: Option<BTreeMap<String, f64>>,
}

fn weight_table(r: &WeightReport, tol: f64) -> Table {
    let mut t = Table::new(&["arc", "weight", "margin", "feasible"]);
    for ((arc, w), m) in r.arcs.iter().zip(&r.weights).zip(&r.margins) {
        t.push(vec![arc.as_str().into(), (*w).into(), (*m).into(), (*m >= -tol).into()]);
    }
    t
}

pub fn check_lcl(g: &Global, a: &CheckLclArgs) -> Result<Report> {
    let (inst, weights) = match (&a.file, a.nonrep_n) {
        (_, Some(n)) => {
            let l = a.list_size.context("--list-size is required")?;
            (NonrepInstance::uniform(n, l)?.bound_instance(), None)
        }
        (Some(path), None) => {
            let f: LclFile = read_json(path)?;
            let d = MultiDigraph::from_spec(&DigraphSpec {
                vertices: f.vertices,
                edges: f.edges,
            })?;
            let risks = RiskTable::from_spec(&d, &RiskSpec { risks: f.risks }, a.missing_risk)?;
            (LclInstance::new(d, risks)?, f.weights)
        }
        (None, None) => bail!("an instance file or --nonrep-n is required"),
    };
    if let Some(map) = weights {
        let ds = inst.simple();
        let labels: Vec<String> = (0..ds.arc_count()).map(|x| ds.arc_label(x)).collect();
        if let Some(k) = map.keys().find(|k| !labels.contains(k)) {
            bail!("weight for unknown arc `{k}`");
        }
        let w = labels
            .iter()
            .map(|l| map.get(l).copied().ok_or_else(|| anyhow!("no weight for arc `{l}`")))
            .collect::<Result<Vec<_>>>()?;
        let report = inst.check_condition_with(&ArcWeights(w), g.tol, g.exec())?;
        let table = weight_table(&report, g.tol);
        let status = Status::from_bool(report.feasible);
        return Report::new(&json!({ "mode": "check", "report": report }), table, status);
    }
    let opts = SolveOptions {
        iter_cap: g.cap.unwrap_or(DEFAULT_ITER_CAP),
        report_tol: g.tol,
        exec: g.exec(),
        ..SolveOptions::default()
    };
    let verdict = inst.least_weight_solution(&opts)?;
    let (table, status) = match &verdict {
        FixedPointVerdict::Converged { report, .. } => (weight_table(report, g.tol), Status::from_bool(report.feasible)),
        FixedPointVerdict::Diverged { .. } => (weight_table_empty(), Status::Negative),
        FixedPointVerdict::Indeterminate { .. } => (weight_table_empty(), Status::Indeterminate),
    };
    Report::new(&json!({ "mode": "solve", "solution": verdict }), table, status)
}

fn weight_table_empty() -> Table {
    Table::new(&["arc", "weight", "margin", "feasible"])
}

pub fn check_family(g: &Global, a: &FileArgs) -> Result<Report> {
    let spec: FamilySpec = read_json(&a.file)?;
    let (inst, witnesses) = spec.build()?;
    let cfg = exact_config(g);
    let (tau, solution) = match &spec.tau {
        Some(t) => (TauAssignment(t.clone()), None),
        None => {
            let sys = TauSystem::from_witnesses(&inst, &witnesses)?;
            let v = least_tau_solution(&sys, 1e-12, g.cap.unwrap_or(DEFAULT_ITER_CAP), 1e9);
            match &v {
                TauVerdict::Converged { tau, .. } => (TauAssignment(tau.clone()), Some(v)),
                TauVerdict::Diverged { .. } | TauVerdict::Indeterminate { .. } => {
                    let status = if matches!(v, TauVerdict::Diverged { .. }) {
                        Status::Negative
                    } else {
                        Status::Indeterminate
                    };
                    let body = json!({ "mode": "solve", "tau_solution": v, "report": null });
                    return Report::new(&body, family_table_empty(), status);
                }
            }
        }
    };
    let report = check_family_condition(&inst, &tau, &witnesses, g.tol, &cfg)?;
    let mut table = family_table_empty();
    for e in &report.elements {
        table.push(vec![
            e.element.as_str().into(),
            e.tau.into(),
            e.margin.into(),
            (e.margin >= -g.tol).into(),
        ]);
    }
    let status = Status::from_bool(report.feasible);
    let mode = if solution.is_some() { "solve" } else { "check" };
    Report::new(&json!({ "mode": mode, "tau_solution": solution, "report": report }), table, status)
}

fn family_table_empty() -> Table {
    Table::new(&["element", "tau", "margin", "feasible"])
}

pub fn check_lll(g: &Global, a: &FileArgs) -> Result<Report> {
    let spec: LllSpec = read_json(&a.file)?;
    let mut table = Table::new(&["event", "p", "mu", "margin", "feasible"]);
    let (inst, search) = match &spec.mu {
        Some(_) => (LllInstance::from_spec(&spec)?, None),
        None => {
            let probe = LllInstance::from_spec(&LllSpec {
                mu: Some(vec![0.0; spec.n]),
                ..spec.clone()
            })?;
            let v = auto_mu(probe.probs(), probe.gamma(), g.cap.unwrap_or(DEFAULT_ITER_CAP))?;
            match &v {
                MuVerdict::Feasible { mu, .. } => (
                    LllInstance::new(probe.gamma().to_vec(), probe.probs().to_vec(), mu.clone())?,
                    Some(v),
                ),
                MuVerdict::Infeasible { .. } | MuVerdict::Indeterminate { .. } => {
                    let status = if matches!(v, MuVerdict::Infeasible { .. }) {
                        Status::Negative
                    } else {
                        Status::Indeterminate
                    };
                    let body = json!({ "mode": "solve", "mu_search": v, "report": null, "tau": null });
                    return Report::new(&body, table, status);
                }
            }
        }
    };
    let report = check_lopsided(&inst, g.tol);
    for (i, m) in report.margins.iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            inst.probs()[i].into(),
            inst.mu()[i].into(),
            (*m).into(),
            (*m >= -g.tol).into(),
        ]);
    }
    let tau = if report.feasible { Some(mu_to_tau(&inst, g.tol)?) } else { None };
    let status = Status::from_bool(report.feasible && tau.as_ref().is_some_and(|t| t.condition_holds));
    let mode = if search.is_some() { "solve" } else { "check" };
    Report::new(
        &json!({ "mode": mode, "mu_search": search, "report": report, "tau": tau }),
        table,
        status,
    )
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    #[command(subcommand)]
    pub app: App,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Variant {
    Lll,
    Exact,
    Crude,
    Improved,
}

impl From<Variant> for HypColVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Lll => HypColVariant::Lll,
            Variant::Exact => HypColVariant::Exact,
            Variant::Crude => HypColVariant::Crude,
            Variant::Improved => HypColVariant::Improved,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum App {
    /// Largest degree for which every k-uniform hypergraph is 2-colourable.
    Hypcol {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Variant::Improved)]
        variant: Variant,
    },
    /// Nonrepetitive sequences from lists of size L.
    NonrepSeq {
        #[arg(long = "L")]
        l: f64,
    },
    /// Colours sufficient for a nonrepetitive colouring at maximum degree Δ.
    NonrepChromatic {
        #[arg(long)]
        delta: u64,
    },
    /// Acyclic edge colouring with k colours at maximum degree Δ.
    Acyclic {
        #[arg(long)]
        delta: u64,
        /// Defaults to 4(Δ-1).
        #[arg(long)]
        k: Option<u64>,
    },
    /// Slack needed for critical hypergraphs with minimum degree k.
    Critical {
        #[arg(long)]
        k: f64,
        /// Defaults to 4√k.
        #[arg(long)]
        c: Option<f64>,
        /// Also check both requirements at this z.
        #[arg(long)]
        z: Option<f64>,
        /// τ used with --z; defaults to the solver's τ*.
        #[arg(long)]
        tau: Option<f64>,
    },
}

fn threshold_table(app: &str, bound: Option<f64>, value: Option<u64>, r: Option<&FeasibilityResult>, ok: bool) -> Table {
    let mut t = Table::new(&["app", "bound", "value", "tau_star", "margin", "feasible"]);
    t.push(vec![
        app.into(),
        bound.into(),
        value.into(),
        r.map(|r| r.tau_star).into(),
        r.map(|r| r.margin).into(),
        ok.into(),
    ]);
    t
}

pub fn threshold(_g: &Global, a: &ThresholdArgs) -> Result<Report> {
    match &a.app {
        App::Hypcol { k, variant } => {
            let b = hypergraph_two_coloring_max_degree(*k, (*variant).into())?;
            let ok = b.max_d >= 1 && b.solver_at_max_d.as_ref().is_none_or(|s| s.feasible);
            let table = threshold_table("hypcol", Some(b.bound), Some(b.max_d), b.solver_at_max_d.as_ref(), ok);
            Report::new(&b, table, Status::from_bool(ok))
        }
        App::NonrepSeq { l } => {
            let r = nonrepetitive_sequence_feasible(*l)?;
            let table = threshold_table("nonrep-seq", None, None, Some(&r), r.feasible);
            let status = Status::from_bool(r.feasible);
            Report::new(&json!({ "L": l, "result": r }), table, status)
        }
        App::NonrepChromatic { delta } => {
            let b = nonrepetitive_chromatic_bound(*delta)?;
            let ok = b.inequality_holds && b.solver.feasible;
            let table = threshold_table("nonrep-chromatic", Some(b.value), Some(b.k), Some(&b.solver), ok);
            Report::new(&b, table, Status::from_bool(ok))
        }
        App::Acyclic { delta, k } => {
            let k = k.unwrap_or(4 * delta.saturating_sub(1));
            let r = acyclic_feasible(*delta, k)?;
            let table = threshold_table("acyclic", None, Some(k), Some(&r.result), r.result.feasible);
            let status = Status::from_bool(r.result.feasible);
            Report::new(&r, table, status)
        }
        App::Critical { k, c, z, tau } => {
            let slack = critical_min_slack(*k)?;
            let c = c.unwrap_or(slack.default_c);
            let scalar = critical_scalar_condition(*k, c);
            let check = match z {
                Some(z) => Some(critical_condition_check(*k, c, tau.unwrap_or(scalar.tau_star), *z)?),
                None => None,
            };
            let ok = scalar.feasible && check.as_ref().is_none_or(|ch| ch.first_holds && ch.second_holds);
            let table = threshold_table("critical", Some(slack.c_min), None, Some(&scalar), ok);
            let body = json!({ "c": c, "slack": slack, "scalar": scalar, "check": check });
            Report::new(&body, table, Status::from_bool(ok))
        }
    }
}

#[derive(Args, Debug)]
pub struct ChoiceArgs {
    pub file: PathBuf,
    /// Weight for every element when the file has no weights.
    #[arg(long)]
    pub p: Option<f64>,
    /// Run the randomized search for an avoiding choice function.
    #[arg(long)]
    pub search: bool,
    /// Independent searches, seeded from --seed upwards.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
}

pub fn choice(g: &Global, a: &ChoiceArgs) -> Result<Report> {
    let spec: ChoiceSpec = read_json(&a.file)?;
    let inst = ChoiceInstance::from_spec(&spec)?;
    let w = match (&spec.weights, a.p) {
        (Some(map), None) => MarginalWeights::from_map(&inst, map)?,
        (None, Some(p)) => {
            let w = MarginalWeights::uniform(&inst, p);
            w.validate(&inst)?;
            w
        }
        (Some(_), Some(_)) => bail!("the file already has weights; drop --p"),
        (None, None) => bail!("no weights: add a `weights` map to the file or pass --p"),
    };
    let report = check_expectation_condition(&inst, &w, g.tol)?;
    if !a.search {
        let mut table = Table::new(&["universe", "tau", "expected_defect", "margin", "margin_normalised", "feasible"]);
        for (i, u) in report.universes.iter().enumerate() {
            table.push(vec![
                (i + 1).into(),
                u.tau.into(),
                u.expected_defect.into(),
                u.margin.into(),
                u.margin_normalised.into(),
                (u.margin >= -g.tol).into(),
            ]);
        }
        let status = Status::from_bool(report.feasible);
        return Report::new(&json!({ "expectation": report, "searches": null }), table, status);
    }
    if !report.feasible {
        let table = Table::new(&["seed", "success", "resamples"]);
        return Report::new(&json!({ "expectation": report, "searches": null }), table, Status::Negative);
    }
    let seeds: Vec<u64> = (0..a.runs).map(|r| g.seed.wrapping_add(r)).collect();
    let cap = g.cap.unwrap_or(DEFAULT_SAMPLER_CAP);
    let results = randomized_choice_search_many(&inst, &w, &seeds, cap, g.exec());
    let mut table = Table::new(&["seed", "success", "resamples"]);
    let mut runs = Vec::new();
    let mut exhausted = false;
    for (&seed, r) in seeds.iter().zip(results) {
        match r {
            Ok(s) => {
                table.push(vec![seed.into(), true.into(), s.resamples.into()]);
                runs.push(json!({ "seed": seed, "success": true, "resamples": s.resamples, "choice": s.choice.ids(&inst) }));
            }
            Err(Error::CapExhausted { cap }) => {
                exhausted = true;
                table.push(vec![seed.into(), false.into(), cap.into()]);
                runs.push(json!({ "seed": seed, "success": false, "resamples": cap, "choice": null }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let status = if exhausted { Status::Indeterminate } else { Status::Success };
    Report::new(&json!({ "expectation": report, "searches": runs }), table, status)
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(subcommand)]
    pub kind: SampleKind,
    /// Independent runs, seeded from --seed upwards.
    #[arg(long, global = true, default_value_t = 1)]
    pub runs: u64,
}

#[derive(Subcommand, Debug)]
pub enum SampleKind {
    /// Proper 2-colouring of a hypergraph by resampling.
    #[command(name = "2col")]
    TwoCol {
        /// Hypergraph file; otherwise a random regular uniform one per run.
        #[arg(long)]
        hypergraph: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Edge size of the generated hypergraph.
        #[arg(long, visible_alias = "k", default_value_t = 8)]
        uniform: usize,
        /// Vertex degree of the generated hypergraph.
        #[arg(long, default_value_t = 6)]
        d: usize,
    },
    /// Nonrepetitive sequence from lists.
    NonrepSeq {
        /// List-assignment file; otherwise n lists of size k.
        #[arg(long)]
        lists: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Acyclic edge colouring.
    Acyclic {
        /// Graph file; otherwise a random graph per run.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        delta: usize,
        /// Palette size; defaults to 4(Δ-1) for the graph's maximum degree Δ.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Serialize)]
struct Run {
    #[serde(flatten)]
    report: SamplerReport,
    /// Independent verifier verdict on the returned object.
    verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    object: Option<Value>,
}

fn finish_run<T: Serialize>(object: Option<T>, report: SamplerReport, verified: Option<bool>, keep: bool) -> Result<Run> {
    let object = match (keep, object) {
        (true, Some(o)) => Some(serde_json::to_value(o)?),
        _ => None,
    };
    Ok(Run {
        report,
        verified,
        object,
    })
}

fn acyclic_palette(g: &Graph, k: Option<usize>) -> usize {
    k.unwrap_or_else(|| 4 * g.max_degree().max(2).saturating_sub(1))
}

pub fn sample(g: &Global, a: &SampleArgs) -> Result<Report> {
    let seeds: Vec<u64> = (0..a.runs).map(|r| g.seed.wrapping_add(r)).collect();
    let cap = g.cap.unwrap_or(DEFAULT_SAMPLER_CAP);
    let keep = a.runs == 1;
    let runs: Vec<Result<Run>> = match &a.kind {
        SampleKind::TwoCol {
            hypergraph,
            n,
            uniform,
            d,
        } => {
            let fixed = hypergraph.as_deref().map(read_hypergraph).transpose()?;
            batch(g.exec(), &seeds, |s| {
                let h = match &fixed {
                    Some(h) => h.clone(),
                    None => random_regular_uniform_hypergraph(*n, *uniform, *d, s)?,
                };
                let out = mt_two_coloring(&h, s, cap)?;
                let verified = out.object.as_ref().map(|c| verify_proper_2coloring(&h, c)).transpose()?;
                finish_run(out.object, out.report, verified.map(|v| v.valid), keep)
            })
        }
        SampleKind::NonrepSeq { lists, n, k } => {
            let lists = match lists {
                Some(p) => read_lists(p)?,
                None => ListAssignment::new(ListAssignment::uniform_size(*n, *k).lists)?,
            };
            batch(g.exec(), &seeds, |s| {
                let out = nonrep_sequence_build(&lists, s, cap)?;
                let verified = out
                    .object
                    .as_ref()
                    .map(|seq| is_nonrepetitive(seq).valid && respects_lists(&lists, seq));
                finish_run(out.object, out.report, verified, keep)
            })
        }
        SampleKind::Acyclic { graph, n, delta, k } => {
            let fixed = graph.as_deref().map(read_graph).transpose()?;
            batch(g.exec(), &seeds, |s| {
                let gr = match &fixed {
                    Some(gr) => gr.clone(),
                    None => random_bounded_degree_graph(*n, *delta, s),
                };
                let out = ep_acyclic_edge_coloring(&gr, acyclic_palette(&gr, *k), s, cap)?;
                let verified = out.object.as_ref().map(|c| is_acyclic_edge_coloring(&gr, c)).transpose()?;
                finish_run(out.object, out.report, verified.map(|v| v.valid), keep)
            })
        }
    };
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["seed", "success", "resamples", "steps", "verified"]);
    for r in &runs {
        table.push(vec![
            r.report.seed.into(),
            r.report.success.into(),
            r.report.resamples.into(),
            r.report.steps.into(),
            r.verified.into(),
        ]);
    }
    let reports: Vec<SamplerReport> = runs.iter().map(|r| r.report.clone()).collect();
    let successes = runs.iter().filter(|r| r.report.success).count();
    let status = if runs.iter().any(|r| r.verified == Some(false)) {
        Status::Negative
    } else if successes < runs.len() {
        Status::Indeterminate
    } else {
        Status::Success
    };
    let body = json!({
        "runs": runs,
        "successes": successes,
        "median_resamples": median_resamples(&reports),
        "cap": cap,
    });
    Report::new(&body, table, status)
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(subcommand)]
    pub model: ModelKind,
}

#[derive(Subcommand, Debug)]
pub enum ModelKind {
    /// Nonrepetitive-sequence model on n positions with lists of size k.
    Nonrep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Hypergraph 2-colouring family and its hypercube reduction (at most 4 vertices).
    Hypcol {
        #[arg(long)]
        hypergraph: PathBuf,
        /// Constant τ for the reduction's weights.
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
    },
}

pub fn validate_model(g: &Global, a: &ValidateArgs) -> Result<Report> {
    let cfg = exact_config(g);
    let mut table = Table::new(&["model", "valid", "outcomes_checked"]);
    match &a.model {
        ModelKind::Nonrep { n, k } => {
            let inst = NonrepInstance::uniform(*n, *k)?;
            let v = validate_cut_model(inst.space(), &*inst.model(), &cfg)?;
            table.push(vec!["nonrep".into(), v.valid.into(), v.outcomes_checked.into()]);
            let status = Status::from_bool(v.valid);
            Report::new(&json!({ "model": "nonrep", "validation": v }), table, status)
        }
        ModelKind::Hypcol { hypergraph, tau } => {
            let h = read_hypergraph(hypergraph)?;
            let inst = FamilyInstance::hypergraph_two_coloring(&h)?;
            let family = validate_family(&inst, &cfg)?;
            let red = hypercube_digraph(&inst, &TauAssignment::constant(inst.element_count(), *tau))?;
            let (cut_valid, problem) = match red.lcl_instance(&cfg) {
                Ok(_) => (true, None),
                Err(Error::Precondition(msg)) => (false, Some(msg)),
                Err(e) => return Err(e.into()),
            };
            let valid = family.valid && cut_valid;
            table.push(vec!["hypcol".into(), valid.into(), family.outcomes_checked.into()]);
            let body = json!({
                "model": "hypcol",
                "family": family,
                "hypercube": {
                    "valid": cut_valid,
                    "problem": problem,
                    "vertices": red.digraph.vertex_count(),
                    "edges": red.digraph.edge_count(),
                },
                "valid": valid,
            });
            Report::new(&body, table, Status::from_bool(valid))
        }
    }
}

#[derive(Args, Debug)]
pub struct PeelArgs {
    #[arg(long)]
    pub hypergraph: PathBuf,
    #[arg(long)]
    pub k: f64,
    /// Defaults to 4√k.
    #[arg(long)]
    pub c: Option<f64>,
    /// Defaults to k/(4τ*) + 1 for the solver's τ*.
    #[arg(long)]
    pub z: Option<f64>,
}

pub fn peel(_g: &Global, a: &PeelArgs) -> Result<Report> {
    let h = read_hypergraph(&a.hypergraph)?;
    let c = a.c.unwrap_or(4.0 * a.k.sqrt());
    let z = match a.z {
        Some(z) => z,
        None => {
            let s = critical_scalar_condition(a.k, c);
            if !s.feasible {
                bail!("no τ satisfies the scalar condition at c = {c}; pass --z");
            }
            a.k / (4.0 * s.tau_star) + 1.0
        }
    };
    let params = CriticalParams::new(a.k, c, z)?;
    let result = greedy_peel(&h, &params)?;
    let mut table = Table::new(&["step", "vertex", "weight"]);
    for (i, s) in result.chain.iter().enumerate() {
        table.push(vec![(i + 1).into(), s.vertex.into(), Cell::Float(s.weight)]);
    }
    let ok = matches!(result.outcome, PeelOutcome::AllPeeled { certificate_holds: true, .. });
    Report::new(&json!({ "k": a.k, "c": c, "z": z, "result": result }), table, Status::from_bool(ok))
}
