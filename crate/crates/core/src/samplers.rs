//! Randomized constructions for 2-colourings, nonrepetitive sequences and
//! acyclic edge colourings, with verifiers that share no state with them.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::structures::{Graph, Hypergraph, ListAssignment};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerReport {
    pub success: bool,
    pub resamples: u64,
    /// Random draws made.
    pub steps: u64,
    pub seed: u64,
}

/// `object` is present exactly when `report.success`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerOutcome<T> {
    pub object: Option<T>,
    pub report: SamplerReport,
}

/// Verifier result; `witness` is set whenever `valid` is false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verified<W> {
    pub valid: bool,
    pub witness: Option<W>,
}

impl<W> Verified<W> {
    fn ok() -> Self {
        Self {
            valid: true,
            witness: None,
        }
    }

    fn fail(w: W) -> Self {
        Self {
            valid: false,
            witness: Some(w),
        }
    }
}

/// Runs `f` once per seed.
pub fn batch<T, F>(exec: Execution, seeds: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    map_slice(exec, seeds, |&s| f(s))
}

/// Median resample count over successful and failed runs alike.
pub fn median_resamples(reports: &[SamplerReport]) -> Option<f64> {
    let mut r: Vec<u64> = reports.iter().map(|r| r.resamples).collect();
    if r.is_empty() {
        return None;
    }
    r.sort_unstable();
    let n = r.len();
    Some(if n % 2 == 1 {
        r[n / 2] as f64
    } else {
        (r[n / 2 - 1] + r[n / 2]) as f64 / 2.0
    })
}

/// Index of the first monochromatic edge, if any.
pub fn verify_proper_2coloring(h: &Hypergraph, colouring: &[bool]) -> Result<Verified<usize>> {
    if colouring.len() != h.vertex_count {
        return Err(Error::WeightArity {
            expected: h.vertex_count,
            got: colouring.len(),
        });
    }
    for (i, e) in h.edges.iter().enumerate() {
        let first = colouring[e[0]];
        if e.iter().all(|&v| colouring[v] == first) {
            return Ok(Verified::fail(i));
        }
    }
    Ok(Verified::ok())
}

/// Uniform random colouring; while some edge is monochromatic, recolour the
/// vertices of the lowest-indexed one.
pub fn mt_two_coloring(h: &Hypergraph, seed: u64, cap: u64) -> Result<SamplerOutcome<Vec<bool>>> {
    if h.vertex_count == 0 {
        return Err(Error::InvalidInput("hypergraph has no vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<bool> = (0..h.vertex_count).map(|_| rng.gen()).collect();
    let mut steps = h.vertex_count as u64;
    let mut resamples = 0;
    let mono = |c: &[bool]| {
        h.edges
            .iter()
            .position(|e| e.iter().all(|&v| c[v] == c[e[0]]))
    };
    while let Some(i) = mono(&c) {
        if resamples >= cap {
            return Ok(failure(resamples, steps, seed));
        }
        resamples += 1;
        for &v in &h.edges[i] {
            c[v] = rng.gen();
        }
        steps += h.edges[i].len() as u64;
    }
    assert!(verify_proper_2coloring(h, &c)?.valid);
    Ok(success(c, resamples, steps, seed))
}

/// `d`-regular `k`-uniform hypergraph on `n` vertices from a random pairing,
/// repaired by swaps until no edge repeats a vertex.
pub fn random_regular_uniform_hypergraph(n: usize, k: usize, d: usize, seed: u64) -> Result<Hypergraph> {
    if k == 0 || k > n || !(n * d).is_multiple_of(k) {
        return Err(Error::InvalidInput(format!(
            "no {d}-regular {k}-uniform hypergraph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    points.shuffle(&mut rng);
    let m = points.len() / k;
    let has_dup = |g: &[usize]| {
        let mut s = g.to_vec();
        s.sort_unstable();
        s.windows(2).any(|w| w[0] == w[1])
    };
    let limit = 1_000_000u64;
    let mut tries = 0u64;
    loop {
        let bad = (0..m).find(|&g| has_dup(&points[g * k..(g + 1) * k]));
        let Some(g) = bad else { break };
        if m == 1 {
            return Err(Error::InvalidInput("single edge must repeat a vertex".into()));
        }
        tries += 1;
        if tries > limit {
            return Err(Error::CapExhausted { cap: limit });
        }
        let grp = &points[g * k..(g + 1) * k];
        let a = (0..k)
            .find(|&i| grp[..i].contains(&grp[i]))
            .expect("duplicate exists");
        let mut h = rng.gen_range(0..m - 1);
        if h >= g {
            h += 1;
        }
        let b = rng.gen_range(0..k);
        let (pa, pb) = (g * k + a, h * k + b);
        let (va, vb) = (points[pa], points[pb]);
        let clash_g = (0..k).any(|i| i != a && points[g * k + i] == vb);
        let clash_h = (0..k).any(|i| i != b && points[h * k + i] == va);
        if !clash_g && !clash_h {
            points.swap(pa, pb);
        }
    }
    Hypergraph::new(n, points.chunks(k).map(|c| c.to_vec()).collect())
}

/// First `(s, t)` (1-based, by `s` then `t`) with `a_k = a_{k+t}` for
/// `s ≤ k ≤ s+t-1`.
pub fn is_nonrepetitive<T: PartialEq>(seq: &[T]) -> Verified<(usize, usize)> {
    let n = seq.len();
    for s in 0..n {
        for t in 1..=(n - s) / 2 {
            if (s..s + t).all(|k| seq[k] == seq[k + t]) {
                return Verified::fail((s + 1, t));
            }
        }
    }
    Verified::ok()
}

/// Smallest `t` such that the last `2t` symbols form a square.
fn shortest_square_suffix(seq: &[u32]) -> Option<usize> {
    let end = seq.len();
    (1..=end / 2).find(|&t| seq[end - 2 * t..end - t] == seq[end - t..])
}

/// Appends uniform symbols from `L_i`; a square created by the new symbol
/// is repaired by erasing its second half.
pub fn nonrep_sequence_build(lists: &ListAssignment, seed: u64, cap: u64) -> Result<SamplerOutcome<Vec<String>>> {
    let (ids, table) = lists.interned();
    let n = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq: Vec<u32> = Vec::with_capacity(n);
    let (mut steps, mut resamples) = (0u64, 0u64);
    while seq.len() < n {
        let i = seq.len();
        seq.push(*ids[i].choose(&mut rng).expect("lists are nonempty"));
        steps += 1;
        if let Some(t) = shortest_square_suffix(&seq) {
            if resamples >= cap {
                return Ok(failure(resamples, steps, seed));
            }
            resamples += 1;
            seq.truncate(seq.len() - t);
        }
    }
    let out: Vec<String> = seq.iter().map(|&s| table[s as usize].clone()).collect();
    assert!(is_nonrepetitive(&out).valid);
    assert!(respects_lists(lists, &out));
    Ok(success(out, resamples, steps, seed))
}

/// `a_i ∈ L_i` for every `i`.
pub fn respects_lists(lists: &ListAssignment, seq: &[String]) -> bool {
    seq.len() == lists.lists.len() && seq.iter().zip(&lists.lists).all(|(a, l)| l.contains(a))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcyclicWitness {
    /// Two edges sharing a vertex with the same colour.
    Adjacent(usize, usize),
    /// Edge indices of a cycle using two colours.
    Bichromatic(Vec<usize>),
}

/// Proper, and every two-coloured subgraph is a forest.
pub fn is_acyclic_edge_coloring(g: &Graph, colouring: &[usize]) -> Result<Verified<AcyclicWitness>> {
    if colouring.len() != g.edges.len() {
        return Err(Error::WeightArity {
            expected: g.edges.len(),
            got: colouring.len(),
        });
    }
    let mut at: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        for x in [u, v] {
            if let Some(&f) = at.get(&(x, colouring[e])) {
                return Ok(Verified::fail(AcyclicWitness::Adjacent(f, e)));
            }
            at.insert((x, colouring[e]), e);
        }
    }
    let mut by_colour: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, &c) in colouring.iter().enumerate() {
        by_colour.entry(c).or_default().push(e);
    }
    let classes: Vec<&Vec<usize>> = by_colour.values().collect();
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            if let Some(cycle) = find_cycle(g, a.iter().chain(b.iter()).copied()) {
                return Ok(Verified::fail(AcyclicWitness::Bichromatic(cycle)));
            }
        }
    }
    Ok(Verified::ok())
}

/// A cycle among `edges`, found by union-find and closed by a forest search.
fn find_cycle(g: &Graph, edges: impl Iterator<Item = usize>) -> Option<Vec<usize>> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    fn root(p: &mut HashMap<usize, usize>, x: usize) -> usize {
        let mut r = x;
        while let Some(&q) = p.get(&r) {
            if q == r {
                break;
            }
            r = q;
        }
        p.insert(x, r);
        r
    }
    let mut forest: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for e in edges {
        let (u, v) = g.edges[e];
        let (ru, rv) = (root(&mut parent, u), root(&mut parent, v));
        if ru == rv {
            let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
            let mut queue = VecDeque::from([u]);
            prev.insert(u, (u, usize::MAX));
            while let Some(x) = queue.pop_front() {
                if x == v {
                    break;
                }
                for &(y, f) in forest.get(&x).map_or(&[][..], |n| n) {
                    if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(y) {
                        slot.insert((x, f));
                        queue.push_back(y);
                    }
                }
            }
            let mut cycle = vec![e];
            let mut x = v;
            while x != u {
                let (p, f) = prev[&x];
                cycle.push(f);
                x = p;
            }
            return Some(cycle);
        }
        parent.insert(ru, rv);
        forest.entry(u).or_default().push((v, e));
        forest.entry(v).or_default().push((u, e));
    }
    None
}

/// Colours edges in order with a uniformly drawn colour free at both ends.
/// A colour closing a two-coloured cycle is undone and another one drawn;
/// when no colour fits, a random coloured neighbouring edge is uncoloured and
/// queued again.
pub fn ep_acyclic_edge_coloring(g: &Graph, k: usize, seed: u64, cap: u64) -> Result<SamplerOutcome<Vec<usize>>> {
    let delta = g.max_degree();
    if k < delta.max(1) {
        return Err(Error::Precondition(format!("{k} colours cannot colour edges at a vertex of degree {delta}")));
    }
    let adj = g.adjacency();
    let m = g.edges.len();
    let mut colour: Vec<Option<usize>> = vec![None; m];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queue: VecDeque<usize> = (0..m).collect();
    let (mut steps, mut resamples) = (0u64, 0u64);

    let edge_with = |colour: &[Option<usize>], x: usize, c: usize, skip: usize| {
        adj[x]
            .iter()
            .find(|&&(_, f)| f != skip && colour[f] == Some(c))
            .copied()
    };
    // a two-coloured path from u to v avoiding e closes a cycle with e
    let closes_cycle = |colour: &[Option<usize>], e: usize| {
        let (u, v) = g.edges[e];
        let c = colour[e].expect("edge is coloured");
        adj[u].iter().any(|&(_, f)| {
            let Some(c2) = colour[f].filter(|&c2| f != e && c2 != c) else {
                return false;
            };
            let (mut x, mut via, mut want) = (u, e, c2);
            for _ in 0..=m {
                match edge_with(colour, x, want, via) {
                    Some((y, f)) => {
                        if y == v {
                            return true;
                        }
                        x = y;
                        via = f;
                        want = if want == c { c2 } else { c };
                    }
                    None => return false,
                }
            }
            false
        })
    };

    while let Some(e) = queue.pop_front() {
        'retry: loop {
            let (u, v) = g.edges[e];
            let mut used = vec![false; k];
            for &(_, f) in adj[u].iter().chain(&adj[v]) {
                if let Some(c) = colour[f] {
                    used[c] = true;
                }
            }
            let mut cands: Vec<usize> = (0..k).filter(|&c| !used[c]).collect();
            while !cands.is_empty() {
                let c = cands.swap_remove(rng.gen_range(0..cands.len()));
                steps += 1;
                colour[e] = Some(c);
                if !closes_cycle(&colour, e) {
                    break 'retry;
                }
                colour[e] = None;
                if resamples >= cap {
                    return Ok(failure(resamples, steps, seed));
                }
                resamples += 1;
            }
            let coloured: Vec<usize> = adj[u]
                .iter()
                .chain(&adj[v])
                .map(|&(_, f)| f)
                .filter(|&f| f != e && colour[f].is_some())
                .collect();
            let Some(&f) = coloured.choose(&mut rng) else {
                return Ok(failure(resamples, steps, seed));
            };
            if resamples >= cap {
                return Ok(failure(resamples, steps, seed));
            }
            resamples += 1;
            steps += 1;
            colour[f] = None;
            queue.push_back(f);
        }
    }
    let out: Vec<usize> = colour.into_iter().map(|c| c.expect("all edges coloured")).collect();
    assert!(is_acyclic_edge_coloring(g, &out)?.valid);
    Ok(success(out, resamples, steps, seed))
}

/// Random graph with maximum degree at most `delta`: `n·delta` random pairs,
/// each kept when both ends still have room.
pub fn random_bounded_degree_graph(n: usize, delta: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0usize; n];
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    if n >= 2 {
        for _ in 0..n * delta {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u == v || deg[u] >= delta || deg[v] >= delta || !seen.insert((u.min(v), u.max(v))) {
                continue;
            }
            deg[u] += 1;
            deg[v] += 1;
            edges.push((u, v));
        }
    }
    Graph::new(n, edges).expect("generated graph is simple")
}

/// Searches every path with an even number of vertices, at most
/// `max_vertices`, for one whose colour sequence is a square. Fails once more
/// than `budget` paths have been visited.
pub fn is_nonrepetitive_coloring(
    g: &Graph,
    colouring: &[usize],
    max_vertices: usize,
    budget: u64,
) -> Result<Verified<Vec<usize>>> {
    if colouring.len() != g.vertex_count {
        return Err(Error::WeightArity {
            expected: g.vertex_count,
            got: colouring.len(),
        });
    }
    let adj = g.adjacency();
    let mut visited = 0u64;
    let mut on_path = vec![false; g.vertex_count];
    let mut path = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        adj: &[Vec<(usize, usize)>],
        colouring: &[usize],
        max: usize,
        budget: u64,
        visited: &mut u64,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
    ) -> Result<Option<Vec<usize>>> {
        *visited += 1;
        if *visited > budget {
            return Err(Error::EnumerationCap {
                outcomes: *visited as u128,
                cap: budget,
            });
        }
        let l = path.len();
        if l.is_multiple_of(2) && (0..l / 2).all(|i| colouring[path[i]] == colouring[path[i + l / 2]]) {
            return Ok(Some(path.clone()));
        }
        if l == max {
            return Ok(None);
        }
        let last = *path.last().expect("path is nonempty");
        for &(y, _) in &adj[last] {
            if !on_path[y] {
                on_path[y] = true;
                path.push(y);
                let found = dfs(adj, colouring, max, budget, visited, on_path, path)?;
                path.pop();
                on_path[y] = false;
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(None)
    }

    for s in 0..g.vertex_count {
        on_path[s] = true;
        path.push(s);
        let found = dfs(&adj, colouring, max_vertices.max(1), budget, &mut visited, &mut on_path, &mut path)?;
        path.pop();
        on_path[s] = false;
        if let Some(p) = found {
            return Ok(Verified::fail(p));
        }
    }
    Ok(Verified::ok())
}

fn success<T>(object: T, resamples: u64, steps: u64, seed: u64) -> SamplerOutcome<T> {
    SamplerOutcome {
        object: Some(object),
        report: SamplerReport {
            success: true,
            resamples,
            steps,
            seed,
        },
    }
}

fn failure<T>(resamples: u64, steps: u64, seed: u64) -> SamplerOutcome<T> {
    SamplerOutcome {
        object: None,
        report: SamplerReport {
            success: false,
            resamples,
            steps,
            seed,
        },
    }
}
