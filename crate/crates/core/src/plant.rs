//! Density-preserving anomaly injection: planted hubs and planted cliques.

use std::collections::{BTreeMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream, Rng};

/// Default bound on neighbour re-draws per hub candidate.
pub const DEFAULT_RESAMPLE_TRIES: usize = 100;

/// How the hub's target degree is set from `t = max(1, ⌈k s_d⌉)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HubTarget {
    /// The hub is raised to degree `t`.
    #[default]
    Absolute,
    /// The hub's degree is raised by `t`.
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HubOptions {
    pub target: HubTarget,
    pub resample_tries: usize,
}

impl Default for HubOptions {
    fn default() -> Self {
        HubOptions { target: HubTarget::Absolute, resample_tries: DEFAULT_RESAMPLE_TRIES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkipReason {
    TooSparse,
    NoCandidates,
    AlreadyClique,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::TooSparse => "too-sparse",
            SkipReason::NoCandidates => "no-candidates",
            SkipReason::AlreadyClique => "already-clique",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantOutcome {
    pub graph: Graph,
    pub planted: bool,
    pub attempts: usize,
    pub skipped_reason: Option<SkipReason>,
    /// Hub vertices, or the clique's vertices, in ascending order.
    pub vertices: Vec<usize>,
}

impl PlantOutcome {
    fn unchanged(g: &Graph, attempts: usize, reason: SkipReason) -> Self {
        PlantOutcome { graph: g.clone(), planted: false, attempts, skipped_reason: Some(reason), vertices: Vec::new() }
    }
}

/// Sample standard deviation of the degree vector.
fn degree_sd(d: &[usize]) -> f64 {
    let n = d.len() as f64;
    if d.len() < 2 {
        return 0.0;
    }
    let mean = d.iter().sum::<usize>() as f64 / n;
    (d.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn unordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// One hub planting round, for the first vertex with degree `d_m`.
pub fn plant_hub_with(g: &Graph, d_m: usize, k: f64, opts: HubOptions, rng: &mut Rng) -> PlantOutcome {
    let degrees = g.degree_vector();
    let Some(hub) = degrees.iter().position(|&d| d == d_m) else {
        return PlantOutcome::unchanged(g, 1, SkipReason::NoCandidates);
    };
    let step = ((k * degree_sd(&degrees)).ceil() as i64).max(1);
    let n_new = match opts.target {
        HubTarget::Absolute => step - degrees[hub] as i64,
        HubTarget::Increment => step,
    };
    let adj = g.adjacency();
    let target_v: Vec<usize> = (0..g.n()).filter(|&v| v != hub && !g.has_edge(hub, v)).collect();
    if n_new <= 0 || target_v.is_empty() {
        return PlantOutcome::unchanged(g, 1, SkipReason::NoCandidates);
    }
    let labels = g.labels();
    let hub_label = labels[hub];
    let filtered: Vec<usize> =
        target_v.into_iter().filter(|&v| adj[v].iter().any(|&w| labels[w] == hub_label)).collect();
    if filtered.is_empty() {
        return PlantOutcome::unchanged(g, 1, SkipReason::NoCandidates);
    }
    let n_new = n_new as usize;
    let candidates: Vec<usize> = if filtered.len() <= n_new {
        filtered
    } else {
        filtered.choose_multiple(rng, n_new).copied().collect()
    };

    let mut to_del: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut new_nei = Vec::new();
    for v in candidates {
        let same_type: Vec<usize> = adj[v].iter().copied().filter(|&w| labels[w] == hub_label).collect();
        if same_type.is_empty() {
            continue;
        }
        let mut chosen = None;
        for _ in 0..opts.resample_tries.max(1) {
            let w = same_type[rng.random_range(0..same_type.len())];
            if !seen.contains(&unordered(v, w)) {
                chosen = Some(w);
                break;
            }
        }
        if let Some(w) = chosen {
            seen.insert(unordered(v, w));
            to_del.push((v, w));
            new_nei.push(v);
        }
    }
    if to_del.is_empty() || to_del.len() != new_nei.len() {
        return PlantOutcome::unchanged(g, 1, SkipReason::NoCandidates);
    }
    let mut out = g.clone();
    for &(a, b) in &to_del {
        out.set_edge(a, b, false);
    }
    for &v in &new_nei {
        out.set_edge(hub, v, true);
    }
    PlantOutcome { graph: out, planted: true, attempts: 1, skipped_reason: None, vertices: vec![hub] }
}

pub fn plant_hub(g: &Graph, d_m: usize, k: f64, seed: u64) -> PlantOutcome {
    plant_hub_with(g, d_m, k, HubOptions::default(), &mut stream(seed, &[]))
}

/// The `i`-th largest distinct degree (1-based).
fn ith_largest_unique_degree(g: &Graph, i: usize) -> Option<usize> {
    let mut d = g.degree_vector();
    d.sort_unstable_by(|a, b| b.cmp(a));
    d.dedup();
    d.get(i - 1).copied()
}

/// Up to `rounds` hub plantings, each at the next largest distinct degree.
pub fn plant_hubs_with(g: &Graph, rounds: usize, k: f64, opts: HubOptions, rng: &mut Rng) -> Result<PlantOutcome> {
    if rounds == 0 {
        return Err(Error::arg("at least one hub round is required"));
    }
    if !(k >= 1.0) {
        return Err(Error::arg(format!("degree scale {k} below 1")));
    }
    let mut current = g.clone();
    let mut planted = false;
    let mut attempts = 0;
    let mut hubs = Vec::new();
    let mut d_m = ith_largest_unique_degree(g, 1);
    let mut i = 1;
    while let Some(d) = d_m {
        if i > rounds {
            break;
        }
        let round = plant_hub_with(&current, d, k, opts, rng);
        attempts += 1;
        planted |= round.planted;
        hubs.extend(round.vertices);
        current = round.graph;
        i += 1;
        d_m = ith_largest_unique_degree(&current, i);
    }
    let skipped_reason = (!planted).then_some(SkipReason::NoCandidates);
    hubs.sort_unstable();
    hubs.dedup();
    Ok(PlantOutcome { graph: current, planted, attempts, skipped_reason, vertices: hubs })
}

pub fn plant_hubs(g: &Graph, rounds: usize, k: f64, seed: u64) -> Result<PlantOutcome> {
    plant_hubs_with(g, rounds, k, HubOptions::default(), &mut stream(seed, &[]))
}

/// Unordered pair of endpoint labels.
fn edge_type(labels: &[u32], u: usize, v: usize) -> (u32, u32) {
    let (a, b) = (labels[u], labels[v]);
    (a.min(b), a.max(b))
}

/// Plant a clique on `size` random vertices, moving existing edges of the
/// same types so that the count of each type is preserved. After `max_rep`
/// unsuccessful draws the empty graph is returned.
pub fn plant_clique_with(g: &Graph, size: usize, max_rep: usize, rng: &mut Rng) -> Result<PlantOutcome> {
    if size < 2 || size > g.n() {
        return Err(Error::arg(format!("clique size {size} outside 2..={}", g.n())));
    }
    if max_rep == 0 {
        return Err(Error::arg("max_rep must be at least 1"));
    }
    let labels = g.labels();
    let edges = g.edges();
    let vertices: Vec<usize> = (0..g.n()).collect();
    let mut counter = 0;
    loop {
        counter += 1;
        let mut sample: Vec<usize> = vertices.choose_multiple(rng, size).copied().collect();
        sample.sort_unstable();
        let mut clique = HashSet::new();
        let mut to_add = Vec::new();
        for (i, &a) in sample.iter().enumerate() {
            for &b in &sample[i + 1..] {
                clique.insert((a, b));
                if !g.has_edge(a, b) {
                    to_add.push((a, b));
                }
            }
        }
        if to_add.is_empty() {
            let mut out = PlantOutcome::unchanged(g, counter, SkipReason::AlreadyClique);
            out.vertices = sample;
            return Ok(out);
        }
        let mut needed: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for &(a, b) in &to_add {
            *needed.entry(edge_type(labels, a, b)).or_default() += 1;
        }
        let mut deletable: BTreeMap<(u32, u32), Vec<(usize, usize)>> = BTreeMap::new();
        for &(a, b) in edges.iter().filter(|e| !clique.contains(e)) {
            deletable.entry(edge_type(labels, a, b)).or_default().push((a, b));
        }
        let enough = needed.iter().all(|(t, &c)| deletable.get(t).map_or(0, Vec::len) >= c);
        if enough {
            let mut out = g.clone();
            for (t, &c) in &needed {
                let pool = deletable.get_mut(t).expect("type checked above");
                pool.shuffle(rng);
                for &(a, b) in &pool[..c] {
                    out.set_edge(a, b, false);
                }
            }
            for &(a, b) in &to_add {
                out.set_edge(a, b, true);
            }
            return Ok(PlantOutcome {
                graph: out,
                planted: true,
                attempts: counter,
                skipped_reason: None,
                vertices: sample,
            });
        }
        if counter >= max_rep {
            let empty = Graph::empty(g.n()).with_labels(labels.to_vec())?;
            return Ok(PlantOutcome {
                graph: empty,
                planted: false,
                attempts: counter,
                skipped_reason: Some(SkipReason::TooSparse),
                vertices: Vec::new(),
            });
        }
    }
}

pub fn plant_clique(g: &Graph, size: usize, max_rep: usize, seed: u64) -> Result<PlantOutcome> {
    plant_clique_with(g, size, max_rep, &mut stream(seed, &[]))
}

/// Edge counts per unordered label pair.
pub fn edge_type_counts(g: &Graph) -> BTreeMap<(u32, u32), usize> {
    let mut out = BTreeMap::new();
    for (a, b) in g.edges() {
        *out.entry(edge_type(g.labels(), a, b)).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{irg_sample, ErmmParams};

    fn ermm_sample(seed: u64) -> Graph {
        let params = ErmmParams::blockwise(&[8, 22], vec![vec![0.29, 0.01], vec![0.01, 0.22]]).unwrap();
        irg_sample(&params.probabilities(), seed).with_labels(params.labels).unwrap()
    }

    #[test]
    fn complete_graph_is_left_alone() {
        let g = Graph::complete(6);
        let out = plant_hubs(&g, 3, 2.0, 1).unwrap();
        assert_eq!(out.graph, g);
        assert!(!out.planted);
    }

    #[test]
    fn hubs_preserve_edge_count() {
        for seed in 0..30 {
            let g = ermm_sample(seed);
            let out = plant_hubs(&g, 6, 3.0, seed).unwrap();
            assert_eq!(out.graph.edge_count(), g.edge_count());
            assert_eq!(out.graph.labels(), g.labels());
        }
    }

    #[test]
    fn hub_degree_rises_to_at_most_target() {
        let g = Graph::from_edges(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 5)]).unwrap();
        let d = g.degree_vector();
        let target = (4.0 * degree_sd(&d)).ceil() as usize;
        let hub = d.iter().position(|&x| x == 1).unwrap();
        let out = plant_hub(&g, 1, 4.0, 3);
        let after = out.graph.degree_vector()[hub];
        assert!(after >= d[hub] && after <= target.max(d[hub]));
        assert_eq!(out.graph.edge_count(), g.edge_count());
    }

    #[test]
    fn increment_target_raises_the_maximum() {
        let g = ermm_sample(5);
        let before = *g.degree_vector().iter().max().unwrap();
        let opts = HubOptions { target: HubTarget::Increment, ..HubOptions::default() };
        let out = plant_hub_with(&g, before, 3.0, opts, &mut stream(2, &[]));
        assert!(out.planted);
        assert!(*out.graph.degree_vector().iter().max().unwrap() > before);
        assert_eq!(out.graph.edge_count(), g.edge_count());
    }

    #[test]
    fn target_equal_to_current_degree_returns_input() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let out = plant_hub(&g, 1, 1.0, 0);
        assert_eq!(out.graph, g);
        assert!(!out.planted);
    }

    #[test]
    fn clique_preserves_type_counts() {
        let mut successes = 0;
        for seed in 0..40 {
            let g = ermm_sample(seed);
            let out = plant_clique(&g, 4, 50, seed).unwrap();
            if out.planted {
                successes += 1;
                assert_eq!(edge_type_counts(&out.graph), edge_type_counts(&g));
            }
        }
        assert!(successes > 0);
    }

    #[test]
    fn planted_vertices_form_a_clique() {
        let p = crate::models::EdgeProbabilities::uniform(30, 0.2).unwrap();
        let g = irg_sample(&p, 12);
        let out = plant_clique(&g, 6, 20, 5).unwrap();
        assert!(out.planted);
        let added: Vec<(usize, usize)> =
            out.graph.edges().into_iter().filter(|&(a, b)| !g.has_edge(a, b)).collect();
        assert!(added.iter().all(|&(a, b)| out.vertices.contains(&a) && out.vertices.contains(&b)));
        assert_eq!(out.vertices.len(), 6);
        for (i, &a) in out.vertices.iter().enumerate() {
            for &b in &out.vertices[i + 1..] {
                assert!(out.graph.has_edge(a, b));
            }
        }
        assert_eq!(out.graph.edge_count(), g.edge_count());
    }

    #[test]
    fn sparse_graph_gives_the_empty_sentinel() {
        let g = Graph::from_edges(10, &[(0, 1), (2, 3)]).unwrap();
        let out = plant_clique(&g, 4, 5, 1).unwrap();
        assert!(!out.planted);
        assert_eq!(out.skipped_reason, Some(SkipReason::TooSparse));
        assert_eq!(out.graph.edge_count(), 0);
        assert_eq!(out.attempts, 5);
    }

    #[test]
    fn existing_clique_is_returned() {
        let out = plant_clique(&Graph::complete(5), 3, 5, 1).unwrap();
        assert_eq!(out.skipped_reason, Some(SkipReason::AlreadyClique));
        assert_eq!(out.graph, Graph::complete(5));
    }
}
