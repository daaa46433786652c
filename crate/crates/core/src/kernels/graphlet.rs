use super::{dot_matrix, merge_sparse, FlipFeatures, KernelMatrix};
use crate::error::{Error, Result};
use crate::graph::{all_pairs, Graph};

/// Counts of 3-vertex induced subgraphs with 0, 1, 2 and 3 edges.
pub fn graphlet_features(g: &Graph) -> Result<[f64; 4]> {
    let n = g.n();
    if n < 3 {
        return Err(Error::arg(format!("graphlet kernel needs n >= 3, got {n}")));
    }
    let mut counts = [0u64; 4];
    for a in 0..n {
        for b in a + 1..n {
            let ab = g.has_edge(a, b) as usize;
            for c in b + 1..n {
                counts[ab + g.has_edge(a, c) as usize + g.has_edge(b, c) as usize] += 1;
            }
        }
    }
    Ok(counts.map(|c| c as f64))
}

pub fn graphlet_kernel(graphs: &[Graph], normalize: bool) -> Result<KernelMatrix> {
    let features = graphs
        .iter()
        .map(|g| graphlet_features(g).map(|f| f.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    dot_matrix(&features, normalize)
}

/// Flipping (u, v) moves each triple {u, v, w} one class up or down.
pub(super) fn flip_features(g: &Graph, pairs: &[usize], normalize: bool) -> Result<FlipFeatures> {
    let base = graphlet_features(g)?.to_vec();
    let n = g.n();
    let adj = g.adjacency_matrix();
    let endpoints = all_pairs(n);
    let deltas = pairs
        .iter()
        .map(|&s| {
            let (u, v) = endpoints[s];
            let x = g.bit(s) as usize;
            let mut by_k = [0.0; 3];
            for w in (0..n).filter(|&w| w != u && w != v) {
                by_k[(adj[u * n + w] + adj[v * n + w]) as usize] += 1.0;
            }
            let mut delta = Vec::with_capacity(6);
            for (k, &t) in by_k.iter().enumerate() {
                if t > 0.0 {
                    delta.push(((k + x) as u32, -t));
                    delta.push(((k + 1 - x) as u32, t));
                }
            }
            merge_sparse(delta)
        })
        .collect();
    Ok(FlipFeatures { base, deltas, normalize })
}
