use std::collections::HashMap;

use super::{dot_matrix, merge_sparse, FlipFeatures, KernelMatrix};
use crate::error::Result;
use crate::graph::{all_pairs, Graph};

/// Shared label dictionary. Level-0 labels are group labels; refined labels are
/// keyed by (own label, sorted neighbour labels). Ids are global across levels.
#[derive(Default)]
struct Dictionary {
    initial: HashMap<u32, u32>,
    refined: HashMap<Box<[u32]>, u32>,
    next: u32,
}

impl Dictionary {
    fn initial(&mut self, label: u32) -> u32 {
        let next = &mut self.next;
        *self.initial.entry(label).or_insert_with(|| {
            *next += 1;
            *next - 1
        })
    }

    fn refined(&mut self, signature: &[u32]) -> u32 {
        if let Some(&id) = self.refined.get(signature) {
            return id;
        }
        let id = self.next;
        self.next += 1;
        self.refined.insert(signature.into(), id);
        id
    }

    fn len(&self) -> usize {
        self.next as usize
    }
}

fn signature(buf: &mut Vec<u32>, own: u32, neighbours: &[usize], prev: &[u32]) {
    buf.clear();
    buf.push(own);
    buf.extend(neighbours.iter().map(|&y| prev[y]));
    buf[1..].sort_unstable();
}

/// Labels at every level `0..=height`.
fn refine(g: &Graph, adj: &[Vec<usize>], height: usize, dict: &mut Dictionary) -> Vec<Vec<u32>> {
    let mut levels = Vec::with_capacity(height + 1);
    levels.push(g.labels().iter().map(|&l| dict.initial(l)).collect::<Vec<u32>>());
    let mut buf = Vec::new();
    for l in 1..=height {
        let prev = &levels[l - 1];
        let next = (0..g.n())
            .map(|w| {
                signature(&mut buf, prev[w], &adj[w], prev);
                dict.refined(&buf)
            })
            .collect();
        levels.push(next);
    }
    levels
}

/// WL label histograms of every graph in the list, indexed by shared label id.
pub fn wl_histograms(graphs: &[Graph], height: usize) -> Vec<Vec<f64>> {
    let mut dict = Dictionary::default();
    let labels: Vec<Vec<Vec<u32>>> =
        graphs.iter().map(|g| refine(g, &g.adjacency(), height, &mut dict)).collect();
    labels
        .iter()
        .map(|levels| {
            let mut h = vec![0.0; dict.len()];
            for level in levels {
                for &id in level {
                    h[id as usize] += 1.0;
                }
            }
            h
        })
        .collect()
}

/// `k(G, G') = Σ_{ℓ=0}^{h} ⟨φ_ℓ(G), φ_ℓ(G')⟩`, optionally cosine-normalised.
pub fn wl_kernel(graphs: &[Graph], height: usize, normalize: bool) -> Result<KernelMatrix> {
    dot_matrix(&wl_histograms(graphs, height), normalize)
}

fn remove(list: &mut Vec<usize>, x: usize) {
    if let Some(i) = list.iter().position(|&y| y == x) {
        list.swap_remove(i);
    }
}

/// Incremental refinement: after toggling pair (a, b), only vertices within
/// distance `ℓ - 1` of {a, b} can change label at level `ℓ`.
pub(super) fn flip_features(g: &Graph, height: usize, pairs: &[usize], normalize: bool) -> FlipFeatures {
    let n = g.n();
    let mut adj = g.adjacency();
    let mut dict = Dictionary::default();
    let base_labels = refine(g, &adj, height, &mut dict);
    let mut base = vec![0.0; dict.len()];
    for level in &base_labels {
        for &id in level {
            base[id as usize] += 1.0;
        }
    }

    let endpoints = all_pairs(n);
    let mut cur = base_labels.clone();
    let mut stamp = vec![0u32; n];
    let mut epoch = 0u32;
    let mut buf = Vec::new();
    let mut changed: Vec<usize> = Vec::new();
    let mut next_changed: Vec<usize> = Vec::new();
    let mut candidates: Vec<usize> = Vec::new();
    let mut touched: Vec<(usize, usize)> = Vec::new();
    let mut deltas = Vec::with_capacity(pairs.len());

    for &s in pairs {
        let (a, b) = endpoints[s];
        let present = g.bit(s);
        if present {
            remove(&mut adj[a], b);
            remove(&mut adj[b], a);
        } else {
            adj[a].push(b);
            adj[b].push(a);
        }

        let mut delta = Vec::new();
        changed.clear();
        for l in 1..=height {
            epoch += 1;
            candidates.clear();
            let mut mark = |w: usize, candidates: &mut Vec<usize>| {
                if stamp[w] != epoch {
                    stamp[w] = epoch;
                    candidates.push(w);
                }
            };
            mark(a, &mut candidates);
            mark(b, &mut candidates);
            for &w in &changed {
                mark(w, &mut candidates);
                for &y in &adj[w] {
                    mark(y, &mut candidates);
                }
            }
            next_changed.clear();
            for &w in &candidates {
                signature(&mut buf, cur[l - 1][w], &adj[w], &cur[l - 1]);
                let id = dict.refined(&buf);
                let old = base_labels[l][w];
                if id != old {
                    delta.push((old, -1.0));
                    delta.push((id, 1.0));
                    cur[l][w] = id;
                    next_changed.push(w);
                    touched.push((l, w));
                }
            }
            std::mem::swap(&mut changed, &mut next_changed);
        }
        for &(l, w) in &touched {
            cur[l][w] = base_labels[l][w];
        }
        touched.clear();

        if present {
            adj[a].push(b);
            adj[b].push(a);
        } else {
            remove(&mut adj[a], b);
            remove(&mut adj[b], a);
        }
        deltas.push(merge_sparse(delta));
    }
    FlipFeatures { base, deltas, normalize }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::perturbation_list;
    use crate::models::{irg_sample_with, EdgeProbabilities};
    use crate::rng::stream;

    #[test]
    fn edgeless_graphs_keep_one_label() {
        let graphs = vec![Graph::empty(3), Graph::empty(3)];
        let k = wl_kernel(&graphs, 2, false).unwrap();
        assert_eq!(k.get(0, 1), 27.0);
        let mut rng = stream(4, &[]);
        let p = EdgeProbabilities::uniform(6, 0.4).unwrap();
        let list: Vec<Graph> = (0..5).map(|_| irg_sample_with(&p, &mut rng)).collect();
        let k0 = wl_kernel(&list, 0, false).unwrap();
        assert!(k0.values().iter().all(|&x| x == 36.0));
    }

    #[test]
    fn incremental_flips_match_full_refinement() {
        let mut rng = stream(8, &[]);
        for (n, p) in [(6, 0.3), (9, 0.25), (12, 0.15)] {
            let probs = EdgeProbabilities::uniform(n, p).unwrap();
            let labels: Vec<u32> = (0..n).map(|i| 1 + (i % 2) as u32).collect();
            let g = irg_sample_with(&probs, &mut rng).with_labels(labels).unwrap();
            for height in 0..=3 {
                let pairs: Vec<usize> = (0..g.num_pairs()).collect();
                let ff = flip_features(&g, height, &pairs, false);
                let list = perturbation_list(&g);
                let k = wl_kernel(&list, height, false).unwrap();
                // ⟨Δ_s, Δ_t⟩ from both paths.
                let dot = |x: &[(u32, f64)], y: &[(u32, f64)]| -> f64 {
                    x.iter()
                        .map(|&(i, a)| y.iter().filter(|&&(j, _)| j == i).map(|&(_, b)| a * b).sum::<f64>())
                        .sum()
                };
                for s in 0..g.num_pairs() {
                    for t in [0, s, g.num_pairs() - 1] {
                        let full = k.get(s + 1, t + 1) - k.get(s + 1, 0) - k.get(0, t + 1) + k.get(0, 0);
                        assert_eq!(dot(&ff.deltas[s], &ff.deltas[t]), full);
                    }
                }
            }
        }
    }
}
