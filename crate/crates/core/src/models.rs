//! Edge-probability models, samplers and estimators.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_pairs, pair_count, Graph};
use crate::rng::{stream, Rng};

/// Per-pair edge probabilities of an inhomogeneous random graph, in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbabilities {
    n: usize,
    p: Vec<f64>,
}

impl EdgeProbabilities {
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != pair_count(n) {
            return Err(Error::arg(format!(
                "{} probabilities given for {} pairs",
                p.len(),
                pair_count(n)
            )));
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::arg(format!("probability {bad} outside [0, 1]")));
        }
        Ok(EdgeProbabilities { n, p })
    }

    /// Erdős–Rényi probabilities.
    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        Self::new(n, vec![p; pair_count(n)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, s: usize) -> f64 {
        self.p[s]
    }

    /// Symmetric `n × n` matrix (row-major) with zero diagonal.
    pub fn to_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (s, (u, v)) in all_pairs(n).into_iter().enumerate() {
            m[u * n + v] = self.p[s];
            m[v * n + u] = self.p[s];
        }
        m
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::arg(format!(
                "graph has {} vertices, probabilities are for {}",
                g.n(),
                self.n
            )));
        }
        Ok(())
    }

    /// Log-likelihood of `g`, with `0 · log 0 = 0`. Returns `-inf` when a
    /// probability of 0 or 1 contradicts the observed indicator.
    pub fn log_likelihood(&self, g: &Graph) -> f64 {
        self.p
            .iter()
            .zip(g.bits())
            .map(|(&p, &x)| {
                let q = if x { p } else { 1.0 - p };
                if q == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    q.ln()
                }
            })
            .sum()
    }
}

/// Group labels `1..=L` assigned blockwise from group sizes.
pub fn blockwise_labels(sizes: &[usize]) -> Vec<u32> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &k)| std::iter::repeat_n(g as u32 + 1, k))
        .collect()
}

fn check_block_matrix(q: &[Vec<f64>], groups: usize, prob: bool) -> Result<()> {
    if q.len() != groups || q.iter().any(|r| r.len() != groups) {
        return Err(Error::arg(format!("block matrix must be {groups} × {groups}")));
    }
    for i in 0..groups {
        for j in 0..groups {
            let x = q[i][j];
            if (x - q[j][i]).abs() > 1e-12 {
                return Err(Error::arg("block matrix must be symmetric"));
            }
            if !(x >= 0.0 && (!prob || x <= 1.0)) {
                return Err(Error::arg(format!("block entry {x} out of range")));
            }
        }
    }
    Ok(())
}

fn check_labels(labels: &[u32], groups: usize) -> Result<()> {
    if let Some(&l) = labels.iter().find(|&&l| l == 0 || l as usize > groups) {
        return Err(Error::arg(format!("label {l} outside 1..={groups}")));
    }
    Ok(())
}

/// Erdős–Rényi mixture model: block matrix `q` over known group labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmmParams {
    pub labels: Vec<u32>,
    pub q: Vec<Vec<f64>>,
}

impl ErmmParams {
    pub fn new(labels: Vec<u32>, q: Vec<Vec<f64>>) -> Result<Self> {
        check_block_matrix(&q, q.len(), true)?;
        check_labels(&labels, q.len())?;
        Ok(ErmmParams { labels, q })
    }

    /// Groups of the given sizes in vertex order.
    pub fn blockwise(sizes: &[usize], q: Vec<Vec<f64>>) -> Result<Self> {
        if sizes.len() != q.len() || sizes.contains(&0) {
            return Err(Error::arg("one positive size per block is required"));
        }
        Self::new(blockwise_labels(sizes), q)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.q.len()];
        for &l in &self.labels {
            sizes[l as usize - 1] += 1;
        }
        sizes
    }

    /// Number of free block parameters, `L(L+1)/2`.
    pub fn free_parameters(&self) -> usize {
        let l = self.q.len();
        l * (l + 1) / 2
    }

    pub fn probabilities(&self) -> EdgeProbabilities {
        let n = self.n();
        let p = all_pairs(n)
            .into_iter()
            .map(|(u, v)| self.q[self.labels[u] as usize - 1][self.labels[v] as usize - 1])
            .collect();
        EdgeProbabilities { n, p }
    }
}

/// Degree-corrected blockmodel with the Bernoulli-Poisson link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcsbmParams {
    pub theta: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub labels: Vec<u32>,
}

impl DcsbmParams {
    pub fn new(theta: Vec<f64>, q: Vec<Vec<f64>>, labels: Vec<u32>) -> Result<Self> {
        check_block_matrix(&q, q.len(), false)?;
        check_labels(&labels, q.len())?;
        if theta.len() != labels.len() {
            return Err(Error::arg("theta and labels differ in length"));
        }
        if theta.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::arg("theta must be non-negative"));
        }
        Ok(DcsbmParams { theta, q, labels })
    }

    /// `p_uv = 1 - exp(-θ_u θ_v Q[g_u][g_v])`.
    pub fn probabilities(&self) -> EdgeProbabilities {
        let n = self.theta.len();
        let p = all_pairs(n)
            .into_iter()
            .map(|(u, v)| {
                let rate = self.theta[u]
                    * self.theta[v]
                    * self.q[self.labels[u] as usize - 1][self.labels[v] as usize - 1];
                -(-rate).exp_m1()
            })
            .collect();
        EdgeProbabilities { n, p }
    }
}

/// Chung-Lu model: `p_ij = min(1, w_i w_j / Σ w)`.
pub fn chung_lu_probabilities(w: &[f64]) -> Result<EdgeProbabilities> {
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::arg("Chung-Lu weights must be positive"));
    }
    let total: f64 = w.iter().sum();
    let n = w.len();
    let p = all_pairs(n).into_iter().map(|(i, j)| (w[i] * w[j] / total).min(1.0)).collect();
    Ok(EdgeProbabilities { n, p })
}

/// Log-linear blockmodel `p_uv = exp(β_u + β_v + α[g_u][g_v])`, capped at 1.
pub fn log_linear_probabilities(
    beta: &[f64],
    alpha: &[Vec<f64>],
    labels: &[u32],
) -> Result<EdgeProbabilities> {
    check_labels(labels, alpha.len())?;
    if beta.len() != labels.len() {
        return Err(Error::arg("beta and labels differ in length"));
    }
    let n = beta.len();
    let p = all_pairs(n)
        .into_iter()
        .map(|(u, v)| {
            let a = alpha[labels[u] as usize - 1][labels[v] as usize - 1];
            (beta[u] + beta[v] + a).exp().min(1.0)
        })
        .collect();
    Ok(EdgeProbabilities { n, p })
}

/// Sample each pair independently.
pub fn irg_sample_with(p: &EdgeProbabilities, rng: &mut Rng) -> Graph {
    let x = p.p.iter().map(|&q| rng.random::<f64>() < q).collect();
    Graph::from_bits(p.n, x).expect("length matches by construction")
}

pub fn irg_sample(p: &EdgeProbabilities, seed: u64) -> Graph {
    irg_sample_with(p, &mut stream(seed, &[]))
}

/// Non-linear preferential attachment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlpaParams {
    pub m: usize,
    pub alpha: f64,
    pub m0: usize,
}

impl NlpaParams {
    /// Seed ring on `max(m, 2)` vertices.
    pub fn new(m: usize, alpha: f64) -> Self {
        NlpaParams { m, alpha, m0: m.max(2) }
    }
}

/// Grow a graph from a ring on `m0` vertices; each arriving vertex links to
/// `m` distinct existing vertices drawn without replacement with weight `k^α`.
pub fn nlpa_sample(n: usize, params: NlpaParams, rng: &mut Rng) -> Result<Graph> {
    let NlpaParams { m, alpha, m0 } = params;
    if m == 0 || m0 < m || m0 < 2 || n <= m0 || !(alpha >= 0.0) {
        return Err(Error::arg(format!(
            "invalid attachment parameters m = {m}, m0 = {m0}, alpha = {alpha}, n = {n}"
        )));
    }
    let mut g = Graph::empty(n);
    let mut degree = vec![0usize; n];
    let link = |g: &mut Graph, degree: &mut [usize], a: usize, b: usize| {
        g.set_edge(a, b, true);
        degree[a] += 1;
        degree[b] += 1;
    };
    if m0 == 2 {
        link(&mut g, &mut degree, 0, 1);
    } else {
        for i in 0..m0 {
            link(&mut g, &mut degree, i, (i + 1) % m0);
        }
    }
    let mut weights = Vec::with_capacity(n);
    for t in m0..n {
        weights.clear();
        weights.extend(degree[..t].iter().map(|&k| (k as f64).powf(alpha)));
        let mut chosen = Vec::with_capacity(m);
        for _ in 0..m {
            let total: f64 = weights.iter().sum();
            let target = if total > 0.0 {
                let mut r = rng.random::<f64>() * total;
                let mut pick = None;
                for (i, &w) in weights.iter().enumerate() {
                    if w > 0.0 {
                        pick = Some(i);
                        if r < w {
                            break;
                        }
                        r -= w;
                    }
                }
                pick.expect("positive total weight")
            } else {
                let open: Vec<usize> = (0..t).filter(|i| !chosen.contains(i)).collect();
                open[rng.random_range(0..open.len())]
            };
            weights[target] = 0.0;
            chosen.push(target);
        }
        for &c in &chosen {
            link(&mut g, &mut degree, t, c);
        }
    }
    Ok(g)
}

/// Estimated blockmodel and the block pairs that had no possible vertex pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmmFit {
    pub params: ErmmParams,
    pub undefined_blocks: Vec<(usize, usize)>,
}

fn block_edge_counts(g: &Graph, groups: usize) -> Vec<Vec<usize>> {
    let labels = g.labels();
    let mut e = vec![vec![0usize; groups]; groups];
    for (u, v) in g.edges() {
        let (a, b) = (labels[u] as usize - 1, labels[v] as usize - 1);
        e[a][b] += 1;
        if a != b {
            e[b][a] += 1;
        }
    }
    e
}

/// Number of vertex pairs between blocks `i` and `j`.
pub fn block_pair_counts(sizes: &[usize]) -> Vec<Vec<usize>> {
    let l = sizes.len();
    let mut out = vec![vec![0; l]; l];
    for i in 0..l {
        for j in 0..l {
            out[i][j] = if i == j { pair_count(sizes[i]) } else { sizes[i] * sizes[j] };
        }
    }
    out
}

/// Maximum likelihood block probabilities for the graph's own labels.
pub fn ermm_mle(g: &Graph) -> ErmmFit {
    let groups = g.group_count();
    let e = block_edge_counts(g, groups);
    let mut sizes = vec![0; groups];
    for &l in g.labels() {
        sizes[l as usize - 1] += 1;
    }
    let pairs = block_pair_counts(&sizes);
    let mut q = vec![vec![0.0; groups]; groups];
    let mut undefined_blocks = Vec::new();
    for i in 0..groups {
        for j in 0..groups {
            if pairs[i][j] == 0 {
                if i <= j {
                    undefined_blocks.push((i, j));
                }
            } else {
                q[i][j] = e[i][j] as f64 / pairs[i][j] as f64;
            }
        }
    }
    ErmmFit { params: ErmmParams { labels: g.labels().to_vec(), q }, undefined_blocks }
}

/// Estimated degree-corrected blockmodel and blocks with zero total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DcsbmFit {
    pub params: DcsbmParams,
    pub zero_degree_blocks: Vec<usize>,
}

/// Karrer–Newman estimates: `Q[r][s] = Σ_{u∈r, v∈s} A_uv + eps` (so diagonal
/// entries count within-block edges twice) and `θ_u = d_u / Σ_{v∈g_u} d_v`.
pub fn dcsbm_estimate(g: &Graph, eps: f64) -> DcsbmFit {
    let groups = g.group_count();
    let labels = g.labels();
    let e = block_edge_counts(g, groups);
    let q: Vec<Vec<f64>> = (0..groups)
        .map(|i| {
            (0..groups)
                .map(|j| if i == j { 2 * e[i][j] } else { e[i][j] } as f64 + eps)
                .collect()
        })
        .collect();
    let degree = g.degree_vector();
    let mut block_total = vec![0usize; groups];
    for (u, &d) in degree.iter().enumerate() {
        block_total[labels[u] as usize - 1] += d;
    }
    let theta = degree
        .iter()
        .enumerate()
        .map(|(u, &d)| {
            let t = block_total[labels[u] as usize - 1];
            if t == 0 {
                0.0
            } else {
                d as f64 / t as f64
            }
        })
        .collect();
    let present: Vec<bool> = (1..=groups as u32).map(|l| labels.contains(&l)).collect();
    let zero_degree_blocks =
        (0..groups).filter(|&b| present[b] && block_total[b] == 0).collect();
    DcsbmFit {
        params: DcsbmParams { theta, q, labels: labels.to_vec() },
        zero_degree_blocks,
    }
}

/// One draw of the log-linear degree-corrected experiment model with
/// `β_u = ln U_u`, `U_u ~ Unif(0, 1)`.
pub fn log_linear_dcsbm_draw(
    alpha: &[Vec<f64>],
    labels: &[u32],
    rng: &mut Rng,
) -> Result<EdgeProbabilities> {
    let beta: Vec<f64> = labels.iter().map(|_| (1.0 - rng.random::<f64>()).ln()).collect();
    log_linear_probabilities(&beta, alpha, labels)
}

/// Blockmodel matching the mean of [`log_linear_dcsbm_draw`]: `0.25 · e^α`.
pub fn log_linear_dcsbm_proxy(alpha: &[Vec<f64>], labels: &[u32]) -> Result<ErmmParams> {
    let q = alpha.iter().map(|r| r.iter().map(|a| 0.25 * a.exp()).collect()).collect();
    ErmmParams::new(labels.to_vec(), q)
}

/// Block log-odds of the first degree-corrected experiment.
pub fn dcsbm_alpha_assortative() -> Vec<Vec<f64>> {
    vec![vec![0.6f64.ln(), 0.2f64.ln()], vec![0.2f64.ln(), 0.6f64.ln()]]
}

/// Block log-odds of the second degree-corrected experiment.
pub fn dcsbm_alpha_unbalanced() -> Vec<Vec<f64>> {
    vec![vec![0.6f64.ln(), 0.1f64.ln()], vec![0.1f64.ln(), 0.3f64.ln()]]
}

/// Chung-Lu weights drawn uniformly from `[lo, hi]`.
pub fn uniform_weights(n: usize, lo: f64, hi: f64, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn er_special_case() {
        let p = ErmmParams::blockwise(&[30], vec![vec![0.06]]).unwrap().probabilities();
        assert_eq!(p.len(), 435);
        assert!(p.as_slice().iter().all(|&x| x == 0.06));
    }

    #[test]
    fn two_singletons_give_the_off_diagonal() {
        let q = vec![vec![0.1, 0.2], vec![0.2, 0.3]];
        let p = ErmmParams::blockwise(&[1, 1], q).unwrap().probabilities();
        assert_eq!(p.as_slice(), &[0.2]);
    }

    #[test]
    fn unbalanced_two_block_counts() {
        let q = vec![vec![0.29, 0.01], vec![0.01, 0.22]];
        let p = ErmmParams::blockwise(&[8, 22], q).unwrap().probabilities();
        let count = |v: f64| p.as_slice().iter().filter(|&&x| x == v).count();
        assert_eq!((count(0.29), count(0.22), count(0.01)), (28, 231, 176));
    }

    #[test]
    fn ermm_rejects_asymmetric_and_bad_labels() {
        assert!(ErmmParams::blockwise(&[2, 2], vec![vec![0.1, 0.2], vec![0.3, 0.1]]).is_err());
        assert!(ErmmParams::new(vec![1, 3], vec![vec![0.1]]).is_err());
        assert!(ErmmParams::blockwise(&[2], vec![vec![1.5]]).is_err());
    }

    #[test]
    fn dcsbm_link() {
        let zero = DcsbmParams::new(vec![0.0; 4], vec![vec![5.0]], vec![1; 4]).unwrap();
        assert!(zero.probabilities().as_slice().iter().all(|&x| x == 0.0));
        let half = DcsbmParams::new(vec![1.0, 1.0], vec![vec![2f64.ln()]], vec![1, 1]).unwrap();
        assert!((half.probabilities().get(0) - 0.5).abs() < 1e-15);
        let tiny = DcsbmParams::new(vec![1e-3, 1e-3], vec![vec![1.0]], vec![1, 1]).unwrap();
        assert!((tiny.probabilities().get(0) - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn chung_lu() {
        let p = chung_lu_probabilities(&[3.0; 6]).unwrap();
        assert!(p.as_slice().iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let capped = chung_lu_probabilities(&[2.0, 8.0]).unwrap();
        assert_eq!(capped.as_slice(), &[1.0]);
        let mut rng = stream(3, &[]);
        for _ in 0..20 {
            let w = uniform_weights(30, 2.0, 8.0, &mut rng);
            let p = chung_lu_probabilities(&w).unwrap();
            assert!(p.as_slice().iter().all(|&x| x > 0.0 && x <= 64.0 / 60.0));
        }
        assert!(chung_lu_probabilities(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn sampling_extremes() {
        let n = 7;
        assert_eq!(irg_sample(&EdgeProbabilities::uniform(n, 0.0).unwrap(), 1), Graph::empty(n));
        assert_eq!(irg_sample(&EdgeProbabilities::uniform(n, 1.0).unwrap(), 1), Graph::complete(n));
        let p = EdgeProbabilities::uniform(10, 0.3).unwrap();
        assert_eq!(irg_sample(&p, 99), irg_sample(&p, 99));
    }

    #[test]
    fn mle_on_extremes() {
        let labels = vec![1, 1, 2, 2, 2];
        let full = Graph::complete(5).with_labels(labels.clone()).unwrap();
        assert!(ermm_mle(&full).params.q.iter().flatten().all(|&x| x == 1.0));
        let empty = Graph::empty(5).with_labels(labels).unwrap();
        assert!(ermm_mle(&empty).params.q.iter().flatten().all(|&x| x == 0.0));
        let lonely = Graph::complete(3).with_labels(vec![1, 2, 2]).unwrap();
        assert_eq!(ermm_mle(&lonely).undefined_blocks, vec![(0, 0)]);
    }

    #[test]
    fn dcsbm_theta_normalised() {
        let mut rng = stream(5, &[]);
        let p = EdgeProbabilities::uniform(20, 0.3).unwrap();
        let g = irg_sample_with(&p, &mut rng).with_labels(blockwise_labels(&[8, 12])).unwrap();
        let fit = dcsbm_estimate(&g, 0.001);
        for l in [1, 2] {
            let s: f64 = fit
                .params
                .theta
                .iter()
                .zip(g.labels())
                .filter(|(_, &x)| x == l)
                .map(|(t, _)| t)
                .sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let ring: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        let reg = dcsbm_estimate(&Graph::from_edges(6, &ring).unwrap(), 0.001);
        assert!(reg.params.theta.iter().all(|&t| (t - 1.0 / 6.0).abs() < 1e-15));
        let iso = Graph::from_edges(4, &[(0, 1)]).unwrap().with_labels(vec![1, 1, 2, 2]).unwrap();
        assert_eq!(dcsbm_estimate(&iso, 0.0).zero_degree_blocks, vec![1]);
    }

    #[test]
    fn nlpa_edge_count_and_tree() {
        let mut rng = stream(11, &[]);
        let params = NlpaParams { m: 2, alpha: 1.0, m0: 4 };
        let g = nlpa_sample(30, params, &mut rng).unwrap();
        assert_eq!(g.edge_count(), 4 + 2 * 26);
        let tree = nlpa_sample(25, NlpaParams::new(1, 1.5), &mut rng).unwrap();
        assert_eq!(tree.edge_count(), 24);
        let mut seen = vec![false; 25];
        let adj = tree.adjacency();
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert!(nlpa_sample(2, NlpaParams::new(2, 1.0), &mut rng).is_err());
    }

    #[test]
    fn nlpa_uniform_attachment_when_alpha_zero() {
        // The vertex arriving at a 4-ring picks 1 target uniformly.
        let mut counts = [0usize; 4];
        let runs = 8000;
        for r in 0..runs {
            let mut rng = stream(21, &[r]);
            let g = nlpa_sample(5, NlpaParams { m: 1, alpha: 0.0, m0: 4 }, &mut rng).unwrap();
            for (t, c) in counts.iter_mut().enumerate() {
                if g.has_edge(4, t) {
                    *c += 1;
                }
            }
        }
        let expected = runs as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99.9% point of chi-square with 3 degrees of freedom.
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
    }
}
