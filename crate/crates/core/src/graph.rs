//! Simple undirected graphs stored as indicator vectors over vertex pairs.
//!
//! Pairs are ordered row-major lexicographically: (0,1), (0,2), ..., (0,n-1),
//! (1,2), ... Vertices are 0-based in memory and 1-based in files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Number of unordered vertex pairs on `n` vertices.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Flat index of the pair `u < v` (0-based) on `n` vertices.
pub fn pair_index(u: usize, v: usize, n: usize) -> Result<usize> {
    if u >= v || v >= n {
        return Err(Error::arg(format!("pair ({u}, {v}) invalid for n = {n}")));
    }
    Ok(pair_index_unchecked(u, v, n))
}

#[inline]
pub(crate) fn pair_index_unchecked(u: usize, v: usize, n: usize) -> usize {
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(s: usize, n: usize) -> Result<VertexPair> {
    if s >= pair_count(n) {
        return Err(Error::arg(format!("pair index {s} out of range for n = {n}")));
    }
    let mut u = 0;
    let mut start = 0;
    loop {
        let row = n - u - 1;
        if s < start + row {
            return Ok(VertexPair { u, v: u + 1 + (s - start), s });
        }
        start += row;
        u += 1;
    }
}

/// All pairs of an `n`-vertex graph in flat-index order.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for u in 0..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

/// A vertex pair together with its flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexPair {
    pub u: usize,
    pub v: usize,
    pub s: usize,
}

/// Simple undirected graph with per-vertex group labels (labels start at 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    x: Vec<bool>,
    labels: Vec<u32>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, x: vec![false; pair_count(n)], labels: vec![1; n] }
    }

    pub fn complete(n: usize) -> Self {
        Graph { n, x: vec![true; pair_count(n)], labels: vec![1; n] }
    }

    /// Build from an indicator vector in flat-index order.
    pub fn from_bits(n: usize, x: Vec<bool>) -> Result<Self> {
        if x.len() != pair_count(n) {
            return Err(Error::arg(format!(
                "indicator length {} does not match n = {n}",
                x.len()
            )));
        }
        Ok(Graph { n, x, labels: vec![1; n] })
    }

    /// Build from 0-based edges; duplicates collapse, self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(a, b) in edges {
            if a == b {
                return Err(Error::arg(format!("self-loop at vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            let s = pair_index(u, v, n)?;
            g.x[s] = true;
        }
        Ok(g)
    }

    /// Replace the group labels; every label must be at least 1.
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::arg(format!(
                "{} labels given for {} vertices",
                labels.len(),
                self.n
            )));
        }
        if labels.contains(&0) {
            return Err(Error::arg("group labels start at 1"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_pairs(&self) -> usize {
        self.x.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.x
    }

    pub fn bit(&self, s: usize) -> bool {
        self.x[s]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.x[pair_index_unchecked(a, b, self.n)]
    }

    pub fn edge_count(&self) -> usize {
        self.x.iter().filter(|&&b| b).count()
    }

    /// Edges as 0-based `(u, v)` with `u < v`, in flat-index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        let mut s = 0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.x[s] {
                    out.push((u, v));
                }
                s += 1;
            }
        }
        out
    }

    /// Copy with pair `s` set to `b`.
    pub fn with_edge(&self, s: usize, b: bool) -> Result<Graph> {
        if s >= self.x.len() {
            return Err(Error::arg(format!(
                "pair index {s} out of range for n = {}",
                self.n
            )));
        }
        let mut g = self.clone();
        g.x[s] = b;
        Ok(g)
    }

    /// Copy with pair `s` toggled.
    pub fn flipped(&self, s: usize) -> Result<Graph> {
        self.with_edge(s, !self.x.get(s).copied().unwrap_or(false))
    }

    pub(crate) fn set(&mut self, s: usize, b: bool) {
        self.x[s] = b;
    }

    pub(crate) fn set_edge(&mut self, u: usize, v: usize, b: bool) {
        let (a, c) = if u < v { (u, v) } else { (v, u) };
        self.x[pair_index_unchecked(a, c, self.n)] = b;
    }

    pub fn degree_vector(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for (u, v) in self.edges() {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Dense 0/1 adjacency matrix in row-major order.
    pub fn adjacency_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (u, v) in self.edges() {
            a[u * n + v] = 1.0;
            a[v * n + u] = 1.0;
        }
        a
    }

    /// Number of groups, i.e. the largest label.
    pub fn group_count(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(1) as usize
    }
}

/// Parse a whitespace-separated edge list with 1-based vertex ids.
pub fn parse_edge_list(text: &str, n: usize, path: &Path) -> Result<Graph> {
    let mut g = Graph::empty(n);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected two vertex ids, found `{line}`")));
        }
        let mut ids = [0usize; 2];
        for (slot, f) in ids.iter_mut().zip(&fields) {
            let id: usize = f.parse().map_err(|_| err(format!("bad vertex id `{f}`")))?;
            if id == 0 || id > n {
                return Err(err(format!("vertex id {id} outside 1..={n}")));
            }
            *slot = id - 1;
        }
        if ids[0] == ids[1] {
            return Err(err(format!("self-loop at vertex {}", ids[0] + 1)));
        }
        g.set_edge(ids[0], ids[1], true);
    }
    Ok(g)
}

/// Parse a label file: one positive integer per line.
pub fn parse_labels(text: &str, n: usize, path: &Path) -> Result<Vec<u32>> {
    let mut labels = Vec::with_capacity(n);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let label: u32 = line.parse().ok().filter(|&l| l >= 1).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("bad group label `{line}`"),
        })?;
        labels.push(label);
    }
    if labels.len() != n {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: text.lines().count(),
            message: format!("{} labels for {n} vertices", labels.len()),
        });
    }
    Ok(labels)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Load an edge list and an optional label file. Missing labels default to 1.
pub fn load_graph(edges: &Path, n: usize, labels: Option<&Path>) -> Result<Graph> {
    let g = parse_edge_list(&read(edges)?, n, edges)?;
    match labels {
        Some(p) => g.with_labels(parse_labels(&read(p)?, n, p)?),
        None => Ok(g),
    }
}

/// Largest vertex id mentioned in an edge list file, for inferring `n`.
pub fn max_vertex_id(path: &Path) -> Result<usize> {
    let text = read(path)?;
    let mut max = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        for f in line.split_whitespace() {
            let id: usize = f.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("bad vertex id `{f}`"),
            })?;
            max = max.max(id);
        }
    }
    Ok(max)
}

/// Sorted 1-based edge list, LF line endings.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{} {}", u + 1, v + 1);
    }
    out
}

pub fn format_labels(g: &Graph) -> String {
    let mut out = String::new();
    for l in g.labels() {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn write_graph(g: &Graph, edges: &Path, labels: Option<&Path>) -> Result<()> {
    let write = |p: &Path, s: String| {
        fs::write(p, s).map_err(|source| Error::Io { path: p.to_path_buf(), source })
    };
    write(edges, format_edge_list(g))?;
    if let Some(p) = labels {
        write(p, format_labels(g))?;
    }
    Ok(())
}
