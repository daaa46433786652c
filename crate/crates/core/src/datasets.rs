//! Bundled network data.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{parse_edge_list, parse_labels, Graph};

const KARATE_EDGES: &str = include_str!("../data/karate.edges");
const KARATE_LABELS: &str = include_str!("../data/karate.labels");
const FLORENTINE_EDGES: &str = include_str!("../data/florentine.edges");
const LAZEGA_FRIENDSHIP_DEGREES: &str = include_str!("../data/lazega_friendship.degrees");

/// Zachary's karate club with the two-faction split as group labels.
pub fn karate() -> Graph {
    let g = parse_edge_list(KARATE_EDGES, 34, Path::new("karate.edges")).expect("bundled karate edges");
    let labels = parse_labels(KARATE_LABELS, 34, Path::new("karate.labels")).expect("bundled karate labels");
    g.with_labels(labels).expect("34 labels")
}

/// Florentine families marriage network, one group.
pub fn florentine() -> Graph {
    parse_edge_list(FLORENTINE_EDGES, 16, Path::new("florentine.edges")).expect("bundled florentine edges")
}

/// Degrees and status groups of the Lazega friendship network.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTable {
    pub status: Vec<u32>,
    pub degree: Vec<usize>,
}

impl DegreeTable {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut status = Vec::new();
        let mut degree = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected `vertex status degree`, found `{line}`")));
            }
            let vertex: usize = fields[0].parse().map_err(|_| err(format!("bad vertex `{}`", fields[0])))?;
            if vertex != status.len() + 1 {
                return Err(err(format!("vertex {vertex} out of order")));
            }
            status.push(fields[1].parse().map_err(|_| err(format!("bad status `{}`", fields[1])))?);
            degree.push(fields[2].parse().map_err(|_| err(format!("bad degree `{}`", fields[2])))?);
        }
        Ok(DegreeTable { status, degree })
    }

    pub fn n(&self) -> usize {
        self.degree.len()
    }

    pub fn edge_count(&self) -> usize {
        self.degree.iter().sum::<usize>() / 2
    }
}

pub fn lazega_friendship_degrees() -> DegreeTable {
    DegreeTable::parse(LAZEGA_FRIENDSHIP_DEGREES, Path::new("lazega_friendship.degrees"))
        .expect("bundled lazega degrees")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sizes() {
        let k = karate();
        assert_eq!((k.n(), k.edge_count(), k.group_count()), (34, 78, 2));
        let f = florentine();
        assert_eq!((f.n(), f.edge_count()), (16, 20));
        assert_eq!(f.degree_vector()[15], 0);
        let l = lazega_friendship_degrees();
        assert_eq!((l.n(), l.edge_count()), (71, 399));
        assert_eq!(l.status.iter().filter(|&&s| s == 1).count(), 36);
    }
}
