//! Null model arguments and parameter files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use irg_gkss::models::{dcsbm_estimate, ermm_mle, DcsbmParams, ErmmParams};
use irg_gkss::{EdgeProbabilities, Graph};

use crate::error::{CliError, CliResult};

pub const PARAM_SCHEMA_VERSION: u32 = 1;

/// Default `eps` added to every estimated degree-corrected block entry.
pub const DEFAULT_EPS: f64 = 1e-3;

/// Contents of a parameter file written by `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub model: FittedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum FittedModel {
    Er { n: usize, p: f64 },
    Ermm(ErmmParams),
    Dcsbm(DcsbmParams),
}

impl FittedModel {
    pub fn probabilities(&self) -> CliResult<EdgeProbabilities> {
        Ok(match self {
            FittedModel::Er { n, p } => EdgeProbabilities::uniform(*n, *p)?,
            FittedModel::Ermm(m) => ErmmParams::new(m.labels.clone(), m.q.clone())?.probabilities(),
            FittedModel::Dcsbm(m) => DcsbmParams::new(m.theta.clone(), m.q.clone(), m.labels.clone())?.probabilities(),
        })
    }

    pub fn labels(&self) -> Option<&[u32]> {
        match self {
            FittedModel::Er { .. } => None,
            FittedModel::Ermm(m) => Some(&m.labels),
            FittedModel::Dcsbm(m) => Some(&m.labels),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            FittedModel::Er { n, .. } => *n,
            FittedModel::Ermm(m) => m.labels.len(),
            FittedModel::Dcsbm(m) => m.labels.len(),
        }
    }
}

impl ParamFile {
    pub fn new(model: FittedModel) -> Self {
        ParamFile { schema_version: PARAM_SCHEMA_VERSION, model }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let file: ParamFile = crate::config::from_toml(&text, path)?;
        if file.schema_version != PARAM_SCHEMA_VERSION {
            return Err(CliError::input(format!(
                "{}: schema_version: expected {PARAM_SCHEMA_VERSION}, got {}",
                path.display(),
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialise parameters: {e}")))
    }
}

/// Estimator families accepted by `fit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitKind {
    Er,
    Ermm,
    Dcsbm,
}

/// Maximum likelihood (or Karrer-Newman) fit of the graph under its labels.
pub fn fit(g: &Graph, kind: FitKind, eps: f64) -> FittedModel {
    match kind {
        FitKind::Er => {
            let pairs = g.num_pairs();
            let p = if pairs == 0 { 0.0 } else { g.edge_count() as f64 / pairs as f64 };
            FittedModel::Er { n: g.n(), p }
        }
        FitKind::Ermm => FittedModel::Ermm(ermm_mle(g).params),
        FitKind::Dcsbm => FittedModel::Dcsbm(dcsbm_estimate(g, eps).params),
    }
}

/// A `--model` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// `er:P`, a single edge probability.
    Er(f64),
    /// `er-mle`, `ermm-mle`, `dcsbm-mle[:EPS]`: fitted to the observed graph.
    Estimated(FitKind, f64),
    /// `params:PATH`, a file written by `fit`.
    File(PathBuf),
    /// `nlpa:M:ALPHA`, non-linear preferential attachment, for `simulate` only.
    Nlpa { m: usize, alpha: f64 },
}

impl ModelSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |why: &str| CliError::input(format!("--model `{text}`: {why}"));
        let number = |s: &str| s.parse::<f64>().map_err(|_| bad("expected a number"));
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (text, None),
        };
        match (head, rest) {
            ("er", Some(p)) => Ok(ModelSpec::Er(number(p)?)),
            ("er-mle", None) => Ok(ModelSpec::Estimated(FitKind::Er, 0.0)),
            ("ermm-mle", None) => Ok(ModelSpec::Estimated(FitKind::Ermm, 0.0)),
            ("dcsbm-mle", None) => Ok(ModelSpec::Estimated(FitKind::Dcsbm, DEFAULT_EPS)),
            ("dcsbm-mle", Some(e)) => Ok(ModelSpec::Estimated(FitKind::Dcsbm, number(e)?)),
            ("params", Some(path)) => Ok(ModelSpec::File(PathBuf::from(path))),
            ("nlpa", Some(args)) => {
                let (m, alpha) = args.split_once(':').ok_or_else(|| bad("expected nlpa:M:ALPHA"))?;
                let m = m.parse().map_err(|_| bad("expected an integer edge count"))?;
                Ok(ModelSpec::Nlpa { m, alpha: number(alpha)? })
            }
            _ => Err(bad("expected er:P, er-mle, ermm-mle, dcsbm-mle[:EPS], params:PATH or nlpa:M:ALPHA")),
        }
    }
}

/// Edge probabilities of a null model, with the group labels it was built on.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub p: EdgeProbabilities,
    pub labels: Option<Vec<u32>>,
    pub description: String,
}

/// Resolve a model, fitting it to `g` when the argument asks for it.
/// `n` is used when neither a graph nor a parameter file fixes the size.
pub fn resolve(spec: &ModelSpec, g: Option<&Graph>, n: Option<usize>) -> CliResult<ResolvedModel> {
    let size = || {
        g.map(Graph::n)
            .or(n)
            .ok_or_else(|| CliError::input("the number of vertices is unknown: pass --n or --graph"))
    };
    match spec {
        ModelSpec::Er(p) => Ok(ResolvedModel {
            p: EdgeProbabilities::uniform(size()?, *p)?,
            labels: None,
            description: format!("er:{p}"),
        }),
        ModelSpec::Estimated(kind, eps) => {
            let g = g.ok_or_else(|| CliError::input("an estimated model needs --graph"))?;
            let fitted = fit(g, *kind, *eps);
            Ok(ResolvedModel {
                p: fitted.probabilities()?,
                labels: fitted.labels().map(<[u32]>::to_vec),
                description: format!("{kind:?}-mle").to_ascii_lowercase(),
            })
        }
        ModelSpec::File(path) => {
            let file = ParamFile::load(path)?;
            if let Some(g) = g {
                if g.n() != file.model.n() {
                    return Err(CliError::input(format!(
                        "{}: model has {} vertices, graph has {}",
                        path.display(),
                        file.model.n(),
                        g.n()
                    )));
                }
            }
            Ok(ResolvedModel {
                p: file.model.probabilities()?,
                labels: file.model.labels().map(<[u32]>::to_vec),
                description: format!("params:{}", path.display()),
            })
        }
        ModelSpec::Nlpa { .. } => Err(CliError::input("nlpa has no edge probabilities; use it with simulate")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_specs() {
        assert_eq!(ModelSpec::parse("er:0.139").unwrap(), ModelSpec::Er(0.139));
        assert_eq!(ModelSpec::parse("dcsbm-mle").unwrap(), ModelSpec::Estimated(FitKind::Dcsbm, DEFAULT_EPS));
        assert_eq!(ModelSpec::parse("nlpa:2:1.5").unwrap(), ModelSpec::Nlpa { m: 2, alpha: 1.5 });
        assert!(ModelSpec::parse("sbm").is_err());
        assert!(ModelSpec::parse("er:abc").is_err());
    }

    #[test]
    fn param_file_round_trips() {
        let file = ParamFile::new(FittedModel::Dcsbm(DcsbmParams {
            theta: vec![0.25, 0.75, 1.0 / 3.0],
            q: vec![vec![4.001]],
            labels: vec![1, 1, 1],
        }));
        let text = file.to_toml().unwrap();
        let back: ParamFile = crate::config::from_toml(&text, Path::new("mem")).unwrap();
        assert_eq!(back, file);

        let er = ParamFile::new(FittedModel::Er { n: 34, p: 78.0 / 561.0 });
        let back: ParamFile = crate::config::from_toml(&er.to_toml().unwrap(), Path::new("mem")).unwrap();
        assert_eq!(back, er);
    }
}
