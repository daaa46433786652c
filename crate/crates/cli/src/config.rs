//! Experiment configuration files and the bundled presets.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use irg_gkss::experiment::ExperimentConfig;

use crate::error::{CliError, CliResult};

const PRESETS: &[(&str, &str)] = &[
    ("calibration-er30", include_str!("../presets/calibration-er30.toml")),
    ("chung-lu-false-null", include_str!("../presets/chung-lu-false-null.toml")),
    ("chung-lu-true-null", include_str!("../presets/chung-lu-true-null.toml")),
    ("dcsbm1-false-null", include_str!("../presets/dcsbm1-false-null.toml")),
    ("dcsbm1-true-null", include_str!("../presets/dcsbm1-true-null.toml")),
    ("dcsbm2-false-null", include_str!("../presets/dcsbm2-false-null.toml")),
    ("dcsbm2-true-null", include_str!("../presets/dcsbm2-true-null.toml")),
    ("planted-clique-er30", include_str!("../presets/planted-clique-er30.toml")),
    ("planted-hubs-ermm", include_str!("../presets/planted-hubs-ermm.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// Deserialise TOML, reporting schema violations with the path of the field.
pub fn from_toml<T: DeserializeOwned>(text: &str, origin: &Path) -> CliResult<T> {
    let value: toml::Value = toml::from_str(text)
        .map_err(|e| CliError::input(format!("{}: {}", origin.display(), e.message())))?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { format!("{path}: ") };
        CliError::input(format!("{}: {field}{}", origin.display(), e.inner()))
    })
}

fn checked(config: ExperimentConfig, origin: &Path) -> CliResult<ExperimentConfig> {
    config.validate().map_err(|e| CliError::input(format!("{}: {e}", origin.display())))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    checked(from_toml(&text, path)?, path)
}

pub fn load_preset(name: &str) -> CliResult<ExperimentConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::input(format!(
            "unknown preset `{name}`; available: {}",
            preset_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let origin = Path::new(name);
    checked(from_toml(text, origin)?, origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use irg_gkss::experiment::{Alternative, Scenario};

    #[test]
    fn every_preset_loads() {
        for name in preset_names() {
            let c = load_preset(name).unwrap();
            assert_eq!(c.name, name);
        }
    }

    #[test]
    fn clique_preset_sweeps_three_to_ten() {
        let c = load_preset("planted-clique-er30").unwrap();
        assert_eq!(c.scenario, Scenario::Er { n: 30, p: 0.06 });
        let sizes: Vec<usize> = c
            .alternatives
            .iter()
            .map(|a| match a {
                Alternative::PlantedClique { size, .. } => *size,
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(sizes, (3..=10).collect::<Vec<_>>());
        let fractions: Vec<Option<f64>> = c.methods.iter().map(|m| m.resample_fraction).collect();
        assert!(fractions.contains(&Some(0.05)) && fractions.contains(&Some(0.25)));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = "schema_version = 1\n[scenario]\nkind = \"er\"\nn = 30\np = 0.06\n[[alternatives]]\nkind = \"planted-clique\"\nsize = \"big\"\n";
        let err = from_toml::<ExperimentConfig>(text, Path::new("c.toml")).unwrap_err().to_string();
        assert!(err.contains("alternatives[0]") && err.contains("\"big\""), "{err}");

        let text = "schema_version = 1\nalpha = 1.5\n[scenario]\nkind = \"er\"\nn = 30\np = 0.06\n[[alternatives]]\nkind = \"null\"\n";
        let err = checked(from_toml(text, Path::new("c.toml")).unwrap(), Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
