//! Declarative ground-truth rewards: a text file of `feature weight`
//! lines resolved against a map's feature layout into a linear model.
//!
//! ```text
//! # centers are cheap, kitchen is costly to cross
//! class:free 2.0
//! dist_wall -4.0
//! zone:kitchen 1.5
//! ```

use lightcast_core::grid::{FeatureField, GridMap};
use lightcast_core::irl::RewardModel;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("reward spec line {line}: expected 'feature weight', got '{text}'")]
    Malformed { line: usize, text: String },
    #[error("reward spec line {line}: unknown feature '{name}'")]
    UnknownFeature { line: usize, name: String },
}

pub fn parse_reward_spec(
    text: &str,
    map: &GridMap,
    field: &FeatureField,
) -> Result<RewardModel, SpecError> {
    let mut weights = vec![0.0; field.dim()];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line.split_once(' ').ok_or_else(|| SpecError::Malformed {
            line: i,
            text: line.to_string(),
        })?;
        let weight: f64 = value.trim().parse().map_err(|_| SpecError::Malformed {
            line: i,
            text: line.to_string(),
        })?;
        let slot = field
            .slot(name, map)
            .ok_or_else(|| SpecError::UnknownFeature {
                line: i,
                name: name.to_string(),
            })?;
        weights[slot] += weight;
    }
    Ok(RewardModel::linear(weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lightcast_core::grid::features;

    #[test]
    fn spec_resolves_to_linear_weights() {
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let field = features(&map);
        let model =
            parse_reward_spec("# comment\nclass:free 2.0\n\nzone:hall -1.5\n", &map, &field)
                .unwrap();
        let params = model.params();
        assert_eq!(params[0], 2.0);
        assert_eq!(params[4], -1.5);
    }

    #[test]
    fn unknown_feature_rejected() {
        let map = GridMap::parse("####\n#AA#\n####\n\nA=hall,1,1\n").unwrap();
        let field = features(&map);
        assert_eq!(
            parse_reward_spec("zone:pool 1.0\n", &map, &field).unwrap_err(),
            SpecError::UnknownFeature {
                line: 0,
                name: "zone:pool".into()
            }
        );
    }
}
