//! Strategy-profile files: TOML with one `[[players]]` entry per player,
//! carrying either per-stage control vectors or per-stage feedback laws.

use std::path::Path;

use serde::{Deserialize, Serialize};

use nashevo::{FeedbackLaw, PlayerStrategy, Profile64, StrategyProfile};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    /// "open-loop" or "feedback".
    pub mode: String,
    pub players: Vec<PlayerEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PlayerEntry {
    /// Open-loop: one control vector per stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<Vec<Vec<f64>>>,
    /// Feedback: one law per stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageLaw>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageLaw {
    pub gain: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl ProfileFile {
    pub fn from_profile(profile: &Profile64) -> Self {
        let mut mode = "open-loop";
        let players = profile
            .players()
            .iter()
            .map(|p| match p {
                PlayerStrategy::OpenLoop(controls) => PlayerEntry {
                    controls: Some(controls.clone()),
                    stages: None,
                },
                PlayerStrategy::Feedback(laws) => {
                    mode = "feedback";
                    PlayerEntry {
                        controls: None,
                        stages: Some(
                            laws.iter()
                                .map(|l| StageLaw { gain: l.gain.clone(), offset: l.offset.clone() })
                                .collect(),
                        ),
                    }
                }
            })
            .collect();
        Self { mode: mode.into(), players }
    }

    pub fn into_profile(self) -> Result<Profile64, CliError> {
        match self.mode.as_str() {
            "open-loop" => {
                let controls = self
                    .players
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        p.controls.ok_or_else(|| {
                            CliError::config(format!(
                                "player {i}: open-loop profile requires a `controls` field"
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(StrategyProfile::open_loop(controls))
            }
            "feedback" => {
                let laws = self
                    .players
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let stages = p.stages.ok_or_else(|| {
                            CliError::config(format!(
                                "player {i}: feedback profile requires a `stages` list"
                            ))
                        })?;
                        Ok(stages
                            .into_iter()
                            .map(|s| FeedbackLaw { gain: s.gain, offset: s.offset })
                            .collect::<Vec<_>>())
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(StrategyProfile::feedback(laws))
            }
            other => Err(CliError::config(format!(
                "unknown profile mode '{other}' (expected \"open-loop\" or \"feedback\")"
            ))),
        }
    }
}

pub fn write_profile(profile: &Profile64, path: &Path) -> Result<(), CliError> {
    let file = ProfileFile::from_profile(profile);
    let text = toml::to_string_pretty(&file)
        .map_err(|e| CliError::run(format!("cannot serialize profile: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::run(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<Profile64, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let file: ProfileFile = toml::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid profile {}: {e}", path.display())))?;
    file.into_profile()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_loop_round_trip() {
        let profile = StrategyProfile::open_loop(vec![
            vec![vec![0.5], vec![-0.25]],
            vec![vec![1.0], vec![0.0]],
        ]);
        let file = ProfileFile::from_profile(&profile);
        assert_eq!(file.mode, "open-loop");
        let text = toml::to_string_pretty(&file).unwrap();
        let parsed: ProfileFile = toml::from_str(&text).unwrap();
        assert_eq!(parsed.into_profile().unwrap(), profile);
    }

    #[test]
    fn feedback_round_trip() {
        let law = FeedbackLaw { gain: vec![vec![0.5, -0.1]], offset: vec![0.2] };
        let profile = StrategyProfile::feedback(vec![vec![law.clone()], vec![law]]);
        let file = ProfileFile::from_profile(&profile);
        assert_eq!(file.mode, "feedback");
        let text = toml::to_string_pretty(&file).unwrap();
        let parsed: ProfileFile = toml::from_str(&text).unwrap();
        assert_eq!(parsed.into_profile().unwrap(), profile);
    }

    #[test]
    fn wrong_mode_field_combinations_rejected() {
        let file = ProfileFile {
            mode: "open-loop".into(),
            players: vec![PlayerEntry { controls: None, stages: Some(vec![]) }],
        };
        assert!(file.into_profile().is_err());
    }
}
