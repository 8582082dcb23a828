//! Serializable form of a certification report.

use serde::{Deserialize, Serialize};

use nashevo::{NashReport64, PlayerStrategy};

use crate::profile_io::{PlayerEntry, StageLaw};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub certified: bool,
    pub tolerance: f64,
    pub max_gap: f64,
    pub multistarts: usize,
    pub players: Vec<PlayerReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlayerReport {
    pub player: usize,
    pub gap: f64,
    pub deviation_cost: f64,
    pub starts: usize,
    pub simplex_iterations: usize,
    /// The deviating strategy achieving the gap, in profile-file layout.
    pub deviation: PlayerEntry,
}

impl ReportFile {
    pub fn from_report(report: &NashReport64) -> Self {
        let players = report
            .gaps
            .iter()
            .enumerate()
            .map(|(player, g)| PlayerReport {
                player,
                gap: g.gap,
                deviation_cost: g.deviation_cost,
                starts: g.starts,
                simplex_iterations: g.simplex_iterations,
                deviation: match &g.deviation {
                    PlayerStrategy::OpenLoop(controls) => PlayerEntry {
                        controls: Some(controls.clone()),
                        stages: None,
                    },
                    PlayerStrategy::Feedback(laws) => PlayerEntry {
                        controls: None,
                        stages: Some(
                            laws.iter()
                                .map(|l| StageLaw {
                                    gain: l.gain.clone(),
                                    offset: l.offset.clone(),
                                })
                                .collect(),
                        ),
                    },
                },
            })
            .collect();
        Self {
            certified: report.certified,
            tolerance: report.tolerance,
            max_gap: report.max_gap(),
            multistarts: report.multistarts,
            players,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("report serializes")
    }
}
