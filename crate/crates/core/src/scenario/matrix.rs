//! Expansion of the three experiment cases into concrete scenarios.

use crate::channel::PathLossModel;
use crate::error::Error;
use crate::mac::ServiceClassKind;
use crate::sim::SimTime;

use super::config::{McsMode, ScenarioConfig};

/// Case 1: speed sweep at fixed path loss and class.
#[derive(Debug, Clone)]
pub struct CaseOneSpec {
    pub enabled: bool,
    pub speeds_kmh: Vec<f64>,
    pub modes: Vec<McsMode>,
    pub pathloss: PathLossModel,
    pub class: ServiceClassKind,
}

/// Case 2: path-loss sweep at fixed speed and class.
#[derive(Debug, Clone)]
pub struct CaseTwoSpec {
    pub enabled: bool,
    pub models: Vec<PathLossModel>,
    pub modes: Vec<McsMode>,
    pub speed_kmh: f64,
    pub class: ServiceClassKind,
}

/// Case 3: service-class sweep at fixed speed and path loss.
#[derive(Debug, Clone)]
pub struct CaseThreeSpec {
    pub enabled: bool,
    pub classes: Vec<ServiceClassKind>,
    pub modes: Vec<McsMode>,
    pub speed_kmh: f64,
    pub pathloss: PathLossModel,
}

/// Base scenario plus the three case definitions; `build` expands them.
#[derive(Debug, Clone)]
pub struct MatrixSpec {
    pub base: ScenarioConfig,
    pub case1: CaseOneSpec,
    pub case2: CaseTwoSpec,
    pub case3: CaseThreeSpec,
}

impl Default for MatrixSpec {
    fn default() -> Self {
        MatrixSpec::from_text("").expect("empty config is valid")
    }
}

/// The fully expanded scenario set, partitioned by case.
#[derive(Debug, Clone, Default)]
pub struct ScenarioMatrix {
    pub case1: Vec<ScenarioConfig>,
    pub case2: Vec<ScenarioConfig>,
    pub case3: Vec<ScenarioConfig>,
}

impl MatrixSpec {
    pub fn build(&self) -> Result<ScenarioMatrix, Error> {
        let mut matrix = ScenarioMatrix::default();
        if self.case1.enabled {
            for &speed in &self.case1.speeds_kmh {
                for &mode in &self.case1.modes {
                    let mut cfg = self.base.clone();
                    cfg.id = format!("case1-s{:03}-{}", speed.round() as u64, mode.name());
                    cfg.speed_kmh = speed;
                    cfg.mcs_mode = mode;
                    cfg.pathloss = self.case1.pathloss;
                    cfg.service_class = self.case1.class;
                    matrix.case1.push(cfg);
                }
            }
        }
        if self.case2.enabled {
            for &model in &self.case2.models {
                for &mode in &self.case2.modes {
                    let mut cfg = self.base.clone();
                    cfg.id = format!("case2-{}-{}", model.name(), mode.name());
                    cfg.speed_kmh = self.case2.speed_kmh;
                    cfg.mcs_mode = mode;
                    cfg.pathloss = model;
                    cfg.service_class = self.case2.class;
                    matrix.case2.push(cfg);
                }
            }
        }
        if self.case3.enabled {
            for &class in &self.case3.classes {
                for &mode in &self.case3.modes {
                    let mut cfg = self.base.clone();
                    cfg.id = format!("case3-{}-{}", class.name(), mode.name());
                    cfg.speed_kmh = self.case3.speed_kmh;
                    cfg.mcs_mode = mode;
                    cfg.pathloss = self.case3.pathloss;
                    cfg.service_class = class;
                    matrix.case3.push(cfg);
                }
            }
        }
        for cfg in matrix.all() {
            cfg.validate()?;
        }
        let mut ids: Vec<&str> = matrix.all().into_iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != matrix.len() {
            return Err(Error::config("scenario ids collide across cases".into()));
        }
        Ok(matrix)
    }
}

impl ScenarioMatrix {
    pub fn all(&self) -> Vec<&ScenarioConfig> {
        self.case1.iter().chain(&self.case2).chain(&self.case3).collect()
    }

    pub fn all_mut(&mut self) -> Vec<&mut ScenarioConfig> {
        self.case1
            .iter_mut()
            .chain(self.case2.iter_mut())
            .chain(self.case3.iter_mut())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.case1.len() + self.case2.len() + self.case3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CLI override: one seed for every scenario.
    pub fn apply_seed(&mut self, seed: u64) {
        for cfg in self.all_mut() {
            cfg.seed = seed;
        }
    }

    /// CLI override: one duration for every scenario.
    pub fn apply_duration(&mut self, duration: SimTime) {
        for cfg in self.all_mut() {
            cfg.duration = duration;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matrix_partitions_27_36_36() {
        let matrix = MatrixSpec::default().build().unwrap();
        assert_eq!(matrix.case1.len(), 27);
        assert_eq!(matrix.case2.len(), 36);
        assert_eq!(matrix.case3.len(), 36);
        assert_eq!(matrix.len(), 99);
    }

    #[test]
    fn ids_are_unique_and_sorted_ids_are_stable() {
        let matrix = MatrixSpec::default().build().unwrap();
        let mut ids: Vec<String> = matrix.all().iter().map(|c| c.id.clone()).collect();
        let before = ids.clone();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 99);
        // Case-1 ids sort by zero-padded speed then mode name.
        assert!(before.contains(&"case1-s050-qpsk12".to_string()));
        assert!(before.contains(&"case2-pedestrian-amc2".to_string()));
        assert!(before.contains(&"case3-be-64qam34".to_string()));
    }

    #[test]
    fn overrides_touch_every_scenario() {
        let mut matrix = MatrixSpec::default().build().unwrap();
        matrix.apply_seed(1234);
        matrix.apply_duration(SimTime::from_secs(60));
        for cfg in matrix.all() {
            assert_eq!(cfg.seed, 1234);
            assert_eq!(cfg.duration, SimTime::from_secs(60));
        }
    }
}
