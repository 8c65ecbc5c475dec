//! Adaptive modulation-and-coding controller: a hysteresis state machine
//! over per-MCS entry/exit SINR thresholds, plus a fixed-MCS mode.
//!
//! Each MCS has a mandatory-exit threshold (at or below it the burst
//! profile can no longer be used) and a minimum-entry threshold (the
//! SINR required to start using it). Entry sits above exit, so a link
//! whose SINR dwells between them holds its current profile.

use crate::error::Error;
use crate::phy::{mcs_by_order, McsEntry, MCS_COUNT};
use crate::sim::SimTime;

/// Exit/entry threshold pair for one MCS row, in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair {
    pub mandatory_exit_db: f64,
    pub minimum_entry_db: f64,
}

/// A named set of per-MCS threshold pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmcProfile {
    pub name: &'static str,
    thresholds: [ThresholdPair; MCS_COUNT],
}

const fn pair(exit: f64, entry: f64) -> ThresholdPair {
    ThresholdPair { mandatory_exit_db: exit, minimum_entry_db: entry }
}

static AMC_1: AmcProfile = AmcProfile {
    name: "amc1",
    thresholds: [
        pair(-20.0, 2.0), // qpsk12 (floor; never exited)
        pair(5.0, 5.9),   // qpsk34
        pair(8.0, 8.9),   // 16qam12
        pair(11.0, 11.9), // 16qam34
        pair(14.0, 14.9), // 64qam12
        pair(17.0, 17.9), // 64qam23
        pair(19.0, 19.9), // 64qam34
    ],
};

static AMC_2: AmcProfile = AmcProfile {
    name: "amc2",
    thresholds: [
        pair(-20.0, 2.0),
        pair(11.0, 11.9),
        pair(14.0, 14.9),
        pair(17.0, 17.9),
        pair(20.0, 20.9),
        pair(23.0, 23.9),
        pair(25.0, 25.9),
    ],
};

pub fn amc1() -> &'static AmcProfile {
    &AMC_1
}

pub fn amc2() -> &'static AmcProfile {
    &AMC_2
}

pub fn profile_by_name(name: &str) -> Result<&'static AmcProfile, Error> {
    match name {
        "amc1" => Ok(&AMC_1),
        "amc2" => Ok(&AMC_2),
        other => Err(Error::config(format!("unknown AMC profile '{other}'; valid names: amc1, amc2"))),
    }
}

impl AmcProfile {
    pub fn thresholds(&self, order_index: usize) -> ThresholdPair {
        self.thresholds[order_index]
    }

    /// Highest-rank MCS whose entry threshold the SINR meets; the floor
    /// MCS when none qualifies.
    pub fn select_initial(&self, sinr_db: f64) -> &'static McsEntry {
        let order = self.highest_entry_at_or_below(sinr_db).unwrap_or(0);
        mcs_by_order(order)
    }

    fn highest_entry_at_or_below(&self, sinr_db: f64) -> Option<usize> {
        (0..MCS_COUNT).rev().find(|&i| self.thresholds[i].minimum_entry_db <= sinr_db)
    }
}

/// Per-link adaptation mode: burst-by-burst threshold tracking or a
/// pinned MCS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdaptationMode {
    Fixed,
    Adaptive(&'static AmcProfile),
}

/// Link adaptation state for one subscriber link.
#[derive(Debug, Clone)]
pub struct LinkAdaptation {
    mode: AdaptationMode,
    current: usize,
    last_change: SimTime,
    transitions: u64,
}

impl LinkAdaptation {
    pub fn fixed(mcs: &McsEntry) -> Self {
        LinkAdaptation {
            mode: AdaptationMode::Fixed,
            current: mcs.order_index,
            last_change: SimTime::ZERO,
            transitions: 0,
        }
    }

    /// Adaptive controller starting from the profile's pick for the
    /// first observed SINR.
    pub fn adaptive(profile: &'static AmcProfile, initial_sinr_db: f64) -> Self {
        LinkAdaptation {
            mode: AdaptationMode::Adaptive(profile),
            current: profile.select_initial(initial_sinr_db).order_index,
            last_change: SimTime::ZERO,
            transitions: 0,
        }
    }

    pub fn current(&self) -> &'static McsEntry {
        mcs_by_order(self.current)
    }

    pub fn mode(&self) -> AdaptationMode {
        self.mode
    }

    pub fn last_change(&self) -> SimTime {
        self.last_change
    }

    /// Number of MCS changes made by `step` so far.
    pub fn transitions(&self) -> u64 {
        self.transitions
    }

    /// One per-frame adaptation step on the sampled SINR.
    ///
    /// At or below the current exit threshold the link downgrades to the
    /// highest MCS whose entry the SINR still meets (floor if none);
    /// otherwise it upgrades to the highest qualifying MCS, which may
    /// skip levels; otherwise it holds. Fixed mode always holds.
    pub fn step(&mut self, sinr_db: f64, now: SimTime) -> &'static McsEntry {
        let profile = match self.mode {
            AdaptationMode::Fixed => return self.current(),
            AdaptationMode::Adaptive(p) => p,
        };
        let next = if sinr_db <= profile.thresholds(self.current).mandatory_exit_db {
            profile.highest_entry_at_or_below(sinr_db).unwrap_or(0)
        } else {
            match profile.highest_entry_at_or_below(sinr_db) {
                Some(best) if best > self.current => best,
                _ => self.current,
            }
        };
        if next != self.current {
            self.current = next;
            self.last_change = now;
            self.transitions += 1;
        }
        self.current()
    }
}
