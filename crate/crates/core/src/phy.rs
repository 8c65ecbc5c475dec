//! Modulation-and-coding rate table for the 5 MHz mobile WiMAX OFDM
//! downlink, and the per-MAC-frame byte capacity it implies.

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

/// Code rate as a small rational (1/2, 2/3, 3/4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeRate {
    pub num: u8,
    pub den: u8,
}

impl CodeRate {
    pub const fn new(num: u8, den: u8) -> Self {
        CodeRate { num, den }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// One modulation + code-rate row: information bits per symbol, the
/// minimum SINR at which the burst profile is usable, and the peak
/// downlink/uplink rates over a 5 MHz channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    pub modulation: Modulation,
    pub code_rate: CodeRate,
    pub bits_per_symbol: f64,
    pub min_sinr_db: f64,
    pub dl_rate_mbps: f64,
    pub ul_rate_mbps: f64,
    /// Rank 0..6 from most robust (QPSK 1/2) to most efficient (64QAM 3/4).
    pub order_index: usize,
}

impl McsEntry {
    /// Short config name, e.g. "qpsk12" or "64qam34".
    pub fn name(&self) -> &'static str {
        MCS_NAMES[self.order_index]
    }

    pub fn dl_rate_bps(&self) -> f64 {
        self.dl_rate_mbps * 1e6
    }
}

pub const MCS_COUNT: usize = 7;

pub const MCS_NAMES: [&str; MCS_COUNT] =
    ["qpsk12", "qpsk34", "16qam12", "16qam34", "64qam12", "64qam23", "64qam34"];

const MCS_TABLE: [McsEntry; MCS_COUNT] = [
    McsEntry {
        modulation: Modulation::Qpsk,
        code_rate: CodeRate::new(1, 2),
        bits_per_symbol: 1.0,
        min_sinr_db: 5.0,
        dl_rate_mbps: 3.17,
        ul_rate_mbps: 2.28,
        order_index: 0,
    },
    McsEntry {
        modulation: Modulation::Qpsk,
        code_rate: CodeRate::new(3, 4),
        bits_per_symbol: 1.5,
        min_sinr_db: 8.0,
        dl_rate_mbps: 4.75,
        ul_rate_mbps: 3.43,
        order_index: 1,
    },
    McsEntry {
        modulation: Modulation::Qam16,
        code_rate: CodeRate::new(1, 2),
        bits_per_symbol: 2.0,
        min_sinr_db: 10.5,
        dl_rate_mbps: 6.34,
        ul_rate_mbps: 4.57,
        order_index: 2,
    },
    McsEntry {
        modulation: Modulation::Qam16,
        code_rate: CodeRate::new(3, 4),
        bits_per_symbol: 3.0,
        min_sinr_db: 14.0,
        dl_rate_mbps: 9.5,
        ul_rate_mbps: 6.85,
        order_index: 3,
    },
    McsEntry {
        modulation: Modulation::Qam64,
        code_rate: CodeRate::new(1, 2),
        bits_per_symbol: 3.0,
        min_sinr_db: 16.0,
        dl_rate_mbps: 9.5,
        ul_rate_mbps: 6.85,
        order_index: 4,
    },
    McsEntry {
        modulation: Modulation::Qam64,
        code_rate: CodeRate::new(2, 3),
        bits_per_symbol: 4.0,
        min_sinr_db: 18.0,
        dl_rate_mbps: 12.6,
        ul_rate_mbps: 9.14,
        order_index: 5,
    },
    McsEntry {
        modulation: Modulation::Qam64,
        code_rate: CodeRate::new(3, 4),
        bits_per_symbol: 4.0,
        min_sinr_db: 20.0,
        dl_rate_mbps: 14.26,
        ul_rate_mbps: 10.28,
        order_index: 6,
    },
];

/// The full 7-row rate table, ordered by `order_index`.
pub fn mcs_table() -> &'static [McsEntry; MCS_COUNT] {
    &MCS_TABLE
}

/// Row lookup by rank.
pub fn mcs_by_order(order_index: usize) -> &'static McsEntry {
    &MCS_TABLE[order_index]
}

/// Row lookup by config name. Errors list the valid names.
pub fn mcs_by_name(name: &str) -> Result<&'static McsEntry, Error> {
    MCS_NAMES
        .iter()
        .position(|n| *n == name)
        .map(mcs_by_order)
        .ok_or_else(|| {
            Error::config(format!("unknown MCS '{name}'; valid names: {}", MCS_NAMES.join(", ")))
        })
}

/// TDD frame geometry for the OFDM downlink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyConfig {
    pub frame_duration_ms: f64,
    /// Fraction of the TDD frame carrying downlink, in (0, 1].
    pub dl_fraction: f64,
    pub channel_bw_mhz: f64,
}

impl PhyConfig {
    pub fn new(frame_duration_ms: f64, dl_fraction: f64, channel_bw_mhz: f64) -> Result<Self, Error> {
        if !(frame_duration_ms > 0.0) {
            return Err(Error::invalid(format!("frame_duration must be > 0, got {frame_duration_ms}")));
        }
        if !(dl_fraction > 0.0 && dl_fraction <= 1.0) {
            return Err(Error::invalid(format!("dl_fraction must be in (0, 1], got {dl_fraction}")));
        }
        if !(channel_bw_mhz > 0.0) {
            return Err(Error::invalid(format!("channel bandwidth must be > 0, got {channel_bw_mhz}")));
        }
        Ok(PhyConfig { frame_duration_ms, dl_fraction, channel_bw_mhz })
    }

    pub fn frame_duration_us(&self) -> u64 {
        (self.frame_duration_ms * 1e3).round() as u64
    }

    pub fn frame_duration_s(&self) -> f64 {
        self.frame_duration_ms / 1e3
    }
}

impl Default for PhyConfig {
    // 5 ms frame, DL:UL 2:1 TDD split, 5 MHz channel.
    fn default() -> Self {
        PhyConfig { frame_duration_ms: 5.0, dl_fraction: 2.0 / 3.0, channel_bw_mhz: 5.0 }
    }
}

/// Downlink bytes one MAC frame can carry at the given MCS:
/// `floor(dl_rate * frame_duration * dl_fraction / 8)`.
pub fn frame_capacity_bytes(mcs: &McsEntry, cfg: &PhyConfig) -> u64 {
    (mcs.dl_rate_bps() * cfg.frame_duration_s() * cfg.dl_fraction / 8.0).floor() as u64
}
