//! Scenario parameters and the flat key-value config format.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::amc;
use crate::channel::{
    noise_floor_dbm, ErcegParams, FreeSpaceParams, FreqTermSign, LinkBudget, PathLossModel,
    VehicularParams, PATH_LOSS_NAMES,
};
use crate::error::Error;
use crate::mac::{ServiceClass, ServiceClassKind};
use crate::mobility::{HandoffPolicy, Trajectory};
use crate::phy::{mcs_by_name, mcs_by_order, PhyConfig, MCS_NAMES};
use crate::sim::SimTime;
use crate::traffic::{SyntheticTraceConfig, VideoTrace};

use super::matrix::{CaseOneSpec, CaseThreeSpec, CaseTwoSpec, MatrixSpec, ScenarioMatrix};

/// Bundled subscriber route (see `data/default_loop.txt`).
pub const DEFAULT_LOOP: &str = include_str!("../../data/default_loop.txt");

/// Link-adaptation mode names accepted in configs.
pub const MODE_NAMES: [&str; 9] = [
    "qpsk12", "qpsk34", "16qam12", "16qam34", "64qam12", "64qam23", "64qam34", "amc1", "amc2",
];

/// Fixed-MCS or adaptive operation for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McsMode {
    Fixed(usize),
    Amc1,
    Amc2,
}

impl McsMode {
    pub const ALL: [McsMode; 9] = [
        McsMode::Fixed(0),
        McsMode::Fixed(1),
        McsMode::Fixed(2),
        McsMode::Fixed(3),
        McsMode::Fixed(4),
        McsMode::Fixed(5),
        McsMode::Fixed(6),
        McsMode::Amc1,
        McsMode::Amc2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            McsMode::Fixed(order) => mcs_by_order(*order).name(),
            McsMode::Amc1 => "amc1",
            McsMode::Amc2 => "amc2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "amc1" => Ok(McsMode::Amc1),
            "amc2" => Ok(McsMode::Amc2),
            other => {
                if MCS_NAMES.contains(&other) {
                    Ok(McsMode::Fixed(mcs_by_name(other)?.order_index))
                } else {
                    Err(Error::config(format!(
                        "unknown MCS mode '{other}'; valid names: {}",
                        MODE_NAMES.join(", ")
                    )))
                }
            }
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, McsMode::Amc1 | McsMode::Amc2)
    }

    pub fn amc_profile(&self) -> Option<&'static amc::AmcProfile> {
        match self {
            McsMode::Amc1 => Some(amc::amc1()),
            McsMode::Amc2 => Some(amc::amc2()),
            McsMode::Fixed(_) => None,
        }
    }
}

/// Route source for the subscriber.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySpec {
    DefaultLoop,
    File(PathBuf),
}

/// Video payload source: the bundled synthetic generator or a trace file.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceSpec {
    Synthetic(SyntheticTraceConfig),
    File(PathBuf),
}

/// Per-class QoS parameter overrides applied scenario-wide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassOverrides {
    pub rtps_poll_frames: u32,
    pub nrtps_poll_frames: u32,
    pub ugs_rate_mbps: f64,
    pub ertps_max_sustained_mbps: f64,
    pub rtps_max_sustained_mbps: f64,
    pub nrtps_max_sustained_mbps: f64,
    pub be_max_sustained_mbps: f64,
    pub min_reserved_mbps: f64,
}

impl Default for ClassOverrides {
    fn default() -> Self {
        ClassOverrides {
            rtps_poll_frames: 1,
            nrtps_poll_frames: 4,
            ugs_rate_mbps: 1.0,
            ertps_max_sustained_mbps: 5.0,
            rtps_max_sustained_mbps: 5.0,
            nrtps_max_sustained_mbps: 5.0,
            be_max_sustained_mbps: 1.0,
            min_reserved_mbps: 0.5,
        }
    }
}

impl ClassOverrides {
    pub fn service_class(&self, kind: ServiceClassKind) -> Result<ServiceClass, Error> {
        match kind {
            ServiceClassKind::Ugs => {
                ServiceClass::new(kind, self.ugs_rate_mbps, self.ugs_rate_mbps, 20.0, 1)
            }
            ServiceClassKind::ErtPs => ServiceClass::new(
                kind,
                self.ertps_max_sustained_mbps,
                self.min_reserved_mbps,
                30.0,
                1,
            ),
            ServiceClassKind::RtPs => ServiceClass::new(
                kind,
                self.rtps_max_sustained_mbps,
                self.min_reserved_mbps,
                400.0,
                self.rtps_poll_frames,
            ),
            ServiceClassKind::NrtPs => ServiceClass::new(
                kind,
                self.nrtps_max_sustained_mbps,
                self.min_reserved_mbps.min(self.nrtps_max_sustained_mbps),
                1000.0,
                self.nrtps_poll_frames,
            ),
            ServiceClassKind::Be => {
                ServiceClass::new(kind, self.be_max_sustained_mbps, 0.0, 0.0, 1)
            }
        }
    }
}

/// Everything one scenario run needs.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub id: String,
    pub mcs_mode: McsMode,
    pub speed_kmh: f64,
    pub pathloss: PathLossModel,
    pub service_class: ServiceClassKind,
    pub seed: u64,
    pub duration: SimTime,
    pub window: SimTime,
    pub phy: PhyConfig,
    pub budget: FreeSpaceParams,
    pub link: LinkBudget,
    pub radius_m: f64,
    pub cell_count: usize,
    pub trajectory: TrajectorySpec,
    pub handoff: HandoffPolicy,
    pub video: TraceSpec,
    pub audio_fps: f64,
    /// 0 disables the audio companion flow.
    pub audio_frame_bytes: u32,
    pub mtu_payload: u32,
    pub deadline: SimTime,
    pub wired_delay: SimTime,
    pub wired_jitter: SimTime,
    pub queue_limit_bytes: u64,
    pub classes: ClassOverrides,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            id: "scenario".into(),
            mcs_mode: McsMode::Amc1,
            speed_kmh: 50.0,
            pathloss: PathLossModel::FreeSpace,
            service_class: ServiceClassKind::RtPs,
            seed: 42,
            duration: SimTime::from_secs(300),
            window: SimTime::from_secs(1),
            phy: PhyConfig::default(),
            budget: FreeSpaceParams::default(),
            link: LinkBudget::default(),
            radius_m: 200.0,
            cell_count: 7,
            trajectory: TrajectorySpec::DefaultLoop,
            handoff: HandoffPolicy::default(),
            video: TraceSpec::Synthetic(SyntheticTraceConfig::default()),
            audio_fps: 21.6,
            audio_frame_bytes: 160,
            mtu_payload: 1460,
            deadline: SimTime::from_millis(400),
            wired_delay: SimTime::from_millis(20),
            wired_jitter: SimTime::ZERO,
            queue_limit_bytes: 1 << 20,
            classes: ClassOverrides::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.duration.as_micros() == 0 {
            return Err(Error::config(format!("{}: duration must be > 0", self.id)));
        }
        if self.window.as_micros() == 0 {
            return Err(Error::config(format!("{}: metrics window must be > 0", self.id)));
        }
        if !(self.speed_kmh > 0.0) {
            return Err(Error::config(format!("{}: speed must be > 0 km/h", self.id)));
        }
        if self.cell_count != 7 {
            return Err(Error::config(format!(
                "{}: the layout is a fixed 7-cell hexagon; cells = {} is unsupported",
                self.id, self.cell_count
            )));
        }
        if !(self.radius_m > 0.0) {
            return Err(Error::config(format!("{}: cell radius must be > 0", self.id)));
        }
        if self.mtu_payload == 0 {
            return Err(Error::config(format!("{}: mtu payload must be > 0", self.id)));
        }
        if self.service_class == ServiceClassKind::Ugs {
            return Err(Error::config(format!(
                "{}: UGS carries constant-bit-rate traffic only; the variable-rate \
                 mobile-TV flows cannot be attached to it (choose ertps, rtps, nrtps or be)",
                self.id
            )));
        }
        self.classes.service_class(self.service_class)?;
        if let TraceSpec::Synthetic(cfg) = &self.video {
            cfg.validate()?;
        }
        Ok(())
    }

    pub fn build_trajectory(&self) -> Result<Trajectory, Error> {
        let waypoints = match &self.trajectory {
            TrajectorySpec::DefaultLoop => Trajectory::parse_waypoints(DEFAULT_LOOP)?,
            TrajectorySpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::io(path.display().to_string(), e))?;
                Trajectory::parse_waypoints(&text)?
            }
        };
        Trajectory::new(waypoints, self.speed_kmh, true)
    }

    pub fn build_video_trace(&self) -> Result<VideoTrace, Error> {
        match &self.video {
            TraceSpec::Synthetic(cfg) => crate::traffic::generate_trace(cfg, self.seed),
            TraceSpec::File(path) => VideoTrace::load(path, 25.0),
        }
    }
}

// ---------------------------------------------------------------------------
// Flat key-value config parsing
// ---------------------------------------------------------------------------

struct Section {
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, Section>, Error> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(format!("line {line_no}: unterminated section header")))?
                .trim()
                .to_string();
            if sections.contains_key(&name) {
                return Err(Error::config(format!("line {line_no}: duplicate section [{name}]")));
            }
            sections.insert(name.clone(), Section { line: line_no, entries: BTreeMap::new() });
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("line {line_no}: expected 'key = value', got '{line}'"))
        })?;
        let section = current
            .as_ref()
            .ok_or_else(|| Error::config(format!("line {line_no}: key outside any [section]")))?;
        let entries = &mut sections.get_mut(section).unwrap().entries;
        if entries
            .insert(key.trim().to_string(), (value.trim().to_string(), line_no))
            .is_some()
        {
            return Err(Error::config(format!(
                "line {line_no}: duplicate key '{}' in [{section}]",
                key.trim()
            )));
        }
    }
    Ok(sections)
}

struct SectionReader<'a> {
    name: &'a str,
    entries: Option<&'a BTreeMap<String, (String, usize)>>,
    allowed: Vec<&'static str>,
}

impl<'a> SectionReader<'a> {
    fn get(&mut self, key: &'static str) -> Option<&'a str> {
        self.allowed.push(key);
        self.entries.and_then(|e| e.get(key)).map(|(v, _)| v.as_str())
    }

    fn f64(&mut self, key: &'static str, default: f64) -> Result<f64, Error> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| {
                Error::config(format!("[{}] {key} = '{v}': not a number ({e})", self.name))
            }),
        }
    }

    fn u64(&mut self, key: &'static str, default: u64) -> Result<u64, Error> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| {
                Error::config(format!("[{}] {key} = '{v}': not an integer ({e})", self.name))
            }),
        }
    }

    fn u32(&mut self, key: &'static str, default: u32) -> Result<u32, Error> {
        Ok(self.u64(key, default as u64)? as u32)
    }

    fn bool(&mut self, key: &'static str, default: bool) -> Result<bool, Error> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(Error::config(format!(
                "[{}] {key} = '{v}': expected true or false",
                self.name
            ))),
        }
    }

    fn string(&mut self, key: &'static str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    fn list(&mut self, key: &'static str, default: &str) -> Vec<String> {
        self.string(key, default)
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    fn finish(self) -> Result<(), Error> {
        if let Some(entries) = self.entries {
            for (key, (_, line)) in entries {
                if !self.allowed.contains(&key.as_str()) {
                    return Err(Error::config(format!(
                        "line {line}: unknown key '{key}' in [{}] (expected one of: {})",
                        self.name,
                        self.allowed.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }
}

const KNOWN_SECTIONS: [&str; 11] = [
    "general", "phy", "budget", "topology", "mobility", "traffic", "classes", "erceg",
    "vehicular", "case1", "case2",
];

fn reader<'a>(
    sections: &'a BTreeMap<String, Section>,
    name: &'a str,
) -> SectionReader<'a> {
    SectionReader { name, entries: sections.get(name).map(|s| &s.entries), allowed: Vec::new() }
}

fn parse_modes(names: &[String]) -> Result<Vec<McsMode>, Error> {
    names.iter().map(|n| McsMode::from_name(n)).collect()
}

/// Parses the flat key-value config text into a fully resolved scenario
/// matrix. An empty config yields the default three-case, 99-scenario
/// sweep.
pub fn parse_config(text: &str) -> Result<ScenarioMatrix, Error> {
    MatrixSpec::from_text(text)?.build()
}

impl MatrixSpec {
    pub fn from_text(text: &str) -> Result<MatrixSpec, Error> {
        let sections = parse_sections(text)?;
        for (name, section) in &sections {
            if !KNOWN_SECTIONS.contains(&name.as_str()) && name != "case3" {
                return Err(Error::config(format!(
                    "line {}: unknown section [{name}] (expected one of: {}, case3)",
                    section.line,
                    KNOWN_SECTIONS.join(", ")
                )));
            }
        }

        let mut base = ScenarioConfig::default();

        let mut general = reader(&sections, "general");
        base.duration = SimTime::from_micros(
            (general.f64("duration_s", base.duration.as_secs_f64())? * 1e6).round() as u64,
        );
        base.window = SimTime::from_micros(
            (general.f64("window_s", base.window.as_secs_f64())? * 1e6).round() as u64,
        );
        base.seed = general.u64("seed", base.seed)?;
        base.wired_delay =
            SimTime::from_micros((general.f64("wired_delay_ms", 20.0)? * 1e3).round() as u64);
        base.wired_jitter =
            SimTime::from_micros((general.f64("wired_jitter_ms", 0.0)? * 1e3).round() as u64);
        general.finish()?;

        let mut phy = reader(&sections, "phy");
        base.phy = PhyConfig::new(
            phy.f64("frame_ms", 5.0)?,
            phy.f64("dl_fraction", 2.0 / 3.0)?,
            phy.f64("bandwidth_mhz", 5.0)?,
        )?;
        let freq_mhz = phy.f64("frequency_mhz", 2500.0)?;
        phy.finish()?;

        let mut budget = reader(&sections, "budget");
        base.budget = FreeSpaceParams::new(
            budget.f64("tx_power_dbm", 43.0)?,
            budget.f64("tx_gain_dbi", 15.0)?,
            budget.f64("rx_gain_dbi", -1.0)?,
            budget.f64("system_loss", 1.0)?,
            freq_mhz,
        )?;
        let noise_figure = budget.f64("noise_figure_db", 7.0)?;
        base.link = LinkBudget::new(
            noise_floor_dbm(base.phy.channel_bw_mhz * 1e6, noise_figure),
            budget.f64("bler_slope", 2.0)?,
        )?;
        budget.finish()?;

        let mut topology = reader(&sections, "topology");
        base.radius_m = topology.f64("radius_m", 200.0)?;
        base.cell_count = topology.u64("cells", 7)? as usize;
        topology.finish()?;

        let mut mobility = reader(&sections, "mobility");
        base.trajectory = match mobility.string("trajectory", "default").as_str() {
            "default" => TrajectorySpec::DefaultLoop,
            path => TrajectorySpec::File(PathBuf::from(path)),
        };
        base.handoff = HandoffPolicy::new(
            mobility.f64("handoff_margin_db", 3.0)?,
            SimTime::from_micros((mobility.f64("handoff_latency_ms", 50.0)? * 1e3).round() as u64),
        )?;
        mobility.finish()?;

        let mut traffic = reader(&sections, "traffic");
        let video = traffic.string("video_trace", "synthetic");
        let synth = SyntheticTraceConfig {
            frames: traffic.u64("synthetic_frames", 18_000)? as usize,
            mean_size: traffic.f64("synthetic_mean_bytes", 3189.068)?,
            min_size: traffic.u32("synthetic_min_bytes", 8)?,
            max_size: traffic.u32("synthetic_max_bytes", 36_450)?,
            sigma: traffic.f64("synthetic_sigma", 1.1)?,
            fps: traffic.f64("video_fps", 25.0)?,
        };
        base.video = match video.as_str() {
            "synthetic" => TraceSpec::Synthetic(synth),
            path => TraceSpec::File(PathBuf::from(path)),
        };
        base.audio_fps = traffic.f64("audio_fps", 21.6)?;
        base.audio_frame_bytes = traffic.u32("audio_frame_bytes", 160)?;
        base.mtu_payload = traffic.u32("mtu_payload", 1460)?;
        base.deadline =
            SimTime::from_micros((traffic.f64("deadline_ms", 400.0)? * 1e3).round() as u64);
        base.queue_limit_bytes = traffic.u64("queue_limit_bytes", 1 << 20)?;
        traffic.finish()?;

        let mut classes = reader(&sections, "classes");
        base.classes = ClassOverrides {
            rtps_poll_frames: classes.u32("rtps_poll_frames", 1)?,
            nrtps_poll_frames: classes.u32("nrtps_poll_frames", 4)?,
            ugs_rate_mbps: classes.f64("ugs_rate_mbps", 1.0)?,
            ertps_max_sustained_mbps: classes.f64("ertps_max_sustained_mbps", 5.0)?,
            rtps_max_sustained_mbps: classes.f64("rtps_max_sustained_mbps", 5.0)?,
            nrtps_max_sustained_mbps: classes.f64("nrtps_max_sustained_mbps", 5.0)?,
            be_max_sustained_mbps: classes.f64("be_max_sustained_mbps", 1.0)?,
            min_reserved_mbps: classes.f64("min_reserved_mbps", 0.5)?,
        };
        classes.finish()?;

        let mut erceg = reader(&sections, "erceg");
        let erceg_params = ErcegParams::for_frequency(
            freq_mhz,
            erceg.f64("gamma", 4.0)?,
            erceg.f64("sigma_db", 8.0)?,
            erceg.f64("xf_db", 0.0)?,
            erceg.f64("xh_db", 0.0)?,
        )?;
        let erceg_d0 = erceg.f64("d0_m", 100.0)?;
        erceg.finish()?;
        let erceg_params = ErcegParams::new(
            erceg_params.intercept_db,
            erceg_d0,
            erceg_params.gamma,
            erceg_params.shadow_sigma_db,
            erceg_params.x_f_db,
            erceg_params.x_h_db,
        )?;

        let mut vehicular = reader(&sections, "vehicular");
        let veh_sign = match vehicular.string("freq_term", "plus").as_str() {
            "plus" => FreqTermSign::Plus,
            "minus" => FreqTermSign::Minus,
            other => {
                return Err(Error::config(format!(
                    "[vehicular] freq_term = '{other}': expected plus or minus"
                )))
            }
        };
        let veh_params =
            VehicularParams::new(vehicular.f64("bs_height_m", 15.0)?, freq_mhz, veh_sign)?;
        vehicular.finish()?;

        let resolve_model = |name: &str| -> Result<PathLossModel, Error> {
            match name {
                "freespace" => Ok(PathLossModel::FreeSpace),
                "erceg" => Ok(PathLossModel::Erceg(erceg_params)),
                "pedestrian" => Ok(PathLossModel::Pedestrian),
                "vehicular" => Ok(PathLossModel::Vehicular(veh_params)),
                other => Err(Error::config(format!(
                    "unknown path-loss model '{other}'; valid names: {}",
                    PATH_LOSS_NAMES.join(", ")
                ))),
            }
        };

        let all_modes = MODE_NAMES.join(",");

        let mut case1 = reader(&sections, "case1");
        let case1_spec = CaseOneSpec {
            enabled: case1.bool("enabled", true)?,
            speeds_kmh: case1
                .list("speeds_kmh", "50,100,150")
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::config(format!("[case1] speeds_kmh '{s}': {e}")))
                })
                .collect::<Result<_, _>>()?,
            modes: parse_modes(&case1.list("modes", &all_modes))?,
            pathloss: resolve_model(&case1.string("pathloss", "freespace"))?,
            class: ServiceClassKind::from_name(&case1.string("class", "rtps"))?,
        };
        case1.finish()?;

        let mut case2 = reader(&sections, "case2");
        let case2_spec = CaseTwoSpec {
            enabled: case2.bool("enabled", true)?,
            models: case2
                .list("models", "freespace,erceg,pedestrian,vehicular")
                .iter()
                .map(|m| resolve_model(m))
                .collect::<Result<_, _>>()?,
            modes: parse_modes(&case2.list("modes", &all_modes))?,
            speed_kmh: case2.f64("speed_kmh", 50.0)?,
            class: ServiceClassKind::from_name(&case2.string("class", "rtps"))?,
        };
        case2.finish()?;

        let mut case3 = reader(&sections, "case3");
        let case3_spec = CaseThreeSpec {
            enabled: case3.bool("enabled", true)?,
            classes: case3
                .list("classes", "ertps,rtps,nrtps,be")
                .iter()
                .map(|c| ServiceClassKind::from_name(c))
                .collect::<Result<_, _>>()?,
            modes: parse_modes(&case3.list("modes", &all_modes))?,
            speed_kmh: case3.f64("speed_kmh", 50.0)?,
            pathloss: resolve_model(&case3.string("pathloss", "freespace"))?,
        };
        case3.finish()?;

        Ok(MatrixSpec { base, case1: case1_spec, case2: case2_spec, case3: case3_spec })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_builds_the_default_99_matrix() {
        let matrix = parse_config("").unwrap();
        assert_eq!(matrix.case1.len(), 27);
        assert_eq!(matrix.case2.len(), 36);
        assert_eq!(matrix.case3.len(), 36);
        assert_eq!(matrix.len(), 99);
    }

    #[test]
    fn case1_is_speeds_times_modes() {
        let text = "[case1]\nspeeds_kmh = 50,150\nmodes = qpsk12,amc1,amc2\n\
                    [case2]\nenabled = false\n[case3]\nenabled = false\n";
        let matrix = parse_config(text).unwrap();
        assert_eq!(matrix.len(), 6);
        assert!(matrix.case1.iter().all(|s| s.pathloss == PathLossModel::FreeSpace));
        assert!(matrix.case1.iter().all(|s| s.service_class == ServiceClassKind::RtPs));
    }

    #[test]
    fn ugs_with_video_flows_is_rejected() {
        let text = "[case3]\nclasses = ugs,rtps\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("UGS"), "{err}");
    }

    #[test]
    fn unknown_names_error_and_list_valid_ones() {
        let err = parse_config("[case1]\nmodes = qpsk99\n").unwrap_err();
        assert!(err.to_string().contains("qpsk12"), "{err}");
        let err = parse_config("[case2]\nmodels = underwater\n").unwrap_err();
        assert!(err.to_string().contains("pedestrian"), "{err}");
        let err = parse_config("[case3]\nclasses = gold\n").unwrap_err();
        assert!(err.to_string().contains("rtps"), "{err}");
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let err = parse_config("[general]\nduraton_s = 60\n").unwrap_err();
        assert!(err.to_string().contains("duraton_s"), "{err}");
        let err = parse_config("[generol]\nduration_s = 60\n").unwrap_err();
        assert!(err.to_string().contains("generol"), "{err}");
        let err = parse_config("duration_s = 60\n").unwrap_err();
        assert!(err.to_string().contains("outside"), "{err}");
    }

    #[test]
    fn overrides_flow_into_scenarios() {
        let text = "\
            [general]\nduration_s = 60\nseed = 7\n\
            [phy]\ndl_fraction = 1.0\nfrequency_mhz = 3500\n\
            [budget]\ntx_power_dbm = 30\n\
            [mobility]\nhandoff_margin_db = 5\n\
            [case2]\nenabled = false\n[case3]\nenabled = false\n";
        let matrix = parse_config(text).unwrap();
        let s = &matrix.case1[0];
        assert_eq!(s.duration, SimTime::from_secs(60));
        assert_eq!(s.seed, 7);
        assert_eq!(s.phy.dl_fraction, 1.0);
        assert_eq!(s.budget.freq_mhz, 3500.0);
        assert_eq!(s.budget.tx_power_dbm, 30.0);
        assert_eq!(s.handoff.margin_db, 5.0);
    }

    #[test]
    fn mode_name_round_trip() {
        for name in MODE_NAMES {
            assert_eq!(McsMode::from_name(name).unwrap().name(), name);
        }
        assert!(McsMode::from_name("8psk").is_err());
    }

    #[test]
    fn default_loop_parses() {
        let pts = Trajectory::parse_waypoints(DEFAULT_LOOP).unwrap();
        assert_eq!(pts.len(), 12);
        for p in &pts {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            assert!((r - 280.0).abs() < 0.5, "waypoint radius {r}");
        }
    }

    #[test]
    fn validate_catches_bad_scalars() {
        let mut cfg = ScenarioConfig::default();
        cfg.duration = SimTime::ZERO;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.cell_count = 19;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.service_class = ServiceClassKind::Ugs;
        assert!(cfg.validate().is_err());
    }
}
