//! Trace-driven audio/video sources: frame-size trace loading, synthetic
//! trace generation, emission timing on the integer-microsecond clock,
//! and packetization of application frames into MAC-sized packets.

use std::path::Path;

use crate::error::Error;
use crate::sim::{RngStream, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    I,
    P,
    B,
    A,
}

impl FrameKind {
    fn parse(s: &str) -> Option<FrameKind> {
        match s {
            "I" | "i" => Some(FrameKind::I),
            "P" | "p" => Some(FrameKind::P),
            "B" | "b" => Some(FrameKind::B),
            "A" | "a" => Some(FrameKind::A),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceFrame {
    pub size: u32,
    pub kind: FrameKind,
}

/// An ordered list of application frame sizes replayed at a nominal rate.
#[derive(Debug, Clone)]
pub struct VideoTrace {
    pub frames: Vec<TraceFrame>,
    pub nominal_fps: f64,
    pub name: String,
}

/// Summary statistics of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStats {
    pub min_size: u32,
    pub max_size: u32,
    pub mean_size: f64,
    pub peak_rate_mbps: f64,
    pub mean_rate_mbps: f64,
}

impl VideoTrace {
    /// Parses a frame-size trace: one frame per line, fields
    /// `index type size_bytes`, where index and type are optional
    /// (a bare size, or `index size`, also parse). '#' starts a comment.
    pub fn parse(text: &str, nominal_fps: f64, name: &str) -> Result<Self, Error> {
        let mut frames = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_size = |s: &str| -> Result<u32, Error> {
                let size: u32 = s.parse().map_err(|e| Error::TraceParse {
                    line: idx + 1,
                    message: format!("bad frame size '{s}': {e}"),
                })?;
                if size == 0 {
                    return Err(Error::TraceParse {
                        line: idx + 1,
                        message: "frame size must be >= 1".into(),
                    });
                }
                Ok(size)
            };
            let frame = match fields.as_slice() {
                [size] => TraceFrame { size: parse_size(size)?, kind: FrameKind::P },
                [_index, size] => TraceFrame { size: parse_size(size)?, kind: FrameKind::P },
                [_index, kind, size, ..] => TraceFrame {
                    size: parse_size(size)?,
                    kind: FrameKind::parse(kind).ok_or_else(|| Error::TraceParse {
                        line: idx + 1,
                        message: format!("unknown frame type '{kind}'"),
                    })?,
                },
                [] => unreachable!("blank lines are skipped"),
            };
            frames.push(frame);
        }
        if frames.is_empty() {
            return Err(Error::TraceParse { line: 0, message: "trace is empty".into() });
        }
        Ok(VideoTrace { frames, nominal_fps, name: name.to_string() })
    }

    pub fn load(path: &Path, nominal_fps: f64) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".to_string());
        Self::parse(&text, 25.0, &name).map(|mut t| {
            t.nominal_fps = nominal_fps;
            t
        })
    }

    /// Constant-size trace, handy for audio streams and tests.
    pub fn constant(size: u32, count: usize, nominal_fps: f64, name: &str) -> Self {
        VideoTrace {
            frames: vec![TraceFrame { size, kind: FrameKind::A }; count],
            nominal_fps,
            name: name.to_string(),
        }
    }

    pub fn stats(&self) -> TraceStats {
        let min_size = self.frames.iter().map(|f| f.size).min().unwrap_or(0);
        let max_size = self.frames.iter().map(|f| f.size).max().unwrap_or(0);
        let sum: u64 = self.frames.iter().map(|f| f.size as u64).sum();
        let mean_size = sum as f64 / self.frames.len() as f64;
        TraceStats {
            min_size,
            max_size,
            mean_size,
            peak_rate_mbps: max_size as f64 * 8.0 * self.nominal_fps / 1e6,
            mean_rate_mbps: mean_size * 8.0 * self.nominal_fps / 1e6,
        }
    }

    /// Serializes to the `index type size` text form.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.frames.len() * 12);
        out.push_str(&format!("# {} ({} fps)\n", self.name, self.nominal_fps));
        for (i, f) in self.frames.iter().enumerate() {
            let kind = match f.kind {
                FrameKind::I => "I",
                FrameKind::P => "P",
                FrameKind::B => "B",
                FrameKind::A => "A",
            };
            out.push_str(&format!("{i} {kind} {}\n", f.size));
        }
        out
    }
}

/// Targets for the bundled synthetic trace generator: log-normal frame
/// sizes clamped to [min, max] and calibrated onto the requested mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTraceConfig {
    pub frames: usize,
    pub mean_size: f64,
    pub min_size: u32,
    pub max_size: u32,
    /// Shape of the underlying log-normal (sigma of log sizes).
    pub sigma: f64,
    pub fps: f64,
}

impl Default for SyntheticTraceConfig {
    // Mirrors the bundled movie trace characteristics.
    fn default() -> Self {
        SyntheticTraceConfig {
            frames: 18_000,
            mean_size: 3189.068,
            min_size: 8,
            max_size: 36_450,
            sigma: 1.1,
            fps: 25.0,
        }
    }
}

impl SyntheticTraceConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.frames < 2 {
            return Err(Error::invalid("synthetic trace needs at least 2 frames"));
        }
        if self.min_size == 0 || self.max_size < self.min_size {
            return Err(Error::invalid(format!(
                "bad synthetic size bounds [{}, {}]",
                self.min_size, self.max_size
            )));
        }
        if !(self.mean_size >= self.min_size as f64 && self.mean_size <= self.max_size as f64) {
            return Err(Error::invalid(format!(
                "synthetic mean {} outside [{}, {}]",
                self.mean_size, self.min_size, self.max_size
            )));
        }
        if !(self.sigma > 0.0) || !(self.fps > 0.0) {
            return Err(Error::invalid("synthetic sigma and fps must be > 0"));
        }
        Ok(())
    }
}

/// Deterministic synthetic trace for the given seed. The underlying
/// normal draws are fixed once, then the log-normal location parameter
/// is iterated until the clamped sample mean lands on the target; the
/// extreme draws are pinned to the configured min/max so the bounds are
/// realized exactly.
pub fn generate_trace(cfg: &SyntheticTraceConfig, seed: u64) -> Result<VideoTrace, Error> {
    cfg.validate()?;
    let mut rng = RngStream::new(seed, "trace");
    let z: Vec<f64> = (0..cfg.frames).map(|_| rng.normal(0.0, 1.0)).collect();

    let sizes_for = |mu: f64| -> Vec<f64> {
        z.iter()
            .map(|zi| (mu + cfg.sigma * zi).exp().clamp(cfg.min_size as f64, cfg.max_size as f64))
            .collect()
    };
    let mut mu = cfg.mean_size.ln() - cfg.sigma * cfg.sigma / 2.0;
    let mut sizes = sizes_for(mu);
    for _ in 0..40 {
        let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
        if (mean / cfg.mean_size - 1.0).abs() < 1e-4 {
            break;
        }
        mu += (cfg.mean_size / mean).ln();
        sizes = sizes_for(mu);
    }

    let argmin = (0..cfg.frames).min_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap();
    let argmax = (0..cfg.frames).max_by(|&a, &b| z[a].total_cmp(&z[b])).unwrap();
    sizes[argmin] = cfg.min_size as f64;
    sizes[argmax] = cfg.max_size as f64;

    let frames = sizes
        .iter()
        .enumerate()
        .map(|(i, s)| TraceFrame {
            size: (s.round() as u32).clamp(cfg.min_size, cfg.max_size),
            kind: if i % 12 == 0 { FrameKind::I } else { FrameKind::P },
        })
        .collect();
    Ok(VideoTrace { frames, nominal_fps: cfg.fps, name: format!("synthetic-{seed}") })
}

/// One MAC-sized chunk of an application frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediaPacket {
    /// Per-flow sequence number; delivery must preserve this order.
    pub id: u64,
    pub flow: usize,
    pub size: u32,
    /// Bytes already transmitted (partial progress across MAC frames).
    pub sent: u32,
    pub gen_time: SimTime,
    pub frame_id: u64,
    /// First packet of its application frame (jitter anchor).
    pub frame_start: bool,
    /// Drop-on-expiry bound; `None` never expires.
    pub deadline: Option<SimTime>,
}

/// Splits a frame into `ceil(frame_size / mtu_payload)` payload sizes:
/// all full-size except a final remainder, summing to the frame size.
pub fn packetize(frame_size: u32, mtu_payload: u32) -> Vec<u32> {
    assert!(mtu_payload > 0, "mtu payload must be > 0");
    let full = (frame_size / mtu_payload) as usize;
    let rem = frame_size % mtu_payload;
    let mut sizes = vec![mtu_payload; full];
    if rem > 0 {
        sizes.push(rem);
    }
    sizes
}

/// What a source hands the MAC at one emission instant.
#[derive(Debug, Clone)]
pub struct Emission {
    pub packets: Vec<MediaPacket>,
    /// Time of the next emission; `None` when the trace is exhausted.
    pub next_at: Option<SimTime>,
}

/// Replays a trace as timed, packetized emissions for one flow.
#[derive(Debug, Clone)]
pub struct TrafficSource {
    flow: usize,
    trace: VideoTrace,
    mtu_payload: u32,
    deadline_after: Option<SimTime>,
    wrap: bool,
    cursor: usize,
    emission_index: u64,
    next_packet_id: u64,
}

impl TrafficSource {
    pub fn new(
        flow: usize,
        trace: VideoTrace,
        mtu_payload: u32,
        deadline_after: Option<SimTime>,
        wrap: bool,
    ) -> Result<Self, Error> {
        if mtu_payload == 0 {
            return Err(Error::invalid("mtu payload must be > 0"));
        }
        if trace.frames.is_empty() {
            return Err(Error::invalid("trace is empty"));
        }
        Ok(TrafficSource {
            flow,
            trace,
            mtu_payload,
            deadline_after,
            wrap,
            cursor: 0,
            emission_index: 0,
            next_packet_id: 0,
        })
    }

    pub fn flow(&self) -> usize {
        self.flow
    }

    pub fn trace(&self) -> &VideoTrace {
        &self.trace
    }

    /// Emission instant of the i-th frame: `round(i * 1e6 / fps)` us.
    /// Scheduling on the absolute grid avoids cumulative drift at rates
    /// like 21.6 fps whose period is not an integer microsecond count.
    pub fn emission_time(&self, index: u64) -> SimTime {
        SimTime::from_micros((index as f64 * 1e6 / self.trace.nominal_fps).round() as u64)
    }

    pub fn frames_consumed(&self) -> u64 {
        self.emission_index
    }

    /// Packetizes the frame due at `now` and reports when the next one
    /// is due. Callers drive this from the event queue.
    pub fn next_emission(&mut self, now: SimTime) -> Emission {
        debug_assert_eq!(now, self.emission_time(self.emission_index));
        let frame = self.trace.frames[self.cursor];
        let frame_id = self.emission_index;
        let deadline = self.deadline_after.map(|d| now + d);
        let packets = packetize(frame.size, self.mtu_payload)
            .into_iter()
            .enumerate()
            .map(|(i, size)| {
                let id = self.next_packet_id;
                self.next_packet_id += 1;
                MediaPacket {
                    id,
                    flow: self.flow,
                    size,
                    sent: 0,
                    gen_time: now,
                    frame_id,
                    frame_start: i == 0,
                    deadline,
                }
            })
            .collect();

        self.emission_index += 1;
        self.cursor += 1;
        let exhausted = self.cursor >= self.trace.frames.len();
        if exhausted && self.wrap {
            self.cursor = 0;
        }
        let next_at = if exhausted && !self.wrap {
            None
        } else {
            Some(self.emission_time(self.emission_index))
        };
        Emission { packets, next_at }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn parse_single_size_lines() {
        let t = VideoTrace::parse("1000\n", 25.0, "one").unwrap();
        let s = t.stats();
        assert_eq!((s.min_size, s.max_size), (1000, 1000));
        assert_eq!(s.mean_size, 1000.0);
    }

    #[test]
    fn parse_two_frame_trace_mean() {
        let t = VideoTrace::parse("0 I 8\n1 P 36450\n", 25.0, "two").unwrap();
        assert_eq!(t.stats().mean_size, 18229.0);
        assert_eq!(t.frames[0].kind, FrameKind::I);
    }

    #[test]
    fn parse_rejects_malformed_lines_with_line_number() {
        let err = VideoTrace::parse("100\nxyz\n", 25.0, "bad").unwrap_err();
        match err {
            Error::TraceParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
        assert!(VideoTrace::parse("", 25.0, "empty").is_err());
        assert!(VideoTrace::parse("0 P 0\n", 25.0, "zero").is_err());
    }

    #[test]
    fn text_round_trip_preserves_frames() {
        let t = VideoTrace::parse("0 I 100\n1 P 250\n2 B 75\n", 25.0, "rt").unwrap();
        let back = VideoTrace::parse(&t.to_text(), 25.0, "rt").unwrap();
        assert_eq!(t.frames, back.frames);
    }

    #[test]
    fn stats_rates_follow_definitions() {
        let t = VideoTrace::parse("0 P 1000\n1 P 3000\n", 25.0, "s").unwrap();
        let s = t.stats();
        assert_abs_diff_eq!(s.mean_rate_mbps, 2000.0 * 8.0 * 25.0 / 1e6, epsilon = 1e-12);
        assert_abs_diff_eq!(s.peak_rate_mbps, 3000.0 * 8.0 * 25.0 / 1e6, epsilon = 1e-12);
    }

    #[test]
    fn synthetic_trace_hits_its_targets() {
        let cfg = SyntheticTraceConfig::default();
        let t = generate_trace(&cfg, 99).unwrap();
        assert_eq!(t.frames.len(), cfg.frames);
        let s = t.stats();
        assert_eq!(s.min_size, cfg.min_size);
        assert_eq!(s.max_size, cfg.max_size);
        assert!(
            (s.mean_size / cfg.mean_size - 1.0).abs() < 0.02,
            "mean {} vs target {}",
            s.mean_size,
            cfg.mean_size
        );
        let target_rate = cfg.mean_size * 8.0 * cfg.fps / 1e6;
        assert!((s.mean_rate_mbps / target_rate - 1.0).abs() < 0.02);
    }

    #[test]
    fn synthetic_trace_is_deterministic_per_seed() {
        let cfg = SyntheticTraceConfig { frames: 500, ..Default::default() };
        let a = generate_trace(&cfg, 7).unwrap();
        let b = generate_trace(&cfg, 7).unwrap();
        let c = generate_trace(&cfg, 8).unwrap();
        assert_eq!(a.frames, b.frames);
        assert_ne!(a.frames, c.frames);
    }

    #[test]
    fn packetize_splits_and_sums() {
        let sizes = packetize(36_450, 1460);
        assert_eq!(sizes.len(), 25);
        assert!(sizes[..24].iter().all(|&s| s == 1460));
        assert_eq!(sizes[24], 1410);

        assert_eq!(packetize(8, 1460), vec![8]);
        assert_eq!(packetize(1460, 1460), vec![1460]);
    }

    proptest! {
        #[test]
        fn packetize_reassembles_exactly(frame in 1u32..200_000, mtu in 1u32..3000) {
            let sizes = packetize(frame, mtu);
            prop_assert_eq!(sizes.iter().map(|&s| s as u64).sum::<u64>(), frame as u64);
            prop_assert_eq!(sizes.len(), frame.div_ceil(mtu) as usize);
            for (i, s) in sizes.iter().enumerate() {
                if i + 1 < sizes.len() {
                    prop_assert_eq!(*s, mtu);
                } else {
                    prop_assert!(*s >= 1 && *s <= mtu);
                }
            }
        }
    }

    fn video_source(frames: usize, wrap: bool) -> TrafficSource {
        TrafficSource::new(
            0,
            VideoTrace::constant(1000, frames, 25.0, "v"),
            1460,
            Some(SimTime::from_millis(400)),
            wrap,
        )
        .unwrap()
    }

    #[test]
    fn video_emissions_land_on_the_40ms_grid() {
        let src = video_source(10, false);
        for i in 0..10u64 {
            assert_eq!(src.emission_time(i), SimTime::from_micros(i * 40_000));
        }
    }

    #[test]
    fn audio_grid_is_exact_at_ten_seconds() {
        let src = TrafficSource::new(
            1,
            VideoTrace::constant(160, 1000, 21.6, "a"),
            1460,
            None,
            true,
        )
        .unwrap();
        assert_eq!(src.emission_time(216), SimTime::from_secs(10));
        // Absolute-grid scheduling: the rounding error never accumulates.
        for i in 0..5000u64 {
            let t = src.emission_time(i).as_micros() as f64;
            let ideal = i as f64 * 1e6 / 21.6;
            assert!((t - ideal).abs() <= 0.5, "drift at emission {i}");
        }
    }

    #[test]
    fn two_hour_trace_consumes_all_frames() {
        let frames = 7200 * 25;
        let mut src = video_source(frames, false);
        let mut t = SimTime::ZERO;
        let mut emitted = 0u64;
        loop {
            let em = src.next_emission(t);
            emitted += 1;
            match em.next_at {
                Some(next) => t = next,
                None => break,
            }
        }
        assert_eq!(emitted, 180_000);
        assert_eq!(src.frames_consumed(), 180_000);
        assert_eq!(t, SimTime::from_micros((frames as u64 - 1) * 40_000));
    }

    #[test]
    fn wrapping_source_never_stops() {
        let mut src = video_source(3, true);
        let mut t = SimTime::ZERO;
        for _ in 0..10 {
            let em = src.next_emission(t);
            t = em.next_at.expect("wrapping source always schedules");
        }
        assert_eq!(src.frames_consumed(), 10);
    }

    #[test]
    fn emission_packets_carry_deadline_and_anchor() {
        let mut src = TrafficSource::new(
            2,
            VideoTrace::constant(4000, 4, 25.0, "v"),
            1460,
            Some(SimTime::from_millis(400)),
            false,
        )
        .unwrap();
        let em = src.next_emission(SimTime::ZERO);
        assert_eq!(em.packets.len(), 3);
        assert!(em.packets[0].frame_start);
        assert!(em.packets[1..].iter().all(|p| !p.frame_start));
        for p in &em.packets {
            assert_eq!(p.deadline, Some(SimTime::from_millis(400)));
            assert_eq!(p.flow, 2);
            assert_eq!(p.frame_id, 0);
        }
        let ids: Vec<u64> = em.packets.iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }
}
