//! QoS metric definitions and the per-scenario collector: packet loss
//! ratio, end-to-end delay, jitter, throughput, data dropped, and mean
//! BLER, aggregated per run and per time window.

use std::io::Write;

use crate::error::Error;
use crate::mac::{DropReason, FlowCounters, ServiceFlow};
use crate::sim::SimTime;
use crate::traffic::MediaPacket;

/// Loss ratio with an explicit flag for the 0/0 case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plr {
    pub ratio: f64,
    pub undefined: bool,
}

/// `lost / (lost + received)`; reported as 0 with a flag when no packet
/// was ever expected.
pub fn plr(lost: u64, received: u64) -> Plr {
    if lost + received == 0 {
        Plr { ratio: 0.0, undefined: true }
    } else {
        Plr { ratio: lost as f64 / (lost + received) as f64, undefined: false }
    }
}

/// Signed per-packet jitter in ms: actual minus expected reception time.
pub fn jitter_ms(t_actual: SimTime, t_expected: SimTime) -> f64 {
    t_actual.as_millis_f64() - t_expected.as_millis_f64()
}

/// Air-interface transmission time of one packet in ms.
pub fn transmission_delay_ms(size_bytes: u32, dl_rate_mbps: f64) -> f64 {
    size_bytes as f64 * 8.0 / (dl_rate_mbps * 1e6) * 1e3
}

/// The classic transit-time decomposition across Q network elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayComponents {
    pub hops: u32,
    pub proc_ms: f64,
    pub queue_ms: f64,
    pub trans_ms: f64,
    pub prop_ms: f64,
}

impl DelayComponents {
    pub fn total_ms(&self) -> f64 {
        self.hops as f64 * (self.proc_ms + self.queue_ms + self.trans_ms + self.prop_ms)
    }
}

/// End-to-end delay of one delivered packet in ms. In this model it
/// decomposes into the fixed wired component (backbone abstraction),
/// measured MAC queueing, and the air transmission time.
pub fn e2e_delay_ms(gen_time: SimTime, client_arrival: SimTime) -> f64 {
    client_arrival.as_millis_f64() - gen_time.as_millis_f64()
}

/// Table-stakes acceptability bounds for video-on-demand delivery.
pub const PLR_BOUND: f64 = 1e-3;
pub const DELAY_BOUND_MS: f64 = 400.0;
pub const JITTER_BOUND_MS: f64 = 50.0;
/// Advisory throughput band, interpreted in kbps.
pub const THROUGHPUT_BAND_BPS: (f64, f64) = (221_000.0, 5_311_000.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Acceptability {
    pub plr_ok: bool,
    pub delay_ok: bool,
    pub jitter_ok: bool,
    /// Advisory only; the band's units are a config interpretation.
    pub throughput_in_band: bool,
}

/// Identity of a scenario, carried into every report row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMeta {
    pub id: String,
    pub mcs_mode: String,
    pub speed_kmh: f64,
    pub pathloss: String,
    pub service_class: String,
    pub seed: u64,
}

/// One aggregation window of the report series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub index: usize,
    pub plr: f64,
    pub mean_delay_ms: f64,
    pub mean_abs_jitter_ms: f64,
    pub throughput_bps: f64,
    pub dropped_bps: f64,
    pub mean_bler: f64,
    /// Total queued bytes sampled at the window boundary.
    pub queued_bytes: u64,
}

/// Per-scenario aggregate of the four QoS metrics plus loss accounting.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub meta: ScenarioMeta,
    pub plr: f64,
    pub plr_undefined: bool,
    pub mean_delay_ms: f64,
    pub mean_abs_jitter_ms: f64,
    pub mean_signed_jitter_ms: f64,
    pub throughput_bps: f64,
    pub dropped_bps: f64,
    pub mean_bler: f64,
    pub windows: Vec<WindowStats>,
    pub flow_counters: Vec<FlowCounters>,
    pub still_queued: Vec<u64>,
    pub handoffs: u64,
    pub acceptability: Acceptability,
}

#[derive(Debug, Clone, Copy, Default)]
struct WindowAccum {
    delivered_bytes: u64,
    dropped_bytes: u64,
    delivered_pkts: u64,
    lost_pkts: u64,
    delay_sum_ms: f64,
    abs_jitter_sum_ms: f64,
    jitter_count: u64,
    bler_sum: f64,
    bler_count: u64,
    queued_bytes: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct FlowJitterState {
    last_anchor: Option<SimTime>,
    nominal_interarrival_us: f64,
}

/// Accumulates one scenario's observations, binned by timestamp into
/// fixed windows. Jitter is measured on each media frame's first
/// delivered packet against the flow's nominal frame spacing.
#[derive(Debug)]
pub struct Collector {
    window_us: u64,
    duration_us: u64,
    windows: Vec<WindowAccum>,
    jitter: Vec<FlowJitterState>,
    delivered_bytes: u64,
    delivered_pkts: u64,
    dropped_bytes: u64,
    lost_pkts: u64,
    delay_sum_ms: f64,
    abs_jitter_sum_ms: f64,
    signed_jitter_sum_ms: f64,
    jitter_count: u64,
    bler_sum: f64,
    bler_count: u64,
}

impl Collector {
    /// `nominal_interarrival_us[flow]` is the flow's ideal spacing
    /// between media frames (1e6 / fps).
    pub fn new(window: SimTime, duration: SimTime, nominal_interarrival_us: &[f64]) -> Self {
        let window_us = window.as_micros().max(1);
        let duration_us = duration.as_micros();
        let n_windows = (duration_us.div_ceil(window_us)).max(1) as usize;
        Collector {
            window_us,
            duration_us,
            windows: vec![WindowAccum::default(); n_windows],
            jitter: nominal_interarrival_us
                .iter()
                .map(|&us| FlowJitterState { last_anchor: None, nominal_interarrival_us: us })
                .collect(),
            delivered_bytes: 0,
            delivered_pkts: 0,
            dropped_bytes: 0,
            lost_pkts: 0,
            delay_sum_ms: 0.0,
            abs_jitter_sum_ms: 0.0,
            signed_jitter_sum_ms: 0.0,
            jitter_count: 0,
            bler_sum: 0.0,
            bler_count: 0,
        }
    }

    fn window_at(&mut self, t: SimTime) -> &mut WindowAccum {
        let idx = ((t.as_micros() / self.window_us) as usize).min(self.windows.len() - 1);
        &mut self.windows[idx]
    }

    pub fn record_delivery(&mut self, pkt: &MediaPacket, client_arrival: SimTime) {
        let delay = e2e_delay_ms(pkt.gen_time, client_arrival);
        self.delivered_bytes += pkt.size as u64;
        self.delivered_pkts += 1;
        self.delay_sum_ms += delay;

        let mut jitter_obs = None;
        if pkt.frame_start {
            let state = &mut self.jitter[pkt.flow];
            if let Some(last) = state.last_anchor {
                let expected =
                    last + SimTime::from_micros(state.nominal_interarrival_us.round() as u64);
                jitter_obs = Some(jitter_ms(client_arrival, expected));
            }
            state.last_anchor = Some(client_arrival);
        }
        if let Some(j) = jitter_obs {
            self.abs_jitter_sum_ms += j.abs();
            self.signed_jitter_sum_ms += j;
            self.jitter_count += 1;
        }

        let w = self.window_at(client_arrival);
        w.delivered_bytes += pkt.size as u64;
        w.delivered_pkts += 1;
        w.delay_sum_ms += delay;
        if let Some(j) = jitter_obs {
            w.abs_jitter_sum_ms += j.abs();
            w.jitter_count += 1;
        }
    }

    pub fn record_drop(&mut self, pkt: &MediaPacket, at: SimTime, _reason: DropReason) {
        self.dropped_bytes += pkt.size as u64;
        self.lost_pkts += 1;
        let w = self.window_at(at);
        w.dropped_bytes += pkt.size as u64;
        w.lost_pkts += 1;
    }

    /// Per-MAC-frame block-error probability sample for the active MCS.
    pub fn record_frame_bler(&mut self, p: f64, at: SimTime) {
        self.bler_sum += p;
        self.bler_count += 1;
        let w = self.window_at(at);
        w.bler_sum += p;
        w.bler_count += 1;
    }

    /// Queue-state sample taken at a metrics-window boundary.
    pub fn sample_queues(&mut self, at: SimTime, queued_bytes: u64) {
        if at.as_micros() == 0 {
            return;
        }
        // The boundary at t seals window t/window - 1.
        let idx = ((at.as_micros() - 1) / self.window_us) as usize;
        if let Some(w) = self.windows.get_mut(idx) {
            w.queued_bytes = queued_bytes;
        }
    }

    pub fn finalize(self, meta: ScenarioMeta, flows: &[ServiceFlow], handoffs: u64) -> MetricsReport {
        let duration_s = self.duration_us as f64 / 1e6;
        let window_s = self.window_us as f64 / 1e6;
        let loss = plr(self.lost_pkts, self.delivered_pkts);
        let mean_delay_ms =
            if self.delivered_pkts > 0 { self.delay_sum_ms / self.delivered_pkts as f64 } else { 0.0 };
        let mean_abs_jitter_ms =
            if self.jitter_count > 0 { self.abs_jitter_sum_ms / self.jitter_count as f64 } else { 0.0 };
        let mean_signed_jitter_ms =
            if self.jitter_count > 0 { self.signed_jitter_sum_ms / self.jitter_count as f64 } else { 0.0 };
        let throughput_bps = self.delivered_bytes as f64 * 8.0 / duration_s;
        let dropped_bps = self.dropped_bytes as f64 * 8.0 / duration_s;
        let mean_bler = if self.bler_count > 0 { self.bler_sum / self.bler_count as f64 } else { 0.0 };

        let windows = self
            .windows
            .iter()
            .enumerate()
            .map(|(index, w)| WindowStats {
                index,
                plr: plr(w.lost_pkts, w.delivered_pkts).ratio,
                mean_delay_ms: if w.delivered_pkts > 0 {
                    w.delay_sum_ms / w.delivered_pkts as f64
                } else {
                    0.0
                },
                mean_abs_jitter_ms: if w.jitter_count > 0 {
                    w.abs_jitter_sum_ms / w.jitter_count as f64
                } else {
                    0.0
                },
                throughput_bps: w.delivered_bytes as f64 * 8.0 / window_s,
                dropped_bps: w.dropped_bytes as f64 * 8.0 / window_s,
                mean_bler: if w.bler_count > 0 { w.bler_sum / w.bler_count as f64 } else { 0.0 },
                queued_bytes: w.queued_bytes,
            })
            .collect();

        MetricsReport {
            meta,
            plr: loss.ratio,
            plr_undefined: loss.undefined,
            mean_delay_ms,
            mean_abs_jitter_ms,
            mean_signed_jitter_ms,
            throughput_bps,
            dropped_bps,
            mean_bler,
            windows,
            flow_counters: flows.iter().map(|f| f.counters).collect(),
            still_queued: flows.iter().map(|f| f.queued_packets()).collect(),
            handoffs,
            acceptability: Acceptability {
                plr_ok: loss.ratio <= PLR_BOUND,
                delay_ok: mean_delay_ms < DELAY_BOUND_MS,
                jitter_ok: mean_abs_jitter_ms < JITTER_BOUND_MS,
                throughput_in_band: throughput_bps >= THROUGHPUT_BAND_BPS.0
                    && throughput_bps <= THROUGHPUT_BAND_BPS.1,
            },
        }
    }
}

/// CSV column set: one row per scenario window plus one summary row per
/// scenario, discriminated by the trailing `window` column.
pub const CSV_HEADER: [&str; 14] = [
    "scenario-id",
    "mcs-mode",
    "speed-kmh",
    "pathloss-model",
    "service-class",
    "seed",
    "plr",
    "mean-delay-ms",
    "mean-jitter-ms",
    "throughput-bps",
    "dropped-bps",
    "mean-bler",
    "mean-signed-jitter-ms",
    "window",
];

pub fn write_csv<W: Write>(reports: &[MetricsReport], out: W) -> Result<(), Error> {
    let mut wtr = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::config(format!("csv write failed: {e}"));
    wtr.write_record(CSV_HEADER).map_err(io_err)?;
    for report in reports {
        let meta = &report.meta;
        let head = [
            meta.id.clone(),
            meta.mcs_mode.clone(),
            format!("{}", meta.speed_kmh),
            meta.pathloss.clone(),
            meta.service_class.clone(),
            format!("{}", meta.seed),
        ];
        for w in &report.windows {
            let mut row: Vec<String> = head.to_vec();
            row.extend([
                format!("{}", w.plr),
                format!("{}", w.mean_delay_ms),
                format!("{}", w.mean_abs_jitter_ms),
                format!("{}", w.throughput_bps),
                format!("{}", w.dropped_bps),
                format!("{}", w.mean_bler),
                String::new(),
                format!("{}", w.index),
            ]);
            wtr.write_record(&row).map_err(io_err)?;
        }
        let mut row: Vec<String> = head.to_vec();
        row.extend([
            format!("{}", report.plr),
            format!("{}", report.mean_delay_ms),
            format!("{}", report.mean_abs_jitter_ms),
            format!("{}", report.throughput_bps),
            format!("{}", report.dropped_bps),
            format!("{}", report.mean_bler),
            format!("{}", report.mean_signed_jitter_ms),
            "summary".to_string(),
        ]);
        wtr.write_record(&row).map_err(io_err)?;
    }
    wtr.flush().map_err(|e| Error::config(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn meta() -> ScenarioMeta {
        ScenarioMeta {
            id: "test".into(),
            mcs_mode: "qpsk12".into(),
            speed_kmh: 50.0,
            pathloss: "freespace".into(),
            service_class: "rtps".into(),
            seed: 1,
        }
    }

    fn anchor_pkt(flow: usize, frame_id: u64, size: u32, gen_ms: u64) -> MediaPacket {
        MediaPacket {
            id: frame_id,
            flow,
            size,
            sent: 0,
            gen_time: SimTime::from_millis(gen_ms),
            frame_id,
            frame_start: true,
            deadline: None,
        }
    }

    #[test]
    fn plr_formula_and_undefined_flag() {
        assert_eq!(plr(0, 100), Plr { ratio: 0.0, undefined: false });
        assert_abs_diff_eq!(plr(1, 999).ratio, 0.001, epsilon = 1e-15);
        assert_abs_diff_eq!(plr(5, 5).ratio, 0.5, epsilon = 1e-15);
        assert_eq!(plr(0, 0), Plr { ratio: 0.0, undefined: true });
    }

    #[test]
    fn plr_plus_delivered_fraction_is_one() {
        for (lost, received) in [(0u64, 10u64), (3, 7), (9, 1), (1, 999)] {
            let p = plr(lost, received).ratio;
            let delivered = received as f64 / (lost + received) as f64;
            assert_abs_diff_eq!(p + delivered, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn e2e_delay_matches_component_oracle() {
        // Zero queueing: wired 20 ms plus air transmission.
        let wired_ms = 20.0;
        let trans = transmission_delay_ms(1460, 3.17);
        assert_abs_diff_eq!(wired_ms + trans, 23.68, epsilon = 0.01);
        let trans64 = transmission_delay_ms(1460, 14.26);
        assert_abs_diff_eq!(wired_ms + trans64, 20.82, epsilon = 0.01);

        let gen = SimTime::from_millis(100);
        let arrival = gen + SimTime::from_micros(((wired_ms + trans) * 1e3).round() as u64);
        assert_abs_diff_eq!(e2e_delay_ms(gen, arrival), 23.68, epsilon = 0.01);
    }

    #[test]
    fn delay_components_scale_with_hops() {
        let c = DelayComponents { hops: 3, proc_ms: 0.5, queue_ms: 1.0, trans_ms: 2.0, prop_ms: 0.5 };
        assert_abs_diff_eq!(c.total_ms(), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn jitter_signed_difference() {
        assert_abs_diff_eq!(
            jitter_ms(SimTime::from_millis(41), SimTime::from_millis(40)),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            jitter_ms(SimTime::from_millis(80), SimTime::from_millis(81)),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn collector_jitter_on_example_sequence() {
        // Arrivals at 0, 41, 80 ms on a 40 ms flow: jitters +1, -1 ms.
        let mut c = Collector::new(SimTime::from_secs(1), SimTime::from_secs(1), &[40_000.0]);
        for (frame, at_ms) in [(0u64, 0u64), (1, 41), (2, 80)] {
            c.record_delivery(&anchor_pkt(0, frame, 100, 0), SimTime::from_millis(at_ms));
        }
        let r = c.finalize(meta(), &[], 0);
        assert_abs_diff_eq!(r.mean_abs_jitter_ms, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.mean_signed_jitter_ms, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn periodic_arrivals_have_zero_jitter() {
        let mut c = Collector::new(SimTime::from_secs(1), SimTime::from_secs(2), &[40_000.0]);
        for frame in 0..50u64 {
            // Constant shift (wired delay) must not register as jitter.
            let at = SimTime::from_micros(frame * 40_000 + 23_685);
            c.record_delivery(&anchor_pkt(0, frame, 100, 0), at);
        }
        let r = c.finalize(meta(), &[], 0);
        assert_abs_diff_eq!(r.mean_abs_jitter_ms, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn throughput_definition_and_halving() {
        let duration = SimTime::from_secs(10);
        let mut full = Collector::new(SimTime::from_secs(1), duration, &[40_000.0]);
        let mut half = Collector::new(SimTime::from_secs(1), duration, &[40_000.0]);
        for frame in 0..250u64 {
            let pkt = anchor_pkt(0, frame, 1000, frame * 40);
            let at = SimTime::from_micros(frame * 40_000 + 20_000);
            full.record_delivery(&pkt, at);
            if frame % 2 == 0 {
                half.record_delivery(&pkt, at);
            } else {
                half.record_drop(&pkt, at, DropReason::Error);
            }
        }
        let rf = full.finalize(meta(), &[], 0);
        let rh = half.finalize(meta(), &[], 0);
        assert_abs_diff_eq!(rf.throughput_bps, 250.0 * 1000.0 * 8.0 / 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rh.throughput_bps, rf.throughput_bps / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rh.plr, 0.5, epsilon = 1e-12);
        assert!(!rh.acceptability.plr_ok);
    }

    #[test]
    fn empty_scenario_reports_zero_with_flag() {
        let c = Collector::new(SimTime::from_secs(1), SimTime::from_secs(5), &[]);
        let r = c.finalize(meta(), &[], 0);
        assert_eq!(r.throughput_bps, 0.0);
        assert_eq!(r.plr, 0.0);
        assert!(r.plr_undefined);
        assert_eq!(r.windows.len(), 5);
    }

    #[test]
    fn series_length_is_ceil_duration_over_window() {
        let c = Collector::new(SimTime::from_secs(1), SimTime::from_millis(3200), &[]);
        let r = c.finalize(meta(), &[], 0);
        assert_eq!(r.windows.len(), 4);
    }

    #[test]
    fn windows_bin_by_timestamp() {
        let mut c = Collector::new(SimTime::from_secs(1), SimTime::from_secs(3), &[40_000.0]);
        c.record_delivery(&anchor_pkt(0, 0, 500, 0), SimTime::from_millis(100));
        c.record_delivery(&anchor_pkt(0, 1, 500, 40), SimTime::from_millis(1100));
        c.record_frame_bler(0.25, SimTime::from_millis(2500));
        let r = c.finalize(meta(), &[], 0);
        assert_abs_diff_eq!(r.windows[0].throughput_bps, 4000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.windows[1].throughput_bps, 4000.0, epsilon = 1e-9);
        assert_eq!(r.windows[2].throughput_bps, 0.0);
        assert_abs_diff_eq!(r.windows[2].mean_bler, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn csv_has_window_rows_and_summary_row() {
        let mut c = Collector::new(SimTime::from_secs(1), SimTime::from_secs(2), &[40_000.0]);
        c.record_delivery(&anchor_pkt(0, 0, 500, 0), SimTime::from_millis(100));
        let r = c.finalize(meta(), &[], 0);
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 + 1, "header + 2 windows + summary");
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[3].ends_with(",summary"));
        assert!(lines[1].starts_with("test,qpsk12,50,freespace,rtps,1,"));
    }
}
