//! Per-frame downlink MAC: five 802.16 service classes with per-flow
//! FIFO queues, strict class priority, polling cadence for the polled
//! classes, token-bucket rate policing, deadline drops, and BLER-driven
//! transmission loss. No ARQ: errored packets are counted as dropped.

use std::collections::VecDeque;

use crate::error::Error;
use crate::sim::{RngStream, SimTime};
use crate::traffic::MediaPacket;

/// The five 802.16 scheduling services, in strict priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ServiceClassKind {
    Ugs,
    ErtPs,
    RtPs,
    NrtPs,
    Be,
}

pub const SERVICE_CLASS_NAMES: [&str; 5] = ["ugs", "ertps", "rtps", "nrtps", "be"];

pub const PRIORITY_ORDER: [ServiceClassKind; 5] = [
    ServiceClassKind::Ugs,
    ServiceClassKind::ErtPs,
    ServiceClassKind::RtPs,
    ServiceClassKind::NrtPs,
    ServiceClassKind::Be,
];

impl ServiceClassKind {
    pub fn name(&self) -> &'static str {
        match self {
            ServiceClassKind::Ugs => "ugs",
            ServiceClassKind::ErtPs => "ertps",
            ServiceClassKind::RtPs => "rtps",
            ServiceClassKind::NrtPs => "nrtps",
            ServiceClassKind::Be => "be",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "ugs" => Ok(ServiceClassKind::Ugs),
            "ertps" => Ok(ServiceClassKind::ErtPs),
            "rtps" => Ok(ServiceClassKind::RtPs),
            "nrtps" => Ok(ServiceClassKind::NrtPs),
            "be" => Ok(ServiceClassKind::Be),
            other => Err(Error::config(format!(
                "unknown service class '{other}'; valid names: {}",
                SERVICE_CLASS_NAMES.join(", ")
            ))),
        }
    }

    /// rtPS and nrtPS are granted only on their polling frames.
    pub fn is_polled(&self) -> bool {
        matches!(self, ServiceClassKind::RtPs | ServiceClassKind::NrtPs)
    }

    /// Real-time polled classes drop packets that out-live their
    /// deadline; nrtPS and BE never expire traffic.
    pub fn drops_expired(&self) -> bool {
        matches!(self, ServiceClassKind::RtPs | ServiceClassKind::ErtPs)
    }
}

/// QoS parameter set for one service class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceClass {
    pub kind: ServiceClassKind,
    /// Token-bucket rate cap; 0 means uncapped.
    pub max_sustained_rate_mbps: f64,
    pub min_reserved_rate_mbps: f64,
    pub max_latency_ms: f64,
    pub polling_interval_frames: u32,
}

impl ServiceClass {
    pub fn new(
        kind: ServiceClassKind,
        max_sustained_rate_mbps: f64,
        min_reserved_rate_mbps: f64,
        max_latency_ms: f64,
        polling_interval_frames: u32,
    ) -> Result<Self, Error> {
        if max_sustained_rate_mbps < 0.0 || min_reserved_rate_mbps < 0.0 {
            return Err(Error::invalid("service-class rates must be >= 0"));
        }
        if kind == ServiceClassKind::Ugs && max_sustained_rate_mbps != min_reserved_rate_mbps {
            return Err(Error::invalid(
                "UGS requires max_sustained_rate == min_reserved_rate (fixed periodic grant)",
            ));
        }
        if kind.is_polled() && polling_interval_frames == 0 {
            return Err(Error::invalid("polling interval must be >= 1 frame"));
        }
        Ok(ServiceClass {
            kind,
            max_sustained_rate_mbps,
            min_reserved_rate_mbps,
            max_latency_ms,
            polling_interval_frames,
        })
    }

    pub fn defaults(kind: ServiceClassKind) -> Self {
        match kind {
            ServiceClassKind::Ugs => Self::new(kind, 1.0, 1.0, 20.0, 1).unwrap(),
            ServiceClassKind::ErtPs => Self::new(kind, 5.0, 0.5, 30.0, 1).unwrap(),
            ServiceClassKind::RtPs => Self::new(kind, 5.0, 0.5, 400.0, 1).unwrap(),
            ServiceClassKind::NrtPs => Self::new(kind, 5.0, 0.1, 1000.0, 4).unwrap(),
            ServiceClassKind::Be => Self::new(kind, 1.0, 0.0, 0.0, 1).unwrap(),
        }
    }
}

/// Per-flow packet and byte counters. `enqueued` counts every packet
/// offered to the queue, so at any instant
/// `enqueued = delivered + dropped_* + still queued`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowCounters {
    pub enqueued: u64,
    pub delivered: u64,
    pub dropped_expired: u64,
    pub dropped_error: u64,
    pub dropped_overflow: u64,
    pub enqueued_bytes: u64,
    pub delivered_bytes: u64,
    pub dropped_expired_bytes: u64,
    pub dropped_error_bytes: u64,
    pub dropped_overflow_bytes: u64,
}

impl FlowCounters {
    pub fn dropped_total(&self) -> u64 {
        self.dropped_expired + self.dropped_error + self.dropped_overflow
    }

    pub fn dropped_total_bytes(&self) -> u64 {
        self.dropped_expired_bytes + self.dropped_error_bytes + self.dropped_overflow_bytes
    }
}

/// One MAC connection: class, FIFO queue, limits, counters, and the
/// token bucket enforcing its sustained-rate cap.
#[derive(Debug, Clone)]
pub struct ServiceFlow {
    pub id: usize,
    pub class: ServiceClass,
    pub queue_limit_bytes: u64,
    pub counters: FlowCounters,
    queue: VecDeque<MediaPacket>,
    queue_bytes: u64,
    tokens_bytes: f64,
    polled: bool,
}

const TOKEN_BUCKET_DEPTH_S: f64 = 0.25;

impl ServiceFlow {
    pub fn new(id: usize, class: ServiceClass, queue_limit_bytes: u64) -> Self {
        let depth = class.max_sustained_rate_mbps * 1e6 / 8.0 * TOKEN_BUCKET_DEPTH_S;
        ServiceFlow {
            id,
            class,
            queue_limit_bytes,
            counters: FlowCounters::default(),
            queue: VecDeque::new(),
            queue_bytes: 0,
            tokens_bytes: depth,
            polled: false,
        }
    }

    /// Appends FIFO; a packet that would push the queue past its byte
    /// limit is drop-tailed (the limit itself is inclusive).
    pub fn enqueue(&mut self, pkt: MediaPacket) -> bool {
        self.counters.enqueued += 1;
        self.counters.enqueued_bytes += pkt.size as u64;
        if self.queue_bytes + pkt.size as u64 <= self.queue_limit_bytes {
            self.queue_bytes += pkt.size as u64;
            self.queue.push_back(pkt);
            true
        } else {
            self.counters.dropped_overflow += 1;
            self.counters.dropped_overflow_bytes += pkt.size as u64;
            false
        }
    }

    pub fn queued_packets(&self) -> u64 {
        self.queue.len() as u64
    }

    pub fn queued_bytes(&self) -> u64 {
        self.queue_bytes
    }

    /// Bytes still awaiting transmission (partial head progress excluded).
    pub fn pending_bytes(&self) -> u64 {
        self.queue_bytes - self.queue.front().map_or(0, |p| p.sent as u64)
    }

    /// Marks the flow eligible for grants on the next polling frame.
    pub fn mark_polled(&mut self) {
        self.polled = true;
    }

    pub fn is_polled(&self) -> bool {
        self.polled
    }

    fn refill_tokens(&mut self, frame_s: f64) {
        let rate = self.class.max_sustained_rate_mbps;
        if rate <= 0.0 {
            return;
        }
        let rate_bytes = rate * 1e6 / 8.0;
        let depth = rate_bytes * TOKEN_BUCKET_DEPTH_S;
        self.tokens_bytes = (self.tokens_bytes + rate_bytes * frame_s).min(depth);
    }

    fn token_allowance(&self) -> u64 {
        if self.class.max_sustained_rate_mbps <= 0.0 {
            u64::MAX
        } else {
            self.tokens_bytes.max(0.0) as u64
        }
    }

    fn spend_tokens(&mut self, bytes: u64) {
        if self.class.max_sustained_rate_mbps > 0.0 {
            self.tokens_bytes -= bytes as f64;
        }
    }

    /// Drops expired, not-yet-started packets from the queue front.
    fn drop_expired(&mut self, now: SimTime, drops: &mut Vec<DropRecord>) {
        if !self.class.kind.drops_expired() {
            return;
        }
        while let Some(head) = self.queue.front() {
            let expired = head.sent == 0 && head.deadline.is_some_and(|d| d <= now);
            if !expired {
                break;
            }
            let pkt = self.queue.pop_front().unwrap();
            self.queue_bytes -= pkt.size as u64;
            self.counters.dropped_expired += 1;
            self.counters.dropped_expired_bytes += pkt.size as u64;
            drops.push(DropRecord { flow: self.id, packet: pkt, at: now, reason: DropReason::Expired });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    Expired,
    Error,
    Overflow,
}

/// A packet leaving the system without delivery.
#[derive(Debug, Clone, Copy)]
pub struct DropRecord {
    pub flow: usize,
    pub packet: MediaPacket,
    pub at: SimTime,
    pub reason: DropReason,
}

/// Byte grants for one MAC frame, in service order. The grant total
/// never exceeds the frame capacity.
#[derive(Debug, Clone, Default)]
pub struct FrameAllocation {
    pub grants: Vec<(usize, u64)>,
    pub total: u64,
}

/// A delivered packet with its air-interface completion instant.
#[derive(Debug, Clone, Copy)]
pub struct Delivery {
    pub flow: usize,
    pub packet: MediaPacket,
    pub completed_at: SimTime,
}

#[derive(Debug, Default)]
pub struct TransmitOutcome {
    pub delivered: Vec<Delivery>,
    pub errored: Vec<DropRecord>,
}

/// Downlink scheduler state: frame counter and per-class round-robin
/// cursors.
#[derive(Debug, Default)]
pub struct DlScheduler {
    frame_index: u64,
    rr_cursor: [usize; 5],
}

impl DlScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    /// Builds the grant map for one MAC frame.
    ///
    /// Strict priority UGS > ertPS > rtPS > nrtPS > BE; round-robin
    /// rotation within a class; UGS takes its fixed grant first whether
    /// or not it has traffic; rtPS/nrtPS are granted only when polled;
    /// expired real-time packets are dropped before granting; BE sees
    /// only the residual capacity.
    pub fn schedule_frame(
        &mut self,
        flows: &mut [ServiceFlow],
        capacity_bytes: u64,
        now: SimTime,
        frame_s: f64,
    ) -> (FrameAllocation, Vec<DropRecord>) {
        let mut drops = Vec::new();
        for flow in flows.iter_mut() {
            flow.refill_tokens(frame_s);
            flow.drop_expired(now, &mut drops);
        }

        let mut alloc = FrameAllocation::default();
        let mut remaining = capacity_bytes;
        for (class_rank, kind) in PRIORITY_ORDER.iter().enumerate() {
            let members: Vec<usize> = flows
                .iter()
                .enumerate()
                .filter(|(_, f)| {
                    f.class.kind == *kind && (!kind.is_polled() || f.polled)
                })
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                continue;
            }
            let start = self.rr_cursor[class_rank] % members.len();
            self.rr_cursor[class_rank] = self.rr_cursor[class_rank].wrapping_add(1);
            for offset in 0..members.len() {
                if remaining == 0 {
                    break;
                }
                let idx = members[(start + offset) % members.len()];
                let flow = &mut flows[idx];
                let grant = if *kind == ServiceClassKind::Ugs {
                    // Fixed periodic reservation, consumed even when idle.
                    let fixed = (flow.class.min_reserved_rate_mbps * 1e6 / 8.0 * frame_s) as u64;
                    fixed.min(remaining)
                } else {
                    flow.pending_bytes().min(flow.token_allowance()).min(remaining)
                };
                if grant > 0 {
                    flow.spend_tokens(grant);
                    remaining -= grant;
                    alloc.total += grant;
                    alloc.grants.push((idx, grant));
                }
            }
        }

        for flow in flows.iter_mut() {
            if flow.class.kind.is_polled() {
                flow.polled = false;
            }
        }
        self.frame_index += 1;
        debug_assert!(alloc.total <= capacity_bytes);
        (alloc, drops)
    }
}

/// Serializes the granted bytes onto the air interface in allocation
/// order. Each packet that completes within the frame is errored
/// independently with probability `bler_p` (counted dropped-error, no
/// retransmission) or delivered at its completion instant.
pub fn transmit(
    flows: &mut [ServiceFlow],
    alloc: &FrameAllocation,
    bler_p: f64,
    rng: &mut RngStream,
    frame_start: SimTime,
    line_rate_bps: f64,
) -> TransmitOutcome {
    let mut outcome = TransmitOutcome::default();
    let mut cumulative_bytes: u64 = 0;
    for &(flow_idx, grant) in &alloc.grants {
        let flow = &mut flows[flow_idx];
        let mut budget = grant;
        while budget > 0 {
            let Some(head) = flow.queue.front_mut() else { break };
            let need = (head.size - head.sent) as u64;
            let take = need.min(budget);
            head.sent += take as u32;
            budget -= take;
            cumulative_bytes += take;
            if head.sent == head.size {
                let packet = flow.queue.pop_front().unwrap();
                flow.queue_bytes -= packet.size as u64;
                let offset_us = cumulative_bytes as f64 * 8.0 / line_rate_bps * 1e6;
                let completed_at = frame_start + SimTime::from_micros(offset_us.round() as u64);
                if rng.chance(bler_p) {
                    flow.counters.dropped_error += 1;
                    flow.counters.dropped_error_bytes += packet.size as u64;
                    outcome.errored.push(DropRecord {
                        flow: flow_idx,
                        packet,
                        at: completed_at,
                        reason: DropReason::Error,
                    });
                } else {
                    flow.counters.delivered += 1;
                    flow.counters.delivered_bytes += packet.size as u64;
                    outcome.delivered.push(Delivery { flow: flow_idx, packet, completed_at });
                }
            }
        }
    }
    outcome
}

/// Checks the conservation identity for one flow.
pub fn conservation_holds(flow: &ServiceFlow) -> bool {
    flow.counters.enqueued
        == flow.counters.delivered
            + flow.counters.dropped_total()
            + flow.queued_packets()
}
