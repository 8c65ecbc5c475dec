//! Deterministic discrete-event engine: integer-microsecond virtual
//! clock, totally ordered event queue, and named seeded RNG streams.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::Error;

/// Simulation time in integer microseconds.
///
/// An integer clock keeps 5 ms MAC frames and 40 ms video inter-arrivals
/// exact over multi-hour runs; floating seconds would drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 / 1e3
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl std::ops::Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl std::ops::Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// Event payload. Payloads carry flow indices rather than domain objects
/// so the engine stays independent of scenario state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// One 5 ms MAC frame boundary: channel sample, link adaptation,
    /// scheduling, transmission.
    FrameTick,
    /// Subscriber position and serving-cell refresh.
    TrajectoryUpdate,
    /// Bandwidth poll opportunity for one polled flow.
    Poll { flow: usize },
    /// A media source emits its next application frame.
    PacketArrival { flow: usize },
    /// Metrics window boundary (queue-state sampling).
    MetricsWindow,
}

/// A scheduled event. `(fire_at, seq)` is a unique total-order key;
/// `seq` is the insertion counter, so equal-time events fire FIFO.
#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub fire_at: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

/// Opaque handle for a scheduled event (its insertion sequence number).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventHandle(pub u64);

#[derive(Debug)]
struct QueuedEvent(Event);

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.0.fire_at == other.0.fire_at && self.0.seq == other.0.seq
    }
}

impl Eq for QueuedEvent {}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueuedEvent {
    // Reversed so the BinaryHeap pops the earliest (fire_at, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.fire_at, other.0.seq).cmp(&(self.0.fire_at, self.0.seq))
    }
}

/// Single-threaded discrete-event engine for one scenario.
#[derive(Debug)]
pub struct Engine {
    clock: SimTime,
    next_seq: u64,
    queue: BinaryHeap<QueuedEvent>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine { clock: SimTime::ZERO, next_seq: 0, queue: BinaryHeap::new() }
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Enqueues an event. Scheduling in the past is a hard error.
    pub fn schedule(&mut self, fire_at: SimTime, kind: EventKind) -> Result<EventHandle, Error> {
        if fire_at < self.clock {
            return Err(Error::ScheduleInPast {
                requested: fire_at.as_micros(),
                clock: self.clock.as_micros(),
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(QueuedEvent(Event { fire_at, seq, kind }));
        Ok(EventHandle(seq))
    }

    /// Fires all events with `fire_at <= t_end` in `(fire_at, seq)` order
    /// and returns the count. The horizon is inclusive; afterwards the
    /// clock rests at `t_end` even if the queue emptied earlier.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Engine, Event),
    {
        let mut fired = 0;
        while let Some(head) = self.queue.peek() {
            if head.0.fire_at > t_end {
                break;
            }
            let event = self.queue.pop().expect("peeked event").0;
            debug_assert!(event.fire_at >= self.clock, "event order violated");
            self.clock = event.fire_at;
            handler(self, event);
            fired += 1;
        }
        if t_end > self.clock {
            self.clock = t_end;
        }
        fired
    }
}

/// A named, seeded random stream. The same `(seed, stream id)` pair
/// yields an identical draw sequence across runs, so every source of
/// randomness in a scenario is replayable in isolation.
pub struct RngStream {
    label: String,
    rng: ChaCha12Rng,
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream").field("label", &self.label).finish()
    }
}

impl RngStream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let h = fnv1a(label.as_bytes());
        key[8..16].copy_from_slice(&h.to_le_bytes());
        key[16..24].copy_from_slice(&(h ^ seed.rotate_left(32)).to_le_bytes());
        key[24..32].copy_from_slice(&h.wrapping_mul(0x9e37_79b9_7f4a_7c15).to_le_bytes());
        RngStream { label: label.to_string(), rng: ChaCha12Rng::from_seed(key) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform draw in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Bernoulli draw; always consumes exactly one uniform.
    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }

    /// Normal draw via Box-Muller; consumes exactly two uniforms.
    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        let u1: f64 = 1.0 - self.rng.gen::<f64>(); // (0, 1]
        let u2: f64 = self.rng.gen();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        mean + std_dev * z
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
