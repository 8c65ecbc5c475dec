//! Hexagonal 7-cell geometry, waypoint trajectory playback, and
//! power-based serving-cell selection with hysteresis.

use std::path::Path;

use crate::channel::{FreeSpaceParams, PathLossModel};
use crate::error::Error;
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One center cell plus a ring of six, tangent hexagons: ring centers
/// sit sqrt(3) * radius from the center.
#[derive(Debug, Clone)]
pub struct CellLayout {
    cells: Vec<Point>,
    radius_m: f64,
}

impl CellLayout {
    pub fn hex7(radius_m: f64) -> Result<Self, Error> {
        if !(radius_m > 0.0) {
            return Err(Error::invalid(format!("cell radius must be > 0, got {radius_m}")));
        }
        let ring = 3f64.sqrt() * radius_m;
        let mut cells = vec![Point::new(0.0, 0.0)];
        for k in 0..6 {
            let theta = std::f64::consts::TAU * k as f64 / 6.0;
            cells.push(Point::new(ring * theta.cos(), ring * theta.sin()));
        }
        Ok(CellLayout { cells, radius_m })
    }

    pub fn cells(&self) -> &[Point] {
        &self.cells
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn cell(&self, id: usize) -> Point {
        self.cells[id]
    }
}

/// Piecewise-linear route replayed at constant speed.
#[derive(Debug, Clone)]
pub struct Trajectory {
    waypoints: Vec<Point>,
    speed_kmh: f64,
    loop_path: bool,
    cumulative_m: Vec<f64>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Point>, speed_kmh: f64, loop_path: bool) -> Result<Self, Error> {
        if waypoints.len() < 2 {
            return Err(Error::invalid(format!(
                "trajectory needs at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if !(speed_kmh > 0.0) {
            return Err(Error::invalid(format!("speed must be > 0 km/h, got {speed_kmh}")));
        }
        let mut cumulative_m = Vec::with_capacity(waypoints.len() + 1);
        cumulative_m.push(0.0);
        for pair in waypoints.windows(2) {
            let last = *cumulative_m.last().unwrap();
            cumulative_m.push(last + pair[0].distance_to(&pair[1]));
        }
        if loop_path {
            let last = *cumulative_m.last().unwrap();
            let closing = waypoints.last().unwrap().distance_to(&waypoints[0]);
            cumulative_m.push(last + closing);
        }
        if *cumulative_m.last().unwrap() <= 0.0 {
            return Err(Error::invalid("trajectory has zero length"));
        }
        Ok(Trajectory { waypoints, speed_kmh, loop_path, cumulative_m })
    }

    /// Parses "x_meters y_meters" lines; '#' starts a comment.
    pub fn parse_waypoints(text: &str) -> Result<Vec<Point>, Error> {
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse = |s: Option<&str>, what: &str| -> Result<f64, Error> {
                s.ok_or_else(|| Error::TrajectoryParse {
                    line: idx + 1,
                    message: format!("missing {what}"),
                })?
                .parse::<f64>()
                .map_err(|e| Error::TrajectoryParse {
                    line: idx + 1,
                    message: format!("bad {what}: {e}"),
                })
            };
            let x = parse(fields.next(), "x coordinate")?;
            let y = parse(fields.next(), "y coordinate")?;
            if fields.next().is_some() {
                return Err(Error::TrajectoryParse {
                    line: idx + 1,
                    message: "expected exactly two fields".into(),
                });
            }
            points.push(Point::new(x, y));
        }
        Ok(points)
    }

    pub fn load(path: &Path, speed_kmh: f64, loop_path: bool) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::new(Self::parse_waypoints(&text)?, speed_kmh, loop_path)
    }

    pub fn speed_m_s(&self) -> f64 {
        self.speed_kmh / 3.6
    }

    pub fn total_length_m(&self) -> f64 {
        *self.cumulative_m.last().unwrap()
    }

    pub fn lap_time_s(&self) -> f64 {
        self.total_length_m() / self.speed_m_s()
    }

    /// Position after traveling at constant speed for `t`. Loops wrap;
    /// open paths park at their final waypoint.
    pub fn position_at(&self, t: SimTime) -> Point {
        let total = self.total_length_m();
        let mut traveled = self.speed_m_s() * t.as_secs_f64();
        if self.loop_path {
            traveled %= total;
        } else if traveled >= total {
            return *self.waypoints.last().unwrap();
        }
        // cumulative_m[i] is the distance at waypoint i (plus a closing
        // segment when looping), so find the segment containing `traveled`.
        let seg = match self
            .cumulative_m
            .windows(2)
            .position(|w| traveled >= w[0] && traveled < w[1])
        {
            Some(i) => i,
            None => return *self.waypoints.last().unwrap(),
        };
        let frac = (traveled - self.cumulative_m[seg])
            / (self.cumulative_m[seg + 1] - self.cumulative_m[seg]);
        let a = self.waypoints[seg];
        let b = self.waypoints[(seg + 1) % self.waypoints.len()];
        Point::new(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y))
    }
}

/// Handoff hysteresis margin and the outage it costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoffPolicy {
    pub margin_db: f64,
    /// Downlink delivery is suspended for this long after a handoff.
    pub latency: SimTime,
}

impl HandoffPolicy {
    pub fn new(margin_db: f64, latency: SimTime) -> Result<Self, Error> {
        if !(margin_db >= 0.0) {
            return Err(Error::invalid(format!("handoff margin must be >= 0, got {margin_db}")));
        }
        Ok(HandoffPolicy { margin_db, latency })
    }
}

impl Default for HandoffPolicy {
    fn default() -> Self {
        HandoffPolicy { margin_db: 3.0, latency: SimTime::from_millis(50) }
    }
}

// Received-power comparisons clamp distance to a meter so co-located
// positions stay finite.
const MIN_EVAL_DISTANCE_M: f64 = 1.0;

fn rx_power_dbm(
    pos: &Point,
    cell: &Point,
    model: &PathLossModel,
    budget: &FreeSpaceParams,
) -> f64 {
    let d = pos.distance_to(cell).max(MIN_EVAL_DISTANCE_M);
    let pl = model
        .mean_path_loss(d, budget)
        .expect("distance clamped above zero");
    budget.tx_power_dbm + budget.g_tx_dbi + budget.g_rx_dbi - pl
}

/// Keeps the current cell unless another's mean received power beats it
/// by more than the hysteresis margin.
pub fn serving_cell(
    pos: &Point,
    layout: &CellLayout,
    current: usize,
    policy: &HandoffPolicy,
    model: &PathLossModel,
    budget: &FreeSpaceParams,
) -> usize {
    let current_power = rx_power_dbm(pos, &layout.cell(current), model, budget);
    let mut best = current;
    let mut best_power = current_power;
    for (id, cell) in layout.cells().iter().enumerate() {
        if id == current {
            continue;
        }
        let p = rx_power_dbm(pos, cell, model, budget);
        if p > best_power {
            best = id;
            best_power = p;
        }
    }
    if best != current && best_power > current_power + policy.margin_db {
        best
    } else {
        current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn budget() -> FreeSpaceParams {
        FreeSpaceParams::default()
    }

    #[test]
    fn hex7_geometry() {
        let layout = CellLayout::hex7(200.0).unwrap();
        assert_eq!(layout.cells().len(), 7);
        let center = layout.cell(0);
        assert_eq!(center, Point::new(0.0, 0.0));
        for id in 1..7 {
            let d = layout.cell(id).distance_to(&center);
            assert_abs_diff_eq!(d, 3f64.sqrt() * 200.0, epsilon = 1e-9);
        }
        // Adjacent ring cells are also one lattice spacing apart.
        let d = layout.cell(1).distance_to(&layout.cell(2));
        assert_abs_diff_eq!(d, 3f64.sqrt() * 200.0, epsilon = 1e-9);
    }

    #[test]
    fn position_starts_at_first_waypoint() {
        let tr = Trajectory::new(
            vec![Point::new(10.0, -3.0), Point::new(20.0, -3.0)],
            50.0,
            false,
        )
        .unwrap();
        assert_eq!(tr.position_at(SimTime::ZERO), Point::new(10.0, -3.0));
    }

    #[test]
    fn straight_segment_kinematics() {
        // 1000 m straight at 50 km/h: after 36 s the mark is at 500 m.
        let tr = Trajectory::new(
            vec![Point::new(0.0, 0.0), Point::new(1000.0, 0.0)],
            50.0,
            false,
        )
        .unwrap();
        let p = tr.position_at(SimTime::from_secs(36));
        assert_abs_diff_eq!(p.x, 500.0, epsilon = 1e-6);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn open_path_parks_at_the_end() {
        let tr = Trajectory::new(
            vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0)],
            50.0,
            false,
        )
        .unwrap();
        assert_eq!(tr.position_at(SimTime::from_secs(3600)), Point::new(100.0, 0.0));
    }

    #[test]
    fn loop_is_periodic() {
        let tr = Trajectory::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(300.0, 0.0),
                Point::new(300.0, 300.0),
                Point::new(0.0, 300.0),
            ],
            60.0,
            true,
        )
        .unwrap();
        let lap_us = (tr.lap_time_s() * 1e6).round() as u64;
        for t_us in [0u64, 777_777, 5_000_000, 33_333_333] {
            let a = tr.position_at(SimTime::from_micros(t_us));
            let b = tr.position_at(SimTime::from_micros(t_us + lap_us));
            assert_abs_diff_eq!(a.x, b.x, epsilon = 1e-4);
            assert_abs_diff_eq!(a.y, b.y, epsilon = 1e-4);
        }
    }

    #[test]
    fn waypoint_parsing_handles_comments_and_errors() {
        let text = "# default loop\n10 20\n  30.5   -40.25  # inline note\n\n";
        let pts = Trajectory::parse_waypoints(text).unwrap();
        assert_eq!(pts, vec![Point::new(10.0, 20.0), Point::new(30.5, -40.25)]);

        let err = Trajectory::parse_waypoints("10 twenty").unwrap_err();
        assert!(matches!(err, Error::TrajectoryParse { line: 1, .. }), "{err}");
        let err = Trajectory::parse_waypoints("1 2 3").unwrap_err();
        assert!(matches!(err, Error::TrajectoryParse { line: 1, .. }), "{err}");
    }

    #[test]
    fn at_cell_center_no_handoff() {
        let layout = CellLayout::hex7(200.0).unwrap();
        let policy = HandoffPolicy::default();
        let pos = layout.cell(0);
        let next =
            serving_cell(&pos, &layout, 0, &policy, &PathLossModel::FreeSpace, &budget());
        assert_eq!(next, 0);
    }

    #[test]
    fn midway_tie_keeps_current() {
        let layout = CellLayout::hex7(200.0).unwrap();
        let policy = HandoffPolicy::new(3.0, SimTime::from_millis(50)).unwrap();
        let a = layout.cell(0);
        let b = layout.cell(1);
        let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        assert_eq!(
            serving_cell(&mid, &layout, 0, &policy, &PathLossModel::FreeSpace, &budget()),
            0
        );
        assert_eq!(
            serving_cell(&mid, &layout, 1, &policy, &PathLossModel::FreeSpace, &budget()),
            1
        );
    }

    #[test]
    fn neighbor_center_forces_handoff() {
        let layout = CellLayout::hex7(200.0).unwrap();
        let policy = HandoffPolicy::new(3.0, SimTime::from_millis(50)).unwrap();
        let pos = layout.cell(3);
        assert_eq!(
            serving_cell(&pos, &layout, 0, &policy, &PathLossModel::FreeSpace, &budget()),
            3
        );
    }

    #[test]
    fn handoff_count_is_nonincreasing_in_margin() {
        let layout = CellLayout::hex7(200.0).unwrap();
        let tr = Trajectory::new(
            vec![
                Point::new(-500.0, 40.0),
                Point::new(500.0, 40.0),
                Point::new(500.0, -40.0),
                Point::new(-500.0, -40.0),
            ],
            50.0,
            true,
        )
        .unwrap();
        let count_for = |margin: f64| {
            let policy = HandoffPolicy::new(margin, SimTime::from_millis(50)).unwrap();
            let mut serving = 0usize;
            let mut handoffs = 0u64;
            let mut t = SimTime::ZERO;
            let end = SimTime::from_secs(200);
            while t <= end {
                let pos = tr.position_at(t);
                let next = serving_cell(
                    &pos,
                    &layout,
                    serving,
                    &policy,
                    &PathLossModel::FreeSpace,
                    &budget(),
                );
                if next != serving {
                    handoffs += 1;
                    serving = next;
                }
                t = t + SimTime::from_millis(5);
            }
            handoffs
        };
        let margins = [0.0, 1.0, 3.0, 6.0, 12.0];
        let counts: Vec<u64> = margins.iter().map(|m| count_for(*m)).collect();
        for pair in counts.windows(2) {
            assert!(pair[1] <= pair[0], "handoffs not monotone in margin: {counts:?}");
        }
        assert!(counts[0] > 0, "route should cross cells");
    }

    #[test]
    fn faster_laps_hand_off_more_per_second() {
        let layout = CellLayout::hex7(200.0).unwrap();
        let route = vec![
            Point::new(-500.0, 40.0),
            Point::new(500.0, 40.0),
            Point::new(500.0, -40.0),
            Point::new(-500.0, -40.0),
        ];
        let rate_for = |speed: f64| {
            let tr = Trajectory::new(route.clone(), speed, true).unwrap();
            let policy = HandoffPolicy::default();
            let mut serving = 0usize;
            let mut handoffs = 0u64;
            let mut t = SimTime::ZERO;
            let end = SimTime::from_secs(300);
            while t <= end {
                let pos = tr.position_at(t);
                let next = serving_cell(
                    &pos,
                    &layout,
                    serving,
                    &policy,
                    &PathLossModel::FreeSpace,
                    &budget(),
                );
                if next != serving {
                    handoffs += 1;
                    serving = next;
                }
                t = t + SimTime::from_millis(5);
            }
            handoffs as f64 / 300.0
        };
        assert!(rate_for(150.0) >= rate_for(50.0));
    }

    #[test]
    fn serving_cell_constant_between_handoffs() {
        let layout = CellLayout::hex7(200.0).unwrap();
        let tr = Trajectory::new(
            vec![Point::new(-400.0, 0.0), Point::new(400.0, 0.0)],
            100.0,
            true,
        )
        .unwrap();
        let policy = HandoffPolicy::default();
        let mut serving = 0usize;
        let mut segments: Vec<(usize, u64)> = Vec::new();
        let mut t = SimTime::ZERO;
        while t <= SimTime::from_secs(120) {
            let next = serving_cell(
                &tr.position_at(t),
                &layout,
                serving,
                &policy,
                &PathLossModel::FreeSpace,
                &budget(),
            );
            match segments.last_mut() {
                Some((cell, len)) if *cell == next => *len += 1,
                _ => segments.push((next, 1)),
            }
            serving = next;
            t = t + SimTime::from_millis(5);
        }
        // No segment may repeat its predecessor (that would mean a
        // same-cell "handoff"), and flapping shows up as 1-sample runs.
        for pair in segments.windows(2) {
            assert_ne!(pair[0].0, pair[1].0);
        }
        let shortest = segments.iter().map(|(_, len)| *len).min().unwrap();
        assert!(shortest > 20, "flapping detected: {segments:?}");
    }
}
