//! Gnuplot-style data files: one file per metric, one column per
//! link-adaptation mode, rows along the swept axis.

use std::collections::BTreeSet;
use std::io::Read;

use crate::error::Error;
use crate::mac::SERVICE_CLASS_NAMES;
use crate::metrics::{MetricsReport, CSV_HEADER};
use crate::scenario::config::MODE_NAMES;

/// The swept axis of a case: mobile speed, path-loss model, or class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    Speed,
    Pathloss,
    Class,
}

impl PlotAxis {
    pub fn name(&self) -> &'static str {
        match self {
            PlotAxis::Speed => "speed",
            PlotAxis::Pathloss => "pathloss",
            PlotAxis::Class => "class",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "speed" => Ok(PlotAxis::Speed),
            "pathloss" => Ok(PlotAxis::Pathloss),
            "class" => Ok(PlotAxis::Class),
            other => Err(Error::config(format!(
                "unknown plot axis '{other}'; valid names: speed, pathloss, class"
            ))),
        }
    }

    /// Scenario-id prefix whose case sweeps this axis.
    pub fn case_prefix(&self) -> &'static str {
        match self {
            PlotAxis::Speed => "case1-",
            PlotAxis::Pathloss => "case2-",
            PlotAxis::Class => "case3-",
        }
    }
}

/// One scenario summary, as plotted.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryPoint {
    pub id: String,
    pub mcs_mode: String,
    pub speed_kmh: f64,
    pub pathloss: String,
    pub service_class: String,
    pub jitter_ms: f64,
    pub delay_ms: f64,
    pub throughput_bps: f64,
    pub dropped_bps: f64,
}

pub fn summaries_from_reports(reports: &[&MetricsReport]) -> Vec<SummaryPoint> {
    reports
        .iter()
        .map(|r| SummaryPoint {
            id: r.meta.id.clone(),
            mcs_mode: r.meta.mcs_mode.clone(),
            speed_kmh: r.meta.speed_kmh,
            pathloss: r.meta.pathloss.clone(),
            service_class: r.meta.service_class.clone(),
            jitter_ms: r.mean_abs_jitter_ms,
            delay_ms: r.mean_delay_ms,
            throughput_bps: r.throughput_bps,
            dropped_bps: r.dropped_bps,
        })
        .collect()
}

/// Reads summary rows back out of a results CSV.
pub fn parse_results_csv<R: Read>(reader: R) -> Result<Vec<SummaryPoint>, Error> {
    let mut rdr = csv::Reader::from_reader(reader);
    let err = |e: csv::Error| Error::config(format!("results csv: {e}"));
    let headers = rdr.headers().map_err(err)?.clone();
    let expected: Vec<&str> = CSV_HEADER.to_vec();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::config(format!(
            "results csv has unexpected columns {got:?}; expected {expected:?}"
        )));
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (c_id, c_mode, c_speed, c_pl, c_class) = (
        col("scenario-id"),
        col("mcs-mode"),
        col("speed-kmh"),
        col("pathloss-model"),
        col("service-class"),
    );
    let (c_delay, c_jitter, c_tp, c_drop, c_window) = (
        col("mean-delay-ms"),
        col("mean-jitter-ms"),
        col("throughput-bps"),
        col("dropped-bps"),
        col("window"),
    );
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(err)?;
        if &record[c_window] != "summary" {
            continue;
        }
        let num = |i: usize| -> Result<f64, Error> {
            record[i]
                .parse()
                .map_err(|e| Error::config(format!("results csv: bad number '{}': {e}", &record[i])))
        };
        points.push(SummaryPoint {
            id: record[c_id].to_string(),
            mcs_mode: record[c_mode].to_string(),
            speed_kmh: num(c_speed)?,
            pathloss: record[c_pl].to_string(),
            service_class: record[c_class].to_string(),
            jitter_ms: num(c_jitter)?,
            delay_ms: num(c_delay)?,
            throughput_bps: num(c_tp)?,
            dropped_bps: num(c_drop)?,
        });
    }
    Ok(points)
}

/// A plot-ready data file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFile {
    pub name: String,
    pub content: String,
}

const METRICS: [(&str, bool); 4] = [
    ("jitter", true), // plotted on a log scale: values cluster near zero
    ("delay", false),
    ("dropped", false),
    ("throughput", false),
];

fn axis_key(axis: PlotAxis, p: &SummaryPoint) -> String {
    match axis {
        PlotAxis::Speed => format!("{}", p.speed_kmh),
        PlotAxis::Pathloss => p.pathloss.clone(),
        PlotAxis::Class => p.service_class.clone(),
    }
}

fn axis_values(axis: PlotAxis, points: &[SummaryPoint]) -> Vec<String> {
    match axis {
        PlotAxis::Speed => {
            let mut speeds: Vec<f64> = points.iter().map(|p| p.speed_kmh).collect();
            speeds.sort_by(f64::total_cmp);
            speeds.dedup();
            speeds.iter().map(|s| format!("{s}")).collect()
        }
        PlotAxis::Pathloss => {
            let present: BTreeSet<&str> = points.iter().map(|p| p.pathloss.as_str()).collect();
            crate::channel::PATH_LOSS_NAMES
                .iter()
                .filter(|n| present.contains(**n))
                .map(|n| n.to_string())
                .collect()
        }
        PlotAxis::Class => {
            let present: BTreeSet<&str> =
                points.iter().map(|p| p.service_class.as_str()).collect();
            SERVICE_CLASS_NAMES
                .iter()
                .filter(|n| present.contains(**n))
                .map(|n| n.to_string())
                .collect()
        }
    }
}

/// Emits the four metric files for one axis. Modes appear in table
/// order, one column each; empty cells are marked `nan`, never zero;
/// duplicate (axis, mode) points (seed sweeps) are averaged.
pub fn emit_plot_data(points: &[SummaryPoint], axis: PlotAxis) -> Vec<PlotFile> {
    let rows = axis_values(axis, points);
    let modes: Vec<&str> = MODE_NAMES
        .iter()
        .copied()
        .filter(|m| points.iter().any(|p| p.mcs_mode == *m))
        .collect();

    let mut files = Vec::new();
    for (metric, log_scale) in METRICS {
        let value = |p: &SummaryPoint| -> f64 {
            match metric {
                "jitter" => p.jitter_ms,
                "delay" => p.delay_ms,
                "dropped" => p.dropped_bps,
                "throughput" => p.throughput_bps,
                _ => unreachable!(),
            }
        };
        let mut content = String::new();
        content.push_str(&format!("# {metric} vs {}\n", axis.name()));
        if log_scale {
            content.push_str("# yscale: log\n");
        }
        content.push_str(&format!("# {} {}\n", axis.name(), modes.join(" ")));
        for row in &rows {
            content.push_str(row);
            for mode in &modes {
                let cells: Vec<f64> = points
                    .iter()
                    .filter(|p| p.mcs_mode == *mode && axis_key(axis, p) == *row)
                    .map(&value)
                    .collect();
                if cells.is_empty() {
                    content.push_str(" nan");
                } else {
                    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
                    content.push_str(&format!(" {mean}"));
                }
            }
            content.push('\n');
        }
        files.push(PlotFile { name: format!("{}_{metric}.dat", axis.name()), content });
    }
    files
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(mode: &str, speed: f64, jitter: f64) -> SummaryPoint {
        SummaryPoint {
            id: format!("case1-s{speed:03.0}-{mode}"),
            mcs_mode: mode.into(),
            speed_kmh: speed,
            pathloss: "freespace".into(),
            service_class: "rtps".into(),
            jitter_ms: jitter,
            delay_ms: 25.0,
            throughput_bps: 6.4e5,
            dropped_bps: 100.0,
        }
    }

    #[test]
    fn emits_four_files_with_mode_columns() {
        let points = vec![
            point("qpsk12", 50.0, 2.0),
            point("qpsk12", 150.0, 3.0),
            point("amc1", 50.0, 0.1),
            point("amc1", 150.0, 0.2),
        ];
        let files = emit_plot_data(&points, PlotAxis::Speed);
        assert_eq!(files.len(), 4);
        let names: Vec<&str> = files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(
            names,
            ["speed_jitter.dat", "speed_delay.dat", "speed_dropped.dat", "speed_throughput.dat"]
        );
        let jitter = &files[0].content;
        assert!(jitter.contains("# yscale: log"));
        assert!(jitter.contains("# speed qpsk12 amc1"));
        assert!(jitter.contains("\n50 2 0.1\n"), "content:\n{jitter}");
        assert!(jitter.contains("\n150 3 0.2\n"));
        assert!(!files[1].content.contains("yscale"), "only jitter is log-hinted");
    }

    #[test]
    fn missing_cells_are_nan_not_zero() {
        let points = vec![point("qpsk12", 50.0, 2.0), point("amc1", 150.0, 0.2)];
        let files = emit_plot_data(&points, PlotAxis::Speed);
        let jitter = &files[0].content;
        assert!(jitter.contains("\n50 2 nan\n"), "content:\n{jitter}");
        assert!(jitter.contains("\n150 nan 0.2\n"));
    }

    #[test]
    fn duplicate_points_average() {
        let mut a = point("qpsk12", 50.0, 2.0);
        a.id = "seed1".into();
        let mut b = point("qpsk12", 50.0, 4.0);
        b.id = "seed2".into();
        let files = emit_plot_data(&[a, b], PlotAxis::Speed);
        assert!(files[0].content.contains("\n50 3\n"), "{}", files[0].content);
    }

    #[test]
    fn categorical_axes_use_canonical_order() {
        let mut p1 = point("qpsk12", 50.0, 1.0);
        p1.pathloss = "vehicular".into();
        let mut p2 = point("qpsk12", 50.0, 1.0);
        p2.pathloss = "freespace".into();
        let files = emit_plot_data(&[p1, p2], PlotAxis::Pathloss);
        let body: Vec<&str> = files[0]
            .content
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(body[0].split_whitespace().next(), Some("freespace"));
        assert_eq!(body[1].split_whitespace().next(), Some("vehicular"));
    }
}
