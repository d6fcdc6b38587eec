//! Canonical trajectory format: UTF-8, comma separated, header row
//!
//! ```text
//! scenario_id,time_s,agent_id,kind,x_m,y_m,heading_rad,length_m,width_m
//! ```
//!
//! The last three columns are empty for pedestrians and required for
//! vehicles.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, Vec2};

use super::DataError;

pub const HEADER: [&str; 9] = [
    "scenario_id",
    "time_s",
    "agent_id",
    "kind",
    "x_m",
    "y_m",
    "heading_rad",
    "length_m",
    "width_m",
];

/// Grid points allowed per resampled track.
pub const MAX_TRACK_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Pedestrian,
    Vehicle,
}

/// One row of the canonical format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scenario_id: String,
    pub time_s: f64,
    pub agent_id: String,
    pub kind: AgentKind,
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: Option<f64>,
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleDims {
    pub length: f64,
    pub width: f64,
}

/// One agent resampled onto the `dt` grid. Sample `i` is at time
/// `(start_step + i) * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTrack {
    pub id: String,
    pub kind: AgentKind,
    pub start_step: i64,
    pub positions: Vec<Vec2>,
    /// Vehicles only.
    pub headings: Vec<f64>,
    pub dims: Option<VehicleDims>,
}

impl AgentTrack {
    pub fn end_step(&self) -> i64 {
        self.start_step + self.positions.len() as i64 - 1
    }

    /// Index into this track for global step `step`, if present.
    pub fn index_of(&self, step: i64) -> Option<usize> {
        (step >= self.start_step && step <= self.end_step()).then(|| (step - self.start_step) as usize)
    }
}

/// A recorded scene resampled onto a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub dt: f64,
    pub agents: Vec<AgentTrack>,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    scenario_id: String,
    time_s: f64,
    agent_id: String,
    kind: String,
    x_m: f64,
    y_m: f64,
    heading_rad: Option<f64>,
    length_m: Option<f64>,
    width_m: Option<f64>,
}

fn parse_rows<R: Read>(reader: R) -> Result<Vec<(u64, TrajectoryRecord)>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| DataError::Malformed {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(DataError::Malformed {
            line: 1,
            message: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<RawRow>() {
        let row = row.map_err(|e| DataError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        // the reader has consumed the row, so its position is the next line
        let line = out.len() as u64 + 2;
        let bad = |message: String| DataError::Malformed { line, message };
        let kind = match row.kind.as_str() {
            "pedestrian" => AgentKind::Pedestrian,
            "vehicle" => AgentKind::Vehicle,
            other => return Err(bad(format!("unknown agent kind '{other}'"))),
        };
        if !row.time_s.is_finite() || !row.x_m.is_finite() || !row.y_m.is_finite() {
            return Err(bad("non-finite time or position".into()));
        }
        if kind == AgentKind::Vehicle {
            match (row.heading_rad, row.length_m, row.width_m) {
                (Some(h), Some(l), Some(w))
                    if h.is_finite() && l > 0.0 && w > 0.0 && l.is_finite() && w.is_finite() => {}
                _ => {
                    return Err(bad(
                        "vehicle rows need finite heading and positive length and width".into()
                    ))
                }
            }
        }
        out.push((
            line,
            TrajectoryRecord {
                scenario_id: row.scenario_id,
                time_s: row.time_s,
                agent_id: row.agent_id,
                kind,
                x_m: row.x_m,
                y_m: row.y_m,
                heading_rad: row.heading_rad,
                length_m: row.length_m,
                width_m: row.width_m,
            },
        ));
    }
    Ok(out)
}

/// Reads canonical records without resampling.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<TrajectoryRecord>, DataError> {
    Ok(parse_rows(reader)?.into_iter().map(|(_, r)| r).collect())
}

/// Linearly resamples a time-sorted track onto the `dt` grid inside its span.
fn resample(id: &str, rows: &[(u64, TrajectoryRecord)], dt: f64) -> Result<AgentTrack, DataError> {
    let first = &rows[0].1;
    let kind = first.kind;
    for w in rows.windows(2) {
        if w[1].1.kind != kind {
            return Err(DataError::Malformed {
                line: w[1].0,
                message: format!("agent {id} changes kind"),
            });
        }
        if w[1].1.time_s <= w[0].1.time_s {
            return Err(DataError::Malformed {
                line: w[1].0,
                message: format!("duplicate timestamp for agent {id}"),
            });
        }
    }
    let t0 = first.time_s;
    let t1 = rows[rows.len() - 1].1.time_s;
    let eps = 1e-6;
    let start_step = (t0 / dt - eps).ceil();
    let end_step = (t1 / dt + eps).floor();
    if !start_step.is_finite() || !end_step.is_finite() || start_step.abs() > 1e15 || end_step.abs() > 1e15 {
        return Err(DataError::Malformed {
            line: rows[0].0,
            message: "time out of range".into(),
        });
    }
    let (start_step, end_step) = (start_step as i64, end_step as i64);
    let count = end_step - start_step + 1;
    if count > MAX_TRACK_POINTS as i64 {
        return Err(DataError::Malformed {
            line: rows[0].0,
            message: format!("agent {id} spans more than {MAX_TRACK_POINTS} grid points"),
        });
    }
    let mut positions = Vec::with_capacity(count.max(0) as usize);
    let mut headings = Vec::new();
    let mut seg = 0;
    for step in start_step..=end_step {
        let t = (step as f64 * dt).clamp(t0, t1);
        while seg + 1 < rows.len() - 1 && rows[seg + 1].1.time_s < t {
            seg += 1;
        }
        let (a, b) = if rows.len() == 1 {
            (&rows[0].1, &rows[0].1)
        } else {
            (&rows[seg].1, &rows[seg + 1].1)
        };
        let w = if b.time_s > a.time_s {
            ((t - a.time_s) / (b.time_s - a.time_s)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        positions.push(Vec2::new(a.x_m + (b.x_m - a.x_m) * w, a.y_m + (b.y_m - a.y_m) * w));
        if kind == AgentKind::Vehicle {
            let (ha, hb) = (a.heading_rad.unwrap_or(0.0), b.heading_rad.unwrap_or(0.0));
            headings.push(wrap_angle(ha + wrap_angle(hb - ha) * w));
        }
    }
    let dims = (kind == AgentKind::Vehicle).then(|| VehicleDims {
        length: first.length_m.unwrap_or(0.0),
        width: first.width_m.unwrap_or(0.0),
    });
    Ok(AgentTrack {
        id: id.to_string(),
        kind,
        start_step,
        positions,
        headings,
        dims,
    })
}

/// Parses canonical text and resamples every agent onto the `dt` grid.
/// Scenarios are returned sorted by id, agents by id within a scenario.
pub fn read_dataset<R: Read>(reader: R, dt: f64) -> Result<Vec<Scenario>, DataError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DataError::InvalidTimeStep(dt));
    }
    let rows = parse_rows(reader)?;
    let mut grouped: BTreeMap<String, BTreeMap<String, Vec<(u64, TrajectoryRecord)>>> = BTreeMap::new();
    for (line, r) in rows {
        grouped
            .entry(r.scenario_id.clone())
            .or_default()
            .entry(r.agent_id.clone())
            .or_default()
            .push((line, r));
    }
    let mut scenarios = Vec::with_capacity(grouped.len());
    for (id, agents) in grouped {
        let mut tracks = Vec::with_capacity(agents.len());
        for (agent_id, mut rows) in agents {
            rows.sort_by(|a, b| a.1.time_s.total_cmp(&b.1.time_s));
            let track = resample(&agent_id, &rows, dt)?;
            if !track.positions.is_empty() {
                tracks.push(track);
            }
        }
        scenarios.push(Scenario { id, dt, agents: tracks });
    }
    Ok(scenarios)
}

pub fn load_dataset(path: &Path, dt: f64) -> Result<Vec<Scenario>, DataError> {
    let file = std::fs::File::open(path).map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
    read_dataset(std::io::BufReader::new(file), dt)
}

/// Grid samples of a scenario as canonical records.
pub fn scenario_records(scenario: &Scenario) -> Vec<TrajectoryRecord> {
    let mut out = Vec::new();
    for a in &scenario.agents {
        for (i, p) in a.positions.iter().enumerate() {
            let (heading, length, width) = match a.dims {
                Some(d) => (a.headings.get(i).copied(), Some(d.length), Some(d.width)),
                None => (None, None, None),
            };
            out.push(TrajectoryRecord {
                scenario_id: scenario.id.clone(),
                time_s: (a.start_step + i as i64) as f64 * scenario.dt,
                agent_id: a.id.clone(),
                kind: a.kind,
                x_m: p.x,
                y_m: p.y,
                heading_rad: heading,
                length_m: length,
                width_m: width,
            });
        }
    }
    out
}

pub fn write_records<W: Write>(writer: W, records: &[TrajectoryRecord]) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    let io = |e: csv::Error| DataError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| DataError::Io(e.to_string()))
}

pub fn write_dataset<W: Write>(writer: W, scenarios: &[Scenario]) -> Result<(), DataError> {
    let records: Vec<_> = scenarios.iter().flat_map(scenario_records).collect();
    write_records(writer, &records)
}
