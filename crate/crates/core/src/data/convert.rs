//! Converts other delimited trajectory layouts into canonical records by a
//! declarative column mapping.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{AgentKind, DataError, TrajectoryRecord};

/// A field taken from a named column or fixed for the whole file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnOrConst<T> {
    Column(String),
    Const(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    pub scenario_id: ColumnOrConst<String>,
    /// Column holding time or frame number.
    pub time: String,
    /// Multiplier turning the time column into seconds (1/fps for frames).
    #[serde(default = "one")]
    pub time_scale: f64,
    pub agent_id: String,
    pub kind: ColumnOrConst<AgentKind>,
    /// Values of the kind column that denote a vehicle, case-insensitive.
    #[serde(default = "default_vehicle_labels")]
    pub vehicle_labels: Vec<String>,
    pub x: String,
    pub y: String,
    /// Multiplier turning coordinates into metres.
    #[serde(default = "one")]
    pub position_scale: f64,
    #[serde(default)]
    pub heading: Option<String>,
    #[serde(default)]
    pub length: Option<ColumnOrConst<f64>>,
    #[serde(default)]
    pub width: Option<ColumnOrConst<f64>>,
}

fn default_delimiter() -> char {
    ','
}

fn one() -> f64 {
    1.0
}

fn default_vehicle_labels() -> Vec<String> {
    ["vehicle", "car", "cart", "veh"].map(String::from).to_vec()
}

struct Indexed {
    scenario: Option<usize>,
    time: usize,
    agent: usize,
    kind: Option<usize>,
    x: usize,
    y: usize,
    heading: Option<usize>,
    length: Option<usize>,
    width: Option<usize>,
}

/// Reads a headed delimited file and maps every row to a canonical record.
/// Vehicle rows without a heading column get the heading of their own
/// displacement to the next row, or of the previous one at the end.
pub fn convert_records<R: Read>(reader: R, mapping: &ColumnMapping) -> Result<Vec<TrajectoryRecord>, DataError> {
    if !mapping.delimiter.is_ascii() {
        return Err(DataError::Malformed {
            line: 1,
            message: "delimiter must be ASCII".into(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DataError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::Malformed {
                line: 1,
                message: format!("missing column '{name}'"),
            })
    };
    let opt_col = |c: &Option<ColumnOrConst<f64>>| match c {
        Some(ColumnOrConst::Column(n)) => find(n).map(Some),
        _ => Ok(None),
    };
    let idx = Indexed {
        scenario: match &mapping.scenario_id {
            ColumnOrConst::Column(n) => Some(find(n)?),
            ColumnOrConst::Const(_) => None,
        },
        time: find(&mapping.time)?,
        agent: find(&mapping.agent_id)?,
        kind: match &mapping.kind {
            ColumnOrConst::Column(n) => Some(find(n)?),
            ColumnOrConst::Const(_) => None,
        },
        x: find(&mapping.x)?,
        y: find(&mapping.y)?,
        heading: mapping.heading.as_deref().map(find).transpose()?,
        length: opt_col(&mapping.length)?,
        width: opt_col(&mapping.width)?,
    };
    let labels: Vec<String> = mapping.vehicle_labels.iter().map(|l| l.to_lowercase()).collect();

    let mut out = Vec::new();
    for (n, row) in rdr.records().enumerate() {
        let line = n as u64 + 2;
        let row = row.map_err(|e| DataError::Malformed {
            line,
            message: e.to_string(),
        })?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| {
            field(i).parse::<f64>().map_err(|_| DataError::Malformed {
                line,
                message: format!("'{}' is not a number", field(i)),
            })
        };
        let fixed = |c: &Option<ColumnOrConst<f64>>, i: Option<usize>| -> Result<Option<f64>, DataError> {
            match (c, i) {
                (Some(ColumnOrConst::Const(v)), _) => Ok(Some(*v)),
                (_, Some(i)) => num(i).map(Some),
                _ => Ok(None),
            }
        };
        let kind = match (&mapping.kind, idx.kind) {
            (ColumnOrConst::Const(k), _) => *k,
            (_, Some(i)) if labels.contains(&field(i).to_lowercase()) => AgentKind::Vehicle,
            _ => AgentKind::Pedestrian,
        };
        let scenario_id = match (&mapping.scenario_id, idx.scenario) {
            (ColumnOrConst::Const(s), _) => s.clone(),
            (_, Some(i)) => field(i).to_string(),
            _ => unreachable!(),
        };
        let is_vehicle = kind == AgentKind::Vehicle;
        out.push(TrajectoryRecord {
            scenario_id,
            time_s: num(idx.time)? * mapping.time_scale,
            agent_id: field(idx.agent).to_string(),
            kind,
            x_m: num(idx.x)? * mapping.position_scale,
            y_m: num(idx.y)? * mapping.position_scale,
            heading_rad: if is_vehicle {
                idx.heading.map(num).transpose()?
            } else {
                None
            },
            length_m: if is_vehicle {
                fixed(&mapping.length, idx.length)?
            } else {
                None
            },
            width_m: if is_vehicle {
                fixed(&mapping.width, idx.width)?
            } else {
                None
            },
        });
    }
    if idx.heading.is_none() {
        fill_headings(&mut out);
    }
    Ok(out)
}

fn fill_headings(records: &mut [TrajectoryRecord]) {
    let mut order: Vec<usize> = (0..records.len())
        .filter(|i| records[*i].kind == AgentKind::Vehicle)
        .collect();
    order.sort_by(|a, b| {
        let (ra, rb) = (&records[*a], &records[*b]);
        (&ra.scenario_id, &ra.agent_id)
            .cmp(&(&rb.scenario_id, &rb.agent_id))
            .then(ra.time_s.total_cmp(&rb.time_s))
    });
    let same = |a: &TrajectoryRecord, b: &TrajectoryRecord| a.scenario_id == b.scenario_id && a.agent_id == b.agent_id;
    let mut prev: Option<f64> = None;
    for k in 0..order.len() {
        let cur = &records[order[k]];
        if k > 0 && !same(&records[order[k - 1]], cur) {
            prev = None;
        }
        let h = match order.get(k + 1).map(|j| &records[*j]) {
            Some(next) if same(cur, next) && (next.x_m != cur.x_m || next.y_m != cur.y_m) => {
                (next.y_m - cur.y_m).atan2(next.x_m - cur.x_m)
            }
            _ => prev.unwrap_or(0.0),
        };
        prev = Some(h);
        records[order[k]].heading_rad = Some(h);
    }
}
