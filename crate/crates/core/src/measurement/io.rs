//! Session files.
//!
//! Two layouts are supported, chosen by extension:
//!
//! * `.csv`: `# key: value` metadata lines, then a `leg,axis,posture,repeat,value_mm`
//!   table with one reading per row.
//! * `.json`: an object with `units`, `geometry`, `readings` and the optional
//!   `provenance`, `noise` and `gauge_signs` members.
//!
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so a write/parse cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Geometry, LegId};

use super::{GaugeReading, GaugeSigns, MeasurementSession, NoiseModel, PostureKind, Provenance};

pub const TABLE_HEADER: [&str; 5] = ["leg", "axis", "posture", "repeat", "value_mm"];
const SCHEMA_VERSION: u32 = 1;

/// Geometry as stored in session, config and report files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryRecord {
    #[serde(rename = "L_mm")]
    pub leg_length_mm: f64,
    pub alpha_max_rad: f64,
    pub alpha_min_rad: f64,
}

impl GeometryRecord {
    pub fn to_geometry(&self) -> Result<Geometry<f64>> {
        Geometry::new(self.leg_length_mm, self.alpha_max_rad, self.alpha_min_rad)
    }
}

impl From<&Geometry<f64>> for GeometryRecord {
    fn from(g: &Geometry<f64>) -> Self {
        GeometryRecord {
            leg_length_mm: g.leg_length(),
            alpha_max_rad: g.alpha_max(),
            alpha_min_rad: g.alpha_min(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseRecord {
    sigma_mm: f64,
    resolution_mm: f64,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeSignRecord {
    leg: LegId,
    axis: LegId,
    sign: i8,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReadingRecord {
    leg: LegId,
    axis: LegId,
    posture: PostureKind,
    repeat: u32,
    value_mm: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionDocument {
    #[serde(default = "default_version")]
    schema_version: u32,
    units: String,
    geometry: GeometryRecord,
    #[serde(default)]
    provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    gauge_signs: Vec<GaugeSignRecord>,
    readings: Vec<ReadingRecord>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Table,
    Object,
}

fn layout_of(path: &Path) -> Result<Layout> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
    {
        Some(ext) if ext == "csv" => Ok(Layout::Table),
        Some(ext) if ext == "json" => Ok(Layout::Object),
        _ => Err(Error::schema(
            None,
            format!(
                "unsupported extension {:?} (use .csv or .json)",
                path.extension().unwrap_or_default()
            ),
        )),
    }
}

pub fn parse_session(path: impl AsRef<Path>) -> Result<MeasurementSession<f64>> {
    let path = path.as_ref();
    let layout = layout_of(path)?;
    let text = fs::read_to_string(path).map_err(|e| io_at(path, e))?;
    match layout {
        Layout::Table => parse_table(&text),
        Layout::Object => parse_object(&text),
    }
}

pub fn write_session(s: &MeasurementSession<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match layout_of(path)? {
        Layout::Table => format_table(s),
        Layout::Object => format_object(s)?,
    };
    fs::write(path, text).map_err(|e| io_at(path, e))?;
    Ok(())
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn check_units(units: &str) -> Result<()> {
    if units.trim() != "mm" {
        return Err(Error::Unit(units.to_string()));
    }
    Ok(())
}

fn check_duplicates(readings: &[GaugeReading<f64>], lines: &[usize]) -> Result<()> {
    let mut seen = std::collections::HashMap::new();
    for (r, line) in readings.iter().zip(lines) {
        if let Some(first) = seen.insert((r.leg, r.axis, r.posture, r.repeat), *line) {
            return Err(Error::schema(
                Some(*line),
                format!(
                    "duplicate reading {}/{}/{} repeat {} (first at line {first})",
                    r.leg, r.axis, r.posture, r.repeat
                ),
            ));
        }
    }
    Ok(())
}

pub fn parse_object(text: &str) -> Result<MeasurementSession<f64>> {
    let doc: SessionDocument =
        serde_json::from_str(text).map_err(|e| Error::schema(Some(e.line()), e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::schema(
            None,
            format!("unsupported schema_version {}", doc.schema_version),
        ));
    }
    check_units(&doc.units)?;
    let geometry = doc.geometry.to_geometry()?;

    let mut gauge_signs = GaugeSigns::default();
    for g in &doc.gauge_signs {
        gauge_signs
            .set(g.leg, g.axis, g.sign)
            .map_err(|e| Error::schema(None, format!("gauge_signs: {e}")))?;
    }
    let noise_model = doc.noise.map(|n| NoiseModel {
        sigma: n.sigma_mm,
        resolution: n.resolution_mm,
        seed: n.seed,
    });

    let mut readings = Vec::with_capacity(doc.readings.len());
    for (i, r) in doc.readings.iter().enumerate() {
        let reading = GaugeReading::new(r.leg, r.axis, r.posture, r.repeat, r.value_mm)
            .map_err(|e| Error::schema(None, format!("readings[{i}]: {e}")))?;
        readings.push(reading);
    }
    // JSON readings have no line of their own; report the index instead.
    let indices: Vec<usize> = (0..readings.len()).collect();
    check_duplicates(&readings, &indices).map_err(|e| match e {
        Error::Schema { line, message } => {
            Error::schema(None, format!("readings[{}]: {message}", line.unwrap_or(0)))
        }
        other => other,
    })?;

    Ok(MeasurementSession {
        geometry,
        readings,
        noise_model,
        provenance: doc.provenance,
        gauge_signs,
    })
}

fn format_object(s: &MeasurementSession<f64>) -> Result<String> {
    let doc = SessionDocument {
        schema_version: SCHEMA_VERSION,
        units: "mm".into(),
        geometry: GeometryRecord::from(&s.geometry),
        provenance: s.provenance,
        noise: s.noise_model.map(|n| NoiseRecord {
            sigma_mm: n.sigma,
            resolution_mm: n.resolution,
            seed: n.seed,
        }),
        gauge_signs: s
            .gauge_signs
            .flipped()
            .map(|(leg, axis)| GaugeSignRecord {
                leg,
                axis,
                sign: s.gauge_signs.get(leg, axis),
            })
            .collect(),
        readings: s
            .readings
            .iter()
            .map(|r| ReadingRecord {
                leg: r.leg,
                axis: r.axis,
                posture: r.posture,
                repeat: r.repeat,
                value_mm: r.value,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::schema(None, format!("cannot encode session: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[derive(Default)]
struct TableMeta {
    units: Option<String>,
    leg_length: Option<f64>,
    alpha_max: Option<f64>,
    alpha_min: Option<f64>,
    provenance: Option<Provenance>,
    sigma: Option<f64>,
    resolution: Option<f64>,
    seed: Option<u64>,
    signs: GaugeSigns,
}

fn parse_number<V: std::str::FromStr>(line: usize, field: &str, raw: &str) -> Result<V> {
    raw.trim()
        .parse()
        .map_err(|_| Error::schema(Some(line), format!("field {field}: invalid value {raw:?}")))
}

fn parse_meta_line(meta: &mut TableMeta, line: usize, key: &str, value: &str) -> Result<()> {
    match key {
        "units" => meta.units = Some(value.to_string()),
        "L_mm" => meta.leg_length = Some(parse_number(line, key, value)?),
        "alpha_max_rad" => meta.alpha_max = Some(parse_number(line, key, value)?),
        "alpha_min_rad" => meta.alpha_min = Some(parse_number(line, key, value)?),
        "provenance" => {
            meta.provenance = Some(match value {
                "simulated" => Provenance::Simulated,
                "ingested" => Provenance::Ingested,
                other => {
                    return Err(Error::schema(
                        Some(line),
                        format!("field provenance: unknown value {other:?}"),
                    ))
                }
            })
        }
        "noise_sigma_mm" => meta.sigma = Some(parse_number(line, key, value)?),
        "noise_resolution_mm" => meta.resolution = Some(parse_number(line, key, value)?),
        "noise_seed" => meta.seed = Some(parse_number(line, key, value)?),
        "gauge_sign" => {
            // leg.axis=sign
            let (gauge, sign) = value.split_once('=').ok_or_else(|| {
                Error::schema(Some(line), "field gauge_sign: expected leg.axis=sign")
            })?;
            let (leg, axis) = gauge.split_once('.').ok_or_else(|| {
                Error::schema(Some(line), "field gauge_sign: expected leg.axis=sign")
            })?;
            let leg: LegId = leg
                .parse()
                .map_err(|e| Error::schema(Some(line), format!("field gauge_sign: {e}")))?;
            let axis: LegId = axis
                .parse()
                .map_err(|e| Error::schema(Some(line), format!("field gauge_sign: {e}")))?;
            let sign: i8 = parse_number(line, key, sign)?;
            meta.signs
                .set(leg, axis, sign)
                .map_err(|e| Error::schema(Some(line), format!("field gauge_sign: {e}")))?;
        }
        other => {
            return Err(Error::schema(
                Some(line),
                format!("unknown header field {other:?}"),
            ))
        }
    }
    Ok(())
}

pub fn parse_table(text: &str) -> Result<MeasurementSession<f64>> {
    let mut meta = TableMeta::default();
    let mut body_start = 0usize;
    let mut header_lines = 0usize;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if !(trimmed.starts_with('#') || trimmed.is_empty()) {
            break;
        }
        header_lines += 1;
        body_start += line.len();
        let content = trimmed.trim_start_matches('#').trim();
        if let Some((key, value)) = content.split_once(':') {
            parse_meta_line(&mut meta, header_lines, key.trim(), value.trim())?;
        }
    }
    let body = &text[body_start..];

    let units = meta
        .units
        .clone()
        .ok_or_else(|| Error::schema(None, "missing header field units"))?;
    check_units(&units)?;
    let missing = |f: &str| Error::schema(None, format!("missing header field {f}"));
    let geometry = Geometry::new(
        meta.leg_length.ok_or_else(|| missing("L_mm"))?,
        meta.alpha_max.ok_or_else(|| missing("alpha_max_rad"))?,
        meta.alpha_min.ok_or_else(|| missing("alpha_min_rad"))?,
    )?;
    let noise_model = match (meta.sigma, meta.resolution, meta.seed) {
        (None, None, None) => None,
        (Some(sigma), Some(resolution), Some(seed)) => Some(NoiseModel {
            sigma,
            resolution,
            seed,
        }),
        _ => {
            return Err(Error::schema(
                None,
                "noise_sigma_mm, noise_resolution_mm and noise_seed must appear together",
            ))
        }
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header_line = header_lines + 1;
    let headers = rdr
        .headers()
        .map_err(|e| Error::schema(Some(header_line), e.to_string()))?
        .clone();
    if headers.iter().ne(TABLE_HEADER.iter().copied()) {
        return Err(Error::schema(
            Some(header_line),
            format!(
                "expected header {:?}, found {:?}",
                TABLE_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut readings = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| header_lines + p.line() as usize);
            Error::schema(line, e.to_string())
        })?;
        let line = header_lines + record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let leg: LegId = field(0)
            .parse()
            .map_err(|e| Error::schema(Some(line), format!("field leg: {e}")))?;
        let axis: LegId = field(1)
            .parse()
            .map_err(|e| Error::schema(Some(line), format!("field axis: {e}")))?;
        let posture: PostureKind = field(2)
            .parse()
            .map_err(|e| Error::schema(Some(line), format!("field posture: {e}")))?;
        let repeat: u32 = parse_number(line, "repeat", field(3))?;
        let value: f64 = parse_number(line, "value_mm", field(4))?;
        let reading = GaugeReading::new(leg, axis, posture, repeat, value)
            .map_err(|e| Error::schema(Some(line), e.to_string()))?;
        readings.push(reading);
        lines.push(line);
    }
    check_duplicates(&readings, &lines)?;

    Ok(MeasurementSession {
        geometry,
        readings,
        noise_model,
        provenance: meta.provenance.unwrap_or_default(),
        gauge_signs: meta.signs,
    })
}

fn format_table(s: &MeasurementSession<f64>) -> String {
    let mut out = String::new();
    let g = &s.geometry;
    let _ = writeln!(out, "# orthocal session");
    let _ = writeln!(out, "# units: mm");
    let _ = writeln!(out, "# L_mm: {}", g.leg_length());
    let _ = writeln!(out, "# alpha_max_rad: {}", g.alpha_max());
    let _ = writeln!(out, "# alpha_min_rad: {}", g.alpha_min());
    let _ = writeln!(out, "# provenance: {}", s.provenance);
    if let Some(n) = &s.noise_model {
        let _ = writeln!(out, "# noise_sigma_mm: {}", n.sigma);
        let _ = writeln!(out, "# noise_resolution_mm: {}", n.resolution);
        let _ = writeln!(out, "# noise_seed: {}", n.seed);
    }
    for (leg, axis) in s.gauge_signs.flipped() {
        let _ = writeln!(
            out,
            "# gauge_sign: {leg}.{axis}={}",
            s.gauge_signs.get(leg, axis)
        );
    }
    let _ = writeln!(out, "{}", TABLE_HEADER.join(","));
    for r in &s.readings {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.leg, r.axis, r.posture, r.repeat, r.value
        );
    }
    out
}
