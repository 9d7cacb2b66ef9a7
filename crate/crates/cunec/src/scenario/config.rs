//! Scenario configuration file parsing and validation.
//!
//! Configurations are TOML. Terminal sets are either explicit `points`
//! lists or line trajectories (`line_start`, `line_end`, `spacing_m`);
//! trajectories include the start point and every `spacing_m` step that
//! stays within the line. Paths inside the file resolve relative to the
//! file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{GridLayout, Point2, Point3};
use crate::params::{io::load_tables, ParameterTables};
use crate::pathloss::Frequency;

/// Which model(s) a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Cunec,
    AlphaBeta,
    Both,
}

impl ModelChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cunec" => Ok(ModelChoice::Cunec),
            "alphabeta" => Ok(ModelChoice::AlphaBeta),
            "both" => Ok(ModelChoice::Both),
            other => Err(Error::Config(format!(
                "model must be cunec, alphabeta or both, got {other:?}"
            ))),
        }
    }
}

/// Fully validated scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub grid: GridLayout,
    pub frequency: Frequency,
    pub model: ModelChoice,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub tables: ParameterTables,
    pub aps: Vec<Point3>,
    pub ues: Vec<Point3>,
    /// Optional over-the-rooftop path loss per (ue_idx, ap_idx).
    pub ort_db: Option<BTreeMap<(usize, usize), f64>>,
    /// Cap on links per correlated shadowing group.
    pub link_cap: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: Option<String>,
    seed: u64,
    output: Option<String>,
    tables: Option<String>,
    ort_csv: Option<String>,
    link_cap: Option<usize>,
    grid: GridFile,
    frequency: FrequencyFile,
    aps: EndpointFile,
    ues: EndpointFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    block_length_m: f64,
    street_width_m: f64,
    building_height_m: f64,
    blocks_x: u32,
    blocks_y: u32,
    origin: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrequencyFile {
    carrier_hz: Option<f64>,
    carrier_ghz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndpointFile {
    points: Option<Vec<[f64; 3]>>,
    line_start: Option<[f64; 3]>,
    line_end: Option<[f64; 3]>,
    spacing_m: Option<f64>,
}

impl ScenarioConfig {
    /// Loads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Parses configuration TOML; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

        let origin = file.grid.origin.unwrap_or([0.0, 0.0]);
        let grid = GridLayout::new(
            file.grid.block_length_m,
            file.grid.street_width_m,
            file.grid.building_height_m,
            file.grid.blocks_x,
            file.grid.blocks_y,
            Point2::new(origin[0], origin[1]),
        )
        .map_err(|e| Error::Config(format!("grid: {e}")))?;

        let frequency = match (file.frequency.carrier_hz, file.frequency.carrier_ghz) {
            (Some(hz), None) => Frequency::from_hz(hz),
            (None, Some(ghz)) => Frequency::from_ghz(ghz),
            (None, None) => Err(Error::InvalidArgument(
                "frequency needs carrier_hz or carrier_ghz".into(),
            )),
            (Some(_), Some(_)) => Err(Error::InvalidArgument(
                "frequency takes carrier_hz or carrier_ghz, not both".into(),
            )),
        }
        .map_err(|e| Error::Config(format!("frequency: {e}")))?;

        let model = ModelChoice::parse(file.model.as_deref().unwrap_or("both"))?;
        let aps = expand_endpoints(&file.aps, "aps")?;
        let ues = expand_endpoints(&file.ues, "ues")?;

        let tables = match &file.tables {
            Some(rel) => load_tables(&base.join(rel))?,
            None => ParameterTables::default(),
        };
        let ort_db = match &file.ort_csv {
            Some(rel) => Some(load_ort_csv(&base.join(rel), ues.len(), aps.len())?),
            None => None,
        };

        Ok(ScenarioConfig {
            grid,
            frequency,
            model,
            seed: file.seed,
            output: file.output.map(|p| base.join(p)),
            tables,
            aps,
            ues,
            ort_db,
            link_cap: file.link_cap.unwrap_or(crate::shadowing::DEFAULT_LINK_CAP),
        })
    }
}

fn expand_endpoints(file: &EndpointFile, section: &str) -> Result<Vec<Point3>> {
    let points = match (&file.points, &file.line_start, &file.line_end, file.spacing_m) {
        (Some(points), None, None, None) => {
            points.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect::<Vec<_>>()
        }
        (None, Some(start), Some(end), Some(spacing)) => {
            if !(spacing > 0.0 && spacing.is_finite()) {
                return Err(Error::Config(format!(
                    "{section}.spacing_m must be positive, got {spacing}"
                )));
            }
            let start = Point3::new(start[0], start[1], start[2]);
            let end = Point3::new(end[0], end[1], end[2]);
            let len = ((end.x - start.x).powi(2) + (end.y - start.y).powi(2) + (end.z - start.z).powi(2)).sqrt();
            if len == 0.0 {
                return Err(Error::Config(format!("{section}: line has zero length")));
            }
            let steps = (len / spacing).floor() as usize;
            (0..=steps)
                .map(|k| {
                    let t = k as f64 * spacing / len;
                    Point3::new(
                        start.x + t * (end.x - start.x),
                        start.y + t * (end.y - start.y),
                        start.z + t * (end.z - start.z),
                    )
                })
                .collect()
        }
        _ => {
            return Err(Error::Config(format!(
                "{section}: give either `points` or all of `line_start`, `line_end`, `spacing_m`"
            )))
        }
    };
    if points.is_empty() {
        return Err(Error::Config(format!("{section}: at least one terminal required")));
    }
    Ok(points)
}

/// Reads per-link rooftop path loss: CSV with header `ue_idx,ap_idx,ort_db`.
fn load_ort_csv(path: &Path, ues: usize, aps: usize) -> Result<BTreeMap<(usize, usize), f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            let header = line.trim();
            if header != "ue_idx,ap_idx,ort_db" {
                return Err(Error::Config(format!(
                    "{}: expected header ue_idx,ap_idx,ort_db, got {header:?}",
                    path.display()
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let ctx = || format!("{} line {}", path.display(), lineno + 1);
        let mut fields = line.split(',');
        let mut next = |name: &str| {
            fields
                .next()
                .map(str::trim)
                .ok_or_else(|| Error::Config(format!("{}: missing {name}", ctx())))
        };
        let ue: usize = next("ue_idx")?
            .parse()
            .map_err(|e| Error::Config(format!("{}: ue_idx: {e}", ctx())))?;
        let ap: usize = next("ap_idx")?
            .parse()
            .map_err(|e| Error::Config(format!("{}: ap_idx: {e}", ctx())))?;
        let ort: f64 = next("ort_db")?
            .parse()
            .map_err(|e| Error::Config(format!("{}: ort_db: {e}", ctx())))?;
        if ue >= ues || ap >= aps {
            return Err(Error::Config(format!(
                "{}: link ({ue}, {ap}) outside the {ues}x{aps} scenario",
                ctx()
            )));
        }
        out.insert((ue, ap), ort);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        seed = 7
        [grid]
        block_length_m = 100.0
        street_width_m = 20.0
        building_height_m = 20.0
        blocks_x = 2
        blocks_y = 2
        [frequency]
        carrier_ghz = 3.5
        [aps]
        points = [[80.0, 0.0, 20.0]]
        [ues]
        line_start = [0.0, 1.0, 1.5]
        line_end = [0.0, 11.0, 1.5]
        spacing_m = 2.0
    "#;

    #[test]
    fn parses_and_expands_trajectories() {
        let cfg = ScenarioConfig::from_toml(BASE, Path::new(".")).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model, ModelChoice::Both);
        assert_eq!(cfg.aps.len(), 1);
        assert_eq!(cfg.ues.len(), 6);
        assert_eq!(cfg.ues[0].y, 1.0);
        assert_eq!(cfg.ues[5].y, 11.0);
        assert_eq!(cfg.frequency.hz(), 3.5e9);
    }

    #[test]
    fn rejects_bad_configs() {
        let err = ScenarioConfig::from_toml("seed = 1", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));

        let both_freq = BASE.replace("carrier_ghz = 3.5", "carrier_ghz = 3.5\ncarrier_hz = 1e9");
        assert!(ScenarioConfig::from_toml(&both_freq, Path::new(".")).is_err());

        let bad_spacing = BASE.replace("spacing_m = 2.0", "spacing_m = 0.0");
        assert!(ScenarioConfig::from_toml(&bad_spacing, Path::new(".")).is_err());

        let unknown = format!("{BASE}\nbogus_key = 1");
        let err = ScenarioConfig::from_toml(&unknown, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("bogus_key"));
    }
}
