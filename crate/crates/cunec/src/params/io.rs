//! Parameter-table overrides from a TOML file, one key per table cell.
//!
//! ```toml
//! [env.street_width]      # also: block_length, building_height
//! mean = 22.5
//! std = 3.75
//!
//! [order0.b0]             # per-order cells: order0, order1, order2
//! mean = 1.56
//! std = 0.05
//!
//! [correlations.order0]   # pairwise entries; unset pairs stay at their
//! "street_width/b0" = 0.9 # defaults, 0.0 removes a default entry
//!
//! [alpha_beta.los]        # and alpha_beta.nlos
//! delta_db = 6.0
//! beta = 1.58
//! sigma_s_db = 1.2
//! d_corr_m = 9.0
//!
//! [bounds]                # lower bounds; -inf disables one
//! kappa = 1e-3
//!
//! [model]
//! d_th_m = 70.0
//! activation_slope = 0.01
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{ParamName, ParameterTables};
use crate::error::{Error, Result};
use crate::geometry::StreetOrder;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TablesFile {
    env: Option<BTreeMap<String, CellFile>>,
    order0: Option<BTreeMap<String, CellFile>>,
    order1: Option<BTreeMap<String, CellFile>>,
    order2: Option<BTreeMap<String, CellFile>>,
    correlations: Option<CorrelationsFile>,
    alpha_beta: Option<AlphaBetaFile>,
    bounds: Option<BTreeMap<String, f64>>,
    model: Option<ModelFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellFile {
    mean: Option<f64>,
    std: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrelationsFile {
    order0: Option<BTreeMap<String, f64>>,
    order1: Option<BTreeMap<String, f64>>,
    order2: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaBetaFile {
    los: Option<AlphaBetaColumn>,
    nlos: Option<AlphaBetaColumn>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaBetaColumn {
    delta_db: Option<f64>,
    beta: Option<f64>,
    sigma_s_db: Option<f64>,
    d_corr_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    d_th_m: Option<f64>,
    activation_slope: Option<f64>,
}

/// Parses override TOML and applies it on top of `tables`.
pub fn apply_table_overrides(tables: &mut ParameterTables, toml_text: &str) -> Result<()> {
    let file: TablesFile =
        toml::from_str(toml_text).map_err(|e| Error::Config(format!("table overrides: {e}")))?;

    if let Some(env) = &file.env {
        for (key, cell) in env {
            let name = parse_name(key, "env")?;
            if !name.is_env() {
                return Err(Error::Config(format!("env.{key}: not an environmental variable")));
            }
            let entry = tables
                .env
                .iter_mut()
                .find(|(n, _)| *n == name)
                .expect("defaults cover all env variables");
            apply_cell(&mut entry.1, cell, &format!("env.{key}"))?;
        }
    }

    let per_order = [(&file.order0, 0usize), (&file.order1, 1), (&file.order2, 2)];
    for (section, idx) in per_order {
        let Some(cells) = section else { continue };
        for (key, cell) in cells {
            let ctx = format!("order{idx}.{key}");
            let name = parse_name(key, &ctx)?;
            let entry = tables.orders[idx]
                .params
                .iter_mut()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| Error::Config(format!("{ctx}: parameter not defined for this order")))?;
            apply_cell(&mut entry.1, cell, &ctx)?;
        }
    }

    if let Some(corr) = &file.correlations {
        let sections = [(&corr.order0, 0usize), (&corr.order1, 1), (&corr.order2, 2)];
        for (section, idx) in sections {
            let Some(pairs) = section else { continue };
            let order = StreetOrder::from_index(idx).expect("index in range");
            let joint = tables.orders[idx].joint_names(tables);
            for (key, rho) in pairs {
                let ctx = format!("correlations.order{idx}.\"{key}\"");
                let (a, b) = key
                    .split_once('/')
                    .ok_or_else(|| Error::Config(format!("{ctx}: expected \"<name>/<name>\"")))?;
                let a = parse_name(a.trim(), &ctx)?;
                let b = parse_name(b.trim(), &ctx)?;
                if a == b {
                    return Err(Error::Config(format!("{ctx}: names must differ")));
                }
                for n in [a, b] {
                    if !joint.contains(&n) {
                        return Err(Error::Config(format!(
                            "{ctx}: {n} is not part of the order-{} joint model",
                            order.index()
                        )));
                    }
                }
                if !(-1.0..=1.0).contains(rho) {
                    return Err(Error::Config(format!("{ctx}: correlation {rho} outside [-1, 1]")));
                }
                let list = &mut tables.orders[idx].correlations;
                list.retain(|(x, y, _)| !((*x == a && *y == b) || (*x == b && *y == a)));
                if *rho != 0.0 {
                    list.push((a, b, *rho));
                }
            }
        }
    }

    if let Some(ab) = &file.alpha_beta {
        if let Some(col) = &ab.los {
            apply_alpha_beta(&mut tables.alpha_beta_los, col, "alpha_beta.los")?;
        }
        if let Some(col) = &ab.nlos {
            apply_alpha_beta(&mut tables.alpha_beta_nlos, col, "alpha_beta.nlos")?;
        }
    }

    if let Some(bounds) = &file.bounds {
        for (key, value) in bounds {
            let name = parse_name(key, "bounds")?;
            if value.is_nan() {
                return Err(Error::Config(format!("bounds.{key}: not a number")));
            }
            if *value == f64::NEG_INFINITY {
                tables.lower_bounds.remove(&name);
            } else {
                tables.lower_bounds.insert(name, *value);
            }
        }
    }

    if let Some(model) = &file.model {
        if let Some(d_th) = model.d_th_m {
            if !(d_th.is_finite() && d_th >= 0.0) {
                return Err(Error::Config(format!("model.d_th_m: must be non-negative, got {d_th}")));
            }
            tables.d_th_m = d_th;
        }
        if let Some(slope) = model.activation_slope {
            if !(slope.is_finite() && slope > 0.0) {
                return Err(Error::Config(format!("model.activation_slope: must be positive, got {slope}")));
            }
            tables.activation_slope = slope;
        }
    }

    Ok(())
}

/// Loads a table file and returns the defaults with its overrides applied.
pub fn load_tables(path: &Path) -> Result<ParameterTables> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read table file {}: {e}", path.display())))?;
    let mut tables = ParameterTables::default();
    apply_table_overrides(&mut tables, &text)?;
    Ok(tables)
}

fn parse_name(key: &str, ctx: &str) -> Result<ParamName> {
    ParamName::parse(key).ok_or_else(|| Error::Config(format!("{ctx}: unknown parameter name {key:?}")))
}

fn apply_cell(cell: &mut super::MeanStd, file: &CellFile, ctx: &str) -> Result<()> {
    if let Some(mean) = file.mean {
        if !mean.is_finite() {
            return Err(Error::Config(format!("{ctx}.mean: must be finite")));
        }
        cell.mean = mean;
    }
    if let Some(std) = file.std {
        if !(std.is_finite() && std >= 0.0) {
            return Err(Error::Config(format!("{ctx}.std: must be non-negative, got {std}")));
        }
        cell.std = std;
    }
    Ok(())
}

fn apply_alpha_beta(
    target: &mut crate::pathloss::AlphaBetaParams,
    col: &AlphaBetaColumn,
    ctx: &str,
) -> Result<()> {
    if let Some(v) = col.delta_db {
        target.delta_db = v;
    }
    if let Some(v) = col.beta {
        target.beta = v;
    }
    if let Some(v) = col.sigma_s_db {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Config(format!("{ctx}.sigma_s_db: must be non-negative")));
        }
        target.sigma_s_db = v;
    }
    if let Some(v) = col.d_corr_m {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!("{ctx}.d_corr_m: must be positive")));
        }
        target.d_corr_m = v;
    }
    Ok(())
}
