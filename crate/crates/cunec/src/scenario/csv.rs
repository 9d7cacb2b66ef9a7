//! Link-result CSV encoding and decoding.
//!
//! Fixed column set, header mandatory, all real numbers rendered with six
//! significant digits. Unreachable links keep their geometry columns but
//! leave the path-loss cells empty and carry order -1.

use crate::error::{Error, Result};

use super::{LinkResult, ModelKind};

pub const CSV_HEADER: &str =
    "ue_idx,ap_idx,order,d_euclid_m,d_manhattan_m,mean_pl_db,shadow_db,total_pl_db,n_routes,valid,model";

/// Renders a value with six significant digits, fixed-point.
pub fn format_significant(value: f64, digits: u32) -> String {
    if value == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1) as usize, 0.0);
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).clamp(0, 17) as usize;
    format!("{value:.decimals$}")
}

fn opt_cell(value: Option<f64>) -> String {
    value.map(|v| format_significant(v, 6)).unwrap_or_default()
}

/// Serializes results in a fixed row order (as provided).
pub fn write_csv(results: &[LinkResult]) -> String {
    let mut out = String::with_capacity(64 * (results.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        let order = r.order.map_or(-1i64, |o| o.index() as i64);
        let model = match r.model {
            ModelKind::Cunec => "cunec",
            ModelKind::AlphaBeta => "alphabeta",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.ue_index,
            r.ap_index,
            order,
            format_significant(r.euclidean_d_m, 6),
            opt_cell(r.manhattan_d_m),
            opt_cell(r.mean_pl_db),
            opt_cell(r.shadowing_db),
            opt_cell(r.total_pl_db),
            r.n_routes,
            r.in_validity_range,
            model
        ));
    }
    out
}

/// One parsed CSV row; empty numeric cells become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub ue_index: usize,
    pub ap_index: usize,
    pub order: i64,
    pub euclidean_d_m: f64,
    pub manhattan_d_m: Option<f64>,
    pub mean_pl_db: Option<f64>,
    pub shadowing_db: Option<f64>,
    pub total_pl_db: Option<f64>,
    pub n_routes: usize,
    pub in_validity_range: bool,
    pub model: String,
}

/// Parses the CSV format produced by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Config(format!("unexpected CSV header: {header:?}")));
        }
        None => return Err(Error::Config("empty CSV input".into())),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::Config(format!(
                "line {}: expected 11 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let ctx = |name: &str, e: &dyn std::fmt::Display| {
            Error::Config(format!("line {}: {name}: {e}", lineno + 1))
        };
        let parse_f = |s: &str, name: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| ctx(name, &e))
        };
        let parse_opt = |s: &str, name: &str| -> Result<Option<f64>> {
            let t = s.trim();
            if t.is_empty() {
                Ok(None)
            } else {
                Ok(Some(parse_f(t, name)?))
            }
        };
        rows.push(CsvRow {
            ue_index: fields[0].trim().parse().map_err(|e| ctx("ue_idx", &e))?,
            ap_index: fields[1].trim().parse().map_err(|e| ctx("ap_idx", &e))?,
            order: fields[2].trim().parse().map_err(|e| ctx("order", &e))?,
            euclidean_d_m: parse_f(fields[3], "d_euclid_m")?,
            manhattan_d_m: parse_opt(fields[4], "d_manhattan_m")?,
            mean_pl_db: parse_opt(fields[5], "mean_pl_db")?,
            shadowing_db: parse_opt(fields[6], "shadow_db")?,
            total_pl_db: parse_opt(fields[7], "total_pl_db")?,
            n_routes: fields[8].trim().parse().map_err(|e| ctx("n_routes", &e))?,
            in_validity_range: fields[9].trim().parse().map_err(|e| ctx("valid", &e))?,
            model: fields[10].trim().to_string(),
        });
    }
    Ok(rows)
}
