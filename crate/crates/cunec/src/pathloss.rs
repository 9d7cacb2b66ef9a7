//! Deterministic mean path-loss models.
//!
//! Per-segment street models for orders zero to two, power-domain
//! combining of same-order routes and of an over-the-rooftop component,
//! and the conventional log-distance baseline over Euclidean distance.
//! All functions are pure; stochastic street parameters are sampled
//! elsewhere and passed in as plain values.

use crate::error::{Error, Result};
use crate::geometry::{Route, StreetOrder};

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Slope of the corner activation function, per meter.
pub const DEFAULT_ACTIVATION_SLOPE: f64 = 0.01;

/// Default diffraction threshold distance in meters.
pub const DEFAULT_DIFFRACTION_THRESHOLD_M: f64 = 70.0;

/// Carrier frequency newtype, guaranteed positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_hz(hz: f64) -> Result<Self> {
        if hz.is_finite() && hz > 0.0 {
            Ok(Self(hz))
        } else {
            Err(Error::InvalidArgument(format!("carrier frequency must be positive, got {hz}")))
        }
    }

    pub fn from_ghz(ghz: f64) -> Result<Self> {
        Self::from_hz(ghz * 1e9)
    }

    pub fn hz(self) -> f64 {
        self.0
    }
}

/// Free-space path loss at one meter: `20 log10(4 pi f / c)` dB.
pub fn fspl_1m(f: Frequency) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * f.hz() / SPEED_OF_LIGHT).log10()
}

/// Mean path loss of a zeroth-order (line-of-sight) street segment.
pub fn mean_pl_zeroth(d0_m: f64, delta0_db: f64, b0: f64, f: Frequency) -> Result<f64> {
    if !(d0_m >= 1.0) {
        return Err(Error::OutOfRange(format!(
            "zeroth-order distance must be at least the 1 m reference, got {d0_m}"
        )));
    }
    Ok(delta0_db + 10.0 * b0 * d0_m.log10() + fspl_1m(f))
}

/// Smooth activation of the post-corner distance term, rising from 0 to 1
/// around the diffraction threshold distance. Equals 0.5 at the threshold.
pub fn corner_activation(d_c_m: f64, d_th_m: f64) -> f64 {
    corner_activation_with_slope(d_c_m, d_th_m, DEFAULT_ACTIVATION_SLOPE)
}

/// Activation with an explicit slope constant.
pub fn corner_activation_with_slope(d_c_m: f64, d_th_m: f64, slope: f64) -> f64 {
    (slope * (d_c_m - d_th_m)).atan() / std::f64::consts::PI + 0.5
}

/// Mean path loss of the segment after a first corner turn: a saturating
/// corner loss plus an activation-gated distance term. The distance term
/// is included only for `d1 > 1` m.
#[allow(clippy::too_many_arguments)]
pub fn mean_pl_first_segment(
    d1_m: f64,
    d_c_m: f64,
    indicator: bool,
    delta1_db: f64,
    c_offset_db: f64,
    kappa: f64,
    b1: f64,
    d_th_m: f64,
) -> Result<f64> {
    mean_pl_first_segment_with_slope(
        d1_m,
        d_c_m,
        indicator,
        delta1_db,
        c_offset_db,
        kappa,
        b1,
        d_th_m,
        DEFAULT_ACTIVATION_SLOPE,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn mean_pl_first_segment_with_slope(
    d1_m: f64,
    d_c_m: f64,
    indicator: bool,
    delta1_db: f64,
    c_offset_db: f64,
    kappa: f64,
    b1: f64,
    d_th_m: f64,
    activation_slope: f64,
) -> Result<f64> {
    if !(d1_m > 0.0) {
        return Err(Error::InvalidArgument(format!("post-corner distance must be positive, got {d1_m}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("corner-loss rate must be positive, got {kappa}")));
    }
    let corner = delta1_db + if indicator { c_offset_db } else { 0.0 };
    let corner_term = corner * (1.0 - (-kappa * d1_m).exp());
    let distance_term = if d1_m > 1.0 {
        corner_activation_with_slope(d_c_m, d_th_m, activation_slope) * 10.0 * b1 * d1_m.log10()
    } else {
        0.0
    };
    Ok(corner_term + distance_term)
}

/// Zeroth-order parameters of one street realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZerothParams {
    pub delta0_db: f64,
    pub b0: f64,
}

/// First-order (post-corner) parameters of one street realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstParams {
    pub delta1_db: f64,
    pub c_offset_db: f64,
    pub kappa: f64,
    pub b1: f64,
}

/// Parameter bundle for evaluating one route, bound per segment with the
/// route oriented from the AP terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteParams {
    /// Parameters of the AP-side segment (always present).
    pub zeroth: ZerothParams,
    /// Parameters of the segment after the first corner (orders 1 and 2).
    pub first: Option<FirstParams>,
    /// Exponent of the segment after the second corner (order 2).
    pub second_b2: Option<f64>,
    /// Corner offset indicator for the first corner.
    pub indicator: bool,
    pub d_th_m: f64,
    pub activation_slope: f64,
}

/// Mean path loss of one route with its per-segment contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPlResult {
    pub total_db: f64,
    pub per_segment_db: Vec<f64>,
    pub order: StreetOrder,
}

/// Evaluates the mean path loss of a route. Routes are oriented from the
/// AP terminal: the first segment carries the zeroth-order model (and the
/// one-meter free-space reference), later segments add their corner and
/// distance terms. Log-distance terms of segments not longer than 1 m are
/// suppressed.
pub fn mean_pl_route(route: &Route, params: &RouteParams, f: Frequency) -> Result<MeanPlResult> {
    let fspl = fspl_1m(f);
    let zeroth_term = |d: f64| params.zeroth.delta0_db + 10.0 * params.zeroth.b0 * log10_past_1m(d) + fspl;

    let mut per_segment = Vec::with_capacity(route.segment_lengths.len());
    per_segment.push(zeroth_term(route.segment_lengths[0]));

    if route.order >= StreetOrder::Nlos1 {
        let first = params.first.ok_or_else(|| {
            Error::UnsampledParameter(format!(
                "route through {} needs first-order street parameters",
                route.street_ids[1]
            ))
        })?;
        let d_c = route.segment_lengths[0];
        let d1 = route.segment_lengths[1];
        per_segment.push(mean_pl_first_segment_with_slope(
            d1,
            d_c,
            params.indicator,
            first.delta1_db,
            first.c_offset_db,
            first.kappa,
            first.b1,
            params.d_th_m,
            params.activation_slope,
        )?);
    }

    if route.order == StreetOrder::Nlos2 {
        let b2 = params.second_b2.ok_or_else(|| {
            Error::UnsampledParameter(format!(
                "route through {} needs second-order street parameters",
                route.street_ids[2]
            ))
        })?;
        let d2 = route.segment_lengths[2];
        per_segment.push(10.0 * b2 * log10_past_1m(d2));
    }

    Ok(MeanPlResult {
        total_db: per_segment.iter().sum(),
        per_segment_db: per_segment,
        order: route.order,
    })
}

/// Log-distance that vanishes at and below the 1 m reference.
fn log10_past_1m(d: f64) -> f64 {
    if d > 1.0 {
        d.log10()
    } else {
        0.0
    }
}

/// Combines same-order path losses by summing linear path gains. A single
/// path passes through unchanged; gains are summed in sorted order, so the
/// result is independent of the input permutation.
pub fn combine_routes(pl_db: &[f64]) -> Result<f64> {
    if pl_db.is_empty() {
        return Err(Error::InvalidArgument("cannot combine an empty path-loss list".into()));
    }
    if let Some(bad) = pl_db.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("path losses must be finite, got {bad}")));
    }
    if pl_db.len() == 1 {
        return Ok(pl_db[0]);
    }
    let mut gains: Vec<f64> = pl_db.iter().map(|pl| 10f64.powf(-pl / 10.0)).collect();
    gains.sort_by(f64::total_cmp);
    let gain: f64 = gains.iter().sum();
    Ok(-10.0 * gain.log10())
}

/// Combines a street-guided path loss with an over-the-rooftop component
/// in the power domain. `f64::INFINITY` for the rooftop value means no
/// rooftop contribution.
pub fn combine_with_ort(pl_street_db: f64, pl_ort_db: f64) -> Result<f64> {
    if !pl_street_db.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "street path loss must be finite, got {pl_street_db}"
        )));
    }
    if pl_ort_db.is_nan() || pl_ort_db == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(format!(
            "rooftop path loss must be finite or +inf, got {pl_ort_db}"
        )));
    }
    if pl_ort_db == f64::INFINITY {
        return Ok(pl_street_db);
    }
    let gain = 10f64.powf(-pl_street_db / 10.0) + 10f64.powf(-pl_ort_db / 10.0);
    Ok(-10.0 * gain.log10())
}

/// Link condition of the baseline model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Los,
    Nlos,
}

/// Parameters of the conventional log-distance baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBetaParams {
    pub delta_db: f64,
    pub beta: f64,
    pub sigma_s_db: f64,
    pub d_corr_m: f64,
    pub condition: Condition,
}

impl AlphaBetaParams {
    pub fn new(delta_db: f64, beta: f64, sigma_s_db: f64, d_corr_m: f64, condition: Condition) -> Result<Self> {
        if !(sigma_s_db >= 0.0) {
            return Err(Error::InvalidArgument(format!("sigma_s must be non-negative, got {sigma_s_db}")));
        }
        if !(d_corr_m > 0.0) {
            return Err(Error::InvalidArgument(format!("d_corr must be positive, got {d_corr_m}")));
        }
        Ok(Self { delta_db, beta, sigma_s_db, d_corr_m, condition })
    }
}

/// Baseline mean path loss over Euclidean distance.
pub fn alpha_beta_pl(d_m: f64, params: &AlphaBetaParams, f: Frequency) -> Result<f64> {
    if !(d_m >= 1.0) {
        return Err(Error::OutOfRange(format!(
            "baseline distance must be at least the 1 m reference, got {d_m}"
        )));
    }
    Ok(params.delta_db + 10.0 * params.beta * d_m.log10() + fspl_1m(f))
}
