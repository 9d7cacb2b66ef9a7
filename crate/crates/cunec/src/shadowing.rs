//! Spatially correlated shadowing fields over UE x AP link grids.
//!
//! The joint covariance couples every link pair through an anisotropic
//! exponential kernel with separate correlation distances along the UE
//! and AP axes. Fields are drawn as one multivariate Gaussian vector,
//! reshaped, and scaled so per-row and per-column spreads approximate the
//! requested targets. Links whose terminals sit on different streets are
//! uncorrelated and handled as independent groups.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::geometry::{Axis, Point2, Role, StreetId, StreetOrder};
use crate::linalg::sampling_factor;
use crate::params::StreetParamMap;

/// Default cap on the number of links in one correlated group; the joint
/// covariance holds the square of this many entries.
pub const DEFAULT_LINK_CAP: usize = 2000;

/// A generated shadowing field with the targets that produced it.
#[derive(Debug, Clone)]
pub struct ShadowingField {
    /// Shadowing in dB; rows index UEs, columns index APs.
    pub values_db: Array2<f64>,
    pub ue_positions: Vec<Point2>,
    pub ap_positions: Vec<Point2>,
    pub d_corr_ue_m: f64,
    pub d_corr_ap_m: f64,
    pub target_sigma_ue_db: f64,
    pub target_sigma_ap_db: f64,
}

/// Joint covariance over all UE x AP links with the default size cap.
///
/// Entry ((i,j),(k,l)) couples link (UE i, AP j) with link (UE k, AP l)
/// through `exp(-sqrt((d_ue/d_corr_ue)^2 + (d_ap/d_corr_ap)^2))`. The
/// linear link index is `i + j * M` (UE index fastest).
pub fn joint_covariance(
    ue_positions: &[Point2],
    ap_positions: &[Point2],
    d_corr_ue_m: f64,
    d_corr_ap_m: f64,
) -> Result<Array2<f64>> {
    joint_covariance_with_cap(ue_positions, ap_positions, d_corr_ue_m, d_corr_ap_m, DEFAULT_LINK_CAP)
}

/// Joint covariance with an explicit link cap.
pub fn joint_covariance_with_cap(
    ue_positions: &[Point2],
    ap_positions: &[Point2],
    d_corr_ue_m: f64,
    d_corr_ap_m: f64,
    cap: usize,
) -> Result<Array2<f64>> {
    if !(d_corr_ue_m > 0.0) || !(d_corr_ap_m > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "correlation distances must be positive, got {d_corr_ue_m} / {d_corr_ap_m}"
        )));
    }
    let m = ue_positions.len();
    let n = ap_positions.len();
    let links = m.checked_mul(n).ok_or_else(|| Error::InvalidArgument("link count overflow".into()))?;
    if links == 0 {
        return Err(Error::InvalidArgument("need at least one UE and one AP".into()));
    }
    if links > cap {
        return Err(Error::ResourceLimit { links, cap });
    }
    let mut cov = Array2::zeros((links, links));
    for j in 0..n {
        for i in 0..m {
            let a = i + j * m;
            for l in 0..n {
                let d_ap = ap_positions[j].distance(&ap_positions[l]) / d_corr_ap_m;
                for k in 0..m {
                    let b = k + l * m;
                    if b > a {
                        continue;
                    }
                    let d_ue = ue_positions[i].distance(&ue_positions[k]) / d_corr_ue_m;
                    let v = (-(d_ue * d_ue + d_ap * d_ap).sqrt()).exp();
                    cov[(a, b)] = v;
                    cov[(b, a)] = v;
                }
            }
        }
    }
    Ok(cov)
}

/// Factored sampler: the covariance factorization is done once and reused
/// across draws.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    factor: Array2<f64>,
    m: usize,
    n: usize,
}

impl FieldSampler {
    pub fn new(cov: &Array2<f64>, m: usize, n: usize) -> Result<Self> {
        if cov.nrows() != m * n || cov.ncols() != m * n {
            return Err(Error::InvalidArgument(format!(
                "covariance is {}x{}, expected {}",
                cov.nrows(),
                cov.ncols(),
                m * n
            )));
        }
        Ok(Self { factor: sampling_factor(cov)?, m, n })
    }

    /// Draws one field; entry (i, j) takes vector element `i + j * M`.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Array2<f64> {
        let len = self.m * self.n;
        let z: Array1<f64> =
            Array1::from_iter((0..len).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)));
        let v = self.factor.dot(&z);
        let mut field = Array2::zeros((self.m, self.n));
        for j in 0..self.n {
            for i in 0..self.m {
                field[(i, j)] = v[i + j * self.m];
            }
        }
        field
    }
}

/// One-shot field draw from a covariance matrix.
pub fn sample_field<R: rand::Rng + ?Sized>(
    cov: &Array2<f64>,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<Array2<f64>> {
    Ok(FieldSampler::new(cov, m, n)?.sample(rng))
}

/// Scales a raw unit-variance field so row and column spreads approximate
/// the requested targets. Both diagonal factors are computed from the raw
/// matrix and applied as one joint product; each entry is multiplied by
/// `sqrt(t_ue / std(row)) * sqrt(t_ap / std(col))`. The joint scaling
/// cannot satisfy both axes exactly; residual mismatch of a few percent
/// is expected.
pub fn scale_field(raw: &Array2<f64>, target_sigma_ue_db: f64, target_sigma_ap_db: f64) -> Result<Array2<f64>> {
    if !(target_sigma_ue_db >= 0.0) || !(target_sigma_ap_db >= 0.0) {
        return Err(Error::InvalidArgument("sigma targets must be non-negative".into()));
    }
    let (m, n) = raw.dim();
    if m < 2 || n < 2 {
        return Err(Error::DegenerateField(format!(
            "need at least 2x2 entries to estimate row and column spreads, got {m}x{n}"
        )));
    }
    let row_std: Vec<f64> = (0..m).map(|i| population_std(raw.row(i).iter().copied())).collect();
    let col_std: Vec<f64> = (0..n).map(|j| population_std(raw.column(j).iter().copied())).collect();
    if let Some(i) = row_std.iter().position(|&s| s <= 0.0) {
        return Err(Error::DegenerateField(format!("row {i} is constant")));
    }
    if let Some(j) = col_std.iter().position(|&s| s <= 0.0) {
        return Err(Error::DegenerateField(format!("column {j} is constant")));
    }
    let mut out = raw.clone();
    for i in 0..m {
        let fi = (target_sigma_ue_db / row_std[i]).sqrt();
        for j in 0..n {
            let fj = (target_sigma_ap_db / col_std[j]).sqrt();
            out[(i, j)] *= fi * fj;
        }
    }
    Ok(out)
}

pub(crate) fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count();
    if n == 0 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt()
}

/// Generates one scaled anisotropic field over the given positions.
pub fn generate_field<R: rand::Rng + ?Sized>(
    ue_positions: &[Point2],
    ap_positions: &[Point2],
    d_corr_ue_m: f64,
    d_corr_ap_m: f64,
    target_sigma_ue_db: f64,
    target_sigma_ap_db: f64,
    cap: usize,
    rng: &mut R,
) -> Result<ShadowingField> {
    let cov = joint_covariance_with_cap(ue_positions, ap_positions, d_corr_ue_m, d_corr_ap_m, cap)?;
    let raw = sample_field(&cov, ue_positions.len(), ap_positions.len(), rng)?;
    let values_db = scale_field(&raw, target_sigma_ue_db, target_sigma_ap_db)?;
    Ok(ShadowingField {
        values_db,
        ue_positions: ue_positions.to_vec(),
        ap_positions: ap_positions.to_vec(),
        d_corr_ue_m,
        d_corr_ap_m,
        target_sigma_ue_db,
        target_sigma_ap_db,
    })
}

/// Zero-mean Gaussian vector along a line of positions with exponential
/// correlation `sigma^2 exp(-d / d_corr)`.
pub fn gudmundson_1d<R: rand::Rng + ?Sized>(
    positions: &[Point2],
    sigma_db: f64,
    d_corr_m: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if positions.is_empty() {
        return Err(Error::InvalidArgument("need at least one position".into()));
    }
    if !(d_corr_m > 0.0) {
        return Err(Error::InvalidArgument(format!("d_corr must be positive, got {d_corr_m}")));
    }
    if !(sigma_db >= 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be non-negative, got {sigma_db}")));
    }
    check_collinear(positions)?;
    let n = positions.len();
    let mut cov = Array2::zeros((n, n));
    for i in 0..n {
        for k in 0..n {
            cov[(i, k)] = sigma_db * sigma_db * (-positions[i].distance(&positions[k]) / d_corr_m).exp();
        }
    }
    let factor = sampling_factor(&cov)?;
    let z: Array1<f64> =
        Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)));
    Ok(factor.dot(&z).to_vec())
}

fn check_collinear(positions: &[Point2]) -> Result<()> {
    if positions.len() < 3 {
        return Ok(());
    }
    let a = positions[0];
    let b = positions[positions.len() - 1];
    let span = a.distance(&b).max(1.0);
    for p in positions {
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross.abs() / span > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "positions are not collinear near ({}, {})",
                p.x, p.y
            )));
        }
    }
    Ok(())
}

/// Key and membership of one correlated link group: links sharing the AP
/// street, the UE street and the street order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationGroup {
    pub ap_street: StreetId,
    pub ue_street: StreetId,
    pub order: StreetOrder,
    pub ue_indices: Vec<usize>,
    pub ap_indices: Vec<usize>,
}

/// Link-grid view consumed by the scenario-level shadowing assembly.
#[derive(Debug, Clone)]
pub struct LinkGrid<'a> {
    pub ue_positions: &'a [Point2],
    pub ue_streets: &'a [StreetId],
    pub ap_positions: &'a [Point2],
    pub ap_streets: &'a [StreetId],
    /// Street order per (UE, AP) link; `None` marks unreachable links.
    pub orders: &'a Array2<Option<StreetOrder>>,
}

/// Assembles shadowing for a whole scenario.
///
/// Links are partitioned by (AP street, UE street, order). Groups with
/// several terminals on both sides use the full anisotropic process and
/// joint scaling; groups with a single terminal on one side reduce to the
/// one-dimensional exponential process along the other side at that
/// side's target deviation; single-link groups draw one Gaussian with the
/// geometric mean of the two role deviations. Distinct groups are
/// independent, each on its own seed substream.
pub fn assemble_scenario_shadowing(
    grid: &LinkGrid<'_>,
    params: &StreetParamMap,
    seed: u64,
    cap: usize,
) -> Result<(Array2<f64>, Vec<CorrelationGroup>)> {
    let m = grid.ue_positions.len();
    let n = grid.ap_positions.len();
    if grid.ue_streets.len() != m || grid.ap_streets.len() != n || grid.orders.dim() != (m, n) {
        return Err(Error::InvalidArgument("link grid dimensions disagree".into()));
    }

    let mut groups: BTreeMap<(StreetId, StreetId, StreetOrder), Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..m {
        for j in 0..n {
            if let Some(order) = grid.orders[(i, j)] {
                groups
                    .entry((grid.ap_streets[j], grid.ue_streets[i], order))
                    .or_default()
                    .push((i, j));
            }
        }
    }

    let mut shadow = Array2::from_elem((m, n), f64::NAN);
    let mut out_groups = Vec::new();
    for ((ap_street, ue_street, order), members) in groups {
        let ap_side = params
            .get(&(ap_street, order))
            .ok_or_else(|| Error::UnsampledParameter(format!("street {ap_street} order {}", order.index())))?;
        let ue_side = params
            .get(&(ue_street, order))
            .ok_or_else(|| Error::UnsampledParameter(format!("street {ue_street} order {}", order.index())))?;
        let sigma_ap = ap_side.sigma_db(Role::Ap);
        let d_corr_ap = ap_side.d_corr_m(Role::Ap);
        let sigma_ue = ue_side.sigma_db(Role::Ue);
        let d_corr_ue = ue_side.d_corr_m(Role::Ue);

        let mut ue_idx: Vec<usize> = members.iter().map(|(i, _)| *i).collect();
        let mut ap_idx: Vec<usize> = members.iter().map(|(_, j)| *j).collect();
        ue_idx.sort_unstable();
        ue_idx.dedup();
        ap_idx.sort_unstable();
        ap_idx.dedup();

        let mut rng = group_substream(seed, ap_street, ue_street, order);
        let mg = ue_idx.len();
        let ng = ap_idx.len();
        let values: Array2<f64> = if mg == 1 && ng == 1 {
            let v: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * (sigma_ue * sigma_ap).sqrt();
            Array2::from_elem((1, 1), v)
        } else if ng == 1 {
            let pos: Vec<Point2> = ue_idx.iter().map(|&i| grid.ue_positions[i]).collect();
            let v = exponential_line(&pos, sigma_ue, d_corr_ue, &mut rng)?;
            Array2::from_shape_vec((mg, 1), v).expect("shape")
        } else if mg == 1 {
            let pos: Vec<Point2> = ap_idx.iter().map(|&j| grid.ap_positions[j]).collect();
            let v = exponential_line(&pos, sigma_ap, d_corr_ap, &mut rng)?;
            Array2::from_shape_vec((1, ng), v).expect("shape")
        } else {
            let ue_pos: Vec<Point2> = ue_idx.iter().map(|&i| grid.ue_positions[i]).collect();
            let ap_pos: Vec<Point2> = ap_idx.iter().map(|&j| grid.ap_positions[j]).collect();
            let cov = joint_covariance_with_cap(&ue_pos, &ap_pos, d_corr_ue, d_corr_ap, cap)?;
            let raw = sample_field(&cov, mg, ng, &mut rng)?;
            scale_field(&raw, sigma_ue, sigma_ap)?
        };

        for &(i, j) in &members {
            let a = ue_idx.binary_search(&i).expect("member row");
            let b = ap_idx.binary_search(&j).expect("member col");
            shadow[(i, j)] = values[(a, b)];
        }
        out_groups.push(CorrelationGroup { ap_street, ue_street, order, ue_indices: ue_idx, ap_indices: ap_idx });
    }

    Ok((shadow, out_groups))
}

/// One-dimensional exponential process without collinearity checks;
/// positions on one street are collinear by construction.
fn exponential_line<R: rand::Rng + ?Sized>(
    positions: &[Point2],
    sigma_db: f64,
    d_corr_m: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = positions.len();
    let mut cov = Array2::zeros((n, n));
    for i in 0..n {
        for k in 0..n {
            cov[(i, k)] = sigma_db * sigma_db * (-positions[i].distance(&positions[k]) / d_corr_m).exp();
        }
    }
    let factor = sampling_factor(&cov)?;
    let z: Array1<f64> =
        Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)));
    Ok(factor.dot(&z).to_vec())
}

fn group_substream(seed: u64, ap_street: StreetId, ue_street: StreetId, order: StreetOrder) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"shadowgr");
    key[16] = axis_byte(ap_street.axis);
    key[17..21].copy_from_slice(&ap_street.index.to_le_bytes());
    key[21] = axis_byte(ue_street.axis);
    key[22..26].copy_from_slice(&ue_street.index.to_le_bytes());
    key[26] = order.index() as u8;
    ChaCha12Rng::from_seed(key)
}

fn axis_byte(axis: Axis) -> u8 {
    match axis {
        Axis::Horizontal => 0,
        Axis::Vertical => 1,
    }
}
