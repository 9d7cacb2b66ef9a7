//! Estimation of shadowing statistics and linear path-loss fits.
//!
//! Spreads are estimated with the population convention, matching the
//! field scaling. Correlation distances come from the normalized
//! autocorrelation of zero-mean samples (no mean subtraction), binned to
//! the median position spacing, with an exponential decay fitted by least
//! squares over the initial bins; the fit window ends at the first bin at
//! or below a configurable correlation threshold.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::shadowing::{population_std, ShadowingField};

/// Distance metric a fit was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("euclidean"),
            Metric::Manhattan => f.write_str("manhattan"),
        }
    }
}

/// Result of a linear fit of path loss on `10 log10(distance)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Raw intercept in dB; 0 when the fit was constrained through zero.
    pub alpha_db: f64,
    pub beta: f64,
    /// Population deviation of the residuals.
    pub sigma_resid_db: f64,
    pub n_points: usize,
    pub distance_metric: Metric,
}

/// Spread and correlation-distance estimates of one field.
///
/// `per_row_sigma_db[i]` is the spread within row i (one value per UE);
/// `per_col_sigma_db[j]` the spread within column j. `per_row_dcorr_m`
/// holds the row-to-row decorrelation distances, one estimate per column;
/// `per_col_dcorr_m` the column-to-column distances, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingStats {
    pub sigma_total_db: f64,
    pub per_row_sigma_db: Vec<f64>,
    pub per_col_sigma_db: Vec<f64>,
    pub per_row_dcorr_m: Vec<f64>,
    pub per_col_dcorr_m: Vec<f64>,
}

/// Tuning of the correlation-distance estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Fit window: bins up to the first autocorrelation at or below this
    /// value. The default keeps the fit on the initial e-folding decay.
    pub threshold: f64,
    /// Returned when no bin shows correlation above the threshold.
    pub floor_m: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { threshold: (-1f64).exp(), floor_m: 0.1 }
    }
}

/// Spread estimates of a field (population convention).
pub fn estimate_sigmas(values: &Array2<f64>) -> Result<ShadowingStats> {
    let (m, n) = values.dim();
    if m < 2 || n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2x2 entries, got {m}x{n}")));
    }
    Ok(ShadowingStats {
        sigma_total_db: population_std(values.iter().copied()),
        per_row_sigma_db: (0..m).map(|i| population_std(values.row(i).iter().copied())).collect(),
        per_col_sigma_db: (0..n).map(|j| population_std(values.column(j).iter().copied())).collect(),
        per_row_dcorr_m: vec![],
        per_col_dcorr_m: vec![],
    })
}

/// Normalized autocorrelation of zero-mean samples at increasing lag
/// bins. Pair distances are binned to multiples of the median spacing;
/// normalization is by the zero-lag sum of squares. Returns `(lag_m, rho)`
/// for every populated bin up to and including the first bin at or below
/// `stop_below`.
pub fn autocorrelation_bins(
    samples: &[f64],
    positions: &[f64],
    stop_below: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = samples.len();
    if positions.len() != n {
        return Err(Error::InvalidArgument("samples and positions differ in length".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData("need at least two samples".into()));
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("positions must be strictly increasing".into()));
    }
    let mut spacings: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    spacings.sort_by(f64::total_cmp);
    let delta = spacings[spacings.len() / 2];

    let denom: f64 = samples.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Err(Error::InsufficientData("samples have no energy".into()));
    }

    let span = positions[n - 1] - positions[0];
    let max_bin = (span / delta).round() as usize;
    let mut lags = Vec::new();
    let mut rhos = Vec::new();
    for k in 1..=max_bin {
        let lo = (k as f64 - 0.5) * delta;
        let hi = (k as f64 + 0.5) * delta;
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..n {
            let a = positions.partition_point(|&p| p < positions[i] + lo);
            let b = positions.partition_point(|&p| p < positions[i] + hi);
            for j in a..b {
                sum += samples[i] * samples[j];
                pairs += 1;
            }
        }
        if pairs == 0 {
            continue;
        }
        let rho = sum / denom;
        lags.push(k as f64 * delta);
        rhos.push(rho);
        if rho <= stop_below {
            break;
        }
    }
    Ok((lags, rhos))
}

/// Least-squares fit of `log rho = -d / d_corr` through the origin over
/// bins with `rho > threshold`. Returns `floor_m` when no bin qualifies
/// or the fitted decay is not positive.
pub fn fit_exponential_decay(lags_m: &[f64], rho: &[f64], threshold: f64, floor_m: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&d, &r) in lags_m.iter().zip(rho) {
        if r > threshold && d > 0.0 {
            num += d * r.ln();
            den += d * d;
        }
    }
    if den == 0.0 {
        return floor_m;
    }
    let slope = num / den;
    if slope < 0.0 {
        -1.0 / slope
    } else {
        floor_m
    }
}

/// Correlation distance of samples along a line, default configuration.
pub fn estimate_corr_distance(samples: &[f64], positions_m: &[f64]) -> Result<f64> {
    estimate_corr_distance_with(samples, positions_m, EstimatorConfig::default())
}

/// Correlation distance with explicit estimator tuning.
pub fn estimate_corr_distance_with(
    samples: &[f64],
    positions_m: &[f64],
    cfg: EstimatorConfig,
) -> Result<f64> {
    if samples.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "need at least 10 samples, got {}",
            samples.len()
        )));
    }
    let (lags, rhos) = autocorrelation_bins(samples, positions_m, cfg.threshold)?;
    Ok(fit_exponential_decay(&lags, &rhos, cfg.threshold, cfg.floor_m))
}

/// Ordinary least squares of path loss on `10 log10(distance)`.
pub fn fit_linear_pl(
    pl_db: &[f64],
    distance_m: &[f64],
    metric: Metric,
    fix_alpha_to_zero: bool,
) -> Result<FitResult> {
    let n = pl_db.len();
    if distance_m.len() != n {
        return Err(Error::InvalidArgument("path loss and distance lengths differ".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 points, got {n}")));
    }
    if let Some(bad) = distance_m.iter().find(|&&d| !(d >= 1.0)) {
        return Err(Error::OutOfRange(format!("distances must be at least 1 m, got {bad}")));
    }
    let x: Vec<f64> = distance_m.iter().map(|d| 10.0 * d.log10()).collect();

    let (alpha, beta) = if fix_alpha_to_zero {
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        if sxx == 0.0 {
            return Err(Error::RankDeficient("all distances at the 1 m reference".into()));
        }
        let sxy: f64 = x.iter().zip(pl_db).map(|(a, b)| a * b).sum();
        (0.0, sxy / sxx)
    } else {
        let xm = x.iter().sum::<f64>() / n as f64;
        let ym = pl_db.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
        if sxx == 0.0 {
            return Err(Error::RankDeficient("all distances equal".into()));
        }
        let sxy: f64 = x.iter().zip(pl_db).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let beta = sxy / sxx;
        (ym - beta * xm, beta)
    };

    let resid: Vec<f64> = x.iter().zip(pl_db).map(|(xi, yi)| yi - alpha - beta * xi).collect();
    Ok(FitResult {
        alpha_db: alpha,
        beta,
        sigma_resid_db: population_std(resid.iter().copied()),
        n_points: n,
        distance_metric: metric,
    })
}

/// Root mean squared error between two equally long vectors.
pub fn rmse(model_pl_db: &[f64], reference_pl_db: &[f64]) -> Result<f64> {
    if model_pl_db.len() != reference_pl_db.len() || model_pl_db.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "need equally long non-empty vectors, got {} and {}",
            model_pl_db.len(),
            reference_pl_db.len()
        )));
    }
    let ms = model_pl_db
        .iter()
        .zip(reference_pl_db)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / model_pl_db.len() as f64;
    Ok(ms.sqrt())
}

/// Reference values for the generation-validation report; unset entries
/// leave the comparison column blank.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ValidationTargets {
    pub sigma_total_db: Option<f64>,
    /// Mean spread within a row.
    pub row_sigma_db: Option<f64>,
    /// Mean spread within a column.
    pub col_sigma_db: Option<f64>,
    /// Mean row-to-row decorrelation distance.
    pub row_dcorr_m: Option<f64>,
    /// Mean column-to-column decorrelation distance.
    pub col_dcorr_m: Option<f64>,
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub name: &'static str,
    pub estimated: Option<f64>,
    pub target: Option<f64>,
    pub rel_err: Option<f64>,
}

/// Five-metric comparison of a generated field against targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub metrics: Vec<MetricRow>,
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<18} {:>12} {:>12} {:>10}", "metric", "estimated", "target", "rel_err")?;
        for row in &self.metrics {
            let est = row.estimated.map_or("-".to_string(), |v| format!("{v:.4}"));
            let tgt = row.target.map_or("-".to_string(), |v| format!("{v:.4}"));
            let rel = row.rel_err.map_or("-".to_string(), |v| format!("{:.2}%", v * 100.0));
            writeln!(f, "{:<18} {:>12} {:>12} {:>10}", row.name, est, tgt, rel)?;
        }
        Ok(())
    }
}

/// Full field statistics: spreads plus both directional correlation
/// distances. Positions are reduced to scalar line coordinates as the
/// distance from the first position; axes with fewer than 10 samples skip
/// the correlation-distance estimates.
pub fn field_stats(field: &ShadowingField, cfg: EstimatorConfig) -> Result<ShadowingStats> {
    let mut stats = estimate_sigmas(&field.values_db)?;
    let (m, n) = field.values_db.dim();
    let ue_line = line_coordinates(&field.ue_positions);
    let ap_line = line_coordinates(&field.ap_positions);
    if m >= 10 {
        for j in 0..n {
            let col: Vec<f64> = field.values_db.column(j).to_vec();
            stats.per_row_dcorr_m.push(estimate_corr_distance_with(&col, &ue_line, cfg)?);
        }
    }
    if n >= 10 {
        for i in 0..m {
            let row: Vec<f64> = field.values_db.row(i).to_vec();
            stats.per_col_dcorr_m.push(estimate_corr_distance_with(&row, &ap_line, cfg)?);
        }
    }
    Ok(stats)
}

fn line_coordinates(points: &[crate::geometry::Point2]) -> Vec<f64> {
    points.iter().map(|p| p.distance(&points[0])).collect()
}

/// Compares the five field metrics against targets.
pub fn validate_generation(field: &ShadowingField, targets: &ValidationTargets) -> Result<ValidationReport> {
    let stats = field_stats(field, EstimatorConfig::default())?;
    let mean = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let rows = [
        ("sigma_total_db", Some(stats.sigma_total_db), targets.sigma_total_db),
        ("row_sigma_db", mean(&stats.per_row_sigma_db), targets.row_sigma_db),
        ("col_sigma_db", mean(&stats.per_col_sigma_db), targets.col_sigma_db),
        ("row_dcorr_m", mean(&stats.per_row_dcorr_m), targets.row_dcorr_m),
        ("col_dcorr_m", mean(&stats.per_col_dcorr_m), targets.col_dcorr_m),
    ];
    let metrics = rows
        .into_iter()
        .map(|(name, estimated, target)| MetricRow {
            name,
            estimated,
            target,
            rel_err: match (estimated, target) {
                (Some(e), Some(t)) if t != 0.0 => Some((e - t) / t),
                _ => None,
            },
        })
        .collect();
    Ok(ValidationReport { metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sigma_estimates() {
        let constant = Array2::from_elem((3, 3), 2.0);
        let s = estimate_sigmas(&constant).unwrap();
        assert_eq!(s.sigma_total_db, 0.0);
        assert!(s.per_row_sigma_db.iter().all(|&v| v == 0.0));

        let alternating = arr2(&[[1.0, -1.0], [-1.0, 1.0]]);
        let s = estimate_sigmas(&alternating).unwrap();
        assert_abs_diff_eq!(s.per_row_sigma_db[0], 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(s.per_col_sigma_db[1], 1.0, epsilon = 0.0);

        assert!(estimate_sigmas(&Array2::zeros((1, 5))).is_err());
    }

    #[test]
    fn exact_exponential_fit() {
        let lags: Vec<f64> = (1..10).map(|k| k as f64).collect();
        let rho: Vec<f64> = lags.iter().map(|d| (-d / 10.0).exp()).collect();
        let d = fit_exponential_decay(&lags, &rho, (-1f64).exp(), 0.1);
        assert_abs_diff_eq!(d, 10.0, epsilon = 1e-6);
    }

    #[test]
    fn white_noise_hits_floor() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let samples: Vec<f64> = (0..1000).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let positions: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let d = estimate_corr_distance(&samples, &positions).unwrap();
        assert_eq!(d, 0.1);
    }

    #[test]
    fn closed_loop_recovery_on_markov_series() {
        // Independent generator: first-order recursion with the exponential
        // correlation it implies on a regular grid.
        let spacing = 0.5f64;
        let d_corr = 9.0f64;
        let sigma = 4.0f64;
        let rho = (-spacing / d_corr).exp();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let n = 10_000;
        let mut x = vec![0.0f64; n];
        x[0] = rng.sample::<f64, _>(rand_distr::StandardNormal);
        for i in 1..n {
            let innov: f64 = rng.sample(rand_distr::StandardNormal);
            x[i] = rho * x[i - 1] + (1.0 - rho * rho).sqrt() * innov;
        }
        let samples: Vec<f64> = x.iter().map(|v| sigma * v).collect();
        let positions: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
        let est = estimate_corr_distance(&samples, &positions).unwrap();
        assert!((est - d_corr).abs() / d_corr < 0.15, "estimate {est} vs {d_corr}");
    }

    #[test]
    fn estimator_scale_equivariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let rho = (-1.0f64 / 12.0).exp();
        let n = 2000;
        let mut x = vec![0.0f64; n];
        x[0] = rng.sample::<f64, _>(rand_distr::StandardNormal);
        for i in 1..n {
            let innov: f64 = rng.sample(rand_distr::StandardNormal);
            x[i] = rho * x[i - 1] + (1.0 - rho * rho).sqrt() * innov;
        }
        let pos1: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let pos3: Vec<f64> = (0..n).map(|i| 3.0 * i as f64).collect();
        let e1 = estimate_corr_distance(&x, &pos1).unwrap();
        let e3 = estimate_corr_distance(&x, &pos3).unwrap();
        assert_abs_diff_eq!(e3, 3.0 * e1, epsilon = 1e-9);
    }

    #[test]
    fn linear_fit_cases() {
        let d: Vec<f64> = (1..=60).map(|i| 1.0 + i as f64).collect();
        let pl: Vec<f64> = d.iter().map(|x| 50.0 + 20.0 * x.log10()).collect();
        let fit = fit_linear_pl(&pl, &d, Metric::Euclidean, false).unwrap();
        assert_abs_diff_eq!(fit.alpha_db, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.beta, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.sigma_resid_db, 0.0, epsilon = 1e-9);

        // Forcing the line through the origin pushes the offset into the
        // slope and leaves residual spread behind.
        let fixed = fit_linear_pl(&pl, &d, Metric::Manhattan, true).unwrap();
        assert_eq!(fixed.alpha_db, 0.0);
        assert!(fixed.beta > 2.0);
        assert!(fixed.sigma_resid_db > 0.0);

        // Residual spread ignores constant offsets when the intercept is free.
        let shifted: Vec<f64> = pl.iter().map(|v| v + 7.0).collect();
        let fit2 = fit_linear_pl(&shifted, &d, Metric::Euclidean, false).unwrap();
        assert_abs_diff_eq!(fit2.sigma_resid_db, fit.sigma_resid_db, epsilon = 1e-9);

        let same = vec![10.0; 5];
        assert!(matches!(
            fit_linear_pl(&[1.0, 2.0, 3.0, 4.0, 5.0], &same, Metric::Euclidean, false),
            Err(Error::RankDeficient(_))
        ));
        assert!(fit_linear_pl(&[1.0], &[10.0], Metric::Euclidean, false).is_err());
        assert!(fit_linear_pl(&[1.0, 2.0], &[0.5, 10.0], Metric::Euclidean, false).is_err());
    }

    #[test]
    fn rmse_cases() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = [4.0, 5.0, 6.0];
        assert_abs_diff_eq!(rmse(&a, &b).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rmse(&b, &a).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rmse(&[0.0, 4.0], &[0.0, 0.0]).unwrap(), 8f64.sqrt(), epsilon = 1e-12);
        assert!(rmse(&a, &b[..2]).is_err());
    }

    #[test]
    fn validation_report_structure() {
        use crate::geometry::Point2;
        let field = ShadowingField {
            values_db: arr2(&[[2.0, -2.0], [-2.0, 2.0]]),
            ue_positions: vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            ap_positions: vec![Point2::new(0.0, 5.0), Point2::new(1.0, 5.0)],
            d_corr_ue_m: 1.0,
            d_corr_ap_m: 1.0,
            target_sigma_ue_db: 2.0,
            target_sigma_ap_db: 2.0,
        };
        let targets = ValidationTargets {
            sigma_total_db: Some(2.0),
            row_sigma_db: Some(2.0),
            col_sigma_db: Some(2.0),
            row_dcorr_m: None,
            col_dcorr_m: None,
        };
        let report = validate_generation(&field, &targets).unwrap();
        assert_eq!(report.metrics.len(), 5);
        for row in &report.metrics[..3] {
            assert!(row.rel_err.unwrap().abs() < 1e-6, "{row:?}");
        }
        // Axes too short for correlation distances: estimate and comparison
        // stay blank.
        assert!(report.metrics[3].estimated.is_none());
        assert!(report.metrics[3].rel_err.is_none());
        let text = report.to_string();
        assert!(text.contains("sigma_total_db"));
    }
}
