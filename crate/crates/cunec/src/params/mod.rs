//! Published parameter statistics and per-street parameter sampling.
//!
//! Holds the default means, standard deviations and pairwise correlations
//! of the street models and of the log-distance baseline, and draws
//! per-street parameter realizations: the joint correlation matrix is
//! projected to the nearest positive definite matrix, the joint Gaussian
//! is conditioned on the environmental variables (street width, block
//! length, building height), one realization is drawn per street and
//! role, and lower bounds keep physical parameters positive.

pub mod io;

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Eigh, UPLO};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::geometry::{GridLayout, LinkClassification, Role, StreetId, StreetOrder};
use crate::linalg::{draw_gaussian, sampling_factor};
use crate::pathloss::{AlphaBetaParams, Condition, FirstParams, ZerothParams};

/// Eigenvalue floor used by the positive definite projection.
pub const EIG_FLOOR: f64 = 1e-8;

/// Named quantity of the joint parameter model: environmental variables
/// plus the per-order model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamName {
    BlockLength,
    BuildingHeight,
    StreetWidth,
    B0,
    Delta0,
    B1,
    Delta1,
    Kappa,
    COffset,
    B2,
    SigmaAp,
    SigmaUe,
    DcorrAp,
    DcorrUe,
}

impl ParamName {
    pub fn is_env(self) -> bool {
        matches!(self, ParamName::BlockLength | ParamName::BuildingHeight | ParamName::StreetWidth)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::BlockLength => "block_length",
            ParamName::BuildingHeight => "building_height",
            ParamName::StreetWidth => "street_width",
            ParamName::B0 => "b0",
            ParamName::Delta0 => "delta0",
            ParamName::B1 => "b1",
            ParamName::Delta1 => "delta1",
            ParamName::Kappa => "kappa",
            ParamName::COffset => "c_offset",
            ParamName::B2 => "b2",
            ParamName::SigmaAp => "sigma_ap",
            ParamName::SigmaUe => "sigma_ue",
            ParamName::DcorrAp => "dcorr_ap",
            ParamName::DcorrUe => "dcorr_ue",
        }
    }

    pub fn parse(s: &str) -> Option<ParamName> {
        use ParamName::*;
        Some(match s {
            "block_length" => BlockLength,
            "building_height" => BuildingHeight,
            "street_width" => StreetWidth,
            "b0" => B0,
            "delta0" => Delta0,
            "b1" => B1,
            "delta1" => Delta1,
            "kappa" => Kappa,
            "c_offset" => COffset,
            "b2" => B2,
            "sigma_ap" => SigmaAp,
            "sigma_ue" => SigmaUe,
            "dcorr_ap" => DcorrAp,
            "dcorr_ue" => DcorrUe,
            _ => return None,
        })
    }
}

impl std::fmt::Display for ParamName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean and standard deviation of one table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }
}

/// Statistics of one street order: the model parameters, the
/// environmental variables its correlation table names, and the listed
/// pairwise correlations (unlisted pairs are uncorrelated).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderTable {
    pub env_vars: Vec<ParamName>,
    pub params: Vec<(ParamName, MeanStd)>,
    pub correlations: Vec<(ParamName, ParamName, f64)>,
}

impl OrderTable {
    /// Joint variable list: environmental variables first, then the
    /// model parameters.
    pub fn joint_names(&self, tables: &ParameterTables) -> Vec<ParamName> {
        let _ = tables;
        let mut names = self.env_vars.clone();
        names.extend(self.params.iter().map(|(n, _)| *n));
        names
    }
}

/// Full parameter table set: per-order statistics, environmental variable
/// statistics, baseline columns, scenario constants and lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterTables {
    pub orders: [OrderTable; 3],
    pub env: Vec<(ParamName, MeanStd)>,
    pub alpha_beta_los: AlphaBetaParams,
    pub alpha_beta_nlos: AlphaBetaParams,
    /// Diffraction threshold distance for the corner activation.
    pub d_th_m: f64,
    /// Slope constant inside the corner activation.
    pub activation_slope: f64,
    /// Lower bounds applied after sampling; parameters without an entry
    /// are unbounded.
    pub lower_bounds: BTreeMap<ParamName, f64>,
}

impl Default for ParameterTables {
    fn default() -> Self {
        use ParamName::*;
        let order0 = OrderTable {
            env_vars: vec![BlockLength, BuildingHeight, StreetWidth],
            params: vec![
                (B0, MeanStd::new(1.56, 0.05)),
                (Delta0, MeanStd::new(6.3, 0.6)),
                (SigmaAp, MeanStd::new(1.1, 0.11)),
                (SigmaUe, MeanStd::new(0.9, 0.11)),
                (DcorrAp, MeanStd::new(17.8, 6.1)),
                (DcorrUe, MeanStd::new(12.4, 2.8)),
            ],
            correlations: vec![
                (BlockLength, SigmaAp, -0.6),
                (BlockLength, SigmaUe, -0.8),
                (BlockLength, DcorrAp, 0.5),
                (BlockLength, DcorrUe, 0.8),
                (BuildingHeight, B0, 0.4),
                (BuildingHeight, SigmaAp, -0.5),
                (BuildingHeight, SigmaUe, -0.5),
                (BuildingHeight, DcorrAp, 0.6),
                (BuildingHeight, DcorrUe, 0.6),
                (StreetWidth, B0, 0.9),
                (StreetWidth, Delta0, -0.6),
                (StreetWidth, DcorrAp, 0.9),
                (StreetWidth, DcorrUe, 0.8),
                (B0, Delta0, -0.8),
                (B0, DcorrAp, 0.7),
                (B0, DcorrUe, 0.5),
                (Delta0, SigmaAp, -0.4),
                (Delta0, DcorrAp, -0.5),
                (SigmaAp, DcorrAp, -0.4),
                (SigmaUe, DcorrUe, -0.5),
            ],
        };
        let order1 = OrderTable {
            env_vars: vec![BlockLength, BuildingHeight],
            params: vec![
                (B1, MeanStd::new(1.4, 0.65)),
                (Delta1, MeanStd::new(29.7, 11.0)),
                (Kappa, MeanStd::new(0.037, 0.02)),
                (COffset, MeanStd::new(9.2, 4.6)),
                (SigmaAp, MeanStd::new(4.8, 2.6)),
                (SigmaUe, MeanStd::new(4.7, 1.6)),
                (DcorrAp, MeanStd::new(9.9, 6.7)),
                (DcorrUe, MeanStd::new(14.4, 9.5)),
            ],
            correlations: vec![
                (BlockLength, B1, -0.5),
                (BlockLength, Kappa, 0.6),
                (BlockLength, SigmaAp, -0.4),
                (BuildingHeight, B1, -0.5),
                (BuildingHeight, Delta1, 0.4),
                (B1, Delta1, -0.9),
                (Kappa, COffset, 0.4),
                (Kappa, SigmaUe, -0.4),
            ],
        };
        let order2 = OrderTable {
            env_vars: vec![BlockLength],
            params: vec![
                (B2, MeanStd::new(1.3, 0.58)),
                (SigmaAp, MeanStd::new(7.0, 2.4)),
                (SigmaUe, MeanStd::new(7.0, 1.9)),
                (DcorrAp, MeanStd::new(10.4, 10.6)),
                (DcorrUe, MeanStd::new(16.0, 9.2)),
            ],
            correlations: vec![
                (BlockLength, B2, -0.7),
                (BlockLength, SigmaAp, 0.5),
                (BlockLength, SigmaUe, 0.5),
                (B2, SigmaUe, -0.4),
            ],
        };
        let mut lower_bounds = BTreeMap::new();
        lower_bounds.insert(B0, 0.05);
        lower_bounds.insert(B1, 0.05);
        lower_bounds.insert(B2, 0.05);
        lower_bounds.insert(Kappa, 1e-3);
        lower_bounds.insert(COffset, 0.0);
        lower_bounds.insert(Delta1, 0.0);
        lower_bounds.insert(SigmaAp, 0.01);
        lower_bounds.insert(SigmaUe, 0.01);
        lower_bounds.insert(DcorrAp, 0.1);
        lower_bounds.insert(DcorrUe, 0.1);
        ParameterTables {
            orders: [order0, order1, order2],
            // Environmental statistics reflect the grid dimension ranges the
            // model was fitted over; block length defaults to a typical
            // regular-grid value. All entries are overridable.
            env: vec![
                (BlockLength, MeanStd::new(100.0, 25.0)),
                (BuildingHeight, MeanStd::new(40.0, 10.0)),
                (StreetWidth, MeanStd::new(22.5, 3.75)),
            ],
            alpha_beta_los: AlphaBetaParams {
                delta_db: 6.0,
                beta: 1.58,
                sigma_s_db: 1.2,
                d_corr_m: 9.0,
                condition: Condition::Los,
            },
            alpha_beta_nlos: AlphaBetaParams {
                delta_db: -56.2,
                beta: 6.3,
                sigma_s_db: 11.5,
                d_corr_m: 1.0,
                condition: Condition::Nlos,
            },
            d_th_m: 70.0,
            activation_slope: 0.01,
            lower_bounds,
        }
    }
}

impl ParameterTables {
    pub fn order(&self, order: StreetOrder) -> &OrderTable {
        &self.orders[order.index()]
    }

    fn env_stat(&self, name: ParamName) -> MeanStd {
        self.env
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, ms)| *ms)
            .expect("environmental statistics cover all env variables")
    }

    /// Mean/std of one joint variable of one order.
    fn stat(&self, order: StreetOrder, name: ParamName) -> Option<MeanStd> {
        if name.is_env() {
            Some(self.env_stat(name))
        } else {
            self.order(order).params.iter().find(|(n, _)| *n == name).map(|(_, ms)| *ms)
        }
    }

    /// Raw joint correlation matrix of one order from the table entries,
    /// before any projection.
    pub fn raw_order_correlation(&self, order: StreetOrder) -> (Vec<ParamName>, Array2<f64>) {
        let table = self.order(order);
        let names = table.joint_names(self);
        let n = names.len();
        let mut corr = Array2::eye(n);
        for &(a, b, rho) in &table.correlations {
            let i = names.iter().position(|x| *x == a);
            let j = names.iter().position(|x| *x == b);
            if let (Some(i), Some(j)) = (i, j) {
                corr[(i, j)] = rho;
                corr[(j, i)] = rho;
            }
        }
        (names, corr)
    }

    /// Joint correlation matrix of one order after projection to the
    /// nearest positive definite matrix and renormalization to unit
    /// diagonal. This projected matrix is the ground truth the sampler
    /// reproduces.
    pub fn projected_order_correlation(&self, order: StreetOrder) -> Result<(Vec<ParamName>, Array2<f64>)> {
        let (names, corr) = self.raw_order_correlation(order);
        let projected = nearest_spd(&corr)?;
        let mut renorm = projected.clone();
        let n = names.len();
        for i in 0..n {
            for j in 0..n {
                renorm[(i, j)] = projected[(i, j)] / (projected[(i, i)] * projected[(j, j)]).sqrt();
            }
        }
        Ok((names, renorm))
    }
}

/// Projects a square matrix to the nearest symmetric positive definite
/// matrix: symmetrize, eigendecompose, clamp eigenvalues to a small
/// positive floor, reconstruct. Idempotent on well-conditioned symmetric
/// positive definite inputs.
pub fn nearest_spd(m: &Array2<f64>) -> Result<Array2<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let sym = (m + &m.t()) / 2.0;
    let (mut vals, vecs) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e}")))?;
    vals.mapv_inplace(|v| v.max(EIG_FLOOR));
    let scaled = &vecs * &vals;
    Ok(scaled.dot(&vecs.t()))
}

/// Gaussian conditioning of `N(mu, diag(sigma)·corr·diag(sigma))` on the
/// variables at `fixed_indices` taking `fixed_values`. The covariance is
/// projected to the nearest positive definite matrix before conditioning.
/// Returns the conditional mean and covariance over the free variables in
/// their original order.
pub fn conditional_gaussian(
    mu: &Array1<f64>,
    sigma: &Array1<f64>,
    corr: &Array2<f64>,
    fixed_indices: &[usize],
    fixed_values: &[f64],
) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = mu.len();
    if sigma.len() != n || corr.nrows() != n || corr.ncols() != n {
        return Err(Error::InvalidArgument("mean, sigma and correlation sizes disagree".into()));
    }
    if fixed_indices.len() != fixed_values.len() {
        return Err(Error::InvalidArgument("fixed indices and values disagree in length".into()));
    }
    let mut seen = vec![false; n];
    for &i in fixed_indices {
        if i >= n {
            return Err(Error::InvalidArgument(format!("fixed index {i} out of range")));
        }
        if seen[i] {
            return Err(Error::InvalidArgument(format!("fixed index {i} repeated")));
        }
        seen[i] = true;
    }

    let mut cov = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            cov[(i, j)] = sigma[i] * corr[(i, j)] * sigma[j];
        }
    }
    let cov = nearest_spd(&cov)?;

    let free: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    if fixed_indices.is_empty() {
        return Ok((mu.clone(), cov));
    }

    let pick = |rows: &[usize], cols: &[usize]| {
        let mut out = Array2::zeros((rows.len(), cols.len()));
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = cov[(i, j)];
            }
        }
        out
    };
    let sff = pick(fixed_indices, fixed_indices);
    let suf = pick(&free, fixed_indices);
    let sfu = pick(fixed_indices, &free);
    let suu = pick(&free, &free);

    let chol = sff
        .cholesky(UPLO::Lower)
        .map_err(|e| Error::ConditioningFailure(format!("fixed block is singular: {e}")))?;

    let mut delta = Array1::zeros(fixed_indices.len());
    for (a, &i) in fixed_indices.iter().enumerate() {
        delta[a] = fixed_values[a] - mu[i];
    }
    let mu_free = Array1::from_iter(free.iter().map(|&i| mu[i]));
    let mu_cond = &mu_free + &suf.dot(&solve_spd(&chol, &delta));

    // Z = Sff^-1 Sfu, column by column.
    let mut z = Array2::zeros(sfu.dim());
    for (c, col) in sfu.columns().into_iter().enumerate() {
        let solved = solve_spd(&chol, &col.to_owned());
        for r in 0..z.nrows() {
            z[(r, c)] = solved[r];
        }
    }
    let cov_cond = &suu - &suf.dot(&z);
    Ok((mu_cond, cov_cond))
}

/// Solves `L Lᵀ x = b` by forward and back substitution.
fn solve_spd(chol_lower: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = b.len();
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= chol_lower[(i, k)] * y[k];
        }
        y[i] = acc / chol_lower[(i, i)];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in (i + 1)..n {
            acc -= chol_lower[(k, i)] * x[k];
        }
        x[i] = acc / chol_lower[(i, i)];
    }
    x
}

/// Fixed environmental variables a sampler conditions on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvConditioning {
    values: BTreeMap<ParamName, f64>,
}

impl EnvConditioning {
    pub fn new() -> Self {
        Self::default()
    }

    /// Conditioning on all three grid dimensions.
    pub fn from_grid(grid: &GridLayout) -> Self {
        let mut env = Self::new();
        env.set(ParamName::StreetWidth, grid.street_width_m).expect("positive by construction");
        env.set(ParamName::BlockLength, grid.block_length_m).expect("positive by construction");
        env.set(ParamName::BuildingHeight, grid.building_height_m).expect("positive by construction");
        env
    }

    pub fn set(&mut self, name: ParamName, value: f64) -> Result<&mut Self> {
        if !name.is_env() {
            return Err(Error::InvalidArgument(format!("{name} is not an environmental variable")));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")));
        }
        self.values.insert(name, value);
        Ok(self)
    }

    pub fn get(&self, name: ParamName) -> Option<f64> {
        self.values.get(&name).copied()
    }
}

/// One sampled parameter realization for one street in one order role.
#[derive(Debug, Clone, PartialEq)]
pub struct StreetParams {
    pub order: StreetOrder,
    entries: Vec<(ParamName, f64, bool)>,
}

impl StreetParams {
    pub fn get(&self, name: ParamName) -> Option<f64> {
        self.entries.iter().find(|(n, _, _)| *n == name).map(|(_, v, _)| *v)
    }

    /// Whether the lower bound clamped this parameter.
    pub fn clamped(&self, name: ParamName) -> bool {
        self.entries.iter().any(|(n, _, c)| *n == name && *c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamName, f64, bool)> + '_ {
        self.entries.iter().copied()
    }

    pub fn zeroth(&self) -> Option<ZerothParams> {
        Some(ZerothParams { delta0_db: self.get(ParamName::Delta0)?, b0: self.get(ParamName::B0)? })
    }

    pub fn first(&self) -> Option<FirstParams> {
        Some(FirstParams {
            delta1_db: self.get(ParamName::Delta1)?,
            c_offset_db: self.get(ParamName::COffset)?,
            kappa: self.get(ParamName::Kappa)?,
            b1: self.get(ParamName::B1)?,
        })
    }

    pub fn second_exponent(&self) -> Option<f64> {
        if self.order == StreetOrder::Nlos2 {
            self.get(ParamName::B2)
        } else {
            None
        }
    }

    pub fn sigma_db(&self, role: Role) -> f64 {
        let name = match role {
            Role::Ap => ParamName::SigmaAp,
            Role::Ue => ParamName::SigmaUe,
        };
        self.get(name).expect("every order carries shadowing deviations")
    }

    pub fn d_corr_m(&self, role: Role) -> f64 {
        let name = match role {
            Role::Ap => ParamName::DcorrAp,
            Role::Ue => ParamName::DcorrUe,
        };
        self.get(name).expect("every order carries correlation distances")
    }
}

/// Prepared conditional sampler for one street order under one
/// environmental conditioning. Building it once amortizes the projection
/// and conditioning across many streets.
#[derive(Debug, Clone)]
pub struct OrderSampler {
    order: StreetOrder,
    free_names: Vec<ParamName>,
    cond_mean: Array1<f64>,
    factor: Array2<f64>,
    /// Free variables whose table deviation is exactly zero stay pinned to
    /// their conditional mean.
    pinned: Vec<bool>,
    bounds: Vec<Option<f64>>,
}

impl OrderSampler {
    pub fn new(order: StreetOrder, env: &EnvConditioning, tables: &ParameterTables) -> Result<Self> {
        let (names, corr) = tables.projected_order_correlation(order)?;
        let mu = Array1::from_iter(names.iter().map(|n| tables.stat(order, *n).expect("joint stat").mean));
        let sigma =
            Array1::from_iter(names.iter().map(|n| tables.stat(order, *n).expect("joint stat").std));

        let mut fixed_indices = Vec::new();
        let mut fixed_values = Vec::new();
        for (i, name) in names.iter().enumerate() {
            if let Some(v) = env.get(*name) {
                fixed_indices.push(i);
                fixed_values.push(v);
            }
        }
        let (cond_mean, cond_cov) = conditional_gaussian(&mu, &sigma, &corr, &fixed_indices, &fixed_values)?;
        let factor = sampling_factor(&cond_cov)?;

        let free_names: Vec<ParamName> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| !fixed_indices.contains(i))
            .map(|(_, n)| *n)
            .collect();
        let pinned = free_names
            .iter()
            .map(|n| tables.stat(order, *n).expect("joint stat").std == 0.0)
            .collect();
        let bounds = free_names.iter().map(|n| tables.lower_bounds.get(n).copied()).collect();

        Ok(Self { order, free_names, cond_mean, factor, pinned, bounds })
    }

    /// Draws every free joint variable (environmental ones included),
    /// before lower bounds. Exposes the Gaussian stage for statistical
    /// verification.
    pub fn sample_joint<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<(ParamName, f64)> {
        let draw = draw_gaussian(&self.cond_mean, &self.factor, rng);
        self.free_names
            .iter()
            .enumerate()
            .map(|(i, name)| (*name, if self.pinned[i] { self.cond_mean[i] } else { draw[i] }))
            .collect()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> StreetParams {
        let joint = self.sample_joint(rng);
        let mut entries = Vec::new();
        for (i, (name, raw)) in joint.into_iter().enumerate() {
            if name.is_env() {
                // Unconditioned environmental variables are marginalized,
                // not reported.
                continue;
            }
            let (value, clamped) = match self.bounds[i] {
                Some(b) if raw < b => (b, true),
                _ => (raw, false),
            };
            entries.push((name, value, clamped));
        }
        StreetParams { order: self.order, entries }
    }
}

/// Draws one parameter realization for a street order, conditioned on the
/// provided environmental variables. Deterministic for a given generator
/// state.
pub fn sample_street_params<R: rand::Rng + ?Sized>(
    order: StreetOrder,
    env: &EnvConditioning,
    tables: &ParameterTables,
    rng: &mut R,
) -> Result<StreetParams> {
    Ok(OrderSampler::new(order, env, tables)?.sample(rng))
}

/// Map from (street, order role) to its shared parameter realization.
pub type StreetParamMap = BTreeMap<(StreetId, StreetOrder), StreetParams>;

/// Dedicated random stream per (seed, street, order role): draws never
/// shift when other streets or roles are added to a scenario.
pub fn street_substream(seed: u64, street: StreetId, order: StreetOrder) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"stparams");
    key[16] = match street.axis {
        crate::geometry::Axis::Horizontal => 0,
        crate::geometry::Axis::Vertical => 1,
    };
    key[17..21].copy_from_slice(&street.index.to_le_bytes());
    key[21] = order.index() as u8;
    ChaCha12Rng::from_seed(key)
}

/// Samples one realization per (street, order role) needed by the given
/// link classifications. Every segment of every route on the same street
/// and role shares the same realization.
pub fn assign_street_params(
    grid: &GridLayout,
    links: &[LinkClassification],
    tables: &ParameterTables,
    seed: u64,
) -> Result<StreetParamMap> {
    let env = EnvConditioning::from_grid(grid);
    let mut needed: std::collections::BTreeSet<(StreetId, StreetOrder)> = std::collections::BTreeSet::new();
    for link in links {
        let Some(order) = link.order else { continue };
        needed.insert((link.ap_street, order));
        needed.insert((link.ue_street, order));
        for route in &link.routes {
            needed.insert((route.street_ids[0], StreetOrder::Los));
            if order >= StreetOrder::Nlos1 {
                needed.insert((route.street_ids[1], StreetOrder::Nlos1));
            }
            if order == StreetOrder::Nlos2 {
                needed.insert((route.street_ids[2], StreetOrder::Nlos2));
            }
        }
    }

    let mut samplers: BTreeMap<StreetOrder, OrderSampler> = BTreeMap::new();
    let mut map = StreetParamMap::new();
    for (street, order) in needed {
        if !samplers.contains_key(&order) {
            samplers.insert(order, OrderSampler::new(order, &env, tables)?);
        }
        let mut rng = street_substream(seed, street, order);
        map.insert((street, order), samplers[&order].sample(&mut rng));
    }
    Ok(map)
}
