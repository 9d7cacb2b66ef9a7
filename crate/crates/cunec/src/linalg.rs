//! Crate-internal dense linear algebra helpers.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Eigh, UPLO};

/// Escalating diagonal jitter tried before falling back to an
/// eigenvalue-based factor.
const JITTER_LADDER: &[f64] = &[1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Returns a factor `F` with `F Fᵀ ≈ cov`, suitable for sampling.
///
/// Plain Cholesky is tried first, then Cholesky with escalating diagonal
/// jitter, and finally an eigendecomposition with negative eigenvalues
/// dropped. Only an eigendecomposition failure is an error.
pub(crate) fn sampling_factor(cov: &Array2<f64>) -> Result<Array2<f64>> {
    if let Ok(l) = cov.cholesky(UPLO::Lower) {
        return Ok(l);
    }
    let n = cov.nrows();
    for &jitter in JITTER_LADDER {
        let mut jittered = cov.clone();
        for i in 0..n {
            jittered[(i, i)] += jitter;
        }
        if let Ok(l) = jittered.cholesky(UPLO::Lower) {
            return Ok(l);
        }
    }
    let (mut vals, vecs) = cov
        .eigh(UPLO::Lower)
        .map_err(|e| Error::NumericalFailure(format!("eigendecomposition failed: {e}")))?;
    vals.mapv_inplace(|v| v.max(0.0).sqrt());
    Ok(&vecs * &vals)
}

/// Draws `mean + F z` with `z` standard normal.
pub(crate) fn draw_gaussian<R: rand::Rng + ?Sized>(
    mean: &Array1<f64>,
    factor: &Array2<f64>,
    rng: &mut R,
) -> Array1<f64> {
    let z: Array1<f64> = Array1::from_iter(
        (0..factor.ncols()).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
    );
    mean + &factor.dot(&z)
}
