//! Covariance-adapting baseline: elite mean / covariance estimation and
//! sampling from the fitted Gaussian.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::params::ParamVec;

/// Fit mean and covariance to the best members of a population.
///
/// Rewards are first penalized by `weight_decay * ||theta||^2`, then the top
/// `floor(len * elite_fraction)` members (at least one) are selected. The
/// mean is the elite average; the covariance is the elite scatter about that
/// mean, divided by the elite count.
pub fn cma_update(
    members: &[ParamVec],
    rewards: &[f64],
    elite_fraction: f64,
    weight_decay: f64,
) -> Result<(ParamVec, DMatrix<f64>)> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("empty population".into()));
    }
    if members.len() != rewards.len() {
        return Err(Error::shape("rewards", members.len(), rewards.len()));
    }
    if !(0.0 < elite_fraction && elite_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "elite fraction must be in (0, 1], got {elite_fraction}"
        )));
    }
    let n = members[0].len();
    for m in members {
        if m.len() != n {
            return Err(Error::shape("member length", n, m.len()));
        }
    }

    let adjusted: Vec<f64> = members
        .iter()
        .zip(rewards)
        .map(|(m, r)| {
            let sq_norm: f64 = m.as_slice().iter().map(|v| v * v).sum();
            r - weight_decay * sq_norm
        })
        .collect();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| adjusted[b].total_cmp(&adjusted[a]));
    let elite_count = ((members.len() as f64 * elite_fraction).floor() as usize).max(1);
    let elite = &order[..elite_count];

    let mut mu = vec![0.0; n];
    for &idx in elite {
        for (m, v) in mu.iter_mut().zip(members[idx].as_slice()) {
            *m += v;
        }
    }
    let inv = 1.0 / elite_count as f64;
    for m in mu.iter_mut() {
        *m *= inv;
    }

    let mut sigma = DMatrix::zeros(n, n);
    for &idx in elite {
        let theta = members[idx].as_slice();
        for i in 0..n {
            let di = theta[i] - mu[i];
            for j in 0..n {
                sigma[(i, j)] += di * (theta[j] - mu[j]);
            }
        }
    }
    sigma *= inv;

    Ok((ParamVec::new(mu), sigma))
}

/// Draw `count` members from `N(mu, sigma_mat)` via symmetric
/// eigendecomposition. Eigenvalues are clamped at `floor` (>= 0) so a
/// rank-deficient elite covariance still samples.
pub fn sample_cma_population<R: Rng + ?Sized>(
    mu: &ParamVec,
    sigma_mat: &DMatrix<f64>,
    count: usize,
    floor: f64,
    rng: &mut R,
) -> Result<Vec<ParamVec>> {
    let n = mu.len();
    if sigma_mat.nrows() != n || sigma_mat.ncols() != n {
        return Err(Error::shape("covariance", n, sigma_mat.nrows()));
    }
    if floor < 0.0 {
        return Err(Error::InvalidArgument("eigenvalue floor must be >= 0".into()));
    }
    let eigen = nalgebra::SymmetricEigen::new(sigma_mat.clone());
    let scales: Vec<f64> = eigen
        .eigenvalues
        .iter()
        .map(|&l| l.max(floor).max(0.0).sqrt())
        .collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let z: Vec<f64> = (0..n)
            .map(|j| scales[j] * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut x = mu.as_slice().to_vec();
        for (row, xi) in x.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (col, zj) in z.iter().enumerate() {
                acc += eigen.eigenvectors[(row, col)] * zj;
            }
            *xi += acc;
        }
        out.push(ParamVec::new(x));
    }
    Ok(out)
}
