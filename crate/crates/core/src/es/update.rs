//! Mean update from antithetic fitness differences, and construction of
//! surrogate gradients from behaviour-cloned refinements.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::params::ParamVec;

/// Move the mean along the fitness-weighted perturbations:
///
/// `mu' = mu + gamma * beta / (sigma^2 * 2P) * sum_i eps_i * (f_plus_i - f_minus_i)`
///
/// This ascends the reward. `f_plus[i]` / `f_minus[i]` are the fitness values
/// of the members `mu + sigma*eps_i` / `mu - sigma*eps_i`; the caller decides
/// whether they are raw or rank-shaped. `P` is taken from `eps.len()`, so a
/// generation that dropped pairs renormalizes automatically.
pub fn vanilla_es_update(
    mu: &ParamVec,
    eps: &[ParamVec],
    f_plus: &[f64],
    f_minus: &[f64],
    gamma: f64,
    beta: f64,
    sigma: f64,
) -> Result<ParamVec> {
    let pairs = eps.len();
    if pairs == 0 {
        return Err(Error::InvalidArgument(
            "mean update needs >= 1 surviving pair".into(),
        ));
    }
    if f_plus.len() != pairs || f_minus.len() != pairs {
        return Err(Error::shape("fitness arrays", pairs, f_plus.len().min(f_minus.len())));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    let mut acc = vec![0.0; mu.len()];
    for ((e, fp), fm) in eps.iter().zip(f_plus).zip(f_minus) {
        if e.len() != mu.len() {
            return Err(Error::shape("perturbation length", mu.len(), e.len()));
        }
        let diff = fp - fm;
        for (a, v) in acc.iter_mut().zip(e.as_slice()) {
            *a += v * diff;
        }
    }
    let scale = gamma * beta / (sigma * sigma * (2 * pairs) as f64);
    let step = ParamVec::new(acc);
    mu.add_scaled(&step, scale)
}

/// Columns `(theta_star_i - mu_next) / eta`: the directions the refined
/// parameters pulled away from the updated mean, normalized so the resulting
/// search covariance stays moderate.
pub fn surrogate_gradients(
    theta_star: &[ParamVec],
    mu_next: &ParamVec,
    eta: f64,
) -> Result<DMatrix<f64>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
    }
    let n = mu_next.len();
    let k = theta_star.len();
    let mut deltas = DMatrix::zeros(n, k);
    for (j, theta) in theta_star.iter().enumerate() {
        if theta.len() != n {
            return Err(Error::shape("refined parameters", n, theta.len()));
        }
        for i in 0..n {
            deltas[(i, j)] = (theta[i] - mu_next[i]) / eta;
        }
    }
    Ok(deltas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::es::SearchDistribution;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_fitness_leaves_mean_unchanged() {
        let mu = ParamVec::new(vec![1.0, -2.0]);
        let eps = vec![ParamVec::new(vec![0.5, 0.5]), ParamVec::new(vec![-1.0, 0.2])];
        let f = vec![0.3, -0.7];
        let out = vanilla_es_update(&mu, &eps, &f, &f, 0.1, 1.0, 0.05).unwrap();
        assert_eq!(out, mu);
    }

    #[test]
    fn single_pair_hand_computed() {
        // P = 1, eps = [1, 0], f+ = 1, f- = -1, gamma = beta = sigma = 1:
        // mu' = mu + 1/(2) * [1,0] * 2 = mu + [1, 0]
        let mu = ParamVec::new(vec![0.0, 0.0]);
        let eps = vec![ParamVec::new(vec![1.0, 0.0])];
        let out = vanilla_es_update(&mu, &eps, &[1.0], &[-1.0], 1.0, 1.0, 1.0).unwrap();
        assert_eq!(out.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let mu = ParamVec::zeros(2);
        let eps = vec![ParamVec::zeros(2)];
        assert!(vanilla_es_update(&mu, &eps, &[1.0, 2.0], &[0.0], 0.1, 1.0, 0.1).is_err());
        let eps_bad = vec![ParamVec::zeros(3)];
        assert!(vanilla_es_update(&mu, &eps_bad, &[1.0], &[0.0], 0.1, 1.0, 0.1).is_err());
    }

    /// Estimator quality oracle: on F(x) = -||x||^2 the update direction must
    /// align with the analytic gradient -2*mu.
    #[test]
    fn update_direction_aligns_with_gradient_on_quadratic() {
        let n = 20;
        let pairs = 32;
        let sigma = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let f = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
        let mu = ParamVec::new(vec![1.0; n]);
        let dist = SearchDistribution::isotropic(mu.clone(), sigma, 1.0).unwrap();
        let mut cosines = Vec::new();
        for _ in 0..50 {
            let pop = dist.sample_population(pairs, 0, &mut rng).unwrap();
            let fp: Vec<f64> = (0..pairs).map(|i| f(pop.members()[i].as_slice())).collect();
            let fm: Vec<f64> = (0..pairs)
                .map(|i| f(pop.members()[pairs + i].as_slice()))
                .collect();
            let next = vanilla_es_update(&mu, pop.eps(), &fp, &fm, 1.0, 1.0, sigma).unwrap();
            let step = next.sub(&mu).unwrap();
            let grad = ParamVec::new(mu.as_slice().iter().map(|v| -2.0 * v).collect());
            let cos = step.dot(&grad) / (step.norm() * grad.norm());
            cosines.push(cos);
        }
        let mean = cosines.iter().sum::<f64>() / cosines.len() as f64;
        assert!(mean > 0.5, "mean cosine similarity {mean}");
    }

    /// Full optimization on the quadratic: the raw-fitness estimator tracks
    /// the analytic gradient closely enough to contract geometrically.
    #[test]
    fn converges_on_quadratic() {
        let pairs = 32;
        let sigma = 0.1;
        let gamma = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>();
        let mut mu = ParamVec::new(vec![3.0, 3.0]);
        for _ in 0..200 {
            let dist = SearchDistribution::isotropic(mu.clone(), sigma, 1.0).unwrap();
            let pop = dist.sample_population(pairs, 0, &mut rng).unwrap();
            let fp: Vec<f64> = (0..pairs).map(|i| f(pop.members()[i].as_slice())).collect();
            let fm: Vec<f64> = (0..pairs)
                .map(|i| f(pop.members()[pairs + i].as_slice()))
                .collect();
            mu = vanilla_es_update(&mu, pop.eps(), &fp, &fm, gamma, 1.0, sigma).unwrap();
        }
        assert!(mu.norm() < 0.1, "final |mu| = {}", mu.norm());
    }

    #[test]
    fn surrogate_gradients_zero_when_refinements_equal_mean() {
        let mu = ParamVec::new(vec![0.5, -0.5]);
        let stars = vec![mu.clone(), mu.clone(), mu.clone()];
        let d = surrogate_gradients(&stars, &mu, 1.0).unwrap();
        assert_eq!(d.ncols(), 3);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn surrogate_gradients_scalar_division() {
        let mu = ParamVec::new(vec![0.0, 0.0]);
        let stars = vec![ParamVec::new(vec![2.0, 0.0])];
        let d = surrogate_gradients(&stars, &mu, 2.0).unwrap();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(1, 0)], 0.0);
    }

    #[test]
    fn surrogate_gradients_linear_in_inverse_eta() {
        let mu = ParamVec::zeros(3);
        let stars = vec![
            ParamVec::new(vec![1.0, 2.0, -1.0]),
            ParamVec::new(vec![0.5, 0.0, 4.0]),
        ];
        let d1 = surrogate_gradients(&stars, &mu, 1.0).unwrap();
        let d2 = surrogate_gradients(&stars, &mu, 2.0).unwrap();
        for j in 0..2 {
            let n1 = d1.column(j).norm();
            let n2 = d2.column(j).norm();
            assert!((n1 - 2.0 * n2).abs() < 1e-15, "column {j}: {n1} vs {n2}");
        }
    }

    #[test]
    fn surrogate_gradients_rejects_dimension_mismatch() {
        let mu = ParamVec::zeros(3);
        let stars = vec![ParamVec::zeros(2)];
        assert!(surrogate_gradients(&stars, &mu, 1.0).is_err());
    }
}
