//! Distribution-level machinery for the evolution strategy: guided low-rank
//! sampling, antithetic populations, rank-based fitness shaping, the
//! mean update, surrogate-gradient construction, and the covariance-adapting
//! baseline.

mod cma;
mod ortho;
mod rank;
mod update;

pub use cma::{cma_update, sample_cma_population};
pub use ortho::orthogonalize;
pub use rank::rank_transform;
pub use update::{surrogate_gradients, vanilla_es_update};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::params::ParamVec;

/// Orthonormality tolerance enforced on the guiding basis.
pub const BASIS_ORTHO_TOL: f64 = 1e-10;

/// The guided Gaussian the population is drawn from.
///
/// Perturbations have covariance `(alpha/n) I + ((1-alpha)/k) U U^T`, built
/// in factored form so the full `n x n` matrix is never materialized. With an
/// empty basis (or `alpha = 1`) sampling degenerates to isotropic `N(0, I/n)`
/// — the plain-ES mode and the first-generation mode.
#[derive(Debug, Clone)]
pub struct SearchDistribution {
    mu: ParamVec,
    sigma: f64,
    alpha: f64,
    /// Orthonormal columns spanning the surrogate-gradient subspace; `None`
    /// when no gradients are available yet.
    basis: Option<DMatrix<f64>>,
}

impl SearchDistribution {
    /// Isotropic distribution (no guiding subspace).
    pub fn isotropic(mu: ParamVec, sigma: f64, alpha: f64) -> Result<Self> {
        Self::new(mu, sigma, alpha, None)
    }

    pub fn new(
        mu: ParamVec,
        sigma: f64,
        alpha: f64,
        basis: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::NonFinite("distribution mean"));
        }
        let basis = match basis {
            Some(b) if b.ncols() == 0 => None,
            other => other,
        };
        if let Some(b) = &basis {
            if b.nrows() != mu.len() {
                return Err(Error::shape("basis rows", mu.len(), b.nrows()));
            }
            if b.ncols() > b.nrows() {
                return Err(Error::shape("basis columns", b.nrows(), b.ncols()));
            }
            let gram = b.transpose() * b;
            let eye = DMatrix::<f64>::identity(b.ncols(), b.ncols());
            let dev = (gram - eye).abs().max();
            if dev > BASIS_ORTHO_TOL {
                return Err(Error::InvalidArgument(format!(
                    "basis is not orthonormal (max deviation {dev:.3e})"
                )));
            }
        }
        Ok(SearchDistribution {
            mu,
            sigma,
            alpha,
            basis,
        })
    }

    pub fn mu(&self) -> &ParamVec {
        &self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn subspace_dim(&self) -> usize {
        self.basis.as_ref().map_or(0, DMatrix::ncols)
    }

    /// Replace the mean, keeping scale and basis settings.
    pub fn with_mu(&self, mu: ParamVec) -> Result<Self> {
        Self::new(mu, self.sigma, self.alpha, self.basis.clone())
    }

    /// Replace the guiding basis (pass an empty matrix to clear it).
    pub fn with_basis(&self, basis: DMatrix<f64>) -> Result<Self> {
        let basis = if basis.ncols() == 0 { None } else { Some(basis) };
        Self::new(self.mu.clone(), self.sigma, self.alpha, basis)
    }

    /// Draw one perturbation from the factored covariance.
    pub fn sample_perturbation<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVec {
        let n = self.mu.len();
        let (alpha, basis) = match &self.basis {
            Some(b) => (self.alpha, Some(b)),
            None => (1.0, None),
        };
        let iso_scale = (alpha / n as f64).sqrt();
        let mut eps: Vec<f64> = (0..n)
            .map(|_| iso_scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        if let Some(u) = basis {
            let k = u.ncols();
            let sub_scale = ((1.0 - alpha) / k as f64).sqrt();
            let w: Vec<f64> = (0..k)
                .map(|_| sub_scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            for (row, e) in eps.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (col, wj) in w.iter().enumerate() {
                    acc += u[(row, col)] * wj;
                }
                *e += acc;
            }
        }
        ParamVec::new(eps)
    }

    /// Sample `pairs` perturbations and build the antithetic population.
    pub fn sample_population<R: Rng + ?Sized>(
        &self,
        pairs: usize,
        generation: u64,
        rng: &mut R,
    ) -> Result<Population> {
        if pairs == 0 {
            return Err(Error::InvalidArgument("population needs >= 1 pair".into()));
        }
        let mut eps = Vec::with_capacity(pairs);
        let mut members = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            eps.push(self.sample_perturbation(rng));
        }
        for e in &eps {
            members.push(self.mu.add_scaled(e, self.sigma)?);
        }
        // Mirror each member about the mean elementwise, so the antithetic
        // identity member[P+i] = 2*mu - member[i] holds bitwise.
        for i in 0..pairs {
            let mirrored: Vec<f64> = self
                .mu
                .as_slice()
                .iter()
                .zip(members[i].as_slice())
                .map(|(m, x)| 2.0 * m - x)
                .collect();
            members.push(ParamVec::new(mirrored));
        }
        Ok(Population {
            eps,
            members,
            generation,
        })
    }
}

/// An antithetic population: `members[i] = mu + sigma * eps[i]` for
/// `i < pairs`, and `members[pairs + i]` the mirror image about `mu`.
#[derive(Debug, Clone)]
pub struct Population {
    eps: Vec<ParamVec>,
    members: Vec<ParamVec>,
    generation: u64,
}

impl Population {
    pub fn pairs(&self) -> usize {
        self.eps.len()
    }

    pub fn members(&self) -> &[ParamVec] {
        &self.members
    }

    pub fn eps(&self) -> &[ParamVec] {
        &self.eps
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }
}

/// Raw rewards for one generation together with their rank-shaped values.
#[derive(Debug, Clone)]
pub struct FitnessVector {
    pub raw: Vec<f64>,
    pub shaped: Vec<f64>,
}

impl FitnessVector {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let shaped = rank_transform(&raw);
        FitnessVector { raw, shaped }
    }
}
