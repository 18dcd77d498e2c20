use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::DEFAULT_EIGENSPACE_TOL;
use crate::subdiff::{SlopeOptions, DEFAULT_SPHERE_SAMPLES, DEFAULT_ZERO_TOL};

/// Radii 1e-1, 1e-2, ..., 1e-6.
pub fn default_radii() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

/// Spheres of radius 1, 10, 100, 1000 for the global checks.
pub fn default_global_radii() -> Vec<f64> {
    (0..4).map(|k| 10f64.powi(k)).collect()
}

/// Settings for the multi-start zero-set projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions {
    /// Perturbed restarts in addition to the start at the query itself.
    pub restarts: usize,
    /// Restart `k` perturbs with standard deviation `base_scale·2^k`.
    pub base_scale: f64,
    /// A witness is accepted when the residual is at most this value.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            restarts: 16,
            base_scale: 0.1,
            tol: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    /// Strictly decreasing positive radii.
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub seed: u64,
    /// Samples over `E(x)` when its multiplicity exceeds one.
    pub sphere_samples: usize,
    pub zero_tol: f64,
    pub eig_tol: f64,
    pub distance: DistanceOptions,
    /// Worker threads for per-sample work; results do not depend on it.
    pub workers: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            radii: default_radii(),
            samples_per_radius: 200,
            seed: 0,
            sphere_samples: DEFAULT_SPHERE_SAMPLES,
            zero_tol: DEFAULT_ZERO_TOL,
            eig_tol: DEFAULT_EIGENSPACE_TOL,
            distance: DistanceOptions::default(),
            workers: 1,
        }
    }
}

impl SamplePlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.radii = radii;
        self
    }

    pub fn with_samples(mut self, samples_per_radius: usize) -> Self {
        self.samples_per_radius = samples_per_radius;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::Precondition("sample plan has no radii".into()));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Precondition("radii must be finite and positive".into()));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Precondition("radii must be strictly decreasing".into()));
        }
        self.validate_counts()
    }

    pub(crate) fn validate_counts(&self) -> Result<()> {
        if self.samples_per_radius == 0 {
            return Err(Error::Precondition("samples_per_radius must be at least 1".into()));
        }
        if self.sphere_samples == 0 {
            return Err(Error::Precondition("sphere_samples must be at least 1".into()));
        }
        if !(self.zero_tol >= 0.0 && self.eig_tol > 0.0 && self.distance.tol > 0.0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn slope_options(&self, seed: u64) -> SlopeOptions {
        SlopeOptions {
            sphere_samples: self.sphere_samples,
            seed,
            zero_tol: self.zero_tol,
            eig_tol: self.eig_tol,
        }
    }
}

/// Checks a schedule of sphere radii for the global checks (increasing).
pub(crate) fn validate_schedule(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Precondition("radius schedule is empty".into()));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Precondition("schedule radii must be finite and positive".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("schedule radii must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let plan = SamplePlan::default();
        plan.validate().unwrap();
        assert_eq!(plan.radii.len(), 6);
        assert_eq!(plan.radii[0], 0.1);
        assert!((plan.radii[5] - 1e-6).abs() < 1e-20);
        validate_schedule(&default_global_radii()).unwrap();
    }

    #[test]
    fn rejects_bad_plans() {
        assert!(SamplePlan::default().with_radii(vec![]).validate().is_err());
        assert!(SamplePlan::default().with_radii(vec![0.1, 0.1]).validate().is_err());
        assert!(SamplePlan::default().with_radii(vec![0.1, 0.5]).validate().is_err());
        assert!(SamplePlan::default().with_radii(vec![0.1, -0.5]).validate().is_err());
        assert!(SamplePlan::default().with_samples(0).validate().is_err());
        assert!(validate_schedule(&[10.0, 1.0]).is_err());
    }
}
