//! Distance from a point to the common zero set of one or more matrices.
//!
//! The residual `r(z) = sqrt(Σ_i f_i(z)²)` vanishes exactly on the common
//! zero set. Each local search runs minimum-norm Gauss-Newton steps for the
//! system `f_i = 0` with subgradients as Jacobian rows (for one matrix this
//! is `z ← z − f·v/‖v‖²`), halving the step until the residual decreases. Starts are the query and Gaussian perturbations of
//! it at growing scales; the nearest accepted witness is then pulled toward
//! the query by re-projecting points on the connecting segment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numlin::{dot, norm, sym_eig, DenseMatrix};
use crate::polymatrix::PolyMatrix;
use crate::sampling::{gaussian_vector, stream_rng};
use crate::subdiff::AuxiliarySetup;

use super::plan::DistanceOptions;

const DISTANCE_STREAM: u64 = 0xd157;
const MAX_HALVINGS: usize = 40;
const TIGHTEN_MIN_STEP: f64 = 1e-4;
const TIGHTEN_MAX_ROUNDS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub witness: Vec<f64>,
    /// Starts tried before the search stopped (the query itself counts).
    pub restarts_used: usize,
    /// Residual at the witness.
    pub residual: f64,
}

/// Common zero set `{f_1 = 0} ∩ … ∩ {f_k = 0}`.
pub struct ZeroSet<'a> {
    setups: Vec<AuxiliarySetup<'a>>,
    eig_tol: f64,
}

impl<'a> ZeroSet<'a> {
    pub fn new(matrices: &[&'a PolyMatrix]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Precondition("zero set of an empty family".into()))?;
        for m in matrices {
            check_dim(first.nvars(), m.nvars())?;
        }
        Ok(ZeroSet {
            setups: matrices.iter().map(|m| AuxiliarySetup::at_zero(m)).collect(),
            eig_tol: crate::numlin::DEFAULT_EIGENSPACE_TOL,
        })
    }

    pub fn with_eig_tol(mut self, eig_tol: f64) -> Self {
        self.eig_tol = eig_tol;
        self
    }

    pub fn nvars(&self) -> usize {
        self.setups[0].matrix().nvars()
    }

    /// `sqrt(Σ f_i(z)²)`.
    pub fn residual(&self, z: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for s in &self.setups {
            let f = s.spectrum(z)?.f;
            acc += f * f;
        }
        Ok(acc.sqrt())
    }

    /// Residual and one Gauss-Newton step for the system `f_i(z) = 0`:
    /// the minimum-norm solution of `J·δ = −(f_1, …, f_k)` over the rows
    /// `J_i` of matrices with `f_i > 0` (a subgradient of `f_i`).
    fn residual_and_step<R: Rng + ?Sized>(&self, z: &[f64], rng: &mut R) -> Result<(f64, Option<Vec<f64>>)> {
        let mut acc = 0.0;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for s in &self.setups {
            let spectrum = s.spectrum(z)?;
            acc += spectrum.f * spectrum.f;
            if let Some(g) = s.subgradient(z, &spectrum, self.eig_tol, 0.0, rng)? {
                // Unit rows keep the system well scaled when the f_i vanish
                // at different orders.
                let len = norm(&g);
                if len > 0.0 && len.is_finite() {
                    rows.push(g.into_iter().map(|v| v / len).collect());
                    values.push(spectrum.f / len);
                }
            }
        }
        let r = acc.sqrt();
        if rows.is_empty() || r == 0.0 {
            return Ok((r, None));
        }
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for a in &rows {
            for b in &rows {
                data.push(dot(a, b));
            }
        }
        let jjt = DenseMatrix::from_row_major(k, k, data);
        let eig = sym_eig(&jjt)?;
        let top = eig.values.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) {
            return Ok((r, None));
        }
        // w = (J Jᵀ)⁺ f, δ = −Jᵀ w
        let mut w = vec![0.0; k];
        for (idx, &lambda) in eig.values.iter().enumerate() {
            if lambda <= 1e-10 * top {
                continue;
            }
            let v = eig.vector(idx);
            let c = dot(&v, &values) / lambda;
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi += c * vi;
            }
        }
        let mut step = vec![0.0; z.len()];
        for (row, wi) in rows.iter().zip(&w) {
            for (si, ri) in step.iter_mut().zip(row) {
                *si -= wi * ri;
            }
        }
        Ok((r, Some(step)))
    }

    /// Local Gauss-Newton descent on the residual from `start`, halving
    /// steps until the residual decreases. Returns the final point and its
    /// residual.
    pub fn project<R: Rng + ?Sized>(&self, start: &[f64], max_iterations: usize, rng: &mut R) -> Result<(Vec<f64>, f64)> {
        check_dim(self.nvars(), start.len())?;
        let mut z = start.to_vec();
        let (mut r, mut step) = self.residual_and_step(&z, rng)?;
        for _ in 0..max_iterations {
            let Some(delta) = step.take() else { break };
            if delta.iter().any(|v| !v.is_finite()) || delta.iter().all(|v| *v == 0.0) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand: Vec<f64> = z.iter().zip(&delta).map(|(zi, di)| zi + t * di).collect();
                let (rc, sc) = self.residual_and_step(&cand, rng)?;
                if rc.is_finite() && rc < r {
                    accepted = Some((cand, rc, sc));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, rc, sc)) = accepted else { break };
            let moved = z.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            z = cand;
            r = rc;
            step = sc;
            if moved <= 1e-15 * (1.0 + norm(&z)) {
                break;
            }
        }
        if !r.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("zero-set descent diverged".into()));
        }
        Ok((z, r))
    }

    /// Multi-start estimate of the distance from `query` to the zero set.
    /// `hints` are points known to lie on the zero set; they are used as
    /// candidate witnesses when their residual is within tolerance.
    pub fn distance(&self, query: &[f64], opts: &DistanceOptions, seed: u64, hints: &[Vec<f64>]) -> Result<DistanceEstimate> {
        check_dim(self.nvars(), query.len())?;
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query point".into()));
        }
        let mut rng = stream_rng(seed, DISTANCE_STREAM, 0);
        let dist = |w: &[f64]| query.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();

        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        let consider = |w: Vec<f64>, r: f64, best: &mut Option<(Vec<f64>, f64, f64)>| {
            if r <= opts.tol {
                let d = dist(&w);
                if best.as_ref().is_none_or(|b| d < b.2) {
                    *best = Some((w, r, d));
                }
            }
        };
        for h in hints {
            check_dim(self.nvars(), h.len())?;
            let r = self.residual(h)?;
            consider(h.clone(), r, &mut best);
        }
        let starts = opts.restarts + 1;
        for k in 0..starts {
            let start: Vec<f64> = if k == 0 {
                query.to_vec()
            } else {
                let scale = opts.base_scale * 2f64.powi(k as i32 - 1);
                query
                    .iter()
                    .zip(gaussian_vector(&mut rng, query.len()))
                    .map(|(q, g)| q + scale * g)
                    .collect()
            };
            let (w, r) = self.project(&start, opts.max_iterations, &mut rng)?;
            consider(w, r, &mut best);
        }
        let Some((mut w, mut r, mut d)) = best else {
            return Err(Error::NoZeroFound { restarts: starts });
        };

        // Pull the witness toward the query: re-project points of the
        // segment [w, query] and keep any closer zero.
        let mut s = 0.5;
        for _ in 0..TIGHTEN_MAX_ROUNDS {
            if s < TIGHTEN_MIN_STEP || d == 0.0 {
                break;
            }
            let mid: Vec<f64> = w.iter().zip(query).map(|(wi, qi)| wi + s * (qi - wi)).collect();
            let (w2, r2) = self.project(&mid, opts.max_iterations, &mut rng)?;
            let d2 = dist(&w2);
            if r2 <= opts.tol && d2 < d * (1.0 - 1e-12) {
                w = w2;
                r = r2;
                d = d2;
            } else {
                s *= 0.5;
            }
        }
        Ok(DistanceEstimate {
            value: d,
            witness: w,
            restarts_used: starts,
            residual: r,
        })
    }
}

/// `dist(x, S_F)` for a single matrix.
pub fn estimate_distance_to_zero_set(
    matrix: &PolyMatrix,
    x: &[f64],
    opts: &DistanceOptions,
    seed: u64,
) -> Result<DistanceEstimate> {
    ZeroSet::new(&[matrix])?.distance(x, opts, seed, &[])
}

/// `dist(x, S_F ∩ S_G)`; a failed search reports an empty intersection.
pub fn estimate_distance_to_intersection(
    f: &PolyMatrix,
    g: &PolyMatrix,
    x: &[f64],
    opts: &DistanceOptions,
    seed: u64,
) -> Result<DistanceEstimate> {
    ZeroSet::new(&[f, g])?.distance(x, opts, seed, &[]).map_err(|e| match e {
        Error::NoZeroFound { .. } => Error::IntersectionNotFound,
        other => other,
    })
}
