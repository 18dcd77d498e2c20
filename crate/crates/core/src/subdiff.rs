//! The auxiliary polynomial `g(x, y)` behind the smallest singular value
//! function, its minimizer set `E(x)` and slope estimates for `f`.
//!
//! With rows `F_i` of `F` and a base value `b = f(x̄)`,
//!
//! ```text
//! g(x, y) = Σ_ij y_i y_j ⟨F_i(x), F_j(x)⟩ − b²·Σ_i y_i²
//! ```
//!
//! On the unit sphere `g(x, ·)` is the Rayleigh quotient of `F(x)F(x)ᵀ`
//! shifted by `b²`, so its minimum is `f̃(x) = f(x)² − b²` and the minimizer
//! set `E(x)` is the unit sphere of the `λ_min`-eigenspace. Subgradient
//! representatives of `f̃` are `∇ₓg(x, z)` for `z ∈ E(x)`, and those of `f`
//! are obtained by dividing by `2 f(x)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numlin::{self, dot, norm, DenseMatrix, EigenDecomposition};
use crate::poly::Polynomial;
use crate::polymatrix::PolyMatrix;
use crate::sampling::{self, unit_sphere};

/// Threshold below which `f(x)` is treated as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;
/// Number of sphere samples used for the slope when `E(x)` is not a pair of
/// antipodal points.
pub const DEFAULT_SPHERE_SAMPLES: usize = 512;

const SLOPE_STREAM: u64 = 0x5103e;
const GOLDEN_ITERATIONS: usize = 80;

/// Knobs shared by the slope and gradient routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeOptions {
    pub sphere_samples: usize,
    pub seed: u64,
    pub zero_tol: f64,
    pub eig_tol: f64,
}

impl Default for SlopeOptions {
    fn default() -> Self {
        SlopeOptions {
            sphere_samples: DEFAULT_SPHERE_SAMPLES,
            seed: 0,
            zero_tol: DEFAULT_ZERO_TOL,
            eig_tol: numlin::DEFAULT_EIGENSPACE_TOL,
        }
    }
}

impl SlopeOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        SlopeOptions { seed, ..self }
    }
}

/// Orthonormal basis of `E(x)`'s span.
#[derive(Clone, Debug)]
pub struct MinimizerSet {
    pub basis: DenseMatrix,
    pub multiplicity: usize,
    pub lambda_min: f64,
}

impl MinimizerSet {
    /// `B·u` for coordinates `u ∈ R^m`.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        self.basis.matvec(u)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub value: f64,
    /// True when `E(x)` is a single antipodal pair (or `f(x)` vanishes), so
    /// no sampling was needed.
    pub exact: bool,
    pub samples_used: usize,
    pub witness_y: Vec<f64>,
    pub multiplicity: usize,
}

/// Spectral data of `F(x)F(x)ᵀ` at one point.
#[derive(Clone, Debug)]
pub struct PointSpectrum {
    pub gram: DenseMatrix,
    pub eig: EigenDecomposition,
    /// `λ_min`, clamped at zero.
    pub lambda_min: f64,
    /// `f(x) = sqrt(λ_min)`.
    pub f: f64,
}

impl PointSpectrum {
    pub fn compute(matrix: &PolyMatrix, x: &[f64]) -> Result<Self> {
        let gram = matrix.gram(x)?;
        let eig = numlin::sym_eig(&gram)?;
        let lambda_min = numlin::clamped_min_eigenvalue(&gram, &eig)?;
        Ok(PointSpectrum {
            f: lambda_min.sqrt(),
            gram,
            eig,
            lambda_min,
        })
    }

    pub fn minimizer_set(&self, tol: f64) -> MinimizerSet {
        let basis = numlin::eigenspace_basis(&self.gram, &self.eig, tol);
        MinimizerSet {
            multiplicity: basis.cols(),
            basis,
            lambda_min: self.lambda_min,
        }
    }
}

/// `f(x)`, the smallest singular value of `F(x)`.
pub fn smallest_singular_value(matrix: &PolyMatrix, x: &[f64]) -> Result<f64> {
    Ok(PointSpectrum::compute(matrix, x)?.f)
}

/// `g`, `f̃` and their derivatives for one matrix and base value.
#[derive(Clone, Debug)]
pub struct AuxiliarySetup<'a> {
    matrix: &'a PolyMatrix,
    base_value: f64,
    gram_polys: Vec<Vec<Polynomial>>,
    // gram_grads[i][j][k] = ∂_k ⟨F_i, F_j⟩, filled for all (i, j)
    gram_grads: Vec<Vec<Vec<Polynomial>>>,
}

impl<'a> AuxiliarySetup<'a> {
    /// Setup with `base_value = f(base_point)`.
    pub fn new(matrix: &'a PolyMatrix, base_point: &[f64]) -> Result<Self> {
        let base = smallest_singular_value(matrix, base_point)?;
        Self::with_base_value(matrix, base)
    }

    /// Setup with base value zero, i.e. `g(x, y) = ‖yᵀF(x)‖²`.
    pub fn at_zero(matrix: &'a PolyMatrix) -> Self {
        Self::with_base_value(matrix, 0.0).expect("zero is a valid base value")
    }

    pub fn with_base_value(matrix: &'a PolyMatrix, base_value: f64) -> Result<Self> {
        if !(base_value >= 0.0) || !base_value.is_finite() {
            return Err(Error::Precondition(format!(
                "base value must be finite and non-negative, got {base_value}"
            )));
        }
        let gram_polys = matrix.gram_polynomials();
        let gram_grads = gram_polys
            .iter()
            .map(|row| row.iter().map(Polynomial::gradient).collect())
            .collect();
        Ok(AuxiliarySetup {
            matrix,
            base_value,
            gram_polys,
            gram_grads,
        })
    }

    pub fn matrix(&self) -> &'a PolyMatrix {
        self.matrix
    }

    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn gram_polynomials(&self) -> &[Vec<Polynomial>] {
        &self.gram_polys
    }

    fn check(&self, x: &[f64], y: Option<&[f64]>) -> Result<()> {
        check_dim(self.matrix.nvars(), x.len())?;
        if let Some(y) = y {
            check_dim(self.matrix.rows(), y.len())?;
        }
        Ok(())
    }

    pub fn spectrum(&self, x: &[f64]) -> Result<PointSpectrum> {
        PointSpectrum::compute(self.matrix, x)
    }

    pub fn g_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check(x, Some(y))?;
        let p = y.len();
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                if y[i] != 0.0 && y[j] != 0.0 {
                    acc += y[i] * y[j] * self.gram_polys[i][j].eval_unchecked(x);
                }
            }
        }
        Ok(acc - self.base_value * self.base_value * dot(y, y))
    }

    /// `f̃(x) = f(x)² − base_value²`.
    pub fn f_tilde(&self, x: &[f64]) -> Result<f64> {
        self.check(x, None)?;
        let f = smallest_singular_value(self.matrix, x)?;
        Ok(f * f - self.base_value * self.base_value)
    }

    pub fn grad_x_g(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check(x, Some(y))?;
        let n = x.len();
        let p = y.len();
        let mut grad = vec![0.0; n];
        for i in 0..p {
            for j in 0..p {
                let w = y[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (k, gk) in grad.iter_mut().enumerate() {
                    *gk += w * self.gram_grads[i][j][k].eval_unchecked(x);
                }
            }
        }
        Ok(grad)
    }

    /// `∇_y g = 2·F(x)F(x)ᵀ·y − 2·base_value²·y`.
    pub fn grad_y_g(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check(x, Some(y))?;
        let gram = self.matrix.gram(x)?;
        let b2 = self.base_value * self.base_value;
        Ok(gram
            .matvec(y)
            .iter()
            .zip(y)
            .map(|(gy, yi)| 2.0 * gy - 2.0 * b2 * yi)
            .collect())
    }

    pub fn minimizer_set(&self, x: &[f64], tol: f64) -> Result<MinimizerSet> {
        self.check(x, None)?;
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("eigenspace tolerance must be positive, got {tol}")));
        }
        Ok(self.spectrum(x)?.minimizer_set(tol))
    }

    /// `min_{z ∈ E(x)} ‖∇ₓg(x, z)‖`: exact for a simple `λ_min`, sampled over
    /// the eigenspace sphere otherwise.
    pub fn slope_f_tilde(&self, x: &[f64], opts: &SlopeOptions) -> Result<SlopeEstimate> {
        self.check(x, None)?;
        let spectrum = self.spectrum(x)?;
        self.slope_f_tilde_with(x, &spectrum.minimizer_set(opts.eig_tol), opts)
    }

    fn slope_f_tilde_with(&self, x: &[f64], set: &MinimizerSet, opts: &SlopeOptions) -> Result<SlopeEstimate> {
        if opts.sphere_samples == 0 {
            return Err(Error::Precondition("sphere_samples must be at least 1".into()));
        }
        let m = set.multiplicity;
        if m == 1 {
            let y = set.basis.column(0);
            let value = norm(&self.grad_x_g(x, &y)?);
            return Ok(SlopeEstimate {
                value,
                exact: true,
                samples_used: 0,
                witness_y: y,
                multiplicity: 1,
            });
        }

        let objective = |u: &[f64]| -> Result<f64> { Ok(norm(&self.grad_x_g(x, &set.embed(u))?)) };
        let mut rng = sampling::stream_rng(opts.seed, SLOPE_STREAM, 0);
        let mut best_u = Vec::new();
        let mut best = f64::INFINITY;
        for _ in 0..opts.sphere_samples {
            let u = unit_sphere(&mut rng, m);
            let v = objective(&u)?;
            if v < best {
                best = v;
                best_u = u;
            }
        }
        if m == 2 {
            let theta0 = best_u[1].atan2(best_u[0]);
            let half = (4.0 * PI / opts.sphere_samples as f64).min(PI / 2.0);
            let at = |t: f64| [t.cos(), t.sin()];
            let (t, v) = golden_section(|t| objective(&at(t)), theta0 - half, theta0 + half)?;
            if v < best {
                best = v;
                best_u = at(t).to_vec();
            }
        }
        Ok(SlopeEstimate {
            value: best,
            exact: false,
            samples_used: opts.sphere_samples,
            witness_y: set.embed(&best_u),
            multiplicity: m,
        })
    }

    /// Slope estimate for `f`: `0` on the zero set, otherwise the `f̃` slope
    /// divided by `2 f(x)`.
    pub fn slope_f(&self, x: &[f64], opts: &SlopeOptions) -> Result<SlopeEstimate> {
        self.check(x, None)?;
        let spectrum = self.spectrum(x)?;
        self.slope_f_with(x, &spectrum, opts)
    }

    pub(crate) fn slope_f_with(&self, x: &[f64], spectrum: &PointSpectrum, opts: &SlopeOptions) -> Result<SlopeEstimate> {
        let set = spectrum.minimizer_set(opts.eig_tol);
        if spectrum.f <= opts.zero_tol {
            return Ok(SlopeEstimate {
                value: 0.0,
                exact: true,
                samples_used: 0,
                witness_y: set.basis.column(0),
                multiplicity: set.multiplicity,
            });
        }
        let mut est = self.slope_f_tilde_with(x, &set, opts)?;
        est.value /= 2.0 * spectrum.f;
        Ok(est)
    }

    /// `∇f(x) = ∇ₓg(x, y)/(2 f(x))` when `λ_min` is simple and `f(x)` is
    /// above the zero threshold; `None` where `f` is not known to be smooth.
    pub fn smooth_gradient(&self, x: &[f64], opts: &SlopeOptions) -> Result<Option<Vec<f64>>> {
        self.check(x, None)?;
        let spectrum = self.spectrum(x)?;
        let set = spectrum.minimizer_set(opts.eig_tol);
        if set.multiplicity != 1 || spectrum.f <= opts.zero_tol {
            return Ok(None);
        }
        let y = set.basis.column(0);
        let scale = 1.0 / (2.0 * spectrum.f);
        Ok(Some(self.grad_x_g(x, &y)?.into_iter().map(|g| g * scale).collect()))
    }

    /// A subgradient representative of `f` at `x`: the smooth gradient when
    /// available, otherwise `∇ₓg(x, z)/(2f)` for a random unit `z` in `E(x)`.
    /// `None` on the zero set.
    pub(crate) fn subgradient<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        spectrum: &PointSpectrum,
        eig_tol: f64,
        zero_tol: f64,
        rng: &mut R,
    ) -> Result<Option<Vec<f64>>> {
        if spectrum.f <= zero_tol {
            return Ok(None);
        }
        let set = spectrum.minimizer_set(eig_tol);
        let y = if set.multiplicity == 1 {
            set.basis.column(0)
        } else {
            set.embed(&unit_sphere(rng, set.multiplicity))
        };
        let scale = 1.0 / (2.0 * spectrum.f);
        Ok(Some(self.grad_x_g(x, &y)?.into_iter().map(|g| g * scale).collect()))
    }
}

fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b)?;
        }
    }
    Ok(if fa < fb { (a, fa) } else { (b, fb) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_by_one(entry: &str) -> PolyMatrix {
        PolyMatrix::from_strings(&["x"], &[&[entry]]).unwrap()
    }

    fn diag() -> PolyMatrix {
        PolyMatrix::from_strings(&["x1", "x2"], &[&["x1", "0"], &["0", "x2"]]).unwrap()
    }

    #[test]
    fn singular_value_examples() {
        assert_eq!(smallest_singular_value(&one_by_one("x"), &[-3.0]).unwrap(), 3.0);
        assert_eq!(smallest_singular_value(&diag(), &[2.0, -1.0]).unwrap(), 1.0);
        let r = PolyMatrix::from_strings(&["x"], &[&["x", "1"]]).unwrap();
        assert_eq!(smallest_singular_value(&r, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn g_examples() {
        let f = one_by_one("x");
        let s0 = AuxiliarySetup::at_zero(&f);
        assert_eq!(s0.g_value(&[3.0], &[1.0]).unwrap(), 9.0);
        let s2 = AuxiliarySetup::with_base_value(&f, 2.0).unwrap();
        assert_eq!(s2.g_value(&[3.0], &[1.0]).unwrap(), 5.0);
        let d = diag();
        let sd = AuxiliarySetup::at_zero(&d);
        assert_eq!(sd.g_value(&[2.0, -1.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(sd.g_value(&[2.0], &[0.0, 1.0]).is_err());
        assert!(sd.g_value(&[2.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn f_tilde_examples() {
        let f = one_by_one("x");
        assert_eq!(AuxiliarySetup::at_zero(&f).f_tilde(&[3.0]).unwrap(), 9.0);
        let based = AuxiliarySetup::new(&f, &[1.0]).unwrap();
        assert_eq!(based.base_value(), 1.0);
        assert_eq!(based.f_tilde(&[1.0]).unwrap(), 0.0);
        let d = diag();
        assert_eq!(AuxiliarySetup::at_zero(&d).f_tilde(&[2.0, -1.0]).unwrap(), 1.0);
    }

    #[test]
    fn gradient_examples() {
        let f = one_by_one("x");
        let s = AuxiliarySetup::at_zero(&f);
        assert_eq!(s.grad_x_g(&[3.0], &[1.0]).unwrap(), vec![6.0]);
        assert_eq!(s.grad_x_g(&[3.0], &[-1.0]).unwrap(), vec![6.0]);
        assert_eq!(s.grad_y_g(&[3.0], &[1.0]).unwrap(), vec![18.0]);
        assert_eq!(s.grad_y_g(&[3.0], &[0.0]).unwrap(), vec![0.0]);

        let d = diag();
        let sd = AuxiliarySetup::at_zero(&d);
        assert_eq!(sd.grad_x_g(&[2.0, -1.0], &[0.0, 1.0]).unwrap(), vec![0.0, -2.0]);
        assert_eq!(sd.grad_y_g(&[2.0, -1.0], &[1.0, 0.0]).unwrap(), vec![8.0, 0.0]);
        assert_eq!(sd.grad_y_g(&[2.0, -1.0], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn minimizer_set_examples() {
        let d = diag();
        let sd = AuxiliarySetup::at_zero(&d);
        let e = sd.minimizer_set(&[2.0, -1.0], 1e-8).unwrap();
        assert_eq!(e.multiplicity, 1);
        assert_eq!(e.basis[(0, 0)], 0.0);
        assert_eq!(e.basis[(1, 0)].abs(), 1.0);
        assert_eq!(sd.minimizer_set(&[1.0, 1.0], 1e-8).unwrap().multiplicity, 2);
        let f = one_by_one("x");
        let e = AuxiliarySetup::at_zero(&f).minimizer_set(&[0.7], 1e-8).unwrap();
        assert_eq!(e.multiplicity, 1);
        assert_eq!(e.basis[(0, 0)].abs(), 1.0);
        assert!(sd.minimizer_set(&[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn slope_f_tilde_examples() {
        let opts = SlopeOptions::default();
        let f = one_by_one("x");
        let s = AuxiliarySetup::at_zero(&f).slope_f_tilde(&[3.0], &opts).unwrap();
        assert_eq!(s.value, 6.0);
        assert!(s.exact);

        let d = diag();
        let sd = AuxiliarySetup::at_zero(&d);
        let s = sd.slope_f_tilde(&[2.0, -1.0], &opts).unwrap();
        assert_eq!(s.value, 2.0);
        assert!(s.exact);
    }

    #[test]
    fn slope_f_tilde_degenerate_against_angle_grid() {
        let d = diag();
        let sd = AuxiliarySetup::at_zero(&d);
        let x = [1.0, 1.0];
        // Oracle: brute force over a fine grid of angles.
        let grid_min = (0..200_000)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 200_000.0;
                norm(&sd.grad_x_g(&x, &[t.cos(), t.sin()]).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        let est = sd
            .slope_f_tilde(&x, &SlopeOptions { sphere_samples: 500, ..Default::default() })
            .unwrap();
        assert!(!est.exact);
        assert_eq!(est.multiplicity, 2);
        assert!(est.value <= 2.0 + 1e-9);
        assert!((est.value - grid_min).abs() < 1e-6, "{} vs {grid_min}", est.value);
        assert!((norm(&est.witness_y) - 1.0).abs() < 1e-12);
        // ‖∇ₓg‖ = 2·sqrt(cos⁴θ + sin⁴θ) is minimized on the diagonals.
        assert!((est.value - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn slope_f_examples() {
        let opts = SlopeOptions::default();
        let f = one_by_one("x");
        let s = AuxiliarySetup::at_zero(&f);
        assert_eq!(s.slope_f(&[3.0], &opts).unwrap().value, 1.0);
        assert_eq!(s.slope_f(&[0.0], &opts).unwrap().value, 0.0);
        let sq = one_by_one("x^2");
        let s2 = AuxiliarySetup::at_zero(&sq);
        for t in [-1.5, -0.2, 0.3, 2.0] {
            let v = s2.slope_f(&[t], &opts).unwrap().value;
            assert!((v - 2.0 * f64::abs(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_gradient_examples() {
        let opts = SlopeOptions::default();
        let f = one_by_one("x");
        assert_eq!(AuxiliarySetup::at_zero(&f).smooth_gradient(&[3.0], &opts).unwrap(), Some(vec![1.0]));
        let sq = one_by_one("x^2");
        assert_eq!(AuxiliarySetup::at_zero(&sq).smooth_gradient(&[2.0], &opts).unwrap(), Some(vec![4.0]));
        let d = diag();
        assert_eq!(AuxiliarySetup::at_zero(&d).smooth_gradient(&[1.0, 1.0], &opts).unwrap(), None);
        assert_eq!(AuxiliarySetup::at_zero(&f).smooth_gradient(&[0.0], &opts).unwrap(), None);
    }

    #[test]
    fn base_value_validation() {
        let f = one_by_one("x");
        assert!(AuxiliarySetup::with_base_value(&f, -1.0).is_err());
        assert!(AuxiliarySetup::with_base_value(&f, f64::NAN).is_err());
        assert!(AuxiliarySetup::at_zero(&f)
            .slope_f_tilde(&[1.0], &SlopeOptions { sphere_samples: 0, ..Default::default() })
            .is_err());
    }
}
