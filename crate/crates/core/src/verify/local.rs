use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exponents::{error_bound_exponent, gradient_exponent, gradient_exponent_at_zero};
use crate::polymatrix::PolyMatrix;
use crate::sampling::{derive_seed, in_ball, on_sphere, stream_rng};
use crate::subdiff::{smallest_singular_value, AuxiliarySetup};

use super::distance::ZeroSet;
use super::plan::SamplePlan;
use super::pool::map_indexed;
use super::report::{Assembly, Form, Inequality, SampleRecord, VerificationReport};

pub(crate) const POINT_STREAM: u64 = 0x9017;
pub(crate) const SLOPE_SEED_STREAM: u64 = 0x5107e;
pub(crate) const DIST_SEED_STREAM: u64 = 0xd15;
/// Both sides of an inequality at or below this value count as vanishing.
pub const VANISHING: f64 = 1e-14;
/// Distances at or below this value are treated as zero (point on the set).
pub const ZERO_DISTANCE: f64 = 1e-12;

fn dims(matrix: &PolyMatrix) -> Result<(u64, u64, u64)> {
    let d = matrix.require_positive_degree()?;
    Ok((matrix.nvars() as u64, matrix.rows() as u64, d as u64))
}

fn multiplicity_note(records: &[SampleRecord]) -> Option<String> {
    let k = records.iter().filter(|r| r.multiplicity.is_some_and(|m| m > 1) && !r.excluded).count();
    (k > 0).then(|| format!("multiplicity>1 at {k} points: slope approximate"))
}

/// Slope samples on spheres around `base`, one record per sample.
fn gradient_records(matrix: &PolyMatrix, base: &[f64], plan: &SamplePlan, alpha: f64) -> Result<Vec<SampleRecord>> {
    let setup = AuxiliarySetup::new(matrix, base)?;
    let f_base = setup.base_value();
    let per = plan.samples_per_radius;
    map_indexed(plan.workers, plan.radii.len() * per, |idx| {
        let radius = plan.radii[idx / per];
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = on_sphere(&mut rng, base, radius);
        let spectrum = setup.spectrum(&x)?;
        let opts = plan.slope_options(derive_seed(plan.seed, SLOPE_SEED_STREAM, idx as u64));
        let est = setup.slope_f_with(&x, &spectrum, &opts)?;
        let gap = (spectrum.f - f_base).abs();
        let lhs = est.value;
        let rhs = crate::exponents::pow_nonneg(gap, alpha)?;
        // On the fiber through the base point both sides vanish and the
        // inequality carries no information.
        let on_fiber = f_base <= plan.zero_tol && spectrum.f <= plan.zero_tol;
        let excluded = (lhs <= VANISHING && rhs <= VANISHING) || on_fiber;
        Ok(SampleRecord {
            radius,
            point: x,
            f: spectrum.f,
            slope: Some(lhs),
            lhs,
            rhs,
            ratio: if excluded { f64::NAN } else { ratio(lhs, rhs) },
            excluded,
            auto_pass: false,
            multiplicity: Some(est.multiplicity),
        })
    })
}

pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            f64::NAN
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Checks `𝔪_f(x) ≥ c·|f(x) − f(base)|^α` on spheres of the plan's radii
/// around `base`, with `α = 1 − 1/R(n+p, 2d+2)`, or `1 − 2/R(n+p, 2d+2)`
/// when `use_at_zero` is set (which requires `f(base) = 0`).
pub fn verify_gradient_inequality(
    matrix: &PolyMatrix,
    base: &[f64],
    plan: &SamplePlan,
    use_at_zero: bool,
) -> Result<VerificationReport> {
    plan.validate()?;
    check_dim(matrix.nvars(), base.len())?;
    let (n, p, d) = dims(matrix)?;
    let f_base = smallest_singular_value(matrix, base)?;
    let (exponent, inequality) = if use_at_zero {
        if f_base > plan.zero_tol {
            return Err(Error::Precondition(format!(
                "the at-zero exponent needs f(base) = 0, but f(base) = {f_base:e}"
            )));
        }
        (gradient_exponent_at_zero(n, p, d)?, Inequality::GradientAtZero)
    } else {
        (gradient_exponent(n, p, d)?, Inequality::Gradient)
    };
    let records = gradient_records(matrix, base, plan, exponent.as_f64())?;
    let mut notes = Vec::new();
    if matrix.is_transposed() {
        notes.push("matrix was transposed to have at most as many rows as columns".into());
    }
    notes.extend(multiplicity_note(&records));
    let fitted = fit_records(&records, f_base).ok().map(|f| f.alpha);
    let mut report = Assembly {
        inequality,
        form: Form::LhsDominates,
        exponent,
        records,
        notes,
        check_stability: true,
    }
    .finish();
    report.fitted_exponent = fitted;
    Ok(report)
}

/// Least-squares fit of `ln 𝔪_f` against `ln |f − f(base)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub alpha: f64,
    pub r_squared: f64,
    /// `(ln |f − f(base)|, ln slope)` per radius.
    pub points: Vec<(f64, f64)>,
}

/// Fits the empirical Łojasiewicz exponent from the minimal-slope sample on
/// each sphere around `base`.
pub fn fit_empirical_exponent(matrix: &PolyMatrix, base: &[f64], plan: &SamplePlan) -> Result<ExponentFit> {
    plan.validate()?;
    check_dim(matrix.nvars(), base.len())?;
    let f_base = smallest_singular_value(matrix, base)?;
    // The exponent only feeds the rhs column, which the fit ignores.
    let records = gradient_records(matrix, base, plan, 1.0)?;
    fit_records(&records, f_base)
}

fn fit_records(records: &[SampleRecord], f_base: f64) -> Result<ExponentFit> {
    let mut points: Vec<(f64, f64, f64)> = Vec::new(); // (radius, ln gap, ln slope)
    let mut radius = f64::NAN;
    let mut best: Option<(f64, f64)> = None;
    let flush = |radius: f64, best: Option<(f64, f64)>, points: &mut Vec<(f64, f64, f64)>| {
        if let Some((gap, slope)) = best {
            points.push((radius, gap.ln(), slope.ln()));
        }
    };
    for r in records {
        if r.radius != radius {
            flush(radius, best.take(), &mut points);
            radius = r.radius;
        }
        let slope = r.slope.unwrap_or(0.0);
        let gap = (r.f - f_base).abs();
        if r.excluded || !(slope > 0.0) || !(gap > 0.0) {
            continue;
        }
        if best.is_none_or(|(_, s)| slope < s) {
            best = Some((gap, slope));
        }
    }
    flush(radius, best, &mut points);

    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 radii with usable samples, found {}",
            points.len()
        )));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.1).sum::<f64>() / k;
    let my = points.iter().map(|p| p.2).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.2 - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.2 - intercept - alpha * p.1).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ExponentFit {
        alpha,
        r_squared,
        points: points.into_iter().map(|p| (p.1, p.2)).collect(),
    })
}

/// Finds a zero of `zero_set` starting from `from`.
pub(crate) fn anchor_zero(zero_set: &ZeroSet<'_>, from: &[f64], plan: &SamplePlan, stream: u64) -> Result<Vec<f64>> {
    Ok(zero_set
        .distance(from, &plan.distance, derive_seed(plan.seed, stream, u64::MAX), &[])?
        .witness)
}

/// Checks `c·dist(x, S_F) ≤ f(x)^{2/R(n+p, 2d+2)}` for `x` uniform in the
/// ball `B(center, radius)`.
pub fn verify_error_bound(matrix: &PolyMatrix, center: &[f64], radius: f64, plan: &SamplePlan) -> Result<VerificationReport> {
    plan.validate_counts()?;
    check_dim(matrix.nvars(), center.len())?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Precondition(format!("region radius must be positive, got {radius}")));
    }
    let (n, p, d) = dims(matrix)?;
    let exponent = error_bound_exponent(n, p, d)?;
    let eps = exponent.as_f64();
    let zero_set = ZeroSet::new(&[matrix])?.with_eig_tol(plan.eig_tol);
    let anchor = anchor_zero(&zero_set, center, plan, DIST_SEED_STREAM)?;
    let hints = vec![anchor];
    let records = map_indexed(plan.workers, plan.samples_per_radius, |idx| {
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = in_ball(&mut rng, center, radius);
        let f = smallest_singular_value(matrix, &x)?;
        let dist = zero_set.distance(&x, &plan.distance, derive_seed(plan.seed, DIST_SEED_STREAM, idx as u64), &hints)?;
        distance_record(radius, x, f, dist.value, crate::exponents::pow_nonneg(f, eps)?)
    })?;
    Ok(Assembly {
        inequality: Inequality::ErrorBound,
        form: Form::RhsDominates,
        exponent,
        records,
        notes: Vec::new(),
        check_stability: false,
    }
    .finish())
}

/// Record for the distance-type forms `c·lhs ≤ rhs` with `lhs` a distance.
pub(crate) fn distance_record(radius: f64, x: Vec<f64>, f: f64, lhs: f64, rhs: f64) -> Result<SampleRecord> {
    let excluded = lhs <= ZERO_DISTANCE;
    Ok(SampleRecord {
        radius,
        point: x,
        f,
        slope: None,
        lhs,
        rhs,
        ratio: if excluded { f64::NAN } else { ratio(rhs, lhs) },
        excluded,
        auto_pass: false,
        multiplicity: None,
    })
}
