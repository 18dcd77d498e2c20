use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::exponents::{factorization_exponent, separation_exponent};
use crate::polymatrix::PolyMatrix;
use crate::sampling::{derive_seed, in_ball, in_box, stream_rng};
use crate::subdiff::smallest_singular_value;

use super::distance::ZeroSet;
use super::local::{anchor_zero, distance_record, ratio, DIST_SEED_STREAM, POINT_STREAM};
use super::plan::SamplePlan;
use super::pool::map_indexed;
use super::report::{Assembly, Form, Inequality, SampleRecord, VerificationReport};

const INTERSECTION_STREAM: u64 = 0x1a7e;
const K_STREAM: u64 = 0x4b;
const FACE_STREAM: u64 = 0xfa4e;
/// `g` above this at a common zero of `f` and `h` violates the inclusion
/// hypothesis of the factorization check.
pub const INCLUSION_TOL: f64 = 1e-4;
/// Samples with `f` at or below this value are left out of the
/// factorization ratio.
pub const F_FLOOR: f64 = 1e-12;

fn same_space(a: &PolyMatrix, b: &PolyMatrix) -> Result<()> {
    if a.vars() != b.vars() {
        return Err(Error::Precondition(format!(
            "matrices use different variables: [{}] vs [{}]",
            a.vars().join(", "),
            b.vars().join(", ")
        )));
    }
    Ok(())
}

fn check_region(center: &[f64], radius: f64, n: usize) -> Result<()> {
    check_dim(n, center.len())?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Precondition(format!("region radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Common zero of `f` and `g` found from `from`, or `IntersectionNotFound`.
pub(crate) fn intersection_anchor(both: &ZeroSet<'_>, from: &[f64], plan: &SamplePlan) -> Result<Vec<f64>> {
    anchor_zero(both, from, plan, INTERSECTION_STREAM).map_err(|e| match e {
        Error::NoZeroFound { .. } => Error::IntersectionNotFound,
        other => other,
    })
}

/// The three distances at one point: to `S_F`, to `S_G`, to `S_F ∩ S_G`.
pub(crate) struct SeparationGeometry<'a> {
    pub zf: ZeroSet<'a>,
    pub zg: ZeroSet<'a>,
    pub both: ZeroSet<'a>,
    pub hints: Vec<Vec<f64>>,
}

impl<'a> SeparationGeometry<'a> {
    pub fn new(f: &'a PolyMatrix, g: &'a PolyMatrix, anchor_from: &[f64], plan: &SamplePlan) -> Result<Self> {
        same_space(f, g)?;
        let zf = ZeroSet::new(&[f])?.with_eig_tol(plan.eig_tol);
        let zg = ZeroSet::new(&[g])?.with_eig_tol(plan.eig_tol);
        let both = ZeroSet::new(&[f, g])?.with_eig_tol(plan.eig_tol);
        let anchor = intersection_anchor(&both, anchor_from, plan)?;
        Ok(SeparationGeometry {
            zf,
            zg,
            both,
            hints: vec![anchor],
        })
    }

    /// `(dist(x, S_F), dist(x, S_G), dist(x, S_F ∩ S_G))`.
    pub fn distances(&self, x: &[f64], plan: &SamplePlan, idx: u64) -> Result<(f64, f64, f64)> {
        let seed = |k: u64| derive_seed(plan.seed, DIST_SEED_STREAM, idx.wrapping_mul(3).wrapping_add(k));
        let df = self.zf.distance(x, &plan.distance, seed(0), &self.hints)?.value;
        let dg = self.zg.distance(x, &plan.distance, seed(1), &self.hints)?.value;
        let di = self.both.distance(x, &plan.distance, seed(2), &self.hints)?.value;
        Ok((df, dg, di))
    }
}

/// Checks `c·dist(x, S_F ∩ S_G) ≤ (dist(x, S_F) + dist(x, S_G))^ε` with
/// `ε = 2/R(n+p₁+p₂, 2d+2)` for `x` uniform in `B(center, radius)`.
pub fn verify_separation(
    f: &PolyMatrix,
    g: &PolyMatrix,
    center: &[f64],
    radius: f64,
    plan: &SamplePlan,
) -> Result<VerificationReport> {
    plan.validate_counts()?;
    check_region(center, radius, f.nvars())?;
    let d = f.require_positive_degree()?.max(g.require_positive_degree()?);
    let exponent = separation_exponent(f.nvars() as u64, f.rows() as u64, g.rows() as u64, d as u64)?;
    let eps = exponent.as_f64();
    let geometry = SeparationGeometry::new(f, g, center, plan)?;
    let records = map_indexed(plan.workers, plan.samples_per_radius, |idx| {
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = in_ball(&mut rng, center, radius);
        let (df, dg, di) = geometry.distances(&x, plan, idx as u64)?;
        let fx = smallest_singular_value(f, &x)?;
        distance_record(radius, x, fx, di, crate::exponents::pow_nonneg(df + dg, eps)?)
    })?;
    Ok(Assembly {
        inequality: Inequality::Separation,
        form: Form::RhsDominates,
        exponent,
        records,
        notes: Vec::new(),
        check_stability: false,
    }
    .finish())
}

/// Checks `g(x) ≤ c·f(x)^ε` on `K = {h = 0}`, `ε = 2/R(n+p₁+p₃, 2d+2)`.
///
/// `K` is sampled by projecting uniform points of the box
/// `center ± half_width` onto `{h = 0}`; a point of `K` on or outside the
/// box boundary is taken as evidence that `K` is not inside the box. Common
/// zeros of `f` and `h` reached from the `K` samples must be zeros of `g`.
pub fn verify_factorization(
    f: &PolyMatrix,
    g: &PolyMatrix,
    h: &PolyMatrix,
    center: &[f64],
    half_width: f64,
    plan: &SamplePlan,
) -> Result<VerificationReport> {
    plan.validate_counts()?;
    same_space(f, g)?;
    same_space(f, h)?;
    check_region(center, half_width, f.nvars())?;
    let d = f
        .require_positive_degree()?
        .max(g.require_positive_degree()?)
        .max(h.require_positive_degree()?);
    let exponent = factorization_exponent(f.nvars() as u64, f.rows() as u64, h.rows() as u64, d as u64)?;
    let eps = exponent.as_f64();
    let zh = ZeroSet::new(&[h])?.with_eig_tol(plan.eig_tol);
    let zfh = ZeroSet::new(&[f, h])?.with_eig_tol(plan.eig_tol);
    let tol = plan.distance.tol;

    let on_k: Vec<Option<(Vec<f64>, Option<Vec<f64>>)>> = map_indexed(plan.workers, plan.samples_per_radius, |idx| {
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let start = in_box(&mut rng, center, half_width);
        let mut rng = stream_rng(plan.seed, K_STREAM, idx as u64);
        let (z, r) = zh.project(&start, plan.distance.max_iterations, &mut rng)?;
        if r > tol {
            return Ok(None);
        }
        let (w, rw) = zfh.project(&z, plan.distance.max_iterations, &mut rng)?;
        Ok(Some((z, (rw <= tol).then_some(w))))
    })?;

    let k_points: Vec<&(Vec<f64>, Option<Vec<f64>>)> = on_k.iter().flatten().collect();
    if k_points.is_empty() {
        return Err(Error::KSampling(format!(
            "none of {} box samples projected onto {{h = 0}}",
            plan.samples_per_radius
        )));
    }
    // Probes started on the box faces reach the boundary when K leaves the box.
    let n = center.len();
    let edge = half_width * (1.0 - 1e-6);
    let outside = |z: &[f64]| z.iter().zip(center).any(|(a, c)| (a - c).abs() >= edge);
    let face_probes = 2 * n + plan.samples_per_radius.div_ceil(4);
    let boundary_hits: Vec<Option<Vec<f64>>> = map_indexed(plan.workers, face_probes, |idx| {
        let mut rng = stream_rng(plan.seed, FACE_STREAM, idx as u64);
        let (axis, sign, mut start) = if idx < 2 * n {
            (idx / 2, if idx % 2 == 0 { 1.0 } else { -1.0 }, center.to_vec())
        } else {
            let axis = rng.random_range(0..n);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (axis, sign, in_box(&mut rng, center, half_width))
        };
        start[axis] = center[axis] + sign * half_width;
        let (z, r) = zh.project(&start, plan.distance.max_iterations, &mut rng)?;
        Ok((r <= tol && outside(&z)).then_some(z))
    })?;
    let hit = k_points
        .iter()
        .map(|(z, _)| z)
        .find(|z| outside(z))
        .or(boundary_hits.iter().flatten().next());
    if let Some(z) = hit {
        return Err(Error::KSampling(format!(
            "found a point of {{h = 0}} at or beyond the sampling box boundary: {z:?}; K may be unbounded or the box too small"
        )));
    }

    let mut violations: Vec<Vec<f64>> = Vec::new();
    for w in k_points.iter().filter_map(|(_, w)| w.as_ref()) {
        if smallest_singular_value(g, w)? > INCLUSION_TOL {
            let rounded: Vec<f64> = w.iter().map(|v| round_coord(*v)).collect();
            if !violations.contains(&rounded) {
                violations.push(rounded);
            }
        }
    }
    if !violations.is_empty() {
        violations.sort_by(|a, b| {
            b.iter()
                .zip(a)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        return Err(Error::InclusionViolated { witnesses: violations });
    }

    let records = k_points
        .iter()
        .map(|(z, _)| -> Result<SampleRecord> {
            let fx = smallest_singular_value(f, z)?;
            let gx = smallest_singular_value(g, z)?;
            let rhs = crate::exponents::pow_nonneg(fx, eps)?;
            let excluded = fx <= F_FLOOR;
            Ok(SampleRecord {
                radius: half_width,
                point: z.clone(),
                f: fx,
                slope: None,
                lhs: gx,
                rhs,
                ratio: if excluded { f64::NAN } else { ratio(gx, rhs) },
                excluded,
                auto_pass: false,
                multiplicity: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = vec![format!(
        "{} of {} box samples reached K",
        records.len(),
        plan.samples_per_radius
    )];
    notes.push("compactness of K is assumed; only the box boundary is checked".into());
    Ok(Assembly {
        inequality: Inequality::Factorization,
        form: Form::LhsBounded,
        exponent,
        records,
        notes,
        check_stability: false,
    }
    .finish())
}

/// Rounds to 1e-6 so that witnesses found from different starts coincide.
fn round_coord(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
