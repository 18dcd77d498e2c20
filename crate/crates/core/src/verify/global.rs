use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{error_bound_exponent, global_loja_exponent, global_separation_exponent, pow_nonneg};
use crate::numlin::{dot, norm};
use crate::polymatrix::PolyMatrix;
use crate::sampling::{derive_seed, in_ball, on_sphere, stream_rng};
use crate::subdiff::{smallest_singular_value, AuxiliarySetup};

use super::distance::ZeroSet;
use super::local::{anchor_zero, distance_record, ratio, DIST_SEED_STREAM, POINT_STREAM, SLOPE_SEED_STREAM};
use super::plan::{validate_schedule, SamplePlan};
use super::pool::map_indexed;
use super::region::SeparationGeometry;
use super::report::{Assembly, Form, Inequality, SampleRecord, VerificationReport};

const PROBE_STREAM: u64 = 0x9b0e;
/// Sphere-restricted descents started per sphere in the goodness check.
pub const GOODNESS_PROBES: usize = 8;
/// Per-sphere minima at or below this are treated as zero slope.
pub const GOODNESS_FLOOR: f64 = 1e-8;

fn origin(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

/// Record for the huge-exponent forms `c·lhs ≤ rhs`, where `lhs` may
/// underflow to zero.
fn underflow_record(radius: f64, x: Vec<f64>, f: f64, lhs: f64, rhs: f64) -> SampleRecord {
    let excluded = lhs == 0.0 && rhs == 0.0;
    let auto_pass = lhs == 0.0 && !excluded;
    SampleRecord {
        radius,
        point: x,
        f,
        slope: None,
        lhs,
        rhs,
        ratio: if excluded { f64::NAN } else { ratio(rhs, lhs) },
        excluded,
        auto_pass,
        multiplicity: None,
    }
}

fn sphere_count(schedule: &[f64], plan: &SamplePlan) -> usize {
    schedule.len() * plan.samples_per_radius
}

/// Checks `c·(dist(x, S_F)/(1 + ‖x‖²))^{R(n+p+2, 4d+2)/4} ≤ f(x)` on spheres
/// around the origin with radii from `schedule`.
pub fn verify_global(matrix: &PolyMatrix, schedule: &[f64], plan: &SamplePlan) -> Result<VerificationReport> {
    plan.validate_counts()?;
    validate_schedule(schedule)?;
    let d = matrix.require_positive_degree()?;
    let exponent = global_loja_exponent(matrix.nvars() as u64, matrix.rows() as u64, d as u64)?;
    let e = exponent.as_f64();
    let zero_set = ZeroSet::new(&[matrix])?.with_eig_tol(plan.eig_tol);
    let hints = vec![anchor_zero(&zero_set, &origin(matrix.nvars()), plan, DIST_SEED_STREAM)?];
    let per = plan.samples_per_radius;
    let records = map_indexed(plan.workers, sphere_count(schedule, plan), |idx| {
        let radius = schedule[idx / per];
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = on_sphere(&mut rng, &origin(matrix.nvars()), radius);
        let f = smallest_singular_value(matrix, &x)?;
        let dist = zero_set.distance(&x, &plan.distance, derive_seed(plan.seed, DIST_SEED_STREAM, idx as u64), &hints)?;
        let lhs = pow_nonneg(dist.value / (1.0 + dot(&x, &x)), e)?;
        Ok(underflow_record(radius, x, f, lhs, f))
    })?;
    Ok(Assembly {
        inequality: Inequality::Global,
        form: Form::RhsDominates,
        exponent,
        records,
        notes: Vec::new(),
        check_stability: false,
    }
    .finish())
}

/// Reads the records of a [`verify_global`] report as a check of
/// `f(x) ≥ c·‖x‖^{−e}` for `‖x‖ ≥ r_big`, with the same exponent `e`.
pub fn compact_tail_view(report: &VerificationReport, r_big: f64) -> Result<VerificationReport> {
    if report.inequality != Inequality::Global {
        return Err(Error::Precondition("the compact-tail view needs a global report".into()));
    }
    if !(r_big.is_finite() && r_big > 0.0) {
        return Err(Error::Precondition(format!("r_big must be positive, got {r_big}")));
    }
    let e = report.exponent.as_f64();
    let records: Vec<SampleRecord> = report
        .records
        .iter()
        .filter(|r| norm(&r.point) >= r_big)
        .map(|r| {
            let lhs = (-e * norm(&r.point).ln()).exp();
            underflow_record(r.radius, r.point.clone(), r.f, lhs, r.f)
        })
        .collect();
    let mut notes = vec![format!("{} samples with norm at least {r_big}", records.len())];
    if records.is_empty() {
        notes.push("no samples beyond r_big; extend the schedule".into());
    }
    Ok(Assembly {
        inequality: Inequality::CompactTail,
        form: Form::RhsDominates,
        exponent: report.exponent.clone(),
        records,
        notes,
        check_stability: false,
    }
    .finish())
}

/// Checks `c·(dist(x, S_F ∩ S_G)/(1 + ‖x‖²))^{R(n+p₁+p₂, 2d+2)/2} ≤
/// dist(x, S_F) + dist(x, S_G)` on spheres around the origin.
pub fn verify_global_separation(
    f: &PolyMatrix,
    g: &PolyMatrix,
    schedule: &[f64],
    plan: &SamplePlan,
) -> Result<VerificationReport> {
    plan.validate_counts()?;
    validate_schedule(schedule)?;
    let d = f.require_positive_degree()?.max(g.require_positive_degree()?);
    let exponent = global_separation_exponent(f.nvars() as u64, f.rows() as u64, g.rows() as u64, d as u64)?;
    let e = exponent.as_f64();
    let geometry = SeparationGeometry::new(f, g, &origin(f.nvars()), plan)?;
    let per = plan.samples_per_radius;
    let records = map_indexed(plan.workers, sphere_count(schedule, plan), |idx| {
        let radius = schedule[idx / per];
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = on_sphere(&mut rng, &origin(f.nvars()), radius);
        let (df, dg, di) = geometry.distances(&x, plan, idx as u64)?;
        let fx = smallest_singular_value(f, &x)?;
        let lhs = pow_nonneg(di / (1.0 + dot(&x, &x)), e)?;
        Ok(underflow_record(radius, x, fx, lhs, df + dg))
    })?;
    Ok(Assembly {
        inequality: Inequality::GlobalSeparation,
        form: Form::RhsDominates,
        exponent,
        records,
        notes: Vec::new(),
        check_stability: false,
    }
    .finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereMinimum {
    pub radius: f64,
    pub min_slope: f64,
    pub argmin: Vec<f64>,
    /// A sphere-restricted descent reached a zero of `f` on this sphere.
    pub zero_found: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    /// Empirical verdict; never a certificate.
    pub good: bool,
    pub certified: bool,
    pub c_hat: Option<f64>,
    pub r_hat: Option<f64>,
    pub per_sphere: Vec<SphereMinimum>,
    pub notes: Vec<String>,
}

impl GoodnessReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "good at infinity   {} (empirical, not certified)\n",
            if self.good { "yes" } else { "no" }
        );
        if let (Some(c), Some(r)) = (self.c_hat, self.r_hat) {
            out.push_str(&format!("c_hat              {c:.6e}\nR_hat              {r:.6e}\n"));
        }
        for s in &self.per_sphere {
            out.push_str(&format!(
                "  radius {:>12.4e}  min slope {:.6e}{}\n",
                s.radius,
                s.min_slope,
                if s.zero_found { "  (zero of f on sphere)" } else { "" }
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Newton steps for `f = 0` restricted to the sphere `‖z‖ = radius`.
fn sphere_descent(setup: &AuxiliarySetup<'_>, start: &[f64], radius: f64, plan: &SamplePlan, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream_rng(seed, PROBE_STREAM, 0);
    let rescale = |z: Vec<f64>| -> Vec<f64> {
        let nz = norm(&z);
        z.into_iter().map(|v| v * radius / nz).collect()
    };
    let mut z = start.to_vec();
    let mut spectrum = setup.spectrum(&z)?;
    for _ in 0..plan.distance.max_iterations {
        if spectrum.f <= plan.distance.tol {
            break;
        }
        let Some(v) = setup.subgradient(&z, &spectrum, plan.eig_tol, 0.0, &mut rng)? else { break };
        let radial = dot(&v, &z) / dot(&z, &z);
        let vt: Vec<f64> = v.iter().zip(&z).map(|(a, b)| a - radial * b).collect();
        let vv = dot(&vt, &vt);
        if !(vv > 0.0) || !vv.is_finite() {
            break;
        }
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..40 {
            let cand: Vec<f64> = z.iter().zip(&vt).map(|(a, b)| a - t * spectrum.f * b / vv).collect();
            let cand = rescale(cand);
            let s = setup.spectrum(&cand)?;
            if s.f < spectrum.f {
                next = Some((cand, s));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, s)) = next else { break };
        z = cand;
        spectrum = s;
    }
    Ok(z)
}

/// Minimum sampled slope on spheres `‖x‖ = R_k`. The function is reported
/// good when the median of the last three minima exceeds `GOODNESS_FLOOR`
/// and the last minimum is at least half that median.
pub fn check_good_at_infinity(matrix: &PolyMatrix, schedule: &[f64], plan: &SamplePlan) -> Result<GoodnessReport> {
    plan.validate_counts()?;
    validate_schedule(schedule)?;
    let n = matrix.nvars();
    let setup = AuxiliarySetup::at_zero(matrix);
    let per = plan.samples_per_radius;
    let samples: Vec<(Vec<f64>, f64, f64)> = map_indexed(plan.workers, sphere_count(schedule, plan), |idx| {
        let radius = schedule[idx / per];
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = on_sphere(&mut rng, &origin(n), radius);
        let spectrum = setup.spectrum(&x)?;
        let opts = plan.slope_options(derive_seed(plan.seed, SLOPE_SEED_STREAM, idx as u64));
        let slope = setup.slope_f_with(&x, &spectrum, &opts)?.value;
        Ok((x, spectrum.f, slope))
    })?;

    let mut per_sphere = Vec::with_capacity(schedule.len());
    for (k, &radius) in schedule.iter().enumerate() {
        let chunk = &samples[k * per..(k + 1) * per];
        let mut best = chunk
            .iter()
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .map(|s| (s.0.clone(), s.2))
            .expect("samples_per_radius >= 1");
        let mut zero_found = false;
        if n >= 2 {
            let mut starts: Vec<&(Vec<f64>, f64, f64)> = chunk.iter().collect();
            starts.sort_by(|a, b| a.1.total_cmp(&b.1));
            let probes: Vec<(Vec<f64>, f64, bool)> = map_indexed(plan.workers, starts.len().min(GOODNESS_PROBES), |j| {
                let seed = derive_seed(plan.seed, PROBE_STREAM, (k * GOODNESS_PROBES + j) as u64);
                let z = sphere_descent(&setup, &starts[j].0, radius, plan, seed)?;
                let spectrum = setup.spectrum(&z)?;
                if spectrum.f <= plan.distance.tol {
                    return Ok((z, 0.0, true));
                }
                let slope = setup.slope_f_with(&z, &spectrum, &plan.slope_options(seed))?.value;
                Ok((z, slope, false))
            })?;
            for (z, slope, zero) in probes {
                zero_found |= zero;
                if slope < best.1 {
                    best = (z, slope);
                }
            }
        }
        per_sphere.push(SphereMinimum {
            radius,
            min_slope: best.1,
            argmin: best.0,
            zero_found,
        });
    }

    let minima: Vec<f64> = per_sphere.iter().map(|s| s.min_slope).collect();
    let tail = &minima[minima.len().saturating_sub(3)..];
    let mut sorted = tail.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let last = *minima.last().expect("nonempty schedule");
    let good = median > GOODNESS_FLOOR && last >= 0.5 * median;
    let mut notes = vec!["empirical check on sampled spheres; not a certificate".to_string()];
    if schedule.len() < 3 {
        notes.push("fewer than three spheres: the rule uses all of them".into());
    }
    let (c_hat, r_hat) = if good {
        let tau = 0.5 * median;
        let start = (0..minima.len())
            .find(|&k| minima[k..].iter().all(|&m| m >= tau))
            .expect("the last sphere satisfies the threshold");
        let c = minima[start..].iter().cloned().fold(f64::INFINITY, f64::min);
        (Some(c), Some(schedule[start]))
    } else {
        (None, None)
    };
    Ok(GoodnessReport {
        good,
        certified: false,
        c_hat,
        r_hat,
        per_sphere,
        notes,
    })
}

/// Checks `c·dist(x, S_F) ≤ f(x)^{2/R(n+p, 2d+2)} + f(x)` inside and outside
/// the ball of radius `3·R_hat + 2‖s‖`, where `R_hat` comes from the goodness
/// check and `s` is a zero of `f`. All zeros met must lie within `R_hat`.
pub fn verify_holder_global(matrix: &PolyMatrix, schedule: &[f64], plan: &SamplePlan) -> Result<VerificationReport> {
    plan.validate_counts()?;
    let d = matrix.require_positive_degree()?;
    let goodness = check_good_at_infinity(matrix, schedule, plan)?;
    let (Some(r_hat), true) = (goodness.r_hat, goodness.good) else {
        return Err(Error::Precondition(
            "the function is not empirically good at infinity".into(),
        ));
    };
    let n = matrix.nvars();
    let exponent = error_bound_exponent(n as u64, matrix.rows() as u64, d as u64)?;
    let eps = exponent.as_f64();
    let zero_set = ZeroSet::new(&[matrix])?.with_eig_tol(plan.eig_tol);
    let s = anchor_zero(&zero_set, &origin(n), plan, DIST_SEED_STREAM)?;
    let rho = 3.0 * r_hat + 2.0 * norm(&s);
    let shells = [rho, 2.0 * rho, 10.0 * rho, 100.0 * rho];
    let per = plan.samples_per_radius;
    let hints = vec![s.clone()];
    let rows: Vec<(SampleRecord, Vec<f64>)> = map_indexed(plan.workers, shells.len() * per, |idx| {
        let radius = shells[idx / per];
        let mut rng = stream_rng(plan.seed, POINT_STREAM, idx as u64);
        let x = if idx < per {
            in_ball(&mut rng, &origin(n), radius)
        } else {
            on_sphere(&mut rng, &origin(n), radius)
        };
        let f = smallest_singular_value(matrix, &x)?;
        let dist = zero_set.distance(&x, &plan.distance, derive_seed(plan.seed, DIST_SEED_STREAM, idx as u64), &hints)?;
        let rhs = pow_nonneg(f, eps)? + f;
        Ok((distance_record(radius, x, f, dist.value, rhs)?, dist.witness))
    })?;
    let slack = 1e-9 * (1.0 + r_hat);
    let far_zeros = rows
        .iter()
        .map(|(_, w)| w)
        .chain(std::iter::once(&s))
        .filter(|w| norm(w) > r_hat + slack)
        .count();
    let records = rows.into_iter().map(|(r, _)| r).collect();
    let mut notes = vec![
        format!("R_hat = {r_hat:e}, zero s with |s| = {:e}, split radius {rho:e}", norm(&s)),
        "goodness at infinity is empirical; the constant is not certified".to_string(),
    ];
    let mut report = Assembly {
        inequality: Inequality::Holder,
        form: Form::RhsDominates,
        exponent,
        records,
        notes: Vec::new(),
        check_stability: false,
    }
    .finish();
    if far_zeros > 0 {
        notes.push(format!("{far_zeros} zeros found outside the ball of radius R_hat"));
        report.verdict = super::report::Verdict::Fail;
    }
    notes.append(&mut report.notes);
    report.notes = notes;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{default_global_radii, Verdict};

    fn one(entry: &str) -> PolyMatrix {
        PolyMatrix::from_strings(&["x"], &[&[entry]]).unwrap()
    }

    fn quick() -> SamplePlan {
        SamplePlan::default().with_samples(10)
    }

    #[test]
    fn global_identity_auto_passes() {
        let r = verify_global(&one("x"), &default_global_radii(), &quick()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.exponent.to_string(), "10125/2");
        assert_eq!(r.auto_pass_count, r.records.len());
        let tail = compact_tail_view(&r, 10.0).unwrap();
        assert_eq!(tail.verdict, Verdict::Pass);
        assert_eq!(tail.records.len(), 30);
    }

    #[test]
    fn global_needs_zero() {
        let err = verify_global(&one("x^2 + 1"), &default_global_radii(), &quick()).unwrap_err();
        assert!(err.is_precondition());
    }

    #[test]
    fn goodness_verdicts() {
        let g = check_good_at_infinity(&one("x"), &default_global_radii(), &quick()).unwrap();
        assert!(g.good);
        assert!((g.c_hat.unwrap() - 1.0).abs() < 1e-12);
        let g = check_good_at_infinity(&one("x^2"), &default_global_radii(), &quick()).unwrap();
        assert!(g.good);
        let xy = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1*x2"]]).unwrap();
        let g = check_good_at_infinity(&xy, &default_global_radii(), &quick()).unwrap();
        assert!(!g.good, "{g:?}");
        assert!(g.per_sphere.iter().all(|s| s.zero_found));
    }

    #[test]
    fn holder_verdicts() {
        for entry in ["x", "x^2"] {
            let r = verify_holder_global(&one(entry), &default_global_radii(), &quick()).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{entry}: {:?}", r.notes);
        }
        let xy = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1*x2"]]).unwrap();
        let err = verify_holder_global(&xy, &default_global_radii(), &quick()).unwrap_err();
        assert!(err.is_precondition());
    }
}
