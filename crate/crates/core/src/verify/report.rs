use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ExponentBound;

/// Which inequality a report checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    Gradient,
    GradientAtZero,
    ErrorBound,
    Separation,
    Factorization,
    GlobalSeparation,
    Global,
    CompactTail,
    Holder,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// How the two sides relate and how the empirical constant is read off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// `lhs ≥ c·rhs`; ratio `lhs/rhs`, constant = minimum ratio.
    LhsDominates,
    /// `c·lhs ≤ rhs`; ratio `rhs/lhs`, constant = minimum ratio.
    RhsDominates,
    /// `lhs ≤ c·rhs`; ratio `lhs/rhs`, constant = maximum ratio.
    LhsBounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One sampled point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Shell radius the point was drawn on (or the region radius for ball
    /// and box samplers).
    pub radius: f64,
    pub point: Vec<f64>,
    pub f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(with = "float_serde")]
    pub lhs: f64,
    #[serde(with = "float_serde")]
    pub rhs: f64,
    #[serde(with = "float_serde")]
    pub ratio: f64,
    /// Both sides vanish (or the point lies on the zero fiber of the base).
    pub excluded: bool,
    /// The side carrying the huge exponent underflowed to zero, so the
    /// inequality holds at this point for any constant.
    #[serde(default)]
    pub auto_pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<usize>,
}

impl SampleRecord {
    pub(crate) fn informative(&self) -> bool {
        !self.excluded && !self.auto_pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSummary {
    pub radius: f64,
    pub samples: usize,
    /// Extreme ratio on this shell (minimum, or maximum for the bounded form).
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_float_serde")]
    pub extreme_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality: Inequality,
    pub form: Form,
    pub exponent: ExponentBound,
    /// `None` when no sample carried information (all excluded or
    /// auto-passed).
    pub empirical_constant: Option<f64>,
    pub verdict: Verdict,
    pub excluded_count: usize,
    pub auto_pass_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_exponent: Option<f64>,
    pub per_radius: Vec<RadiusSummary>,
    pub notes: Vec<String>,
    pub records: Vec<SampleRecord>,
}

/// Decay allowed per decade of radius before a shrinking ratio is flagged.
pub const STABILITY_DECAY_PER_DECADE: f64 = 10.0;

pub(crate) struct Assembly {
    pub inequality: Inequality,
    pub form: Form,
    pub exponent: ExponentBound,
    pub records: Vec<SampleRecord>,
    pub notes: Vec<String>,
    pub check_stability: bool,
}

impl Assembly {
    pub fn finish(self) -> VerificationReport {
        let Assembly {
            inequality,
            form,
            exponent,
            records,
            mut notes,
            check_stability,
        } = self;
        let excluded_count = records.iter().filter(|r| r.excluded).count();
        let auto_pass_count = records.iter().filter(|r| r.auto_pass && !r.excluded).count();
        let pick = |a: f64, b: f64| match form {
            Form::LhsBounded => a.max(b),
            _ => a.min(b),
        };

        let mut per_radius: Vec<RadiusSummary> = Vec::new();
        for r in &records {
            let idx = match per_radius.iter().position(|s| s.radius == r.radius) {
                Some(i) => i,
                None => {
                    per_radius.push(RadiusSummary {
                        radius: r.radius,
                        samples: 0,
                        extreme_ratio: None,
                    });
                    per_radius.len() - 1
                }
            };
            let s = &mut per_radius[idx];
            s.samples += 1;
            if r.informative() {
                s.extreme_ratio = Some(s.extreme_ratio.map_or(r.ratio, |e| pick(e, r.ratio)));
            }
        }

        let constant = records
            .iter()
            .filter(|r| r.informative())
            .map(|r| r.ratio)
            .reduce(pick);
        // A constant of +inf (every informative ratio infinite) carries no
        // information for the lower-bound forms.
        let empirical_constant = match (form, constant) {
            (Form::LhsBounded, c) => c,
            (_, Some(c)) if c.is_infinite() => None,
            (_, c) => c,
        };

        let mut verdict = match (form, empirical_constant) {
            (Form::LhsBounded, Some(c)) if c.is_finite() => Verdict::Pass,
            (Form::LhsBounded, Some(_)) => Verdict::Fail,
            (_, Some(c)) if c > 0.0 => Verdict::Pass,
            (_, Some(_)) => Verdict::Fail,
            (_, None) if auto_pass_count > 0 && auto_pass_count + excluded_count == records.len() => {
                notes.push("every informative sample auto-passed: the exponent side underflowed".into());
                Verdict::Pass
            }
            (_, None) => {
                notes.push("no informative samples".into());
                Verdict::Inconclusive
            }
        };
        if auto_pass_count > 0 {
            notes.push(format!(
                "{auto_pass_count} samples auto-pass: the side with the large exponent underflowed to 0"
            ));
        }

        if verdict == Verdict::Pass && check_stability && form != Form::LhsBounded {
            if let Some(msg) = decay_warning(&per_radius) {
                notes.push(msg);
                verdict = Verdict::Inconclusive;
            }
        }

        VerificationReport {
            inequality,
            form,
            exponent,
            empirical_constant,
            verdict,
            excluded_count,
            auto_pass_count,
            fitted_exponent: None,
            per_radius,
            notes,
            records,
        }
    }
}

/// Flags monotone decay of the per-radius minimum across the three smallest
/// radii that carry data, when each step loses more than a factor
/// `STABILITY_DECAY_PER_DECADE` per decade of radius.
pub fn decay_warning(per_radius: &[RadiusSummary]) -> Option<String> {
    let mut shells: Vec<(f64, f64)> = per_radius
        .iter()
        .filter_map(|s| s.extreme_ratio.filter(|e| e.is_finite()).map(|e| (s.radius, e)))
        .collect();
    if shells.len() < 3 {
        return None;
    }
    shells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tail = &shells[shells.len() - 3..];
    let decays = tail.windows(2).all(|w| {
        let (r_big, m_big) = w[0];
        let (r_small, m_small) = w[1];
        if !(m_small < m_big) {
            return false;
        }
        if m_small <= 0.0 {
            return true;
        }
        let decades = (r_big / r_small).log10();
        decades > 0.0 && (m_big / m_small).powf(1.0 / decades) > STABILITY_DECAY_PER_DECADE
    });
    decays.then(|| {
        format!(
            "per-radius minimum ratio decays faster than {STABILITY_DECAY_PER_DECADE}x per decade over the three smallest radii ({:.3e}, {:.3e}, {:.3e}); the tested exponent may be too small",
            tail[0].1, tail[1].1, tail[2].1
        )
    })
}

impl VerificationReport {
    /// Post-hoc scan: every informative record satisfies the inequality
    /// with the reported constant (up to a relative `1e-12`).
    pub fn records_consistent(&self) -> bool {
        let Some(c) = self.empirical_constant else {
            return self.records.iter().all(|r| !r.informative() || r.ratio.is_infinite());
        };
        let slack = 1.0 - 1e-12;
        self.records.iter().filter(|r| r.informative()).all(|r| match self.form {
            Form::LhsDominates => r.lhs >= c * r.rhs * slack,
            Form::RhsDominates => r.rhs >= c * r.lhs * slack,
            Form::LhsBounded => r.lhs * slack <= c * r.rhs,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per sample.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["radius", "point", "f", "slope", "lhs", "rhs", "ratio", "excluded", "multiplicity"])
            .map_err(io)?;
        for r in &self.records {
            let point: Vec<String> = r.point.iter().map(|v| format!("{v:?}")).collect();
            w.write_record([
                format!("{:?}", r.radius),
                point.join(";"),
                format!("{:?}", r.f),
                r.slope.map(|s| format!("{s:?}")).unwrap_or_default(),
                format!("{:?}", r.lhs),
                format!("{:?}", r.rhs),
                format!("{:?}", r.ratio),
                r.excluded.to_string(),
                r.multiplicity.map(|m| m.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("inequality         {}\n", self.inequality));
        out.push_str(&format!("exponent           {} ({:.6e})\n", self.exponent, self.exponent.as_f64()));
        out.push_str(&format!(
            "empirical constant {}\n",
            self.empirical_constant.map_or("n/a".to_string(), |c| format!("{c:.6e}"))
        ));
        if let Some(a) = self.fitted_exponent {
            out.push_str(&format!("fitted exponent    {a:.6}\n"));
        }
        out.push_str(&format!(
            "samples            {} ({} excluded, {} auto-pass)\n",
            self.records.len(),
            self.excluded_count,
            self.auto_pass_count
        ));
        for s in &self.per_radius {
            out.push_str(&format!(
                "  radius {:>12.4e}  n={:<5} extreme ratio {}\n",
                s.radius,
                s.samples,
                s.extreme_ratio.map_or("n/a".to_string(), |e| format!("{e:.6e}"))
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out.push_str(&format!("verdict            {}\n", self.verdict));
        out
    }
}

/// f64 fields that may hold `inf`/`nan`, which JSON numbers cannot.
pub(crate) mod float_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        use serde::de::Error;
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

pub(crate) mod opt_float_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::float_serde::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::float_serde")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
