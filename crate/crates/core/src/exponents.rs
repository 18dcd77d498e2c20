//! Exact Łojasiewicz-type exponents for smallest singular value functions.
//!
//! Every exponent is a rational built from
//!
//! ```text
//! R(n, d) = d·(3d − 3)^(n−1)   if d ≥ 2
//!         = 1                  if d = 1
//! ```
//!
//! evaluated with arbitrary-precision integers. These numbers grow very fast
//! (`R(n+p+2, 4d+2)` passes 10^15 for modest inputs), so the floating-point
//! value is only ever a derived view.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which inequality an exponent belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    /// `1 − 1/R(n+p, 2d+2)`, the nonsmooth gradient inequality.
    Gradient,
    /// `1 − 2/R(n+p, 2d+2)`, the gradient inequality at a zero of `f`.
    GradientAtZero,
    /// `2/R(n+p, 2d+2)`, local error bound on compact sets.
    ErrorBound,
    /// `2/R(n+p₁+p₂, 2d+2)`, local separation of zero sets.
    Separation,
    /// `2/R(n+p₁+p₃, 2d+2)`, factorization on a compact zero set.
    Factorization,
    /// `R(n+p₁+p₂, 2d+2)/2`, global separation.
    GlobalSeparation,
    /// `R(n+p+2, 4d+2)/4`, global Łojasiewicz inequality.
    GlobalLoja,
}

impl ExponentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExponentKind::Gradient => "gradient",
            ExponentKind::GradientAtZero => "gradient_at_zero",
            ExponentKind::ErrorBound => "error_bound",
            ExponentKind::Separation => "separation",
            ExponentKind::Factorization => "factorization",
            ExponentKind::GlobalSeparation => "global_separation",
            ExponentKind::GlobalLoja => "global_loja",
        }
    }
}

/// An exact exponent `numerator/denominator` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentBound {
    numerator: BigUint,
    denominator: BigUint,
    kind: ExponentKind,
}

impl ExponentBound {
    fn new(value: BigRational, kind: ExponentKind) -> Self {
        // BigRational is always reduced with a positive denominator.
        let (num, den) = value.into_raw();
        let numerator = num.to_biguint().expect("exponents are non-negative");
        let denominator = den.to_biguint().expect("positive denominator");
        ExponentBound {
            numerator,
            denominator,
            kind,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn kind(&self) -> ExponentKind {
        self.kind
    }

    pub fn as_ratio(&self) -> BigRational {
        BigRational::new(self.numerator.clone().into(), self.denominator.clone().into())
    }

    /// Nearest double to the exact value.
    pub fn as_f64(&self) -> f64 {
        ratio_to_f64(&self.numerator, &self.denominator)
    }

    /// `t^self` for `t ≥ 0`, evaluated as `exp(self·ln t)`; `0^e = 0`.
    pub fn pow(&self, t: f64) -> Result<f64> {
        pow_nonneg(t, self.as_f64())
    }

    pub fn is_lowest_terms(&self) -> bool {
        self.numerator.gcd(&self.denominator).is_one()
    }
}

impl fmt::Display for ExponentBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.is_one() {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ExponentRepr {
    kind: ExponentKind,
    numerator: String,
    denominator: String,
    value: f64,
}

impl Serialize for ExponentBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExponentRepr {
            kind: self.kind,
            numerator: self.numerator.to_string(),
            denominator: self.denominator.to_string(),
            value: self.as_f64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExponentBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ExponentRepr::deserialize(d)?;
        let num: BigUint = r.numerator.parse().map_err(D::Error::custom)?;
        let den: BigUint = r.denominator.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(ExponentBound::new(BigRational::new(num.into(), den.into()), r.kind))
    }
}

/// Correctly rounded `num/den` (round half to even), for any size of operands.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    // Scale so the integer quotient carries 54+ significant bits, then round
    // once with a sticky bit from the remainder.
    let shift = 55i64 - (num.bits() as i64 - den.bits() as i64);
    let (q, r) = if shift >= 0 {
        (num << shift as u64).div_rem(den)
    } else {
        let scaled_den = den << (-shift) as u64;
        num.div_rem(&scaled_den)
    };
    let mut q = q;
    let sticky = !r.is_zero();
    let qbits = q.bits() as i64;
    // Keep 53 bits of mantissa; the rest decides rounding.
    let drop = qbits - 53;
    let mut exp2 = -shift;
    if drop > 0 {
        let mask = (BigUint::one() << drop as u64) - 1u32;
        let tail = &q & &mask;
        let half = BigUint::one() << (drop as u64 - 1);
        q >>= drop as u64;
        exp2 += drop;
        if tail > half || (tail == half && (sticky || q.bit(0))) {
            q += 1u32;
        }
    }
    let mantissa = q.to_f64().expect("fits in 54 bits");
    if exp2 > i32::MAX as i64 {
        return f64::INFINITY;
    }
    if exp2 < i32::MIN as i64 {
        return 0.0;
    }
    scale_by_pow2(mantissa, exp2 as i32)
}

fn scale_by_pow2(mut x: f64, mut e: i32) -> f64 {
    // Step in chunks to avoid intermediate overflow/underflow of 2^e.
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e)
}

/// `t^e` for non-negative `t` via `exp(e·ln t)`, with `0^e = 0`.
pub fn pow_nonneg(t: f64, e: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Precondition(format!(
            "exponent applied to a negative or NaN quantity ({t})"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((e * t.ln()).exp())
}

fn positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        Err(Error::Precondition(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// `R(n, d)`: `d·(3d−3)^(n−1)` for `d ≥ 2` and `1` for `d = 1`.
pub fn capital_r(n: u64, d: u64) -> Result<BigUint> {
    positive("n", n)?;
    positive("d", d)?;
    if d == 1 {
        return Ok(BigUint::one());
    }
    let base = BigUint::from(3 * d - 3);
    let exp = u32::try_from(n - 1).map_err(|_| Error::Precondition("n is too large".into()))?;
    Ok(BigUint::from(d) * base.pow(exp))
}

fn r_of(n: u64, extra: u64, d: u64, scale: u64, shift: u64) -> Result<BigUint> {
    capital_r(n + extra, scale * d + shift)
}

fn one_minus(k: u64, r: BigUint, kind: ExponentKind) -> ExponentBound {
    let r = BigRational::from_integer(r.into());
    let k = BigRational::from_integer(k.into());
    ExponentBound::new(BigRational::one() - k / r, kind)
}

fn k_over(k: u64, r: BigUint, kind: ExponentKind) -> ExponentBound {
    ExponentBound::new(BigRational::new(k.into(), r.into()), kind)
}

fn over_k(r: BigUint, k: u64, kind: ExponentKind) -> ExponentBound {
    ExponentBound::new(BigRational::new(r.into(), k.into()), kind)
}

fn check3(n: u64, p: u64, d: u64) -> Result<()> {
    positive("n", n)?;
    positive("p", p)?;
    positive("d", d)
}

/// `1 − 1/R(n+p, 2d+2)`.
pub fn gradient_exponent(n: u64, p: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p, d)?;
    Ok(one_minus(1, r_of(n, p, d, 2, 2)?, ExponentKind::Gradient))
}

/// `1 − 2/R(n+p, 2d+2)`, valid at base points where `f` vanishes.
pub fn gradient_exponent_at_zero(n: u64, p: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p, d)?;
    Ok(one_minus(2, r_of(n, p, d, 2, 2)?, ExponentKind::GradientAtZero))
}

/// `2/R(n+p, 2d+2)`.
pub fn error_bound_exponent(n: u64, p: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p, d)?;
    Ok(k_over(2, r_of(n, p, d, 2, 2)?, ExponentKind::ErrorBound))
}

/// `2/R(n+p₁+p₂, 2d+2)`.
pub fn separation_exponent(n: u64, p1: u64, p2: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p1, d)?;
    positive("p2", p2)?;
    Ok(k_over(2, r_of(n, p1 + p2, d, 2, 2)?, ExponentKind::Separation))
}

/// `2/R(n+p₁+p₃, 2d+2)`.
pub fn factorization_exponent(n: u64, p1: u64, p3: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p1, d)?;
    positive("p3", p3)?;
    Ok(k_over(2, r_of(n, p1 + p3, d, 2, 2)?, ExponentKind::Factorization))
}

/// `R(n+p₁+p₂, 2d+2)/2`.
pub fn global_separation_exponent(n: u64, p1: u64, p2: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p1, d)?;
    positive("p2", p2)?;
    Ok(over_k(r_of(n, p1 + p2, d, 2, 2)?, 2, ExponentKind::GlobalSeparation))
}

/// `R(n+p+2, 4d+2)/4`.
pub fn global_loja_exponent(n: u64, p: u64, d: u64) -> Result<ExponentBound> {
    check3(n, p, d)?;
    Ok(over_k(r_of(n, p + 2, d, 4, 2)?, 4, ExponentKind::GlobalLoja))
}

/// All single-matrix bounds for `(n, p, d)` plus the two-matrix ones with
/// the second matrix also having `p` rows.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExponentTable {
    pub n: u64,
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<u64>,
    pub d: u64,
    pub r_local: String,
    pub r_global: String,
    pub bounds: Vec<ExponentBound>,
}

impl ExponentTable {
    pub fn compute(n: u64, p: u64, q: Option<u64>, d: u64) -> Result<Self> {
        check3(n, p, d)?;
        if let Some(q) = q {
            if p > q {
                return Err(Error::Precondition(format!("need p ≤ q, got p={p}, q={q}")));
            }
        }
        Ok(ExponentTable {
            n,
            p,
            q,
            d,
            r_local: capital_r(n + p, 2 * d + 2)?.to_string(),
            r_global: capital_r(n + p + 2, 4 * d + 2)?.to_string(),
            bounds: vec![
                gradient_exponent(n, p, d)?,
                gradient_exponent_at_zero(n, p, d)?,
                error_bound_exponent(n, p, d)?,
                separation_exponent(n, p, p, d)?,
                factorization_exponent(n, p, p, d)?,
                global_separation_exponent(n, p, p, d)?,
                global_loja_exponent(n, p, d)?,
            ],
        })
    }

    pub fn get(&self, kind: ExponentKind) -> Option<&ExponentBound> {
        self.bounds.iter().find(|b| b.kind == kind)
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "n = {}, p = {}{}, d = {}\nR(n+p, 2d+2) = {}\nR(n+p+2, 4d+2) = {}\n",
            self.n,
            self.p,
            self.q.map(|q| format!(", q = {q}")).unwrap_or_default(),
            self.d,
            self.r_local,
            self.r_global
        );
        let width = self.bounds.iter().map(|b| b.to_string().len()).max().unwrap_or(0);
        for b in &self.bounds {
            out.push_str(&format!(
                "{:<18} {:>width$}  {:.17e}\n",
                b.kind.label(),
                b.to_string(),
                b.as_f64()
            ));
        }
        out
    }
}
