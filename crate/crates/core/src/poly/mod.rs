//! Sparse multivariate polynomials with real coefficients.
//!
//! Terms are kept in a [`BTreeMap`] keyed by [`Monomial`], which orders
//! exponent vectors graded-lexicographically. Every constructor and
//! arithmetic operation canonicalizes: like terms are merged and exact zero
//! coefficients are dropped, so two polynomials that are equal as functions
//! of their coefficients compare equal structurally.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{check_dim, Result};

pub use parse::{parse_polynomial, Parser};

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    /// The monomial `1` in `n` variables.
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    /// `x_k` in `n` variables.
    pub fn var(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

// Graded lexicographic: total degree first, then exponents left to right.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial in a fixed number of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_terms(nvars, [(Monomial::one(nvars), c)])
    }

    /// The coordinate polynomial `x_k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        assert!(k < nvars, "variable index {k} out of range for {nvars} variables");
        Self::from_terms(nvars, [(Monomial::var(nvars, k), 1.0)])
    }

    /// Builds a canonical polynomial, merging repeated monomials and dropping
    /// zero coefficients.
    ///
    /// Panics if a monomial has the wrong number of variables.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity does not match polynomial");
            *map.entry(m).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Polynomial { nvars, terms: map }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree over the terms; `0` for the zero polynomial
    /// (check [`is_zero`](Self::is_zero) to tell it apart from a constant).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.nvars, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(x)).sum()
    }

    /// Partial derivative with respect to `x_k`.
    pub fn derivative(&self, k: usize) -> Polynomial {
        let terms = self.terms.iter().filter_map(|(m, &c)| {
            let e = m.0[k];
            (e > 0).then(|| {
                let mut exps = m.0.clone();
                exps[k] -= 1;
                (Monomial(exps), c * f64::from(e))
            })
        });
        Polynomial::from_terms(self.nvars, terms)
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|k| self.derivative(k)).collect()
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.nvars, other.nvars)?;
        let terms = self.terms().chain(other.terms()).map(|(m, c)| (m.clone(), c));
        Ok(Polynomial::from_terms(self.nvars, terms))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        check_dim(self.nvars, other.nvars)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                terms.push((ma.mul(mb), ca * cb));
            }
        }
        Ok(Polynomial::from_terms(self.nvars, terms))
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::from_terms(self.nvars, self.terms().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..k {
            acc = acc.mul(self).expect("same arity");
        }
        acc
    }

    /// Renders the polynomial in the textual grammar accepted by
    /// [`parse_polynomial`], highest-degree terms first.
    pub fn render(&self, vars: &[String]) -> String {
        assert_eq!(vars.len(), self.nvars, "variable name count mismatch");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if i == 0 {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            let factors: Vec<String> = m
                .0
                .iter()
                .zip(vars)
                .filter(|(e, _)| **e > 0)
                .map(|(e, name)| if *e == 1 { name.clone() } else { format!("{name}^{e}") })
                .collect();
            if factors.is_empty() {
                out.push_str(&fmt_coeff(mag));
            } else {
                if mag != 1.0 {
                    out.push_str(&fmt_coeff(mag));
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

// `{:?}` on f64 is the shortest representation that round-trips and always
// uses the grammar's decimal/exponent syntax.
fn fmt_coeff(c: f64) -> String {
    format!("{c:?}")
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        f.write_str(&self.render(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn evaluate_examples() {
        let p = Polynomial::from_terms(
            2,
            [(Monomial::new(vec![2, 0]), 1.0), (Monomial::new(vec![0, 0]), 1.0)],
        );
        assert_eq!(p.evaluate(&[2.0, 7.0]).unwrap(), 5.0);
        assert_eq!(Polynomial::zero(3).evaluate(&[1.0, -2.0, 4.0]).unwrap(), 0.0);
        let q = parse_polynomial("x1^3 - x2", &vars(&["x1", "x2"])).unwrap();
        assert_eq!(q.evaluate(&[2.0, 1.0]).unwrap(), 7.0);
    }

    #[test]
    fn evaluate_rejects_wrong_dimension() {
        let p = Polynomial::var(2, 0);
        assert!(matches!(
            p.evaluate(&[1.0]),
            Err(crate::Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn gradient_examples() {
        let v = vars(&["x1", "x2"]);
        let sq = parse_polynomial("x1^2", &v).unwrap();
        let g = sq.gradient();
        assert_eq!(g[0], Polynomial::var(2, 0).scale(2.0));
        assert!(g[1].is_zero());

        let c = Polynomial::constant(2, 4.5);
        assert!(c.gradient().iter().all(Polynomial::is_zero));

        let prod = parse_polynomial("x1*x2", &v).unwrap();
        let g = prod.gradient();
        assert_eq!(g[0], Polynomial::var(2, 1));
        assert_eq!(g[1], Polynomial::var(2, 0));
    }

    #[test]
    fn arithmetic_examples() {
        let v = vars(&["x1"]);
        let x = Polynomial::var(1, 0);
        assert!(x.add(&x.scale(-1.0)).unwrap().is_zero());

        let a = parse_polynomial("x1 + 1", &v).unwrap();
        let b = parse_polynomial("x1 - 1", &v).unwrap();
        assert_eq!(a.mul(&b).unwrap(), parse_polynomial("x1^2 - 1", &v).unwrap());

        let sq = parse_polynomial("x1^2", &v).unwrap();
        assert!(sq.scale(0.0).is_zero());
    }

    #[test]
    fn mismatched_arity_is_an_error() {
        let a = Polynomial::var(1, 0);
        let b = Polynomial::var(2, 0);
        assert!(a.add(&b).is_err());
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn zero_polynomial_degree_and_flag() {
        let z = Polynomial::zero(2);
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
        let c = Polynomial::constant(2, 3.0);
        assert!(!c.is_zero());
        assert_eq!(c.degree(), 0);
    }

    #[test]
    fn grlex_order() {
        let a = Monomial::new(vec![0, 2]);
        let b = Monomial::new(vec![1, 0]);
        let c = Monomial::new(vec![1, 1]);
        assert!(b < a);
        assert!(a < c);
        assert!(Monomial::new(vec![0, 2]) < Monomial::new(vec![1, 1]));
    }

    #[test]
    fn degree_of_monomial_products_adds() {
        for (ea, eb) in [(vec![1, 0, 2], vec![0, 3, 1]), (vec![4, 0, 0], vec![0, 0, 1])] {
            let a = Polynomial::from_terms(3, [(Monomial::new(ea), 2.0)]);
            let b = Polynomial::from_terms(3, [(Monomial::new(eb), -1.5)]);
            assert_eq!(a.mul(&b).unwrap().degree(), a.degree() + b.degree());
        }
    }

    #[test]
    fn render_examples() {
        let v = vars(&["x", "y"]);
        let p = parse_polynomial("1 - 2*x*y + x^2", &v).unwrap();
        assert_eq!(p.render(&v), "x^2 - 2.0*x*y + 1.0");
        assert_eq!(Polynomial::zero(2).render(&v), "0");
        let q = parse_polynomial("-x", &v).unwrap();
        assert_eq!(q.render(&v), "-x");
    }
}
