//! Polynomial matrices `F(x)` and their JSON document format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numlin::DenseMatrix;
use crate::poly::{Parser, Polynomial};

/// On-disk representation: `{"vars": [...], "entries": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub vars: Vec<String>,
    pub entries: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

/// A `p×q` matrix of polynomials in `n` variables, normalized so that
/// `p ≤ q`.
#[derive(Clone, Debug)]
pub struct PolyMatrix {
    vars: Vec<String>,
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
    transposed: bool,
    name: Option<String>,
}

impl PolyMatrix {
    /// Builds a matrix from a grid of polynomials. A grid with more rows than
    /// columns is stored transposed; singular values do not change.
    pub fn new(vars: Vec<String>, grid: Vec<Vec<Polynomial>>) -> Result<Self> {
        let n = vars.len();
        if n == 0 {
            return Err(Error::Schema("`vars` must be nonempty".into()));
        }
        let rows = grid.len();
        if rows == 0 {
            return Err(Error::Schema("`entries` must have at least one row".into()));
        }
        let cols = grid[0].len();
        if cols == 0 {
            return Err(Error::Schema("rows of `entries` must be nonempty".into()));
        }
        for (i, row) in grid.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Schema(format!(
                    "ragged rows: row 0 has {cols} entries, row {i} has {}",
                    row.len()
                )));
            }
            for p in row {
                check_dim(n, p.nvars())?;
            }
        }
        let mut m = PolyMatrix {
            vars,
            rows,
            cols,
            entries: grid.into_iter().flatten().collect(),
            transposed: false,
            name: None,
        };
        if rows > cols {
            m = m.transposed_storage();
        }
        Ok(m)
    }

    fn transposed_storage(self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.entries[i * self.cols + j].clone());
            }
        }
        PolyMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
            transposed: !self.transposed,
            ..self
        }
    }

    pub fn from_document(doc: &MatrixDocument) -> Result<Self> {
        let parser = Parser::new(&doc.vars)?;
        let mut grid = Vec::with_capacity(doc.entries.len());
        for (i, row) in doc.entries.iter().enumerate() {
            let mut prow = Vec::with_capacity(row.len());
            for (j, text) in row.iter().enumerate() {
                let p = parser.parse(text).map_err(|e| Error::Entry {
                    row: i,
                    col: j,
                    source: Box::new(e),
                })?;
                prow.push(p);
            }
            grid.push(prow);
        }
        let mut m = PolyMatrix::new(doc.vars.clone(), grid)?;
        m.name = doc.name.clone();
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Document form of the stored (normalized) matrix.
    pub fn to_document(&self) -> MatrixDocument {
        MatrixDocument {
            vars: self.vars.clone(),
            entries: (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.entry(i, j).render(&self.vars)).collect())
                .collect(),
            name: self.name.clone(),
            comment: None,
        }
    }

    /// Convenience constructor for `1×1` matrices and tests.
    pub fn from_strings(vars: &[&str], entries: &[&[&str]]) -> Result<Self> {
        Self::from_document(&MatrixDocument {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            entries: entries
                .iter()
                .map(|row| row.iter().map(|s| s.to_string()).collect())
                .collect(),
            name: None,
            comment: None,
        })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Number of rows after normalization (`p ≤ q`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True when the input had more rows than columns and was transposed.
    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    /// `d`: the largest total degree over all entries.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Rejects constant matrices, which the exponent formulas exclude.
    pub fn require_positive_degree(&self) -> Result<u32> {
        match self.degree() {
            0 => Err(Error::Precondition(
                "matrix has degree 0 (constant entries); the exponent bounds need d ≥ 1".into(),
            )),
            d => Ok(d),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<DenseMatrix> {
        check_dim(self.nvars(), x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("evaluation point".into()));
        }
        let data = self.entries.iter().map(|p| p.eval_unchecked(x)).collect();
        Ok(DenseMatrix::from_row_major(self.rows, self.cols, data))
    }

    /// `F(x)·F(x)ᵀ`, symmetrized.
    pub fn gram(&self, x: &[f64]) -> Result<DenseMatrix> {
        Ok(self.evaluate(x)?.gram())
    }

    /// The `p×p` grid of inner-product polynomials `⟨F_i, F_j⟩ = Σ_k f_ik f_jk`.
    /// Entry `(j, i)` is a clone of entry `(i, j)`.
    pub fn gram_polynomials(&self) -> Vec<Vec<Polynomial>> {
        let p = self.rows;
        let n = self.nvars();
        let mut grid = vec![vec![Polynomial::zero(n); p]; p];
        for i in 0..p {
            for j in i..p {
                let mut acc = Polynomial::zero(n);
                for k in 0..self.cols {
                    let prod = self.entry(i, k).mul(self.entry(j, k)).expect("same arity");
                    acc = acc.add(&prod).expect("same arity");
                }
                grid[j][i] = acc.clone();
                grid[i][j] = acc;
            }
        }
        grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_documents() {
        let f = PolyMatrix::from_json(r#"{"vars":["x"],"entries":[["x"]]}"#).unwrap();
        assert_eq!((f.rows(), f.cols(), f.nvars()), (1, 1, 1));
        assert!(!f.is_transposed());

        let d = PolyMatrix::from_json(r#"{"vars":["x1","x2"],"entries":[["x1","0"],["0","x2"]],"name":"diag"}"#)
            .unwrap();
        assert_eq!((d.rows(), d.cols()), (2, 2));
        assert_eq!(d.name(), Some("diag"));
        assert!(d.entry(0, 1).is_zero());
    }

    #[test]
    fn tall_input_is_transposed() {
        let t = PolyMatrix::from_json(r#"{"vars":["x"],"entries":[["x","1"],["2","x^2"],["0","3"]]}"#).unwrap();
        assert!(t.is_transposed());
        assert_eq!((t.rows(), t.cols()), (2, 3));
        let m = t.evaluate(&[2.0]).unwrap();
        assert_eq!(m.to_rows(), vec![vec![2.0, 2.0, 0.0], vec![1.0, 4.0, 3.0]]);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(
            PolyMatrix::from_json(r#"{"vars":["x"],"entries":[["x","1"],["x"]]}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(PolyMatrix::from_json(r#"{"vars":["x"]}"#), Err(Error::Schema(_))));
        assert!(matches!(
            PolyMatrix::from_json(r#"{"vars":["x"],"entries":[["x"]],"extra":1}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(PolyMatrix::from_json(r#"{"vars":[],"entries":[["1"]]}"#), Err(Error::Schema(_))));
        match PolyMatrix::from_json(r#"{"vars":["x"],"entries":[["x","y"]]}"#) {
            Err(Error::Entry { row: 0, col: 1, source }) => {
                assert!(matches!(*source, Error::UnknownVariable { .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluation_examples() {
        let f = PolyMatrix::from_strings(&["x"], &[&["x"]]).unwrap();
        assert_eq!(f.evaluate(&[3.0]).unwrap().to_rows(), vec![vec![3.0]]);
        assert_eq!(f.gram(&[3.0]).unwrap().to_rows(), vec![vec![9.0]]);

        let d = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1", "0"], &["0", "x2"]]).unwrap();
        assert_eq!(d.evaluate(&[2.0, -1.0]).unwrap().to_rows(), vec![vec![2.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(d.gram(&[2.0, -1.0]).unwrap().to_rows(), vec![vec![4.0, 0.0], vec![0.0, 1.0]]);

        let r = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1", "x2", "1"]]).unwrap();
        assert_eq!(r.evaluate(&[1.0, 2.0]).unwrap().to_rows(), vec![vec![1.0, 2.0, 1.0]]);
        assert_eq!(r.gram(&[1.0, 2.0]).unwrap().to_rows(), vec![vec![6.0]]);

        assert!(matches!(r.evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gram_polynomial_examples() {
        let v = vec!["x".to_string()];
        let f = PolyMatrix::from_strings(&["x"], &[&["x"]]).unwrap();
        assert_eq!(f.gram_polynomials()[0][0], crate::poly::parse_polynomial("x^2", &v).unwrap());

        let d = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1", "0"], &["0", "x2"]]).unwrap();
        let v2 = vec!["x1".to_string(), "x2".to_string()];
        let g = d.gram_polynomials();
        assert_eq!(g[0][0], crate::poly::parse_polynomial("x1^2", &v2).unwrap());
        assert!(g[0][1].is_zero() && g[1][0].is_zero());
        assert_eq!(g[1][1], crate::poly::parse_polynomial("x2^2", &v2).unwrap());

        let r = PolyMatrix::from_strings(&["x"], &[&["x", "1"]]).unwrap();
        assert_eq!(r.gram_polynomials()[0][0], crate::poly::parse_polynomial("x^2 + 1", &v).unwrap());
    }

    #[test]
    fn degree_and_constant_matrices() {
        let c = PolyMatrix::from_strings(&["x"], &[&["2", "0"]]).unwrap();
        assert_eq!(c.degree(), 0);
        assert!(matches!(c.require_positive_degree(), Err(Error::Precondition(_))));
        let f = PolyMatrix::from_strings(&["x", "y"], &[&["x*y^2", "1"]]).unwrap();
        assert_eq!(f.require_positive_degree().unwrap(), 3);
    }

    #[test]
    fn document_round_trip() {
        let d = PolyMatrix::from_strings(&["x1", "x2"], &[&["x1^2 - 3*x2", "0.5"], &["x2", "x1*x2"]]).unwrap();
        let back = PolyMatrix::from_document(&d.to_document()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(back.entry(i, j), d.entry(i, j));
            }
        }
    }
}
