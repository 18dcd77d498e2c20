#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use svloja::{Monomial, PolyMatrix, Polynomial};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vars(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("x{k}")).collect()
}

/// Random polynomial of degree at most `d` with up to six terms and
/// coefficients in [-1, 1].
pub fn random_polynomial(rng: &mut impl Rng, n: usize, d: u32) -> Polynomial {
    let terms = rng.random_range(1..=6);
    Polynomial::from_terms(
        n,
        (0..terms).map(|_| {
            let mut e = vec![0u32; n];
            let deg = rng.random_range(0..=d);
            for _ in 0..deg {
                e[rng.random_range(0..n)] += 1;
            }
            (Monomial::new(e), rng.random_range(-1.0..=1.0))
        }),
    )
}

/// Random matrix with n, p, q ≤ 3 (p ≤ q) and entries of degree ≤ 3.
pub fn random_matrix(rng: &mut impl Rng) -> PolyMatrix {
    let n = rng.random_range(1..=3);
    let p = rng.random_range(1..=3);
    let q = rng.random_range(p..=3);
    let d = rng.random_range(1..=3);
    let grid = (0..p)
        .map(|_| (0..q).map(|_| random_polynomial(rng, n, d)).collect())
        .collect();
    PolyMatrix::new(vars(n), grid).unwrap()
}

pub fn random_point(rng: &mut impl Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect()
}

pub fn unit(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    svloja::sampling::unit_sphere(rng, dim)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// ‖yᵀ A‖ for a dense matrix given by rows.
pub fn left_product_norm(a: &svloja::numlin::DenseMatrix, y: &[f64]) -> f64 {
    let mut acc = vec![0.0; a.cols()];
    for (i, yi) in y.iter().enumerate() {
        for (j, v) in acc.iter_mut().enumerate() {
            *v += yi * a[(i, j)];
        }
    }
    norm(&acc)
}

/// Central difference of `f` (step 1e-5).
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-5;
    (0..x.len())
        .map(|k| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += h;
            m[k] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

/// Runs the CLI and captures exit code, stdout and stderr.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["svloja"];
    argv.extend_from_slice(args);
    let code = svloja::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}
