mod common;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svloja::exponents::*;
use svloja::numlin::{min_eigenspace, sym_eig, DenseMatrix};
use svloja::subdiff::{smallest_singular_value, AuxiliarySetup, PointSpectrum, SlopeOptions};
use svloja::verify::{self, DistanceOptions, SamplePlan};
use svloja::{parse_polynomial, Monomial, PolyMatrix, Polynomial};

use common::*;

fn seeded() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn render_parse_round_trip(mut rng in seeded(), n in 1usize..4, d in 0u32..5) {
        let p = random_polynomial(&mut rng, n, d);
        let names = vars(n);
        let back = parse_polynomial(&p.render(&names), &names).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn arithmetic_matches_evaluation(mut rng in seeded(), n in 1usize..4) {
        let p = random_polynomial(&mut rng, n, 3);
        let q = random_polynomial(&mut rng, n, 3);
        let x = random_point(&mut rng, n, 2.0);
        let (pv, qv) = (p.evaluate(&x).unwrap(), q.evaluate(&x).unwrap());
        let scale = 1.0 + pv.abs() + qv.abs();
        prop_assert!((p.add(&q).unwrap().evaluate(&x).unwrap() - (pv + qv)).abs() <= 1e-12 * scale);
        prop_assert!((p.mul(&q).unwrap().evaluate(&x).unwrap() - pv * qv).abs() <= 1e-12 * scale * scale);
    }

    #[test]
    fn gradient_matches_central_differences(mut rng in seeded(), n in 1usize..4) {
        let p = random_polynomial(&mut rng, n, 4);
        let x = random_point(&mut rng, n, 2.0);
        let fd = central_difference(|z| p.evaluate(z).unwrap(), &x);
        for (g, f) in p.gradient().iter().zip(&fd) {
            let g = g.evaluate(&x).unwrap();
            prop_assert!((g - f).abs() <= 1e-6 * (1.0 + g.abs()), "{} vs {}", g, f);
        }
    }

    #[test]
    fn monomial_degrees_add(a in prop::collection::vec(0u32..5, 3), b in prop::collection::vec(0u32..5, 3)) {
        let pa = Polynomial::from_terms(3, [(Monomial::new(a.clone()), 2.0)]);
        let pb = Polynomial::from_terms(3, [(Monomial::new(b.clone()), -1.5)]);
        prop_assert_eq!(pa.mul(&pb).unwrap().degree(), pa.degree() + pb.degree());
    }

    #[test]
    fn gram_polynomials_match_gram(mut rng in seeded()) {
        let m = random_matrix(&mut rng);
        let x = random_point(&mut rng, m.nvars(), 1.5);
        let gram = m.gram(&x).unwrap();
        let polys = m.gram_polynomials();
        for i in 0..m.rows() {
            for j in 0..m.rows() {
                prop_assert_eq!(gram[(i, j)], gram[(j, i)]);
                prop_assert!((polys[i][j].evaluate(&x).unwrap() - gram[(i, j)]).abs() <= 1e-10);
            }
        }
        let eig = sym_eig(&gram).unwrap();
        prop_assert!(eig.values[0] >= -1e-10);
    }

    #[test]
    fn eigen_decomposition_invariants(mut rng in seeded(), p in 1usize..6) {
        let a = DenseMatrix::from_rows(&(0..p).map(|_| random_point(&mut rng, p, 1.0)).collect::<Vec<_>>());
        let mut s = DenseMatrix::from_rows(
            &(0..p).map(|i| (0..p).map(|j| a[(i, j)] + a[(j, i)]).collect()).collect::<Vec<_>>(),
        );
        s.symmetrize();
        let eig = sym_eig(&s).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let vtv = eig.vectors.transpose().matmul(&eig.vectors);
        for i in 0..p {
            for j in 0..p {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vtv[(i, j)] - want).abs() <= 1e-10);
            }
            let v = eig.vector(i);
            let sv = s.matvec(&v);
            let resid: Vec<f64> = sv.iter().zip(&v).map(|(a, b)| a - eig.values[i] * b).collect();
            prop_assert!(norm(&resid) <= 1e-9 * (1.0 + eig.values[i].abs()));
        }
    }

    #[test]
    fn singular_value_squares_to_lambda_min(mut rng in seeded()) {
        let m = random_matrix(&mut rng);
        let x = random_point(&mut rng, m.nvars(), 1.5);
        let s = PointSpectrum::compute(&m, &x).unwrap();
        prop_assert!((s.f * s.f - s.lambda_min).abs() <= 1e-10 * (1.0 + s.lambda_min));
    }

    #[test]
    fn diagonal_matrices_take_the_smallest_entry(mut rng in seeded(), p in 1usize..4) {
        let n = 2;
        let diag: Vec<Polynomial> = (0..p).map(|_| random_polynomial(&mut rng, n, 2)).collect();
        let grid = (0..p)
            .map(|i| (0..p).map(|j| if i == j { diag[i].clone() } else { Polynomial::zero(n) }).collect())
            .collect();
        let m = PolyMatrix::new(vars(n), grid).unwrap();
        let x = random_point(&mut rng, n, 1.5);
        let want = diag.iter().map(|d| d.evaluate(&x).unwrap().abs()).fold(f64::INFINITY, f64::min);
        prop_assert!((smallest_singular_value(&m, &x).unwrap() - want).abs() <= 1e-10);
    }

    #[test]
    fn transposition_preserves_sigma_min(mut rng in seeded()) {
        let n = 2;
        let p = 2;
        let grid: Vec<Vec<Polynomial>> = (0..p).map(|_| (0..p).map(|_| random_polynomial(&mut rng, n, 2)).collect()).collect();
        let transposed: Vec<Vec<Polynomial>> = (0..p).map(|j| (0..p).map(|i| grid[i][j].clone()).collect()).collect();
        let a = PolyMatrix::new(vars(n), grid).unwrap();
        let b = PolyMatrix::new(vars(n), transposed).unwrap();
        let x = random_point(&mut rng, n, 1.5);
        prop_assert!((smallest_singular_value(&a, &x).unwrap() - smallest_singular_value(&b, &x).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn minimizer_set_is_rayleigh_consistent(mut rng in seeded()) {
        let m = random_matrix(&mut rng);
        let setup = AuxiliarySetup::at_zero(&m);
        let x = random_point(&mut rng, m.nvars(), 1.0);
        let ft = setup.f_tilde(&x).unwrap();
        let set = setup.minimizer_set(&x, 1e-8).unwrap();
        prop_assert!(set.multiplicity >= 1);
        let y = set.embed(&unit(&mut rng, set.multiplicity));
        prop_assert!((setup.g_value(&x, &y).unwrap() - ft).abs() <= 1e-8 * (1.0 + ft.abs()));
    }

    #[test]
    fn slope_is_even_in_y(mut rng in seeded()) {
        let m = random_matrix(&mut rng);
        let setup = AuxiliarySetup::at_zero(&m);
        let x = random_point(&mut rng, m.nvars(), 1.0);
        let y = unit(&mut rng, m.rows());
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = norm(&setup.grad_x_g(&x, &y).unwrap());
        let b = norm(&setup.grad_x_g(&x, &neg).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn slope_witness_lies_in_the_minimizer_span(mut rng in seeded(), seed in any::<u64>()) {
        let m = random_matrix(&mut rng);
        let setup = AuxiliarySetup::at_zero(&m);
        let x = random_point(&mut rng, m.nvars(), 1.0);
        let opts = SlopeOptions::default().with_seed(seed);
        let est = setup.slope_f(&x, &opts).unwrap();
        prop_assert!(est.value >= 0.0);
        prop_assert!((norm(&est.witness_y) - 1.0).abs() <= 1e-8);
        let set = setup.minimizer_set(&x, opts.eig_tol).unwrap();
        let coords = set.basis.transpose().matvec(&est.witness_y);
        prop_assert!((norm(&coords) - 1.0).abs() <= 1e-8);
        let f = smallest_singular_value(&m, &x).unwrap();
        if f > opts.zero_tol {
            let grad = norm(&setup.grad_x_g(&x, &est.witness_y).unwrap());
            prop_assert!(close(est.value, grad / (2.0 * f), 1e-12));
        } else {
            prop_assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn exponent_values_round_correctly(n in 1u64..6, p in 1u64..4, d in 1u64..5) {
        for b in [
            gradient_exponent(n, p, d).unwrap(),
            gradient_exponent_at_zero(n, p, d).unwrap(),
            error_bound_exponent(n, p, d).unwrap(),
            separation_exponent(n, p, p + 1, d).unwrap(),
            global_separation_exponent(n, p, p, d).unwrap(),
            global_loja_exponent(n, p, d).unwrap(),
        ] {
            prop_assert!(b.is_lowest_terms());
            let oracle = BigRational::new(b.numerator().clone().into(), b.denominator().clone().into())
                .to_f64()
                .unwrap();
            let got = b.as_f64();
            let ulp = (oracle.to_bits() as i64 - got.to_bits() as i64).abs();
            prop_assert!(ulp <= 1, "{} : {} vs {}", b, got, oracle);
        }
        let g = gradient_exponent(n, p, d).unwrap().as_ratio();
        let z = gradient_exponent_at_zero(n, p, d).unwrap().as_ratio();
        prop_assert!(z < g);
        prop_assert!(g < BigRational::from_integer(1.into()));
        let e = error_bound_exponent(n, p, d).unwrap().as_f64();
        prop_assert!(e > 0.0 && e <= 1.0);
        prop_assert!(global_loja_exponent(n, p, d).unwrap().as_f64() >= 1.0);
    }

    #[test]
    fn separation_and_global_separation_are_reciprocal(n in 1u64..5, p1 in 1u64..4, p2 in 1u64..4, d in 1u64..4) {
        let a = separation_exponent(n, p1, p2, d).unwrap().as_ratio();
        let b = global_separation_exponent(n, p1, p2, d).unwrap().as_ratio();
        prop_assert_eq!(a.clone() * b, BigRational::from_integer(1.into()));
        prop_assert_eq!(a, separation_exponent(n, p2, p1, d).unwrap().as_ratio());
    }
}

#[test]
fn capital_r_is_monotone() {
    for n in 1..=8u64 {
        for d in 1..=8u64 {
            let r = capital_r(n, d).unwrap();
            if d >= 2 {
                assert!(capital_r(n + 1, d).unwrap() > r);
            }
            assert!(capital_r(n, d + 1).unwrap() >= r);
        }
    }
    assert_eq!(capital_r(8, 8).unwrap(), BigUint::from(8u32) * BigUint::from(21u32).pow(7));
}

#[test]
fn rational_literals_and_merging() {
    let names = vars(1);
    let p = parse_polynomial("3*x1*x1", &names).unwrap();
    let q = parse_polynomial("3*x1^2", &names).unwrap();
    let mut rng = rng(9);
    for _ in 0..5 {
        let x = random_point(&mut rng, 1, 3.0);
        assert_eq!(p.evaluate(&x).unwrap(), q.evaluate(&x).unwrap());
    }
    assert_eq!(parse_polynomial("1/4*x1", &names).unwrap().evaluate(&[2.0]).unwrap(), 0.5);
}

#[test]
fn sphere_oracle_never_beats_sigma_min() {
    let mut rng = rng(21);
    for _ in 0..20 {
        let m = random_matrix(&mut rng);
        let x = random_point(&mut rng, m.nvars(), 1.5);
        let f = smallest_singular_value(&m, &x).unwrap();
        let a = m.evaluate(&x).unwrap();
        for _ in 0..2000 {
            let y = unit(&mut rng, m.rows());
            assert!(left_product_norm(&a, &y) >= f - 1e-9);
        }
    }
}

#[test]
fn eigenspace_tolerance_semantics() {
    let s = DenseMatrix::from_rows(&[vec![1.0 + 1e-12, 0.0], vec![0.0, 1.0]]);
    assert_eq!(min_eigenspace(&s, 1e-8).unwrap().0.cols(), 2);
    let s = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 4.0]]);
    assert_eq!(min_eigenspace(&s, 1e-8).unwrap().0.cols(), 1);
}

#[test]
fn distance_oracle_on_closed_form_zero_sets() {
    let opts = DistanceOptions::default();
    let diag = PolyMatrix::load(data("diag.json")).unwrap();
    let roots = PolyMatrix::load(data("xxm1.json")).unwrap();
    let mut rng = rng(5);
    for i in 0..100u64 {
        let q = random_point(&mut rng, 2, 3.0);
        let d = verify::estimate_distance_to_zero_set(&diag, &q, &opts, i).unwrap();
        let want = q[0].abs().min(q[1].abs());
        assert!((d.value - want).abs() <= 1e-6 * want.max(1e-12), "{q:?}: {} vs {want}", d.value);
        let q = random_point(&mut rng, 1, 3.0);
        let d = verify::estimate_distance_to_zero_set(&roots, &q, &opts, i).unwrap();
        let want = q[0].abs().min((q[0] - 1.0).abs());
        assert!((d.value - want).abs() <= 1e-6 * want.max(1e-12), "{q:?}: {} vs {want}", d.value);
    }
}

#[test]
fn fitted_exponents_stay_below_the_bound() {
    let plan = SamplePlan::default().with_samples(10);
    for (file, d) in [("x.json", 1), ("x2.json", 2), ("x3.json", 3)] {
        let m = PolyMatrix::load(data(file)).unwrap();
        let fit = verify::fit_empirical_exponent(&m, &[0.0], &plan).unwrap();
        assert!(fit.alpha <= gradient_exponent_at_zero(1, 1, d).unwrap().as_f64() + 0.02);
    }
}
