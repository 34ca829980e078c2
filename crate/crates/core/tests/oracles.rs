//! Independent oracles: each expected value is produced by a route that does
//! not go through the routine under test (determinants instead of shuffles,
//! matrix exponentials instead of derivations, exact rational elimination
//! instead of SVD, Gram eigenvalues instead of singular values).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_rational::Ratio;

use slagkit::exterior::{gl_act, act, binomial, dz, dzbar, hodge_star, GlElement, KForm, Metric, MultiIndex, Vector};
use slagkit::orbit::{orbit_tangent_matrix, span_e1_orbit, StructureKind};
use slagkit::sampling;
use slagkit::structures::{
    check_calabi_yau, kernel_of_form, monge_ampere_constant, standard_kahler, standard_volume, CalibrationPair,
    ComplexStructure, Tolerances, TypeProjector,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn covector(rng: &mut sampling::SeededRng, dim: usize) -> KForm {
    let re = sampling::normal_vec(rng, dim);
    let im = sampling::normal_vec(rng, dim);
    KForm::new(dim, 1, re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect()).unwrap()
}

fn complex_det(m: DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 0 { Complex64::new(1.0, 0.0) } else { m.determinant() }
}

#[test]
fn wedge_of_covectors_matches_determinant_minors() {
    let mut rng = sampling::rng(11);
    for (dim, k) in [(2, 2), (4, 2), (4, 3), (6, 3), (6, 4)] {
        let alphas: Vec<KForm> = (0..k).map(|_| covector(&mut rng, dim)).collect();
        let w = alphas[1..].iter().fold(alphas[0].clone(), |acc, a| acc.wedge(a).unwrap());
        for idx in MultiIndex::enumerate(dim, k) {
            let m = DMatrix::from_fn(k, k, |i, j| alphas[i].coeffs()[idx.indices()[j]]);
            assert!((w.coeff(&idx) - complex_det(m)).norm() < 1e-12, "dim {dim} k {k} {:?}", idx.indices());
        }
        // Evaluation on vectors: det[α_i(v_j)].
        let vs: Vec<Vector> = (0..k).map(|_| sampling::real_vector(&mut rng, dim)).collect();
        let m = DMatrix::from_fn(k, k, |i, j| {
            alphas[i].coeffs().iter().zip(vs[j].coords()).map(|(a, v)| a * v).sum::<Complex64>()
        });
        assert!((w.evaluate(&vs).unwrap() - complex_det(m)).norm() < 1e-11);
    }
}

fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut term = DMatrix::identity(a.nrows(), a.ncols());
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * a / k as f64;
        sum += &term;
    }
    sum
}

#[test]
fn gl_act_is_the_derivative_of_the_group_action() {
    let mut rng = sampling::rng(12);
    let dim = 4;
    let a = standard_volume(2);
    let b = KForm::from_real(dim, 3, &sampling::normal_vec(&mut rng, binomial(dim, 3))).unwrap();
    let t = 1e-5;
    for _ in 0..5 {
        let xi = sampling::normal_matrix(&mut rng, dim);
        let plus = GlElement::new(expm(&(&xi * t))).unwrap();
        let minus = GlElement::new(expm(&(&xi * -t))).unwrap();
        for f in [&a, &b] {
            let fd = (&act(&plus, f).unwrap() - &act(&minus, f).unwrap()).scale(Complex64::new(0.5 / t, 0.0));
            let exact = gl_act(&GlElement::new(xi.clone()).unwrap(), f).unwrap();
            assert!((&fd - &exact).max_abs() < 1e-8 * exact.max_abs().max(1.0));
        }
    }
    // The identity acts on k-forms by −k.
    let id = gl_act(&GlElement::identity(dim), &b).unwrap();
    assert!((&id + &b.scale(Complex64::new(3.0, 0.0))).max_abs() < 1e-14);
}

/// `⟨α, β⟩_g` from minors of the inverse Gram matrix.
fn gram_inner(g_inv: &DMatrix<f64>, a: &KForm, b: &KForm) -> f64 {
    let idx = MultiIndex::enumerate(a.dim(), a.degree());
    let mut s = 0.0;
    for (i, ii) in idx.iter().enumerate() {
        for (j, jj) in idx.iter().enumerate() {
            let k = ii.degree();
            let minor = DMatrix::from_fn(k, k, |r, c| g_inv[(ii.indices()[r], jj.indices()[c])]);
            let det = if k == 0 { 1.0 } else { minor.determinant() };
            s += a.coeffs()[i].re * b.coeffs()[j].re * det;
        }
    }
    s
}

#[test]
fn hodge_star_matches_brute_force_inner_product() {
    let mut rng = sampling::rng(13);
    for dim in [2, 4, 6] {
        let q = sampling::normal_matrix(&mut rng, dim);
        let gram = &q * q.transpose() + DMatrix::identity(dim, dim);
        let g = Metric::new(gram.clone()).unwrap();
        let g_inv = gram.clone().try_inverse().unwrap();
        let vol_coeff = gram.determinant().sqrt();
        for k in 0..=dim {
            let a = KForm::from_real(dim, k, &sampling::normal_vec(&mut rng, binomial(dim, k))).unwrap();
            let b = KForm::from_real(dim, k, &sampling::normal_vec(&mut rng, binomial(dim, k))).unwrap();
            let lhs = a.wedge(&hodge_star(&g, 1.0, &b).unwrap()).unwrap().coeffs()[0].re;
            let rhs = gram_inner(&g_inv, &a, &b) * vol_coeff;
            assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0), "dim {dim} k {k}: {lhs} vs {rhs}");
            // ⋆⋆ = (−1)^{k(d−k)} in Riemannian signature.
            let twice = hodge_star(&g, 1.0, &hodge_star(&g, 1.0, &a).unwrap()).unwrap();
            let sign = if (k * (dim - k)) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((&twice - &a.scale(Complex64::new(sign, 0.0))).max_abs() < 1e-10 * a.max_abs().max(1.0));
        }
    }
}

#[test]
fn type_projector_agrees_with_explicit_bidegree_basis() {
    let n = 2;
    let cs = ComplexStructure::standard(n);
    let xi = cs.as_gl();
    let proj = TypeProjector::new(&cs, 2);
    let pure = [
        (dz(n, 0).wedge(&dz(n, 1)).unwrap(), 2),
        (dz(n, 0).wedge(&dzbar(n, 1)).unwrap(), 1),
        (dzbar(n, 0).wedge(&dz(n, 0)).unwrap(), 1),
        (dzbar(n, 0).wedge(&dzbar(n, 1)).unwrap(), 0),
    ];
    for (form, p) in &pure {
        let q = 2 - p;
        for r in 0..=2 {
            let piece = proj.project(form, r);
            let expected = if r == *p { form.clone() } else { KForm::zero(2 * n, 2) };
            assert!((&piece - &expected).max_abs() < 1e-12, "type ({p},{q}) projected to {r}");
        }
        // Eigenvector check: the derivation of I acts by −i(p−q).
        let d = gl_act(&xi, form).unwrap();
        let lambda = -I * (*p as f64 - q as f64);
        assert!((&d - &form.scale(lambda)).max_abs() < 1e-12);
    }
}

#[test]
fn monge_ampere_constant_matches_hand_values() {
    let expected = [Complex64::new(0.0, -2.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, -4.0 / 3.0)];
    for (n, c) in (1..=3).zip(expected) {
        assert!((monge_ampere_constant(n) - c).norm() < 1e-15, "n={n}");
        // Ω∧Ω̄ = c_n ωⁿ, with both sides expanded independently.
        let om = standard_volume(n);
        let lhs = om.wedge(&om.conjugate()).unwrap();
        let rhs = standard_kahler(n).power(n).unwrap().scale(c);
        assert!((&lhs - &rhs).max_abs() < 1e-13, "n={n}");
    }
    // dz∧dz̄ = (2/i) dx∧dy.
    let w = dz(1, 0).wedge(&dzbar(1, 0)).unwrap();
    assert!((w.coeffs()[0] - Complex64::new(2.0, 0.0) / I).norm() == 0.0);
}

type Q = Ratio<i64>;

fn exact_rank(mut m: Vec<Vec<Q>>) -> usize {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != Q::from_integer(0)) else { continue };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && m[r][c] != Q::from_integer(0) {
                let f = m[r][c] / m[rank][c];
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x -= f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Ω_ε = (dx₁ + iε dy₁) ∧ (dx₂ + i dy₂), as Gaussian rationals.
/// Returns (real rank of v ↦ i_vΩ on ℝ⁴, complex rank of the same map on ℂ⁴).
fn contraction_ranks(eps: Q) -> (usize, usize) {
    let zero = Q::from_integer(0);
    let one = Q::from_integer(1);
    // (re, im) of α and β in coordinates x1, x2, y1, y2.
    let alpha = [(one, zero), (zero, zero), (zero, eps), (zero, zero)];
    let beta = [(zero, zero), (one, zero), (zero, zero), (zero, one)];
    let mul = |a: (Q, Q), b: (Q, Q)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    // Column j: i_{e_j}(α∧β) = α_j β − β_j α, a complex 4-vector.
    let col = |j: usize| -> Vec<(Q, Q)> {
        (0..4)
            .map(|t| {
                let p = mul(alpha[j], beta[t]);
                let q = mul(beta[j], alpha[t]);
                (p.0 - q.0, p.1 - q.1)
            })
            .collect()
    };
    let cols: Vec<Vec<(Q, Q)>> = (0..4).map(col).collect();
    let real: Vec<Vec<Q>> = (0..8)
        .map(|r| (0..4).map(|j| if r < 4 { cols[j][r].0 } else { cols[j][r - 4].1 }).collect())
        .collect();
    // Realification [[A, −B], [B, A]] of the complex matrix A + iB.
    let cplx: Vec<Vec<Q>> = (0..8)
        .map(|r| {
            (0..8)
                .map(|c| {
                    let (t, j) = (r % 4, c % 4);
                    let (a, b) = cols[j][t];
                    match (r < 4, c < 4) {
                        (true, true) | (false, false) => a,
                        (true, false) => -b,
                        (false, true) => b,
                    }
                })
                .collect()
        })
        .collect();
    (exact_rank(real), exact_rank(cplx) / 2)
}

#[test]
fn exact_rational_kernel_oracle_for_calabi_yau_clause() {
    let tol = Tolerances::default();
    for (num, den, transverse) in [(1, 2, true), (1, 1, true), (0, 1, false)] {
        let eps = Q::new(num, den);
        let (real_rank, complex_rank) = contraction_ranks(eps);
        assert_eq!(complex_rank, 2, "complex kernel has dimension n");
        assert_eq!(real_rank == 4, transverse, "no real kernel vector iff transverse");

        let e = num as f64 / den as f64;
        let a = KForm::new(4, 1, vec![1.0.into(), 0.0.into(), Complex64::new(0.0, e), 0.0.into()]).unwrap();
        let b = KForm::new(4, 1, vec![0.0.into(), 1.0.into(), 0.0.into(), I]).unwrap();
        let omega = a.wedge(&b).unwrap();
        assert_eq!(kernel_of_form(&omega, tol.rank_threshold).unwrap().basis.ncols(), 4 - complex_rank);
        assert_eq!(check_calabi_yau(&omega, &tol).passed(), transverse, "ε = {num}/{den}");
    }
}

fn gram_rank(a: &DMatrix<f64>, threshold: f64) -> usize {
    let eig = SymmetricEigen::new(a.transpose() * a);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).sqrt();
    eig.eigenvalues.iter().filter(|&&l| l.max(0.0).sqrt() > threshold * top.max(1.0)).count()
}

#[test]
fn orbit_dimensions_agree_with_gram_eigenvalue_rank() {
    for n in 1..=3 {
        let pair = CalibrationPair::standard(n);
        for (kind, expected) in [(StructureKind::KahlerEinstein, 3 * n * n + 1), (StructureKind::CalabiYau, 2 * n * n + 2)] {
            let a = orbit_tangent_matrix(&pair, kind).unwrap();
            assert_eq!(gram_rank(&a, 1e-6), expected, "n={n} {kind:?}");
            assert_eq!(span_e1_orbit(&pair, kind, 1e-8).unwrap().dim(), expected);
        }
    }
}
