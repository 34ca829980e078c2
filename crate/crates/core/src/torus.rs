//! Constant-coefficient model of the flat torus `ℝ^{2n}/ℤ^{2n}`: de Rham
//! classes, Lefschetz decomposition, and the first two cohomology groups of
//! the deformation complex of a Kähler-Einstein pair.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{binomial, KForm, ONE, ZERO};
use crate::linalg::{self, SubspaceBasis};
use crate::orbit::{kahler_einstein_system, span_e1_equations, span_e1_orbit, StructureKind};
use crate::structures::{complex_structure, CalibrationPair, ComplexHodge, Tolerances, TypeProjector};
use crate::tuple::{Slot, TupleLayout};

/// A subspace of a realified coefficient space, labelled by the group it
/// represents.
#[derive(Debug, Clone)]
pub struct CohomologySubspace {
    pub label: String,
    pub layout: TupleLayout,
    pub basis: SubspaceBasis,
}

impl CohomologySubspace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// Constant real `k`-forms, which represent `H^k(T^{2n}, ℝ)`.
pub fn derham(k: usize, n: usize) -> Result<CohomologySubspace> {
    if k > 2 * n {
        return Err(Error::DegreeOverflow { degree: k, max: 2 * n });
    }
    let layout = TupleLayout::new(2 * n, vec![Slot::Real(k)]);
    Ok(CohomologySubspace {
        label: format!("H^{k}_dR"),
        basis: SubspaceBasis::full(binomial(2 * n, k)),
        layout,
    })
}

/// One Lefschetz block `ωʳ ∧ P` with `P` primitive of type `(p,q)`.
#[derive(Debug, Clone)]
pub struct LefschetzComponent {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub primitive: KForm,
    pub form: KForm,
}

impl LefschetzComponent {
    /// `|P ∧ ω^{n−p−q+1}|`, zero for a primitive form.
    pub fn primitivity_residual(&self, kahler: &KForm) -> f64 {
        let n = kahler.dim() / 2;
        let j = self.p + self.q;
        match kahler.power(n + 1 - j).and_then(|l| self.primitive.wedge(&l)) {
            Ok(f) => f.max_abs(),
            Err(Error::DegreeOverflow { .. }) => 0.0,
            Err(_) => f64::INFINITY,
        }
    }
}

fn wedge_power_matrix(kahler: &KForm, j: usize, s: usize) -> Option<DMatrix<Complex64>> {
    let dim = kahler.dim();
    if j + 2 * s > dim {
        return None;
    }
    let l = kahler.power(s).expect("degree checked");
    let size = binomial(dim, j);
    let rows = binomial(dim, j + 2 * s);
    let mut m = DMatrix::from_element(rows, size, ZERO);
    for t in 0..size {
        let mut e = KForm::zero(dim, j);
        e.coeffs_mut()[t] = ONE;
        let w = e.wedge(&l).expect("degree checked");
        for (r, c) in w.coeffs().iter().enumerate() {
            m[(r, t)] = *c;
        }
    }
    Some(m)
}

/// Splits `a` into blocks `ωʳ ∧ P^{p,q}` with `P^{p,q}` primitive.
pub fn lefschetz_decompose(pair: &CalibrationPair, a: &KForm, tol: &Tolerances) -> Result<Vec<LefschetzComponent>> {
    let n = pair.n();
    let dim = pair.dim();
    let k = a.degree();
    if a.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: a.dim() });
    }
    let cs = complex_structure(pair.volume(), tol)?;
    let w = pair.kahler();

    // (p, q, r, columns of ωʳ ∧ basis(P^{p,q}), basis(P^{p,q}))
    type Block = (usize, usize, usize, DMatrix<Complex64>, DMatrix<Complex64>);
    let mut blocks: Vec<Block> = Vec::new();
    for r in 0..=k / 2 {
        let j = k - 2 * r;
        if j > n {
            continue;
        }
        let size = binomial(dim, j);
        let kernel = match wedge_power_matrix(w, j, n + 1 - j) {
            Some(m) => linalg::complex_nullspace(&m, tol.rank_threshold),
            None => DMatrix::<Complex64>::identity(size, size),
        };
        let proj = TypeProjector::new(&cs, j);
        for p in proj.types().collect::<Vec<_>>() {
            let prim = linalg::complex_column_space(&(proj.matrix(p).expect("listed") * &kernel), tol.rank_threshold);
            if prim.ncols() == 0 {
                continue;
            }
            let lifted = match r {
                0 => prim.clone(),
                _ => wedge_power_matrix(w, j, r).expect("degree k ≤ 2n") * &prim,
            };
            blocks.push((p, j - p, r, lifted, prim));
        }
    }
    let total: usize = blocks.iter().map(|b| b.3.ncols()).sum();
    let rows = binomial(dim, k);
    let mut m = DMatrix::from_element(rows, total, ZERO);
    let mut col = 0;
    for b in &blocks {
        m.columns_mut(col, b.3.ncols()).copy_from(&b.3);
        col += b.3.ncols();
    }
    let rhs = DVector::from_column_slice(a.coeffs());
    let coeffs = m
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Inconsistent(e.to_string()))?;
    let mut out = Vec::with_capacity(blocks.len());
    let mut col = 0;
    for (p, q, r, lifted, prim) in blocks {
        let c = coeffs.rows(col, lifted.ncols()).into_owned();
        col += lifted.ncols();
        let form = KForm::new(dim, k, (&lifted * &c).iter().copied().collect())?;
        let primitive = KForm::new(dim, k - 2 * r, (&prim * &c).iter().copied().collect())?;
        out.push(LefschetzComponent { p, q, r, primitive, form });
    }
    Ok(out)
}

/// Nullspace of the linear equations on `(α, β) ∈ ∧ⁿℂ ⊕ ∧²ℝ`, with no
/// bidegree restriction on `α`.
pub fn h1_by_equations(pair: &CalibrationPair, tol: &Tolerances) -> Result<CohomologySubspace> {
    let sys = kahler_einstein_system(pair, None)?;
    Ok(CohomologySubspace {
        label: "H^1 (equations)".into(),
        layout: StructureKind::KahlerEinstein.layout(pair.n()),
        basis: SubspaceBasis::kernel(&sys, tol.rank_threshold),
    })
}

/// The orbit tangent space `E¹` as the constant-form model of `H¹`.
pub fn h1_orbit_model(pair: &CalibrationPair, tol: &Tolerances) -> Result<CohomologySubspace> {
    Ok(CohomologySubspace {
        label: "H^1 (orbit)".into(),
        layout: StructureKind::KahlerEinstein.layout(pair.n()),
        basis: span_e1_orbit(pair, StructureKind::KahlerEinstein, tol.rank_threshold)?,
    })
}

/// Layout `∧^{n−1}ℂ ⊕ ∧¹ℝ` of `H⁰`.
pub fn h0_layout(n: usize) -> TupleLayout {
    TupleLayout::new(2 * n, vec![Slot::Complex(n - 1), Slot::Real(1)])
}

/// `{(a, b) : a = ⋆_ℂ (b^{1,0})}`.
pub fn h0_model(pair: &CalibrationPair, tol: &Tolerances) -> Result<CohomologySubspace> {
    let hodge = ComplexHodge::new(pair, tol)?;
    h0_model_with(&hodge, pair, tol)
}

pub fn h0_model_with(hodge: &ComplexHodge, pair: &CalibrationPair, tol: &Tolerances) -> Result<CohomologySubspace> {
    let layout = h0_layout(pair.n());
    let proj = TypeProjector::new(hodge.structure(), 1);
    let rows = 2 * binomial(pair.dim(), pair.n() - 1);
    let id = DMatrix::identity(layout.real_dim(), layout.real_dim());
    let m = layout.map_matrix(&id, rows, |forms| {
        let d = &forms[0] - &hodge.apply(&proj.project(&forms[1], 1))?;
        let mut v: Vec<f64> = d.coeffs().iter().map(|c| c.re).collect();
        v.extend(d.coeffs().iter().map(|c| c.im));
        Ok(DVector::from_vec(v))
    })?;
    Ok(CohomologySubspace {
        label: "H^0".into(),
        layout,
        basis: SubspaceBasis::kernel(&m, tol.rank_threshold),
    })
}

/// Rank of the projection of a subspace of `∧ⁿℂ ⊕ ∧²ℝ` onto its `∧²`
/// coordinates.
pub fn beta_projection_rank(h1: &SubspaceBasis, n: usize, threshold: f64) -> usize {
    let layout = StructureKind::KahlerEinstein.layout(n);
    let off = layout.offset(1);
    let len = layout.real_dim() - off;
    linalg::rank(&h1.basis().rows(off, len).into_owned(), threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KahlerProjection {
    pub rank: usize,
    /// Rank of the `∧²` projection of the solution space of the linear
    /// equations (with bidegree restriction).
    pub attainable: usize,
    pub h2_dim: usize,
    pub surjective: bool,
}

/// Whether `H¹ → H²`, `(α, β) ↦ β`, reaches every attainable class.
pub fn kahler_projection_surjective(pair: &CalibrationPair, h1: &CohomologySubspace, tol: &Tolerances) -> Result<KahlerProjection> {
    let n = pair.n();
    let rank = beta_projection_rank(&h1.basis, n, tol.rank_threshold);
    let attainable = beta_projection_rank(&span_e1_equations(pair, tol)?, n, tol.rank_threshold);
    Ok(KahlerProjection { rank, attainable, h2_dim: binomial(2 * n, 2), surjective: rank == attainable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{dz, GlElement, I};
    use crate::orbit::ke_vector;
    use crate::structures::standard_volume;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn derham_dimensions() {
        assert_eq!(derham(1, 1).unwrap().dim(), 2);
        assert_eq!(derham(2, 2).unwrap().dim(), 6);
        assert_eq!(derham(3, 3).unwrap().dim(), 20);
        assert!(derham(5, 2).is_err());
    }

    #[test]
    fn lefschetz_of_kahler_form() {
        let pair = CalibrationPair::standard(2);
        let parts = lefschetz_decompose(&pair, pair.kahler(), &tol()).unwrap();
        assert_eq!(parts.len(), 4);
        for c in &parts {
            if c.r == 1 {
                assert!((&c.form - pair.kahler()).max_abs() < 1e-12);
                assert!((c.primitive.coeffs()[0] - ONE).norm() < 1e-12);
            } else {
                assert!(c.form.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn anti_self_dual_two_form_is_primitive() {
        let pair = CalibrationPair::standard(2);
        let b = KForm::from_real(4, 2, &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
        // index order: 01 02 03 12 13 23 → dx1∧dy1 = 02, dx2∧dy2 = 13
        assert!(b.wedge(pair.kahler()).unwrap().max_abs() < 1e-15);
        let parts = lefschetz_decompose(&pair, &b, &tol()).unwrap();
        let total: f64 = parts.iter().filter(|c| c.r > 0).map(|c| c.form.max_abs()).sum();
        assert!(total < 1e-12);
    }

    #[test]
    fn e1_alpha_has_three_blocks() {
        let n = 3;
        let pair = CalibrationPair::standard(n);
        // (n−1,1) form: dz1∧dz2∧dz̄3 + dz1∧dz3∧dz̄1
        let a = &dz(n, 0).wedge(&dz(n, 1)).unwrap().wedge(&dz(n, 2).conjugate()).unwrap()
            + &dz(n, 0).wedge(&dz(n, 2)).unwrap().wedge(&dz(n, 0).conjugate()).unwrap();
        let a = &a + &standard_volume(n).scale(I);
        let parts = lefschetz_decompose(&pair, &a, &tol()).unwrap();
        let mut live: Vec<_> = parts.iter().filter(|c| c.form.max_abs() > 1e-10).map(|c| (c.p, c.q, c.r)).collect();
        live.sort();
        assert_eq!(live, vec![(1, 0, 1), (2, 1, 0), (3, 0, 0)]);
    }

    #[test]
    fn equation_model_dimensions_and_members() {
        let expect = [(1, 4), (2, 15), (3, 42)];
        for (n, d) in expect {
            let pair = CalibrationPair::standard(n);
            let h = h1_by_equations(&pair, &tol()).unwrap();
            assert_eq!(h.dim(), d, "n={n}");
            let orbit = h1_orbit_model(&pair, &tol()).unwrap();
            assert!(h.basis.contains_residual(&orbit.basis) < 1e-8);
            let zero = KForm::zero(2 * n, 2);
            assert!(h.basis.distance(&ke_vector(&pair.volume().scale(I), &zero)) < 1e-10);
            assert!(h.basis.distance(&ke_vector(pair.volume(), &zero)) > 1e-3);
        }
    }

    #[test]
    fn h0_has_dimension_2n() {
        for n in 1..=3 {
            let pair = CalibrationPair::standard(n);
            assert_eq!(h0_model(&pair, &tol()).unwrap().dim(), 2 * n);
        }
    }

    #[test]
    fn kahler_projection() {
        for (n, rank) in [(1, 1), (2, 6)] {
            let pair = CalibrationPair::standard(n);
            let h1 = h1_orbit_model(&pair, &tol()).unwrap();
            let kp = kahler_projection_surjective(&pair, &h1, &tol()).unwrap();
            assert_eq!(kp.rank, rank);
            assert!(kp.surjective);
        }
        let pair = CalibrationPair::standard(2);
        let single = ke_vector(&pair.volume().scale(I), pair.kahler());
        let s = SubspaceBasis::span_vectors(single.len(), &[single], 1e-8);
        assert_eq!(beta_projection_rank(&s, 2, 1e-8), 1);
    }

    #[test]
    fn orbit_model_stable_under_unimodular_change() {
        let pair = CalibrationPair::standard(2);
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 1)] = 1.0;
        m[(2, 3)] = -2.0;
        m[(3, 0)] = 1.0;
        let g = GlElement::new(m).unwrap();
        let moved = pair.pullback(&g).unwrap();
        assert_eq!(h1_orbit_model(&moved, &tol()).unwrap().dim(), 13);
        assert_eq!(h1_by_equations(&moved, &tol()).unwrap().dim(), 15);
        assert_eq!(h0_model(&moved, &tol()).unwrap().dim(), 4);
    }
}
