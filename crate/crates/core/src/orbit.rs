//! Orbit-attached spaces `E⁰ → E¹ → E²` of a Calabi-Yau or Kähler-Einstein
//! structure, symbol exactness, the isotropy algebra, and `E¹` cut out by
//! explicit linear equations.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{gl_act, GlElement, KForm, Vector};
use crate::linalg::{self, SubspaceBasis};
use crate::sampling;
use crate::structures::{
    complex_structure, metric_from, monge_ampere_constant, CalibrationPair, ComplexStructure,
    Tolerances, TypeProjector,
};
use crate::tuple::{Slot, TupleLayout};

/// Which forms make up the reference tuple `Φ⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    /// `Φ = Ω`.
    CalabiYau,
    /// `Φ = (Ω, ω)`.
    KahlerEinstein,
}

impl StructureKind {
    pub fn forms(self, pair: &CalibrationPair) -> Vec<KForm> {
        match self {
            StructureKind::CalabiYau => vec![pair.volume().clone()],
            StructureKind::KahlerEinstein => vec![pair.volume().clone(), pair.kahler().clone()],
        }
    }

    /// Layout of `E¹`: `∧ⁿℂ (⊕ ∧²ℝ)`.
    pub fn layout(self, n: usize) -> TupleLayout {
        let mut slots = vec![Slot::Complex(n)];
        if self == StructureKind::KahlerEinstein {
            slots.push(Slot::Real(2));
        }
        TupleLayout::new(2 * n, slots)
    }
}

/// Columns `ρ_ξ Φ` for the elementary matrices `ξ = E_{ij}`, column index
/// `i·2n + j`.
pub fn orbit_tangent_matrix(pair: &CalibrationPair, kind: StructureKind) -> Result<DMatrix<f64>> {
    let dim = pair.dim();
    let layout = kind.layout(pair.n());
    let forms = kind.forms(pair);
    let mut m = DMatrix::zeros(layout.real_dim(), dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let xi = GlElement::elementary(dim, i, j);
            let acted = forms.iter().map(|f| gl_act(&xi, f)).collect::<Result<Vec<_>>>()?;
            m.set_column(i * dim + j, &layout.flatten(&acted));
        }
    }
    Ok(m)
}

/// `E⁰ = {i_v Φ : v ∈ V}`.
pub fn span_e0(pair: &CalibrationPair, kind: StructureKind, threshold: f64) -> Result<SubspaceBasis> {
    let dim = pair.dim();
    let layout = kind.layout(pair.n()).lowered();
    let forms = kind.forms(pair);
    let cols = (0..dim)
        .map(|j| {
            let v = Vector::basis(dim, j);
            let c = forms.iter().map(|f| f.interior(&v)).collect::<Result<Vec<_>>>()?;
            Ok(layout.flatten(&c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubspaceBasis::span_vectors(layout.real_dim(), &cols, threshold))
}

/// `E¹ = {ρ_ξ Φ : ξ ∈ gl(V)}`.
pub fn span_e1_orbit(pair: &CalibrationPair, kind: StructureKind, threshold: f64) -> Result<SubspaceBasis> {
    Ok(SubspaceBasis::span(&orbit_tangent_matrix(pair, kind)?, threshold))
}

/// `E¹` spanned by `(θ ∧ i_vΩ, θ ∧ i_vω)` over covectors `θ` and vectors `v`.
pub fn span_e1_contractions(pair: &CalibrationPair, kind: StructureKind, threshold: f64) -> Result<SubspaceBasis> {
    let dim = pair.dim();
    let layout = kind.layout(pair.n());
    let forms = kind.forms(pair);
    let mut cols = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        let theta = KForm::coordinate(dim, a);
        for b in 0..dim {
            let v = Vector::basis(dim, b);
            let w = forms
                .iter()
                .map(|f| theta.wedge(&f.interior(&v)?))
                .collect::<Result<Vec<_>>>()?;
            cols.push(layout.flatten(&w));
        }
    }
    Ok(SubspaceBasis::span_vectors(layout.real_dim(), &cols, threshold))
}

/// `E² = span{θ ∧ a : θ ∈ V*, a ∈ E¹}`, slotwise.
pub fn span_e2(layout: &TupleLayout, e1: &SubspaceBasis, threshold: f64) -> Result<SubspaceBasis> {
    let dim = layout.dim();
    let rows = layout.raised().real_dim();
    let mut m = DMatrix::zeros(rows, dim * e1.dim());
    for a in 0..dim {
        let w = layout.wedge_matrix(&KForm::coordinate(dim, a), e1.basis())?;
        m.columns_mut(a * e1.dim(), e1.dim()).copy_from(&w);
    }
    Ok(SubspaceBasis::span(&m, threshold))
}

/// The realified linear system
/// `α∧ω + Ω∧β = 0`, `α∧Ω̄ + Ω∧ᾱ = n c_n β∧ω^{n−1}` on `(α, β) ∈ ∧ⁿℂ ⊕ ∧²ℝ`,
/// optionally with the bidegree constraint `α ∈ ∧^{n,0} ⊕ ∧^{n−1,1}`.
pub fn kahler_einstein_system(pair: &CalibrationPair, bidegree: Option<&ComplexStructure>) -> Result<DMatrix<f64>> {
    let n = pair.n();
    let dim = pair.dim();
    let layout = StructureKind::KahlerEinstein.layout(n);
    let om = pair.volume();
    let om_bar = om.conjugate();
    let w = pair.kahler();
    let w_pow = w.power(n - 1)?;
    let coeff = monge_ampere_constant(n) * (n as f64);
    let type_mats = bidegree.map(|cs| {
        let proj = TypeProjector::new(cs, n);
        let mut m = proj.matrix(n).expect("(n,0) exists").clone();
        if n >= 1 {
            if let Some(p) = proj.matrix(n - 1) {
                m += p;
            }
        }
        m
    });
    let residual = |forms: &[KForm]| -> Result<DVector<f64>> {
        let (a, b) = (&forms[0], &forms[1]);
        let mut parts: Vec<f64> = Vec::new();
        if n + 2 <= dim {
            let e1 = &a.wedge(w)? + &om.wedge(b)?;
            parts.extend(e1.coeffs().iter().map(|c| c.re));
            parts.extend(e1.coeffs().iter().map(|c| c.im));
        }
        let e2 = &(&a.wedge(&om_bar)? + &om.wedge(&a.conjugate())?) - &b.wedge(&w_pow)?.scale(coeff);
        parts.extend(e2.coeffs().iter().map(|c| c.re));
        parts.extend(e2.coeffs().iter().map(|c| c.im));
        if let Some(p) = &type_mats {
            let x = DVector::from_column_slice(a.coeffs());
            let r = &x - p * &x;
            parts.extend(r.iter().map(|c| c.re));
            parts.extend(r.iter().map(|c| c.im));
        }
        Ok(DVector::from_vec(parts))
    };
    let probe = residual(&layout.unflatten(&vec![0.0; layout.real_dim()])?)?;
    let id = DMatrix::identity(layout.real_dim(), layout.real_dim());
    layout.map_matrix(&id, probe.len(), residual)
}

/// `E¹` for a Kähler-Einstein pair as the nullspace of the linear equations,
/// with `α` restricted to bidegrees `(n,0) + (n−1,1)`.
pub fn span_e1_equations(pair: &CalibrationPair, tol: &Tolerances) -> Result<SubspaceBasis> {
    let cs = complex_structure(pair.volume(), tol)?;
    Ok(SubspaceBasis::kernel(&kahler_einstein_system(pair, Some(&cs))?, tol.rank_threshold))
}

#[derive(Debug, Clone)]
pub struct IsotropyAlgebra {
    /// Subspace of `gl(2n)` flattened row-major.
    pub basis: SubspaceBasis,
    /// Largest `|ξᵀg + gξ|` over the basis, when a metric is available.
    pub orthogonality_residual: Option<f64>,
}

impl IsotropyAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn element(&self, k: usize) -> DMatrix<f64> {
        let d = (self.basis.ambient_dim() as f64).sqrt().round() as usize;
        let col = self.basis.column(k);
        DMatrix::from_fn(d, d, |i, j| col[i * d + j])
    }

    pub fn is_metrical(&self, tol: f64) -> Option<bool> {
        self.orthogonality_residual.map(|r| r <= tol)
    }
}

/// `𝔥 = {ξ : ρ_ξ Φ = 0}`; for Kähler-Einstein pairs also tests
/// `ξᵀg + gξ = 0` for the induced metric.
pub fn isotropy_algebra(pair: &CalibrationPair, kind: StructureKind, tol: &Tolerances) -> Result<IsotropyAlgebra> {
    let m = orbit_tangent_matrix(pair, kind)?;
    let basis = SubspaceBasis::kernel(&m, tol.rank_threshold);
    let mut alg = IsotropyAlgebra { basis, orthogonality_residual: None };
    if kind == StructureKind::KahlerEinstein {
        let g = metric_from(pair, tol)?.metric;
        let g = g.gram();
        let r = (0..alg.dim())
            .map(|k| {
                let xi = alg.element(k);
                (xi.transpose() * g + g * &xi).amax()
            })
            .fold(0.0, f64::max);
        alg.orthogonality_residual = Some(r);
    }
    Ok(alg)
}

/// `E⁰, E¹, E²` with their layouts.
#[derive(Debug, Clone)]
pub struct OrbitSpaces {
    pub kind: StructureKind,
    pub layout: TupleLayout,
    pub e0: SubspaceBasis,
    pub e1: SubspaceBasis,
    pub e2: SubspaceBasis,
}

impl OrbitSpaces {
    pub fn build(pair: &CalibrationPair, kind: StructureKind, threshold: f64) -> Result<Self> {
        let layout = kind.layout(pair.n());
        let e0 = span_e0(pair, kind, threshold)?;
        let e1 = span_e1_orbit(pair, kind, threshold)?;
        let e2 = span_e2(&layout, &e1, threshold)?;
        Ok(Self { kind, layout, e0, e1, e2 })
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.e0.dim(), self.e1.dim(), self.e2.dim()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub u: Vec<f64>,
    pub dim_ker: usize,
    pub dim_image: usize,
    /// Largest of: `u∧E⁰ ⊄ E¹`, `u∧E¹ ⊄ E²`, `u∧(u∧E⁰) ≠ 0`.
    pub containment_residual: f64,
    pub exact: bool,
}

/// Exactness of `E⁰ →u∧ E¹ →u∧ E²` at `E¹`: the kernel of the second map
/// has the dimension of the image of the first, which it contains.
pub fn symbol_exactness(spaces: &OrbitSpaces, u: &Vector, tol: &Tolerances) -> Result<ExactnessReport> {
    if u.is_zero() {
        return Err(Error::ZeroCovector);
    }
    let theta = u.as_covector();
    let lower = spaces.layout.lowered();
    let a1 = lower.wedge_matrix(&theta, spaces.e0.basis())?;
    let a1_coords = spaces.e1.basis().transpose() * &a1;
    let a2 = spaces.layout.wedge_matrix(&theta, spaces.e1.basis())?;
    let dim_image = linalg::rank(&a1_coords, tol.rank_threshold);
    let dim_ker = spaces.e1.dim() - linalg::rank(&a2, tol.rank_threshold);
    let max_col = |m: &DMatrix<f64>| (0..m.ncols()).map(|j| m.column(j).norm()).fold(0.0, f64::max);
    let residual = spaces
        .e1
        .containment_residual(&a1)
        .max(spaces.e2.containment_residual(&a2))
        .max(max_col(&(&a2 * &a1_coords)));
    Ok(ExactnessReport {
        u: u.re(),
        dim_ker,
        dim_image,
        containment_residual: residual,
        exact: dim_ker == dim_image && residual <= tol.residual_tolerance,
    })
}

/// The `2n` coordinate directions followed by `samples` seeded unit vectors.
pub fn probe_directions(dim: usize, samples: usize, seed: u64) -> Vec<Vector> {
    let mut rng = sampling::rng(seed);
    let mut out: Vec<Vector> = (0..dim).map(|j| Vector::basis(dim, j)).collect();
    out.extend((0..samples).map(|_| sampling::unit_vector(&mut rng, dim)));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessSweep {
    pub directions: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub reports: Vec<ExactnessReport>,
}

/// Exactness over all probe directions, evaluated in parallel.
pub fn exactness_sweep(spaces: &OrbitSpaces, samples: usize, seed: u64, tol: &Tolerances) -> Result<ExactnessSweep> {
    let dirs = probe_directions(spaces.layout.dim(), samples, seed);
    let reports = dirs
        .par_iter()
        .map(|u| symbol_exactness(spaces, u, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExactnessSweep {
        directions: reports.len(),
        failures: reports.iter().filter(|r| !r.exact).count(),
        max_residual: reports.iter().map(|r| r.containment_residual).fold(0.0, f64::max),
        reports,
    })
}

/// `ρ_I Φ`, the tangent vector of the circle action generated by `I`.
pub fn complex_structure_tangent(pair: &CalibrationPair, tol: &Tolerances) -> Result<DVector<f64>> {
    let cs = complex_structure(pair.volume(), tol)?;
    let gl = cs.as_gl();
    let layout = StructureKind::KahlerEinstein.layout(pair.n());
    Ok(layout.flatten(&[gl_act(&gl, pair.volume())?, gl_act(&gl, pair.kahler())?]))
}

/// Flattened `(a, b)` in the Kähler-Einstein `E¹` layout.
pub fn ke_vector(a: &KForm, b: &KForm) -> DVector<f64> {
    StructureKind::KahlerEinstein.layout(a.degree()).flatten(&[a.clone(), b.clone()])
}
