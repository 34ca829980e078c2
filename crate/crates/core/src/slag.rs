//! Special Lagrangian subtori `M ⊂ X` and the linear algebra of their
//! deformation complexes: restriction maps, the self-dual space `E⁰_M`,
//! `γ¹_#`, the relative mapping cone and the moduli dimension count.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{binomial, hodge_star, restrict, GlElement, KForm, Metric, Vector};
use crate::linalg::{self, SubspaceBasis};
use crate::orbit::{span_e0, span_e1_contractions, StructureKind};
use crate::sampling::{self, SeededRng};
use crate::structures::{metric_from, CalibrationPair, Tolerances};
use crate::torus::{h1_by_equations, h1_orbit_model, CohomologySubspace};
use crate::tuple::{Slot, TupleLayout};

/// The linear subspace `V_M ⊂ ℝ^{2n}` spanned by the rows of `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtorusSpec {
    rows: DMatrix<f64>,
    integer_rows: Option<Vec<Vec<i64>>>,
}

fn integer_rank(rows: &[Vec<i64>]) -> usize {
    // Fraction-free elimination; exact on integer input.
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let (a, b) = (m[rank][c], m[r][c]);
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x = a * *x - b * y;
                }
                let g = m[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    m[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SubtorusSpec {
    /// A genuine subtorus: `n` integer rows of length `2n` and rank `n`.
    pub fn from_integer_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let invalid = |message: String| Error::Validation { field: "subtorus".into(), message };
        let n = rows.len();
        if n == 0 {
            return Err(invalid("no rows".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != 2 * n) {
            return Err(invalid(format!("row length {} but {} rows need length {}", r.len(), n, 2 * n)));
        }
        let rank = integer_rank(&rows);
        if rank != n {
            return Err(invalid(format!("rank {rank}, expected {n}")));
        }
        let m = DMatrix::from_fn(n, 2 * n, |i, j| rows[i][j] as f64);
        Ok(Self { rows: m, integer_rows: Some(rows) })
    }

    /// A real subspace, not necessarily rational.
    pub fn from_real_rows(rows: DMatrix<f64>) -> Result<Self> {
        let n = rows.nrows();
        if rows.ncols() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: rows.ncols() });
        }
        let r = linalg::rank(&rows, linalg::DEFAULT_RANK_THRESHOLD);
        if r != n {
            return Err(Error::RankDeficient { rank: r, expected: n });
        }
        Ok(Self { rows, integer_rows: None })
    }

    /// `span{∂x_1, …, ∂x_n}`.
    pub fn coordinate(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..2 * n).map(|j| i64::from(i == j)).collect()).collect();
        Self::from_integer_rows(rows).expect("full rank")
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn integer_rows(&self) -> Option<&[Vec<i64>]> {
        self.integer_rows.as_deref()
    }

    /// A `g`-orthonormal basis of `V_M` as columns, obtained by Gram-Schmidt
    /// on the rows in order (so the row orientation is kept).
    pub fn inclusion(&self, g: &Metric) -> DMatrix<f64> {
        let gram = g.gram();
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let mut w = self.rows.row(i).transpose();
            for _ in 0..2 {
                for q in &cols {
                    let c = (q.transpose() * gram * &w)[0];
                    w -= q * c;
                }
            }
            let norm = (w.transpose() * gram * &w)[0].sqrt();
            cols.push(w / norm);
        }
        DMatrix::from_columns(&cols)
    }

    /// The image `g(V_M)`.
    pub fn transformed(&self, g: &GlElement) -> Result<Self> {
        Self::from_real_rows((g.matrix() * self.rows.transpose()).transpose())
    }
}

/// Restriction of the special Lagrangian conditions to `V_M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlagReport {
    pub residual_im_omega: f64,
    pub residual_omega: f64,
    /// `i*_M Re Ω` divided by the induced volume form (row orientation).
    pub volume_calibration: f64,
    pub passed: bool,
}

/// Tests `i*_M Im(e^{iθ}Ω) = 0` and `i*_M ω = 0`.
pub fn check_special_lagrangian_phase(pair: &CalibrationPair, m: &SubtorusSpec, phase: f64, tol: &Tolerances) -> Result<SlagReport> {
    if 2 * m.n() != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), found: 2 * m.n() });
    }
    let g = metric_from(pair, tol)?.metric;
    let j = m.inclusion(&g);
    let om = pair.volume().scale(Complex64::from_polar(1.0, phase));
    let restricted = restrict(&j, &om)?;
    let res_im = restricted.im().max_abs();
    let res_w = restrict(&j, pair.kahler())?.max_abs();
    let cal = restricted.coeffs()[0].re;
    Ok(SlagReport {
        residual_im_omega: res_im,
        residual_omega: res_w,
        volume_calibration: cal,
        passed: res_im <= tol.residual_tolerance && res_w <= tol.residual_tolerance,
    })
}

pub fn check_special_lagrangian(pair: &CalibrationPair, m: &SubtorusSpec, tol: &Tolerances) -> Result<SlagReport> {
    check_special_lagrangian_phase(pair, m, 0.0, tol)
}

/// Matrix of `i*_M` on constant real `k`-forms, with its rank and cokernel.
#[derive(Debug, Clone)]
pub struct RestrictionMap {
    pub degree: usize,
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    pub coker: usize,
}

fn restriction_matrix(j: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let (dim, n) = j.shape();
    let mut m = DMatrix::zeros(binomial(n, k), binomial(dim, k));
    for t in 0..binomial(dim, k) {
        let mut e = KForm::zero(dim, k);
        e.coeffs_mut()[t] = Complex64::new(1.0, 0.0);
        let r = restrict(j, &e)?;
        for (row, c) in r.coeffs().iter().enumerate() {
            m[(row, t)] = c.re;
        }
    }
    Ok(m)
}

fn restriction_map(j: &DMatrix<f64>, k: usize, threshold: f64) -> Result<RestrictionMap> {
    let matrix = restriction_matrix(j, k)?;
    let rank = linalg::rank(&matrix, threshold);
    Ok(RestrictionMap { degree: k, coker: matrix.nrows() - rank, rank, matrix })
}

/// `γ_{H¹}`, `γ_{H²}` and `γ_{Hⁿ}`.
#[derive(Debug, Clone)]
pub struct RestrictionMaps {
    pub gamma_h1: RestrictionMap,
    pub gamma_h2: RestrictionMap,
    pub gamma_hn: RestrictionMap,
}

pub fn restriction_cohomology_maps(m: &SubtorusSpec, g: &Metric, threshold: f64) -> Result<RestrictionMaps> {
    let j = m.inclusion(g);
    Ok(RestrictionMaps {
        gamma_h1: restriction_map(&j, 1, threshold)?,
        gamma_h2: restriction_map(&j, 2, threshold)?,
        gamma_hn: restriction_map(&j, m.n(), threshold)?,
    })
}

/// Everything on the `M` side that depends only on `(Φ, M)`.
#[derive(Debug, Clone)]
pub struct SlagContext {
    pub pair: CalibrationPair,
    pub subtorus: SubtorusSpec,
    pub metric: Metric,
    pub inclusion: DMatrix<f64>,
    /// Orientation of `V_M` (relative to the row order) for which
    /// `i*(i_vΩ)^{Im} = ⋆_M i*(i_vω)`.
    pub sigma: f64,
    /// Sign of `i*Re Ω` against the row orientation.
    pub calibration_sign: f64,
    pub tol: Tolerances,
}

/// Layout `∧¹ ⊕ ∧^{n−1}` of `E⁰_M`.
pub fn e0m_layout(n: usize) -> TupleLayout {
    TupleLayout::new(n, vec![Slot::Real(1), Slot::Real(n - 1)])
}

/// Layout `∧ⁿ ⊕ ∧²` of `E¹_M`.
pub fn e1m_layout(n: usize) -> TupleLayout {
    TupleLayout::new(n, vec![Slot::Real(n), Slot::Real(2)])
}

impl SlagContext {
    /// Requires `M` to be special Lagrangian; fits the orientation sign from
    /// `samples` seeded vectors.
    pub fn new(pair: &CalibrationPair, m: &SubtorusSpec, samples: usize, seed: u64, tol: &Tolerances) -> Result<Self> {
        let report = check_special_lagrangian(pair, m, tol)?;
        if !report.passed {
            return Err(Error::NotSpecialLagrangian(format!(
                "Im Ω residual {:e}, ω residual {:e}",
                report.residual_im_omega, report.residual_omega
            )));
        }
        let metric = metric_from(pair, tol)?.metric;
        let inclusion = m.inclusion(&metric);
        let mut ctx = Self {
            pair: pair.clone(),
            subtorus: m.clone(),
            metric,
            inclusion,
            sigma: 1.0,
            calibration_sign: report.volume_calibration.signum(),
            tol: *tol,
        };
        let mut rng = sampling::rng(seed);
        let (mut num, mut den) = (0.0, 0.0);
        for _ in 0..samples.max(1) {
            let v = sampling::real_vector(&mut rng, pair.dim());
            let (lhs, rhs) = ctx.generator_sides(&v)?;
            num += lhs.coeffs().iter().zip(rhs.coeffs()).map(|(a, b)| a.re * b.re).sum::<f64>();
            den += rhs.coeffs().iter().map(|b| b.re * b.re).sum::<f64>();
        }
        ctx.sigma = if den == 0.0 || num >= 0.0 { 1.0 } else { -1.0 };
        Ok(ctx)
    }

    pub fn n(&self) -> usize {
        self.subtorus.n()
    }

    fn induced(&self) -> Metric {
        Metric::euclidean(self.n())
    }

    pub fn restrict(&self, a: &KForm) -> Result<KForm> {
        restrict(&self.inclusion, a)
    }

    pub fn star_m(&self, a: &KForm) -> Result<KForm> {
        hodge_star(&self.induced(), self.sigma, a)
    }

    /// `(i*(i_vΩ)^{Im}, i*(i_vω))` before applying `⋆_M`.
    fn generator_sides(&self, v: &Vector) -> Result<(KForm, KForm)> {
        let lhs = self.restrict(&self.pair.volume().interior(v)?.im())?;
        let rhs = hodge_star(&self.induced(), 1.0, &self.restrict(&self.pair.kahler().interior(v)?)?)?;
        Ok((lhs, rhs))
    }

    /// `|i*(i_vΩ)^{Im} − ⋆_M i*(i_vω)|`.
    pub fn generator_residual(&self, v: &Vector) -> Result<f64> {
        let lhs = self.restrict(&self.pair.volume().interior(v)?.im())?;
        let rhs = self.star_m(&self.restrict(&self.pair.kahler().interior(v)?)?)?;
        Ok((&lhs - &rhs).max_abs())
    }

    pub fn generator_sweep(&self, samples: usize, rng: &mut SeededRng) -> Result<f64> {
        (0..samples).try_fold(0.0f64, |acc, _| {
            let v = sampling::real_vector(rng, self.pair.dim());
            Ok(acc.max(self.generator_residual(&v)?))
        })
    }

    /// `E⁰_M = {(a¹, a^{n−1}) : ⋆_M a¹ = a^{n−1}}`.
    pub fn e0m(&self) -> Result<SubspaceBasis> {
        let n = self.n();
        let layout = e0m_layout(n);
        let id = DMatrix::identity(layout.real_dim(), layout.real_dim());
        let m = layout.map_matrix(&id, binomial(n, n - 1), |f| {
            let d = &self.star_m(&f[0])? - &f[1];
            Ok(DVector::from_iterator(d.coeffs().len(), d.coeffs().iter().map(|c| c.re)))
        })?;
        Ok(SubspaceBasis::kernel(&m, self.tol.rank_threshold))
    }

    /// `κ⁰ : (a, b) ↦ (i*b, i*a^{Im})` from `∧^{n−1}ℂ ⊕ ∧¹` to `E⁰_M`.
    pub fn kappa0(&self, forms: &[KForm]) -> Result<DVector<f64>> {
        let n = self.n();
        Ok(e0m_layout(n).flatten(&[self.restrict(&forms[1])?, self.restrict(&forms[0].im())?]))
    }

    /// `κ¹ : (α, β) ↦ (i*α^{Im}, i*β)` from `∧ⁿℂ ⊕ ∧²` to `∧ⁿ ⊕ ∧²` on `M`.
    pub fn kappa1(&self, forms: &[KForm]) -> Result<DVector<f64>> {
        let n = self.n();
        let layout = e1m_layout(n);
        let top = self.restrict(&forms[0].im())?;
        if n >= 2 {
            Ok(layout.flatten(&[top, self.restrict(&forms[1])?]))
        } else {
            Ok(layout.flatten(&[top]))
        }
    }

    fn kappa1_matrix(&self, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let layout = StructureKind::KahlerEinstein.layout(self.n());
        layout.map_matrix(basis, e1m_layout(self.n()).real_dim(), |f| self.kappa1(f))
    }

    fn kappa0_matrix(&self, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.n();
        let layout = StructureKind::KahlerEinstein.layout(n).lowered();
        layout.map_matrix(basis, e0m_layout(n).real_dim(), |f| self.kappa0(f))
    }

    /// The induced volume form of `M` in the fitted orientation.
    pub fn volume_m(&self) -> KForm {
        self.induced().volume(self.sigma)
    }
}

/// `E⁰_M` with the generator-identity residual over `samples` random `v`.
#[derive(Debug, Clone)]
pub struct SelfDualSpace {
    pub basis: SubspaceBasis,
    pub sigma: f64,
    /// Orientation sign relative to the calibrated orientation.
    pub sigma_relative_to_calibration: f64,
    pub generator_residual: f64,
}

pub fn e0m_selfdual(ctx: &SlagContext, samples: usize, seed: u64) -> Result<SelfDualSpace> {
    let mut rng = sampling::rng(seed ^ 0x9e37_79b9);
    Ok(SelfDualSpace {
        basis: ctx.e0m()?,
        sigma: ctx.sigma,
        sigma_relative_to_calibration: ctx.sigma * ctx.calibration_sign,
        generator_residual: ctx.generator_sweep(samples, &mut rng)?,
    })
}

/// `H¹(#_M)` modelled as the span of `κ¹(θ ∧ i_vΦ)` over covectors and
/// vectors.
pub fn h1_m_model(ctx: &SlagContext) -> Result<CohomologySubspace> {
    let e1 = span_e1_contractions(&ctx.pair, StructureKind::KahlerEinstein, ctx.tol.rank_threshold)?;
    let image = ctx.kappa1_matrix(e1.basis())?;
    Ok(CohomologySubspace {
        label: "H^1(M)".into(),
        layout: e1m_layout(ctx.n()),
        basis: SubspaceBasis::span(&image, ctx.tol.rank_threshold),
    })
}

/// `Hⁿ(M) ⊕ Image γ_{H²}` inside `∧ⁿ ⊕ ∧²` of `M`.
pub fn expected_gamma1_image(ctx: &SlagContext, maps: &RestrictionMaps) -> SubspaceBasis {
    let n = ctx.n();
    let layout = e1m_layout(n);
    let len = layout.real_dim();
    let mut cols = vec![layout.flatten(&[ctx.volume_m(), KForm::zero(n, 2)])];
    if n >= 2 {
        let off = layout.offset(1);
        let img = linalg::column_space(&maps.gamma_h2.matrix, ctx.tol.rank_threshold);
        for c in 0..img.ncols() {
            let mut v = DVector::zeros(len);
            v.rows_mut(off, img.nrows()).copy_from(&img.column(c));
            cols.push(v);
        }
    }
    SubspaceBasis::span_vectors(len, &cols, ctx.tol.rank_threshold)
}

#[derive(Debug, Clone)]
pub struct Gamma1 {
    /// Matrix on the basis of the given `H¹(#_X)` model.
    pub matrix: DMatrix<f64>,
    /// Kernel, in the ambient coordinates of the `H¹(#_X)` model.
    pub kernel: SubspaceBasis,
    pub image: SubspaceBasis,
}

/// `γ¹_# : H¹(#_X) → H¹(#_M)` on a given model of `H¹(#_X)`.
pub fn gamma1_sharp(ctx: &SlagContext, h1: &CohomologySubspace) -> Result<Gamma1> {
    let thr = ctx.tol.rank_threshold;
    let matrix = ctx.kappa1_matrix(h1.basis.basis())?;
    let image = SubspaceBasis::span(&matrix, thr);
    let ker_coords = linalg::nullspace(&matrix, thr);
    let kernel = if ker_coords.ncols() == 0 {
        SubspaceBasis::zero(h1.basis.ambient_dim())
    } else {
        SubspaceBasis::from_orthonormal(h1.basis.basis() * ker_coords)
    };
    Ok(Gamma1 { matrix, kernel, image })
}

/// `H¹` of the cone of `#_X → #_M` at constant level:
/// `ker κ¹ ⊕ coker κ⁰`.
#[derive(Debug, Clone)]
pub struct RelativeCone {
    pub kernel: SubspaceBasis,
    /// Complement of `κ⁰(E⁰_X)` inside `E⁰_M`.
    pub cokernel: SubspaceBasis,
    pub rank_kappa0: usize,
    pub dim_e0m: usize,
}

impl RelativeCone {
    pub fn dim(&self) -> usize {
        self.kernel.dim() + self.cokernel.dim()
    }
}

pub fn relative_h1_cone(ctx: &SlagContext, h1: &CohomologySubspace) -> Result<RelativeCone> {
    let thr = ctx.tol.rank_threshold;
    let g1 = gamma1_sharp(ctx, h1)?;
    let e0 = span_e0(&ctx.pair, StructureKind::KahlerEinstein, thr)?;
    let k0 = ctx.kappa0_matrix(e0.basis())?;
    let image = SubspaceBasis::span(&k0, thr);
    let e0m = ctx.e0m()?;
    Ok(RelativeCone {
        kernel: g1.kernel,
        cokernel: e0m.complement_of(&image, thr),
        rank_kappa0: image.dim(),
        dim_e0m: e0m.dim(),
    })
}

/// Constant relative de Rham `H¹` and the rank of the natural map from the
/// cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeDeRham {
    pub dim: usize,
    pub map_rank: usize,
    pub injective: bool,
}

pub fn relative_derham_h1(ctx: &SlagContext, cone: &RelativeCone) -> Result<RelativeDeRham> {
    let n = ctx.n();
    let thr = ctx.tol.rank_threshold;
    let full1 = StructureKind::KahlerEinstein.layout(n);
    let id1 = DMatrix::identity(full1.real_dim(), full1.real_dim());
    let r1 = full1.map_matrix(&id1, e1m_layout(n).real_dim(), |f| ctx.kappa1(f))?;
    let ker_r1 = SubspaceBasis::kernel(&r1, thr);
    let full0 = full1.lowered();
    let id0 = DMatrix::identity(full0.real_dim(), full0.real_dim());
    let r0 = full0.map_matrix(&id0, e0m_layout(n).real_dim(), |f| ctx.kappa0(f))?;
    let im_r0 = SubspaceBasis::span(&r0, thr);
    let target = SubspaceBasis::full(e0m_layout(n).real_dim());
    let coker_r0 = target.complement_of(&im_r0, thr);
    let dim = ker_r1.dim() + coker_r0.dim();

    // Kernel part: inclusion into ker r¹; cokernel part: projection to the
    // quotient by Image r⁰.
    let k_part = ker_r1.basis().transpose() * cone.kernel.basis();
    let c_part = coker_r0.basis().transpose() * cone.cokernel.basis();
    let map_rank = linalg::rank(&k_part, thr) + linalg::rank(&c_part, thr);
    Ok(RelativeDeRham { dim, map_rank, injective: map_rank == cone.dim() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuliReport {
    pub dim_h1_x: usize,
    pub dim_h1_x_equations: usize,
    pub dim_h1_m: usize,
    pub dim_h0_m: usize,
    pub dim_ker_gamma1: usize,
    pub dim_ker_gamma1_equations: usize,
    pub dim_coker_gamma_h1: usize,
    pub dim_coker_kappa0: usize,
    pub dim_h1_xm_cone: usize,
    pub dim_relative_derham: usize,
    pub injectivity_verdict: bool,
    pub identity_verdict: bool,
    /// `(fiber, base, total)`.
    pub fibration: [usize; 3],
}

pub fn moduli_dimension_report(ctx: &SlagContext) -> Result<ModuliReport> {
    let tol = ctx.tol;
    let h1 = h1_orbit_model(&ctx.pair, &tol)?;
    let h1_eq = h1_by_equations(&ctx.pair, &tol)?;
    let g1 = gamma1_sharp(ctx, &h1)?;
    let g1_eq = gamma1_sharp(ctx, &h1_eq)?;
    let maps = restriction_cohomology_maps(&ctx.subtorus, &ctx.metric, tol.rank_threshold)?;
    let cone = relative_h1_cone(ctx, &h1)?;
    let rel = relative_derham_h1(ctx, &cone)?;
    let fiber = maps.gamma_h1.coker;
    let base = g1.kernel.dim();
    Ok(ModuliReport {
        dim_h1_x: h1.dim(),
        dim_h1_x_equations: h1_eq.dim(),
        dim_h1_m: h1_m_model(ctx)?.dim(),
        dim_h0_m: ctx.e0m()?.dim(),
        dim_ker_gamma1: base,
        dim_ker_gamma1_equations: g1_eq.kernel.dim(),
        dim_coker_gamma_h1: fiber,
        dim_coker_kappa0: cone.cokernel.dim(),
        dim_h1_xm_cone: cone.dim(),
        dim_relative_derham: rel.dim,
        injectivity_verdict: rel.injective,
        identity_verdict: cone.dim() == fiber + base,
        fibration: [fiber, base, cone.dim()],
    })
}

/// A seeded `g` with `g(V_M) = V_M`, close to the identity: block upper
/// triangular in a basis whose first `n` vectors span `V_M`.
pub fn slag_preserving_deformation(m: &SubtorusSpec, rng: &mut SeededRng, scale: f64) -> Result<GlElement> {
    let n = m.n();
    let dim = 2 * n;
    let rows = m.rows();
    // Complete the rows to a basis with the orthogonal complement.
    let comp = linalg::nullspace(rows, linalg::DEFAULT_RANK_THRESHOLD);
    let mut p = DMatrix::zeros(dim, dim);
    p.columns_mut(0, n).copy_from(&rows.transpose());
    p.columns_mut(n, n).copy_from(&comp);
    let p_inv = p.clone().try_inverse().ok_or(Error::RankDeficient { rank: n, expected: dim })?;
    loop {
        let mut b = DMatrix::identity(dim, dim) + sampling::normal_matrix(rng, dim) * scale;
        b.view_mut((n, 0), (n, n)).fill(0.0);
        let g = &p * b * &p_inv;
        let sv = g.clone().singular_values();
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) > 0.2 {
            return GlElement::new(g);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::I;
    use crate::orbit::ke_vector;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn standard_ctx(n: usize) -> SlagContext {
        SlagContext::new(&CalibrationPair::standard(n), &SubtorusSpec::coordinate(n), 20, 1, &tol()).unwrap()
    }

    #[test]
    fn subtorus_validation() {
        let err = SubtorusSpec::from_integer_rows(vec![vec![1, 0, 0, 0], vec![2, 0, 0, 0]]).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "subtorus"));
        assert!(SubtorusSpec::from_integer_rows(vec![vec![1, 0, 0], vec![0, 1, 0]]).is_err());
        assert_eq!(integer_rank(&[vec![2, 4, 6], vec![1, 2, 3], vec![0, 1, 1]]), 2);
    }

    #[test]
    fn coordinate_and_complex_line() {
        let pair = CalibrationPair::standard(2);
        let r = check_special_lagrangian(&pair, &SubtorusSpec::coordinate(2), &tol()).unwrap();
        assert!(r.passed);
        assert!((r.volume_calibration - 1.0).abs() < 1e-12);
        let line = SubtorusSpec::from_integer_rows(vec![vec![1, 0, 0, 0], vec![0, 0, 1, 0]]).unwrap();
        let r = check_special_lagrangian(&pair, &line, &tol()).unwrap();
        assert!(!r.passed);
        assert!((r.residual_omega - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_plane_is_special_only_at_phase_zero() {
        let pair = CalibrationPair::standard(2);
        for t in [0.0, 0.3, 1.0, std::f64::consts::PI] {
            let rows = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, t.cos(), 0.0, t.sin()]);
            let r = check_special_lagrangian(&pair, &SubtorusSpec::from_real_rows(rows).unwrap(), &tol()).unwrap();
            assert!(r.residual_omega < 1e-14);
            assert!((r.residual_im_omega - t.sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_ranks() {
        let m = SubtorusSpec::coordinate(2);
        let maps = restriction_cohomology_maps(&m, &Metric::euclidean(4), 1e-8).unwrap();
        assert_eq!((maps.gamma_h1.rank, maps.gamma_h1.coker), (2, 0));
        assert_eq!(maps.gamma_h2.rank, 1);
        assert_eq!(maps.gamma_hn.rank, 1);
    }

    #[test]
    fn self_dual_space() {
        for n in 2..=3 {
            let ctx = standard_ctx(n);
            let sd = e0m_selfdual(&ctx, 30, 3).unwrap();
            assert_eq!(sd.basis.dim(), n);
            assert!(sd.generator_residual < 1e-10);
            assert_eq!(sd.sigma_relative_to_calibration, -1.0);
            let dx = KForm::coordinate(n, 0);
            let pair = e0m_layout(n).flatten(&[dx.clone(), ctx.star_m(&dx).unwrap()]);
            assert!(sd.basis.distance(&pair) < 1e-12);
        }
    }

    #[test]
    fn gamma1_and_cone_standard_n2() {
        let ctx = standard_ctx(2);
        let h1 = h1_orbit_model(&ctx.pair, &tol()).unwrap();
        let g1 = gamma1_sharp(&ctx, &h1).unwrap();
        assert_eq!(g1.image.dim(), 2);
        assert_eq!(g1.kernel.dim(), 11);
        let maps = restriction_cohomology_maps(&ctx.subtorus, &ctx.metric, 1e-8).unwrap();
        assert!(g1.image.mutual_residual(&expected_gamma1_image(&ctx, &maps)) < 1e-8);
        let vol = ke_vector(&ctx.pair.volume().scale(I), &KForm::zero(4, 2));
        let img = ctx.kappa1(&StructureKind::KahlerEinstein.layout(2).unflatten(vol.as_slice()).unwrap()).unwrap();
        assert!(g1.image.distance(&img) < 1e-12);
        let cone = relative_h1_cone(&ctx, &h1).unwrap();
        assert_eq!((cone.kernel.dim(), cone.cokernel.dim()), (11, 0));
        let rel = relative_derham_h1(&ctx, &cone).unwrap();
        assert_eq!(rel.dim, 16);
        assert!(rel.injective);
        assert_eq!(h1_m_model(&ctx).unwrap().dim(), 2);
    }

    #[test]
    fn moduli_report_n3() {
        let r = moduli_dimension_report(&standard_ctx(3)).unwrap();
        assert_eq!(r.dim_h1_x, 28);
        assert_eq!(r.dim_h1_m, 4);
        assert_eq!(r.dim_ker_gamma1, 24);
        assert_eq!(r.fibration, [0, 24, 24]);
        assert!(r.identity_verdict && r.injectivity_verdict);
    }

    #[test]
    fn deformations_keep_slag_and_dimension() {
        let m = SubtorusSpec::coordinate(2);
        let mut rng = sampling::rng(11);
        for _ in 0..3 {
            let g = slag_preserving_deformation(&m, &mut rng, 0.15).unwrap();
            let pair = CalibrationPair::standard(2).pullback(&g).unwrap();
            let ctx = SlagContext::new(&pair, &m, 20, 2, &tol()).unwrap();
            let r = moduli_dimension_report(&ctx).unwrap();
            assert_eq!(r.dim_h1_xm_cone, 11);
            assert!(e0m_selfdual(&ctx, 20, 5).unwrap().generator_residual < 1e-10);
        }
    }
}
