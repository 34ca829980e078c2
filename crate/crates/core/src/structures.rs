//! Calabi-Yau and Kähler-Einstein structures on `ℝ^{2n}`: verification,
//! induced complex structure, `(p,q)` types, metric and the complex Hodge star.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{
    binomial, dz, hodge_star, hodge_star_conj, gl_act, pullback, GlElement, KForm, Metric, Vector,
    I, ONE, ZERO,
};
use crate::linalg::{self, DEFAULT_RANK_THRESHOLD};
use crate::sampling;

/// Numerical thresholds shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank decisions.
    pub rank_threshold: f64,
    /// Absolute bound on identity residuals.
    pub residual_tolerance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank_threshold: DEFAULT_RANK_THRESHOLD, residual_tolerance: 1e-10 }
    }
}

/// A candidate Kähler-Einstein pair `(Ω, ω)`: a complex `n`-form and a real
/// 2-form on `ℝ^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationPair {
    volume: KForm,
    kahler: KForm,
}

impl CalibrationPair {
    pub fn new(volume: KForm, kahler: KForm) -> Result<Self> {
        if volume.dim() != kahler.dim() {
            return Err(Error::DimensionMismatch { expected: volume.dim(), found: kahler.dim() });
        }
        if !volume.dim().is_multiple_of(2) || volume.degree() != volume.dim() / 2 {
            return Err(Error::UnsupportedDegree(volume.degree()));
        }
        if kahler.degree() != 2 {
            return Err(Error::UnsupportedDegree(kahler.degree()));
        }
        Ok(Self { volume, kahler })
    }

    /// `Ω⁰ = dz_1 ∧ … ∧ dz_n`, `ω⁰ = Σ dx_k ∧ dy_k`.
    pub fn standard(n: usize) -> Self {
        Self { volume: standard_volume(n), kahler: standard_kahler(n) }
    }

    pub fn n(&self) -> usize {
        self.volume.degree()
    }

    pub fn dim(&self) -> usize {
        self.volume.dim()
    }

    /// `Ω`.
    pub fn volume(&self) -> &KForm {
        &self.volume
    }

    /// `ω`.
    pub fn kahler(&self) -> &KForm {
        &self.kahler
    }

    /// `φ = Re Ω`.
    pub fn phi(&self) -> KForm {
        self.volume.re()
    }

    /// `ψ = (Im Ω, ω)`.
    pub fn psi(&self) -> (KForm, KForm) {
        (self.volume.im(), self.kahler.clone())
    }

    pub fn pullback(&self, g: &GlElement) -> Result<Self> {
        Ok(Self { volume: pullback(g, &self.volume)?, kahler: pullback(g, &self.kahler)? })
    }

    pub fn with_volume(&self, volume: KForm) -> Result<Self> {
        Self::new(volume, self.kahler.clone())
    }

    pub fn with_kahler(&self, kahler: KForm) -> Result<Self> {
        Self::new(self.volume.clone(), kahler)
    }
}

pub fn standard_volume(n: usize) -> KForm {
    let mut acc = KForm::scalar(2 * n, ONE);
    for k in 0..n {
        acc = acc.wedge(&dz(n, k)).expect("degree ≤ 2n");
    }
    acc
}

pub fn standard_kahler(n: usize) -> KForm {
    let dim = 2 * n;
    let mut acc = KForm::zero(dim, 2);
    for k in 0..n {
        let t = KForm::coordinate(dim, k).wedge(&KForm::coordinate(dim, n + k)).expect("dim ≥ 2");
        acc = &acc + &t;
    }
    acc
}

/// `c_n = (−1)^{n(n−1)/2} 2^n / (i^n n!)`.
pub fn monge_ampere_constant(n: usize) -> Complex64 {
    let sign = if (n * (n.saturating_sub(1)) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let i_pow = I.powu(n as u32);
    Complex64::new(sign * 2f64.powi(n as i32) / fact, 0.0) / i_pow
}

/// A complex subspace of `V ⊗ ℂ` with Hermitian-orthonormal basis columns.
#[derive(Debug, Clone)]
pub struct ComplexSubspace {
    pub basis: DMatrix<Complex64>,
}

impl ComplexSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn conjugate(&self) -> Self {
        Self { basis: self.basis.map(|c| c.conj()) }
    }
}

/// `Ker Ω = {v ∈ V⊗ℂ : i_v Ω = 0}`.
pub fn kernel_of_form(volume: &KForm, rank_threshold: f64) -> Result<ComplexSubspace> {
    let dim = volume.dim();
    if volume.degree() == 0 {
        return Err(Error::DegreeZero);
    }
    let rows = binomial(dim, volume.degree() - 1);
    let mut m = DMatrix::from_element(rows, dim, ZERO);
    for j in 0..dim {
        let c = volume.interior(&Vector::basis(dim, j))?;
        for (r, x) in c.coeffs().iter().enumerate() {
            m[(r, j)] = *x;
        }
    }
    Ok(ComplexSubspace { basis: linalg::complex_nullspace(&m, rank_threshold) })
}

fn stacked_with_conjugate(k: &ComplexSubspace) -> DMatrix<Complex64> {
    let d = k.dim();
    let rows = k.basis.nrows();
    let mut p = DMatrix::from_element(rows, 2 * d, ZERO);
    p.columns_mut(0, d).copy_from(&k.basis);
    p.columns_mut(d, d).copy_from(&k.basis.map(|c| c.conj()));
    p
}

/// One named clause of a structure verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseVerdict {
    pub name: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub note: Option<String>,
}

impl ClauseVerdict {
    fn new(name: &str, passed: bool, residual: Option<f64>, note: Option<String>) -> Self {
        Self { name: name.to_string(), passed, residual, note }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub clauses: Vec<ClauseVerdict>,
    /// `c_n` from the closed formula (KE checks only).
    pub derived_constant_cn: Option<[f64; 2]>,
    /// Which argument order made `g` positive definite (KE checks only).
    pub metric_order: Option<MetricOrder>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseVerdict> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

/// `dim_ℂ Ker Ω = n` and `Ker Ω ∩ conj(Ker Ω) = {0}`.
pub fn check_calabi_yau(volume: &KForm, tol: &Tolerances) -> StructureReport {
    let n = volume.dim() / 2;
    let mut clauses = Vec::new();
    match kernel_of_form(volume, tol.rank_threshold) {
        Ok(k) => {
            clauses.push(ClauseVerdict::new(
                "kernel_dimension",
                k.dim() == n && volume.degree() == n,
                None,
                Some(format!("dim_C Ker = {}", k.dim())),
            ));
            let stacked = stacked_with_conjugate(&k);
            let r = linalg::complex_rank(&stacked, tol.rank_threshold);
            let sv = stacked.singular_values();
            let smax = sv.iter().cloned().fold(0.0, f64::max);
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            clauses.push(ClauseVerdict::new(
                "kernel_transverse_to_conjugate",
                k.dim() > 0 && r == 2 * k.dim(),
                Some(if smax > 0.0 { smin / smax } else { 0.0 }),
                Some(format!("rank [K | conj K] = {r}")),
            ));
        }
        Err(e) => clauses.push(ClauseVerdict::new("kernel_dimension", false, None, Some(e.to_string()))),
    }
    StructureReport { clauses, derived_constant_cn: None, metric_order: None }
}

/// An almost complex structure `I` with `I² = −Id`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure(DMatrix<f64>);

impl ComplexStructure {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self(matrix)
    }

    /// `I ∂x_k = ∂y_k`, `I ∂y_k = −∂x_k`.
    pub fn standard(n: usize) -> Self {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            m[(n + k, k)] = 1.0;
            m[(k, n + k)] = -1.0;
        }
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `max |I² + Id|`.
    pub fn square_residual(&self) -> f64 {
        let d = self.dim();
        (&self.0 * &self.0 + DMatrix::<f64>::identity(d, d)).amax()
    }

    pub fn as_gl(&self) -> GlElement {
        GlElement::new(self.0.clone()).expect("square")
    }
}

/// The complex structure for which `Ω` has type `(n,0)`: eigenvalue `−i` on
/// `Ker Ω`, `+i` on its conjugate.
pub fn complex_structure(volume: &KForm, tol: &Tolerances) -> Result<ComplexStructure> {
    let report = check_calabi_yau(volume, tol);
    if !report.passed() {
        return Err(Error::NotCalabiYau(
            report.clauses.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect::<Vec<_>>().join(", "),
        ));
    }
    let k = kernel_of_form(volume, tol.rank_threshold)?;
    let n = k.dim();
    let p = stacked_with_conjugate(&k);
    let mut d = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for j in 0..n {
        d[(j, j)] = -I;
        d[(n + j, n + j)] = I;
    }
    let p_inv = p.clone().try_inverse().ok_or_else(|| Error::NotCalabiYau("singular eigenbasis".into()))?;
    let m = &p * d * p_inv;
    Ok(ComplexStructure(m.map(|c| c.re)))
}

/// Matrix of the derivation `a ↦ Σ a(…, I·, …)` on `∧^k`, whose eigenvalue on
/// `(p,q)` forms is `i(p−q)`.
fn type_derivation(cs: &ComplexStructure, k: usize) -> DMatrix<Complex64> {
    let dim = cs.dim();
    let size = binomial(dim, k);
    let gl = cs.as_gl();
    let mut m = DMatrix::from_element(size, size, ZERO);
    for t in 0..size {
        let mut e = KForm::zero(dim, k);
        e.coeffs_mut()[t] = ONE;
        let img = gl_act(&gl, &e).expect("same dimension");
        for (r, c) in img.coeffs().iter().enumerate() {
            m[(r, t)] = -c;
        }
    }
    m
}

/// Spectral projectors onto the `(p, k−p)` summands of `∧^k ⊗ ℂ`.
#[derive(Debug, Clone)]
pub struct TypeProjector {
    dim: usize,
    degree: usize,
    projectors: Vec<(usize, DMatrix<Complex64>)>,
}

impl TypeProjector {
    pub fn new(cs: &ComplexStructure, degree: usize) -> Self {
        let dim = cs.dim();
        let n = dim / 2;
        let size = binomial(dim, degree);
        let d = type_derivation(cs, degree);
        let ps: Vec<usize> = (degree.saturating_sub(n)..=degree.min(n)).collect();
        let eig = |p: usize| Complex64::new(0.0, 2.0 * p as f64 - degree as f64);
        let id = DMatrix::<Complex64>::identity(size, size);
        let projectors = ps
            .iter()
            .map(|&p| {
                let mut proj = id.clone();
                for &q in &ps {
                    if q != p {
                        proj = proj * (&d - &id * eig(q)) / (eig(p) - eig(q));
                    }
                }
                (p, proj)
            })
            .collect();
        Self { dim, degree, projectors }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The `(p, degree−p)` component of `a`; zero if that type is empty.
    pub fn project(&self, a: &KForm, p: usize) -> KForm {
        assert_eq!((a.dim(), a.degree()), (self.dim, self.degree), "form shape mismatch");
        match self.projectors.iter().find(|(q, _)| *q == p) {
            Some((_, m)) => {
                let v = m * DVector::from_column_slice(a.coeffs());
                KForm::new(self.dim, self.degree, v.iter().copied().collect()).expect("shape")
            }
            None => KForm::zero(self.dim, self.degree),
        }
    }

    /// Matrix of the projector onto `(p, degree−p)`.
    pub fn matrix(&self, p: usize) -> Option<&DMatrix<Complex64>> {
        self.projectors.iter().find(|(q, _)| *q == p).map(|(_, m)| m)
    }

    pub fn types(&self) -> impl Iterator<Item = usize> + '_ {
        self.projectors.iter().map(|(p, _)| *p)
    }
}

/// A `(p,q)` component of a form.
#[derive(Debug, Clone)]
pub struct TypeComponent {
    pub p: usize,
    pub q: usize,
    pub form: KForm,
}

/// Splits `a` into its `(p,q)` components with respect to `I`.
pub fn type_decompose(cs: &ComplexStructure, a: &KForm) -> Vec<TypeComponent> {
    let proj = TypeProjector::new(cs, a.degree());
    proj.types()
        .map(|p| TypeComponent { p, q: a.degree() - p, form: proj.project(a, p) })
        .collect()
}

/// Argument order in `g(u,v) = ω(I·,·)` that produced a positive metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricOrder {
    /// `g(u,v) = ω(Iu, v)`.
    ComplexStructureFirst,
    /// `g(u,v) = ω(u, Iv)`.
    ComplexStructureSecond,
}

#[derive(Debug, Clone)]
pub struct PairMetric {
    pub metric: Metric,
    pub order: MetricOrder,
}

/// Antisymmetric matrix `W[a,b] = ω(e_a, e_b)`.
pub fn two_form_matrix(omega: &KForm) -> DMatrix<f64> {
    let dim = omega.dim();
    let mut w = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                let v = omega
                    .evaluate(&[Vector::basis(dim, a), Vector::basis(dim, b)])
                    .expect("degree 2");
                w[(a, b)] = v.re;
            }
        }
    }
    w
}

/// `g_{Ω,ω}` built from `ω` and `I_Ω`, trying both argument orders.
pub fn metric_from(pair: &CalibrationPair, tol: &Tolerances) -> Result<PairMetric> {
    let cs = complex_structure(pair.volume(), tol)?;
    metric_from_structure(pair, &cs, tol)
}

fn metric_from_structure(pair: &CalibrationPair, cs: &ComplexStructure, tol: &Tolerances) -> Result<PairMetric> {
    let w = two_form_matrix(pair.kahler());
    let i = cs.matrix();
    let candidates = [
        (MetricOrder::ComplexStructureFirst, i.transpose() * &w),
        (MetricOrder::ComplexStructureSecond, &w * i),
    ];
    for (order, gram) in candidates {
        let scale = gram.amax().max(1.0);
        let asym = (&gram - gram.transpose()).amax() / scale;
        if asym <= tol.residual_tolerance.max(1e-9) {
            let sym = (&gram + gram.transpose()) * 0.5;
            if sym.clone().cholesky().is_some() {
                return Ok(PairMetric { metric: Metric::new(sym)?, order });
            }
        }
    }
    Err(Error::NotPositiveDefinite)
}

/// Orientation sign making `ωⁿ` positive relative to `dx^{0…2n−1}`.
pub fn kahler_orientation(pair: &CalibrationPair) -> f64 {
    let top = pair.kahler().power(pair.n()).expect("degree 2n");
    if top.coeffs()[0].re >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn relative(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

/// Kähler-Einstein conditions: `Ω∧ω = 0 = Ω̄∧ω`, `Ω∧Ω̄ = c_n ωⁿ`, and a
/// positive definite `g_{Ω,ω}`, plus the Calabi-Yau and reality
/// preconditions.
pub fn check_kahler_einstein(pair: &CalibrationPair, tol: &Tolerances) -> StructureReport {
    let n = pair.n();
    let om = pair.volume();
    let w = pair.kahler();
    let mut clauses = check_calabi_yau(om, tol).clauses;

    let imag = w.max_imag();
    clauses.push(ClauseVerdict::new("kahler_real", imag <= tol.residual_tolerance, Some(imag), None));

    let top = w.power(n).expect("degree 2n");
    clauses.push(ClauseVerdict::new(
        "kahler_nondegenerate",
        top.max_abs() > tol.residual_tolerance,
        Some(top.max_abs()),
        None,
    ));

    // Above the top degree the wedge vanishes identically.
    let wedge_size = |a: &KForm| match a.wedge(w) {
        Ok(f) => f.max_abs(),
        Err(Error::DegreeOverflow { .. }) => 0.0,
        Err(_) => f64::INFINITY,
    };
    let r1 = wedge_size(om);
    let r1b = wedge_size(&om.conjugate());
    let res1 = relative(r1.max(r1b), om.max_abs() * w.max_abs());
    clauses.push(ClauseVerdict::new("wedge_vanishes", res1 <= tol.residual_tolerance, Some(res1), None));

    let cn = monge_ampere_constant(n);
    let lhs = om.wedge(&om.conjugate()).expect("degree 2n");
    let rhs = top.scale(cn);
    let res2 = relative((&lhs - &rhs).max_abs(), lhs.max_abs().max(rhs.max_abs()));
    clauses.push(ClauseVerdict::new("monge_ampere", res2 <= tol.residual_tolerance, Some(res2), None));

    let metric_order = match complex_structure(om, tol).and_then(|cs| metric_from_structure(pair, &cs, tol)) {
        Ok(pm) => {
            clauses.push(ClauseVerdict::new(
                "metric_positive",
                true,
                None,
                Some(format!("{:?}", pm.order)),
            ));
            Some(pm.order)
        }
        Err(e) => {
            clauses.push(ClauseVerdict::new("metric_positive", false, None, Some(e.to_string())));
            None
        }
    };
    StructureReport { clauses, derived_constant_cn: Some([cn.re, cn.im]), metric_order }
}

/// Least-squares constants of the star identities
/// `⋆̄ i_vΩ = c₁ i_vω ∧ Ω̄` and `⋆ i_vω = c₂ i_vΩ∧Ω̄ + c̄₂ i_vΩ̄∧Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarConstants {
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    /// Largest relative residual of either identity over the batch.
    pub residual: f64,
    /// Largest deviation of a per-sample fit from the batch constant.
    pub max_deviation: f64,
}

impl StarConstants {
    pub fn c1(&self) -> Complex64 {
        Complex64::new(self.c1[0], self.c1[1])
    }
    pub fn c2(&self) -> Complex64 {
        Complex64::new(self.c2[0], self.c2[1])
    }
}

struct StarSample {
    lhs1: KForm,
    x1: KForm,
    lhs2: KForm,
    xa: KForm,
    xb: KForm,
}

fn star_sample(pair: &CalibrationPair, g: &Metric, orient: f64, v: &Vector) -> Result<StarSample> {
    let om = pair.volume();
    let ivo = om.interior(v)?;
    let ivw = pair.kahler().interior(v)?;
    Ok(StarSample {
        lhs1: hodge_star_conj(g, orient, &ivo)?,
        x1: ivw.wedge(&om.conjugate())?,
        lhs2: hodge_star(g, orient, &ivw)?,
        xa: ivo.wedge(&om.conjugate())?,
        xb: ivo.conjugate().wedge(om)?,
    })
}

fn hermitian_fit(xs: &[&KForm], ys: &[&KForm]) -> Complex64 {
    let mut num = ZERO;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        for (a, b) in x.coeffs().iter().zip(y.coeffs()) {
            num += a.conj() * b;
            den += a.norm_sqr();
        }
    }
    if den == 0.0 {
        ZERO
    } else {
        num / den
    }
}

/// Real-linear fit `y ≈ c·xa + c̄·xb`.
fn conjugate_pair_fit(samples: &[&StarSample]) -> Complex64 {
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for s in samples {
        for ((a, b), y) in s.xa.coeffs().iter().zip(s.xb.coeffs()).zip(s.lhs2.coeffs()) {
            // c = r + i t: c·a + c̄·b = r(a+b) + t·i(a−b)
            let u = a + b;
            let w = I * (a - b);
            rows.push([u.re, w.re, y.re]);
            rows.push([u.im, w.im, y.im]);
        }
    }
    let a = DMatrix::from_fn(rows.len(), 2, |r, c| rows[r][c]);
    let y = DVector::from_fn(rows.len(), |r, _| rows[r][2]);
    let ata = a.transpose() * &a;
    let aty = a.transpose() * y;
    match ata.try_inverse() {
        Some(inv) => {
            let sol = inv * aty;
            Complex64::new(sol[0], sol[1])
        }
        None => ZERO,
    }
}

fn star_residuals(s: &StarSample, c1: Complex64, c2: Complex64) -> f64 {
    let r1 = (&s.lhs1 - &s.x1.scale(c1)).max_abs() / s.lhs1.max_abs().max(1e-300);
    let fit2 = &s.xa.scale(c2) + &s.xb.scale(c2.conj());
    let r2 = (&s.lhs2 - &fit2).max_abs() / s.lhs2.max_abs().max(1e-300);
    r1.max(r2)
}

/// Fits `c₁, c₂` over `samples` seeded random real vectors.
pub fn star_constants(pair: &CalibrationPair, samples: usize, seed: u64, tol: &Tolerances) -> Result<StarConstants> {
    let pm = metric_from(pair, tol)?;
    let orient = kahler_orientation(pair);
    let mut rng = sampling::rng(seed);
    let batch: Vec<StarSample> = (0..samples.max(1))
        .map(|_| star_sample(pair, &pm.metric, orient, &sampling::real_vector(&mut rng, pair.dim())))
        .collect::<Result<_>>()?;
    let refs: Vec<&StarSample> = batch.iter().collect();
    let c1 = hermitian_fit(
        &batch.iter().map(|s| &s.x1).collect::<Vec<_>>(),
        &batch.iter().map(|s| &s.lhs1).collect::<Vec<_>>(),
    );
    let c2 = conjugate_pair_fit(&refs);
    let mut residual: f64 = 0.0;
    let mut max_deviation: f64 = 0.0;
    for s in &batch {
        residual = residual.max(star_residuals(s, c1, c2));
        let c1v = hermitian_fit(&[&s.x1], &[&s.lhs1]);
        let c2v = conjugate_pair_fit(&[s]);
        max_deviation = max_deviation.max((c1v - c1).norm()).max((c2v - c2).norm());
    }
    Ok(StarConstants { c1: [c1.re, c1.im], c2: [c2.re, c2.im], residual, max_deviation })
}

/// The complex Hodge star `⋆_ℂ : ∧^{p,0} → ∧^{n−p,0}` defined by
/// `c₂ (⋆_ℂ α) ∧ Ω̄ = ⋆̄ α`.
#[derive(Debug, Clone)]
pub struct ComplexHodge {
    pair: CalibrationPair,
    metric: Metric,
    orientation: f64,
    structure: ComplexStructure,
    c2: Complex64,
    tol: Tolerances,
}

impl ComplexHodge {
    pub fn new(pair: &CalibrationPair, tol: &Tolerances) -> Result<Self> {
        let structure = complex_structure(pair.volume(), tol)?;
        let pm = metric_from_structure(pair, &structure, tol)?;
        let consts = star_constants(pair, 8, 0x5eed, tol)?;
        if consts.residual > 1e-6 {
            return Err(Error::Inconsistent(format!("star identity residual {:e}", consts.residual)));
        }
        Ok(Self {
            pair: pair.clone(),
            metric: pm.metric,
            orientation: kahler_orientation(pair),
            structure,
            c2: consts.c2(),
            tol: *tol,
        })
    }

    pub fn structure(&self) -> &ComplexStructure {
        &self.structure
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    /// `⋆_ℂ a` for `a` of pure type `(p,0)`.
    pub fn apply(&self, a: &KForm) -> Result<KForm> {
        let n = self.pair.n();
        let p = a.degree();
        if p > n {
            return Err(Error::ImpureType { p, q: 0, residual: a.max_abs() });
        }
        let proj = TypeProjector::new(&self.structure, p);
        let pure = proj.project(a, p);
        let impurity = (a - &pure).max_abs() / a.max_abs().max(1.0);
        if impurity > self.tol.residual_tolerance.max(1e-9) {
            return Err(Error::ImpureType { p, q: 0, residual: impurity });
        }
        let target = hodge_star_conj(&self.metric, self.orientation, a)?.scale(ONE / self.c2);
        // Unknown ranges over the (n−p, 0) forms.
        let out_proj = TypeProjector::new(&self.structure, n - p);
        let basis = linalg::complex_column_space(out_proj.matrix(n - p).expect("type exists"), self.tol.rank_threshold);
        let conj_vol = self.pair.volume().conjugate();
        let dim = self.pair.dim();
        let rows = binomial(dim, 2 * n - p);
        let mut m = DMatrix::from_element(rows, basis.ncols(), ZERO);
        for j in 0..basis.ncols() {
            let x = KForm::new(dim, n - p, basis.column(j).iter().copied().collect())?;
            let w = x.wedge(&conj_vol)?;
            for (r, c) in w.coeffs().iter().enumerate() {
                m[(r, j)] = *c;
            }
        }
        let rhs = DVector::from_column_slice(target.coeffs());
        let svd = m.svd(true, true);
        let y = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Inconsistent(e.to_string()))?;
        let x = &basis * y;
        KForm::new(dim, n - p, x.iter().copied().collect())
    }
}


/// `⋆_ℂ a` for a `(p,0)` form `a`.
pub fn complex_hodge_star(pair: &CalibrationPair, a: &KForm, tol: &Tolerances) -> Result<KForm> {
    ComplexHodge::new(pair, tol)?.apply(a)
}
