//! Check orchestration: runs the requested checks of a scenario in order,
//! fail-soft, and collects named invariants, dimensions and residuals.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{binomial, KForm, I};
use crate::orbit::{
    complex_structure_tangent, exactness_sweep, isotropy_algebra, ke_vector, span_e1_contractions,
    span_e1_equations, span_e1_orbit, OrbitSpaces, StructureKind,
};
use crate::sampling;
use crate::scenario::{Scenario, ScenarioFile};
use crate::slag::{
    check_special_lagrangian, e0m_selfdual, e1m_layout, expected_gamma1_image, gamma1_sharp, h1_m_model,
    moduli_dimension_report, relative_derham_h1, relative_h1_cone, restriction_cohomology_maps,
    slag_preserving_deformation, SlagContext,
};
use crate::structures::{
    check_kahler_einstein, complex_structure, star_constants, CalibrationPair, ComplexHodge, Tolerances,
    TypeProjector,
};
use crate::torus::{
    h0_model_with, h1_by_equations, h1_orbit_model, h0_layout, kahler_projection_surjective, lefschetz_decompose,
};

/// Subspace equality bound used wherever two independently computed
/// subspaces are compared.
pub const SUBSPACE_TOLERANCE: f64 = 1e-8;

const MARGIN_CLAUSES: [&str; 2] = ["kernel_transverse_to_conjugate", "kahler_nondegenerate"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub invariants: Vec<Invariant>,
    /// Names of failed invariants.
    pub failed: Vec<String>,
    pub dimensions: BTreeMap<String, usize>,
    pub residuals: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
}

impl CheckResult {
    fn skipped(name: &str, reason: &str) -> Self {
        let mut c = Recorder::default().finish(name);
        c.status = Status::Skipped;
        c.reason = Some(reason.to_string());
        c
    }

    pub fn invariant(&self, name: &str) -> Option<&Invariant> {
        self.invariants.iter().find(|i| i.name == name)
    }
}

#[derive(Default)]
struct Recorder {
    invariants: Vec<Invariant>,
    dimensions: BTreeMap<String, usize>,
    residuals: BTreeMap<String, f64>,
    values: BTreeMap<String, f64>,
    notes: BTreeMap<String, String>,
}

impl Recorder {
    fn expect(&mut self, name: &str, passed: bool, detail: Option<String>) {
        self.invariants.push(Invariant { name: name.into(), passed, detail });
    }

    fn expect_dim(&mut self, name: &str, actual: usize, expected: usize) {
        self.dimensions.insert(name.into(), actual);
        self.expect(name, actual == expected, Some(format!("{actual} (expected {expected})")));
    }

    fn expect_small(&mut self, name: &str, residual: f64, bound: f64) {
        self.residuals.insert(name.into(), residual);
        self.expect(name, residual <= bound, Some(format!("{residual:.3e} (bound {bound:.0e})")));
    }

    fn expect_large(&mut self, name: &str, distance: f64, bound: f64) {
        self.values.insert(name.into(), distance);
        self.expect(name, distance > bound, Some(format!("{distance:.3e} (must exceed {bound:.0e})")));
    }

    fn dim(&mut self, name: &str, d: usize) {
        self.dimensions.insert(name.into(), d);
    }

    fn value(&mut self, name: &str, v: f64) {
        self.values.insert(name.into(), v);
    }

    fn note(&mut self, name: &str, v: impl Into<String>) {
        self.notes.insert(name.into(), v.into());
    }

    fn finish(self, name: &str) -> CheckResult {
        let failed: Vec<String> = self.invariants.iter().filter(|i| !i.passed).map(|i| i.name.clone()).collect();
        CheckResult {
            name: name.into(),
            status: if failed.is_empty() { Status::Pass } else { Status::Fail },
            reason: None,
            invariants: self.invariants,
            failed,
            dimensions: self.dimensions,
            residuals: self.residuals,
            values: self.values,
            notes: self.notes,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub scenario: ScenarioFile,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    /// Wall-clock milliseconds per check; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn without_timings(&self) -> Self {
        Self { timings_ms: BTreeMap::new(), ..self.clone() }
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.as_str()).collect()
    }
}

struct Run<'a> {
    s: &'a Scenario,
    tol: Tolerances,
    structure_ok: Option<bool>,
    slag: Option<std::result::Result<SlagContext, String>>,
}

fn coupled_samples(samples: usize, cap: usize) -> usize {
    samples.clamp(1, cap)
}

impl<'a> Run<'a> {
    fn pair(&self) -> &CalibrationPair {
        &self.s.pair
    }

    fn n(&self) -> usize {
        self.s.n()
    }

    fn structure_ok(&mut self) -> bool {
        if self.structure_ok.is_none() {
            self.structure_ok = Some(check_kahler_einstein(self.pair(), &self.tol).passed());
        }
        self.structure_ok.unwrap_or(false)
    }

    fn slag_context(&mut self) -> std::result::Result<&SlagContext, String> {
        if self.slag.is_none() {
            let r = match &self.s.subtorus {
                None => Err("precondition: no subtorus".to_string()),
                Some(m) => SlagContext::new(self.pair(), m, self.s.samples().min(20), self.s.seed(), &self.tol)
                    .map_err(|e| match e {
                        Error::NotSpecialLagrangian(_) => "precondition: subtorus is not special Lagrangian".to_string(),
                        other => other.to_string(),
                    }),
            };
            self.slag = Some(r);
        }
        match self.slag.as_ref().expect("set above") {
            Ok(c) => Ok(c),
            Err(e) => Err(e.clone()),
        }
    }

    fn structure(&mut self, rec: &mut Recorder) -> Result<()> {
        let tol = self.tol;
        let report = check_kahler_einstein(self.pair(), &tol);
        for c in &report.clauses {
            if let Some(r) = c.residual {
                // Nondegeneracy clauses report a margin, not a residual.
                if MARGIN_CLAUSES.contains(&c.name.as_str()) {
                    rec.value(&c.name, r);
                } else {
                    rec.residuals.insert(c.name.clone(), r);
                }
            }
            rec.expect(&c.name, c.passed, c.note.clone().or(c.residual.map(|r| format!("{r:.3e}"))));
        }
        if let Some(cn) = report.derived_constant_cn {
            rec.value("c_n.re", cn[0]);
            rec.value("c_n.im", cn[1]);
        }
        if let Some(order) = report.metric_order {
            rec.note("metric_order", format!("{order:?}"));
        }
        self.structure_ok = Some(report.passed());

        // Orbit invariance of the verdict and equivariance of I.
        let mut rng = sampling::rng(self.s.seed() ^ 0x5157);
        let trials = coupled_samples(self.s.samples(), 50);
        let base_i = complex_structure(self.pair().volume(), &tol).ok();
        let mut flips = 0;
        let mut equivariance: f64 = 0.0;
        for _ in 0..trials {
            let g = sampling::gl_near_identity(&mut rng, self.pair().dim(), 0.3);
            let moved = self.pair().pullback(&g)?;
            if check_kahler_einstein(&moved, &tol).passed() != report.passed() {
                flips += 1;
            }
            if let (Some(i0), Ok(i1)) = (&base_i, complex_structure(moved.volume(), &tol)) {
                let gi = g.inverse().expect("invertible");
                let expected = gi.matrix() * i0.matrix() * g.matrix();
                equivariance = equivariance.max((i1.matrix() - expected).amax());
            }
        }
        rec.expect("orbit_invariance", flips == 0, Some(format!("{flips} of {trials} pullbacks changed the verdict")));
        if base_i.is_some() {
            rec.expect_small("complex_structure_equivariance", equivariance, SUBSPACE_TOLERANCE);
        }
        Ok(())
    }

    fn ellipticity(&mut self, rec: &mut Recorder) -> Result<()> {
        let tol = self.tol;
        for (kind, tag) in [(StructureKind::CalabiYau, "cy"), (StructureKind::KahlerEinstein, "ke")] {
            let spaces = OrbitSpaces::build(self.pair(), kind, tol.rank_threshold)?;
            let [d0, d1, d2] = spaces.dims();
            rec.dim(&format!("{tag}.e0"), d0);
            rec.dim(&format!("{tag}.e1"), d1);
            rec.dim(&format!("{tag}.e2"), d2);
            let sweep = exactness_sweep(&spaces, self.s.samples(), self.s.seed(), &tol)?;
            rec.dim(&format!("{tag}.directions"), sweep.directions);
            rec.residuals.insert(format!("{tag}.containment"), sweep.max_residual);
            rec.expect(
                &format!("{tag}.symbol_exact"),
                sweep.failures == 0,
                Some(format!("{} failures over {} directions", sweep.failures, sweep.directions)),
            );
        }
        Ok(())
    }

    fn isotropy(&mut self, rec: &mut Recorder) -> Result<()> {
        let n = self.n();
        let tol = self.tol;
        let ke = isotropy_algebra(self.pair(), StructureKind::KahlerEinstein, &tol)?;
        let cy = isotropy_algebra(self.pair(), StructureKind::CalabiYau, &tol)?;
        rec.expect_dim("ke.isotropy", ke.dim(), n * n - 1);
        rec.expect_dim("cy.isotropy", cy.dim(), 2 * (n * n - 1));
        rec.expect_small("ke.metrical", ke.orthogonality_residual.unwrap_or(f64::INFINITY), tol.residual_tolerance);
        let e1_ke = span_e1_orbit(self.pair(), StructureKind::KahlerEinstein, tol.rank_threshold)?;
        let e1_cy = span_e1_orbit(self.pair(), StructureKind::CalabiYau, tol.rank_threshold)?;
        rec.expect_dim("ke.rank_nullity", e1_ke.dim() + ke.dim(), 4 * n * n);
        rec.expect_dim("cy.rank_nullity", e1_cy.dim() + cy.dim(), 4 * n * n);
        rec.expect_dim("ke.e1", e1_ke.dim(), 3 * n * n + 1);
        rec.expect_dim("cy.e1", e1_cy.dim(), 2 * n * n + 2);
        Ok(())
    }

    fn e1_crosscheck(&mut self, rec: &mut Recorder) -> Result<()> {
        let tol = self.tol;
        let n = self.n();
        let orbit = span_e1_orbit(self.pair(), StructureKind::KahlerEinstein, tol.rank_threshold)?;
        let eqs = span_e1_equations(self.pair(), &tol)?;
        let contractions = span_e1_contractions(self.pair(), StructureKind::KahlerEinstein, tol.rank_threshold)?;
        rec.dim("e1.orbit", orbit.dim());
        rec.expect_dim("e1.equations", eqs.dim(), orbit.dim());
        rec.expect_small("orbit_equals_equations", orbit.mutual_residual(&eqs), SUBSPACE_TOLERANCE);
        rec.expect_small("orbit_equals_contractions", orbit.mutual_residual(&contractions), SUBSPACE_TOLERANCE);
        let zero = KForm::zero(2 * n, 2);
        let om = self.pair().volume();
        rec.expect_small("i_omega_tangent", orbit.distance(&ke_vector(&om.scale(I), &zero)), SUBSPACE_TOLERANCE);
        rec.expect_small("rho_i_tangent", orbit.distance(&complex_structure_tangent(self.pair(), &tol)?), SUBSPACE_TOLERANCE);
        rec.expect_large("omega_not_tangent", orbit.distance(&ke_vector(om, &zero)), SUBSPACE_TOLERANCE);
        rec.value("i_omega_with_kahler_distance", orbit.distance(&ke_vector(&om.scale(I), self.pair().kahler())));
        Ok(())
    }

    fn h1_models(&mut self, rec: &mut Recorder) -> Result<()> {
        let tol = self.tol;
        let n = self.n();
        let pair = self.pair().clone();
        let orbit = h1_orbit_model(&pair, &tol)?;
        let eqs = h1_by_equations(&pair, &tol)?;
        rec.expect_dim("h1.orbit", orbit.dim(), 3 * n * n + 1);
        rec.dim("h1.equations", eqs.dim());
        rec.dim("h1.discrepancy", eqs.dim().saturating_sub(orbit.dim()));
        rec.expect_small("orbit_in_equations", eqs.basis.contains_residual(&orbit.basis), SUBSPACE_TOLERANCE);
        let zero = KForm::zero(2 * n, 2);
        rec.expect_small(
            "i_omega_in_equations",
            eqs.basis.distance(&ke_vector(&pair.volume().scale(I), &zero)),
            SUBSPACE_TOLERANCE,
        );
        rec.expect_small("rho_i_in_orbit", orbit.basis.distance(&complex_structure_tangent(&pair, &tol)?), SUBSPACE_TOLERANCE);

        let kp = kahler_projection_surjective(&pair, &orbit, &tol)?;
        rec.dim("kahler_projection.rank", kp.rank);
        rec.dim("kahler_projection.attainable", kp.attainable);
        rec.dim("h2", kp.h2_dim);
        rec.expect("kahler_projection_surjective", kp.surjective, Some(format!("rank {} of {}", kp.rank, kp.attainable)));

        // Lefschetz decomposition of seeded random forms.
        let mut rng = sampling::rng(self.s.seed() ^ 0x1ef5);
        let dim = 2 * n;
        let alpha = {
            let re = sampling::normal_vec(&mut rng, binomial(dim, n));
            let im = sampling::normal_vec(&mut rng, binomial(dim, n));
            KForm::new(dim, n, re.iter().zip(&im).map(|(a, b)| num_complex::Complex64::new(*a, *b)).collect())?
        };
        let beta = KForm::from_real(dim, 2, &sampling::normal_vec(&mut rng, binomial(dim, 2)))?;
        let mut reassembly: f64 = 0.0;
        let mut primitivity: f64 = 0.0;
        for a in [&alpha, &beta] {
            let parts = lefschetz_decompose(&pair, a, &tol)?;
            let sum = parts.iter().fold(KForm::zero(dim, a.degree()), |acc, c| &acc + &c.form);
            reassembly = reassembly.max((&sum - a).max_abs() / a.max_abs());
            for c in &parts {
                primitivity = primitivity.max(c.primitivity_residual(pair.kahler()));
            }
        }
        rec.expect_small("lefschetz_reassembly", reassembly, 1e-12);
        rec.expect_small("lefschetz_primitivity", primitivity, 1e-10);
        if n >= 2 {
            let beta_blocks = lefschetz_decompose(&pair, &beta, &tol)?.iter().filter(|c| c.form.max_abs() > 1e-10).count();
            rec.expect_dim("lefschetz_beta_blocks", beta_blocks, 4);
            // α of an orbit tangent vector.
            let coords = DVector::from_vec(sampling::normal_vec(&mut rng, orbit.dim()));
            let v = orbit.basis.basis() * coords;
            let forms = orbit.layout.unflatten(v.as_slice())?;
            let alpha_blocks =
                lefschetz_decompose(&pair, &forms[0], &tol)?.iter().filter(|c| c.form.max_abs() > 1e-10).count();
            rec.expect_dim("lefschetz_alpha_blocks", alpha_blocks, 3);
        }

        // Stability under GL pullbacks.
        let trials = coupled_samples(self.s.samples() / 10, 10);
        let mut drift = 0;
        for _ in 0..trials {
            let g = sampling::gl_near_identity(&mut rng, dim, 0.3);
            let moved = pair.pullback(&g)?;
            if h1_orbit_model(&moved, &tol)?.dim() != orbit.dim() || h1_by_equations(&moved, &tol)?.dim() != eqs.dim() {
                drift += 1;
            }
        }
        rec.expect("gl_stability", drift == 0, Some(format!("{drift} of {trials} pullbacks changed a dimension")));
        Ok(())
    }

    fn h0_model(&mut self, rec: &mut Recorder) -> Result<()> {
        let tol = self.tol;
        let n = self.n();
        let pair = self.pair().clone();
        let hodge = ComplexHodge::new(&pair, &tol)?;
        let h0 = h0_model_with(&hodge, &pair, &tol)?;
        rec.expect_dim("h0", h0.dim(), 2 * n);

        let proj = TypeProjector::new(hodge.structure(), 1);
        let mut rng = sampling::rng(self.s.seed() ^ 0x40);
        let layout = h0_layout(n);
        let (mut star_res, mut member): (f64, f64) = (0.0, 0.0);
        let mut b_zero = 0usize;
        for _ in 0..self.s.samples() {
            let v = sampling::real_vector(&mut rng, pair.dim());
            let a = pair.volume().interior(&v)?;
            let b = pair.kahler().interior(&v)?;
            let s = hodge.apply(&proj.project(&b, 1))?;
            star_res = star_res.max((&s - &a).max_abs() / a.max_abs().max(1.0));
            member = member.max(h0.basis.distance(&layout.flatten(&[a, b])));
        }
        // No nonzero element with b = 0.
        let off = layout.offset(1);
        let b_rows = h0.basis.basis().rows(off, layout.real_dim() - off).into_owned();
        if crate::linalg::rank(&b_rows, tol.rank_threshold) != h0.dim() {
            b_zero += 1;
        }
        rec.expect_small("complex_star_contraction", star_res, tol.residual_tolerance);
        rec.expect_small("contractions_in_h0", member, SUBSPACE_TOLERANCE);
        rec.expect("h0_b_injective", b_zero == 0, None);

        let batch = self.s.samples().max(20);
        let c_a = star_constants(&pair, batch, self.s.seed(), &tol)?;
        let c_b = star_constants(&pair, batch, self.s.seed().wrapping_add(0x9e37_79b9_7f4a_7c15), &tol)?;
        rec.value("c1.re", c_a.c1[0]);
        rec.value("c1.im", c_a.c1[1]);
        rec.value("c2.re", c_a.c2[0]);
        rec.value("c2.im", c_a.c2[1]);
        rec.expect_small("star_identity_residual", c_a.residual.max(c_b.residual), tol.residual_tolerance);
        rec.expect_small("star_constants_v_independent", c_a.max_deviation.max(c_b.max_deviation), SUBSPACE_TOLERANCE);
        let batch_gap = (c_a.c1() - c_b.c1()).norm().max((c_a.c2() - c_b.c2()).norm());
        rec.expect_small("star_constants_batch_independent", batch_gap, SUBSPACE_TOLERANCE);
        Ok(())
    }

    fn slag(&mut self, rec: &mut Recorder) -> std::result::Result<(), String> {
        let tol = self.tol;
        let n = self.n();
        let m = self.s.subtorus.clone().ok_or("precondition: no subtorus")?;
        let r = check_special_lagrangian(self.pair(), &m, &tol).map_err(|e| e.to_string())?;
        rec.expect_small("im_omega_restricts_to_zero", r.residual_im_omega, tol.residual_tolerance);
        rec.expect_small("kahler_restricts_to_zero", r.residual_omega, tol.residual_tolerance);
        rec.value("volume_calibration", r.volume_calibration);
        if !r.passed {
            return Ok(());
        }
        rec.expect_small("calibrated", (r.volume_calibration.abs() - 1.0).abs(), tol.residual_tolerance.max(1e-10));
        let ctx = self.slag_context()?.clone();
        let mut inner = || -> Result<()> {
            let sd = e0m_selfdual(&ctx, self.s.samples(), self.s.seed())?;
            rec.value("sigma", sd.sigma_relative_to_calibration);
            rec.expect_small("self_duality", sd.generator_residual, tol.residual_tolerance);
            rec.expect_dim("e0_m", sd.basis.dim(), n);
            let h1m = h1_m_model(&ctx)?;
            rec.expect_dim("h1_m", h1m.dim(), 1 + n * (n - 1) / 2);
            let vol = e1m_layout(n).flatten(&[ctx.volume_m().clone(), KForm::zero(n, 2)]);
            rec.expect_small("volume_attained", h1m.basis.distance(&vol), SUBSPACE_TOLERANCE);
            if n >= 2 {
                let layout = e1m_layout(n);
                let off = layout.offset(1);
                let two = h1m.basis.basis().rows(off, layout.real_dim() - off).into_owned();
                rec.expect_dim("two_forms_attained", crate::linalg::rank(&two, tol.rank_threshold), binomial(n, 2));
            }
            Ok(())
        };
        inner().map_err(|e| e.to_string())
    }

    fn relative(&mut self, rec: &mut Recorder) -> std::result::Result<(), String> {
        let ctx = self.slag_context()?.clone();
        let tol = self.tol;
        let n = self.n();
        let mut inner = || -> Result<()> {
            let h1 = h1_orbit_model(&ctx.pair, &tol)?;
            let maps = restriction_cohomology_maps(&ctx.subtorus, &ctx.metric, tol.rank_threshold)?;
            rec.dim("gamma_h1.rank", maps.gamma_h1.rank);
            rec.dim("gamma_h1.coker", maps.gamma_h1.coker);
            rec.dim("gamma_h2.rank", maps.gamma_h2.rank);
            rec.dim("gamma_hn.rank", maps.gamma_hn.rank);
            let g1 = gamma1_sharp(&ctx, &h1)?;
            rec.expect_dim("gamma1.image", g1.image.dim(), 1 + maps.gamma_h2.rank);
            rec.expect_dim("gamma1.rank_nullity", g1.image.dim() + g1.kernel.dim(), h1.dim());
            rec.expect_small(
                "gamma1_image_is_top_plus_restricted_two_forms",
                g1.image.mutual_residual(&expected_gamma1_image(&ctx, &maps)),
                SUBSPACE_TOLERANCE,
            );
            let cone = relative_h1_cone(&ctx, &h1)?;
            rec.dim("cone.kernel", cone.kernel.dim());
            rec.dim("cone.cokernel", cone.cokernel.dim());
            rec.expect_dim("h0_m", cone.dim_e0m, n);
            rec.expect_dim("exact_sequence", cone.dim(), maps.gamma_h1.coker + g1.kernel.dim());
            let e0m = ctx.e0m()?;
            let e0 = crate::orbit::span_e0(&ctx.pair, StructureKind::KahlerEinstein, tol.rank_threshold)?;
            let layout0 = StructureKind::KahlerEinstein.layout(n).lowered();
            let k0 = layout0.map_matrix(e0.basis(), e0m.ambient_dim(), |f| ctx.kappa0(f))?;
            rec.expect_small("kappa0_image_self_dual", e0m.containment_residual(&k0), SUBSPACE_TOLERANCE);
            let rel = relative_derham_h1(&ctx, &cone)?;
            rec.dim("relative_derham", rel.dim);
            rec.dim("relative_map_rank", rel.map_rank);
            rec.expect("relative_injective", rel.injective, Some(format!("rank {} of {}", rel.map_rank, cone.dim())));
            Ok(())
        };
        inner().map_err(|e| e.to_string())
    }

    fn moduli(&mut self, rec: &mut Recorder) -> std::result::Result<(), String> {
        let ctx = self.slag_context()?.clone();
        let tol = self.tol;
        let seed = self.s.seed();
        let trials = coupled_samples(self.s.samples(), 20);
        let mut inner = || -> Result<()> {
            let r = moduli_dimension_report(&ctx)?;
            rec.dim("h1_x", r.dim_h1_x);
            rec.dim("h1_x_equations", r.dim_h1_x_equations);
            rec.dim("h1_m", r.dim_h1_m);
            rec.dim("h0_m", r.dim_h0_m);
            rec.dim("ker_gamma1", r.dim_ker_gamma1);
            rec.dim("ker_gamma1_equations", r.dim_ker_gamma1_equations);
            rec.dim("coker_gamma_h1", r.dim_coker_gamma_h1);
            rec.dim("coker_kappa0", r.dim_coker_kappa0);
            rec.dim("h1_xm_cone", r.dim_h1_xm_cone);
            rec.dim("relative_derham", r.dim_relative_derham);
            rec.dim("fiber", r.fibration[0]);
            rec.dim("base", r.fibration[1]);
            rec.dim("total", r.fibration[2]);
            rec.expect("fibration_identity", r.identity_verdict, None);
            rec.expect("relative_injective", r.injectivity_verdict, None);

            let mut rng = sampling::rng(seed ^ 0xdef0);
            let mut changed = 0;
            for _ in 0..trials {
                let g = slag_preserving_deformation(&ctx.subtorus, &mut rng, 0.1)?;
                let moved = ctx.pair.pullback(&g)?;
                let c = SlagContext::new(&moved, &ctx.subtorus, 8, seed, &tol)?;
                let cone = relative_h1_cone(&c, &h1_orbit_model(&moved, &tol)?)?;
                if cone.dim() != r.dim_h1_xm_cone {
                    changed += 1;
                }
            }
            rec.expect("deformation_invariance", changed == 0, Some(format!("{changed} of {trials} deformations changed the dimension")));
            Ok(())
        };
        inner().map_err(|e| e.to_string())
    }
}

fn run_one(run: &mut Run<'_>, name: &str) -> CheckResult {
    if name != "structure" && !run.structure_ok() {
        return CheckResult::skipped(name, "precondition: structure");
    }
    if matches!(name, "relative" | "moduli") {
        if let Err(reason) = run.slag_context() {
            if reason.starts_with("precondition") {
                return CheckResult::skipped(name, &reason);
            }
            let mut c = Recorder::default().finish(name);
            c.status = Status::Fail;
            c.reason = Some(reason);
            return c;
        }
    }
    let mut rec = Recorder::default();
    let outcome: std::result::Result<(), String> = match name {
        "structure" => run.structure(&mut rec).map_err(|e| e.to_string()),
        "ellipticity" => run.ellipticity(&mut rec).map_err(|e| e.to_string()),
        "isotropy" => run.isotropy(&mut rec).map_err(|e| e.to_string()),
        "e1_crosscheck" => run.e1_crosscheck(&mut rec).map_err(|e| e.to_string()),
        "h1_models" => run.h1_models(&mut rec).map_err(|e| e.to_string()),
        "h0_model" => run.h0_model(&mut rec).map_err(|e| e.to_string()),
        "slag" => run.slag(&mut rec),
        "relative" => run.relative(&mut rec),
        "moduli" => run.moduli(&mut rec),
        other => Err(format!("unknown check {other}")),
    };
    match outcome {
        Ok(()) => rec.finish(name),
        Err(reason) if reason.starts_with("precondition") => CheckResult::skipped(name, &reason),
        Err(reason) => {
            let mut c = rec.finish(name);
            c.status = Status::Fail;
            c.reason = Some(reason);
            c
        }
    }
}

/// Runs every requested check of `s`; never aborts on a failing check.
pub fn run_checks(s: &Scenario) -> RunReport {
    let mut run = Run { s, tol: s.tolerances, structure_ok: None, slag: None };
    let mut checks = Vec::with_capacity(s.checks.len());
    let mut timings_ms = BTreeMap::new();
    for name in &s.checks {
        let start = Instant::now();
        checks.push(run_one(&mut run, name));
        timings_ms.insert(name.clone(), start.elapsed().as_secs_f64() * 1e3);
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    RunReport { version: env!("CARGO_PKG_VERSION").to_string(), scenario: s.file.clone(), checks, passed, timings_ms }
}

