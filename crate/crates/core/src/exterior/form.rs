use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::multi_index::{binomial, enumerate_masks, lex_rank, merge_sign, MultiIndex};
use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// A vector of `V ⊗ ℂ` in the coordinate basis `∂x_1 … ∂x_n, ∂y_1 … ∂y_n`.
/// Covectors use the same coordinate representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<Complex64>);

impl Vector {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, j: usize) -> Self {
        let mut c = vec![ZERO; dim];
        c[j] = ONE;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.norm() == 0.0)
    }

    /// Real parts of the coordinates.
    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).collect()
    }

    /// The same coordinates read as a 1-form.
    pub fn as_covector(&self) -> KForm {
        KForm { dim: self.dim(), degree: 1, coeffs: self.0.clone() }
    }
}

/// A constant-coefficient alternating `k`-form on `ℝ^dim` with complex
/// coefficients, stored densely in lexicographic multi-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, coeffs: vec![ZERO; binomial(dim, degree)] }
    }

    pub fn new(dim: usize, degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOverflow { degree, max: dim });
        }
        let expected = binomial(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: coeffs.len() });
        }
        Ok(Self { dim, degree, coeffs })
    }

    pub fn from_real(dim: usize, degree: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(dim, degree, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The constant function `c` as a 0-form.
    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self { dim, degree: 0, coeffs: vec![c] }
    }

    /// The basis element `dx^I`.
    pub fn basis(dim: usize, index: &MultiIndex) -> Self {
        let mut f = Self::zero(dim, index.degree());
        f.coeffs[index.rank(dim)] = ONE;
        f
    }

    /// `dx^i` (the `i`-th coordinate covector).
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim, 1);
        f.coeffs[i] = ONE;
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, index: &MultiIndex) -> Complex64 {
        self.coeffs[index.rank(self.dim)]
    }

    /// Iterates `(mask, coefficient)` over the basis.
    pub(crate) fn terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        enumerate_masks(self.dim, self.degree).into_iter().zip(self.coeffs.iter().copied())
    }

    pub(crate) fn slot(&self, mask: u64) -> usize {
        lex_rank(mask, self.dim, self.degree)
    }

    pub fn conjugate(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect(), ..self.clone() }
    }

    pub fn re(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect(), ..self.clone() }
    }

    pub fn im(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.im, 0.0)).collect(), ..self.clone() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect(), ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Exterior product `self ∧ other`.
    pub fn wedge(&self, other: &KForm) -> Result<KForm> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::DegreeOverflow { degree, max: self.dim });
        }
        let mut out = KForm::zero(self.dim, degree);
        for (a, ca) in self.terms() {
            if ca == ZERO {
                continue;
            }
            for (b, cb) in other.terms() {
                if cb == ZERO || a & b != 0 {
                    continue;
                }
                let slot = out.slot(a | b);
                out.coeffs[slot] += ca * cb * merge_sign(a, b);
            }
        }
        Ok(out)
    }

    /// `k`-fold exterior power `self ∧ … ∧ self`; the 0-th power is `1`.
    pub fn power(&self, k: usize) -> Result<KForm> {
        let mut acc = KForm::scalar(self.dim, ONE);
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Contraction `i_v self` with the antiderivation convention.
    pub fn interior(&self, v: &Vector) -> Result<KForm> {
        if self.degree == 0 {
            return Err(Error::DegreeZero);
        }
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.dim() });
        }
        let mut out = KForm::zero(self.dim, self.degree - 1);
        for (mask, c) in self.terms() {
            if c == ZERO {
                continue;
            }
            let mut bits = mask;
            let mut position = 0;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                let vj = v.coords()[j];
                if vj != ZERO {
                    let sign = if position % 2 == 0 { 1.0 } else { -1.0 };
                    let slot = out.slot(mask & !(1u64 << j));
                    out.coeffs[slot] += c * vj * sign;
                }
                bits &= bits - 1;
                position += 1;
            }
        }
        Ok(out)
    }

    /// Evaluates the form on `k` vectors: `Σ_I a_I det(v[I])`.
    pub fn evaluate(&self, vectors: &[Vector]) -> Result<Complex64> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch { expected: self.degree, found: vectors.len() });
        }
        // Iterated contraction keeps this exact for complex vectors.
        let mut f = self.clone();
        for v in vectors {
            f = f.interior(v)?;
        }
        Ok(f.coeffs[0])
    }

    fn zip_with(&self, other: &KForm, op: impl Fn(Complex64, Complex64) -> Complex64) -> KForm {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree), "form shape mismatch");
        KForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect(),
        }
    }
}

impl Add for &KForm {
    type Output = KForm;
    fn add(self, rhs: &KForm) -> KForm {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &KForm {
    type Output = KForm;
    fn sub(self, rhs: &KForm) -> KForm {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &KForm {
    type Output = KForm;
    fn neg(self) -> KForm {
        self.scale(-ONE)
    }
}

impl Mul<&KForm> for Complex64 {
    type Output = KForm;
    fn mul(self, rhs: &KForm) -> KForm {
        rhs.scale(self)
    }
}

impl Mul<&KForm> for f64 {
    type Output = KForm;
    fn mul(self, rhs: &KForm) -> KForm {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

/// `dz_k = dx_k + i·dy_k` on `ℝ^{2n}`.
pub fn dz(n: usize, k: usize) -> KForm {
    let mut f = KForm::zero(2 * n, 1);
    f.coeffs[k] = ONE;
    f.coeffs[n + k] = I;
    f
}

/// `dz̄_k = dx_k − i·dy_k` on `ℝ^{2n}`.
pub fn dzbar(n: usize, k: usize) -> KForm {
    dz(n, k).conjugate()
}
