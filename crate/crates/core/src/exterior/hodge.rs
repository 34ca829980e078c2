//! Metrics and the Hodge star on constant forms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::form::KForm;
use super::multi_index::{enumerate_masks, merge_sign};
use crate::error::{Error, Result};

/// A symmetric bilinear form on `ℝ^dim` given by its Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    gram: DMatrix<f64>,
}

impl Metric {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::DimensionMismatch { expected: gram.nrows(), found: gram.ncols() });
        }
        Ok(Self { gram })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { gram: DMatrix::identity(dim, dim) }
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.gram - self.gram.transpose()).amax()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.gram.amax().max(1.0)
    }

    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.is_symmetric(tol) && self.gram.clone().cholesky().is_some()
    }

    /// Inner product matrix induced on `∧^k` by the inverse metric:
    /// `⟨dx^A, dx^B⟩ = det(g⁻¹[A,B])`.
    pub fn form_gram(&self, k: usize) -> Result<DMatrix<f64>> {
        let inv = self.gram.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
        let masks = enumerate_masks(self.dim(), k);
        let idx = |m: u64| -> Vec<usize> { (0..64).filter(|i| m & (1u64 << i) != 0).collect() };
        Ok(DMatrix::from_fn(masks.len(), masks.len(), |r, c| {
            let (a, b) = (idx(masks[r]), idx(masks[c]));
            if a.is_empty() {
                return 1.0;
            }
            DMatrix::from_fn(a.len(), b.len(), |i, j| inv[(a[i], b[j])]).determinant()
        }))
    }

    /// Complex-bilinear inner product of two forms of equal degree.
    pub fn inner(&self, a: &KForm, b: &KForm) -> Result<Complex64> {
        let g = self.form_gram(a.degree())?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, ai) in a.coeffs().iter().enumerate() {
            for (j, bj) in b.coeffs().iter().enumerate() {
                acc += ai * bj * g[(i, j)];
            }
        }
        Ok(acc)
    }

    /// Unit-norm volume form `s·sqrt(det g)·dx^{0…dim-1}`.
    pub fn volume(&self, orientation_sign: f64) -> KForm {
        let mut v = KForm::zero(self.dim(), self.dim());
        v.coeffs_mut()[0] = Complex64::new(orientation_sign * self.gram.determinant().sqrt(), 0.0);
        v
    }
}

/// Complex-linear Hodge star, characterised by `a ∧ ⋆b = ⟨a,b⟩_g vol_g`.
pub fn hodge_star(g: &Metric, orientation_sign: f64, a: &KForm) -> Result<KForm> {
    let dim = a.dim();
    if g.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
    }
    if !g.is_positive_definite(1e-10) {
        return Err(Error::NotPositiveDefinite);
    }
    let k = a.degree();
    let gk = g.form_gram(k)?;
    let scale = orientation_sign.signum() * g.gram().determinant().sqrt();
    let full = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
    let mut out = KForm::zero(dim, dim - k);
    for (r, mask) in enumerate_masks(dim, k).into_iter().enumerate() {
        let mut gb = Complex64::new(0.0, 0.0);
        for (c, coeff) in a.coeffs().iter().enumerate() {
            gb += coeff * gk[(r, c)];
        }
        let comp = full & !mask;
        let slot = out.slot(comp);
        out.coeffs_mut()[slot] = gb * scale * merge_sign(mask, comp);
    }
    Ok(out)
}

/// Conjugate-linear star `⋆̄a = ⋆ā`, mapping `(p,q)` forms to `(n−p, n−q)`.
pub fn hodge_star_conj(g: &Metric, orientation_sign: f64, a: &KForm) -> Result<KForm> {
    hodge_star(g, orientation_sign, &a.conjugate())
}
