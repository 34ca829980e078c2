//! Linear-group action on forms, pullbacks and restriction to subspaces.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::form::{KForm, ZERO};
use super::multi_index::{enumerate_masks, merge_sign};
use crate::error::{Error, Result};
use crate::linalg;

/// An element of `gl(V)` or `GL(V)` as a real `2n × 2n` matrix acting on
/// coordinate vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GlElement(DMatrix<f64>);

impl GlElement {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Elementary matrix `E_{ij}` (maps basis vector `j` to basis vector `i`).
    pub fn elementary(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = 1.0;
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(Self)
    }
}

/// Infinitesimal action `(ρ_ξ a)(v_1,…,v_k) = −Σ_j a(v_1,…,ξv_j,…,v_k)`.
pub fn gl_act(xi: &GlElement, a: &KForm) -> Result<KForm> {
    let dim = a.dim();
    if xi.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: xi.dim() });
    }
    let m = xi.matrix();
    let mut out = KForm::zero(dim, a.degree());
    for (mask, c) in a.terms() {
        if c == ZERO {
            continue;
        }
        // dx^i ↦ Σ_j ξ_{ij} dx^j in each factor.
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            let rest = mask & !(1u64 << i);
            // sign of moving factor i to the front of mask
            let front = merge_sign(1u64 << i, rest);
            for j in 0..dim {
                let x = m[(i, j)];
                if x == 0.0 || rest & (1u64 << j) != 0 {
                    continue;
                }
                let sign = front * merge_sign(1u64 << j, rest);
                let slot = out.slot(rest | (1u64 << j));
                out.coeffs_mut()[slot] -= c * x * sign;
            }
            bits &= bits - 1;
        }
    }
    Ok(out)
}

fn minor(m: &DMatrix<f64>, rows: u64, cols: u64) -> f64 {
    let r: Vec<usize> = (0..64).filter(|i| rows & (1u64 << i) != 0).collect();
    let c: Vec<usize> = (0..64).filter(|i| cols & (1u64 << i) != 0).collect();
    if r.is_empty() {
        return 1.0;
    }
    DMatrix::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])]).determinant()
}

/// Pullback along a linear map `J: ℝ^m → ℝ^dim` given as a `dim × m` matrix:
/// `(J^* a)(w_1,…,w_k) = a(Jw_1,…,Jw_k)`.
fn pullback_matrix(j: &DMatrix<f64>, a: &KForm) -> KForm {
    let m = j.ncols();
    let k = a.degree();
    let mut out = KForm::zero(m, k);
    if k > m {
        return out;
    }
    let targets = enumerate_masks(m, k);
    for (t, &target) in targets.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (source, c) in a.terms() {
            if c == ZERO {
                continue;
            }
            acc += c * minor(j, source, target);
        }
        out.coeffs_mut()[t] = acc;
    }
    out
}

/// Pullback `g^* a` by a linear automorphism.
pub fn pullback(g: &GlElement, a: &KForm) -> Result<KForm> {
    if g.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: g.dim() });
    }
    Ok(pullback_matrix(g.matrix(), a))
}

/// Group action `ρ_g a = (g⁻¹)^* a`; its differential is [`gl_act`].
pub fn act(g: &GlElement, a: &KForm) -> Result<KForm> {
    let inv = g.inverse().ok_or(Error::RankDeficient { rank: 0, expected: g.dim() })?;
    pullback(&inv, a)
}

/// Restriction of `a` to the subspace spanned by the columns of `inclusion`
/// (a `dim × m` matrix of full column rank). The result lives on `ℝ^m` in the
/// coordinates given by those columns.
pub fn restrict(inclusion: &DMatrix<f64>, a: &KForm) -> Result<KForm> {
    if inclusion.nrows() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: inclusion.nrows() });
    }
    let m = inclusion.ncols();
    let r = linalg::rank(inclusion, linalg::DEFAULT_RANK_THRESHOLD);
    if r < m {
        return Err(Error::RankDeficient { rank: r, expected: m });
    }
    // ∧^k of an m-dimensional space is zero for k > m.
    if a.degree() > m {
        return Ok(KForm::zero(m, a.degree()));
    }
    Ok(pullback_matrix(inclusion, a))
}
