//! Dense numerical linear algebra on the small coefficient spaces used
//! throughout: thresholded ranks, orthonormal bases, nullspaces and
//! subspace containment.
//!
//! Every rank decision counts singular values above `threshold * sigma_max`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default relative singular-value threshold for rank decisions.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;

fn sorted_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    // Pad with zero rows so V^T is square and carries the full nullspace.
    let (m, k) = a.shape();
    let padded = if m < k {
        let mut p = DMatrix::zeros(k, k);
        p.view_mut((0, 0), (m, k)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sv: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt_sorted = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    (u_sorted, sv, vt_sorted)
}

fn count_above(sv: &[f64], threshold: f64) -> usize {
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > threshold * max).count()
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(a: &DMatrix<f64>, threshold: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    count_above(sv.as_slice(), threshold)
}

/// Orthonormal basis of the nullspace `{x : a x = 0}`.
pub fn nullspace(a: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let k = a.ncols();
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(k, k);
    }
    let (_, sv, vt) = sorted_svd(a);
    let r = count_above(&sv, threshold);
    let rows = vt.rows(r, k - r).into_owned();
    rows.transpose()
}

/// Orthonormal basis of the column space of `a`.
pub fn column_space(a: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    // The left singular vectors of the SVD are markedly less accurate than
    // the right ones, so the basis is re-derived from A·V_r by QR.
    let (_, sv, vt) = sorted_svd(a);
    let r = count_above(&sv, threshold);
    if r == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let image = a * vt.rows(0, r).transpose();
    image.qr().q()
}

/// Hermitian-orthonormal basis of the column space of a complex matrix.
pub fn complex_column_space(a: &DMatrix<Complex64>, threshold: f64) -> DMatrix<Complex64> {
    let (m, k) = a.shape();
    if m == 0 || k == 0 {
        return DMatrix::from_element(m, 0, Complex64::new(0.0, 0.0));
    }
    let padded = if m < k {
        let mut p = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
        p.view_mut((0, 0), (m, k)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(std::cmp::Ordering::Equal));
    let r = count_above(s.as_slice(), threshold);
    if r == 0 {
        return DMatrix::from_element(m, 0, Complex64::new(0.0, 0.0));
    }
    let v = DMatrix::from_fn(k, r, |row, c| vt[(order[c], row)].conj());
    (a * v).qr().q()
}

/// Complex nullspace of `a`, columns orthonormal for the Hermitian product.
pub fn complex_nullspace(a: &DMatrix<Complex64>, threshold: f64) -> DMatrix<Complex64> {
    let (m, k) = a.shape();
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let padded = if m < k {
        let mut p = DMatrix::zeros(k, k);
        p.view_mut((0, 0), (m, k)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let null_rows: Vec<usize> = (0..s.len())
        .filter(|&i| max == 0.0 || s[i] <= threshold * max)
        .collect();
    DMatrix::from_fn(k, null_rows.len(), |r, c| vt[(null_rows[c], r)].conj())
}

/// Numerical rank of a complex matrix.
pub fn complex_rank(a: &DMatrix<Complex64>, threshold: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    count_above(sv.as_slice(), threshold)
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(len: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(len, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// An orthonormal basis (as matrix columns) of a linear subspace of a real
/// coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Wraps a matrix assumed to have orthonormal columns.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { basis: DMatrix::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Self { basis: DMatrix::identity(ambient, ambient) }
    }

    /// Orthonormalized span of the columns of `spanning`.
    pub fn span(spanning: &DMatrix<f64>, threshold: f64) -> Self {
        Self { basis: column_space(spanning, threshold) }
    }

    pub fn span_vectors(len: usize, vectors: &[DVector<f64>], threshold: f64) -> Self {
        Self::span(&from_columns(len, vectors), threshold)
    }

    /// Nullspace of `a` as a subspace of its domain.
    pub fn kernel(a: &DMatrix<f64>, threshold: f64) -> Self {
        let basis = nullspace(a, threshold);
        if basis.nrows() == 0 {
            return Self::zero(a.ncols());
        }
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.basis.column(j).into_owned()
    }

    /// Deviation of `BᵀB` from the identity (max abs entry).
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.basis.transpose() * &self.basis;
        let k = g.nrows();
        (g - DMatrix::<f64>::identity(k, k)).amax()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Coordinates of `v` in the orthonormal basis (projection coefficients).
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * v
    }

    /// Relative distance of `v` from the subspace: `|v - Pv| / max(|v|, 1)`.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        let r = v - self.project(v);
        r.norm() / v.norm().max(1.0)
    }

    /// Largest relative distance of the columns of `m` from the subspace.
    pub fn containment_residual(&self, m: &DMatrix<f64>) -> f64 {
        (0..m.ncols())
            .map(|j| self.distance(&m.column(j).into_owned()))
            .fold(0.0, f64::max)
    }

    /// Residual of `other ⊆ self`.
    pub fn contains_residual(&self, other: &SubspaceBasis) -> f64 {
        self.containment_residual(other.basis())
    }

    /// Symmetric containment residual; zero iff the subspaces coincide.
    pub fn mutual_residual(&self, other: &SubspaceBasis) -> f64 {
        self.contains_residual(other).max(other.contains_residual(self))
    }

    /// Orthogonal complement of `inner` inside `self` (assumes `inner ⊆ self`).
    pub fn complement_of(&self, inner: &SubspaceBasis, threshold: f64) -> SubspaceBasis {
        let n = self.ambient_dim();
        let proj = DMatrix::<f64>::identity(n, n) - inner.basis() * inner.basis().transpose();
        let m = proj * self.basis();
        let mut out = SubspaceBasis::span(&m, threshold);
        let expected = self.dim().saturating_sub(inner.dim());
        if out.dim() > expected {
            // Trim numerically tiny leftovers; keep the dominant directions.
            out.basis = out.basis.columns(0, expected).into_owned();
        }
        out
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &SubspaceBasis, threshold: f64) -> SubspaceBasis {
        let mut m = DMatrix::zeros(self.ambient_dim(), self.dim() + other.dim());
        m.columns_mut(0, self.dim()).copy_from(self.basis());
        m.columns_mut(self.dim(), other.dim()).copy_from(other.basis());
        SubspaceBasis::span(&m, threshold)
    }

    /// Image of the subspace under a linear map given as a matrix.
    pub fn image_under(&self, map: &DMatrix<f64>, threshold: f64) -> SubspaceBasis {
        SubspaceBasis::span(&(map * self.basis()), threshold)
    }
}
