//! Tuples of forms realified into a single real coordinate vector.
//!
//! A complex slot of degree `k` contributes `[Re | Im]` blocks of length
//! `C(dim, k)`, a real slot one block. Slots above the top degree are empty.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::{binomial, KForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Complex(usize),
    Real(usize),
}

impl Slot {
    pub fn degree(self) -> usize {
        match self {
            Slot::Complex(k) | Slot::Real(k) => k,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, Slot::Complex(_))
    }

    fn shifted(self, up: bool) -> Self {
        let f = |k: usize| if up { k + 1 } else { k - 1 };
        match self {
            Slot::Complex(k) => Slot::Complex(f(k)),
            Slot::Real(k) => Slot::Real(f(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleLayout {
    dim: usize,
    slots: Vec<Slot>,
}

impl TupleLayout {
    pub fn new(dim: usize, slots: Vec<Slot>) -> Self {
        Self { dim, slots }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    fn block(&self, slot: Slot) -> usize {
        binomial(self.dim, slot.degree())
    }

    fn slot_len(&self, slot: Slot) -> usize {
        self.block(slot) * if slot.is_complex() { 2 } else { 1 }
    }

    /// Offset of slot `i` in the flattened vector.
    pub fn offset(&self, i: usize) -> usize {
        self.slots[..i].iter().map(|&s| self.slot_len(s)).sum()
    }

    pub fn real_dim(&self) -> usize {
        self.slots.iter().map(|&s| self.slot_len(s)).sum()
    }

    /// Every degree lowered by one.
    pub fn lowered(&self) -> Self {
        Self { dim: self.dim, slots: self.slots.iter().map(|s| s.shifted(false)).collect() }
    }

    /// Every degree raised by one.
    pub fn raised(&self) -> Self {
        Self { dim: self.dim, slots: self.slots.iter().map(|s| s.shifted(true)).collect() }
    }

    /// Realifies `forms`; a real slot keeps only the real part. Forms for
    /// empty slots are ignored and may be omitted.
    pub fn flatten(&self, forms: &[KForm]) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.real_dim());
        for (i, &slot) in self.slots.iter().enumerate() {
            if self.block(slot) == 0 {
                continue;
            }
            let f = &forms[i];
            assert_eq!((f.dim(), f.degree()), (self.dim, slot.degree()), "slot {i} shape mismatch");
            out.extend(f.coeffs().iter().map(|c| c.re));
            if slot.is_complex() {
                out.extend(f.coeffs().iter().map(|c| c.im));
            }
        }
        DVector::from_vec(out)
    }

    pub fn unflatten(&self, x: &[f64]) -> Result<Vec<KForm>> {
        if x.len() != self.real_dim() {
            return Err(Error::DimensionMismatch { expected: self.real_dim(), found: x.len() });
        }
        let mut out = Vec::with_capacity(self.slots.len());
        let mut pos = 0;
        for &slot in &self.slots {
            let m = self.block(slot);
            if m == 0 {
                return Err(Error::DegreeOverflow { degree: slot.degree(), max: self.dim });
            }
            let coeffs = if slot.is_complex() {
                let c = (0..m).map(|t| Complex64::new(x[pos + t], x[pos + m + t])).collect();
                pos += 2 * m;
                c
            } else {
                let c = (0..m).map(|t| Complex64::new(x[pos + t], 0.0)).collect();
                pos += m;
                c
            };
            out.push(KForm::new(self.dim, slot.degree(), coeffs)?);
        }
        Ok(out)
    }

    /// Matrix of a real-linear map given on tuples, built column by column
    /// from the columns of `basis`.
    pub fn map_matrix<F>(&self, basis: &DMatrix<f64>, rows: usize, f: F) -> Result<DMatrix<f64>>
    where
        F: Fn(&[KForm]) -> Result<DVector<f64>>,
    {
        let mut m = DMatrix::zeros(rows, basis.ncols());
        for j in 0..basis.ncols() {
            let col: Vec<f64> = basis.column(j).iter().copied().collect();
            let v = f(&self.unflatten(&col)?)?;
            m.set_column(j, &v);
        }
        Ok(m)
    }

    /// `θ ∧ ·` applied slotwise, flattened in the raised layout.
    pub fn wedge_each(&self, theta: &KForm, forms: &[KForm]) -> Result<DVector<f64>> {
        let target = self.raised();
        let mut out = Vec::with_capacity(forms.len());
        for (f, &slot) in forms.iter().zip(target.slots()) {
            if target.block(slot) == 0 {
                out.push(KForm::zero(self.dim, 0));
            } else {
                out.push(theta.wedge(f)?);
            }
        }
        Ok(flatten_lenient(&target, &out))
    }

    /// Matrix of `θ ∧ ·` on the columns of `basis`.
    pub fn wedge_matrix(&self, theta: &KForm, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let rows = self.raised().real_dim();
        self.map_matrix(basis, rows, |forms| self.wedge_each(theta, forms))
    }
}

fn flatten_lenient(layout: &TupleLayout, forms: &[KForm]) -> DVector<f64> {
    let mut out = Vec::with_capacity(layout.real_dim());
    for (f, &slot) in forms.iter().zip(layout.slots()) {
        if layout.block(slot) == 0 {
            continue;
        }
        out.extend(f.coeffs().iter().map(|c| c.re));
        if slot.is_complex() {
            out.extend(f.coeffs().iter().map(|c| c.im));
        }
    }
    DVector::from_vec(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::I;

    #[test]
    fn roundtrip() {
        let layout = TupleLayout::new(4, vec![Slot::Complex(2), Slot::Real(1)]);
        assert_eq!(layout.real_dim(), 12 + 4);
        let x: Vec<f64> = (0..16).map(|t| t as f64 - 3.5).collect();
        let forms = layout.unflatten(&x).unwrap();
        assert_eq!(forms[0].coeffs()[1], Complex64::new(-2.5, 3.5));
        assert_eq!(layout.flatten(&forms).as_slice(), x.as_slice());
        assert_eq!(layout.offset(1), 12);
    }

    #[test]
    fn top_degree_slots_vanish() {
        let layout = TupleLayout::new(2, vec![Slot::Complex(1), Slot::Real(2)]);
        let up = layout.raised();
        assert_eq!(up.real_dim(), 2);
        let theta = KForm::coordinate(2, 0);
        let forms = vec![KForm::coordinate(2, 1).scale(I), KForm::from_real(2, 2, &[1.0]).unwrap()];
        let w = layout.wedge_each(&theta, &forms).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 1.0]);
    }
}
