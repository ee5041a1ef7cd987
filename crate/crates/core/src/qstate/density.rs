use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A (reduced) operator on the sites `sites`, of dimension `d^|sites|`.
///
/// Entries are stored sparsely; rows and columns are multi-digit kets over
/// `sites` linearized with the lowest-numbered site most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<S: Scalar> {
    d: u32,
    sites: Vec<usize>,
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex<S>>,
}

impl<S: Scalar> DensityMatrix<S> {
    pub(crate) fn from_entries(
        d: u32,
        sites: Vec<usize>,
        entries: BTreeMap<(usize, usize), Complex<S>>,
    ) -> Self {
        let dim = (d as usize).pow(sites.len() as u32);
        DensityMatrix {
            d,
            sites,
            dim,
            entries,
        }
    }

    /// `value · I` on the given 1-based sites.
    pub fn scaled_identity(d: u32, sites: Vec<usize>, value: S) -> Self {
        let dim = (d as usize).pow(sites.len() as u32);
        let entries = (0..dim)
            .map(|a| ((a, a), Complex::new(value, S::zero())))
            .collect();
        DensityMatrix {
            d,
            sites,
            dim,
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn local_dim(&self) -> u32 {
        self.d
    }

    /// 1-based labels of the sites this operator acts on.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<S> {
        self.entries.get(&(row, col)).copied().unwrap_or_default()
    }

    /// Stored entries; anything absent is zero.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Complex<S>)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn trace(&self) -> Complex<S> {
        (0..self.dim).map(|a| self.get(a, a)).sum()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.sites != other.sites {
            return Err(Error::DimensionMismatch(format!(
                "operators on d={} sites {:?} vs d={} sites {:?}",
                self.d, self.sites, other.d, other.sites
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (k, v) in &other.entries {
            *self.entries.entry(*k).or_default() += *v;
        }
        Ok(())
    }

    pub fn scale(&self, factor: S) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v = v.scale(factor);
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut worst = 0.0f64;
        for (k, v) in &self.entries {
            worst = worst.max((*v - other.get(k.0, k.1)).norm().as_f64());
        }
        for (k, v) in &other.entries {
            if !self.entries.contains_key(k) {
                worst = worst.max(v.norm().as_f64());
            }
        }
        Ok(worst)
    }

    /// Largest entrywise modulus of `self - value · I`.
    pub fn deviation_from_identity(&self, value: S) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            worst = worst.max(
                (self.get(a, a) - Complex::new(value, S::zero()))
                    .norm()
                    .as_f64(),
            );
        }
        for (&(r, c), v) in &self.entries {
            if r != c {
                worst = worst.max(v.norm().as_f64());
            }
        }
        worst
    }

    /// Deviation of `self / tr(self)` from the maximally mixed state `I / dim`.
    pub fn mixedness_deviation(&self) -> f64 {
        let tr = self.trace();
        if tr.norm() <= S::drop_tolerance() {
            return f64::INFINITY;
        }
        let target = S::one() / S::of(self.dim as f64);
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            let v = self.get(a, a) / tr;
            worst = worst.max((v - Complex::new(target, S::zero())).norm().as_f64());
        }
        for (&(r, c), v) in &self.entries {
            if r != c {
                worst = worst.max((*v / tr).norm().as_f64());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.entries
            .iter()
            .all(|(&(r, c), v)| (*v - self.get(c, r).conj()).norm().as_f64() <= tol)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex<S>> {
        let mut out = vec![Complex::default(); self.dim * self.dim];
        for (&(r, c), v) in &self.entries {
            out[r * self.dim + c] = *v;
        }
        out
    }

    /// Eigenvalues of the Hermitian part, ascending. Intended for small
    /// marginals; cost is cubic in `dim`.
    ///
    /// The matrix is shifted by `1 + ‖H‖_∞` before diagonalizing: the
    /// QR iteration can return NaN on matrices with exactly-zero eigenvalue
    /// clusters, which low-rank marginals produce.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let herm = DMatrix::from_fn(n, n, |r, c| {
            let a = self.get(r, c);
            let b = self.get(c, r).conj();
            nalgebra::Complex::new((a.re + b.re).as_f64() / 2.0, (a.im + b.im).as_f64() / 2.0)
        });
        let bound = herm
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let shift = 1.0 + bound;
        let shifted = herm
            + DMatrix::<nalgebra::Complex<f64>>::identity(n, n)
                * nalgebra::Complex::new(shift, 0.0);
        let mut vals: Vec<f64> = shifted
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v - shift)
            .collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }
}

#[derive(Serialize)]
struct EntryRepr {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct DensityRepr {
    d: u32,
    sites: Vec<usize>,
    dim: usize,
    entries: Vec<EntryRepr>,
}

impl<S: Scalar> Serialize for DensityMatrix<S> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        DensityRepr {
            d: self.d,
            sites: self.sites.clone(),
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(_, v)| v.norm() > S::drop_tolerance())
                .map(|(&(row, col), v)| EntryRepr {
                    row,
                    col,
                    re: v.re.as_f64(),
                    im: v.im.as_f64(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_deviation_and_eigenvalues() {
        let id = DensityMatrix::<f64>::scaled_identity(2, vec![1, 2], 0.25);
        assert_eq!(id.dim(), 4);
        assert!(id.deviation_from_identity(0.25) < 1e-15);
        assert!(id.mixedness_deviation() < 1e-15);
        for ev in id.eigenvalues() {
            assert!((ev - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_projector_spectrum() {
        let mut e = BTreeMap::new();
        for r in 0..2 {
            for c in 0..2 {
                e.insert((r, c), Complex::new(0.5, 0.0));
            }
        }
        let rho = DensityMatrix::from_entries(2, vec![1], e);
        let ev = rho.eigenvalues();
        assert!(ev[0].abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        assert!((rho.mixedness_deviation() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let a = DensityMatrix::<f64>::scaled_identity(2, vec![1], 1.0);
        let b = DensityMatrix::<f64>::scaled_identity(2, vec![2], 1.0);
        assert!(a.add(&b).is_err());
        assert!(a.max_abs_diff(&b).is_err());
    }
}
