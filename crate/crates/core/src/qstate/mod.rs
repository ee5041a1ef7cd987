//! Sparse pure states on `n` sites of local dimension `d`.
//!
//! A state is a map from kets (digit vectors, site 1 leftmost) to complex
//! amplitudes. Only amplitudes above [`Scalar::drop_tolerance`] are stored.
//! Site subsets are written with 1-based site labels throughout, so
//! `&[1, 4, 7]` names the first, fourth and seventh tensor factors.

mod density;
mod families;

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use density::DensityMatrix;
pub use families::{bell_state, character, ghz_state, phi2_state, phi3_state, psi_state};

/// Digits of a computational-basis ket, site 1 first.
pub type Ket = Vec<u16>;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<S: Scalar> {
    d: u32,
    n: usize,
    amps: BTreeMap<Ket, Complex<S>>,
}

fn keep<S: Scalar>(c: &Complex<S>) -> bool {
    c.norm() > S::drop_tolerance()
}

impl<S: Scalar> SparseState<S> {
    /// The zero vector.
    pub fn zero(d: u32, n: usize) -> Result<Self> {
        if !(2..=u16::MAX as u32).contains(&d) {
            return Err(Error::InvalidState(format!(
                "local dimension {d} unsupported"
            )));
        }
        Ok(SparseState {
            d,
            n,
            amps: BTreeMap::new(),
        })
    }

    pub fn basis_ket(d: u32, digits: &[u16]) -> Result<Self> {
        Self::from_terms(
            d,
            digits.len(),
            [(digits.to_vec(), Complex::new(S::one(), S::zero()))],
        )
    }

    /// Sums the given terms; repeated kets accumulate.
    pub fn from_terms(
        d: u32,
        n: usize,
        terms: impl IntoIterator<Item = (Ket, Complex<S>)>,
    ) -> Result<Self> {
        let mut state = Self::zero(d, n)?;
        for (ket, amp) in terms {
            state.check_ket(&ket)?;
            *state.amps.entry(ket).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    fn check_ket(&self, ket: &[u16]) -> Result<()> {
        if ket.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} in a {}-site state",
                ket.len(),
                self.n
            )));
        }
        if let Some(&x) = ket.iter().find(|&&x| x as u32 >= self.d) {
            return Err(Error::InvalidState(format!("digit {x} ≥ d = {}", self.d)));
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.amps.retain(|_, c| keep(c));
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Stored terms in lexicographic ket order.
    pub fn terms(&self) -> impl Iterator<Item = (&Ket, &Complex<S>)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, ket: &[u16]) -> Complex<S> {
        self.amps.get(ket).copied().unwrap_or_default()
    }

    /// Overwrites one amplitude (a zero value removes the term).
    pub fn set_amplitude(&mut self, ket: &[u16], amp: Complex<S>) -> Result<()> {
        self.check_ket(ket)?;
        if keep(&amp) {
            self.amps.insert(ket.to_vec(), amp);
        } else {
            self.amps.remove(ket);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "(d={}, n={}) vs (d={}, n={})",
                self.d, self.n, other.d, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (ket, amp) in &other.amps {
            *out.amps.entry(ket.clone()).or_default() += *amp;
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, c: Complex<S>) -> Self {
        let mut out = self.clone();
        for amp in out.amps.values_mut() {
            *amp *= c;
        }
        out.prune();
        out
    }

    /// `self ⊗ other`; the sites of `self` come first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(format!(
                "tensor of d={} with d={}",
                self.d, other.d
            )));
        }
        let mut out = Self::zero(self.d, self.n + other.n)?;
        for (ka, a) in &self.amps {
            for (kb, b) in &other.amps {
                let mut ket = Vec::with_capacity(out.n);
                ket.extend_from_slice(ka);
                ket.extend_from_slice(kb);
                out.amps.insert(ket, *a * *b);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `self^{⊗m}`; `m = 0` gives the empty product (a single empty ket).
    pub fn tensor_power(&self, m: usize) -> Self {
        let mut out = SparseState {
            d: self.d,
            n: 0,
            amps: BTreeMap::from([(Vec::new(), Complex::new(S::one(), S::zero()))]),
        };
        for _ in 0..m {
            out = out.tensor(self).expect("same local dimension");
        }
        out
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<S>> {
        self.check_compatible(other)?;
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex::default();
        for (ket, a) in &small.amps {
            if let Some(b) = large.amps.get(ket) {
                acc += if flip { b.conj() * *a } else { a.conj() * *b };
            }
        }
        Ok(acc)
    }

    /// Accumulated in `f64` so single-precision states with many terms do
    /// not drift.
    pub fn norm_sqr(&self) -> S {
        S::of(self.amps.values().map(|c| c.norm_sqr().as_f64()).sum())
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= S::drop_tolerance() {
            return Err(Error::InvalidState(
                "cannot normalize the zero vector".into(),
            ));
        }
        Ok(self.scale(Complex::new(S::one() / norm, S::zero())))
    }

    /// `ρ_S = Tr_{S^c} |self⟩⟨self|` for the 1-based site subset `sites`.
    pub fn reduced_density(&self, sites: &[usize]) -> Result<DensityMatrix<S>> {
        cross_reduced(self, self, sites)
    }

    /// Converts amplitudes to another scalar type.
    pub fn cast<T: Scalar>(&self) -> SparseState<T> {
        let amps = self
            .amps
            .iter()
            .map(|(k, c)| {
                (
                    k.clone(),
                    Complex::new(T::of(c.re.as_f64()), T::of(c.im.as_f64())),
                )
            })
            .filter(|(_, c)| keep(c))
            .collect();
        SparseState {
            d: self.d,
            n: self.n,
            amps,
        }
    }
}

/// Validates a 1-based site subset and returns it sorted, 0-based.
pub(crate) fn zero_based_sites(sites: &[usize], n: usize) -> Result<Vec<usize>> {
    if sites.is_empty() {
        return Err(Error::InvalidSubset("empty subset".into()));
    }
    let mut out: Vec<usize> = Vec::with_capacity(sites.len());
    for &s in sites {
        if s == 0 || s > n {
            return Err(Error::InvalidSubset(format!("site {s} outside 1..={n}")));
        }
        out.push(s - 1);
    }
    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSubset("repeated site".into()));
    }
    Ok(out)
}

/// Accumulates `Tr_{S^c} |L⟩⟨R|` where `L` and `R` are given as term lists.
///
/// Terms may repeat kets (e.g. the unmerged terms of several QOA rows);
/// every pair of terms whose complement digits agree contributes
/// `l · conj(r)` to entry `(l_S, r_S)`.
pub(crate) fn partial_trace_terms<'a, S: Scalar>(
    left: impl Iterator<Item = (&'a [u16], Complex<S>)>,
    right: impl Iterator<Item = (&'a [u16], Complex<S>)>,
    sites0: &[usize],
    d: u32,
    n: usize,
) -> BTreeMap<(usize, usize), Complex<S>> {
    let mut in_subset = vec![false; n];
    for &s in sites0 {
        in_subset[s] = true;
    }
    let split = |ket: &[u16]| -> (usize, Vec<u16>) {
        let mut idx = 0usize;
        let mut rest = Vec::with_capacity(n - sites0.len());
        for (site, &digit) in ket.iter().enumerate() {
            if in_subset[site] {
                idx = idx * d as usize + digit as usize;
            } else {
                rest.push(digit);
            }
        }
        (idx, rest)
    };

    let mut groups: HashMap<Vec<u16>, Vec<(usize, Complex<S>)>> = HashMap::new();
    for (ket, amp) in right {
        let (idx, rest) = split(ket);
        groups.entry(rest).or_default().push((idx, amp.conj()));
    }
    let mut acc: HashMap<(usize, usize), Complex<S>> = HashMap::new();
    for (ket, amp) in left {
        let (a, rest) = split(ket);
        if let Some(group) = groups.get(&rest) {
            for &(b, rb) in group {
                *acc.entry((a, b)).or_default() += amp * rb;
            }
        }
    }
    acc.into_iter().collect()
}

/// `Tr_{S^c} |a⟩⟨b|`. Not Hermitian in general; equals
/// [`SparseState::reduced_density`] when `a == b`.
pub fn cross_reduced<S: Scalar>(
    a: &SparseState<S>,
    b: &SparseState<S>,
    sites: &[usize],
) -> Result<DensityMatrix<S>> {
    a.check_compatible(b)?;
    let sites0 = zero_based_sites(sites, a.n)?;
    let entries = partial_trace_terms(
        a.amps.iter().map(|(k, c)| (k.as_slice(), *c)),
        b.amps.iter().map(|(k, c)| (k.as_slice(), *c)),
        &sites0,
        a.d,
        a.n,
    );
    Ok(DensityMatrix::from_entries(
        a.d,
        sites0.iter().map(|s| s + 1).collect(),
        entries,
    ))
}

#[derive(Serialize, Deserialize)]
struct AmpRepr {
    ket: Vec<u16>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    d: u32,
    n: usize,
    amps: Vec<AmpRepr>,
}

impl<S: Scalar> Serialize for SparseState<S> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        StateRepr {
            d: self.d,
            n: self.n,
            amps: self
                .amps
                .iter()
                .map(|(k, c)| AmpRepr {
                    ket: k.clone(),
                    re: c.re.as_f64(),
                    im: c.im.as_f64(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for SparseState<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = StateRepr::deserialize(d)?;
        SparseState::from_terms(
            repr.d,
            repr.n,
            repr.amps
                .into_iter()
                .map(|a| (a.ket, Complex::new(S::of(a.re), S::of(a.im)))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type St = SparseState<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn tensor_of_basis_kets() {
        let zero = St::basis_ket(2, &[0]).unwrap();
        let one = St::basis_ket(2, &[1]).unwrap();
        assert_eq!(
            zero.tensor(&one).unwrap(),
            St::basis_ket(2, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn normalize_rescales() {
        let s = St::basis_ket(2, &[0]).unwrap().scale(c(2.0));
        assert_eq!(s.normalize().unwrap(), St::basis_ket(2, &[0]).unwrap());
        assert!(St::zero(2, 1).unwrap().normalize().is_err());
    }

    #[test]
    fn dimension_checks() {
        let a = St::basis_ket(2, &[0, 1]).unwrap();
        let b = St::basis_ket(3, &[0, 1]).unwrap();
        let c1 = St::basis_ket(2, &[0]).unwrap();
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch(_))));
        assert!(a.inner(&c1).is_err());
        assert!(a.tensor(&b).is_err());
        assert!(St::basis_ket(2, &[2]).is_err());
    }

    #[test]
    fn product_state_marginal() {
        let s = St::basis_ket(2, &[0, 1]).unwrap();
        let rho = s.reduced_density(&[1]).unwrap();
        assert_eq!(rho.dim(), 2);
        assert_eq!(rho.get(0, 0), c(1.0));
        assert_eq!(rho.get(1, 1), c(0.0));
        let rho2 = s.reduced_density(&[2]).unwrap();
        assert_eq!(rho2.get(1, 1), c(1.0));
    }

    #[test]
    fn subset_validation() {
        let s = St::basis_ket(2, &[0, 1, 1]).unwrap();
        assert!(matches!(
            s.reduced_density(&[]),
            Err(Error::InvalidSubset(_))
        ));
        assert!(s.reduced_density(&[0]).is_err());
        assert!(s.reduced_density(&[4]).is_err());
        assert!(s.reduced_density(&[2, 2]).is_err());
        // order of the labels does not matter
        assert_eq!(
            s.reduced_density(&[3, 1]).unwrap(),
            s.reduced_density(&[1, 3]).unwrap()
        );
    }

    #[test]
    fn orthogonal_complements_give_zero_cross_trace() {
        let a = St::basis_ket(2, &[0, 0]).unwrap();
        let b = St::basis_ket(2, &[0, 1]).unwrap();
        let m = cross_reduced(&a, &b, &[1]).unwrap();
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn json_shape() {
        let s = St::from_terms(2, 2, [(vec![1, 1], c(-0.5)), (vec![0, 0], c(0.5))]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"d":2,"n":2,"amps":[{"ket":[0,0],"re":0.5,"im":0.0},{"ket":[1,1],"re":-0.5,"im":0.0}]}"#
        );
    }

    #[test]
    fn f32_states_work() {
        let s = SparseState::<f32>::basis_ket(3, &[2, 0]).unwrap();
        let t = s
            .add(&SparseState::basis_ket(3, &[0, 2]).unwrap())
            .unwrap()
            .normalize()
            .unwrap();
        assert!((t.norm_sqr() - 1.0).abs() < 1e-6);
        let rho = t.reduced_density(&[1]).unwrap();
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-6);
    }

    fn arb_state() -> impl Strategy<Value = St> {
        proptest::collection::vec(
            (
                proptest::collection::vec(0u16..3, 4),
                -1.0f64..1.0,
                -1.0f64..1.0,
            ),
            1..12,
        )
        .prop_filter_map("nonzero", |terms| {
            let s = St::from_terms(
                3,
                4,
                terms
                    .into_iter()
                    .map(|(k, re, im)| (k, Complex::new(re, im))),
            )
            .ok()?;
            (s.norm_sqr() > 1e-3).then_some(s)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1024))]
        #[test]
        fn json_round_trip(s in arb_state()) {
            let back: St = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn marginals_are_hermitian_psd_with_trace_norm(s in arb_state(), mask in 1u8..16) {
            let sites: Vec<usize> = (0..4).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            let rho = s.reduced_density(&sites).unwrap();
            prop_assert!(rho.is_hermitian(1e-12));
            prop_assert!((rho.trace().re - s.norm_sqr()).abs() < 1e-12);
            let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(min > -1e-10);
        }

        #[test]
        fn cross_trace_is_sesquilinear(a in arb_state(), b in arb_state()) {
            let sum = a.add(&b).unwrap();
            let lhs = sum.reduced_density(&[2, 3]).unwrap();
            let mut rhs = a.reduced_density(&[2, 3]).unwrap();
            for m in [
                cross_reduced(&a, &b, &[2, 3]).unwrap(),
                cross_reduced(&b, &a, &[2, 3]).unwrap(),
                b.reduced_density(&[2, 3]).unwrap(),
            ] {
                rhs = rhs.add(&m).unwrap();
            }
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }

        #[test]
        fn inner_is_conjugate_symmetric(a in arb_state(), b in arb_state()) {
            let ab = a.inner(&b).unwrap();
            let ba = b.inner(&a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-12);
        }
    }
}
