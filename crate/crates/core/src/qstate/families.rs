//! The concrete three- and two-site state families used by the builders.
//!
//! Over `GF(p^t)` the phase `ω^{i·l}` is read as the additive character
//! `e^{2πi Tr(i·l)/p}`, which is `e^{2πi·il/d}` when `t = 1`. The
//! constructions need a character: `χ(a + b) = χ(a) χ(b)` and
//! `Σ_l χ(c·l) = 0` for `c ≠ 0`. Exponentiating by the element index
//! instead satisfies the second property but not the first, and the
//! resulting arrays fail verification over extension fields.

use num_complex::Complex;

use super::{Ket, SparseState};
use crate::error::{Error, Result};
use crate::ffield::Field;
use crate::scalar::{inv_sqrt, root_of_unity, Scalar};

fn real<S: Scalar>(x: S) -> Complex<S> {
    Complex::new(x, S::zero())
}

/// The signed GHZ basis of three qubits:
/// `(-1)^{α_ijk} (|ī j̄ k̄⟩ + (-1)^{ω(ijk)} |ijk⟩) / √2`, with `α_ijk = 1`
/// iff `i = j = k` and `ω(ijk)` the number of ones.
///
/// # Panics
/// If any argument is not 0 or 1.
pub fn ghz_state<S: Scalar>(i: u8, j: u8, k: u8) -> SparseState<S> {
    assert!(i < 2 && j < 2 && k < 2, "GHZ labels are bits");
    let h = inv_sqrt::<S>(2);
    let outer = if i == j && j == k { -h } else { h };
    let ones = i + j + k;
    let inner_sign = if ones.is_multiple_of(2) {
        S::one()
    } else {
        -S::one()
    };
    let bits = [i as u16, j as u16, k as u16];
    let flipped = bits.map(|b| 1 - b);
    SparseState::from_terms(
        2,
        3,
        [
            (flipped.to_vec(), real(outer)),
            (bits.to_vec(), real(outer * inner_sign)),
        ],
    )
    .expect("valid qubit kets")
}

/// Bell basis `(( -1)^x |xy⟩ + |x̄ ȳ⟩) / √2`.
///
/// # Panics
/// If either argument is not 0 or 1.
pub fn bell_state<S: Scalar>(x: u8, y: u8) -> SparseState<S> {
    assert!(x < 2 && y < 2, "Bell labels are bits");
    let h = inv_sqrt::<S>(2);
    let sign = if x == 0 { h } else { -h };
    SparseState::from_terms(
        2,
        2,
        [
            (vec![x as u16, y as u16], real(sign)),
            (vec![1 - x as u16, 1 - y as u16], real(h)),
        ],
    )
    .expect("valid qubit kets")
}

/// `e^{2πi Tr(a)/p}`.
pub fn character<S: Scalar>(f: &Field, a: u32) -> Complex<S> {
    root_of_unity::<S>(f.trace(a) as u64, f.p() as u64)
}

fn check_labels(d: u32, labels: &[u32]) -> Result<()> {
    match labels.iter().find(|&&x| x >= d) {
        Some(x) => Err(Error::InvalidParams(format!("label {x} ≥ d = {d}"))),
        None => Ok(()),
    }
}

/// `(1/√d) Σ_l χ(i·l) |l+j, l+αj+βk, l⟩` over `GF(d)`, for `α ∉ {0, 1}`,
/// `β ≠ 0`. All arguments are element indices.
pub fn psi_state<S: Scalar>(
    f: &Field,
    i: u32,
    j: u32,
    k: u32,
    alpha: u32,
    beta: u32,
) -> Result<SparseState<S>> {
    let d = f.order();
    if d < 3 {
        return Err(Error::InvalidParams("psi states need d ≥ 3".into()));
    }
    check_labels(d, &[i, j, k, alpha, beta])?;
    if alpha <= 1 {
        return Err(Error::InvalidParams("alpha must lie outside {0, 1}".into()));
    }
    if beta == 0 {
        return Err(Error::InvalidParams("beta must be nonzero".into()));
    }
    let amp = inv_sqrt::<S>(d as usize);
    let mid = f.add(f.mul(alpha, j), f.mul(beta, k));
    let terms = (0..d).map(|l| {
        let ket: Ket = vec![f.add(l, j) as u16, f.add(l, mid) as u16, l as u16];
        let phase = character::<S>(f, f.mul(i, l));
        (ket, phase * amp)
    });
    SparseState::from_terms(d, 3, terms)
}

/// `(1/√d) Σ_l ω^{il} |l+2j+k, l+j+2k, l⟩` with integer arithmetic mod `d`,
/// for `d ∈ {3, 5}`.
pub fn phi3_state<S: Scalar>(d: u32, i: u32, j: u32, k: u32) -> Result<SparseState<S>> {
    if d != 3 && d != 5 {
        return Err(Error::InvalidParams(format!(
            "phi3 states need d ∈ {{3, 5}}, got {d}"
        )));
    }
    check_labels(d, &[i, j, k])?;
    let amp = inv_sqrt::<S>(d as usize);
    let terms = (0..d).map(|l| {
        let ket: Ket = vec![
            ((l + 2 * j + k) % d) as u16,
            ((l + j + 2 * k) % d) as u16,
            l as u16,
        ];
        (ket, root_of_unity::<S>((i * l) as u64, d as u64) * amp)
    });
    SparseState::from_terms(d, 3, terms)
}

/// `(1/√d) Σ_l χ(i·l) |l+j, l⟩` over `GF(d)`, `d ≥ 3`.
pub fn phi2_state<S: Scalar>(f: &Field, i: u32, j: u32) -> Result<SparseState<S>> {
    let d = f.order();
    if d < 3 {
        return Err(Error::InvalidParams("phi2 states need d ≥ 3".into()));
    }
    check_labels(d, &[i, j])?;
    let amp = inv_sqrt::<S>(d as usize);
    let terms = (0..d).map(|l| {
        let ket: Ket = vec![f.add(l, j) as u16, l as u16];
        (ket, character::<S>(f, f.mul(i, l)) * amp)
    });
    SparseState::from_terms(d, 2, terms)
}
