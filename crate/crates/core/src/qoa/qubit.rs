use serde_json::json;

use super::{Provenance, QuantumOA};
use crate::error::{Error, Result};
use crate::qstate::{bell_state, ghz_state, SparseState};
use crate::scalar::Scalar;

fn bits(x: usize, width: usize) -> Vec<u8> {
    (0..width).rev().map(|b| ((x >> b) & 1) as u8).collect()
}

fn prefix<S: Scalar>(digits: &[u8]) -> SparseState<S> {
    let ket: Vec<u16> = digits.iter().map(|&b| b as u16).collect();
    SparseState::basis_ket(2, &ket).expect("bits are valid qubit digits")
}

fn tensor_all<S: Scalar>(parts: &[SparseState<S>]) -> SparseState<S> {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, p| {
        acc.tensor(p).expect("qubit factors")
    })
}

/// Rows `|ijk⟩|GHZ_ijk⟩^{⊗m}`, optionally with the parity column `i+j+k`
/// after the prefix. No validity check on `m`.
pub(crate) fn ghz_tail_rows<S: Scalar>(m: usize, parity: bool) -> Vec<SparseState<S>> {
    (0..8)
        .map(|x| {
            let mut head = bits(x, 3);
            let (i, j, k) = (head[0], head[1], head[2]);
            if parity {
                head.push((i + j + k) % 2);
            }
            prefix::<S>(&head)
                .tensor(&ghz_state::<S>(i, j, k).tensor_power(m))
                .expect("qubit factors")
        })
        .collect()
}

/// `QOA(8, 3+3m, 2, 3)`. The case `m = 2` is rejected: there the marginal on
/// sites {1, 4, 7} is not maximally mixed (see
/// [`crate::verify::m2_counterexample`]).
pub fn build_qubit_3_3m<S: Scalar>(m: usize) -> Result<QuantumOA<S>> {
    match m {
        0 => Err(Error::InvalidParams("m must be at least 1".into())),
        2 => Err(Error::InvalidParams(
            "the case m = 2 is excluded: the marginal on sites {1, 4, 7} is not maximally mixed"
                .into(),
        )),
        _ => QuantumOA::new(
            ghz_tail_rows(m, false),
            3,
            Provenance::new("qubit_3_3m", json!({ "m": m })),
        ),
    }
}

/// `QOA(8, 4+3m, 2, 3)` for `m ≥ 2`. At `m = 1` it would give a 3-uniform
/// state of 7 qubits, which does not exist.
pub fn build_qubit_4_3m<S: Scalar>(m: usize) -> Result<QuantumOA<S>> {
    if m < 2 {
        return Err(Error::InvalidParams(
            "m must be at least 2; m = 1 would give an AME(7, 2) state, which does not exist"
                .into(),
        ));
    }
    QuantumOA::new(
        ghz_tail_rows(m, true),
        3,
        Provenance::new("qubit_4_3m", json!({ "m": m })),
    )
}

/// `QOA(32, 11+3m, 2, 3)` with rows
/// `|ijkfg⟩ φ_{f+i,g+j} φ_{g+k,f+i} φ_{g+j,i+k} GHZ_{jfg}^{⊗m}`, sums mod 2.
pub fn build_qubit_11_3m<S: Scalar>(m: usize) -> Result<QuantumOA<S>> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    let rows = (0..32)
        .map(|x| {
            let head = bits(x, 5);
            let (i, j, k, f, g) = (head[0], head[1], head[2], head[3], head[4]);
            tensor_all(&[
                prefix::<S>(&head),
                bell_state(f ^ i, g ^ j),
                bell_state(g ^ k, f ^ i),
                bell_state(g ^ j, i ^ k),
                ghz_state::<S>(j, f, g).tensor_power(m),
            ])
        })
        .collect();
    QuantumOA::new(rows, 3, Provenance::new("qubit_11_3m", json!({ "m": m })))
}

/// The two strength-2 qubit arrangements: `|ab⟩ φ_ab^{⊗m}` (`2+2m`, `m ≥ 2`)
/// and `|a, b, a+b⟩ φ_ab^{⊗m}` (`3+2m`, `m ≥ 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitPairing {
    TwoPlus2m,
    ThreePlus2m,
}

pub fn build_strength2_qubit<S: Scalar>(variant: QubitPairing, m: usize) -> Result<QuantumOA<S>> {
    let (min_m, name) = match variant {
        QubitPairing::TwoPlus2m => (2, "qubit_2_2m"),
        QubitPairing::ThreePlus2m => (1, "qubit_3_2m"),
    };
    if m < min_m {
        return Err(Error::InvalidParams(format!("{name} needs m ≥ {min_m}")));
    }
    let rows = (0..4)
        .map(|x| {
            let mut head = bits(x, 2);
            let (a, b) = (head[0], head[1]);
            if variant == QubitPairing::ThreePlus2m {
                head.push(a ^ b);
            }
            prefix::<S>(&head)
                .tensor(&bell_state::<S>(a, b).tensor_power(m))
                .expect("qubit factors")
        })
        .collect();
    QuantumOA::new(rows, 2, Provenance::new(name, json!({ "m": m })))
}
