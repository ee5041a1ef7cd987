//! Quantum orthogonal arrays and the builders for each family.
//!
//! A `QOA(r, N, d, k)` is a list of `r` pure `N`-site states whose pairwise
//! partial traces onto any `k` sites sum to `(r / d^k) I`. Its equal-weight
//! superposition ([`QuantumOA::assemble_state`]) is then `k`-uniform.

mod dispatch;
mod qubit;
mod qudit;

use std::collections::HashMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{Ket, SparseState};
use crate::scalar::{inv_sqrt, Scalar};

pub use dispatch::{dispatch, plan, Plan};
pub(crate) use qubit::ghz_tail_rows;
pub use qubit::{
    build_qubit_11_3m, build_qubit_3_3m, build_qubit_4_3m, build_strength2_qubit, QubitPairing,
};
pub use qudit::{
    build_qud35, build_qud_2_n_3m, build_qud_4_3m, build_strength2_qud, qud_4_3m_forbidden_betas,
    select_params, QudParams, QuditPairing,
};

/// Which construction produced a QOA, and with what parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub params: serde_json::Value,
}

impl Provenance {
    pub fn new(construction: &str, params: serde_json::Value) -> Self {
        Provenance {
            construction: construction.to_string(),
            params,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumOA<S: Scalar> {
    rows: Vec<SparseState<S>>,
    d: u32,
    n: usize,
    k: usize,
    provenance: Provenance,
}

impl<S: Scalar> QuantumOA<S> {
    /// Checks that all rows share `(d, N)`; does not check the QOA property
    /// itself (see [`crate::verify::qoa_check`]).
    pub fn new(rows: Vec<SparseState<S>>, k: usize, provenance: Provenance) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidState("a QOA needs at least one row".into()))?;
        let (d, n) = (first.d(), first.n());
        if let Some(bad) = rows.iter().position(|r| r.d() != d || r.n() != n) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} differs in (d, N)"
            )));
        }
        if k > n {
            return Err(Error::InvalidParams(format!("strength {k} > N = {n}")));
        }
        Ok(QuantumOA {
            rows,
            d,
            n,
            k,
            provenance,
        })
    }

    pub fn rows(&self) -> &[SparseState<S>] {
        &self.rows
    }

    pub fn r(&self) -> usize {
        self.rows.len()
    }

    /// Number of sites `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `(1/√r) Σ_i |φ_i⟩`.
    pub fn assemble_state(&self) -> SparseState<S> {
        let w = Complex::new(inv_sqrt::<S>(self.r()), S::zero());
        let terms = self
            .rows
            .iter()
            .flat_map(|row| row.terms().map(move |(k, c)| (k.clone(), *c * w)));
        SparseState::from_terms(self.d, self.n, terms).expect("rows share (d, N)")
    }

    /// Largest entrywise deviation of the row Gram matrix from `I_r`.
    pub fn gram_deviation(&self) -> f64 {
        let mut by_ket: HashMap<&Ket, Vec<(usize, Complex<S>)>> = HashMap::new();
        for (idx, row) in self.rows.iter().enumerate() {
            for (ket, amp) in row.terms() {
                by_ket.entry(ket).or_default().push((idx, *amp));
            }
        }
        let mut gram: HashMap<(usize, usize), Complex<S>> = HashMap::new();
        for group in by_ket.values() {
            for &(a, ca) in group {
                for &(b, cb) in group {
                    *gram.entry((a, b)).or_default() += ca.conj() * cb;
                }
            }
        }
        let mut worst = 0.0f64;
        for a in 0..self.r() {
            let diag = gram.get(&(a, a)).copied().unwrap_or_default();
            worst = worst.max((diag - Complex::new(S::one(), S::zero())).norm().as_f64());
        }
        for (&(a, b), v) in &gram {
            if a != b {
                worst = worst.max(v.norm().as_f64());
            }
        }
        worst
    }

    pub fn cast<T: Scalar>(&self) -> QuantumOA<T> {
        QuantumOA {
            rows: self.rows.iter().map(SparseState::cast).collect(),
            d: self.d,
            n: self.n,
            k: self.k,
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct QoaRepr<S: Scalar> {
    r: usize,
    #[serde(rename = "N")]
    n: usize,
    d: u32,
    k: usize,
    provenance: Provenance,
    rows: Vec<SparseState<S>>,
}

impl<S: Scalar> Serialize for QuantumOA<S> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        QoaRepr {
            r: self.r(),
            n: self.n,
            d: self.d,
            k: self.k,
            provenance: self.provenance.clone(),
            rows: self.rows.clone(),
        }
        .serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for QuantumOA<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = QoaRepr::<S>::deserialize(d)?;
        let q = QuantumOA::new(repr.rows, repr.k, repr.provenance).map_err(D::Error::custom)?;
        if q.r() != repr.r || q.n != repr.n || q.d != repr.d {
            return Err(D::Error::custom("header (r, N, d) does not match the rows"));
        }
        Ok(q)
    }
}
