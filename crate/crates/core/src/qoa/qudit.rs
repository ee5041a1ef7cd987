use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde_json::json;

use super::{Provenance, QuantumOA};
use crate::error::{Error, Result};
use crate::ffield::{default_modulus, Field};
use crate::qstate::{phi2_state, phi3_state, psi_state, SparseState};
use crate::scalar::Scalar;

/// Parameters of the `2+n+3m` prime-power construction: the column
/// multipliers `α_1 = 1, α_2, …, α_n` and the `ψ` coefficient `β`, all as
/// field element indices.
///
/// Invariant: the alphas are distinct and nonzero, `α_1 = 1`, `α_2² ≠ 1`,
/// and `β` avoids [`QudParams::forbidden_betas`].
#[derive(Clone, Debug, PartialEq)]
pub struct QudParams {
    field: Field,
    alphas: Vec<u32>,
    beta: u32,
}

impl QudParams {
    pub fn new(field: Field, alphas: Vec<u32>, beta: u32) -> Result<Self> {
        check_alphas(&field, &alphas)?;
        if beta == 0 || beta >= field.order() {
            return Err(Error::InvalidParams(format!(
                "beta = {beta} is not a nonzero element"
            )));
        }
        if Self::forbidden_betas(&field, &alphas).contains(&beta) {
            return Err(Error::InvalidParams(format!(
                "beta = {} is excluded for alphas {:?}",
                field.format(beta),
                alphas.iter().map(|&a| field.format(a)).collect_vec()
            )));
        }
        Ok(QudParams {
            field,
            alphas,
            beta,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn alphas(&self) -> &[u32] {
        &self.alphas
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Number of classical columns after `|i, k⟩`.
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// `{α_2²−1, α_2²+α_2} ∪ {α_2 α_s, (α_2−1) α_s : s = 1..n}`.
    pub fn forbidden_betas(f: &Field, alphas: &[u32]) -> BTreeSet<u32> {
        let a2 = alphas[1];
        let sq = f.mul(a2, a2);
        let a2m1 = f.sub(a2, 1);
        let mut out = BTreeSet::from([f.sub(sq, 1), f.add(sq, a2)]);
        for &a in alphas {
            out.insert(f.mul(a2, a));
            out.insert(f.mul(a2m1, a));
        }
        out
    }

    fn to_json(&self) -> serde_json::Value {
        json!({ "field": self.field, "alphas": self.alphas, "beta": self.beta })
    }
}

fn check_alphas(f: &Field, alphas: &[u32]) -> Result<()> {
    if alphas.len() < 2 {
        return Err(Error::InvalidParams("need at least α_1 and α_2".into()));
    }
    if alphas[0] != 1 {
        return Err(Error::InvalidParams("α_1 must be 1".into()));
    }
    if alphas.iter().any(|&a| a == 0 || a >= f.order()) {
        return Err(Error::InvalidParams(
            "alphas must be nonzero field elements".into(),
        ));
    }
    if !alphas.iter().all_unique() {
        return Err(Error::InvalidParams("alphas must be distinct".into()));
    }
    if f.mul(alphas[1], alphas[1]) == 1 {
        return Err(Error::InvalidParams("α_2² must differ from 1".into()));
    }
    Ok(())
}

/// `{α_2, α_2², α_2−1, α_2²−1, α_2²+α_2, α_2²−α_2}`, the `β` exclusions of
/// the `4+3m` construction.
pub fn qud_4_3m_forbidden_betas(f: &Field, alpha2: u32) -> Vec<u32> {
    let sq = f.mul(alpha2, alpha2);
    vec![
        alpha2,
        sq,
        f.sub(alpha2, 1),
        f.sub(sq, 1),
        f.add(sq, alpha2),
        f.sub(sq, alpha2),
    ]
}

fn pinned(f: &Field) -> Option<([u32; 4], u32)> {
    if f.modulus() != default_modulus(f.p(), f.t()).as_slice() {
        return None;
    }
    match f.order() {
        7 | 11 | 13 => Some(([1, 2, 3, 4], 5)),
        // x, x², x+1 and β = x²+x+1 modulo x³+x²+1.
        8 => Some(([1, 2, 4, 3], 7)),
        _ => None,
    }
}

/// Parameters for `n` classical columns over `f`, `d ≥ 7`, `2 ≤ n ≤ 4`.
///
/// Fields of order 7, 8, 11 and 13 with their default moduli get fixed
/// known-good parameters. Otherwise the first valid tuple in the order
/// (α_2, remaining alphas, β), each ascending by index.
pub fn select_params(f: &Field, n: usize) -> Result<QudParams> {
    let d = f.order();
    if d < 7 {
        return Err(Error::InvalidParams(format!(
            "parameter selection needs d ≥ 7, got {d}"
        )));
    }
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidParams(format!(
            "n must lie in 2..=4, got {n}"
        )));
    }
    if let Some((alphas, beta)) = pinned(f) {
        return QudParams::new(f.clone(), alphas[..n].to_vec(), beta);
    }
    for a2 in 2..d {
        if f.mul(a2, a2) == 1 {
            continue;
        }
        let rest = (2..d).filter(|&a| a != a2);
        for tail in rest.combinations(n - 2) {
            let mut alphas = vec![1, a2];
            alphas.extend(tail);
            let forbidden = QudParams::forbidden_betas(f, &alphas);
            if let Some(beta) = (1..d).find(|b| !forbidden.contains(b)) {
                return QudParams::new(f.clone(), alphas, beta);
            }
        }
    }
    Err(Error::NoValidParams { d, n })
}

fn digits(xs: impl IntoIterator<Item = u32>) -> Vec<u16> {
    xs.into_iter().map(|x| x as u16).collect()
}

fn rows_3d<S: Scalar>(
    d: u32,
    row: impl Fn(u32, u32, u32) -> Result<SparseState<S>> + Sync,
) -> Result<Vec<SparseState<S>>> {
    let d3 = (d as usize).pow(3);
    (0..d3)
        .into_par_iter()
        .map(|x| {
            let x = x as u32;
            row(x / (d * d), (x / d) % d, x % d)
        })
        .collect()
}

fn psi_rows<S: Scalar>(params: &QudParams, m: usize) -> Result<Vec<SparseState<S>>> {
    let f = &params.field;
    let (a2, beta) = (params.alphas[1], params.beta);
    rows_3d(f.order(), |i, j, k| {
        let mut head = vec![i, k];
        for &a in &params.alphas {
            head.push(f.add(i, f.add(f.mul(a, j), f.mul(f.mul(a, a), k))));
        }
        let prefix = SparseState::<S>::basis_ket(f.order(), &digits(head))?;
        prefix.tensor(&psi_state::<S>(f, i, j, k, a2, beta)?.tensor_power(m))
    })
}

/// `QOA(d³, 4+3m, d, 3)` from rows `|i, k, i+j+k, i+α_2 j+α_2² k⟩ ψ_ijk^{⊗m}`.
/// Requires `n = 2`, `d > 3`, and `β` outside
/// [`qud_4_3m_forbidden_betas`].
pub fn build_qud_4_3m<S: Scalar>(params: &QudParams, m: usize) -> Result<QuantumOA<S>> {
    let f = &params.field;
    if params.n() != 2 {
        return Err(Error::InvalidParams(format!(
            "expected n = 2, got {}",
            params.n()
        )));
    }
    if f.order() <= 3 {
        return Err(Error::InvalidParams("this construction needs d > 3".into()));
    }
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if qud_4_3m_forbidden_betas(f, params.alphas[1]).contains(&params.beta) {
        return Err(Error::InvalidParams(format!(
            "beta = {} is excluded",
            f.format(params.beta)
        )));
    }
    let mut prov = params.to_json();
    prov["m"] = json!(m);
    QuantumOA::new(psi_rows(params, m)?, 3, Provenance::new("qud_4_3m", prov))
}

/// `QOA(d³, 2+n+3m, d, 3)` from rows
/// `|i, k, i+α_1 j+α_1² k, …, i+α_n j+α_n² k⟩ ψ_ijk^{⊗m}`.
pub fn build_qud_2_n_3m<S: Scalar>(params: &QudParams, m: usize) -> Result<QuantumOA<S>> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    let mut prov = params.to_json();
    prov["n"] = json!(params.n());
    prov["m"] = json!(m);
    QuantumOA::new(psi_rows(params, m)?, 3, Provenance::new("qud_2_n_3m", prov))
}

/// The rows `|i, j, k, (d−1)(i+j+k)⟩ φ3_ijk^{⊗m}` for `d ∈ {3, 5}`,
/// arithmetic mod `d`, declared with strength 3.
///
/// These rows do not form a QOA. Sites 2, 3 and the tail pin down `j`, `k`
/// and `l` but not `i`, so the marginal on {1, 4, 7} keeps coherences of
/// size `1/d³` between rows that differ only in `i`. At `d = 3` the map
/// `(j, k) ↦ (2j+k, j+2k)` is singular and the `φ3` are not even
/// orthonormal. [`crate::qoa::plan`] therefore never selects this builder.
pub fn build_qud35<S: Scalar>(d: u32, m: usize) -> Result<QuantumOA<S>> {
    if d != 3 && d != 5 {
        return Err(Error::InvalidParams(format!("d must be 3 or 5, got {d}")));
    }
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    let rows = rows_3d(d, |i, j, k| {
        let head = [i, j, k, ((d - 1) * (i + j + k)) % d];
        let prefix = SparseState::<S>::basis_ket(d, &digits(head))?;
        prefix.tensor(&phi3_state::<S>(d, i, j, k)?.tensor_power(m))
    })?;
    QuantumOA::new(rows, 3, Provenance::new("qud35", json!({ "d": d, "m": m })))
}

/// Strength-2 arrangements over `GF(d)`, `d ≥ 3`: `|i, j, i+j⟩ φ2_ij^{⊗m}`
/// (`3+2m`) and `|i, j, i+j, i+αj⟩ φ2_ij^{⊗m}` (`4+2m`, `α ∉ {0, 1}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuditPairing {
    ThreePlus2m,
    FourPlus2m { alpha: u32 },
}

pub fn build_strength2_qud<S: Scalar>(
    f: &Field,
    variant: QuditPairing,
    m: usize,
) -> Result<QuantumOA<S>> {
    let d = f.order();
    if d < 3 {
        return Err(Error::InvalidParams(
            "strength-2 qudit arrangements need d ≥ 3".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    let (name, alpha) = match variant {
        QuditPairing::ThreePlus2m => ("qud_3_2m", None),
        QuditPairing::FourPlus2m { alpha } => {
            if alpha <= 1 || alpha >= d {
                return Err(Error::InvalidParams(format!(
                    "alpha = {alpha} must lie outside {{0, 1}}"
                )));
            }
            ("qud_4_2m", Some(alpha))
        }
    };
    let rows = (0..d * d)
        .into_par_iter()
        .map(|x| {
            let (i, j) = (x / d, x % d);
            let mut head = vec![i, j, f.add(i, j)];
            if let Some(a) = alpha {
                head.push(f.add(i, f.mul(a, j)));
            }
            let prefix = SparseState::<S>::basis_ket(d, &digits(head))?;
            prefix.tensor(&phi2_state::<S>(f, i, j)?.tensor_power(m))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut prov = json!({ "field": f, "m": m });
    if let Some(a) = alpha {
        prov["alpha"] = json!(a);
    }
    QuantumOA::new(rows, 2, Provenance::new(name, prov))
}
