//! Brute-force certification of `k`-uniformity and of the QOA property,
//! plus the negative control and the basis-identity suite.
//!
//! Subsets are enumerated lexicographically and checked in parallel; the
//! report is reduced in enumeration order, so the reported worst subset is
//! the lexicographically first one attaining the maximum.

use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::Field;
use crate::oarray::lex_tuples;
use crate::qoa::{ghz_tail_rows, Provenance, QuantumOA};
use crate::qstate::{
    bell_state, cross_reduced, ghz_state, partial_trace_terms, psi_state, zero_based_sites,
    DensityMatrix, SparseState,
};
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Maximum allowed `|‖ψ‖² − 1|` for inputs in `f64`; `f32` inputs get a
/// precision-scaled allowance.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub k: usize,
    pub subsets_checked: usize,
    /// Over all `k`-subsets, the largest entry of `|ρ_S − I/d^k|` with `ρ_S`
    /// trace-normalized.
    pub max_deviation: f64,
    /// 1-based.
    pub worst_subset: Vec<usize>,
    pub passed: bool,
    pub tolerance: f64,
    /// Seconds. Not serialized, so reports are byte-reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

fn norm_tolerance<S: Scalar>() -> f64 {
    NORM_TOLERANCE.max(64.0 * S::epsilon().as_f64())
}

fn check_norm<S: Scalar>(state: &SparseState<S>) -> Result<()> {
    let n2 = state.norm_sqr().as_f64();
    if (n2 - 1.0).abs() > norm_tolerance::<S>() {
        return Err(Error::Unnormalized(n2));
    }
    Ok(())
}

fn scan(
    n: usize,
    k: usize,
    tol: f64,
    start: Instant,
    deviation: impl Fn(&[usize]) -> f64 + Sync,
) -> UniformityReport {
    let subsets: Vec<Vec<usize>> = (1..=n).combinations(k).collect();
    let devs: Vec<f64> = subsets.par_iter().map(|s| deviation(s)).collect();
    let mut worst = 0;
    for (idx, &dev) in devs.iter().enumerate() {
        // NaN counts as worse than anything.
        if dev > devs[worst] || (dev.is_nan() && !devs[worst].is_nan()) {
            worst = idx;
        }
    }
    let max_deviation = devs[worst];
    UniformityReport {
        k,
        subsets_checked: subsets.len(),
        max_deviation,
        worst_subset: subsets[worst].clone(),
        passed: max_deviation <= tol,
        tolerance: tol,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Checks every `k`-site marginal of a unit-norm state, `1 ≤ k ≤ ⌊n/2⌋`.
pub fn is_k_uniform<S: Scalar>(
    state: &SparseState<S>,
    k: usize,
    tol: f64,
) -> Result<UniformityReport> {
    let start = Instant::now();
    let n = state.n();
    if k == 0 || k > n / 2 {
        return Err(Error::StrengthOutOfRange { k, n });
    }
    check_norm(state)?;
    Ok(scan(n, k, tol, start, |sites| {
        state
            .reduced_density(sites)
            .expect("valid subset")
            .mixedness_deviation()
    }))
}

/// `Σ_{i,j} Tr_{S^c} |φ_i⟩⟨φ_j|` over the rows' unmerged terms. For a QOA
/// this equals `(r/d^k) I`.
pub fn row_pair_sum<S: Scalar>(q: &QuantumOA<S>, sites: &[usize]) -> Result<DensityMatrix<S>> {
    let sites0 = zero_based_sites(sites, q.n())?;
    let terms: Vec<(&[u16], num_complex::Complex<S>)> = q
        .rows()
        .iter()
        .flat_map(|row| row.terms().map(|(k, c)| (k.as_slice(), *c)))
        .collect();
    let entries = partial_trace_terms(
        terms.iter().copied(),
        terms.iter().copied(),
        &sites0,
        q.d(),
        q.n(),
    );
    Ok(DensityMatrix::from_entries(
        q.d(),
        sites0.iter().map(|s| s + 1).collect(),
        entries,
    ))
}

/// Checks the defining QOA identity at the declared strength.
///
/// The deviation is reported on the per-row scale, `max |M/r − I/d^k|` for
/// the row-pair sum `M`, so it is directly comparable with
/// [`is_k_uniform`] on the assembled state.
pub fn qoa_check<S: Scalar>(q: &QuantumOA<S>, tol: f64) -> Result<UniformityReport> {
    qoa_check_at(q, q.k(), tol)
}

pub fn qoa_check_at<S: Scalar>(q: &QuantumOA<S>, k: usize, tol: f64) -> Result<UniformityReport> {
    let start = Instant::now();
    if k == 0 || k > q.n() {
        return Err(Error::StrengthOutOfRange { k, n: q.n() });
    }
    for row in q.rows() {
        check_norm(row)?;
    }
    let r = q.r() as f64;
    let target = S::of(r / (q.d() as f64).powi(k as i32));
    Ok(scan(q.n(), k, tol, start, |sites| {
        row_pair_sum(q, sites)
            .expect("valid subset")
            .deviation_from_identity(target)
            / r
    }))
}

/// The failing marginal of `|ijk⟩|GHZ_ijk⟩^{⊗2}`.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub subset: Vec<usize>,
    pub rho: DensityMatrix<f64>,
    pub deviation: f64,
}

/// Builds the 3+3m rows at `m = 2` directly and evaluates sites {1, 4, 7}.
pub fn m2_counterexample() -> Counterexample {
    let q = QuantumOA::<f64>::new(
        ghz_tail_rows(2, false),
        3,
        Provenance::new("qubit_3_3m_unchecked", serde_json::json!({ "m": 2 })),
    )
    .expect("rows share shape");
    let subset = vec![1, 4, 7];
    let rho = q
        .assemble_state()
        .reduced_density(&subset)
        .expect("valid subset");
    let deviation = rho.mixedness_deviation();
    Counterexample {
        subset,
        rho,
        deviation,
    }
}

/// A sum identity `Σ_{summed} Tr_{keep^c} |s(a)⟩⟨s(b)| = c·I·Π δ`, where `a`
/// ranges over assignments of the index variables and `b` equals `a` except
/// on the primed variables.
#[derive(Clone, Debug)]
struct SumIdentity {
    name: String,
    levels: u32,
    vars: usize,
    summed: Vec<usize>,
    primed: Vec<usize>,
    keep: Vec<usize>,
    scale: f64,
}

impl SumIdentity {
    fn max_deviation(&self, state: &(dyn Fn(&[u32]) -> SparseState<f64> + Sync)) -> f64 {
        let free: Vec<usize> = (0..self.vars)
            .filter(|v| !self.summed.contains(v))
            .collect();
        let mut worst = 0.0f64;
        for fixed in lex_tuples(self.levels, free.len()) {
            for primes in lex_tuples(self.levels, self.primed.len()) {
                let mut acc: Option<DensityMatrix<f64>> = None;
                for sum in lex_tuples(self.levels, self.summed.len()) {
                    let mut a = vec![0u32; self.vars];
                    for (&v, &x) in free.iter().zip(&fixed) {
                        a[v] = x;
                    }
                    for (&v, &x) in self.summed.iter().zip(&sum) {
                        a[v] = x;
                    }
                    let mut b = a.clone();
                    for (&v, &x) in self.primed.iter().zip(&primes) {
                        b[v] = x;
                    }
                    let term =
                        cross_reduced(&state(&a), &state(&b), &self.keep).expect("valid sites");
                    match acc.as_mut() {
                        Some(m) => m.add_assign(&term).expect("same shape"),
                        None => acc = Some(term),
                    }
                }
                let delta = self.primed.iter().zip(&primes).all(|(&v, &x)| {
                    fixed[free
                        .iter()
                        .position(|&f| f == v)
                        .expect("primed index is free")]
                        == x
                });
                let expected = if delta { self.scale } else { 0.0 };
                worst = worst.max(acc.expect("nonempty sum").deviation_from_identity(expected));
            }
        }
        worst
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub group: String,
    pub name: String,
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

pub const SUITE_TOLERANCE: f64 = 1e-12;

fn check(group: &str, name: String, max_deviation: f64) -> IdentityCheck {
    IdentityCheck {
        group: group.to_string(),
        name,
        max_deviation,
        passed: max_deviation <= SUITE_TOLERANCE,
    }
}

const IJK: [&str; 3] = ["i", "j", "k"];

fn ghz_sum(summed: &[usize], primed: &[usize], keep: &[usize], scale: f64) -> SumIdentity {
    let sums = summed.iter().map(|&v| IJK[v]).join(",");
    let primes = primed.iter().map(|&v| format!("{}'", IJK[v])).join(",");
    let traced = (1..=3).filter(|s| !keep.contains(s)).join("");
    SumIdentity {
        name: format!("Σ_{{{sums}}} Tr_{traced} |GHZ⟩⟨GHZ[{primes}]| = {scale}·I"),
        levels: 2,
        vars: 3,
        summed: summed.to_vec(),
        primed: primed.to_vec(),
        keep: keep.to_vec(),
        scale,
    }
}

/// The GHZ-basis sum identities, evaluated for a caller-supplied basis so a
/// perturbed basis can serve as a control.
pub fn ghz_identities(ghz: &(dyn Fn(u8, u8, u8) -> SparseState<f64> + Sync)) -> Vec<IdentityCheck> {
    let (i, j, k) = (0, 1, 2);
    let ids = [
        // One summed index, one primed index, one site kept.
        ghz_sum(&[j], &[i], &[1], 1.0),
        ghz_sum(&[k], &[i], &[1], 1.0),
        ghz_sum(&[i], &[j], &[2], 1.0),
        ghz_sum(&[k], &[j], &[2], 1.0),
        ghz_sum(&[i], &[k], &[3], 1.0),
        ghz_sum(&[j], &[k], &[3], 1.0),
        // One summed index, two sites kept.
        ghz_sum(&[j], &[], &[2, 3], 0.5),
        ghz_sum(&[k], &[], &[2, 3], 0.5),
        ghz_sum(&[i], &[], &[1, 3], 0.5),
        ghz_sum(&[k], &[], &[1, 3], 0.5),
        ghz_sum(&[i], &[], &[1, 2], 0.5),
        ghz_sum(&[j], &[], &[1, 2], 0.5),
        // One summed index, two primed, the summed site kept.
        ghz_sum(&[i], &[j, k], &[1], 1.0),
        ghz_sum(&[j], &[i, k], &[2], 1.0),
        ghz_sum(&[k], &[i, j], &[3], 1.0),
        // Two summed, the primed index's own site traced.
        ghz_sum(&[j, k], &[i], &[2, 3], 1.0),
        ghz_sum(&[i, k], &[j], &[1, 3], 1.0),
        ghz_sum(&[i, j], &[k], &[1, 2], 1.0),
        // Two summed, a summed site traced.
        ghz_sum(&[i, j], &[k], &[2, 3], 1.0),
        ghz_sum(&[i, j], &[k], &[1, 3], 1.0),
        ghz_sum(&[i, k], &[j], &[2, 3], 1.0),
        ghz_sum(&[i, k], &[j], &[1, 2], 1.0),
        ghz_sum(&[j, k], &[i], &[1, 3], 1.0),
        ghz_sum(&[j, k], &[i], &[1, 2], 1.0),
    ];
    let state = |v: &[u32]| ghz(v[0] as u8, v[1] as u8, v[2] as u8);
    ids.par_iter()
        .map(|id| check("ghz", id.name.clone(), id.max_deviation(&state)))
        .collect()
}

const XY: [&str; 4] = ["x1", "x2", "y1", "y2"];

fn bell_sum(summed: &[usize], primed: &[usize], keep: &[usize], scale: f64) -> SumIdentity {
    let sums = summed.iter().map(|&v| XY[v]).join(",");
    let primes = primed.iter().map(|&v| format!("{}'", XY[v])).join(",");
    let traced = (1..=2).filter(|s| !keep.contains(s)).join("");
    let tr = if traced.is_empty() {
        String::new()
    } else {
        format!(" Tr_{traced}")
    };
    SumIdentity {
        name: format!("Σ_{{{sums}}}{tr} |φ⟩⟨φ[{primes}]| = {scale}·I"),
        levels: 2,
        vars: 4,
        summed: summed.to_vec(),
        primed: primed.to_vec(),
        keep: keep.to_vec(),
        scale,
    }
}

/// Bell-basis identities with labels `φ_{x1+x2, y1+y2}`: pairwise inner
/// products, single-index sums under a partial trace, and two-index sums.
pub fn bell_identities(bell: &(dyn Fn(u8, u8) -> SparseState<f64> + Sync)) -> Vec<IdentityCheck> {
    let state = |v: &[u32]| bell(((v[0] + v[1]) % 2) as u8, ((v[2] + v[3]) % 2) as u8);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for (a, b) in lex_tuples(2, 2).cartesian_product(lex_tuples(2, 2).collect_vec()) {
        let ip = bell(a[0] as u8, a[1] as u8)
            .inner(&bell(b[0] as u8, b[1] as u8))
            .expect("same shape");
        let expected = if a == b { 1.0 } else { 0.0 };
        worst = worst.max((ip - num_complex::Complex::new(expected, 0.0)).norm());
    }
    out.push(check("bell", "⟨φ_xy|φ_x'y'⟩ = δ_xx' δ_yy'".into(), worst));

    for (primed, label) in XY.iter().enumerate() {
        let mut worst = 0.0f64;
        for (a, b) in lex_tuples(2, 4).cartesian_product(lex_tuples(2, 4).collect_vec()) {
            if (0..4).any(|v| v != primed && a[v] != b[v]) {
                continue;
            }
            let ip = state(&a).inner(&state(&b)).expect("same shape");
            let expected = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((ip - num_complex::Complex::new(expected, 0.0)).norm());
        }
        out.push(check("bell", format!("⟨φ|φ[{label}']⟩ = δ"), worst));
    }

    let (x1, x2, y1, y2) = (0, 1, 2, 3);
    let ids = [
        bell_sum(&[x2], &[x1], &[1], 1.0),
        bell_sum(&[x1], &[x2], &[1], 1.0),
        bell_sum(&[y1], &[x1], &[2], 1.0),
        bell_sum(&[y2], &[x1], &[2], 1.0),
        bell_sum(&[y1], &[x2], &[2], 1.0),
        bell_sum(&[y2], &[x2], &[2], 1.0),
        bell_sum(&[x1, y1], &[], &[1, 2], 1.0),
        bell_sum(&[x1, y2], &[], &[1, 2], 1.0),
        bell_sum(&[x2, y1], &[], &[1, 2], 1.0),
        bell_sum(&[x2, y2], &[], &[1, 2], 1.0),
    ];
    out.extend(
        ids.par_iter()
            .map(|id| check("bell", id.name.clone(), id.max_deviation(&state)))
            .collect::<Vec<_>>(),
    );
    out
}

/// `ψ_ijk` marginal identities over `GF(d)` for every `α ∉ {0, 1}`, `β ≠ 0`:
/// summing one of `j`, `k` leaves `I_{d²}/d` on any two sites, except that
/// tracing site 2 only works when `j` is summed.
pub fn psi_identities(orders: &[u64]) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    for &d in orders {
        let f = Field::with_order(d)?;
        let order = f.order();
        let (j, k) = (1, 2);
        let ids = [
            (j, [2, 3]),
            (k, [2, 3]),
            (j, [1, 3]),
            (j, [1, 2]),
            (k, [1, 2]),
        ]
        .map(|(summed, keep)| {
            let traced = (1..=3).filter(|s| !keep.contains(s)).join("");
            SumIdentity {
                name: format!("GF({d}): Σ_{} Tr_{traced} |ψ⟩⟨ψ| = I/d", IJK[summed]),
                levels: order,
                vars: 3,
                summed: vec![summed],
                primed: vec![],
                keep: keep.to_vec(),
                scale: 1.0 / order as f64,
            }
        });
        let pairs: Vec<(u32, u32)> = (2..order).cartesian_product(1..order).collect();
        for id in &ids {
            let worst = pairs
                .par_iter()
                .map(|&(alpha, beta)| {
                    let state = |v: &[u32]| {
                        psi_state::<f64>(&f, v[0], v[1], v[2], alpha, beta).expect("valid labels")
                    };
                    id.max_deviation(&state)
                })
                .reduce(|| 0.0, f64::max);
            out.push(check("psi", id.name.clone(), worst));
        }
    }
    Ok(out)
}

/// Fields used by [`appendix_suite`] for the `ψ` identities.
pub const PSI_SUITE_ORDERS: [u64; 3] = [4, 5, 7];

pub fn suite_from(checks: Vec<IdentityCheck>) -> SuiteReport {
    let passed = checks.iter().all(|c| c.passed);
    SuiteReport {
        tolerance: SUITE_TOLERANCE,
        checks,
        passed,
    }
}

/// All GHZ, Bell and `ψ` identities at [`SUITE_TOLERANCE`].
pub fn appendix_suite() -> SuiteReport {
    let mut checks = ghz_identities(&ghz_state::<f64>);
    checks.extend(bell_identities(&bell_state::<f64>));
    checks.extend(psi_identities(&PSI_SUITE_ORDERS).expect("suite fields exist"));
    suite_from(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oarray::{iroa_8_6_2_2, oa_to_qoa};
    use crate::qoa::{build_qubit_3_3m, build_qubit_4_3m};

    fn six_qubit_example() -> QuantumOA<f64> {
        oa_to_qoa(&iroa_8_6_2_2(), 2).unwrap()
    }

    #[test]
    fn six_qubit_example_is_two_but_not_three_uniform() {
        let s = six_qubit_example().assemble_state();
        let r2 = is_k_uniform(&s, 2, DEFAULT_TOLERANCE).unwrap();
        assert!(r2.passed && r2.max_deviation < 1e-12);
        assert_eq!(r2.subsets_checked, 15);
        let r3 = is_k_uniform(&s, 3, DEFAULT_TOLERANCE).unwrap();
        assert!(!r3.passed);
    }

    #[test]
    fn product_state_fails_at_k1() {
        let s = SparseState::<f64>::basis_ket(2, &[0, 0, 0, 0]).unwrap();
        let r = is_k_uniform(&s, 1, DEFAULT_TOLERANCE).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_subset, vec![1]);
        assert!((r.max_deviation - 0.5).abs() < 1e-15);
        let rho = s.reduced_density(&[1]).unwrap();
        assert_eq!(rho.get(0, 0).re, 1.0);
        assert_eq!(rho.nnz(), 1);
    }

    #[test]
    fn preconditions() {
        let s = six_qubit_example().assemble_state();
        assert!(matches!(
            is_k_uniform(&s, 4, 1e-9),
            Err(Error::StrengthOutOfRange { .. })
        ));
        assert!(matches!(
            is_k_uniform(&s, 0, 1e-9),
            Err(Error::StrengthOutOfRange { .. })
        ));
        let doubled = s.scale(num_complex::Complex::new(2.0, 0.0));
        assert!(matches!(
            is_k_uniform(&doubled, 2, 1e-9),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn qoa_check_agrees_with_assembled_state() {
        for q in [
            six_qubit_example(),
            build_qubit_3_3m(1).unwrap(),
            build_qubit_4_3m(2).unwrap(),
        ] {
            let a = qoa_check(&q, DEFAULT_TOLERANCE).unwrap();
            let b = is_k_uniform(&q.assemble_state(), q.k(), DEFAULT_TOLERANCE).unwrap();
            assert!(a.passed && b.passed);
            assert!((a.max_deviation - b.max_deviation).abs() < 1e-12);
        }
    }

    #[test]
    fn row_pair_sum_raw_scale() {
        let q = build_qubit_3_3m::<f64>(1).unwrap();
        let m = row_pair_sum(&q, &[1, 4, 5]).unwrap();
        assert!(m.deviation_from_identity(1.0) < 1e-12);
        assert!((m.trace().re - 8.0).abs() < 1e-12);
    }

    #[test]
    fn counterexample_at_m2() {
        let c = m2_counterexample();
        assert_eq!(c.subset, vec![1, 4, 7]);
        assert!(c.deviation > 0.1, "{}", c.deviation);
        let q = build_qubit_3_3m::<f64>(1).unwrap();
        assert!(
            is_k_uniform(&q.assemble_state(), 3, DEFAULT_TOLERANCE)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn report_json_omits_wall_time() {
        let r = is_k_uniform(&six_qubit_example().assemble_state(), 1, DEFAULT_TOLERANCE).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("wall_time"));
        let back: UniformityReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.max_deviation, r.max_deviation);
        assert_eq!(back.worst_subset, r.worst_subset);
    }

    #[test]
    fn suite_passes_and_detects_perturbation() {
        let report = appendix_suite();
        assert!(
            report.passed,
            "{:#?}",
            report.checks.iter().filter(|c| !c.passed).collect_vec()
        );
        assert_eq!(
            report.checks.iter().filter(|c| c.group == "ghz").count(),
            24
        );

        let perturbed = |i: u8, j: u8, k: u8| {
            let mut s = ghz_state::<f64>(i, j, k);
            let ket = vec![i as u16, j as u16, k as u16];
            let a = s.amplitude(&ket);
            s.set_amplitude(&ket, a + 1e-3).unwrap();
            s
        };
        assert!(!suite_from(ghz_identities(&perturbed)).passed);
    }
}
