use super::{
    build_qubit_11_3m, build_qubit_3_3m, build_qubit_4_3m, build_qud_2_n_3m, build_strength2_qubit,
    build_strength2_qud, select_params, QuantumOA, QubitPairing, QudParams, QuditPairing,
};
use crate::error::{Error, Result};
use crate::ffield::{prime_power, Field};
use crate::scalar::Scalar;

/// A builder together with the parameters chosen for a requested `(N, d, k)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Plan {
    Qubit3 {
        m: usize,
    },
    Qubit4 {
        m: usize,
    },
    Qubit11 {
        m: usize,
    },
    QudGeneral {
        params: QudParams,
        m: usize,
    },
    Strength2Qubit {
        variant: QubitPairing,
        m: usize,
    },
    Strength2Qud {
        field: Field,
        variant: QuditPairing,
        m: usize,
    },
}

impl Plan {
    /// Number of tensor copies of the tail state.
    pub fn m(&self) -> usize {
        match self {
            Plan::Qubit3 { m }
            | Plan::Qubit4 { m }
            | Plan::Qubit11 { m }
            | Plan::QudGeneral { m, .. }
            | Plan::Strength2Qubit { m, .. }
            | Plan::Strength2Qud { m, .. } => *m,
        }
    }

    pub fn builder_name(&self) -> &'static str {
        match self {
            Plan::Qubit3 { .. } => "build_qubit_3_3m",
            Plan::Qubit4 { .. } => "build_qubit_4_3m",
            Plan::Qubit11 { .. } => "build_qubit_11_3m",
            Plan::QudGeneral { .. } => "build_qud_2_n_3m",
            Plan::Strength2Qubit { .. } => "build_strength2_qubit",
            Plan::Strength2Qud { .. } => "build_strength2_qud",
        }
    }

    pub fn build<S: Scalar>(&self) -> Result<QuantumOA<S>> {
        match self {
            Plan::Qubit3 { m } => build_qubit_3_3m(*m),
            Plan::Qubit4 { m } => build_qubit_4_3m(*m),
            Plan::Qubit11 { m } => build_qubit_11_3m(*m),
            Plan::QudGeneral { params, m } => build_qud_2_n_3m(params, *m),
            Plan::Strength2Qubit { variant, m } => build_strength2_qubit(*variant, *m),
            Plan::Strength2Qud { field, variant, m } => build_strength2_qud(field, *variant, *m),
        }
    }
}

/// Chooses a construction for `(N, d, k)` without building it.
pub fn plan(n: usize, d: u32, k: usize) -> Result<Plan> {
    let uncovered = |reason: &str| Error::NotCovered {
        n,
        d,
        k,
        reason: reason.to_string(),
    };
    if d < 2 {
        return Err(Error::InvalidParams(format!("local dimension {d} < 2")));
    }
    if prime_power(d as u64).is_none() {
        return Err(uncovered("d is not a prime power"));
    }
    match (k, d) {
        (2, _) if n < 5 => Err(uncovered("strength 2 needs N ≥ 5")),
        (2, 2) if n % 2 == 1 => Ok(Plan::Strength2Qubit {
            variant: QubitPairing::ThreePlus2m,
            m: (n - 3) / 2,
        }),
        (2, 2) => Ok(Plan::Strength2Qubit {
            variant: QubitPairing::TwoPlus2m,
            m: (n - 2) / 2,
        }),
        (2, _) => {
            let field = Field::with_order(d as u64)?;
            let (variant, m) = if n % 2 == 1 {
                (QuditPairing::ThreePlus2m, (n - 3) / 2)
            } else {
                (QuditPairing::FourPlus2m { alpha: 2 }, (n - 4) / 2)
            };
            Ok(Plan::Strength2Qud { field, variant, m })
        }
        (3, 2) => match n {
            0..=5 => Err(uncovered("strength 3 needs N ≥ 6")),
            7 | 8 | 9 | 11 => Err(uncovered("N ∈ {7, 8, 9, 11} is open for qubits")),
            _ => Ok(match n % 3 {
                0 => Plan::Qubit3 { m: (n - 3) / 3 },
                1 => Plan::Qubit4 { m: (n - 4) / 3 },
                _ => Plan::Qubit11 { m: (n - 11) / 3 },
            }),
        },
        // build_qud35 rows are not a QOA (see its docs), so nothing covers these.
        (3, 3 | 5) => Err(uncovered(
            "the d ∈ {3, 5} rows fail 3-uniformity; no verified construction",
        )),
        (3, 4) => Err(uncovered("no admissible β exists over GF(4)")),
        (3, _) if n < 7 => Err(uncovered("strength 3 with d ≥ 7 needs N ≥ 7")),
        (3, _) => {
            let field = Field::with_order(d as u64)?;
            let cols = 2 + (n - 7) % 3;
            let m = (n - 2 - cols) / 3;
            Ok(Plan::QudGeneral {
                params: select_params(&field, cols)?,
                m,
            })
        }
        _ => Err(uncovered("only strengths 2 and 3 are implemented")),
    }
}

/// Builds a QOA with exactly the requested `(N, d, k)`.
pub fn dispatch<S: Scalar>(n: usize, d: u32, k: usize) -> Result<QuantumOA<S>> {
    let q = plan(n, d, k)?.build::<S>()?;
    debug_assert_eq!((q.n(), q.d(), q.k()), (n, d, k));
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_strength3_residues() {
        assert_eq!(plan(14, 2, 3).unwrap(), Plan::Qubit11 { m: 1 });
        assert_eq!(plan(6, 2, 3).unwrap(), Plan::Qubit3 { m: 1 });
        assert_eq!(plan(10, 2, 3).unwrap(), Plan::Qubit4 { m: 2 });
        assert_eq!(plan(12, 2, 3).unwrap(), Plan::Qubit3 { m: 3 });
        for n in [7, 8, 9, 11, 5] {
            let err = plan(n, 2, 3).unwrap_err();
            assert!(matches!(err, Error::NotCovered { .. }), "{n}");
            assert!(err.to_string().contains("not covered"));
        }
    }

    #[test]
    fn prime_power_strength3() {
        match plan(10, 7, 3).unwrap() {
            Plan::QudGeneral { params, m } => assert_eq!((params.n(), m), (2, 2)),
            other => panic!("{other:?}"),
        }
        match plan(9, 8, 3).unwrap() {
            Plan::QudGeneral { params, m } => assert_eq!((params.n(), m), (4, 1)),
            other => panic!("{other:?}"),
        }
        assert!(plan(7, 3, 3).is_err());
        assert!(plan(10, 5, 3).is_err());
        assert!(plan(8, 5, 3).is_err());
        assert!(plan(7, 4, 3).is_err());
        assert!(plan(7, 6, 3).is_err());
        assert!(plan(7, 7, 4).is_err());
    }

    #[test]
    fn dispatched_shapes_match_request() {
        for (n, d, k) in [
            (5, 2, 2),
            (6, 2, 2),
            (5, 3, 2),
            (6, 4, 2),
            (7, 5, 2),
            (13, 2, 3),
            (8, 7, 3),
        ] {
            let q = dispatch::<f64>(n, d, k).unwrap();
            assert_eq!((q.n(), q.d(), q.k()), (n, d, k));
        }
    }
}
