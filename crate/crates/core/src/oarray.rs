//! Classical orthogonal arrays: generators, exhaustive strength and
//! irredundancy checks, and conversion to computational-basis QOAs.

use std::collections::HashSet;
use std::fmt::Write as _;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::Field;
use crate::qoa::{Provenance, QuantumOA};
use crate::qstate::SparseState;
use crate::scalar::Scalar;

/// Upper bound on the number of rows a generator may emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowBudget(pub usize);

impl Default for RowBudget {
    fn default() -> Self {
        RowBudget(1 << 20)
    }
}

impl RowBudget {
    pub const ENV_VAR: &'static str = "QOA_ROW_BUDGET";

    /// The default budget, overridden by `QOA_ROW_BUDGET` when it parses.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(RowBudget)
            .unwrap_or_default()
    }

    fn check(self, rows: u128) -> Result<()> {
        if rows > self.0 as u128 {
            Err(Error::RowBudgetExceeded {
                rows,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// An `r × N` array over `[0, d)` with a declared strength.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalArray {
    rows: Vec<Vec<u32>>,
    d: u32,
    strength: usize,
    field: Option<Field>,
}

impl OrthogonalArray {
    /// Validates shape, entries and the declared strength.
    pub fn new(rows: Vec<Vec<u32>>, d: u32, strength: usize) -> Result<Self> {
        let oa = Self::unchecked(rows, d, strength, None)?;
        if !oa.strength_check(strength) {
            return Err(Error::ArrayCheckFailed("strength"));
        }
        Ok(oa)
    }

    fn unchecked(
        rows: Vec<Vec<u32>>,
        d: u32,
        strength: usize,
        field: Option<Field>,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArray(format!("levels d = {d} < 2")));
        }
        let Some(first) = rows.first() else {
            return Err(Error::InvalidArray("no rows".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidArray("no columns".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArray(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|&&x| x >= d) {
                return Err(Error::InvalidArray(format!(
                    "entry {x} in row {i} is ≥ d = {d}"
                )));
            }
        }
        if strength > n {
            return Err(Error::InvalidArray(format!(
                "strength {strength} > {n} columns"
            )));
        }
        Ok(OrthogonalArray {
            rows,
            d,
            strength,
            field,
        })
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn r(&self) -> usize {
        self.rows.len()
    }

    /// Number of factors (columns) `N`.
    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    /// The field whose element indices fill the array, for field-based arrays.
    pub fn field(&self) -> Option<&Field> {
        self.field.as_ref()
    }

    /// Every `k`-column projection contains each of the `d^k` tuples exactly
    /// `r / d^k` times.
    pub fn strength_check(&self, k: usize) -> bool {
        let n = self.n_cols();
        if k == 0 {
            return true;
        }
        if k > n {
            return false;
        }
        let cells = match (self.d as usize).checked_pow(k as u32) {
            Some(c) if self.r().is_multiple_of(c) => c,
            _ => return false,
        };
        let lambda = self.r() / cells;
        let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
        subsets.par_iter().all(|cols| {
            let mut counts = vec![0usize; cells];
            for row in &self.rows {
                let idx = cols
                    .iter()
                    .fold(0usize, |acc, &c| acc * self.d as usize + row[c] as usize);
                counts[idx] += 1;
            }
            counts.iter().all(|&c| c == lambda)
        })
    }

    /// Every `(N − k)`-column projection has `r` distinct rows.
    pub fn irredundancy_check(&self, k: usize) -> bool {
        let n = self.n_cols();
        if k > n {
            return false;
        }
        let subsets: Vec<Vec<usize>> = (0..n).combinations(n - k).collect();
        subsets.par_iter().all(|cols| {
            let mut seen = HashSet::with_capacity(self.r());
            self.rows
                .iter()
                .all(|row| seen.insert(cols.iter().map(|&c| row[c]).collect::<Vec<_>>()))
        })
    }

    /// Header `OA r N d k` followed by one whitespace-separated row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "OA {} {} {} {}\n",
            self.r(),
            self.n_cols(),
            self.d,
            self.strength
        );
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.iter().join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "OA" {
            return Err(Error::Parse(format!(
                "bad header {header:?}, expected `OA r N d k`"
            )));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
        };
        let (r, n, d, k) = (
            num(fields[1])?,
            num(fields[2])?,
            num(fields[3])?,
            num(fields[4])?,
        );
        let rows = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|x| num(x).map(|v| v as u32))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != r {
            return Err(Error::Parse(format!(
                "header says {r} rows, found {}",
                rows.len()
            )));
        }
        if rows.iter().any(|row| row.len() != n) {
            return Err(Error::Parse(format!("every row must have {n} entries")));
        }
        Self::new(rows, d as u32, k)
    }
}

#[derive(Serialize, Deserialize)]
struct OaRepr {
    r: usize,
    #[serde(rename = "N")]
    n: usize,
    d: u32,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<Field>,
    rows: Vec<Vec<u32>>,
}

impl Serialize for OrthogonalArray {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OaRepr {
            r: self.r(),
            n: self.n_cols(),
            d: self.d,
            k: self.strength,
            field: self.field.clone(),
            rows: self.rows.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthogonalArray {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = OaRepr::deserialize(d)?;
        if repr.rows.len() != repr.r || repr.rows.iter().any(|row| row.len() != repr.n) {
            return Err(D::Error::custom("rows do not match the declared r and N"));
        }
        let oa = OrthogonalArray::unchecked(repr.rows, repr.d, repr.k, repr.field)
            .map_err(D::Error::custom)?;
        if !oa.strength_check(oa.strength) {
            return Err(D::Error::custom("array fails its declared strength"));
        }
        Ok(oa)
    }
}

/// All tuples of `[0, levels)^len` in lexicographic order.
pub(crate) fn lex_tuples(levels: u32, len: usize) -> impl Iterator<Item = Vec<u32>> {
    let mut next = Some(vec![0u32; len]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for pos in (0..len).rev() {
            succ[pos] += 1;
            if succ[pos] < levels {
                next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    })
}

/// All `d^N` tuples, lexicographic; strength `N`.
pub fn full_factorial(d: u32, n: usize, budget: RowBudget) -> Result<OrthogonalArray> {
    if n == 0 {
        return Err(Error::InvalidArray("need at least one column".into()));
    }
    budget.check((d as u128).checked_pow(n as u32).unwrap_or(u128::MAX))?;
    OrthogonalArray::unchecked(lex_tuples(d, n).collect(), d, n, None)
}

/// The `d^{N-1}` rows whose digit sum is `≡ l (mod d)`, lexicographic;
/// strength `N − 1`.
pub fn zero_sum_oa(d: u32, n: usize, l: u32, budget: RowBudget) -> Result<OrthogonalArray> {
    if n < 2 {
        return Err(Error::InvalidArray("need at least two columns".into()));
    }
    if l >= d {
        return Err(Error::InvalidArray(format!("residue {l} ≥ d = {d}")));
    }
    budget.check((d as u128).checked_pow(n as u32 - 1).unwrap_or(u128::MAX))?;
    let rows = lex_tuples(d, n - 1)
        .map(|mut row| {
            let s: u32 = row.iter().map(|&x| x % d).sum::<u32>() % d;
            row.push((l + d - s) % d);
            row
        })
        .collect();
    OrthogonalArray::unchecked(rows, d, n - 1, None)
}

/// Rows `(i, k, i + α_1 j + α_1² k, …, i + α_{d-1} j + α_{d-1}² k)` over
/// `GF(d)`, `α_l` the element with index `l`; an OA of strength 3 with
/// `d + 1` columns. `extended` appends column `j`, valid in characteristic 2.
pub fn vandermonde_oa(f: &Field, extended: bool) -> Result<OrthogonalArray> {
    let d = f.order();
    if d <= 3 {
        return Err(Error::InvalidArray(format!("needs d > 3, got {d}")));
    }
    if extended && (f.p() != 2 || f.t() < 2) {
        return Err(Error::InvalidArray(
            "the extra column is only valid for d = 2^t with t ≥ 2".into(),
        ));
    }
    let squares: Vec<u32> = (0..d).map(|a| f.mul(a, a)).collect();
    let mut rows = Vec::with_capacity((d as usize).pow(3));
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut row = Vec::with_capacity(d as usize + 2);
                row.push(i);
                row.push(k);
                for alpha in 1..d {
                    let v = f.add(i, f.add(f.mul(alpha, j), f.mul(squares[alpha as usize], k)));
                    row.push(v);
                }
                if extended {
                    row.push(j);
                }
                rows.push(row);
            }
        }
    }
    OrthogonalArray::unchecked(rows, d, 3, Some(f.clone()))
}

/// The irredundant OA(8, 6, 2, 2) behind the six-qubit 2-uniform example.
pub fn iroa_8_6_2_2() -> OrthogonalArray {
    let rows = [
        [0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 1, 0],
        [0, 1, 1, 1, 0, 1],
        [0, 1, 0, 0, 1, 1],
        [1, 0, 1, 0, 1, 1],
        [1, 0, 0, 1, 0, 1],
        [1, 1, 0, 1, 1, 0],
        [1, 1, 1, 0, 0, 0],
    ];
    OrthogonalArray::new(rows.iter().map(|r| r.to_vec()).collect(), 2, 2).expect("a valid OA")
}

/// Writes each row `(x_1, …, x_N)` as the basis ket `|x_1 … x_N⟩`.
pub fn oa_to_qoa<S: Scalar>(oa: &OrthogonalArray, k: usize) -> Result<QuantumOA<S>> {
    if !oa.strength_check(k) {
        return Err(Error::ArrayCheckFailed("strength"));
    }
    if !oa.irredundancy_check(k) {
        return Err(Error::ArrayCheckFailed("irredundancy"));
    }
    let rows = oa
        .rows()
        .iter()
        .map(|row| {
            let ket: Vec<u16> = row.iter().map(|&x| x as u16).collect();
            SparseState::basis_ket(oa.d(), &ket)
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumOA::new(
        rows,
        k,
        Provenance::new(
            "oa_to_qoa",
            serde_json::json!({ "r": oa.r(), "N": oa.n_cols(), "d": oa.d(), "k": k }),
        ),
    )
}
