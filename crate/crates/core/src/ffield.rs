//! Finite fields `GF(p^t)` with exact arithmetic.
//!
//! Elements are identified with an integer index in `[0, p^t)`: the element
//! with coefficient vector `(c_0, …, c_{t-1})` (constant term first) has index
//! `Σ c_j p^j`. Index 0 is the additive identity and index 1 the
//! multiplicative identity in every field.
//!
//! Hot paths (the builders in [`crate::qoa`] and [`crate::oarray`]) work on raw
//! `u32` indices through [`Field::add`], [`Field::mul`] and friends.
//! [`FieldElement`] wraps an index together with its field and checks that
//! both operands of a binary operation come from the same field.

use std::fmt;
use std::ops;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 4;

/// Largest supported field order; digits of qudit kets are stored as `u16`.
pub const MAX_ORDER: u64 = u16::MAX as u64;

const TABLE_LIMIT: u32 = 256;

/// A finite field `GF(p^t)` presented as `Z_p[x] / (m(x))`.
///
/// Cloning is cheap; the arithmetic tables are shared.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

struct Inner {
    p: u32,
    t: u32,
    modulus: Vec<u32>,
    order: u32,
    tables: Option<Tables>,
}

struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

/// Splits `d = p^t`, or `None` if `d` is not a prime power.
pub fn prime_power(d: u64) -> Option<(u64, u32)> {
    if d < 2 {
        return None;
    }
    let p = (2..=d).find(|f| d.is_multiple_of(*f))?;
    let mut rest = d;
    let mut t = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        t += 1;
    }
    (rest == 1).then_some((p, t))
}

/// Remainder of `a` divided by the monic polynomial `m` over `Z_p`.
/// Coefficients are constant-term first.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let p = p as u64;
    let deg_m = m.len() - 1;
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    if r.len() <= deg_m {
        return r.into_iter().map(|c| c as u32).collect();
    }
    for top in (deg_m..r.len()).rev() {
        let c = r[top] % p;
        if c == 0 {
            continue;
        }
        let shift = top - deg_m;
        for (j, &mj) in m.iter().enumerate() {
            let sub = c * mj as u64 % p;
            r[shift + j] = (r[shift + j] + p - sub) % p;
        }
    }
    r.truncate(deg_m);
    r.into_iter().map(|c| (c % p) as u32).collect()
}

/// Exhaustive irreducibility test: `poly` (monic, constant term first) has no
/// monic factor of degree between 1 and `deg/2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    for fdeg in 1..=deg / 2 {
        let count = (p as u64).pow(fdeg as u32);
        for code in 0..count {
            let mut factor = Vec::with_capacity(fdeg + 1);
            let mut c = code;
            for _ in 0..fdeg {
                factor.push((c % p as u64) as u32);
                c /= p as u64;
            }
            factor.push(1);
            if poly_rem(poly, &factor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The modulus used when none is supplied.
///
/// `GF(8)` uses `x³+x²+1`. Any other field uses the smallest irreducible
/// monic polynomial, ordering candidates by their
/// non-leading coefficients read from degree `t-1` down to the constant term.
pub fn default_modulus(p: u32, t: u32) -> Vec<u32> {
    if (p, t) == (2, 3) {
        return vec![1, 0, 1, 1];
    }
    let count = (p as u64).pow(t);
    for code in 0..count {
        let mut poly = Vec::with_capacity(t as usize + 1);
        let mut c = code;
        for _ in 0..t {
            poly.push((c % p as u64) as u32);
            c /= p as u64;
        }
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    /// Builds `GF(p^t)`. When `modulus` is omitted, [`default_modulus`] is used.
    pub fn new(p: u32, t: u32, modulus: Option<&[u32]>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if t == 0 || t > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(t));
        }
        let order = (p as u64).pow(t);
        if order > MAX_ORDER {
            return Err(Error::FieldTooLarge(order));
        }
        let modulus = match modulus {
            Some(m) => {
                if m.len() != t as usize + 1 {
                    return Err(Error::InvalidPolynomial(format!(
                        "expected degree {t}, got {} coefficients",
                        m.len()
                    )));
                }
                if m[t as usize] != 1 {
                    return Err(Error::InvalidPolynomial("not monic".into()));
                }
                if let Some(&c) = m.iter().find(|&&c| c >= p) {
                    return Err(Error::InvalidPolynomial(format!(
                        "coefficient {c} is not reduced mod {p}"
                    )));
                }
                if !is_irreducible(m, p) {
                    return Err(Error::ReduciblePolynomial(m.to_vec(), p));
                }
                m.to_vec()
            }
            None => default_modulus(p, t),
        };
        let mut inner = Inner {
            p,
            t,
            modulus,
            order: order as u32,
            tables: None,
        };
        if inner.order <= TABLE_LIMIT {
            inner.tables = Some(Tables::build(&inner));
        }
        Ok(Field {
            inner: Arc::new(inner),
        })
    }

    /// The prime field `Z_p`.
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, None)
    }

    /// The field of order `d` with its default modulus.
    pub fn with_order(d: u64) -> Result<Self> {
        let (p, t) = prime_power(d).ok_or(Error::NotPrimePower(d))?;
        if d > MAX_ORDER {
            return Err(Error::FieldTooLarge(d));
        }
        Self::new(p as u32, t, None)
    }

    pub fn p(&self) -> u32 {
        self.inner.p
    }

    pub fn t(&self) -> u32 {
        self.inner.t
    }

    /// Field order `d = p^t`.
    pub fn order(&self) -> u32 {
        self.inner.order
    }

    /// Modulus coefficients, constant term first, leading 1 included.
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.inner.t == 1
    }

    /// Base-`p` coefficient vector of the element with index `a`.
    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        self.inner.coeffs(a)
    }

    /// Index of the element with the given coefficients (constant first).
    pub fn index_of(&self, coeffs: &[u32]) -> Result<u32> {
        if coeffs.len() > self.inner.t as usize {
            return Err(Error::InvalidPolynomial(format!(
                "{} coefficients for a degree-{} extension",
                coeffs.len(),
                self.inner.t
            )));
        }
        if coeffs.iter().any(|&c| c >= self.inner.p) {
            return Err(Error::InvalidPolynomial("coefficient not reduced".into()));
        }
        Ok(self.inner.index_of(coeffs))
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.inner.tables {
            Some(tb) => tb.add[(a * self.inner.order + b) as usize],
            None => self.inner.add_raw(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match &self.inner.tables {
            Some(tb) => tb.neg[a as usize],
            None => self.inner.neg_raw(a),
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.inner.tables {
            Some(tb) => tb.mul[(a * self.inner.order + b) as usize],
            None => self.inner.mul_raw(a, b),
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace `a + a^p + … + a^{p^{t-1}}`, an element of the prime
    /// subfield, returned as an integer in `[0, p)`.
    pub fn trace(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut conj = a;
        for _ in 0..self.inner.t {
            acc = self.add(acc, conj);
            conj = self.pow(conj, self.inner.p as u64);
        }
        debug_assert!(acc < self.inner.p);
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(match &self.inner.tables {
            Some(tb) => tb.inv[a as usize],
            None => self.pow(a, self.inner.order as u64 - 2),
        })
    }

    /// `element_by_index`.
    pub fn element(&self, index: u64) -> Result<FieldElement> {
        if index >= self.inner.order as u64 {
            return Err(Error::IndexOutOfRange {
                index,
                order: self.inner.order,
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            index: index as u32,
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            index: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            index: 1,
        }
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.inner.order).map(move |index| FieldElement {
            field: self.clone(),
            index,
        })
    }

    /// Renders the element with index `a` as a polynomial in `x`.
    pub fn format(&self, a: u32) -> String {
        if self.is_prime_field() {
            return a.to_string();
        }
        let coeffs = self.coeffs(a);
        let terms: Vec<String> = coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| {
                let var = match j {
                    0 => String::new(),
                    1 => "x".to_string(),
                    _ => format!("x^{j}"),
                };
                match (c, j) {
                    (_, 0) => c.to_string(),
                    (1, _) => var,
                    _ => format!("{c}{var}"),
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    fn same_as(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

impl Inner {
    fn coeffs(&self, mut a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.t as usize);
        for _ in 0..self.t {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    fn index_of(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn add_raw(&self, a: u32, b: u32) -> u32 {
        if self.t == 1 {
            return (a + b) % self.p;
        }
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let sum: Vec<u32> = ca
            .iter()
            .zip(&cb)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        self.index_of(&sum)
    }

    fn neg_raw(&self, a: u32) -> u32 {
        let c: Vec<u32> = self
            .coeffs(a)
            .into_iter()
            .map(|x| (self.p - x) % self.p)
            .collect();
        self.index_of(&c)
    }

    fn mul_raw(&self, a: u32, b: u32) -> u32 {
        if self.t == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let p = self.p as u64;
        let mut prod = vec![0u32; 2 * self.t as usize - 1];
        for (i, &x) in ca.iter().enumerate() {
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p) as u32;
            }
        }
        let rem = poly_rem(&prod, &self.modulus, self.p);
        self.index_of(&rem)
    }
}

impl Tables {
    fn build(f: &Inner) -> Self {
        let d = f.order;
        let mut add = Vec::with_capacity((d * d) as usize);
        let mut mul = Vec::with_capacity((d * d) as usize);
        for a in 0..d {
            for b in 0..d {
                add.push(f.add_raw(a, b));
                mul.push(f.mul_raw(a, b));
            }
        }
        let neg = (0..d).map(|a| f.neg_raw(a)).collect();
        let mut inv = vec![0; d as usize];
        for a in 1..d {
            inv[a as usize] = (1..d)
                .find(|&b| mul[(a * d + b) as usize] == 1)
                .expect("nonzero elements are invertible");
        }
        Tables { add, mul, neg, inv }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
            && self.inner.t == other.inner.t
            && self.inner.modulus == other.inner.modulus
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}) mod {:?}", self.inner.order, self.inner.modulus)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.inner.order)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    p: u32,
    t: u32,
    poly: Vec<u32>,
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr {
            p: self.p(),
            t: self.t(),
            poly: self.modulus().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(d)?;
        Field::new(repr.p, repr.t, Some(&repr.poly)).map_err(serde::de::Error::custom)
    }
}

/// An element of a specific [`Field`].
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    index: u32,
}

impl FieldElement {
    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.index)
    }

    pub fn is_zero(&self) -> bool {
        self.index == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.same_as(&other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn with(&self, index: u32) -> Self {
        FieldElement {
            field: self.field.clone(),
            index,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.add(self.index, other.index)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.sub(self.index, other.index)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.field.mul(self.index, other.index)))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.with(self.field.inv(self.index)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.with(self.field.pow(self.index, e))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.field, self.field.format(self.index))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format(self.index))
    }
}

// Operator forms panic on a field mismatch; use the `try_*` methods to
// handle it as an error.
impl ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> FieldElement {
        self.try_add(rhs).expect("field mismatch")
    }
}

impl ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> FieldElement {
        self.try_sub(rhs).expect("field mismatch")
    }
}

impl ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> FieldElement {
        self.try_mul(rhs).expect("field mismatch")
    }
}

impl ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.with(self.field.neg(self.index))
    }
}
