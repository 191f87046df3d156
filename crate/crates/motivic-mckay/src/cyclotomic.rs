//! Exact arithmetic in cyclotomic fields Q(xi_d), and exact linear algebra
//! over them.
//!
//! A [`CycNum`] stores coordinates in the power basis {1, xi, ..., xi^(phi(d)-1)}
//! modulo the d-th cyclotomic polynomial, with arbitrary-precision rational
//! coefficients.  The quotient is a field, so Gaussian elimination needs no
//! zero-divisor handling.  Mixed conductors are unified by embedding into the
//! lcm conductor (xi_m maps to xi_D^(D/m)).

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use crate::{Error, Rational, Result};

/// Euler's totient.
pub fn euler_phi(d: u64) -> usize {
    let mut n = d;
    let mut phi = d;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi as usize
}

fn divisors(d: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= d {
        if d.is_multiple_of(i) {
            out.push(i);
            if i != d / i {
                out.push(d / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

static CACHE_BOUND: AtomicU64 = AtomicU64::new(360);

/// Conductors up to this bound get their cyclotomic polynomial memoized;
/// larger ones are recomputed per call.
pub fn cyclotomic_cache_bound() -> u64 {
    CACHE_BOUND.load(Ordering::Relaxed)
}

/// Adjust the memoization bound.
pub fn set_cyclotomic_cache_bound(bound: u64) {
    CACHE_BOUND.store(bound, Ordering::Relaxed);
}

/// Coefficients (ascending, monic) of the d-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(d: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if d <= cyclotomic_cache_bound() {
        if let Some(hit) = cache.lock().unwrap().get(&d) {
            return hit.clone();
        }
    }
    let value = Arc::new(compute_cyclotomic(d));
    if d <= cyclotomic_cache_bound() {
        cache
            .lock()
            .unwrap()
            .entry(d)
            .or_insert_with(|| value.clone());
    }
    value
}

/// Phi_d = (x^d - 1) / prod of Phi_e over proper divisors e of d.
fn compute_cyclotomic(d: u64) -> Vec<BigInt> {
    assert!(d >= 1, "conductor must be positive");
    // x^d - 1
    let mut num = vec![BigInt::zero(); d as usize + 1];
    num[0] = -BigInt::one();
    num[d as usize] = BigInt::one();
    for e in divisors(d) {
        if e == d {
            continue;
        }
        let phi_e = cyclotomic_polynomial(e);
        num = int_poly_div_exact(&num, &phi_e);
    }
    num
}

/// Exact division of integer polynomials, divisor monic.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for i in (dd..=dn).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for j in 0..=dd {
            rem[i - dd + j] -= &c * &den[j];
        }
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "division must be exact");
    quot
}

/// Reduce a rational-coefficient polynomial modulo Phi_d, returning exactly
/// phi(d) coefficients.
fn reduce_mod_cyclotomic(mut coeffs: Vec<Rational>, d: u64) -> Vec<Rational> {
    let phi = euler_phi(d);
    let modulus = cyclotomic_polynomial(d);
    let deg = phi; // degree of Phi_d
    let mut i = coeffs.len();
    while i > deg {
        i -= 1;
        let c = std::mem::replace(&mut coeffs[i], Rational::zero());
        if c.is_zero() {
            continue;
        }
        for j in 0..deg {
            let m = Rational::from(modulus[j].clone()) * &c;
            coeffs[i - deg + j] -= m;
        }
    }
    coeffs.truncate(phi);
    coeffs.resize(phi, Rational::zero());
    coeffs
}

/// An exact element of Q(xi_d) in the power basis modulo Phi_d.
#[derive(Debug, Clone)]
pub struct CycNum {
    conductor: u64,
    coeffs: Vec<Rational>, // length phi(d), fully reduced
}

impl CycNum {
    /// Build from polynomial coefficients in xi (any length; reduced here).
    pub fn from_coeffs(conductor: u64, coeffs: Vec<Rational>) -> CycNum {
        assert!(conductor >= 1, "conductor must be positive");
        CycNum {
            conductor,
            coeffs: reduce_mod_cyclotomic(coeffs, conductor),
        }
    }

    /// The fixed primitive d-th root of unity: the power-basis generator.
    pub fn primitive_root(d: u64) -> CycNum {
        CycNum::from_coeffs(d, vec![Rational::zero(), Rational::one()])
    }

    /// A rational constant (conductor 1).
    pub fn from_rational(r: Rational) -> CycNum {
        CycNum::from_coeffs(1, vec![r])
    }

    /// An integer constant (conductor 1).
    pub fn from_integer(i: i64) -> CycNum {
        CycNum::from_rational(Rational::from(BigInt::from(i)))
    }

    pub fn zero() -> CycNum {
        CycNum::from_integer(0)
    }

    pub fn one() -> CycNum {
        CycNum::from_integer(1)
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Reduced power-basis coordinates, length phi(conductor).
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, if this element lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-express in conductor `to`; requires conductor | to.
    pub fn embed(&self, to: u64) -> CycNum {
        assert!(
            to.is_multiple_of(self.conductor),
            "embedding target must be a multiple of the conductor"
        );
        if to == self.conductor {
            return self.clone();
        }
        let step = (to / self.conductor) as usize;
        let mut lifted = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            lifted[i * step] = c.clone();
        }
        CycNum::from_coeffs(to, lifted)
    }

    fn unified(&self, other: &CycNum) -> (CycNum, CycNum, u64) {
        let d = lcm(self.conductor, other.conductor);
        (self.embed(d), other.embed(d), d)
    }

    pub fn add(&self, other: &CycNum) -> CycNum {
        let (a, b, d) = self.unified(other);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x + y)
            .collect();
        CycNum {
            conductor: d,
            coeffs,
        }
    }

    pub fn sub(&self, other: &CycNum) -> CycNum {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycNum {
        CycNum {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &CycNum) -> CycNum {
        let (a, b, d) = self.unified(other);
        let mut prod = vec![Rational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                prod[i + j] += x * y;
            }
        }
        CycNum::from_coeffs(d, prod)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// Phi_d (coprime to any nonzero residue, since the quotient is a field).
    pub fn inv(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = self.conductor;
        let phi: Vec<Rational> = cyclotomic_polynomial(d)
            .iter()
            .map(|c| Rational::from(c.clone()))
            .collect();
        let (g, _, t) = poly_ext_gcd(&phi, &self.coeffs);
        // g is a nonzero constant; inverse = t / g
        let g0 = g[0].clone();
        debug_assert!(g.len() == 1 && !g0.is_zero(), "residues must be coprime to Phi_d");
        let coeffs = t.iter().map(|c| c / &g0).collect();
        Ok(CycNum::from_coeffs(d, coeffs))
    }

    pub fn div(&self, other: &CycNum) -> Result<CycNum> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power (negative exponents via the inverse).
    pub fn pow(&self, k: i64) -> Result<CycNum> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut base = self.clone();
        let mut k = k as u64;
        let mut acc = CycNum::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        Ok(acc)
    }
}

/// Polynomial extended gcd over Q: returns (g, s, t) with s*a + t*b = g,
/// all as coefficient vectors with trailing zeros trimmed.
fn poly_ext_gcd(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>, Vec<Rational>) {
    fn trim(mut v: Vec<Rational>) -> Vec<Rational> {
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
        v
    }
    fn is_zero_poly(v: &[Rational]) -> bool {
        v.iter().all(Zero::is_zero)
    }
    fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let mut out = a.to_vec();
        out.resize(a.len().max(b.len()), Rational::zero());
        for (i, y) in b.iter().enumerate() {
            out[i] -= y;
        }
        trim(out)
    }
    // division with remainder: a = q*b + r
    fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let lead = b[db].clone();
        if r.len() < b.len() {
            return (vec![Rational::zero()], r);
        }
        let mut q = vec![Rational::zero(); r.len() - db];
        while !is_zero_poly(&r) && r.len() > db {
            let dr = r.len() - 1;
            let c = &r[dr] / &lead;
            q[dr - db] = c.clone();
            for j in 0..=db {
                let m = &b[j] * &c;
                r[dr - db + j] -= m;
            }
            r = trim(r);
            if dr == 0 {
                break;
            }
        }
        (trim(q), r)
    }

    let mut r0 = trim(a.to_vec());
    let mut r1 = trim(b.to_vec());
    let mut s0 = vec![Rational::one()];
    let mut s1 = vec![Rational::zero()];
    let mut t0 = vec![Rational::zero()];
    let mut t1 = vec![Rational::one()];
    while !is_zero_poly(&r1) {
        let (q, r) = poly_divmod(&r0, &r1);
        let new_s = poly_sub(&s0, &poly_mul(&q, &s1));
        let new_t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = new_s;
        t0 = t1;
        t1 = new_t;
    }
    (r0, s0, t0)
}

impl PartialEq for CycNum {
    fn eq(&self, other: &CycNum) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b, _) = self.unified(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNum {}

impl fmt::Display for CycNum {
    /// Rendered as a polynomial in `xi`, e.g. `1/2*xi^3 - 1/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !mag.is_one() || k == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            if k > 0 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if k == 1 {
                    write!(f, "xi")?;
                } else {
                    write!(f, "xi^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Parse "p/q" or "p" into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::input(format!("bad rational `{s}`")))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| Error::input(format!("bad rational `{s}`")))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::input(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(n, d))
}

mod serde_impl {
    use super::*;
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct CycNumJson {
        conductor: u64,
        coeffs: Vec<String>,
    }

    impl Serialize for CycNum {
        fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
            CycNumJson {
                conductor: self.conductor,
                coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
            }
            .serialize(serializer)
        }
    }

    impl<'de> Deserialize<'de> for CycNum {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
            let raw = CycNumJson::deserialize(deserializer)?;
            if raw.conductor == 0 {
                return Err(D::Error::custom("conductor must be positive"));
            }
            if raw.coeffs.len() > raw.conductor as usize {
                return Err(D::Error::custom(
                    "coefficient list longer than the conductor (input must have degree < d)",
                ));
            }
            let coeffs = raw
                .coeffs
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| D::Error::custom(e.to_string()))?;
            Ok(CycNum::from_coeffs(raw.conductor, coeffs))
        }
    }
}

/// A square matrix over the cyclotomic field, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycMatrix {
    n: usize,
    entries: Vec<CycNum>,
}

impl CycMatrix {
    pub fn from_rows(rows: Vec<Vec<CycNum>>) -> Result<CycMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("matrix must be square"));
        }
        Ok(CycMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> CycMatrix {
        let mut m = CycMatrix::zero(n);
        for i in 0..n {
            *m.get_mut(i, i) = CycNum::one();
        }
        m
    }

    pub fn zero(n: usize) -> CycMatrix {
        CycMatrix {
            n,
            entries: vec![CycNum::zero(); n * n],
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(diag: Vec<CycNum>) -> CycMatrix {
        let n = diag.len();
        let mut m = CycMatrix::zero(n);
        for (i, e) in diag.into_iter().enumerate() {
            *m.get_mut(i, i) = e;
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &CycNum {
        &self.entries[i * self.n + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut CycNum {
        &mut self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[CycNum] {
        &self.entries
    }

    pub fn mul(&self, other: &CycMatrix) -> CycMatrix {
        assert_eq!(self.n, other.n, "matrix sizes must match");
        let n = self.n;
        let mut out = CycMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = CycNum::zero();
                for k in 0..n {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.get(k, j)));
                }
                *out.get_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn sub(&self, other: &CycMatrix) -> CycMatrix {
        assert_eq!(self.n, other.n, "matrix sizes must match");
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a = a.sub(b);
        }
        out
    }

    /// Scale every entry.
    pub fn scale(&self, s: &CycNum) -> CycMatrix {
        CycMatrix {
            n: self.n,
            entries: self.entries.iter().map(|e| e.mul(s)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == CycMatrix::identity(self.n)
    }

    /// Re-express every entry in conductor `to`.
    pub fn embed(&self, to: u64) -> CycMatrix {
        CycMatrix {
            n: self.n,
            entries: self.entries.iter().map(|e| e.embed(to)).collect(),
        }
    }

    pub fn determinant(&self) -> CycNum {
        let n = self.n;
        let mut m = self.entries.clone();
        let at = |m: &Vec<CycNum>, i: usize, j: usize| m[i * n + j].clone();
        let mut det = CycNum::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !at(&m, r, col).is_zero());
            let Some(pivot) = pivot else {
                return CycNum::zero();
            };
            if pivot != col {
                for j in 0..n {
                    m.swap(pivot * n + j, col * n + j);
                }
                det = det.neg();
            }
            let p = at(&m, col, col);
            det = det.mul(&p);
            let pinv = p.inv().expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = at(&m, r, col).mul(&pinv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let s = factor.mul(&at(&m, col, j));
                    m[r * n + j] = at(&m, r, j).sub(&s);
                }
            }
        }
        det
    }

    /// Rank via Gaussian elimination over the field.
    pub fn rank(&self) -> usize {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            let pivot = (row..n).find(|&r| !m[r * n + col].is_zero());
            let Some(pivot) = pivot else { continue };
            if pivot != row {
                for j in 0..n {
                    m.swap(pivot * n + j, row * n + j);
                }
            }
            let pinv = m[row * n + col].inv().expect("pivot is nonzero");
            for r in row + 1..n {
                let factor = m[r * n + col].mul(&pinv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let s = factor.mul(&m[row * n + j]);
                    m[r * n + j] = m[r * n + j].sub(&s);
                }
            }
            rank += 1;
            row += 1;
            if row == n {
                break;
            }
        }
        rank
    }

    /// Inverse via Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<CycMatrix> {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut inv = CycMatrix::identity(n).entries;
        for col in 0..n {
            let pivot =
                (col..n).find(|&r| !m[r * n + col].is_zero()).ok_or(Error::SingularGenerator)?;
            if pivot != col {
                for j in 0..n {
                    m.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let pinv = m[col * n + col].inv().expect("pivot is nonzero");
            for j in 0..n {
                m[col * n + j] = m[col * n + j].mul(&pinv);
                inv[col * n + j] = inv[col * n + j].mul(&pinv);
            }
            for r in 0..n {
                if r == col || m[r * n + col].is_zero() {
                    continue;
                }
                let factor = m[r * n + col].clone();
                for j in 0..n {
                    let s = factor.mul(&m[col * n + j]);
                    m[r * n + j] = m[r * n + j].sub(&s);
                    let s = factor.mul(&inv[col * n + j]);
                    inv[r * n + j] = inv[r * n + j].sub(&s);
                }
            }
        }
        Ok(CycMatrix { n, entries: inv })
    }
}

/// dim ker(m), by exact Gaussian elimination.
pub fn kernel_dimension(m: &CycMatrix) -> usize {
    m.size() - m.rank()
}
