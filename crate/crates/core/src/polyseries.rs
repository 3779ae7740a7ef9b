//! Dense polynomials over `F_p`, rounded Laurent-series division and the
//! extended Euclidean algorithm (quadratic and half-GCD variants).
//!
//! A [`SeriesWindow`] holds the terms of degree `>= floor` of a formal
//! Laurent series in `1/x`; it is the result type of reciprocal and rounded
//! division.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::field::{factorize, PrimeField};
use crate::ntt::{cached_plan, ExactConvolver};

/// Products with a factor this short are done by schoolbook multiplication.
const SCHOOLBOOK_LEN: usize = 32;

/// Below this budget the half-GCD recursion runs plain Euclidean steps.
pub const HGCD_BASE: usize = 32;

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`,
/// which orders below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl std::fmt::Display for Degree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Polynomial with coefficients in ascending powers; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpPoly {
    field: PrimeField,
    coeffs: Vec<u64>,
}

impl FpPoly {
    /// Builds a polynomial, reducing coefficients mod `p` and trimming zeros.
    pub fn new(field: PrimeField, coeffs: Vec<u64>) -> Self {
        let p = field.modulus();
        let coeffs = coeffs.into_iter().map(|c| c % p).collect();
        Self::from_reduced(field, coeffs)
    }

    fn from_reduced(field: PrimeField, mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { field, coeffs }
    }

    pub fn zero(field: PrimeField) -> Self {
        Self { field, coeffs: Vec::new() }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::monomial(field, 1, 0)
    }

    /// `c * x^k`.
    pub fn monomial(field: PrimeField, c: u64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c % field.modulus();
        Self::from_reduced(field, coeffs)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NegInfinity,
            n => Degree::Finite(n - 1),
        }
    }

    /// Leading coefficient (0 for the zero polynomial).
    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn deg(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = &self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        Self { field: f, coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn scale(&self, c: u64) -> Self {
        let f = self.field;
        Self::from_reduced(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiplication by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { field: self.field, coeffs }
    }

    /// Drops the `k` lowest coefficients (the polynomial part of `self / x^k`).
    pub fn shift_down(&self, k: usize) -> Self {
        let coeffs = self.coeffs.get(k..).map(|s| s.to_vec()).unwrap_or_default();
        Self { field: self.field, coeffs }
    }

    /// `self mod x^k`.
    pub fn truncate(&self, k: usize) -> Self {
        let coeffs = self.coeffs[..k.min(self.coeffs.len())].to_vec();
        Self::from_reduced(self.field, coeffs)
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.modulus(), other.field.modulus()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        poly_mul(self, other)
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect();
        Self::from_reduced(self.field, coeffs)
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect();
        Self::from_reduced(self.field, coeffs)
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        Self::from_reduced(self.field, mul_slices(&self.field, &self.coeffs, &other.coeffs))
    }
}

/// Exact product; convolution-based above the schoolbook cutoff.
pub fn poly_mul(a: &FpPoly, b: &FpPoly) -> Result<FpPoly> {
    a.check_field(b)?;
    Ok(a.mul_unchecked(b))
}

/// Schoolbook product, kept public as a reference implementation.
pub fn poly_mul_schoolbook(a: &FpPoly, b: &FpPoly) -> Result<FpPoly> {
    a.check_field(b)?;
    Ok(FpPoly::from_reduced(a.field, schoolbook(&a.field, &a.coeffs, &b.coeffs)))
}

fn schoolbook(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p = f.modulus() as u128;
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let v = &mut acc[i + j];
            *v += x as u128 * y as u128;
            if *v >= 1u128 << 126 {
                *v %= p;
            }
        }
    }
    acc.into_iter().map(|v| (v % p) as u64).collect()
}

fn divisors_of_group_order(f: &PrimeField) -> Arc<Vec<u64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<u64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let p = f.modulus();
    if let Some(d) = cache.lock().unwrap().get(&p) {
        return d.clone();
    }
    let mut divs = vec![1u64];
    for (q, e) in factorize(p - 1) {
        let cur = divs.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= q;
            divs.extend(cur.iter().map(|&d| d * pk));
        }
    }
    divs.sort_unstable();
    let divs = Arc::new(divs);
    cache.lock().unwrap().insert(p, divs.clone());
    divs
}

fn mul_slices(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= SCHOOLBOOK_LEN {
        return schoolbook(f, a, b);
    }
    let len = a.len() + b.len() - 1;
    let group = f.modulus() - 1;
    if len as u64 <= group {
        let divs = divisors_of_group_order(f);
        let d = divs[divs.partition_point(|&d| d < len as u64)] as usize;
        if d <= 4 * len.next_power_of_two() {
            return ntt_mul(f, a, b, d, len);
        }
        return float_mul(f, a, b);
    }
    if group / 2 >= 64 {
        return block_mul(f, a, b);
    }
    float_mul(f, a, b)
}

fn ntt_mul(f: &PrimeField, a: &[u64], b: &[u64], d: usize, len: usize) -> Vec<u64> {
    let plan = cached_plan(*f, d).expect("d divides p - 1");
    let mut pa = a.to_vec();
    let mut pb = b.to_vec();
    pa.resize(d, 0);
    pb.resize(d, 0);
    let fa = plan.forward(&pa).unwrap();
    let fb = plan.forward(&pb).unwrap();
    let prod: Vec<u64> = fa.iter().zip(&fb).map(|(&x, &y)| f.mul(x, y)).collect();
    let mut out = plan.inverse(&prod).unwrap();
    out.truncate(len);
    out
}

/// Long products: split into blocks of `(p-1)/2` coefficients so that every
/// block product fits a single length-`(p-1)` cyclic convolution, then
/// accumulate block products in the transform domain.
fn block_mul(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let order = (f.modulus() - 1) as usize;
    let h = order / 2;
    let plan = cached_plan(*f, order).expect("p - 1 is the group order");
    let spectra = |v: &[u64]| -> Vec<Vec<u64>> {
        v.chunks(h)
            .map(|c| {
                let mut buf = c.to_vec();
                buf.resize(order, 0);
                plan.forward(&buf).unwrap()
            })
            .collect()
    };
    let sa = spectra(a);
    let sb = spectra(b);
    let len = a.len() + b.len() - 1;
    let mut out = vec![0u64; len];
    for s in 0..(sa.len() + sb.len() - 1) {
        let mut acc = vec![0u64; order];
        for (i, ai) in sa.iter().enumerate() {
            if s < i || s - i >= sb.len() {
                continue;
            }
            for (z, (&x, &y)) in acc.iter_mut().zip(ai.iter().zip(&sb[s - i])) {
                *z = f.add(*z, f.mul(x, y));
            }
        }
        let block = plan.inverse(&acc).unwrap();
        for (k, v) in block.into_iter().enumerate() {
            if let Some(o) = out.get_mut(s * h + k) {
                *o = f.add(*o, v);
            }
        }
    }
    out
}

fn float_mul(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let conv = ExactConvolver::new(f.modulus(), n);
    let mut pa = a.to_vec();
    let mut pb = b.to_vec();
    pa.resize(n, 0);
    pb.resize(n, 0);
    let mut out = conv.cyclic(&pa, &pb).unwrap_or_else(|| schoolbook(f, a, b));
    out.truncate(len);
    out
}

/// Inverse of the power series `s` modulo `y^n` by Newton doubling. `s[0] != 0`.
fn series_inverse(f: &PrimeField, s: &[u64], n: usize) -> Vec<u64> {
    let mut g = vec![f.inv(s[0]).expect("nonzero constant term")];
    let mut len = 1;
    while len < n {
        let len2 = (2 * len).min(n);
        let e = mul_slices(f, &s[..len2.min(s.len())], &g);
        let tail: Vec<u64> = (len..len2).map(|i| e.get(i).copied().unwrap_or(0)).collect();
        let u = mul_slices(f, &g, &tail);
        g.extend((0..len2 - len).map(|i| f.neg(u.get(i).copied().unwrap_or(0))));
        len = len2;
    }
    g.truncate(n);
    g
}

/// The terms of degree `>= floor` of a Laurent series in `1/x`.
///
/// Coefficients are stored from `top` downward. The zero window has no
/// coefficients and `top = floor - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesWindow {
    field: PrimeField,
    top: i64,
    floor: i64,
    desc: Vec<u64>,
}

impl SeriesWindow {
    /// Builds a window from coefficients listed from degree `top` downward.
    pub fn from_descending(field: PrimeField, top: i64, mut desc: Vec<u64>) -> Self {
        let floor = top - desc.len() as i64 + 1;
        let lead_zeros = desc.iter().take_while(|&&c| c == 0).count();
        desc.drain(..lead_zeros);
        Self { field, top: top - lead_zeros as i64, floor, desc }
    }

    pub fn zero(field: PrimeField, floor: i64) -> Self {
        Self { field, top: floor - 1, floor, desc: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.desc.is_empty()
    }

    /// Degree of the leading term, `None` for the zero window.
    pub fn top_degree(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.top)
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    /// Coefficient of `x^deg`; zero outside the stored range.
    pub fn coeff(&self, deg: i64) -> u64 {
        if deg > self.top || deg < self.floor {
            return 0;
        }
        self.desc[(self.top - deg) as usize]
    }

    /// Coefficients from the top degree down to the floor.
    pub fn descending(&self) -> &[u64] {
        &self.desc
    }

    /// The polynomial part (terms of nonnegative degree).
    pub fn polynomial_part(&self) -> FpPoly {
        if self.is_zero() || self.top < 0 {
            return FpPoly::zero(self.field);
        }
        let lo = self.floor.max(0);
        let coeffs = (0..=self.top).map(|d| if d < lo { 0 } else { self.coeff(d) }).collect();
        FpPoly::from_reduced(self.field, coeffs)
    }
}

/// The `terms` most significant coefficients of `1/a`, from degree `-deg a` down.
pub fn poly_reciprocal_window(a: &FpPoly, terms: usize) -> Result<SeriesWindow> {
    if a.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if terms == 0 {
        return Err(Error::DomainError("terms must be at least 1".into()));
    }
    let d = a.deg();
    let rev: Vec<u64> = a.coeffs.iter().rev().copied().collect();
    let inv = series_inverse(&a.field, &rev, terms);
    Ok(SeriesWindow::from_descending(a.field, -(d as i64), inv))
}

/// `⌊a/b⌉_{-k}`: all terms of `a * b^{-1}` of degree `>= -k`.
pub fn poly_rounded_div(a: &FpPoly, b: &FpPoly, k: i64) -> Result<SeriesWindow> {
    a.check_field(b)?;
    if b.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    let f = a.field;
    if a.is_zero() {
        return Ok(SeriesWindow::zero(f, -k));
    }
    let top = a.deg() as i64 - b.deg() as i64;
    let terms = top + k + 1;
    if terms <= 0 {
        return Ok(SeriesWindow::zero(f, -k));
    }
    let n = terms as usize;
    let a_rev: Vec<u64> = a.coeffs.iter().rev().take(n).copied().collect();
    let b_rev: Vec<u64> = b.coeffs.iter().rev().take(n).copied().collect();
    let inv = series_inverse(&f, &b_rev, n);
    let mut prod = mul_slices(&f, &a_rev, &inv);
    prod.resize(n, 0);
    Ok(SeriesWindow::from_descending(f, top, prod))
}

/// Term-by-term long division of series; `O(terms * deg b)`. Reference for [`poly_rounded_div`].
pub fn poly_rounded_div_schoolbook(a: &FpPoly, b: &FpPoly, k: i64) -> Result<SeriesWindow> {
    a.check_field(b)?;
    if b.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    let f = a.field;
    if a.is_zero() {
        return Ok(SeriesWindow::zero(f, -k));
    }
    let (da, db) = (a.deg(), b.deg());
    let top = da as i64 - db as i64;
    let terms = top + k + 1;
    if terms <= 0 {
        return Ok(SeriesWindow::zero(f, -k));
    }
    let n = terms as usize;
    let lead_inv = f.inv(b.lead())?;
    // Running remainder, indexed by offset below deg a.
    let mut rem: Vec<u64> = (0..n + db).map(|j| if j <= da { a.coeffs[da - j] } else { 0 }).collect();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let c = f.mul(rem[j], lead_inv);
        out.push(c);
        if c != 0 {
            for i in 1..=db {
                rem[j + i] = f.sub(rem[j + i], f.mul(c, b.coeffs[db - i]));
            }
        }
    }
    Ok(SeriesWindow::from_descending(f, top, out))
}

/// Schoolbook quotient and remainder.
pub fn divrem_schoolbook(a: &FpPoly, b: &FpPoly) -> Result<(FpPoly, FpPoly)> {
    a.check_field(b)?;
    if b.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    let f = a.field;
    if a.degree() < b.degree() {
        return Ok((FpPoly::zero(f), a.clone()));
    }
    let (da, db) = (a.deg(), b.deg());
    let lead_inv = f.inv(b.lead())?;
    let mut r = a.coeffs.clone();
    let mut q = vec![0u64; da - db + 1];
    for i in (0..=da - db).rev() {
        let c = f.mul(r[i + db], lead_inv);
        q[i] = c;
        if c != 0 {
            for (j, &bj) in b.coeffs.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, bj));
            }
        }
    }
    r.truncate(db);
    Ok((FpPoly::from_reduced(f, q), FpPoly::from_reduced(f, r)))
}

/// Quotient and remainder, using rounded division for long quotients.
pub fn divrem(a: &FpPoly, b: &FpPoly) -> Result<(FpPoly, FpPoly)> {
    a.check_field(b)?;
    if b.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    if a.degree() < b.degree() {
        return Ok((FpPoly::zero(a.field), a.clone()));
    }
    let qdeg = a.deg() - b.deg();
    if qdeg < SCHOOLBOOK_LEN || b.deg() < SCHOOLBOOK_LEN {
        return divrem_schoolbook(a, b);
    }
    let q = poly_rounded_div(a, b, 0)?.polynomial_part();
    let r = a.sub_unchecked(&q.mul_unchecked(b));
    Ok((q, r))
}

/// Result of the extended Euclidean algorithm stopped at the first remainder
/// of degree below `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EeaOutput {
    /// Index `j` with `deg R_{j-1} >= t > deg R_j`.
    pub j: usize,
    pub p_j: FpPoly,
    pub l_j: FpPoly,
    pub r_j: FpPoly,
    /// `q_1, ..., q_{j-1}`.
    pub quotients: Vec<FpPoly>,
}

impl EeaOutput {
    pub fn rj_degree(&self) -> Degree {
        self.r_j.degree()
    }
}

fn check_eea_input(r0: &FpPoly, r1: &FpPoly, t: usize) -> Result<()> {
    r0.check_field(r1)?;
    if r0.degree() != Degree::Finite(2 * t) {
        return Err(Error::DegreeContract(format!(
            "deg R0 = {} but 2t = {}",
            r0.degree(),
            2 * t
        )));
    }
    if r1.degree() >= Degree::Finite(2 * t) {
        return Err(Error::DegreeContract(format!(
            "deg R1 = {} must be below 2t = {}",
            r1.degree(),
            2 * t
        )));
    }
    Ok(())
}

/// Quadratic-time EEA; the reference implementation.
pub fn eea_slow(r0: &FpPoly, r1: &FpPoly, t: usize) -> Result<EeaOutput> {
    check_eea_input(r0, r1, t)?;
    let f = r0.field;
    let (mut r_prev, mut r_cur) = (r0.clone(), r1.clone());
    let (mut p_prev, mut p_cur) = (FpPoly::one(f), FpPoly::zero(f));
    let (mut l_prev, mut l_cur) = (FpPoly::zero(f), FpPoly::one(f));
    let mut quotients = Vec::new();
    let mut j = 1;
    while r_cur.degree() >= Degree::Finite(t) {
        let (q, r_next) = divrem_schoolbook(&r_prev, &r_cur)?;
        let p_next = p_prev.sub_unchecked(&poly_mul_schoolbook(&q, &p_cur)?);
        let l_next = l_prev.sub_unchecked(&poly_mul_schoolbook(&q, &l_cur)?);
        r_prev = std::mem::replace(&mut r_cur, r_next);
        p_prev = std::mem::replace(&mut p_cur, p_next);
        l_prev = std::mem::replace(&mut l_cur, l_next);
        quotients.push(q);
        j += 1;
    }
    let bezout = poly_mul_schoolbook(&p_cur, r0)?.add_unchecked(&poly_mul_schoolbook(&l_cur, r1)?);
    if bezout != r_cur {
        return Err(Error::DegreeContract("Bezout identity failed".into()));
    }
    Ok(EeaOutput { j, p_j: p_cur, l_j: l_cur, r_j: r_cur, quotients })
}

/// 2x2 polynomial matrix; maps `(r_0, r_1)` to `(r_h, r_{h+1})`.
#[derive(Clone, Debug)]
struct Mat2([FpPoly; 4]);

impl Mat2 {
    fn identity(f: PrimeField) -> Self {
        Mat2([FpPoly::one(f), FpPoly::zero(f), FpPoly::zero(f), FpPoly::one(f)])
    }

    /// Prepends one Euclidean step with quotient `q`.
    fn step(self, q: &FpPoly) -> Self {
        let [m00, m01, m10, m11] = self.0;
        let n10 = m00.sub_unchecked(&q.mul_unchecked(&m10));
        let n11 = m01.sub_unchecked(&q.mul_unchecked(&m11));
        Mat2([m10, m11, n10, n11])
    }

    /// `self * rhs`.
    fn compose(&self, rhs: &Mat2) -> Mat2 {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &rhs.0;
        Mat2([
            a.mul_unchecked(e).add_unchecked(&b.mul_unchecked(g)),
            a.mul_unchecked(f).add_unchecked(&b.mul_unchecked(h)),
            c.mul_unchecked(e).add_unchecked(&d.mul_unchecked(g)),
            c.mul_unchecked(f).add_unchecked(&d.mul_unchecked(h)),
        ])
    }

    fn apply(&self, x: &FpPoly, y: &FpPoly) -> (FpPoly, FpPoly) {
        let [a, b, c, d] = &self.0;
        (
            a.mul_unchecked(x).add_unchecked(&b.mul_unchecked(y)),
            c.mul_unchecked(x).add_unchecked(&d.mul_unchecked(y)),
        )
    }
}

/// Runs the Euclidean steps on `(a, b)` whose quotient degrees sum to at most
/// `k`, appending the quotients. Requires `deg a > deg b`.
///
/// Those quotients depend only on the top `2k + 1` coefficients of `a` and
/// the matching top slice of `b`, so the inputs are truncated before
/// recursing on each half of the budget.
fn hgcd(a: &FpPoly, b: &FpPoly, k: usize, base: usize, qs: &mut Vec<FpPoly>) -> Mat2 {
    let f = a.field;
    if b.is_zero() || a.deg() - b.deg() > k {
        return Mat2::identity(f);
    }
    let (a, b) = if a.deg() > 2 * k {
        let s = a.deg() - 2 * k;
        (a.shift_down(s), b.shift_down(s))
    } else {
        (a.clone(), b.clone())
    };
    if k <= base {
        return euclid_steps(a, b, k, qs);
    }
    let m1 = hgcd(&a, &b, k.div_ceil(2), base, qs);
    let (c, e) = m1.apply(&a, &b);
    let used = a.deg() - c.deg();
    if e.is_zero() || used + (c.deg() - e.deg()) > k {
        return m1;
    }
    let (q, rem) = divrem(&c, &e).expect("nonzero divisor");
    let m1 = m1.step(&q);
    qs.push(q);
    let used = a.deg() - e.deg();
    if rem.is_zero() {
        return m1;
    }
    let m2 = hgcd(&e, &rem, k - used, base, qs);
    m2.compose(&m1)
}

fn euclid_steps(mut a: FpPoly, mut b: FpPoly, k: usize, qs: &mut Vec<FpPoly>) -> Mat2 {
    let mut m = Mat2::identity(a.field);
    let mut used = 0;
    while !b.is_zero() && used + a.deg() - b.deg() <= k {
        used += a.deg() - b.deg();
        let (q, r) = divrem(&a, &b).expect("nonzero divisor");
        m = m.step(&q);
        qs.push(q);
        a = std::mem::replace(&mut b, r);
    }
    m
}

/// Half-GCD EEA with the same output as [`eea_slow`].
pub fn eea_fast(r0: &FpPoly, r1: &FpPoly, t: usize) -> Result<EeaOutput> {
    eea_fast_with_base(r0, r1, t, HGCD_BASE)
}

/// [`eea_fast`] with an explicit recursion cutoff (small values exercise the recursion).
pub fn eea_fast_with_base(r0: &FpPoly, r1: &FpPoly, t: usize, base: usize) -> Result<EeaOutput> {
    check_eea_input(r0, r1, t)?;
    let f = r0.field;
    if t == 0 || r1.degree() < Degree::Finite(t) {
        return Ok(EeaOutput {
            j: 1,
            p_j: FpPoly::zero(f),
            l_j: FpPoly::one(f),
            r_j: r1.clone(),
            quotients: Vec::new(),
        });
    }
    // Steps with remainders of degree > t: this reaches j* with
    // deg R_{j*-1} > t >= deg R_{j*}.
    let mut quotients = Vec::new();
    let mut m = hgcd(r0, r1, t - 1, base.max(1), &mut quotients);
    let (mut r_prev, mut r_cur) = m.apply(r0, r1);
    if r_cur.degree() == Degree::Finite(t) {
        let (q, r_next) = divrem(&r_prev, &r_cur)?;
        m = m.step(&q);
        quotients.push(q);
        r_prev = std::mem::replace(&mut r_cur, r_next);
    }
    debug_assert!(r_prev.degree() >= Degree::Finite(t));
    let [_, _, p_j, l_j] = m.0;
    Ok(EeaOutput { j: quotients.len() + 1, p_j, l_j, r_j: r_cur, quotients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn rand_poly(rng: &mut ChaCha8Rng, f: PrimeField, deg: usize) -> FpPoly {
        let p = f.modulus();
        let mut c: Vec<u64> = (0..=deg).map(|_| rng.gen_range(0..p)).collect();
        c[deg] = rng.gen_range(1..p);
        FpPoly::new(f, c)
    }

    #[test]
    fn degree_sentinel_orders_below_integers() {
        assert!(Degree::NegInfinity < Degree::Finite(0));
        assert_eq!(FpPoly::zero(field(7)).degree(), Degree::NegInfinity);
        assert_eq!(FpPoly::new(field(7), vec![1, 0, 7]).degree(), Degree::Finite(0));
    }

    #[test]
    fn small_products() {
        let f = field(7);
        let a = FpPoly::new(f, vec![1, 1]);
        let b = FpPoly::new(f, vec![6, 1]);
        assert_eq!(poly_mul(&a, &b).unwrap(), FpPoly::new(f, vec![6, 0, 1]));
        assert_eq!(poly_mul(&a, &FpPoly::one(f)).unwrap(), a);
        let g = FpPoly::one(field(11));
        assert!(matches!(poly_mul(&a, &g), Err(Error::FieldMismatch(7, 11))));
    }

    #[test]
    fn fast_products_match_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // ntt path, block path, float path (p - 1 = 2 * 509), large modulus
        for (p, da, db) in [(97u64, 40usize, 40usize), (97, 150, 90), (65537, 700, 300), (1019, 300, 200), (1019, 900, 800), ((1u64 << 61) - 1, 100, 100)] {
            let f = field(p);
            let a = rand_poly(&mut rng, f, da);
            let b = rand_poly(&mut rng, f, db);
            assert_eq!(poly_mul(&a, &b).unwrap(), poly_mul_schoolbook(&a, &b).unwrap(), "p={p}");
        }
    }

    fn reciprocal_oracle(a: &FpPoly, terms: usize) -> Vec<u64> {
        let f = a.field();
        let c = a.coeffs();
        let d = c.len() - 1;
        let inv = f.inv(c[d]).unwrap();
        let mut b: Vec<u64> = vec![inv];
        for j in 1..terms {
            let mut s = 0;
            for i in 1..=j.min(d) {
                s = f.add(s, f.mul(c[d - i], b[j - i]));
            }
            b.push(f.neg(f.mul(inv, s)));
        }
        b
    }

    #[test]
    fn reciprocal_windows() {
        let f = field(5);
        let w = poly_reciprocal_window(&FpPoly::new(f, vec![4, 1]), 4).unwrap();
        assert_eq!(w.top_degree(), Some(-1));
        assert_eq!(w.floor(), -4);
        assert_eq!(w.descending(), &[1, 1, 1, 1]);
        let w = poly_reciprocal_window(&FpPoly::monomial(f, 1, 3), 3).unwrap();
        assert_eq!(w.top_degree(), Some(-3));
        assert_eq!(w.descending(), &[1, 0, 0]);
        assert_eq!(w.coeff(-4), 0);
        assert!(matches!(poly_reciprocal_window(&FpPoly::zero(f), 3), Err(Error::ZeroPolynomial)));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [5u64, 97, 65537] {
            let f = field(p);
            for deg in [0usize, 1, 7, 60] {
                let a = rand_poly(&mut rng, f, deg);
                let w = poly_reciprocal_window(&a, 150).unwrap();
                let expect = reciprocal_oracle(&a, 150);
                for (j, &e) in expect.iter().enumerate() {
                    assert_eq!(w.coeff(-(deg as i64) - j as i64), e);
                }
            }
        }
    }

    #[test]
    fn rounded_division() {
        let f = field(101);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = rand_poly(&mut rng, f, 30);
        let b = rand_poly(&mut rng, f, 12);
        let fast = poly_rounded_div(&a, &b, 10).unwrap();
        assert_eq!(fast, poly_rounded_div_schoolbook(&a, &b, 10).unwrap());
        assert_eq!(fast.top_degree(), Some(18));
        assert_eq!(fast.floor(), -10);
        let one = poly_rounded_div(&a, &a, 5).unwrap();
        assert_eq!(one.top_degree(), Some(0));
        assert_eq!(one.coeff(0), 1);
        assert!((1..=5).all(|k| one.coeff(-k) == 0));
        let empty = poly_rounded_div(&a, &b, -(30 - 12) - 1).unwrap();
        assert!(empty.is_zero());
        assert!(matches!(poly_rounded_div(&a, &FpPoly::zero(f), 0), Err(Error::ZeroDivisor)));

        let f = field(65537);
        let a = rand_poly(&mut rng, f, 400);
        let b = rand_poly(&mut rng, f, 150);
        assert_eq!(poly_rounded_div(&a, &b, 300).unwrap(), poly_rounded_div_schoolbook(&a, &b, 300).unwrap());
    }

    #[test]
    fn divrem_fast_matches_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = field(65537);
        for (da, db) in [(300usize, 100usize), (100, 100), (50, 80), (500, 40)] {
            let a = rand_poly(&mut rng, f, da);
            let b = rand_poly(&mut rng, f, db);
            assert_eq!(divrem(&a, &b).unwrap(), divrem_schoolbook(&a, &b).unwrap());
        }
    }

    #[test]
    fn eea_trivial_and_single_step() {
        let f = field(7);
        let r0 = FpPoly::monomial(f, 1, 2);
        let out = eea_slow(&r0, &FpPoly::zero(f), 1).unwrap();
        assert_eq!((out.j, out.p_j.clone(), out.l_j.clone()), (1, FpPoly::zero(f), FpPoly::one(f)));
        assert_eq!(out.rj_degree(), Degree::NegInfinity);
        assert_eq!(eea_fast(&r0, &FpPoly::zero(f), 1).unwrap(), out);

        // x^2 = (4x + 1)(2x + 3) + 4 over F_7, so P_2 = 1 and L_2 = -(4x + 1)
        let r1 = FpPoly::new(f, vec![3, 2]);
        let out = eea_slow(&r0, &r1, 1).unwrap();
        assert_eq!(out.j, 2);
        assert_eq!(out.quotients, vec![FpPoly::new(f, vec![1, 4])]);
        assert_eq!(out.p_j, FpPoly::one(f));
        assert_eq!(out.l_j, FpPoly::new(f, vec![6, 3]));
        assert_eq!(out.r_j, FpPoly::new(f, vec![4]));
        assert_eq!(eea_fast(&r0, &r1, 1).unwrap(), out);
    }

    #[test]
    fn eea_rejects_bad_degrees() {
        let f = field(7);
        let r0 = FpPoly::monomial(f, 1, 3);
        assert!(matches!(eea_slow(&r0, &FpPoly::one(f), 1), Err(Error::DegreeContract(_))));
        let r0 = FpPoly::monomial(f, 1, 2);
        assert!(matches!(eea_fast(&r0, &FpPoly::monomial(f, 1, 2), 1), Err(Error::DegreeContract(_))));
    }

    #[test]
    fn eea_fast_recursion_matches_slow() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for p in [3u64, 7, 97, 65537] {
            let f = field(p);
            for _ in 0..40 {
                let t = rng.gen_range(1..60);
                let r0 = FpPoly::monomial(f, rng.gen_range(1..p), 2 * t);
                let d1 = rng.gen_range(0..2 * t);
                // sparse-ish inputs make degree drops > 1 common
                let c: Vec<u64> = (0..=d1).map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..p) }).collect();
                let r1 = FpPoly::new(f, c);
                let slow = eea_slow(&r0, &r1, t).unwrap();
                for base in [1usize, 2, 5, HGCD_BASE] {
                    assert_eq!(eea_fast_with_base(&r0, &r1, t, base).unwrap(), slow, "p={p} t={t} base={base}");
                }
            }
        }
    }

    #[test]
    fn eea_fast_large_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = field(65537);
        let t = 400;
        let r0 = FpPoly::monomial(f, 1, 2 * t);
        let r1 = rand_poly(&mut rng, f, 2 * t - 1);
        let slow = eea_slow(&r0, &r1, t).unwrap();
        let fast = eea_fast(&r0, &r1, t).unwrap();
        assert_eq!(fast, slow);
        assert!(fast.p_j.degree() <= Degree::Finite(t - 1));
        assert!(fast.l_j.degree() <= Degree::Finite(t));
    }
}
