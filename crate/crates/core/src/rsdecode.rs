//! Narrow-sense Reed-Solomon syndromes and syndrome decoding.
//!
//! The code is the kernel of the `n x (p-1)` Vandermonde map with entries
//! `gamma^(ij)`. Error vectors are indexed `1..=p-1`; position `p-1` plays the
//! role of index 0 in the transform, so the syndrome is the first `n` entries
//! of the NTT of the right-rotated vector `(y_{p-1}, y_1, ..., y_{p-2})`.
//!
//! Decoding solves the key equation with the half-GCD EEA, expands
//! `-x P_j / L_j` into the full syndrome series by rounded division and
//! inverts the transform.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ntt::{cached_plan, naive_transform, NttPlan};
use crate::polyseries::{
    eea_fast, eea_slow, poly_rounded_div, poly_rounded_div_schoolbook, EeaOutput, FpPoly,
};

#[derive(Clone, Debug)]
pub struct RsCode {
    field: PrimeField,
    n: usize,
    t: usize,
    plan: Arc<NttPlan>,
}

impl RsCode {
    /// Code with `n` syndrome symbols correcting up to `t` errors.
    pub fn new(field: PrimeField, n: usize, t: usize) -> Result<Self> {
        let p = field.modulus();
        if p < 3 {
            return Err(Error::InvalidCode("p must be at least 3".into()));
        }
        if n as u64 > p - 2 {
            return Err(Error::InvalidCode(format!("n = {n} exceeds p - 2 = {}", p - 2)));
        }
        if 2 * t > n {
            return Err(Error::InvalidCode(format!("2t = {} exceeds n = {n}", 2 * t)));
        }
        let plan = cached_plan(field, (p - 1) as usize)?;
        Ok(Self { field, n, t, plan })
    }

    /// Code with the default radius `t = floor(n/2)`.
    pub fn with_default_radius(field: PrimeField, n: usize) -> Result<Self> {
        Self::new(field, n, n / 2)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Block length `m = p - 1`.
    pub fn length(&self) -> usize {
        (self.field.modulus() - 1) as usize
    }

    /// Minimum distance `n + 1`.
    pub fn distance(&self) -> usize {
        self.n + 1
    }
}

/// Error vector `(y_1, ..., y_{p-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorVector {
    entries: Vec<u64>,
}

impl ErrorVector {
    pub fn new(entries: Vec<u64>) -> Self {
        Self { entries }
    }

    pub fn zero(len: usize) -> Self {
        Self { entries: vec![0; len] }
    }

    /// Builds from `(position, value)` pairs with positions in `1..=len`.
    pub fn from_sparse(len: usize, terms: &[(usize, u64)]) -> Self {
        let mut entries = vec![0; len];
        for &(i, v) in terms {
            entries[i - 1] = v;
        }
        Self { entries }
    }

    /// Entries in order `y_1, ..., y_{p-1}`.
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// `y_i` for `1 <= i <= p-1`.
    pub fn get(&self, i: usize) -> u64 {
        self.entries[i - 1]
    }

    pub fn weight(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0).count()
    }

    /// Positions `i` (1-based) with `y_i != 0`.
    pub fn support(&self) -> Vec<usize> {
        (1..=self.entries.len()).filter(|&i| self.entries[i - 1] != 0).collect()
    }

    fn rotated(&self) -> Vec<u64> {
        let m = self.entries.len();
        let mut v = Vec::with_capacity(m);
        v.push(self.entries[m - 1]);
        v.extend_from_slice(&self.entries[..m - 1]);
        v
    }

    fn from_rotated(v: Vec<u64>) -> Self {
        let mut entries = v;
        entries.rotate_left(1);
        Self { entries }
    }
}

/// Uniformly random error of exactly `weight` nonzero entries.
pub fn random_error<R: rand::Rng>(code: &RsCode, weight: usize, rng: &mut R) -> ErrorVector {
    let len = code.length();
    let p = code.field.modulus();
    let positions = rand::seq::index::sample(rng, len, weight.min(len));
    let mut entries = vec![0; len];
    for i in positions {
        entries[i] = rng.gen_range(1..p);
    }
    ErrorVector { entries }
}

fn check_error_len(code: &RsCode, y: &ErrorVector) -> Result<()> {
    if y.entries.len() != code.length() {
        return Err(Error::LengthMismatch { expected: code.length(), got: y.entries.len() });
    }
    Ok(())
}

/// `s_j = sum_i gamma^(ij) y_i` for `j < n`, through one NTT.
pub fn syndrome_from_error(code: &RsCode, y: &ErrorVector) -> Result<Vec<u64>> {
    check_error_len(code, y)?;
    let mut s = code.plan.forward(&y.rotated())?;
    s.truncate(code.n);
    Ok(s)
}

/// Vandermonde product computed directly; reference for [`syndrome_from_error`].
pub fn syndrome_naive(code: &RsCode, y: &ErrorVector) -> Result<Vec<u64>> {
    check_error_len(code, y)?;
    let f = &code.field;
    let g = f.gamma();
    Ok((0..code.n)
        .map(|j| {
            let gj = f.pow(g, j as u64);
            let mut w = gj;
            let mut acc = 0;
            for &yi in &y.entries {
                acc = f.add(acc, f.mul(w, yi));
                w = f.mul(w, gj);
            }
            acc
        })
        .collect())
}

fn check_syndrome(code: &RsCode, s: &[u64]) -> Result<()> {
    if s.len() < 2 * code.t || s.len() > code.n {
        return Err(Error::LengthMismatch { expected: 2 * code.t, got: s.len() });
    }
    Ok(())
}

/// `R_0 = x^{2t}` and `R_1 = sum_{k<2t} s_k x^{2t-1-k}`.
fn key_polynomials(code: &RsCode, s: &[u64]) -> (FpPoly, FpPoly) {
    let f = code.field;
    let t2 = 2 * code.t;
    let r0 = FpPoly::monomial(f, 1, t2);
    let r1 = FpPoly::new(f, (0..t2).map(|i| s[t2 - 1 - i]).collect());
    (r0, r1)
}

/// Runs the fast EEA on the key polynomials; `L_j` is the error locator.
pub fn key_equation(code: &RsCode, s: &[u64]) -> Result<EeaOutput> {
    check_syndrome(code, s)?;
    let (r0, r1) = key_polynomials(code, s);
    eea_fast(&r0, &r1, code.t)
}

/// Fails unless `y` has weight at most `t` and reproduces `s`.
fn confirm(code: &RsCode, y: ErrorVector, s: &[u64], resyndrome: &[u64]) -> Result<ErrorVector> {
    if y.weight() > code.t || &resyndrome[..s.len()] != s {
        return Err(Error::WeightContractViolated { t: code.t });
    }
    Ok(y)
}

/// Recovers the unique error of weight `<= t` with syndrome `s` (length between `2t` and `n`).
pub fn decode_fast(code: &RsCode, s: &[u64]) -> Result<ErrorVector> {
    check_syndrome(code, s)?;
    let m = code.length();
    if s[..2 * code.t].iter().all(|&v| v == 0) {
        let y = ErrorVector::zero(m);
        return confirm(code, y, s, &vec![0; code.n]);
    }
    let (r0, r1) = key_polynomials(code, s);
    let eea = eea_fast(&r0, &r1, code.t)?;
    let series = full_series(code, &eea, false)?;
    let y = ErrorVector::from_rotated(code.plan.inverse(&series)?);
    let check = syndrome_from_error(code, &y)?;
    confirm(code, y, s, &check)
}

/// Quadratic-time decoder used as a cross-check: quadratic EEA, schoolbook
/// series division, direct inverse transform and direct re-encoding.
pub fn decode_naive(code: &RsCode, s: &[u64]) -> Result<ErrorVector> {
    check_syndrome(code, s)?;
    let f = code.field;
    let m = code.length();
    if s[..2 * code.t].iter().all(|&v| v == 0) {
        let y = ErrorVector::zero(m);
        return confirm(code, y, s, &vec![0; code.n]);
    }
    let (r0, r1) = key_polynomials(code, s);
    let eea = eea_slow(&r0, &r1, code.t)?;
    let series = full_series(code, &eea, true)?;
    let g_inv = f.inv(f.gamma())?;
    let m_inv = f.inv(m as u64)?;
    let rotated: Vec<u64> = naive_transform(&f, g_inv, &series)
        .into_iter()
        .map(|v| f.mul(v, m_inv))
        .collect();
    let y = ErrorVector::from_rotated(rotated);
    let check = syndrome_naive(code, &y)?;
    confirm(code, y, s, &check)
}

/// `s_0, ..., s_{p-2}` read off `⌊-x P_j / L_j⌉_{-(p-2)}`.
fn full_series(code: &RsCode, eea: &EeaOutput, schoolbook: bool) -> Result<Vec<u64>> {
    let m = code.length();
    let numer = eea.p_j.shift_up(1).neg();
    let k = m as i64 - 1;
    let window = if schoolbook {
        poly_rounded_div_schoolbook(&numer, &eea.l_j, k)?
    } else {
        poly_rounded_div(&numer, &eea.l_j, k)?
    };
    Ok((0..m).map(|j| window.coeff(-(j as i64))).collect())
}
