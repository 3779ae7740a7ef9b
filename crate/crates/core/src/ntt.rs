//! Number-theoretic transforms of arbitrary order over `F_p`.
//!
//! A plan factors the order into primes (smallest first) and runs a
//! mixed-radix Cooley-Tukey recursion. Radix-2 and radix-3 butterflies are
//! evaluated directly; larger prime radices go through Rader's algorithm,
//! whose cyclic convolution is computed exactly with a floating-point FFT
//! on split limbs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{is_prime, prime_factors_with_multiplicity, smallest_primitive_root, PrimeField};

/// Rader leaves at or below this prime use a schoolbook cyclic convolution.
const RADER_SCHOOLBOOK_MAX: usize = 64;

/// Largest magnitude (in bits) allowed for an exact float convolution output.
const FLOAT_SAFE_BITS: u32 = 44;

/// Precomputed tables for transforms of one fixed order.
pub struct NttPlan {
    field: PrimeField,
    beta: u64,
    order: usize,
    factors: Vec<usize>,
    powers: Vec<u64>,
    inv_order: u64,
    rader: HashMap<usize, RaderPlan>,
}

impl std::fmt::Debug for NttPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NttPlan")
            .field("p", &self.field.modulus())
            .field("beta", &self.beta)
            .field("order", &self.order)
            .field("factors", &self.factors)
            .finish()
    }
}

impl NttPlan {
    /// Plan for the transform `X_j = sum_i beta^(ij) x_i` of length `order`.
    pub fn new(field: PrimeField, beta: u64, order: usize) -> Result<Self> {
        let actual = field.order(beta)?;
        if actual != order as u64 {
            return Err(Error::DomainError(format!(
                "beta = {beta} has order {actual}, not {order}"
            )));
        }
        let mut powers = Vec::with_capacity(order);
        let mut acc = 1 % field.modulus();
        for _ in 0..order {
            powers.push(acc);
            acc = field.mul(acc, beta);
        }
        let factors: Vec<usize> = prime_factors_with_multiplicity(order as u64)
            .into_iter()
            .map(|q| q as usize)
            .collect();
        let mut rader = HashMap::new();
        for &q in &factors {
            if q > 3 && !rader.contains_key(&q) {
                let w = powers[order / q];
                rader.insert(q, RaderPlan::new(field, w, q));
            }
        }
        let inv_order = field.inv(order as u64 % field.modulus())?;
        Ok(Self {
            field,
            beta,
            order,
            factors,
            powers,
            inv_order,
            rader,
        })
    }

    /// Plan using the canonical root `gamma^((p-1)/order)`.
    pub fn for_order(field: PrimeField, order: usize) -> Result<Self> {
        let beta = field.root_of_unity(order as u64)?;
        Self::new(field, beta, order)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn beta(&self) -> u64 {
        self.beta
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Forward transform into a caller-owned buffer.
    pub fn forward_into(&self, x: &[u64], out: &mut [u64]) -> Result<()> {
        self.check_len(x.len())?;
        self.check_len(out.len())?;
        let maxf = self.factors.iter().copied().max().unwrap_or(1);
        let mut scratch = Scratch {
            t: vec![0; maxf],
            u: vec![0; maxf],
        };
        self.recurse(0, x, 0, 1, out, &mut scratch);
        Ok(())
    }

    pub fn forward(&self, x: &[u64]) -> Result<Vec<u64>> {
        let mut out = vec![0; self.order];
        self.forward_into(x, &mut out)?;
        Ok(out)
    }

    /// Inverse transform: `x_i = order^{-1} sum_j beta^(-ij) X_j`.
    pub fn inverse(&self, x: &[u64]) -> Result<Vec<u64>> {
        let y = self.forward(x)?;
        let n = self.order;
        Ok((0..n)
            .map(|i| self.field.mul(self.inv_order, y[(n - i) % n]))
            .collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.order {
            return Err(Error::LengthMismatch {
                expected: self.order,
                got: len,
            });
        }
        Ok(())
    }

    fn recurse(
        &self,
        depth: usize,
        x: &[u64],
        off: usize,
        stride: usize,
        out: &mut [u64],
        s: &mut Scratch,
    ) {
        let n = out.len();
        if n == 1 {
            out[0] = x[off];
            return;
        }
        let f = self.factors[depth];
        let m = n / f;
        if m == 1 {
            for r in 0..f {
                s.t[r] = x[off + r * stride];
            }
            self.prime_dft(f, s);
            out.copy_from_slice(&s.u[..f]);
            return;
        }
        for r in 0..f {
            self.recurse(
                depth + 1,
                x,
                off + r * stride,
                stride * f,
                &mut out[r * m..(r + 1) * m],
                s,
            );
        }
        let fp = &self.field;
        if f == 2 {
            let (lo, hi) = out.split_at_mut(m);
            for k in 0..m {
                let a = lo[k];
                let b = fp.mul(hi[k], self.powers[stride * k]);
                lo[k] = fp.add(a, b);
                hi[k] = fp.sub(a, b);
            }
            return;
        }
        for k in 0..m {
            for r in 0..f {
                s.t[r] = fp.mul(out[r * m + k], self.powers[stride * r * k]);
            }
            self.prime_dft(f, s);
            for j in 0..f {
                out[k + m * j] = s.u[j];
            }
        }
    }

    /// Length-`f` DFT of `s.t[..f]` into `s.u[..f]` with root `beta^(order/f)`.
    fn prime_dft(&self, f: usize, s: &mut Scratch) {
        let fp = &self.field;
        match f {
            2 => {
                s.u[0] = fp.add(s.t[0], s.t[1]);
                s.u[1] = fp.sub(s.t[0], s.t[1]);
            }
            3 => {
                let w1 = self.powers[self.order / 3];
                let w2 = self.powers[2 * self.order / 3];
                let (a, b, c) = (s.t[0], s.t[1], s.t[2]);
                s.u[0] = fp.add(fp.add(a, b), c);
                s.u[1] = fp.add(a, fp.add(fp.mul(b, w1), fp.mul(c, w2)));
                s.u[2] = fp.add(a, fp.add(fp.mul(b, w2), fp.mul(c, w1)));
            }
            _ => {
                let plan = &self.rader[&f];
                let y = plan.run(&s.t[..f]);
                s.u[..f].copy_from_slice(&y);
            }
        }
    }
}

struct Scratch {
    t: Vec<u64>,
    u: Vec<u64>,
}

/// Prime-length transform reduced to a cyclic convolution.
struct RaderPlan {
    field: PrimeField,
    q: usize,
    /// `zeta^k mod q` for `k = 0..q-1`.
    zeta_pow: Vec<usize>,
    /// `zeta^(-k) mod q` for `k = 0..q-1`.
    zeta_inv_pow: Vec<usize>,
    kernel: RaderKernel,
}

enum RaderKernel {
    Schoolbook(Vec<u64>),
    Fft {
        conv: ExactConvolver,
        b: Vec<u64>,
        b_spectra: Vec<Vec<Complex64>>,
    },
}

impl RaderPlan {
    fn new(field: PrimeField, w: u64, q: usize) -> Self {
        let zeta = smallest_primitive_root(q as u64) as usize;
        let mut zeta_pow = Vec::with_capacity(q - 1);
        let mut acc = 1usize % q.max(2);
        for _ in 0..q - 1 {
            zeta_pow.push(acc);
            acc = acc * zeta % q;
        }
        let mut zeta_inv_pow = vec![0; q - 1];
        for k in 0..q - 1 {
            zeta_inv_pow[k] = zeta_pow[(q - 1 - k) % (q - 1)];
        }
        let b: Vec<u64> = zeta_inv_pow.iter().map(|&e| field.pow(w, e as u64)).collect();
        let kernel = if q <= RADER_SCHOOLBOOK_MAX {
            RaderKernel::Schoolbook(b)
        } else {
            let n = (2 * q - 3).next_power_of_two();
            let conv = ExactConvolver::new(field.modulus(), n);
            let mut padded = b;
            padded.resize(n, 0);
            let b_spectra = conv.spectra(&padded);
            RaderKernel::Fft {
                conv,
                b: padded,
                b_spectra,
            }
        };
        Self {
            field,
            q,
            zeta_pow,
            zeta_inv_pow,
            kernel,
        }
    }

    fn run(&self, x: &[u64]) -> Vec<u64> {
        let fp = &self.field;
        let q = self.q;
        let mut out = vec![0; q];
        out[0] = x.iter().fold(0, |acc, &v| fp.add(acc, v));
        let c = match &self.kernel {
            RaderKernel::Schoolbook(b) => {
                let len = q - 1;
                let a: Vec<u64> = self.zeta_pow.iter().map(|&e| x[e]).collect();
                schoolbook_cyclic(fp, &a, b, len)
            }
            RaderKernel::Fft { conv, b, b_spectra } => {
                let n = conv.n;
                let mut a = vec![0u64; n];
                for k in 0..q - 1 {
                    a[k] = x[self.zeta_pow[k]];
                }
                for i in 0..q.saturating_sub(2) {
                    a[n - (q - 2) + i] = x[self.zeta_pow[i + 1]];
                }
                let a_spec = conv.spectra(&a);
                conv.combine(&a_spec, b_spectra)
                    .unwrap_or_else(|| schoolbook_cyclic(fp, &a, b, n))
            }
        };
        for k in 0..q - 1 {
            out[self.zeta_inv_pow[k]] = fp.add(x[0], c[k]);
        }
        out
    }
}

fn schoolbook_cyclic(fp: &PrimeField, a: &[u64], b: &[u64], n: usize) -> Vec<u64> {
    let mut out = vec![0u64; n];
    for (l, &bl) in b.iter().enumerate().take(n) {
        if bl == 0 {
            continue;
        }
        for (i, &ai) in a.iter().enumerate().take(n) {
            let j = (i + l) % n;
            out[j] = fp.add(out[j], fp.mul(ai, bl));
        }
    }
    out
}

/// Exact cyclic convolution of residues via a complex FFT of power-of-two length.
///
/// Residues are split into `limbs` pieces of `width` bits so every output of
/// the float convolution stays below `2^FLOAT_SAFE_BITS`, which keeps the
/// accumulated rounding error well under 1/4.
pub(crate) struct ExactConvolver {
    p: u64,
    n: usize,
    limbs: usize,
    width: u32,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl ExactConvolver {
    pub(crate) fn new(p: u64, n: usize) -> Self {
        assert!(n.is_power_of_two());
        let bits = 64 - (p - 1).max(1).leading_zeros();
        let log_n = n.trailing_zeros();
        let mut limbs = 1usize;
        loop {
            let width = bits.div_ceil(limbs as u32);
            let fan_in = usize::BITS - limbs.leading_zeros();
            if 2 * width + log_n + fan_in <= FLOAT_SAFE_BITS || width == 1 {
                break;
            }
            limbs += 1;
        }
        let width = bits.div_ceil(limbs as u32);
        let mut planner = FftPlanner::new();
        Self {
            p,
            n,
            limbs,
            width,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }
    }

    fn spectra(&self, v: &[u64]) -> Vec<Vec<Complex64>> {
        let mask = (1u64 << self.width) - 1;
        (0..self.limbs)
            .map(|l| {
                let shift = self.width * l as u32;
                let mut buf: Vec<Complex64> = v
                    .iter()
                    .map(|&x| Complex64::new(((x >> shift) & mask) as f64, 0.0))
                    .collect();
                buf.resize(self.n, Complex64::new(0.0, 0.0));
                self.fft.process(&mut buf);
                buf
            })
            .collect()
    }

    /// Pointwise products, inverse transforms and modular recombination.
    /// Returns `None` if any output fails the rounding-distance check.
    fn combine(&self, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Option<Vec<u64>> {
        let p = self.p as u128;
        let mut out = vec![0u128; self.n];
        let scale = 1.0 / self.n as f64;
        for s in 0..(2 * self.limbs - 1) {
            let mut acc = vec![Complex64::new(0.0, 0.0); self.n];
            for i in 0..self.limbs {
                if s < i || s - i >= self.limbs {
                    continue;
                }
                let j = s - i;
                for (z, (x, y)) in acc.iter_mut().zip(a[i].iter().zip(b[j].iter())) {
                    *z += x * y;
                }
            }
            self.ifft.process(&mut acc);
            let factor = pow_mod_u128(2, (self.width as usize * s) as u64, p);
            for (o, z) in out.iter_mut().zip(acc.iter()) {
                let v = z.re * scale;
                let r = v.round();
                if (v - r).abs() >= 0.25 || r < 0.0 {
                    return None;
                }
                *o = (*o + (r as u128 % p) * factor) % p;
            }
        }
        Some(out.into_iter().map(|v| v as u64).collect())
    }

    /// Cyclic convolution of two length-`n` residue sequences.
    pub(crate) fn cyclic(&self, a: &[u64], b: &[u64]) -> Option<Vec<u64>> {
        self.combine(&self.spectra(a), &self.spectra(b))
    }
}

fn pow_mod_u128(mut b: u128, mut e: u64, m: u128) -> u128 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Shared cache of plans keyed by `(p, order)`, built on first use.
pub fn cached_plan(field: PrimeField, order: usize) -> Result<Arc<NttPlan>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<NttPlan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (field.modulus(), order);
    if let Some(plan) = cache.lock().unwrap().get(&key) {
        return Ok(plan.clone());
    }
    let plan = Arc::new(NttPlan::for_order(field, order)?);
    cache.lock().unwrap().insert(key, plan.clone());
    Ok(plan)
}

pub fn ntt(plan: &NttPlan, x: &[u64]) -> Result<Vec<u64>> {
    plan.forward(x)
}

pub fn intt(plan: &NttPlan, x: &[u64]) -> Result<Vec<u64>> {
    plan.inverse(x)
}

/// Direct `O(n^2)` transform with an arbitrary root; the reference implementation.
pub fn naive_transform(field: &PrimeField, beta: u64, x: &[u64]) -> Vec<u64> {
    let n = x.len();
    let mut out = vec![0u64; n];
    let mut wj = 1 % field.modulus();
    for o in out.iter_mut() {
        let mut w = 1 % field.modulus();
        let mut acc = 0;
        for &xi in x {
            acc = field.add(acc, field.mul(w, xi));
            w = field.mul(w, wj);
        }
        *o = acc;
        wj = field.mul(wj, beta);
    }
    out
}

/// Cyclic convolution `out[j] = sum_l a[(j-l) mod n] b[l]`, exact in `F_p`.
///
/// Uses an NTT when `n` divides `p - 1` and an exact float convolution otherwise.
pub fn cyclic_convolve(field: &PrimeField, a: &[u64], b: &[u64], n: usize) -> Result<Vec<u64>> {
    for len in [a.len(), b.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let p = field.modulus();
    if (p - 1) % n as u64 == 0 {
        let plan = cached_plan(*field, n)?;
        let fa = plan.forward(a)?;
        let fb = plan.forward(b)?;
        let prod: Vec<u64> = fa.iter().zip(&fb).map(|(&x, &y)| field.mul(x, y)).collect();
        return plan.inverse(&prod);
    }
    let len = (2 * n - 1).next_power_of_two();
    let conv = ExactConvolver::new(p, len);
    let mut pa = a.to_vec();
    let mut pb = b.to_vec();
    pa.resize(len, 0);
    pb.resize(len, 0);
    let lin = match conv.cyclic(&pa, &pb) {
        Some(v) => v,
        None => schoolbook_cyclic(field, &pa, &pb, len),
    };
    let mut out = vec![0u64; n];
    for (i, v) in lin.into_iter().enumerate() {
        out[i % n] = field.add(out[i % n], v);
    }
    Ok(out)
}

/// Transform of prime length `q = order(beta)` by Rader's reindexing.
pub fn rader_prime_ntt(field: &PrimeField, beta: u64, x: &[u64]) -> Result<Vec<u64>> {
    let q = field.order(beta)?;
    if !is_prime(q) {
        return Err(Error::OrderNotPrime(q));
    }
    let q = q as usize;
    if x.len() != q {
        return Err(Error::LengthMismatch { expected: q, got: x.len() });
    }
    Ok(RaderPlan::new(*field, beta, q).run(x))
}
