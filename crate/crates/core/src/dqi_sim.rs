//! Statevector simulation of the interferometric pipeline on small instances.
//!
//! The error superposition is built directly from its closed form
//! `sum_k w_k / sqrt(C(m,k)) sum_{|y|=k} beta_y |y>`, scattered to the
//! syndromes `B^T y`, and Fourier transformed qudit by qudit. Amplitude arrays
//! over `F_p^n` are row-major: `x` sits at `sum_j x_j p^(n-1-j)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::Serialize;

use crate::analytics::{self, TridiagSpec};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::seed;

pub const EXPECTATION_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-12;

/// Dense state cap in amplitudes.
pub const DEFAULT_AMPLITUDE_BUDGET: u128 = 1 << 24;
/// Cap on the number of enumerated error vectors.
pub const DEFAULT_ERROR_BUDGET: u128 = 10_000_000;

/// Constraints `b_i . x in S_i`, `i = 0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxLinsatInstance {
    field: PrimeField,
    m: usize,
    n: usize,
    rows: Vec<Vec<u64>>,
    sets: Vec<Vec<u64>>,
    vandermonde: bool,
}

impl MaxLinsatInstance {
    pub fn new(field: PrimeField, n: usize, rows: Vec<Vec<u64>>, sets: Vec<Vec<u64>>) -> Result<Self> {
        if rows.len() != sets.len() {
            return Err(Error::InvalidInstance(format!(
                "{} rows but {} sets",
                rows.len(),
                sets.len()
            )));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInstance(format!("every row must have length {n}")));
        }
        let p = field.modulus();
        let rows = rows.into_iter().map(|r| r.into_iter().map(|v| v % p).collect()).collect();
        let mut sets = sets;
        for s in &mut sets {
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) || s.last().is_some_and(|&v| v >= p) {
                return Err(Error::InvalidInstance("sets must hold distinct field elements".into()));
            }
        }
        Ok(Self { field, m: sets.len(), n, rows, sets, vandermonde: false })
    }

    /// Rows known to be `(g^0, g^i, ..., g^((n-1)i))` for a generator `g`,
    /// which fixes the dual distance at `n + 1`.
    pub fn new_vandermonde(field: PrimeField, n: usize, rows: Vec<Vec<u64>>, sets: Vec<Vec<u64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == n && r.first() == Some(&1)));
        let mut inst = Self::new(field, n, rows, sets).expect("well-formed Vandermonde instance");
        inst.vandermonde = true;
        inst
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn sets(&self) -> &[Vec<u64>] {
        &self.sets
    }

    pub fn is_vandermonde(&self) -> bool {
        self.vandermonde
    }

    /// Common set size `r`, if there is one.
    pub fn common_size(&self) -> Option<usize> {
        let r = self.sets.first()?.len();
        self.sets.iter().all(|s| s.len() == r).then_some(r)
    }

    fn balanced_size(&self) -> Result<usize> {
        let p = self.field.modulus();
        let r = self
            .common_size()
            .ok_or_else(|| Error::InvalidInstance("sets differ in size".into()))?;
        if r == 0 || r as u64 >= p {
            return Err(Error::DegenerateSet { r, p });
        }
        Ok(r)
    }

    /// Minimum weight of a nonzero `y` with `B^T y = 0`.
    pub fn dual_distance(&self) -> usize {
        if self.vandermonde {
            self.n + 1
        } else {
            self.dual_distance_by_rank()
        }
    }

    /// Smallest number of linearly dependent rows, by rank tests over all
    /// row subsets of increasing size. `m + 1` when all rows are independent.
    pub fn dual_distance_by_rank(&self) -> usize {
        for w in 1..=self.m.min(self.n + 1) {
            let mut idx: Vec<usize> = (0..w).collect();
            loop {
                if rank(&self.field, idx.iter().map(|&i| self.rows[i].clone()).collect()) < w {
                    return w;
                }
                if !next_combination(&mut idx, self.m) {
                    break;
                }
            }
        }
        self.m + 1
    }

    /// `min(floor(d/2) - 1, floor(m (1 - r/p)))`, clamped at zero.
    pub fn default_ell(&self) -> Result<usize> {
        let r = self.balanced_size()?;
        let p = self.field.modulus() as usize;
        let by_distance = (self.dual_distance() / 2).saturating_sub(1);
        Ok(by_distance.min(self.m * (p - r) / p))
    }

    /// `floor(d/2 - 1)`, the alternative cap; differs from the default only through the
    /// `m (1 - r/p)` term since `floor(d/2 - 1) = floor(d/2) - 1`.
    pub fn distance_ell(&self) -> usize {
        (self.dual_distance() / 2).saturating_sub(1)
    }

    pub fn syndrome(&self, y: &[(usize, u64)]) -> Vec<u64> {
        let f = self.field;
        let mut s = vec![0u64; self.n];
        for &(i, v) in y {
            for (acc, &b) in s.iter_mut().zip(&self.rows[i]) {
                *acc = f.add(*acc, f.mul(v, b));
            }
        }
        s
    }
}

fn rank(f: &PrimeField, mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, piv);
        let inv = f.inv(rows[r][c]).expect("nonzero pivot");
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let factor = f.mul(rows[i][c], inv);
                for j in c..cols {
                    let t = f.mul(factor, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], t);
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Advances `idx` to the next `k`-subset of `0..m` in lexicographic order.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Truncated binomial weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSpec {
    pub m: usize,
    pub ell: usize,
    pub c: f64,
    pub q: f64,
    /// `sqrt` of the `B(m, q)` probabilities, `k = 0..=m`.
    pub w_prime: Vec<f64>,
    /// Mass dropped by truncation to `k <= ell`.
    pub epsilon: f64,
    pub w: Vec<f64>,
    /// Set when `ell` lies outside `4 m^(1/2+c) <= ell <= m/2`.
    pub regime_warning: Option<String>,
}

pub fn make_weights(m: usize, ell: usize, c: f64) -> Result<WeightSpec> {
    if ell > m {
        return Err(Error::DomainError(format!("ell = {ell} exceeds m = {m}")));
    }
    let q = analytics::weight_mean(m, ell, c);
    let pmf = analytics::binomial_pmf(m, q)?;
    let epsilon = analytics::compensated_sum(pmf[ell + 1..].iter().copied());
    let kept = analytics::compensated_sum(pmf[..=ell].iter().copied());
    Ok(WeightSpec {
        m,
        ell,
        c,
        q,
        w_prime: pmf.iter().map(|v| v.sqrt()).collect(),
        epsilon,
        w: pmf[..=ell].iter().map(|v| (v / kept).sqrt()).collect(),
        regime_warning: analytics::regime_violation(m, ell, c),
    })
}

/// Weights maximizing the closed-form expectation: the top eigenvector of
/// the tridiagonal operator at `rho = r/p`.
pub fn optimal_weights(m: usize, ell: usize, r: usize, p: u64) -> Vec<f64> {
    let spec = TridiagSpec::from_rho(m, ell, r as f64 / p as f64);
    analytics::tridiag_extremal(&spec).vector
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::DomainError("empty weight vector".into()));
    }
    let n2: f64 = w.iter().map(|x| x * x).sum();
    if (n2 - 1.0).abs() > UNITARY_TOL {
        return Err(Error::NormViolation(n2));
    }
    Ok(())
}

/// `ghat_i(z)` for every constraint, stored as an `m x p` table.
#[derive(Clone, Debug)]
pub struct FourierTables {
    p: usize,
    table: Vec<Complex64>,
}

impl FourierTables {
    pub fn new(inst: &MaxLinsatInstance) -> Result<Self> {
        let p = inst.field.modulus() as usize;
        let roots = root_table(p);
        let mut table = Vec::with_capacity(inst.m * p);
        for s in &inst.sets {
            let r = s.len();
            if r == 0 || r >= p {
                return Err(Error::DegenerateSet { r, p: p as u64 });
            }
            let scale = 1.0 / ((r * (p - r)) as f64 / p as f64).sqrt();
            let off = -(r as f64) / p as f64 * scale;
            let mut g = vec![off; p];
            for &v in s {
                g[v as usize] += scale;
            }
            let norm = 1.0 / (p as f64).sqrt();
            for z in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for (zp, &gv) in g.iter().enumerate() {
                    acc += roots[z * zp % p] * gv;
                }
                table.push(acc * norm);
            }
        }
        Ok(Self { p, table })
    }

    pub fn get(&self, i: usize, z: u64) -> Complex64 {
        self.table[i * self.p + z as usize]
    }

    /// `ghat_i` as a length-`p` slice.
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.table[i * self.p..(i + 1) * self.p]
    }
}

fn root_table(p: usize) -> Vec<Complex64> {
    (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect()
}

/// Product of `ghat_i(y_i)` over the support of `y`.
pub fn beta_coefficient(tables: &FourierTables, y: &[(usize, u64)]) -> Complex64 {
    y.iter().fold(Complex64::new(1.0, 0.0), |acc, &(i, v)| acc * tables.get(i, v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTerm {
    /// Nonzero coordinates `(i, y_i)`, `i` ascending.
    pub support: Vec<(usize, u64)>,
    pub amplitude: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseErrorState {
    pub m: usize,
    pub ell: usize,
    pub terms: Vec<ErrorTerm>,
}

impl SparseErrorState {
    pub fn norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    /// Squared norm carried by each Hamming weight.
    pub fn weight_masses(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ell + 1];
        for t in &self.terms {
            out[t.support.len()] += t.amplitude.norm_sqr();
        }
        out
    }
}

/// `sum_{k <= ell} C(m,k) (p-1)^k`, saturating.
pub fn error_count(m: usize, ell: usize, p: u64) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut pow: u128 = 1;
    for k in 0..=ell.min(m) {
        if k > 0 {
            binom = binom.saturating_mul((m - k + 1) as u128) / k as u128;
            pow = pow.saturating_mul(p as u128 - 1);
        }
        total = total.saturating_add(binom.saturating_mul(pow));
    }
    total
}

fn binomial_f64(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// All `y` of weight at most `w.len() - 1` with amplitude `w_k / sqrt(C(m,k)) beta_y`.
pub fn build_phi3(inst: &MaxLinsatInstance, w: &[f64], budget: u128) -> Result<SparseErrorState> {
    check_weights(w)?;
    let ell = w.len() - 1;
    if ell > inst.m {
        return Err(Error::DomainError(format!("ell = {ell} exceeds m = {}", inst.m)));
    }
    let p = inst.field.modulus();
    let count = error_count(inst.m, ell, p);
    if count > budget {
        return Err(Error::BudgetExceeded { what: "error vectors".into(), requested: count, limit: budget });
    }
    let tables = FourierTables::new(inst)?;
    let mut terms = Vec::with_capacity(count as usize);
    for (k, &wk) in w.iter().enumerate() {
        let coeff = wk / binomial_f64(inst.m, k).sqrt();
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut vals = vec![1u64; k];
            loop {
                let support: Vec<(usize, u64)> = idx.iter().copied().zip(vals.iter().copied()).collect();
                let amplitude = beta_coefficient(&tables, &support) * coeff;
                terms.push(ErrorTerm { support, amplitude });
                // odometer over (F_p^*)^k
                let mut j = k;
                let mut carried = true;
                while j > 0 {
                    j -= 1;
                    if vals[j] + 1 < p {
                        vals[j] += 1;
                        carried = false;
                        break;
                    }
                    vals[j] = 1;
                }
                if carried {
                    break;
                }
            }
            if k == 0 || !next_combination(&mut idx, inst.m) {
                break;
            }
        }
    }
    Ok(SparseErrorState { m: inst.m, ell, terms })
}

/// Complex amplitudes over `F_p^n`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseQuditState {
    p: u64,
    n: usize,
    amps: Vec<Complex64>,
}

fn dense_len(p: u64, n: usize, budget: u128) -> Result<usize> {
    let mut len: u128 = 1;
    for _ in 0..n {
        len = len.saturating_mul(p as u128);
    }
    if len > budget {
        return Err(Error::BudgetExceeded { what: "dense amplitudes".into(), requested: len, limit: budget });
    }
    Ok(len as usize)
}

impl DenseQuditState {
    pub fn zeros(p: u64, n: usize, budget: u128) -> Result<Self> {
        let len = dense_len(p, n, budget)?;
        Ok(Self { p, n, amps: vec![Complex64::new(0.0, 0.0); len] })
    }

    pub fn from_amplitudes(p: u64, n: usize, amps: Vec<Complex64>) -> Result<Self> {
        let len = (p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if amps.len() as u128 != len {
            return Err(Error::ShapeMismatch(format!("{} amplitudes for p^n = {len}", amps.len())));
        }
        Ok(Self { p, n, amps })
    }

    pub fn basis(p: u64, x: &[u64], budget: u128) -> Result<Self> {
        let mut s = Self::zeros(p, x.len(), budget)?;
        let i = s.index(x);
        s.amps[i] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn index(&self, x: &[u64]) -> usize {
        x.iter().fold(0usize, |acc, &v| acc * self.p as usize + v as usize)
    }

    pub fn point(&self, mut index: usize) -> Vec<u64> {
        let mut x = vec![0u64; self.n];
        for j in (0..self.n).rev() {
            x[j] = (index % self.p as usize) as u64;
            index /= self.p as usize;
        }
        x
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let n2 = self.norm_sq();
        if (n2 - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NormViolation(n2));
        }
        Ok(())
    }
}

/// Places each `y` at index `B^T y`; distinct `y` must land on distinct cells.
pub fn syndrome_map(inst: &MaxLinsatInstance, state: &SparseErrorState, budget: u128) -> Result<DenseQuditState> {
    let mut out = DenseQuditState::zeros(inst.field.modulus(), inst.n, budget)?;
    let mut seen = vec![false; out.amps.len()];
    for t in &state.terms {
        let idx = out.index(&inst.syndrome(&t.support));
        if seen[idx] {
            return Err(Error::SyndromeCollision);
        }
        seen[idx] = true;
        out.amps[idx] = t.amplitude;
    }
    Ok(out)
}

fn transform_axes(state: &DenseQuditState, direction: FftDirection) -> DenseQuditState {
    let p = state.p as usize;
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft(p, direction);
    let scale = 1.0 / (p as f64).sqrt();
    let mut amps = state.amps.clone();
    let mut line = vec![Complex64::new(0.0, 0.0); p];
    let mut stride = 1;
    for _ in 0..state.n {
        let block = stride * p;
        for base in (0..amps.len()).step_by(block) {
            for off in 0..stride {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = amps[base + off + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    amps[base + off + k * stride] = v * scale;
                }
            }
        }
        stride = block;
    }
    DenseQuditState { p: state.p, n: state.n, amps }
}

/// `(F^-1 v)[k] = p^(-1/2) sum_j exp(-2 pi i jk/p) v[j]` along every axis.
pub fn inverse_qft_per_qudit(state: &DenseQuditState) -> Result<DenseQuditState> {
    DenseQuditState::from_amplitudes(state.p, state.n, state.amps.clone())?;
    Ok(transform_axes(state, FftDirection::Forward))
}

/// `(F v)[k] = p^(-1/2) sum_j exp(2 pi i jk/p) v[j]` along every axis.
pub fn qft_per_qudit(state: &DenseQuditState) -> Result<DenseQuditState> {
    DenseQuditState::from_amplitudes(state.p, state.n, state.amps.clone())?;
    Ok(transform_axes(state, FftDirection::Inverse))
}

/// Number of `i` with `b_i . x in S_i`.
pub fn objective(inst: &MaxLinsatInstance, x: &[u64]) -> Result<usize> {
    if x.len() != inst.n {
        return Err(Error::LengthMismatch { expected: inst.n, got: x.len() });
    }
    let f = inst.field;
    Ok(inst
        .rows
        .iter()
        .zip(&inst.sets)
        .filter(|(row, set)| {
            let v = row.iter().zip(x).fold(0, |acc, (&b, &xj)| f.add(acc, f.mul(b, xj % f.modulus())));
            set.binary_search(&v).is_ok()
        })
        .count())
}

/// `sum_x |amp(x)|^2 f(x)` over all of `F_p^n`.
pub fn expected_objective_statevector(inst: &MaxLinsatInstance, state: &DenseQuditState) -> Result<f64> {
    if state.p != inst.field.modulus() || state.n != inst.n {
        return Err(Error::ShapeMismatch("state does not match the instance".into()));
    }
    state.check_normalized()?;
    let mut total = 0.0;
    for (i, a) in state.amps.iter().enumerate() {
        let w = a.norm_sqr();
        if w != 0.0 {
            total += w * objective(inst, &state.point(i))? as f64;
        }
    }
    Ok(total)
}

/// Closed form `mr/p + (p-2r)/p sum k w_k^2 + 2 sqrt(r(p-r))/p sum w_k w_{k+1} sqrt((k+1)(m-k))`.
pub fn expected_objective_formula(inst: &MaxLinsatInstance, w: &[f64]) -> Result<f64> {
    check_weights(w)?;
    let r = inst.balanced_size()? as f64;
    let p = inst.field.modulus() as f64;
    let m = inst.m as f64;
    let diag: f64 = w.iter().enumerate().map(|(k, x)| k as f64 * x * x).sum();
    let off: f64 = w
        .windows(2)
        .enumerate()
        .map(|(k, pair)| pair[0] * pair[1] * ((k as f64 + 1.0) * (m - k as f64)).sqrt())
        .sum();
    Ok(m * r / p + (p - 2.0 * r) / p * diag + 2.0 * (r * (p - r)).sqrt() / p * off)
}

/// I.i.d. measurements of `state` in the computational basis.
pub fn sample_solutions(
    inst: &MaxLinsatInstance,
    state: &DenseQuditState,
    shots: usize,
    seed: u64,
) -> Result<Vec<(Vec<u64>, usize)>> {
    if shots == 0 {
        return Err(Error::DomainError("shots must be positive".into()));
    }
    state.check_normalized()?;
    let probs: Vec<f64> = state.amps.iter().map(|a| a.norm_sqr()).collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::DomainError(e.to_string()))?;
    let mut rng = seed::stream(seed, "dqi-sample");
    (0..shots)
        .map(|_| {
            let x = state.point(dist.sample(&mut rng));
            let v = objective(inst, &x)?;
            Ok((x, v))
        })
        .collect()
}

/// Budgets for [`run_pipeline`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budgets {
    pub amplitudes: u128,
    pub errors: u128,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { amplitudes: DEFAULT_AMPLITUDE_BUDGET, errors: DEFAULT_ERROR_BUDGET }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub error_terms: usize,
    pub final_state: DenseQuditState,
    pub formula: f64,
    pub statevector: f64,
}

/// Error superposition, syndrome scatter and inverse transform, with both expectations.
pub fn run_pipeline(inst: &MaxLinsatInstance, w: &[f64], budgets: Budgets) -> Result<PipelineRun> {
    dense_len(inst.field.modulus(), inst.n, budgets.amplitudes)?;
    let phi3 = build_phi3(inst, w, budgets.errors)?;
    let phi4p = syndrome_map(inst, &phi3, budgets.amplitudes)?;
    let final_state = inverse_qft_per_qudit(&phi4p)?;
    let statevector = expected_objective_statevector(inst, &final_state)?;
    let formula = expected_objective_formula(inst, w)?;
    Ok(PipelineRun { error_terms: phi3.terms.len(), final_state, formula, statevector })
}
