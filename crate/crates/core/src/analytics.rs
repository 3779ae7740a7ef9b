//! Closed-form performance analysis.
//!
//! The expected number of satisfied constraints for unit weights `w` is the
//! quadratic form `rho m + sqrt(rho(1-rho)) w^T A w`, where `A` is the
//! `(ell+1) x (ell+1)` symmetric tridiagonal matrix with diagonal `k d`,
//! `d = (1-2rho)/sqrt(rho(1-rho))`, and off-diagonal `a_k = sqrt(k(m-k+1))`
//! between rows `k-1` and `k`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Limit of `<f>/m` for `ell = lambda m`, `m -> infinity`.
pub fn asymptotic_ratio(lambda: f64, rho: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 0.5) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::DomainError(format!(
            "need 0 < lambda <= 1/2 and 0 < rho < 1, got ({lambda}, {rho})"
        )));
    }
    if rho >= 1.0 - lambda {
        return Ok(1.0);
    }
    let s = (lambda * (1.0 - rho)).sqrt() + (rho * (1.0 - lambda)).sqrt();
    Ok(s * s)
}

/// Parameters of the tridiagonal operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TridiagSpec {
    pub m: usize,
    pub ell: usize,
    pub d: f64,
}

impl TridiagSpec {
    pub fn from_rho(m: usize, ell: usize, rho: f64) -> Self {
        Self { m, ell, d: (1.0 - 2.0 * rho) / (rho * (1.0 - rho)).sqrt() }
    }

    pub fn dim(&self) -> usize {
        self.ell + 1
    }

    pub fn diag(&self, k: usize) -> f64 {
        k as f64 * self.d
    }

    /// Coupling between indices `k-1` and `k`, for `1 <= k <= ell`.
    pub fn off(&self, k: usize) -> f64 {
        ((k * (self.m + 1 - k)) as f64).sqrt()
    }

    /// `w^T A w`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..w.len() {
            s += self.diag(k) * w[k] * w[k];
            if k > 0 {
                s += 2.0 * self.off(k) * w[k - 1] * w[k];
            }
        }
        s
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let n = w.len();
        (0..n)
            .map(|k| {
                let mut v = self.diag(k) * w[k];
                if k > 0 {
                    v += self.off(k) * w[k - 1];
                }
                if k + 1 < n {
                    v += self.off(k + 1) * w[k + 1];
                }
                v
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via LDL^T pivots).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag(0) - x;
        for k in 0..self.dim() {
            if k > 0 {
                let b = self.off(k);
                let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
                q = self.diag(k) - x - b * b / prev;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Largest eigenpair of the tridiagonal operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extremal {
    pub eigenvalue: f64,
    /// Unit norm, entrywise nonnegative.
    pub vector: Vec<f64>,
    pub residual: f64,
    /// The largest eigenvalue is also the operator norm only when `d >= 0`.
    pub equals_operator_norm: bool,
}

/// Sturm bisection for the top eigenvalue, then inverse iteration with a
/// shift just above it (where `sigma I - A` is positive definite).
pub fn tridiag_extremal(spec: &TridiagSpec) -> Extremal {
    let n = spec.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let mut r = 0.0;
        if k > 0 {
            r += spec.off(k);
        }
        if k + 1 < n {
            r += spec.off(k + 1);
        }
        lo = lo.min(spec.diag(k) - r);
        hi = hi.max(spec.diag(k) + r);
    }
    lo -= 1.0;
    hi += 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spec.count_below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let sigma = hi + f64::EPSILON * hi.abs().max(1.0);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        v = solve_shifted(spec, sigma, &v);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
    }
    let av = spec.apply(&v);
    let eigenvalue = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>();
    let residual = av
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - eigenvalue * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Extremal { eigenvalue, vector: v, residual, equals_operator_norm: spec.d >= 0.0 }
}

/// Solves `(sigma I - A) x = b` by LDL^T; the matrix is positive definite for
/// `sigma` above the spectrum.
fn solve_shifted(spec: &TridiagSpec, sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut diag = vec![0.0; n];
    let mut y = vec![0.0; n];
    for k in 0..n {
        let dk = sigma - spec.diag(k);
        if k == 0 {
            diag[0] = dk;
            y[0] = b[0];
        } else {
            let e = -spec.off(k);
            let l = e / diag[k - 1];
            diag[k] = dk - l * e;
            y[k] = b[k] - l * y[k - 1];
        }
        if diag[k] <= 0.0 {
            diag[k] = f64::MIN_POSITIVE;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut v = y[k];
        if k + 1 < n {
            v -= -spec.off(k + 1) * x[k + 1];
        }
        x[k] = v / diag[k];
    }
    x
}

/// `rho m + sqrt(rho(1-rho)) w^T A w`.
pub fn expectation_from_weights(m: usize, ell: usize, rho: f64, w: &[f64]) -> Result<f64> {
    if w.len() != ell + 1 {
        return Err(Error::LengthMismatch { expected: ell + 1, got: w.len() });
    }
    let n2: f64 = w.iter().map(|x| x * x).sum();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(Error::NormViolation(n2));
    }
    let spec = TridiagSpec::from_rho(m, ell, rho);
    Ok(rho * m as f64 + (rho * (1.0 - rho)).sqrt() * spec.quadratic_form(w))
}

/// `2 sqrt(m) + ell d + 2 sqrt(ell(m - ell))`, valid when `lambda + rho <= 1`.
pub fn eigenvalue_upper_bound(m: usize, ell: usize, d: f64) -> f64 {
    2.0 * (m as f64).sqrt() + ell as f64 * d + 2.0 * ((ell * (m - ell)) as f64).sqrt()
}

/// Binomial probabilities `C(m,k) q^k (1-q)^(m-k)`, computed in log space and
/// normalized with a compensated sum.
pub fn binomial_pmf(m: usize, q: f64) -> Result<Vec<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(format!("binomial parameter {q} outside (0, 1)")));
    }
    let lq = q.ln();
    let l1q = (-q).ln_1p();
    let mut log_binom = KahanSum::default();
    let mut logs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        if k > 0 {
            log_binom.add(((m - k + 1) as f64 / k as f64).ln());
        }
        logs.push(log_binom.value() + k as f64 * lq + (m - k) as f64 * l1q);
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total = compensated_sum(raw.iter().copied());
    Ok(raw.into_iter().map(|v| v / total).collect())
}

/// Neumaier summation.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut k = KahanSum::default();
    xs.into_iter().for_each(|x| k.add(x));
    k.value()
}

/// Mean parameter `q = ell/m - m^(-1/2 + c)` of the weight distribution.
pub fn weight_mean(m: usize, ell: usize, c: f64) -> f64 {
    ell as f64 / m as f64 - (m as f64).powf(c - 0.5)
}

/// `4 m^(1/2+c) <= ell <= m/2`; `None` when satisfied.
pub fn regime_violation(m: usize, ell: usize, c: f64) -> Option<String> {
    let lo = 4.0 * (m as f64).powf(0.5 + c);
    if (ell as f64) < lo || 2 * ell > m {
        Some(format!("need 4 m^(1/2+c) = {lo:.3} <= ell = {ell} <= m/2 = {}", m as f64 / 2.0))
    } else {
        None
    }
}

/// Sandwich for the expectation under binomial weights, in units of satisfied constraints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub m: usize,
    pub ell: usize,
    pub rho: f64,
    pub c: f64,
    pub lambda_star: f64,
    /// `m` times the asymptotic ratio at `lambda = ell/m`.
    pub asymptotic: f64,
    /// `m (ratio - (6 + 2/sqrt(lambda_star)) / m^(1/2-c) - 4 eps')`.
    pub lower: f64,
    /// `rho m + sqrt(rho(1-rho))` times the eigenvalue bound.
    pub upper: f64,
    /// Expectation with the truncated binomial weights.
    pub actual: f64,
    pub epsilon: f64,
    pub epsilon_prime: f64,
}

pub fn binomial_lower_bound(m: usize, ell: usize, rho: f64, c: f64, lambda_star: f64) -> Result<BoundReport> {
    if let Some(msg) = regime_violation(m, ell, c) {
        return Err(Error::RegimeViolation(msg));
    }
    if (ell as f64) < lambda_star * m as f64 || lambda_star <= 0.0 {
        return Err(Error::RegimeViolation(format!("ell = {ell} below lambda_star m")));
    }
    let lambda = ell as f64 / m as f64;
    if lambda + rho > 1.0 {
        return Err(Error::RegimeViolation(format!("lambda + rho = {} exceeds 1", lambda + rho)));
    }
    let mf = m as f64;
    let ratio = asymptotic_ratio(lambda, rho)?;
    let eps_prime = (-mf.powf(2.0 * c) / 2.0).exp();
    let lower = mf * (ratio - (6.0 + 2.0 / lambda_star.sqrt()) / mf.powf(0.5 - c) - 4.0 * eps_prime);
    let d = (1.0 - 2.0 * rho) / (rho * (1.0 - rho)).sqrt();
    let upper = rho * mf + (rho * (1.0 - rho)).sqrt() * eigenvalue_upper_bound(m, ell, d);
    let weights = truncated_binomial_weights(m, ell, c)?;
    let actual = expectation_from_weights(m, ell, rho, &weights.1)?;
    Ok(BoundReport {
        m,
        ell,
        rho,
        c,
        lambda_star,
        asymptotic: mf * ratio,
        lower,
        upper,
        actual,
        epsilon: weights.0,
        epsilon_prime: eps_prime,
    })
}

/// `(epsilon, w)` with `w_k = sqrt(pmf_k / (1 - epsilon))` for `k <= ell`.
pub fn truncated_binomial_weights(m: usize, ell: usize, c: f64) -> Result<(f64, Vec<f64>)> {
    let pmf = binomial_pmf(m, weight_mean(m, ell, c))?;
    let kept = compensated_sum(pmf[..=ell].iter().copied());
    let eps = compensated_sum(pmf[ell + 1..].iter().copied());
    Ok((eps, pmf[..=ell].iter().map(|&v| (v / kept).sqrt()).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub q: f64,
    /// `Pr(K > ell)` summed directly.
    pub upper_tail: f64,
    /// `1 - Pr(K <= ell)`.
    pub upper_tail_complement: f64,
    /// `Pr(K < ell - 2 m^(1/2+c))` summed directly.
    pub lower_tail: f64,
    /// `1 - Pr(K >= ell - 2 m^(1/2+c))`.
    pub lower_tail_complement: f64,
    /// `exp(-m^(2c)/2)`.
    pub bound: f64,
}

/// Exact binomial tails around `ell` against the Chernoff bound.
pub fn binomial_tail_check(m: usize, ell: usize, c: f64) -> Result<TailReport> {
    let mf = m as f64;
    if (ell as f64) < 4.0 * mf.powf(0.5 + c) {
        return Err(Error::RegimeViolation(format!("ell = {ell} below 4 m^(1/2+c)")));
    }
    let q = weight_mean(m, ell, c);
    let pmf = binomial_pmf(m, q)?;
    let cut = ell as f64 - 2.0 * mf.powf(0.5 + c);
    let below: Vec<usize> = (0..=m).filter(|&k| (k as f64) < cut).collect();
    let n_below = below.len();
    Ok(TailReport {
        q,
        upper_tail: compensated_sum(pmf[ell.min(m) + 1..].iter().copied()),
        upper_tail_complement: 1.0 - compensated_sum(pmf[..=ell.min(m)].iter().copied()),
        lower_tail: compensated_sum(pmf[..n_below].iter().copied()),
        lower_tail_complement: 1.0 - compensated_sum(pmf[n_below..].iter().copied()),
        bound: (-mf.powf(2.0 * c) / 2.0).exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeReport {
    /// `ceil(q(m+1)) - 1`.
    pub kappa: usize,
    pub unimodal: bool,
    pub max_mass: f64,
    /// `3 / sqrt(m q (1-q))`.
    pub bound: f64,
}

/// Mode location and unimodality of `B(m, q)`; always computed.
pub fn binomial_unimodality(m: usize, q: f64) -> Result<(usize, bool)> {
    let pmf = binomial_pmf(m, q)?;
    let kappa = ((q * (m + 1) as f64).ceil() as usize).saturating_sub(1).min(m);
    let tol = 1e-12;
    let rising = (0..kappa).all(|k| pmf[k] <= pmf[k + 1] * (1.0 + tol));
    let falling = (kappa..m).all(|k| pmf[k] * (1.0 + tol) >= pmf[k + 1]);
    Ok((kappa, rising && falling))
}

/// Mode mass bound; requires `7 <= q(m+7) <= m`.
pub fn binomial_mode_check(m: usize, q: f64) -> Result<ModeReport> {
    let (kappa, unimodal) = binomial_unimodality(m, q)?;
    let s = q * (m + 7) as f64;
    if !(7.0..=m as f64).contains(&s) {
        return Err(Error::RegimeViolation(format!("q(m+7) = {s} outside [7, m]")));
    }
    let pmf = binomial_pmf(m, q)?;
    Ok(ModeReport {
        kappa,
        unimodal,
        max_mass: pmf[kappa],
        bound: 3.0 / (m as f64 * q * (1.0 - q)).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub fredkin: usize,
    pub toffoli: usize,
    pub cnot: usize,
    pub ancillas: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QramCounts {
    /// `3M - 2` Fredkin gates with `M` ancillas.
    pub linear: GateCounts,
    /// `M` Fredkin, `4M - 8` Toffoli, 4 CNOT with `ceil(log2 M)` ancillas;
    /// only for `M` a power of two, at least 4.
    pub logarithmic: Option<GateCounts>,
}

/// Gate counts of the two memory-access circuits over `M` cells.
pub fn qram_gate_counts(mm: usize) -> Result<QramCounts> {
    if mm < 2 {
        return Err(Error::DomainError(format!("M = {mm} must be at least 2")));
    }
    let linear = GateCounts { fredkin: 3 * mm - 2, toffoli: 0, cnot: 0, ancillas: mm };
    let logarithmic = (mm >= 4 && mm.is_power_of_two()).then(|| GateCounts {
        fredkin: mm,
        toffoli: 4 * mm - 8,
        cnot: 4,
        ancillas: mm.trailing_zeros() as usize,
    });
    Ok(QramCounts { linear, logarithmic })
}

/// One row of the weight-distribution comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightRow {
    pub k: usize,
    /// `(w'_k)^2` for the binomial choice.
    pub binomial: f64,
    /// `w_k^2` after truncation to `k <= ell`.
    pub truncated: f64,
    /// `1/ceil(sqrt(ell))` on `ell - ceil(sqrt(ell)) < k <= ell`.
    pub uniform: f64,
}

pub fn weight_distribution(m: usize, ell: usize, c: f64) -> Result<Vec<WeightRow>> {
    let pmf = binomial_pmf(m, weight_mean(m, ell, c))?;
    let (_, w) = truncated_binomial_weights(m, ell, c)?;
    let width = (ell as f64).sqrt().ceil() as usize;
    Ok((0..=m)
        .map(|k| WeightRow {
            k,
            binomial: pmf[k],
            truncated: if k <= ell { w[k] * w[k] } else { 0.0 },
            uniform: if k <= ell && k + width > ell { 1.0 / width as f64 } else { 0.0 },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_ratio() {
        let v = asymptotic_ratio(0.05, 0.5).unwrap();
        assert!((v - (0.5 + 19f64.sqrt() / 20.0)).abs() < 1e-15);
        assert_eq!(asymptotic_ratio(0.3, 0.7).unwrap(), 1.0);
        assert!(asymptotic_ratio(0.6, 0.5).is_err());
        let a = asymptotic_ratio(0.2, 0.3).unwrap();
        let b = asymptotic_ratio(0.3, 0.2).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn small_eigenproblems() {
        let e = tridiag_extremal(&TridiagSpec { m: 10, ell: 0, d: 0.3 });
        assert_eq!(e.eigenvalue, 0.0);
        assert_eq!(e.vector, vec![1.0]);
        let s = TridiagSpec { m: 10, ell: 1, d: 0.7 };
        let a1 = s.off(1);
        let expect = (s.d + (s.d * s.d + 4.0 * a1 * a1).sqrt()) / 2.0;
        let e = tridiag_extremal(&s);
        assert!((e.eigenvalue - expect).abs() < 1e-12);
        assert!(e.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn eigenvalue_bound_example() {
        let s = TridiagSpec::from_rho(100, 20, 0.5);
        let e = tridiag_extremal(&s);
        assert!(e.residual <= 1e-10);
        assert!(e.eigenvalue <= eigenvalue_upper_bound(100, 20, s.d));
    }

    #[test]
    fn pmf_small() {
        let pmf = binomial_pmf(4, 0.5).unwrap();
        let expect = [1.0, 4.0, 6.0, 4.0, 1.0].map(|x| x / 16.0);
        for (a, b) in pmf.iter().zip(expect) {
            assert!((a - b).abs() < 1e-16);
        }
        assert!(binomial_pmf(4, 0.0).is_err());
    }

    #[test]
    fn mode_of_symmetric_binomial() {
        assert_eq!(binomial_unimodality(10, 0.5).unwrap(), (5, true));
    }

    #[test]
    fn gate_counts() {
        let c = qram_gate_counts(8).unwrap();
        assert_eq!(c.linear.fredkin, 22);
        let l = c.logarithmic.unwrap();
        assert_eq!((l.fredkin, l.toffoli, l.cnot, l.ancillas), (8, 24, 4, 3));
        let c = qram_gate_counts(2).unwrap();
        assert_eq!(c.linear.fredkin, 4);
        assert!(c.logarithmic.is_none());
        assert!(qram_gate_counts(1).is_err());
    }

    #[test]
    fn weight_dump_normalized() {
        let rows = weight_distribution(500, 200, 0.01).unwrap();
        let total: f64 = rows.iter().map(|r| r.binomial).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let trunc: f64 = rows.iter().map(|r| r.truncated).sum();
        assert!((trunc - 1.0).abs() < 1e-12);
        let unif: f64 = rows.iter().map(|r| r.uniform).sum();
        assert!((unif - 1.0).abs() < 1e-12);
    }
}
