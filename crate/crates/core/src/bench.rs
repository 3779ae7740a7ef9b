//! Decoder timing harness.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::field::PrimeField;
use crate::rsdecode::{self, RsCode};
use crate::seed;

/// Primes whose `p - 1` has only the factors 2 and 3.
pub const SMOOTH_PRIMES: &[u64] = &[193, 769, 3457, 12289, 65537, 786433];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub p: u64,
    pub n: usize,
    pub t: usize,
    pub trials: usize,
    pub failures: usize,
    pub fast_median_s: f64,
    pub naive_median_s: Option<f64>,
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Decodes `trials` random errors of weight `t` with `n = floor(p/10) + 1`,
/// `t = floor(n/2)`. The naive decoder also runs when `with_naive` is set.
/// A failure is any decode that does not return the planted error.
pub fn bench_prime(p: u64, trials: usize, seed: u64, with_naive: bool) -> Result<BenchRow> {
    let f = PrimeField::new(p)?;
    let n = (p / 10 + 1) as usize;
    let code = RsCode::with_default_radius(f, n)?;
    let mut rng = seed::stream(seed, &format!("decode-bench-{p}"));
    let mut fast = Vec::with_capacity(trials);
    let mut naive = Vec::new();
    let mut failures = 0;
    for _ in 0..trials {
        let w = if rng.gen_bool(0.5) { code.t() } else { rng.gen_range(0..=code.t()) };
        let y = rsdecode::random_error(&code, w, &mut rng);
        let s = rsdecode::syndrome_from_error(&code, &y)?;
        let start = Instant::now();
        let got = rsdecode::decode_fast(&code, &s);
        fast.push(start.elapsed().as_secs_f64());
        if got.as_ref() != Ok(&y) {
            failures += 1;
        }
        if with_naive {
            let start = Instant::now();
            let got = rsdecode::decode_naive(&code, &s);
            naive.push(start.elapsed().as_secs_f64());
            if got.as_ref() != Ok(&y) {
                failures += 1;
            }
        }
    }
    Ok(BenchRow {
        p,
        n,
        t: code.t(),
        trials,
        failures,
        fast_median_s: median(&mut fast),
        naive_median_s: with_naive.then(|| median(&mut naive)),
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
