//! Self-check batteries run by the `verify` command.
//!
//! Each check compares a fast routine against an independent slow one or a
//! closed form. `Fault::Decoder` corrupts the fast decoder's output so the
//! battery can be shown to notice.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::analytics;
use crate::dqi_sim::{self, Budgets};
use crate::field::PrimeField;
use crate::grover;
use crate::ntt::{cached_plan, naive_transform};
use crate::opi::{self, Profile};
use crate::polyseries::{eea_fast, eea_slow, FpPoly};
use crate::rsdecode::{self, ErrorVector, RsCode};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    Decoder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub fault: Option<Fault>,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

type Outcome = std::result::Result<String, String>;

struct Ctx {
    level: Level,
    fault: Option<Fault>,
    seed: u64,
}

impl Ctx {
    fn scale(&self, fast: usize, full: usize) -> usize {
        match self.level {
            Level::Fast => fast,
            Level::Full => full,
        }
    }

    fn decode(&self, code: &RsCode, s: &[u64]) -> crate::Result<ErrorVector> {
        let y = rsdecode::decode_fast(code, s)?;
        Ok(match self.fault {
            Some(Fault::Decoder) => {
                let mut e = y.entries().to_vec();
                e[0] = code.field().add(e[0], 1);
                ErrorVector::new(e)
            }
            None => y,
        })
    }
}

const CHECKS: &[(&str, &str, fn(&Ctx) -> Outcome)] = &[
    ("ntt-vs-direct", "fast transforms equal the quadratic transform", ntt_vs_direct),
    ("eea-fast-vs-slow", "half-GCD EEA equals the plain EEA", eea_fast_vs_slow),
    ("rs-roundtrip", "fast decoder recovers random errors of weight at most t", rs_roundtrip),
    ("rs-fast-vs-naive", "fast and quadratic decoders agree", rs_fast_vs_naive),
    ("grover-exact", "rotation sequence reproduces the single-constraint state", grover_exact),
    ("balanced-overlap", "one-oracle approximation overlap and distance bound", balanced_overlap),
    ("expectation-identity", "closed-form expectation equals the statevector expectation", expectation_identity),
    ("opi-reduction", "reduction to max-LINSAT preserves the objective", opi_reduction),
    ("asymptotic-ratio", "asymptotic ratio at lambda = 1/20, rho = 1/2", asymptotic_ratio),
    ("binomial-sandwich", "binomial-weight expectation lies between the bounds", binomial_sandwich),
    ("binomial-tails", "binomial tails below the Chernoff bound", binomial_tails),
    ("gate-counts", "memory-access circuit gate counts at M = 8", gate_counts),
    ("truncation-heuristic", "heuristic mean near n + (m - n) r / p", truncation_heuristic),
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

pub fn run(level: Level, fault: Option<Fault>, seed: u64) -> VerifyReport {
    let ctx = Ctx { level, fault, seed };
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|&(id, description, f)| {
            let start = Instant::now();
            let outcome = f(&ctx);
            let seconds = start.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { id, description, passed, detail, seconds }
        })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { level, fault, seed, passed, checks }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ntt_vs_direct(ctx: &Ctx) -> Outcome {
    let mut rng = seed::stream(ctx.seed, "verify-ntt");
    let configs: &[(u64, usize)] = &[(59, 29), (59, 58), (97, 96), (101, 100), (257, 256), (167, 83)];
    let reps = ctx.scale(5, 50);
    for &(p, order) in configs {
        let f = PrimeField::new(p).map_err(err)?;
        let plan = cached_plan(f, order).map_err(err)?;
        for _ in 0..reps {
            let x: Vec<u64> = (0..order).map(|_| rng.gen_range(0..p)).collect();
            if plan.forward(&x).map_err(err)? != naive_transform(&f, plan.beta(), &x) {
                return Err(format!("mismatch at p = {p}, order = {order}"));
            }
        }
    }
    Ok(format!("{} configurations x {reps} inputs", configs.len()))
}

fn eea_fast_vs_slow(ctx: &Ctx) -> Outcome {
    let mut rng = seed::stream(ctx.seed, "verify-eea");
    let f = PrimeField::new(97).map_err(err)?;
    let trials = ctx.scale(100, 500);
    for _ in 0..trials {
        let t = rng.gen_range(1..=20);
        let r0 = FpPoly::monomial(f, 1, 2 * t);
        let r1 = FpPoly::new(f, (0..2 * t).map(|_| rng.gen_range(0..97)).collect());
        let a = eea_fast(&r0, &r1, t).map_err(err)?;
        let b = eea_slow(&r0, &r1, t).map_err(err)?;
        if a != b {
            return Err(format!("outputs differ at t = {t}"));
        }
    }
    Ok(format!("{trials} instances"))
}

fn rs_roundtrip(ctx: &Ctx) -> Outcome {
    let mut rng = seed::stream(ctx.seed, "verify-rs");
    let cases: &[(u64, usize)] = match ctx.level {
        Level::Fast => &[(257, 26), (3457, 346)],
        Level::Full => &[(257, 26), (3457, 346), (65537, 2001)],
    };
    let trials = ctx.scale(5, 20);
    for &(p, n) in cases {
        let code = RsCode::with_default_radius(PrimeField::new(p).map_err(err)?, n).map_err(err)?;
        for _ in 0..trials {
            let w = rng.gen_range(0..=code.t());
            let y = rsdecode::random_error(&code, w, &mut rng);
            let s = rsdecode::syndrome_from_error(&code, &y).map_err(err)?;
            let got = ctx.decode(&code, &s).map_err(err)?;
            if got != y {
                return Err(format!("wrong decoding at p = {p}, weight {w}"));
            }
        }
    }
    Ok(format!("{} codes x {trials} errors", cases.len()))
}

fn rs_fast_vs_naive(ctx: &Ctx) -> Outcome {
    let mut rng = seed::stream(ctx.seed, "verify-rs-naive");
    let trials = ctx.scale(30, 300);
    for _ in 0..trials {
        let p = [11u64, 31, 97, 193, 257][rng.gen_range(0..5)];
        let f = PrimeField::new(p).map_err(err)?;
        let n = rng.gen_range(2..=(p as usize - 2));
        let code = RsCode::with_default_radius(f, n).map_err(err)?;
        let y = rsdecode::random_error(&code, rng.gen_range(0..=code.t()), &mut rng);
        let s = rsdecode::syndrome_from_error(&code, &y).map_err(err)?;
        let a = ctx.decode(&code, &s).map_err(err)?;
        let b = rsdecode::decode_naive(&code, &s).map_err(err)?;
        if a != b {
            return Err(format!("decoders disagree at p = {p}, n = {n}"));
        }
    }
    Ok(format!("{trials} instances"))
}

fn grover_exact(_: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [5u64, 7, 11, 13] {
        let f = PrimeField::new(p).map_err(err)?;
        for r in 1..p {
            let s: Vec<u64> = (0..r).collect();
            let a = grover::g_state_exact_grover(&f, &s).map_err(err)?;
            let b = grover::g_state_direct(&f, &s).map_err(err)?;
            let ov = grover::inner(&b, &a);
            worst = worst.max((ov.re - 1.0).abs()).max(ov.im.abs());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max overlap error {worst:.2e}"))
    } else {
        Err(format!("overlap error {worst:.2e}"))
    }
}

fn balanced_overlap(_: &Ctx) -> Outcome {
    for p in [11u64, 101, 1009] {
        let f = PrimeField::new(p).map_err(err)?;
        let s: Vec<u64> = (0..(p - 1) / 2).collect();
        let a = grover::g_state_approx(&f, &s).map_err(err)?;
        let b = grover::g_state_direct(&f, &s).map_err(err)?;
        let ov = grover::inner(&b, &a);
        let target = (1.0 - 1.0 / (p * p) as f64).sqrt();
        if (ov.re - target).abs() > 1e-12 || ov.im.abs() > 1e-12 {
            return Err(format!("overlap {ov} at p = {p}"));
        }
        for q in [0.05, 0.5, 1.0] {
            let d = grover::approx_pipeline_distance(p, q).map_err(err)?;
            if d > grover::approx_pipeline_distance_bound(p, q) * (1.0 + 1e-12) {
                return Err(format!("distance above bound at p = {p}, q = {q}"));
            }
        }
    }
    Ok("p in {11, 101, 1009}".into())
}

fn expectation_identity(ctx: &Ctx) -> Outcome {
    let families = ctx.scale(4, 20);
    let mut worst: f64 = 0.0;
    for i in 0..families {
        let inst = opi::random_instance(11, Profile::Custom { n: 3, r: 5 }, ctx.seed.wrapping_add(i as u64))
            .map_err(err)?;
        let ml = opi::reduce_to_maxlinsat(&inst);
        let w = dqi_sim::optimal_weights(10, 1, 5, 11);
        let run = dqi_sim::run_pipeline(&ml, &w, Budgets::default()).map_err(err)?;
        worst = worst.max((run.formula - run.statevector).abs());
    }
    if worst <= 1e-8 {
        Ok(format!("{families} families, max difference {worst:.2e}"))
    } else {
        Err(format!("difference {worst:.2e}"))
    }
}

fn opi_reduction(ctx: &Ctx) -> Outcome {
    let mut rng = seed::stream(ctx.seed, "verify-opi");
    let trials = ctx.scale(20, 100);
    for i in 0..trials {
        let inst = opi::random_instance(31, Profile::Canonical, ctx.seed.wrapping_add(i as u64)).map_err(err)?;
        let ml = opi::reduce_to_maxlinsat(&inst);
        let x: Vec<u64> = (0..inst.n()).map(|_| rng.gen_range(0..31)).collect();
        if opi::f_opi(&inst, &x).map_err(err)? != dqi_sim::objective(&ml, &x).map_err(err)? {
            return Err("objective changed under reduction".into());
        }
    }
    Ok(format!("{trials} pairs"))
}

fn asymptotic_ratio(_: &Ctx) -> Outcome {
    let v = analytics::asymptotic_ratio(0.05, 0.5).map_err(err)?;
    let target = 0.5 + 19f64.sqrt() / 20.0;
    if (v - target).abs() <= 1e-12 {
        Ok(format!("{v:.12}"))
    } else {
        Err(format!("{v} != {target}"))
    }
}

fn binomial_sandwich(ctx: &Ctx) -> Outcome {
    let ms: &[usize] = match ctx.level {
        Level::Fast => &[500],
        Level::Full => &[500, 2000],
    };
    for &m in ms {
        for rho in [0.3, 0.5] {
            let ell = m / 4;
            let b = analytics::binomial_lower_bound(m, ell, rho, 0.01, 0.2).map_err(err)?;
            if !(b.lower <= b.actual && b.actual <= b.upper) {
                return Err(format!("m = {m}, rho = {rho}: {} not in [{}, {}]", b.actual, b.lower, b.upper));
            }
        }
    }
    Ok(format!("m in {ms:?}"))
}

fn binomial_tails(_: &Ctx) -> Outcome {
    let t = analytics::binomial_tail_check(500, 200, 0.01).map_err(err)?;
    if t.upper_tail <= t.bound && t.lower_tail <= t.bound {
        Ok(format!("tails {:.3e}, {:.3e} <= {:.3e}", t.upper_tail, t.lower_tail, t.bound))
    } else {
        Err(format!("tails {:.3e}, {:.3e} > {:.3e}", t.upper_tail, t.lower_tail, t.bound))
    }
}

fn gate_counts(_: &Ctx) -> Outcome {
    let c = analytics::qram_gate_counts(8).map_err(err)?;
    let l = c.logarithmic.ok_or("no logarithmic variant at M = 8")?;
    if c.linear.fredkin == 22 && (l.fredkin, l.toffoli, l.cnot) == (8, 24, 4) {
        Ok("22; (8, 24, 4)".into())
    } else {
        Err(format!("{c:?}"))
    }
}

fn truncation_heuristic(ctx: &Ctx) -> Outcome {
    let inst = opi::random_instance(101, Profile::Canonical, ctx.seed).map_err(err)?;
    let trials = ctx.scale(300, 2000);
    let vals: Vec<f64> = (0..trials)
        .map(|i| opi::truncation_heuristic(&inst, ctx.seed.wrapping_add(i as u64)).map(|r| r.1 as f64))
        .collect::<crate::Result<_>>()
        .map_err(err)?;
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    let target = opi::heuristic_expectation(101, inst.n(), 50);
    if (mean - target).abs() <= 4.0 * se {
        Ok(format!("mean {mean:.3} vs {target:.3} (se {se:.3})"))
    } else {
        Err(format!("mean {mean:.3} vs {target:.3} (se {se:.3})"))
    }
}
