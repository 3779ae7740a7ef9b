//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use dqi_core::analytics;
use dqi_core::bench;
use dqi_core::dqi_sim::{self, Budgets};
use dqi_core::grover;
use dqi_core::ntt::{cached_plan, naive_transform};
use dqi_core::opi::{self, Profile};
use dqi_core::polyseries::{eea_fast, eea_slow, Degree, FpPoly};
use dqi_core::rsdecode::{self, ErrorVector, RsCode};
use dqi_core::{seed, PrimeField};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn expectation_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rng = seed::stream(1, "acceptance-weights");
    for family in 0..20u64 {
        let inst = opi::random_instance(11, Profile::Custom { n: 3, r: 5 }, family).map_err(e)?;
        let ml = opi::reduce_to_maxlinsat(&inst);
        if ml.default_ell().map_err(e)? != 1 {
            return Err("default ell is not 1".into());
        }
        let mut random: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = random.iter().map(|x| x * x).sum::<f64>().sqrt();
        random.iter_mut().for_each(|x| *x /= n);
        for w in [dqi_sim::optimal_weights(10, 1, 5, 11), random] {
            let run = dqi_sim::run_pipeline(&ml, &w, Budgets::default()).map_err(e)?;
            worst = worst.max((run.formula - run.statevector).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 1e-8 && secs < 10.0,
        format!("20 families x 2 weight vectors, max |formula - statevector| = {worst:.2e}, {secs:.2}s"),
    )
}

fn headline_ratio() -> Outcome {
    let v = analytics::asymptotic_ratio(1.0 / 20.0, 0.5).map_err(e)?;
    let target = 0.5 + 19f64.sqrt() / 20.0;
    ensure((v - target).abs() <= 1e-12, format!("ratio = {v:.15} (target {target:.15})"))
}

fn exact_grover() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::stream(3, "acceptance-grover");
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in [5u64, 7, 11, 13] {
        let f = PrimeField::new(p).map_err(e)?;
        for r in 1..p as usize {
            let mut sets = vec![(0..r as u64).collect::<Vec<_>>()];
            for _ in 0..5 {
                let s = rand::seq::index::sample(&mut rng, p as usize, r);
                sets.push(s.into_iter().map(|v| v as u64).collect());
            }
            for s in sets {
                let exact = grover::g_state_exact_grover(&f, &s).map_err(e)?;
                let direct = grover::g_state_direct(&f, &s).map_err(e)?;
                let ov = grover::inner(&direct, &exact);
                worst = worst.max((ov - 1.0).norm());
                cases += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= 1e-10 && secs < 5.0,
        format!("{cases} sets, max |<G|seq> - 1| = {worst:.2e}, {secs:.3}s"),
    )
}

fn balanced_overlap() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [11u64, 101, 1009] {
        let f = PrimeField::new(p).map_err(e)?;
        let mut rng = seed::stream(p, "acceptance-balanced");
        let s: Vec<u64> = rand::seq::index::sample(&mut rng, p as usize, (p as usize - 1) / 2)
            .into_iter()
            .map(|v| v as u64)
            .collect();
        let approx = grover::g_state_approx(&f, &s).map_err(e)?;
        let direct = grover::g_state_direct(&f, &s).map_err(e)?;
        let ov = grover::inner(&direct, &approx);
        let target = (1.0 - 1.0 / (p * p) as f64).sqrt();
        worst = worst.max((ov.re - target).abs()).max(ov.im.abs());
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            let d = grover::approx_pipeline_distance(p, q).map_err(e)?;
            let bound = grover::approx_pipeline_distance_bound(p, q);
            if d > bound * (1.0 + 1e-12) {
                return Err(format!("distance {d} above bound {bound} at p = {p}, q = {q}"));
            }
        }
    }
    ensure(worst <= 1e-12, format!("max overlap error {worst:.2e}; distance bound holds for q in [0, 1]"))
}

fn rs_correctness() -> Outcome {
    let f11 = PrimeField::new(11).map_err(e)?;
    let code = RsCode::new(f11, 4, 2).map_err(e)?;
    let mut failures = 0;
    let mut count = 0;
    let mut errors = vec![ErrorVector::zero(10)];
    for i in 1..=10 {
        for v in 1..11 {
            errors.push(ErrorVector::from_sparse(10, &[(i, v)]));
            for j in i + 1..=10 {
                for u in 1..11 {
                    errors.push(ErrorVector::from_sparse(10, &[(i, v), (j, u)]));
                }
            }
        }
    }
    for y in &errors {
        let s = rsdecode::syndrome_from_error(&code, y).map_err(e)?;
        if rsdecode::decode_fast(&code, &s).as_ref() != Ok(y) {
            failures += 1;
        }
        count += 1;
    }

    let big = RsCode::new(PrimeField::new(65537).map_err(e)?, 2000, 1000).map_err(e)?;
    let mut rng = seed::stream(5, "acceptance-rs");
    let mut big_failures = 0;
    for trial in 0..50 {
        let w = if trial % 2 == 0 { 1000 } else { rng.gen_range(0..=1000) };
        let y = rsdecode::random_error(&big, w, &mut rng);
        let s = rsdecode::syndrome_from_error(&big, &y).map_err(e)?;
        match rsdecode::decode_fast(&big, &s) {
            Ok(got) if got == y && rsdecode::syndrome_from_error(&big, &got).map_err(e)? == s => {}
            _ => big_failures += 1,
        }
    }

    let mut disagreements = 0;
    for _ in 0..300 {
        let p = [11u64, 13, 31, 59, 97, 101, 193, 257][rng.gen_range(0..8)];
        let n = rng.gen_range(2..=p as usize - 2);
        let code = RsCode::with_default_radius(PrimeField::new(p).map_err(e)?, n).map_err(e)?;
        let y = rsdecode::random_error(&code, rng.gen_range(0..=code.t()), &mut rng);
        let s = rsdecode::syndrome_from_error(&code, &y).map_err(e)?;
        let a = rsdecode::decode_fast(&code, &s);
        let b = rsdecode::decode_naive(&code, &s);
        if a != b || a.as_ref() != Ok(&y) {
            disagreements += 1;
        }
    }
    ensure(
        failures == 0 && count == 4601 && big_failures == 0 && disagreements == 0,
        format!(
            "p=11 exhaustive: {failures}/{count} failures; p=65537 t=1000: {big_failures}/50 failures; fast vs naive: {disagreements}/300 disagreements"
        ),
    )
}

fn scaling() -> Outcome {
    let mut fast = Vec::new();
    let mut naive = Vec::new();
    let mut failures = 0;
    for &p in bench::SMOOTH_PRIMES {
        let with_naive = p <= 12289;
        let trials = if p > 100_000 { 3 } else { 7 };
        let row = bench::bench_prime(p, trials, 6, with_naive).map_err(e)?;
        failures += row.failures;
        fast.push((p as f64, row.fast_median_s));
        if let Some(t) = row.naive_median_s {
            naive.push((p as f64, t));
        }
    }
    let fast_exp = bench::loglog_slope(&fast).ok_or("too few points")?;
    let naive_exp = bench::loglog_slope(&naive).ok_or("too few points")?;
    let &(p_common, naive_t) = naive.last().ok_or("no naive timing")?;
    let fast_t = fast.iter().find(|x| x.0 == p_common).ok_or("no common prime")?.1;
    let ratio = naive_t / fast_t;
    let range = fast.last().unwrap().0 / fast[0].0;
    ensure(
        failures == 0 && fast_exp < 1.5 && naive_exp >= 1.8 && ratio > 10.0 && range >= 256.0,
        format!(
            "fast exponent {fast_exp:.3} over {range:.0}x, naive exponent {naive_exp:.3}, naive/fast at p={p_common} = {ratio:.1}, failures {failures}"
        ),
    )
}

fn ntt_exactness() -> Outcome {
    let configs: &[(u64, usize)] = &[
        (59, 29),
        (59, 58),
        (97, 96),
        (101, 100),
        (167, 83),
        (257, 256),
        (1019, 509),
        (3457, 1152),
        (2305843009213693951, 1321),
    ];
    let mut rng = seed::stream(7, "acceptance-ntt");
    for &(p, order) in configs {
        let f = PrimeField::new(p).map_err(e)?;
        let plan = cached_plan(f, order).map_err(e)?;
        for _ in 0..200 {
            let x: Vec<u64> = (0..order).map(|_| rng.gen_range(0..p)).collect();
            let y = plan.forward(&x).map_err(e)?;
            if y != naive_transform(&f, plan.beta(), &x) {
                return Err(format!("mismatch at p = {p}, order = {order}"));
            }
            if plan.inverse(&y).map_err(e)? != x {
                return Err(format!("inverse mismatch at p = {p}, order = {order}"));
            }
        }
    }
    Ok(format!("{} configurations x 200 inputs, all bit-exact", configs.len()))
}

fn fast_eea() -> Outcome {
    let f = PrimeField::new(97).map_err(e)?;
    let mut rng = seed::stream(8, "acceptance-eea");
    for _ in 0..500 {
        let t = rng.gen_range(1..=20);
        let r0 = FpPoly::monomial(f, 1, 2 * t);
        let r1 = FpPoly::new(f, (0..2 * t).map(|_| rng.gen_range(0..97)).collect());
        let a = eea_fast(&r0, &r1, t).map_err(e)?;
        let b = eea_slow(&r0, &r1, t).map_err(e)?;
        if a.quotients != b.quotients || a.p_j != b.p_j || a.l_j != b.l_j {
            return Err(format!("fast and slow differ at t = {t}"));
        }
        if a.p_j.degree() > Degree::Finite(t - 1) || a.l_j.degree() > Degree::Finite(t) {
            return Err(format!("degree bound violated at t = {t}"));
        }
    }
    Ok("500 instances identical; deg P_j <= t-1 and deg L_j <= t".into())
}

fn sandwich() -> Outcome {
    let mut lines = Vec::new();
    for rho in [0.3, 0.5] {
        for lambda in [0.2, 0.25] {
            let mut prev_gap = f64::INFINITY;
            for m in [500usize, 2000] {
                let ell = (lambda * m as f64).round() as usize;
                let b = analytics::binomial_lower_bound(m, ell, rho, 0.01, lambda).map_err(e)?;
                if !(b.lower <= b.actual && b.actual <= b.upper) {
                    return Err(format!("m={m} rho={rho} lambda={lambda}: {} not in [{}, {}]", b.actual, b.lower, b.upper));
                }
                let gap = (b.asymptotic - b.actual) / m as f64;
                if gap.abs() >= prev_gap.abs() {
                    return Err(format!("gap did not shrink at m={m} rho={rho} lambda={lambda}"));
                }
                prev_gap = gap;
                lines.push(format!("({m},{rho},{lambda}):{gap:.4}"));
            }
        }
    }
    Ok(format!("bounds hold; per-m gaps {}", lines.join(" ")))
}

fn binomial_bounds() -> Outcome {
    let t = analytics::binomial_tail_check(500, 200, 0.01).map_err(e)?;
    if t.upper_tail > t.bound || t.lower_tail > t.bound {
        return Err(format!("tails {:.3e}, {:.3e} exceed {:.3e}", t.upper_tail, t.lower_tail, t.bound));
    }
    let mut points = 0;
    for m in [20usize, 50, 100, 200, 500, 1000, 2000] {
        for i in 1..40 {
            let q = i as f64 / 40.0;
            if !(7.0..=m as f64).contains(&(q * (m + 7) as f64)) {
                continue;
            }
            let r = analytics::binomial_mode_check(m, q).map_err(e)?;
            if !r.unimodal || r.max_mass > r.bound {
                return Err(format!("mode check failed at m = {m}, q = {q}"));
            }
            points += 1;
        }
    }
    Ok(format!(
        "tails {:.4e}, {:.4e} <= {:.4e}; mode bound on {points} grid points",
        t.upper_tail, t.lower_tail, t.bound
    ))
}

fn heuristic() -> Outcome {
    let trials = 2000;
    let mut vals = Vec::with_capacity(trials);
    let mut n = 0;
    for i in 0..trials as u64 {
        let inst = opi::random_instance(101, Profile::Canonical, i).map_err(e)?;
        n = inst.n();
        vals.push(opi::truncation_heuristic(&inst, i).map_err(e)?.1 as f64);
    }
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    let target = opi::heuristic_expectation(101, n, 50);
    ensure(
        (mean - target).abs() <= 3.0 * se,
        format!("mean {mean:.4} vs {target:.4}, se {se:.4}; fraction {:.4} of m", mean / 100.0),
    )
}

fn gate_counts() -> Outcome {
    let c = analytics::qram_gate_counts(8).map_err(e)?;
    let l = c.logarithmic.ok_or("missing logarithmic variant")?;
    ensure(
        c.linear.fredkin == 22 && (l.fredkin, l.toffoli, l.cnot) == (8, 24, 4),
        format!("linear {} Fredkin; logarithmic ({}, {}, {})", c.linear.fredkin, l.fredkin, l.toffoli, l.cnot),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed-form expectation equals statevector expectation", expectation_identity),
        ("asymptotic ratio at (1/20, 1/2)", headline_ratio),
        ("exact rotation sequence reproduces single-constraint states", exact_grover),
        ("balanced one-oracle overlap and distance bound", balanced_overlap),
        ("Reed-Solomon decoding correctness", rs_correctness),
        ("near-linear decoder scaling", scaling),
        ("NTT bit-exactness", ntt_exactness),
        ("half-GCD EEA equivalence", fast_eea),
        ("binomial-weight sandwich", sandwich),
        ("binomial tail and mode bounds", binomial_bounds),
        ("truncation heuristic mean", heuristic),
        ("memory-access gate counts", gate_counts),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2} {name}: {msg} [{secs:.2}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {msg} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
