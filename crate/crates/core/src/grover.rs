//! Exact amplitude amplification for the single-constraint state
//!
//! `|G> = sum_z g(z)|z>`, where `g` takes the value `sqrt((p-r)/(pr))` on a set
//! `S` of size `r` and `-sqrt(r/(p(p-r)))` off it.
//!
//! States are dense complex vectors of length `p`. `D^phi` phases the part
//! orthogonal to the uniform state `|0^>`, and `Xi^psi` phases the members of `S`.
//! For `r/p > 1/2` the sequence runs on the complement of `S` and the result
//! is negated, since `g_S = -g_{S^c}`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::PrimeField;

pub type QuditVector = Vec<Complex64>;

/// Rotation parameters for a set of size `r` in `F_p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverAngles {
    /// `r/p` as given (before mirroring).
    pub rho: f64,
    pub theta: f64,
    pub tau: u32,
    pub beta: f64,
    pub phi: f64,
    pub psi: f64,
    /// True when `r/p > 1/2` and the angles describe the complement.
    pub mirrored: bool,
}

/// Angles for density `r/p`; densities above one half use `(p-r)/p`.
pub fn compute_angles(r: u64, p: u64) -> Result<GroverAngles> {
    if r == 0 || r >= p {
        return Err(Error::DegenerateSet { r: r as usize, p });
    }
    let mirrored = 2 * r > p;
    let re = if mirrored { p - r } else { r };
    let rho = re as f64 / p as f64;
    let theta = if 2 * re == p { PI / 4.0 } else { rho.sqrt().asin() };
    let tau = (PI / (4.0 * theta)).floor() as u32;
    let beta = FRAC_PI_2 - 2.0 * tau as f64 * theta;
    // cos 2θ = 1 - 2ρ and sin 2θ = 2 sqrt(ρ(1-ρ)) avoid tan(2θ) blowing up at ρ = 1/2.
    let cos2 = (p - 2 * re) as f64 / p as f64;
    let sin2 = 2.0 * (rho * (1.0 - rho)).sqrt();
    let phi = (-beta.tan() * cos2 / sin2).clamp(-1.0, 1.0).acos();
    let psi = (beta.sin() / sin2).clamp(-1.0, 1.0).acos();
    Ok(GroverAngles { rho: r as f64 / p as f64, theta, tau, beta, phi, psi, mirrored })
}

/// Membership table of `s`, rejecting empty and full sets.
fn membership(p: u64, s: &[u64]) -> Result<Vec<bool>> {
    let mut table = vec![false; p as usize];
    for &z in s {
        if z >= p {
            return Err(Error::DomainError(format!("{z} is not a residue mod {p}")));
        }
        table[z as usize] = true;
    }
    let r = table.iter().filter(|&&b| b).count();
    if r == 0 || r as u64 == p {
        return Err(Error::DegenerateSet { r, p });
    }
    Ok(table)
}

/// `|0^> = p^{-1/2} sum_z |z>`.
pub fn uniform_state(p: u64) -> QuditVector {
    vec![Complex64::new(1.0 / (p as f64).sqrt(), 0.0); p as usize]
}

/// `<a|b>`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `D^phi = |0^><0^| + e^{i phi}(I - |0^><0^|)`.
pub fn apply_diffusion(state: &[Complex64], phi: f64) -> Result<QuditVector> {
    let p = state.len() as u64;
    if p == 0 {
        return Err(Error::LengthMismatch { expected: 1, got: 0 });
    }
    let mean: Complex64 = state.iter().sum::<Complex64>() / p as f64;
    let phase = Complex64::from_polar(1.0, phi);
    Ok(state.iter().map(|&v| mean + phase * (v - mean)).collect())
}

/// `Xi^psi`: multiplies amplitudes on `s` by `e^{i psi}`.
pub fn apply_oracle_rotation(state: &[Complex64], s: &[u64], psi: f64) -> Result<QuditVector> {
    let table = membership(state.len() as u64, s)?;
    let phase = Complex64::from_polar(1.0, psi);
    Ok(state
        .iter()
        .zip(&table)
        .map(|(&v, &inside)| if inside { phase * v } else { v })
        .collect())
}

/// `|G>` from its closed-form amplitudes.
pub fn g_state_direct(field: &PrimeField, s: &[u64]) -> Result<QuditVector> {
    let p = field.modulus();
    let table = membership(p, s)?;
    let r = table.iter().filter(|&&b| b).count() as f64;
    let pf = p as f64;
    let inside = ((pf - r) / (pf * r)).sqrt();
    let outside = -(r / (pf * (pf - r))).sqrt();
    Ok(table
        .iter()
        .map(|&b| Complex64::new(if b { inside } else { outside }, 0.0))
        .collect())
}

fn complement(p: u64, table: &[bool]) -> Vec<u64> {
    (0..p).filter(|&z| !table[z as usize]).collect()
}

/// `e^{i(pi-psi)} Xi^{pi+2psi} D^phi (Xi^pi D^pi)^tau |0^>`, which equals `|G>` exactly.
pub fn g_state_exact_grover(field: &PrimeField, s: &[u64]) -> Result<QuditVector> {
    let steps = grover_trajectory(field, s)?;
    Ok(steps.into_iter().last().expect("trajectory is nonempty"))
}

/// Every intermediate state of [`g_state_exact_grover`], starting at `|0^>`.
pub fn grover_trajectory(field: &PrimeField, s: &[u64]) -> Result<Vec<QuditVector>> {
    let p = field.modulus();
    let table = membership(p, s)?;
    let r = table.iter().filter(|&&b| b).count() as u64;
    let a = compute_angles(r, p)?;
    let marked: Vec<u64> = if a.mirrored {
        complement(p, &table)
    } else {
        (0..p).filter(|&z| table[z as usize]).collect()
    };
    let mut v = uniform_state(p);
    let mut out = vec![v.clone()];
    for _ in 0..a.tau {
        v = apply_diffusion(&v, PI)?;
        v = apply_oracle_rotation(&v, &marked, PI)?;
        out.push(v.clone());
    }
    v = apply_diffusion(&v, a.phi)?;
    out.push(v.clone());
    v = apply_oracle_rotation(&v, &marked, PI + 2.0 * a.psi)?;
    let mut global = Complex64::from_polar(1.0, PI - a.psi);
    if a.mirrored {
        global = -global;
    }
    v.iter_mut().for_each(|z| *z *= global);
    out.push(v);
    Ok(out)
}

/// One-oracle approximation `-Xi^pi |0^>` for sets of size `(p-1)/2`.
pub fn g_state_approx(field: &PrimeField, s: &[u64]) -> Result<QuditVector> {
    let p = field.modulus();
    let table = membership(p, s)?;
    let r = table.iter().filter(|&&b| b).count();
    let expected = ((p - 1) / 2) as usize;
    if r != expected {
        return Err(Error::NotBalanced { r, expected });
    }
    let v = apply_oracle_rotation(&uniform_state(p), s, PI)?;
    Ok(v.into_iter().map(|z| -z).collect())
}

/// Distance between the exact and approximate weighted states when each of
/// the `p - 1` constraints carries weight `q` on its nontrivial branch:
/// `sqrt(2 - 2 (1 - q + q sqrt(1 - 1/p^2))^(p-1))`.
pub fn approx_pipeline_distance(p: u64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::DomainError(format!("weight {q} outside [0, 1]")));
    }
    let pf = p as f64;
    let delta = one_minus_overlap(pf);
    let log_overlap = (pf - 1.0) * (-q * delta).ln_1p();
    Ok((-2.0 * log_overlap.exp_m1()).max(0.0).sqrt())
}

/// `sqrt(2 q p (1 - sqrt(1 - 1/p^2)))`.
pub fn approx_pipeline_distance_bound(p: u64, q: f64) -> f64 {
    let pf = p as f64;
    (2.0 * q * pf * one_minus_overlap(pf)).sqrt()
}

/// `1 - sqrt(1 - 1/p^2)` without cancellation.
fn one_minus_overlap(p: f64) -> f64 {
    let x = 1.0 / (p * p);
    x / (1.0 + (1.0 - x).sqrt())
}
