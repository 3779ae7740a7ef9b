//! Optimal Polynomial Intersection instances.
//!
//! An instance fixes `n < p` and a subset `T_z` of `F_p` for every `z` in
//! `F_p^*`. The objective of a polynomial `X` of degree below `n` is the number
//! of `z` with `X(z)` in `T_z`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dqi_sim::MaxLinsatInstance;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ntt::cached_plan;
use crate::seed;

/// Coefficients `x_0, ..., x_{n-1}` of a polynomial of degree below `n`.
pub type OpiPolynomial = Vec<u64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpiInstance {
    field: PrimeField,
    n: usize,
    /// `sets[z - 1] = T_z`, sorted ascending.
    sets: Vec<Vec<u64>>,
}

/// Size regime used by [`random_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// `n = floor(p/10) + 1`, `|T_z| = floor(p/2)`.
    Canonical,
    Custom { n: usize, r: usize },
}

impl Profile {
    pub fn sizes(&self, p: u64) -> Result<(usize, usize)> {
        let (n, r) = match *self {
            Profile::Canonical => ((p / 10 + 1) as usize, (p / 2) as usize),
            Profile::Custom { n, r } => (n, r),
        };
        if n == 0 || n as u64 >= p {
            return Err(Error::InvalidProfile(format!("n = {n} must satisfy 1 <= n < p = {p}")));
        }
        if r == 0 || r as u64 >= p {
            return Err(Error::InvalidProfile(format!("r = {r} must satisfy 1 <= r < p = {p}")));
        }
        Ok((n, r))
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    p: u64,
    gamma: u64,
    n: usize,
    sets: Vec<Vec<u64>>,
}

impl OpiInstance {
    /// Validates and canonicalizes (sorts) the sets, given in order `z = 1..p-1`.
    pub fn new(field: PrimeField, n: usize, mut sets: Vec<Vec<u64>>) -> Result<Self> {
        let p = field.modulus();
        if n == 0 || n as u64 >= p {
            return Err(Error::InvalidInstance(format!("n = {n} must satisfy 1 <= n < p")));
        }
        if sets.len() as u64 != p - 1 {
            return Err(Error::InvalidInstance(format!("expected {} sets, got {}", p - 1, sets.len())));
        }
        for (i, s) in sets.iter_mut().enumerate() {
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) || s.last().is_some_and(|&v| v >= p) {
                return Err(Error::InvalidInstance(format!(
                    "set for z = {} has repeated or out-of-range elements",
                    i + 1
                )));
            }
        }
        Ok(Self { field, n, sets })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `T_z` for `z` in `1..p`.
    pub fn set(&self, z: u64) -> &[u64] {
        &self.sets[(z - 1) as usize]
    }

    pub fn sets(&self) -> &[Vec<u64>] {
        &self.sets
    }

    /// Common set size, if all sets have the same size.
    pub fn common_size(&self) -> Option<usize> {
        let r = self.sets[0].len();
        self.sets.iter().all(|s| s.len() == r).then_some(r)
    }

    pub fn is_canonical(&self) -> bool {
        let p = self.field.modulus();
        self.n as u64 == p / 10 + 1 && self.common_size() == Some((p / 2) as usize)
    }

    pub fn contains(&self, z: u64, v: u64) -> bool {
        self.set(z).binary_search(&v).is_ok()
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            p: self.field.modulus(),
            gamma: self.field.gamma(),
            n: self.n,
            sets: self.sets.clone(),
        };
        serde_json::to_string(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInstance(e.to_string()))?;
        let field = PrimeField::new(file.p)?;
        if field.gamma() != file.gamma {
            return Err(Error::InvalidInstance(format!(
                "gamma = {} but the smallest generator of F_{} is {}",
                file.gamma,
                file.p,
                field.gamma()
            )));
        }
        Self::new(field, file.n, file.sets)
    }
}

fn check_poly(inst: &OpiInstance, x: &[u64]) -> Result<()> {
    if x.len() != inst.n {
        return Err(Error::LengthMismatch { expected: inst.n, got: x.len() });
    }
    Ok(())
}

/// Number of `z` in `F_p^*` with `X(z)` in `T_z`, evaluating `X` at all
/// `gamma^i` with one transform.
pub fn f_opi(inst: &OpiInstance, x: &[u64]) -> Result<usize> {
    check_poly(inst, x)?;
    let f = inst.field;
    let m = (f.modulus() - 1) as usize;
    let plan = cached_plan(f, m)?;
    let mut padded: Vec<u64> = x.iter().map(|&c| c % f.modulus()).collect();
    padded.resize(m, 0);
    let values = plan.forward(&padded)?;
    let mut z = 1u64;
    let mut count = 0;
    for v in values {
        if inst.contains(z, v) {
            count += 1;
        }
        z = f.mul(z, f.gamma());
    }
    Ok(count)
}

/// Same count by Horner evaluation at each point.
pub fn f_opi_horner(inst: &OpiInstance, x: &[u64]) -> Result<usize> {
    check_poly(inst, x)?;
    let f = inst.field;
    Ok((1..f.modulus())
        .filter(|&z| {
            let v = x.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, z), c % f.modulus()));
            inst.contains(z, v)
        })
        .count())
}

/// The max-LINSAT instance with `m = p-1`, `b_i = (gamma^(ij))_j` and `S_i = T_{gamma^i}`.
pub fn reduce_to_maxlinsat(inst: &OpiInstance) -> MaxLinsatInstance {
    let f = inst.field;
    let p = f.modulus();
    let rows: Vec<Vec<u64>> = (1..p)
        .map(|i| {
            let gi = f.pow(f.gamma(), i);
            let mut row = Vec::with_capacity(inst.n);
            let mut w = 1;
            for _ in 0..inst.n {
                row.push(w);
                w = f.mul(w, gi);
            }
            row
        })
        .collect();
    let sets = (1..p).map(|i| inst.set(f.pow(f.gamma(), i)).to_vec()).collect();
    MaxLinsatInstance::new_vandermonde(f, inst.n, rows, sets)
}

/// Draws an instance: every `T_z` is an independent uniform `r`-subset.
pub fn random_instance(p: u64, profile: Profile, seed: u64) -> Result<OpiInstance> {
    let field = PrimeField::new(p)?;
    let (n, r) = profile.sizes(p)?;
    let mut rng = seed::stream(seed, "opi-instance");
    let mut pool: Vec<u64> = (0..p).collect();
    let sets = (1..p)
        .map(|_| {
            let mut s = partial_shuffle(&mut rng, &mut pool, r);
            s.sort_unstable();
            s
        })
        .collect();
    OpiInstance::new(field, n, sets)
}

/// First `k` entries of a partial Fisher-Yates pass over `pool`.
fn partial_shuffle<R: Rng>(rng: &mut R, pool: &mut [u64], k: usize) -> Vec<u64> {
    let len = pool.len();
    for i in 0..k {
        let j = rng.gen_range(i..len);
        pool.swap(i, j);
    }
    pool[..k].to_vec()
}

/// Interpolate through `n` random satisfied points and count the rest.
pub fn truncation_heuristic(inst: &OpiInstance, seed: u64) -> Result<(OpiPolynomial, usize)> {
    let f = inst.field;
    let p = f.modulus();
    let mut rng = seed::stream(seed, "truncation-heuristic");
    let mut nodes: Vec<u64> = (1..p).collect();
    let chosen = partial_shuffle(&mut rng, &mut nodes, inst.n);
    let points: Vec<(u64, u64)> = chosen
        .into_iter()
        .map(|z| {
            let t = inst.set(z);
            let v = if t.is_empty() { rng.gen_range(0..p) } else { t[rng.gen_range(0..t.len())] };
            (z, v)
        })
        .collect();
    let x = interpolate(&f, &points)?;
    let value = f_opi(inst, &x)?;
    Ok((x, value))
}

/// Expected heuristic value `n + (m - n) r / p` for common set size `r`.
pub fn heuristic_expectation(p: u64, n: usize, r: usize) -> f64 {
    let m = (p - 1) as f64;
    n as f64 + (m - n as f64) * r as f64 / p as f64
}

/// Lagrange interpolation: coefficients of the unique polynomial of degree
/// below `points.len()` through the given points.
pub fn interpolate(field: &PrimeField, points: &[(u64, u64)]) -> Result<OpiPolynomial> {
    let f = field;
    let n = points.len();
    let mut zs: Vec<u64> = points.iter().map(|&(z, _)| z % f.modulus()).collect();
    zs.sort_unstable();
    if let Some(w) = zs.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateNode(w[0]));
    }
    // master(x) = prod (x - z_k), ascending coefficients
    let mut master = vec![1u64];
    for &(z, _) in points {
        let mut next = vec![0u64; master.len() + 1];
        for (i, &c) in master.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], c);
            next[i] = f.sub(next[i], f.mul(c, z));
        }
        master = next;
    }
    let mut out = vec![0u64; n];
    for &(z, v) in points {
        // master / (x - z) by synthetic division, highest power first
        let mut q = vec![0u64; n];
        let mut carry = 0;
        for i in (0..n).rev() {
            carry = f.add(master[i + 1], f.mul(carry, z));
            q[i] = carry;
        }
        let denom = q.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, z), c));
        let scale = f.mul(v % f.modulus(), f.inv(denom)?);
        for (o, &c) in out.iter_mut().zip(&q) {
            *o = f.add(*o, f.mul(c, scale));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sets() {
        let f = PrimeField::new(13).unwrap();
        let zero_sets = OpiInstance::new(f, 2, vec![vec![0]; 12]).unwrap();
        assert_eq!(f_opi(&zero_sets, &[0, 0]).unwrap(), 12);
        let no_zero = OpiInstance::new(f, 2, vec![vec![1, 2]; 12]).unwrap();
        assert_eq!(f_opi(&no_zero, &[0, 0]).unwrap(), 0);
    }

    #[test]
    fn canonical_sizes() {
        let inst = random_instance(101, Profile::Canonical, 1).unwrap();
        assert_eq!(inst.n(), 11);
        assert!(inst.sets().iter().all(|s| s.len() == 50));
        assert!(inst.is_canonical());
        assert_eq!(inst, random_instance(101, Profile::Canonical, 1).unwrap());
        assert_ne!(inst, random_instance(101, Profile::Canonical, 2).unwrap());
        assert!(matches!(
            random_instance(101, Profile::Custom { n: 101, r: 3 }, 1),
            Err(Error::InvalidProfile(_))
        ));
        assert!(matches!(random_instance(100, Profile::Canonical, 1), Err(Error::NotPrime(100))));
    }

    #[test]
    fn interpolation() {
        let f = PrimeField::new(13).unwrap();
        assert_eq!(interpolate(&f, &[(4, 9)]).unwrap(), vec![9]);
        // 3 + 5x + 7x^2
        let quad = |z: u64| (3 + 5 * z + 7 * z * z) % 13;
        let pts: Vec<(u64, u64)> = [2u64, 5, 11].iter().map(|&z| (z, quad(z))).collect();
        assert_eq!(interpolate(&f, &pts).unwrap(), vec![3, 5, 7]);
        assert!(matches!(interpolate(&f, &[(1, 2), (1, 3)]), Err(Error::DuplicateNode(1))));
    }

    #[test]
    fn json_roundtrip() {
        let inst = random_instance(31, Profile::Custom { n: 4, r: 9 }, 5).unwrap();
        let text = inst.to_json();
        assert!(text.starts_with("{\"p\":31,\"gamma\":3,\"n\":4,\"sets\":[["));
        let back = OpiInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn heuristic_hits_its_nodes() {
        let inst = random_instance(31, Profile::Canonical, 3).unwrap();
        for s in 0..20 {
            let (x, v) = truncation_heuristic(&inst, s).unwrap();
            assert_eq!(x.len(), inst.n());
            assert!(v >= inst.n());
            assert_eq!(v, f_opi_horner(&inst, &x).unwrap());
        }
        let full = random_instance(7, Profile::Custom { n: 6, r: 3 }, 0).unwrap();
        assert_eq!(truncation_heuristic(&full, 0).unwrap().1, 6);
    }
}
