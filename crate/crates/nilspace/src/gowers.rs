//! Gowers uniformity norms and inner products on Z/NZ, nilsequence
//! sampling, and correlations. Complex arithmetic is double precision with
//! a global 1e-9 tolerance; rational phases stay exact until the final
//! complex exponential.

use crate::error::{Error, Result};
use crate::group::{frac, Rat};
use crate::nil::{reduce, NilPoint, Nilmanifold};
use crate::poly::PolySequence;
use num::complex::Complex64;
use num::{BigInt, ToPrimitive};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Global tolerance for floating-point identities.
pub const TOL: f64 = 1e-9;

/// Largest k for which U^k averages are offered.
pub const MAX_GOWERS_K: u32 = 4;

/// Cost ceiling (inner-loop iterations) for exhaustive averages.
const EXHAUSTIVE_GUARD: f64 = 4e9;

/// e(t) = exp(2 pi i t).
pub fn e(t: f64) -> Complex64 {
    let arg = 2.0 * std::f64::consts::PI * t;
    Complex64::new(arg.cos(), arg.sin())
}

/// e(r) for an exact rational phase: reduced mod 1 exactly first.
pub fn e_rat(r: &Rat) -> Complex64 {
    let f = frac(r);
    e(f.numer().to_f64().unwrap_or(0.0) / f.denom().to_f64().unwrap_or(1.0))
}

/// A function Z/NZ -> C sampled at 0..N-1.
#[derive(Debug, Clone)]
pub struct CyclicFunction {
    pub modulus: usize,
    pub values: Vec<Complex64>,
}

impl CyclicFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("modulus must be positive".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Precondition("values must be finite".into()));
        }
        Ok(CyclicFunction { modulus: values.len(), values })
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        CyclicFunction::new(vec![c; n])
    }

    /// The additive character x -> e(freq x / N).
    pub fn character(n: usize, freq: i64) -> Result<Self> {
        CyclicFunction::new(
            (0..n).map(|x| e(freq as f64 * x as f64 / n as f64)).collect(),
        )
    }

    /// A random +-1 function from a seeded generator.
    pub fn random_pm1(n: usize, seed: u64) -> Result<Self> {
        let mut rng = StdRng::seed_from_u64(seed);
        CyclicFunction::new(
            (0..n)
                .map(|_| Complex64::new(if rng.gen_bool(0.5) { 1.0 } else { -1.0 }, 0.0))
                .collect(),
        )
    }

    pub fn get(&self, x: usize) -> Complex64 {
        self.values[x % self.modulus]
    }

    /// CSV serialization: header `n,re,im`, one row per residue, values in
    /// round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i, v.re, v.im));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line == "n,re,im" {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad CSV row `{line}`")));
            }
            let n: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index `{}`", fields[0])))?;
            let re: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad real part `{}`", fields[1])))?;
            let im: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad imaginary part `{}`", fields[2])))?;
            rows.push((n, Complex64::new(re, im)));
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty CSV".into()));
        }
        let n = rows.len();
        let mut values = vec![None; n];
        for (i, v) in rows {
            if i >= n || values[i].replace(v).is_some() {
                return Err(Error::Parse(format!("row indices must be a permutation of 0..{n}")));
            }
        }
        CyclicFunction::new(values.into_iter().map(Option::unwrap).collect())
    }
}

/// Deterministic fixed-tree (pairwise) summation.
fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

fn check_family(fs: &[&CyclicFunction]) -> Result<(u32, usize)> {
    let len = fs.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Precondition(format!(
            "need 2^k functions with k >= 1, got {len}"
        )));
    }
    let k = len.trailing_zeros();
    if k > MAX_GOWERS_K {
        return Err(Error::DimensionTooLarge { k, max: MAX_GOWERS_K });
    }
    let n = fs[0].modulus;
    for f in fs {
        if f.modulus != n {
            return Err(Error::ModulusMismatch(n, f.modulus));
        }
    }
    Ok((k, n))
}

/// The Gowers inner product E_{x,h} prod_w C^{|w|} f_w(x + w.h), computed
/// exhaustively. The x and h_k averages are collapsed into two
/// one-dimensional averages per (h_1..h_{k-1}), which is an exact identity
/// and keeps N = 256, k = 3 within the guard.
pub fn gowers_inner_product(fs: &[&CyclicFunction]) -> Result<Complex64> {
    let (k, n) = check_family(fs)?;
    let half = 1usize << (k - 1);
    let outer = (n as f64).powi(k as i32 - 1);
    if outer * (2 * half * n) as f64 > EXHAUSTIVE_GUARD {
        return Err(Error::SizeGuard(format!(
            "exhaustive U^{k} average at N={n} exceeds the guard; use the Monte Carlo mode"
        )));
    }
    let mut hs = vec![0usize; k as usize - 1];
    let mut offsets = vec![0usize; half];
    let mut outer_terms = Vec::with_capacity(outer as usize);
    let mut inner0 = vec![Complex64::new(0.0, 0.0); n];
    let mut inner1 = vec![Complex64::new(0.0, 0.0); n];
    loop {
        for (w, off) in offsets.iter_mut().enumerate() {
            *off = (0..k as usize - 1)
                .filter(|&i| w >> i & 1 == 1)
                .fold(0usize, |acc, i| (acc + hs[i]) % n);
        }
        // Lower half: functions f_w with w_k = 0, conjugated per |w|.
        for x in 0..n {
            let mut p0 = Complex64::new(1.0, 0.0);
            let mut p1 = Complex64::new(1.0, 0.0);
            for (w, &off) in offsets.iter().enumerate() {
                let v0 = fs[w].get(x + off);
                // Upper half carries one extra conjugation from the k-th
                // coordinate.
                let v1 = fs[w + half].get(x + off).conj();
                if (w as u32).count_ones() % 2 == 0 {
                    p0 *= v0;
                    p1 *= v1;
                } else {
                    p0 *= v0.conj();
                    p1 *= v1.conj();
                }
            }
            inner0[x] = p0;
            inner1[x] = p1;
        }
        let e0 = pairwise_sum(&inner0) / n as f64;
        let e1 = pairwise_sum(&inner1) / n as f64;
        outer_terms.push(e0 * e1);
        // Mixed-radix increment over h_1..h_{k-1}.
        let mut pos = 0;
        loop {
            if pos == hs.len() {
                break;
            }
            hs[pos] += 1;
            if hs[pos] < n {
                break;
            }
            hs[pos] = 0;
            pos += 1;
        }
        if pos == hs.len() {
            break;
        }
    }
    Ok(pairwise_sum(&outer_terms) / outer_terms.len() as f64)
}

/// Monte Carlo estimate of the Gowers inner product from uniformly sampled
/// (x, h_1..h_k) tuples.
pub fn gowers_inner_product_mc(
    fs: &[&CyclicFunction],
    samples: u64,
    seed: u64,
) -> Result<Complex64> {
    let (k, n) = check_family(fs)?;
    if samples == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let x = rng.gen_range(0..n);
        let hs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let mut p = Complex64::new(1.0, 0.0);
        for (w, f) in fs.iter().enumerate() {
            let off: usize = (0..k as usize)
                .filter(|&i| w >> i & 1 == 1)
                .fold(0usize, |acc, i| (acc + hs[i]) % n);
            let v = f.get(x + off);
            p *= if (w as u32).count_ones() % 2 == 0 { v } else { v.conj() };
        }
        terms.push(p);
    }
    Ok(pairwise_sum(&terms) / samples as f64)
}

fn root_of_average(avg: Complex64, k: u32) -> Result<f64> {
    if avg.im.abs() > TOL || avg.re < -TOL {
        return Err(Error::Internal(format!(
            "U^{k} average {avg} is not real nonnegative within tolerance"
        )));
    }
    Ok(avg.re.max(0.0).powf(1.0 / (1u64 << k) as f64))
}

/// The Gowers norm ||f||_{U^k}: the 2^k-th root of the inner product of f
/// with itself. The average is checked to be real and nonnegative within
/// the tolerance before the root.
pub fn gowers_norm(f: &CyclicFunction, k: u32) -> Result<f64> {
    if k < 1 || k > MAX_GOWERS_K {
        return Err(Error::DimensionTooLarge { k, max: MAX_GOWERS_K });
    }
    let fs = vec![f; 1 << k];
    root_of_average(gowers_inner_product(&fs)?, k)
}

/// Monte Carlo Gowers norm with explicit sample count and seed.
pub fn gowers_norm_mc(f: &CyclicFunction, k: u32, samples: u64, seed: u64) -> Result<f64> {
    if k < 1 || k > MAX_GOWERS_K {
        return Err(Error::DimensionTooLarge { k, max: MAX_GOWERS_K });
    }
    let fs = vec![f; 1 << k];
    let avg = gowers_inner_product_mc(&fs, samples, seed)?;
    // A sampled average may drift further from the real axis than the
    // deterministic tolerance; clamp instead of failing.
    Ok(avg.re.max(0.0).powf(1.0 / (1u64 << k) as f64))
}

/// The correlation <f, g> = E_x f(x) conj(g(x)).
pub fn correlation(f: &CyclicFunction, g: &CyclicFunction) -> Result<Complex64> {
    if f.modulus != g.modulus {
        return Err(Error::ModulusMismatch(f.modulus, g.modulus));
    }
    let terms: Vec<Complex64> =
        (0..f.modulus).map(|x| f.values[x] * g.values[x].conj()).collect();
    Ok(pairwise_sum(&terms) / f.modulus as f64)
}

/// Sample the nilsequence n -> F(p(n)) on 0..N-1. The sequence p is
/// genuinely defined on Z and reduced pointwise to the nilmanifold;
/// periodicity mod N is not assumed and not used.
pub fn nilsequence(
    parent: &Nilmanifold,
    big_f: &dyn Fn(&NilPoint) -> Complex64,
    p: &PolySequence,
    n: usize,
) -> Result<CyclicFunction> {
    if n == 0 {
        return Err(Error::Precondition("modulus must be positive".into()));
    }
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let g = p.eval(&BigInt::from(i))?;
        let point = reduce(&g, parent)?;
        values.push(big_f(&point));
    }
    CyclicFunction::new(values)
}

/// The vertical character F(heis point) = e(z), the standard test function
/// on the Heisenberg nilmanifold.
pub fn heis_vertical_character(p: &NilPoint) -> Complex64 {
    match &p.rep {
        crate::group::GroupElement::Heis { z, .. } => e_rat(z),
        _ => Complex64::new(1.0, 0.0),
    }
}

/// F(torus point) = e(t_1), the basic character on the torus.
pub fn torus_character(p: &NilPoint) -> Complex64 {
    match &p.rep {
        crate::group::GroupElement::Torus(a) if !a.is_empty() => e_rat(&a[0]),
        _ => Complex64::new(1.0, 0.0),
    }
}
