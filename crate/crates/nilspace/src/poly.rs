//! Polynomial sequences into filtered groups: exact evaluation, difference
//! quotients, the nested-derivative membership test, and the cube-image
//! characterization via Host-Kra membership.

use crate::error::{Error, Result};
use crate::group::{heis, FilteredGroup, GroupElement, Rat};
use crate::hk::{hk_membership, Configuration};
use crate::report::Report;
use num::{BigInt, BigRational, Zero};

/// A sequence Z -> G in closed form, evaluable exactly at any integer.
#[derive(Debug, Clone)]
pub enum PolySequence {
    /// n -> sum coeffs[i] n^i into the rational line.
    Rational { coeffs: Vec<Rat> },
    /// n -> sum coeffs[i] n^i into the integers.
    Integer { coeffs: Vec<BigInt> },
    /// n -> heis(a1 n + a0, b1 n + b0, c2 n^2 + c1 n + c0).
    Heisenberg { a1: Rat, a0: Rat, b1: Rat, b0: Rat, c2: Rat, c1: Rat, c0: Rat },
    /// The orbit n -> g^n x.
    Orbit { g: GroupElement, x: GroupElement },
    /// The difference quotient n -> base(n+h) base(n)^{-1}.
    Derived { base: Box<PolySequence>, h: BigInt },
}

fn horner_rat(coeffs: &[Rat], n: &BigInt) -> Rat {
    let n = BigRational::from(n.clone());
    coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * &n + c)
}

impl PolySequence {
    pub fn constant(g: GroupElement) -> PolySequence {
        PolySequence::Orbit { g: g.clone().inv().mul(&g).expect("same carrier"), x: g }
    }

    pub fn eval(&self, n: &BigInt) -> Result<GroupElement> {
        match self {
            PolySequence::Rational { coeffs } => Ok(GroupElement::rat1(horner_rat(coeffs, n))),
            PolySequence::Integer { coeffs } => {
                let v = coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * n + c);
                Ok(GroupElement::Int(v))
            }
            PolySequence::Heisenberg { a1, a0, b1, b0, c2, c1, c0 } => {
                let n = BigRational::from(n.clone());
                Ok(heis(a1 * &n + a0, b1 * &n + b0, c2 * &n * &n + c1 * &n + c0))
            }
            PolySequence::Orbit { g, x } => crate::group::group_pow(g, n)?.mul(x),
            PolySequence::Derived { base, h } => {
                let ahead = base.eval(&(n + h))?;
                let here = base.eval(n)?;
                ahead.mul(&here.inv())
            }
        }
    }
}

/// The difference quotient d_h f : n -> f(n+h) f(n)^{-1}.
pub fn derivative(f: &PolySequence, h: BigInt) -> PolySequence {
    PolySequence::Derived { base: Box::new(f.clone()), h }
}

/// The nested derivative d_{h_i} ... d_{h_1} f evaluated at x (h_1 applied
/// innermost).
pub fn nested_derivative(f: &PolySequence, hs: &[BigInt], x: &BigInt) -> Result<GroupElement> {
    let mut seq = f.clone();
    for h in hs {
        seq = derivative(&seq, h.clone());
    }
    seq.eval(x)
}

/// Test the polynomial-sequence condition on a finite window: for every
/// tuple (x, h_1, ..., h_i) the nested derivative must lie in G_i. Depths
/// beyond the filtration degree land in G_{s+1} = {id}, so windows with
/// depth up to s+1 decide the condition on the sampled points.
pub fn is_polynomial_sequence(
    f: &PolySequence,
    g: &FilteredGroup,
    window: &[(BigInt, Vec<BigInt>)],
) -> Result<(bool, Report)> {
    let mut report = Report::new("polynomial-sequence");
    for (x, hs) in window {
        if hs.is_empty() || hs.len() as u32 > g.degree + 1 {
            return Err(Error::Precondition(format!(
                "window depth {} outside 1..={}",
                hs.len(),
                g.degree + 1
            )));
        }
        let base = f.eval(x)?;
        if !g.contains(&base) {
            report.push("outside-carrier", format!("f({x}) lies outside the carrier"));
            continue;
        }
        let value = nested_derivative(f, hs, x)?;
        if !g.filtration_member(&value, hs.len() as u32) {
            report.push(
                "derivative-outside-filtration",
                format!(
                    "depth-{} derivative at x={x}, h={:?} is not in G_{}",
                    hs.len(),
                    hs.iter().map(BigInt::to_string).collect::<Vec<_>>(),
                    hs.len()
                ),
            );
        }
    }
    report.metric("window", window.len());
    let ok = report.passed();
    Ok((ok, report))
}

/// The cube-image characterization: for each sample (x, h_1..h_k) the
/// configuration w -> f(x + sum h_i w_i) must be a Host-Kra cube-group
/// member.
pub fn poly_cube_check(
    f: &PolySequence,
    g: &FilteredGroup,
    k: u32,
    samples: &[(BigInt, Vec<BigInt>)],
) -> Result<(bool, Report)> {
    let mut report = Report::new(format!("poly-cube.{k}"));
    for (x, hs) in samples {
        if hs.len() as u32 != k {
            return Err(Error::DimensionMismatch { expected: k, got: hs.len() as u32 });
        }
        let mut values = Vec::with_capacity(1 << k);
        for w in 0..1u32 << k {
            let mut arg = x.clone();
            for (i, h) in hs.iter().enumerate() {
                if w >> i & 1 == 1 {
                    arg += h;
                }
            }
            values.push(f.eval(&arg)?);
        }
        let config = Configuration::new(k, values)?;
        let verdict = hk_membership(&config, g)?;
        if !verdict.is_member {
            report.push(
                "not-a-cube",
                format!(
                    "configuration at x={x}, h={:?} is not a cube-group member",
                    hs.iter().map(BigInt::to_string).collect::<Vec<_>>()
                ),
            );
        }
    }
    report.metric("samples", samples.len());
    let ok = report.passed();
    Ok((ok, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::rat;
    use num::One;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn bi(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn constant_sequence_has_identity_derivative() {
        let f = PolySequence::constant(heis(rat(1, 3), rat(2, 5), rat(7, 2)));
        let d = derivative(&f, bi(5));
        for n in -3..=3 {
            assert!(d.eval(&bi(n)).unwrap().is_identity());
        }
    }

    #[test]
    fn linear_rational_derivative_is_constant_ah() {
        let a = rat(3, 7);
        let f = PolySequence::Rational { coeffs: vec![rat(1, 2), a.clone()] };
        let d = derivative(&f, bi(4));
        let expected = GroupElement::rat1(a * rat(4, 1));
        for n in -5..=5 {
            assert_eq!(d.eval(&bi(n)).unwrap(), expected);
        }
    }

    #[test]
    fn heisenberg_x_translation_has_constant_derivative() {
        let f = PolySequence::Heisenberg {
            a1: Rat::one(),
            a0: Rat::zero(),
            b1: Rat::zero(),
            b0: Rat::zero(),
            c2: Rat::zero(),
            c1: Rat::zero(),
            c0: Rat::zero(),
        };
        let d = derivative(&f, bi(3));
        for n in -4..=4 {
            assert_eq!(d.eval(&bi(n)).unwrap(), heis(rat(3, 1), Rat::zero(), Rat::zero()));
        }
    }

    fn random_window(rng: &mut StdRng, max_depth: u32, len: usize) -> Vec<(BigInt, Vec<BigInt>)> {
        (0..len)
            .map(|_| {
                let depth = rng.gen_range(1..=max_depth) as usize;
                (
                    bi(rng.gen_range(-8..=8)),
                    (0..depth).map(|_| bi(rng.gen_range(-5..=5))).collect(),
                )
            })
            .collect()
    }

    fn random_heis_sequence(rng: &mut StdRng) -> PolySequence {
        let mut r = || rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        PolySequence::Heisenberg {
            a1: r(),
            a0: r(),
            b1: r(),
            b0: r(),
            c2: r(),
            c1: r(),
            c0: r(),
        }
    }

    #[test]
    fn heisenberg_closed_form_is_polynomial() {
        let g = FilteredGroup::heisenberg();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_heis_sequence(&mut rng);
            let window = random_window(&mut rng, g.degree + 1, 25);
            let (ok, report) = is_polynomial_sequence(&f, &g, &window).unwrap();
            assert!(ok, "{}", report.render_text());
        }
    }

    #[test]
    fn quadratic_fails_degree_one_filtration() {
        let g = FilteredGroup::rationals(1, 1);
        let f = PolySequence::Rational { coeffs: vec![Rat::zero(), Rat::zero(), rat(1, 3)] };
        let window = vec![(bi(0), vec![bi(1), bi(1)])];
        let (ok, report) = is_polynomial_sequence(&f, &g, &window).unwrap();
        assert!(!ok);
        assert_eq!(report.items[0].kind, "derivative-outside-filtration");
    }

    #[test]
    fn orbits_are_polynomial() {
        let g = FilteredGroup::heisenberg();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let f = PolySequence::Orbit {
                g: crate::sample::random_filtration_element(&g, 1, &mut rng),
                x: crate::sample::random_filtration_element(&g, 0, &mut rng),
            };
            let window = random_window(&mut rng, g.degree + 1, 15);
            let (ok, report) = is_polynomial_sequence(&f, &g, &window).unwrap();
            assert!(ok, "{}", report.render_text());
        }
    }

    #[test]
    fn cube_check_passes_for_heisenberg_polynomials() {
        let g = FilteredGroup::heisenberg();
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..5 {
            let f = random_heis_sequence(&mut rng);
            for k in 1..=3u32 {
                let samples: Vec<_> = (0..10)
                    .map(|_| {
                        (
                            bi(rng.gen_range(-6..=6)),
                            (0..k).map(|_| bi(rng.gen_range(-4..=4))).collect(),
                        )
                    })
                    .collect();
                let (ok, report) = poly_cube_check(&f, &g, k, &samples).unwrap();
                assert!(ok, "{}", report.render_text());
            }
        }
    }

    #[test]
    fn cube_check_rejects_quadratic_against_degree_one() {
        let g = FilteredGroup::rationals(1, 1);
        let f = PolySequence::Rational { coeffs: vec![Rat::zero(), Rat::zero(), rat(1, 3)] };
        let samples = vec![(bi(0), vec![bi(1), bi(2)])];
        let (ok, _) = poly_cube_check(&f, &g, 2, &samples).unwrap();
        assert!(!ok);
    }

    #[test]
    fn integer_linear_sequences_give_parallelepipeds() {
        let g = FilteredGroup::integers();
        let f = PolySequence::Integer { coeffs: vec![bi(2), bi(3)] };
        let samples = vec![(bi(1), vec![bi(2), bi(5), bi(-1)])];
        let (ok, _) = poly_cube_check(&f, &g, 3, &samples).unwrap();
        assert!(ok);
        // The configuration is exactly x + w.h componentwise.
        let (x, hs) = &samples[0];
        for w in 0..8u32 {
            let mut arg = x.clone();
            for (i, h) in hs.iter().enumerate() {
                if w >> i & 1 == 1 {
                    arg += h;
                }
            }
            assert_eq!(f.eval(&arg).unwrap(), GroupElement::Int(&arg * 3 + 2));
        }
    }
}
