//! Exact-arithmetic filtered groups: the integers, finite abelian groups,
//! rational vector groups, the torus Q/Z, and the Heisenberg group over Q
//! with its integer lattice.
//!
//! A filtration of degree s is a chain G = G_0 ⊇ G_1 ⊇ … ⊇ G_{s+1} = {id}
//! with [G_i, G_j] ⊆ G_{i+j}; it is proper when G_0 = G_1. Filtrations are
//! represented as membership predicates: every downstream use (cube-group
//! membership, corner completion) only queries membership.

use crate::error::{Error, Result};
use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

pub type Rat = BigRational;

/// Exact fractional part: x - floor(x), always in [0,1).
pub fn frac(x: &Rat) -> Rat {
    x - x.floor()
}

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    let den: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rat::new(num, den))
}

pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A residue with its modulus, canonically reduced to [0, n).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModComponent {
    pub residue: BigInt,
    pub modulus: BigInt,
}

impl ModComponent {
    pub fn new(residue: BigInt, modulus: BigInt) -> Self {
        assert!(modulus.sign() == Sign::Plus);
        let residue = residue.rem_euclid(&modulus);
        ModComponent { residue, modulus }
    }
}

trait RemEuclid {
    fn rem_euclid(&self, m: &BigInt) -> BigInt;
}

impl RemEuclid for BigInt {
    fn rem_euclid(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

/// An element of one of the supported carriers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Int(BigInt),
    /// Element of a finite abelian group ∏ Z/n_i.
    Mod(Vec<ModComponent>),
    /// Element of Q^d.
    Rat(Vec<Rat>),
    /// Element of (Q/Z)^d; every component kept in [0,1).
    Torus(Vec<Rat>),
    /// Upper unitriangular 3x3 matrix over Q, written (x, y, z) with
    /// multiplication (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy').
    Heis { x: Rat, y: Rat, z: Rat },
    Product(Box<GroupElement>, Box<GroupElement>),
}

pub fn heis(x: Rat, y: Rat, z: Rat) -> GroupElement {
    GroupElement::Heis { x, y, z }
}

impl GroupElement {
    pub fn int(n: i64) -> Self {
        GroupElement::Int(BigInt::from(n))
    }

    pub fn rat1(x: Rat) -> Self {
        GroupElement::Rat(vec![x])
    }

    pub fn torus1(x: Rat) -> Self {
        GroupElement::Torus(vec![frac(&x)])
    }

    pub fn modn(r: i64, n: i64) -> Self {
        GroupElement::Mod(vec![ModComponent::new(BigInt::from(r), BigInt::from(n))])
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        use GroupElement::*;
        Ok(match (self, other) {
            (Int(a), Int(b)) => Int(a + b),
            (Mod(a), Mod(b)) => {
                if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.modulus != y.modulus) {
                    return Err(Error::NotInCarrier("modulus mismatch in product".into()));
                }
                Mod(a.iter()
                    .zip(b)
                    .map(|(x, y)| ModComponent::new(&x.residue + &y.residue, x.modulus.clone()))
                    .collect())
            }
            (Rat(a), Rat(b)) if a.len() == b.len() => {
                Rat(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Torus(a), Torus(b)) if a.len() == b.len() => {
                Torus(a.iter().zip(b).map(|(x, y)| frac(&(x + y))).collect())
            }
            (Heis { x, y, z }, Heis { x: x2, y: y2, z: z2 }) => Heis {
                x: x + x2,
                y: y + y2,
                z: z + z2 + x * y2,
            },
            (Product(a1, a2), Product(b1, b2)) => {
                Product(Box::new(a1.mul(b1)?), Box::new(a2.mul(b2)?))
            }
            _ => return Err(Error::NotInCarrier("element shapes do not match".into())),
        })
    }

    pub fn inv(&self) -> GroupElement {
        use GroupElement::*;
        match self {
            Int(a) => Int(-a),
            Mod(a) => Mod(a
                .iter()
                .map(|c| ModComponent::new(-&c.residue, c.modulus.clone()))
                .collect()),
            Rat(a) => Rat(a.iter().map(|x| -x).collect()),
            Torus(a) => Torus(a.iter().map(|x| frac(&(-x))).collect()),
            Heis { x, y, z } => Heis { x: -x, y: -y, z: x * y - z },
            Product(a, b) => Product(Box::new(a.inv()), Box::new(b.inv())),
        }
    }

    pub fn is_identity(&self) -> bool {
        use GroupElement::*;
        match self {
            Int(a) => a.is_zero(),
            Mod(a) => a.iter().all(|c| c.residue.is_zero()),
            Rat(a) => a.iter().all(|x| x.is_zero()),
            Torus(a) => a.iter().all(|x| x.is_zero()),
            Heis { x, y, z } => x.is_zero() && y.is_zero() && z.is_zero(),
            Product(a, b) => a.is_identity() && b.is_identity(),
        }
    }

    /// [g, h] = g h g^{-1} h^{-1}.
    pub fn commutator(&self, other: &GroupElement) -> Result<GroupElement> {
        self.mul(other)?.mul(&self.inv())?.mul(&other.inv())
    }

    /// Text serialization; bit-exact round-trip with [`parse_element`].
    pub fn serialize(&self) -> Result<String> {
        use GroupElement::*;
        Ok(match self {
            Int(a) => format!("int:{a}"),
            Mod(a) => format!(
                "mod:{}",
                a.iter()
                    .map(|c| format!("{}/{}", c.residue, c.modulus))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Rat(a) => format!("rat:{}", a.iter().map(fmt_rat).collect::<Vec<_>>().join(",")),
            Torus(a) => format!("torus:{}", a.iter().map(fmt_rat).collect::<Vec<_>>().join(",")),
            Heis { x, y, z } => format!("heis:{},{},{}", fmt_rat(x), fmt_rat(y), fmt_rat(z)),
            Product(..) => {
                return Err(Error::Parse("product elements have no text form".into()))
            }
        })
    }
}

pub fn parse_element(s: &str) -> Result<GroupElement> {
    let s = s.trim();
    let (tag, body) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("missing tag in element `{s}`")))?;
    match tag {
        "int" => Ok(GroupElement::Int(
            body.trim().parse().map_err(|_| Error::Parse(format!("bad integer `{body}`")))?,
        )),
        "mod" => {
            let comps = body
                .split(',')
                .map(|p| {
                    let (r, n) = p
                        .split_once('/')
                        .ok_or_else(|| Error::Parse(format!("bad residue/modulus `{p}`")))?;
                    let r: BigInt =
                        r.trim().parse().map_err(|_| Error::Parse(format!("bad residue `{r}`")))?;
                    let n: BigInt =
                        n.trim().parse().map_err(|_| Error::Parse(format!("bad modulus `{n}`")))?;
                    if !n.is_positive() {
                        return Err(Error::Parse(format!("modulus must be positive in `{p}`")));
                    }
                    Ok(ModComponent::new(r, n))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GroupElement::Mod(comps))
        }
        "rat" => Ok(GroupElement::Rat(
            body.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?,
        )),
        "torus" => {
            let xs = body.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?;
            Ok(GroupElement::Torus(xs.iter().map(frac).collect()))
        }
        "heis" => {
            let xs = body.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?;
            if xs.len() != 3 {
                return Err(Error::Parse(format!("heis takes 3 components, got {}", xs.len())));
            }
            Ok(heis(xs[0].clone(), xs[1].clone(), xs[2].clone()))
        }
        _ => Err(Error::Parse(format!("unknown element tag `{tag}`"))),
    }
}

/// g^n by binary exponentiation; g^0 = id, negative n through the inverse.
pub fn group_pow(g: &GroupElement, n: &BigInt) -> Result<GroupElement> {
    if n.is_negative() {
        return group_pow(&g.inv(), &-n);
    }
    let mut acc: Option<GroupElement> = None;
    let mut base = g.clone();
    let mut n = n.clone();
    while n.is_positive() {
        if (&n % 2u32).is_one() {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a.mul(&base)?,
            });
        }
        n >>= 1;
        if n.is_positive() {
            base = base.mul(&base)?;
        }
    }
    Ok(acc.unwrap_or_else(|| identity_like(g)))
}

fn identity_like(g: &GroupElement) -> GroupElement {
    match g {
        GroupElement::Int(_) => GroupElement::Int(BigInt::zero()),
        GroupElement::Mod(a) => GroupElement::Mod(
            a.iter().map(|c| ModComponent::new(BigInt::zero(), c.modulus.clone())).collect(),
        ),
        GroupElement::Rat(a) => GroupElement::Rat(vec![Rat::zero(); a.len()]),
        GroupElement::Torus(a) => GroupElement::Torus(vec![Rat::zero(); a.len()]),
        GroupElement::Heis { .. } => heis(Rat::zero(), Rat::zero(), Rat::zero()),
        GroupElement::Product(a, b) => {
            GroupElement::Product(Box::new(identity_like(a)), Box::new(identity_like(b)))
        }
    }
}

/// Which carrier a group lives on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    Int,
    Mod(Vec<BigInt>),
    Rat(usize),
    Torus(usize),
    Heis,
    Product(Box<Carrier>, Box<Carrier>),
}

#[derive(Clone)]
enum FiltKind {
    /// G_i = G for i ≤ degree, then {id}: the degree-s filtration on an
    /// abelian carrier, or Z/Q with the standard degree-1 chain.
    Full,
    /// Q^2 with G_2 = {0} x Q (degree 2).
    RatSplit,
    /// Heisenberg lower central series: G_2 = center (degree 2).
    HeisLcs,
    /// Product filtration: componentwise membership.
    Product(Box<FilteredGroup>, Box<FilteredGroup>),
    /// Arbitrary predicate, used to exercise the axiom checker on broken
    /// filtrations.
    Custom(Arc<dyn Fn(&GroupElement, u32) -> bool + Send + Sync>),
}

/// A group together with a degree-s filtration given as a membership
/// predicate.
#[derive(Clone)]
pub struct FilteredGroup {
    pub id: String,
    pub carrier: Carrier,
    pub degree: u32,
    pub proper: bool,
    filt: FiltKind,
}

impl fmt::Debug for FilteredGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilteredGroup")
            .field("id", &self.id)
            .field("carrier", &self.carrier)
            .field("degree", &self.degree)
            .field("proper", &self.proper)
            .finish()
    }
}

impl FilteredGroup {
    /// Z with Z_0 = Z_1 = Z.
    pub fn integers() -> Self {
        FilteredGroup { id: "z".into(), carrier: Carrier::Int, degree: 1, proper: true, filt: FiltKind::Full }
    }

    /// Q^dim with the degree-s filtration G_0 = … = G_s = Q^dim.
    pub fn rationals(dim: usize, s: u32) -> Self {
        assert!(s >= 1);
        let id = if dim == 1 { format!("q{s}") } else { format!("q{dim}d{s}") };
        FilteredGroup { id, carrier: Carrier::Rat(dim), degree: s, proper: true, filt: FiltKind::Full }
    }

    /// Q^2 with G_0 = G_1 = Q^2, G_2 = {0} x Q.
    pub fn rationals_split() -> Self {
        FilteredGroup {
            id: "qq2".into(),
            carrier: Carrier::Rat(2),
            degree: 2,
            proper: true,
            filt: FiltKind::RatSplit,
        }
    }

    /// Heisenberg group over Q with its lower central series.
    pub fn heisenberg() -> Self {
        FilteredGroup { id: "heis".into(), carrier: Carrier::Heis, degree: 2, proper: true, filt: FiltKind::HeisLcs }
    }

    /// (Q/Z)^dim with the degree-s filtration.
    pub fn torus(dim: usize, s: u32) -> Self {
        assert!(s >= 1);
        let id = if dim == 1 { format!("t{s}") } else { format!("t{dim}d{s}") };
        FilteredGroup { id, carrier: Carrier::Torus(dim), degree: s, proper: true, filt: FiltKind::Full }
    }

    /// The degree-s filtration on the finite abelian group ∏ Z/n_i.
    pub fn ds(moduli: &[u64], s: u32) -> Self {
        assert!(s >= 1 && !moduli.is_empty());
        let id = format!(
            "d{s}_z{}",
            moduli.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("x")
        );
        FilteredGroup {
            id,
            carrier: Carrier::Mod(moduli.iter().map(|&n| BigInt::from(n)).collect()),
            degree: s,
            proper: true,
            filt: FiltKind::Full,
        }
    }

    pub fn product(a: FilteredGroup, b: FilteredGroup) -> Self {
        let id = format!("{}*{}", a.id, b.id);
        let degree = a.degree.max(b.degree);
        let proper = a.proper && b.proper;
        let carrier = Carrier::Product(Box::new(a.carrier.clone()), Box::new(b.carrier.clone()));
        FilteredGroup { id, carrier, degree, proper, filt: FiltKind::Product(Box::new(a), Box::new(b)) }
    }

    /// A group with an arbitrary filtration predicate (possibly invalid);
    /// only useful as input to [`check_filtration_axioms`].
    pub fn custom(
        id: &str,
        carrier: Carrier,
        degree: u32,
        proper: bool,
        filt: Arc<dyn Fn(&GroupElement, u32) -> bool + Send + Sync>,
    ) -> Self {
        FilteredGroup { id: id.into(), carrier, degree, proper, filt: FiltKind::Custom(filt) }
    }

    pub fn identity(&self) -> GroupElement {
        fn id_of(c: &Carrier) -> GroupElement {
            match c {
                Carrier::Int => GroupElement::Int(BigInt::zero()),
                Carrier::Mod(mods) => GroupElement::Mod(
                    mods.iter().map(|n| ModComponent::new(BigInt::zero(), n.clone())).collect(),
                ),
                Carrier::Rat(d) => GroupElement::Rat(vec![Rat::zero(); *d]),
                Carrier::Torus(d) => GroupElement::Torus(vec![Rat::zero(); *d]),
                Carrier::Heis => heis(Rat::zero(), Rat::zero(), Rat::zero()),
                Carrier::Product(a, b) => {
                    GroupElement::Product(Box::new(id_of(a)), Box::new(id_of(b)))
                }
            }
        }
        id_of(&self.carrier)
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        fn fits(c: &Carrier, g: &GroupElement) -> bool {
            match (c, g) {
                (Carrier::Int, GroupElement::Int(_)) => true,
                (Carrier::Mod(mods), GroupElement::Mod(a)) => {
                    mods.len() == a.len() && mods.iter().zip(a).all(|(n, c)| *n == c.modulus)
                }
                (Carrier::Rat(d), GroupElement::Rat(a)) => a.len() == *d,
                (Carrier::Torus(d), GroupElement::Torus(a)) => a.len() == *d,
                (Carrier::Heis, GroupElement::Heis { .. }) => true,
                (Carrier::Product(c1, c2), GroupElement::Product(a, b)) => {
                    fits(c1, a) && fits(c2, b)
                }
                _ => false,
            }
        }
        fits(&self.carrier, g)
    }

    /// Is g a member of G_i? Levels beyond degree are the trivial subgroup;
    /// level 0 (and 1 for proper filtrations) is the whole group.
    pub fn filtration_member(&self, g: &GroupElement, i: u32) -> bool {
        if !self.contains(g) {
            return false;
        }
        match &self.filt {
            FiltKind::Full => i <= self.degree || g.is_identity(),
            FiltKind::RatSplit => {
                if i <= 1 {
                    true
                } else if i == 2 {
                    matches!(g, GroupElement::Rat(a) if a[0].is_zero())
                } else {
                    g.is_identity()
                }
            }
            FiltKind::HeisLcs => {
                if i <= 1 {
                    true
                } else if i == 2 {
                    matches!(g, GroupElement::Heis { x, y, .. } if x.is_zero() && y.is_zero())
                } else {
                    g.is_identity()
                }
            }
            FiltKind::Product(ga, gb) => match g {
                GroupElement::Product(a, b) => {
                    ga.filtration_member(a, i) && gb.filtration_member(b, i)
                }
                _ => false,
            },
            FiltKind::Custom(p) => p(g, i),
        }
    }

    /// Draw a random element of G_level with small coordinates. Used to
    /// build random cube-group members and test fixtures.
    pub fn sample_filtration_element<R: rand::Rng>(&self, level: u32, rng: &mut R) -> GroupElement {
        fn small_rat<R: rand::Rng>(rng: &mut R) -> Rat {
            rat(rng.gen_range(-12i64..=12), rng.gen_range(1i64..=8))
        }
        fn carrier_element<R: rand::Rng>(c: &Carrier, rng: &mut R) -> GroupElement {
            match c {
                Carrier::Int => GroupElement::Int(BigInt::from(rng.gen_range(-20i64..=20))),
                Carrier::Mod(mods) => GroupElement::Mod(
                    mods.iter()
                        .map(|n| {
                            let n_u: u64 = n.try_into().expect("small modulus");
                            ModComponent::new(BigInt::from(rng.gen_range(0..n_u)), n.clone())
                        })
                        .collect(),
                ),
                Carrier::Rat(d) => GroupElement::Rat((0..*d).map(|_| small_rat(rng)).collect()),
                Carrier::Torus(d) => {
                    GroupElement::Torus((0..*d).map(|_| frac(&small_rat(rng))).collect())
                }
                Carrier::Heis => heis(small_rat(rng), small_rat(rng), small_rat(rng)),
                Carrier::Product(a, b) => GroupElement::Product(
                    Box::new(carrier_element(a, rng)),
                    Box::new(carrier_element(b, rng)),
                ),
            }
        }
        match &self.filt {
            FiltKind::Full => {
                if level <= self.degree {
                    carrier_element(&self.carrier, rng)
                } else {
                    self.identity()
                }
            }
            FiltKind::RatSplit => {
                if level <= 1 {
                    carrier_element(&self.carrier, rng)
                } else if level == 2 {
                    GroupElement::Rat(vec![Rat::zero(), small_rat(rng)])
                } else {
                    self.identity()
                }
            }
            FiltKind::HeisLcs => {
                if level <= 1 {
                    carrier_element(&self.carrier, rng)
                } else if level == 2 {
                    heis(Rat::zero(), Rat::zero(), small_rat(rng))
                } else {
                    self.identity()
                }
            }
            FiltKind::Product(a, b) => GroupElement::Product(
                Box::new(a.sample_filtration_element(level, rng)),
                Box::new(b.sample_filtration_element(level, rng)),
            ),
            FiltKind::Custom(_) => self.identity(),
        }
    }

    /// All elements of a finite carrier, in a fixed counting order; `None`
    /// for infinite carriers.
    pub fn enumerate(&self) -> Option<Vec<GroupElement>> {
        fn enum_carrier(c: &Carrier) -> Option<Vec<GroupElement>> {
            match c {
                Carrier::Mod(mods) => {
                    let mut out = vec![Vec::new()];
                    for n in mods {
                        let n_u: u64 = n.try_into().ok()?;
                        let mut next = Vec::new();
                        for prefix in &out {
                            for r in 0..n_u {
                                let mut p: Vec<ModComponent> = prefix.clone();
                                p.push(ModComponent::new(BigInt::from(r), n.clone()));
                                next.push(p);
                            }
                        }
                        out = next;
                    }
                    Some(out.into_iter().map(GroupElement::Mod).collect())
                }
                Carrier::Product(a, b) => {
                    let ea = enum_carrier(a)?;
                    let eb = enum_carrier(b)?;
                    let mut out = Vec::with_capacity(ea.len() * eb.len());
                    for x in &ea {
                        for y in &eb {
                            out.push(GroupElement::Product(Box::new(x.clone()), Box::new(y.clone())));
                        }
                    }
                    Some(out)
                }
                _ => None,
            }
        }
        enum_carrier(&self.carrier)
    }
}

/// The standard catalog: Z; Q of degree 1 and 2; Q^2 with G_2 = {0} x Q;
/// the Heisenberg group; Q/Z of degree 1 and 2; a few small degree-s
/// finite abelian groups.
pub fn make_standard_groups() -> Vec<FilteredGroup> {
    vec![
        FilteredGroup::integers(),
        FilteredGroup::rationals(1, 1),
        FilteredGroup::rationals(1, 2),
        FilteredGroup::rationals_split(),
        FilteredGroup::heisenberg(),
        FilteredGroup::torus(1, 1),
        FilteredGroup::torus(1, 2),
        FilteredGroup::ds(&[2], 1),
        FilteredGroup::ds(&[3], 1),
        FilteredGroup::ds(&[4], 1),
        FilteredGroup::ds(&[3], 2),
    ]
}

/// Look up a group id as used by the command line: `z`, `q1`, `q2`, `qq2`,
/// `heis`, `t1`, `t2`, or `zN` for Z/N with the degree-1 filtration
/// (`dS_zN` for other degrees).
pub fn lookup_group(id: &str) -> Result<FilteredGroup> {
    match id {
        "z" => return Ok(FilteredGroup::integers()),
        "q1" => return Ok(FilteredGroup::rationals(1, 1)),
        "q2" => return Ok(FilteredGroup::rationals(1, 2)),
        "qq2" => return Ok(FilteredGroup::rationals_split()),
        "heis" => return Ok(FilteredGroup::heisenberg()),
        "t1" => return Ok(FilteredGroup::torus(1, 1)),
        "t2" => return Ok(FilteredGroup::torus(1, 2)),
        _ => {}
    }
    if let Some(rest) = id.strip_prefix('z') {
        if let Ok(n) = rest.parse::<u64>() {
            if n >= 2 {
                return Ok(FilteredGroup::ds(&[n], 1));
            }
        }
    }
    // dS_zN or dS_zNxM…
    if let Some(rest) = id.strip_prefix('d') {
        if let Some((s, mods)) = rest.split_once("_z") {
            if let (Ok(s), Ok(moduli)) = (
                s.parse::<u32>(),
                mods.split('x').map(|m| m.parse::<u64>()).collect::<std::result::Result<Vec<_>, _>>(),
            ) {
                if s >= 1 && !moduli.is_empty() && moduli.iter().all(|&n| n >= 2) {
                    return Ok(FilteredGroup::ds(&moduli, s));
                }
            }
        }
    }
    Err(Error::UnknownGroup(id.into()))
}

/// A single commutator-axiom violation found by [`check_filtration_axioms`].
#[derive(Debug, Clone)]
pub enum FiltrationViolation {
    Commutator { g: GroupElement, h: GroupElement, i: u32, j: u32 },
    Monotonicity { g: GroupElement, i: u32 },
    TopNotTrivial { g: GroupElement },
}

impl fmt::Display for FiltrationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiltrationViolation::Commutator { g, h, i, j } => write!(
                f,
                "[{:?}, {:?}] not in G_{} (g in G_{i}, h in G_{j})",
                g,
                h,
                i + j
            ),
            FiltrationViolation::Monotonicity { g, i } => {
                write!(f, "{g:?} in G_{} but not in G_{i}", i + 1)
            }
            FiltrationViolation::TopNotTrivial { g } => {
                write!(f, "{g:?} in G_{{s+1}} but is not the identity")
            }
        }
    }
}

/// Checks the filtration axioms over a witness list (exhaustive when the
/// carrier is finite and `witnesses` is empty): monotonicity, triviality of
/// G_{s+1}, and [G_i, G_j] ⊆ G_{i+j}. Violations are reported, not raised.
pub fn check_filtration_axioms(
    g: &FilteredGroup,
    witnesses: &[GroupElement],
) -> Vec<FiltrationViolation> {
    let elems: Vec<GroupElement> = if witnesses.is_empty() {
        g.enumerate().unwrap_or_default()
    } else {
        witnesses.to_vec()
    };
    let s = g.degree;
    let mut out = Vec::new();
    for a in &elems {
        for i in 0..=s + 1 {
            if g.filtration_member(a, i + 1) && !g.filtration_member(a, i) {
                out.push(FiltrationViolation::Monotonicity { g: a.clone(), i });
            }
        }
        if g.filtration_member(a, s + 1) && !a.is_identity() {
            out.push(FiltrationViolation::TopNotTrivial { g: a.clone() });
        }
    }
    for a in &elems {
        for b in &elems {
            let comm = match a.commutator(b) {
                Ok(c) => c,
                Err(_) => continue,
            };
            for i in 0..=s + 1 {
                for j in 0..=s + 1 {
                    if g.filtration_member(a, i) && g.filtration_member(b, j) {
                        let level = (i + j).min(s + 1);
                        if !g.filtration_member(&comm, level) {
                            out.push(FiltrationViolation::Commutator {
                                g: a.clone(),
                                h: b.clone(),
                                i,
                                j,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    pub fn rand_rat(rng: &mut StdRng) -> Rat {
        let p = rng.gen_range(-20i64..=20);
        let q = rng.gen_range(1i64..=12);
        rat(p, q)
    }

    pub fn rand_heis(rng: &mut StdRng) -> GroupElement {
        heis(rand_rat(rng), rand_rat(rng), rand_rat(rng))
    }

    #[test]
    fn heisenberg_filtration_levels() {
        let g = FilteredGroup::heisenberg();
        assert!(g.filtration_member(&heis(rat(0, 1), rat(0, 1), rat(1, 2)), 2));
        assert!(!g.filtration_member(&heis(rat(1, 1), rat(0, 1), rat(0, 1)), 2));
        assert!(!g.filtration_member(&heis(rat(0, 1), rat(0, 1), rat(1, 2)), 3));
    }

    #[test]
    fn ds_filtration_levels() {
        let g = FilteredGroup::ds(&[3], 2);
        let one = GroupElement::modn(1, 3);
        assert!(g.filtration_member(&one, 2));
        assert!(!g.filtration_member(&one, 3));
        assert!(g.proper);
        assert_eq!(g.degree, 2);
    }

    #[test]
    fn heisenberg_group_axioms_random() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = rand_heis(&mut rng);
            let b = rand_heis(&mut rng);
            let c = rand_heis(&mut rng);
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            assert_eq!(ab_c, a_bc);
            assert!(a.mul(&a.inv()).unwrap().is_identity());
            let id = FilteredGroup::heisenberg().identity();
            assert_eq!(a.mul(&id).unwrap(), a);
        }
    }

    #[test]
    fn heisenberg_commutator_formula() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..200 {
            let (x, y, x2, y2) =
                (rand_rat(&mut rng), rand_rat(&mut rng), rand_rat(&mut rng), rand_rat(&mut rng));
            let a = heis(x.clone(), y.clone(), rand_rat(&mut rng));
            let b = heis(x2.clone(), y2.clone(), rand_rat(&mut rng));
            let expect = heis(Rat::zero(), Rat::zero(), &x * &y2 - &x2 * &y);
            assert_eq!(a.commutator(&b).unwrap(), expect);
        }
    }

    #[test]
    fn group_pow_heisenberg_closed_form() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let a = rand_rat(&mut rng);
            let b = rand_rat(&mut rng);
            let c = rand_rat(&mut rng);
            let g = heis(a.clone(), b.clone(), c.clone());
            let mut acc = FilteredGroup::heisenberg().identity();
            for n in 0..=50i64 {
                // closed form: (na, nb, nc + n(n-1)/2 * ab)
                let nn = rat(n, 1);
                let binom = rat(n * (n - 1) / 2, 1);
                let expect = heis(&nn * &a, &nn * &b, &nn * &c + &binom * &a * &b);
                assert_eq!(group_pow(&g, &BigInt::from(n)).unwrap(), expect, "n={n}");
                assert_eq!(acc, expect);
                acc = acc.mul(&g).unwrap();
            }
        }
    }

    #[test]
    fn group_pow_basics() {
        let g = GroupElement::modn(1, 5);
        assert_eq!(group_pow(&g, &BigInt::from(7)).unwrap(), GroupElement::modn(2, 5));
        let h = heis(rat(1, 2), rat(1, 3), rat(0, 1));
        assert!(group_pow(&h, &BigInt::from(0)).unwrap().is_identity());
        // negative exponent
        assert_eq!(group_pow(&h, &BigInt::from(-3)).unwrap(), group_pow(&h.inv(), &BigInt::from(3)).unwrap());
    }

    #[test]
    fn filtration_axioms_catalog_clean() {
        let mut rng = StdRng::seed_from_u64(4);
        for g in make_standard_groups() {
            let witnesses: Vec<GroupElement> = match &g.carrier {
                Carrier::Int => (0..8).map(|i| GroupElement::int(i * 3 - 10)).collect(),
                Carrier::Rat(1) => (0..8).map(|_| GroupElement::rat1(rand_rat(&mut rng))).collect(),
                Carrier::Rat(2) => (0..8)
                    .map(|_| GroupElement::Rat(vec![rand_rat(&mut rng), rand_rat(&mut rng)]))
                    .chain([GroupElement::Rat(vec![Rat::zero(), rat(1, 2)])])
                    .collect(),
                Carrier::Heis => (0..8)
                    .map(|_| rand_heis(&mut rng))
                    .chain([heis(Rat::zero(), Rat::zero(), rat(1, 2))])
                    .collect(),
                Carrier::Torus(_) => (0..8).map(|_| GroupElement::torus1(rand_rat(&mut rng))).collect(),
                Carrier::Mod(_) => vec![],
                _ => vec![],
            };
            let report = check_filtration_axioms(&g, &witnesses);
            assert!(report.is_empty(), "{}: {:?}", g.id, report.first());
        }
    }

    #[test]
    fn ds_exhaustive_filtration_small() {
        for n in 2..=5u64 {
            for s in 1..=3u32 {
                let g = FilteredGroup::ds(&[n], s);
                assert!(check_filtration_axioms(&g, &[]).is_empty());
            }
        }
    }

    #[test]
    fn corrupted_filtration_reported() {
        // Degree 2 with G_2 = the whole Heisenberg group: G_3 = {id} fails
        // for central elements and the axiom checker must say so.
        let bad = FilteredGroup::custom(
            "bad-heis",
            Carrier::Heis,
            2,
            true,
            Arc::new(|g: &GroupElement, i| if i <= 2 { true } else { g.is_identity() }),
        );
        let mut rng = StdRng::seed_from_u64(5);
        let witnesses: Vec<GroupElement> = (0..6).map(|_| rand_heis(&mut rng)).collect();
        let report = check_filtration_axioms(&bad, &witnesses);
        // Non-commuting witnesses put a non-identity commutator in G_4 = {id}.
        assert!(report
            .iter()
            .any(|v| matches!(v, FiltrationViolation::Commutator { i: 2, j: 2, .. })));
    }

    #[test]
    fn monotonicity_on_catalog() {
        let mut rng = StdRng::seed_from_u64(6);
        for g in make_standard_groups() {
            let elems = g.enumerate().unwrap_or_else(|| match &g.carrier {
                Carrier::Heis => (0..20).map(|_| rand_heis(&mut rng)).collect(),
                Carrier::Rat(d) => (0..20)
                    .map(|_| GroupElement::Rat((0..*d).map(|_| rand_rat(&mut rng)).collect()))
                    .collect(),
                Carrier::Torus(d) => (0..20)
                    .map(|_| GroupElement::Torus((0..*d).map(|_| frac(&rand_rat(&mut rng))).collect()))
                    .collect(),
                Carrier::Int => (-10..10).map(GroupElement::int).collect(),
                _ => vec![],
            });
            for e in &elems {
                for i in 0..=g.degree + 1 {
                    if g.filtration_member(e, i + 1) {
                        assert!(g.filtration_member(e, i), "{} level {}", g.id, i);
                    }
                }
            }
        }
    }

    #[test]
    fn serialization_round_trip() {
        let cases = vec![
            GroupElement::int(5),
            GroupElement::int(-17),
            GroupElement::Mod(vec![
                ModComponent::new(BigInt::from(2), BigInt::from(3)),
                ModComponent::new(BigInt::from(1), BigInt::from(4)),
            ]),
            GroupElement::rat1(rat(1, 2)),
            GroupElement::Rat(vec![rat(-3, 7), rat(2, 1)]),
            GroupElement::torus1(rat(1, 3)),
            heis(rat(1, 2), rat(1, 3), rat(0, 1)),
        ];
        for g in cases {
            let s = g.serialize().unwrap();
            assert_eq!(parse_element(&s).unwrap(), g, "{s}");
            // Round-trip is byte-exact as well.
            assert_eq!(parse_element(&s).unwrap().serialize().unwrap(), s);
        }
        assert_eq!(parse_element("mod:2/3,1/4").unwrap().serialize().unwrap(), "mod:2/3,1/4");
        assert_eq!(parse_element("torus:4/3").unwrap().serialize().unwrap(), "torus:1/3");
    }

    #[test]
    fn torus_eager_reduction() {
        let a = GroupElement::torus1(rat(2, 3));
        let b = GroupElement::torus1(rat(2, 3));
        let sum = a.mul(&b).unwrap();
        assert_eq!(sum, GroupElement::torus1(rat(1, 3)));
        let n = GroupElement::torus1(rat(-1, 3));
        assert_eq!(n, GroupElement::torus1(rat(2, 3)));
    }

    #[test]
    fn lookup_ids() {
        assert_eq!(lookup_group("heis").unwrap().id, "heis");
        assert_eq!(lookup_group("z4").unwrap().id, "d1_z4");
        assert_eq!(lookup_group("d2_z3").unwrap().degree, 2);
        assert!(lookup_group("nope").is_err());
    }
}
