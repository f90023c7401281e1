//! Cubes on nilmanifolds G/Γ, realized exactly for two parents: tori
//! (Q/Z)^d = Q^d / Z^d with a degree-s filtration, and the Heisenberg
//! nilmanifold H/Γ with Γ the integer points.
//!
//! Points are canonical representatives in a fundamental domain. A
//! configuration is a cube iff it lifts pointwise to a cube-group member of
//! the covering group; for the torus this is decided in the quotient group
//! itself, for the Heisenberg parent by an explicit lift construction that
//! adjusts canonical representatives by lattice elements along the
//! face-coordinate recursion.

use crate::cube::{canonical_subset_order, Config, Face, MAX_CHECK_DIM};
use crate::error::{Error, Result};
use crate::group::{fmt_rat, frac, heis, parse_rat, FilteredGroup, GroupElement, Rat};
use crate::hk::{hk_corner_complete, hk_membership, Configuration, Corner};
use num::{One, Zero};

/// The parent data (G, Γ) of a nilmanifold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nilmanifold {
    /// (Q/Z)^dim with the degree-s filtration on the covering group Q^dim.
    Torus { dim: usize, degree: u32 },
    /// The Heisenberg group over Q modulo its integer lattice, with the
    /// lower central series (degree 2).
    Heisenberg,
}

impl Nilmanifold {
    pub fn degree(&self) -> u32 {
        match self {
            Nilmanifold::Torus { degree, .. } => *degree,
            Nilmanifold::Heisenberg => 2,
        }
    }

    /// The covering filtered group G.
    pub fn covering_group(&self) -> FilteredGroup {
        match self {
            Nilmanifold::Torus { dim, degree } => FilteredGroup::rationals(*dim, *degree),
            Nilmanifold::Heisenberg => FilteredGroup::heisenberg(),
        }
    }

    /// The quotient as a filtered group, when the parent is abelian.
    pub fn quotient_group(&self) -> Option<FilteredGroup> {
        match self {
            Nilmanifold::Torus { dim, degree } => Some(FilteredGroup::torus(*dim, *degree)),
            Nilmanifold::Heisenberg => None,
        }
    }
}

/// A point of G/Γ, stored as its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilPoint {
    pub parent: Nilmanifold,
    /// Torus parent: `GroupElement::Torus` with components in [0,1).
    /// Heisenberg parent: `GroupElement::Heis` with x, y, z in [0,1).
    pub rep: GroupElement,
}

impl NilPoint {
    pub fn serialize(&self) -> String {
        match &self.rep {
            GroupElement::Torus(a) => {
                format!("tnil:{}", a.iter().map(fmt_rat).collect::<Vec<_>>().join(","))
            }
            GroupElement::Heis { x, y, z } => {
                format!("hnil:{},{},{}", fmt_rat(x), fmt_rat(y), fmt_rat(z))
            }
            _ => unreachable!("nil points are torus or heis"),
        }
    }
}

pub fn parse_nil_point(s: &str, parent: &Nilmanifold) -> Result<NilPoint> {
    let s = s.trim();
    let (tag, body) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("missing tag in nil point `{s}`")))?;
    let comps = body.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?;
    match (tag, parent) {
        ("tnil", Nilmanifold::Torus { dim, .. }) => {
            if comps.len() != *dim {
                return Err(Error::Parse(format!("expected {dim} components, got {}", comps.len())));
            }
            reduce(&GroupElement::Rat(comps), parent)
        }
        ("hnil", Nilmanifold::Heisenberg) => {
            if comps.len() != 3 {
                return Err(Error::Parse(format!("hnil takes 3 components, got {}", comps.len())));
            }
            reduce(&heis(comps[0].clone(), comps[1].clone(), comps[2].clone()), parent)
        }
        _ => Err(Error::Parse(format!("tag `{tag}` does not match the parent"))),
    }
}

fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Is g a lattice element (all entries integral)?
pub fn in_lattice(g: &GroupElement) -> bool {
    match g {
        GroupElement::Rat(a) => a.iter().all(is_integer),
        GroupElement::Heis { x, y, z } => is_integer(x) && is_integer(y) && is_integer(z),
        _ => false,
    }
}

/// Reduce a covering-group element to the canonical representative of its
/// coset gΓ. Torus: componentwise fractional part. Heisenberg:
/// (x,y,z) ↦ ({x}, {y}, {z − x⌊y⌋}).
pub fn reduce(g: &GroupElement, parent: &Nilmanifold) -> Result<NilPoint> {
    let rep = match (parent, g) {
        (Nilmanifold::Torus { dim, .. }, GroupElement::Rat(a)) if a.len() == *dim => {
            GroupElement::Torus(a.iter().map(frac).collect())
        }
        (Nilmanifold::Torus { dim, .. }, GroupElement::Torus(a)) if a.len() == *dim => {
            GroupElement::Torus(a.iter().map(frac).collect())
        }
        (Nilmanifold::Heisenberg, GroupElement::Heis { x, y, z }) => {
            heis(frac(x), frac(y), frac(&(z - x * y.floor())))
        }
        _ => return Err(Error::UnsupportedParent(format!("{g:?} over {parent:?}"))),
    };
    Ok(NilPoint { parent: parent.clone(), rep })
}

/// The canonical representative as a covering-group element.
fn lift_rep(p: &NilPoint) -> GroupElement {
    match &p.rep {
        GroupElement::Torus(a) => GroupElement::Rat(a.clone()),
        other => other.clone(),
    }
}

/// Verdict of a quotient-cube membership test: on success a pointwise lift
/// to a cube-group member of the covering group, on failure the violated
/// constraint.
#[derive(Debug, Clone)]
pub struct NilVerdict {
    pub is_cube: bool,
    pub lift: Option<Configuration>,
    pub violation: Option<String>,
}

fn parents_consistent(c: &Config<NilPoint>) -> Result<&Nilmanifold> {
    let parent = &c.values[0].parent;
    for p in &c.values {
        if &p.parent != parent {
            return Err(Error::UnsupportedParent("mixed parents in configuration".into()));
        }
    }
    Ok(parent)
}

/// Decide whether a configuration of nilmanifold points is the image of a
/// covering cube-group member.
pub fn nil_cube_membership(c: &Config<NilPoint>) -> Result<NilVerdict> {
    if c.dim > MAX_CHECK_DIM {
        return Err(Error::DimensionTooLarge { k: c.dim, max: MAX_CHECK_DIM });
    }
    let parent = parents_consistent(c)?.clone();
    match parent {
        Nilmanifold::Torus { .. } => torus_membership(c, &parent),
        Nilmanifold::Heisenberg => {
            let s = parent.degree();
            if c.dim <= s + 1 {
                Ok(match heis_lift(c) {
                    Ok(lift) => NilVerdict { is_cube: true, lift: Some(lift), violation: None },
                    Err(v) => NilVerdict { is_cube: false, lift: None, violation: Some(v) },
                })
            } else {
                // Above degree + 1 a configuration is a cube iff every
                // (s+1)-dimensional face is one.
                for face in Face::all_of_dim(c.dim, s + 1) {
                    let sub = c.restrict(face);
                    let verdict = nil_cube_membership(&sub)?;
                    if !verdict.is_cube {
                        return Ok(NilVerdict {
                            is_cube: false,
                            lift: None,
                            violation: Some(format!(
                                "face fixing mask {:#b} to {:#b}: {}",
                                face.fixed_mask,
                                face.fixed_vals,
                                verdict.violation.unwrap_or_default()
                            )),
                        });
                    }
                }
                // The lift construction goes through in every dimension once
                // all (s+1)-faces pass.
                let lift = heis_lift(c)
                    .map_err(|v| Error::Internal(format!("faces pass but lift failed: {v}")))?;
                Ok(NilVerdict { is_cube: true, lift: Some(lift), violation: None })
            }
        }
    }
}

fn torus_membership(c: &Config<NilPoint>, parent: &Nilmanifold) -> Result<NilVerdict> {
    let q = parent.quotient_group().expect("torus parent");
    let cfg = Config::new(c.dim, c.values.iter().map(|p| p.rep.clone()).collect())?;
    let verdict = hk_membership(&cfg, &q)?;
    if !verdict.is_member {
        let (mask, x) = verdict.witness.unwrap();
        return Ok(NilVerdict {
            is_cube: false,
            lift: None,
            violation: Some(format!("face coordinate at subset {mask:#b} is {x:?} mod 1")),
        });
    }
    // Lift: face coordinates at levels beyond the degree are ≡ 0 mod 1;
    // choose the zero lift there and the representative values elsewhere.
    let s = parent.degree();
    let g_cover = parent.covering_group();
    let coords = verdict
        .face_coords
        .order
        .masks
        .iter()
        .zip(&verdict.face_coords.coords)
        .map(|(&mask, x)| {
            if mask.count_ones() > s {
                g_cover.identity()
            } else {
                match x {
                    GroupElement::Torus(a) => GroupElement::Rat(a.clone()),
                    _ => unreachable!(),
                }
            }
        })
        .collect();
    let lift = crate::hk::vertex_coordinates(&crate::hk::FaceCoordinates {
        order: verdict.face_coords.order.clone(),
        coords,
    })?;
    Ok(NilVerdict { is_cube: true, lift: Some(lift), violation: None })
}

/// Build a cube-group lift of a Heisenberg quotient configuration, or name
/// the violated constraint.
///
/// Walk the canonical subset order. At subset S the face coordinate of the
/// partial lift is t = prefix⁻¹ · rep(S) up to a lattice adjustment γ of
/// the vertex: pick γ so that t·γ lands in G_{|S|}. For |S| ≤ 1 anything
/// works; for |S| = 2 the x,y components of t must be integral (the
/// horizontal parallelepiped constraints mod 1); for |S| ≥ 3 the whole of t
/// must be a lattice element (the z constraint). These solvability
/// conditions are exactly quotient-cube membership.
fn heis_lift(c: &Config<NilPoint>) -> std::result::Result<Configuration, String> {
    let k = c.dim;
    let order = canonical_subset_order(k);
    let mut coords: Vec<GroupElement> = Vec::with_capacity(order.masks.len());
    let mut lift_values: Vec<GroupElement> = vec![GroupElement::Heis {
        x: Rat::zero(),
        y: Rat::zero(),
        z: Rat::zero(),
    }; 1 << k];
    for (i, &si) in order.masks.iter().enumerate() {
        let mut prefix: Option<GroupElement> = None;
        for j in 0..i {
            let sj = order.masks[j];
            if sj != si && sj & !si == 0 {
                prefix = Some(match prefix {
                    None => coords[j].clone(),
                    Some(p) => p.mul(&coords[j]).unwrap(),
                });
            }
        }
        let rep = lift_rep(&c.values[si as usize]);
        let t = match &prefix {
            None => rep.clone(),
            Some(p) => p.inv().mul(&rep).unwrap(),
        };
        let level = si.count_ones();
        let gamma = match level {
            0 | 1 => heis(Rat::zero(), Rat::zero(), Rat::zero()),
            2 => {
                let (tx, ty) = match &t {
                    GroupElement::Heis { x, y, .. } => (x.clone(), y.clone()),
                    _ => unreachable!(),
                };
                if !is_integer(&tx) || !is_integer(&ty) {
                    return Err(format!(
                        "horizontal parallelepiped constraint fails at subset {si:#b}"
                    ));
                }
                heis(-tx, -ty, Rat::zero())
            }
            _ => {
                let gamma = t.inv();
                if !in_lattice(&gamma) {
                    return Err(format!("z-coordinate constraint fails at subset {si:#b}"));
                }
                gamma
            }
        };
        let x_s = t.mul(&gamma).unwrap();
        let vertex_lift = rep.mul(&gamma).unwrap();
        lift_values[si as usize] = vertex_lift;
        coords.push(x_s);
    }
    Ok(Config { dim: k, values: lift_values })
}

/// Complete a corner of nilmanifold points. Every codimension-1 lower face
/// must be a quotient cube. Torus: completion happens in the quotient
/// group. Heisenberg: the corner is lifted vertex by vertex with lattice
/// adjustments, completed with top face coordinate id, and reduced.
pub fn nil_corner_complete(parent: &Nilmanifold, corner: &[NilPoint]) -> Result<NilPoint> {
    let n = corner.len() + 1;
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::Parse(format!("corner has {} values, want 2^k - 1", corner.len())));
    }
    let k = n.trailing_zeros();
    if k > MAX_CHECK_DIM {
        return Err(Error::DimensionTooLarge { k, max: MAX_CHECK_DIM });
    }
    for p in corner {
        if &p.parent != parent {
            return Err(Error::UnsupportedParent("mixed parents in corner".into()));
        }
    }
    // Precondition: lower faces are cubes.
    let hk_corner = Corner::new(k, corner.iter().map(lift_rep).collect())?;
    for coord in 0..k {
        let face_cfg = hk_corner.lower_face(coord);
        let nil_face = Config::new(
            k - 1,
            face_cfg
                .values
                .iter()
                .map(|g| reduce(g, parent))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let verdict = nil_cube_membership(&nil_face)?;
        if !verdict.is_cube {
            return Err(Error::BadLowerFace {
                face: format!("coordinate {} = 0", coord + 1),
                detail: verdict.violation.unwrap_or_default(),
            });
        }
    }
    match parent {
        Nilmanifold::Torus { .. } => {
            let q = parent.quotient_group().expect("torus parent");
            let top = hk_corner_complete(
                &Corner::new(k, corner.iter().map(|p| p.rep.clone()).collect())?,
                &q,
            )?;
            reduce(&top, parent)
        }
        Nilmanifold::Heisenberg => {
            // Lift the corner greedily along the canonical order (as in
            // heis_lift but without the top vertex), then set the top face
            // coordinate to id and read off the product.
            let order = canonical_subset_order(k);
            let full = (1u32 << k) - 1;
            let mut coords: Vec<GroupElement> = Vec::new();
            for (i, &si) in order.masks.iter().enumerate() {
                if si == full {
                    break;
                }
                let mut prefix: Option<GroupElement> = None;
                for j in 0..i {
                    let sj = order.masks[j];
                    if sj != si && sj & !si == 0 {
                        prefix = Some(match prefix {
                            None => coords[j].clone(),
                            Some(p) => p.mul(&coords[j])?,
                        });
                    }
                }
                let rep = lift_rep(&corner[si as usize]);
                let t = match &prefix {
                    None => rep.clone(),
                    Some(p) => p.inv().mul(&rep)?,
                };
                let level = si.count_ones();
                let gamma = match level {
                    0 | 1 => heis(Rat::zero(), Rat::zero(), Rat::zero()),
                    2 => {
                        let (tx, ty) = match &t {
                            GroupElement::Heis { x, y, .. } => (x.clone(), y.clone()),
                            _ => unreachable!(),
                        };
                        if !is_integer(&tx) || !is_integer(&ty) {
                            return Err(Error::Internal(format!(
                                "corner with valid faces has non-integral level-2 coordinate at {si:#b}"
                            )));
                        }
                        heis(-tx, -ty, Rat::zero())
                    }
                    _ => {
                        let gamma = t.inv();
                        if !in_lattice(&gamma) {
                            return Err(Error::Internal(format!(
                                "corner with valid faces has non-lattice coordinate at {si:#b}"
                            )));
                        }
                        gamma
                    }
                };
                coords.push(t.mul(&gamma)?);
            }
            let mut acc: Option<GroupElement> = None;
            for x in &coords {
                acc = Some(match acc {
                    None => x.clone(),
                    Some(a) => a.mul(x)?,
                });
            }
            reduce(&acc.expect("k >= 1"), parent)
        }
    }
}

/// The explicit degree-2 cocycle of the Heisenberg nilmanifold at k = 3:
/// for configurations whose horizontal components (x_ω), (y_ω) are
/// parallelepipeds mod 1, the alternating z-sum of canonical
/// representatives of a quotient cube equals this value mod 1.
///
/// Indices are ω = (ω₁, ω₂, ω₃) with ω₁ the least significant bit.
pub fn heisenberg_cocycle(x: &[Rat], y: &[Rat]) -> Result<Rat> {
    if x.len() != 8 || y.len() != 8 {
        return Err(Error::Parse("cocycle takes 8 x-values and 8 y-values".into()));
    }
    let x: Vec<Rat> = x.iter().map(frac).collect();
    let y: Vec<Rat> = y.iter().map(frac).collect();
    for comps in [&x, &y] {
        if !is_parallelepiped_mod1(comps) {
            return Err(Error::Precondition(
                "cocycle inputs must be parallelepipeds mod 1".into(),
            ));
        }
    }
    // kappa = x110 D3 + x101 D2 + x011 D1 + x111 (y100 + y010 + y001 - 2 y000 - y111)
    // with D_i the lower-face defects of the representatives, e.g.
    // D3 = y110 - y100 - y010 + y000.
    //
    // Derivation: pick the lift s of the y-part that keeps the base vertex
    // and the three edge values as they are; the remaining integer parts
    // are then forced to be -D3, -D2, -D1 and -(2 y000 + y111 - y100 -
    // y010 - y001), and the alternating z-sum equals -Σ (-1)^{|ω|} x_ω
    // ⌊s_ω⌋ mod 1. Note the sign of the last term: the two sign choices
    // agree exactly when x111 = 1/2, which the classical worked example
    // happens to satisfy; random projected cubes pin the sign down.
    let v = &x[0b011] * (&y[0b011] - &y[0b001] - &y[0b010] + &y[0b000])
        + &x[0b101] * (&y[0b101] - &y[0b001] - &y[0b100] + &y[0b000])
        + &x[0b110] * (&y[0b110] - &y[0b010] - &y[0b100] + &y[0b000])
        + &x[0b111]
            * (&y[0b001] + &y[0b010] + &y[0b100] - &y[0b000] - &y[0b000] - &y[0b111]);
    Ok(frac(&v))
}

/// Every 2-face alternating sum ≡ 0 mod 1 on a 3-dimensional configuration
/// of rationals.
pub fn is_parallelepiped_mod1(vals: &[Rat]) -> bool {
    assert_eq!(vals.len(), 8);
    for fixed in 0..3u32 {
        for fixed_val in 0..2u32 {
            let mut sum = Rat::zero();
            for w in 0..8u32 {
                if w >> fixed & 1 != fixed_val {
                    continue;
                }
                if (w & !(1 << fixed)).count_ones() % 2 == 0 {
                    sum += &vals[w as usize];
                } else {
                    sum -= &vals[w as usize];
                }
            }
            if !frac(&sum).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Alternating sum Σ (−1)^{|ω|} v_ω.
pub fn alternating_sum(vals: &[Rat]) -> Rat {
    let mut sum = Rat::zero();
    for (w, v) in vals.iter().enumerate() {
        if (w as u32).count_ones() % 2 == 0 {
            sum += v;
        } else {
            sum -= v;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::rat;
    use crate::sample::random_hk_member;
    use rand::prelude::*;

    fn project(c: &Configuration, parent: &Nilmanifold) -> Config<NilPoint> {
        Config::new(
            c.dim,
            c.values.iter().map(|g| reduce(g, parent).unwrap()).collect(),
        )
        .unwrap()
    }

    fn heis_nm() -> Nilmanifold {
        Nilmanifold::Heisenberg
    }

    fn rand_gamma(rng: &mut StdRng) -> GroupElement {
        heis(
            rat(rng.gen_range(-5i64..=5), 1),
            rat(rng.gen_range(-5i64..=5), 1),
            rat(rng.gen_range(-5i64..=5), 1),
        )
    }

    #[test]
    fn reduce_examples() {
        let p = reduce(&heis(rat(3, 2), rat(-1, 3), rat(0, 1)), &heis_nm()).unwrap();
        assert_eq!(p.rep, heis(rat(1, 2), rat(2, 3), rat(1, 2)));
        let t = Nilmanifold::Torus { dim: 1, degree: 1 };
        let p = reduce(&GroupElement::Rat(vec![rat(7, 3)]), &t).unwrap();
        assert_eq!(p.rep, GroupElement::Torus(vec![rat(1, 3)]));
        let id = reduce(&FilteredGroup::heisenberg().identity(), &heis_nm()).unwrap();
        assert!(id.rep.is_identity());
    }

    #[test]
    fn reduce_is_lattice_invariant() {
        let mut rng = StdRng::seed_from_u64(30);
        let nm = heis_nm();
        for _ in 0..1000 {
            let g = heis(
                rat(rng.gen_range(-30i64..=30), rng.gen_range(1i64..=9)),
                rat(rng.gen_range(-30i64..=30), rng.gen_range(1i64..=9)),
                rat(rng.gen_range(-30i64..=30), rng.gen_range(1i64..=9)),
            );
            let gamma = rand_gamma(&mut rng);
            assert_eq!(
                reduce(&g.mul(&gamma).unwrap(), &nm).unwrap(),
                reduce(&g, &nm).unwrap()
            );
        }
    }

    #[test]
    fn projection_soundness_both_parents() {
        let mut rng = StdRng::seed_from_u64(31);
        let heis_g = FilteredGroup::heisenberg();
        let nm = heis_nm();
        for k in 1..=4u32 {
            for _ in 0..40 {
                let c = random_hk_member(&heis_g, k, &mut rng);
                let pc = project(&c, &nm);
                let verdict = nil_cube_membership(&pc).unwrap();
                assert!(verdict.is_cube, "heis k={k}");
                // Certificate: the lift is a genuine member projecting back.
                let lift = verdict.lift.unwrap();
                assert!(hk_membership(&lift, &heis_g).unwrap().is_member);
                assert_eq!(project(&lift, &nm), pc);
            }
        }
        for (dim, degree) in [(1usize, 1u32), (1, 2), (2, 1)] {
            let t = Nilmanifold::Torus { dim, degree };
            let g = t.covering_group();
            for k in 1..=4u32 {
                for _ in 0..25 {
                    let c = random_hk_member(&g, k, &mut rng);
                    let pc = project(&c, &t);
                    let verdict = nil_cube_membership(&pc).unwrap();
                    assert!(verdict.is_cube, "torus d{dim} s{degree} k={k}");
                    let lift = verdict.lift.unwrap();
                    assert!(hk_membership(&lift, &g).unwrap().is_member);
                    assert_eq!(project(&lift, &t), pc);
                }
            }
        }
    }

    #[test]
    fn perturbed_projection_fails() {
        let mut rng = StdRng::seed_from_u64(32);
        let heis_g = FilteredGroup::heisenberg();
        let nm = heis_nm();
        for _ in 0..200 {
            let c = random_hk_member(&heis_g, 3, &mut rng);
            let mut pc = project(&c, &nm);
            let w = rng.gen_range(0..8usize);
            let pert = heis(Rat::zero(), Rat::zero(), rat(1, 7));
            pc.values[w] =
                reduce(&pc.values[w].rep.clone().mul(&pert).unwrap(), &nm).unwrap();
            // Adjusting one z by 1/7 breaks the cocycle identity.
            assert!(!nil_cube_membership(&pc).unwrap().is_cube);
        }
    }

    #[test]
    fn cocycle_specific_instance() {
        // x ≡ 1/2, y(ω) = (ω₁+ω₂+ω₃)/3: the cocycle value is 1/2, and the
        // projected configuration with z ≡ 0 is a cube whose alternating
        // z-sum of representatives is 1/2.
        let x: Vec<Rat> = (0..8).map(|_| rat(1, 2)).collect();
        let y: Vec<Rat> = (0..8u32).map(|w| rat(w.count_ones() as i64, 3)).collect();
        assert_eq!(heisenberg_cocycle(&x, &y).unwrap(), rat(1, 2));

        let nm = heis_nm();
        let cfg = Config::new(
            3,
            (0..8u32)
                .map(|w| {
                    reduce(&heis(rat(1, 2), rat(w.count_ones() as i64, 3), rat(0, 1)), &nm)
                        .unwrap()
                })
                .collect(),
        )
        .unwrap();
        assert!(nil_cube_membership(&cfg).unwrap().is_cube);
        let z: Vec<Rat> = cfg
            .values
            .iter()
            .map(|p| match &p.rep {
                GroupElement::Heis { z, .. } => z.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(frac(&alternating_sum(&z)), rat(1, 2));
    }

    #[test]
    fn cocycle_zero_when_y_zero() {
        let x: Vec<Rat> = (0..8).map(|i| rat(i % 2, 2)).collect();
        let y = vec![Rat::zero(); 8];
        // x must still be a parallelepiped mod 1; alternating x-sums of this
        // pattern vanish.
        if is_parallelepiped_mod1(&x) {
            assert!(heisenberg_cocycle(&x, &y).unwrap().is_zero());
        }
        let x = vec![rat(1, 3); 8];
        assert!(heisenberg_cocycle(&x, &y).unwrap().is_zero());
    }

    #[test]
    fn cocycle_matches_projected_cubes() {
        let mut rng = StdRng::seed_from_u64(33);
        let heis_g = FilteredGroup::heisenberg();
        let nm = heis_nm();
        for _ in 0..500 {
            let c = random_hk_member(&heis_g, 3, &mut rng);
            let pc = project(&c, &nm);
            let (mut xs, mut ys, mut zs) = (Vec::new(), Vec::new(), Vec::new());
            for p in &pc.values {
                match &p.rep {
                    GroupElement::Heis { x, y, z } => {
                        xs.push(x.clone());
                        ys.push(y.clone());
                        zs.push(z.clone());
                    }
                    _ => unreachable!(),
                }
            }
            let kappa = heisenberg_cocycle(&xs, &ys).unwrap();
            assert_eq!(frac(&alternating_sum(&zs)), kappa);
        }
    }

    #[test]
    fn cocycle_rejects_non_parallelepipeds() {
        let mut x = vec![Rat::zero(); 8];
        x[7] = rat(1, 3);
        let y = vec![Rat::zero(); 8];
        assert!(matches!(
            heisenberg_cocycle(&x, &y),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn torus_corner_completion_example() {
        let t = Nilmanifold::Torus { dim: 1, degree: 1 };
        let mk = |p: i64, q: i64| reduce(&GroupElement::Rat(vec![rat(p, q)]), &t).unwrap();
        let corner = vec![mk(1, 3), mk(1, 2), mk(5, 6)];
        let top = nil_corner_complete(&t, &corner).unwrap();
        // 1/2 + 5/6 - 1/3 = 1 ≡ 0
        assert_eq!(top.rep, GroupElement::Torus(vec![Rat::zero()]));
        // Constant corner completes to the constant.
        let corner = vec![mk(2, 7), mk(2, 7), mk(2, 7)];
        assert_eq!(nil_corner_complete(&t, &corner).unwrap().rep, GroupElement::Torus(vec![rat(2, 7)]));
    }

    #[test]
    fn delete_then_complete_round_trip() {
        let mut rng = StdRng::seed_from_u64(34);
        // Heisenberg at k = 3 (degree 2): unique completion.
        let heis_g = FilteredGroup::heisenberg();
        let nm = heis_nm();
        for _ in 0..200 {
            let c = random_hk_member(&heis_g, 3, &mut rng);
            let pc = project(&c, &nm);
            let corner: Vec<NilPoint> = pc.values[..7].to_vec();
            let top = nil_corner_complete(&nm, &corner).unwrap();
            assert_eq!(&top, &pc.values[7]);
        }
        // Torus of degree 1 at k = 2.
        let t = Nilmanifold::Torus { dim: 1, degree: 1 };
        let g = t.covering_group();
        for _ in 0..200 {
            let c = random_hk_member(&g, 2, &mut rng);
            let pc = project(&c, &t);
            let corner: Vec<NilPoint> = pc.values[..3].to_vec();
            let top = nil_corner_complete(&t, &corner).unwrap();
            assert_eq!(&top, &pc.values[3]);
        }
    }

    #[test]
    fn corner_completion_rejects_bad_faces() {
        let nm = heis_nm();
        let mk = |x: Rat, y: Rat, z: Rat| reduce(&heis(x, y, z), &nm).unwrap();
        // Bottom face is not a quotient cube: x-components break the
        // parallelogram constraint mod 1.
        let corner = vec![
            mk(Rat::zero(), Rat::zero(), Rat::zero()),
            mk(rat(1, 3), Rat::zero(), Rat::zero()),
            mk(Rat::zero(), Rat::zero(), Rat::zero()),
            mk(rat(1, 5), Rat::zero(), Rat::zero()),
            mk(Rat::zero(), Rat::zero(), Rat::zero()),
            mk(rat(1, 3), Rat::zero(), Rat::zero()),
            mk(Rat::zero(), Rat::zero(), Rat::zero()),
        ];
        assert!(matches!(
            nil_corner_complete(&nm, &corner),
            Err(Error::BadLowerFace { .. })
        ));
    }

    #[test]
    fn torus_morphism_closure_exhaustive() {
        // Nil cubes over Z/n representatives are closed under discrete-cube
        // morphisms, exhaustively at k ≤ 3 for n = 2, 3.
        use crate::cube::{apply_morphism, CubeMorphism, MorphCoord};
        let t = Nilmanifold::Torus { dim: 1, degree: 1 };
        for n in [2i64, 3] {
            // All k=2 quotient cubes with denominators dividing n.
            let pts: Vec<NilPoint> = (0..n)
                .map(|i| reduce(&GroupElement::Rat(vec![rat(i, n)]), &t).unwrap())
                .collect();
            let mut cubes = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let cfg = Config::new(
                                2,
                                vec![
                                    pts[a as usize].clone(),
                                    pts[b as usize].clone(),
                                    pts[c as usize].clone(),
                                    pts[d as usize].clone(),
                                ],
                            )
                            .unwrap();
                            if nil_cube_membership(&cfg).unwrap().is_cube {
                                cubes.push(cfg);
                            }
                        }
                    }
                }
            }
            // All morphisms {0,1}^k -> {0,1}^2 for k ≤ 3.
            for cfg in &cubes {
                for k in 0..=3u32 {
                    let mut choices = vec![MorphCoord::Zero, MorphCoord::One];
                    for j in 0..k {
                        choices.push(MorphCoord::Copy(j));
                        choices.push(MorphCoord::Flip(j));
                    }
                    for c0 in &choices {
                        for c1 in &choices {
                            let rho = CubeMorphism::new(k, 2, vec![*c0, *c1]);
                            let img = apply_morphism(cfg, &rho).unwrap();
                            assert!(nil_cube_membership(&img).unwrap().is_cube);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn every_pair_is_an_edge() {
        let mut rng = StdRng::seed_from_u64(35);
        let nm = heis_nm();
        let heis_g = FilteredGroup::heisenberg();
        for _ in 0..50 {
            let a = reduce(&heis_g.sample_filtration_element(0, &mut rng), &nm).unwrap();
            let b = reduce(&heis_g.sample_filtration_element(0, &mut rng), &nm).unwrap();
            let cfg = Config::new(1, vec![a, b]).unwrap();
            assert!(nil_cube_membership(&cfg).unwrap().is_cube);
        }
    }

    #[test]
    fn nil_point_serialization() {
        let nm = heis_nm();
        let p = reduce(&heis(rat(3, 2), rat(-1, 3), rat(0, 1)), &nm).unwrap();
        let s = p.serialize();
        assert_eq!(s, "hnil:1/2,2/3,1/2");
        assert_eq!(parse_nil_point(&s, &nm).unwrap(), p);
        let t = Nilmanifold::Torus { dim: 2, degree: 1 };
        let p = reduce(&GroupElement::Rat(vec![rat(7, 3), rat(-1, 4)]), &t).unwrap();
        assert_eq!(p.serialize(), "tnil:1/3,3/4");
        assert_eq!(parse_nil_point(&p.serialize(), &t).unwrap(), p);
    }
}
