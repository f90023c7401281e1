//! Cube groups over a filtered group: HK^k(G) ⊆ G^{2^k} is generated by
//! the upper-face constants [x]_{F_S} with x ∈ G_{|S|}. Every configuration
//! factors uniquely as an ordered product of such generators along an
//! inclusion-respecting subset order; membership and corner completion both
//! reduce to that factorization.

use crate::cube::{canonical_subset_order, Config, SubsetOrder, MAX_CHECK_DIM};
use crate::error::{Error, Result};
use crate::group::{FilteredGroup, GroupElement};

pub type Configuration = Config<GroupElement>;

/// The face coordinates (x_i) of a configuration, aligned with
/// [`canonical_subset_order`]: position i holds the coordinate of subset
/// S_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCoordinates {
    pub order: SubsetOrder,
    pub coords: Vec<GroupElement>,
}

/// A configuration on {0,1}^k minus the top vertex, in binary-counting
/// order of the remaining 2^k - 1 vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corner {
    pub dim: u32,
    pub values: Vec<GroupElement>,
}

impl Corner {
    pub fn new(dim: u32, values: Vec<GroupElement>) -> Result<Self> {
        if dim == 0 || values.len() != (1usize << dim) - 1 {
            return Err(Error::DimensionMismatch { expected: dim, got: values.len() as u32 });
        }
        Ok(Corner { dim, values })
    }

    /// Forget the value at the top vertex of a full configuration.
    pub fn from_config(c: &Configuration) -> Result<Self> {
        let mut values = c.values.clone();
        values.pop();
        Corner::new(c.dim, values)
    }

    /// Restriction to the codimension-1 lower face freezing coordinate
    /// `coord` to 0; this is a full (k-1)-configuration.
    pub fn lower_face(&self, coord: u32) -> Configuration {
        assert!(coord < self.dim);
        let mut values = Vec::with_capacity(1 << (self.dim - 1));
        for w in 0..1u32 << (self.dim - 1) {
            // Re-insert a zero bit at position `coord`.
            let low = w & ((1 << coord) - 1);
            let high = (w >> coord) << (coord + 1);
            values.push(self.values[(low | high) as usize].clone());
        }
        Config { dim: self.dim - 1, values }
    }

    /// The full configuration obtained by putting `top` at the top vertex.
    pub fn complete_with(&self, top: GroupElement) -> Configuration {
        let mut values = self.values.clone();
        values.push(top);
        Config { dim: self.dim, values }
    }
}

fn check_dim(k: u32) -> Result<()> {
    if k > MAX_CHECK_DIM {
        return Err(Error::DimensionTooLarge { k, max: MAX_CHECK_DIM });
    }
    Ok(())
}

/// Factor a configuration into face coordinates along the canonical subset
/// order: x_i = (∏_{j<i, S_j ⊊ S_i} x_j)^{-1} · g_{S_i}, products taken in
/// order.
pub fn face_coordinates(c: &Configuration) -> Result<FaceCoordinates> {
    check_dim(c.dim)?;
    let order = canonical_subset_order(c.dim);
    let mut coords: Vec<GroupElement> = Vec::with_capacity(order.masks.len());
    for (i, &si) in order.masks.iter().enumerate() {
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
        let g = c.get(si).clone();
        let x = match prefix {
            None => g,
            Some(p) => p.inv().mul(&g)?,
        };
        coords.push(x);
    }
    Ok(FaceCoordinates { order, coords })
}

/// Reconstruct vertex coordinates: g_ω = ordered product of the x_i with
/// S_i ⊆ ω. Exact inverse of [`face_coordinates`].
pub fn vertex_coordinates(fc: &FaceCoordinates) -> Result<Configuration> {
    let k = fc.order.k;
    let mut values = Vec::with_capacity(1 << k);
    for w in 0..1u32 << k {
        let mut acc: Option<GroupElement> = None;
        for (i, &si) in fc.order.masks.iter().enumerate() {
            if si & !w == 0 {
                acc = Some(match acc {
                    None => fc.coords[i].clone(),
                    Some(a) => a.mul(&fc.coords[i])?,
                });
            }
        }
        values.push(acc.expect("empty subset always contributes"));
    }
    Config::new(k, values)
}

/// Outcome of a cube-group membership test.
#[derive(Debug, Clone)]
pub struct MembershipVerdict {
    pub is_member: bool,
    /// First failing face coordinate in canonical order: (subset mask, x).
    pub witness: Option<(u32, GroupElement)>,
    pub face_coords: FaceCoordinates,
}

/// Membership in HK^k(G): a configuration belongs iff every face
/// coordinate x_i lies in G_{|S_i|}.
pub fn hk_membership(c: &Configuration, g: &FilteredGroup) -> Result<MembershipVerdict> {
    for v in &c.values {
        if !g.contains(v) {
            return Err(Error::NotInCarrier(format!("{v:?} not in {}", g.id)));
        }
    }
    let fc = face_coordinates(c)?;
    for (i, &si) in fc.order.masks.iter().enumerate() {
        if !g.filtration_member(&fc.coords[i], si.count_ones()) {
            return Ok(MembershipVerdict {
                is_member: false,
                witness: Some((si, fc.coords[i].clone())),
                face_coords: fc,
            });
        }
    }
    Ok(MembershipVerdict { is_member: true, witness: None, face_coords: fc })
}

/// Complete a corner to a cube-group member: solve every face coordinate
/// except the top one from the corner, set x_{2^k} = id, and read off the
/// top vertex. At k = degree + 1 this completion is the unique one.
///
/// Every codimension-1 lower face of the corner must already be a member at
/// dimension k-1.
pub fn hk_corner_complete(corner: &Corner, g: &FilteredGroup) -> Result<GroupElement> {
    let k = corner.dim;
    check_dim(k)?;
    for coord in 0..k {
        let face = corner.lower_face(coord);
        let verdict = hk_membership(&face, g)?;
        if !verdict.is_member {
            let (mask, x) = verdict.witness.unwrap();
            return Err(Error::BadLowerFace {
                face: format!("coordinate {} = 0", coord + 1),
                detail: format!("face coordinate at subset {mask:#b} is {x:?}"),
            });
        }
    }
    let order = canonical_subset_order(k);
    let full = (1u32 << k) - 1;
    // Solve x_i for every proper subset; these depend only on corner values.
    let mut coords: Vec<GroupElement> = Vec::new();
    for (i, &si) in order.masks.iter().enumerate() {
        if si == full {
            coords.push(g.identity());
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
        let gval = corner.values[si as usize].clone();
        coords.push(match prefix {
            None => gval,
            Some(p) => p.inv().mul(&gval)?,
        });
    }
    // Top vertex = ordered product of all face coordinates.
    let mut acc: Option<GroupElement> = None;
    for x in &coords {
        acc = Some(match acc {
            None => x.clone(),
            Some(a) => a.mul(x)?,
        });
    }
    Ok(acc.expect("k >= 1"))
}

/// A reported failure of an induced map between cube groups.
#[derive(Debug, Clone)]
pub struct InducedMapViolation {
    pub sample_index: usize,
    pub witness: Option<(u32, GroupElement)>,
}

/// Check that a group map τ: G → H with τ(G_i) ⊆ H_i induces a map
/// HK^n(G) → HK^n(H): each sampled member of HK^n(G) must map pointwise to
/// a member of HK^n(H). Violations are reported, not raised.
pub fn induced_homomorphism_check(
    tau: &dyn Fn(&GroupElement) -> Result<GroupElement>,
    g: &FilteredGroup,
    h: &FilteredGroup,
    samples: &[Configuration],
) -> Result<Vec<InducedMapViolation>> {
    let mut out = Vec::new();
    for (idx, c) in samples.iter().enumerate() {
        let verdict = hk_membership(c, g)?;
        if !verdict.is_member {
            return Err(Error::Precondition(format!("sample {idx} is not a member over {}", g.id)));
        }
        let mapped = Config::new(
            c.dim,
            c.values.iter().map(|v| tau(v)).collect::<Result<Vec<_>>>()?,
        )?;
        let verdict = hk_membership(&mapped, h)?;
        if !verdict.is_member {
            out.push(InducedMapViolation { sample_index: idx, witness: verdict.witness });
        }
    }
    Ok(out)
}
