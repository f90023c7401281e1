//! Discrete-cube bookkeeping: vertices of {0,1}^k as bitmasks, faces,
//! morphisms of discrete cubes, subset orderings, and cube-shaped
//! configurations of arbitrary values.

use crate::error::{Error, Result};

/// Hard cap on cube dimension: vertices are bitmasks in a machine word and
/// 2^k entries must stay enumerable.
pub const MAX_DIM: u32 = 16;

/// Membership-style operations refuse above this dimension (2^k entries per
/// configuration).
pub const MAX_CHECK_DIM: u32 = 12;

/// A vertex of the discrete cube {0,1}^k, identified with a subset of [k].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub bits: u32,
    pub dim: u32,
}

impl Vertex {
    pub fn new(bits: u32, dim: u32) -> Self {
        assert!(dim <= MAX_DIM && bits < (1u32 << dim));
        Vertex { bits, dim }
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_subset_of(self, other: Vertex) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn ones(dim: u32) -> Self {
        Vertex::new((1u32 << dim) - 1, dim)
    }

    pub fn zeros(dim: u32) -> Self {
        Vertex::new(0, dim)
    }
}

/// A face of {0,1}^k: a subset of coordinates frozen to fixed bit values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub dim: u32,
    /// Coordinates that are frozen.
    pub fixed_mask: u32,
    /// Values of the frozen coordinates (bits outside `fixed_mask` are 0).
    pub fixed_vals: u32,
}

impl Face {
    pub fn new(dim: u32, fixed_mask: u32, fixed_vals: u32) -> Self {
        assert!(dim <= MAX_DIM);
        assert!(fixed_mask < (1u32 << dim) || dim == MAX_DIM);
        assert!(fixed_vals & !fixed_mask == 0);
        Face { dim, fixed_mask, fixed_vals }
    }

    /// The upper face F_S: coordinates in S frozen to 1.
    pub fn upper(dim: u32, s: u32) -> Self {
        Face::new(dim, s, s)
    }

    pub fn codim(self) -> u32 {
        self.fixed_mask.count_ones()
    }

    pub fn face_dim(self) -> u32 {
        self.dim - self.codim()
    }

    pub fn contains(self, v: Vertex) -> bool {
        v.dim == self.dim && (v.bits & self.fixed_mask) == self.fixed_vals
    }

    /// Vertices of the face in binary-counting order of the free coordinates.
    pub fn vertices(self) -> Vec<u32> {
        let free: Vec<u32> = (0..self.dim).filter(|i| self.fixed_mask >> i & 1 == 0).collect();
        let d = free.len() as u32;
        (0..1u32 << d)
            .map(|w| {
                let mut bits = self.fixed_vals;
                for (pos, &coord) in free.iter().enumerate() {
                    if w >> pos & 1 == 1 {
                        bits |= 1 << coord;
                    }
                }
                bits
            })
            .collect()
    }

    /// All faces of `dim`-cube with exactly `face_dim` free coordinates.
    pub fn all_of_dim(dim: u32, face_dim: u32) -> Vec<Face> {
        assert!(face_dim <= dim);
        let full = if dim == 0 { 0 } else { (1u32 << dim) - 1 };
        let mut out = Vec::new();
        for mask in 0..=full {
            if mask.count_ones() != dim - face_dim {
                continue;
            }
            // Enumerate values on the frozen coordinates.
            let mut vals = 0u32;
            loop {
                out.push(Face::new(dim, mask, vals));
                // Next subset of `mask` in counting order.
                if vals == mask {
                    break;
                }
                vals = (vals.wrapping_sub(mask)) & mask;
            }
        }
        out
    }
}

/// One output coordinate of a morphism of discrete cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphCoord {
    Zero,
    One,
    Copy(u32),
    Flip(u32),
}

/// A morphism of discrete cubes {0,1}^k_in -> {0,1}^k_out: the restriction
/// of an affine-linear map, i.e. componentwise const-0 / const-1 / copy /
/// flip of an input coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeMorphism {
    pub k_in: u32,
    pub k_out: u32,
    /// One entry per output coordinate.
    pub coords: Vec<MorphCoord>,
}

impl CubeMorphism {
    pub fn new(k_in: u32, k_out: u32, coords: Vec<MorphCoord>) -> Self {
        assert_eq!(coords.len(), k_out as usize);
        for c in &coords {
            if let MorphCoord::Copy(j) | MorphCoord::Flip(j) = c {
                assert!(*j < k_in);
            }
        }
        CubeMorphism { k_in, k_out, coords }
    }

    pub fn identity(k: u32) -> Self {
        CubeMorphism::new(k, k, (0..k).map(MorphCoord::Copy).collect())
    }

    /// The inclusion of a face: output coordinates are frozen per the face,
    /// free coordinates copied in increasing order.
    pub fn face_inclusion(face: Face) -> Self {
        let mut coords = Vec::with_capacity(face.dim as usize);
        let mut next_free = 0u32;
        for i in 0..face.dim {
            if face.fixed_mask >> i & 1 == 1 {
                coords.push(if face.fixed_vals >> i & 1 == 1 { MorphCoord::One } else { MorphCoord::Zero });
            } else {
                coords.push(MorphCoord::Copy(next_free));
                next_free += 1;
            }
        }
        CubeMorphism::new(face.face_dim(), face.dim, coords)
    }

    pub fn apply_bits(&self, bits: u32) -> u32 {
        let mut out = 0u32;
        for (i, c) in self.coords.iter().enumerate() {
            let bit = match *c {
                MorphCoord::Zero => 0,
                MorphCoord::One => 1,
                MorphCoord::Copy(j) => bits >> j & 1,
                MorphCoord::Flip(j) => 1 - (bits >> j & 1),
            };
            out |= bit << i;
        }
        out
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        assert_eq!(v.dim, self.k_in);
        Vertex::new(self.apply_bits(v.bits), self.k_out)
    }

    /// self ∘ rho : first `rho`, then `self`. Requires rho.k_out == self.k_in.
    pub fn compose(&self, rho: &CubeMorphism) -> CubeMorphism {
        assert_eq!(rho.k_out, self.k_in);
        let coords = self
            .coords
            .iter()
            .map(|c| match *c {
                MorphCoord::Zero => MorphCoord::Zero,
                MorphCoord::One => MorphCoord::One,
                MorphCoord::Copy(j) => rho.coords[j as usize],
                MorphCoord::Flip(j) => match rho.coords[j as usize] {
                    MorphCoord::Zero => MorphCoord::One,
                    MorphCoord::One => MorphCoord::Zero,
                    MorphCoord::Copy(t) => MorphCoord::Flip(t),
                    MorphCoord::Flip(t) => MorphCoord::Copy(t),
                },
            })
            .collect();
        CubeMorphism::new(rho.k_in, self.k_out, coords)
    }
}

/// A cube-shaped record: one value per vertex of {0,1}^dim, stored in
/// binary-counting order of the vertex bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config<T> {
    pub dim: u32,
    pub values: Vec<T>,
}

impl<T: Clone> Config<T> {
    pub fn new(dim: u32, values: Vec<T>) -> Result<Self> {
        if values.len() != 1usize << dim {
            return Err(Error::DimensionMismatch { expected: dim, got: values.len() as u32 });
        }
        Ok(Config { dim, values })
    }

    pub fn constant(dim: u32, v: T) -> Self {
        Config { dim, values: vec![v; 1usize << dim] }
    }

    pub fn get(&self, bits: u32) -> &T {
        &self.values[bits as usize]
    }

    /// Restriction to a face, with the face's free coordinates in increasing
    /// order.
    pub fn restrict(&self, face: Face) -> Config<T> {
        assert_eq!(face.dim, self.dim);
        let values = face.vertices().iter().map(|&b| self.values[b as usize].clone()).collect();
        Config { dim: face.face_dim(), values }
    }
}

/// Precomposition with a morphism of discrete cubes: the result at omega is
/// `config(rho(omega))`.
pub fn apply_morphism<T: Clone>(config: &Config<T>, rho: &CubeMorphism) -> Result<Config<T>> {
    if rho.k_out != config.dim {
        return Err(Error::DimensionMismatch { expected: config.dim, got: rho.k_out });
    }
    let values = (0..1u32 << rho.k_in).map(|v| config.values[rho.apply_bits(v) as usize].clone()).collect();
    Ok(Config { dim: rho.k_in, values })
}

/// An inclusion-respecting ordering of all subsets of [k].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetOrder {
    pub k: u32,
    /// Subset bitmasks, S_1 = ∅ first, S_{2^k} = [k] last.
    pub masks: Vec<u32>,
}

impl SubsetOrder {
    pub fn is_inclusion_respecting(&self) -> bool {
        let n = self.masks.len();
        for i in 0..n {
            for j in 0..i {
                // S_i strictly after S_j, so S_i must not be a subset of S_j
                // unless equal.
                if self.masks[i] != self.masks[j] && self.masks[i] & !self.masks[j] == 0 {
                    return false;
                }
            }
        }
        true
    }
}

/// The canonical subset order: ascending popcount, ties broken by ascending
/// bitmask value. Fixed globally so face coordinates are reproducible.
pub fn canonical_subset_order(k: u32) -> SubsetOrder {
    assert!(k <= MAX_DIM);
    let mut masks: Vec<u32> = (0..1u32 << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    SubsetOrder { k, masks }
}

/// True iff `set` (vertices of {0,1}^k given as bitmasks) is closed under
/// passing to subsets.
pub fn is_downward_closed(set: &[u32], k: u32) -> bool {
    let present: std::collections::HashSet<u32> = set.iter().copied().collect();
    for &v in set {
        debug_assert!(v < 1u32 << k);
        for i in 0..k {
            if v >> i & 1 == 1 && !present.contains(&(v & !(1 << i))) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_small() {
        assert_eq!(canonical_subset_order(1).masks, vec![0b0, 0b1]);
        assert_eq!(canonical_subset_order(2).masks, vec![0b00, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn canonical_order_inclusion_respecting() {
        for k in 0..=6 {
            assert!(canonical_subset_order(k).is_inclusion_respecting(), "k={k}");
        }
    }

    #[test]
    fn identity_morphism_is_noop() {
        let c = Config::new(2, vec![10, 20, 30, 40]).unwrap();
        let id = CubeMorphism::identity(2);
        assert_eq!(apply_morphism(&c, &id).unwrap(), c);
    }

    #[test]
    fn coordinate_deletion() {
        // Project {0,1}^1 -> {0,1}^2 is the wrong direction; deleting
        // coordinate 2 means precomposing the square with omega -> (omega_1, 0).
        let sq = Config::new(2, vec![11, 12, 21, 22]).unwrap(); // x00,x10,x01,x11 in bit order
        let rho = CubeMorphism::new(1, 2, vec![MorphCoord::Copy(0), MorphCoord::Zero]);
        let edge = apply_morphism(&sq, &rho).unwrap();
        assert_eq!(edge.values, vec![11, 12]);
    }

    #[test]
    fn duplication_stacks_two_copies() {
        let sq = Config::new(2, vec![1, 2, 3, 4]).unwrap();
        // {0,1}^3 -> {0,1}^2 duplicating the second coordinate.
        let rho = CubeMorphism::new(3, 2, vec![MorphCoord::Copy(0), MorphCoord::Copy(1)]);
        let cube = apply_morphism(&sq, &rho).unwrap();
        // Third coordinate is ignored: two identical copies stacked.
        assert_eq!(&cube.values[..4], &cube.values[4..]);
        assert_eq!(&cube.values[..4], &[1, 2, 3, 4]);
    }

    #[test]
    fn composition_law_exhaustive_small() {
        // apply(apply(c, sigma), rho) == apply(c, sigma∘rho) over small random
        // morphisms and all k <= 3.
        use rand::prelude::*;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let k = rng.gen_range(0..=3u32);
            let l = rng.gen_range(0..=3u32);
            let m = rng.gen_range(0..=3u32);
            let rand_morph = |rng: &mut rand::rngs::StdRng, a: u32, b: u32| {
                let coords = (0..b)
                    .map(|_| match rng.gen_range(0..4) {
                        0 => MorphCoord::Zero,
                        1 => MorphCoord::One,
                        2 if a > 0 => MorphCoord::Copy(rng.gen_range(0..a)),
                        _ if a > 0 => MorphCoord::Flip(rng.gen_range(0..a)),
                        _ => MorphCoord::Zero,
                    })
                    .collect();
                CubeMorphism::new(a, b, coords)
            };
            let rho = rand_morph(&mut rng, k, l);
            let sigma = rand_morph(&mut rng, l, m);
            let c = Config::new(m, (0..1u32 << m).map(|i| i * 7).collect()).unwrap();
            let lhs = apply_morphism(&apply_morphism(&c, &sigma).unwrap(), &rho).unwrap();
            let rhs = apply_morphism(&c, &sigma.compose(&rho)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn downward_closed_cases() {
        assert!(is_downward_closed(&[0], 2));
        let corner: Vec<u32> = (0..7).collect(); // {0,1}^3 minus the top
        assert!(is_downward_closed(&corner, 3));
        assert!(!is_downward_closed(&[1], 1));
    }

    #[test]
    fn face_restriction_via_injective_morphism() {
        // Every face restriction equals precomposition with the face
        // inclusion; exhaustive over all faces of {0,1}^3.
        let c = Config::new(3, (0..8).collect()).unwrap();
        for d in 0..=3 {
            for f in Face::all_of_dim(3, d) {
                let direct = c.restrict(f);
                let via = apply_morphism(&c, &CubeMorphism::face_inclusion(f)).unwrap();
                assert_eq!(direct, via);
            }
        }
    }

    #[test]
    fn upper_face_contains() {
        let f = Face::upper(3, 0b101);
        assert!(f.contains(Vertex::new(0b101, 3)));
        assert!(f.contains(Vertex::new(0b111, 3)));
        assert!(!f.contains(Vertex::new(0b011, 3)));
        assert_eq!(f.codim(), 2);
    }
}
