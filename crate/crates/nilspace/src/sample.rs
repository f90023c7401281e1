//! Seeded random fixtures: elements of a filtration level and random
//! cube-group members built from random face coordinates.

use crate::cube::canonical_subset_order;
use crate::group::{FilteredGroup, GroupElement};
use crate::hk::{vertex_coordinates, Configuration, FaceCoordinates};
use rand::Rng;

/// A random element of G_level with small exact coordinates.
pub fn random_filtration_element<R: Rng>(
    g: &FilteredGroup,
    level: u32,
    rng: &mut R,
) -> GroupElement {
    g.sample_filtration_element(level, rng)
}

/// A random member of HK^k(G), generated from random face coordinates
/// x_S ∈ G_{|S|}. Every member arises this way, so this samples the whole
/// cube group.
pub fn random_hk_member<R: Rng>(g: &FilteredGroup, k: u32, rng: &mut R) -> Configuration {
    let order = canonical_subset_order(k);
    let coords = order
        .masks
        .iter()
        .map(|&s| g.sample_filtration_element(s.count_ones(), rng))
        .collect();
    vertex_coordinates(&FaceCoordinates { order, coords }).expect("face coords are well-formed")
}
