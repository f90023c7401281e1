//! Finite cubespaces stored extensionally: axiom certification, canonical
//! equivalence relations and quotient towers, structure-group extraction,
//! fibration checking, glueing, tri-cubes, and edge cubespaces.
//!
//! Points are opaque labels; a k-cube is a tuple of 2^k point ids in
//! binary-counting vertex order. Cube sets are kept both as a sorted,
//! deduplicated vector (deterministic iteration and serialization) and as a
//! hash set (fast membership during exhaustive searches).

use crate::cube::Face;
use crate::error::{Error, Result};
use crate::report::Report;
use rustc_hash::{FxHashMap, FxHashSet};
use std::collections::HashMap;
use std::sync::Arc;

/// Point id within a [`FiniteCubespace`]; an index into the label list.
pub type Point = u16;

/// A deduplicated set of packed cubes of one dimension.
#[derive(Debug, Clone, Default)]
struct CubeSet {
    sorted: Vec<u128>,
    set: FxHashSet<u128>,
}

impl CubeSet {
    fn from_keys(mut keys: Vec<u128>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        let set = keys.iter().copied().collect();
        CubeSet { sorted: keys, set }
    }

    fn contains(&self, key: u128) -> bool {
        self.set.contains(&key)
    }

    fn len(&self) -> usize {
        self.sorted.len()
    }
}

/// A finite cubespace: labeled points plus explicit cube sets for every
/// dimension 1..=k_max. The 0-cubes are always the points themselves.
#[derive(Debug, Clone)]
pub struct FiniteCubespace {
    points: Vec<String>,
    index: HashMap<String, Point>,
    k_max: u32,
    /// Bits per vertex slot in the packed cube keys (8 or 16).
    bits: u32,
    cubes: Vec<CubeSet>,
    /// Set when morphism closure has been verified (or holds by construction).
    pub certified_axioms: bool,
    /// Set when k-completion has been verified for all k <= k_max.
    pub certified_fibrant: bool,
    /// Set when the glueing property has been verified for all k <= k_max.
    pub certified_glueing: bool,
    /// The nilspace degree, set only after (or by) certification.
    pub certified_degree: Option<u32>,
}

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == ',') {
        return Err(Error::Parse(format!(
            "invalid point label `{label}`: labels must be nonempty and free of whitespace and commas"
        )));
    }
    Ok(())
}

impl FiniteCubespace {
    /// Construct a cubespace from explicit cube lists. `cubes_by_dim[k-1]`
    /// holds the k-cubes as tuples of 2^k point ids in binary-counting
    /// vertex order; they are deduplicated here.
    pub fn new(
        points: Vec<String>,
        k_max: u32,
        cubes_by_dim: Vec<Vec<Vec<Point>>>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("a cubespace must have at least one point".into()));
        }
        if points.len() > u16::MAX as usize + 1 {
            return Err(Error::SizeGuard(format!("{} points exceed the 65536 cap", points.len())));
        }
        let bits = if points.len() <= 256 { 8 } else { 16 };
        if (1u64 << k_max) * bits > 128 {
            return Err(Error::SizeGuard(format!(
                "k_max {} with {} points does not fit the packed cube representation",
                k_max,
                points.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, label) in points.iter().enumerate() {
            validate_label(label)?;
            if index.insert(label.clone(), i as Point).is_some() {
                return Err(Error::Parse(format!("duplicate point label `{label}`")));
            }
        }
        if cubes_by_dim.len() != k_max as usize {
            return Err(Error::DimensionMismatch {
                expected: k_max,
                got: cubes_by_dim.len() as u32,
            });
        }
        let mut space = FiniteCubespace {
            points,
            index,
            k_max,
            bits: bits as u32,
            cubes: Vec::new(),
            certified_axioms: false,
            certified_fibrant: false,
            certified_glueing: false,
            certified_degree: None,
        };
        for (ki, list) in cubes_by_dim.into_iter().enumerate() {
            let k = ki as u32 + 1;
            let mut keys = Vec::with_capacity(list.len());
            for cube in &list {
                if cube.len() != 1usize << k {
                    return Err(Error::DimensionMismatch { expected: k, got: cube.len() as u32 });
                }
                for &p in cube {
                    if p as usize >= space.points.len() {
                        return Err(Error::NotInCarrier(format!("point id {p} out of range")));
                    }
                }
                keys.push(space.pack(cube));
            }
            space.cubes.push(CubeSet::from_keys(keys));
        }
        Ok(space)
    }

    /// Internal constructor from already-packed cube keys. Callers must
    /// guarantee that every key encodes in-range vertex ids for the packing
    /// implied by the point count.
    pub(crate) fn from_packed(
        points: Vec<String>,
        k_max: u32,
        keys_by_dim: Vec<Vec<u128>>,
    ) -> Result<Self> {
        if keys_by_dim.len() != k_max as usize {
            return Err(Error::DimensionMismatch {
                expected: k_max,
                got: keys_by_dim.len() as u32,
            });
        }
        let mut space = FiniteCubespace::new(points, k_max, vec![Vec::new(); k_max as usize])?;
        space.cubes = keys_by_dim.into_iter().map(CubeSet::from_keys).collect();
        Ok(space)
    }

    /// The one-point cubespace, fully certified of degree 0.
    pub fn one_point(k_max: u32) -> FiniteCubespace {
        let cubes = (1..=k_max).map(|k| vec![vec![0 as Point; 1usize << k]]).collect();
        let mut x = FiniteCubespace::new(vec!["*".into()], k_max, cubes)
            .expect("one-point space is well-formed");
        x.certified_axioms = true;
        x.certified_fibrant = true;
        x.certified_glueing = true;
        x.certified_degree = Some(0);
        x
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, p: Point) -> &str {
        &self.points[p as usize]
    }

    pub fn point(&self, label: &str) -> Result<Point> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown point label `{label}`")))
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    fn pack(&self, verts: &[Point]) -> u128 {
        let mut key = 0u128;
        for &v in verts.iter().rev() {
            key = (key << self.bits) | v as u128;
        }
        key
    }

    fn unpack(&self, k: u32, key: u128) -> Vec<Point> {
        let mask = (1u128 << self.bits) - 1;
        (0..1u32 << k).map(|i| ((key >> (i * self.bits)) & mask) as Point).collect()
    }

    fn has(&self, k: u32, key: u128) -> bool {
        self.cubes[k as usize - 1].contains(key)
    }

    /// Membership in C^k where k is inferred from the tuple length; 0-cubes
    /// (single points) are always members.
    pub fn is_cube(&self, verts: &[Point]) -> Result<bool> {
        let len = verts.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Parse(format!("cube tuple length {len} is not a power of two")));
        }
        let k = len.trailing_zeros();
        if k > self.k_max {
            return Err(Error::DimensionTooLarge { k, max: self.k_max });
        }
        for &p in verts {
            if p as usize >= self.points.len() {
                return Err(Error::NotInCarrier(format!("point id {p} out of range")));
            }
        }
        if k == 0 {
            return Ok(true);
        }
        Ok(self.has(k, self.pack(verts)))
    }

    pub fn cube_count(&self, k: u32) -> usize {
        if k == 0 {
            self.points.len()
        } else {
            self.cubes[k as usize - 1].len()
        }
    }

    /// Cubes of dimension k in sorted packed-key order.
    pub fn cubes_iter(&self, k: u32) -> impl Iterator<Item = Vec<Point>> + '_ {
        assert!(k >= 1 && k <= self.k_max);
        self.cubes[k as usize - 1].sorted.iter().map(move |&key| self.unpack(k, key))
    }

    fn render_cube(&self, verts: &[Point]) -> String {
        verts.iter().map(|&p| self.label(p)).collect::<Vec<_>>().join(",")
    }

    /// The induced cubespace on a subset of points: cubes are exactly those
    /// of the ambient space with all vertices in the subset.
    pub fn induced_subspace(&self, subset: &[Point]) -> Result<FiniteCubespace> {
        let mut keep = vec![false; self.points.len()];
        for &p in subset {
            if p as usize >= self.points.len() {
                return Err(Error::NotInCarrier(format!("point id {p} out of range")));
            }
            keep[p as usize] = true;
        }
        let labels: Vec<String> =
            (0..self.points.len()).filter(|&i| keep[i]).map(|i| self.points[i].clone()).collect();
        let mut old_to_new = vec![0 as Point; self.points.len()];
        let mut next = 0 as Point;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                old_to_new[i] = next;
                next += 1;
            }
        }
        let mut cubes_by_dim = Vec::new();
        for k in 1..=self.k_max {
            let mut list = Vec::new();
            for cube in self.cubes_iter(k) {
                if cube.iter().all(|&p| keep[p as usize]) {
                    list.push(cube.iter().map(|&p| old_to_new[p as usize]).collect());
                }
            }
            cubes_by_dim.push(list);
        }
        FiniteCubespace::new(labels, self.k_max, cubes_by_dim)
    }

    /// Serialize to the text interchange format. Deterministic: points in
    /// stored order, cubes in sorted packed-key order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("points: {}\n", self.points.join(" ")));
        out.push_str(&format!("k_max: {}\n", self.k_max));
        for k in 1..=self.k_max {
            out.push_str(&format!("cubes.{}:\n", k));
            for cube in self.cubes_iter(k) {
                out.push_str(&self.render_cube(&cube));
                out.push('\n');
            }
        }
        out
    }

    /// Parse the text interchange format produced by [`to_text`].
    ///
    /// [`to_text`]: FiniteCubespace::to_text
    pub fn parse_text(text: &str) -> Result<FiniteCubespace> {
        let mut points: Option<Vec<String>> = None;
        let mut k_max: Option<u32> = None;
        let mut sections: Vec<(u32, Vec<Vec<String>>)> = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("points:") {
                if points.is_some() {
                    return Err(Error::Parse("duplicate `points:` line".into()));
                }
                points = Some(rest.split_whitespace().map(str::to_string).collect());
            } else if let Some(rest) = line.strip_prefix("k_max:") {
                if k_max.is_some() {
                    return Err(Error::Parse("duplicate `k_max:` line".into()));
                }
                k_max = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad k_max `{}`", rest.trim())))?,
                );
            } else if let Some(rest) = line.strip_prefix("cubes.") {
                let head = rest
                    .strip_suffix(':')
                    .ok_or_else(|| Error::Parse(format!("bad section header `{line}`")))?;
                let k: u32 =
                    head.parse().map_err(|_| Error::Parse(format!("bad cube dimension `{head}`")))?;
                if sections.iter().any(|(k2, _)| *k2 == k) {
                    return Err(Error::Parse(format!("duplicate section `cubes.{k}`")));
                }
                sections.push((k, Vec::new()));
            } else {
                let section = sections
                    .last_mut()
                    .ok_or_else(|| Error::Parse(format!("cube line `{line}` outside a section")))?;
                section.1.push(line.split(',').map(str::to_string).collect());
            }
        }
        let points = points.ok_or_else(|| Error::Parse("missing `points:` line".into()))?;
        let k_max = k_max.ok_or_else(|| Error::Parse("missing `k_max:` line".into()))?;
        let mut lookup = HashMap::new();
        for (i, label) in points.iter().enumerate() {
            lookup.insert(label.clone(), i as Point);
        }
        let mut cubes_by_dim: Vec<Vec<Vec<Point>>> = vec![Vec::new(); k_max as usize];
        for (k, lines) in sections {
            if k < 1 || k > k_max {
                return Err(Error::Parse(format!("section cubes.{k} outside 1..=k_max")));
            }
            let mut list = Vec::with_capacity(lines.len());
            for labels in lines {
                let mut cube = Vec::with_capacity(labels.len());
                for label in &labels {
                    cube.push(
                        *lookup
                            .get(label)
                            .ok_or_else(|| Error::Parse(format!("unknown point label `{label}`")))?,
                    );
                }
                list.push(cube);
            }
            cubes_by_dim[k as usize - 1] = list;
        }
        FiniteCubespace::new(points, k_max, cubes_by_dim)
    }
}

// ---------------------------------------------------------------------------
// Finite abelian groups and the Host-Kra cubespace D_s(A)
// ---------------------------------------------------------------------------

/// Minimal abelian-group interface: elements are indices 0..size.
pub trait AbelianOps {
    fn size(&self) -> usize;
    fn add(&self, a: usize, b: usize) -> usize;
    fn neg(&self, a: usize) -> usize;
}

/// A product of cyclic groups Z/n_1 x ... x Z/n_r with mixed-radix indexing.
#[derive(Debug, Clone)]
pub struct FiniteAbelian {
    pub moduli: Vec<u64>,
    size: usize,
}

impl FiniteAbelian {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() || moduli.iter().any(|&n| n == 0) {
            return Err(Error::Parse("moduli must be nonempty and nonzero".into()));
        }
        let size = moduli.iter().try_fold(1u64, |a, &n| a.checked_mul(n)).and_then(|n| {
            if n <= u16::MAX as u64 + 1 {
                Some(n as usize)
            } else {
                None
            }
        });
        match size {
            Some(size) => Ok(FiniteAbelian { moduli: moduli.to_vec(), size }),
            None => Err(Error::SizeGuard(format!("group of moduli {moduli:?} is too large"))),
        }
    }

    pub fn decode(&self, mut a: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.moduli.len());
        for &n in &self.moduli {
            out.push((a % n as usize) as u64);
            a /= n as usize;
        }
        out
    }

    pub fn encode(&self, comps: &[u64]) -> usize {
        let mut a = 0usize;
        for (&c, &n) in comps.iter().zip(&self.moduli).rev() {
            a = a * n as usize + c as usize;
        }
        a
    }

    pub fn label(&self, a: usize) -> String {
        self.decode(a).iter().map(u64::to_string).collect::<Vec<_>>().join(".")
    }
}

impl AbelianOps for FiniteAbelian {
    fn size(&self) -> usize {
        self.size
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let sum: Vec<u64> = self
            .decode(a)
            .iter()
            .zip(self.decode(b))
            .zip(&self.moduli)
            .map(|((&x, y), &n)| (x + y) % n)
            .collect();
        self.encode(&sum)
    }

    fn neg(&self, a: usize) -> usize {
        let neg: Vec<u64> =
            self.decode(a).iter().zip(&self.moduli).map(|(&x, &n)| (n - x) % n).collect();
        self.encode(&neg)
    }
}

/// An abelian group given by an explicit addition table (used for structure
/// groups extracted from cubespaces).
#[derive(Debug, Clone)]
pub struct TableGroup {
    pub add: Vec<Vec<usize>>,
    pub neg: Vec<usize>,
}

impl AbelianOps for TableGroup {
    fn size(&self) -> usize {
        self.add.len()
    }

    fn add(&self, a: usize, b: usize) -> usize {
        self.add[a][b]
    }

    fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }
}

/// Membership of a configuration in C^k(D_s(A)) by the closed-form rule:
/// everything for k <= s, alternating sum zero at k = s+1, and the
/// every-(s+1)-face rule above.
pub fn ds_config_is_cube(g: &impl AbelianOps, s: u32, values: &[usize]) -> Result<bool> {
    let len = values.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Parse(format!("configuration length {len} is not a power of two")));
    }
    let k = len.trailing_zeros();
    if k <= s {
        return Ok(true);
    }
    for face in Face::all_of_dim(k, s + 1) {
        let mut sum = 0usize; // relies on 0 being the identity index
        for (pos, &v) in face.vertices().iter().enumerate() {
            let x = values[v as usize];
            let signed = if (pos as u32).count_ones() % 2 == 0 { x } else { g.neg(x) };
            sum = g.add(sum, signed);
        }
        if sum != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Build the cubespace D_s(A) for A the product of the given cyclic moduli:
/// C^k is everything for k <= s and is cut out by the alternating-sum /
/// every-(s+1)-face conditions above. Cubes are generated from free
/// Host-Kra face coordinates (one group element per subset of [k] of size
/// <= s), which enumerates each cube exactly once.
pub fn build_ds_cubespace(moduli: &[u64], s: u32, k_max: u32) -> Result<FiniteCubespace> {
    if s == 0 || k_max == 0 {
        return Err(Error::Precondition("build_ds_cubespace needs s >= 1 and k_max >= 1".into()));
    }
    let group = FiniteAbelian::new(moduli)?;
    let n = group.size();
    // Size guard on the number of candidate configurations enumerated at
    // each dimension.
    for k in 1..=k_max {
        let free = (0..1u32 << k).filter(|m| m.count_ones() <= s).count() as u32;
        let mut count = 1f64;
        for _ in 0..free {
            count *= n as f64;
        }
        if count > 1e8 {
            return Err(Error::SizeGuard(format!(
                "{count:.0} candidate configurations at k={k} exceed the 10^8 guard"
            )));
        }
    }
    let labels: Vec<String> = (0..n).map(|a| group.label(a)).collect();
    let bits: u32 = if n <= 256 { 8 } else { 16 };
    if (1u64 << k_max) * bits as u64 > 128 {
        return Err(Error::SizeGuard(format!(
            "k_max {k_max} with {n} points does not fit the packed cube representation"
        )));
    }
    let mask = (1u128 << bits) - 1;
    let mut keys_by_dim = Vec::new();
    for k in 1..=k_max {
        let mut free: Vec<u32> = (0..1u32 << k).filter(|m| m.count_ones() <= s).collect();
        // The fastest-changing digit should touch as few vertex slots as
        // possible, so put the largest subsets first.
        free.sort_unstable_by_key(|m| std::cmp::Reverse(m.count_ones()));
        let m = free.len();
        // The vertices w containing each free subset.
        let supports: Vec<Vec<u32>> = free
            .iter()
            .map(|&sub| (0..1u32 << k).filter(|w| sub & !w == 0).collect())
            .collect();
        // Odometer over the free coordinates, maintaining the vertex values
        // and the packed cube key incrementally as digits change.
        let mut assignment = vec![0usize; m];
        let mut vals = vec![0usize; 1usize << k];
        let mut key = 0u128;
        let mut keys = Vec::with_capacity(n.pow(m as u32) as usize);
        loop {
            keys.push(key);
            let mut pos = 0;
            loop {
                if pos == m {
                    break;
                }
                let old = assignment[pos];
                let new = if old + 1 < n { old + 1 } else { 0 };
                assignment[pos] = new;
                let delta = group.add(new, group.neg(old));
                for &w in &supports[pos] {
                    let v = group.add(vals[w as usize], delta);
                    vals[w as usize] = v;
                    let off = w * bits;
                    key = (key & !(mask << off)) | ((v as u128) << off);
                }
                if new != 0 {
                    break;
                }
                pos += 1;
            }
            if pos == m {
                break;
            }
        }
        keys_by_dim.push(keys);
    }
    let mut x = FiniteCubespace::from_packed(labels, k_max, keys_by_dim)?;
    // These hold by construction; the checkers below re-derive them in tests.
    x.certified_axioms = true;
    x.certified_fibrant = true;
    x.certified_glueing = true;
    x.certified_degree = Some(if n == 1 { 0 } else { s });
    Ok(x)
}

// ---------------------------------------------------------------------------
// Axiom certification and the basic checks
// ---------------------------------------------------------------------------

/// Verify closure of the cube sets under all morphisms of discrete cubes
/// between dimensions <= k_max.
///
/// Any such morphism factors as a composition of: face inclusions (freeze a
/// coordinate), single-coordinate reflections, adjacent transpositions,
/// diagonal identifications of two coordinates, and coordinate insertions
/// (precomposition with a coordinate-forgetting projection, i.e.
/// duplication). Closure under this generating family is therefore
/// equivalent to closure under every morphism, and is what we check; the
/// factorization itself is exercised against a brute-force enumeration of
/// all morphisms in the tests.
pub fn certify_cubespace(x: &FiniteCubespace) -> Report {
    let mut report = Report::new("cubespace-axioms");
    let n = x.num_points();
    // Constant 1-cubes are forced: every point is a 0-cube and duplication
    // must produce its constant edge.
    if x.k_max >= 1 {
        for p in 0..n as Point {
            if !x.has(1, x.pack(&[p, p])) {
                report.push("missing-constant", format!("constant 1-cube on `{}`", x.label(p)));
            }
        }
    }
    let mut buf = vec![0 as Point; 1 << x.k_max.min(7)];
    let mut out = vec![0 as Point; 1 << x.k_max.min(7)];
    for k in 1..=x.k_max {
        let size = 1usize << k;
        report.metric(format!("cubes.{k}"), x.cube_count(k));
        for key in x.cubes[k as usize - 1].sorted.clone() {
            let verts = x.unpack(k, key);
            buf[..size].copy_from_slice(&verts);
            // Codimension-1 faces must be (k-1)-cubes.
            if k >= 2 {
                for i in 0..k {
                    for val in 0..2u32 {
                        for v in 0..size / 2 {
                            let vv = v as u32;
                            let orig = (vv & ((1 << i) - 1))
                                | (val << i)
                                | ((vv >> i) << (i + 1));
                            out[v] = buf[orig as usize];
                        }
                        if !x.has(k - 1, x.pack(&out[..size / 2])) {
                            report.push(
                                "missing-face",
                                format!(
                                    "face (coord {i} = {val}) of k={k} cube {} is not a cube",
                                    x.render_cube(&verts)
                                ),
                            );
                        }
                    }
                }
            }
            // Reflections of a single coordinate.
            for i in 0..k {
                for v in 0..size {
                    out[v ^ (1usize << i)] = buf[v];
                }
                if !x.has(k, x.pack(&out[..size])) {
                    report.push(
                        "missing-reflection",
                        format!(
                            "reflection of coord {i} of k={k} cube {} is not a cube",
                            x.render_cube(&verts)
                        ),
                    );
                }
            }
            // Adjacent coordinate transpositions.
            for i in 0..k.saturating_sub(1) {
                for v in 0..size {
                    let a = v >> i & 1;
                    let b = v >> (i + 1) & 1;
                    let w = (v & !(3usize << i)) | (b << i) | (a << (i + 1));
                    out[w] = buf[v];
                }
                if !x.has(k, x.pack(&out[..size])) {
                    report.push(
                        "missing-transposition",
                        format!(
                            "transposing coords {i},{} of k={k} cube {} is not a cube",
                            i + 1,
                            x.render_cube(&verts)
                        ),
                    );
                }
            }
            // Diagonal identification of coordinates i < j.
            if k >= 2 {
                for j in 1..k {
                    for i in 0..j {
                        for v in 0..size / 2 {
                            let vv = v as u32;
                            let orig = (vv & ((1 << j) - 1))
                                | (((vv >> i) & 1) << j)
                                | ((vv >> j) << (j + 1));
                            out[v] = buf[orig as usize];
                        }
                        if !x.has(k - 1, x.pack(&out[..size / 2])) {
                            report.push(
                                "missing-diagonal",
                                format!(
                                    "diagonal (coords {i}={j}) of k={k} cube {} is not a cube",
                                    x.render_cube(&verts)
                                ),
                            );
                        }
                    }
                }
            }
        }
        // Duplications: every (k-1)-cube, with a coordinate inserted, must
        // be a k-cube.
        if k >= 2 {
            for key in x.cubes[k as usize - 2].sorted.clone() {
                let src = x.unpack(k - 1, key);
                for i in 0..k {
                    for v in 0..size {
                        let vv = v as u32;
                        let from = (vv & ((1 << i) - 1)) | ((vv >> (i + 1)) << i);
                        out[v] = src[from as usize];
                    }
                    if !x.has(k, x.pack(&out[..size])) {
                        report.push(
                            "missing-duplication",
                            format!(
                                "duplication (insert coord {i}) of k={} cube {} is not a cube",
                                k - 1,
                                x.render_cube(&src)
                            ),
                        );
                    }
                }
            }
        }
    }
    report
}

/// k-uniqueness: no two distinct k-cubes agree off the top vertex.
pub fn check_uniqueness(x: &FiniteCubespace, k: u32) -> Result<Report> {
    if k < 1 || k > x.k_max {
        return Err(Error::DimensionTooLarge { k, max: x.k_max });
    }
    let mut report = Report::new(format!("uniqueness.{k}"));
    let top_shift = ((1u32 << k) - 1) * x.bits;
    let top_mask = ((1u128 << x.bits) - 1) << top_shift;
    let mut masked: Vec<(u128, u128)> =
        x.cubes[k as usize - 1].sorted.iter().map(|&key| (key & !top_mask, key)).collect();
    masked.sort_unstable();
    let mut pairs = 0usize;
    let mut i = 0;
    while i < masked.len() {
        let mut j = i + 1;
        while j < masked.len() && masked[j].0 == masked[i].0 {
            j += 1;
        }
        if j - i >= 2 {
            for a in i..j {
                for b in a + 1..j {
                    pairs += 1;
                    report.push(
                        "uniqueness",
                        format!(
                            "cubes {} and {} agree off the top vertex",
                            x.render_cube(&x.unpack(k, masked[a].1)),
                            x.render_cube(&x.unpack(k, masked[b].1))
                        ),
                    );
                }
            }
        }
        i = j;
    }
    report.metric("violating-pairs", pairs);
    Ok(report)
}

/// Enumerate all k-corners (configurations on {0,1}^k minus the top whose
/// codimension-1 lower faces are cubes) and feed each to `visit`. When the
/// space is certified morphism-closed, lower-dimensional faces are used for
/// early pruning; this does not change the corner set because faces of
/// cubes are then cubes.
fn scan_corners(x: &FiniteCubespace, k: u32, visit: &mut impl FnMut(&[Point])) {
    assert!(k >= 1 && k <= x.k_max);
    let total = (1usize << k) - 1;
    let full = (1u32 << k) - 1;
    // checks_at[v]: faces fully assigned once vertex v is set, given as
    // (dimension, vertex list in face order).
    let mut checks_at: Vec<Vec<(u32, Vec<u32>)>> = vec![Vec::new(); total];
    for d in 1..k {
        for face in Face::all_of_dim(k, d) {
            let lower_codim1 = face.codim() == 1 && face.fixed_vals == 0;
            let has_zero_fixed = face.fixed_vals != face.fixed_mask;
            if !(lower_codim1 || (x.certified_axioms && has_zero_fixed)) {
                continue;
            }
            let max_vertex = face.fixed_vals | (full & !face.fixed_mask);
            if max_vertex as usize >= total {
                continue; // contains the top vertex, never complete in a corner
            }
            checks_at[max_vertex as usize].push((d, face.vertices()));
        }
    }
    let n = x.num_points() as Point;
    let mut assign = vec![0 as Point; total];
    let mut face_buf = vec![0 as Point; 1 << k];
    // Depth-first search over vertex assignments in binary-counting order.
    fn rec(
        x: &FiniteCubespace,
        v: usize,
        total: usize,
        n: Point,
        checks_at: &[Vec<(u32, Vec<u32>)>],
        assign: &mut [Point],
        face_buf: &mut [Point],
        visit: &mut impl FnMut(&[Point]),
    ) {
        if v == total {
            visit(assign);
            return;
        }
        'candidates: for p in 0..n {
            assign[v] = p;
            for (d, verts) in &checks_at[v] {
                for (pos, &b) in verts.iter().enumerate() {
                    face_buf[pos] = assign[b as usize];
                }
                if !x.has(*d, x.pack(&face_buf[..verts.len()])) {
                    continue 'candidates;
                }
            }
            rec(x, v + 1, total, n, checks_at, assign, face_buf, visit);
        }
    }
    rec(x, 0, total, n, &checks_at, &mut assign, &mut face_buf, visit);
}

/// k-completion: every k-corner extends to a k-cube.
pub fn check_completion(x: &FiniteCubespace, k: u32) -> Result<Report> {
    if k < 1 || k > x.k_max {
        return Err(Error::DimensionTooLarge { k, max: x.k_max });
    }
    let mut report = Report::new(format!("completion.{k}"));
    let n = x.num_points() as Point;
    let mut corners = 0usize;
    let mut failures = 0usize;
    let mut cube = vec![0 as Point; 1 << k];
    scan_corners(x, k, &mut |corner| {
        corners += 1;
        cube[..corner.len()].copy_from_slice(corner);
        let mut completable = false;
        for p in 0..n {
            cube[corner.len()] = p;
            if x.has(k, x.pack(&cube)) {
                completable = true;
                break;
            }
        }
        if !completable {
            failures += 1;
            report.push(
                "incomplete-corner",
                format!("corner {} has no completion", x.render_cube(corner)),
            );
        }
    });
    report.metric("corners", corners);
    report.metric("failures", failures);
    Ok(report)
}

/// k-ergodicity: C^k(X) = X^{2^k}.
pub fn check_ergodic(x: &FiniteCubespace, k: u32) -> Result<Report> {
    if k < 1 || k > x.k_max {
        return Err(Error::DimensionTooLarge { k, max: x.k_max });
    }
    let mut report = Report::new(format!("ergodic.{k}"));
    let expected = (x.num_points() as u128).checked_pow(1u32 << k);
    let count = x.cube_count(k) as u128;
    report.metric("cubes", count);
    match expected {
        Some(e) => {
            report.metric("configurations", e);
            if count != e {
                report.push("not-ergodic", format!("{count} cubes of {e} configurations at k={k}"));
            }
        }
        None => {
            // The full configuration count overflows, so the cube set
            // certainly does not exhaust it.
            report.push("not-ergodic", format!("configuration count at k={k} overflows"));
        }
    }
    Ok(report)
}

/// Glueing: two k-cubes sharing a face (the top face of one equals the
/// bottom face of the other along the last coordinate) glue to a k-cube.
/// Closure under coordinate permutations reduces the general case to the
/// last coordinate.
pub fn check_glueing(x: &FiniteCubespace, k: u32) -> Result<Report> {
    if k < 1 || k > x.k_max {
        return Err(Error::DimensionTooLarge { k, max: x.k_max });
    }
    let mut report = Report::new(format!("glueing.{k}"));
    let half_bits = (1u32 << (k - 1)) * x.bits;
    let low_mask = if half_bits == 128 { u128::MAX } else { (1u128 << half_bits) - 1 };
    // Glueing along the last coordinate is transitivity of the relation
    // "low half -> high half" on (k-1)-configurations: whenever (l, m) and
    // (m, h) are cubes, (l, h) must be one. Intern the halves and check
    // succ(m) subset-of succ(l) for every edge (l, m) with sorted
    // adjacency lists.
    fn intern(key: u128, ids: &mut FxHashMap<u128, u32>, nodes: &mut Vec<u128>) -> u32 {
        *ids.entry(key).or_insert_with(|| {
            nodes.push(key);
            nodes.len() as u32 - 1
        })
    }
    let mut ids: FxHashMap<u128, u32> = FxHashMap::default();
    let mut nodes: Vec<u128> = Vec::new();
    let mut succ: Vec<Vec<u32>> = Vec::new();
    for &key in &x.cubes[k as usize - 1].sorted {
        let l = intern(key & low_mask, &mut ids, &mut nodes);
        let h = intern(key >> half_bits, &mut ids, &mut nodes);
        if succ.len() < nodes.len() {
            succ.resize(nodes.len(), Vec::new());
        }
        succ[l as usize].push(h);
    }
    for list in &mut succ {
        list.sort_unstable();
    }
    let mut pairs = 0usize;
    let mut failures = 0usize;
    for l in 0..succ.len() {
        let sl = &succ[l];
        for &m in sl {
            let sm = &succ[m as usize];
            pairs += sm.len();
            let mut i = 0;
            for &h in sm {
                while i < sl.len() && sl[i] < h {
                    i += 1;
                }
                if i < sl.len() && sl[i] == h {
                    continue;
                }
                failures += 1;
                report.push(
                    "glueing",
                    format!(
                        "glued configuration {} is not a cube",
                        x.render_cube(
                            &x.unpack(k, nodes[l] | (nodes[h as usize] << half_bits))
                        )
                    ),
                );
            }
        }
    }
    report.metric("glueable-pairs", pairs);
    report.metric("failures", failures);
    Ok(report)
}

/// Run the full certification pipeline: morphism closure, k-completion and
/// glueing for every k <= k_max, 1-ergodicity (informational), and the
/// minimal degree. On success the corresponding flags are set on the space.
pub fn certify_nilspace(x: &mut FiniteCubespace) -> Result<Report> {
    let mut report = Report::new("certify");
    let axioms = certify_cubespace(x);
    let axioms_ok = axioms.passed();
    report.absorb(axioms);
    if axioms_ok {
        x.certified_axioms = true;
    }
    let mut fibrant = true;
    let mut glueing = true;
    for k in 1..=x.k_max {
        let c = check_completion(x, k)?;
        fibrant &= c.passed();
        report.absorb(c);
        let g = check_glueing(x, k)?;
        glueing &= g.passed();
        report.absorb(g);
    }
    if fibrant {
        x.certified_fibrant = true;
    }
    if glueing {
        x.certified_glueing = true;
    }
    // Minimal s with (s+1)-uniqueness; uniqueness must then persist at all
    // higher dimensions within k_max.
    let mut degree = None;
    for s in 0..x.k_max {
        if check_uniqueness(x, s + 1)?.passed() {
            degree = Some(s);
            break;
        }
    }
    match degree {
        Some(s) => {
            for k in s + 2..=x.k_max {
                let u = check_uniqueness(x, k)?;
                if !u.passed() {
                    report.absorb(u);
                    degree = None;
                    break;
                }
            }
        }
        None => report.metric("degree", format!("> {}", x.k_max.saturating_sub(1))),
    }
    if let Some(s) = degree {
        report.metric("degree", s);
        if axioms_ok && fibrant && glueing {
            x.certified_degree = Some(s);
        }
    }
    report.metric("ergodic", check_ergodic(x, 1)?.passed());
    Ok(report)
}

// ---------------------------------------------------------------------------
// Canonical relations, quotients, and the tower
// ---------------------------------------------------------------------------

/// A partition of the point set into disjoint blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Blocks of point ids, each sorted; blocks ordered by smallest member.
    pub blocks: Vec<Vec<Point>>,
    /// block_of[p] = index of the block containing p.
    pub block_of: Vec<usize>,
}

impl Partition {
    pub fn from_block_of(block_ids: &[usize]) -> Partition {
        let mut seen: Vec<Option<usize>> = Vec::new();
        let mut blocks: Vec<Vec<Point>> = Vec::new();
        let mut block_of = vec![0usize; block_ids.len()];
        for (p, &b) in block_ids.iter().enumerate() {
            if seen.len() <= b {
                seen.resize(b + 1, None);
            }
            let idx = *seen[b].get_or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[idx].push(p as Point);
            block_of[p] = idx;
        }
        Partition { blocks, block_of }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// True if every block of `self` is contained in a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&p| coarser.block_of[p as usize] == coarser.block_of[b[0] as usize]))
    }
}

/// The s-th canonical equivalence relation: x ~ y iff the corner
/// configuration with x everywhere and y at the top vertex is an
/// (s+1)-cube. Symmetry, transitivity, and the universal replacement
/// property are verified exhaustively before the partition is returned.
pub fn canonical_relation(x: &FiniteCubespace, s: u32) -> Result<Partition> {
    if !x.certified_axioms || !x.certified_glueing {
        return Err(Error::Precondition(
            "canonical_relation requires certified axioms and glueing".into(),
        ));
    }
    if s + 1 > x.k_max {
        return Err(Error::DimensionTooLarge { k: s + 1, max: x.k_max });
    }
    let n = x.num_points();
    let size = 1usize << (s + 1);
    let mut related = vec![false; n * n];
    let mut config = vec![0 as Point; size];
    for a in 0..n {
        for slot in config.iter_mut() {
            *slot = a as Point;
        }
        for b in 0..n {
            config[size - 1] = b as Point;
            related[a * n + b] = x.has(s + 1, x.pack(&config));
        }
    }
    for a in 0..n {
        if !related[a * n + a] {
            return Err(Error::NotEquivalence(
                x.label(a as Point).into(),
                x.label(a as Point).into(),
                "reflexivity".into(),
            ));
        }
        for b in 0..n {
            if related[a * n + b] != related[b * n + a] {
                return Err(Error::NotEquivalence(
                    x.label(a as Point).into(),
                    x.label(b as Point).into(),
                    "symmetry".into(),
                ));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !related[a * n + b] {
                continue;
            }
            for c in 0..n {
                if related[b * n + c] && !related[a * n + c] {
                    return Err(Error::NotEquivalence(
                        x.label(a as Point).into(),
                        x.label(b as Point).into(),
                        x.label(c as Point).into(),
                    ));
                }
            }
        }
    }
    // Universal replacement: replacing the top vertex of a cube of dimension
    // <= s+1 by an equivalent point yields a cube.
    let mut buf = vec![0 as Point; size];
    for k in 1..=s + 1 {
        let top = (1usize << k) - 1;
        for cube in x.cubes_iter(k) {
            buf[..cube.len()].copy_from_slice(&cube);
            let a = cube[top] as usize;
            for b in 0..n {
                if !related[a * n + b] {
                    continue;
                }
                buf[top] = b as Point;
                if !x.has(k, x.pack(&buf[..cube.len()])) {
                    return Err(Error::Internal(format!(
                        "universal replacement fails at k={k}: cube {} with top replaced by `{}`",
                        x.render_cube(&cube),
                        x.label(b as Point)
                    )));
                }
            }
        }
    }
    // Build blocks by least representative.
    let mut block_ids = vec![usize::MAX; n];
    let mut next = 0usize;
    for a in 0..n {
        if block_ids[a] != usize::MAX {
            continue;
        }
        for b in a..n {
            if related[a * n + b] {
                block_ids[b] = next;
            }
        }
        next += 1;
    }
    Ok(Partition::from_block_of(&block_ids))
}

/// Quotient cubespace: points are blocks (labeled by the sorted member
/// labels joined with `+`), cubes are pointwise images of cubes. Returns
/// the quotient together with the point mapping of the projection.
pub fn quotient_cubespace(
    x: &FiniteCubespace,
    p: &Partition,
) -> Result<(FiniteCubespace, Vec<Point>)> {
    if p.block_of.len() != x.num_points() {
        return Err(Error::Precondition("partition does not cover the point set".into()));
    }
    // Quotient labels: sorted member labels joined with '+'; quotient points
    // ordered by label.
    let mut labeled: Vec<(String, usize)> = p
        .blocks
        .iter()
        .enumerate()
        .map(|(i, block)| {
            let mut labels: Vec<&str> = block.iter().map(|&q| x.label(q)).collect();
            labels.sort_unstable();
            (labels.join("+"), i)
        })
        .collect();
    labeled.sort();
    let mut block_to_new = vec![0 as Point; p.blocks.len()];
    for (new_idx, (_, old_block)) in labeled.iter().enumerate() {
        block_to_new[*old_block] = new_idx as Point;
    }
    let mapping: Vec<Point> =
        (0..x.num_points()).map(|q| block_to_new[p.block_of[q]]).collect();
    let labels: Vec<String> = labeled.into_iter().map(|(l, _)| l).collect();
    let mut cubes_by_dim = Vec::new();
    for k in 1..=x.k_max {
        let list: Vec<Vec<Point>> = x
            .cubes_iter(k)
            .map(|cube| cube.iter().map(|&q| mapping[q as usize]).collect())
            .collect();
        cubes_by_dim.push(list);
    }
    let q = FiniteCubespace::new(labels, x.k_max, cubes_by_dim)?;
    Ok((q, mapping))
}

/// A map of cubespaces, defined on points.
#[derive(Clone)]
pub struct CubespaceMap {
    pub source: Arc<FiniteCubespace>,
    pub target: Arc<FiniteCubespace>,
    pub mapping: Vec<Point>,
}

impl CubespaceMap {
    pub fn new(
        source: Arc<FiniteCubespace>,
        target: Arc<FiniteCubespace>,
        mapping: Vec<Point>,
    ) -> Result<Self> {
        if mapping.len() != source.num_points() {
            return Err(Error::Precondition("mapping must be total on the source points".into()));
        }
        if mapping.iter().any(|&q| q as usize >= target.num_points()) {
            return Err(Error::NotInCarrier("mapping hits a point outside the target".into()));
        }
        Ok(CubespaceMap { source, target, mapping })
    }

    /// Build from labeled pairs `src -> dst`.
    pub fn from_pairs(
        source: Arc<FiniteCubespace>,
        target: Arc<FiniteCubespace>,
        pairs: &[(String, String)],
    ) -> Result<Self> {
        let mut mapping = vec![None; source.num_points()];
        for (a, b) in pairs {
            let p = source.point(a)?;
            let q = target.point(b)?;
            if mapping[p as usize].replace(q).is_some() {
                return Err(Error::Parse(format!("point `{a}` mapped twice")));
            }
        }
        let mapping: Option<Vec<Point>> = mapping.into_iter().collect();
        match mapping {
            Some(mapping) => CubespaceMap::new(source, target, mapping),
            None => Err(Error::Precondition("mapping must be total on the source points".into())),
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        self.mapping[p as usize]
    }

    pub fn apply_config(&self, config: &[Point]) -> Vec<Point> {
        config.iter().map(|&p| self.apply(p)).collect()
    }

    /// Check that cubes map to cubes in every dimension up to the smaller
    /// k_max.
    pub fn is_morphism(&self) -> Report {
        let mut report = Report::new("morphism");
        let up_to = self.source.k_max.min(self.target.k_max);
        for k in 1..=up_to {
            for cube in self.source.cubes_iter(k) {
                let image = self.apply_config(&cube);
                if !self.target.has(k, self.target.pack(&image)) {
                    report.push(
                        "not-a-cube",
                        format!(
                            "image {} of k={k} cube {} is not a cube",
                            self.target.render_cube(&image),
                            self.source.render_cube(&cube)
                        ),
                    );
                }
            }
        }
        report
    }

    /// Serialize as `src -> dst` lines under a `map:` header.
    pub fn to_text(&self) -> String {
        let mut out = String::from("map:\n");
        for (p, &q) in self.mapping.iter().enumerate() {
            out.push_str(&format!("{} -> {}\n", self.source.label(p as Point), self.target.label(q)));
        }
        out
    }

    pub fn parse_text(
        source: Arc<FiniteCubespace>,
        target: Arc<FiniteCubespace>,
        text: &str,
    ) -> Result<Self> {
        let mut pairs = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line == "map:" {
                continue;
            }
            let (a, b) = line
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("bad map line `{line}`")))?;
            pairs.push((a.trim().to_string(), b.trim().to_string()));
        }
        CubespaceMap::from_pairs(source, target, &pairs)
    }
}

/// Fibration check: for every k-corner of the source and every target cube
/// agreeing with its image off the top vertex, a compatible completion must
/// exist. When both spaces carry full certificates, the verdict is
/// cross-checked against fiber-surjectivity (images of canonical classes
/// are canonical classes).
pub fn check_fibration(f: &CubespaceMap, up_to_k: u32) -> Result<Report> {
    let x = &f.source;
    let y = &f.target;
    if up_to_k > x.k_max.min(y.k_max) {
        return Err(Error::DimensionTooLarge { k: up_to_k, max: x.k_max.min(y.k_max) });
    }
    let morph = f.is_morphism();
    if !morph.passed() {
        let detail = morph.items.first().map(|i| i.detail.clone()).unwrap_or_default();
        return Err(Error::NotMorphism(detail));
    }
    let mut report = Report::new("fibration");
    // k = 0: surjectivity.
    let mut hit = vec![false; y.num_points()];
    for &q in &f.mapping {
        hit[q as usize] = true;
    }
    for (q, &h) in hit.iter().enumerate() {
        if !h {
            report.push(
                "not-surjective",
                format!("target point `{}` has no preimage", y.label(q as Point)),
            );
        }
    }
    let nx = x.num_points() as Point;
    let ny = y.num_points() as Point;
    for k in 1..=up_to_k {
        let size = 1usize << k;
        let mut corners = 0usize;
        let mut failures = 0usize;
        let mut xcube = vec![0 as Point; size];
        let mut ycube = vec![0 as Point; size];
        scan_corners(x, k, &mut |corner| {
            corners += 1;
            xcube[..corner.len()].copy_from_slice(corner);
            for (i, &p) in corner.iter().enumerate() {
                ycube[i] = f.apply(p);
            }
            // Tops reachable through X, pushed to Y.
            let mut reachable = vec![false; ny as usize];
            for p in 0..nx {
                xcube[size - 1] = p;
                if x.has(k, x.pack(&xcube)) {
                    reachable[f.apply(p) as usize] = true;
                }
            }
            // Every completion of the image corner in Y must be reachable.
            for q in 0..ny {
                ycube[size - 1] = q;
                if y.has(k, y.pack(&ycube)) && !reachable[q as usize] {
                    failures += 1;
                    report.push(
                        "unliftable",
                        format!(
                            "corner {} cannot be completed over target vertex `{}` (k={k})",
                            x.render_cube(corner),
                            y.label(q)
                        ),
                    );
                }
            }
        });
        report.metric(format!("corners.{k}"), corners);
        report.metric(format!("failures.{k}"), failures);
    }
    // Fiber-surjectivity cross-check on nilspace pairs.
    let certified = |s: &FiniteCubespace| {
        s.certified_axioms && s.certified_glueing && s.certified_fibrant
    };
    if certified(x) && certified(y) {
        let fibration_ok = report.passed();
        let mut fiber_surjective = true;
        for t in 0..x.k_max.min(y.k_max) {
            let px = canonical_relation(x, t)?;
            let py = canonical_relation(y, t)?;
            for block in &px.blocks {
                let mut image: Vec<Point> = block.iter().map(|&p| f.apply(p)).collect();
                image.sort_unstable();
                image.dedup();
                let target_block = &py.blocks[py.block_of[image[0] as usize]];
                if &image != target_block {
                    fiber_surjective = false;
                    report.push(
                        "fiber-surjectivity",
                        format!(
                            "image of a ~{t} class is not a ~{t} class (class of `{}`)",
                            x.label(block[0])
                        ),
                    );
                }
            }
        }
        report.metric("fiber-surjective", fiber_surjective);
        if fibration_ok != fiber_surjective {
            report.push(
                "fibration-vs-fiber-surjectivity",
                format!(
                    "corner lifting verdict {fibration_ok} disagrees with fiber-surjectivity {fiber_surjective}"
                ),
            );
        }
    }
    Ok(report)
}

/// One level of the canonical tower.
pub struct TowerLevel {
    /// The level t: the quotient is X / ~_t.
    pub level: u32,
    pub quotient: Arc<FiniteCubespace>,
    pub projection: CubespaceMap,
}

/// The canonical tower X / ~_s, X / ~_{s-1}, ..., X / ~_0 of a certified
/// fibrant space of degree s. Each projection is verified to be a
/// fibration, each quotient to have (t+1)-uniqueness, and the relations to
/// be nested; composing projections is checked to reproduce the lower
/// quotients.
pub fn canonical_tower(x: &Arc<FiniteCubespace>) -> Result<Vec<TowerLevel>> {
    if !x.certified_axioms || !x.certified_fibrant || !x.certified_glueing {
        return Err(Error::Precondition(
            "canonical_tower requires a certified fibrant space with glueing".into(),
        ));
    }
    let s = x
        .certified_degree
        .ok_or_else(|| Error::Precondition("canonical_tower requires a certified degree".into()))?;
    let mut partitions = Vec::new();
    for t in (0..=s).rev() {
        partitions.push((t, canonical_relation(x, t)?));
    }
    // Nesting: ~_{t+1} refines ~_t.
    for w in partitions.windows(2) {
        if !w[0].1.refines(&w[1].1) {
            return Err(Error::Internal(format!(
                "canonical relations are not nested between levels {} and {}",
                w[0].0, w[1].0
            )));
        }
    }
    let mut levels = Vec::new();
    for (t, part) in &partitions {
        let (mut q, mapping) = quotient_cubespace(x, part)?;
        let cert = certify_nilspace(&mut q)?;
        if !cert.passed() {
            return Err(Error::Internal(format!(
                "quotient at level {t} fails certification: {}",
                cert.items.first().map(|i| i.detail.as_str()).unwrap_or("unknown")
            )));
        }
        let uniq = check_uniqueness(&q, t + 1)?;
        if !uniq.passed() {
            return Err(Error::Internal(format!("quotient at level {t} lacks {}-uniqueness", t + 1)));
        }
        let quotient = Arc::new(q);
        let projection = CubespaceMap::new(Arc::clone(x), Arc::clone(&quotient), mapping)?;
        let fib = check_fibration(&projection, x.k_max)?;
        if !fib.passed() {
            return Err(Error::Internal(format!("projection at level {t} is not a fibration")));
        }
        levels.push(TowerLevel { level: *t, quotient, projection });
    }
    // Composing projections: the canonical relation at level u computed on
    // the quotient at level t (u < t) must reproduce the level-u partition.
    for (i, (t, _)) in partitions.iter().enumerate() {
        for (u, part_u) in partitions.iter().skip(i + 1) {
            let level_t = &levels[i];
            let part = canonical_relation(&level_t.quotient, *u)?;
            let composed: Vec<usize> = (0..x.num_points())
                .map(|p| part.block_of[level_t.projection.apply(p as Point) as usize])
                .collect();
            if &Partition::from_block_of(&composed) != part_u {
                return Err(Error::Internal(format!(
                    "composed projection through level {t} disagrees with ~_{u}"
                )));
            }
        }
    }
    Ok(levels)
}

// ---------------------------------------------------------------------------
// Structure groups
// ---------------------------------------------------------------------------

/// The structure group of a fibration, with its free fiber-transitive
/// action.
pub struct StructureGroupResult {
    /// Equivalence classes of same-fiber pairs, each sorted.
    pub classes: Vec<Vec<(Point, Point)>>,
    pub identity: usize,
    pub add: Vec<Vec<usize>>,
    pub neg: Vec<usize>,
    /// action[a][p] = the image of p under class a.
    pub action: Vec<Vec<Point>>,
    /// Invariant factors d_1 | d_2 | ... with product the group order.
    pub invariant_factors: Vec<u64>,
}

impl StructureGroupResult {
    pub fn order(&self) -> usize {
        self.classes.len()
    }

    pub fn isomorphism_type(&self) -> String {
        if self.invariant_factors.is_empty() {
            "trivial".into()
        } else {
            self.invariant_factors
                .iter()
                .map(|d| format!("Z/{d}"))
                .collect::<Vec<_>>()
                .join(" x ")
        }
    }
}

/// Invariant factors of a finite abelian group given by an addition table:
/// primary decomposition from the counts of elements killed by p^i, then
/// recombination into divisibility order.
fn invariant_factors(g: &TableGroup) -> Vec<u64> {
    let n = g.size() as u64;
    if n == 1 {
        return Vec::new();
    }
    // Factor the order.
    let mut primes = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            primes.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    // For each prime, the multiset of exponents of its cyclic factors.
    let mut exponents: Vec<Vec<u32>> = Vec::new();
    for &p in &primes {
        let mut counts = vec![1u64]; // |{a : p^0 a = 0}| = 1
        loop {
            let i = counts.len() as u32;
            // count elements with p^i a = 0
            let mut cnt = 0u64;
            for a in 0..g.size() {
                let mut acc = 0usize;
                let mut base = a;
                let mut e = p.pow(i);
                // acc = (p^i) * a by double-and-add
                while e > 0 {
                    if e & 1 == 1 {
                        acc = g.add(acc, base);
                    }
                    base = g.add(base, base);
                    e >>= 1;
                }
                if acc == 0 {
                    cnt += 1;
                }
            }
            if cnt == *counts.last().unwrap() {
                break;
            }
            counts.push(cnt);
        }
        // t_i = #{cyclic factors of exponent >= i} = log_p(counts[i]/counts[i-1])
        let mut t = Vec::new();
        for i in 1..counts.len() {
            let ratio = counts[i] / counts[i - 1];
            let mut log = 0u32;
            let mut r = ratio;
            while r > 1 {
                r /= p;
                log += 1;
            }
            t.push(log);
        }
        // Conjugate partition: factor j (0-based, largest first) has
        // exponent #{i : t_i > j}.
        let max_factors = t.first().copied().unwrap_or(0);
        let mut exps = Vec::new();
        for j in 0..max_factors {
            exps.push(t.iter().filter(|&&ti| ti > j).count() as u32);
        }
        exponents.push(exps);
    }
    // Combine: the r-th largest invariant factor multiplies the r-th largest
    // prime-power from each primary component.
    let r = exponents.iter().map(Vec::len).max().unwrap_or(0);
    let mut factors = Vec::new();
    for j in 0..r {
        let mut d = 1u64;
        for (pi, exps) in exponents.iter().enumerate() {
            if j < exps.len() {
                d *= primes[pi].pow(exps[j]);
            }
        }
        factors.push(d);
    }
    factors.reverse(); // ascending, d_1 | d_2 | ...
    factors
}

/// Extract the structure group of a fibration f of degree at most s:
/// same-fiber pairs [x,x'] modulo the relation that identifies [x,x'] with
/// [y,y'] exactly when stacking the two corner configurations gives an
/// (s+1)-cube. Verifies the fibration and relative-ergodicity
/// preconditions, the group axioms, the freeness and fiber-transitivity of
/// the action, and the cube characterization: a deformation c' of a cube c
/// within the fibers is a cube iff its difference configuration is a cube
/// of D_s(A).
pub fn structure_group(f: &CubespaceMap, s: u32) -> Result<StructureGroupResult> {
    let x = &f.source;
    let y = &f.target;
    if s == 0 || s + 1 > x.k_max {
        return Err(Error::Precondition(format!(
            "structure_group needs 1 <= s with s+1 <= k_max (got s={s}, k_max={})",
            x.k_max
        )));
    }
    if !x.certified_axioms || !x.certified_glueing || !y.certified_axioms || !y.certified_glueing {
        return Err(Error::Precondition(
            "structure_group requires certified axioms and glueing on both spaces".into(),
        ));
    }
    if !check_ergodic(x, 1)?.passed() || !check_ergodic(y, 1)?.passed() {
        return Err(Error::Precondition("structure_group requires ergodic spaces".into()));
    }
    let fib = check_fibration(f, x.k_max.min(y.k_max))?;
    if !fib.passed() {
        return Err(Error::Precondition("the map is not a fibration".into()));
    }
    let nx = x.num_points();
    // Relative s-ergodicity: configurations of dimension <= s over a cube
    // of the base are cubes.
    for k in 1..=s {
        let size = 1usize << k;
        let mut config = vec![0 as Point; size];
        let total = (nx as u64).pow(size as u32);
        for idx in 0..total {
            let mut rest = idx;
            for slot in config.iter_mut() {
                *slot = (rest % nx as u64) as Point;
                rest /= nx as u64;
            }
            let image = f.apply_config(&config);
            if y.has(k, y.pack(&image)) && !x.has(k, x.pack(&config)) {
                return Err(Error::Precondition(format!(
                    "fibration is not relatively {s}-ergodic: {} lies over a cube but is not one",
                    x.render_cube(&config)
                )));
            }
        }
    }
    // Degree at most s: relative (s+1)-uniqueness.
    {
        let uniq = check_uniqueness(x, s + 1)?;
        if !uniq.passed() {
            // Distinct completions are allowed only over distinct base points.
            let size = 1usize << (s + 1);
            let mut by_corner: FxHashMap<u128, Vec<Point>> = FxHashMap::default();
            let top_shift = ((1u32 << (s + 1)) - 1) * x.bits;
            let top_mask = ((1u128 << x.bits) - 1) << top_shift;
            for &key in &x.cubes[s as usize].sorted {
                let top = ((key >> top_shift) & ((1u128 << x.bits) - 1)) as Point;
                by_corner.entry(key & !top_mask).or_default().push(top);
            }
            for tops in by_corner.values() {
                for (i, &a) in tops.iter().enumerate() {
                    for &b in &tops[i + 1..] {
                        if f.apply(a) == f.apply(b) {
                            return Err(Error::Precondition(format!(
                                "fibration does not have degree <= {s}: completions `{}` and `{}` share a fiber",
                                x.label(a),
                                x.label(b)
                            )));
                        }
                    }
                }
            }
            let _ = size;
        }
    }
    // Same-fiber pairs, in lexicographic order.
    let mut pairs = Vec::new();
    let mut pair_index: FxHashMap<(Point, Point), usize> = FxHashMap::default();
    for a in 0..nx as Point {
        for b in 0..nx as Point {
            if f.apply(a) == f.apply(b) {
                pair_index.insert((a, b), pairs.len());
                pairs.push((a, b));
            }
        }
    }
    let np = pairs.len();
    // Relation: [x,x'] ~ [y,y'] iff stacking the corner of (x,x') under the
    // corner of (y,y') is an (s+1)-cube.
    let half = 1usize << s;
    let mut config = vec![0 as Point; 2 * half];
    let mut stacked_is_cube = |p: (Point, Point), q: (Point, Point)| -> bool {
        for slot in config[..half].iter_mut() {
            *slot = p.0;
        }
        config[half - 1] = p.1;
        for slot in config[half..].iter_mut() {
            *slot = q.0;
        }
        config[2 * half - 1] = q.1;
        x.has(s + 1, x.pack(&config))
    };
    let mut related = vec![false; np * np];
    for i in 0..np {
        for j in 0..np {
            related[i * np + j] = stacked_is_cube(pairs[i], pairs[j]);
        }
    }
    // The relation must be an equivalence (guaranteed by the verified
    // preconditions; a violation indicates an internal inconsistency).
    for i in 0..np {
        if !related[i * np + i] {
            return Err(Error::Internal("pair relation is not reflexive".into()));
        }
        for j in 0..np {
            if related[i * np + j] != related[j * np + i] {
                return Err(Error::Internal("pair relation is not symmetric".into()));
            }
            if related[i * np + j] {
                for l in 0..np {
                    if related[j * np + l] && !related[i * np + l] {
                        return Err(Error::Internal("pair relation is not transitive".into()));
                    }
                }
            }
        }
    }
    // Classes by least representative.
    let mut class_of_pair = vec![usize::MAX; np];
    let mut classes: Vec<Vec<(Point, Point)>> = Vec::new();
    for i in 0..np {
        if class_of_pair[i] != usize::MAX {
            continue;
        }
        let idx = classes.len();
        let mut members = Vec::new();
        for j in i..np {
            if related[i * np + j] {
                class_of_pair[j] = idx;
                members.push(pairs[j]);
            }
        }
        classes.push(members);
    }
    let m = classes.len();
    let class_of = |a: Point, b: Point| -> usize { class_of_pair[pair_index[&(a, b)]] };
    // Identity: the class of the diagonal pairs, which must all agree.
    let identity = class_of(0, 0);
    for a in 0..nx as Point {
        if class_of(a, a) != identity {
            return Err(Error::Internal("diagonal pairs fall into distinct classes".into()));
        }
    }
    // Addition by concatenation, verified well-defined over every choice of
    // middle point and representatives.
    let mut add = vec![vec![usize::MAX; m]; m];
    for a in 0..m {
        for b in 0..m {
            let mut value = usize::MAX;
            for e in 0..nx as Point {
                for &(p, q) in &classes[a] {
                    if q != e {
                        continue;
                    }
                    for &(r, t) in &classes[b] {
                        if r != e {
                            continue;
                        }
                        let sum = class_of(p, t);
                        if value == usize::MAX {
                            value = sum;
                        } else if value != sum {
                            return Err(Error::Internal(
                                "addition by concatenation is not well-defined".into(),
                            ));
                        }
                    }
                }
            }
            if value == usize::MAX {
                return Err(Error::Internal(
                    "no representative available for concatenation".into(),
                ));
            }
            add[a][b] = value;
        }
    }
    // Negation and the group axioms, checked over the full table.
    let mut neg = vec![usize::MAX; m];
    for (idx, members) in classes.iter().enumerate() {
        let (p, q) = members[0];
        let n_idx = class_of(q, p);
        for &(r, t) in members {
            if class_of(t, r) != n_idx {
                return Err(Error::Internal("negation is not well-defined".into()));
            }
        }
        neg[idx] = n_idx;
    }
    for a in 0..m {
        if add[a][identity] != a || add[identity][a] != a || add[a][neg[a]] != identity {
            return Err(Error::Internal("group identity/inverse axioms fail".into()));
        }
        for b in 0..m {
            if add[a][b] != add[b][a] {
                return Err(Error::Internal("addition is not commutative".into()));
            }
            for c in 0..m {
                if add[add[a][b]][c] != add[a][add[b][c]] {
                    return Err(Error::Internal("addition is not associative".into()));
                }
            }
        }
    }
    // The action: a.p is the unique p' with (p, p') in class a.
    let mut action = vec![vec![Point::MAX; nx]; m];
    for (idx, members) in classes.iter().enumerate() {
        for &(p, q) in members {
            if action[idx][p as usize] != Point::MAX {
                return Err(Error::Internal("action is multi-valued".into()));
            }
            action[idx][p as usize] = q;
        }
    }
    for row in &action {
        if row.iter().any(|&q| q == Point::MAX) {
            return Err(Error::Internal("action is not defined on every point".into()));
        }
    }
    for a in 0..m {
        for b in 0..m {
            for p in 0..nx {
                if action[add[a][b]][p] != action[b][action[a][p] as usize] as Point {
                    return Err(Error::Internal("action does not respect addition".into()));
                }
            }
        }
        // Freeness.
        if a != identity && (0..nx).any(|p| action[a][p] as usize == p) {
            return Err(Error::Internal("action is not free".into()));
        }
    }
    // Orbits are exactly the fibers: same-fiber pairs all lie in some class,
    // which is transitivity; the pair partition establishes uniqueness.
    let table = TableGroup { add: add.clone(), neg: neg.clone() };
    let invariant = invariant_factors(&table);
    let result = StructureGroupResult {
        classes,
        identity,
        add,
        neg,
        action,
        invariant_factors: invariant,
    };
    verify_relative_cube_characterization(f, s, &result, &table)?;
    Ok(result)
}

/// The cube characterization: for every cube c and every configuration c'
/// over the same base cube, c' is a cube iff the configuration of
/// difference classes lies in C^k(D_s(A)). Exhaustive for all k <= k_max.
fn verify_relative_cube_characterization(
    f: &CubespaceMap,
    s: u32,
    a: &StructureGroupResult,
    table: &TableGroup,
) -> Result<()> {
    let x = &f.source;
    // Reindex classes so the identity is element 0, as ds_config_is_cube
    // expects.
    let m = a.order();
    let mut to_grp = vec![0usize; m];
    let mut from_grp = vec![0usize; m];
    for (i, j) in (0..m).map(|i| if i == a.identity { 0 } else if i == 0 { a.identity } else { i }).enumerate() {
        to_grp[i] = j;
        from_grp[j] = i;
    }
    let swapped = TableGroup {
        add: (0..m)
            .map(|i| (0..m).map(|j| to_grp[table.add[from_grp[i]][from_grp[j]]]).collect())
            .collect(),
        neg: (0..m).map(|i| to_grp[table.neg[from_grp[i]]]).collect(),
    };
    // Class of a same-fiber pair.
    let nx = x.num_points();
    let mut pair_class = FxHashMap::default();
    for (idx, members) in a.classes.iter().enumerate() {
        for &(p, q) in members {
            pair_class.insert((p, q), to_grp[idx]);
        }
    }
    // Fibers by base point.
    let mut fibers: Vec<Vec<Point>> = vec![Vec::new(); f.target.num_points()];
    for p in 0..nx as Point {
        fibers[f.apply(p) as usize].push(p);
    }
    for k in 1..=x.k_max {
        let size = 1usize << k;
        let mut cprime = vec![0 as Point; size];
        let mut diff = vec![0usize; size];
        // Face vertex lists for the closed-form D_s membership test,
        // computed once per dimension (empty for k <= s: everything is a
        // cube there).
        let faces: Vec<Vec<u32>> = if k > s {
            Face::all_of_dim(k, s + 1).iter().map(|f| f.vertices()).collect()
        } else {
            Vec::new()
        };
        for cube in x.cubes_iter(k) {
            // Enumerate all configurations in the same fibers.
            let fiber_lists: Vec<&Vec<Point>> =
                cube.iter().map(|&p| &fibers[f.apply(p) as usize]).collect();
            let mut counter = vec![0usize; size];
            loop {
                for (i, c) in counter.iter().enumerate() {
                    cprime[i] = fiber_lists[i][*c];
                    diff[i] = pair_class[&(cube[i], cprime[i])];
                }
                let lhs = x.has(k, x.pack(&cprime));
                let rhs = faces.iter().all(|verts| {
                    let mut sum = 0usize;
                    for (pos, &v) in verts.iter().enumerate() {
                        let e = diff[v as usize];
                        let signed =
                            if (pos as u32).count_ones() % 2 == 0 { e } else { swapped.neg(e) };
                        sum = swapped.add(sum, signed);
                    }
                    sum == 0
                });
                if lhs != rhs {
                    return Err(Error::Internal(format!(
                        "cube characterization fails at k={k}: configuration {} vs cube {}",
                        x.render_cube(&cprime),
                        x.render_cube(&cube)
                    )));
                }
                // Increment.
                let mut pos = 0;
                loop {
                    if pos == size {
                        break;
                    }
                    counter[pos] += 1;
                    if counter[pos] < fiber_lists[pos].len() {
                        break;
                    }
                    counter[pos] = 0;
                    pos += 1;
                }
                if pos == size {
                    break;
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Edge cubespaces, tri-cubes, products, and high-dimensional membership
// ---------------------------------------------------------------------------

/// The edge cubespace: points are the 1-cubes of X, and a k-cube of edges
/// is exactly a (k+1)-cube of X read with its last coordinate as the edge
/// direction. Requires certified morphism closure so that every edge of a
/// cube is a point of the result.
pub fn edge_cubespace(x: &FiniteCubespace) -> Result<FiniteCubespace> {
    if x.k_max < 1 {
        return Err(Error::Precondition("edge_cubespace needs k_max >= 1".into()));
    }
    if !x.certified_axioms {
        return Err(Error::Precondition("edge_cubespace requires certified axioms".into()));
    }
    let edges: Vec<Vec<Point>> = x.cubes_iter(1).collect();
    let labels: Vec<String> =
        edges.iter().map(|e| format!("{}|{}", x.label(e[0]), x.label(e[1]))).collect();
    let mut edge_id: FxHashMap<(Point, Point), Point> = FxHashMap::default();
    for (i, e) in edges.iter().enumerate() {
        edge_id.insert((e[0], e[1]), i as Point);
    }
    let mut cubes_by_dim = Vec::new();
    for k in 1..x.k_max {
        let size = 1usize << k;
        let mut list = Vec::new();
        for cube in x.cubes_iter(k + 1) {
            let mut out = Vec::with_capacity(size);
            for v in 0..size {
                let pair = (cube[v], cube[v + size]);
                let id = edge_id.get(&pair).copied().ok_or_else(|| {
                    Error::Internal(format!(
                        "edge {},{} of a cube is not a 1-cube",
                        x.label(pair.0),
                        x.label(pair.1)
                    ))
                })?;
                out.push(id);
            }
            list.push(out);
        }
        cubes_by_dim.push(list);
    }
    let mut e = FiniteCubespace::new(labels, x.k_max - 1, cubes_by_dim)?;
    // Morphism closure on the base coordinates transfers directly; glueing
    // is inherited from X.
    e.certified_axioms = true;
    e.certified_glueing = x.certified_glueing;
    Ok(e)
}

/// A tri-cube: 2^k cubes glued around the common center.
pub struct TriCube {
    pub dim: u32,
    /// pieces[nu][omega] over the binary-counting orders of nu and omega.
    pub pieces: Vec<Vec<Point>>,
}

/// The outer cube of a tri-cube: omega -> t_omega(0). Verifies the pieces,
/// the compatibility condition, and (given glueing) membership of the
/// outer configuration.
pub fn tricube_outer(t: &TriCube, x: &FiniteCubespace) -> Result<Vec<Point>> {
    let k = t.dim;
    let size = 1usize << k;
    if t.pieces.len() != size {
        return Err(Error::DimensionMismatch { expected: k, got: t.pieces.len() as u32 });
    }
    if !x.certified_glueing {
        return Err(Error::Precondition("tricube_outer requires certified glueing".into()));
    }
    for (nu, piece) in t.pieces.iter().enumerate() {
        if piece.len() != size {
            return Err(Error::DimensionMismatch { expected: k, got: piece.len() as u32 });
        }
        if !x.is_cube(piece)? {
            return Err(Error::Precondition(format!(
                "tri-cube piece nu={nu:0k$b} is not a cube",
                k = k as usize
            )));
        }
    }
    // Compatibility: pieces agree wherever every coordinate is shared or
    // points at the center.
    for nu in 0..size {
        for nu2 in 0..size {
            for omega in 0..size {
                let differing = (nu ^ nu2) & !omega;
                if differing == 0 && t.pieces[nu][omega] != t.pieces[nu2][omega] {
                    return Err(Error::TriCubeIncompatible {
                        nu: nu as u32,
                        nu2: nu2 as u32,
                        omega: omega as u32,
                    });
                }
            }
        }
    }
    let outer: Vec<Point> = (0..size).map(|nu| t.pieces[nu][0]).collect();
    if !x.is_cube(&outer)? {
        return Err(Error::Internal(
            "outer configuration of a compatible tri-cube is not a cube despite glueing".into(),
        ));
    }
    Ok(outer)
}

/// The product cubespace with componentwise cubes; labels are joined with
/// a dot.
pub fn product_cubespace(x: &FiniteCubespace, y: &FiniteCubespace) -> Result<FiniteCubespace> {
    let k_max = x.k_max.min(y.k_max);
    let labels: Vec<String> = x
        .points
        .iter()
        .flat_map(|a| y.points.iter().map(move |b| format!("{a}.{b}")))
        .collect();
    let ny = y.num_points();
    let pair = |a: Point, b: Point| (a as usize * ny + b as usize) as Point;
    let mut cubes_by_dim = Vec::new();
    for k in 1..=k_max {
        let mut list = Vec::new();
        for cx in x.cubes_iter(k) {
            for cy in y.cubes_iter(k) {
                list.push(cx.iter().zip(&cy).map(|(&a, &b)| pair(a, b)).collect());
            }
        }
        cubes_by_dim.push(list);
    }
    let mut p = FiniteCubespace::new(labels, k_max, cubes_by_dim)?;
    // Componentwise properties transfer to the product.
    p.certified_axioms = x.certified_axioms && y.certified_axioms;
    p.certified_fibrant = x.certified_fibrant && y.certified_fibrant;
    p.certified_glueing = x.certified_glueing && y.certified_glueing;
    p.certified_degree = match (x.certified_degree, y.certified_degree) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    Ok(p)
}

/// Membership for configurations of dimension beyond k_max on a certified
/// space of degree s: true iff every (s+1)-dimensional face is a stored
/// cube. For k <= k_max the stored sets answer directly.
pub fn high_cube_membership(x: &FiniteCubespace, values: &[Point]) -> Result<bool> {
    let s = x.certified_degree.ok_or_else(|| {
        Error::Precondition("high_cube_membership requires a certified degree".into())
    })?;
    let len = values.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Parse(format!("configuration length {len} is not a power of two")));
    }
    let k = len.trailing_zeros();
    if k > crate::cube::MAX_CHECK_DIM {
        return Err(Error::DimensionTooLarge { k, max: crate::cube::MAX_CHECK_DIM });
    }
    if k <= x.k_max {
        return x.is_cube(values);
    }
    if s + 1 > x.k_max {
        return Err(Error::Precondition(format!(
            "degree {s} exceeds the stored cube dimensions (k_max {})",
            x.k_max
        )));
    }
    for face in Face::all_of_dim(k, s + 1) {
        let sub: Vec<Point> = face.vertices().iter().map(|&v| values[v as usize]).collect();
        if !x.has(s + 1, x.pack(&sub)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Brute-force isomorphism search between two small cubespaces: a point
/// bijection matching every cube set up to the common k_max. Intended for
/// golden tests; guarded to at most 8 points.
pub fn find_isomorphism(a: &FiniteCubespace, b: &FiniteCubespace) -> Result<Option<Vec<Point>>> {
    if a.num_points() != b.num_points() {
        return Ok(None);
    }
    let n = a.num_points();
    if n > 8 {
        return Err(Error::SizeGuard(format!("isomorphism search on {n} points refused")));
    }
    let k_max = a.k_max.min(b.k_max);
    for k in 1..=k_max {
        if a.cube_count(k) != b.cube_count(k) {
            return Ok(None);
        }
    }
    let mut perm: Vec<Point> = (0..n as Point).collect();
    // Heap's algorithm over all permutations.
    let mut stack = vec![0usize; n];
    let mut i = 0;
    loop {
        let ok = (1..=k_max).all(|k| {
            a.cubes_iter(k).all(|cube| {
                let image: Vec<Point> = cube.iter().map(|&p| perm[p as usize]).collect();
                b.has(k, b.pack(&image))
            })
        });
        if ok {
            return Ok(Some(perm));
        }
        // Advance to the next permutation.
        loop {
            if i >= n {
                return Ok(None);
            }
            if stack[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(stack[i], i);
                }
                stack[i] += 1;
                i = 0;
                break;
            } else {
                stack[i] = 0;
                i += 1;
            }
        }
    }
}
