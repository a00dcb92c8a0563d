//! Arithmetic in the finite abelian p-group layers `Z/p^n x G` of the
//! profinite group `Z_p x G`, with `G` a finite abelian p-group.
//!
//! Closed subgroups of `Z_p x G` are specified by finitely many generators
//! whose `Z_p`-coordinate is either zero or a power `p^k`; that is enough to
//! express every inertia group this crate needs, and every order or index we
//! compute is insensitive to unit scaling of the `Z_p`-coordinate. The image
//! of such a subgroup in a layer quotient is an honest finite subgroup, and
//! all layer images stabilize in shape once the level reaches
//! `max(k) + max exponent of G`, which is what certifies the reported limits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::linalg::{kernel_basis, smith_normal_form, IntMatrix, LatticeSolver};
use crate::{Error, Result};

/// Subgroups with ambient order at most this are stored as explicit element
/// sets; larger ones fall back to a lattice basis handled through Smith
/// normal form.
pub const EXPLICIT_LIMIT: u64 = 1 << 20;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Symbolic specification of `Z_p x G`, where `G` is the product of cyclic
/// groups of the given prime-power orders. Layer `n` is the finite quotient
/// `Z/p^n x G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfiniteSpec {
    p: u64,
    g_factors: Vec<u64>,
}

impl ProfiniteSpec {
    pub fn new(p: u64, g_factors: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        for &f in &g_factors {
            if f < 2 || !is_power_of(f, p) {
                return Err(Error::InvalidGroup(format!(
                    "factor {f} is not a positive power of {p}"
                )));
            }
        }
        Ok(ProfiniteSpec { p, g_factors })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g_factors(&self) -> &[u64] {
        &self.g_factors
    }

    pub fn g_order(&self) -> u64 {
        self.g_factors.iter().product()
    }

    /// Largest exponent e with p^e the order of a cyclic factor of G.
    pub fn g_max_exponent(&self) -> u32 {
        self.g_factors
            .iter()
            .map(|&f| {
                let mut e = 0;
                let mut v = f;
                while v > 1 {
                    v /= self.p;
                    e += 1;
                }
                e
            })
            .max()
            .unwrap_or(0)
    }

    /// The spec of the quotient by `1 x G`, i.e. plain `Z_p`.
    pub fn quotient_by_g(&self) -> ProfiniteSpec {
        ProfiniteSpec { p: self.p, g_factors: Vec::new() }
    }

    /// The finite quotient `Z/p^n x G`.
    pub fn layer(&self, n: u32) -> Result<LayerGroup> {
        let pn = self
            .p
            .checked_pow(n)
            .ok_or_else(|| Error::InvalidGroup(format!("p^{n} overflows")))?;
        let mut moduli = Vec::with_capacity(1 + self.g_factors.len());
        moduli.push(pn);
        moduli.extend_from_slice(&self.g_factors);
        let mut order: u64 = 1;
        for &m in &moduli {
            order = order
                .checked_mul(m)
                .ok_or_else(|| Error::InvalidGroup("layer order overflows".into()))?;
        }
        Ok(LayerGroup { p: self.p, level: n, moduli, order })
    }
}

fn is_power_of(mut v: u64, p: u64) -> bool {
    while v.is_multiple_of(p) {
        v /= p;
    }
    v == 1
}

/// Element of a layer group, as reduced residues, coordinate 0 being the
/// `Z/p^n` part.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerElem(Vec<u64>);

impl LayerElem {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl std::fmt::Display for LayerElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(":"))
    }
}

/// A finite abelian p-group `Z/p^n x G` presented as a product of cyclic
/// groups, with element arithmetic and a fixed enumeration order.
///
/// Elements are enumerated by mixed-radix index with coordinate 0 most
/// significant; all deterministic orderings downstream (coset representative
/// choice, derived-graph vertex order) derive from this enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerGroup {
    p: u64,
    level: u32,
    moduli: Vec<u64>,
    order: u64,
}

impl LayerGroup {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn zero(&self) -> LayerElem {
        LayerElem(vec![0; self.moduli.len()])
    }

    pub fn add(&self, a: &LayerElem, b: &LayerElem) -> LayerElem {
        LayerElem(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.moduli)
                .map(|((&x, &y), &m)| (x + y) % m)
                .collect(),
        )
    }

    pub fn neg(&self, a: &LayerElem) -> LayerElem {
        LayerElem(
            a.0.iter()
                .zip(&self.moduli)
                .map(|(&x, &m)| (m - x) % m)
                .collect(),
        )
    }

    pub fn sub(&self, a: &LayerElem, b: &LayerElem) -> LayerElem {
        self.add(a, &self.neg(b))
    }

    /// Builds an element from signed coordinates, reducing each one.
    pub fn elem_from_signed(&self, coords: &[i64]) -> Result<LayerElem> {
        if coords.len() != self.moduli.len() {
            return Err(Error::InvalidGroup(format!(
                "element has {} coordinates, layer has {}",
                coords.len(),
                self.moduli.len()
            )));
        }
        Ok(LayerElem(
            coords
                .iter()
                .zip(&self.moduli)
                .map(|(&x, &m)| (x.rem_euclid(m as i64)) as u64)
                .collect(),
        ))
    }

    /// Mixed-radix index of an element in the fixed enumeration order.
    pub fn index_of(&self, e: &LayerElem) -> u64 {
        let mut idx = 0u64;
        for (c, m) in e.0.iter().zip(&self.moduli) {
            idx = idx * m + c;
        }
        idx
    }

    pub fn elem_at(&self, mut idx: u64) -> LayerElem {
        let mut coords = vec![0u64; self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            coords[i] = idx % self.moduli[i];
            idx /= self.moduli[i];
        }
        LayerElem(coords)
    }

    pub fn elements(&self) -> impl Iterator<Item = LayerElem> + '_ {
        (0..self.order).map(|i| self.elem_at(i))
    }

    /// Projection `Z/p^n x G -> Z/p^m x G` onto a lower level of the same
    /// spec.
    pub fn project_to_level(&self, e: &LayerElem, lower: &LayerGroup) -> LayerElem {
        assert!(lower.level <= self.level && lower.moduli[1..] == self.moduli[1..]);
        let mut coords = e.0.clone();
        coords[0] %= lower.moduli[0];
        LayerElem(coords)
    }

    /// Projection onto the `Z/p^n` factor (a layer of the quotient-by-G
    /// spec).
    pub fn project_to_base(&self, e: &LayerElem, base: &LayerGroup) -> LayerElem {
        assert!(base.level == self.level && base.moduli.len() == 1);
        LayerElem(vec![e.0[0]])
    }

    /// The subgroup `1 x G` of this layer.
    pub fn g_part_subgroup(&self) -> FiniteSubgroup {
        let gens: Vec<LayerElem> = (1..self.moduli.len())
            .map(|i| {
                let mut c = vec![0u64; self.moduli.len()];
                c[i] = 1 % self.moduli[i];
                LayerElem(c)
            })
            .collect();
        FiniteSubgroup::generate(self.clone(), &gens)
    }

    pub fn full_subgroup(&self) -> FiniteSubgroup {
        let gens: Vec<LayerElem> = (0..self.moduli.len())
            .map(|i| {
                let mut c = vec![0u64; self.moduli.len()];
                c[i] = 1 % self.moduli[i];
                LayerElem(c)
            })
            .collect();
        FiniteSubgroup::generate(self.clone(), &gens)
    }
}

/// An element of `Z_p x G` as it appears in voltage assignments: an integer
/// standing for a compatible system of residues in the `Z_p` coordinate, and
/// reduced residues in the `G` coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    zp: BigInt,
    g: Vec<u64>,
}

impl GroupElement {
    pub fn new(spec: &ProfiniteSpec, zp: BigInt, g_coords: &[i64]) -> Result<Self> {
        if g_coords.len() != spec.g_factors().len() {
            return Err(Error::InvalidGroup(format!(
                "element has {} G-coordinates, spec has {}",
                g_coords.len(),
                spec.g_factors().len()
            )));
        }
        let g = g_coords
            .iter()
            .zip(spec.g_factors())
            .map(|(&x, &m)| x.rem_euclid(m as i64) as u64)
            .collect();
        Ok(GroupElement { zp, g })
    }

    pub fn zero(spec: &ProfiniteSpec) -> Self {
        GroupElement { zp: BigInt::zero(), g: vec![0; spec.g_factors().len()] }
    }

    pub fn zp(&self) -> &BigInt {
        &self.zp
    }

    pub fn g_coords(&self) -> &[u64] {
        &self.g
    }

    pub fn negate(&self, spec: &ProfiniteSpec) -> GroupElement {
        GroupElement {
            zp: -self.zp.clone(),
            g: self
                .g
                .iter()
                .zip(spec.g_factors())
                .map(|(&x, &m)| (m - x) % m)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zp.is_zero() && self.g.iter().all(|&x| x == 0)
    }

    /// Image in a layer of the same spec.
    pub fn reduce_in(&self, layer: &LayerGroup) -> LayerElem {
        let pn = BigInt::from(layer.moduli[0]);
        let z = self.zp.mod_floor(&pn).to_u64().expect("reduced residue fits");
        let mut coords = Vec::with_capacity(layer.moduli.len());
        coords.push(z);
        for (i, &m) in layer.moduli[1..].iter().enumerate() {
            // layers of the quotient-by-G spec carry no G coordinates
            coords.push(self.g.get(i).copied().unwrap_or(0) % m);
        }
        LayerElem(coords)
    }

    /// Image under the quotient by `1 x G`.
    pub fn quotient_by_g(&self) -> GroupElement {
        GroupElement { zp: self.zp.clone(), g: Vec::new() }
    }
}

/// The `Z_p`-coordinate of a closed-subgroup generator: zero, or the
/// subgroup element `p^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZpPart {
    Zero,
    Pow(u32),
}

/// One generator of a closed subgroup of `Z_p x G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InertiaGenerator {
    pub zp: ZpPart,
    pub g: Vec<u64>,
}

/// A closed subgroup of `Z_p x G`, given by generators. The image in every
/// layer quotient is computed from the generator images.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubgroupSpec {
    pub generators: Vec<InertiaGenerator>,
}

impl SubgroupSpec {
    pub fn trivial() -> Self {
        SubgroupSpec { generators: Vec::new() }
    }

    /// The full `1 x G`.
    pub fn g_factor(spec: &ProfiniteSpec) -> Self {
        let n = spec.g_factors().len();
        SubgroupSpec {
            generators: (0..n)
                .map(|i| {
                    let mut g = vec![0u64; n];
                    g[i] = 1;
                    InertiaGenerator { zp: ZpPart::Zero, g }
                })
                .collect(),
        }
    }

    /// The factor `Z_p x 1`.
    pub fn zp_factor(spec: &ProfiniteSpec) -> Self {
        SubgroupSpec {
            generators: vec![InertiaGenerator {
                zp: ZpPart::Pow(0),
                g: vec![0; spec.g_factors().len()],
            }],
        }
    }

    /// The whole group `Z_p x G`.
    pub fn full(spec: &ProfiniteSpec) -> Self {
        let mut s = Self::g_factor(spec);
        s.generators.extend(Self::zp_factor(spec).generators);
        s
    }

    /// Largest k over generators with `Z_p`-part `p^k` (0 when none).
    pub fn max_pow(&self) -> u32 {
        self.generators
            .iter()
            .filter_map(|g| match g.zp {
                ZpPart::Pow(k) => Some(k),
                ZpPart::Zero => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn has_zp_part(&self) -> bool {
        self.generators.iter().any(|g| matches!(g.zp, ZpPart::Pow(_)))
    }

    /// Whether the closed subgroup is trivial (so its image is trivial in
    /// every layer).
    pub fn is_trivial(&self, spec: &ProfiniteSpec) -> bool {
        self.generators.iter().all(|g| {
            matches!(g.zp, ZpPart::Zero)
                && g.g.iter().zip(spec.g_factors()).all(|(&x, &m)| x % m == 0)
        })
    }

    /// Drops the `G`-coordinates, giving the image under the quotient by
    /// `1 x G`.
    pub fn quotient_by_g(&self) -> SubgroupSpec {
        SubgroupSpec {
            generators: self
                .generators
                .iter()
                .map(|g| InertiaGenerator { zp: g.zp, g: Vec::new() })
                .collect(),
        }
    }

    /// Generator images in a layer group.
    pub fn generator_images(&self, layer: &LayerGroup) -> Result<Vec<LayerElem>> {
        let pn = layer.moduli()[0];
        self.generators
            .iter()
            .map(|gen| {
                if gen.g.len() != layer.moduli().len() - 1 {
                    return Err(Error::InvalidGroup(format!(
                        "generator has {} G-coordinates, layer has {}",
                        gen.g.len(),
                        layer.moduli().len() - 1
                    )));
                }
                let z = match gen.zp {
                    ZpPart::Zero => 0,
                    ZpPart::Pow(k) => {
                        // p^k mod p^n
                        if k >= layer.level() {
                            0
                        } else {
                            layer.p().pow(k) % pn
                        }
                    }
                };
                let mut coords = vec![z];
                coords.extend(gen.g.iter().zip(&layer.moduli()[1..]).map(|(&x, &m)| x % m));
                Ok(LayerElem(coords))
            })
            .collect()
    }

    /// The image subgroup in a layer quotient.
    pub fn image_in(&self, layer: &LayerGroup) -> Result<FiniteSubgroup> {
        let gens = self.generator_images(layer)?;
        Ok(FiniteSubgroup::generate(layer.clone(), &gens))
    }

    /// Level from which all layer images of this subgroup have stabilized in
    /// shape: `max(k) + max exponent of G`.
    pub fn stabilization_level(&self, spec: &ProfiniteSpec) -> u32 {
        self.max_pow() + spec.g_max_exponent()
    }

    /// Stabilized limit data: `m_inf` is the limit order of the intersection
    /// with `1 x G`, `n_inf` the limit index in the layers (`None` when the
    /// index grows without bound, i.e. when no generator has a nonzero
    /// `Z_p`-part).
    pub fn limit_quantities(&self, spec: &ProfiniteSpec) -> Result<LimitQuantities> {
        let n_star = self.stabilization_level(spec);
        let layer = spec.layer(n_star)?;
        let image = self.image_in(&layer)?;
        let m_inf = image.intersect(&layer.g_part_subgroup())?.order();
        let i_infinite = self.has_zp_part();
        let n_inf = i_infinite.then(|| image.index());
        Ok(LimitQuantities {
            m_inf,
            n_inf,
            i_infinite,
            i_trivial: self.is_trivial(spec),
            certified_level: n_star,
        })
    }
}

/// Limits of the per-layer quantities attached to a closed subgroup,
/// certified from the structural stabilization level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitQuantities {
    /// Limit of the intersection order with `1 x G` (non-increasing in n).
    pub m_inf: u64,
    /// Limit of the layer index (non-decreasing in n); `None` = infinite.
    pub n_inf: Option<u64>,
    /// The closed subgroup is infinite.
    pub i_infinite: bool,
    /// The closed subgroup is trivial.
    pub i_trivial: bool,
    /// Layer from which the per-layer quantities equal the limits.
    pub certified_level: u32,
}

#[derive(Debug, Clone)]
enum SubgroupRepr {
    /// Sorted enumeration indices of all elements.
    Elements(Vec<u64>),
    /// Column lattice in Z^r containing diag(moduli); `quotient_order` is
    /// the index of that lattice in Z^r.
    Lattice { basis: IntMatrix, quotient_order: u64 },
}

/// A subgroup of a layer group.
#[derive(Debug, Clone)]
pub struct FiniteSubgroup {
    layer: LayerGroup,
    repr: SubgroupRepr,
}

impl FiniteSubgroup {
    /// Subgroup generated by the given elements.
    pub fn generate(layer: LayerGroup, gens: &[LayerElem]) -> Self {
        if layer.order() <= EXPLICIT_LIMIT {
            let mut seen = vec![false; layer.order() as usize];
            let zero = layer.zero();
            seen[layer.index_of(&zero) as usize] = true;
            let mut frontier = vec![zero];
            while let Some(cur) = frontier.pop() {
                for g in gens {
                    let next = layer.add(&cur, g);
                    let idx = layer.index_of(&next) as usize;
                    if !seen[idx] {
                        seen[idx] = true;
                        frontier.push(next);
                    }
                }
            }
            let elements: Vec<u64> = seen
                .iter()
                .enumerate()
                .filter_map(|(i, &s)| s.then_some(i as u64))
                .collect();
            FiniteSubgroup { layer, repr: SubgroupRepr::Elements(elements) }
        } else {
            let repr = lattice_repr(&layer, gens);
            FiniteSubgroup { layer, repr }
        }
    }

    pub fn layer(&self) -> &LayerGroup {
        &self.layer
    }

    pub fn order(&self) -> u64 {
        match &self.repr {
            SubgroupRepr::Elements(e) => e.len() as u64,
            SubgroupRepr::Lattice { quotient_order, .. } => self.layer.order() / quotient_order,
        }
    }

    /// Index in the ambient layer group.
    pub fn index(&self) -> u64 {
        self.layer.order() / self.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn contains(&self, e: &LayerElem) -> bool {
        match &self.repr {
            SubgroupRepr::Elements(elems) => elems.binary_search(&self.layer.index_of(e)).is_ok(),
            SubgroupRepr::Lattice { basis, .. } => {
                let solver = LatticeSolver::new(basis);
                let x: Vec<BigInt> = e.coords().iter().map(|&c| BigInt::from(c)).collect();
                solver.contains(&x)
            }
        }
    }

    /// All elements, in enumeration order. Requires the explicit
    /// representation.
    pub fn elements(&self) -> Result<Vec<LayerElem>> {
        match &self.repr {
            SubgroupRepr::Elements(elems) => {
                Ok(elems.iter().map(|&i| self.layer.elem_at(i)).collect())
            }
            SubgroupRepr::Lattice { .. } => Err(Error::InvalidGroup(
                "subgroup too large for explicit element enumeration".into(),
            )),
        }
    }

    /// Coset representatives, each minimal in the layer enumeration order;
    /// together they partition the layer group.
    pub fn cosets(&self) -> Result<Vec<LayerElem>> {
        Ok(self
            .coset_table()?
            .reps
            .iter()
            .map(|&i| self.layer.elem_at(i))
            .collect())
    }

    /// Full coset decomposition: for every layer element, the ordinal of its
    /// coset; representatives are minimal in enumeration order and listed in
    /// order of their minimal element.
    pub fn coset_table(&self) -> Result<CosetTable> {
        let SubgroupRepr::Elements(elems) = &self.repr else {
            return Err(Error::InvalidGroup(
                "subgroup too large for coset enumeration".into(),
            ));
        };
        let order = self.layer.order() as usize;
        let mut coset_of = vec![u32::MAX; order];
        let mut reps = Vec::new();
        for idx in 0..order as u64 {
            if coset_of[idx as usize] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            reps.push(idx);
            let base = self.layer.elem_at(idx);
            for &s in elems {
                let member = self.layer.add(&base, &self.layer.elem_at(s));
                coset_of[self.layer.index_of(&member) as usize] = c;
            }
        }
        Ok(CosetTable { reps, coset_of })
    }

    pub fn intersect(&self, other: &FiniteSubgroup) -> Result<FiniteSubgroup> {
        if self.layer != other.layer {
            return Err(Error::AmbientMismatch);
        }
        match (&self.repr, &other.repr) {
            (SubgroupRepr::Elements(a), SubgroupRepr::Elements(b)) => {
                let set: Vec<u64> = a.iter().copied().filter(|i| b.binary_search(i).is_ok()).collect();
                Ok(FiniteSubgroup { layer: self.layer.clone(), repr: SubgroupRepr::Elements(set) })
            }
            _ => {
                let b1 = self.lattice_basis();
                let b2 = other.lattice_basis();
                let rank = self.layer.rank();
                let mut stacked = IntMatrix::zero(rank, b1.cols() + b2.cols());
                for i in 0..rank {
                    for j in 0..b1.cols() {
                        stacked[(i, j)] = b1[(i, j)].clone();
                    }
                    for j in 0..b2.cols() {
                        stacked[(i, b1.cols() + j)] = -b2[(i, j)].clone();
                    }
                }
                let kernel = kernel_basis(&stacked);
                let mut gens = Vec::new();
                for k in &kernel {
                    // B1 * (first block of k) lies in both lattices
                    let mut v = vec![BigInt::zero(); rank];
                    for (j, kj) in k.iter().take(b1.cols()).enumerate() {
                        for (i, vi) in v.iter_mut().enumerate() {
                            *vi += &b1[(i, j)] * kj;
                        }
                    }
                    let coords: Vec<u64> = v
                        .iter()
                        .zip(self.layer.moduli())
                        .map(|(x, &m)| {
                            x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
                        })
                        .collect();
                    gens.push(LayerElem(coords));
                }
                Ok(FiniteSubgroup::generate(self.layer.clone(), &gens))
            }
        }
    }

    /// Two subgroups of the same layer are equal iff they have the same
    /// order and one contains a generating set of the other.
    pub fn same_subgroup(&self, other: &FiniteSubgroup) -> Result<bool> {
        if self.layer != other.layer {
            return Err(Error::AmbientMismatch);
        }
        if self.order() != other.order() {
            return Ok(false);
        }
        match &other.repr {
            SubgroupRepr::Elements(elems) => Ok(elems
                .iter()
                .all(|&i| self.contains(&self.layer.elem_at(i)))),
            SubgroupRepr::Lattice { basis, .. } => {
                for j in 0..basis.cols() {
                    let coords: Vec<u64> = (0..self.layer.rank())
                        .map(|i| {
                            basis[(i, j)]
                                .mod_floor(&BigInt::from(self.layer.moduli()[i]))
                                .to_u64()
                                .expect("residue fits")
                        })
                        .collect();
                    if !self.contains(&LayerElem(coords)) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn lattice_basis(&self) -> IntMatrix {
        match &self.repr {
            SubgroupRepr::Lattice { basis, .. } => basis.clone(),
            SubgroupRepr::Elements(elems) => {
                let rank = self.layer.rank();
                let mut basis = IntMatrix::zero(rank, elems.len() + rank);
                for (j, &idx) in elems.iter().enumerate() {
                    let e = self.layer.elem_at(idx);
                    for i in 0..rank {
                        basis[(i, j)] = BigInt::from(e.coords()[i]);
                    }
                }
                for (i, &m) in self.layer.moduli().iter().enumerate() {
                    basis[(i, elems.len() + i)] = BigInt::from(m);
                }
                basis
            }
        }
    }
}

fn lattice_repr(layer: &LayerGroup, gens: &[LayerElem]) -> SubgroupRepr {
    let rank = layer.rank();
    let mut basis = IntMatrix::zero(rank, gens.len() + rank);
    for (j, g) in gens.iter().enumerate() {
        for i in 0..rank {
            basis[(i, j)] = BigInt::from(g.coords()[i]);
        }
    }
    for (i, &m) in layer.moduli().iter().enumerate() {
        basis[(i, gens.len() + i)] = BigInt::from(m);
    }
    let snf = smith_normal_form(&basis, false);
    let quotient_order = snf
        .nonzero_product()
        .to_u64()
        .expect("quotient order fits in u64");
    SubgroupRepr::Lattice { basis, quotient_order }
}

/// Coset decomposition of a layer group by a subgroup.
pub struct CosetTable {
    /// Enumeration index of the minimal representative of each coset.
    pub reps: Vec<u64>,
    /// For each layer element (by enumeration index), its coset ordinal.
    pub coset_of: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec(p: u64, g: &[u64]) -> ProfiniteSpec {
        ProfiniteSpec::new(p, g.to_vec()).unwrap()
    }

    #[test]
    fn layer_orders() {
        assert_eq!(spec(2, &[2]).layer(0).unwrap().order(), 2);
        assert_eq!(spec(3, &[3]).layer(2).unwrap().order(), 27);
        assert_eq!(spec(2, &[4, 2]).layer(3).unwrap().order(), 64);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(ProfiniteSpec::new(4, vec![]), Err(Error::NotPrime(4))));
        assert!(ProfiniteSpec::new(2, vec![6]).is_err());
        assert!(ProfiniteSpec::new(2, vec![1]).is_err());
        assert!(ProfiniteSpec::new(3, vec![9, 3]).is_ok());
    }

    #[test]
    fn element_arithmetic_and_enumeration() {
        let layer = spec(2, &[4]).layer(2).unwrap();
        assert_eq!(layer.order(), 16);
        let a = layer.elem_from_signed(&[3, 2]).unwrap();
        let b = layer.elem_from_signed(&[2, 3]).unwrap();
        let sum = layer.add(&a, &b);
        assert_eq!(sum.coords(), &[1, 1]);
        assert_eq!(layer.add(&a, &layer.neg(&a)), layer.zero());
        // index round trip
        for i in 0..layer.order() {
            assert_eq!(layer.index_of(&layer.elem_at(i)), i);
        }
    }

    #[test]
    fn zp_factor_image_is_full_cyclic_factor() {
        let s = spec(2, &[2]);
        for n in 0..=4 {
            let layer = s.layer(n).unwrap();
            let img = SubgroupSpec::zp_factor(&s).image_in(&layer).unwrap();
            assert_eq!(img.order(), 2u64.pow(n));
        }
    }

    #[test]
    fn trivial_and_g_images() {
        let s = spec(3, &[3]);
        let layer = s.layer(2).unwrap();
        assert_eq!(SubgroupSpec::trivial().image_in(&layer).unwrap().order(), 1);
        let g = SubgroupSpec::g_factor(&s).image_in(&layer).unwrap();
        // order p independent of the level
        assert_eq!(g.order(), 3);
        let deeper = s.layer(4).unwrap();
        assert_eq!(SubgroupSpec::g_factor(&s).image_in(&deeper).unwrap().order(), 3);
    }

    #[test]
    fn cosets_partition() {
        let s = spec(2, &[4]);
        let layer = s.layer(1).unwrap(); // order 8
        let full = SubgroupSpec::full(&s).image_in(&layer).unwrap();
        assert_eq!(full.cosets().unwrap().len(), 1);
        let trivial = SubgroupSpec::trivial().image_in(&layer).unwrap();
        assert_eq!(trivial.cosets().unwrap().len(), 8);
        let g = SubgroupSpec::g_factor(&s).image_in(&layer).unwrap();
        let cosets = g.cosets().unwrap();
        assert_eq!(cosets.len() as u64 * g.order(), layer.order());
        // minimal representative of the first coset is zero
        assert_eq!(cosets[0], layer.zero());
    }

    #[test]
    fn intersections() {
        let s = spec(2, &[2]);
        let layer = s.layer(2).unwrap();
        let g = SubgroupSpec::g_factor(&s).image_in(&layer).unwrap();
        let zp = SubgroupSpec::zp_factor(&s).image_in(&layer).unwrap();
        let full = SubgroupSpec::full(&s).image_in(&layer).unwrap();
        // f meet full = f
        assert!(g.intersect(&full).unwrap().same_subgroup(&g).unwrap());
        // direct factors meet trivially
        assert!(zp.intersect(&g).unwrap().is_trivial());
        // full meet G = G (enumerated at layer 2, p = 2, G = Z/2)
        let meet = full.intersect(&g).unwrap();
        assert!(meet.same_subgroup(&g).unwrap());
        assert_eq!(meet.order(), 2);
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let s = spec(2, &[2]);
        let a = SubgroupSpec::full(&s).image_in(&s.layer(1).unwrap()).unwrap();
        let b = SubgroupSpec::full(&s).image_in(&s.layer(2).unwrap()).unwrap();
        assert!(matches!(a.intersect(&b), Err(Error::AmbientMismatch)));
    }

    #[test]
    fn limit_quantities_of_canonical_subgroups() {
        let s = spec(2, &[2]);
        // G: finite, index grows without bound
        let lq = SubgroupSpec::g_factor(&s).limit_quantities(&s).unwrap();
        assert_eq!(lq.m_inf, 2);
        assert_eq!(lq.n_inf, None);
        assert!(!lq.i_infinite && !lq.i_trivial);
        // Z_p: infinite, trivial G-intersection, index #G
        let lq = SubgroupSpec::zp_factor(&s).limit_quantities(&s).unwrap();
        assert_eq!(lq.m_inf, 1);
        assert_eq!(lq.n_inf, Some(2));
        assert!(lq.i_infinite);
        // full group
        let lq = SubgroupSpec::full(&s).limit_quantities(&s).unwrap();
        assert_eq!(lq.m_inf, 2);
        assert_eq!(lq.n_inf, Some(1));
        assert!(lq.i_infinite && !lq.i_trivial);
        // trivial subgroup
        let lq = SubgroupSpec::trivial().limit_quantities(&s).unwrap();
        assert_eq!(lq.m_inf, 1);
        assert_eq!(lq.n_inf, None);
        assert!(lq.i_trivial);
    }

    fn random_subgroup_spec(rng: &mut impl Rng, s: &ProfiniteSpec) -> SubgroupSpec {
        let count = rng.gen_range(0..=3);
        let generators = (0..count)
            .map(|_| {
                let zp = if rng.gen_bool(0.5) {
                    ZpPart::Zero
                } else {
                    ZpPart::Pow(rng.gen_range(0..=3))
                };
                let g = s
                    .g_factors()
                    .iter()
                    .map(|&m| rng.gen_range(0..m))
                    .collect();
                InertiaGenerator { zp, g }
            })
            .collect();
        SubgroupSpec { generators }
    }

    /// Randomized check that layer quantities stabilize at the certified
    /// level and behave monotonically, and that projections of images are
    /// compatible across levels.
    #[test]
    fn limit_quantities_match_layers_beyond_certified_level() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let specs = [
            spec(2, &[]),
            spec(2, &[2]),
            spec(2, &[4]),
            spec(2, &[4, 2]),
            spec(3, &[3]),
            spec(3, &[9]),
        ];
        for _ in 0..40 {
            let s = &specs[rng.gen_range(0..specs.len())];
            let sub = random_subgroup_spec(&mut rng, s);
            let lq = sub.limit_quantities(s).unwrap();
            let n_star = lq.certified_level;
            let mut prev_m: Option<u64> = None;
            let mut prev_idx: Option<u64> = None;
            for n in 0..=n_star + 2 {
                let layer = s.layer(n).unwrap();
                let img = sub.image_in(&layer).unwrap();
                assert_eq!(img.order() * img.index(), layer.order());
                let m_n = img.intersect(&layer.g_part_subgroup()).unwrap().order();
                let idx_n = img.index();
                if let Some(p) = prev_m {
                    assert!(m_n <= p, "G-intersection must be non-increasing");
                }
                if let Some(p) = prev_idx {
                    assert!(idx_n >= p, "index must be non-decreasing");
                }
                prev_m = Some(m_n);
                prev_idx = Some(idx_n);
                if n >= n_star {
                    assert_eq!(m_n, lq.m_inf);
                    if let Some(n_inf) = lq.n_inf {
                        assert_eq!(idx_n, n_inf);
                    }
                }
                // projection compatibility: image at n+1 surjects onto image at n
                let upper = s.layer(n + 1).unwrap();
                let img_up = sub.image_in(&upper).unwrap();
                let projected: Vec<LayerElem> = img_up
                    .elements()
                    .unwrap()
                    .iter()
                    .map(|e| upper.project_to_level(e, &layer))
                    .collect();
                let proj_sub = FiniteSubgroup::generate(layer.clone(), &projected);
                assert!(proj_sub.same_subgroup(&img).unwrap());
            }
        }
    }

    #[test]
    fn lattice_fallback_agrees_with_explicit_path() {
        // same subgroup data computed through both representations
        let s = spec(2, &[4, 2]);
        let layer = s.layer(3).unwrap(); // order 64
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let sub = random_subgroup_spec(&mut rng, &s);
            let gens = sub.generator_images(&layer).unwrap();
            let explicit = FiniteSubgroup::generate(layer.clone(), &gens);
            // force the lattice route
            let lattice = FiniteSubgroup {
                layer: layer.clone(),
                repr: lattice_repr(&layer, &gens),
            };
            assert_eq!(explicit.order(), lattice.order());
            for e in layer.elements() {
                assert_eq!(explicit.contains(&e), lattice.contains(&e));
            }
            let g_sub = layer.g_part_subgroup();
            let a = explicit.intersect(&g_sub).unwrap();
            let b = lattice.intersect(&g_sub).unwrap();
            assert_eq!(a.order(), b.order());
            assert!(a.same_subgroup(&b).unwrap());
        }
    }
}
