//! Finite multigraphs in Serre's formalism: directed edges paired by a
//! fixed-point-free involution, with source and target maps. On top of that,
//! divisor groups, the Laplacian operator, Picard and Jacobian groups,
//! exact spanning-tree counts (determinant and brute-force routes), and
//! covering morphisms with their pushforward maps.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::linalg::{determinant, smith_normal_form, IntMatrix};
use crate::{Error, Result};

/// A finite multigraph: directed edges come in pairs `e`, `bar(e)` with
/// `src(bar e) = tgt(e)`. Loops are allowed (both orientations of a loop are
/// distinct edges at the same vertex). Vertex order is insertion order and
/// fixes all matrix orderings derived from the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    src: Vec<usize>,
    tgt: Vec<usize>,
    bar: Vec<usize>,
}

impl Graph {
    pub fn new() -> Self {
        Graph { num_vertices: 0, src: Vec::new(), tgt: Vec::new(), bar: Vec::new() }
    }

    pub fn with_vertices(n: usize) -> Self {
        Graph { num_vertices: n, src: Vec::new(), tgt: Vec::new(), bar: Vec::new() }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.num_vertices += 1;
        self.num_vertices - 1
    }

    /// Adds an unoriented edge as the directed pair `(u -> v, v -> u)`;
    /// returns the id of the `u -> v` orientation (its partner is id + 1).
    pub fn add_edge(&mut self, u: usize, v: usize) -> usize {
        assert!(u < self.num_vertices && v < self.num_vertices, "vertex out of range");
        let e = self.src.len();
        self.src.push(u);
        self.tgt.push(v);
        self.bar.push(e + 1);
        self.src.push(v);
        self.tgt.push(u);
        self.bar.push(e);
        e
    }

    /// Builds a graph from raw edge data; use [`Graph::validate`] afterwards
    /// when the data comes from outside.
    pub fn from_raw(num_vertices: usize, src: Vec<usize>, tgt: Vec<usize>, bar: Vec<usize>) -> Self {
        Graph { num_vertices, src, tgt, bar }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Number of directed edges (twice the unoriented count).
    pub fn num_edges(&self) -> usize {
        self.src.len()
    }

    pub fn num_unoriented_edges(&self) -> usize {
        self.src.len() / 2
    }

    pub fn src(&self, e: usize) -> usize {
        self.src[e]
    }

    pub fn tgt(&self, e: usize) -> usize {
        self.tgt[e]
    }

    pub fn bar(&self, e: usize) -> usize {
        self.bar[e]
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> {
        0..self.src.len()
    }

    /// Directed edges with the given source.
    pub fn edges_at(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges().filter(move |&e| self.src[e] == v)
    }

    /// One representative per unoriented edge: each `{e, bar e}` pair
    /// contributes its smaller id.
    pub fn unoriented_representatives(&self) -> Vec<usize> {
        self.edges().filter(|&e| e < self.bar[e]).collect()
    }

    /// Checks the Serre-graph invariants, reporting the first violation.
    pub fn validate(&self) -> std::result::Result<(), GraphViolation> {
        let ne = self.src.len();
        if self.tgt.len() != ne || self.bar.len() != ne {
            return Err(GraphViolation::RaggedEdgeData);
        }
        for e in 0..ne {
            if self.src[e] >= self.num_vertices || self.tgt[e] >= self.num_vertices {
                return Err(GraphViolation::VertexOutOfRange { edge: e });
            }
            if self.bar[e] >= ne {
                return Err(GraphViolation::EdgeOutOfRange { edge: e });
            }
            if self.bar[e] == e {
                return Err(GraphViolation::FixedPointInvolution { edge: e });
            }
            if self.bar[self.bar[e]] != e {
                return Err(GraphViolation::NotInvolution { edge: e });
            }
            if self.src[self.bar[e]] != self.tgt[e] || self.tgt[self.bar[e]] != self.src[e] {
                return Err(GraphViolation::IncidenceMismatch { edge: e });
            }
        }
        Ok(())
    }

    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.num_vertices);
        for e in 0..self.src.len() {
            uf.union(self.src[e], self.tgt[e]);
        }
        uf.count()
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices <= 1 || self.component_count() == 1
    }

    fn require_connected(&self) -> Result<()> {
        let c = self.component_count();
        if self.num_vertices > 0 && c == 1 || self.num_vertices <= 1 {
            Ok(())
        } else {
            Err(Error::Disconnected { components: c })
        }
    }

    /// The Laplacian in the given vertex order: row `v` holds the image of
    /// the basis divisor at `v`. A loop contributes nothing (both of its
    /// orientations start at the same vertex and cancel).
    pub fn laplacian_with_order(&self, order: &[usize]) -> Result<IntMatrix> {
        self.validate().map_err(|v| Error::InvalidGraph(v.to_string()))?;
        assert_eq!(order.len(), self.num_vertices, "order must list every vertex");
        let mut pos = vec![usize::MAX; self.num_vertices];
        for (i, &v) in order.iter().enumerate() {
            assert!(pos[v] == usize::MAX, "duplicate vertex in order");
            pos[v] = i;
        }
        let n = self.num_vertices;
        let mut m = IntMatrix::zero(n, n);
        for e in 0..self.src.len() {
            let s = pos[self.src[e]];
            let t = pos[self.tgt[e]];
            m[(s, s)] += BigInt::one();
            m[(s, t)] -= BigInt::one();
        }
        Ok(m)
    }

    /// The Laplacian in insertion order.
    pub fn laplacian(&self) -> Result<IntMatrix> {
        let order: Vec<usize> = (0..self.num_vertices).collect();
        self.laplacian_with_order(&order)
    }

    /// The Picard group: cokernel of the Laplacian. Free rank 1 for every
    /// connected graph.
    pub fn picard_group(&self) -> Result<AbelianGroupClass> {
        self.require_connected()?;
        let snf = smith_normal_form(&self.laplacian()?, false);
        Ok(AbelianGroupClass::from_diag(&snf.diag))
    }

    /// The Jacobian group: torsion part of the Picard group. Its order is
    /// the number of spanning trees.
    pub fn jacobian(&self) -> Result<AbelianGroupClass> {
        let mut pic = self.picard_group()?;
        pic.free_rank = 0;
        Ok(pic)
    }

    /// Number of spanning trees, as the determinant of the principal minor
    /// of the Laplacian at the given vertex.
    pub fn spanning_tree_count_via_minor(&self, v: usize) -> Result<BigInt> {
        self.require_connected()?;
        if self.num_vertices == 0 {
            return Err(Error::InvalidGraph("empty graph has no spanning trees".into()));
        }
        let lap = self.laplacian()?;
        let det = determinant(&lap.principal_minor(v))?;
        Ok(det.abs())
    }

    /// Number of spanning trees (Kirchhoff route, deleting vertex 0).
    pub fn spanning_tree_count(&self) -> Result<BigInt> {
        self.spanning_tree_count_via_minor(0)
    }

    /// Independent oracle: exhaustively counts spanning edge subsets.
    /// Spanning trees select unoriented edges; parallel edges are distinct,
    /// loops can never occur in a tree. Guarded to at most `max_edges`
    /// unoriented edges (12 by default via [`Graph::spanning_tree_count_bruteforce`]).
    pub fn spanning_tree_count_bruteforce_with_limit(&self, max_edges: usize) -> Result<BigInt> {
        self.require_connected()?;
        if self.num_vertices == 0 {
            return Err(Error::InvalidGraph("empty graph has no spanning trees".into()));
        }
        let reps = self.unoriented_representatives();
        if reps.len() > max_edges {
            return Err(Error::SizeGuard { edges: reps.len(), max: max_edges });
        }
        let need = self.num_vertices - 1;
        let mut count = BigInt::zero();
        let mut chosen = Vec::with_capacity(need);
        self.enumerate_trees(&reps, 0, need, &mut chosen, &mut count);
        Ok(count)
    }

    pub fn spanning_tree_count_bruteforce(&self) -> Result<BigInt> {
        self.spanning_tree_count_bruteforce_with_limit(12)
    }

    fn enumerate_trees(
        &self,
        reps: &[usize],
        from: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        count: &mut BigInt,
    ) {
        if chosen.len() == need {
            let mut uf = UnionFind::new(self.num_vertices);
            let mut acyclic = true;
            for &e in chosen.iter() {
                if !uf.union(self.src[e], self.tgt[e]) {
                    acyclic = false;
                    break;
                }
            }
            if acyclic && uf.count() == 1 {
                *count += BigInt::one();
            }
            return;
        }
        if reps.len() - from < need - chosen.len() {
            return;
        }
        for i in from..reps.len() {
            chosen.push(reps[i]);
            self.enumerate_trees(reps, i + 1, need, chosen, count);
            chosen.pop();
        }
    }
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphViolation {
    #[error("edge arrays have inconsistent lengths")]
    RaggedEdgeData,
    #[error("edge {edge} touches a vertex out of range")]
    VertexOutOfRange { edge: usize },
    #[error("edge {edge} has an involution partner out of range")]
    EdgeOutOfRange { edge: usize },
    #[error("involution has fixed point at edge {edge}")]
    FixedPointInvolution { edge: usize },
    #[error("bar(bar(e)) != e at edge {edge}")]
    NotInvolution { edge: usize },
    #[error("src(bar e) != tgt(e) at edge {edge}")]
    IncidenceMismatch { edge: usize },
}

/// An element of the divisor group: an integer coefficient per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisor {
    coeffs: Vec<BigInt>,
}

impl Divisor {
    pub fn zero(g: &Graph) -> Self {
        Divisor { coeffs: vec![BigInt::zero(); g.num_vertices()] }
    }

    /// The basis divisor `[v]`.
    pub fn vertex(g: &Graph, v: usize) -> Self {
        let mut d = Divisor::zero(g);
        d.coeffs[v] = BigInt::one();
        d
    }

    /// The all-ones divisor, spanning the kernel of the Laplacian.
    pub fn all_ones(g: &Graph) -> Self {
        Divisor { coeffs: vec![BigInt::one(); g.num_vertices()] }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, v: usize) -> &BigInt {
        &self.coeffs[v]
    }

    pub fn set_coeff(&mut self, v: usize, value: BigInt) {
        self.coeffs[v] = value;
    }

    pub fn scale(&self, k: &BigInt) -> Divisor {
        Divisor { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn degree(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    fn check(&self, g: &Graph) -> Result<()> {
        if self.coeffs.len() != g.num_vertices() {
            return Err(Error::DivisorMismatch { got: self.coeffs.len(), want: g.num_vertices() });
        }
        Ok(())
    }
}

/// Applies the Laplacian operator to a divisor.
pub fn laplacian_apply(g: &Graph, d: &Divisor) -> Result<Divisor> {
    d.check(g)?;
    let mut out = Divisor::zero(g);
    for e in 0..g.num_edges() {
        let s = g.src(e);
        let t = g.tgt(e);
        let c = d.coeff(s).clone();
        out.coeffs[s] += &c;
        out.coeffs[t] -= c;
    }
    Ok(out)
}

/// Invariant-factor description of a finitely generated abelian group:
/// `Z/d_1 x ... x Z/d_k x Z^r` with `d_1 | d_2 | ...`, every `d_i > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroupClass {
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl AbelianGroupClass {
    pub fn from_diag(diag: &[BigInt]) -> Self {
        let invariant_factors = diag
            .iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .cloned()
            .collect();
        let free_rank = diag.iter().filter(|d| d.is_zero()).count();
        AbelianGroupClass { invariant_factors, free_rank }
    }

    pub fn trivial() -> Self {
        AbelianGroupClass { invariant_factors: Vec::new(), free_rank: 0 }
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors
            .iter()
            .fold(BigInt::one(), |acc, d| acc * d)
    }
}

impl std::fmt::Display for AbelianGroupClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|d| format!("Z/{d}"))
            .collect();
        for _ in 0..self.free_rank {
            parts.push("Z".to_string());
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// Pushforward flavor along a covering: `Star` sends `[w]` to `[f(w)]`,
/// `Ramified` weights by the ramification index `m_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pushforward {
    Star,
    Ramified,
}

/// A covering morphism of graphs: vertex and edge maps commuting with
/// sources, targets and the involution, such that at every domain vertex the
/// edge map is exactly `m_w`-to-one onto the edges at the image vertex.
#[derive(Debug, Clone)]
pub struct Covering {
    pub domain: Graph,
    pub codomain: Graph,
    pub vmap: Vec<usize>,
    pub emap: Vec<usize>,
}

/// Result of validating a covering: the ramification index of every domain
/// vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ramification {
    pub indices: Vec<u64>,
}

impl Covering {
    pub fn identity(g: &Graph) -> Self {
        Covering {
            domain: g.clone(),
            codomain: g.clone(),
            vmap: (0..g.num_vertices()).collect(),
            emap: (0..g.num_edges()).collect(),
        }
    }

    /// Checks the morphism and covering conditions; on success returns the
    /// ramification index `m_w` of every domain vertex.
    pub fn validate(&self) -> std::result::Result<Ramification, CoveringViolation> {
        if self.domain.validate().is_err() || self.codomain.validate().is_err() {
            return Err(CoveringViolation::InvalidGraph);
        }
        if self.vmap.len() != self.domain.num_vertices() || self.emap.len() != self.domain.num_edges() {
            return Err(CoveringViolation::MapLengthMismatch);
        }
        for (w, &v) in self.vmap.iter().enumerate() {
            if v >= self.codomain.num_vertices() {
                return Err(CoveringViolation::VertexImageOutOfRange { vertex: w });
            }
        }
        for e in 0..self.domain.num_edges() {
            let fe = self.emap[e];
            if fe >= self.codomain.num_edges() {
                return Err(CoveringViolation::EdgeImageOutOfRange { edge: e });
            }
            if self.vmap[self.domain.src(e)] != self.codomain.src(fe) {
                return Err(CoveringViolation::SourceMismatch { edge: e });
            }
            if self.vmap[self.domain.tgt(e)] != self.codomain.tgt(fe) {
                return Err(CoveringViolation::TargetMismatch { edge: e });
            }
            if self.emap[self.domain.bar(e)] != self.codomain.bar(fe) {
                return Err(CoveringViolation::InvolutionMismatch { edge: e });
            }
        }
        // covering condition: at each w the edge map is m_w-to-one
        let mut indices = Vec::with_capacity(self.domain.num_vertices());
        for w in 0..self.domain.num_vertices() {
            let v = self.vmap[w];
            let mut counts = vec![0u64; self.codomain.num_edges()];
            for e in self.domain.edges_at(w) {
                counts[self.emap[e]] += 1;
            }
            let base_edges: Vec<usize> = self.codomain.edges_at(v).collect();
            let mut m_w: Option<u64> = None;
            for &be in &base_edges {
                let c = counts[be];
                if c == 0 {
                    return Err(CoveringViolation::NotSurjectiveAtVertex { vertex: w, base_edge: be });
                }
                match m_w {
                    None => m_w = Some(c),
                    Some(m) if m != c => {
                        return Err(CoveringViolation::UnevenFibers { vertex: w });
                    }
                    _ => {}
                }
            }
            // edges at w must all map to edges at v, nothing else
            let mapped: u64 = counts.iter().sum();
            let at_v: u64 = base_edges.iter().map(|&be| counts[be]).sum();
            if mapped != at_v {
                return Err(CoveringViolation::EdgeEscapesVertex { vertex: w });
            }
            indices.push(m_w.unwrap_or(1));
        }
        Ok(Ramification { indices })
    }

    /// The covering degree: the ramification-weighted fiber size over any
    /// codomain vertex, also the plain fiber size over any codomain edge.
    /// Errors if the two disagree or vary across vertices/edges, which
    /// signals a non-covering.
    pub fn degree(&self) -> Result<u64> {
        let ram = self
            .validate()
            .map_err(|v| Error::InvalidCovering(v.to_string()))?;
        if !self.codomain.is_connected() {
            return Err(Error::Disconnected { components: self.codomain.component_count() });
        }
        let mut per_vertex = vec![0u64; self.codomain.num_vertices()];
        for (w, &v) in self.vmap.iter().enumerate() {
            per_vertex[v] += ram.indices[w];
        }
        let mut degrees = per_vertex.iter().copied();
        let deg = degrees.next().ok_or_else(|| {
            Error::InvalidCovering("covering of an empty graph has no degree".into())
        })?;
        if degrees.any(|d| d != deg) {
            return Err(Error::CoveringInconsistent(
                "weighted vertex fibers have different sizes".into(),
            ));
        }
        let mut edge_fibers = vec![0u64; self.codomain.num_edges()];
        for &fe in &self.emap {
            edge_fibers[fe] += 1;
        }
        if edge_fibers.iter().any(|&c| c != deg) {
            return Err(Error::CoveringInconsistent(
                "edge fibers do not match the weighted vertex fibers".into(),
            ));
        }
        Ok(deg)
    }

    /// Pushforward of a divisor on the domain.
    pub fn pushforward(&self, d: &Divisor, mode: Pushforward) -> Result<Divisor> {
        d.check(&self.domain)?;
        let ram = match mode {
            Pushforward::Star => None,
            Pushforward::Ramified => Some(
                self.validate()
                    .map_err(|v| Error::InvalidCovering(v.to_string()))?,
            ),
        };
        let mut out = Divisor::zero(&self.codomain);
        for (w, &v) in self.vmap.iter().enumerate() {
            let weight = ram.as_ref().map_or(1, |r| r.indices[w]);
            out.coeffs[v] += d.coeff(w) * BigInt::from(weight);
        }
        Ok(out)
    }

    /// Verifies the functoriality diagram of the two pushforwards: on every
    /// basis divisor `[w]`, star-pushforward after the domain Laplacian
    /// equals the codomain Laplacian after the ramified pushforward; and the
    /// ramified pushforward sends the all-ones divisor to `degree` times the
    /// all-ones divisor.
    pub fn check_functoriality(&self) -> Result<std::result::Result<(), Divisor>> {
        let deg = self.degree()?;
        for w in 0..self.domain.num_vertices() {
            let basis = Divisor::vertex(&self.domain, w);
            let lhs = self.pushforward(&laplacian_apply(&self.domain, &basis)?, Pushforward::Star)?;
            let rhs = laplacian_apply(
                &self.codomain,
                &self.pushforward(&basis, Pushforward::Ramified)?,
            )?;
            if lhs != rhs {
                return Ok(Err(basis));
            }
        }
        let ones = Divisor::all_ones(&self.domain);
        let pushed = self.pushforward(&ones, Pushforward::Ramified)?;
        let expect = Divisor::all_ones(&self.codomain).scale(&BigInt::from(deg));
        if pushed != expect {
            return Ok(Err(ones));
        }
        Ok(Ok(()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoveringViolation {
    #[error("domain or codomain is not a valid graph")]
    InvalidGraph,
    #[error("vertex/edge map lengths do not match the domain")]
    MapLengthMismatch,
    #[error("vertex {vertex} maps out of range")]
    VertexImageOutOfRange { vertex: usize },
    #[error("edge {edge} maps out of range")]
    EdgeImageOutOfRange { edge: usize },
    #[error("source incompatibility at edge {edge}")]
    SourceMismatch { edge: usize },
    #[error("target incompatibility at edge {edge}")]
    TargetMismatch { edge: usize },
    #[error("involution incompatibility at edge {edge}")]
    InvolutionMismatch { edge: usize },
    #[error("no preimage of base edge {base_edge} at vertex {vertex}")]
    NotSurjectiveAtVertex { vertex: usize, base_edge: usize },
    #[error("edge fibers at vertex {vertex} have uneven sizes")]
    UnevenFibers { vertex: usize },
    #[error("an edge at vertex {vertex} maps outside the image vertex star")]
    EdgeEscapesVertex { vertex: usize },
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), count: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if x and y were already connected.
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.parent[rx] = ry;
        self.count -= 1;
        true
    }

    pub fn count(&self) -> usize {
        self.count
    }
}
