//! Voltage graphs with inertia and their derived graphs.
//!
//! A voltage graph is a base graph whose directed edges carry elements of
//! `Z_p x G` (with `alpha(bar e) = -alpha(e)`) together with a closed
//! subgroup (the inertia group) at each vertex. The derived graph at layer n
//! has one vertex per coset of each inertia image and one edge per
//! (layer element, base edge) pair; the layer group acts on it with the
//! inertia images as vertex stabilizers, so inertia orders are exactly the
//! ramification indices of the covering down to the base.
//!
//! Two independent routes to the derived Laplacian are provided: the
//! Laplacian of the explicitly constructed derived graph, and the expansion
//! of the group-ring operator (norm element of the inertia group times the
//! voltage-twisted vertex star) over the coset bases. Their entrywise
//! agreement is a structural cross-check used heavily in tests.

use num_bigint::BigInt;
use num_traits::One;

use crate::graph::{Covering, Graph};
use crate::groups::{
    FiniteSubgroup, GroupElement, LayerElem, LayerGroup, ProfiniteSpec, SubgroupSpec,
    EXPLICIT_LIMIT,
};
use crate::linalg::IntMatrix;
use crate::{Error, Result};

/// A voltage graph over the profinite group `Z_p x G`: base graph, voltage
/// assignment on directed edges, and an inertia subgroup spec per vertex.
#[derive(Debug, Clone)]
pub struct VoltageGraph {
    base: Graph,
    spec: ProfiniteSpec,
    alpha: Vec<GroupElement>,
    inertia: Vec<SubgroupSpec>,
}

impl VoltageGraph {
    /// All-zero voltages and trivial inertia everywhere.
    pub fn new(base: Graph, spec: ProfiniteSpec) -> Self {
        let alpha = vec![GroupElement::zero(&spec); base.num_edges()];
        let inertia = vec![SubgroupSpec::trivial(); base.num_vertices()];
        VoltageGraph { base, spec, alpha, inertia }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn spec(&self) -> &ProfiniteSpec {
        &self.spec
    }

    pub fn alpha(&self, e: usize) -> &GroupElement {
        &self.alpha[e]
    }

    pub fn inertia(&self, v: usize) -> &SubgroupSpec {
        &self.inertia[v]
    }

    /// Sets the voltage of a directed edge and of its involution partner to
    /// the inverse, keeping the involution condition by construction.
    pub fn set_voltage(&mut self, e: usize, value: GroupElement) {
        self.alpha[self.base.bar(e)] = value.negate(&self.spec);
        self.alpha[e] = value;
    }

    /// Sets the voltage of a single orientation only. The involution
    /// condition becomes the caller's responsibility; [`VoltageGraph::validate`]
    /// reports a violation when it breaks.
    pub fn set_voltage_oriented(&mut self, e: usize, value: GroupElement) {
        self.alpha[e] = value;
    }

    pub fn set_inertia(&mut self, v: usize, sub: SubgroupSpec) {
        self.inertia[v] = sub;
    }

    /// Checks well-formedness: base graph invariants, voltage involution
    /// condition, and inertia generator coordinate arity.
    pub fn validate(&self) -> std::result::Result<(), VoltageViolation> {
        if let Err(v) = self.base.validate() {
            return Err(VoltageViolation::BadGraph(v.to_string()));
        }
        for e in 0..self.base.num_edges() {
            let neg = self.alpha[e].negate(&self.spec);
            if self.alpha[self.base.bar(e)] != neg {
                return Err(VoltageViolation::InvolutionBroken { edge: e });
            }
        }
        let arity = self.spec.g_factors().len();
        for (v, sub) in self.inertia.iter().enumerate() {
            for gen in &sub.generators {
                if gen.g.len() != arity {
                    return Err(VoltageViolation::BadInertia { vertex: v });
                }
            }
        }
        Ok(())
    }

    /// The induced voltage graph for the quotient by `1 x G`: voltages keep
    /// only their `Z_p`-coordinate and inertia specs are pushed through the
    /// projection.
    pub fn quotient_by_g(&self) -> VoltageGraph {
        VoltageGraph {
            base: self.base.clone(),
            spec: self.spec.quotient_by_g(),
            alpha: self.alpha.iter().map(GroupElement::quotient_by_g).collect(),
            inertia: self.inertia.iter().map(SubgroupSpec::quotient_by_g).collect(),
        }
    }

    /// The finite voltage data at layer n (quotient by the kernel of
    /// `Z_p x G -> Z/p^n x G`).
    pub fn at_layer(&self, n: u32) -> Result<FiniteVoltage> {
        self.validate()
            .map_err(|v| Error::InvalidVoltage(v.to_string()))?;
        let layer = self.spec.layer(n)?;
        let alpha = self.alpha.iter().map(|a| a.reduce_in(&layer)).collect();
        let inertia = self
            .inertia
            .iter()
            .map(|s| s.image_in(&layer))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteVoltage { base: self.base.clone(), layer, alpha, inertia })
    }

    /// Derived graph of the full tower at layer n.
    pub fn derive(&self, n: u32) -> Result<DerivedLayer> {
        self.at_layer(n)?.derive()
    }

    /// Derived graph of the quotient-by-G tower at layer n.
    pub fn derive_base(&self, n: u32) -> Result<DerivedLayer> {
        self.quotient_by_g().at_layer(n)?.derive()
    }

    /// The natural covering between two layers of the full tower.
    pub fn layer_covering(&self, n_hi: u32, n_lo: u32) -> Result<Covering> {
        if n_hi < n_lo {
            return Err(Error::InvalidVoltage(format!(
                "layer covering needs n_hi >= n_lo, got {n_hi} < {n_lo}"
            )));
        }
        let hi = self.derive(n_hi)?;
        let lo = self.derive(n_lo)?;
        let lo_layer = lo.layer().clone();
        let hi_layer = hi.layer().clone();
        Ok(covering_via(&hi, &lo, |g| hi_layer.project_to_level(g, &lo_layer)))
    }

    /// The covering from the full-tower layer n onto the quotient-by-G
    /// tower layer n.
    pub fn cross_covering(&self, n: u32) -> Result<Covering> {
        let hi = self.derive(n)?;
        let lo = self.derive_base(n)?;
        let lo_layer = lo.layer().clone();
        let hi_layer = hi.layer().clone();
        Ok(covering_via(&hi, &lo, |g| hi_layer.project_to_base(g, &lo_layer)))
    }

    /// The projection of the full-tower layer n onto the base graph itself.
    /// Its degree is the full layer group order.
    pub fn covering_to_base(&self, n: u32) -> Result<Covering> {
        Ok(self.derive(n)?.covering_to_base())
    }

    /// The tower as a lazy sequence of derived layers, n = 0, 1, 2, ...
    /// Nothing infinite is ever materialized; each layer is built on
    /// demand. The iterator borrows the voltage data immutably and can be
    /// handed across threads.
    pub fn layers(&self) -> impl Iterator<Item = Result<DerivedLayer>> + '_ {
        (0u32..).map(move |n| self.derive(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VoltageViolation {
    #[error("base graph invalid: {0}")]
    BadGraph(String),
    #[error("voltage involution violated at edge {edge}: alpha(bar e) != -alpha(e)")]
    InvolutionBroken { edge: usize },
    #[error("inertia generators at vertex {vertex} have wrong coordinate arity")]
    BadInertia { vertex: usize },
}

/// Voltage data over one finite layer group: the input to the derived-graph
/// construction.
#[derive(Debug, Clone)]
pub struct FiniteVoltage {
    base: Graph,
    layer: LayerGroup,
    alpha: Vec<LayerElem>,
    inertia: Vec<FiniteSubgroup>,
}

impl FiniteVoltage {
    pub fn new(
        base: Graph,
        layer: LayerGroup,
        alpha: Vec<LayerElem>,
        inertia: Vec<FiniteSubgroup>,
    ) -> Result<Self> {
        let fv = FiniteVoltage { base, layer, alpha, inertia };
        fv.validate().map_err(|v| Error::InvalidVoltage(v.to_string()))?;
        Ok(fv)
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn layer(&self) -> &LayerGroup {
        &self.layer
    }

    pub fn alpha(&self, e: usize) -> &LayerElem {
        &self.alpha[e]
    }

    pub fn inertia(&self, v: usize) -> &FiniteSubgroup {
        &self.inertia[v]
    }

    pub fn validate(&self) -> std::result::Result<(), VoltageViolation> {
        if let Err(v) = self.base.validate() {
            return Err(VoltageViolation::BadGraph(v.to_string()));
        }
        if self.alpha.len() != self.base.num_edges() {
            return Err(VoltageViolation::BadGraph("voltage arity mismatch".into()));
        }
        for e in 0..self.base.num_edges() {
            let sum = self.layer.add(&self.alpha[e], &self.alpha[self.base.bar(e)]);
            if sum != self.layer.zero() {
                return Err(VoltageViolation::InvolutionBroken { edge: e });
            }
        }
        for (v, sub) in self.inertia.iter().enumerate() {
            if sub.layer() != &self.layer {
                return Err(VoltageViolation::BadInertia { vertex: v });
            }
        }
        Ok(())
    }

    /// Builds the derived graph: vertices are inertia cosets per base
    /// vertex (ordered by base vertex, then by minimal coset
    /// representative), edges are (layer element, base edge) pairs with
    /// `src (g,e) = (g I_{s e}, s e)`, `tgt (g,e) = (g + alpha(e)) I_{t e}`,
    /// `bar (g,e) = (g + alpha(e), bar e)`.
    pub fn derive(&self) -> Result<DerivedLayer> {
        self.validate().map_err(|v| Error::InvalidVoltage(v.to_string()))?;
        let order = self.layer.order();
        if order > EXPLICIT_LIMIT {
            return Err(Error::InvalidGroup(format!(
                "layer group order {order} exceeds the explicit construction limit"
            )));
        }
        let nv = self.base.num_vertices();
        let ne = self.base.num_edges();

        let mut offsets = Vec::with_capacity(nv);
        let mut coset_of: Vec<Vec<u32>> = Vec::with_capacity(nv);
        let mut vertex_labels = Vec::new();
        let mut inertia_orders = Vec::with_capacity(nv);
        let mut next = 0usize;
        for v in 0..nv {
            let table = self.inertia[v].coset_table()?;
            offsets.push(next);
            next += table.reps.len();
            for &rep in &table.reps {
                vertex_labels.push((v, self.layer.elem_at(rep)));
            }
            coset_of.push(table.coset_of);
            inertia_orders.push(self.inertia[v].order());
        }

        let num_vertices = next;
        let num_edges = (order as usize) * ne;
        let mut src = vec![0usize; num_edges];
        let mut tgt = vec![0usize; num_edges];
        let mut bar = vec![0usize; num_edges];
        for gi in 0..order {
            let g = self.layer.elem_at(gi);
            for e in 0..ne {
                let id = gi as usize * ne + e;
                let sv = self.base.src(e);
                let tv = self.base.tgt(e);
                let shifted = self.layer.add(&g, &self.alpha[e]);
                let shifted_idx = self.layer.index_of(&shifted);
                src[id] = offsets[sv] + coset_of[sv][gi as usize] as usize;
                tgt[id] = offsets[tv] + coset_of[tv][shifted_idx as usize] as usize;
                bar[id] = shifted_idx as usize * ne + self.base.bar(e);
            }
        }

        let graph = Graph::from_raw(num_vertices, src, tgt, bar);
        graph
            .validate()
            .map_err(|v| Error::InvalidGraph(format!("derived graph broke invariants: {v}")))?;
        Ok(DerivedLayer {
            graph,
            level: self.layer.level(),
            layer: self.layer.clone(),
            base: self.base.clone(),
            vertex_labels,
            offsets,
            coset_of,
            inertia_orders,
        })
    }

    /// Expands the group-ring Laplacian (norm element of the inertia group
    /// times the voltage-twisted vertex star) over the coset bases, in the
    /// same ordering the derived graph uses.
    pub fn group_ring_laplacian(&self) -> Result<IntMatrix> {
        self.validate().map_err(|v| Error::InvalidVoltage(v.to_string()))?;
        let order = self.layer.order();
        if order > EXPLICIT_LIMIT {
            return Err(Error::InvalidGroup(format!(
                "layer group order {order} exceeds the explicit construction limit"
            )));
        }
        let nv = self.base.num_vertices();
        let mut offsets = Vec::with_capacity(nv);
        let mut coset_of: Vec<Vec<u32>> = Vec::with_capacity(nv);
        let mut reps: Vec<Vec<u64>> = Vec::with_capacity(nv);
        let mut next = 0usize;
        for v in 0..nv {
            let table = self.inertia[v].coset_table()?;
            offsets.push(next);
            next += table.reps.len();
            reps.push(table.reps);
            coset_of.push(table.coset_of);
        }

        let mut m = IntMatrix::zero(next, next);
        for v in 0..nv {
            let stab = self.inertia[v].elements()?;
            for (c, &rep) in reps[v].iter().enumerate() {
                let row = offsets[v] + c;
                let gamma = self.layer.elem_at(rep);
                for sigma in &stab {
                    let gs = self.layer.add(&gamma, sigma);
                    let gs_idx = self.layer.index_of(&gs) as usize;
                    for e in self.base.edges_at(v) {
                        let col_v = offsets[v] + coset_of[v][gs_idx] as usize;
                        m[(row, col_v)] += BigInt::one();
                        let t = self.base.tgt(e);
                        let shifted = self.layer.add(&gs, &self.alpha[e]);
                        let col_t =
                            offsets[t] + coset_of[t][self.layer.index_of(&shifted) as usize] as usize;
                        m[(row, col_t)] -= BigInt::one();
                    }
                }
            }
        }
        Ok(m)
    }

    /// Compares the group-ring Laplacian with the Laplacian of the derived
    /// graph, entry by entry.
    pub fn check_group_ring_laplacian(&self) -> Result<std::result::Result<(), LaplacianMismatch>> {
        let from_graph = self.derive()?.graph.laplacian()?;
        let from_ring = self.group_ring_laplacian()?;
        for i in 0..from_graph.rows() {
            for j in 0..from_graph.cols() {
                if from_graph[(i, j)] != from_ring[(i, j)] {
                    return Ok(Err(LaplacianMismatch {
                        row: i,
                        col: j,
                        from_graph: from_graph[(i, j)].clone(),
                        from_group_ring: from_ring[(i, j)].clone(),
                    }));
                }
            }
        }
        Ok(Ok(()))
    }
}

/// First differing entry between the two Laplacian construction routes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaplacianMismatch {
    pub row: usize,
    pub col: usize,
    pub from_graph: BigInt,
    pub from_group_ring: BigInt,
}

/// A derived graph together with its labels and the layer-group action.
#[derive(Debug, Clone)]
pub struct DerivedLayer {
    pub graph: Graph,
    pub level: u32,
    layer: LayerGroup,
    base: Graph,
    vertex_labels: Vec<(usize, LayerElem)>,
    offsets: Vec<usize>,
    coset_of: Vec<Vec<u32>>,
    inertia_orders: Vec<u64>,
}

impl DerivedLayer {
    pub fn layer(&self) -> &LayerGroup {
        &self.layer
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    /// Base vertex and minimal coset representative of a derived vertex.
    pub fn vertex_label(&self, w: usize) -> (usize, &LayerElem) {
        let (v, ref rep) = self.vertex_labels[w];
        (v, rep)
    }

    /// Layer element and base edge of a derived edge.
    pub fn edge_label(&self, e: usize) -> (LayerElem, usize) {
        let ne = self.base.num_edges();
        (self.layer.elem_at((e / ne) as u64), e % ne)
    }

    /// Derived vertex holding the coset of `g` at base vertex `v`.
    pub fn vertex_id(&self, v: usize, g: &LayerElem) -> usize {
        self.offsets[v] + self.coset_of[v][self.layer.index_of(g) as usize] as usize
    }

    pub fn edge_id(&self, g: &LayerElem, base_edge: usize) -> usize {
        self.layer.index_of(g) as usize * self.base.num_edges() + base_edge
    }

    /// Ramification index of a derived vertex over the base: the order of
    /// its stabilizer, which is the inertia image order at its base vertex.
    pub fn stabilizer_order(&self, w: usize) -> u64 {
        self.inertia_orders[self.vertex_labels[w].0]
    }

    /// The automorphism by which a layer element acts.
    pub fn action_of(&self, g: &LayerElem) -> GraphAutomorphism {
        let vperm = self
            .vertex_labels
            .iter()
            .map(|(v, rep)| self.vertex_id(*v, &self.layer.add(g, rep)))
            .collect();
        let ne = self.base.num_edges();
        let eperm = (0..self.graph.num_edges())
            .map(|e| {
                let (gamma, base_e) = (self.layer.elem_at((e / ne) as u64), e % ne);
                self.edge_id(&self.layer.add(g, &gamma), base_e)
            })
            .collect();
        GraphAutomorphism { vperm, eperm }
    }

    /// The full action table of the layer group.
    pub fn full_action(&self) -> LayerAction {
        let autos: Vec<GraphAutomorphism> = (0..self.layer.order())
            .map(|i| self.action_of(&self.layer.elem_at(i)))
            .collect();
        LayerAction { layer: self.layer.clone(), autos }
    }

    /// The projection onto the base graph: a Galois covering of degree equal
    /// to the layer group order.
    pub fn covering_to_base(&self) -> Covering {
        let vmap = self.vertex_labels.iter().map(|(v, _)| *v).collect();
        let ne = self.base.num_edges();
        let emap = (0..self.graph.num_edges()).map(|e| e % ne).collect();
        Covering {
            domain: self.graph.clone(),
            codomain: self.base.clone(),
            vmap,
            emap,
        }
    }

    pub fn component_count(&self) -> usize {
        self.graph.component_count()
    }

    pub fn is_connected(&self) -> bool {
        self.graph.is_connected()
    }
}

/// One graph automorphism, as vertex and edge permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAutomorphism {
    pub vperm: Vec<usize>,
    pub eperm: Vec<usize>,
}

/// An action of a finite layer group on a graph, one automorphism per group
/// element in enumeration order.
#[derive(Debug, Clone)]
pub struct LayerAction {
    pub layer: LayerGroup,
    pub autos: Vec<GraphAutomorphism>,
}

impl LayerAction {
    pub fn of(&self, g: &LayerElem) -> &GraphAutomorphism {
        &self.autos[self.layer.index_of(g) as usize]
    }
}

fn covering_via(
    hi: &DerivedLayer,
    lo: &DerivedLayer,
    project: impl Fn(&LayerElem) -> LayerElem,
) -> Covering {
    let vmap = hi
        .vertex_labels
        .iter()
        .map(|(v, rep)| lo.vertex_id(*v, &project(rep)))
        .collect();
    let ne = hi.base.num_edges();
    let emap = (0..hi.graph.num_edges())
        .map(|e| {
            let gamma = hi.layer.elem_at((e / ne) as u64);
            lo.edge_id(&project(&gamma), e % ne)
        })
        .collect();
    Covering {
        domain: hi.graph.clone(),
        codomain: lo.graph.clone(),
        vmap,
        emap,
    }
}

/// Voltage data recovered from an abstract Galois covering, together with
/// its own derived graph and the isomorphism onto the covering's domain.
#[derive(Debug, Clone)]
pub struct ExtractedVoltage {
    pub voltage: FiniteVoltage,
    pub derived: DerivedLayer,
    /// Maps the derived graph onto the domain of the input covering,
    /// commuting with the projections and the group action.
    pub witness: GraphIso,
}

/// A graph isomorphism given by its vertex and edge bijections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphIso {
    pub vmap: Vec<usize>,
    pub emap: Vec<usize>,
}

/// Recovers voltage data from a Galois covering: checks the Galois axioms
/// for the given action, chooses the lowest-index lift of every codomain
/// vertex and edge, reads off the voltages from the involution mismatch of
/// the lifts, and takes vertex stabilizers as inertia groups. The derived
/// graph of the recovered data is isomorphic to the covering's domain; the
/// isomorphism is verified and returned.
pub fn extract_voltage(f: &Covering, action: &LayerAction) -> Result<ExtractedVoltage> {
    f.validate()
        .map_err(|v| Error::InvalidCovering(v.to_string()))?;
    let layer = &action.layer;
    let order = layer.order();
    let domain = &f.domain;
    let base = &f.codomain;
    if action.autos.len() != order as usize {
        return Err(Error::GaloisAxiom(format!(
            "action table has {} entries, layer group has {order}",
            action.autos.len()
        )));
    }
    for auto in &action.autos {
        if auto.vperm.len() != domain.num_vertices() || auto.eperm.len() != domain.num_edges() {
            return Err(Error::GaloisAxiom("automorphism arity mismatch".into()));
        }
    }

    // identity acts as identity
    let id_idx = layer.index_of(&layer.zero()) as usize;
    let identity_ok = action.autos[id_idx].vperm.iter().enumerate().all(|(i, &j)| i == j)
        && action.autos[id_idx].eperm.iter().enumerate().all(|(i, &j)| i == j);
    if !identity_ok {
        return Err(Error::GaloisAxiom("identity element does not act trivially".into()));
    }

    // every element acts by a graph automorphism respecting f
    for gi in 0..order {
        let auto = &action.autos[gi as usize];
        for e in 0..domain.num_edges() {
            let ie = auto.eperm[e];
            if auto.vperm[domain.src(e)] != domain.src(ie)
                || auto.vperm[domain.tgt(e)] != domain.tgt(ie)
                || auto.eperm[domain.bar(e)] != domain.bar(ie)
            {
                return Err(Error::GaloisAxiom(format!(
                    "element {} does not act by a graph automorphism",
                    layer.elem_at(gi)
                )));
            }
            if f.emap[ie] != f.emap[e] {
                return Err(Error::GaloisAxiom("action does not respect edge fibers".into()));
            }
        }
        for w in 0..domain.num_vertices() {
            if f.vmap[auto.vperm[w]] != f.vmap[w] {
                return Err(Error::GaloisAxiom("action does not respect vertex fibers".into()));
            }
        }
    }

    // the action is a homomorphism: check generators against everything
    for gen_pos in 0..layer.rank() {
        let mut coords = vec![0i64; layer.rank()];
        coords[gen_pos] = 1;
        let gen = layer.elem_from_signed(&coords)?;
        let gen_auto = action.of(&gen);
        for hi in 0..order {
            let h = layer.elem_at(hi);
            let combined = action.of(&layer.add(&gen, &h));
            let h_auto = &action.autos[hi as usize];
            let compose_ok = (0..domain.num_vertices())
                .all(|w| gen_auto.vperm[h_auto.vperm[w]] == combined.vperm[w])
                && (0..domain.num_edges())
                    .all(|e| gen_auto.eperm[h_auto.eperm[e]] == combined.eperm[e]);
            if !compose_ok {
                return Err(Error::GaloisAxiom("action is not a homomorphism".into()));
            }
        }
    }

    // transitive on vertex fibers, free and transitive on edge fibers
    let mut vertex_lift = vec![usize::MAX; base.num_vertices()];
    for w in 0..domain.num_vertices() {
        let v = f.vmap[w];
        if vertex_lift[v] == usize::MAX {
            vertex_lift[v] = w;
        }
    }
    for (v, &lift) in vertex_lift.iter().enumerate() {
        if lift == usize::MAX {
            return Err(Error::GaloisAxiom(format!("empty vertex fiber over {v}")));
        }
        let fiber: Vec<usize> = (0..domain.num_vertices()).filter(|&w| f.vmap[w] == v).collect();
        let mut orbit: Vec<usize> = action.autos.iter().map(|a| a.vperm[lift]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        if orbit != fiber {
            return Err(Error::GaloisAxiom(format!(
                "action is not transitive on the vertex fiber over {v}"
            )));
        }
    }
    for e in 0..base.num_edges() {
        let fiber: Vec<usize> = (0..domain.num_edges()).filter(|&y| f.emap[y] == e).collect();
        if fiber.len() as u64 != order {
            return Err(Error::GaloisAxiom(format!(
                "edge fiber over {e} has size {}, layer group has order {order}",
                fiber.len()
            )));
        }
        let mut orbit: Vec<usize> = action.autos.iter().map(|a| a.eperm[fiber[0]]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        if orbit != fiber {
            return Err(Error::GaloisAxiom(format!(
                "action is not free and transitive on the edge fiber over {e}"
            )));
        }
    }

    // edge lifts: lowest-index edge in the fiber whose source is the chosen
    // vertex lift
    let mut edge_lift = vec![usize::MAX; base.num_edges()];
    for y in 0..domain.num_edges() {
        let e = f.emap[y];
        if domain.src(y) == vertex_lift[base.src(e)] && edge_lift[e] == usize::MAX {
            edge_lift[e] = y;
        }
    }
    if let Some(e) = (0..base.num_edges()).find(|&e| edge_lift[e] == usize::MAX) {
        return Err(Error::GaloisAxiom(format!(
            "no lift of edge {e} starts at the chosen vertex lift"
        )));
    }

    // voltages: alpha(e) is the unique element moving the lift of bar(e)
    // onto the reversal of the lift of e
    let mut alpha = vec![layer.zero(); base.num_edges()];
    for e in 0..base.num_edges() {
        let target = domain.bar(edge_lift[e]);
        let source = edge_lift[base.bar(e)];
        let g = (0..order)
            .find(|&gi| action.autos[gi as usize].eperm[source] == target)
            .ok_or_else(|| {
                Error::GaloisAxiom(format!("no group element matches the lifts of edge {e}"))
            })?;
        alpha[e] = layer.elem_at(g);
    }

    // inertia: stabilizers of the vertex lifts
    let inertia: Vec<FiniteSubgroup> = vertex_lift
        .iter()
        .map(|&lift| {
            let stab: Vec<LayerElem> = (0..order)
                .filter(|&gi| action.autos[gi as usize].vperm[lift] == lift)
                .map(|gi| layer.elem_at(gi))
                .collect();
            FiniteSubgroup::generate(layer.clone(), &stab)
        })
        .collect();

    let voltage = FiniteVoltage::new(base.clone(), layer.clone(), alpha, inertia)?;
    let derived = voltage.derive()?;

    // witness: (g I_v, v) -> g . lift(v), (g, e) -> g . lift(e)
    let vmap: Vec<usize> = (0..derived.graph.num_vertices())
        .map(|w| {
            let (v, rep) = derived.vertex_label(w);
            action.of(rep).vperm[vertex_lift[v]]
        })
        .collect();
    let emap: Vec<usize> = (0..derived.graph.num_edges())
        .map(|y| {
            let (gamma, e) = derived.edge_label(y);
            action.of(&gamma).eperm[edge_lift[e]]
        })
        .collect();
    let witness = GraphIso { vmap, emap };
    verify_witness(&derived, f, action, &witness)?;

    Ok(ExtractedVoltage { voltage, derived, witness })
}

/// Checks that the witness is an isomorphism of Galois coverings: bijective,
/// a graph morphism, equivariant, and commuting with the projections.
pub fn verify_witness(
    derived: &DerivedLayer,
    f: &Covering,
    action: &LayerAction,
    witness: &GraphIso,
) -> Result<()> {
    let domain = &f.domain;
    let fail = |msg: &str| Err(Error::GaloisAxiom(format!("witness rejected: {msg}")));
    if witness.vmap.len() != derived.graph.num_vertices()
        || witness.emap.len() != derived.graph.num_edges()
        || derived.graph.num_vertices() != domain.num_vertices()
        || derived.graph.num_edges() != domain.num_edges()
    {
        return fail("size mismatch");
    }
    let mut vseen = vec![false; domain.num_vertices()];
    for &w in &witness.vmap {
        if vseen[w] {
            return fail("vertex map not injective");
        }
        vseen[w] = true;
    }
    let mut eseen = vec![false; domain.num_edges()];
    for &e in &witness.emap {
        if eseen[e] {
            return fail("edge map not injective");
        }
        eseen[e] = true;
    }
    let to_base = derived.covering_to_base();
    for y in 0..derived.graph.num_edges() {
        let img = witness.emap[y];
        if witness.vmap[derived.graph.src(y)] != domain.src(img)
            || witness.vmap[derived.graph.tgt(y)] != domain.tgt(img)
            || witness.emap[derived.graph.bar(y)] != domain.bar(img)
        {
            return fail("not a graph morphism");
        }
        if f.emap[img] != to_base.emap[y] {
            return fail("does not commute with the projections on edges");
        }
    }
    for w in 0..derived.graph.num_vertices() {
        if f.vmap[witness.vmap[w]] != to_base.vmap[w] {
            return fail("does not commute with the projections on vertices");
        }
    }
    // equivariance on edges (vertices follow since sources commute)
    for gi in 0..derived.layer().order() {
        let g = derived.layer().elem_at(gi);
        let inner = derived.action_of(&g);
        let outer = action.of(&g);
        for y in 0..derived.graph.num_edges() {
            if witness.emap[inner.eperm[y]] != outer.eperm[witness.emap[y]] {
                return fail("not equivariant");
            }
        }
    }
    Ok(())
}

/// Component count of a derived layer (1 means connected).
pub fn connectivity(layer: &DerivedLayer) -> usize {
    layer.component_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::ZpPart;
    use crate::iwasawa::{canonical_case_voltage, cycle_graph, multi_cycle, InertiaCase};

    fn spec(p: u64, g: &[u64]) -> ProfiniteSpec {
        ProfiniteSpec::new(p, g.to_vec()).unwrap()
    }

    #[test]
    fn validate_catches_broken_involution() {
        let mut vg = VoltageGraph::new(cycle_graph(3), spec(2, &[2]));
        let val = GroupElement::new(vg.spec(), BigInt::from(1), &[1]).unwrap();
        vg.set_voltage_oriented(0, val);
        assert!(matches!(
            vg.validate(),
            Err(VoltageViolation::InvolutionBroken { .. })
        ));
    }

    #[test]
    fn validate_accepts_canonical_voltages() {
        for case in [InertiaCase::FiniteG, InertiaCase::ZpLine, InertiaCase::FullGroup] {
            let vg = canonical_case_voltage(2, 3, case).unwrap();
            assert!(vg.validate().is_ok());
        }
    }

    #[test]
    fn validate_accepts_empty_graph() {
        let vg = VoltageGraph::new(Graph::new(), spec(2, &[]));
        assert!(vg.validate().is_ok());
    }

    #[test]
    fn trivial_data_derives_base_graph() {
        let base = cycle_graph(4);
        let vg = VoltageGraph::new(base.clone(), spec(2, &[]));
        let layer = vg.derive(0).unwrap();
        assert_eq!(layer.graph.num_vertices(), base.num_vertices());
        assert_eq!(layer.graph.num_edges(), base.num_edges());
        assert_eq!(
            layer.graph.spanning_tree_count().unwrap(),
            base.spanning_tree_count().unwrap()
        );
    }

    #[test]
    fn derived_counts_follow_the_definition() {
        for case in [InertiaCase::FiniteG, InertiaCase::ZpLine, InertiaCase::FullGroup] {
            for n in 0..=2 {
                let vg = canonical_case_voltage(2, 3, case).unwrap();
                let fv = vg.at_layer(n).unwrap();
                let der = fv.derive().unwrap();
                let expected_vertices: usize = (0..vg.base().num_vertices())
                    .map(|v| fv.inertia(v).index() as usize)
                    .sum();
                assert_eq!(der.graph.num_vertices(), expected_vertices);
                assert_eq!(
                    der.graph.num_edges(),
                    fv.layer().order() as usize * vg.base().num_edges()
                );
            }
        }
    }

    #[test]
    fn full_inertia_case_gives_multi_cycles() {
        // inertia = the whole group: layer n is the cycle with p^(n+1)
        // parallel edges
        let p = 2u64;
        let m = 3usize;
        let vg = canonical_case_voltage(p, m, InertiaCase::FullGroup).unwrap();
        for n in 0..=2u32 {
            let der = vg.derive(n).unwrap();
            let expect = multi_cycle(m, p.pow(n + 1) as usize);
            assert_eq!(der.graph.num_vertices(), expect.num_vertices());
            assert_eq!(der.graph.num_edges(), expect.num_edges());
            assert_eq!(
                der.graph.spanning_tree_count().unwrap(),
                expect.spanning_tree_count().unwrap()
            );
        }
    }

    #[test]
    fn finite_g_inertia_base_tower_gives_long_cycles() {
        // quotient by G kills the inertia, leaving the unramified
        // cyclic-voltage tower: layer n is a cycle of length m * p^n
        let p = 2u64;
        let m = 3usize;
        let vg = canonical_case_voltage(p, m, InertiaCase::FiniteG).unwrap();
        for n in 0..=3u32 {
            let der = vg.derive_base(n).unwrap();
            let len = m * p.pow(n) as usize;
            assert_eq!(der.graph.num_vertices(), len);
            assert_eq!(der.graph.num_unoriented_edges(), len);
            assert!(der.is_connected());
            assert_eq!(
                der.graph.spanning_tree_count().unwrap(),
                BigInt::from(len)
            );
        }
    }

    #[test]
    fn quotient_by_trivial_subgroup_is_identity_on_data() {
        // quotienting a G-free spec changes nothing
        let base = cycle_graph(3);
        let mut vg = VoltageGraph::new(base, spec(3, &[]));
        let one = GroupElement::new(vg.spec(), BigInt::from(1), &[]).unwrap();
        vg.set_voltage(0, one);
        let q = vg.quotient_by_g();
        for n in 0..=2 {
            let a = vg.derive(n).unwrap();
            let b = q.derive(n).unwrap();
            assert_eq!(a.graph, b.graph);
        }
    }

    #[test]
    fn zp_inertia_quotient_is_totally_ramified() {
        // inertia Z_p maps onto the full base-tower inertia: every layer of
        // the quotient tower keeps m vertices
        let vg = canonical_case_voltage(2, 3, InertiaCase::ZpLine).unwrap();
        for n in 1..=3 {
            let der = vg.derive_base(n).unwrap();
            assert_eq!(der.graph.num_vertices(), 3);
            let cov = vg.quotient_by_g().covering_to_base(n).unwrap();
            let ram = cov.validate().unwrap();
            assert!(ram.indices.iter().all(|&r| r == 2u64.pow(n)));
        }
    }

    #[test]
    fn layer_coverings_validate_with_expected_degrees() {
        let vg = canonical_case_voltage(2, 3, InertiaCase::ZpLine).unwrap();
        // identity covering at equal levels
        let id = vg.layer_covering(2, 2).unwrap();
        assert_eq!(id.degree().unwrap(), 1);
        // one step down
        let step = vg.layer_covering(2, 1).unwrap();
        assert_eq!(step.degree().unwrap(), 2);
        // to-base covering has degree = full layer order
        for n in 0..=2 {
            let to_base = vg.covering_to_base(n).unwrap();
            assert_eq!(to_base.degree().unwrap(), vg.spec().layer(n).unwrap().order());
        }
    }

    #[test]
    fn cross_covering_ramification_matches_inertia_g_intersection() {
        for case in [InertiaCase::FiniteG, InertiaCase::ZpLine, InertiaCase::FullGroup] {
            let vg = canonical_case_voltage(2, 3, case).unwrap();
            for n in 1..=3 {
                let cov = vg.cross_covering(n).unwrap();
                let ram = cov.validate().unwrap();
                let layer = vg.spec().layer(n).unwrap();
                let g_part = layer.g_part_subgroup();
                for w in 0..cov.domain.num_vertices() {
                    let (v, _) = vg.derive(n).unwrap().vertex_label(w);
                    let image = vg.inertia(v).image_in(&layer).unwrap();
                    let expect = image.intersect(&g_part).unwrap().order();
                    assert_eq!(ram.indices[w], expect);
                }
            }
        }
    }

    #[test]
    fn group_action_is_free_on_edges_and_matches_ramification() {
        let vg = canonical_case_voltage(2, 2, InertiaCase::FullGroup).unwrap();
        let der = vg.derive(1).unwrap();
        let layer = der.layer().clone();
        for gi in 0..layer.order() {
            let g = layer.elem_at(gi);
            let auto = der.action_of(&g);
            if g != layer.zero() {
                assert!((0..der.graph.num_edges()).all(|e| auto.eperm[e] != e));
            }
        }
        // stabilizer order = ramification of the to-base covering
        let ram = der.covering_to_base().validate().unwrap();
        for w in 0..der.graph.num_vertices() {
            assert_eq!(der.stabilizer_order(w), ram.indices[w]);
        }
    }

    #[test]
    fn group_ring_laplacian_matches_derived_graph() {
        for p in [2u64, 3] {
            for m in 1..=3usize {
                for case in [InertiaCase::FiniteG, InertiaCase::ZpLine, InertiaCase::FullGroup] {
                    for n in 0..=2u32 {
                        let vg = canonical_case_voltage(p, m, case).unwrap();
                        let fv = vg.at_layer(n).unwrap();
                        assert!(
                            fv.check_group_ring_laplacian().unwrap().is_ok(),
                            "p={p} m={m} case={case:?} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn group_ring_laplacian_single_loop_generator() {
        // one vertex, one loop carrying a generator of the Z_p factor
        let mut base = Graph::with_vertices(1);
        base.add_edge(0, 0);
        let mut vg = VoltageGraph::new(base, spec(2, &[]));
        let one = GroupElement::new(vg.spec(), BigInt::from(1), &[]).unwrap();
        vg.set_voltage(0, one);
        for n in 0..=4 {
            let fv = vg.at_layer(n).unwrap();
            assert!(fv.check_group_ring_laplacian().unwrap().is_ok(), "level {n}");
        }
    }

    #[test]
    fn all_identity_voltage_disconnects() {
        let vg = VoltageGraph::new(cycle_graph(3), spec(2, &[]));
        let der = vg.derive(1).unwrap();
        assert_eq!(connectivity(&der), 2);
    }

    #[test]
    fn disconnected_base_multiplies_components() {
        let mut base = Graph::with_vertices(4);
        base.add_edge(0, 1);
        base.add_edge(2, 3);
        let vg = VoltageGraph::new(base, spec(2, &[]));
        let der = vg.derive(1).unwrap();
        assert_eq!(connectivity(&der), 4);
    }

    #[test]
    fn canonical_towers_are_connected() {
        for case in [InertiaCase::FiniteG, InertiaCase::ZpLine, InertiaCase::FullGroup] {
            let vg = canonical_case_voltage(2, 3, case).unwrap();
            for n in 0..=3 {
                assert!(vg.derive(n).unwrap().is_connected(), "{case:?} level {n}");
                assert!(vg.derive_base(n).unwrap().is_connected());
            }
        }
    }

    #[test]
    fn extraction_round_trips_a_derived_layer() {
        let vg = canonical_case_voltage(2, 2, InertiaCase::FiniteG).unwrap();
        let der = vg.derive(1).unwrap();
        let f = der.covering_to_base();
        let action = der.full_action();
        let extracted = extract_voltage(&f, &action).unwrap();
        assert_eq!(extracted.derived.graph.num_vertices(), der.graph.num_vertices());
        assert_eq!(extracted.derived.graph.num_edges(), der.graph.num_edges());
    }

    #[test]
    fn extraction_from_parallel_edge_rotation() {
        // the rotation action on the parallel edges of the p-fold thickened
        // cycle: vertex fibers are singletons, so inertia is everything
        let m = 3usize;
        let p = 3u64;
        let domain = multi_cycle(m, p as usize);
        let codomain = cycle_graph(m);
        let vmap: Vec<usize> = (0..m).collect();
        let mut emap = vec![0usize; domain.num_edges()];
        for i in 0..m {
            for j in 0..p as usize {
                emap[2 * (i * p as usize + j)] = 2 * i;
                emap[2 * (i * p as usize + j) + 1] = 2 * i + 1;
            }
        }
        let f = Covering { domain: domain.clone(), codomain, vmap, emap };
        let layer = spec(p, &[]).layer(1).unwrap();
        let autos = (0..p)
            .map(|k| {
                let vperm = (0..m).collect();
                let eperm = (0..domain.num_edges())
                    .map(|e| {
                        let i = (e / 2) / p as usize;
                        let j = (e / 2) % p as usize;
                        let jj = (j + k as usize) % p as usize;
                        2 * (i * p as usize + jj) + e % 2
                    })
                    .collect();
                GraphAutomorphism { vperm, eperm }
            })
            .collect();
        let action = LayerAction { layer: layer.clone(), autos };
        let out = extract_voltage(&f, &action).unwrap();
        for v in 0..m {
            assert_eq!(out.voltage.inertia(v).order(), p);
        }
    }

    #[test]
    fn extraction_rejects_broken_actions() {
        let vg = canonical_case_voltage(2, 2, InertiaCase::FiniteG).unwrap();
        let der = vg.derive(1).unwrap();
        let f = der.covering_to_base();
        let mut action = der.full_action();
        // corrupt the identity
        action.autos[0].vperm.swap(0, 1);
        assert!(matches!(extract_voltage(&f, &action), Err(Error::GaloisAxiom(_))));
    }

    #[test]
    fn layer_covering_ramification_is_the_local_index() {
        // the ramification of X~(n_hi) -> X~(n_lo) over v is the order of
        // the intersection of the inertia image with the kernel subgroup
        // generated by p^(n_lo) in the Z/p^(n_hi) coordinate
        let mut cases: Vec<VoltageGraph> = InertiaCase::ALL
            .iter()
            .map(|&c| canonical_case_voltage(2, 2, c).unwrap())
            .collect();
        let mut mixed = canonical_case_voltage(2, 2, InertiaCase::FiniteG).unwrap();
        mixed.set_inertia(
            0,
            SubgroupSpec {
                generators: vec![crate::groups::InertiaGenerator { zp: ZpPart::Pow(1), g: vec![1] }],
            },
        );
        cases.push(mixed);
        for vg in &cases {
            let (n_hi, n_lo) = (3u32, 1u32);
            let cov = vg.layer_covering(n_hi, n_lo).unwrap();
            let ram = cov.validate().unwrap();
            let layer = vg.spec().layer(n_hi).unwrap();
            let kernel = FiniteSubgroup::generate(
                layer.clone(),
                &[layer
                    .elem_from_signed(&[2i64.pow(n_lo), 0])
                    .unwrap()],
            );
            let der = vg.derive(n_hi).unwrap();
            for w in 0..der.graph.num_vertices() {
                let (v, _) = der.vertex_label(w);
                let image = vg.inertia(v).image_in(&layer).unwrap();
                let expect = image.intersect(&kernel).unwrap().order();
                assert_eq!(ram.indices[w], expect, "vertex {w} over {v}");
            }
            // degrees across levels multiply: [X~_3 : X~_1] = p^2
            assert_eq!(cov.degree().unwrap(), 4);
        }
    }

    #[test]
    fn extraction_of_identity_covering_is_trivial() {
        let base = cycle_graph(3);
        let trivial_layer = spec(2, &[]).layer(0).unwrap();
        let f = Covering::identity(&base);
        let action = LayerAction {
            layer: trivial_layer.clone(),
            autos: vec![GraphAutomorphism {
                vperm: (0..base.num_vertices()).collect(),
                eperm: (0..base.num_edges()).collect(),
            }],
        };
        let out = extract_voltage(&f, &action).unwrap();
        for e in 0..base.num_edges() {
            assert_eq!(*out.voltage.alpha(e), trivial_layer.zero());
        }
        for v in 0..base.num_vertices() {
            assert!(out.voltage.inertia(v).is_trivial());
        }
        assert_eq!(out.derived.graph.num_vertices(), base.num_vertices());
    }

    #[test]
    fn derive_is_safe_across_threads() {
        let vg = std::sync::Arc::new(canonical_case_voltage(2, 3, InertiaCase::ZpLine).unwrap());
        let handles: Vec<_> = (0..=3u32)
            .map(|n| {
                let vg = vg.clone();
                std::thread::spawn(move || vg.derive(n).unwrap().graph.num_edges())
            })
            .collect();
        let counts: Vec<usize> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert_eq!(counts, vec![12, 24, 48, 96]);
    }

    #[test]
    fn inertia_with_symbolic_power() {
        // inertia p^1 Z_p: ramification p^(n-1) at layer n of the base tower
        let mut vg = VoltageGraph::new(cycle_graph(2), spec(2, &[]));
        let one = GroupElement::new(vg.spec(), BigInt::from(1), &[]).unwrap();
        vg.set_voltage(0, one);
        let sub = SubgroupSpec {
            generators: vec![crate::groups::InertiaGenerator { zp: ZpPart::Pow(1), g: vec![] }],
        };
        vg.set_inertia(0, sub.clone());
        vg.set_inertia(1, sub);
        for n in 1..=3u32 {
            let cov = vg.covering_to_base(n).unwrap();
            let ram = cov.validate().unwrap();
            assert!(ram.indices.iter().all(|&r| r == 2u64.pow(n - 1)));
        }
    }
}
