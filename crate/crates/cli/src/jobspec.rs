//! The declarative job format: a TOML document describing a base graph,
//! the group `Z_p x G`, one voltage per unoriented edge (the reverse
//! orientation is synthesized by negation), and inertia generators per
//! vertex.
//!
//! Parsing returns either a fully validated [`JobSpec`] or a list of
//! diagnostics, each carrying a stable code and the offending field path.
//!
//! Schema (format_version 1):
//!
//! ```toml
//! format_version = 1
//!
//! [group]
//! p = 2
//! g_factors = [2]          # cyclic factor orders of G, powers of p
//!
//! [graph]
//! vertices = ["v1", "v2"]
//!
//! [[graph.edges]]
//! name = "e1"
//! from = "v1"
//! to = "v2"
//! voltage = { zp = 1, g = [1] }   # optional, defaults to the identity
//!
//! [inertia]                 # optional, defaults to trivial everywhere
//! v1 = [{ zp = "p^0", g = [0] }]  # zp is "0" or "p^k"
//!
//! [task]
//! n_max = 4                 # optional, defaults to 4
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Deserialize;

use kidagraph_core::groups::{GroupElement, InertiaGenerator, ProfiniteSpec, SubgroupSpec, ZpPart};
use kidagraph_core::graph::Graph;
use kidagraph_core::voltage::VoltageGraph;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_N_MAX: u32 = 4;

/// One validation problem, with a stable machine-readable code and the
/// field path it refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.field, self.message)
    }
}

/// A fully validated job: the voltage graph plus the naming needed for
/// readable outputs.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub vertex_names: Vec<String>,
    /// One name per unoriented edge, in input order; directed edge 2i is
    /// the stated orientation of edge i, 2i+1 its reverse.
    pub edge_names: Vec<String>,
    pub voltage_graph: VoltageGraph,
    pub n_max: u32,
}

impl JobSpec {
    /// Name of a directed base edge: the input name, prefixed with `~` for
    /// the synthesized reverse orientation.
    pub fn directed_edge_name(&self, e: usize) -> String {
        let name = &self.edge_names[e / 2];
        if e.is_multiple_of(2) {
            name.clone()
        } else {
            format!("~{name}")
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    format_version: u32,
    group: RawGroup,
    graph: RawGraph,
    #[serde(default)]
    inertia: BTreeMap<String, Vec<RawGenerator>>,
    #[serde(default)]
    task: RawTask,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    p: u64,
    #[serde(default)]
    g_factors: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    name: String,
    from: String,
    to: String,
    #[serde(default)]
    voltage: Option<RawVoltage>,
    /// Optional explicit voltage of the reverse orientation; must equal the
    /// negation of `voltage`.
    #[serde(default)]
    reverse_voltage: Option<RawVoltage>,
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
struct RawVoltage {
    #[serde(default)]
    zp: i64,
    #[serde(default)]
    g: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    zp: String,
    #[serde(default)]
    g: Vec<i64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTask {
    n_max: Option<u32>,
}

/// Parses and validates a job document. All independent problems are
/// collected before giving up.
pub fn parse_jobspec(text: &str) -> Result<JobSpec, Vec<Diagnostic>> {
    let raw: RawJob = toml::from_str(text).map_err(|e| {
        vec![Diagnostic {
            code: "syntax",
            field: "(document)".into(),
            message: e.to_string(),
        }]
    })?;

    let mut diags = Vec::new();
    if raw.format_version != FORMAT_VERSION {
        diags.push(Diagnostic {
            code: "format-version",
            field: "format_version".into(),
            message: format!(
                "unsupported format_version {}, expected {FORMAT_VERSION}",
                raw.format_version
            ),
        });
    }

    let spec = match ProfiniteSpec::new(raw.group.p, raw.group.g_factors.clone()) {
        Ok(s) => Some(s),
        Err(e) => {
            let code = if kidagraph_core::groups::is_prime(raw.group.p) {
                "bad-g-factor"
            } else {
                "non-prime-p"
            };
            diags.push(Diagnostic { code, field: "group".into(), message: e.to_string() });
            None
        }
    };

    if raw.graph.vertices.is_empty() {
        diags.push(Diagnostic {
            code: "empty-graph",
            field: "graph.vertices".into(),
            message: "the graph has no vertices".into(),
        });
    }
    let mut vertex_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, name) in raw.graph.vertices.iter().enumerate() {
        if vertex_ids.insert(name, i).is_some() {
            diags.push(Diagnostic {
                code: "duplicate-vertex",
                field: format!("graph.vertices[{i}]"),
                message: format!("vertex name '{name}' appears twice"),
            });
        }
    }
    let mut edge_names_seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, edge) in raw.graph.edges.iter().enumerate() {
        if edge_names_seen.insert(&edge.name, i).is_some() {
            diags.push(Diagnostic {
                code: "duplicate-edge",
                field: format!("graph.edges[{i}].name"),
                message: format!("edge name '{}' appears twice", edge.name),
            });
        }
        for (end, field) in [(&edge.from, "from"), (&edge.to, "to")] {
            if !vertex_ids.contains_key(end.as_str()) {
                diags.push(Diagnostic {
                    code: "dangling-vertex-ref",
                    field: format!("graph.edges[{i}].{field}"),
                    message: format!("unknown vertex '{end}'"),
                });
            }
        }
    }
    for name in raw.inertia.keys() {
        if !vertex_ids.contains_key(name.as_str()) {
            diags.push(Diagnostic {
                code: "dangling-inertia-vertex",
                field: format!("inertia.{name}"),
                message: format!("unknown vertex '{name}'"),
            });
        }
    }

    let Some(spec) = spec else { return Err(diags) };
    let g_arity = spec.g_factors().len();

    // voltages and inertia generators type-check against the group spec
    for (i, edge) in raw.graph.edges.iter().enumerate() {
        for (v, field) in [(&edge.voltage, "voltage"), (&edge.reverse_voltage, "reverse_voltage")] {
            if let Some(v) = v {
                if v.g.len() != g_arity {
                    diags.push(Diagnostic {
                        code: "bad-voltage-arity",
                        field: format!("graph.edges[{i}].{field}.g"),
                        message: format!(
                            "voltage has {} G-coordinates, the group has {g_arity}",
                            v.g.len()
                        ),
                    });
                }
            }
        }
    }
    let mut inertia_specs: BTreeMap<usize, SubgroupSpec> = BTreeMap::new();
    for (name, gens) in &raw.inertia {
        let Some(&v) = vertex_ids.get(name.as_str()) else { continue };
        let mut generators = Vec::new();
        for (j, gen) in gens.iter().enumerate() {
            let zp = match parse_zp_part(&gen.zp) {
                Some(z) => z,
                None => {
                    diags.push(Diagnostic {
                        code: "bad-inertia-zp",
                        field: format!("inertia.{name}[{j}].zp"),
                        message: format!("'{}' is not '0' or 'p^k'", gen.zp),
                    });
                    continue;
                }
            };
            if gen.g.len() != g_arity {
                diags.push(Diagnostic {
                    code: "bad-inertia-arity",
                    field: format!("inertia.{name}[{j}].g"),
                    message: format!(
                        "generator has {} G-coordinates, the group has {g_arity}",
                        gen.g.len()
                    ),
                });
                continue;
            }
            let g = gen
                .g
                .iter()
                .zip(spec.g_factors())
                .map(|(&x, &m)| x.rem_euclid(m as i64) as u64)
                .collect();
            generators.push(InertiaGenerator { zp, g });
        }
        inertia_specs.insert(v, SubgroupSpec { generators });
    }

    if !diags.is_empty() {
        return Err(diags);
    }

    // assemble the voltage graph
    let mut base = Graph::with_vertices(raw.graph.vertices.len());
    for edge in &raw.graph.edges {
        base.add_edge(vertex_ids[edge.from.as_str()], vertex_ids[edge.to.as_str()]);
    }
    let mut vg = VoltageGraph::new(base, spec);
    for (i, edge) in raw.graph.edges.iter().enumerate() {
        let forward = edge.voltage.clone().unwrap_or(RawVoltage { zp: 0, g: vec![0; g_arity] });
        let mut g = forward.g.clone();
        g.resize(g_arity, 0);
        let value = GroupElement::new(vg.spec(), BigInt::from(forward.zp), &g)
            .expect("arity checked above");
        vg.set_voltage(2 * i, value.clone());
        if let Some(rev) = &edge.reverse_voltage {
            let mut rg = rev.g.clone();
            rg.resize(g_arity, 0);
            let rev_value = GroupElement::new(vg.spec(), BigInt::from(rev.zp), &rg)
                .expect("arity checked above");
            if rev_value != value.negate(vg.spec()) {
                return Err(vec![Diagnostic {
                    code: "voltage-involution",
                    field: format!("graph.edges[{i}].reverse_voltage"),
                    message: "voltage involution violated: reverse_voltage is not the negation \
                              of voltage"
                        .into(),
                }]);
            }
        }
    }
    for (v, sub) in inertia_specs {
        vg.set_inertia(v, sub);
    }
    debug_assert!(vg.validate().is_ok());

    Ok(JobSpec {
        vertex_names: raw.graph.vertices,
        edge_names: raw.graph.edges.iter().map(|e| e.name.clone()).collect(),
        voltage_graph: vg,
        n_max: raw.task.n_max.unwrap_or(DEFAULT_N_MAX),
    })
}

fn parse_zp_part(s: &str) -> Option<ZpPart> {
    let s = s.trim();
    if s == "0" {
        return Some(ZpPart::Zero);
    }
    let k = s.strip_prefix("p^")?;
    k.parse::<u32>().ok().map(ZpPart::Pow)
}
