//! Deterministic text and CSV renderings of the computation results. Every
//! function returns the complete output as a string; byte-identical output
//! across runs on the same input is part of the contract (big integers are
//! rendered as decimal, orderings are fixed by the inputs).

use kidagraph_core::iwasawa::{CaseGridReport, IwasawaFit, KidaReport, TowerReport, TowerKind};
use kidagraph_core::voltage::DerivedLayer;

use crate::jobspec::JobSpec;

pub fn tower_kind_name(kind: TowerKind) -> &'static str {
    match kind {
        TowerKind::Full => "full",
        TowerKind::Base => "base",
    }
}

/// CSV of one tower walk: `n,vertices,edges,kappa,ordp`.
pub fn tower_csv(report: &TowerReport) -> String {
    let mut out = String::from("n,vertices,edges,kappa,ordp\n");
    for i in 0..report.levels.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            report.levels[i],
            report.vertex_counts[i],
            report.edge_counts[i],
            report.kappas[i],
            report.ordp[i],
        ));
    }
    out
}

/// CSV summary of fitted invariants, one row per tower.
pub fn fits_csv(fits: &[(TowerKind, &IwasawaFit)]) -> String {
    let mut out = String::from("tower,lambda,mu,nu,n0,stabilized\n");
    for (kind, fit) in fits {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            tower_kind_name(*kind),
            fit.lambda,
            fit.mu,
            fit.nu,
            fit.n0,
            fit.stabilized,
        ));
    }
    out
}

/// Aligned text table of one tower walk plus its fit.
pub fn tower_table(report: &TowerReport, fit: Option<&IwasawaFit>) -> String {
    let mut out = format!("tower: {}\n", tower_kind_name(report.kind));
    out.push_str(&format!(
        "{:>4} {:>9} {:>9} {:>6}  kappa\n",
        "n", "vertices", "edges", "ordp"
    ));
    for i in 0..report.levels.len() {
        out.push_str(&format!(
            "{:>4} {:>9} {:>9} {:>6}  {}\n",
            report.levels[i],
            report.vertex_counts[i],
            report.edge_counts[i],
            report.ordp[i],
            report.kappas[i],
        ));
    }
    if let Some(fit) = fit {
        out.push_str(&fit_line(fit));
    }
    out
}

pub fn fit_line(fit: &IwasawaFit) -> String {
    format!(
        "fit: lambda={} mu={} nu={} from n0={} (stabilized: {})\n",
        fit.lambda, fit.mu, fit.nu, fit.n0, fit.stabilized
    )
}

/// Key-value CSV summary of an identity check.
pub fn kida_summary_csv(report: &KidaReport) -> String {
    let mut out = String::from("key,value\n");
    let mut push = |k: &str, v: String| out.push_str(&format!("{k},{v}\n"));
    push("degree", report.degree.to_string());
    push("star_holds", report.star_holds.to_string());
    push("mu_base", report.base_fit.mu.to_string());
    push("mu_full", report.tilde_fit.mu.to_string());
    push("lambda_base", report.base_fit.lambda.to_string());
    push("lambda_full", report.tilde_fit.lambda.to_string());
    push("mu_equivalence_ok", report.mu_equivalence_ok.to_string());
    push("lhs", report.lhs.to_string());
    push(
        "rhs",
        report.rhs.map_or_else(|| "n/a".into(), |r| r.to_string()),
    );
    push(
        "lambda_identity",
        report
            .lambda_identity
            .map_or_else(|| "n/a".into(), |b| b.to_string()),
    );
    push("verdict", verdict_word(report));
    out
}

/// Per-vertex CSV of the correction data: `vertex,n_v,m_v,term,in_star`.
pub fn kida_corrections_csv(report: &KidaReport, job: &JobSpec) -> String {
    let mut out = String::from("vertex,n_v,m_v,term,in_star\n");
    for c in &report.corrections {
        let limit = &report.limits[c.vertex];
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            job.vertex_names[c.vertex],
            c.n_v.map_or_else(|| "inf".into(), |v| v.to_string()),
            c.m_v,
            c.term.map_or_else(|| "n/a".into(), |t| t.to_string()),
            limit.in_star,
        ));
    }
    out
}

fn verdict_word(report: &KidaReport) -> String {
    use kidagraph_core::iwasawa::Verdict;
    match &report.verdict {
        Verdict::Pass => "pass".into(),
        Verdict::Inconclusive(_) => "inconclusive".into(),
        Verdict::TheoremViolation(_) => "theorem-violation".into(),
    }
}

/// Human-readable rendering of an identity check.
pub fn kida_table(report: &KidaReport, job: &JobSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "towers: base (lambda={}, mu={}, nu={}), full (lambda={}, mu={}, nu={})\n",
        report.base_fit.lambda,
        report.base_fit.mu,
        report.base_fit.nu,
        report.tilde_fit.lambda,
        report.tilde_fit.mu,
        report.tilde_fit.nu,
    ));
    out.push_str(&format!(
        "degree #G = {}, vertex condition (inertia infinite or trivial): {}\n",
        report.degree, report.star_holds
    ));
    out.push_str(&format!("{:>8} {:>6} {:>4} {:>6} {:>8}\n", "vertex", "n_v", "m_v", "term", "in_star"));
    for c in &report.corrections {
        let limit = &report.limits[c.vertex];
        out.push_str(&format!(
            "{:>8} {:>6} {:>4} {:>6} {:>8}\n",
            job.vertex_names[c.vertex],
            c.n_v.map_or_else(|| "inf".into(), |v| v.to_string()),
            c.m_v,
            c.term.map_or_else(|| "n/a".into(), |t| t.to_string()),
            limit.in_star,
        ));
    }
    out.push_str(&format!("mu-equivalence: {}\n", if report.mu_equivalence_ok { "ok" } else { "FAILED" }));
    match report.rhs {
        Some(rhs) => out.push_str(&format!(
            "lambda identity: {} {} {} (lambda_full + 1 vs #G(lambda_base + 1) - corrections)\n",
            report.lhs,
            if report.lambda_identity == Some(true) { "=" } else { "!=" },
            rhs
        )),
        None => out.push_str("lambda identity: not applicable (hypotheses fail)\n"),
    }
    out.push_str(&format!("verdict: {}\n", report.verdict));
    out
}

/// CSV of the canonical case grid: one row per checked grid row.
pub fn cases_csv(grid: &CaseGridReport) -> String {
    let mut out = String::from("case,n_max,row,pass,level,expected,actual\n");
    for case in &grid.cases {
        for row in &case.rows {
            match row.failures.first() {
                None => out.push_str(&format!(
                    "{},{},{},true,,,\n",
                    case.case, case.n_max, row.row
                )),
                Some(cell) => out.push_str(&format!(
                    "{},{},{},false,{},{},{}\n",
                    case.case,
                    case.n_max,
                    row.row,
                    cell.level.map_or_else(String::new, |l| l.to_string()),
                    cell.expected,
                    cell.actual
                )),
            }
        }
    }
    out
}

pub fn cases_table(grid: &CaseGridReport) -> String {
    let mut out = format!("canonical case grid: p={} m={}\n", grid.p, grid.m);
    for case in &grid.cases {
        out.push_str(&format!("case {} (levels 0..={}):\n", case.case, case.n_max));
        for row in &case.rows {
            out.push_str(&format!(
                "  {:<18} {}\n",
                row.row,
                if row.pass { "pass" } else { "FAIL" }
            ));
            for cell in &row.failures {
                out.push_str(&format!(
                    "      level {:?}: expected {}, got {}\n",
                    cell.level, cell.expected, cell.actual
                ));
            }
        }
    }
    out.push_str(&format!(
        "grid: {}\n",
        if grid.all_pass() { "all-pass" } else { "FAILURES" }
    ));
    out
}

/// CSV of the derived-graph vertices: `id,base_vertex,coset_rep`.
pub fn derived_vertices_csv(layer: &DerivedLayer, job: &JobSpec) -> String {
    let mut out = String::from("id,base_vertex,coset_rep\n");
    for w in 0..layer.graph.num_vertices() {
        let (v, rep) = layer.vertex_label(w);
        out.push_str(&format!("{w},{},{rep}\n", job.vertex_names[v]));
    }
    out
}

/// CSV of the derived-graph edges: `id,src,dst,bar,gamma,base_edge`. The
/// `src`/`dst`/`bar` columns are row ids in this file and the vertices
/// file, so the graph can be re-ingested without the labels.
pub fn derived_edges_csv(layer: &DerivedLayer, job: &JobSpec) -> String {
    let mut out = String::from("id,src,dst,bar,gamma,base_edge\n");
    for e in 0..layer.graph.num_edges() {
        let (gamma, base_edge) = layer.edge_label(e);
        out.push_str(&format!(
            "{e},{},{},{},{gamma},{}\n",
            layer.graph.src(e),
            layer.graph.tgt(e),
            layer.graph.bar(e),
            job.directed_edge_name(base_edge),
        ));
    }
    out
}
